//! Internal two-level states in the (e, g) basis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Qubit amplitudes ordered `[e, g]`.
pub type Amplitudes = [Complex64; 2];

/// `cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    theta: f64,
    phi: f64,
}

impl QubitState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
            return Err(domain(format!("theta must lie in [0, π], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(domain(format!("phi must be finite, got {phi}")));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn amplitudes(&self) -> Amplitudes {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi)]
    }
}

/// 2×2 density matrix in the `[e, g]` basis, `rho[i][j] = ⟨i|ρ|j⟩`.
pub type DensityMatrix = [[Complex64; 2]; 2];

/// Outer product |a⟩⟨a|.
pub fn pure_density(a: &Amplitudes) -> DensityMatrix {
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            rho[i][j] = a[i] * a[j].conj();
        }
    }
    rho
}

/// π rotation about z: flips the sign of the |g⟩ amplitude.
pub fn apply_rotation_correction(a: &Amplitudes) -> Amplitudes {
    [a[0], -a[1]]
}

/// The same rotation acting on a density matrix.
pub fn rotate_density(rho: &DensityMatrix) -> DensityMatrix {
    [[rho[0][0], -rho[0][1]], [-rho[1][0], rho[1][1]]]
}

/// |⟨target|a⟩|² for normalized amplitudes.
pub fn fidelity(a: &Amplitudes, target: &QubitState) -> f64 {
    let t = target.amplitudes();
    (t[0].conj() * a[0] + t[1].conj() * a[1]).norm_sqr()
}

/// ⟨target|ρ|target⟩ / tr ρ.
pub fn density_fidelity(rho: &DensityMatrix, target: &QubitState) -> f64 {
    let t = target.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += t[i].conj() * rho[i][j] * t[j];
        }
    }
    let tr = rho[0][0].re + rho[1][1].re;
    (acc.re / tr).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rotation_example() {
        let q = QubitState::new(1.0, 0.4).unwrap();
        let a = q.amplitudes();
        let rotated = [a[0], -a[1]];
        let back = apply_rotation_correction(&rotated);
        assert!((fidelity(&back, &q) - 1.0).abs() < 1e-15);
        let q0 = QubitState::new(0.0, 0.3).unwrap();
        assert_eq!(apply_rotation_correction(&q0.amplitudes())[0], q0.amplitudes()[0]);
        assert_eq!(apply_rotation_correction(&q0.amplitudes())[1].norm(), 0.0);
    }

    #[test]
    fn fidelity_limits() {
        let e = QubitState::new(0.0, 0.0).unwrap();
        let g = QubitState::new(PI, 0.0).unwrap();
        assert!((fidelity(&e.amplitudes(), &e) - 1.0).abs() < 1e-15);
        assert!(fidelity(&g.amplitudes(), &e) < 1e-30);
    }

    #[test]
    fn rejects_out_of_range_theta() {
        assert!(QubitState::new(-0.1, 0.0).is_err());
        assert!(QubitState::new(3.2, 0.0).is_err());
        assert!(QubitState::new(1.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn unit_norm(theta in 0.0..=PI, phi in -7.0f64..7.0) {
            let a = QubitState::new(theta, phi).unwrap().amplitudes();
            prop_assert!((a[0].norm_sqr() + a[1].norm_sqr() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn rotation_is_an_involution(theta in 0.0..=PI, phi in -7.0f64..7.0) {
            let a = QubitState::new(theta, phi).unwrap().amplitudes();
            let b = apply_rotation_correction(&apply_rotation_correction(&a));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn density_and_pure_fidelity_agree(t1 in 0.0..=PI, p1 in 0.0..PI, t2 in 0.0..=PI, p2 in 0.0..PI) {
            let a = QubitState::new(t1, p1).unwrap().amplitudes();
            let target = QubitState::new(t2, p2).unwrap();
            let f = fidelity(&a, &target);
            prop_assert!((0.0..=1.0 + 1e-14).contains(&f));
            prop_assert!((density_fidelity(&pure_density(&a), &target) - f).abs() < 1e-12);
        }
    }
}
