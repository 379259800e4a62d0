//! Pure Gaussian translational states.
//!
//! A packet is stored by its first and second moments plus a global phase.
//! The wavefunction is
//!
//! ```text
//! ψ(x) = (2a/π)^¼ · exp(−A (x−x0)² + i p0 (x−x0)/ħ + iγ),   A = a + ib
//! a = 1/(4 var_x),   b = −cov_xp / (2ħ var_x)
//! ```
//!
//! so `phase` is the argument of ψ at the centroid. Only pure states are
//! representable: `var_x·var_p − cov_xp² = ħ²/4` always holds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::params::PhysicalParams;

const PURITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    x0: f64,
    p0: f64,
    var_x: f64,
    cov_xp: f64,
    phase: f64,
    hbar: f64,
}

impl GaussianState {
    /// Builds a packet from its moments. `var_p` must saturate the
    /// Robertson–Schrödinger bound, since mixed Gaussians are not supported.
    pub fn new(
        x0: f64,
        p0: f64,
        var_x: f64,
        var_p: f64,
        cov_xp: f64,
        phase: f64,
        hbar: f64,
    ) -> Result<Self> {
        let all = [x0, p0, var_x, var_p, cov_xp, phase, hbar];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(domain("Gaussian moments must be finite"));
        }
        if var_x <= 0.0 || var_p <= 0.0 || hbar <= 0.0 {
            return Err(domain(format!(
                "variances and hbar must be positive (var_x={var_x}, var_p={var_p}, hbar={hbar})"
            )));
        }
        let det = var_x * var_p - cov_xp * cov_xp;
        let bound = 0.25 * hbar * hbar;
        if det < bound * (1.0 - PURITY_TOL) {
            return Err(domain(format!(
                "Heisenberg bound violated: det = {det:e} < ħ²/4 = {bound:e}"
            )));
        }
        if det > bound * (1.0 + PURITY_TOL) {
            return Err(domain("mixed Gaussian states are not representable"));
        }
        Ok(Self::from_parts(x0, p0, var_x, cov_xp, phase, hbar))
    }

    /// Minimum-uncertainty packet with no chirp: σx·σp = ħ/2, zero phase.
    pub fn minimum_uncertainty(x0: f64, p0: f64, sigma_x: f64, hbar: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(domain(format!("packet width must be > 0, got {sigma_x}")));
        }
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(domain("packet centroid must be finite"));
        }
        Ok(Self::from_parts(x0, p0, sigma_x * sigma_x, 0.0, 0.0, hbar))
    }

    pub(crate) fn from_parts(
        x0: f64,
        p0: f64,
        var_x: f64,
        cov_xp: f64,
        phase: f64,
        hbar: f64,
    ) -> Self {
        Self {
            x0,
            p0,
            var_x,
            cov_xp,
            phase: wrap_phase(phase),
            hbar,
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn var_x(&self) -> f64 {
        self.var_x
    }

    pub fn var_p(&self) -> f64 {
        (0.25 * self.hbar * self.hbar + self.cov_xp * self.cov_xp) / self.var_x
    }

    pub fn cov_xp(&self) -> f64 {
        self.cov_xp
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn sigma_x(&self) -> f64 {
        self.var_x.sqrt()
    }

    pub fn sigma_p(&self) -> f64 {
        self.var_p().sqrt()
    }

    /// `var_x·var_p − cov_xp²`; equals ħ²/4 for every representable packet.
    pub fn uncertainty_determinant(&self) -> f64 {
        self.var_x * self.var_p() - self.cov_xp * self.cov_xp
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self::from_parts(self.x0, self.p0, self.var_x, self.cov_xp, phase, self.hbar)
    }

    /// Complex width parameter A of the exponent −A(x−x0)².
    pub fn width_parameter(&self) -> Complex64 {
        let a = 0.25 / self.var_x;
        let b = -self.cov_xp / (2.0 * self.hbar * self.var_x);
        Complex64::new(a, b)
    }

    /// ψ(x).
    pub fn amplitude(&self, x: f64) -> Complex64 {
        let a = self.width_parameter();
        let u = x - self.x0;
        let norm = (2.0 * a.re / PI).powf(0.25);
        let exponent = -a * u * u + Complex64::i() * (self.p0 * u / self.hbar + self.phase);
        norm * exponent.exp()
    }

    /// Momentum-space amplitude ψ̃(p) = (2πħ)^(−½) ∫ ψ(x) e^(−ipx/ħ) dx.
    pub fn momentum_amplitude(&self, p: f64) -> Complex64 {
        let a = self.width_parameter();
        let norm = (2.0 * a.re / PI).powf(0.25) / (TAU * self.hbar).sqrt();
        let dp = p - self.p0;
        let exponent = -dp * dp / (4.0 * a * self.hbar * self.hbar)
            + Complex64::i() * (self.phase - p * self.x0 / self.hbar);
        norm * (PI / a).sqrt() * exponent.exp()
    }

    /// Field-wise equality within `tol`, each field measured on its natural scale.
    pub fn is_close(&self, other: &Self, tol: f64) -> bool {
        let sx = self.sigma_x().max(other.sigma_x());
        let sp = self.sigma_p().max(other.sigma_p());
        let dphase = (Complex64::from_polar(1.0, self.phase)
            - Complex64::from_polar(1.0, other.phase))
        .norm();
        (self.x0 - other.x0).abs() <= tol * sx
            && (self.p0 - other.p0).abs() <= tol * sp
            && (self.var_x - other.var_x).abs() <= tol * self.var_x.max(other.var_x)
            && (self.cov_xp - other.cov_xp).abs() <= tol * self.hbar
            && dphase <= tol
            && (self.hbar - other.hbar).abs() <= tol * self.hbar
    }
}

/// Minimum-uncertainty packet for a given parameter set.
pub fn minimum_uncertainty_packet(
    params: &PhysicalParams,
    x0: f64,
    p0: f64,
    sigma_x: f64,
) -> Result<GaussianState> {
    GaussianState::minimum_uncertainty(x0, p0, sigma_x, params.hbar())
}

/// Exact inner product ⟨a|b⟩ = ∫ ψ_a*(x) ψ_b(x) dx.
pub fn gaussian_overlap(a: &GaussianState, b: &GaussianState) -> Complex64 {
    debug_assert!((a.hbar - b.hbar).abs() <= 1e-12 * a.hbar);
    let hbar = a.hbar;
    let i = Complex64::i();
    let wa = a.width_parameter();
    let wb = b.width_parameter();
    // work in u = x − x_a so only differences enter the exponent
    let d = b.x0 - a.x0;
    let alpha = wa.conj() + wb;
    let beta = 2.0 * wb * d + i * (b.p0 - a.p0) / hbar;
    let c = -wb * d * d - i * (b.p0 * d / hbar) + i * (b.phase - a.phase);
    let norm = (4.0 * wa.re * wb.re / (PI * PI)).powf(0.25);
    norm * (PI / alpha).sqrt() * (beta * beta / (4.0 * alpha) + c).exp()
}

pub(crate) fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HBAR;

    fn quad_overlap(a: &GaussianState, b: &GaussianState) -> Complex64 {
        // brute-force trapezoid on a wide grid
        let lo = (a.x0 - 12.0 * a.sigma_x()).min(b.x0 - 12.0 * b.sigma_x());
        let hi = (a.x0 + 12.0 * a.sigma_x()).max(b.x0 + 12.0 * b.sigma_x());
        let n = 200_000;
        let dx = (hi - lo) / n as f64;
        (0..=n)
            .map(|j| {
                let x = lo + j as f64 * dx;
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                w * a.amplitude(x).conj() * b.amplitude(x)
            })
            .sum::<Complex64>()
            * dx
    }

    #[test]
    fn minimum_uncertainty_moments() {
        let lambda = 1e-5;
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, lambda / 10.0, HBAR).unwrap();
        assert!((g.sigma_p() - 5.0 * HBAR / lambda).abs() / g.sigma_p() < 1e-12);
        let det = g.uncertainty_determinant();
        assert!((det - 0.25 * HBAR * HBAR).abs() <= 1e-12 * det);
        let g = GaussianState::minimum_uncertainty(1e-6, 0.0, 1e-6, HBAR).unwrap();
        assert!((g.var_x() - 1e-12).abs() < 1e-24);
        assert_eq!(g.cov_xp(), 0.0);
        assert_eq!(g.phase(), 0.0);
    }

    #[test]
    fn rejects_bad_widths_and_mixed_states() {
        assert!(GaussianState::minimum_uncertainty(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(GaussianState::minimum_uncertainty(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, 1.0, 0.1, 0.0, 0.0, 1.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, 1.0, 0.25, 0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn self_overlap_is_one() {
        let g = GaussianState::new(0.3, -1.2, 0.7, (0.25 + 0.09) / 0.7, 0.3, 1.1, 1.0).unwrap();
        let o = gaussian_overlap(&g, &g);
        assert!((o - 1.0).norm() < 1e-14);
    }

    #[test]
    fn displaced_equal_widths() {
        let s = 0.8;
        let dx = 1.3;
        let a = GaussianState::minimum_uncertainty(0.0, 0.0, s, 1.0).unwrap();
        let b = GaussianState::minimum_uncertainty(dx, 0.0, s, 1.0).unwrap();
        let o = gaussian_overlap(&a, &b);
        assert!((o.norm() - (-dx * dx / (8.0 * s * s)).exp()).abs() < 1e-14);
    }

    #[test]
    fn overlap_matches_quadrature_with_chirp_and_phase() {
        let a = GaussianState::new(0.2, 0.5, 0.6, (0.25 + 0.16) / 0.6, -0.4, 0.3, 1.0).unwrap();
        let b = GaussianState::new(-0.4, -0.7, 1.1, (0.25 + 0.04) / 1.1, 0.2, -2.0, 1.0).unwrap();
        let exact = gaussian_overlap(&a, &b);
        let quad = quad_overlap(&a, &b);
        assert!((exact - quad).norm() < 1e-9, "{exact} vs {quad}");
        let back = gaussian_overlap(&b, &a);
        assert!((back - exact.conj()).norm() < 1e-14);
    }

    #[test]
    fn momentum_amplitude_is_normalised_and_centred() {
        let g = GaussianState::new(0.4, 1.5, 0.5, (0.25 + 0.01) / 0.5, 0.1, 0.7, 1.0).unwrap();
        let sp = g.sigma_p();
        let n = 20_000;
        let lo = g.p0() - 12.0 * sp;
        let dp = 24.0 * sp / n as f64;
        let (mut norm, mut mean, mut second) = (0.0, 0.0, 0.0);
        for j in 0..=n {
            let p = lo + j as f64 * dp;
            let w = g.momentum_amplitude(p).norm_sqr() * dp;
            norm += w;
            mean += w * p;
            second += w * p * p;
        }
        assert!((norm - 1.0).abs() < 1e-10);
        assert!((mean - g.p0()).abs() < 1e-10);
        assert!((second - mean * mean - g.var_p()).abs() < 1e-9);
    }

    #[test]
    fn momentum_amplitude_matches_fourier_quadrature() {
        let g = GaussianState::new(0.3, 0.8, 0.4, (0.25 + 0.09) / 0.4, 0.3, 0.5, 1.0).unwrap();
        let p = 1.1;
        let n = 100_000;
        let lo = g.x0() - 12.0 * g.sigma_x();
        let dx = 24.0 * g.sigma_x() / n as f64;
        let quad: Complex64 = (0..=n)
            .map(|j| {
                let x = lo + j as f64 * dx;
                g.amplitude(x) * Complex64::from_polar(1.0, -p * x)
            })
            .sum::<Complex64>()
            * dx
            / TAU.sqrt();
        assert!((quad - g.momentum_amplitude(p)).norm() < 1e-9);
    }
}
