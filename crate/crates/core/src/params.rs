//! Physical parameters and unit conventions.
//!
//! Everything is SI by default. [`PhysicalParams::natural_units`] rescales a
//! parameter set to ħ = m = ε = 1, where time is measured in units of 1/ε and
//! the only remaining free group is the recoil-to-coupling ratio ħk²/(mε).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    mass: f64,
    epsilon: f64,
    k: f64,
    hbar: f64,
    lambda: f64,
    a0: f64,
}

/// Conversion factors from natural units back to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    /// Seconds per unit time (1/ε).
    pub time: f64,
    /// Metres per unit length, √(ħ/(mε)).
    pub length: f64,
    /// kg·m/s per unit momentum, √(ħmε).
    pub momentum: f64,
}

impl PhysicalParams {
    /// SI parameter set with ħ fixed to [`HBAR`].
    pub fn new(mass: f64, epsilon: f64, k: f64) -> Result<Self> {
        Self::with_hbar(HBAR, mass, epsilon, k)
    }

    pub fn with_hbar(hbar: f64, mass: f64, epsilon: f64, k: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("epsilon", epsilon), ("k", k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            mass,
            epsilon,
            k,
            hbar,
            lambda: TAU / k,
            a0: hbar * k * epsilon / mass,
        })
    }

    /// Parameter set used for the nodal path and distinguishability figures:
    /// m = 1e-26 kg, ε = 1e5 s⁻¹, λ = 1e-5 m.
    pub fn reference() -> Self {
        Self::new(1e-26, 1e5, TAU / 1e-5).expect("reference parameters are valid")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Mode wavelength 2π/k.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Branch acceleration scale ħkε/m.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Dimensionless recoil-to-coupling ratio ħk²/(mε).
    pub fn recoil_ratio(&self) -> f64 {
        self.hbar * self.k * self.k / (self.mass * self.epsilon)
    }

    /// Squared antinodal branch frequency ħεk²√(n+1)/m.
    pub fn antinodal_omega_sq(&self, n: u8) -> f64 {
        self.hbar * self.epsilon * self.k * self.k * f64::from(n + 1).sqrt() / self.mass
    }

    /// Interaction time for a given rescaled time ετ.
    pub fn time_from_eps_tau(&self, eps_tau: f64) -> f64 {
        eps_tau / self.epsilon
    }

    /// The same physics with ħ = m = ε = 1.
    pub fn natural_units(&self) -> (Self, Scales) {
        let scales = self.scales();
        let k = self.k * scales.length;
        let natural = Self::with_hbar(1.0, 1.0, 1.0, k).expect("positive by construction");
        (natural, scales)
    }

    pub fn scales(&self) -> Scales {
        Scales {
            time: 1.0 / self.epsilon,
            length: (self.hbar / (self.mass * self.epsilon)).sqrt(),
            momentum: (self.hbar * self.mass * self.epsilon).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_wavelength_and_acceleration() {
        let p = PhysicalParams::new(1e-26, 1e5, TAU / 1e-5).unwrap();
        assert!((p.lambda() - 1e-5).abs() / 1e-5 < 1e-12);
        assert!((p.lambda() * p.k() - TAU).abs() / TAU < 1e-12);
        let a0 = HBAR * (TAU * 1e5) * 1e5 / 1e-26;
        assert!((p.a0() - a0).abs() / a0 < 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            PhysicalParams::new(-1.0, 1.0, 1.0),
            Err(crate::Error::Domain(_))
        ));
        assert!(PhysicalParams::new(1.0, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn natural_units_preserve_recoil_ratio() {
        let p = PhysicalParams::reference();
        let (n, s) = p.natural_units();
        assert_eq!(n.hbar(), 1.0);
        assert!((n.recoil_ratio() - p.recoil_ratio()).abs() < 1e-12 * p.recoil_ratio());
        // a0 in natural units times the SI acceleration unit gives back a0
        let accel_unit = s.length / (s.time * s.time);
        assert!((n.a0() * accel_unit - p.a0()).abs() / p.a0() < 1e-12);
    }
}
