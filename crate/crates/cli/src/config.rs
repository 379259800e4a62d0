//! Run configuration: a flat JSON object, every key optional.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use osg_core::grid_oracle::OracleTolerances;
use osg_core::protocol::{PathClassifier, PhotonCounter, ProbeConfig, ProtocolConfig};
use osg_core::{GaussianState, PhysicalParams, QubitState, Region};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// kg
    pub mass: f64,
    /// Coupling ε, s⁻¹.
    pub epsilon: f64,
    /// Mode wavelength, m.
    pub wavelength: f64,
    pub region: Region,
    pub theta: f64,
    pub phi: f64,
    pub sigma_x1: f64,
    pub sigma_x2: f64,
    pub x0_1: f64,
    pub p0_1: f64,
    pub x0_2: f64,
    pub p0_2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub gap: f64,
    pub detection_delay: f64,
    pub tau_p: f64,
    pub probe_sigma_x: f64,
    pub probe_delay: f64,
    pub probe_z_conf: f64,
    pub photon_counter: CounterKind,
    pub classifier: PathClassifier,
    pub n_trials: u64,
    pub base_seed: u64,
    /// Upper end of the ετ sweeps.
    pub eps_tau_max: f64,
    pub eps_tau_step: f64,
    pub oracle_draws: usize,
    /// Multiplies every oracle tolerance.
    pub oracle_tolerance_factor: f64,
    /// Times are read as ετ and the run uses ħ = m = ε = 1.
    pub dimensionless: bool,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterKind {
    Direct,
    Probe,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: 1e-26,
            epsilon: 1e5,
            wavelength: 1e-5,
            region: Region::Nodal,
            theta: PI / 3.0,
            phi: PI / 4.0,
            sigma_x1: 1e-6,
            sigma_x2: 1e-6,
            x0_1: 0.0,
            p0_1: 0.0,
            x0_2: 0.0,
            p0_2: 0.0,
            tau1: 6e-5,
            tau2: 6e-5,
            gap: 0.0,
            detection_delay: 6e-5,
            tau_p: 5e-4,
            probe_sigma_x: 1e-5 / 6.0,
            probe_delay: 0.0,
            probe_z_conf: 5.0,
            photon_counter: CounterKind::Direct,
            classifier: PathClassifier::SampledPosition,
            n_trials: 10_000,
            base_seed: 0,
            eps_tau_max: 20.0,
            eps_tau_step: 0.1,
            oracle_draws: 20,
            oracle_tolerance_factor: 1.0,
            dimensionless: false,
            output: None,
        }
    }
}

/// Inputs converted to the units the simulation runs in.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub params: PhysicalParams,
    pub qubit: QubitState,
    pub packet1: GaussianState,
    pub packet2: GaussianState,
    pub probe_packet: GaussianState,
    pub tau1: f64,
    pub tau2: f64,
    pub gap: f64,
    pub detection_delay: f64,
    pub tau_p: f64,
    pub probe_delay: f64,
}

impl Resolved {
    pub fn eps_tau(&self, t: f64) -> f64 {
        t * self.params.epsilon()
    }

    pub fn time(&self, eps_tau: f64) -> f64 {
        self.params.time_from_eps_tau(eps_tau)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        for (name, v) in [
            ("mass", self.mass),
            ("epsilon", self.epsilon),
            ("wavelength", self.wavelength),
            ("sigma_x1", self.sigma_x1),
            ("sigma_x2", self.sigma_x2),
            ("probe_sigma_x", self.probe_sigma_x),
            ("eps_tau_step", self.eps_tau_step),
            ("oracle_tolerance_factor", self.oracle_tolerance_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("gap", self.gap),
            ("detection_delay", self.detection_delay),
            ("tau_p", self.tau_p),
            ("probe_delay", self.probe_delay),
            ("probe_z_conf", self.probe_z_conf),
            ("eps_tau_max", self.eps_tau_max),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and ≥ 0, got {v}"));
            }
        }
        for (name, v) in [("x0_1", self.x0_1), ("p0_1", self.p0_1), ("x0_2", self.x0_2), ("p0_2", self.p0_2)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(0.0..=PI).contains(&self.theta) {
            return bad(format!("theta must lie in [0, π], got {}", self.theta));
        }
        if !self.phi.is_finite() {
            return bad("phi must be finite".into());
        }
        if self.n_trials == 0 {
            return bad("n_trials must be ≥ 1".into());
        }
        if self.oracle_draws == 0 {
            return bad("oracle_draws must be ≥ 1".into());
        }
        if self.eps_tau_max / self.eps_tau_step > 1e6 {
            return bad("sweep has more than 1e6 points".into());
        }
        Ok(())
    }

    /// Lengths and momenta stay SI in the file; in dimensionless mode they
    /// are rescaled to ħ = m = ε = 1 and times are read as ετ.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        self.validate()?;
        let si = PhysicalParams::new(self.mass, self.epsilon, std::f64::consts::TAU / self.wavelength)?;
        // with ε = 1 a time in natural units is ετ itself
        let (params, length, momentum) = if self.dimensionless {
            let (natural, s) = si.natural_units();
            (natural, s.length, s.momentum)
        } else {
            (si, 1.0, 1.0)
        };
        let hbar = params.hbar();
        let packet = |x0: f64, p0: f64, sigma: f64| {
            GaussianState::minimum_uncertainty(x0 / length, p0 / momentum, sigma / length, hbar)
        };
        Ok(Resolved {
            params,
            qubit: QubitState::new(self.theta, self.phi)?,
            packet1: packet(self.x0_1, self.p0_1, self.sigma_x1)?,
            packet2: packet(self.x0_2, self.p0_2, self.sigma_x2)?,
            probe_packet: packet(0.0, 0.0, self.probe_sigma_x)?,
            tau1: self.tau1,
            tau2: self.tau2,
            gap: self.gap,
            detection_delay: self.detection_delay,
            tau_p: self.tau_p,
            probe_delay: self.probe_delay,
        })
    }

    pub fn probe_config(&self, r: &Resolved) -> ProbeConfig {
        ProbeConfig {
            region: self.region,
            tau_p: r.tau_p,
            packet: r.probe_packet,
            delay: r.probe_delay,
            z_conf: self.probe_z_conf,
        }
    }

    pub fn protocol_config(&self) -> Result<ProtocolConfig, CliError> {
        let r = self.resolve()?;
        let photon_counter = match self.photon_counter {
            CounterKind::Direct => PhotonCounter::Direct,
            CounterKind::Probe => PhotonCounter::Probe(self.probe_config(&r)),
        };
        let cfg = ProtocolConfig {
            params: r.params,
            region: self.region,
            qubit: r.qubit,
            packet1: r.packet1,
            packet2: r.packet2,
            tau1: r.tau1,
            tau2: r.tau2,
            gap: r.gap,
            detection_delay: r.detection_delay,
            classifier: self.classifier,
            photon_counter,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// ετ grid `0, step, …, ≤ max`.
    pub fn eps_tau_grid(&self) -> Vec<f64> {
        let n = (self.eps_tau_max / self.eps_tau_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.eps_tau_step).collect()
    }

    pub fn oracle_tolerances(&self) -> OracleTolerances {
        let f = self.oracle_tolerance_factor;
        let t = OracleTolerances::default();
        OracleTolerances {
            nodal_moments: t.nodal_moments * f,
            nodal_overlap_closed_vs_gaussian: t.nodal_overlap_closed_vs_gaussian * f,
            nodal_overlap_closed_vs_grid: t.nodal_overlap_closed_vs_grid * f,
            antinodal_moments: t.antinodal_moments * f,
            antinodal_overlap: t.antinodal_overlap * f,
            free_spreading: t.free_spreading * f,
            cosh_law: t.cosh_law * f,
        }
    }
}
