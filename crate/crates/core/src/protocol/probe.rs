//! Photon counting by the deflection of a probe atom.
//!
//! A ground-state probe crosses the cavity after both protocol atoms. Field
//! component |n⟩ with n ≥ 1 splits the probe into the n − 1 dressed pair,
//! which is deflected by an amount growing as √n; |0⟩ leaves it on its free
//! trajectory. The probe position is sampled from its exact marginal and
//! assigned to the nearest of the three deflection bands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_probe, free_flight};
use crate::error::{structural, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::phase_space::{free_propagate, propagate_branch, Region};
use crate::state::{BranchIndex, CompositeState, Sign, PROBE};

use super::measurement::{project_photons, MarginalSampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub region: Region,
    pub tau_p: f64,
    pub packet: GaussianState,
    /// Free flight of the probe between cavity exit and detection.
    pub delay: f64,
    /// Minimum half-gap between adjacent bands, in packet widths.
    pub z_conf: f64,
}

/// Deflection bands `[0, d_1, d_2]` measured from the free trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeBands {
    pub free_centre: f64,
    pub centres: [f64; 3],
    pub width: f64,
    /// Smallest half-gap between adjacent bands over the width.
    pub z_margin: f64,
}

impl ProbeBands {
    pub fn new(params: &PhysicalParams, cfg: &ProbeConfig) -> Result<Self> {
        let mass = params.mass();
        let free = free_propagate(&cfg.packet, mass, cfg.tau_p + cfg.delay)?;
        let mut centres = [0.0; 3];
        let mut width = free.sigma_x();
        for n in 0..2u8 {
            let b = BranchIndex { n, eta: Sign::Plus };
            let g = propagate_branch(&cfg.packet, params, cfg.region, b, cfg.tau_p)?;
            let g = free_propagate(&g, mass, cfg.delay)?;
            centres[n as usize + 1] = (g.x0() - free.x0()).abs();
            width = width.max(g.sigma_x());
        }
        let half_gap = (0..2)
            .map(|i| 0.5 * (centres[i + 1] - centres[i]).abs())
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            free_centre: free.x0(),
            centres,
            width,
            z_margin: half_gap / width,
        })
    }

    /// √2 for the nodal region.
    pub fn ratio(&self) -> f64 {
        self.centres[2] / self.centres[1]
    }

    pub fn classify(&self, x: f64) -> u8 {
        let d = (x - self.free_centre).abs();
        let mut best = 0;
        for (i, c) in self.centres.iter().enumerate() {
            if (d - c).abs() < (d - self.centres[best]).abs() {
                best = i;
            }
        }
        best as u8
    }
}

/// Probe readout prepared once for a given pre-probe state.
#[derive(Debug, Clone)]
pub struct ProbeCounter {
    pub bands: ProbeBands,
    /// Bands overlap beyond the configured confidence.
    pub unreliable: bool,
    sampler: MarginalSampler,
    collapsed: [Option<CompositeState>; 3],
}

impl ProbeCounter {
    pub fn prepare(state: &CompositeState, params: &PhysicalParams, cfg: &ProbeConfig) -> Result<Self> {
        let bands = ProbeBands::new(params, cfg)?;
        let after = apply_probe(state, params, cfg.region, cfg.tau_p, &cfg.packet)?;
        let after = free_flight(&after, params, cfg.delay)?;
        let sampler = MarginalSampler::new(&after, PROBE, false);
        let mut collapsed = [None, None, None];
        for (n, slot) in collapsed.iter_mut().enumerate() {
            if let Some(s) = project_photons(state, n as u8) {
                if s.norm_sqr() > 1e-300 {
                    *slot = Some(s.normalized()?);
                }
            }
        }
        Ok(Self {
            unreliable: !(bands.z_margin >= cfg.z_conf),
            bands,
            sampler,
            collapsed,
        })
    }

    /// Samples the probe position and returns the band it falls in.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u8> {
        Ok(self.bands.classify(self.sampler.sample(rng)?))
    }

    /// Readouts with per-trial generators seeded `base_seed + i`.
    pub fn sample_many(&self, n: u64, base_seed: u64) -> Result<Vec<u8>> {
        (0..n)
            .into_par_iter()
            .map(|i| self.sample(&mut ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(i))))
            .collect()
    }

    /// Pre-probe state projected onto the classified Fock sector, if that
    /// sector is populated.
    pub fn collapsed(&self, n: u8) -> Option<&CompositeState> {
        self.collapsed[n as usize].as_ref()
    }
}

/// One probe readout on `state`: (n, collapsed state, unreliable flag).
pub fn probe_measure_photon<R: Rng + ?Sized>(
    state: &CompositeState,
    params: &PhysicalParams,
    cfg: &ProbeConfig,
    rng: &mut R,
) -> Result<(u8, CompositeState, bool)> {
    let counter = ProbeCounter::prepare(state, params, cfg)?;
    let n = counter.sample(rng)?;
    match counter.collapsed(n) {
        Some(s) => Ok((n, s.clone(), counter.unreliable)),
        None => Err(structural(format!("probe reported n = {n} for an empty Fock sector"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_band_ratio_is_root_two() {
        let p = PhysicalParams::reference();
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, p.lambda() / 10.0, p.hbar()).unwrap();
        for delay in [0.0, 5.0 / p.epsilon()] {
            let cfg = ProbeConfig {
                region: Region::Nodal,
                tau_p: 10.0 / p.epsilon(),
                packet: g,
                delay,
                z_conf: 3.0,
            };
            let b = ProbeBands::new(&p, &cfg).unwrap();
            assert!((b.ratio() - 2f64.sqrt()).abs() < 1e-12);
            assert_eq!(b.classify(b.free_centre), 0);
            assert_eq!(b.classify(b.free_centre - b.centres[1]), 1);
            assert_eq!(b.classify(b.free_centre + b.centres[2]), 2);
        }
    }
}
