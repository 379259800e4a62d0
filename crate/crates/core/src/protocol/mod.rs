//! Measurement cascade, outcome classification and the Monte Carlo harness.
//!
//! A trial runs photon count → atom-2 internal state → atomic paths (only on
//! the rows that need them) → classification → σ_z correction → fidelity.
//! Everything up to the path readouts is a finite tree of projections fixed
//! by the configuration, so [`PreparedProtocol`] builds it once and a trial
//! only walks it with a seeded generator.

pub mod measurement;
pub mod probe;
pub mod table;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{apply_atom_cavity, build_initial_state, free_flight};
use crate::error::{domain, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::phase_space::Region;
use crate::qubit::{density_fidelity, rotate_density, QubitState};
use crate::state::{CompositeState, InternalLabel, ATOM_1, ATOM_2};

pub use measurement::{
    atom1_density, condition_on_readout, internal_distribution, measure_atom2, measure_path,
    measure_photon_number, photon_distribution, project_internal, project_photons, MarginalSampler,
    PathClassifier, PathLabel, PathMeasurement, PathReadout,
};
pub use probe::{probe_measure_photon, ProbeBands, ProbeConfig, ProbeCounter};
pub use table::{classify, needs_paths, Status, TableRow, TeleportResult};

use measurement::sample_index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhotonCounter {
    /// Projective measurement of the field.
    Direct,
    /// Deflection of a probe atom.
    Probe(ProbeConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub params: PhysicalParams,
    pub region: Region,
    /// State of atom 2 to be teleported.
    pub qubit: QubitState,
    pub packet1: GaussianState,
    pub packet2: GaussianState,
    pub tau1: f64,
    pub tau2: f64,
    /// Free flight between the exit of atom 1 and the entry of atom 2.
    pub gap: f64,
    /// Free flight between the exit of atom 2 and the path readouts.
    pub detection_delay: f64,
    pub classifier: PathClassifier,
    pub photon_counter: PhotonCounter,
}

impl ProtocolConfig {
    /// Reference parameters, σx = λ/10, centred packets, ετ₁ = ετ₂ = `eps_tau`
    /// and a detection delay of 6/ε.
    pub fn reference(qubit: QubitState, eps_tau: f64, classifier: PathClassifier) -> Self {
        let params = PhysicalParams::reference();
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, params.lambda() / 10.0, params.hbar())
            .expect("reference packet is valid");
        let tau = params.time_from_eps_tau(eps_tau);
        Self {
            params,
            region: Region::Nodal,
            qubit,
            packet1: g,
            packet2: g,
            tau1: tau,
            tau2: tau,
            gap: 0.0,
            detection_delay: params.time_from_eps_tau(6.0),
            classifier,
            photon_counter: PhotonCounter::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("gap", self.gap),
            ("detection_delay", self.detection_delay),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if let PhotonCounter::Probe(p) = &self.photon_counter {
            if !(p.tau_p.is_finite() && p.tau_p >= 0.0 && p.delay.is_finite() && p.delay >= 0.0) {
                return Err(domain("probe times must be finite and ≥ 0"));
            }
            if !(p.z_conf.is_finite() && p.z_conf >= 0.0) {
                return Err(domain("probe confidence must be ≥ 0"));
            }
        }
        Ok(())
    }
}

/// States of the protocol timeline.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub initial: CompositeState,
    /// After atom 1, at the entry of atom 2.
    pub t2: CompositeState,
    /// At the exit of atom 2.
    pub t3: CompositeState,
    /// At detection.
    pub detection: CompositeState,
}

pub fn evolve_protocol(config: &ProtocolConfig) -> Result<Timeline> {
    config.validate()?;
    let p = &config.params;
    let initial = build_initial_state(&config.qubit, &config.packet1, &config.packet2);
    let after1 = apply_atom_cavity(&initial, ATOM_1, config.region, p, config.tau1)?;
    let t2 = free_flight(&after1, p, config.gap)?;
    let t3 = apply_atom_cavity(&t2, ATOM_2, config.region, p, config.tau2)?;
    let detection = free_flight(&t3, p, config.detection_delay)?;
    Ok(Timeline {
        initial,
        t2,
        t3,
        detection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub photon_n: u8,
    pub atom2: Option<InternalLabel>,
    pub path1: Option<PathLabel>,
    pub path2: Option<PathLabel>,
    pub result: Option<TeleportResult>,
    pub fidelity: Option<f64>,
    pub seed: u64,
    /// A readout was flagged; the trial is reported apart from the statistics.
    pub unreliable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowFrequency {
    pub row: TableRow,
    pub label: String,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialStats {
    pub n_trials: u64,
    pub n_unreliable: u64,
    pub n_success: u64,
    /// Over reliable trials.
    pub success_rate: f64,
    pub photon_frequencies: [f64; 3],
    pub per_row_frequencies: Vec<RowFrequency>,
    /// Mean fidelity over reliable successful trials.
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
}

#[derive(Debug, Clone)]
struct PathStage {
    meas: PathMeasurement,
    /// Ideal mode: the atom-2 stage after each atom-1 outcome, `[+, −]`.
    next: [Option<Box<PathStage>>; 2],
}

#[derive(Debug, Clone)]
struct LabelNode {
    state: CompositeState,
    paths: Option<PathStage>,
}

#[derive(Debug, Clone)]
struct PhotonNode {
    atom2_probs: [f64; 2],
    labels: [Option<LabelNode>; 2],
}

/// Measurement tree of one configuration.
#[derive(Debug, Clone)]
pub struct PreparedProtocol {
    config: ProtocolConfig,
    photon_probs: [f64; 3],
    photons: [Option<PhotonNode>; 3],
    probe: Option<ProbeCounter>,
}

const LABELS: [InternalLabel; 2] = [InternalLabel::Excited, InternalLabel::Ground];

impl PreparedProtocol {
    pub fn new(config: &ProtocolConfig) -> Result<Self> {
        let timeline = evolve_protocol(config)?;
        let fin = &timeline.detection;
        let photon_probs = photon_distribution(fin);
        let mut photons = [None, None, None];
        for (n, slot) in photons.iter_mut().enumerate() {
            let Some(sector) = project_photons(fin, n as u8) else {
                continue;
            };
            if sector.norm_sqr() <= 1e-300 {
                continue;
            }
            let sector = sector.normalized()?;
            let atom2_probs = internal_distribution(&sector, ATOM_2);
            let mut labels = [None, None];
            for (i, label) in LABELS.into_iter().enumerate() {
                let Some(s) = project_internal(&sector, ATOM_2, label) else {
                    continue;
                };
                if s.norm_sqr() <= 1e-300 {
                    continue;
                }
                let state = s.normalized()?;
                let paths = if needs_paths(n as u8, label) {
                    Some(prepare_paths(&state, config.classifier)?)
                } else {
                    None
                };
                labels[i] = Some(LabelNode { state, paths });
            }
            *slot = Some(PhotonNode { atom2_probs, labels });
        }
        let probe = match &config.photon_counter {
            PhotonCounter::Direct => None,
            PhotonCounter::Probe(cfg) => Some(ProbeCounter::prepare(&timeline.t3, &config.params, cfg)?),
        };
        Ok(Self {
            config: *config,
            photon_probs,
            photons,
            probe,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    /// Exact photon-number distribution at detection.
    pub fn photon_probabilities(&self) -> [f64; 3] {
        self.photon_probs
    }

    pub fn probe(&self) -> Option<&ProbeCounter> {
        self.probe.as_ref()
    }

    /// One trial driven by `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn sample(&self, seed: u64) -> Result<OutcomeRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rec = OutcomeRecord {
            photon_n: 0,
            atom2: None,
            path1: None,
            path2: None,
            result: None,
            fidelity: None,
            seed,
            unreliable: false,
        };
        let n = match &self.probe {
            None => sample_index(&self.photon_probs, &mut rng) as u8,
            Some(p) => {
                rec.unreliable |= p.unreliable;
                p.sample(&mut rng)?
            }
        };
        rec.photon_n = n;
        let Some(node) = &self.photons[n as usize] else {
            // the probe reported an empty sector
            rec.unreliable = true;
            return Ok(rec);
        };
        let li = sample_index(&node.atom2_probs, &mut rng);
        let label = LABELS[li];
        rec.atom2 = Some(label);
        let leaf = node.labels[li].as_ref().expect("sampled label has weight");
        let Some(stage1) = &leaf.paths else {
            rec.result = Some(classify(n, label, None, None)?);
            return Ok(rec);
        };

        let r1 = stage1.meas.measure(&mut rng)?;
        rec.unreliable |= stage1.meas.unreliable;
        let (r2, fin) = match &stage1.next[sign_index(r1.label)] {
            Some(stage2) => {
                let r2 = stage2.meas.measure(&mut rng)?;
                rec.unreliable |= stage2.meas.unreliable;
                let after1 = stage1.meas.collapse(&leaf.state, &r1)?;
                (r2, stage2.meas.collapse(&after1, &r2)?)
            }
            None => {
                let after1 = stage1.meas.collapse(&leaf.state, &r1)?;
                let m2 = PathMeasurement::prepare(&after1, ATOM_2, self.config.classifier)?;
                let r2 = m2.measure(&mut rng)?;
                rec.unreliable |= m2.unreliable;
                (r2, m2.collapse(&after1, &r2)?)
            }
        };
        rec.path1 = Some(r1.label);
        rec.path2 = Some(r2.label);
        let result = classify(n, label, rec.path1, rec.path2)?;
        rec.result = Some(result);
        let mut rho = atom1_density(&fin);
        if result.status == Status::SuccessAfterRotation {
            rho = rotate_density(&rho);
        }
        if result.status.is_success() {
            rec.fidelity = Some(density_fidelity(&rho, &self.config.qubit));
        }
        Ok(rec)
    }
}

fn prepare_paths(state: &CompositeState, mode: PathClassifier) -> Result<PathStage> {
    let meas = PathMeasurement::prepare(state, ATOM_1, mode)?;
    let mut next = [None, None];
    if mode == PathClassifier::Ideal {
        for (i, label) in [PathLabel::Plus, PathLabel::Minus].into_iter().enumerate() {
            if meas.probs[i] <= 0.0 {
                continue;
            }
            let r = PathReadout { label, value: None };
            let after = meas.collapse(state, &r)?;
            next[i] = Some(Box::new(PathStage {
                meas: PathMeasurement::prepare(&after, ATOM_2, mode)?,
                next: [None, None],
            }));
        }
    }
    Ok(PathStage { meas, next })
}

fn sign_index(s: PathLabel) -> usize {
    match s {
        PathLabel::Plus => 0,
        PathLabel::Minus => 1,
    }
}

/// One protocol trial, deterministic in `seed`.
pub fn run_trial(config: &ProtocolConfig, seed: u64) -> Result<OutcomeRecord> {
    PreparedProtocol::new(config)?.sample(seed)
}

/// Trials with seeds `base_seed + i`, aggregated in index order.
pub fn run_monte_carlo(config: &ProtocolConfig, n_trials: u64, base_seed: u64) -> Result<TrialStats> {
    if n_trials == 0 {
        return Err(domain("n_trials must be ≥ 1"));
    }
    let prepared = PreparedProtocol::new(config)?;
    let records = prepared.sample_many(n_trials, base_seed)?;
    Ok(aggregate(&records))
}

impl PreparedProtocol {
    pub fn sample_many(&self, n_trials: u64, base_seed: u64) -> Result<Vec<OutcomeRecord>> {
        (0..n_trials)
            .into_par_iter()
            .map(|i| self.sample(base_seed.wrapping_add(i)))
            .collect()
    }
}

/// Statistics of a record set; rates are over reliable trials.
pub fn aggregate(records: &[OutcomeRecord]) -> TrialStats {
    let mut counts = [0u64; TableRow::COUNT];
    let mut photon_counts = [0u64; 3];
    let (mut n_unreliable, mut n_success) = (0u64, 0u64);
    let (mut fid_sum, mut fid_min) = (0.0, f64::INFINITY);
    for r in records {
        if r.unreliable {
            n_unreliable += 1;
            continue;
        }
        photon_counts[r.photon_n as usize] += 1;
        if let Some(res) = r.result {
            counts[res.row.id() as usize - 1] += 1;
            if res.status.is_success() {
                n_success += 1;
            }
        }
        if let Some(f) = r.fidelity {
            fid_sum += f;
            fid_min = f64::min(fid_min, f);
        }
    }
    let reliable = (records.len() as u64 - n_unreliable).max(1) as f64;
    let per_row_frequencies = TableRow::all()
        .map(|row| {
            let c = counts[row.id() as usize - 1];
            RowFrequency {
                row,
                label: row.to_string(),
                count: c,
                frequency: c as f64 / reliable,
            }
        })
        .collect();
    TrialStats {
        n_trials: records.len() as u64,
        n_unreliable,
        n_success,
        success_rate: n_success as f64 / reliable,
        photon_frequencies: photon_counts.map(|c| c as f64 / reliable),
        per_row_frequencies,
        mean_fidelity: if n_success > 0 { fid_sum / n_success as f64 } else { f64::NAN },
        min_fidelity: if n_success > 0 { fid_min } else { f64::NAN },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ideal(theta: f64) -> ProtocolConfig {
        ProtocolConfig::reference(QubitState::new(theta, PI / 4.0).unwrap(), 6.0, PathClassifier::Ideal)
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = ideal(1.0);
        assert_eq!(run_trial(&cfg, 42).unwrap(), run_trial(&cfg, 42).unwrap());
        let cfg = ProtocolConfig::reference(QubitState::new(1.0, 0.2).unwrap(), 6.0, PathClassifier::SampledPosition);
        assert_eq!(run_trial(&cfg, 9).unwrap(), run_trial(&cfg, 9).unwrap());
    }

    #[test]
    fn single_trial_stats() {
        let cfg = ideal(0.8);
        let rec = run_trial(&cfg, 5).unwrap();
        let stats = run_monte_carlo(&cfg, 1, 5).unwrap();
        assert_eq!(stats.n_trials, 1);
        let success = rec.result.unwrap().status.is_success();
        assert_eq!(stats.success_rate, if success { 1.0 } else { 0.0 });
        let row = stats
            .per_row_frequencies
            .iter()
            .find(|r| r.row == rec.result.unwrap().row)
            .unwrap();
        assert_eq!(row.count, 1);
    }

    #[test]
    fn fidelity_present_iff_success() {
        let prepared = PreparedProtocol::new(&ideal(2.0)).unwrap();
        for rec in prepared.sample_many(400, 11).unwrap() {
            let res = rec.result.unwrap();
            assert_eq!(rec.fidelity.is_some(), res.status.is_success());
            assert_eq!(
                res.status == Status::SuccessAfterRotation,
                rec.path1.is_some() && rec.path1 != rec.path2
            );
            if let Some(f) = rec.fidelity {
                assert!(f > 1.0 - 1e-9, "fidelity {f}");
            }
        }
    }

    #[test]
    fn rejects_zero_trials_and_negative_times() {
        assert!(run_monte_carlo(&ideal(1.0), 0, 0).is_err());
        let mut cfg = ideal(1.0);
        cfg.tau1 = -1.0;
        assert!(PreparedProtocol::new(&cfg).is_err());
    }

    #[test]
    fn pole_without_two_photons() {
        let prepared = PreparedProtocol::new(&ideal(PI)).unwrap();
        assert_eq!(prepared.photon_probabilities()[2], 0.0);
    }
}
