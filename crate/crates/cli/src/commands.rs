use serde::Serialize;

use osg_core::gaussian::gaussian_overlap;
use osg_core::grid_oracle::run_oracle_suite;
use osg_core::phase_space::{branch_overlap_nodal, distinguishability, propagate_branch};
use osg_core::protocol::{
    evolve_protocol, photon_distribution, project_photons, run_monte_carlo, ProbeBands, ProbeCounter, Status,
    TrialStats,
};
use osg_core::{BranchIndex, GaussianState, Region, Sign};

use crate::config::{Resolved, RunConfig};
use crate::{CliError, CommandOutput};

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn branch(r: &Resolved, region: Region, g: &GaussianState, n: u8, eta: Sign, eps_tau: f64) -> Result<GaussianState, CliError> {
    Ok(propagate_branch(g, &r.params, region, BranchIndex { n, eta }, r.time(eps_tau))?)
}

#[derive(Serialize)]
struct PathRow {
    eps_tau: f64,
    l_plus: f64,
    sigma_plus: f64,
    l_minus: f64,
    sigma_minus: f64,
}

/// Centroid ± width of both n = 0 branches of atom 1 over the ετ sweep.
pub fn cmd_paths(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let r = cfg.resolve()?;
    let mut rows = Vec::new();
    for et in cfg.eps_tau_grid() {
        let a = branch(&r, cfg.region, &r.packet1, 0, Sign::Plus, et)?;
        let b = branch(&r, cfg.region, &r.packet1, 0, Sign::Minus, et)?;
        rows.push(PathRow {
            eps_tau: et,
            l_plus: a.x0(),
            sigma_plus: a.sigma_x(),
            l_minus: b.x0(),
            sigma_minus: b.sigma_x(),
        });
    }
    Ok(CommandOutput {
        text: csv_text(&rows)?,
        default_name: "paths.csv",
        breach: false,
    })
}

#[derive(Serialize)]
struct DistinguishabilityRow {
    eps_tau: f64,
    #[serde(rename = "D")]
    d: f64,
    abs_overlap: f64,
}

/// D = √(1 − |⟨Φ₀⁺|Φ₀⁻⟩|²) over the ετ sweep.
pub fn cmd_distinguishability(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let r = cfg.resolve()?;
    let mut rows = Vec::new();
    for et in cfg.eps_tau_grid() {
        let ov = match cfg.region {
            Region::Nodal => branch_overlap_nodal(&r.params, &r.packet1, 0, r.time(et)),
            Region::Antinodal => gaussian_overlap(
                &branch(&r, cfg.region, &r.packet1, 0, Sign::Plus, et)?,
                &branch(&r, cfg.region, &r.packet1, 0, Sign::Minus, et)?,
            ),
        };
        rows.push(DistinguishabilityRow {
            eps_tau: et,
            d: distinguishability(ov)?,
            abs_overlap: ov.norm(),
        });
    }
    Ok(CommandOutput {
        text: csv_text(&rows)?,
        default_name: "distinguishability.csv",
        breach: false,
    })
}

#[derive(Serialize)]
struct OverlapRow {
    eps_tau: f64,
    n: u8,
    re: f64,
    im: f64,
    abs: f64,
}

/// ⟨Φ_n⁺|Φ_n⁻⟩ for n = 0, 1 over the ετ sweep, from exact propagation.
pub fn cmd_overlap(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let r = cfg.resolve()?;
    let mut rows = Vec::new();
    for et in cfg.eps_tau_grid() {
        for n in 0..2u8 {
            let ov = gaussian_overlap(
                &branch(&r, cfg.region, &r.packet1, n, Sign::Plus, et)?,
                &branch(&r, cfg.region, &r.packet1, n, Sign::Minus, et)?,
            );
            rows.push(OverlapRow {
                eps_tau: et,
                n,
                re: ov.re,
                im: ov.im,
                abs: ov.norm(),
            });
        }
    }
    Ok(CommandOutput {
        text: csv_text(&rows)?,
        default_name: "overlap.csv",
        breach: false,
    })
}

#[derive(Serialize)]
struct TableEntry {
    row: u8,
    outcome: String,
    status: Status,
    count: u64,
    empirical: f64,
    analytic: f64,
    sigma: f64,
    within_4_sigma: bool,
}

#[derive(Serialize)]
struct ProtocolReport<'a> {
    config: &'a RunConfig,
    stats: TrialStats,
    table: Vec<TableEntry>,
}

/// Monte Carlo over the measurement cascade with the outcome table.
pub fn cmd_protocol(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let pc = cfg.protocol_config()?;
    let stats = run_monte_carlo(&pc, cfg.n_trials, cfg.base_seed)?;
    let reliable = (stats.n_trials - stats.n_unreliable).max(1) as f64;
    let table = stats
        .per_row_frequencies
        .iter()
        .map(|f| {
            let p = f.row.analytic_probability(cfg.theta);
            let sigma = (p * (1.0 - p) / reliable).sqrt();
            TableEntry {
                row: f.row.id(),
                outcome: f.label.clone(),
                status: f.row.status(),
                count: f.count,
                empirical: f.frequency,
                analytic: p,
                sigma,
                within_4_sigma: (f.frequency - p).abs() <= 4.0 * sigma,
            }
        })
        .collect();
    Ok(CommandOutput {
        text: json_text(&ProtocolReport { config: cfg, stats, table }),
        default_name: "protocol.json",
        breach: false,
    })
}

/// Randomized closed-form versus grid comparison; flags a tolerance breach.
pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    cfg.validate()?;
    let report = run_oracle_suite(cfg.oracle_draws, cfg.base_seed, &cfg.oracle_tolerances())?;
    Ok(CommandOutput {
        text: json_text(&report),
        default_name: "oracle_check.json",
        breach: !report.passed,
    })
}

#[derive(Serialize)]
struct ProbeReport {
    bands: ProbeBands,
    band_ratio: f64,
    unreliable: bool,
    n_trials: u64,
    direct: [f64; 3],
    probe: [f64; 3],
    z_scores: [f64; 3],
    within_4_sigma: bool,
    vacuum_trials: u64,
    vacuum_classified_zero: f64,
}

/// Probe-counted photon distribution against the exact field statistics.
pub fn cmd_probe(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let pc = cfg.protocol_config()?;
    let r = cfg.resolve()?;
    let probe_cfg = cfg.probe_config(&r);
    let t3 = evolve_protocol(&pc)?.t3;
    let direct = photon_distribution(&t3);
    let counter = ProbeCounter::prepare(&t3, &r.params, &probe_cfg)?;
    let readouts = counter.sample_many(cfg.n_trials, cfg.base_seed)?;
    let n = cfg.n_trials as f64;
    let mut counts = [0u64; 3];
    for k in &readouts {
        counts[*k as usize] += 1;
    }
    let probe = counts.map(|c| c as f64 / n);
    let z_scores: [f64; 3] = std::array::from_fn(|k| {
        let sigma = (direct[k] * (1.0 - direct[k]) / n).sqrt();
        let d = probe[k] - direct[k];
        if sigma > 0.0 {
            d / sigma
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    });

    let (vacuum_trials, vacuum_classified_zero) = match project_photons(&t3, 0) {
        Some(v) if v.norm_sqr() > 0.0 => {
            let vc = ProbeCounter::prepare(&v.normalized()?, &r.params, &probe_cfg)?;
            let zeros = vc
                .sample_many(cfg.n_trials, cfg.base_seed.wrapping_add(cfg.n_trials))?
                .iter()
                .filter(|&&k| k == 0)
                .count();
            (cfg.n_trials, zeros as f64 / n)
        }
        _ => (0, f64::NAN),
    };
    let report = ProbeReport {
        band_ratio: counter.bands.ratio(),
        bands: counter.bands,
        unreliable: counter.unreliable,
        n_trials: cfg.n_trials,
        direct,
        probe,
        within_4_sigma: z_scores.iter().all(|z| z.abs() <= 4.0),
        z_scores,
        vacuum_trials,
        vacuum_classified_zero,
    };
    Ok(CommandOutput {
        text: json_text(&report),
        default_name: "probe.json",
        breach: false,
    })
}

