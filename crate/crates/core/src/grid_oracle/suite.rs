//! Randomized comparison of the closed forms against the grid solver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaussian::{gaussian_overlap, GaussianState};
use crate::params::PhysicalParams;
use crate::phase_space::{
    branch_overlap_antinodal_n1, branch_overlap_nodal, propagate_antinodal, propagate_nodal, OmegaConvention, Region,
};
use crate::state::Sign;

use super::{
    discretize, evolve_branch, evolve_free, gaussian_moments, grid_moments, grid_overlap, moment_error, GridSpec,
    GridWavefunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleTolerances {
    pub nodal_moments: f64,
    pub nodal_overlap_closed_vs_gaussian: f64,
    pub nodal_overlap_closed_vs_grid: f64,
    pub antinodal_moments: f64,
    pub antinodal_overlap: f64,
    pub free_spreading: f64,
    pub cosh_law: f64,
}

impl Default for OracleTolerances {
    fn default() -> Self {
        Self {
            nodal_moments: 1e-6,
            nodal_overlap_closed_vs_gaussian: 1e-10,
            nodal_overlap_closed_vs_grid: 1e-6,
            antinodal_moments: 1e-4,
            antinodal_overlap: 1e-4,
            free_spreading: 1e-8,
            cosh_law: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_draws: usize,
    pub seed: u64,
    pub checks: Vec<OracleCheck>,
    /// Largest antinodal overlap error for each ω convention.
    pub convention_errors: Vec<(OmegaConvention, f64)>,
    /// The convention the grid reproduces.
    pub selected_convention: OmegaConvention,
    pub passed: bool,
}

impl OracleReport {
    pub fn check(&self, name: &str) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct DrawErrors {
    nodal_moments: f64,
    nodal_closed_vs_gaussian: f64,
    nodal_closed_vs_grid: f64,
    antinodal_moments: f64,
    fock_scaled: f64,
    printed: f64,
    free_spreading: f64,
}

impl DrawErrors {
    fn max(self, o: Self) -> Self {
        Self {
            nodal_moments: self.nodal_moments.max(o.nodal_moments),
            nodal_closed_vs_gaussian: self.nodal_closed_vs_gaussian.max(o.nodal_closed_vs_gaussian),
            nodal_closed_vs_grid: self.nodal_closed_vs_grid.max(o.nodal_closed_vs_grid),
            antinodal_moments: self.antinodal_moments.max(o.antinodal_moments),
            fock_scaled: self.fock_scaled.max(o.fock_scaled),
            printed: self.printed.max(o.printed),
            free_spreading: self.free_spreading.max(o.free_spreading),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn draw_params(rng: &mut ChaCha8Rng) -> Result<PhysicalParams> {
    let mass = 1e-26 * uniform(rng, 0.5, 2.0);
    let eps = 1e5 * uniform(rng, 0.5, 2.0);
    let lambda = 1e-5 * uniform(rng, 0.7, 1.5);
    PhysicalParams::new(mass, eps, std::f64::consts::TAU / lambda)
}

fn branch_pair(
    psi: &GridWavefunction,
    p: &PhysicalParams,
    region: Region,
    n: u8,
    tau: f64,
) -> Result<[GridWavefunction; 2]> {
    Ok([
        evolve_branch(psi, p, region, n, Sign::Plus, tau)?,
        evolve_branch(psi, p, region, n, Sign::Minus, tau)?,
    ])
}

fn one_draw(seed: u64) -> Result<DrawErrors> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = draw_params(&mut rng)?;
    let hbar = p.hbar();
    let mut e = DrawErrors::default();

    // nodal
    let sigma = p.lambda() * uniform(&mut rng, 0.05, 0.2);
    let x0 = p.lambda() * uniform(&mut rng, -0.05, 0.05);
    let p0 = hbar / (2.0 * sigma) * uniform(&mut rng, -2.0, 2.0);
    let n = rng.random_range(0..2u8);
    let tau = uniform(&mut rng, 0.5, 6.0) / p.epsilon();
    let g = GaussianState::minimum_uncertainty(x0, p0, sigma, hbar)?;
    let spec = GridSpec::auto(&p, Region::Nodal, n, &g, tau)?;
    let psi = discretize(&g, &spec)?;
    let [gp, gm] = branch_pair(&psi, &p, Region::Nodal, n, tau)?;
    for (grid, eta) in [(&gp, Sign::Plus), (&gm, Sign::Minus)] {
        let analytic = propagate_nodal(&g, &p, n, eta, tau)?;
        e.nodal_moments = e.nodal_moments.max(moment_error(&grid_moments(grid, hbar), &gaussian_moments(&analytic)));
    }
    let closed = branch_overlap_nodal(&p, &g, n, tau);
    let gauss = gaussian_overlap(&propagate_nodal(&g, &p, n, Sign::Plus, tau)?, &propagate_nodal(&g, &p, n, Sign::Minus, tau)?);
    e.nodal_closed_vs_gaussian = (closed - gauss).norm();
    e.nodal_closed_vs_grid = (closed - grid_overlap(&gp, &gm)?).norm();

    let free = evolve_free(&psi, p.mass(), hbar, tau)?;
    let want = (sigma * sigma + (hbar / (2.0 * sigma) * tau / p.mass()).powi(2)).sqrt();
    e.free_spreading = (grid_moments(&free, hbar).sigma_x / want - 1.0).abs();

    // antinodal n = 1 on packets matched to each candidate frequency
    let a = uniform(&mut rng, -1.0, 1.0);
    let b = uniform(&mut rng, -1.0, 1.0);
    let tau = uniform(&mut rng, 0.5, 6.0) / p.epsilon();
    for conv in [OmegaConvention::FockScaled, OmegaConvention::Printed] {
        let w = conv.omega(&p);
        let sigma = (hbar / (2.0 * p.mass() * w)).sqrt();
        let g = GaussianState::minimum_uncertainty(a * sigma, b * hbar / (2.0 * sigma), sigma, hbar)?;
        let spec = GridSpec::auto(&p, Region::Antinodal, 1, &g, tau)?;
        let psi = discretize(&g, &spec)?;
        let [gp, gm] = branch_pair(&psi, &p, Region::Antinodal, 1, tau)?;
        let err = (branch_overlap_antinodal_n1(&p, &g, tau, conv)? - grid_overlap(&gp, &gm)?).norm();
        match conv {
            OmegaConvention::FockScaled => {
                e.fock_scaled = err;
                for (grid, eta) in [(&gp, Sign::Plus), (&gm, Sign::Minus)] {
                    let analytic = propagate_antinodal(&g, &p, 1, eta, tau)?;
                    let m = moment_error(&grid_moments(grid, hbar), &gaussian_moments(&analytic));
                    e.antinodal_moments = e.antinodal_moments.max(m);
                }
            }
            OmegaConvention::Printed => e.printed = err,
        }
    }
    Ok(e)
}

/// Runs `n_draws` randomized comparisons seeded from `seed`.
pub fn run_oracle_suite(n_draws: usize, seed: u64, tol: &OracleTolerances) -> Result<OracleReport> {
    let draws: Vec<DrawErrors> = (0..n_draws as u64)
        .into_par_iter()
        .map(|i| one_draw(seed.wrapping_add(i)))
        .collect::<Result<_>>()?;
    let worst = draws.into_iter().fold(DrawErrors::default(), DrawErrors::max);

    let convention_errors = vec![
        (OmegaConvention::FockScaled, worst.fock_scaled),
        (OmegaConvention::Printed, worst.printed),
    ];
    let (selected, selected_err) = if worst.fock_scaled <= worst.printed {
        (OmegaConvention::FockScaled, worst.fock_scaled)
    } else {
        (OmegaConvention::Printed, worst.printed)
    };

    // |⟨Φ⁺|Φ⁻⟩| = cosh(ωτ)^(−½) for a centred matched packet
    let p = PhysicalParams::reference();
    let w = selected.omega(&p);
    let sigma = (p.hbar() / (2.0 * p.mass() * w)).sqrt();
    let g = GaussianState::minimum_uncertainty(0.0, 0.0, sigma, p.hbar())?;
    let mut cosh_err: f64 = 0.0;
    for i in 0..=60 {
        let tau = 0.1 * i as f64 / p.epsilon();
        let ov: Complex64 = branch_overlap_antinodal_n1(&p, &g, tau, selected)?;
        cosh_err = cosh_err.max((ov.norm() - (w * tau).cosh().powf(-0.5)).abs());
    }

    let mk = |name: &str, max_error: f64, tolerance: f64| OracleCheck {
        name: name.to_string(),
        max_error,
        tolerance,
        passed: max_error <= tolerance,
    };
    let checks = vec![
        mk("nodal_moments", worst.nodal_moments, tol.nodal_moments),
        mk("nodal_overlap_closed_vs_gaussian", worst.nodal_closed_vs_gaussian, tol.nodal_overlap_closed_vs_gaussian),
        mk("nodal_overlap_closed_vs_grid", worst.nodal_closed_vs_grid, tol.nodal_overlap_closed_vs_grid),
        mk("antinodal_moments", worst.antinodal_moments, tol.antinodal_moments),
        mk("antinodal_overlap", selected_err, tol.antinodal_overlap),
        mk("free_spreading", worst.free_spreading, tol.free_spreading),
        mk("antinodal_cosh_law", cosh_err, tol.cosh_law),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleReport {
        n_draws,
        seed,
        checks,
        convention_errors,
        selected_convention: selected,
        passed,
    })
}
