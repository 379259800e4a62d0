//! Split-operator reference solver on a periodic 1-D grid.
//!
//! Branch wavefunctions are sampled on a uniform grid and evolved with a
//! Strang splitting: half a potential kick, a full kinetic step applied in
//! the Fourier basis, half a kick. The potentials are written out here from
//! the branch Hamiltonians themselves and share no code with the closed forms
//! they are used to check.

mod suite;

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::phase_space::{propagate_branch, Region};
use crate::state::{BranchIndex, Sign};

pub use suite::{run_oracle_suite, OracleCheck, OracleReport, OracleTolerances};

pub const DEFAULT_POINTS: usize = 4096;
pub const MIN_POINTS: usize = 256;
/// Largest ε·dt used by [`GridSpec::auto`].
pub const DEFAULT_EPS_DT: f64 = 1e-3;
/// Norm drift that aborts an evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
const SUPPORT_SIGMAS: f64 = 6.0;
const MARGIN_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(domain(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < MIN_POINTS || !n_points.is_power_of_two() {
            return Err(domain(format!("n_points must be a power of two ≥ {MIN_POINTS}, got {n_points}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(domain(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dt,
        })
    }

    /// Grid wide enough for both η branches of (region, n) over `[0, tau]`,
    /// fine enough for their momenta, with ε·dt ≤ 1e-3.
    pub fn auto(params: &PhysicalParams, region: Region, n: u8, g0: &GaussianState, tau: f64) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut p_max: f64 = 0.0;
        let samples = 32;
        for eta in Sign::BOTH {
            let b = BranchIndex { n, eta };
            for i in 0..=samples {
                let t = tau * i as f64 / samples as f64;
                let g = propagate_branch(g0, params, region, b, t)?;
                let reach = MARGIN_SIGMAS * 2.0 * g.sigma_x();
                lo = lo.min(g.x0() - reach);
                hi = hi.max(g.x0() + reach);
                p_max = p_max.max(g.p0().abs() + MARGIN_SIGMAS * g.sigma_p());
            }
        }
        let length = hi - lo;
        let dx_max = std::f64::consts::PI * params.hbar() / p_max;
        let needed = (length / dx_max).ceil() as usize;
        let n_points = needed.max(DEFAULT_POINTS).next_power_of_two();
        let dt = DEFAULT_EPS_DT / params.epsilon();
        Self::new(lo, hi, n_points, dt)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = std::f64::consts::TAU / (self.x_max - self.x_min);
        (0..n)
            .map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect()
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_points, dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub samples: Vec<Complex64>,
    pub spec: GridSpec,
}

impl GridWavefunction {
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.spec.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMoments {
    pub x_mean: f64,
    pub p_mean: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

/// Samples `g` on the grid, chirp and phase included, normalized to 1.
pub fn discretize(g: &GaussianState, spec: &GridSpec) -> Result<GridWavefunction> {
    let s = g.sigma_x();
    if g.x0() - SUPPORT_SIGMAS * s < spec.x_min || g.x0() + SUPPORT_SIGMAS * s > spec.x_max {
        return Err(Error::DomainTooSmall(format!(
            "packet support [{:e}, {:e}] leaves grid [{:e}, {:e}]",
            g.x0() - SUPPORT_SIGMAS * s,
            g.x0() + SUPPORT_SIGMAS * s,
            spec.x_min,
            spec.x_max
        )));
    }
    let hbar = g.hbar();
    let var = g.var_x();
    let samples: Vec<Complex64> = (0..spec.n_points)
        .map(|j| {
            let d = spec.x(j) - g.x0();
            let re = -d * d / (4.0 * var);
            let im = g.cov_xp() * d * d / (2.0 * hbar * var) + g.p0() * d / hbar + g.phase();
            Complex64::from_polar(re.exp(), im)
        })
        .collect();
    let mut psi = GridWavefunction { samples, spec: *spec };
    let norm = psi.norm_sqr().sqrt();
    for c in &mut psi.samples {
        *c /= norm;
    }
    Ok(psi)
}

/// Potential of branch (n, η) written from the branch Hamiltonian.
pub fn branch_potential(params: &PhysicalParams, region: Region, n: u8, eta: Sign) -> impl Fn(f64) -> f64 {
    let strength = eta.value() * params.hbar() * params.epsilon() * f64::from(n + 1).sqrt();
    let k = params.k();
    move |x| match region {
        Region::Nodal => strength * k * x,
        Region::Antinodal => strength * (1.0 - 0.5 * k * k * x * x),
    }
}

/// Strang-split evolution for `tau` under `p²/2m + v(x)`.
pub fn evolve_potential(
    psi: &GridWavefunction,
    mass: f64,
    hbar: f64,
    v: impl Fn(f64) -> f64,
    tau: f64,
) -> Result<GridWavefunction> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("evolution time must be ≥ 0, got {tau}")));
    }
    let steps = (tau / psi.spec.dt).ceil().max(1.0) as usize;
    evolve_steps(psi, mass, hbar, v, tau, steps)
}

fn evolve_steps(
    psi: &GridWavefunction,
    mass: f64,
    hbar: f64,
    v: impl Fn(f64) -> f64,
    tau: f64,
    steps: usize,
) -> Result<GridWavefunction> {
    let spec = psi.spec;
    if tau == 0.0 {
        return Ok(psi.clone());
    }
    let h = tau / steps as f64;
    let n = spec.n_points;
    let kick = |scale: f64| -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::from_polar(1.0, -v(spec.x(j)) * h * scale / hbar))
            .collect()
    };
    let half = kick(0.5);
    let full = kick(1.0);
    let inv_n = 1.0 / n as f64;
    let kinetic: Vec<Complex64> = spec
        .wavenumbers()
        .iter()
        .map(|k| Complex64::from_polar(inv_n, -hbar * k * k * h / (2.0 * mass)))
        .collect();

    let mut planner = FftPlanner::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];

    let norm0 = psi.norm_sqr();
    let dx = spec.dx();
    let mut buf = psi.samples.clone();
    mul_in_place(&mut buf, &half);
    for step in 0..steps {
        forward.process_with_scratch(&mut buf, &mut scratch);
        mul_in_place(&mut buf, &kinetic);
        inverse.process_with_scratch(&mut buf, &mut scratch);
        mul_in_place(&mut buf, if step + 1 == steps { &half } else { &full });
        let norm = buf.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx;
        let drift = (norm - norm0).abs();
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(Error::Instability {
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
    }
    Ok(GridWavefunction { samples: buf, spec })
}

fn mul_in_place(buf: &mut [Complex64], by: &[Complex64]) {
    for (a, b) in buf.iter_mut().zip(by) {
        *a *= b;
    }
}

/// Evolves `psi` through the cavity on branch (n, η).
pub fn evolve_branch(
    psi: &GridWavefunction,
    params: &PhysicalParams,
    region: Region,
    n: u8,
    eta: Sign,
    tau: f64,
) -> Result<GridWavefunction> {
    let v = branch_potential(params, region, n, eta);
    evolve_potential(psi, params.mass(), params.hbar(), v, tau)
}

/// Free evolution on the grid, a single exact kinetic step.
pub fn evolve_free(psi: &GridWavefunction, mass: f64, hbar: f64, tau: f64) -> Result<GridWavefunction> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("evolution time must be ≥ 0, got {tau}")));
    }
    evolve_steps(psi, mass, hbar, |_| 0.0, tau, 1)
}

/// Σ conj(a)·b·Δx.
pub fn grid_overlap(a: &GridWavefunction, b: &GridWavefunction) -> Result<Complex64> {
    if a.spec != b.spec {
        return Err(contract("grid overlap needs identical grid specs"));
    }
    let s: Complex64 = a.samples.iter().zip(&b.samples).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.spec.dx())
}

/// Position moments by quadrature, momentum moments from the spectrum.
pub fn grid_moments(psi: &GridWavefunction, hbar: f64) -> GridMoments {
    let spec = &psi.spec;
    let w: Vec<f64> = psi.samples.iter().map(|c| c.norm_sqr()).collect();
    let xs: Vec<f64> = (0..spec.n_points).map(|j| spec.x(j)).collect();
    let (x_mean, var_x) = weighted_moments(&xs, &w);

    let mut spectrum = psi.samples.clone();
    FftPlanner::new().plan_fft_forward(spec.n_points).process(&mut spectrum);
    let wk: Vec<f64> = spectrum.iter().map(|c| c.norm_sqr()).collect();
    let ks = spec.wavenumbers();
    let (k_mean, var_k) = weighted_moments(&ks, &wk);
    GridMoments {
        x_mean,
        p_mean: hbar * k_mean,
        sigma_x: var_x.sqrt(),
        sigma_p: hbar * var_k.sqrt(),
    }
}

fn weighted_moments(v: &[f64], w: &[f64]) -> (f64, f64) {
    let total: f64 = w.iter().sum();
    let mean = v.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = v.iter().zip(w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total;
    (mean, var)
}

/// Writes `x,re,im` rows with a header.
pub fn write_csv<W: Write>(psi: &GridWavefunction, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,re,im")?;
    for (j, c) in psi.samples.iter().enumerate() {
        writeln!(out, "{:e},{:e},{:e}", psi.spec.x(j), c.re, c.im)?;
    }
    Ok(())
}

/// Largest relative change of the final moments when dt is halved.
pub fn dt_convergence(
    psi: &GridWavefunction,
    params: &PhysicalParams,
    region: Region,
    n: u8,
    eta: Sign,
    tau: f64,
) -> Result<f64> {
    let hbar = params.hbar();
    let coarse = grid_moments(&evolve_branch(psi, params, region, n, eta, tau)?, hbar);
    let fine_psi = GridWavefunction {
        samples: psi.samples.clone(),
        spec: psi.spec.with_dt(0.5 * psi.spec.dt)?,
    };
    let fine = grid_moments(&evolve_branch(&fine_psi, params, region, n, eta, tau)?, hbar);
    Ok(moment_error(&coarse, &fine))
}

/// Largest relative deviation between two moment sets. Centroids are
/// compared on the scale of the larger of |value| and the width.
pub fn moment_error(a: &GridMoments, b: &GridMoments) -> f64 {
    let rel = |x: f64, y: f64, floor: f64| (x - y).abs() / x.abs().max(y.abs()).max(floor);
    [
        rel(a.x_mean, b.x_mean, a.sigma_x),
        rel(a.p_mean, b.p_mean, a.sigma_p),
        rel(a.sigma_x, b.sigma_x, 0.0),
        rel(a.sigma_p, b.sigma_p, 0.0),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Moments of a Gaussian in the grid's layout.
pub fn gaussian_moments(g: &GaussianState) -> GridMoments {
    GridMoments {
        x_mean: g.x0(),
        p_mean: g.p0(),
        sigma_x: g.sigma_x(),
        sigma_p: g.sigma_p(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::propagate_nodal;

    fn fig2() -> (PhysicalParams, GaussianState) {
        let p = PhysicalParams::reference();
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, p.lambda() / 10.0, p.hbar()).unwrap();
        (p, g)
    }

    fn grid(p: &PhysicalParams) -> GridSpec {
        GridSpec::new(-2e-5, 2e-5, 4096, 1e-3 / p.epsilon()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(0.0, 1.0, 255, 1.0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 384, 1.0).is_err());
        assert!(GridSpec::new(1.0, 0.0, 256, 1.0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 256, 0.0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 256, 1.0).is_ok());
    }

    #[test]
    fn discretized_moments_and_norm() {
        let (p, _) = fig2();
        let spec = grid(&p);
        let hbar = p.hbar();
        let plain = GaussianState::minimum_uncertainty(1e-6, 3.0 * hbar / 1e-6, 1e-6, hbar).unwrap();
        // σx²σp² − c² = ħ²/4 with a chirp
        let (vx, c) = (1.5e-12, 0.4 * hbar);
        let chirped = GaussianState::new(-2e-6, -hbar / 1e-6, vx, (0.25 * hbar * hbar + c * c) / vx, c, 0.3, hbar).unwrap();
        for g in [plain, chirped] {
            let psi = discretize(&g, &spec).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
            let m = grid_moments(&psi, hbar);
            assert!(moment_error(&m, &gaussian_moments(&g)) < 1e-8, "{m:?}");
        }
        let m = grid_moments(&discretize(&plain, &spec).unwrap(), hbar);
        assert!((m.sigma_x * m.sigma_p / (0.5 * hbar) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn clipped_support_is_rejected() {
        let (p, _) = fig2();
        let g = GaussianState::minimum_uncertainty(1.95e-5, 0.0, 1e-6, p.hbar()).unwrap();
        assert!(matches!(discretize(&g, &grid(&p)), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn free_spreading() {
        let (p, g) = fig2();
        let psi = discretize(&g, &grid(&p)).unwrap();
        let tau = 6.0 / p.epsilon();
        let out = evolve_free(&psi, p.mass(), p.hbar(), tau).unwrap();
        let m = grid_moments(&out, p.hbar());
        let expect = (g.var_x() + (g.sigma_p() * tau / p.mass()).powi(2)).sqrt();
        assert!((m.sigma_x / expect - 1.0).abs() < 1e-8);
        let drifted = GaussianState::minimum_uncertainty(0.0, 2.0 * p.hbar() / 1e-6, 1e-6, p.hbar()).unwrap();
        let out = evolve_free(&discretize(&drifted, &grid(&p)).unwrap(), p.mass(), p.hbar(), tau).unwrap();
        let x = grid_moments(&out, p.hbar()).x_mean;
        let want = drifted.p0() * tau / p.mass();
        assert!((x - want).abs() / want < 1e-8);
    }

    #[test]
    fn nodal_centroid_and_constant_force() {
        let (p, g) = fig2();
        let tau = 6.0 / p.epsilon();
        let spec = GridSpec::auto(&p, Region::Nodal, 0, &g, tau).unwrap();
        let psi = discretize(&g, &spec).unwrap();
        let out = evolve_branch(&psi, &p, Region::Nodal, 0, Sign::Plus, tau).unwrap();
        let m = grid_moments(&out, p.hbar());
        let x_expect = -p.hbar() * p.k() * p.epsilon() / (2.0 * p.mass()) * tau * tau;
        assert!((m.x_mean / x_expect - 1.0).abs() < 1e-6);
        let analytic = propagate_nodal(&g, &p, 0, Sign::Plus, tau).unwrap();
        assert!(moment_error(&m, &gaussian_moments(&analytic)) < 1e-6);
        // d⟨p⟩/dt is the constant force
        let half = evolve_branch(&psi, &p, Region::Nodal, 0, Sign::Plus, 0.5 * tau).unwrap();
        let force = -p.hbar() * p.epsilon() * p.k();
        let p_half = grid_moments(&half, p.hbar()).p_mean;
        assert!((p_half / (0.5 * tau) / force - 1.0).abs() < 1e-8);
        assert!((m.p_mean / tau / force - 1.0).abs() < 1e-8);
    }

    #[test]
    fn self_overlap_and_mismatch() {
        let (p, g) = fig2();
        let psi = discretize(&g, &grid(&p)).unwrap();
        assert!((grid_overlap(&psi, &psi).unwrap() - 1.0).norm() < 1e-12);
        let other = discretize(&g, &GridSpec::new(-3e-5, 3e-5, 4096, 1.0).unwrap()).unwrap();
        assert!(matches!(grid_overlap(&psi, &other), Err(Error::Contract(_))));
    }

    #[test]
    fn second_order_in_dt() {
        // antinodal phase error shrinks by ≈ 4 per halving
        let (p, _) = fig2();
        let g = GaussianState::minimum_uncertainty(3e-7, 0.0, 5e-7, p.hbar()).unwrap();
        let tau = 4.0 / p.epsilon();
        let base = GridSpec::auto(&p, Region::Antinodal, 1, &g, tau).unwrap();
        let run = |dt: f64| {
            let spec = base.with_dt(dt).unwrap();
            let psi = discretize(&g, &spec).unwrap();
            let out = evolve_branch(&psi, &p, Region::Antinodal, 1, Sign::Minus, tau).unwrap();
            grid_overlap(&psi, &out).unwrap()
        };
        let reference = run(1e-4 / p.epsilon());
        let e1 = (run(4e-2 / p.epsilon()) - reference).norm();
        let e2 = (run(2e-2 / p.epsilon()) - reference).norm();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let (_, g) = fig2();
        let psi = discretize(&g, &GridSpec::new(-1e-5, 1e-5, 256, 1.0).unwrap()).unwrap();
        let mut out = Vec::new();
        write_csv(&psi, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        assert_eq!(text.lines().count(), 257);
    }
}
