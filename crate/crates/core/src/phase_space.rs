//! Closed-form Gaussian propagation under the branch Hamiltonians.
//!
//! Every branch Hamiltonian is at most quadratic, so a Gaussian stays Gaussian
//! and its evolution is fixed by a 2×2 symplectic matrix S. Moments follow
//! the classical flow and the covariance transforms as `S Σ Sᵀ`. The global
//! phase is carried with the complex width vector (Q, P) of the packet:
//! `γ(t) = γ(0) + S_cl/ħ − ½ arg Q(t)` with `S_cl` the classical action and
//! the argument continued through the caustics of the harmonic branch.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::state::{BranchIndex, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Mode function linearized around a node: V = η ħεk√(n+1)·x.
    Nodal,
    /// Mode function expanded around an antinode: V = η ħε√(n+1)(1 − k²x²/2).
    Antinodal,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Nodal => "nodal",
            Region::Antinodal => "antinodal",
        })
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nodal" => Ok(Region::Nodal),
            "antinodal" => Ok(Region::Antinodal),
            other => Err(domain(format!("unknown region '{other}'"))),
        }
    }
}

/// Which frequency the antinodal n = 1 closed form is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaConvention {
    /// ω² = √(n+1)·ħεk²/m with n = 1, the frequency of the branch Hamiltonian.
    FockScaled,
    /// ω² = ħk²ε/m, without the Fock factor.
    Printed,
}

impl OmegaConvention {
    pub fn omega(self, params: &PhysicalParams) -> f64 {
        match self {
            OmegaConvention::FockScaled => params.antinodal_omega_sq(1).sqrt(),
            OmegaConvention::Printed => params.antinodal_omega_sq(0).sqrt(),
        }
    }
}

/// One sample of a branch path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTrajectory {
    pub tau: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// Ω_n(τ)·τ, the phase of the branch overlap.
    pub omega_phase: f64,
}

/// Potential `½κx² + F·x + v0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPotential {
    pub kappa: f64,
    pub force: f64,
    pub offset: f64,
}

impl QuadraticPotential {
    pub fn free() -> Self {
        Self {
            kappa: 0.0,
            force: 0.0,
            offset: 0.0,
        }
    }

    pub fn for_branch(params: &PhysicalParams, region: Region, branch: BranchIndex) -> Self {
        let root = f64::from(branch.n + 1).sqrt();
        let eta = branch.eta.value();
        let hbar_eps = params.hbar() * params.epsilon();
        match region {
            Region::Nodal => Self {
                kappa: 0.0,
                force: eta * hbar_eps * params.k() * root,
                offset: 0.0,
            },
            Region::Antinodal => Self {
                kappa: -eta * hbar_eps * params.k() * params.k() * root,
                force: 0.0,
                offset: eta * hbar_eps * root,
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        0.5 * self.kappa * x * x + self.force * x + self.offset
    }
}

/// Evolves a packet for time `t ≥ 0` under `p²/2m + V(x)`.
pub fn propagate(g: &GaussianState, mass: f64, v: &QuadraticPotential, t: f64) -> Result<GaussianState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("propagation time must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(*g);
    }
    if v.kappa != 0.0 && v.force != 0.0 {
        // shift to the potential minimum (or maximum) and back
        let shift = -v.force / v.kappa;
        let offset = v.offset - 0.5 * v.force * v.force / v.kappa;
        let moved = GaussianState::from_parts(
            g.x0() - shift,
            g.p0(),
            g.var_x(),
            g.cov_xp(),
            g.phase(),
            g.hbar(),
        );
        let out = propagate(
            &moved,
            mass,
            &QuadraticPotential {
                kappa: v.kappa,
                force: 0.0,
                offset,
            },
            t,
        )?;
        // phase is referenced to the centroid, so translating back is exact
        return Ok(GaussianState::from_parts(
            out.x0() + shift,
            out.p0(),
            out.var_x(),
            out.cov_xp(),
            out.phase(),
            out.hbar(),
        ));
    }

    let hbar = g.hbar();
    let (x0, p0) = (g.x0(), g.p0());
    let (s, caustics) = flow_matrix(mass, v.kappa, t);

    let (xt, pt, action) = if v.kappa == 0.0 {
        let f = v.force;
        let xt = x0 + p0 * t / mass - 0.5 * f * t * t / mass;
        let pt = p0 - f * t;
        let action = p0 * p0 * t / (2.0 * mass) - p0 * f * t * t / mass
            + f * f * t * t * t / (3.0 * mass)
            - f * x0 * t
            - v.offset * t;
        (xt, pt, action)
    } else {
        let xt = s[0][0] * x0 + s[0][1] * p0;
        let pt = s[1][0] * x0 + s[1][1] * p0;
        (xt, pt, 0.5 * (pt * xt - p0 * x0) - v.offset * t)
    };

    let (vx, c, vp) = (g.var_x(), g.cov_xp(), g.var_p());
    let var_x = s[0][0] * s[0][0] * vx + 2.0 * s[0][0] * s[0][1] * c + s[0][1] * s[0][1] * vp;
    let cov = s[0][0] * s[1][0] * vx + (s[0][0] * s[1][1] + s[0][1] * s[1][0]) * c
        + s[0][1] * s[1][1] * vp;

    // Q(t)/Q(0) with P(0)/Q(0) = 2iħA
    let a = g.width_parameter();
    let q = s[0][0] + s[0][1] * 2.0 * Complex64::i() * hbar * a;
    let arg_q = match caustics {
        Some(m) => {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            m as f64 * PI + (q * sign).arg()
        }
        None => q.arg(),
    };
    let phase = g.phase() + action / hbar - 0.5 * arg_q;
    Ok(GaussianState::from_parts(xt, pt, var_x, cov, phase, hbar))
}

/// Free flight.
pub fn free_propagate(g: &GaussianState, mass: f64, t: f64) -> Result<GaussianState> {
    propagate(g, mass, &QuadraticPotential::free(), t)
}

/// Symplectic matrix of the flow and, for the harmonic case, the number of
/// half periods completed (needed to continue arg Q).
fn flow_matrix(mass: f64, kappa: f64, t: f64) -> ([[f64; 2]; 2], Option<i64>) {
    if kappa > 0.0 {
        let w = (kappa / mass).sqrt();
        let (s, c) = (w * t).sin_cos();
        let m = (w * t / PI).floor() as i64;
        ([[c, s / (mass * w)], [-mass * w * s, c]], Some(m))
    } else if kappa < 0.0 {
        let w = (-kappa / mass).sqrt();
        let (s, c) = ((w * t).sinh(), (w * t).cosh());
        ([[c, s / (mass * w)], [mass * w * s, c]], None)
    } else {
        ([[1.0, t / mass], [0.0, 1.0]], None)
    }
}

/// Branch packet for a nodal transit of duration `tau`.
pub fn propagate_nodal(
    g: &GaussianState,
    params: &PhysicalParams,
    n: u8,
    eta: Sign,
    tau: f64,
) -> Result<GaussianState> {
    let branch = BranchIndex::new(n, eta)?;
    let v = QuadraticPotential::for_branch(params, Region::Nodal, branch);
    propagate(g, params.mass(), &v, tau)
}

/// Branch packet for an antinodal transit of duration `tau`.
pub fn propagate_antinodal(
    g: &GaussianState,
    params: &PhysicalParams,
    n: u8,
    eta: Sign,
    tau: f64,
) -> Result<GaussianState> {
    let branch = BranchIndex::new(n, eta)?;
    let v = QuadraticPotential::for_branch(params, Region::Antinodal, branch);
    propagate(g, params.mass(), &v, tau)
}

pub fn propagate_branch(
    g: &GaussianState,
    params: &PhysicalParams,
    region: Region,
    branch: BranchIndex,
    tau: f64,
) -> Result<GaussianState> {
    let v = QuadraticPotential::for_branch(params, region, branch);
    propagate(g, params.mass(), &v, tau)
}

/// Ω_n = 2kε√(n+1)(x0 + p0τ/2m).
pub fn nodal_omega(params: &PhysicalParams, g0: &GaussianState, n: u8, tau: f64) -> f64 {
    2.0 * params.k() * params.epsilon() * f64::from(n + 1).sqrt()
        * (g0.x0() + g0.p0() * tau / (2.0 * params.mass()))
}

/// Closed form of ⟨Φ_n⁺|Φ_n⁻⟩ after a nodal transit.
pub fn branch_overlap_nodal(params: &PhysicalParams, g0: &GaussianState, n: u8, tau: f64) -> Complex64 {
    let root = f64::from(n + 1).sqrt();
    let hk_eps = params.hbar() * params.k() * params.epsilon();
    let dx = hk_eps * root * tau * tau / params.mass();
    let dp = 2.0 * hk_eps * root * tau;
    let decay = -dx * dx / (8.0 * g0.var_x()) - dp * dp / (8.0 * g0.var_p());
    Complex64::from_polar(decay.exp(), nodal_omega(params, g0, n, tau) * tau)
}

/// Closed form of ⟨Φ_1⁺|Φ_1⁻⟩ after an antinodal transit.
///
/// Valid for a packet matched to the ground width of the oscillator selected
/// by `convention`; other widths are rejected.
pub fn branch_overlap_antinodal_n1(
    params: &PhysicalParams,
    g0: &GaussianState,
    tau: f64,
    convention: OmegaConvention,
) -> Result<Complex64> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("interaction time must be ≥ 0, got {tau}")));
    }
    let (m, hbar) = (params.mass(), params.hbar());
    let w = convention.omega(params);
    let ground = hbar / (2.0 * m * w);
    if (g0.var_x() - ground).abs() > 1e-9 * ground || g0.cov_xp().abs() > 1e-9 * hbar {
        return Err(domain(format!(
            "closed form needs var_x = ħ/(2mω) = {ground:e} and no chirp, got var_x = {:e}",
            g0.var_x()
        )));
    }
    let a = g0.x0() * (m * w / (2.0 * hbar)).sqrt();
    let b = g0.p0() / (2.0 * m * hbar * w).sqrt();
    let wt = w * tau;
    let (s1, c1) = wt.sin_cos();
    let (s2, c2) = (2.0 * wt).sin_cos();
    let (ch, th) = (wt.cosh(), wt.tanh());
    let r2 = a * a + b * b;
    let d2 = a * a - b * b;
    let log_mag = -0.5 * ch.ln() - r2 * (1.0 - c1 / ch) - th * (a * b * (1.0 - c2) + 0.5 * d2 * s2);
    let phase = -0.5 * wt - r2 * s1 / ch - 0.5 * th * (d2 * (1.0 + c2) + 2.0 * a * b * s2)
        + 2.0 * 2f64.sqrt() * params.epsilon() * tau;
    Ok(Complex64::from_polar(log_mag.exp(), phase))
}

/// Which-path distinguishability √(1 − |⟨Φ⁺|Φ⁻⟩|²).
pub fn distinguishability(overlap: Complex64) -> Result<f64> {
    let m = overlap.norm();
    if !(m <= 1.0 + 1e-12) {
        return Err(domain(format!("|overlap| = {m} exceeds 1")));
    }
    Ok((1.0 - m * m).max(0.0).sqrt())
}

/// Nodal centroid and width of branch (n, η) at each `tau` in an ascending grid.
pub fn path_trace(
    params: &PhysicalParams,
    g0: &GaussianState,
    n: u8,
    eta: Sign,
    tau_grid: &[f64],
) -> Result<Vec<BranchTrajectory>> {
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("tau grid must be ascending"));
    }
    tau_grid
        .iter()
        .map(|&tau| {
            let g = propagate_nodal(g0, params, n, eta, tau)?;
            Ok(BranchTrajectory {
                tau,
                x_mean: g.x0(),
                p_mean: g.p0(),
                sigma_x: g.sigma_x(),
                sigma_p: g.sigma_p(),
                omega_phase: nodal_omega(params, g0, n, tau) * tau,
            })
        })
        .collect()
}
