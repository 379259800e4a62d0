//! Projective and path measurements on composite states.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{contract, structural, Result};
use crate::gaussian::GaussianState;
use crate::qubit::DensityMatrix;
use crate::state::{AtomMode, CompositeState, InternalLabel, Sign, Term, ATOM_1, ATOM_2, FOCK_CAP};

/// Path labels share the branch sign type.
pub type PathLabel = Sign;

/// How the path of an atom is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathClassifier {
    /// Symmetric orthogonalization of the two branch packets.
    Ideal,
    /// Position sample classified by the midpoint between branch centroids.
    SampledPosition,
    /// Momentum sample classified by the midpoint between branch mean momenta.
    SampledMomentum,
}

/// Draws an index from a discrete distribution that need not be normalized.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if u < w {
            return i;
        }
        u -= w;
    }
    last
}

/// Born probabilities of finding 0, 1, 2 photons.
pub fn photon_distribution(state: &CompositeState) -> [f64; 3] {
    let total = state.norm_sqr();
    let mut p = [0.0; 3];
    for n in 0..=FOCK_CAP {
        if let Some(s) = project_photons(state, n) {
            p[n as usize] = s.norm_sqr() / total;
        }
    }
    p
}

/// Unnormalized projection onto |n⟩ of the field.
pub fn project_photons(state: &CompositeState, n: u8) -> Option<CompositeState> {
    state.filtered(|t| t.photons == n)
}

/// Unnormalized projection onto an internal state of register `atom`.
pub fn project_internal(state: &CompositeState, atom: usize, label: InternalLabel) -> Option<CompositeState> {
    state.filtered(|t| t.atoms[atom].label == label)
}

/// Probabilities of `[e, g]` for register `atom`.
pub fn internal_distribution(state: &CompositeState, atom: usize) -> [f64; 2] {
    let total = state.norm_sqr();
    let prob = |l| project_internal(state, atom, l).map_or(0.0, |s| s.norm_sqr() / total);
    [prob(InternalLabel::Excited), prob(InternalLabel::Ground)]
}

pub fn measure_photon_number<R: Rng + ?Sized>(state: &CompositeState, rng: &mut R) -> Result<(u8, CompositeState)> {
    let p = photon_distribution(state);
    let n = sample_index(&p, rng) as u8;
    let collapsed = project_photons(state, n)
        .ok_or_else(|| structural("sampled an empty photon sector"))?
        .normalized()?;
    Ok((n, collapsed))
}

pub fn measure_atom2<R: Rng + ?Sized>(state: &CompositeState, rng: &mut R) -> Result<(InternalLabel, CompositeState)> {
    let p = internal_distribution(state, ATOM_2);
    let label = [InternalLabel::Excited, InternalLabel::Ground][sample_index(&p, rng)];
    let collapsed = project_internal(state, ATOM_2, label)
        .ok_or_else(|| structural("sampled an empty internal sector"))?
        .normalized()?;
    Ok((label, collapsed))
}

/// Exact sampler for the position (or momentum) marginal of one register.
///
/// The marginal is `ρ(x) = Σ_ab W_ab f_a*(x) f_b(x)` over the distinct
/// packets `f_a` of the register, with `W` the Gram-weighted coefficient
/// matrix of everything else. Samples come from rejection against the mixture
/// `Σ_a √W_aa |f_a|²`, which dominates ρ after Cauchy–Schwarz on W.
#[derive(Debug, Clone)]
pub struct MarginalSampler {
    packets: Vec<GaussianState>,
    w: Vec<Vec<Complex64>>,
    sqrt_diag: Vec<f64>,
    momentum: bool,
}

impl MarginalSampler {
    pub fn new(state: &CompositeState, atom: usize, momentum: bool) -> Self {
        let mut packets: Vec<GaussianState> = Vec::new();
        let mut index = Vec::with_capacity(state.len());
        for t in state.terms() {
            let g = t.atoms[atom].packet;
            let i = match packets.iter().position(|p| p.is_close(&g, 1e-12)) {
                Some(i) => i,
                None => {
                    packets.push(g);
                    packets.len() - 1
                }
            };
            index.push(i);
        }
        let n = packets.len();
        let mut w = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        let terms = state.terms();
        for (j, tj) in terms.iter().enumerate() {
            for (k, tk) in terms.iter().enumerate() {
                let ov = tj.ket_overlap_except(tk, atom);
                if ov.norm() == 0.0 {
                    continue;
                }
                w[index[j]][index[k]] += tj.amp.conj() * tk.amp * ov;
            }
        }
        let sqrt_diag = (0..n).map(|a| w[a][a].re.max(0.0).sqrt()).collect();
        Self {
            packets,
            w,
            sqrt_diag,
            momentum,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let f: Vec<Complex64> = self.packets.iter().map(|g| self.amp(g, x)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, fa) in f.iter().enumerate() {
            for (b, fb) in f.iter().enumerate() {
                acc += self.w[a][b] * fa.conj() * fb;
            }
        }
        acc.re.max(0.0)
    }

    fn amp(&self, g: &GaussianState, x: f64) -> Complex64 {
        if self.momentum {
            g.momentum_amplitude(x)
        } else {
            g.amplitude(x)
        }
    }

    fn centre_width(&self, g: &GaussianState) -> (f64, f64) {
        if self.momentum {
            (g.p0(), g.sigma_p())
        } else {
            (g.x0(), g.sigma_x())
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let total: f64 = self.sqrt_diag.iter().sum();
        if !(total > 0.0) {
            return Err(structural("marginal of a null state"));
        }
        for _ in 0..100_000 {
            let a = sample_index(&self.sqrt_diag, rng);
            let (c, s) = self.centre_width(&self.packets[a]);
            let z: f64 = rng.sample(StandardNormal);
            let x = c + s * z;
            let envelope: f64 = self
                .packets
                .iter()
                .zip(&self.sqrt_diag)
                .map(|(g, d)| d * self.amp(g, x).norm_sqr())
                .sum::<f64>()
                * total;
            if envelope <= 0.0 {
                continue;
            }
            if rng.random::<f64>() * envelope <= self.density(x) {
                return Ok(x);
            }
        }
        Err(structural("rejection sampler failed to accept"))
    }
}

/// Result of one path readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathReadout {
    pub label: PathLabel,
    /// Sampled position or momentum; absent for the ideal mode.
    pub value: Option<f64>,
}

/// A prepared path measurement on one register.
#[derive(Debug, Clone)]
pub struct PathMeasurement {
    mode: PathClassifier,
    atom: usize,
    /// Branch weights `[+, −]`; for the ideal mode the outcome probabilities.
    pub probs: [f64; 2],
    /// Branch centroids in the measured quadrature, `[+, −]`.
    pub centroids: [f64; 2],
    pub widths: [f64; 2],
    /// Centroids too close for a sampled readout to mean anything.
    pub unreliable: bool,
    ideal: [Option<CompositeState>; 2],
    sampler: Option<MarginalSampler>,
}

impl PathMeasurement {
    pub fn prepare(state: &CompositeState, atom: usize, mode: PathClassifier) -> Result<Self> {
        let mut parts: [Vec<Term>; 2] = [Vec::new(), Vec::new()];
        let mut packets: [Option<GaussianState>; 2] = [None, None];
        for t in state.terms() {
            let eta = t.atoms[atom]
                .branch
                .ok_or_else(|| contract(format!("register {atom} carries an undeflected component")))?
                .eta;
            let i = sign_index(eta);
            parts[i].push(t.clone());
            let g = t.atoms[atom].packet;
            match packets[i] {
                None => packets[i] = Some(g),
                Some(p) if !p.is_close(&g, 1e-10) => {
                    return Err(contract(format!(
                        "register {atom} holds more than one packet on branch {eta}"
                    )))
                }
                Some(_) => {}
            }
        }
        let time = state.time();
        let sampled = mode != PathClassifier::Ideal;
        let sampler = sampled.then(|| MarginalSampler::new(state, atom, mode == PathClassifier::SampledMomentum));
        let (Some(bp), Some(bm)) = (packets[0], packets[1]) else {
            // a single branch: the ideal outcome is certain
            let i = if packets[0].is_some() { 0 } else { 1 };
            let g = packets[i].expect("state is non-empty");
            let mut probs = [0.0; 2];
            probs[i] = 1.0;
            let mut ideal = [None, None];
            ideal[i] = Some(state.normalized()?);
            let (c, s) = quadrature(&g, mode);
            return Ok(Self {
                mode,
                atom,
                probs,
                centroids: [c, c],
                widths: [s, s],
                unreliable: sampled,
                ideal,
                sampler,
            });
        };
        let (cp, sp) = quadrature(&bp, mode);
        let (cm, sm) = quadrature(&bm, mode);
        let unreliable = sampled && (cp - cm).abs() < 1e-3 * (sp + sm);

        let mut probs = [0.0; 2];
        let mut ideal = [None, None];
        if sampled {
            for i in 0..2 {
                probs[i] = CompositeState::from_parts(parts[i].clone(), time).norm_sqr();
            }
        } else {
            let o = crate::gaussian::gaussian_overlap(&bp, &bm);
            let half = gram_power(o, 0.5);
            let inv_half = gram_power(o, -0.5);
            for j in 0..2 {
                // |ẽ_j⟩ ⊗ Σ_k (G^½)_jk R_k with |ẽ_j⟩ = Σ_l (G^-½)_lj |B_l⟩
                let mut terms = Vec::new();
                for (l, bl) in [bp, bm].iter().enumerate() {
                    let m_lj = inv_half[l][j];
                    for (k, part_k) in parts.iter().enumerate() {
                        let c = m_lj * half[j][k];
                        if c.norm() == 0.0 {
                            continue;
                        }
                        for t in part_k {
                            let mut t = t.clone();
                            t.amp *= c;
                            t.atoms[atom] = AtomMode {
                                packet: *bl,
                                branch: parts[l][0].atoms[atom].branch,
                                ..t.atoms[atom]
                            };
                            terms.push(t);
                        }
                    }
                }
                let s = CompositeState::from_parts(terms, time).merged();
                probs[j] = s.norm_sqr();
                if probs[j] > 1e-300 {
                    ideal[j] = Some(s.normalized()?);
                }
            }
        }
        let total = probs[0] + probs[1];
        Ok(Self {
            mode,
            atom,
            probs: [probs[0] / total, probs[1] / total],
            centroids: [cp, cm],
            widths: [sp, sm],
            unreliable,
            ideal,
            sampler,
        })
    }

    pub fn mode(&self) -> PathClassifier {
        self.mode
    }

    /// Path assigned to a readout value by the midpoint rule.
    pub fn classify_value(&self, x: f64) -> PathLabel {
        let mid = 0.5 * (self.centroids[0] + self.centroids[1]);
        let plus_above = self.centroids[0] > self.centroids[1];
        if (x > mid) == plus_above {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathReadout> {
        match &self.sampler {
            None => Ok(PathReadout {
                label: [Sign::Plus, Sign::Minus][sample_index(&self.probs, rng)],
                value: None,
            }),
            Some(s) => {
                let x = s.sample(rng)?;
                Ok(PathReadout {
                    label: self.classify_value(x),
                    value: Some(x),
                })
            }
        }
    }

    /// Post-measurement state. The ideal mode projects on the orthogonalized
    /// branch; sampled modes condition `state` on the readout value, so a
    /// misclassified readout leaves the state of the other branch.
    pub fn collapse(&self, state: &CompositeState, readout: &PathReadout) -> Result<CompositeState> {
        match readout.value {
            None => self.ideal[sign_index(readout.label)]
                .clone()
                .ok_or_else(|| structural(format!("branch {} has zero weight", readout.label))),
            Some(x) => condition_on_readout(state, self.atom, x, self.mode == PathClassifier::SampledMomentum),
        }
    }

    /// Probability that a sampled readout lands on the wrong side of the
    /// midpoint, from the marginal of each branch. Zero for the ideal mode.
    pub fn misclassification(&self) -> f64 {
        if self.mode == PathClassifier::Ideal {
            return 0.0;
        }
        let mid = 0.5 * (self.centroids[0] + self.centroids[1]);
        let tail = |c: f64, s: f64| 0.5 * libm::erfc((mid - c).abs() / (s * std::f64::consts::SQRT_2));
        self.probs[0] * tail(self.centroids[0], self.widths[0])
            + self.probs[1] * tail(self.centroids[1], self.widths[1])
    }
}

/// Projects register `atom` onto a position (or momentum) eigenstate.
///
/// The register's packets are replaced by one common packet, which leaves
/// every other reduced quantity unchanged.
pub fn condition_on_readout(state: &CompositeState, atom: usize, value: f64, momentum: bool) -> Result<CompositeState> {
    let common = state.terms()[0].atoms[atom].packet;
    let terms = state
        .terms()
        .iter()
        .map(|t| {
            let g = t.atoms[atom].packet;
            let f = if momentum {
                g.momentum_amplitude(value)
            } else {
                g.amplitude(value)
            };
            let mut t = t.clone();
            t.amp *= f;
            t.atoms[atom] = AtomMode {
                label: t.atoms[atom].label,
                packet: common,
                branch: None,
            };
            t
        })
        .collect();
    CompositeState::from_parts(terms, state.time()).merged().normalized()
}

/// Path measurement sampled once, directly on a state.
pub fn measure_path<R: Rng + ?Sized>(
    state: &CompositeState,
    atom: usize,
    mode: PathClassifier,
    rng: &mut R,
) -> Result<(PathReadout, CompositeState, bool)> {
    let m = PathMeasurement::prepare(state, atom, mode)?;
    let r = m.measure(rng)?;
    Ok((r, m.collapse(state, &r)?, m.unreliable))
}

/// Reduced internal density matrix of atom 1, normalized to unit trace.
pub fn atom1_density(state: &CompositeState) -> DensityMatrix {
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    let idx = |l: InternalLabel| if l.is_excited() { 0 } else { 1 };
    for tj in state.terms() {
        for tk in state.terms() {
            let rest = tj.ket_overlap_except(tk, ATOM_1);
            if rest.norm() == 0.0 {
                continue;
            }
            let (aj, ak) = (tj.atoms[ATOM_1], tk.atoms[ATOM_1]);
            let ov = crate::gaussian::gaussian_overlap(&ak.packet, &aj.packet) * rest.conj();
            rho[idx(aj.label)][idx(ak.label)] += tj.amp * tk.amp.conj() * ov;
        }
    }
    let tr = rho[0][0].re + rho[1][1].re;
    for row in &mut rho {
        for v in row.iter_mut() {
            *v /= tr;
        }
    }
    rho
}

fn quadrature(g: &GaussianState, mode: PathClassifier) -> (f64, f64) {
    match mode {
        PathClassifier::SampledMomentum => (g.p0(), g.sigma_p()),
        _ => (g.x0(), g.sigma_x()),
    }
}

fn sign_index(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

/// `G^power` for the Gram matrix `[[1, o], [o*, 1]]`.
fn gram_power(o: Complex64, power: f64) -> [[Complex64; 2]; 2] {
    let m = o.norm();
    if m == 0.0 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        return [[one, zero], [zero, one]];
    }
    let up = (1.0 + m).powf(power);
    let down = (1.0 - m).powf(power);
    let c0 = Complex64::new(0.5 * (up + down), 0.0);
    let c1 = 0.5 * (up - down) / m;
    [[c0, o * c1], [o.conj() * c1, c0]]
}
