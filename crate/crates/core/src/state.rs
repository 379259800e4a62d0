//! Composite atom–field–translation state.
//!
//! A state is a finite superposition of product terms
//! `amp · |s_1, φ_1⟩ ⊗ |s_2, φ_2⟩ ⊗ … ⊗ |n⟩`, one internal label and one
//! Gaussian packet per atom plus a cavity Fock number. Packets attached to
//! different terms are generally not orthogonal, so every inner product goes
//! through the Gram matrix.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Error, Result};
use crate::gaussian::{gaussian_overlap, GaussianState};

/// Highest Fock number representable in the protocol.
pub const FOCK_CAP: u8 = 2;

/// Register index of the first protocol atom (the one that ends up carrying the qubit).
pub const ATOM_1: usize = 0;
/// Register index of the atom whose state is teleported.
pub const ATOM_2: usize = 1;
/// Register index of the photon-counting probe atom, when present.
pub const PROBE: usize = 2;

/// Relative tolerance for coalescing terms.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InternalLabel {
    Ground,
    Excited,
}

impl InternalLabel {
    pub fn is_excited(self) -> bool {
        matches!(self, InternalLabel::Excited)
    }
}

impl fmt::Display for InternalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InternalLabel::Ground => "g",
            InternalLabel::Excited => "e",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Dressed-state label (n, η) of a branch wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchIndex {
    pub n: u8,
    pub eta: Sign,
}

impl BranchIndex {
    pub fn new(n: u8, eta: Sign) -> Result<Self> {
        if n >= FOCK_CAP {
            // the dressed pair (n, η) couples |e,n⟩ with |g,n+1⟩
            return Err(Error::FockCap(n + 1));
        }
        Ok(Self { n, eta })
    }
}

/// One atom inside a product term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomMode {
    pub label: InternalLabel,
    pub packet: GaussianState,
    /// Branch the packet was last deflected into, if any.
    pub branch: Option<BranchIndex>,
}

impl AtomMode {
    pub fn new(label: InternalLabel, packet: GaussianState) -> Self {
        Self {
            label,
            packet,
            branch: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amp: Complex64,
    pub atoms: Vec<AtomMode>,
    pub photons: u8,
}

impl Term {
    pub fn excitations(&self) -> u32 {
        self.atoms.iter().filter(|a| a.label.is_excited()).count() as u32 + u32::from(self.photons)
    }

    /// Same discrete labels and equal packets.
    pub fn same_ket(&self, other: &Term, tol: f64) -> bool {
        self.photons == other.photons
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| a.label == b.label && a.packet.is_close(&b.packet, tol))
    }

    /// ⟨self ket | other ket⟩ without amplitudes.
    pub fn ket_overlap(&self, other: &Term) -> Complex64 {
        if self.photons != other.photons || self.atoms.len() != other.atoms.len() {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (a, b) in self.atoms.iter().zip(&other.atoms) {
            if a.label != b.label {
                return Complex64::new(0.0, 0.0);
            }
            acc *= gaussian_overlap(&a.packet, &b.packet);
        }
        acc
    }

    /// ⟨self ket | other ket⟩ with register `skip` left out.
    pub fn ket_overlap_except(&self, other: &Term, skip: usize) -> Complex64 {
        if self.photons != other.photons || self.atoms.len() != other.atoms.len() {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (i, (a, b)) in self.atoms.iter().zip(&other.atoms).enumerate() {
            if i == skip {
                continue;
            }
            if a.label != b.label {
                return Complex64::new(0.0, 0.0);
            }
            acc *= gaussian_overlap(&a.packet, &b.packet);
        }
        acc
    }
}

/// Superposition of product terms at a common laboratory time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeState {
    terms: Vec<Term>,
    time: f64,
}

impl CompositeState {
    /// Validates the Fock cap and register layout. Terms are taken as given.
    pub fn new(terms: Vec<Term>, time: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(structural("a state needs at least one term"));
        }
        let n_atoms = terms[0].atoms.len();
        for t in &terms {
            if t.photons > FOCK_CAP {
                return Err(Error::FockCap(t.photons));
            }
            if t.atoms.len() != n_atoms {
                return Err(structural("terms carry different numbers of atoms"));
            }
            if !(t.amp.re.is_finite() && t.amp.im.is_finite()) {
                return Err(structural("non-finite amplitude"));
            }
        }
        Ok(Self { terms, time })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_atoms(&self) -> usize {
        self.terms[0].atoms.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// ⟨self|other⟩ through the full Gram matrix.
    pub fn inner(&self, other: &CompositeState) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.amp.conj() * b.amp * a.ket_overlap(b);
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        let t = &self.terms;
        let mut acc = 0.0;
        for j in 0..t.len() {
            acc += t[j].amp.norm_sqr() * t[j].ket_overlap(&t[j]).re;
            for k in j + 1..t.len() {
                acc += 2.0 * (t[j].amp.conj() * t[k].amp * t[j].ket_overlap(&t[k])).re;
            }
        }
        acc.max(0.0)
    }

    /// `self` rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 1e-300) {
            return Err(structural("cannot normalize a null state"));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                amp: t.amp * factor,
                ..t.clone()
            })
            .collect();
        Self {
            terms,
            time: self.time,
        }
    }

    /// Coalesces terms with identical kets and drops exact zeros.
    pub fn merged(&self) -> Self {
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match out.iter_mut().find(|o| o.same_ket(t, MERGE_TOL)) {
                Some(o) => o.amp += t.amp,
                None => out.push(t.clone()),
            }
        }
        let scale = out.iter().map(|t| t.amp.norm()).fold(0.0, f64::max);
        out.retain(|t| t.amp.norm() > 1e-15 * scale);
        if out.is_empty() {
            out.push(self.terms[0].clone());
            out[0].amp = Complex64::new(0.0, 0.0);
        }
        Self {
            terms: out,
            time: self.time,
        }
    }

    /// Excitation number of every term, in term order.
    pub fn excitation_numbers(&self) -> Vec<u32> {
        self.terms.iter().map(Term::excitations).collect()
    }

    /// Keeps only terms passing `keep`; the result is not renormalized.
    pub fn filtered(&self, keep: impl Fn(&Term) -> bool) -> Option<Self> {
        let terms: Vec<Term> = self.terms.iter().filter(|t| keep(t)).cloned().collect();
        if terms.is_empty() {
            None
        } else {
            Some(Self {
                terms,
                time: self.time,
            })
        }
    }

    pub(crate) fn from_parts(terms: Vec<Term>, time: f64) -> Self {
        debug_assert!(!terms.is_empty());
        Self { terms, time }
    }
}

/// Norm of a state computed with the full Gram matrix.
pub fn state_norm(state: &CompositeState) -> f64 {
    state.norm_sqr().sqrt()
}

/// ‖a − b‖ using the Gram matrix.
///
/// Matching kets are cancelled before the Gram sum, so identical states give
/// a distance at rounding level rather than √ε.
pub fn norm_distance(a: &CompositeState, b: &CompositeState) -> f64 {
    let mut terms = a.terms.clone();
    terms.extend(b.terms.iter().map(|t| Term {
        amp: -t.amp,
        ..t.clone()
    }));
    let diff = CompositeState {
        terms,
        time: a.time,
    };
    let mut out: Vec<Term> = Vec::with_capacity(diff.terms.len());
    for t in diff.terms {
        match out.iter_mut().find(|o| o.same_ket(&t, MERGE_TOL)) {
            Some(o) => o.amp += t.amp,
            None => out.push(t),
        }
    }
    CompositeState {
        terms: out,
        time: a.time,
    }
    .norm_sqr()
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HBAR;

    fn packet(x0: f64) -> GaussianState {
        GaussianState::minimum_uncertainty(x0, 0.0, 1e-6, HBAR).unwrap()
    }

    fn term(amp: f64, x0: f64, label: InternalLabel, photons: u8) -> Term {
        Term {
            amp: Complex64::new(amp, 0.0),
            atoms: vec![AtomMode::new(label, packet(x0))],
            photons,
        }
    }

    #[test]
    fn single_unit_term() {
        let s = CompositeState::new(vec![term(1.0, 0.0, InternalLabel::Excited, 0)], 0.0).unwrap();
        assert!((state_norm(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_terms_add_coherently() {
        let s = CompositeState::new(
            vec![
                term(0.5, 0.0, InternalLabel::Ground, 1),
                term(0.5, 0.0, InternalLabel::Ground, 1),
            ],
            0.0,
        )
        .unwrap();
        let merged = s.merged();
        assert_eq!(merged.len(), 1);
        assert!((state_norm(&s) - state_norm(&merged)).abs() < 1e-15);
        assert!((state_norm(&s) - 1.0).abs() < 1e-15);
        let s = CompositeState::new(
            vec![
                term(1.0, 0.0, InternalLabel::Ground, 1),
                term(0.0, 0.0, InternalLabel::Ground, 1),
            ],
            0.0,
        )
        .unwrap();
        assert!((state_norm(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_packets_enter_the_norm() {
        let sx = 1e-6;
        let dx = 1e-6;
        let s = CompositeState::new(
            vec![
                term(1.0, 0.0, InternalLabel::Ground, 0),
                term(1.0, dx, InternalLabel::Ground, 0),
            ],
            0.0,
        )
        .unwrap();
        let ov = (-dx * dx / (8.0 * sx * sx)).exp();
        assert!((s.norm_sqr() - (2.0 + 2.0 * ov)).abs() < 1e-12);
        // different labels kill the cross term
        let s = CompositeState::new(
            vec![
                term(1.0, 0.0, InternalLabel::Ground, 0),
                term(1.0, dx, InternalLabel::Excited, 0),
            ],
            0.0,
        )
        .unwrap();
        assert!((s.norm_sqr() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fock_cap_enforced() {
        let r = CompositeState::new(vec![term(1.0, 0.0, InternalLabel::Ground, 3)], 0.0);
        assert_eq!(r.unwrap_err(), Error::FockCap(3));
        assert!(BranchIndex::new(2, Sign::Plus).is_err());
        assert!(BranchIndex::new(1, Sign::Minus).is_ok());
    }

    #[test]
    fn excitation_count() {
        let t = Term {
            amp: Complex64::new(1.0, 0.0),
            atoms: vec![
                AtomMode::new(InternalLabel::Excited, packet(0.0)),
                AtomMode::new(InternalLabel::Ground, packet(0.0)),
            ],
            photons: 1,
        };
        assert_eq!(t.excitations(), 2);
    }

    #[test]
    fn distance_to_self_vanishes() {
        let s = CompositeState::new(
            vec![
                term(0.6, 0.0, InternalLabel::Ground, 0),
                term(0.8, 3e-7, InternalLabel::Ground, 0),
            ],
            0.0,
        )
        .unwrap();
        assert!(norm_distance(&s, &s) < 1e-15);
        let neg = s.scaled(Complex64::new(-1.0, 0.0));
        assert!((norm_distance(&s, &neg) - 2.0 * state_norm(&s)).abs() < 1e-12);
    }
}
