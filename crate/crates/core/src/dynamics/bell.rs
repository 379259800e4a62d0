//! Bell-form view of the state between the two transits.
//!
//! Before atom 2 enters, the atom-2 ⊗ field part of the state is resolved on
//! the four maximally entangled partners
//! `χ^± = (|e_2,0⟩ ± |g_2,1⟩)/√2` and `ξ^± = (|e_2,1⟩ ± |g_2,0⟩)/√2`,
//! and each partner is paired with one of the two atom-1 branch packets. What
//! remains in each of the eight slots is an unnormalized atom-1 qubit vector,
//! which equals `sign/(2√2)·O|α⟩` for a fixed Pauli operator O.
//!
//! Pauli operators use the (g, e) ordering: `σ_z|g⟩ = |g⟩`, `σ_z|e⟩ = −|e⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::gaussian::GaussianState;
use crate::qubit::Amplitudes;
use crate::state::{AtomMode, BranchIndex, CompositeState, InternalLabel, Sign, Term, ATOM_1, ATOM_2};

/// Common prefactor of every slot.
pub const BELL_PREFACTOR: f64 = 0.25 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellPartner {
    Chi(Sign),
    Xi(Sign),
}

impl BellPartner {
    pub const ALL: [BellPartner; 4] = [
        BellPartner::Chi(Sign::Plus),
        BellPartner::Chi(Sign::Minus),
        BellPartner::Xi(Sign::Plus),
        BellPartner::Xi(Sign::Minus),
    ];

    /// Product-basis expansion as (atom-2 label, photons, coefficient).
    pub fn components(self) -> [(InternalLabel, u8, f64); 2] {
        let (eta, n_e, n_g) = match self {
            BellPartner::Chi(eta) => (eta, 0, 1),
            BellPartner::Xi(eta) => (eta, 1, 0),
        };
        [
            (InternalLabel::Excited, n_e, FRAC_1_SQRT_2),
            (InternalLabel::Ground, n_g, eta.value() * FRAC_1_SQRT_2),
        ]
    }

    fn coefficient(self, label: InternalLabel, photons: u8) -> f64 {
        self.components()
            .iter()
            .find(|(l, n, _)| *l == label && *n == photons)
            .map_or(0.0, |c| c.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliLabel {
    Identity,
    SigmaZ,
    SigmaX,
    ISigmaY,
}

impl PauliLabel {
    /// Acts on amplitudes ordered `[e, g]`.
    pub fn apply(self, a: &Amplitudes) -> Amplitudes {
        match self {
            PauliLabel::Identity => *a,
            PauliLabel::SigmaZ => [-a[0], a[1]],
            PauliLabel::SigmaX => [a[1], a[0]],
            // iσ_y|e⟩ = |g⟩, iσ_y|g⟩ = −|e⟩
            PauliLabel::ISigmaY => [-a[1], a[0]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSlot {
    pub partner: BellPartner,
    pub branch1: Sign,
    pub operator: PauliLabel,
    /// Sign multiplying the prefactor in the expected decomposition.
    pub sign: f64,
    /// Atom-1 internal vector found in this slot, amplitudes `[e, g]`.
    pub atom1: Amplitudes,
}

impl BellSlot {
    /// `sign·prefactor·O|α⟩`.
    pub fn expected(&self, alpha: &Amplitudes) -> Amplitudes {
        let o = self.operator.apply(alpha);
        let c = self.sign * BELL_PREFACTOR;
        [o[0] * c, o[1] * c]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFormView {
    pub prefactor: f64,
    pub slots: Vec<BellSlot>,
    /// Atom-1 branch packets, `[Φ⁺, Φ⁻]`.
    pub branches1: [GaussianState; 2],
    pub atom2_packet: GaussianState,
    pub time: f64,
}

/// Operator and sign attached to each slot.
fn slot_layout(partner: BellPartner, branch1: Sign) -> (PauliLabel, f64) {
    use BellPartner::{Chi, Xi};
    use Sign::{Minus, Plus};
    match (partner, branch1) {
        (Chi(Plus), Plus) | (Chi(Minus), Minus) => (PauliLabel::Identity, 1.0),
        (Chi(Plus), Minus) | (Chi(Minus), Plus) => (PauliLabel::SigmaZ, -1.0),
        (Xi(Plus), Plus) => (PauliLabel::SigmaX, 1.0),
        (Xi(Minus), Minus) => (PauliLabel::SigmaX, -1.0),
        (Xi(Minus), Plus) => (PauliLabel::ISigmaY, 1.0),
        (Xi(Plus), Minus) => (PauliLabel::ISigmaY, -1.0),
    }
}

/// Decomposes the post-atom-1, pre-atom-2 state into the eight Bell slots.
pub fn bell_form(state: &CompositeState) -> Result<BellFormView> {
    if state.n_atoms() != 2 {
        return Err(structural(format!(
            "expected two atoms, found {}",
            state.n_atoms()
        )));
    }
    let mut branches: [Option<GaussianState>; 2] = [None, None];
    let atom2 = state.terms()[0].atoms[ATOM_2];
    for t in state.terms() {
        let a1 = t.atoms[ATOM_1];
        let eta = match a1.branch {
            Some(BranchIndex { n: 0, eta }) => eta,
            _ => return Err(structural("atom 1 is not on an n = 0 branch")),
        };
        let slot = &mut branches[eta_index(eta)];
        match slot {
            Some(g) if !g.is_close(&a1.packet, 1e-10) => {
                return Err(structural("atom 1 carries more than one packet per branch"))
            }
            Some(_) => {}
            None => *slot = Some(a1.packet),
        }
        let a2 = t.atoms[ATOM_2];
        if a2.branch.is_some() || !a2.packet.is_close(&atom2.packet, 1e-10) {
            return Err(structural("atom 2 has already interacted or its packet is not common"));
        }
        if t.photons > 1 {
            return Err(structural(format!("photon number {} outside the 0/1 manifold", t.photons)));
        }
        let expect_photons = u8::from(!a1.label.is_excited());
        if t.photons != expect_photons {
            return Err(structural("field is not correlated with atom 1 as after its transit"));
        }
    }
    let (Some(plus), Some(minus)) = (branches[0], branches[1]) else {
        return Err(structural("both atom-1 branches must be present"));
    };

    let mut slots = Vec::with_capacity(8);
    for partner in BellPartner::ALL {
        for branch1 in Sign::BOTH {
            let mut v = [Complex64::new(0.0, 0.0); 2];
            for t in state.terms() {
                let a1 = t.atoms[ATOM_1];
                if a1.branch.map(|b| b.eta) != Some(branch1) {
                    continue;
                }
                let c = partner.coefficient(t.atoms[ATOM_2].label, t.photons);
                let idx = if a1.label.is_excited() { 0 } else { 1 };
                v[idx] += t.amp * c;
            }
            let (operator, sign) = slot_layout(partner, branch1);
            slots.push(BellSlot {
                partner,
                branch1,
                operator,
                sign,
                atom1: v,
            });
        }
    }
    Ok(BellFormView {
        prefactor: BELL_PREFACTOR,
        slots,
        branches1: [plus, minus],
        atom2_packet: atom2.packet,
        time: state.time(),
    })
}

impl BellFormView {
    /// Rebuilds the product-basis state from the eight slots.
    pub fn reassemble(&self) -> CompositeState {
        let mut terms = Vec::with_capacity(32);
        for slot in &self.slots {
            let packet1 = self.branches1[eta_index(slot.branch1)];
            let tag = Some(BranchIndex {
                n: 0,
                eta: slot.branch1,
            });
            for (label2, photons, c) in slot.partner.components() {
                for (idx, label1) in [InternalLabel::Excited, InternalLabel::Ground].into_iter().enumerate() {
                    terms.push(Term {
                        amp: slot.atom1[idx] * c,
                        atoms: vec![
                            AtomMode {
                                label: label1,
                                packet: packet1,
                                branch: tag,
                            },
                            AtomMode::new(label2, self.atom2_packet),
                        ],
                        photons,
                    });
                }
            }
        }
        CompositeState::from_parts(terms, self.time).merged()
    }

    /// Atom-1 vector of the (χ⁺, Φ⁺) slot rescaled by the prefactor; the
    /// teleported qubit in the orthogonal-branch picture.
    pub fn alpha(&self) -> Amplitudes {
        let v = self.slots[0].atom1;
        [v[0] / self.prefactor, v[1] / self.prefactor]
    }

    pub fn slot(&self, partner: BellPartner, branch1: Sign) -> &BellSlot {
        self.slots
            .iter()
            .find(|s| s.partner == partner && s.branch1 == branch1)
            .expect("all eight slots are present")
    }
}

fn eta_index(eta: Sign) -> usize {
    match eta {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}
