//! Atom–cavity transits acting on composite states.
//!
//! A transit re-expresses the transiting atom and the field in the dressed
//! basis `{|g,0⟩, χ_n^±}` with `χ_n^± = (|e,n⟩ ± |g,n+1⟩)/√2`, moves each
//! dressed component's packet along its branch Hamiltonian, and maps back to
//! product form. Internal and field states are kept in the frame rotating at
//! the (resonant) transition frequency; translational packets are Schrödinger
//! picture, so atoms outside the cavity fly freely while another one transits.

pub mod bell;
pub mod probe;

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Error, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::phase_space::{free_propagate, propagate_branch, Region};
use crate::qubit::QubitState;
use crate::state::{AtomMode, BranchIndex, CompositeState, InternalLabel, Sign, Term, FOCK_CAP};

pub use bell::{bell_form, BellFormView, BellPartner, BellSlot, PauliLabel};
pub use probe::apply_probe;

/// `|e_1⟩|φ_1⟩ ⊗ (cos θ/2 |e_2⟩ + e^{iφ} sin θ/2 |g_2⟩)|φ_2⟩ ⊗ |0⟩` at t = 0.
pub fn build_initial_state(
    alpha2: &QubitState,
    g1: &GaussianState,
    g2: &GaussianState,
) -> CompositeState {
    let amps = alpha2.amplitudes();
    let terms: Vec<Term> = [InternalLabel::Excited, InternalLabel::Ground]
        .into_iter()
        .zip(amps)
        .filter(|(_, a)| a.norm() > 1e-15)
        .map(|(label, amp)| Term {
            amp,
            atoms: vec![
                AtomMode::new(InternalLabel::Excited, *g1),
                AtomMode::new(label, *g2),
            ],
            photons: 0,
        })
        .collect();
    CompositeState::from_parts(terms, 0.0)
}

/// Free flight of every atom for `dt`.
pub fn free_flight(state: &CompositeState, params: &PhysicalParams, dt: f64) -> Result<CompositeState> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(domain(format!("free-flight time must be ≥ 0, got {dt}")));
    }
    let mut terms = Vec::with_capacity(state.len());
    for t in state.terms() {
        let mut t = t.clone();
        for a in &mut t.atoms {
            a.packet = free_propagate(&a.packet, params.mass(), dt)?;
        }
        terms.push(t);
    }
    Ok(CompositeState::from_parts(terms, state.time() + dt))
}

/// Transit of register `atom` through the cavity for `tau`, entering at the
/// state's current time.
pub fn apply_atom_cavity(
    state: &CompositeState,
    atom: usize,
    region: Region,
    params: &PhysicalParams,
    tau: f64,
) -> Result<CompositeState> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(domain(format!("interaction time must be ≥ 0, got {tau}")));
    }
    if atom >= state.n_atoms() {
        return Err(domain(format!(
            "atom index {atom} out of range for {} registers",
            state.n_atoms()
        )));
    }
    let mass = params.mass();
    let mut out = Vec::with_capacity(2 * state.len());
    for term in state.terms() {
        let mut base = term.clone();
        for (i, a) in base.atoms.iter_mut().enumerate() {
            if i != atom {
                a.packet = free_propagate(&a.packet, mass, tau)?;
            }
        }
        let mode = term.atoms[atom];
        // dressed pair index n and the coefficient of χ_n^η in the input ket
        let (n, weight): (u8, fn(Sign) -> f64) = match (mode.label, term.photons) {
            (InternalLabel::Ground, 0) => {
                base.atoms[atom].packet = free_propagate(&mode.packet, mass, tau)?;
                out.push(base);
                continue;
            }
            (InternalLabel::Excited, m) => (m, |_| FRAC_1_SQRT_2),
            (InternalLabel::Ground, m) => (m - 1, |eta| eta.value() * FRAC_1_SQRT_2),
        };
        if n >= FOCK_CAP {
            return Err(Error::FockCap(n + 1));
        }
        for eta in Sign::BOTH {
            let branch = BranchIndex { n, eta };
            let packet = propagate_branch(&mode.packet, params, region, branch, tau)?;
            let c = term.amp * (weight(eta) * FRAC_1_SQRT_2);
            for (label, photons, sign) in [
                (InternalLabel::Excited, n, 1.0),
                (InternalLabel::Ground, n + 1, eta.value()),
            ] {
                let mut t = base.clone();
                t.amp = c * sign;
                t.photons = photons;
                t.atoms[atom] = AtomMode {
                    label,
                    packet,
                    branch: Some(branch),
                };
                out.push(t);
            }
        }
    }
    Ok(CompositeState::from_parts(out, state.time() + tau).merged())
}
