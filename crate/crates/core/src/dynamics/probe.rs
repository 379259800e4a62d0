//! Photon-counting probe atom.

use crate::error::{structural, Result};
use crate::gaussian::GaussianState;
use crate::params::PhysicalParams;
use crate::phase_space::Region;
use crate::state::{AtomMode, CompositeState, InternalLabel, Term, ATOM_2, PROBE};

use super::apply_atom_cavity;

/// Sends a ground-state probe through the cavity after both protocol atoms.
///
/// The probe packet `g_probe` is taken as the probe's state at the current
/// time of `state`.
pub fn apply_probe(
    state: &CompositeState,
    params: &PhysicalParams,
    region: Region,
    tau_p: f64,
    g_probe: &GaussianState,
) -> Result<CompositeState> {
    if state.n_atoms() != 2 {
        return Err(structural(format!(
            "probe expects the two protocol atoms only, found {} registers",
            state.n_atoms()
        )));
    }
    if state.terms().iter().all(|t| t.atoms[ATOM_2].branch.is_none()) {
        return Err(structural("atom 2 has not crossed the cavity yet"));
    }
    let terms: Vec<Term> = state
        .terms()
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.atoms.push(AtomMode::new(InternalLabel::Ground, *g_probe));
            t
        })
        .collect();
    let with_probe = CompositeState::new(terms, state.time())?;
    apply_atom_cavity(&with_probe, PROBE, region, params, tau_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_initial_state;
    use crate::phase_space::{free_propagate, propagate_nodal};
    use crate::qubit::QubitState;
    use crate::state::{state_norm, Sign, ATOM_1};
    use num_complex::Complex64;

    fn params_and_packet() -> (PhysicalParams, GaussianState) {
        let p = PhysicalParams::reference();
        let g = GaussianState::minimum_uncertainty(0.0, 0.0, p.lambda() / 10.0, p.hbar()).unwrap();
        (p, g)
    }

    fn field_state(photons: u8) -> CompositeState {
        // atom 1 in g, atom 2 in g after a transit, field in |photons⟩
        let (p, g) = params_and_packet();
        let s = build_initial_state(&QubitState::new(std::f64::consts::PI, 0.0).unwrap(), &g, &g);
        let s = crate::dynamics::apply_atom_cavity(&s, ATOM_2, Region::Nodal, &p, 1e-5).unwrap();
        let mut terms: Vec<Term> = s.terms().to_vec();
        for t in &mut terms {
            t.atoms[ATOM_1].label = InternalLabel::Ground;
            t.atoms[ATOM_2].branch = Some(crate::state::BranchIndex { n: 0, eta: Sign::Plus });
            t.photons = photons;
            t.amp = Complex64::new(1.0, 0.0);
        }
        terms.truncate(1);
        CompositeState::new(terms, s.time()).unwrap()
    }

    #[test]
    fn vacuum_leaves_probe_free() {
        let (p, g) = params_and_packet();
        let s = field_state(0);
        let tau = 8.0 / p.epsilon();
        let out = apply_probe(&s, &p, Region::Nodal, tau, &g).unwrap();
        assert_eq!(out.len(), 1);
        let probe = out.terms()[0].atoms[PROBE];
        assert_eq!(probe.label, InternalLabel::Ground);
        assert!(probe.packet.is_close(&free_propagate(&g, p.mass(), tau).unwrap(), 1e-14));
    }

    #[test]
    fn one_photon_maps_to_antisymmetric_branches() {
        let (p, g) = params_and_packet();
        let s = field_state(1);
        let tau = 8.0 / p.epsilon();
        let out = apply_probe(&s, &p, Region::Nodal, tau, &g).unwrap();
        assert!((state_norm(&out) - 1.0).abs() < 1e-12);
        // (Φ⁺χ⁺ − Φ⁻χ⁻)/√2: the |e_p,0⟩ amplitudes carry η/2
        for t in out.terms() {
            let b = t.atoms[PROBE].branch.unwrap();
            assert_eq!(b.n, 0);
            let expect = propagate_nodal(&g, &p, 0, b.eta, tau).unwrap();
            assert!(t.atoms[PROBE].packet.is_close(&expect, 1e-12));
            let want = match (t.atoms[PROBE].label, t.photons) {
                (InternalLabel::Excited, 0) => 0.5 * b.eta.value(),
                (InternalLabel::Ground, 1) => 0.5,
                other => panic!("unexpected component {other:?}"),
            };
            assert!((t.amp.re - want).abs() < 1e-15 && t.amp.im.abs() < 1e-15);
        }
    }

    #[test]
    fn two_photons_deflect_by_root_two() {
        let (p, g) = params_and_packet();
        let tau = 8.0 / p.epsilon();
        let one = apply_probe(&field_state(1), &p, Region::Nodal, tau, &g).unwrap();
        let two = apply_probe(&field_state(2), &p, Region::Nodal, tau, &g).unwrap();
        let dev = |s: &CompositeState| {
            s.terms()
                .iter()
                .find(|t| t.atoms[PROBE].branch.map(|b| b.eta) == Some(Sign::Plus))
                .unwrap()
                .atoms[PROBE]
                .packet
                .x0()
        };
        assert!((dev(&two) / dev(&one) - 2f64.sqrt()).abs() < 1e-12);
        assert!(two.terms().iter().all(|t| t.atoms[PROBE].branch.unwrap().n == 1));
    }

    #[test]
    fn rejects_state_before_second_transit() {
        let (p, g) = params_and_packet();
        let s = build_initial_state(&QubitState::new(1.0, 0.0).unwrap(), &g, &g);
        let s = crate::dynamics::apply_atom_cavity(&s, ATOM_1, Region::Nodal, &p, 1e-5).unwrap();
        assert!(matches!(
            apply_probe(&s, &p, Region::Nodal, 1e-5, &g),
            Err(crate::Error::Structural(_))
        ));
    }
}
