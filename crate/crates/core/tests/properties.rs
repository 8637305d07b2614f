use std::f64::consts::PI;
use std::sync::OnceLock;

use photon_zb::constraint::physical_subspace;
use photon_zb::momentum::{momentum_closed_form, MomentumDecomposition};
use photon_zb::{BoxGeometry, FieldModel, FockSpace, Ladder, LinearForm, ModeSet, QuadraticForm, StateVector, C64};
use proptest::prelude::*;

struct Fixture {
    model: FieldModel,
    closed: MomentumDecomposition,
    kernel: Vec<StateVector>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let g = BoxGeometry::new(2.0 * PI, 4).unwrap();
        let modes = ModeSet::symmetric(g, &[[0, 0, 1], [1, 0, 0]]).unwrap();
        let model = FieldModel::new(FockSpace::new(modes, 2).unwrap());
        let closed = momentum_closed_form(&model).unwrap();
        let kernel = physical_subspace(model.space(), 1e-9).unwrap();
        Fixture { model, closed, kernel }
    })
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn linear_form(n_modes: u32) -> impl Strategy<Value = LinearForm> {
    prop::collection::vec((0..n_modes, any::<bool>(), complex()), 1..6).prop_map(|terms| {
        LinearForm::from_terms(
            terms
                .into_iter()
                .map(|(m, create, c)| (if create { Ladder::create(m) } else { Ladder::annihilate(m) }, c))
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Reordering with the η-commutator must not change the action on states
    // whose photons can all be raised once more.
    #[test]
    fn normal_ordering_preserves_interior_action(x in linear_form(16), y in linear_form(16)) {
        let space = fixture().model.space();
        let q = QuadraticForm::product(&x, &y);
        let n = q.normal_ordered();
        for j in space.up_to(space.cap() - 1) {
            let a = q.apply_basis(space, j);
            let b = n.apply_basis(space, j);
            let mut dense = vec![C64::new(0.0, 0.0); space.dim()];
            for (i, v) in a { dense[i] += v; }
            for (i, v) in b { dense[i] -= v; }
            let gap = dense.iter().map(|c| c.norm()).fold(0.0, f64::max);
            prop_assert!(gap < 1e-12, "column {j}: {gap:e}");
        }
    }

    // Every mixture of physical states keeps a static ⟨J⟩.
    #[test]
    fn physical_mixtures_have_no_zb(coefs in prop::collection::vec(complex(), 91)) {
        let f = fixture();
        let space = f.model.space();
        let mut psi = StateVector::zeros(space.dim());
        for (c, v) in coefs.iter().zip(&f.kernel) {
            psi.axpy(*c, v);
        }
        prop_assume!(space.eta_inner(&psi, &psi).unwrap().re.abs() > 1e-3);
        let profile = f.closed.profile(space, &psi, 1e-10).unwrap();
        let zb = profile.pairs.iter().map(|p| p.magnitude()).fold(0.0, f64::max);
        prop_assert!(zb < 1e-12, "{zb:e}");
    }

    // J is η-self-adjoint, so ⟨J(t)⟩ is real for any normalizable state.
    #[test]
    fn momentum_expectation_is_real(amps in prop::collection::vec(complex(), 153), t in 0.0..10.0f64) {
        let f = fixture();
        let space = f.model.space();
        let psi = StateVector { amps };
        let norm = space.eta_inner(&psi, &psi).unwrap().re;
        prop_assume!(norm.abs() > 1e-2);
        let j = f.closed.total(t).expectation(space, &psi, 1e-10).unwrap();
        let scale = j.iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(j.iter().all(|c| c.im.abs() < 1e-11 * scale), "{j:?}");
    }
}

#[test]
fn fixture_sizes() {
    let f = fixture();
    assert_eq!(f.model.space().dim(), 153);
    assert_eq!(f.kernel.len(), 91);
}
