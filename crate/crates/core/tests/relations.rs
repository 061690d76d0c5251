//! Property tests for the group arithmetic: the trace-length law, the
//! conjugation relations between shears and the diagonal flow, and the
//! consistency of the same relations in the one-dimensional affine model.

use anoslab_core::cover::{commutator_growth, sample, CoverElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hyperbolic_from(l: f64, phi: f64, s: f64) -> CoverElement {
    let frame = CoverElement::rotation(phi)
        .compose(&CoverElement::upper(s))
        .unwrap();
    CoverElement::geodesic(l).conjugate_by(&frame).unwrap()
}

proptest! {
    #[test]
    fn diagonal_flow_length_is_the_parameter(mag in 0.01f64..20.0, neg: bool) {
        // Magnitudes start away from zero: acosh is ill-conditioned at the
        // identity, where no floating-point trace can pin the length.
        let t = if neg { -mag } else { mag };
        let g = CoverElement::geodesic(t);
        prop_assert!((g.translation_length() - t.abs()).abs() <= 1e-12);
    }

    #[test]
    fn trace_encodes_translation_length(
        l in 0.2f64..4.0,
        phi in -3.1f64..3.1,
        s in -1.5f64..1.5,
    ) {
        let g = hyperbolic_from(l, phi, s);
        let expect = 2.0 * (l / 2.0).cosh();
        prop_assert!(
            (g.matrix().trace().abs() - expect).abs() <= 1e-10,
            "trace {} vs 2cosh(L/2) {}", g.matrix().trace(), expect
        );
        prop_assert!((g.translation_length() - l).abs() <= 1e-10);
    }

    #[test]
    fn upper_shear_contracts_through_the_flow(t in -3.0f64..3.0, x in -5.0f64..5.0) {
        let flow = CoverElement::geodesic(t);
        let lhs = CoverElement::upper(x).compose(&flow).unwrap();
        let rhs = flow.compose(&CoverElement::upper((-t).exp() * x)).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn lower_shear_expands_through_the_flow(t in -3.0f64..3.0, y in -5.0f64..5.0) {
        let flow = CoverElement::geodesic(t);
        let lhs = CoverElement::lower(y).compose(&flow).unwrap();
        let rhs = flow.compose(&CoverElement::lower(t.exp() * y)).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    // The subgroup generated by the flow and one shear is the affine group
    // of the line: pairs (scale, offset) with
    // (s1, o1) * (s2, o2) = (s1 s2, o1 s2 + o2). The same commutation
    // relation must hold there with the same exponent.
    #[test]
    fn affine_model_satisfies_the_same_relation(t in -3.0f64..3.0, y in -5.0f64..5.0) {
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0, a.1 * b.0 + b.1);
        let flow = (t.exp(), 0.0);
        let shift = (1.0, y);
        let lhs = mul(shift, flow);
        let rhs = mul(flow, (1.0, t.exp() * y));
        prop_assert!((lhs.0 - rhs.0).abs() <= 1e-12 * (1.0 + rhs.0.abs()));
        prop_assert!((lhs.1 - rhs.1).abs() <= 1e-12 * (1.0 + rhs.1.abs()));
    }

    #[test]
    fn flow_is_a_one_parameter_group(t in -8.0f64..8.0, s in -8.0f64..8.0) {
        let lhs = CoverElement::geodesic(t)
            .compose(&CoverElement::geodesic(s))
            .unwrap();
        let rhs = CoverElement::geodesic(t + s);
        prop_assert!(lhs.approx_eq(&rhs, 1e-10));
    }

    #[test]
    fn inverse_cancels_and_preserves_winding(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample::group_point(&mut rng);
        let e = g.compose(&g.inverse().unwrap()).unwrap();
        prop_assert!(e.matrix().dist_to_center() <= 1e-10);
        prop_assert_eq!(e.central_power().unwrap(), 0);
    }
}

#[test]
fn commutator_lengths_approach_twice_the_base_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(1729);
    for trial in 0..20 {
        let (p, q) = sample::commutator_pair(&mut rng, 40);
        let growth = commutator_growth(&p, &q, 40).unwrap();
        let l = growth.base_length;
        for row in &growth.rows {
            assert!(
                (row.ratio - l).abs() <= 5.0 / row.n as f64,
                "trial {trial}, n = {}: ratio {} vs base length {l}",
                row.n,
                row.ratio
            );
        }
        assert!(
            growth.max_trace_mismatch <= 1e-9,
            "trial {trial}: closed form drifted {}",
            growth.max_trace_mismatch
        );
    }
}
