use amenable_core::group::{folner_window, invariance_defect, translate, FiniteSubset, FolnerSchedule, GroupElement};
use amenable_core::representation::{MatrixRep, NormKind, Representation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// `1 ⊕ R(θ)` on `R^3`: the fixed axis survives averaging, the plane does not.
fn axis_plus_rotation(theta: f64, norm: NormKind) -> MatrixRep {
    let (s, c) = theta.sin_cos();
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c]);
    MatrixRep::new(vec![m], norm).unwrap()
}

fn vec3() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coboundary_averages_obey_defect_bound(theta in 0.3f64..6.0, w in vec3(), g in -3i64..=3) {
        let rep = axis_plus_rotation(theta, NormKind::Euclidean);
        let g = GroupElement::new(vec![g]);
        let u = &w - rep.act(&g, &w).unwrap();
        let c = rep.uniform_bound().value;
        let sched = FolnerSchedule::boxes(1, 1, 40).unwrap();
        for f in folner_window(&sched).unwrap() {
            let lhs = rep.norm(&rep.ergodic_average(&f, &u).unwrap()).unwrap();
            let defect = invariance_defect(&FiniteSubset::singleton(&g.inverse()), &f);
            prop_assert!(lhs <= c * w.norm() * defect + 1e-12, "{} > {}", lhs, c * w.norm() * defect);
        }
    }

    #[test]
    fn averaging_is_equivariant(theta in 0.1f64..6.0, v in vec3(), g in -5i64..=5, lo in -4i64..4, len in 1i64..9) {
        let rep = axis_plus_rotation(theta, NormKind::Euclidean);
        let g = GroupElement::new(vec![g]);
        let f = FiniteSubset::interval(lo, lo + len).unwrap();
        let moved = rep.ergodic_average(&translate(&f, &g), &v).unwrap();
        let acted = rep.act(&g, &rep.ergodic_average(&f, &v).unwrap()).unwrap();
        prop_assert!((moved - acted).amax() <= 1e-12);
    }

    #[test]
    fn quotient_norm_sits_between_window_min_and_tail(theta in 0.4f64..5.8, v in vec3(), sup in any::<bool>()) {
        let norm = if sup { NormKind::Sup } else { NormKind::Euclidean };
        let rep = axis_plus_rotation(theta, norm);
        let q = rep.quotient_norm(&v).unwrap();
        let sched = FolnerSchedule::boxes(1, 1, 256).unwrap();
        let norms: Vec<f64> = folner_window(&sched)
            .unwrap()
            .iter()
            .map(|f| rep.norm(&rep.ergodic_average(f, &v).unwrap()).unwrap())
            .collect();
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let tail = norms[norms.len() * 3 / 4..].iter().copied().fold(0.0, f64::max);
        let c = rep.uniform_bound().value;
        // inf_F ‖A_F v‖ bounds the quotient norm; the tail limsup is at most C_π times it
        prop_assert!(q <= min + 1e-9);
        // the rotating part of A_F v is at most ‖v‖ / (|F| sin(θ/2)) on the tail
        let n0 = (norms.len() * 3 / 4 + 1) as f64;
        let rotating = v.norm() / ((2.0 * n0 + 1.0) * (theta / 2.0).sin());
        prop_assert!(tail <= c * q + rotating + 1e-9);
        if !sup {
            prop_assert!((tail - q).abs() <= 5e-3 * (1.0 + v.norm()));
        }
    }
}
