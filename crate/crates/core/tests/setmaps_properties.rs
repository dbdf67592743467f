use std::sync::Arc;

use amenable_core::group::{FiniteSubset, FolnerSchedule};
use amenable_core::representation::{MatrixRep, NormKind, Representation};
use amenable_core::setmaps::{
    dichotomy_classify, realize, test_asymptotically_additive, test_relative_aa, vert_g, vert_sup, Constraint,
    Dichotomy, RealizeOptions, SetMap,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

type Rep = Arc<dyn Representation<Vector = DVector<f64>>>;

fn axis_plus_rotation(theta: f64) -> Rep {
    let (s, c) = theta.sin_cos();
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c]);
    Arc::new(MatrixRep::new(vec![m], NormKind::Euclidean).unwrap())
}

fn identity(n: usize) -> Rep {
    Arc::new(MatrixRep::identity(1, n, NormKind::Euclidean).unwrap())
}

fn vec_n(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(DVector::from_vec)
}

fn disjoint_pair() -> impl Strategy<Value = (FiniteSubset, FiniteSubset)> {
    prop::collection::btree_map(-8i64..=8, any::<bool>(), 2..=10).prop_filter_map("both sides non-empty", |m| {
        let (a, b): (Vec<_>, Vec<_>) = m.into_iter().partition(|(_, side)| *side);
        let pick = |v: Vec<(i64, bool)>| FiniteSubset::from_flat(1, v.into_iter().map(|(x, _)| x).collect()).ok();
        Some((pick(a)?, pick(b)?))
    })
}

fn sched() -> FolnerSchedule {
    FolnerSchedule::boxes(1, 1, 40).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn additive_maps_are_additive_on_disjoint_sets(theta in 0.2f64..6.0, v in vec_n(3), (e, f) in disjoint_pair()) {
        let phi = SetMap::additive(axis_plus_rotation(theta), v.clone());
        let whole = phi.eval(&e.union(&f)).unwrap();
        let parts = phi.eval(&e).unwrap() + phi.eval(&f).unwrap();
        prop_assert!((whole - parts).amax() <= 1e-12);
        prop_assert!((phi.generator().unwrap() - v).amax() <= 1e-15);
    }

    #[test]
    fn schedule_limsup_is_below_the_supremum(theta in 0.2f64..6.0, v in vec_n(3), u in -2.0f64..2.0) {
        let rep = axis_plus_rotation(theta);
        let k = FiniteSubset::interval(0, 2).unwrap();
        let u = DVector::from_vec(vec![u, 0.0, 0.0]);
        let phi = SetMap::boundary_perturbed(rep, v, u, k).unwrap();
        let g = vert_g(&phi, &sched()).unwrap();
        let s = vert_sup(&phi, &sched()).unwrap();
        prop_assert!(g.tail_sup <= s + 1e-12);
    }

    #[test]
    fn realizing_an_additive_map_recovers_its_class(theta in 0.3f64..6.0, v in vec_n(3)) {
        let rep = axis_plus_rotation(theta);
        let phi = SetMap::additive(rep.clone(), v.clone());
        let r = realize(&phi, &sched(), &RealizeOptions::default()).unwrap();
        let delta = DVector::from_column_slice(&r.params) - &v;
        let q = rep.weak_coboundaries().unwrap().quotient_seminorm(&delta).unwrap();
        prop_assert!(q <= 1e-6, "quotient distance {}", q);
    }

    #[test]
    fn relative_gap_is_convex(v1 in vec_n(2), v2 in vec_n(2), u in vec_n(2), t in 0.0f64..1.0) {
        let rep = identity(2);
        let k = FiniteSubset::interval(0, 3).unwrap();
        let a = SetMap::boundary_perturbed(rep.clone(), v1, u.clone(), k.clone()).unwrap();
        let b = SetMap::boundary_perturbed(rep, v2, -u, k).unwrap();
        let w = Constraint::Subspace(vec![DVector::from_vec(vec![1.0, 1.0])]);
        let ga = test_relative_aa(&a, &w, &sched(), 1e-6).unwrap().gap;
        let gb = test_relative_aa(&b, &w, &sched(), 1e-6).unwrap().gap;
        let mix = a.combine(t, &b, 1.0 - t).unwrap();
        let gm = test_relative_aa(&mix, &w, &sched(), 1e-6).unwrap().gap;
        prop_assert!(gm <= t * ga + (1.0 - t) * gb + 1e-7, "{} > {}", gm, t * ga + (1.0 - t) * gb);
    }

    #[test]
    fn tail_gap_is_lipschitz_in_the_map(v in vec_n(2), w in vec_n(2), c in -1.0f64..1.0) {
        // φ and φ + c·w/|F|^{1/2} differ by at most |c|‖w‖/√|F| per site
        let rep = identity(2);
        let phi = SetMap::additive(rep.clone(), v.clone());
        let (v2, w2) = (v.clone(), w.clone());
        let psi = SetMap::additive_sequence(rep, "perturbed", move |n| Ok(&v2 + &w2 * (c / (n as f64).sqrt())));
        let s = sched();
        let ga = test_asymptotically_additive(&phi, &s, 1e-6).unwrap().gap;
        let gb = test_asymptotically_additive(&psi, &s, 1e-6).unwrap().gap;
        let tail_first = 2 * (s.range().1 * 3 / 4) + 1;
        let bound = c.abs() * w.norm() / (tail_first as f64).sqrt();
        prop_assert!((ga - gb).abs() <= bound + 1e-7);
    }

    #[test]
    fn dichotomy_lands_in_the_target_when_possible(a in -2.0f64..2.0, off in 0.5f64..2.0) {
        let rep = identity(2);
        let dir = DVector::from_vec(vec![1.0, 2.0]);
        let inside = SetMap::additive(rep.clone(), &dir * a);
        match dichotomy_classify(&inside, std::slice::from_ref(&dir), &sched(), 1e-6, &RealizeOptions::default()).unwrap() {
            Dichotomy::B1 { w, distance } => {
                prop_assert!(distance <= 1e-6);
                prop_assert!((DVector::from_vec(w) - &dir * a).amax() <= 1e-6);
            }
            other => prop_assert!(false, "expected B1, got {:?}", other),
        }
        let outside = SetMap::additive(rep, &dir * a + DVector::from_vec(vec![2.0 * off, -off]));
        let class = dichotomy_classify(&outside, &[dir], &sched(), 1e-6, &RealizeOptions::default()).unwrap();
        prop_assert!(matches!(class, Dichotomy::OutOfHypothesis { gap } if gap > 0.1), "{:?}", class);
    }
}
