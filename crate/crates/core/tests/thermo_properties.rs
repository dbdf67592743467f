use std::sync::Arc;

use amenable_core::group::{translate, FiniteSubset, FolnerSchedule, GroupElement};
use amenable_core::representation::{KoopmanRep, Representation};
use amenable_core::setmaps::{RealizeOptions, SetMap};
use amenable_core::subshift::{LocalFunction, Subshift};
use amenable_core::thermo::{
    equilibrium_state_1d, integral_of_setmap, ks_entropy, log_partition_function, log_partition_of, pressure,
    pressure_of_realization, variational_value, MarkovMeasure, PressureMethod,
};
use proptest::prelude::*;

type Rep = Arc<dyn Representation<Vector = LocalFunction>>;

fn rep(x: &Subshift) -> Rep {
    Arc::new(KoopmanRep::new(Arc::new(x.clone()), FiniteSubset::interval(0, 2).unwrap()).unwrap())
}

/// 1D subshifts on up to three letters with irreducible transitions.
fn shift(seed: u8) -> Subshift {
    let abc = || vec!["a".to_string(), "b".to_string(), "c".to_string()];
    match seed % 4 {
        0 => Subshift::golden_mean(),
        1 => Subshift::full_k(2, 1).unwrap(),
        2 => Subshift::full_k(3, 1).unwrap(),
        _ => Subshift::nearest_neighbor(abc(), 1, &[vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]]).unwrap(),
    }
}

fn allowed(x: &Subshift) -> Vec<Vec<bool>> {
    let k = x.alphabet_size();
    (0..k)
        .map(|i| (0..k).map(|j| x.allows(0, i as u8, j as u8)).collect())
        .collect()
}

/// Brute-force `log Σ_w exp(sup over the right collar of the ergodic sum)`
/// for a pair potential on `[0, len)`.
fn brute_log_z(x: &Subshift, table: &[Vec<f64>], len: usize) -> f64 {
    let a = allowed(x);
    let k = table.len();
    let mut total = 0.0;
    let mut word = vec![0usize; len];
    'outer: loop {
        if word.windows(2).all(|w| a[w[0]][w[1]]) {
            let inner: f64 = word.windows(2).map(|w| table[w[0]][w[1]]).sum();
            let last = word[len - 1];
            let collar = (0..k)
                .filter(|&j| a[last][j])
                .map(|j| table[last][j])
                .fold(f64::NEG_INFINITY, f64::max);
            total += (inner + collar).exp();
        }
        for i in (0..len).rev() {
            word[i] += 1;
            if word[i] < k {
                continue 'outer;
            }
            word[i] = 0;
        }
        break;
    }
    total.ln()
}

fn pair_table(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, k), k)
}

fn shift_and_table() -> impl Strategy<Value = (Subshift, Vec<Vec<f64>>)> {
    any::<u8>().prop_flat_map(|s| {
        let x = shift(s);
        let k = x.alphabet_size();
        (Just(x), pair_table(k))
    })
}

/// A random stationary chain supported on the allowed graph of `x`.
fn random_chain(x: &Subshift, raw: &[f64]) -> MarkovMeasure {
    let a = allowed(x);
    let k = a.len();
    let p: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let row: Vec<f64> = (0..k)
                .map(|j| if a[i][j] { 0.05 + raw[i * k + j] } else { 0.0 })
                .collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect();
    MarkovMeasure::from_transition(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partition_function_matches_brute_force((x, t) in shift_and_table(), len in 1usize..=8) {
        let psi = LocalFunction::pair(&t).unwrap();
        let f = FiniteSubset::interval(0, len as i64).unwrap();
        let got = log_partition_of(&x, &psi.ergodic_sum(&f).unwrap(), &f).unwrap();
        let want = brute_log_z(&x, &t, len);
        prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "{} vs {}", got, want);
    }

    #[test]
    fn partition_function_is_monotone((x, t) in shift_and_table(), bump in prop::collection::vec(0.0f64..1.0, 9), len in 1usize..=8) {
        let lo = LocalFunction::pair(&t).unwrap();
        let k = t.len();
        let hi_t: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| t[i][j] + bump[i * k + j]).collect()).collect();
        let hi = LocalFunction::pair(&hi_t).unwrap();
        let f = FiniteSubset::interval(0, len as i64).unwrap();
        let z = |p: &LocalFunction| log_partition_of(&x, &p.ergodic_sum(&f).unwrap(), &f).unwrap();
        prop_assert!(z(&lo) <= z(&hi) + 1e-12);
    }

    #[test]
    fn partition_function_is_translation_invariant((x, t) in shift_and_table(), len in 1i64..=8, g in -20i64..=20) {
        let phi = SetMap::additive(rep(&x), LocalFunction::pair(&t).unwrap());
        let f = FiniteSubset::interval(0, len).unwrap();
        let moved = translate(&f, &GroupElement::new(vec![g]));
        let a = log_partition_function(&x, &phi, &f).unwrap();
        let b = log_partition_function(&x, &phi, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn transfer_matrix_agrees_with_enumeration((x, t) in shift_and_table()) {
        let phi = SetMap::additive(rep(&x), LocalFunction::pair(&t).unwrap());
        let p = pressure(&x, &phi, &FolnerSchedule::corner_boxes(1, 1, 12).unwrap()).unwrap();
        prop_assert_eq!(p.method, PressureMethod::TransferMatrix);
        prop_assert_eq!(p.comparisons.len(), 12);
        prop_assert!(p.agrees(), "max disagreement {}", p.max_disagreement);
    }

    #[test]
    fn equilibrium_states_are_certified_and_maximal((x, t) in shift_and_table(), raw in prop::collection::vec(0.0f64..1.0, 9)) {
        let psi = LocalFunction::pair(&t).unwrap();
        let eq = equilibrium_state_1d(&x, &psi).unwrap();
        prop_assert!(eq.certified(), "certificate gap {}", eq.certificate_gap);
        let direct = variational_value(&x, &psi, &eq.measure).unwrap();
        prop_assert!((direct - eq.pressure).abs() <= 1e-9);
        // any other invariant measure sits below the pressure
        let other = random_chain(&x, &raw);
        prop_assert!(variational_value(&x, &psi, &other).unwrap() <= eq.pressure + 1e-9);
    }

    #[test]
    // two letters keep the realization solve small
    fn realization_sandwich_holds_pointwise(golden in any::<bool>(), t in pair_table(2), u in -1.0f64..1.0) {
        let x = if golden { shift(0) } else { shift(1) };
        let r = rep(&x);
        let v = LocalFunction::pair(&t).unwrap();
        let u = LocalFunction::constant(1, x.alphabet_size(), u).unwrap();
        let phi = SetMap::boundary_perturbed(r, v, u, FiniteSubset::interval(0, 2).unwrap()).unwrap();
        let sched = FolnerSchedule::corner_boxes(1, 1, 12).unwrap();
        let out = pressure_of_realization(&x, &phi, &sched, &RealizeOptions::default()).unwrap();
        prop_assert_eq!(out.violations, 0);
        for p in &out.points {
            prop_assert!(p.gap <= p.eps_f + 1e-9, "n={} gap {} eps {}", p.n, p.gap, p.eps_f);
        }
    }
}

#[test]
fn bernoulli_entropy_matches_the_formula() {
    let x = Subshift::full_k(2, 1).unwrap();
    let q: f64 = 0.7311;
    let h = -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
    let mu = MarkovMeasure::bernoulli(q).unwrap();
    let r = ks_entropy(&x, &mu, &FolnerSchedule::corner_boxes(1, 1, 10).unwrap()).unwrap();
    assert!((r.closed_form - h).abs() < 1e-14);
    assert!(r.series.series.iter().all(|p| (p.value - h).abs() < 1e-12));
    assert!((h - 0.5822).abs() < 1e-4);

    let fair = MarkovMeasure::bernoulli(0.5).unwrap();
    let r = ks_entropy(&x, &fair, &FolnerSchedule::corner_boxes(1, 1, 10).unwrap()).unwrap();
    assert!(r.series.series.iter().all(|p| (p.value - 2f64.ln()).abs() < 1e-12));
}

#[test]
fn parry_measure_has_topological_entropy() {
    let x = Subshift::golden_mean();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    // P = [[1/φ, 1/φ²], [1, 0]] from the eigenvector (φ, 1)
    let parry =
        MarkovMeasure::from_transition(vec![vec![1.0 / golden, 1.0 / (golden * golden)], vec![1.0, 0.0]]).unwrap();
    let r = ks_entropy(&x, &parry, &FolnerSchedule::corner_boxes(1, 1, 16).unwrap()).unwrap();
    assert!((r.closed_form - golden.ln()).abs() < 1e-12);
    let last = r.series.series.last().unwrap().value;
    assert!((last - golden.ln()).abs() < 0.05);
    let eq = equilibrium_state_1d(&x, &LocalFunction::zero(1, 2).unwrap()).unwrap();
    assert!((eq.entropy - golden.ln()).abs() < 1e-12);
}

#[test]
fn integrals_of_site_potentials_are_expectations() {
    let x = Subshift::full_k(2, 1).unwrap();
    let phi = SetMap::additive(rep(&x), LocalFunction::single_site(1, &[0.0, 1.0]).unwrap());
    let sched = FolnerSchedule::corner_boxes(1, 1, 10).unwrap();
    for q in [0.1, 0.5, 0.7311] {
        let mu = MarkovMeasure::bernoulli(q).unwrap();
        let r = integral_of_setmap(&x, &phi, &mu, &sched, None).unwrap();
        assert!(r.series.series.iter().all(|p| (p.value - q).abs() < 1e-12));
        assert!((r.realized.unwrap() - q).abs() < 1e-12);
    }
}

#[test]
fn boundary_perturbed_integrals_converge_at_the_defect_rate() {
    let x = Subshift::full_k(2, 1).unwrap();
    let v = LocalFunction::single_site(1, &[0.0, 1.0]).unwrap();
    let u = LocalFunction::constant(1, 2, 0.5).unwrap();
    let k = FiniteSubset::interval(0, 2).unwrap();
    let phi = SetMap::boundary_perturbed(rep(&x), v, u, k).unwrap();
    let mu = MarkovMeasure::bernoulli(0.3).unwrap();
    let r = integral_of_setmap(&x, &phi, &mu, &FolnerSchedule::corner_boxes(1, 1, 12).unwrap(), None).unwrap();
    for p in &r.series.series {
        // |(F+K) Δ F| = 1 for intervals and K = {0,1}
        assert!((p.value - 0.3).abs() <= 0.5 / p.size as f64 + 1e-12);
    }
}
