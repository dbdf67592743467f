use std::sync::Arc;

use amenable_core::group::{FiniteSubset, FolnerSchedule};
use amenable_core::par::{self, ExecMode};
use amenable_core::representation::KoopmanRep;
use amenable_core::setmaps::{realize, RealizeOptions, SetMap};
use amenable_core::subshift::{LocalFunction, Subshift};
use amenable_core::thermo::pressure;

/// Everything that goes through the parallel helpers, as raw bits.
fn fingerprint() -> Vec<u64> {
    let x = Subshift::golden_mean();
    let rep = Arc::new(KoopmanRep::new(Arc::new(x.clone()), FiniteSubset::interval(0, 2).unwrap()).unwrap());
    let v = LocalFunction::pair(&[vec![0.3, -1.1], vec![0.9, 0.0]]).unwrap();
    let u = LocalFunction::constant(1, 2, 0.25).unwrap();
    let phi = SetMap::boundary_perturbed(rep, v, u, FiniteSubset::interval(0, 2).unwrap()).unwrap();
    let sched = FolnerSchedule::corner_boxes(1, 1, 14).unwrap();
    let p = pressure(&x, &phi, &sched).unwrap();
    let r = realize(&phi, &sched, &RealizeOptions::default()).unwrap();
    let xs: Vec<f64> = (0..50_000).map(|i| (i as f64 * 0.37).cos() * 40.0).collect();
    let mut out: Vec<u64> = p.values().iter().map(|v| v.to_bits()).collect();
    out.extend(r.params.iter().map(|v| v.to_bits()));
    out.push(par::tree_sum(&xs).to_bits());
    out.push(par::log_sum_exp(&xs).to_bits());
    out
}

#[test]
fn sequential_and_parallel_modes_are_bit_identical() {
    par::set_mode(ExecMode::Sequential);
    assert_eq!(par::mode(), ExecMode::Sequential);
    let seq = fingerprint();
    par::set_mode(ExecMode::Parallel);
    let par_run = fingerprint();
    assert_eq!(seq, par_run);
}
