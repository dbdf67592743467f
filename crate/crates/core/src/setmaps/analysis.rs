use std::fmt::Debug;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::group::{
    folner_window, limsup_along, ConvergenceReport, FiniteSubset, FolnerSchedule, GroupElement, LimitOptions,
};
use crate::representation::AffineResidual;
use crate::{par, Result};

use super::minimax::{minimize_max, MinimaxOptions, MinimaxResult};
use super::SetMap;

/// Largest accepted `‖φ(F - g) - π(g)φ(F)‖/|F|`, relative to
/// `max(1, ‖φ(F)‖/|F|)`.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    pub max_defect: f64,
    pub worst_set: String,
    pub worst_g: String,
    pub passes: bool,
}

fn sample_set(rng: &mut ChaCha8Rng, dim: usize, boxed: bool) -> FiniteSubset {
    if boxed {
        let lo: Vec<i64> = (0..dim).map(|_| rng.gen_range(-3..=3)).collect();
        let side = if dim == 1 { 8 } else { 3 };
        let hi: Vec<i64> = lo.iter().map(|&a| a + rng.gen_range(1..=side)).collect();
        FiniteSubset::product_box(&lo, &hi).expect("non-empty box")
    } else {
        let size = rng.gen_range(1..=if dim == 1 { 6 } else { 4 });
        let flat: Vec<i64> = (0..size * dim).map(|_| rng.gen_range(-4..=4)).collect();
        FiniteSubset::from_flat(dim, flat).expect("non-empty set")
    }
}

/// Samples `(g, F)` with `g ∈ [-5, 5]^d` and small sets or boxes `F` and
/// measures `‖φ(F - g) - π(g)φ(F)‖/|F|`.
pub fn check_equivariance<V>(phi: &SetMap<V>, samples: usize, seed: u64) -> Result<EquivarianceReport>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let rep = phi.rep();
    let dim = rep.group_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(GroupElement, FiniteSubset)> = (0..samples)
        .map(|i| {
            let g = GroupElement::new((0..dim).map(|_| rng.gen_range(-5..=5)).collect());
            (g, sample_set(&mut rng, dim, i % 2 == 1))
        })
        .collect();
    let defects = par::map(&cases, |(g, f)| -> Result<(f64, f64)> {
        let value = phi.eval(f)?;
        let moved = phi.eval(&f.shifted_by_inverse(g))?;
        let diff = rep.sub(&moved, &rep.act(g, &value)?)?;
        let size = f.len() as f64;
        Ok((rep.norm(&diff)? / size, (rep.norm(&value)? / size).max(1.0)))
    });
    let mut report = EquivarianceReport {
        samples,
        max_defect: 0.0,
        worst_set: String::new(),
        worst_g: String::new(),
        passes: true,
    };
    for ((g, f), d) in cases.iter().zip(defects) {
        let (defect, scale) = d?;
        if defect > report.max_defect {
            report.max_defect = defect;
            report.worst_set = f.to_string();
            report.worst_g = g.to_string();
        }
        if defect > EQUIVARIANCE_TOL * scale {
            report.passes = false;
        }
    }
    Ok(report)
}

fn normalized_norms<V>(phi: &SetMap<V>, sets: &[FiniteSubset]) -> Result<Vec<f64>>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    par::map(sets, |f| phi.eval_normalized(f).and_then(|x| phi.rep().norm(&x)))
        .into_iter()
        .collect()
}

/// Window estimate of `sup_F ‖φ(F)‖/|F|` over the schedule's sets and a few
/// of their translates.
pub fn vert_sup<V>(phi: &SetMap<V>, schedule: &FolnerSchedule) -> Result<f64>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let dim = phi.rep().group_dim();
    let window = folner_window(schedule)?;
    let mut shifts: Vec<GroupElement> = vec![GroupElement::identity(dim), GroupElement::new(vec![3; dim])];
    for axis in 0..dim {
        let e = GroupElement::unit(dim, axis);
        shifts.push(-&e);
        shifts.push(e);
    }
    let sets: Vec<FiniteSubset> = window
        .iter()
        .flat_map(|f| shifts.iter().map(move |g| f.shifted_by_inverse(g)))
        .collect();
    Ok(par::max(&normalized_norms(phi, &sets)?))
}

/// `‖φ(F_n)‖/|F_n|` along the schedule with its limsup estimate.
pub fn vert_g<V>(phi: &SetMap<V>, schedule: &FolnerSchedule) -> Result<ConvergenceReport>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let window = folner_window(schedule)?;
    let values: Vec<(FiniteSubset, f64)> = window.iter().cloned().zip(normalized_norms(phi, &window)?).collect();
    limsup_along(&values, schedule, &LimitOptions::default())
}

/// `p ↦ ‖φ(F)/|F| - A_F(p)‖` for each set.
pub(crate) fn residual_models<V>(phi: &SetMap<V>, sets: &[FiniteSubset]) -> Result<Vec<AffineResidual>>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    par::map(sets, |f| {
        let target = phi.eval_normalized(f)?;
        phi.rep().residual_model(f, &target)
    })
    .into_iter()
    .collect()
}

/// Solver start: the parameters of `φ({1_G})`, or zero when they fall
/// outside the search space.
pub(crate) fn start_params<V>(phi: &SetMap<V>) -> DVector<f64>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let rep = phi.rep();
    phi.generator()
        .and_then(|v| rep.to_params(&v))
        .unwrap_or_else(|_| DVector::zeros(rep.parameter_dim()))
}

/// Number of sets in the tail of a window.
pub(crate) fn tail_len(len: usize) -> usize {
    ((len as f64 * LimitOptions::default().tail_fraction).ceil() as usize).clamp(2.min(len), len)
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct AaReport<V> {
    pub is_aa: bool,
    #[serde(skip)]
    pub v: V,
    /// `min_v max_{F in tail} ‖φ(F)/|F| - A_F v‖`.
    pub gap: f64,
    pub tol: f64,
    /// First schedule index of the tail.
    pub tail_start_n: usize,
    pub solver: MinimaxResult,
}

/// Minimizes the tail gap `J(v)` and compares it with `tol`.
pub fn test_asymptotically_additive<V>(phi: &SetMap<V>, schedule: &FolnerSchedule, tol: f64) -> Result<AaReport<V>>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let window = folner_window(schedule)?;
    let start = window.len() - tail_len(window.len());
    let models = residual_models(phi, &window[start..])?;
    let res = minimize_max(&models, &start_params(phi), &MinimaxOptions::default())?;
    Ok(AaReport {
        is_aa: res.value <= tol,
        v: phi.rep().from_params(&res.p)?,
        gap: res.value,
        tol,
        tail_start_n: schedule.range().0 + start,
        solver: res,
    })
}
