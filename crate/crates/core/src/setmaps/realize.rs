use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::group::{
    folner_window, invariance_defect, limsup_along, ConvergenceReport, FiniteSubset, FolnerSchedule, GroupElement,
    LimitOptions,
};
use crate::linalg::{extrapolate_scalar, extrapolate_to_zero, lstsq};
use crate::representation::{AffineResidual, NormKind};
use crate::{Error, Result};

use super::analysis::{residual_models, start_params, tail_len};
use super::minimax::{minimize_max, MinimaxOptions};
use super::SetMap;

#[derive(Clone, Debug, PartialEq)]
pub struct RealizeOptions {
    /// Accuracy levels, loosest first.
    pub eps: Vec<f64>,
    /// Accuracy the inner solver is trusted to.
    pub solver_tol: f64,
    pub max_iter: usize,
    /// Largest relative misfit of the extrapolated representative.
    pub extrapolation_tol: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            eps: (1..=10).map(|k| 2f64.powi(-k)).collect(),
            solver_tol: 1e-9,
            max_iter: 10_000,
            extrapolation_tol: 1e-8,
        }
    }
}

/// A vector whose averages match `φ(F)/|F|` within `eps` from `start_n` on.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct EpsApproximant<V> {
    pub eps: f64,
    pub start_n: usize,
    pub gap: f64,
    pub params: Vec<f64>,
    #[serde(skip)]
    pub v: V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representative {
    /// Per-set least-squares fits extrapolated to `|F| → ∞`.
    Extrapolated,
    /// The finest approximant, reduced modulo `L̄` when it is known.
    LastApproximant,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct RealizationResult<V> {
    #[serde(skip)]
    pub v: V,
    pub params: Vec<f64>,
    /// `‖φ(F_n)/|F_n| - A_{F_n} v‖` along the schedule.
    pub residual_series: ConvergenceReport,
    /// Tail supremum of `residual_series`.
    pub residual_estimate: f64,
    pub epsilon_schedule: Vec<EpsApproximant<V>>,
    /// Levels the window was too short to reach.
    pub unattained_eps: Vec<f64>,
    pub representative: Representative,
    pub cauchy_pairs_checked: usize,
    /// Largest `distance / bound` over the Cauchy checks.
    pub max_cauchy_ratio: f64,
}

fn quotient_distance<V>(phi: &SetMap<V>, models: &[AffineResidual], delta: &DVector<f64>) -> Result<f64>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    match phi.rep().weak_coboundaries() {
        Some(l) => l.quotient_seminorm(delta),
        // ‖v + L̄‖ <= inf_F ‖A_F v‖ for isometric actions
        None => Ok(models
            .iter()
            .map(|m| m.norm.of(&(&m.matrix * delta)))
            .fold(f64::INFINITY, f64::min)),
    }
}

/// Builds an additive realization of an asymptotically additive `φ`.
///
/// For each `ε_k` the earliest window position from which some `v_k`
/// satisfies `‖φ(F)/|F| - A_F v_k‖ <= ε_k` is located and `v_k` recorded;
/// the approximants are checked to be Cauchy modulo `L̄`, and the limit class
/// is represented by extrapolating per-set fits (falling back to the finest
/// approximant when the fits do not follow a smooth trend).
pub fn realize<V>(phi: &SetMap<V>, schedule: &FolnerSchedule, opts: &RealizeOptions) -> Result<RealizationResult<V>>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    if opts.eps.is_empty() || opts.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::config("eps schedule must be non-empty and positive"));
    }
    let mut eps = opts.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let rep = phi.rep();
    let window = folner_window(schedule)?;
    let len = window.len();
    if len < 3 {
        return Err(Error::InsufficientData(
            "realization needs a window of at least 3 sets".into(),
        ));
    }
    let models = residual_models(phi, &window)?;
    let p0 = start_params(phi);
    let full = MinimaxOptions {
        max_iter: opts.max_iter,
        target: None,
        tol: opts.solver_tol * 1e-3,
    };

    let gate_start = len - tail_len(len);
    let gate = minimize_max(&models[gate_start..], &p0, &full)?;
    if gate.value > eps[0] {
        return Err(Error::NotAsymptoticallyAdditive {
            gap: gate.value,
            tol: eps[0],
        });
    }

    let mut approximants: Vec<(f64, usize, DVector<f64>, f64)> = Vec::new();
    let mut unattained = Vec::new();
    let mut lo = 0;
    let mut warm = gate.p.clone();
    let last = len - 2;
    for &e in &eps {
        if !unattained.is_empty() {
            unattained.push(e);
            continue;
        }
        let solve = |s: usize, start: &DVector<f64>| {
            minimize_max(
                &models[s..],
                start,
                &MinimaxOptions {
                    target: Some(e),
                    ..full
                },
            )
        };
        let tail = solve(last, &warm)?;
        if tail.value > e {
            unattained.push(e);
            continue;
        }
        let (mut a, mut b) = (lo, last);
        let mut best = tail;
        while a < b {
            let mid = (a + b) / 2;
            let r = solve(mid, &warm)?;
            if r.value <= e {
                b = mid;
                best = r;
            } else {
                a = mid + 1;
            }
        }
        if b != last && best.value > e {
            best = solve(b, &warm)?;
        }
        warm = best.p.clone();
        lo = b;
        approximants.push((e, b, best.p, best.value));
    }

    let mut pairs = 0;
    let mut max_ratio: f64 = 0.0;
    for (i, (ek, _, pk, _)) in approximants.iter().enumerate() {
        for (em, sm, pm, _) in &approximants[i + 1..] {
            let d = quotient_distance(phi, &models[*sm..], &(pk - pm))?;
            let bound = ek + em + 10.0 * opts.solver_tol;
            pairs += 1;
            max_ratio = max_ratio.max(d / bound);
            if d > bound {
                return Err(Error::CauchyViolation {
                    eps_a: *ek,
                    eps_b: *em,
                    distance: d,
                    bound,
                });
            }
        }
    }

    let (e_last, _, p_last, _) = approximants.last().expect("gate guarantees one level").clone();
    let fallback = rep.reduce_params(&p_last);
    let fit_start = len - tail_len(len).max(4).min(len);
    let d = rep.group_dim() as f64;
    let ts: Vec<f64> = window[fit_start..]
        .iter()
        .map(|f| (f.len() as f64).powf(-1.0 / d))
        .collect();
    let fits: Vec<DVector<f64>> = models[fit_start..]
        .iter()
        .map(|m| rep.reduce_params(&lstsq(&m.matrix, &m.target)))
        .collect();
    // a realization's residuals must vanish as |F| grows
    let asymptotic_residual = |p: &DVector<f64>| {
        let rs: Vec<f64> = models[fit_start..].iter().map(|m| m.value(p)).collect();
        extrapolate_scalar(&ts, &rs)
            .map(|(c, _)| c.abs())
            .unwrap_or(f64::INFINITY)
    };
    let mut representative = Representative::LastApproximant;
    let mut params = fallback;
    if let Some(fit) = extrapolate_to_zero(&ts, &fits) {
        let scale = fits.iter().map(|p| p.amax()).fold(1.0, f64::max);
        let candidate = rep.reduce_params(&fit.intercept);
        if fit.max_deviation <= opts.extrapolation_tol * scale
            && asymptotic_residual(&candidate) <= e_last + 10.0 * opts.solver_tol
        {
            representative = Representative::Extrapolated;
            params = candidate;
        }
    }

    let values: Vec<(FiniteSubset, f64)> = window
        .iter()
        .zip(&models)
        .map(|(f, m)| (f.clone(), m.value(&params)))
        .collect();
    let residual_series = limsup_along(&values, schedule, &LimitOptions::default())?;
    let epsilon_schedule = approximants
        .into_iter()
        .map(|(e, s, p, gap)| {
            Ok(EpsApproximant {
                eps: e,
                start_n: schedule.range().0 + s,
                gap,
                v: rep.from_params(&p)?,
                params: p.iter().copied().collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RealizationResult {
        v: rep.from_params(&params)?,
        params: params.iter().copied().collect(),
        residual_estimate: residual_series.tail_sup,
        residual_series,
        epsilon_schedule,
        unattained_eps: unattained,
        representative,
        cauchy_pairs_checked: pairs,
        max_cauchy_ratio: max_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    /// `‖candidate - v + L̄‖`, or its averaging estimate when `L̄` is not modelled.
    pub quotient_distance: f64,
    /// `‖A_{F_n}(candidate - v)‖` along the schedule.
    pub averages: ConvergenceReport,
    pub direct_verdict: bool,
    pub disagreement: bool,
}

/// Decides whether `candidate` lies in the realization set `v + L̄`, and
/// cross-checks by the decay of `A_F(candidate - v)`.
///
/// The coboundary part `Σ_i (I - π(e_i)) w_i` of the difference may keep
/// the averages above zero by at most `C_π Σ_i ‖w_i‖ |(F + e_i) Δ F|/|F|`;
/// the direct check allows exactly that on top of the tolerance.
pub fn realization_set_membership<V>(
    phi: &SetMap<V>,
    realized: &RealizationResult<V>,
    candidate: &V,
    schedule: &FolnerSchedule,
    tol: f64,
) -> Result<MembershipReport>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let rep = phi.rep();
    let window = folner_window(schedule)?;
    let models = residual_models(phi, &window)?;
    let delta = rep.to_params(candidate)? - DVector::from_column_slice(&realized.params);
    let norms: Vec<f64> = models.iter().map(|m| m.norm.of(&(&m.matrix * &delta))).collect();
    let values: Vec<(FiniteSubset, f64)> = window.iter().cloned().zip(norms.iter().copied()).collect();
    let averages = limsup_along(&values, schedule, &LimitOptions::default())?;
    let start = averages.tail_start;
    let slack = 1e-12 * (1.0 + delta.amax());

    let (quotient, direct) = match rep.weak_coboundaries() {
        Some(l) => {
            let q = l.quotient_seminorm(&delta)?;
            let dim = delta.len();
            let gd = rep.group_dim();
            // stacked [I - π(e_1) | ... | I - π(e_d)]
            let mut stack = DMatrix::zeros(dim, dim * gd);
            for axis in 0..gd {
                let g = GroupElement::unit(gd, axis);
                for j in 0..dim {
                    let e = DVector::from_fn(dim, |i, _| f64::from(i == j));
                    let col = &e - rep.to_params(&rep.act(&g, &rep.from_params(&e)?)?)?;
                    stack.set_column(axis * dim + j, &col);
                }
            }
            let w = lstsq(&stack, &l.project_onto(&delta));
            let c_pi = rep.uniform_bound().value;
            let tol_scale = if l.norm_kind() == NormKind::Sup {
                (dim as f64).sqrt()
            } else {
                1.0
            };
            let ok = window[start..].iter().zip(&norms[start..]).all(|(f, &d)| {
                let bound: f64 = (0..gd)
                    .map(|axis| {
                        let wi = w.rows(axis * dim, dim).into_owned();
                        let k = FiniteSubset::singleton(&GroupElement::unit(gd, axis));
                        c_pi * l.norm_kind().of(&wi) * invariance_defect(&k, f)
                    })
                    .sum();
                d <= c_pi * tol_scale * tol + bound + slack
            });
            (q, ok)
        }
        None => {
            let q = averages.limit_estimate().max(0.0);
            (q, averages.tail_sup <= tol + slack)
        }
    };
    let member = quotient <= tol;
    Ok(MembershipReport {
        member,
        quotient_distance: quotient,
        averages,
        direct_verdict: direct,
        disagreement: member != direct,
    })
}
