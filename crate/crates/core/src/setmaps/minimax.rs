//! Minimization of `J(p) = max_i ‖t_i - M_i p‖`, a convex piecewise-smooth
//! function of `p`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{chebyshev_fit, lstsq};
use crate::representation::{AffineResidual, NormKind};
use crate::Result;

/// Total residual rows above which the exact linear program is skipped.
const LP_ROW_LIMIT: usize = 6000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxOptions {
    pub max_iter: usize,
    /// Stop as soon as `J <= target`.
    pub target: Option<f64>,
    /// Values at or below this count as zero.
    pub tol: f64,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        MinimaxOptions {
            max_iter: 10_000,
            target: None,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxResult {
    #[serde(skip)]
    pub p: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    /// The value is the exact optimum (linear program or zero residual).
    pub exact: bool,
    /// The subgradient loop ran to its cap without meeting the target.
    pub hit_cap: bool,
}

fn objective(models: &[AffineResidual], p: &DVector<f64>) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, m) in models.iter().enumerate() {
        let v = m.value(p);
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// Minimizes `max_i ‖t_i - M_i p‖` starting from `p0`.
///
/// Candidates `p0`, the stacked least-squares solution and, for sup-norm
/// models of moderate size, the exact linear-program optimum are compared
/// first; the projected subgradient method with steps `J(p0)/k` then refines
/// the best of them unless it is already exact or below the target.
pub fn minimize_max(models: &[AffineResidual], p0: &DVector<f64>, opts: &MinimaxOptions) -> Result<MinimaxResult> {
    let n = p0.len();
    if models.is_empty() {
        return Ok(MinimaxResult {
            p: p0.clone(),
            value: 0.0,
            iterations: 0,
            exact: true,
            hit_cap: false,
        });
    }
    let done = |j: f64| j <= opts.tol || opts.target.is_some_and(|t| j <= t);

    let mut best_p = p0.clone();
    let mut best = objective(models, p0).0;
    let mut exact = best <= opts.tol;
    if done(best) {
        return Ok(MinimaxResult {
            p: best_p,
            value: best,
            iterations: 0,
            exact,
            hit_cap: false,
        });
    }

    let rows: usize = models.iter().map(|m| m.target.len()).sum();
    let mut stacked = DMatrix::zeros(rows, n);
    let mut rhs = DVector::zeros(rows);
    let mut r0 = 0;
    for m in models {
        stacked.rows_mut(r0, m.target.len()).copy_from(&m.matrix);
        rhs.rows_mut(r0, m.target.len()).copy_from(&m.target);
        r0 += m.target.len();
    }
    let ls = lstsq(&stacked, &rhs);
    let j = objective(models, &ls).0;
    if j < best {
        best = j;
        best_p = ls;
        exact = best <= opts.tol;
    }
    if done(best) {
        return Ok(MinimaxResult {
            p: best_p,
            value: best,
            iterations: 0,
            exact,
            hit_cap: false,
        });
    }

    if models.iter().all(|m| m.norm == NormKind::Sup) && rows <= LP_ROW_LIMIT {
        let blocks: Vec<_> = models.iter().map(|m| (&m.matrix, &m.target)).collect();
        if let Ok((p, _)) = chebyshev_fit(&blocks) {
            let j = objective(models, &p).0;
            if j <= best {
                return Ok(MinimaxResult {
                    p,
                    value: j,
                    iterations: 0,
                    exact: true,
                    hit_cap: false,
                });
            }
        }
    }

    let s0 = best;
    let mut p = best_p.clone();
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        iterations = k;
        let (_, i) = objective(models, &p);
        let (_, g) = models[i].subgradient(&p);
        let gn = g.norm();
        if gn == 0.0 {
            break;
        }
        p -= g * (s0 / (k as f64 * gn));
        let j = objective(models, &p).0;
        if j < best {
            best = j;
            best_p.copy_from(&p);
            if done(best) {
                break;
            }
        }
    }
    Ok(MinimaxResult {
        hit_cap: iterations == opts.max_iter && !done(best),
        p: best_p,
        value: best,
        iterations,
        exact: best <= opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(m: DMatrix<f64>, t: &[f64]) -> AffineResidual {
        AffineResidual {
            matrix: m,
            target: DVector::from_column_slice(t),
            norm: NormKind::Euclidean,
        }
    }

    #[test]
    fn consistent_system_is_solved_exactly() {
        let models = vec![
            euclid(DMatrix::identity(2, 2), &[1.0, 2.0]),
            euclid(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5])), &[1.0, 1.0]),
        ];
        let r = minimize_max(&models, &DVector::zeros(2), &MinimaxOptions::default()).unwrap();
        assert!(r.value < 1e-12);
        assert!((r.p[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_minimax_finds_midpoint() {
        // max(|1 - p|, |3 - p|) is minimal at p = 2 with value 1
        let models = vec![
            euclid(DMatrix::identity(1, 1), &[1.0]),
            euclid(DMatrix::identity(1, 1), &[3.0]),
            euclid(DMatrix::identity(1, 1), &[2.5]),
        ];
        let r = minimize_max(&models, &DVector::zeros(1), &MinimaxOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
        assert!(!r.exact);
    }

    #[test]
    fn sup_models_use_the_linear_program() {
        let m = AffineResidual {
            matrix: DMatrix::from_element(3, 1, 1.0),
            target: DVector::from_vec(vec![0.0, 1.0, 4.0]),
            norm: NormKind::Sup,
        };
        let r = minimize_max(&[m], &DVector::zeros(1), &MinimaxOptions::default()).unwrap();
        assert!(r.exact);
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn target_stops_early() {
        let models = vec![
            euclid(DMatrix::identity(1, 1), &[1.0]),
            euclid(DMatrix::identity(1, 1), &[3.0]),
        ];
        let opts = MinimaxOptions {
            target: Some(1.5),
            ..Default::default()
        };
        let r = minimize_max(&models, &DVector::zeros(1), &opts).unwrap();
        assert!(r.value <= 1.5);
        assert!(!r.hit_cap);
    }
}
