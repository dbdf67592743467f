//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative threshold below which a Gram-Schmidt residual is treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormalizes `vectors` by two-pass modified Gram-Schmidt in the given
/// order. Returns a `dim x r` matrix whose columns are the retained basis.
pub fn orthonormalize(dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0_f64, f64::max).max(1.0);
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let n = w.norm();
        if n > RANK_TOL * scale {
            basis.push(w / n);
        }
    }
    let mut m = DMatrix::zeros(dim, basis.len());
    for (j, q) in basis.iter().enumerate() {
        m.set_column(j, q);
    }
    m
}

/// `v - Q Q^T v` for a matrix with orthonormal columns.
pub fn project_out(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

/// `Q Q^T v`.
pub fn project_onto(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return DVector::zeros(v.len());
    }
    q * (q.transpose() * v)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Maximum absolute row sum (operator norm for the sup norm).
pub fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Result of fitting `y(t) = c0 + c1 t + c2 t^2` by least squares.
#[derive(Debug, Clone)]
pub struct PolyFit {
    /// Value at `t = 0`.
    pub intercept: DVector<f64>,
    /// Largest absolute deviation of the data from the fitted curve.
    pub max_deviation: f64,
    pub degree: usize,
}

/// Fits each coordinate of `ys` as a polynomial in `ts` of degree
/// `min(2, n-2)` (at least 1 point of redundancy when possible) and
/// evaluates it at zero. Returns `None` for fewer than two points.
pub fn extrapolate_to_zero(ts: &[f64], ys: &[DVector<f64>]) -> Option<PolyFit> {
    let n = ts.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let degree = if n >= 4 { 2 } else { 1 };
    let tmax = ts.iter().fold(0.0_f64, |a, &t| a.max(t.abs())).max(f64::MIN_POSITIVE);
    let mut design = DMatrix::zeros(n, degree + 1);
    for (i, &t) in ts.iter().enumerate() {
        let s = t / tmax;
        let mut p = 1.0;
        for j in 0..=degree {
            design[(i, j)] = p;
            p *= s;
        }
    }
    let dim = ys[0].len();
    let mut intercept = DVector::zeros(dim);
    let mut max_deviation = 0.0_f64;
    for c in 0..dim {
        let col = DVector::from_iterator(n, ys.iter().map(|y| y[c]));
        let coef = lstsq(&design, &col);
        intercept[c] = coef[0];
        let fitted = &design * &coef;
        for i in 0..n {
            max_deviation = max_deviation.max((fitted[i] - col[i]).abs());
        }
    }
    Some(PolyFit {
        intercept,
        max_deviation,
        degree,
    })
}

/// Scalar convenience wrapper of [`extrapolate_to_zero`].
pub fn extrapolate_scalar(ts: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let vs: Vec<DVector<f64>> = ys.iter().map(|&y| DVector::from_element(1, y)).collect();
    extrapolate_to_zero(ts, &vs).map(|f| (f.intercept[0], f.max_deviation))
}

/// Minimizes `max_b ‖targets_b - matrices_b p‖_∞` over `p` (a Chebyshev
/// fit) by linear programming. Returns the minimizer and the optimal value.
pub fn chebyshev_fit(blocks: &[(&DMatrix<f64>, &DVector<f64>)]) -> Result<(DVector<f64>, f64)> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};

    let n = blocks.first().map(|(m, _)| m.ncols()).unwrap_or(0);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let p: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (m, y) in blocks {
        if m.ncols() != n || m.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        for i in 0..m.nrows() {
            let mut lo: Vec<_> = (0..n)
                .filter(|&j| m[(i, j)] != 0.0)
                .map(|j| (p[j], m[(i, j)]))
                .collect();
            lo.push((t, 1.0));
            // y_i - m_i p <= t and m_i p - y_i <= t
            lp.add_constraint(lo.as_slice(), ComparisonOp::Ge, y[i]);
            let mut hi: Vec<_> = (0..n)
                .filter(|&j| m[(i, j)] != 0.0)
                .map(|j| (p[j], -m[(i, j)]))
                .collect();
            hi.push((t, 1.0));
            lp.add_constraint(hi.as_slice(), ComparisonOp::Ge, -y[i]);
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Numerical(format!("linear program failed: {e}")))?
        .into_solution()
        .map_err(|_| Error::Numerical("linear program was interrupted".into()))?;
    let x = DVector::from_iterator(n, p.iter().map(|&v| sol.var_value(v)));
    Ok((x, sol.var_value(t)))
}
