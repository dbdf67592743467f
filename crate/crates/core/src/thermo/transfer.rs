use nalgebra::{DMatrix, DVector};

use crate::group::FiniteSubset;
use crate::subshift::{LocalFunction, Subshift};
use crate::{Error, Result};

const PERRON_TOL: f64 = 1e-13;
const PERRON_CAP: usize = 100_000;

/// The Ruelle transfer matrix `M_ij = A_ij e^{ψ(i,j)}` of a potential with
/// window inside `{0, 1}` on a one-dimensional subshift, restricted to the
/// symbols that occur in the subshift.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    alive: Vec<u8>,
    alphabet_size: usize,
    log_m: DMatrix<f64>,
    /// `c_i = max_{j: A_ij} ψ(i, j)`, the right-collar supremum.
    boundary: DVector<f64>,
}

/// Perron eigendata of an irreducible transfer matrix.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub lambda: f64,
    /// Right eigenvector, positive with `‖r‖₁ = 1`.
    pub right: DVector<f64>,
    /// Left eigenvector, positive with `‖l‖₁ = 1`.
    pub left: DVector<f64>,
    pub iterations: usize,
}

impl TransferMatrix {
    /// Whether the pair fits the transfer-matrix setting.
    pub fn applicable(x: &Subshift, psi: &LocalFunction) -> bool {
        let pair = FiniteSubset::interval(0, 2).expect("valid interval");
        x.dim() == 1 && psi.dim() == 1 && psi.alphabet_size() == x.alphabet_size() && psi.window().is_subset(&pair)
    }

    pub fn new(x: &Subshift, psi: &LocalFunction) -> Result<Self> {
        if !Self::applicable(x, psi) {
            return Err(Error::config(
                "transfer matrix needs a one-dimensional subshift and a potential window inside {0, 1}",
            ));
        }
        let pair = psi.extend_to(&FiniteSubset::interval(0, 2)?)?;
        let alive = x.alive_symbols();
        let m = alive.len();
        let log_m = DMatrix::from_fn(m, m, |i, j| {
            let (a, b) = (alive[i], alive[j]);
            if x.allows(0, a, b) {
                pair.value(&[a, b])
            } else {
                f64::NEG_INFINITY
            }
        });
        let boundary = DVector::from_fn(m, |i, _| log_m.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max));
        Ok(TransferMatrix {
            alive,
            alphabet_size: x.alphabet_size(),
            log_m,
            boundary,
        })
    }

    pub fn alive(&self) -> &[u8] {
        &self.alive
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// `M` on the occurring symbols.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.log_m.map(f64::exp)
    }

    /// `log Z_L = log(1ᵀ M^{L-1} e^c)`, the partition function of an interval
    /// of length `L` with the right collar maximized.
    pub fn log_partition(&self, len: usize) -> f64 {
        if len == 0 {
            return 0.0;
        }
        let m = self.matrix();
        let top = self.boundary.max();
        let mut u = self.boundary.map(|c| (c - top).exp());
        let mut log_scale = top;
        for _ in 1..len {
            u = &m * &u;
            let s = u.max();
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            u /= s;
            log_scale += s.ln();
        }
        log_scale + u.sum().ln()
    }

    /// Strong connectivity of the transition graph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.alive.len();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let edge = if forward {
                        self.log_m[(i, j)]
                    } else {
                        self.log_m[(j, i)]
                    };
                    if edge > f64::NEG_INFINITY && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        n > 0 && reach(true) && reach(false)
    }

    /// Perron eigendata by power iteration on `M + I` from the uniform vector,
    /// polished by Newton steps on the bordered eigen-system.
    pub fn perron(&self) -> Result<PerronData> {
        if !self.is_irreducible() {
            return Err(Error::Reducible);
        }
        let m = self.matrix();
        let (right, lambda, it_r) = perron_vector(&m)?;
        let (left, _, it_l) = perron_vector(&m.transpose())?;
        Ok(PerronData {
            lambda,
            right,
            left,
            iterations: it_r.max(it_l),
        })
    }

    /// `log λ`.
    pub fn log_spectral_radius(&self) -> Result<f64> {
        Ok(self.perron()?.lambda.ln())
    }
}

fn perron_vector(m: &DMatrix<f64>) -> Result<(DVector<f64>, f64, usize)> {
    let n = m.nrows();
    let shifted = m + DMatrix::identity(n, n);
    let mut r = DVector::from_element(n, 1.0 / n as f64);
    let mut iterations = 0;
    for it in 1..=PERRON_CAP {
        let mut next = &shifted * &r;
        let s = next.sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Numerical("power iteration lost positivity".into()));
        }
        next /= s;
        let diff = (&next - &r).amax();
        r = next;
        iterations = it;
        if diff <= PERRON_TOL {
            break;
        }
    }
    let mut lambda = (m * &r).sum() / r.sum();
    for _ in 0..3 {
        // [M - λI, -r; 1ᵀ, 0] [dr; dλ] = [λr - Mr; 1 - Σr]
        let mut j = DMatrix::zeros(n + 1, n + 1);
        j.view_mut((0, 0), (n, n))
            .copy_from(&(m - DMatrix::identity(n, n) * lambda));
        for i in 0..n {
            j[(i, n)] = -r[i];
            j[(n, i)] = 1.0;
        }
        let res = &r * lambda - m * &r;
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&res);
        rhs[n] = 1.0 - r.sum();
        let Some(step) = j.lu().solve(&rhs) else { break };
        let cand = &r + step.rows(0, n);
        if cand.iter().any(|&c| !(c > 0.0)) || !step[n].is_finite() {
            break;
        }
        r = cand;
        lambda += step[n];
    }
    r /= r.sum();
    Ok((r, lambda, iterations))
}
