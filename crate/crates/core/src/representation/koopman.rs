use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::group::{FiniteSubset, GroupElement};
use crate::subshift::{enumerate_patterns, LocalFunction, Subshift};
use crate::{par, Error, Result};

use super::{AffineResidual, NormKind, Representation, UniformBound};

/// The Koopman representation `π(g)φ = φ(g^{-1}·)` on locally constant
/// functions over a subshift, with the uniform norm over the subshift.
///
/// Solvers search over functions on a fixed parameter window.
#[derive(Clone, Debug)]
pub struct KoopmanRep {
    subshift: Arc<Subshift>,
    param_window: FiniteSubset,
}

impl KoopmanRep {
    pub fn new(subshift: Arc<Subshift>, param_window: FiniteSubset) -> Result<Self> {
        if param_window.dim() != subshift.dim() {
            return Err(Error::DimensionMismatch {
                expected: subshift.dim(),
                found: param_window.dim(),
            });
        }
        LocalFunction::zero(subshift.dim(), subshift.alphabet_size())?.extend_to(&param_window)?;
        Ok(KoopmanRep { subshift, param_window })
    }

    pub fn subshift(&self) -> &Subshift {
        &self.subshift
    }

    pub fn subshift_arc(&self) -> &Arc<Subshift> {
        &self.subshift
    }

    pub fn param_window(&self) -> &FiniteSubset {
        &self.param_window
    }

    fn check(&self, v: &LocalFunction) -> Result<()> {
        v.check_subshift(&self.subshift)
    }
}

impl Representation for KoopmanRep {
    type Vector = LocalFunction;

    fn group_dim(&self) -> usize {
        self.subshift.dim()
    }

    fn zero(&self) -> LocalFunction {
        LocalFunction::zero(self.subshift.dim(), self.subshift.alphabet_size()).expect("small table")
    }

    fn act(&self, g: &GroupElement, v: &LocalFunction) -> Result<LocalFunction> {
        self.check(v)?;
        if g.dim() != self.group_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group_dim(),
                found: g.dim(),
            });
        }
        Ok(v.translate(g))
    }

    fn add(&self, a: &LocalFunction, b: &LocalFunction) -> Result<LocalFunction> {
        a.add(b)
    }

    fn sub(&self, a: &LocalFunction, b: &LocalFunction) -> Result<LocalFunction> {
        a.sub(b)
    }

    fn scale(&self, v: &LocalFunction, c: f64) -> LocalFunction {
        v.scale(c)
    }

    fn norm(&self, v: &LocalFunction) -> Result<f64> {
        v.sup_norm(&self.subshift)
    }

    fn uniform_bound(&self) -> UniformBound {
        UniformBound {
            value: 1.0,
            lower_bound_only: false,
        }
    }

    fn ergodic_sum(&self, f: &FiniteSubset, v: &LocalFunction) -> Result<LocalFunction> {
        self.check(v)?;
        v.ergodic_sum(f)
    }

    fn parameter_dim(&self) -> usize {
        self.subshift.alphabet_size().pow(self.param_window.len() as u32)
    }

    fn to_params(&self, v: &LocalFunction) -> Result<DVector<f64>> {
        self.check(v)?;
        Ok(DVector::from_column_slice(v.extend_to(&self.param_window)?.table()))
    }

    fn from_params(&self, p: &DVector<f64>) -> Result<LocalFunction> {
        LocalFunction::new(
            self.param_window.clone(),
            self.subshift.alphabet_size(),
            p.iter().copied().collect(),
        )
    }

    /// One row per distinct `(A_F-coefficients, target value)` over the
    /// patterns of the subshift on `target.window ∪ (F + P)`, so the sup of
    /// the residual over rows is the sup over the subshift.
    fn residual_model(&self, f: &FiniteSubset, target: &LocalFunction) -> Result<AffineResidual> {
        self.check(target)?;
        let k = self.subshift.alphabet_size();
        let fp = f.minkowski_sum(&self.param_window);
        let u = target.window().union(&fp);
        let words = enumerate_patterns(&self.subshift, &u)?;
        let t_pos: Vec<usize> = target.window().points().map(|p| u.index_of(p).expect("in U")).collect();
        let f_pos: Vec<Vec<usize>> = f
            .points()
            .map(|g| {
                self.param_window
                    .points()
                    .map(|w| {
                        let q: Vec<i64> = g.iter().zip(w).map(|(a, b)| a + b).collect();
                        u.index_of(&q).expect("in U")
                    })
                    .collect()
            })
            .collect();
        let np = self.parameter_dim();
        let index = |word: &[u8], pos: &[usize]| pos.iter().fold(0usize, |a, &i| a * k + word[i] as usize);
        let row_of = |word: &[u8]| -> (Vec<u32>, u64) {
            let mut counts = vec![0u32; np];
            for pos in &f_pos {
                counts[index(word, pos)] += 1;
            }
            let t = target.table()[index(word, &t_pos)] + 0.0;
            (counts, t.to_bits())
        };
        const CH: usize = 1 << 14;
        let starts: Vec<usize> = (0..words.len()).step_by(CH).collect();
        let chunks = par::map(&starts, |&s| {
            let mut rows: Vec<(Vec<u32>, u64)> = (s..(s + CH).min(words.len())).map(|i| row_of(words.get(i))).collect();
            rows.sort_unstable();
            rows.dedup();
            rows
        });
        let mut rows: Vec<(Vec<u32>, u64)> = chunks.into_iter().flatten().collect();
        rows.sort_unstable();
        rows.dedup();
        let inv = 1.0 / f.len() as f64;
        let matrix = DMatrix::from_fn(rows.len(), np, |i, j| rows[i].0[j] as f64 * inv);
        let target = DVector::from_iterator(rows.len(), rows.iter().map(|r| f64::from_bits(r.1)));
        Ok(AffineResidual {
            matrix,
            target,
            norm: NormKind::Sup,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep() -> KoopmanRep {
        KoopmanRep::new(Arc::new(Subshift::golden_mean()), FiniteSubset::interval(0, 2).unwrap()).unwrap()
    }

    #[test]
    fn residual_model_matches_direct_sup() {
        let r = rep();
        let phi = LocalFunction::pair(&[vec![0.3, -1.0], vec![2.0, 5.0]]).unwrap();
        let f = FiniteSubset::interval(0, 6).unwrap();
        let target = r.ergodic_average(&f, &phi).unwrap();
        let p = DVector::from_vec(vec![0.1, 0.2, -0.4, 7.0]);
        let cand = r.from_params(&p).unwrap();
        let model = r.residual_model(&f, &target).unwrap();
        let direct = r
            .norm(&r.sub(&target, &r.ergodic_average(&f, &cand).unwrap()).unwrap())
            .unwrap();
        assert!((model.value(&p) - direct).abs() < 1e-12);
        // 11 never occurs so its parameter is irrelevant
        assert!(model.matrix.column(3).iter().all(|&x| x == 0.0));
        assert!(model.value(&r.to_params(&phi).unwrap()) < 1e-12);
    }

    #[test]
    fn koopman_is_isometric() {
        let r = rep();
        let phi = LocalFunction::pair(&[vec![0.3, -1.0], vec![2.0, 5.0]]).unwrap();
        let g = GroupElement::new(vec![4]);
        let a = r.norm(&phi).unwrap();
        assert_eq!(a, 2.0);
        assert_eq!(r.norm(&r.act(&g, &phi).unwrap()).unwrap(), a);
        assert_eq!(r.uniform_bound().value, 1.0);
    }
}
