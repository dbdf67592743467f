use nalgebra::{DMatrix, DVector};

use crate::group::{CountableGroup, FiniteSubset, GroupElement, Zd};
use crate::linalg::{max_row_sum, spectral_norm};
use crate::{par, Error, Result};

use super::{AffineResidual, CoboundarySpace, NormKind, Representation, UniformBound};

/// Number of cached binary powers per generator.
const LEVELS: usize = 32;

/// Word length used to estimate `C_π`.
pub const BOUND_RADIUS: usize = 8;

/// A representation of `Z^d` on `R^D` given by commuting invertible matrices,
/// one per axis.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    generators: Vec<DMatrix<f64>>,
    norm: NormKind,
    /// `pos[axis][j] = π(e_axis)^{2^j}`, `neg` likewise for the inverse.
    pos: Vec<Vec<DMatrix<f64>>>,
    neg: Vec<Vec<DMatrix<f64>>>,
    bound: UniformBound,
    cob: CoboundarySpace,
}

fn binary_powers(m: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(LEVELS);
    let mut cur = m.clone();
    for _ in 0..LEVELS {
        let next = &cur * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

impl MatrixRep {
    pub fn new(generators: Vec<DMatrix<f64>>, norm: NormKind) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::config("a matrix representation needs one generator per axis"));
        }
        let n = generators[0].nrows();
        if n == 0 {
            return Err(Error::config("representation space must be non-trivial"));
        }
        for m in &generators {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::config(format!("generators must all be {n}x{n}")));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::config("generator entries must be finite"));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                let c = a * b - b * a;
                let scale = 1.0 + a.amax() * b.amax();
                if c.amax() > 1e-9 * scale {
                    return Err(Error::config("generators of Z^d must commute"));
                }
            }
        }
        let mut inverses = Vec::with_capacity(generators.len());
        for m in &generators {
            let inv = m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::config("generators must be invertible"))?;
            inverses.push(inv);
        }
        let pos = generators.iter().map(binary_powers).collect();
        let neg = inverses.iter().map(binary_powers).collect();
        let mut rep = MatrixRep {
            generators,
            norm,
            pos,
            neg,
            bound: UniformBound {
                value: 1.0,
                lower_bound_only: true,
            },
            cob: CoboundarySpace::zero(n, norm),
        };
        rep.bound = rep.estimate_bound(BOUND_RADIUS);
        let basis: Vec<DVector<f64>> = (0..n).map(|i| DVector::from_fn(n, |j, _| f64::from(i == j))).collect();
        let units: Vec<GroupElement> = (0..rep.group_dim())
            .map(|a| GroupElement::unit(rep.group_dim(), a))
            .collect();
        rep.cob = CoboundarySpace::new(&rep, &basis, &units)?;
        Ok(rep)
    }

    /// `π ≡ I` on `R^n` acting through `Z^d`.
    pub fn identity(group_dim: usize, n: usize, norm: NormKind) -> Result<Self> {
        Self::new(vec![DMatrix::identity(n, n); group_dim], norm)
    }

    /// `π(k)` = rotation of the plane by `k·angle`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(vec![DMatrix::from_row_slice(2, 2, &[c, -s, s, c])], NormKind::Euclidean).expect("rotation")
    }

    /// `π(k) = diag(d)^k` on `Z`.
    pub fn diagonal(d: &[f64], norm: NormKind) -> Result<Self> {
        Self::new(vec![DMatrix::from_diagonal(&DVector::from_column_slice(d))], norm)
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn is_isometric(&self) -> bool {
        self.bound.value <= 1.0 + 1e-9
    }

    fn op_norm(&self, m: &DMatrix<f64>) -> f64 {
        match self.norm {
            NormKind::Euclidean => spectral_norm(m),
            NormKind::Sup => max_row_sum(m),
        }
    }

    /// Maximum operator norm over `|g|_1 <= radius`.
    pub fn estimate_bound(&self, radius: usize) -> UniformBound {
        let z = Zd::new(self.group_dim());
        let ball = z.ball(radius);
        let norms = par::map(&ball, |g| self.op_norm(&self.matrix_of(g)));
        UniformBound {
            value: par::max(&norms).max(1.0),
            lower_bound_only: true,
        }
    }

    fn apply_power(&self, axis: usize, k: i64, v: &DVector<f64>) -> DVector<f64> {
        let table = if k >= 0 { &self.pos[axis] } else { &self.neg[axis] };
        let mut e = k.unsigned_abs();
        let mut out = v.clone();
        let mut j = 0;
        while e > 0 {
            if e & 1 == 1 {
                out = &table[j.min(LEVELS - 1)] * out;
            }
            e >>= 1;
            j += 1;
        }
        out
    }

    /// `π(g)` as a matrix.
    pub fn matrix_of(&self, g: &GroupElement) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::identity(n, n);
        for (axis, &k) in g.coords().iter().enumerate() {
            let table = if k >= 0 { &self.pos[axis] } else { &self.neg[axis] };
            let mut e = k.unsigned_abs();
            let mut j = 0;
            while e > 0 {
                if e & 1 == 1 {
                    m = &table[j] * m;
                }
                e >>= 1;
                j += 1;
            }
        }
        m
    }

    /// `A_F` as a matrix.
    pub fn averaging_matrix(&self, f: &FiniteSubset) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let cols = par::map_range(n, |i| {
            let e = DVector::from_fn(n, |j, _| f64::from(i == j));
            self.ergodic_sum(f, &e)
        });
        let mut m = DMatrix::zeros(n, n);
        for (i, c) in cols.into_iter().enumerate() {
            m.set_column(i, &(c? / f.len() as f64));
        }
        Ok(m)
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_set(&self, f: &FiniteSubset) -> Result<()> {
        if f.dim() != self.group_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group_dim(),
                found: f.dim(),
            });
        }
        Ok(())
    }

    pub fn quotient_seminorm(&self, u: &CoboundarySpace, v: &DVector<f64>) -> Result<f64> {
        self.check(v)?;
        u.quotient_seminorm(v)
    }
}

impl Representation for MatrixRep {
    type Vector = DVector<f64>;

    fn group_dim(&self) -> usize {
        self.generators.len()
    }

    fn zero(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }

    fn act(&self, g: &GroupElement, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v)?;
        if g.dim() != self.group_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group_dim(),
                found: g.dim(),
            });
        }
        let mut out = v.clone();
        for (axis, &k) in g.coords().iter().enumerate() {
            out = self.apply_power(axis, k, &out);
        }
        Ok(out)
    }

    fn add(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a + b)
    }

    fn sub(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a - b)
    }

    fn scale(&self, v: &DVector<f64>, c: f64) -> DVector<f64> {
        v * c
    }

    fn norm(&self, v: &DVector<f64>) -> Result<f64> {
        self.check(v)?;
        Ok(self.norm.of(v))
    }

    fn uniform_bound(&self) -> UniformBound {
        self.bound
    }

    fn ergodic_sum(&self, f: &FiniteSubset, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v)?;
        self.check_set(f)?;
        if f.is_box() {
            // S_F factors over the axes of a box.
            let (lo, hi) = f.bounds();
            let mut cur = v.clone();
            for axis in 0..self.group_dim() {
                let step = &self.neg[axis][0];
                let mut w = self.apply_power(axis, -lo[axis], &cur);
                let mut acc = w.clone();
                for _ in lo[axis]..hi[axis] {
                    w = step * w;
                    acc += &w;
                }
                cur = acc;
            }
            return Ok(cur);
        }
        let terms = par::map(&f.elements(), |g| self.act(&(-g), v));
        let mut acc = DVector::zeros(self.dim());
        for t in terms {
            acc += t?;
        }
        Ok(acc)
    }

    fn parameter_dim(&self) -> usize {
        self.dim()
    }

    fn to_params(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v)?;
        Ok(v.clone())
    }

    fn from_params(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(p)?;
        Ok(p.clone())
    }

    fn residual_model(&self, f: &FiniteSubset, target: &DVector<f64>) -> Result<AffineResidual> {
        self.check(target)?;
        Ok(AffineResidual {
            matrix: self.averaging_matrix(f)?,
            target: target.clone(),
            norm: self.norm,
        })
    }

    fn weak_coboundaries(&self) -> Option<CoboundarySpace> {
        Some(self.cob.clone())
    }
}
