//! Uniformly bounded representations of `Z^d`, the averaging operators
//! `S_F` and `A_F`, coboundary subspaces and quotient semi-norms.

mod coboundary;
mod koopman;
mod matrix;

pub use coboundary::{test_weak_coboundary, CoboundarySpace, WeakCoboundaryReport};
pub use koopman::KoopmanRep;
pub use matrix::MatrixRep;

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};

use crate::group::{FiniteSubset, GroupElement};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    Sup,
}

impl NormKind {
    pub fn of(self, v: &DVector<f64>) -> f64 {
        match self {
            NormKind::Euclidean => v.norm(),
            NormKind::Sup => v.amax(),
        }
    }
}

/// `C_π = sup_g ‖π(g)‖_op`, possibly only a lower estimate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct UniformBound {
    pub value: f64,
    pub lower_bound_only: bool,
}

/// `p ↦ ‖target - matrix·p‖` in the given norm. Every `F ↦ ‖x - A_F v‖`
/// objective is presented to the solvers in this form.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineResidual {
    pub matrix: DMatrix<f64>,
    pub target: DVector<f64>,
    pub norm: NormKind,
}

impl AffineResidual {
    pub fn residual(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.target - &self.matrix * p
    }

    pub fn value(&self, p: &DVector<f64>) -> f64 {
        self.norm.of(&self.residual(p))
    }

    /// Value and one subgradient at `p`.
    pub fn subgradient(&self, p: &DVector<f64>) -> (f64, DVector<f64>) {
        let r = self.residual(p);
        match self.norm {
            NormKind::Euclidean => {
                let n = r.norm();
                if n == 0.0 {
                    (0.0, DVector::zeros(p.len()))
                } else {
                    (n, -(self.matrix.transpose() * r) / n)
                }
            }
            NormKind::Sup => {
                let mut best = 0;
                for i in 0..r.len() {
                    if r[i].abs() > r[best].abs() {
                        best = i;
                    }
                }
                if r.is_empty() || r[best] == 0.0 {
                    return (0.0, DVector::zeros(p.len()));
                }
                let s = -r[best].signum();
                (r[best].abs(), self.matrix.row(best).transpose() * s)
            }
        }
    }
}

/// A uniformly bounded action of `Z^d` on a concrete normed space.
pub trait Representation: Send + Sync {
    type Vector: Clone + Debug + Send + Sync;

    fn group_dim(&self) -> usize;

    fn zero(&self) -> Self::Vector;

    /// `π(g)v`.
    fn act(&self, g: &GroupElement, v: &Self::Vector) -> Result<Self::Vector>;

    fn add(&self, a: &Self::Vector, b: &Self::Vector) -> Result<Self::Vector>;

    fn sub(&self, a: &Self::Vector, b: &Self::Vector) -> Result<Self::Vector>;

    fn scale(&self, v: &Self::Vector, c: f64) -> Self::Vector;

    fn norm(&self, v: &Self::Vector) -> Result<f64>;

    fn uniform_bound(&self) -> UniformBound;

    /// `S_F v = Σ_{g∈F} π(-g)v`.
    fn ergodic_sum(&self, f: &FiniteSubset, v: &Self::Vector) -> Result<Self::Vector> {
        let mut acc = self.zero();
        for g in f.elements() {
            acc = self.add(&acc, &self.act(&(-&g), v)?)?;
        }
        Ok(acc)
    }

    /// `A_F v = S_F v / |F|`.
    fn ergodic_average(&self, f: &FiniteSubset, v: &Self::Vector) -> Result<Self::Vector> {
        Ok(self.scale(&self.ergodic_sum(f, v)?, 1.0 / f.len() as f64))
    }

    /// Dimension of the coordinates searched by the solvers.
    fn parameter_dim(&self) -> usize;

    fn to_params(&self, v: &Self::Vector) -> Result<DVector<f64>>;

    #[allow(clippy::wrong_self_convention)]
    fn from_params(&self, p: &DVector<f64>) -> Result<Self::Vector>;

    /// `p ↦ ‖target - A_F(from_params(p))‖` as an affine residual whose norm
    /// agrees with [`Representation::norm`].
    fn residual_model(&self, f: &FiniteSubset, target: &Self::Vector) -> Result<AffineResidual>;

    /// `L̄` when it is computable (finite-dimensional spaces).
    fn weak_coboundaries(&self) -> Option<CoboundarySpace> {
        None
    }

    /// Projection of parameters onto the orthogonal complement of `L̄`.
    fn reduce_params(&self, p: &DVector<f64>) -> DVector<f64> {
        match self.weak_coboundaries() {
            Some(l) => l.project_out(p),
            None => p.clone(),
        }
    }

    /// `‖v + L̄‖`, or `‖v‖` when `L̄` is not modelled.
    fn quotient_norm(&self, v: &Self::Vector) -> Result<f64> {
        match self.weak_coboundaries() {
            Some(l) => l.quotient_seminorm(&self.to_params(v)?),
            None => self.norm(v),
        }
    }
}
