use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::group::{folner_window, limsup_along, ConvergenceReport, FolnerSchedule, GroupElement, LimitOptions};
use crate::linalg::{chebyshev_fit, orthonormalize, project_onto, project_out};
use crate::{par, Error, Result};

use super::{MatrixRep, NormKind, Representation};

/// One spanning vector `w - π(g)w` together with the data it came from.
#[derive(Clone, Debug)]
pub struct CoboundaryGenerator {
    pub w: DVector<f64>,
    pub g: GroupElement,
    pub vector: DVector<f64>,
}

/// `span{w - π(g)w : w ∈ W, g ∈ gens}` with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct CoboundarySpace {
    dim: usize,
    norm: NormKind,
    generators: Vec<CoboundaryGenerator>,
    basis: DMatrix<f64>,
}

impl CoboundarySpace {
    pub(crate) fn zero(dim: usize, norm: NormKind) -> Self {
        CoboundarySpace {
            dim,
            norm,
            generators: Vec::new(),
            basis: DMatrix::zeros(dim, 0),
        }
    }

    pub fn new(rep: &MatrixRep, w: &[DVector<f64>], gens: &[GroupElement]) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::config("coboundary space needs a non-empty W"));
        }
        if gens.is_empty() {
            return Err(Error::config("coboundary space needs at least one group element"));
        }
        let mut generators = Vec::with_capacity(w.len() * gens.len());
        for wi in w {
            for g in gens {
                let vector = wi - rep.act(g, wi)?;
                generators.push(CoboundaryGenerator {
                    w: wi.clone(),
                    g: g.clone(),
                    vector,
                });
            }
        }
        let vs: Vec<DVector<f64>> = generators.iter().map(|c| c.vector.clone()).collect();
        Ok(CoboundarySpace {
            dim: rep.dim(),
            norm: rep.norm_kind(),
            basis: orthonormalize(rep.dim(), &vs),
            generators,
        })
    }

    /// The span of arbitrary vectors, measured in `norm`.
    pub fn span(dim: usize, norm: NormKind, vectors: &[DVector<f64>]) -> Self {
        CoboundarySpace {
            dim,
            norm,
            generators: Vec::new(),
            basis: orthonormalize(dim, vectors),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    /// Columns are orthonormal.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn generators(&self) -> &[CoboundaryGenerator] {
        &self.generators
    }

    pub fn project_out(&self, v: &DVector<f64>) -> DVector<f64> {
        project_out(&self.basis, v)
    }

    pub fn project_onto(&self, v: &DVector<f64>) -> DVector<f64> {
        project_onto(&self.basis, v)
    }

    /// `‖v + U‖_U = inf_{u∈U} ‖v + u‖`.
    pub fn quotient_seminorm(&self, v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        if self.rank() == 0 {
            return Ok(self.norm.of(v));
        }
        match self.norm {
            NormKind::Euclidean => Ok(self.project_out(v).norm()),
            NormKind::Sup => {
                if self.rank() == self.dim {
                    return Ok(0.0);
                }
                let (_, t) = chebyshev_fit(&[(&self.basis, v)])?;
                Ok(t.max(0.0))
            }
        }
    }

    /// The span of `self` and `other`.
    pub fn sum(&self, other: &CoboundarySpace) -> CoboundarySpace {
        let vs: Vec<DVector<f64>> = self
            .basis
            .column_iter()
            .chain(other.basis.column_iter())
            .map(|c| c.into_owned())
            .collect();
        CoboundarySpace::span(self.dim, self.norm, &vs)
    }
}

/// Outcome of the averaging test for weak coboundaries.
#[derive(Clone, Debug, Serialize)]
pub struct WeakCoboundaryReport {
    pub is_weak_coboundary: bool,
    /// `‖A_{F_n} v‖` along the schedule.
    pub averages: ConvergenceReport,
    pub quotient_seminorm: f64,
    /// Verdict of the quotient norm at the same tolerance.
    pub linear_algebra_verdict: bool,
    pub disagreement: bool,
}

/// Decides `v ∈ L̄` by `limsup ‖A_{F_n} v‖ <= tol` and cross-checks against
/// `‖v + L̄‖`.
pub fn test_weak_coboundary(
    rep: &MatrixRep,
    v: &DVector<f64>,
    schedule: &FolnerSchedule,
    tol: f64,
) -> Result<WeakCoboundaryReport> {
    let window = folner_window(schedule)?;
    let norms = par::map(&window, |f| rep.ergodic_average(f, v).and_then(|a| rep.norm(&a)));
    let values: Vec<_> = window
        .iter()
        .cloned()
        .zip(norms)
        .map(|(f, n)| n.map(|n| (f, n)))
        .collect::<Result<_>>()?;
    let averages = limsup_along(&values, schedule, &LimitOptions::default())?;
    let q = rep.quotient_seminorm(&rep.weak_coboundaries().expect("finite-dimensional"), v)?;
    let is_weak_coboundary = averages.tail_sup <= tol;
    let linear_algebra_verdict = q <= tol;
    Ok(WeakCoboundaryReport {
        is_weak_coboundary,
        averages,
        quotient_seminorm: q,
        linear_algebra_verdict,
        disagreement: is_weak_coboundary != linear_algebra_verdict,
    })
}
