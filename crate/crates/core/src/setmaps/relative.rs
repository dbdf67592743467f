use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::group::{folner_window, FolnerSchedule};
use crate::linalg::{lstsq, orthonormalize};
use crate::representation::AffineResidual;
use crate::{Error, Result};

use super::analysis::{residual_models, start_params, tail_len};
use super::minimax::{minimize_max, MinimaxOptions, MinimaxResult};
use super::realize::{realize, RealizeOptions};
use super::SetMap;

/// A target set `W` in parameter coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Whole,
    /// Span of the given vectors.
    Subspace(Vec<DVector<f64>>),
    /// `offset + span(directions)`.
    Affine {
        offset: DVector<f64>,
        directions: Vec<DVector<f64>>,
    },
    /// An explicit finite list.
    Finite(Vec<DVector<f64>>),
}

#[derive(Clone, Debug, Serialize)]
pub struct RelativeAaReport {
    pub passes: bool,
    pub w: Vec<f64>,
    /// `min_{w ∈ W} max_{F in tail} ‖φ(F)/|F| - A_F w‖`.
    pub gap: f64,
    pub tol: f64,
    pub solver: Option<MinimaxResult>,
}

fn check_dims(vs: &[DVector<f64>], dim: usize) -> Result<()> {
    match vs.iter().find(|v| v.len() != dim) {
        Some(v) => Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        }),
        None => Ok(()),
    }
}

fn restricted(models: &[AffineResidual], offset: &DVector<f64>, basis: &DMatrix<f64>) -> Vec<AffineResidual> {
    models
        .iter()
        .map(|m| AffineResidual {
            matrix: &m.matrix * basis,
            target: &m.target - &m.matrix * offset,
            norm: m.norm,
        })
        .collect()
}

/// Minimizes the tail gap over `w ∈ W` and compares it with `tol`.
pub fn test_relative_aa<V>(
    phi: &SetMap<V>,
    w: &Constraint,
    schedule: &FolnerSchedule,
    tol: f64,
) -> Result<RelativeAaReport>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let dim = phi.rep().parameter_dim();
    let window = folner_window(schedule)?;
    let start = window.len() - tail_len(window.len());
    let models = residual_models(phi, &window[start..])?;
    let objective = |p: &DVector<f64>| models.iter().map(|m| m.value(p)).fold(0.0, f64::max);
    let (offset, directions) = match w {
        Constraint::Whole => (
            DVector::zeros(dim),
            (0..dim)
                .map(|i| DVector::from_fn(dim, |j, _| f64::from(i == j)))
                .collect(),
        ),
        Constraint::Subspace(d) => (DVector::zeros(dim), d.clone()),
        Constraint::Affine { offset, directions } => (offset.clone(), directions.clone()),
        Constraint::Finite(list) => {
            if list.is_empty() {
                return Err(Error::config("finite target set is empty"));
            }
            check_dims(list, dim)?;
            let values: Vec<f64> = list.iter().map(objective).collect();
            let mut best = 0;
            for (i, &v) in values.iter().enumerate() {
                if v < values[best] {
                    best = i;
                }
            }
            return Ok(RelativeAaReport {
                passes: values[best] <= tol,
                w: list[best].iter().copied().collect(),
                gap: values[best],
                tol,
                solver: None,
            });
        }
    };
    if offset.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: offset.len(),
        });
    }
    check_dims(&directions, dim)?;
    let basis = orthonormalize(dim, &directions);
    let p0 = start_params(phi);
    let c0 = basis.transpose() * (&p0 - &offset);
    let sub = restricted(&models, &offset, &basis);
    let res = minimize_max(&sub, &c0, &MinimaxOptions::default())?;
    let best = &offset + &basis * &res.p;
    let gap = objective(&best);
    Ok(RelativeAaReport {
        passes: gap <= tol,
        w: best.iter().copied().collect(),
        gap,
        tol,
        solver: Some(res),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Dichotomy {
    /// A realization inside `W`.
    B1 { w: Vec<f64>, distance: f64 },
    /// A realization outside `W + L̄`. For a subspace `W` in finite
    /// dimensions this cannot happen and is flagged as inconsistent.
    B2 {
        v: Vec<f64>,
        distance: f64,
        inconsistent: bool,
    },
    /// `φ` is not asymptotically additive relative to `W` at the tolerance.
    OutOfHypothesis { gap: f64 },
}

/// Classifies a realization of `φ` relative to the subspace spanned by `w`.
pub fn dichotomy_classify<V>(
    phi: &SetMap<V>,
    w: &[DVector<f64>],
    schedule: &FolnerSchedule,
    tol: f64,
    opts: &RealizeOptions,
) -> Result<Dichotomy>
where
    V: Clone + Debug + Send + Sync + 'static,
{
    let rel = test_relative_aa(phi, &Constraint::Subspace(w.to_vec()), schedule, tol)?;
    if !rel.passes {
        return Ok(Dichotomy::OutOfHypothesis { gap: rel.gap });
    }
    let l = phi
        .rep()
        .weak_coboundaries()
        .ok_or_else(|| Error::config("dichotomy classification needs a finite-dimensional representation"))?;
    let realized = realize(phi, schedule, opts)?;
    let v = DVector::from_column_slice(&realized.params);
    let basis = orthonormalize(v.len(), w);
    // solve v - B c ∈ L̄ in the least-squares sense
    let pb = DMatrix::from_columns(
        &basis
            .column_iter()
            .map(|c| l.project_out(&c.into_owned()))
            .collect::<Vec<_>>(),
    );
    let c = if basis.ncols() == 0 {
        DVector::zeros(0)
    } else {
        lstsq(&pb, &l.project_out(&v))
    };
    let wv = if basis.ncols() == 0 {
        DVector::zeros(v.len())
    } else {
        &basis * c
    };
    let distance = l.quotient_seminorm(&(&v - &wv))?;
    if distance <= tol {
        Ok(Dichotomy::B1 {
            w: wv.iter().copied().collect(),
            distance,
        })
    } else {
        Ok(Dichotomy::B2 {
            v: realized.params,
            distance,
            inconsistent: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::{MatrixRep, NormKind, Representation};
    use std::sync::Arc;

    type Rep = Arc<dyn Representation<Vector = DVector<f64>>>;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn id2() -> Rep {
        Arc::new(MatrixRep::identity(1, 2, NormKind::Euclidean).unwrap())
    }

    #[test]
    fn axis_constraint() {
        let s = FolnerSchedule::default_for(1);
        let axis = Constraint::Subspace(vec![v(&[1.0, 0.0])]);
        let r = test_relative_aa(&SetMap::additive(id2(), v(&[3.0, 0.0])), &axis, &s, 1e-9).unwrap();
        assert!(r.passes);
        assert!((r.w[0] - 3.0).abs() < 1e-9 && r.w[1].abs() < 1e-12);
        let r = test_relative_aa(&SetMap::additive(id2(), v(&[0.0, 1.0])), &axis, &s, 1e-3).unwrap();
        assert!(!r.passes);
        assert!((r.gap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn whole_space_matches_plain_test() {
        let s = FolnerSchedule::default_for(1);
        let phi = SetMap::additive(id2(), v(&[3.0, -1.0]));
        let r = test_relative_aa(&phi, &Constraint::Whole, &s, 1e-9).unwrap();
        assert!(r.passes);
    }

    #[test]
    fn finite_and_affine_targets() {
        let s = FolnerSchedule::default_for(1);
        let phi = SetMap::additive(id2(), v(&[1.0, 1.0]));
        let list = Constraint::Finite(vec![v(&[0.0, 0.0]), v(&[1.0, 1.5]), v(&[5.0, 5.0])]);
        let r = test_relative_aa(&phi, &list, &s, 0.6).unwrap();
        assert!(r.passes);
        assert_eq!(r.w, vec![1.0, 1.5]);
        let line = Constraint::Affine {
            offset: v(&[0.0, 1.0]),
            directions: vec![v(&[1.0, 0.0])],
        };
        let r = test_relative_aa(&phi, &line, &s, 1e-9).unwrap();
        assert!(r.passes);
        assert!(test_relative_aa(&phi, &Constraint::Finite(vec![]), &s, 1.0).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        let s = FolnerSchedule::default_for(1);
        let o = RealizeOptions::default();
        let phi = SetMap::additive(id2(), v(&[3.0, 0.0]));
        match dichotomy_classify(&phi, &[v(&[1.0, 0.0])], &s, 1e-6, &o).unwrap() {
            Dichotomy::B1 { w, .. } => assert!((w[0] - 3.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }

        let refl: Rep = Arc::new(MatrixRep::diagonal(&[1.0, -1.0], NormKind::Euclidean).unwrap());
        let phi = SetMap::additive(refl, v(&[2.0, 5.0]));
        match dichotomy_classify(&phi, &[v(&[1.0, 1.0])], &s, 0.05, &o).unwrap() {
            Dichotomy::B1 { w, .. } => {
                assert!((w[0] - 2.0).abs() < 1e-6 && (w[1] - 2.0).abs() < 1e-6, "{w:?}")
            }
            other => panic!("{other:?}"),
        }

        let phi = SetMap::additive(id2(), v(&[0.0, 1.0]));
        assert!(matches!(
            dichotomy_classify(&phi, &[v(&[1.0, 0.0])], &s, 0.05, &o).unwrap(),
            Dichotomy::OutOfHypothesis { .. }
        ));
    }
}
