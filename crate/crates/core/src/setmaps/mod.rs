//! Bounded `G`-equivariant set maps `φ: F(G) → V`, asymptotic additivity,
//! additive realization and the stitched-limit construction.

mod analysis;
mod minimax;
mod realize;
mod relative;

pub use analysis::{
    check_equivariance, test_asymptotically_additive, vert_g, vert_sup, AaReport, EquivarianceReport, EQUIVARIANCE_TOL,
};
pub use minimax::{minimize_max, MinimaxOptions, MinimaxResult};
pub use realize::{
    realization_set_membership, realize, EpsApproximant, MembershipReport, RealizationResult, RealizeOptions,
};
pub use relative::{dichotomy_classify, test_relative_aa, Constraint, Dichotomy, RelativeAaReport};

use std::fmt;
use std::sync::Arc;

use crate::group::{is_invariant, FiniteSubset, GroupElement, InvariancePair};
use crate::representation::Representation;
use crate::{Error, Result};

type SizeRule<V> = Arc<dyn Fn(usize) -> Result<V> + Send + Sync>;
type SetRule<V> = Arc<dyn Fn(&FiniteSubset) -> Result<V> + Send + Sync>;

/// How a set map produces its values.
pub enum Rule<V> {
    /// `F ↦ S_F v`.
    Additive(V),
    /// `F ↦ S_F v_{|F|}`.
    AdditiveSequence {
        name: String,
        v: SizeRule<V>,
    },
    /// `F ↦ S_F v + |KF Δ F|·u` with `u` fixed by `π`.
    BoundaryPerturbed {
        v: V,
        u: V,
        k: FiniteSubset,
    },
    /// `F ↦ pieces[level(F)](F)`.
    Stitched {
        pieces: Vec<SetMap<V>>,
        pairs: Vec<InvariancePair>,
    },
    Custom {
        name: String,
        eval: SetRule<V>,
    },
}

impl<V: Clone> Clone for Rule<V> {
    fn clone(&self) -> Self {
        match self {
            Rule::Additive(v) => Rule::Additive(v.clone()),
            Rule::AdditiveSequence { name, v } => Rule::AdditiveSequence {
                name: name.clone(),
                v: v.clone(),
            },
            Rule::BoundaryPerturbed { v, u, k } => Rule::BoundaryPerturbed {
                v: v.clone(),
                u: u.clone(),
                k: k.clone(),
            },
            Rule::Stitched { pieces, pairs } => Rule::Stitched {
                pieces: pieces.clone(),
                pairs: pairs.clone(),
            },
            Rule::Custom { name, eval } => Rule::Custom {
                name: name.clone(),
                eval: eval.clone(),
            },
        }
    }
}

impl<V: fmt::Debug> fmt::Debug for Rule<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Additive(v) => f.debug_tuple("Additive").field(v).finish(),
            Rule::AdditiveSequence { name, .. } => write!(f, "AdditiveSequence({name})"),
            Rule::BoundaryPerturbed { v, u, k } => f
                .debug_struct("BoundaryPerturbed")
                .field("v", v)
                .field("u", u)
                .field("k", k)
                .finish(),
            Rule::Stitched { pieces, .. } => write!(f, "Stitched({} pieces)", pieces.len()),
            Rule::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A set map over a shared representation.
pub struct SetMap<V> {
    rep: Arc<dyn Representation<Vector = V>>,
    rule: Rule<V>,
}

impl<V: Clone> Clone for SetMap<V> {
    fn clone(&self) -> Self {
        SetMap {
            rep: self.rep.clone(),
            rule: self.rule.clone(),
        }
    }
}

impl<V: fmt::Debug> fmt::Debug for SetMap<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetMap").field("rule", &self.rule).finish()
    }
}

impl<V> SetMap<V>
where
    V: Clone + fmt::Debug + Send + Sync + 'static,
{
    /// `S(v)`.
    pub fn additive(rep: Arc<dyn Representation<Vector = V>>, v: V) -> Self {
        SetMap {
            rep,
            rule: Rule::Additive(v),
        }
    }

    pub fn additive_sequence<F>(rep: Arc<dyn Representation<Vector = V>>, name: &str, v: F) -> Self
    where
        F: Fn(usize) -> Result<V> + Send + Sync + 'static,
    {
        SetMap {
            rep,
            rule: Rule::AdditiveSequence {
                name: name.to_string(),
                v: Arc::new(v),
            },
        }
    }

    /// `v_n = v + n^{-rate}·w`.
    pub fn power_law_sequence(rep: Arc<dyn Representation<Vector = V>>, v: V, w: V, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::config("sequence rate must be positive"));
        }
        let r = rep.clone();
        Ok(Self::additive_sequence(rep, &format!("v + n^-{rate} w"), move |n| {
            r.add(&v, &r.scale(&w, (n as f64).powf(-rate)))
        }))
    }

    /// `F ↦ S_F v + |KF Δ F|·u`. Requires `π(g)u = u`, which keeps the map
    /// equivariant.
    pub fn boundary_perturbed(rep: Arc<dyn Representation<Vector = V>>, v: V, u: V, k: FiniteSubset) -> Result<Self> {
        if k.dim() != rep.group_dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.group_dim(),
                found: k.dim(),
            });
        }
        let scale = 1.0 + rep.norm(&u)?;
        for axis in 0..rep.group_dim() {
            let g = GroupElement::unit(rep.group_dim(), axis);
            let moved = rep.norm(&rep.sub(&rep.act(&g, &u)?, &u)?)?;
            if moved > 1e-12 * scale {
                return Err(Error::config(format!(
                    "boundary term u must be fixed by the representation (moves by {moved:e} along axis {axis})"
                )));
            }
        }
        rep.norm(&v)?;
        Ok(SetMap {
            rep,
            rule: Rule::BoundaryPerturbed { v, u, k },
        })
    }

    pub fn custom<F>(rep: Arc<dyn Representation<Vector = V>>, name: &str, eval: F) -> Self
    where
        F: Fn(&FiniteSubset) -> Result<V> + Send + Sync + 'static,
    {
        SetMap {
            rep,
            rule: Rule::Custom {
                name: name.to_string(),
                eval: Arc::new(eval),
            },
        }
    }

    /// `φ = Σ_n 1_{I_n} pieces[n]` where `I_n` holds the sets that are
    /// `pairs[n]`-invariant but not `pairs[n+1]`-invariant. Sets invariant
    /// for no pair go to `pieces[0]`.
    pub fn stitch(pieces: Vec<SetMap<V>>, pairs: Vec<InvariancePair>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::config("stitch needs at least one piece"));
        }
        if pieces.len() != pairs.len() {
            return Err(Error::config(format!(
                "stitch needs one invariance pair per piece ({} pieces, {} pairs)",
                pieces.len(),
                pairs.len()
            )));
        }
        let rep = pieces[0].rep.clone();
        if pieces.iter().any(|p| !Arc::ptr_eq(&p.rep, &rep)) {
            return Err(Error::config("stitched pieces must share one representation"));
        }
        if pairs.iter().any(|p| p.k.dim() != rep.group_dim()) {
            return Err(Error::config("invariance pairs must live in the acting group"));
        }
        if pairs.windows(2).any(|w| !w[0].strictly_precedes(&w[1])) {
            return Err(Error::config("invariance pairs must be strictly increasing"));
        }
        Ok(SetMap {
            rep,
            rule: Rule::Stitched { pieces, pairs },
        })
    }

    pub fn rep(&self) -> &Arc<dyn Representation<Vector = V>> {
        &self.rep
    }

    pub fn rule(&self) -> &Rule<V> {
        &self.rule
    }

    /// The piece index a stitched map uses on `f` (0 for other rules).
    pub fn level(&self, f: &FiniteSubset) -> usize {
        match &self.rule {
            Rule::Stitched { pairs, .. } => stitch_level(pairs, f),
            _ => 0,
        }
    }

    /// `φ(F)`.
    pub fn eval(&self, f: &FiniteSubset) -> Result<V> {
        if f.dim() != self.rep.group_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rep.group_dim(),
                found: f.dim(),
            });
        }
        match &self.rule {
            Rule::Additive(v) => self.rep.ergodic_sum(f, v),
            Rule::AdditiveSequence { v, .. } => self.rep.ergodic_sum(f, &v(f.len()).map_err(|e| wrap(f, e))?),
            Rule::BoundaryPerturbed { v, u, k } => {
                let count = k.minkowski_sum(f).symmetric_difference_size(f);
                self.rep
                    .add(&self.rep.ergodic_sum(f, v)?, &self.rep.scale(u, count as f64))
            }
            Rule::Stitched { pieces, pairs } => pieces[stitch_level(pairs, f)].eval(f),
            Rule::Custom { eval, .. } => eval(f).map_err(|e| wrap(f, e)),
        }
    }

    /// `φ(F)/|F|`.
    pub fn eval_normalized(&self, f: &FiniteSubset) -> Result<V> {
        Ok(self.rep.scale(&self.eval(f)?, 1.0 / f.len() as f64))
    }

    /// `S^{-1}`: the value on `{1_G}`, which generates `φ` when it is additive.
    pub fn generator(&self) -> Result<V> {
        self.eval(&FiniteSubset::identity(self.rep.group_dim()))
    }

    /// `a·self + b·other` evaluated pointwise.
    pub fn combine(&self, a: f64, other: &SetMap<V>, b: f64) -> Result<SetMap<V>> {
        if !Arc::ptr_eq(&self.rep, &other.rep) {
            return Err(Error::config("combined set maps must share one representation"));
        }
        let (x, y) = (self.clone(), other.clone());
        let rep = self.rep.clone();
        Ok(SetMap::custom(
            self.rep.clone(),
            &format!("{a}*phi1 + {b}*phi2"),
            move |f| rep.add(&rep.scale(&x.eval(f)?, a), &rep.scale(&y.eval(f)?, b)),
        ))
    }
}

fn wrap(f: &FiniteSubset, e: Error) -> Error {
    match e {
        Error::Evaluation { .. } | Error::ResourceCap { .. } => e,
        other => Error::Evaluation {
            set: format!("{f}"),
            message: other.to_string(),
        },
    }
}

fn stitch_level(pairs: &[InvariancePair], f: &FiniteSubset) -> usize {
    let inv: Vec<bool> = pairs.iter().map(|p| is_invariant(f, p)).collect();
    (0..pairs.len())
        .rev()
        .find(|&i| inv[i] && (i + 1 == pairs.len() || !inv[i + 1]))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::{MatrixRep, NormKind};
    use nalgebra::DVector;

    type Rep = Arc<dyn Representation<Vector = DVector<f64>>>;

    fn id2() -> Rep {
        Arc::new(MatrixRep::identity(1, 2, NormKind::Euclidean).unwrap())
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn additive_on_identity_is_generator() {
        let phi = SetMap::additive(Arc::new(MatrixRep::rotation(0.4)) as Rep, v(&[1.0, 2.0]));
        assert_eq!(phi.generator().unwrap(), v(&[1.0, 2.0]));
    }

    #[test]
    fn boundary_perturbed_counts_boundary() {
        let rep = id2();
        let phi = SetMap::boundary_perturbed(
            rep,
            v(&[1.0, 0.0]),
            v(&[0.0, 3.0]),
            FiniteSubset::interval(0, 2).unwrap(),
        )
        .unwrap();
        for n in 1..20 {
            let f = FiniteSubset::interval(0, n).unwrap();
            assert_eq!(phi.eval(&f).unwrap(), v(&[n as f64, 3.0]));
        }
    }

    #[test]
    fn boundary_term_must_be_invariant() {
        let rep: Rep = Arc::new(MatrixRep::diagonal(&[1.0, -1.0], NormKind::Euclidean).unwrap());
        let k = FiniteSubset::interval(0, 2).unwrap();
        assert!(SetMap::boundary_perturbed(rep.clone(), v(&[1.0, 1.0]), v(&[0.0, 1.0]), k.clone()).is_err());
        assert!(SetMap::boundary_perturbed(rep, v(&[1.0, 1.0]), v(&[1.0, 0.0]), k).is_ok());
    }

    #[test]
    fn additive_sequence_scales_sum() {
        let rep = id2();
        let base = v(&[2.0, -1.0]);
        let b = base.clone();
        let phi = SetMap::additive_sequence(rep, "(1+1/n)v", move |n| Ok(&b * (1.0 + 1.0 / n as f64)));
        let f = FiniteSubset::interval(0, 4).unwrap();
        assert_eq!(phi.eval(&f).unwrap(), &base * 5.0);
    }

    #[test]
    fn stitch_dispatches_by_level() {
        let rep = id2();
        let pieces: Vec<_> = (0..3)
            .map(|i| SetMap::additive(rep.clone(), v(&[i as f64, 0.0])))
            .collect();
        let k = FiniteSubset::interval(0, 2).unwrap();
        let pairs = vec![
            InvariancePair::new(k.clone(), 0.5).unwrap(),
            InvariancePair::new(k.clone(), 0.1).unwrap(),
            InvariancePair::new(k.clone(), 0.01).unwrap(),
        ];
        let phi = SetMap::stitch(pieces, pairs).unwrap();
        let level = |n: i64| phi.level(&FiniteSubset::interval(0, n).unwrap());
        assert_eq!(level(1), 0); // defect 1, invariant for no pair
        assert_eq!(level(2), 0);
        assert_eq!(level(10), 1);
        assert_eq!(level(100), 2);
        let f = FiniteSubset::interval(5, 25).unwrap();
        assert_eq!(phi.eval(&f).unwrap(), v(&[20.0, 0.0]));
    }

    #[test]
    fn stitch_validates_pairs() {
        let rep = id2();
        let piece = SetMap::additive(rep.clone(), v(&[0.0, 0.0]));
        let k = FiniteSubset::interval(0, 2).unwrap();
        let p = InvariancePair::new(k.clone(), 0.5).unwrap();
        assert!(SetMap::stitch(vec![piece.clone(), piece.clone()], vec![p.clone(), p.clone()]).is_err());
        assert!(SetMap::stitch(vec![piece.clone()], vec![]).is_err());
        let other = SetMap::additive(id2(), v(&[0.0, 0.0]));
        let q = InvariancePair::new(k, 0.1).unwrap();
        assert!(SetMap::stitch(vec![piece, other], vec![p, q]).is_err());
    }

    #[test]
    fn custom_errors_name_the_set() {
        let phi = SetMap::custom(id2(), "fails", |_| Err(Error::Numerical("boom".into())));
        match phi.eval(&FiniteSubset::interval(2, 4).unwrap()) {
            Err(Error::Evaluation { set, message }) => {
                assert!(set.contains('2'));
                assert!(message.contains("boom"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
