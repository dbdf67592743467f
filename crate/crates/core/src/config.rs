//! JSON run configurations and their conversion into toolkit objects.
//!
//! A configuration names a group dimension, a Følner schedule, exactly one of
//! a matrix representation (`rep`) or a subshift (`subshift`), and a set map
//! or a bare potential. Vectors are JSON arrays for matrix representations and
//! potential objects for subshifts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::group::{FiniteSubset, FolnerSchedule, GroupElement, InvariancePair};
use crate::representation::{KoopmanRep, MatrixRep, NormKind, Representation};
use crate::setmaps::{RealizeOptions, SetMap};
use crate::subshift::{LocalFunction, Subshift};
use crate::thermo::MeasureFamily;
use crate::{Error, Result};

/// Version tag carried by every output document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupConfig,
    #[serde(default)]
    pub folner: FolnerConfig,
    pub rep: Option<RepConfig>,
    pub subshift: Option<SubshiftConfig>,
    pub setmap: Option<SetMapConfig>,
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub options: OptionsConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoxConfig {
    #[default]
    Centered,
    Corner,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerConfig {
    #[serde(default)]
    pub kind: BoxConfig,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    /// Group elements `g` whose defects `|gF Δ F|/|F|` are reported; the
    /// unit vectors when absent.
    pub generators: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RepConfig {
    Identity {
        dim: usize,
        #[serde(default = "euclidean")]
        norm: NormKind,
    },
    /// Rotation of the plane by `angle` per unit step (`Z` only).
    Rotation { angle: f64 },
    /// `diag(entries)` per unit step (`Z` only).
    Diagonal {
        entries: Vec<f64>,
        #[serde(default = "euclidean")]
        norm: NormKind,
    },
    /// One square matrix (list of rows) per axis.
    Matrices {
        generators: Vec<Vec<Vec<f64>>>,
        #[serde(default = "euclidean")]
        norm: NormKind,
    },
}

fn euclidean() -> NormKind {
    NormKind::Euclidean
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubshiftConfig {
    Full {
        alphabet: Vec<String>,
        param_window: Option<Vec<Vec<i64>>>,
    },
    GoldenMean {
        param_window: Option<Vec<Vec<i64>>>,
    },
    /// One 0/1 transition matrix shared by all axes, or one per axis.
    NearestNeighbor {
        alphabet: Vec<String>,
        matrices: Vec<Vec<Vec<u8>>>,
        param_window: Option<Vec<Vec<i64>>>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Constant {
        value: f64,
    },
    /// `x ↦ values[x_0]`.
    SingleSite {
        values: Vec<f64>,
    },
    /// `x ↦ values[x_0][x_1]`.
    Pair {
        values: Vec<Vec<f64>>,
    },
    /// A table over words on `window`, first point most significant.
    Table {
        window: Vec<Vec<i64>>,
        table: Vec<f64>,
    },
}

/// A vector of the configured space.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum VectorConfig {
    Dense(Vec<f64>),
    Local(PotentialConfig),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub k: Vec<Vec<i64>>,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `g(n) = n`.
    Linear,
    /// `g(n) = n + √n`.
    LinearPlusSqrt,
    /// `g(n) = n (1 + a sin log n)`.
    SinLog,
}

impl Profile {
    pub fn eval(self, n: usize, amplitude: f64) -> f64 {
        let x = n as f64;
        match self {
            Profile::Linear => x,
            Profile::LinearPlusSqrt => x + x.sqrt(),
            Profile::SinLog => x * (1.0 + amplitude * x.ln().sin()),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetMapConfig {
    Additive {
        v: VectorConfig,
    },
    /// `F ↦ S_F(v + |F|^{-rate} w)`.
    AdditiveSequence {
        v: VectorConfig,
        w: VectorConfig,
        rate: f64,
    },
    /// `F ↦ S_F v + |KF Δ F|·u`.
    BoundaryPerturbed {
        v: VectorConfig,
        u: VectorConfig,
        k: Vec<Vec<i64>>,
    },
    Stitched {
        pieces: Vec<SetMapConfig>,
        pairs: Vec<PairConfig>,
    },
    /// Built-in evaluators: `constant` (`F ↦ value`) and `size_profile`
    /// (`F ↦ g(|F|)·value`).
    Custom {
        name: String,
        value: VectorConfig,
        profile: Option<Profile>,
        #[serde(default)]
        amplitude: f64,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    BernoulliGrid {
        #[serde(default = "default_step")]
        step: f64,
    },
    Markov {
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
}

fn default_step() -> f64 {
    1e-4
}

fn default_restarts() -> usize {
    20
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    /// Equivariance samples.
    pub samples: Option<usize>,
    pub eps: Option<Vec<f64>>,
    /// Basis of the target subspace `W` for relative realization.
    pub target: Option<Vec<VectorConfig>>,
    pub family: Option<FamilyConfig>,
    /// Compare pressures of a set map and its realization.
    pub realization_gap: Option<bool>,
}

/// The configured space.
#[derive(Clone)]
pub enum Space {
    Matrix(Arc<MatrixRep>),
    Koopman { x: Arc<Subshift>, rep: Arc<KoopmanRep> },
}

/// A configured set map in its space.
#[derive(Clone, Debug)]
pub enum BuiltSetMap {
    Matrix(SetMap<DVector<f64>>),
    Koopman(SetMap<LocalFunction>),
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {x}")))
    }
}

fn subset(dim: usize, points: &[Vec<i64>], what: &str) -> Result<FiniteSubset> {
    if points.iter().any(|p| p.len() != dim) {
        return Err(bad(format!("{what}: every point needs {dim} coordinates")));
    }
    FiniteSubset::from_points(dim, points.iter().map(|p| p.as_slice())).map_err(|e| bad(format!("{what}: {e}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.group.dim;
        if d == 0 || d > 2 {
            return Err(bad(format!("group dimension must be 1 or 2, got {d}")));
        }
        match (&self.rep, &self.subshift) {
            (Some(_), Some(_)) => return Err(bad("give exactly one of `rep` and `subshift`, not both")),
            (None, None) => return Err(bad("give exactly one of `rep` and `subshift`")),
            _ => {}
        }
        if self.setmap.is_some() && self.potential.is_some() {
            return Err(bad("give at most one of `setmap` and `potential`"));
        }
        if self.potential.is_some() && self.subshift.is_none() {
            return Err(bad("a bare `potential` needs a `subshift`"));
        }
        if let Some(t) = self.options.tol {
            positive("options.tol", t)?;
        }
        if let Some(eps) = &self.options.eps {
            if eps.is_empty() {
                return Err(bad("options.eps must not be empty"));
            }
            for &e in eps {
                positive("options.eps entries", e)?;
            }
        }
        if let Some(FamilyConfig::BernoulliGrid { step }) = &self.options.family {
            positive("options.family.step", *step)?;
        }
        if let (Some(a), Some(b)) = (self.folner.n_min, self.folner.n_max) {
            if a > b {
                return Err(bad(format!("folner.n_min {a} exceeds n_max {b}")));
            }
        }
        if let Some(gens) = &self.folner.generators {
            if gens.iter().any(|g| g.len() != d) {
                return Err(bad(format!("folner.generators need {d} coordinates each")));
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<FolnerSchedule> {
        let d = self.group.dim;
        let def = FolnerSchedule::default_for(d).range();
        let lo = self.folner.n_min.unwrap_or(match self.folner.kind {
            BoxConfig::Centered => def.0,
            BoxConfig::Corner => def.0.max(1),
        });
        let hi = self.folner.n_max.unwrap_or(def.1);
        match self.folner.kind {
            BoxConfig::Centered => FolnerSchedule::boxes(d, lo, hi),
            BoxConfig::Corner => FolnerSchedule::corner_boxes(d, lo, hi),
        }
    }

    /// Elements whose invariance defects the `folner` command reports.
    pub fn defect_generators(&self) -> Vec<GroupElement> {
        let d = self.group.dim;
        match &self.folner.generators {
            Some(gs) => gs.iter().map(|g| GroupElement::new(g.clone())).collect(),
            None => (0..d).map(|i| GroupElement::unit(d, i)).collect(),
        }
    }

    pub fn tol(&self) -> f64 {
        self.options.tol.unwrap_or(1e-6)
    }

    pub fn seed(&self) -> u64 {
        self.options.seed.unwrap_or(0)
    }

    pub fn realize_options(&self) -> RealizeOptions {
        let mut o = RealizeOptions::default();
        if let Some(eps) = &self.options.eps {
            o.eps = eps.clone();
        }
        o
    }

    pub fn family(&self) -> MeasureFamily {
        match &self.options.family {
            None => MeasureFamily::bernoulli_grid(),
            Some(FamilyConfig::BernoulliGrid { step }) => MeasureFamily::BernoulliGrid { step: *step },
            Some(FamilyConfig::Markov { restarts }) => MeasureFamily::Markov {
                restarts: *restarts,
                seed: self.seed(),
            },
        }
    }

    pub fn space(&self) -> Result<Space> {
        let d = self.group.dim;
        if let Some(rep) = &self.rep {
            let m = match rep {
                RepConfig::Identity { dim, norm } => MatrixRep::identity(d, *dim, *norm)?,
                RepConfig::Rotation { angle } => {
                    if d != 1 {
                        return Err(bad("rotation representations act through Z only"));
                    }
                    MatrixRep::rotation(*angle)
                }
                RepConfig::Diagonal { entries, norm } => {
                    if d != 1 {
                        return Err(bad("diagonal representations act through Z only"));
                    }
                    MatrixRep::diagonal(entries, *norm)?
                }
                RepConfig::Matrices { generators, norm } => {
                    if generators.len() != d {
                        return Err(bad(format!(
                            "need one generator per axis ({d}), got {}",
                            generators.len()
                        )));
                    }
                    let mats = generators
                        .iter()
                        .map(|rows| {
                            let n = rows.len();
                            if n == 0 || rows.iter().any(|r| r.len() != n) {
                                return Err(bad("generator matrices must be square and non-empty"));
                            }
                            Ok(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    MatrixRep::new(mats, *norm)?
                }
            };
            return Ok(Space::Matrix(Arc::new(m)));
        }
        let (x, window) = match self.subshift.as_ref().expect("validated") {
            SubshiftConfig::Full { alphabet, param_window } => (Subshift::full(alphabet.clone(), d)?, param_window),
            SubshiftConfig::GoldenMean { param_window } => {
                if d != 1 {
                    return Err(bad("the golden mean shift is one-dimensional; use nearest_neighbor"));
                }
                (Subshift::golden_mean(), param_window)
            }
            SubshiftConfig::NearestNeighbor {
                alphabet,
                matrices,
                param_window,
            } => (Subshift::nearest_neighbor(alphabet.clone(), d, matrices)?, param_window),
        };
        let window = match window {
            Some(p) => subset(d, p, "subshift.param_window")?,
            None if d == 1 => FiniteSubset::interval(0, 2)?,
            None => FiniteSubset::identity(d),
        };
        let x = Arc::new(x);
        let rep = Arc::new(KoopmanRep::new(x.clone(), window)?);
        Ok(Space::Koopman { x, rep })
    }

    /// The configured set map, or `S(potential)` for a bare potential.
    pub fn setmap(&self, space: &Space) -> Result<BuiltSetMap> {
        let d = self.group.dim;
        match (space, &self.setmap, &self.potential) {
            (Space::Koopman { x, rep }, None, Some(p)) => {
                let v = potential(p, d, x)?;
                Ok(BuiltSetMap::Koopman(SetMap::additive(rep.clone(), v)))
            }
            (_, None, _) => Err(bad("this command needs a `setmap` or `potential` block")),
            (Space::Matrix(rep), Some(cfg), _) => {
                let r: Arc<dyn Representation<Vector = DVector<f64>>> = rep.clone();
                let n = rep.dim();
                Ok(BuiltSetMap::Matrix(build(cfg, &r, d, &|v| dense(v, n))?))
            }
            (Space::Koopman { x, rep }, Some(cfg), _) => {
                let r: Arc<dyn Representation<Vector = LocalFunction>> = rep.clone();
                Ok(BuiltSetMap::Koopman(build(cfg, &r, d, &|v| local(v, d, x))?))
            }
        }
    }

    /// Basis of the relative target, for matrix representations.
    pub fn target_basis(&self, space: &Space) -> Result<Option<Vec<DVector<f64>>>> {
        let Some(basis) = &self.options.target else {
            return Ok(None);
        };
        match space {
            Space::Matrix(rep) => Ok(Some(basis.iter().map(|v| dense(v, rep.dim())).collect::<Result<_>>()?)),
            Space::Koopman { .. } => Err(bad("options.target is supported for matrix representations only")),
        }
    }
}

fn dense(v: &VectorConfig, n: usize) -> Result<DVector<f64>> {
    match v {
        VectorConfig::Dense(xs) if xs.len() == n => Ok(DVector::from_column_slice(xs)),
        VectorConfig::Dense(xs) => Err(bad(format!("vector has {} entries, representation has {n}", xs.len()))),
        VectorConfig::Local(_) => Err(bad("matrix representations take vectors as JSON arrays")),
    }
}

fn local(v: &VectorConfig, d: usize, x: &Subshift) -> Result<LocalFunction> {
    match v {
        VectorConfig::Local(p) => potential(p, d, x),
        VectorConfig::Dense(_) => Err(bad(
            "subshift vectors are potential objects such as {\"kind\": \"pair\", ...}",
        )),
    }
}

fn potential(p: &PotentialConfig, d: usize, x: &Subshift) -> Result<LocalFunction> {
    let k = x.alphabet_size();
    let f = match p {
        PotentialConfig::Zero => LocalFunction::zero(d, k)?,
        PotentialConfig::Constant { value } => LocalFunction::constant(d, k, *value)?,
        PotentialConfig::SingleSite { values } => LocalFunction::single_site(d, values)?,
        PotentialConfig::Pair { values } => {
            if d != 1 {
                return Err(bad("pair potentials are one-dimensional; use a table"));
            }
            LocalFunction::pair(values)?
        }
        PotentialConfig::Table { window, table } => {
            LocalFunction::new(subset(d, window, "potential.window")?, k, table.clone())?
        }
    };
    if f.alphabet_size() != k {
        return Err(bad(format!(
            "potential uses {} symbols, subshift has {k}",
            f.alphabet_size()
        )));
    }
    if f.table().iter().any(|v| !v.is_finite()) {
        return Err(bad("potential values must be finite"));
    }
    Ok(f)
}

fn build<V>(
    cfg: &SetMapConfig,
    rep: &Arc<dyn Representation<Vector = V>>,
    d: usize,
    vector: &dyn Fn(&VectorConfig) -> Result<V>,
) -> Result<SetMap<V>>
where
    V: Clone + std::fmt::Debug + Send + Sync + 'static,
{
    match cfg {
        SetMapConfig::Additive { v } => Ok(SetMap::additive(rep.clone(), vector(v)?)),
        SetMapConfig::AdditiveSequence { v, w, rate } => {
            positive("rate", *rate)?;
            SetMap::power_law_sequence(rep.clone(), vector(v)?, vector(w)?, *rate)
        }
        SetMapConfig::BoundaryPerturbed { v, u, k } => {
            SetMap::boundary_perturbed(rep.clone(), vector(v)?, vector(u)?, subset(d, k, "k")?)
        }
        SetMapConfig::Stitched { pieces, pairs } => {
            let pieces = pieces
                .iter()
                .map(|p| build(p, rep, d, vector))
                .collect::<Result<Vec<_>>>()?;
            let pairs = pairs
                .iter()
                .map(|p| InvariancePair::new(subset(d, &p.k, "pairs.k")?, p.delta))
                .collect::<Result<Vec<_>>>()?;
            SetMap::stitch(pieces, pairs)
        }
        SetMapConfig::Custom {
            name,
            value,
            profile,
            amplitude,
        } => {
            let value = vector(value)?;
            match (name.as_str(), profile) {
                ("constant", None) => Ok(SetMap::custom(rep.clone(), "constant", move |_| Ok(value.clone()))),
                ("size_profile", Some(p)) => {
                    let (p, a, r) = (*p, *amplitude, rep.clone());
                    Ok(SetMap::custom(rep.clone(), "size_profile", move |f| {
                        Ok(r.scale(&value, p.eval(f.len(), a)))
                    }))
                }
                ("constant", Some(_)) => Err(bad("the constant evaluator takes no profile")),
                ("size_profile", None) => Err(bad("size_profile needs a profile")),
                (other, _) => Err(bad(format!(
                    "unknown custom evaluator `{other}` (known: constant, size_profile)"
                ))),
            }
        }
    }
}
