use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::group::{folner_window, ConvergenceReport, FiniteSubset, FolnerSchedule, LimitOptions, SeriesPoint};
use crate::setmaps::{Rule, SetMap};
use crate::subshift::{count_patterns, enumerate_patterns, LocalFunction, PatternSet, Subshift, DEFAULT_CAP};
use crate::{Error, Result};

const MEASURE_TOL: f64 = 1e-12;

/// A shift-invariant measure with explicit cylinder probabilities: a
/// stationary Markov chain on `Z` or an i.i.d. product on `Z^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkovMeasure {
    Markov {
        stationary: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    Product {
        weights: Vec<f64>,
        dim: usize,
    },
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(x >= -MEASURE_TOL) || !x.is_finite()) {
        return Err(Error::config(format!("{what} must be finite and non-negative")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > MEASURE_TOL {
        return Err(Error::config(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

impl MarkovMeasure {
    pub fn markov(stationary: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let k = stationary.len();
        check_distribution(&stationary, "stationary distribution")?;
        if transition.len() != k || transition.iter().any(|r| r.len() != k) {
            return Err(Error::config("transition matrix must be k x k"));
        }
        for (i, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("transition row {i}"))?;
        }
        for j in 0..k {
            let pj: f64 = (0..k).map(|i| stationary[i] * transition[i][j]).sum();
            if (pj - stationary[j]).abs() > MEASURE_TOL {
                return Err(Error::config(format!(
                    "stationary distribution is not invariant at symbol {j}: {pj} vs {}",
                    stationary[j]
                )));
            }
        }
        Ok(MarkovMeasure::Markov { stationary, transition })
    }

    pub fn product(weights: Vec<f64>, dim: usize) -> Result<Self> {
        check_distribution(&weights, "product weights")?;
        if dim == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        Ok(MarkovMeasure::Product { weights, dim })
    }

    /// Bernoulli measure on two symbols with `P(1) = q`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        Self::product(vec![1.0 - q, q], 1)
    }

    /// Stationary chain of a row-stochastic `transition`, solving `pP = p`.
    pub fn from_transition(transition: Vec<Vec<f64>>) -> Result<Self> {
        let p = stationary_of(&transition)?;
        Self::markov(p, transition)
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            MarkovMeasure::Markov { stationary, .. } => stationary.len(),
            MarkovMeasure::Product { weights, .. } => weights.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MarkovMeasure::Markov { .. } => 1,
            MarkovMeasure::Product { dim, .. } => *dim,
        }
    }

    /// One-site marginal.
    pub fn marginal(&self) -> &[f64] {
        match self {
            MarkovMeasure::Markov { stationary, .. } => stationary,
            MarkovMeasure::Product { weights, .. } => weights,
        }
    }

    /// Fails with [`Error::SupportMismatch`] when the measure charges
    /// configurations outside `x`.
    pub fn check_support(&self, x: &Subshift) -> Result<()> {
        if x.alphabet_size() != self.alphabet_size() || x.dim() != self.dim() {
            return Err(Error::SupportMismatch(format!(
                "measure on {} symbols in dimension {} used on a subshift with {} symbols in dimension {}",
                self.alphabet_size(),
                self.dim(),
                x.alphabet_size(),
                x.dim()
            )));
        }
        let p = self.marginal();
        let k = p.len();
        for a in 0..k {
            if p[a] > 0.0 && !x.is_alive(a as u8) {
                return Err(Error::SupportMismatch(format!("symbol {a} charged but never occurs")));
            }
        }
        match self {
            MarkovMeasure::Markov { transition, .. } => {
                for i in (0..k).filter(|&i| p[i] > 0.0) {
                    for j in (0..k).filter(|&j| transition[i][j] > 0.0) {
                        if !x.allows(0, i as u8, j as u8) {
                            return Err(Error::SupportMismatch(format!("transition {i} -> {j} is forbidden")));
                        }
                    }
                }
            }
            MarkovMeasure::Product { .. } => {
                for axis in 0..x.dim() {
                    for i in (0..k).filter(|&i| p[i] > 0.0) {
                        for j in (0..k).filter(|&j| p[j] > 0.0) {
                            if !x.allows(axis, i as u8, j as u8) {
                                return Err(Error::SupportMismatch(format!(
                                    "charged symbols {i}, {j} may not be adjacent along axis {axis}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `h(μ)`: `-Σ p_i P_ij log P_ij` or `-Σ p_a log p_a`.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            MarkovMeasure::Markov { stationary, transition } => stationary
                .iter()
                .zip(transition)
                .map(|(&pi, row)| pi * entropy_of(row))
                .sum(),
            MarkovMeasure::Product { weights, .. } => entropy_of(weights),
        }
    }

    /// `μ([w])` for a word on `support`.
    pub fn probability(&self, support: &FiniteSubset, word: &[u8]) -> Result<f64> {
        if support.dim() != self.dim() || word.len() != support.len() {
            return Err(Error::config("word does not match its support"));
        }
        Ok(Cylinders::new(self, support).probability(word))
    }

    /// `H_μ(F) = -Σ_w μ[w] log μ[w]` over the patterns of `x` on `F`.
    ///
    /// Past the pattern cap the chain rule is used where it is exact: `|F|
    /// H(p)` for products and `H(p) + (|F| - 1) h` for Markov chains on
    /// intervals.
    pub fn block_entropy(&self, x: &Subshift, f: &FiniteSubset) -> Result<f64> {
        let count = count_patterns(x, f);
        if count > DEFAULT_CAP {
            return match self {
                MarkovMeasure::Product { weights, .. } => Ok(f.len() as f64 * entropy_of(weights)),
                MarkovMeasure::Markov { stationary, .. } if f.is_interval() => {
                    Ok(entropy_of(stationary) + (f.len() - 1) as f64 * self.entropy_rate())
                }
                _ => Err(Error::ResourceCap {
                    what: format!("patterns on {f}"),
                    count,
                    cap: DEFAULT_CAP,
                }),
            };
        }
        let words = enumerate_patterns(x, f)?;
        let cyl = Cylinders::new(self, f);
        let terms: Vec<f64> = words
            .iter()
            .map(|w| {
                let m = cyl.probability(w);
                if m > 0.0 {
                    -m * m.ln()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(crate::par::tree_sum(&terms))
    }

    /// `∫ψ dμ`.
    pub fn integral(&self, x: &Subshift, psi: &LocalFunction) -> Result<f64> {
        Ok(IntegralPlan::new(x, psi)?.integrate(self))
    }
}

/// Cylinder probabilities on a fixed support.
struct Cylinders<'a> {
    measure: &'a MarkovMeasure,
    /// Transition powers between consecutive support points.
    steps: Vec<DMatrix<f64>>,
}

impl<'a> Cylinders<'a> {
    fn new(measure: &'a MarkovMeasure, support: &FiniteSubset) -> Self {
        let steps = match measure {
            MarkovMeasure::Markov { transition, .. } => {
                let k = transition.len();
                let p = DMatrix::from_fn(k, k, |i, j| transition[i][j]);
                let mut cache: BTreeMap<i64, DMatrix<f64>> = BTreeMap::new();
                support
                    .flat()
                    .windows(2)
                    .map(|w| {
                        let gap = w[1] - w[0];
                        cache.entry(gap).or_insert_with(|| p.pow(gap as u32)).clone()
                    })
                    .collect()
            }
            MarkovMeasure::Product { .. } => Vec::new(),
        };
        Cylinders { measure, steps }
    }

    fn probability(&self, word: &[u8]) -> f64 {
        match self.measure {
            MarkovMeasure::Markov { stationary, .. } => {
                let mut m = stationary[word[0] as usize];
                for (s, w) in self.steps.iter().zip(word.windows(2)) {
                    m *= s[(w[0] as usize, w[1] as usize)];
                }
                m
            }
            MarkovMeasure::Product { weights, .. } => word.iter().map(|&a| weights[a as usize]).product(),
        }
    }
}

/// Patterns and values of a local function, reused across measures.
pub(crate) struct IntegralPlan {
    support: FiniteSubset,
    words: PatternSet,
    values: Vec<f64>,
}

impl IntegralPlan {
    pub(crate) fn new(x: &Subshift, psi: &LocalFunction) -> Result<Self> {
        let words = enumerate_patterns(x, psi.window())?;
        let values = words.iter().map(|w| psi.value(w)).collect();
        Ok(IntegralPlan {
            support: psi.window().clone(),
            words,
            values,
        })
    }

    pub(crate) fn integrate(&self, mu: &MarkovMeasure) -> f64 {
        let cyl = Cylinders::new(mu, &self.support);
        let terms: Vec<f64> = self
            .words
            .iter()
            .zip(&self.values)
            .map(|(w, &v)| {
                let m = cyl.probability(w);
                if m > 0.0 {
                    m * v
                } else {
                    0.0
                }
            })
            .collect();
        crate::par::tree_sum(&terms)
    }
}

/// Solves `pP = p`, `Σp = 1`.
pub(crate) fn stationary_of(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = transition.len();
    if k == 0 || transition.iter().any(|r| r.len() != k) {
        return Err(Error::config("transition matrix must be square and non-empty"));
    }
    let mut a = DMatrix::from_fn(k, k, |i, j| transition[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut b = DVector::zeros(k);
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    b[k - 1] = 1.0;
    let p = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("stationary distribution is not unique".into()))?;
    Ok(p.iter().map(|&x| x.max(0.0)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    /// `H_μ(F_n)/|F_n|`.
    pub series: ConvergenceReport,
    /// `h(μ)` in closed form.
    pub closed_form: f64,
}

/// `h(μ) = lim H_μ(F)/|F|` along a schedule, with the closed form alongside.
pub fn ks_entropy(x: &Subshift, mu: &MarkovMeasure, schedule: &FolnerSchedule) -> Result<EntropyReport> {
    mu.check_support(x)?;
    let window = folner_window(schedule)?;
    let mut pts = Vec::with_capacity(window.len());
    for (n, f) in schedule.indices().zip(window) {
        let h = mu.block_entropy(x, &f)?;
        pts.push(SeriesPoint {
            n,
            size: f.len(),
            value: h / f.len() as f64,
        });
    }
    Ok(EntropyReport {
        series: ConvergenceReport::from_series(pts, x.dim(), &LimitOptions::default())?,
        closed_form: mu.entropy_rate(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralReport {
    /// `∫φ(F_n)dμ / |F_n|`.
    pub series: ConvergenceReport,
    /// `∫ψ dμ` for the realization `ψ` when one was available.
    pub realized: Option<f64>,
}

/// `lim ∫φ(F)/|F| dμ` along a schedule.
///
/// `realized` defaults to the generator of an additive map.
pub fn integral_of_setmap(
    x: &Subshift,
    phi: &SetMap<LocalFunction>,
    mu: &MarkovMeasure,
    schedule: &FolnerSchedule,
    realized: Option<&LocalFunction>,
) -> Result<IntegralReport> {
    mu.check_support(x)?;
    let window = folner_window(schedule)?;
    let mut pts = Vec::with_capacity(window.len());
    for (n, f) in schedule.indices().zip(window) {
        let v = phi.eval(&f)?;
        pts.push(SeriesPoint {
            n,
            size: f.len(),
            value: mu.integral(x, &v)? / f.len() as f64,
        });
    }
    let realized = match (realized, phi.rule()) {
        (Some(psi), _) => Some(mu.integral(x, psi)?),
        (None, Rule::Additive(v)) => Some(mu.integral(x, v)?),
        (None, Rule::BoundaryPerturbed { v, .. }) => Some(mu.integral(x, v)?),
        _ => None,
    };
    Ok(IntegralReport {
        series: ConvergenceReport::from_series(pts, x.dim(), &LimitOptions::default())?,
        realized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_entropy_is_constant_per_site() {
        let x = Subshift::full_k(2, 1).unwrap();
        let mu = MarkovMeasure::bernoulli(0.5).unwrap();
        let sched = FolnerSchedule::corner_boxes(1, 1, 10).unwrap();
        let r = ks_entropy(&x, &mu, &sched).unwrap();
        assert!(r.series.series.iter().all(|p| (p.value - 2f64.ln()).abs() < 1e-12));
    }

    #[test]
    fn gapped_support_marginalizes() {
        let t = vec![vec![0.9, 0.1], vec![0.4, 0.6]];
        let mu = MarkovMeasure::from_transition(t).unwrap();
        let gapped = FiniteSubset::from_points(1, [[0i64], [2]]).unwrap();
        let full = FiniteSubset::interval(0, 3).unwrap();
        for a in 0..2u8 {
            for b in 0..2u8 {
                let direct = mu.probability(&gapped, &[a, b]).unwrap();
                let summed: f64 = (0..2u8).map(|m| mu.probability(&full, &[a, m, b]).unwrap()).sum();
                assert!((direct - summed).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn product_measure_on_golden_mean_is_rejected() {
        let x = Subshift::golden_mean();
        assert!(matches!(
            MarkovMeasure::bernoulli(0.3).unwrap().check_support(&x),
            Err(Error::SupportMismatch(_))
        ));
        assert!(MarkovMeasure::bernoulli(0.0).unwrap().check_support(&x).is_ok());
    }

    #[test]
    fn invalid_chains_are_rejected() {
        assert!(MarkovMeasure::markov(vec![0.5, 0.5], vec![vec![0.9, 0.1], vec![0.4, 0.6]]).is_err());
        assert!(MarkovMeasure::from_transition(vec![vec![0.9, 0.2], vec![0.4, 0.6]]).is_err());
    }
}
