use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::group::FolnerSchedule;
use crate::par;
use crate::setmaps::{realize, RealizeOptions, Rule, SetMap};
use crate::subshift::{enumerate_patterns, LocalFunction, Subshift};
use crate::{Error, Result};

use super::measure::{stationary_of, IntegralPlan, MarkovMeasure};
use super::pressure::{pressure, PressureMethod};

/// Search spaces of invariant measures.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasureFamily {
    /// Product measures with weights on the lattice of the given step.
    BernoulliGrid { step: f64 },
    /// Stationary chains on the allowed graph, by projected gradient ascent
    /// from seeded random starts.
    Markov { restarts: usize, seed: u64 },
}

impl MeasureFamily {
    pub fn bernoulli_grid() -> Self {
        MeasureFamily::BernoulliGrid { step: 1e-4 }
    }

    pub fn markov(seed: u64) -> Self {
        MeasureFamily::Markov { restarts: 20, seed }
    }
}

#[derive(Clone, Debug)]
pub struct VariationalOptions {
    /// Slack for `sup ≤ pressure`.
    pub tol: f64,
    /// The family is certified to reach the pressure within this gap.
    pub certificate_tol: f64,
    /// Gradient steps per restart.
    pub max_iter: usize,
    pub realize: RealizeOptions,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            tol: 1e-6,
            certificate_tol: 1e-6,
            max_iter: 5000,
            realize: RealizeOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSource {
    /// The generator of an additive map.
    Generator,
    /// An additive realization of the map.
    Realization,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    pub pressure: f64,
    pub pressure_method: PressureMethod,
    pub family: MeasureFamily,
    /// `sup h(μ) + ∫ψ dμ` over the family.
    pub family_sup: f64,
    pub argmax: MarkovMeasure,
    pub argmax_entropy: f64,
    pub argmax_integral: f64,
    /// `pressure - family_sup`.
    pub gap: f64,
    /// `gap ≥ -tol`.
    pub one_sided_ok: bool,
    /// `gap ≤ certificate_tol`.
    pub certified: bool,
    pub evaluated: usize,
    /// Grid step actually used (coarsened for large alphabets).
    pub effective_step: Option<f64>,
    pub potential_source: PotentialSource,
}

/// `h(μ) + ∫ψ dμ`.
pub fn variational_value(x: &Subshift, psi: &LocalFunction, mu: &MarkovMeasure) -> Result<f64> {
    mu.check_support(x)?;
    Ok(mu.entropy_rate() + mu.integral(x, psi)?)
}

/// Compares `sup_{μ ∈ family} h(μ) + lim ∫φ(F)/|F| dμ` with the pressure.
///
/// The limit of the integrals is `∫ψ dμ` for an additive realization `ψ` of
/// `φ`, which is the generator when `φ` is additive.
pub fn variational_certificate(
    x: &Subshift,
    phi: &SetMap<LocalFunction>,
    family: &MeasureFamily,
    schedule: &FolnerSchedule,
    opts: &VariationalOptions,
) -> Result<VariationalReport> {
    let (psi, potential_source) = match phi.rule() {
        Rule::Additive(v) => (v.clone(), PotentialSource::Generator),
        _ => (realize(phi, schedule, &opts.realize)?.v, PotentialSource::Realization),
    };
    let p = pressure(x, phi, schedule)?;
    let plan = IntegralPlan::new(x, &psi)?;
    let search = match family {
        MeasureFamily::BernoulliGrid { step } => bernoulli_grid(x, &psi, *step)?,
        MeasureFamily::Markov { restarts, seed } => markov_search(x, &plan, *restarts, *seed, opts.max_iter)?,
    };
    let argmax_entropy = search.best.entropy_rate();
    let argmax_integral = plan.integrate(&search.best);
    let family_sup = argmax_entropy + argmax_integral;
    let gap = p.limit_estimate - family_sup;
    Ok(VariationalReport {
        pressure: p.limit_estimate,
        pressure_method: p.method,
        family: family.clone(),
        family_sup,
        argmax: search.best,
        argmax_entropy,
        argmax_integral,
        gap,
        one_sided_ok: gap >= -opts.tol,
        certified: gap <= opts.certificate_tol,
        evaluated: search.evaluated,
        effective_step: search.step,
        potential_source,
    })
}

struct Search {
    best: MarkovMeasure,
    evaluated: usize,
    step: Option<f64>,
}

const GRID_POINT_CAP: u128 = 2_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn bernoulli_grid(x: &Subshift, psi: &LocalFunction, step: f64) -> Result<Search> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::config("grid step must lie in (0, 1]"));
    }
    let k = x.alphabet_size();
    let mut m = (1.0 / step).round().max(1.0) as usize;
    while m > 1 && binomial((m + k - 1) as u128, (k - 1) as u128) > GRID_POINT_CAP {
        m /= 2;
    }
    // ∫ψ dμ = Σ_c val_c Π_a w_a^{c_a} over symbol-count vectors c
    let words = enumerate_patterns(x, psi.window())?;
    let mut by_counts: BTreeMap<Vec<i32>, f64> = BTreeMap::new();
    for w in words.iter() {
        let mut c = vec![0i32; k];
        for &a in w {
            c[a as usize] += 1;
        }
        *by_counts.entry(c).or_insert(0.0) += psi.value(w);
    }
    let terms: Vec<(Vec<i32>, f64)> = by_counts.into_iter().collect();
    let compatible = |i: usize, j: usize| (0..x.dim()).all(|ax| x.allows(ax, i as u8, j as u8));
    let objective = |counts: &[usize]| -> Option<f64> {
        let charged: Vec<usize> = (0..k).filter(|&a| counts[a] > 0).collect();
        if charged.iter().any(|&a| !x.is_alive(a as u8))
            || charged.iter().any(|&a| charged.iter().any(|&b| !compatible(a, b)))
        {
            return None;
        }
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let h = -w.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        let integral: f64 = terms
            .iter()
            .map(|(c, v)| v * c.iter().zip(&w).map(|(&e, &p)| p.powi(e)).product::<f64>())
            .sum();
        Some(h + integral)
    };
    let firsts: Vec<usize> = (0..=m).collect();
    let results = par::map(&firsts, |&c0| {
        let mut counts = vec![0usize; k];
        counts[0] = c0;
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut evaluated = 0usize;
        compositions(&mut counts, 1, m - c0, &mut |c| {
            if let Some(v) = objective(c) {
                evaluated += 1;
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, c.to_vec()));
                }
            }
        });
        (best, evaluated)
    });
    let evaluated = results.iter().map(|r| r.1).sum();
    let best = results
        .into_iter()
        .filter_map(|r| r.0)
        .fold(None::<(f64, Vec<usize>)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::config("no product measure on the grid is supported on the subshift"))?;
    let weights = best.1.iter().map(|&c| c as f64 / m as f64).collect();
    Ok(Search {
        best: MarkovMeasure::product(weights, x.dim())?,
        evaluated,
        step: Some(1.0 / m as f64),
    })
}

fn compositions(counts: &mut Vec<usize>, i: usize, rest: usize, f: &mut impl FnMut(&[usize])) {
    if i + 1 >= counts.len() {
        if i < counts.len() {
            counts[i] = rest;
            f(counts);
        } else if rest == 0 {
            f(counts);
        }
        return;
    }
    for c in 0..=rest {
        counts[i] = c;
        compositions(counts, i + 1, rest - c, f);
    }
}

const FLOOR: f64 = 1e-12;

/// Free entries of a chain on the allowed graph.
struct ChainShape {
    k: usize,
    rows: Vec<(usize, Vec<usize>)>,
}

impl ChainShape {
    fn new(x: &Subshift) -> Self {
        let alive = x.alive_symbols();
        let rows = alive
            .iter()
            .map(|&a| {
                let succ = alive
                    .iter()
                    .filter(|&&b| x.allows(0, a, b))
                    .map(|&b| b as usize)
                    .collect();
                (a as usize, succ)
            })
            .collect();
        ChainShape {
            k: x.alphabet_size(),
            rows,
        }
    }

    fn len(&self) -> usize {
        self.rows.iter().map(|r| r.1.len()).sum()
    }

    /// Projects each row block onto `{q ≥ FLOOR, Σq = 1}`.
    fn project(&self, p: &mut [f64]) {
        let mut off = 0;
        for (_, succ) in &self.rows {
            let block = &mut p[off..off + succ.len()];
            project_simplex(block, FLOOR);
            off += succ.len();
        }
    }

    fn measure(&self, p: &[f64]) -> Option<MarkovMeasure> {
        let alive: Vec<usize> = self.rows.iter().map(|r| r.0).collect();
        let na = alive.len();
        let pos = |a: usize| alive.iter().position(|&b| b == a).expect("alive");
        let mut sub = vec![vec![0.0; na]; na];
        let mut off = 0;
        for (i, (_, succ)) in self.rows.iter().enumerate() {
            for (t, &b) in succ.iter().enumerate() {
                sub[i][pos(b)] = p[off + t];
            }
            off += succ.len();
        }
        let pi = stationary_of(&sub).ok()?;
        if pi.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut stationary = vec![0.0; self.k];
        let mut transition = vec![vec![0.0; self.k]; self.k];
        for a in 0..self.k {
            transition[a][a] = 1.0;
        }
        for i in 0..na {
            stationary[alive[i]] = pi[i];
            transition[alive[i]][alive[i]] = 0.0;
            for j in 0..na {
                transition[alive[i]][alive[j]] = sub[i][j];
            }
        }
        Some(MarkovMeasure::Markov { stationary, transition })
    }
}

fn project_simplex(v: &mut [f64], floor: f64) {
    let n = v.len();
    let mass = 1.0 - floor * n as f64;
    let mut u: Vec<f64> = v.iter().map(|&x| x - floor).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - mass) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - floor - theta).max(0.0) + floor;
    }
}

fn markov_search(x: &Subshift, plan: &IntegralPlan, restarts: usize, seed: u64, max_iter: usize) -> Result<Search> {
    if x.dim() != 1 {
        return Err(Error::config("the Markov family needs a one-dimensional subshift"));
    }
    if restarts == 0 {
        return Err(Error::config("at least one restart is required"));
    }
    let shape = ChainShape::new(x);
    let objective = |p: &[f64]| -> Option<(f64, MarkovMeasure)> {
        let mu = shape.measure(p)?;
        let v = mu.entropy_rate() + plan.integrate(&mu);
        v.is_finite().then_some((v, mu))
    };
    let starts: Vec<u64> = (0..restarts as u64).collect();
    let runs = par::map(&starts, |&r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
        let mut p: Vec<f64> = (0..shape.len()).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let mut off = 0;
        for (_, succ) in &shape.rows {
            let s: f64 = p[off..off + succ.len()].iter().sum();
            p[off..off + succ.len()].iter_mut().for_each(|q| *q /= s);
            off += succ.len();
        }
        shape.project(&mut p);
        let mut evaluated = 1;
        let Some((mut f0, _)) = objective(&p) else {
            return (None, evaluated);
        };
        let mut t: f64 = 1.0;
        for _ in 0..max_iter {
            let h = 1e-7;
            let grad: Vec<f64> = (0..p.len())
                .map(|i| {
                    let mut up = p.clone();
                    let mut dn = p.clone();
                    let lo = (p[i] - h).max(0.0);
                    up[i] += h;
                    dn[i] = lo;
                    evaluated += 2;
                    match (objective(&up), objective(&dn)) {
                        (Some((a, _)), Some((b, _))) => (a - b) / (p[i] + h - lo),
                        _ => 0.0,
                    }
                })
                .collect();
            let mut accepted = None;
            t = (t * 2.0).min(1e3);
            while t > 1e-14 {
                let mut q: Vec<f64> = p.iter().zip(&grad).map(|(a, g)| a + t * g).collect();
                shape.project(&mut q);
                let dot: f64 = grad.iter().zip(q.iter().zip(&p)).map(|(g, (a, b))| g * (a - b)).sum();
                evaluated += 1;
                if let Some((f1, _)) = objective(&q) {
                    if f1 >= f0 + 1e-4 * dot && dot > 0.0 {
                        accepted = Some((q, f1));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((q, f1)) = accepted else { break };
            let moved = q.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            p = q;
            let gain = f1 - f0;
            f0 = f1;
            if moved < 1e-13 || gain < 1e-16 {
                break;
            }
        }
        (objective(&p), evaluated)
    });
    let evaluated = runs.iter().map(|r| r.1).sum();
    let best = runs
        .into_iter()
        .filter_map(|r| r.0)
        .fold(None::<(f64, MarkovMeasure)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::Numerical("no restart produced an ergodic chain".into()))?;
    let best = match &best.1 {
        MarkovMeasure::Markov { stationary, transition } => {
            MarkovMeasure::markov(stationary.clone(), transition.clone()).unwrap_or(best.1)
        }
        other => other.clone(),
    };
    Ok(Search {
        best,
        evaluated,
        step: None,
    })
}
