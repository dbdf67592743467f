use crate::group::{FiniteSubset, GroupElement};
use crate::par;
use crate::{Error, Result};

use super::pattern::{enumerate_patterns, Pattern};
use super::Subshift;

/// Default cap on pattern counts and table sizes.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// A function on `A^{Z^d}` that reads only the coordinates in `window`.
///
/// `table` is indexed by words on the window in lexicographic order with the
/// first window point most significant. Entries for words that do not occur
/// in a given subshift are carried along but never read by subshift-aware
/// operations.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFunction {
    window: FiniteSubset,
    alphabet_size: usize,
    table: Vec<f64>,
}

/// Locally constant potentials are local functions.
pub type Potential = LocalFunction;

fn table_len(k: usize, m: usize) -> Result<usize> {
    let len = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if len > DEFAULT_CAP {
        return Err(Error::ResourceCap {
            what: "local function table".into(),
            count: len,
            cap: DEFAULT_CAP,
        });
    }
    Ok(len as usize)
}

/// Calls `f(index, word)` for every word in `start..end`.
fn for_words(k: usize, m: usize, start: usize, end: usize, mut f: impl FnMut(usize, &[u8])) {
    let mut word = vec![0u8; m];
    let mut r = start;
    for slot in word.iter_mut().rev() {
        *slot = (r % k) as u8;
        r /= k;
    }
    for idx in start..end {
        f(idx, &word);
        for slot in word.iter_mut().rev() {
            *slot += 1;
            if (*slot as usize) < k {
                break;
            }
            *slot = 0;
        }
    }
}

const CHUNK: usize = 4096;

impl LocalFunction {
    pub fn new(window: FiniteSubset, alphabet_size: usize, table: Vec<f64>) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::config("alphabet must be non-empty"));
        }
        let len = table_len(alphabet_size, window.len())?;
        if table.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: table.len(),
            });
        }
        Ok(LocalFunction {
            window,
            alphabet_size,
            table,
        })
    }

    pub fn from_fn(window: FiniteSubset, alphabet_size: usize, f: impl Fn(&[u8]) -> f64 + Sync) -> Result<Self> {
        let m = window.len();
        let len = table_len(alphabet_size, m)?;
        let starts: Vec<usize> = (0..len).step_by(CHUNK).collect();
        let chunks = par::map(&starts, |&s| {
            let mut out = Vec::with_capacity(CHUNK);
            for_words(alphabet_size, m, s, (s + CHUNK).min(len), |_, w| out.push(f(w)));
            out
        });
        Self::new(window, alphabet_size, chunks.concat())
    }

    pub fn constant(dim: usize, alphabet_size: usize, c: f64) -> Result<Self> {
        Self::new(FiniteSubset::identity(dim), alphabet_size, vec![c; alphabet_size])
    }

    pub fn zero(dim: usize, alphabet_size: usize) -> Result<Self> {
        Self::constant(dim, alphabet_size, 0.0)
    }

    /// `x ↦ values[x_0]`.
    pub fn single_site(dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(FiniteSubset::identity(dim), values.len(), values.to_vec())
    }

    /// `x ↦ values[x_0][x_1]` on `Z`.
    pub fn pair(values: &[Vec<f64>]) -> Result<Self> {
        let k = values.len();
        if values.iter().any(|r| r.len() != k) {
            return Err(Error::config("pair potential table must be square"));
        }
        Self::new(FiniteSubset::interval(0, 2)?, k, values.concat())
    }

    pub fn window(&self) -> &FiniteSubset {
        &self.window
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn index_of_word(&self, word: &[u8]) -> usize {
        word.iter()
            .fold(0usize, |acc, &s| acc * self.alphabet_size + s as usize)
    }

    /// Value at any configuration whose restriction to the window is `word`.
    pub fn value(&self, word: &[u8]) -> f64 {
        self.table[self.index_of_word(word)]
    }

    /// Value at a configuration given as a coordinate lookup.
    pub fn eval(&self, x: impl Fn(&[i64]) -> u8) -> f64 {
        let idx = self
            .window
            .points()
            .fold(0usize, |acc, p| acc * self.alphabet_size + x(p) as usize);
        self.table[idx]
    }

    /// `π(g)φ = φ(g^{-1}·)`: the same table on the window translated by `-g`.
    pub fn translate(&self, g: &GroupElement) -> Self {
        LocalFunction {
            window: self.window.shifted_by_inverse(g),
            alphabet_size: self.alphabet_size,
            table: self.table.clone(),
        }
    }

    /// The same function re-tabulated on a larger window.
    pub fn extend_to(&self, window: &FiniteSubset) -> Result<Self> {
        if window == &self.window {
            return Ok(self.clone());
        }
        if !self.window.is_subset(window) {
            return Err(Error::config(format!(
                "window {:?} does not contain {:?}",
                window, self.window
            )));
        }
        let pos: Vec<usize> = self
            .window
            .points()
            .map(|p| window.index_of(p).expect("subset"))
            .collect();
        Self::from_fn(window.clone(), self.alphabet_size, |w| {
            let idx = pos
                .iter()
                .fold(0usize, |acc, &i| acc * self.alphabet_size + w[i] as usize);
            self.table[idx]
        })
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        if self.alphabet_size != other.alphabet_size {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet_size,
                found: other.alphabet_size,
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.window == other.window {
            let table = self.table.iter().zip(&other.table).map(|(&a, &b)| f(a, b)).collect();
            return Ok(LocalFunction {
                window: self.window.clone(),
                alphabet_size: self.alphabet_size,
                table,
            });
        }
        let u = self.window.union(&other.window);
        let a = self.extend_to(&u)?;
        let b = other.extend_to(&u)?;
        a.combine(&b, f)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        LocalFunction {
            window: self.window.clone(),
            alphabet_size: self.alphabet_size,
            table: self.table.iter().map(|&a| c * a).collect(),
        }
    }

    /// `S_F φ = Σ_{g∈F} π(g^{-1})φ`, tabulated on `F + W`.
    pub fn ergodic_sum(&self, f: &FiniteSubset) -> Result<Self> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.dim(),
            });
        }
        let k = self.alphabet_size;
        let big = f.minkowski_sum(&self.window);
        let m = big.len();
        let len = table_len(k, m)?;
        // positions[g][j] = index in F + W of g + w_j
        let positions: Vec<Vec<usize>> = f
            .points()
            .map(|g| {
                self.window
                    .points()
                    .map(|w| {
                        let p: Vec<i64> = g.iter().zip(w).map(|(a, b)| a + b).collect();
                        big.index_of(&p).expect("in F + W")
                    })
                    .collect()
            })
            .collect();
        let starts: Vec<usize> = (0..len).step_by(CHUNK).collect();
        let chunks = par::map(&starts, |&s| {
            let mut out = Vec::with_capacity(CHUNK);
            for_words(k, m, s, (s + CHUNK).min(len), |_, word| {
                let mut acc = 0.0;
                for pos in &positions {
                    let idx = pos.iter().fold(0usize, |a, &i| a * k + word[i] as usize);
                    acc += self.table[idx];
                }
                out.push(acc);
            });
            out
        });
        Ok(LocalFunction {
            window: big,
            alphabet_size: k,
            table: chunks.concat(),
        })
    }

    /// Sup norm over the configurations of `x`.
    pub fn sup_norm(&self, x: &Subshift) -> Result<f64> {
        self.check_subshift(x)?;
        let words = enumerate_patterns(x, &self.window)?;
        Ok(words.iter().map(|w| self.value(w).abs()).fold(0.0, f64::max))
    }

    /// `sup |φ(x) - φ(y)|` over `x, y ∈ X` with `x(1_G) = y(1_G)`.
    pub fn oscillation(&self, x: &Subshift) -> Result<f64> {
        self.check_subshift(x)?;
        let origin = vec![0i64; self.dim()];
        let u = self.window.union(&FiniteSubset::identity(self.dim()));
        let ext = self.extend_to(&u)?;
        let o = u.index_of(&origin).expect("origin in window");
        let words = enumerate_patterns(x, &u)?;
        let k = self.alphabet_size;
        let mut lo = vec![f64::INFINITY; k];
        let mut hi = vec![f64::NEG_INFINITY; k];
        for w in words.iter() {
            let v = ext.value(w);
            let a = w[o] as usize;
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
        Ok((0..k)
            .filter(|&a| hi[a] >= lo[a])
            .map(|a| hi[a] - lo[a])
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_subshift(&self, x: &Subshift) -> Result<()> {
        if x.alphabet_size() != self.alphabet_size {
            return Err(Error::DimensionMismatch {
                expected: x.alphabet_size(),
                found: self.alphabet_size,
            });
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Domain(usize),
    Collar(usize),
}

/// Evaluates `sup{ψ(x) : x ∈ X, x_F = w }` for a fixed local function `ψ`
/// and domain `F`, maximizing over admissible completions on the collar.
///
/// In dimension one the collar is the gap-free hull of `F ∪ W` minus `F`, so
/// that every admissible collar word extends; in dimension two it is `W \ F`
/// and completions are only locally checked.
pub struct CylinderSup<'a> {
    x: &'a Subshift,
    psi: &'a LocalFunction,
    slots: Vec<Slot>,
    domain_len: usize,
    /// For each collar point, the neighbours already fixed when it is filled:
    /// (slot, axis, neighbour comes before the collar point along the axis).
    checks: Vec<Vec<(Slot, usize, bool)>>,
    collar_len: usize,
    alive: Vec<u8>,
}

impl<'a> CylinderSup<'a> {
    pub fn new(x: &'a Subshift, psi: &'a LocalFunction, domain: &FiniteSubset) -> Result<Self> {
        psi.check_subshift(x)?;
        if domain.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: domain.dim(),
            });
        }
        let d = x.dim();
        let reach = psi.window().union(domain);
        let region = if d == 1 && !x.is_full() { reach.hull() } else { reach };
        let collar: Vec<Vec<i64>> = region
            .points()
            .filter(|p| !domain.contains(p))
            .map(|p| p.to_vec())
            .collect();
        let k = x.alive_symbols().len().max(1) as u128;
        let completions = k.checked_pow(collar.len() as u32).unwrap_or(u128::MAX);
        if completions > DEFAULT_CAP {
            return Err(Error::ResourceCap {
                what: "cylinder collar completions".into(),
                count: completions,
                cap: DEFAULT_CAP,
            });
        }
        let locate = |p: &[i64]| -> Option<Slot> {
            if let Some(i) = domain.index_of(p) {
                return Some(Slot::Domain(i));
            }
            collar.binary_search_by(|c| c.as_slice().cmp(p)).ok().map(Slot::Collar)
        };
        let slots = psi
            .window()
            .points()
            .map(|p| locate(p).expect("window covered"))
            .collect();
        let mut checks = Vec::with_capacity(collar.len());
        for (ci, c) in collar.iter().enumerate() {
            let mut list = Vec::new();
            if !x.is_full() {
                for axis in 0..d {
                    for (delta, before) in [(-1i64, true), (1, false)] {
                        let mut q = c.clone();
                        q[axis] += delta;
                        match locate(&q) {
                            Some(Slot::Domain(j)) => list.push((Slot::Domain(j), axis, before)),
                            Some(Slot::Collar(j)) if j < ci => list.push((Slot::Collar(j), axis, before)),
                            _ => {}
                        }
                    }
                }
            }
            checks.push(list);
        }
        Ok(CylinderSup {
            x,
            psi,
            slots,
            domain_len: domain.len(),
            checks,
            collar_len: collar.len(),
            alive: x.alive_symbols(),
        })
    }

    /// The supremum over the cylinder of `w`, or `-inf` when no admissible
    /// completion exists.
    pub fn sup(&self, w: &[u8]) -> f64 {
        debug_assert_eq!(w.len(), self.domain_len);
        let mut collar = vec![0u8; self.collar_len];
        let mut word = vec![0u8; self.slots.len()];
        self.rec(w, &mut collar, 0, &mut word)
    }

    fn read(&self, w: &[u8], collar: &[u8], s: Slot) -> u8 {
        match s {
            Slot::Domain(i) => w[i],
            Slot::Collar(i) => collar[i],
        }
    }

    fn rec(&self, w: &[u8], collar: &mut Vec<u8>, i: usize, word: &mut [u8]) -> f64 {
        if i == self.collar_len {
            for (slot, out) in self.slots.iter().zip(word.iter_mut()) {
                *out = self.read(w, collar, *slot);
            }
            return self.psi.value(word);
        }
        let mut best = f64::NEG_INFINITY;
        for &s in &self.alive {
            let ok = self.checks[i].iter().all(|&(slot, axis, before)| {
                let n = self.read(w, collar, slot);
                if before {
                    self.x.allows(axis, n, s)
                } else {
                    self.x.allows(axis, s, n)
                }
            });
            if ok {
                collar[i] = s;
                best = best.max(self.rec(w, collar, i + 1, word));
            }
        }
        best
    }
}

/// `sup{ S_F φ(x) : x ∈ [w] }`.
pub fn sup_on_cylinder(x: &Subshift, phi: &Potential, f: &FiniteSubset, w: &Pattern) -> Result<f64> {
    if &w.support != f {
        return Err(Error::config("pattern support must equal F"));
    }
    if !w.is_locally_admissible(x) {
        return Err(Error::config("pattern is not admissible"));
    }
    let s = phi.ergodic_sum(f)?;
    Ok(CylinderSup::new(x, &s, f)?.sup(&w.symbols))
}
