use crate::group::FiniteSubset;
use crate::par;
use crate::{Error, Result};

use super::local::DEFAULT_CAP;
use super::Subshift;

/// An assignment of symbols to the points of a support, in the support's
/// canonical (lexicographic) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub support: FiniteSubset,
    pub symbols: Vec<u8>,
}

impl Pattern {
    pub fn new(support: FiniteSubset, symbols: Vec<u8>) -> Result<Self> {
        if symbols.len() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: symbols.len(),
            });
        }
        Ok(Pattern { support, symbols })
    }

    /// No forbidden adjacent pair and no pruned symbol inside the support.
    pub fn is_locally_admissible(&self, x: &Subshift) -> bool {
        if self.support.dim() != x.dim() || self.symbols.iter().any(|&s| s as usize >= x.alphabet_size()) {
            return false;
        }
        let plan = constraint_plan(x, &self.support);
        self.symbols
            .iter()
            .enumerate()
            .all(|(i, &s)| x.is_alive(s) && plan[i].iter().all(|&(j, axis)| x.allows(axis, self.symbols[j], s)))
    }
}

/// The patterns of a support stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternSet {
    support: FiniteSubset,
    symbols: Vec<u8>,
    /// False when the set may contain locally admissible patterns that do not
    /// extend to a configuration.
    exact: bool,
}

impl PatternSet {
    pub fn support(&self) -> &FiniteSubset {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn get(&self, i: usize) -> &[u8] {
        let m = self.support.len();
        &self.symbols[i * m..(i + 1) * m]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, u8> {
        self.symbols.chunks_exact(self.support.len())
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        self.iter()
            .map(|s| Pattern {
                support: self.support.clone(),
                symbols: s.to_vec(),
            })
            .collect()
    }
}

/// For each position `i`, the earlier positions `j` with `S[i] = S[j] + e_axis`.
pub(crate) fn constraint_plan(x: &Subshift, s: &FiniteSubset) -> Vec<Vec<(usize, usize)>> {
    let d = s.dim();
    let mut q = vec![0i64; d];
    s.points()
        .map(|p| {
            let mut deps = Vec::new();
            if !x.is_full() {
                for axis in 0..d {
                    q.copy_from_slice(p);
                    q[axis] -= 1;
                    if let Some(j) = s.index_of(&q) {
                        deps.push((j, axis));
                    }
                }
            }
            deps
        })
        .collect()
}

struct Dfs<'a> {
    x: &'a Subshift,
    plan: &'a [Vec<(usize, usize)>],
    alive: Vec<u8>,
}

impl Dfs<'_> {
    fn fits(&self, word: &[u8], i: usize, s: u8) -> bool {
        self.plan[i].iter().all(|&(j, axis)| self.x.allows(axis, word[j], s))
    }

    /// Appends every admissible completion of `word[..start]` to `out`.
    fn collect(&self, word: &mut Vec<u8>, start: usize, out: &mut Vec<u8>, cap: u128) -> Result<()> {
        let n = self.plan.len();
        if start == n {
            out.extend_from_slice(word);
            if (out.len() / n.max(1)) as u128 > cap {
                return Err(cap_error(cap.saturating_add(1), cap));
            }
            return Ok(());
        }
        for &s in &self.alive {
            if self.fits(word, start, s) {
                word[start] = s;
                self.collect(word, start + 1, out, cap)?;
            }
        }
        Ok(())
    }

    /// Number of admissible completions, stopping once `cap` is passed.
    fn count(&self, word: &mut Vec<u8>, start: usize, cap: u128) -> u128 {
        if start == self.plan.len() {
            return 1;
        }
        let mut total = 0u128;
        for &s in &self.alive {
            if self.fits(word, start, s) {
                word[start] = s;
                total = total.saturating_add(self.count(word, start + 1, cap.saturating_sub(total)));
                if total > cap {
                    return total;
                }
            }
        }
        total
    }
}

fn cap_error(count: u128, cap: u128) -> Error {
    Error::ResourceCap {
        what: "pattern enumeration".into(),
        count,
        cap,
    }
}

fn interval_path_count(x: &Subshift, n: usize) -> u128 {
    let k = x.alphabet_size();
    let mut v: Vec<u128> = (0..k).map(|a| u128::from(x.is_alive(a as u8))).collect();
    for _ in 1..n {
        v = (0..k)
            .map(|a| {
                (0..k)
                    .filter(|&b| x.allows(0, a as u8, b as u8))
                    .fold(0u128, |acc, b| acc.saturating_add(v[b]))
            })
            .collect();
    }
    v.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
}

/// `|X_F|` for full shifts and 1D intervals; otherwise the number of locally
/// admissible patterns (exact for all 1D supports).
pub fn count_patterns(x: &Subshift, s: &FiniteSubset) -> u128 {
    count_capped(x, s, u128::MAX)
}

fn count_capped(x: &Subshift, s: &FiniteSubset, cap: u128) -> u128 {
    if x.is_full() {
        return (x.alphabet_size() as u128).saturating_pow(s.len() as u32);
    }
    if x.dim() == 1 && s.is_interval() {
        return interval_path_count(x, s.len());
    }
    if x.dim() == 1 {
        // A projection can only shrink the hull count; exact via enumeration.
        let hull = s.hull();
        if interval_path_count(x, hull.len()) <= cap {
            return enumerate_patterns_capped(x, s, cap)
                .map(|p| p.len() as u128)
                .unwrap_or(cap.saturating_add(1));
        }
    }
    let plan = constraint_plan(x, s);
    let dfs = Dfs {
        x,
        plan: &plan,
        alive: x.alive_symbols(),
    };
    dfs.count(&mut vec![0; s.len()], 0, cap)
}

/// Patterns on `s` with the default cap of `2^24`.
pub fn enumerate_patterns(x: &Subshift, s: &FiniteSubset) -> Result<PatternSet> {
    enumerate_patterns_capped(x, s, DEFAULT_CAP)
}

/// Patterns on `s` in lexicographic order of their symbol words.
///
/// Exact for full shifts and in dimension one; 2D SFT enumerations are
/// locally admissible supersets and are marked inexact.
pub fn enumerate_patterns_capped(x: &Subshift, s: &FiniteSubset, cap: u128) -> Result<PatternSet> {
    if s.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: s.dim(),
        });
    }
    if x.dim() == 1 && !x.is_full() && !s.is_interval() {
        // Enumerate on the hull and project so only extendable patterns survive.
        let hull = s.hull();
        let hull_count = interval_path_count(x, hull.len());
        if hull_count > cap.saturating_mul(16) {
            return Err(cap_error(hull_count, cap));
        }
        let full = enumerate_patterns_capped(x, &hull, cap.saturating_mul(16))?;
        let idx: Vec<usize> = s.points().map(|p| hull.index_of(p).expect("subset of hull")).collect();
        let mut words: Vec<Vec<u8>> = full.iter().map(|w| idx.iter().map(|&i| w[i]).collect()).collect();
        words.sort_unstable();
        words.dedup();
        if words.len() as u128 > cap {
            return Err(cap_error(words.len() as u128, cap));
        }
        return Ok(PatternSet {
            support: s.clone(),
            symbols: words.concat(),
            exact: true,
        });
    }

    let estimate = count_capped(x, s, cap);
    if estimate > cap {
        return Err(cap_error(estimate, cap));
    }
    let n = s.len();
    let plan = constraint_plan(x, s);
    let dfs = Dfs {
        x,
        plan: &plan,
        alive: x.alive_symbols(),
    };
    // Split on a short prefix so chunks can run in parallel; concatenating
    // in prefix order keeps the output lexicographic.
    let k = dfs.alive.len().max(2);
    let mut depth = 0;
    let mut width = 1usize;
    while depth < n && width < 64 {
        depth += 1;
        width = width.saturating_mul(k);
    }
    let mut prefixes = Vec::new();
    {
        let mut word = vec![0u8; n];
        fn rec(dfs: &Dfs, word: &mut Vec<u8>, i: usize, depth: usize, out: &mut Vec<Vec<u8>>) {
            if i == depth {
                out.push(word[..depth].to_vec());
                return;
            }
            for &s in &dfs.alive {
                if dfs.fits(word, i, s) {
                    word[i] = s;
                    rec(dfs, word, i + 1, depth, out);
                }
            }
        }
        rec(&dfs, &mut word, 0, depth, &mut prefixes);
    }
    let chunks = par::map(&prefixes, |prefix| {
        let mut word = vec![0u8; n];
        word[..depth].copy_from_slice(prefix);
        let mut out = Vec::new();
        dfs.collect(&mut word, depth, &mut out, cap).map(|_| out)
    });
    let mut symbols = Vec::with_capacity(estimate as usize * n);
    for c in chunks {
        symbols.extend_from_slice(&c?);
    }
    Ok(PatternSet {
        support: s.clone(),
        symbols,
        exact: x.is_full() || x.dim() == 1,
    })
}
