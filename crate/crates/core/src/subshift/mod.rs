//! Finite-alphabet subshifts of finite type over `Z` and `Z^2`.
//!
//! Constraints are nearest-neighbour: for every axis a 0/1 matrix lists the
//! allowed ordered pairs `(x_p, x_{p+e_axis})`. Symbols that cannot occur in
//! any bi-infinite configuration are pruned at construction so that, in
//! dimension one, every locally admissible interval pattern extends to a
//! point of the subshift.

mod local;
mod pattern;

pub use local::{sup_on_cylinder, CylinderSup, LocalFunction, Potential, DEFAULT_CAP};
pub use pattern::{count_patterns, enumerate_patterns, enumerate_patterns_capped, Pattern, PatternSet};

use nalgebra::DMatrix;

use crate::group::FiniteSubset;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Subshift {
    alphabet: Vec<String>,
    dim: usize,
    /// `allowed[axis][a * k + b]`.
    allowed: Vec<Vec<bool>>,
    alive: Vec<bool>,
    full: bool,
}

impl Subshift {
    /// The full shift `A^{Z^d}`.
    pub fn full(alphabet: Vec<String>, dim: usize) -> Result<Self> {
        let k = alphabet.len();
        Self::with_allowed(alphabet, dim, vec![vec![true; k * k]; dim])
    }

    /// Full shift on symbols `"0", ..., "k-1"`.
    pub fn full_k(k: usize, dim: usize) -> Result<Self> {
        Self::full(default_names(k), dim)
    }

    /// Nearest-neighbour SFT. `matrices` holds one 0/1 matrix per axis, or a
    /// single matrix shared by every axis.
    pub fn nearest_neighbor(alphabet: Vec<String>, dim: usize, matrices: &[Vec<Vec<u8>>]) -> Result<Self> {
        let k = alphabet.len();
        if matrices.len() != 1 && matrices.len() != dim {
            return Err(Error::config(format!(
                "expected 1 or {dim} constraint matrices, got {}",
                matrices.len()
            )));
        }
        let mut allowed = Vec::with_capacity(dim);
        for axis in 0..dim {
            let m = &matrices[if matrices.len() == 1 { 0 } else { axis }];
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return Err(Error::config(format!("constraint matrix must be {k}x{k}")));
            }
            let mut flat = Vec::with_capacity(k * k);
            for row in m {
                for &e in row {
                    match e {
                        0 => flat.push(false),
                        1 => flat.push(true),
                        _ => return Err(Error::config("constraint matrices must be 0/1")),
                    }
                }
            }
            allowed.push(flat);
        }
        Self::with_allowed(alphabet, dim, allowed)
    }

    /// The golden-mean shift on `{0, 1}`: no two adjacent 1s.
    pub fn golden_mean() -> Self {
        Self::nearest_neighbor(default_names(2), 1, &[vec![vec![1, 1], vec![1, 0]]]).expect("valid golden mean")
    }

    fn with_allowed(alphabet: Vec<String>, dim: usize, mut allowed: Vec<Vec<bool>>) -> Result<Self> {
        let k = alphabet.len();
        if k == 0 || k > 255 {
            return Err(Error::config("alphabet must have between 1 and 255 symbols"));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::config(format!("subshift dimension must be 1 or 2, got {dim}")));
        }
        let mut sorted = alphabet.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::config("alphabet symbols must be distinct"));
        }
        // Prune symbols without a successor or predecessor along some axis.
        let mut alive = vec![true; k];
        loop {
            let mut changed = false;
            for a in 0..k {
                if !alive[a] {
                    continue;
                }
                let ok = allowed
                    .iter()
                    .all(|m| (0..k).any(|b| alive[b] && m[a * k + b]) && (0..k).any(|b| alive[b] && m[b * k + a]));
                if !ok {
                    alive[a] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !alive.iter().any(|&a| a) {
            return Err(Error::config("constraints admit no configuration"));
        }
        for m in allowed.iter_mut() {
            for a in 0..k {
                for b in 0..k {
                    if !alive[a] || !alive[b] {
                        m[a * k + b] = false;
                    }
                }
            }
        }
        let full = alive.iter().all(|&a| a) && allowed.iter().all(|m| m.iter().all(|&e| e));
        Ok(Subshift {
            alphabet,
            dim,
            allowed,
            alive,
            full,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Symbols that occur in some configuration.
    pub fn is_alive(&self, a: u8) -> bool {
        self.alive[a as usize]
    }

    pub fn alive_symbols(&self) -> Vec<u8> {
        (0..self.alphabet_size() as u8).filter(|&a| self.is_alive(a)).collect()
    }

    #[inline]
    pub fn allows(&self, axis: usize, a: u8, b: u8) -> bool {
        self.allowed[axis][a as usize * self.alphabet.len() + b as usize]
    }

    pub fn symbol_index(&self, name: &str) -> Option<u8> {
        self.alphabet.iter().position(|s| s == name).map(|i| i as u8)
    }

    /// 0/1 transition matrix along `axis`.
    pub fn transition_matrix(&self, axis: usize) -> DMatrix<f64> {
        let k = self.alphabet_size();
        DMatrix::from_fn(k, k, |a, b| if self.allows(axis, a as u8, b as u8) { 1.0 } else { 0.0 })
    }

    /// `E_m`: the centered box of radius `m - 1`, so `E_1 = {1_G}`.
    pub fn exhaustion(&self, m: usize) -> FiniteSubset {
        FiniteSubset::centered_box(self.dim, m.saturating_sub(1))
    }

    /// `2^{-inf{m >= 1 : x_{E_m} != y_{E_m}}}`, resolved up to `max_m`
    /// (returns 0 when the configurations agree on `E_{max_m}`).
    pub fn distance<X, Y>(&self, x: X, y: Y, max_m: usize) -> f64
    where
        X: Fn(&[i64]) -> u8,
        Y: Fn(&[i64]) -> u8,
    {
        for m in 1..=max_m {
            if self.exhaustion(m).points().any(|p| x(p) != y(p)) {
                return 2f64.powi(-(m as i32));
            }
        }
        0.0
    }

    /// Renders a pattern as a string: symbols concatenated when every name is
    /// one character, otherwise comma-separated.
    pub fn pattern_key(&self, symbols: &[u8]) -> String {
        let short = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let names = symbols.iter().map(|&s| self.alphabet[s as usize].as_str());
        if short {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(",")
        }
    }

    /// Inverse of [`Subshift::pattern_key`].
    pub fn parse_pattern_key(&self, key: &str, len: usize) -> Result<Vec<u8>> {
        let short = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let parts: Vec<String> = if short {
            key.chars().map(|c| c.to_string()).collect()
        } else if key.is_empty() {
            Vec::new()
        } else {
            key.split(',').map(|s| s.trim().to_string()).collect()
        };
        if parts.len() != len {
            return Err(Error::config(format!(
                "pattern '{key}' has {} symbols, expected {len}",
                parts.len()
            )));
        }
        parts
            .iter()
            .map(|p| {
                self.symbol_index(p)
                    .ok_or_else(|| Error::config(format!("unknown symbol '{p}' in pattern '{key}'")))
            })
            .collect()
    }
}

pub(crate) fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dead_symbols_are_pruned() {
        // symbol 1 can never be followed
        let x = Subshift::nearest_neighbor(default_names(2), 1, &[vec![vec![1, 1], vec![0, 0]]]).unwrap();
        assert!(x.is_alive(0));
        assert!(!x.is_alive(1));
        assert!(!x.is_full());
        assert_eq!(count_patterns(&x, &FiniteSubset::interval(0, 5).unwrap()), 1);
    }

    #[test]
    fn bad_matrices_are_rejected() {
        assert!(Subshift::nearest_neighbor(default_names(2), 1, &[vec![vec![1, 2], vec![1, 0]]]).is_err());
        assert!(Subshift::nearest_neighbor(default_names(2), 1, &[vec![vec![1, 1]]]).is_err());
        assert!(Subshift::nearest_neighbor(default_names(2), 1, &[vec![vec![0, 0], vec![0, 0]]]).is_err());
    }

    #[test]
    fn all_ones_constraint_is_full() {
        let x = Subshift::nearest_neighbor(default_names(3), 2, &[vec![vec![1; 3]; 3]]).unwrap();
        assert!(x.is_full());
    }

    #[test]
    fn metric_reads_growing_boxes() {
        let x = Subshift::full_k(2, 1).unwrap();
        let zero = |_: &[i64]| 0u8;
        let far = |p: &[i64]| u8::from(p[0] == 3);
        assert_eq!(x.distance(zero, zero, 10), 0.0);
        // first differs on E_4 = [-3, 3]
        assert_eq!(x.distance(zero, far, 10), 1.0 / 16.0);
    }

    #[test]
    fn pattern_keys_round_trip() {
        let x = Subshift::golden_mean();
        assert_eq!(x.pattern_key(&[0, 1, 0]), "010");
        assert_eq!(x.parse_pattern_key("010", 3).unwrap(), vec![0, 1, 0]);
        let y = Subshift::full(vec!["a".into(), "bb".into()], 1).unwrap();
        assert_eq!(y.pattern_key(&[1, 0]), "bb,a");
        assert_eq!(y.parse_pattern_key("bb,a", 2).unwrap(), vec![1, 0]);
    }
}
