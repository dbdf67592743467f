//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces bit-identical results in both modes: maps preserve
//! input order and reductions use a fixed binary tree whose shape depends only
//! on the input length.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Leaf size of the reduction tree.
const LEAF: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

/// Selects the execution mode for subsequent calls. Without the `parallel`
/// feature the mode is always sequential.
pub fn set_mode(mode: ExecMode) {
    FORCE_SEQUENTIAL.store(mode == ExecMode::Sequential, Ordering::SeqCst);
}

pub fn mode() -> ExecMode {
    if cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst) {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Pairwise tree sum with a fixed shape.
pub fn tree_sum(xs: &[f64]) -> f64 {
    fn rec(xs: &[f64], parallel: bool) -> f64 {
        if xs.len() <= LEAF {
            return xs.iter().sum();
        }
        let (a, b) = xs.split_at(xs.len() / 2);
        #[cfg(feature = "parallel")]
        if parallel && xs.len() > 16 * LEAF {
            let (x, y) = rayon::join(|| rec(a, parallel), || rec(b, parallel));
            return x + y;
        }
        let _ = parallel;
        rec(a, parallel) + rec(b, parallel)
    }
    rec(xs, mode() == ExecMode::Parallel)
}

/// `log(sum(exp(x)))` over the tree sum. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let shifted = map(xs, |x| (x - m).exp());
    m + tree_sum(&shifted).ln()
}

/// Maximum with a fixed reduction order (NaN-free inputs).
pub fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_mode_independently() {
        let xs: Vec<f64> = (0..100_000).map(|i| ((i * 7919) % 1013) as f64 * 1e-3 + 1e-9).collect();
        set_mode(ExecMode::Parallel);
        let a = tree_sum(&xs);
        set_mode(ExecMode::Sequential);
        let b = tree_sum(&xs);
        set_mode(ExecMode::Parallel);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn log_sum_exp_of_ones() {
        let xs = vec![0.0; 1 << 12];
        assert!((log_sum_exp(&xs) - 12.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
