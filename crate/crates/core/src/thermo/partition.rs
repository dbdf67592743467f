use crate::group::FiniteSubset;
use crate::par;
use crate::setmaps::SetMap;
use crate::subshift::{enumerate_patterns, CylinderSup, LocalFunction, Subshift};
use crate::Result;

const CHUNK: usize = 1 << 12;

/// `log Ẑ_F(φ) = log Σ_{w∈X_F} exp(sup φ(F)([w]))`.
///
/// Patterns are enumerated under the default cap and the cylinder suprema are
/// summed in a fixed tree order, so the value does not depend on the thread
/// count.
pub fn log_partition_function(x: &Subshift, phi: &SetMap<LocalFunction>, f: &FiniteSubset) -> Result<f64> {
    let value = phi.eval(f)?;
    log_partition_of(x, &value, f)
}

/// `Ẑ_F(φ)`; overflows to `inf` for large sets, where
/// [`log_partition_function`] should be used.
pub fn partition_function(x: &Subshift, phi: &SetMap<LocalFunction>, f: &FiniteSubset) -> Result<f64> {
    Ok(log_partition_function(x, phi, f)?.exp())
}

/// `log Σ_{w∈X_F} exp(sup_{[w]} ψ)` for a local function `ψ`.
pub fn log_partition_of(x: &Subshift, psi: &LocalFunction, f: &FiniteSubset) -> Result<f64> {
    let sup = CylinderSup::new(x, psi, f)?;
    let words = enumerate_patterns(x, f)?;
    let starts: Vec<usize> = (0..words.len()).step_by(CHUNK).collect();
    let chunks = par::map(&starts, |&s| {
        (s..(s + CHUNK).min(words.len()))
            .map(|i| sup.sup(words.get(i)))
            .collect::<Vec<f64>>()
    });
    Ok(par::log_sum_exp(&chunks.concat()))
}
