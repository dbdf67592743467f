use serde::Serialize;

use crate::subshift::{LocalFunction, Subshift};
use crate::{Error, Result};

use super::measure::MarkovMeasure;
use super::transfer::TransferMatrix;

/// Identity `h(μ) + ∫φ dμ = log λ` is checked to this accuracy.
pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumState {
    pub measure: MarkovMeasure,
    /// `log λ`.
    pub pressure: f64,
    pub entropy: f64,
    pub integral: f64,
    /// `|h(μ) + ∫φ dμ - log λ|`.
    pub certificate_gap: f64,
    /// Right Perron vector on the full alphabet (zero on symbols that never occur).
    pub right_vector: Vec<f64>,
}

impl EquilibriumState {
    pub fn certified(&self) -> bool {
        self.certificate_gap <= CERTIFICATE_TOL
    }
}

/// The Gibbs-Markov measure of a pair potential on a one-dimensional
/// subshift, built from the Perron eigendata of `M_ij = A_ij e^{φ(i,j)}`:
/// `P_ij = M_ij r_j / (λ r_i)` with stationary `p_i ∝ l_i r_i`.
pub fn equilibrium_state_1d(x: &Subshift, phi: &LocalFunction) -> Result<EquilibriumState> {
    if !TransferMatrix::applicable(x, phi) {
        return Err(Error::config(
            "equilibrium states need a one-dimensional subshift and a potential window inside {0, 1}",
        ));
    }
    let t = TransferMatrix::new(x, phi)?;
    let perron = t.perron()?;
    let m = t.matrix();
    let alive = t.alive();
    let k = x.alphabet_size();
    let na = alive.len();
    let (lambda, r, l) = (perron.lambda, &perron.right, &perron.left);

    let mut transition = vec![vec![0.0; k]; k];
    let mut stationary = vec![0.0; k];
    let mut right_vector = vec![0.0; k];
    let norm: f64 = (0..na).map(|i| l[i] * r[i]).sum();
    for i in 0..na {
        let a = alive[i] as usize;
        right_vector[a] = r[i];
        stationary[a] = l[i] * r[i] / norm;
        let row: Vec<f64> = (0..na).map(|j| m[(i, j)] * r[j] / (lambda * r[i])).collect();
        let s: f64 = row.iter().sum();
        for j in 0..na {
            transition[a][alive[j] as usize] = row[j] / s;
        }
    }
    // symbols that never occur keep a self-loop so the matrix stays stochastic
    for a in 0..k {
        if !x.is_alive(a as u8) {
            transition[a][a] = 1.0;
        }
    }
    let measure = MarkovMeasure::markov(stationary, transition)?;
    measure.check_support(x)?;
    let entropy = measure.entropy_rate();
    let integral = measure.integral(x, phi)?;
    let pressure = lambda.ln();
    Ok(EquilibriumState {
        measure,
        pressure,
        entropy,
        integral,
        certificate_gap: (entropy + integral - pressure).abs(),
        right_vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parry_measure_of_golden_mean() {
        let x = Subshift::golden_mean();
        let eq = equilibrium_state_1d(&x, &LocalFunction::zero(1, 2).unwrap()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((eq.pressure - phi.ln()).abs() < 1e-13);
        assert!((eq.entropy - phi.ln()).abs() < 1e-12);
        let MarkovMeasure::Markov { stationary, transition } = &eq.measure else {
            panic!()
        };
        assert!((transition[0][1] - 1.0 / (phi * phi)).abs() < 1e-12);
        assert!((stationary[1] - 1.0 / (phi * phi + 1.0)).abs() < 1e-12);
        assert!(eq.certified());
    }

    #[test]
    fn site_potential_gives_bernoulli() {
        let x = Subshift::full_k(2, 1).unwrap();
        let e = 1f64.exp();
        let eq = equilibrium_state_1d(&x, &LocalFunction::pair(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()).unwrap();
        assert!((eq.pressure - (1.0 + e).ln()).abs() < 1e-13);
        let p = eq.measure.marginal();
        assert!((p[1] - e / (1.0 + e)).abs() < 1e-12);
    }
}
