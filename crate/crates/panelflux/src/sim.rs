//! Deterministic simulation helpers used by tests, examples, and the bundled
//! demo dataset generator: a minimal 64-bit LCG for portable reproducible
//! uniforms, plus Gaussian VAR panel simulation.
//!
//! The LCG exists so that golden test series are bit-identical across
//! platforms and independent of any RNG crate's stream layout.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Knuth's MMIX multiplier/increment, 64-bit state; uniforms take the top
/// 53 bits of the post-update state.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    /// Next uniform in [0, 1): the state advances before each draw.
    pub fn next_uniform(&mut self) -> f64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.state >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// `n` uniforms from a fresh LCG at `seed`.
pub fn lcg_uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut gen = Lcg::new(seed);
    (0..n).map(|_| gen.next_uniform()).collect()
}

/// AR(1) series driven by centered LCG uniforms: `y[0] = 0`,
/// `y[t] = phi·y[t−1] + (u[t] − 0.5)`; note `u[0]` is unused, matching the
/// convention under which the golden statistics were frozen.
pub fn lcg_ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let u = lcg_uniforms(n, seed);
    let mut y = vec![0.0; n];
    for t in 1..n {
        y[t] = phi * y[t - 1] + (u[t] - 0.5);
    }
    y
}

/// Random walk from centered LCG uniforms: cumulative sum of `u − 0.5`.
pub fn lcg_random_walk(n: usize, seed: u64) -> Vec<f64> {
    let u = lcg_uniforms(n, seed);
    let mut y = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in u {
        acc += v - 0.5;
        y.push(acc);
    }
    y
}

/// Simulate a K-variable Gaussian VAR(p) panel
/// `x_t = c_i + Σ_j Γ_j x_{t−j} + P ε_t`, one row per unit.
///
/// `gammas` are the lag matrices, `effects` one intercept vector per unit,
/// `shock_chol` the lower Cholesky factor of the innovation covariance.
/// `burnin` pre-sample steps are discarded so the process forgets its zero
/// start. Output: per unit, a `T × K` matrix.
pub fn simulate_var_panel<R: Rng>(
    gammas: &[DMatrix<f64>],
    effects: &[DVector<f64>],
    shock_chol: &DMatrix<f64>,
    t_len: usize,
    burnin: usize,
    rng: &mut R,
) -> Result<Vec<DMatrix<f64>>> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("need ≥ 1 lag matrix".to_string()));
    }
    let k = gammas[0].nrows();
    for g in gammas {
        if g.nrows() != k || g.ncols() != k {
            return Err(Error::DimensionMismatch {
                context: "var simulation lag matrix".to_string(),
                expected: k,
                got: g.nrows().max(g.ncols()),
            });
        }
    }
    let p = gammas.len();
    let total = t_len + burnin + p;
    let mut panels = Vec::with_capacity(effects.len());
    for c in effects {
        let mut x = DMatrix::<f64>::zeros(total, k);
        for t in p..total {
            let eps: DVector<f64> =
                DVector::from_iterator(k, (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let mut row = c + shock_chol * eps;
            for (j, g) in gammas.iter().enumerate() {
                let prev = x.row(t - 1 - j).transpose();
                row += g * prev;
            }
            x.row_mut(t).copy_from(&row.transpose());
        }
        panels.push(x.rows(total - t_len, t_len).into_owned());
    }
    Ok(panels)
}
