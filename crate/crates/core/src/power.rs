//! Source/relay power allocation minimizing the high-SNR outage objective.
//!
//! The objective is a posynomial `Σ_t K_t Π_i β_i^{−e_ti}` over the power
//! fractions `β = [β₀, β₁, …]` subject to `Σ β ≤ 1`. Every term decreases in
//! every fraction, so the sum constraint binds. The solver minimizes
//! `log Σ_t exp(ln K_t − e_t · ln β)`, which is convex in β, by damped Newton
//! steps on the face of the simplex spanned by the fractions that appear in
//! the objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outage::{leading_term_constants, literal_constants, NetworkConfig};

/// Fractions of the total power given to the source and to each relay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub beta0: f64,
    pub beta_r: Vec<f64>,
}

impl PowerSplit {
    pub fn new(beta0: f64, beta_r: Vec<f64>) -> Result<Self> {
        let s = PowerSplit { beta0, beta_r };
        s.validate()?;
        Ok(s)
    }

    /// `1/(L+1)` to the source and to every relay.
    pub fn equal(relays: usize) -> Self {
        let share = 1.0 / (relays + 1) as f64;
        PowerSplit {
            beta0: share,
            beta_r: vec![share; relays],
        }
    }

    pub fn relay_count(&self) -> usize {
        self.beta_r.len()
    }

    pub fn total(&self) -> f64 {
        self.beta0 + self.beta_r.iter().sum::<f64>()
    }

    pub fn fractions(&self) -> Vec<f64> {
        std::iter::once(self.beta0).chain(self.beta_r.iter().copied()).collect()
    }

    fn from_fractions(v: &[f64]) -> Self {
        PowerSplit {
            beta0: v[0],
            beta_r: v[1..].to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions().iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(Error::domain(format!(
                "power fractions must be positive, got {:?}",
                self.fractions()
            )));
        }
        if self.total() > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "power fractions must sum to at most one, got {}",
                self.total()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveVariant {
    /// The three printed terms, `K₁β₀^{−e₁} + K₂β₀^{−e₂}β₂^{−e₃} + K₃(β₀β₁)^{−e₄}`.
    Literal,
    /// One term per decode set, symmetric in the relays.
    Symmetrized,
}

/// `K · Π β_i^{−exponents[i]}`, with `K` stored as its logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveTerm {
    pub ln_coeff: f64,
    pub exponents: Vec<f64>,
}

impl ObjectiveTerm {
    pub fn new(ln_coeff: f64, exponents: Vec<f64>) -> Self {
        ObjectiveTerm { ln_coeff, exponents }
    }

    fn is_active(&self) -> bool {
        self.ln_coeff > f64::NEG_INFINITY
    }

    fn log_value(&self, ln_beta: &[f64]) -> f64 {
        self.ln_coeff
            - self
                .exponents
                .iter()
                .zip(ln_beta)
                .filter(|(e, _)| **e != 0.0)
                .map(|(e, lb)| e * lb)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConstants {
    pub variant: ObjectiveVariant,
    pub terms: Vec<ObjectiveTerm>,
}

impl ObjectiveConstants {
    pub fn new(variant: ObjectiveVariant, terms: Vec<ObjectiveTerm>) -> Self {
        ObjectiveConstants { variant, terms }
    }

    /// Literal objective from explicit K values and exponents
    /// `(e₁, e₂, e₃, e₄)` as in `K₁β₀^{−e₁} + K₂β₀^{−e₂}β₂^{−e₃} + K₃(β₀β₁)^{−e₄}`.
    pub fn literal(k: [f64; 3], e: [f64; 4]) -> Self {
        ObjectiveConstants {
            variant: ObjectiveVariant::Literal,
            terms: vec![
                ObjectiveTerm::new(k[0].ln(), vec![e[0], 0.0, 0.0]),
                ObjectiveTerm::new(k[1].ln(), vec![e[1], 0.0, e[2]]),
                ObjectiveTerm::new(k[2].ln(), vec![e[3], e[3], 0.0]),
            ],
        }
    }

    /// Number of power fractions the objective is defined over.
    pub fn dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.exponents.len())
    }

    /// Coefficient of term `i` (K₁, K₂, K₃ for the literal variant).
    pub fn coefficient(&self, i: usize) -> f64 {
        self.terms[i].ln_coeff.exp()
    }

    /// All coefficients multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.ln_coeff += c.ln();
        }
        out
    }

    /// Objective value at `split`.
    pub fn evaluate(&self, split: &PowerSplit) -> Result<f64> {
        let beta = split.fractions();
        if beta.len() != self.dim() {
            return Err(Error::domain(format!(
                "objective is defined over {} fractions, split has {}",
                self.dim(),
                beta.len()
            )));
        }
        for (i, b) in beta.iter().enumerate() {
            let used = self
                .terms
                .iter()
                .any(|t| t.is_active() && t.exponents[i] != 0.0);
            if !(*b >= 0.0) || (used && *b == 0.0) {
                return Err(Error::domain(format!(
                    "power fraction {i} must be positive, got {b}"
                )));
            }
        }
        let ln_beta: Vec<f64> = beta.iter().map(|b| b.ln()).collect();
        Ok(self
            .terms
            .iter()
            .filter(|t| t.is_active())
            .map(|t| t.log_value(&ln_beta).exp())
            .sum())
    }

    fn log_objective(&self, ln_beta: &[f64]) -> f64 {
        log_sum_exp(self.terms.iter().filter(|t| t.is_active()).map(|t| t.log_value(ln_beta)))
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// K₁, K₂, K₃ of the printed objective for a two-relay, static,
/// perfectly estimated configuration.
pub fn k_constants(cfg: &NetworkConfig) -> Result<ObjectiveConstants> {
    literal_constants(cfg)
}

/// Decode-set-consistent objective for the same configuration.
pub fn symmetrized_constants(cfg: &NetworkConfig) -> Result<ObjectiveConstants> {
    leading_term_constants(cfg)
}

pub fn constants_for(cfg: &NetworkConfig, variant: ObjectiveVariant) -> Result<ObjectiveConstants> {
    match variant {
        ObjectiveVariant::Literal => k_constants(cfg),
        ObjectiveVariant::Symmetrized => symmetrized_constants(cfg),
    }
}

pub fn objective(split: &PowerSplit, consts: &ObjectiveConstants) -> Result<f64> {
    consts.evaluate(split)
}

const MAX_NEWTON_ITER: usize = 500;

/// Minimizer of the objective over `{β ≥ 0, Σβ = 1}`.
///
/// Fractions that no active term depends on receive zero power. With a
/// single active term the closed form `β_i = e_i / Σ e` is returned.
pub fn optimize_power(consts: &ObjectiveConstants, tol: f64) -> Result<PowerSplit> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let dim = consts.dim();
    if dim == 0 {
        return Err(Error::domain("objective has no terms"));
    }
    let active: Vec<&ObjectiveTerm> = consts.terms.iter().filter(|t| t.is_active()).collect();
    if active.is_empty() {
        return Err(Error::domain("every objective coefficient is zero"));
    }
    let used: Vec<usize> = (0..dim)
        .filter(|&i| active.iter().any(|t| t.exponents[i] > 0.0))
        .collect();
    let mut full = vec![0.0; dim];
    if used.is_empty() {
        // Objective is constant.
        return Ok(PowerSplit::from_fractions(&vec![1.0 / dim as f64; dim]));
    }
    if active.len() == 1 {
        let e = &active[0].exponents;
        let total: f64 = used.iter().map(|&i| e[i]).sum();
        for &i in &used {
            full[i] = e[i] / total;
        }
        return Ok(PowerSplit::from_fractions(&full));
    }
    let reduced: Vec<ObjectiveTerm> = active
        .iter()
        .map(|t| ObjectiveTerm::new(t.ln_coeff, used.iter().map(|&i| t.exponents[i]).collect()))
        .collect();
    let beta = newton_on_simplex(&reduced, tol).map_err(|(iterations, best)| {
        let mut v = vec![0.0; dim];
        for (k, &i) in used.iter().enumerate() {
            v[i] = best[k];
        }
        Error::Optimization {
            iterations,
            best: PowerSplit::from_fractions(&v),
        }
    })?;
    for (k, &i) in used.iter().enumerate() {
        full[i] = beta[k];
    }
    Ok(PowerSplit::from_fractions(&full))
}

// Value, gradient and Hessian of log Σ exp(a_t), a_t = ln K_t − Σ e_ti ln β_i.
fn log_objective_derivatives(terms: &[ObjectiveTerm], beta: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let k = beta.len();
    let ln_beta: Vec<f64> = beta.iter().map(|b| b.ln()).collect();
    let a: Vec<f64> = terms.iter().map(|t| t.log_value(&ln_beta)).collect();
    let m = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = a.iter().map(|v| (v - m).exp()).sum();
    let w: Vec<f64> = a.iter().map(|v| (v - m).exp() / z).collect();
    let value = m + z.ln();

    let mut grad = vec![0.0; k];
    let mut hess = vec![vec![0.0; k]; k];
    for (t, wt) in terms.iter().zip(&w) {
        let d: Vec<f64> = (0..k).map(|i| -t.exponents[i] / beta[i]).collect();
        for i in 0..k {
            grad[i] += wt * d[i];
            hess[i][i] += wt * t.exponents[i] / (beta[i] * beta[i]);
            for j in 0..k {
                hess[i][j] += wt * d[i] * d[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            hess[i][j] -= grad[i] * grad[j];
        }
    }
    (value, grad, hess)
}

// Gaussian elimination with partial pivoting; None when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn newton_on_simplex(terms: &[ObjectiveTerm], tol: f64) -> std::result::Result<Vec<f64>, (usize, Vec<f64>)> {
    let k = terms[0].exponents.len();
    let mut beta = vec![1.0 / k as f64; k];
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let free = k - 1;
    let stop = tol.min(1e-13);
    let log_obj = |b: &[f64]| {
        let lb: Vec<f64> = b.iter().map(|x| x.ln()).collect();
        log_sum_exp(terms.iter().map(|t| t.log_value(&lb)))
    };
    for iter in 0..MAX_NEWTON_ITER {
        let (value, grad, hess) = log_objective_derivatives(terms, &beta);
        // Coordinates β_0..β_{k−2}; the last fraction is 1 − Σ of the others.
        let last = k - 1;
        let g: Vec<f64> = (0..free).map(|a| grad[a] - grad[last]).collect();
        let h: Vec<Vec<f64>> = (0..free)
            .map(|a| {
                (0..free)
                    .map(|b| hess[a][b] - hess[a][last] - hess[last][b] + hess[last][last])
                    .collect()
            })
            .collect();
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut step = solve(h, neg_g.clone()).unwrap_or(neg_g);
        let mut slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            step = g.iter().map(|x| -x).collect();
            slope = -g.iter().map(|x| x * x).sum::<f64>();
        }
        if -slope / 2.0 <= stop {
            return Ok(beta);
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-20 {
            let mut cand = beta.clone();
            for a in 0..free {
                cand[a] += t * step[a];
            }
            cand[last] = 1.0 - cand[..last].iter().sum::<f64>();
            if cand.iter().all(|&b| b > 0.0) {
                let v = log_obj(&cand);
                if v <= value + 0.25 * t * slope {
                    beta = cand;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // No further decrease is representable.
            return if -slope < 1e-8 { Ok(beta) } else { Err((iter, beta)) };
        }
    }
    Err((MAX_NEWTON_ITER, beta))
}

/// Brute-force minimum over the grid `β_i = j_i / steps`, `j_i ≥ 1`,
/// `Σ j_i ≤ steps`, for three-fraction objectives.
pub fn grid_minimum(consts: &ObjectiveConstants, steps: usize) -> Result<(f64, PowerSplit)> {
    if consts.dim() != 3 {
        return Err(Error::domain("grid search is implemented for three power fractions"));
    }
    let ln_grid: Vec<f64> = (0..=steps).map(|j| (j as f64 / steps as f64).ln()).collect();
    let mut best = (f64::INFINITY, [0usize; 3]);
    for i in 1..=steps {
        for j in 1..=steps - i {
            for k in 1..=steps - i - j {
                let lb = [ln_grid[i], ln_grid[j], ln_grid[k]];
                let v = consts.log_objective(&lb);
                if v < best.0 {
                    best = (v, [i, j, k]);
                }
            }
        }
    }
    let [i, j, k] = best.1;
    let s = steps as f64;
    let split = PowerSplit::from_fractions(&[i as f64 / s, j as f64 / s, k as f64 / s]);
    Ok((consts.evaluate(&split)?, split))
}
