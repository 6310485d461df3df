//! Distribution of a sum of independent Gamma variates with arbitrary scales.
//!
//! Uses the Moschopoulos single-series representation. With `θ₁ = min θᵢ`,
//! `ρ = Σ αᵢ` and `A = Π (θ₁/θᵢ)^{αᵢ}`,
//!
//! ```text
//! f(ξ) = A Σₙ δₙ ξ^{ρ+n−1} e^{−ξ/θ₁} / (Γ(ρ+n) θ₁^{ρ+n})
//! F(ξ) = A Σₙ δₙ P(ρ+n, ξ/θ₁)
//! ```
//!
//! The weights `A δₙ` are nonnegative and sum to one, so `1 − A Σ_{k≤n} δₖ` is
//! the exact probability mass still missing after `n` terms. Combined with the
//! monotonicity of `P(s, x)` and of the Gamma density in `s`, this gives a
//! computable tail bound for both series.
//!
//! Everything here is in scale parameters θ.

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_unchecked, ln_kummer_1f1, regularized_gamma_pq, Accuracy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaComponent {
    pub shape: f64,
    pub scale: f64,
}

/// A nonempty list of independent Gamma(shape, scale) components.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMixture {
    components: Vec<GammaComponent>,
}

impl GammaMixture {
    pub fn new(components: Vec<GammaComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a Gamma mixture needs at least one component"));
        }
        for c in &components {
            if !(c.shape > 0.0) || !c.shape.is_finite() || !(c.scale > 0.0) || !c.scale.is_finite() {
                return Err(Error::domain(format!(
                    "Gamma component needs positive finite shape and scale, got ({}, {})",
                    c.shape, c.scale
                )));
            }
        }
        Ok(GammaMixture { components })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(shape, scale)| GammaComponent { shape, scale })
                .collect(),
        )
    }

    pub fn components(&self) -> &[GammaComponent] {
        &self.components
    }

    pub fn total_shape(&self) -> f64 {
        self.components.iter().map(|c| c.shape).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.shape * c.scale).sum()
    }

    fn sorted(&self) -> Vec<GammaComponent> {
        let mut v = self.components.clone();
        v.sort_by(|a, b| {
            a.scale
                .total_cmp(&b.scale)
                .then(a.shape.total_cmp(&b.shape))
        });
        v
    }
}

/// Precomputed series data for one mixture.
///
/// `weights` holds `A δₙ` rather than `δₙ` so that large `δₙ` never overflow;
/// [`SeriesState::deltas`] recovers the raw coefficients.
#[derive(Debug, Clone)]
pub struct SeriesState {
    pub base_scale: f64,
    pub norm_const: f64,
    pub total_shape: f64,
    weights: Vec<f64>,
    // Σ_j α_j (1 − θ₁/θ_j)^i, index i ≥ 1 (slot 0 unused)
    power_sums: Vec<f64>,
    // (α_j, 1 − θ₁/θ_j) in sorted order
    factors: Vec<(f64, f64)>,
    mass: f64,
}

impl SeriesState {
    pub fn new(mix: &GammaMixture) -> Result<Self> {
        let sorted = mix.sorted();
        let base_scale = sorted[0].scale;
        let ln_a: f64 = sorted
            .iter()
            .map(|c| c.shape * (base_scale / c.scale).ln())
            .sum();
        if ln_a < -700.0 {
            return Err(Error::domain(format!(
                "scale spread too wide for the single-series representation (ln A = {ln_a:.1})"
            )));
        }
        let norm_const = ln_a.exp();
        let factors = sorted
            .iter()
            .map(|c| (c.shape, 1.0 - base_scale / c.scale))
            .collect();
        Ok(SeriesState {
            base_scale,
            norm_const,
            total_shape: sorted.iter().map(|c| c.shape).sum(),
            weights: vec![norm_const],
            power_sums: vec![0.0],
            factors,
            mass: norm_const,
        })
    }

    /// Largest `1 − θ₁/θⱼ`; the coefficients decay geometrically at this rate.
    pub fn decay_ratio(&self) -> f64 {
        self.factors.iter().map(|f| f.1).fold(0.0, f64::max)
    }

    /// Weight `A δₙ`, extending the recursion as needed.
    pub fn weight(&mut self, n: usize) -> f64 {
        while self.weights.len() <= n {
            self.extend();
        }
        self.weights[n]
    }

    /// Probability mass not yet covered by weights `0..=n`.
    pub fn remaining_mass(&mut self, n: usize) -> f64 {
        while self.weights.len() <= n {
            self.extend();
        }
        (1.0 - self.mass_through(n)).max(0.0)
    }

    fn mass_through(&self, n: usize) -> f64 {
        if n + 1 == self.weights.len() {
            self.mass
        } else {
            self.weights[..=n].iter().sum()
        }
    }

    fn extend(&mut self) {
        let k = self.weights.len();
        let s: f64 = self.factors.iter().map(|&(a, f)| a * f.powi(k as i32)).sum();
        self.power_sums.push(s);
        let acc: f64 = (1..=k)
            .map(|i| self.power_sums[i] * self.weights[k - i])
            .sum();
        let w = acc / k as f64;
        self.weights.push(w);
        self.mass += w;
    }

    /// Raw coefficients `δ₀..=δ_{n_max}`.
    pub fn deltas(&mut self, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|n| self.weight(n) / self.norm_const).collect()
    }
}

/// Moschopoulos coefficients `δ₀..=δ_{n_max}` (with `δ₀ = 1`).
pub fn delta_coefficients(mix: &GammaMixture, n_max: usize) -> Result<Vec<f64>> {
    let mut state = SeriesState::new(mix)?;
    let mut d = state.deltas(n_max);
    d[0] = 1.0;
    Ok(d)
}

fn ln_gamma_density(shape: f64, scale: f64, xi: f64) -> f64 {
    (shape - 1.0) * xi.ln() - xi / scale - ln_gamma_unchecked(shape) - shape * scale.ln()
}

fn check_argument(xi: f64) -> Result<()> {
    if !(xi >= 0.0) || xi.is_nan() {
        return Err(Error::domain(format!("argument must be nonnegative, got {xi}")));
    }
    Ok(())
}

/// Density of the sum at `xi`.
pub fn sum_pdf(mix: &GammaMixture, xi: f64, acc: &Accuracy) -> Result<f64> {
    check_argument(xi)?;
    let mut state = SeriesState::new(mix)?;
    let rho = state.total_shape;
    let theta = state.base_scale;
    if xi == 0.0 {
        return Ok(if rho < 1.0 {
            f64::INFINITY
        } else if rho == 1.0 {
            state.norm_const / theta
        } else {
            0.0
        });
    }
    if xi.is_infinite() {
        return Ok(0.0);
    }
    let x = xi / theta;
    let mut sum = 0.0;
    for n in 0..acc.max_terms {
        let shape = rho + n as f64;
        sum += state.weight(n) * ln_gamma_density(shape, theta, xi).exp();
        let rem = state.remaining_mass(n);
        // Gamma densities with shape ≥ 1 are bounded by 1/θ and decrease in
        // shape once the shape exceeds x + 1.
        let next = shape + 1.0;
        let bound = if next - 1.0 >= x {
            rem * ln_gamma_density(next, theta, xi).exp()
        } else {
            rem / theta
        };
        if bound <= acc.abs_tol * sum || bound <= f64::MIN_POSITIVE {
            return Ok(sum);
        }
    }
    Err(Error::Accuracy {
        what: "Gamma-sum density series",
        terms: acc.max_terms,
    })
}

/// CDF of the sum at `xi`, `A Σ δₙ P(ρ+n, ξ/θ₁)`.
///
/// Terms are added until the certified tail is below `abs_tol` times the
/// partial sum, which also bounds the absolute error by `abs_tol`.
pub fn sum_cdf(mix: &GammaMixture, xi: f64, acc: &Accuracy) -> Result<f64> {
    check_argument(xi)?;
    let mut state = SeriesState::new(mix)?;
    cdf_series(&mut state, xi, acc, |s, x| regularized_gamma_pq(s, x).map(|(p, _)| p))
}

/// Same CDF through the confluent hypergeometric form
/// `P(s, x) = x^s ₁F₁(s; 1+s; −x) / (s Γ(s))`.
///
/// Kept as an independent evaluation path for cross-checking [`sum_cdf`].
pub fn sum_cdf_hypergeometric(mix: &GammaMixture, xi: f64, acc: &Accuracy) -> Result<f64> {
    check_argument(xi)?;
    let mut state = SeriesState::new(mix)?;
    let inner = *acc;
    cdf_series(&mut state, xi, acc, move |s, x| {
        let (ln_m, sign) = ln_kummer_1f1(s, s + 1.0, -x, &inner)?;
        Ok(sign * (s * x.ln() - s.ln() - ln_gamma_unchecked(s) + ln_m).exp())
    })
}

fn cdf_series<F>(state: &mut SeriesState, xi: f64, acc: &Accuracy, p: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if xi == 0.0 {
        return Ok(0.0);
    }
    if xi.is_infinite() {
        return Ok(1.0);
    }
    let x = xi / state.base_scale;
    let rho = state.total_shape;
    let mut sum = 0.0;
    for n in 0..acc.max_terms {
        let pn = p(rho + n as f64, x)?;
        sum += state.weight(n) * pn;
        // P(s, x) is decreasing in s, so every later term is at most its
        // weight times the current P value.
        let bound = state.remaining_mass(n) * pn;
        if bound <= acc.abs_tol * sum || bound == 0.0 {
            return Ok(sum.min(1.0));
        }
    }
    Err(Error::Accuracy {
        what: "Gamma-sum CDF series",
        terms: acc.max_terms,
    })
}
