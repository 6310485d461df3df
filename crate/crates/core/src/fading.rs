//! Time-selective Rayleigh fading with imperfect channel knowledge.
//!
//! Each link evolves as a first-order autoregressive process whose
//! coefficient comes from the Jakes model, `ε = J0(2π f_c v / (R_S c))`.
//! Estimation error and time variation enter the closed forms only through
//! [`effective_gain`] and [`m_factor`].

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::bessel_j0;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Mobility description of one link, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub carrier_hz: f64,
    pub speed_mps: f64,
    pub symbol_rate: f64,
    pub wave_speed_mps: f64,
}

impl MobilityParams {
    pub fn new(carrier_hz: f64, speed_mps: f64, symbol_rate: f64) -> Result<Self> {
        let m = MobilityParams {
            carrier_hz,
            speed_mps,
            symbol_rate,
            wave_speed_mps: SPEED_OF_LIGHT,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return Err(Error::domain("carrier frequency must be positive"));
        }
        if !(self.symbol_rate > 0.0) || !self.symbol_rate.is_finite() {
            return Err(Error::domain("symbol rate must be positive"));
        }
        // The sign of the speed is a direction; the correlation is even in it.
        if !self.speed_mps.is_finite() {
            return Err(Error::domain("speed must be finite"));
        }
        if !(self.wave_speed_mps > 0.0) || !self.wave_speed_mps.is_finite() {
            return Err(Error::domain("propagation speed must be positive"));
        }
        Ok(())
    }

    /// Argument of the Jakes autocorrelation, `2π f_c v / (R_S c)`.
    pub fn doppler_argument(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.carrier_hz * self.speed_mps
            / (self.symbol_rate * self.wave_speed_mps)
    }
}

/// Second-order statistics of one fading link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    /// Per-entry channel variance Ω².
    pub avg_gain: f64,
    /// Channel estimation error variance.
    pub est_err_var: f64,
    /// Variance attributed to time variation within the block.
    pub tv_err_var: f64,
    /// AR(1) correlation coefficient ε.
    pub corr: f64,
}

impl LinkStats {
    pub fn new(avg_gain: f64, est_err_var: f64, tv_err_var: f64, corr: f64) -> Result<Self> {
        let l = LinkStats {
            avg_gain,
            est_err_var,
            tv_err_var,
            corr,
        };
        l.validate()?;
        Ok(l)
    }

    /// Static link with perfect channel knowledge.
    pub fn ideal(avg_gain: f64) -> Self {
        LinkStats {
            avg_gain,
            est_err_var: 0.0,
            tv_err_var: 0.0,
            corr: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.avg_gain > 0.0) || !self.avg_gain.is_finite() {
            return Err(Error::domain(format!(
                "average gain must be positive, got {}",
                self.avg_gain
            )));
        }
        if !(self.est_err_var >= 0.0) || !(self.tv_err_var >= 0.0) {
            return Err(Error::domain("error variances must be nonnegative"));
        }
        if !(self.corr.abs() <= 1.0) {
            return Err(Error::domain(format!(
                "correlation coefficient must lie in [-1, 1], got {}",
                self.corr
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.est_err_var == 0.0 && self.tv_err_var == 0.0 && self.corr == 1.0
    }
}

/// Jakes correlation coefficient between consecutive codewords.
pub fn correlation_coefficient(m: &MobilityParams) -> Result<f64> {
    m.validate()?;
    bessel_j0(m.doppler_argument())
}

/// Ω̃² = Ω² + σ_est².
pub fn effective_gain(link: &LinkStats) -> f64 {
    link.avg_gain + link.est_err_var
}

/// Effective-SNR attenuation of codeword `cw_index` (1-based) within a block.
///
/// `M = ρ ε^{2(Υ−1)} / (1 + ρ ε^{2(Υ−1)} N_a σ_est² + ρ (1 − ε^{2(Υ−1)}) N_a σ_tv²)`
/// where `ρ = P / (N₀ N R_C)` is the per-antenna transmit SNR of the node.
pub fn m_factor(rho: f64, link: &LinkStats, cw_index: u32, n_a: u32) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("rho must be positive, got {rho}")));
    }
    if cw_index == 0 {
        return Err(Error::domain("codeword index is 1-based"));
    }
    let decay = link.corr.powi(2 * (cw_index as i32 - 1));
    let na = n_a as f64;
    let denom = 1.0
        + rho * decay * na * link.est_err_var
        + rho * (1.0 - decay) * na * link.tv_err_var;
    Ok(rho * decay / denom)
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_elem(rows: usize, cols: usize, value: Complex64) -> Self {
        ChannelMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_elem(rows, cols, Complex64::new(0.0, 0.0))
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ChannelMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    fn check_same_shape(&self, other: &ChannelMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape {
                expected_rows: self.rows,
                expected_cols: self.cols,
                found_rows: other.rows,
                found_cols: other.cols,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ChannelMatrix) -> Result<ChannelMatrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ChannelMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

/// One AR(1) step: `ε·prev + √(1−ε²)·innovation`, entrywise.
pub fn ar1_step(prev: &ChannelMatrix, corr: f64, innovation: &ChannelMatrix) -> Result<ChannelMatrix> {
    prev.check_same_shape(innovation)?;
    if !(corr.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "correlation coefficient must lie in [-1, 1], got {corr}"
        )));
    }
    let w = (1.0 - corr * corr).sqrt();
    let data = prev
        .data
        .iter()
        .zip(&innovation.data)
        .map(|(h, q)| h * corr + q * w)
        .collect();
    Ok(ChannelMatrix {
        rows: prev.rows,
        cols: prev.cols,
        data,
    })
}

/// Matrix of i.i.d. CN(0, `avg_gain`) entries.
pub fn draw_channel<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    avg_gain: f64,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if !(avg_gain > 0.0) || !avg_gain.is_finite() {
        return Err(Error::domain(format!(
            "average gain must be positive, got {avg_gain}"
        )));
    }
    let sd = (0.5 * avg_gain).sqrt();
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sd * re, sd * im)
        })
        .collect();
    Ok(ChannelMatrix { rows, cols, data })
}
