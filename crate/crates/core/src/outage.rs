//! Closed-form per-block average outage probability of an L-relay selective
//! decode-and-forward network.
//!
//! Per codeword index Υ within a block, relay r decodes when its source link
//! SNR exceeds γ₀; the destination is in outage when the direct-link SNR plus
//! the SNRs of all decoding relays stays at or below γ₀. Link SNRs are Gamma
//! distributed: shape N² on the square source-relay channel, shape N·N_D on
//! the source-destination and relay-destination channels, and scale
//! `M(Υ)·Ω̃²` on every link.

use crate::error::{Error, Result};
use crate::fading::{effective_gain, m_factor, LinkStats};
use crate::gammasum::{sum_cdf, GammaComponent, GammaMixture};
use crate::power::{ObjectiveConstants, ObjectiveTerm, ObjectiveVariant, PowerSplit};
use crate::specfun::{ln_gamma_unchecked, regularized_gamma_pq, Accuracy};

/// Largest relay count accepted; decode sets are enumerated exhaustively.
pub const MAX_RELAYS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Antennas at the source and at every relay.
    pub n: u32,
    /// Destination antennas.
    pub n_d: u32,
    pub relays: usize,
    pub code_rate: f64,
    /// Codewords per block, M_b.
    pub block_len: u32,
    /// Nonzero symbol transmissions per codeword.
    pub n_a: u32,
    /// Outage SNR threshold γ₀.
    pub gamma0: f64,
    pub noise_density: f64,
    pub total_power: f64,
    pub split: PowerSplit,
    pub sd: LinkStats,
    pub sr: Vec<LinkStats>,
    pub rd: Vec<LinkStats>,
    /// Time slots per codeword; descriptive only.
    pub cw_slots: u32,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n_d == 0 {
            return Err(Error::domain("antenna counts must be positive"));
        }
        if self.relays == 0 || self.relays > MAX_RELAYS {
            return Err(Error::domain(format!(
                "relay count must lie in 1..={MAX_RELAYS}, got {}",
                self.relays
            )));
        }
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return Err(Error::domain(format!(
                "code rate must lie in (0, 1], got {}",
                self.code_rate
            )));
        }
        if self.block_len == 0 || self.n_a == 0 || self.cw_slots == 0 {
            return Err(Error::domain(
                "block length, symbol count and slot count must be positive",
            ));
        }
        if !(self.gamma0 >= 0.0) || !self.gamma0.is_finite() {
            return Err(Error::domain(format!(
                "outage threshold must be finite and nonnegative, got {}",
                self.gamma0
            )));
        }
        if !(self.noise_density > 0.0) || !(self.total_power > 0.0) {
            return Err(Error::domain("noise density and total power must be positive"));
        }
        if self.sr.len() != self.relays || self.rd.len() != self.relays {
            return Err(Error::domain(format!(
                "expected {} source-relay and relay-destination links, got {} and {}",
                self.relays,
                self.sr.len(),
                self.rd.len()
            )));
        }
        if self.split.relay_count() != self.relays {
            return Err(Error::domain(format!(
                "power split lists {} relays, network has {}",
                self.split.relay_count(),
                self.relays
            )));
        }
        self.split.validate()?;
        self.sd.validate()?;
        for l in self.sr.iter().chain(&self.rd) {
            l.validate()?;
        }
        Ok(())
    }

    /// Copy with `P/N₀` set to `snr_db`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let mut c = self.clone();
        c.total_power = self.noise_density * 10f64.powf(snr_db / 10.0);
        c
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.total_power / self.noise_density).log10()
    }

    /// `β P / (N₀ N R_C)` for a node holding power fraction `beta`.
    pub fn rho(&self, beta: f64) -> f64 {
        beta * self.total_power / (self.noise_density * self.n as f64 * self.code_rate)
    }

    pub fn source_rho(&self) -> f64 {
        self.rho(self.split.beta0)
    }

    pub fn relay_rho(&self, r: usize) -> f64 {
        self.rho(self.split.beta_r[r])
    }

    pub fn sr_shape(&self) -> f64 {
        (self.n * self.n) as f64
    }

    pub fn direct_shape(&self) -> f64 {
        (self.n * self.n_d) as f64
    }

    /// True when every link is static with perfect channel knowledge.
    pub fn is_ideal(&self) -> bool {
        self.sd.is_ideal() && self.sr.iter().chain(&self.rd).all(LinkStats::is_ideal)
    }

    fn is_static(&self) -> bool {
        self.sd.corr == 1.0 && self.sr.iter().chain(&self.rd).all(|l| l.corr == 1.0)
    }

    fn check_cw(&self, cw_index: u32) -> Result<()> {
        if cw_index == 0 || cw_index > self.block_len {
            return Err(Error::domain(format!(
                "codeword index must lie in 1..={}, got {cw_index}",
                self.block_len
            )));
        }
        Ok(())
    }

    fn check_relay(&self, r: usize) -> Result<()> {
        if r >= self.relays {
            return Err(Error::domain(format!(
                "relay index {r} out of range for {} relays",
                self.relays
            )));
        }
        Ok(())
    }

    /// Gamma scale `M(Υ) Ω̃²` of the direct link.
    pub fn sd_scale(&self, cw_index: u32) -> Result<f64> {
        Ok(m_factor(self.source_rho(), &self.sd, cw_index, self.n_a)? * effective_gain(&self.sd))
    }

    pub fn sr_scale(&self, r: usize, cw_index: u32) -> Result<f64> {
        let link = &self.sr[r];
        Ok(m_factor(self.source_rho(), link, cw_index, self.n_a)? * effective_gain(link))
    }

    pub fn rd_scale(&self, r: usize, cw_index: u32) -> Result<f64> {
        let link = &self.rd[r];
        Ok(m_factor(self.relay_rho(r), link, cw_index, self.n_a)? * effective_gain(link))
    }
}

/// Set of relays that decoded the source codeword (zero-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeSet {
    mask: u32,
}

impl DecodeSet {
    pub fn empty() -> Self {
        DecodeSet { mask: 0 }
    }

    pub fn all(relays: usize) -> Self {
        DecodeSet {
            mask: ((1u64 << relays) - 1) as u32,
        }
    }

    pub fn from_members(members: &[usize]) -> Self {
        DecodeSet {
            mask: members.iter().fold(0, |m, &r| m | (1 << r)),
        }
    }

    pub fn contains(&self, r: usize) -> bool {
        self.mask & (1 << r) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&r| self.contains(r))
    }

    /// Every subset of `{0, …, relays−1}`.
    pub fn enumerate(relays: usize) -> impl Iterator<Item = DecodeSet> {
        (0..(1u32 << relays)).map(|mask| DecodeSet { mask })
    }

    fn fits(&self, relays: usize) -> bool {
        self.mask >> relays == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutageMode {
    /// Average over decode sets weighted by their probabilities.
    #[default]
    TotalProbability,
    /// Failure-probability products only, without decode-success factors.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticMode {
    /// Three-term high-SNR expression as printed, with K₁, K₂, K₃ coefficients.
    PaperLiteral,
    /// Lowest-order term of every decode-set contribution.
    LeadingTerm,
}

/// Probability that relay `r` fails to decode codeword `cw_index`.
pub fn relay_outage_prob(cfg: &NetworkConfig, r: usize, cw_index: u32) -> Result<f64> {
    cfg.check_relay(r)?;
    cfg.check_cw(cw_index)?;
    Ok(relay_outage_pq(cfg, r, cw_index)?.0)
}

// (failure, success) probabilities of one relay.
fn relay_outage_pq(cfg: &NetworkConfig, r: usize, cw_index: u32) -> Result<(f64, f64)> {
    let scale = cfg.sr_scale(r, cw_index)?;
    regularized_gamma_pq(cfg.sr_shape(), cfg.gamma0 / scale)
}

fn combined_mixture(cfg: &NetworkConfig, psi: DecodeSet, cw_index: u32) -> Result<GammaMixture> {
    let shape = cfg.direct_shape();
    let mut comps = vec![GammaComponent {
        shape,
        scale: cfg.sd_scale(cw_index)?,
    }];
    for r in psi.members() {
        comps.push(GammaComponent {
            shape,
            scale: cfg.rd_scale(r, cw_index)?,
        });
    }
    GammaMixture::new(comps)
}

/// Probability that direct plus decoding-relay SNRs stay at or below γ₀.
pub fn combined_outage_prob(cfg: &NetworkConfig, psi: DecodeSet, cw_index: u32) -> Result<f64> {
    cfg.check_cw(cw_index)?;
    if !psi.fits(cfg.relays) {
        return Err(Error::domain("decode set names a relay outside the network"));
    }
    let mix = combined_mixture(cfg, psi, cw_index)?;
    sum_cdf(&mix, cfg.gamma0, &Accuracy::default())
}

fn outage_at_codeword(cfg: &NetworkConfig, mode: OutageMode, cw_index: u32) -> Result<f64> {
    let pq = (0..cfg.relays)
        .map(|r| relay_outage_pq(cfg, r, cw_index))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for psi in DecodeSet::enumerate(cfg.relays) {
        let mut weight = 1.0;
        for (r, &(fail, ok)) in pq.iter().enumerate() {
            if psi.contains(r) {
                if mode == OutageMode::TotalProbability {
                    weight *= ok;
                }
            } else {
                weight *= fail;
            }
        }
        if weight == 0.0 {
            continue;
        }
        total += weight * combined_outage_prob(cfg, psi, cw_index)?;
    }
    Ok(total)
}

/// Per-block average outage probability.
///
/// In [`OutageMode::TotalProbability`] the result is a probability. In
/// [`OutageMode::PaperLiteral`] the decode-success factors are dropped, so the
/// value upper-bounds the former and may exceed one at low SNR.
pub fn per_block_outage(cfg: &NetworkConfig, mode: OutageMode) -> Result<f64> {
    cfg.validate()?;
    if cfg.is_static() {
        return outage_at_codeword(cfg, mode, 1);
    }
    let mut sum = 0.0;
    for cw in 1..=cfg.block_len {
        sum += outage_at_codeword(cfg, mode, cw)?;
    }
    Ok(sum / cfg.block_len as f64)
}

fn check_asymptotic_preconditions(cfg: &NetworkConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.relays != 2 {
        return Err(Error::domain(format!(
            "the high-SNR expression is defined for two relays, got {}",
            cfg.relays
        )));
    }
    if !cfg.is_ideal() {
        return Err(Error::domain(
            "the high-SNR expression requires static links with perfect channel knowledge",
        ));
    }
    Ok(())
}

/// High-SNR approximation of [`per_block_outage`] for two static, perfectly
/// estimated relays.
pub fn asymptotic_outage(cfg: &NetworkConfig, mode: AsymptoticMode) -> Result<f64> {
    check_asymptotic_preconditions(cfg)?;
    let consts = match mode {
        AsymptoticMode::PaperLiteral => literal_constants(cfg)?,
        AsymptoticMode::LeadingTerm => leading_term_constants(cfg)?,
    };
    consts.evaluate(&cfg.split)
}

/// Coefficients of the printed three-term high-SNR expression.
///
/// Both relays must share the same source-relay and relay-destination gains.
pub(crate) fn literal_constants(cfg: &NetworkConfig) -> Result<ObjectiveConstants> {
    check_asymptotic_preconditions(cfg)?;
    if cfg.sr[0].avg_gain != cfg.sr[1].avg_gain || cfg.rd[0].avg_gain != cfg.rd[1].avg_gain {
        return Err(Error::domain(
            "the printed coefficients assume identical links for both relays",
        ));
    }
    let n2 = (cfg.n * cfg.n) as f64;
    let nnd = (cfg.n * cfg.n_d) as f64;
    let ln_g0 = cfg.gamma0.ln();
    let ln_nrc = (cfg.n as f64 * cfg.code_rate).ln();
    let ln_sr = cfg.sr[0].avg_gain.ln();
    let ln_sd = cfg.sd.avg_gain.ln();
    let ln_rd = cfg.rd[0].avg_gain.ln();
    let ln_np = (cfg.noise_density / cfg.total_power).ln();
    let e1 = 2.0 * n2 + nnd;

    let ln_k1 = e1 * (ln_g0 + ln_nrc) - 2.0 * n2 * ln_sr - nnd * ln_sd
        - 2.0 * ln_gamma_unchecked(n2 + 1.0)
        - nnd.ln()
        + e1 * ln_np;
    let ln_k2 = 2f64.ln() + (n2 + nnd) * ln_g0 + (n2 + 4.0 * nnd) * ln_nrc
        - n2 * ln_sr
        - nnd * ln_sd
        - 2.0 * nnd * ln_rd
        + (n2 + 4.0 * nnd) * ln_np
        - ln_gamma_unchecked(n2 + 1.0)
        - ln_gamma_unchecked(2.0 * nnd);
    let ln_k3 = (3.0 * nnd - 1.0) * ln_g0
        - 3.0 * nnd * (4.0 * cfg.total_power * cfg.total_power).ln()
        - ln_gamma_unchecked(3.0 * nnd);

    Ok(ObjectiveConstants::new(
        ObjectiveVariant::Literal,
        vec![
            ObjectiveTerm::new(ln_k1, vec![e1, 0.0, 0.0]),
            ObjectiveTerm::new(ln_k2, vec![e1 + n2 + 2.0 * nnd, 0.0, 2.0 * nnd]),
            ObjectiveTerm::new(ln_k3, vec![3.0 * nnd, 3.0 * nnd, 0.0]),
        ],
    ))
}

/// Lowest-order term of every decode-set contribution, as a posynomial in the
/// power fractions `[β₀, β₁, …, β_L]`.
///
/// With `c = N₀ N R_C / P`, each failing relay contributes
/// `(γ₀ c / (β₀ Ω_SR²))^{N²} / Γ(N²+1)` and the decoding set ψ contributes
/// `γ₀^{ρ_ψ} / Γ(ρ_ψ+1) · Π (c / (β Ω²))^{N N_D}` over the direct link and
/// the relays in ψ.
pub(crate) fn leading_term_constants(cfg: &NetworkConfig) -> Result<ObjectiveConstants> {
    check_asymptotic_preconditions(cfg)?;
    let n2 = cfg.sr_shape();
    let nnd = cfg.direct_shape();
    let ln_c = (cfg.noise_density * cfg.n as f64 * cfg.code_rate / cfg.total_power).ln();
    let ln_g0 = cfg.gamma0.ln();
    let dim = cfg.relays + 1;
    let mut terms = Vec::new();
    for psi in DecodeSet::enumerate(cfg.relays) {
        let mut exps = vec![0.0; dim];
        let mut ln_coeff = 0.0;
        for r in 0..cfg.relays {
            if !psi.contains(r) {
                ln_coeff += n2 * (ln_g0 + ln_c - cfg.sr[r].avg_gain.ln()) - ln_gamma_unchecked(n2 + 1.0);
                exps[0] += n2;
            }
        }
        let total_shape = nnd * (1 + psi.len()) as f64;
        ln_coeff += total_shape * ln_g0 - ln_gamma_unchecked(total_shape + 1.0);
        ln_coeff += nnd * (ln_c - cfg.sd.avg_gain.ln());
        exps[0] += nnd;
        for r in psi.members() {
            ln_coeff += nnd * (ln_c - cfg.rd[r].avg_gain.ln());
            exps[r + 1] += nnd;
        }
        terms.push(ObjectiveTerm::new(ln_coeff, exps));
    }
    Ok(ObjectiveConstants::new(ObjectiveVariant::Symmetrized, terms))
}

/// Diversity order `N N_D + N L min(N, N_D)` of static, perfectly estimated links.
pub fn diversity_order(n: u32, n_d: u32, l: u32) -> u32 {
    n * n_d + n * l * n.min(n_d)
}
