//! Monte Carlo estimator of the per-block average outage probability.
//!
//! Trials are split into fixed-size chunks. Chunk `c` draws from a ChaCha8
//! stream keyed by the user seed with stream id `c`, so the estimate depends
//! only on `(config, seed, trials)` and never on how chunks are scheduled
//! across threads. Each trial covers every codeword index of the block, which
//! stratifies the block average exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{ar1_step, draw_channel, m_factor, ChannelMatrix, LinkStats};
use crate::outage::NetworkConfig;

/// Trials per random stream.
pub const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Sample link SNRs directly from their Gamma laws.
    #[default]
    GammaDraw,
    /// Evolve channel matrices through the AR(1) model and form SNRs from them.
    Ar1Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Trials per codeword index.
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    /// Outage events observed.
    pub events: u64,
    /// Samples drawn, `trials × block_len`.
    pub trials: u64,
}

impl OutageEstimate {
    fn from_counts(events: u64, samples: u64) -> Self {
        let p = events as f64 / samples as f64;
        OutageEstimate {
            p_hat: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            events,
            trials: samples,
        }
    }
}

pub fn simulate_outage(cfg: &NetworkConfig, sim: &SimConfig) -> Result<OutageEstimate> {
    cfg.validate()?;
    if sim.trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let chunks = sim.trials.div_ceil(CHUNK_TRIALS);
    let events: u64 = match sim.mode {
        SimMode::GammaDraw => {
            let laws = GammaLaws::new(cfg)?;
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(sim.seed, c);
                    let n = chunk_len(sim.trials, c);
                    (0..n).map(|_| laws.trial(cfg.gamma0, &mut rng)).sum::<u64>()
                })
                .sum()
        }
        SimMode::Ar1Trajectory => {
            let traj = Trajectory::new(cfg)?;
            (0..chunks)
                .into_par_iter()
                .map(|c| -> Result<u64> {
                    let mut rng = chunk_rng(sim.seed, c);
                    let n = chunk_len(sim.trials, c);
                    let mut count = 0;
                    for _ in 0..n {
                        count += traj.trial(cfg, &mut rng)?;
                    }
                    Ok(count)
                })
                .collect::<Result<Vec<u64>>>()?
                .into_iter()
                .sum()
        }
    };
    Ok(OutageEstimate::from_counts(
        events,
        sim.trials * cfg.block_len as u64,
    ))
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_len(trials: u64, chunk: u64) -> u64 {
    (trials - chunk * CHUNK_TRIALS).min(CHUNK_TRIALS)
}

// Outage decision shared by both modes: relays with SNR above γ₀ decode.
fn is_outage(gamma0: f64, sd: f64, sr: &[f64], rd: &[f64]) -> bool {
    let mut total = sd;
    for (s, d) in sr.iter().zip(rd) {
        if *s > gamma0 {
            total += d;
        }
    }
    total <= gamma0
}

struct CodewordLaws {
    sd: Gamma<f64>,
    sr: Vec<Gamma<f64>>,
    rd: Vec<Gamma<f64>>,
}

struct GammaLaws {
    per_cw: Vec<CodewordLaws>,
}

impl GammaLaws {
    fn new(cfg: &NetworkConfig) -> Result<Self> {
        let law = |shape: f64, scale: f64| {
            Gamma::new(shape, scale).map_err(|e| Error::domain(format!("invalid Gamma law: {e}")))
        };
        let per_cw = (1..=cfg.block_len)
            .map(|cw| -> Result<CodewordLaws> {
                Ok(CodewordLaws {
                    sd: law(cfg.direct_shape(), cfg.sd_scale(cw)?)?,
                    sr: (0..cfg.relays)
                        .map(|r| law(cfg.sr_shape(), cfg.sr_scale(r, cw)?))
                        .collect::<Result<_>>()?,
                    rd: (0..cfg.relays)
                        .map(|r| law(cfg.direct_shape(), cfg.rd_scale(r, cw)?))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(GammaLaws { per_cw })
    }

    fn trial(&self, gamma0: f64, rng: &mut ChaCha8Rng) -> u64 {
        let mut events = 0;
        let relays = self.per_cw[0].sr.len();
        let mut sr = vec![0.0; relays];
        let mut rd = vec![0.0; relays];
        for laws in &self.per_cw {
            let sd = laws.sd.sample(rng);
            if sd > gamma0 {
                continue;
            }
            for r in 0..relays {
                sr[r] = laws.sr[r].sample(rng);
                rd[r] = laws.rd[r].sample(rng);
            }
            if is_outage(gamma0, sd, &sr, &rd) {
                events += 1;
            }
        }
        events
    }
}

struct LinkTrack {
    rows: usize,
    cols: usize,
    stats: LinkStats,
    // M(Υ) for Υ = 1..=M_b
    m: Vec<f64>,
}

impl LinkTrack {
    fn new(cfg: &NetworkConfig, rows: usize, cols: usize, stats: LinkStats, rho: f64) -> Result<Self> {
        let m = (1..=cfg.block_len)
            .map(|cw| m_factor(rho, &stats, cw, cfg.n_a))
            .collect::<Result<_>>()?;
        Ok(LinkTrack { rows, cols, stats, m })
    }

    /// Post-combining SNR for every codeword of one block.
    ///
    /// The true channel follows the AR(1) recursion from a stationary start;
    /// the receiver's estimate carries one CN(0, σ_est²) error drawn at the
    /// start of the block.
    fn snrs(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        let omega = self.stats.avg_gain;
        let mut h = draw_channel(self.rows, self.cols, omega, rng)?;
        let err = if self.stats.est_err_var > 0.0 {
            draw_channel(self.rows, self.cols, self.stats.est_err_var, rng)?
        } else {
            ChannelMatrix::zeros(self.rows, self.cols)
        };
        for (i, m) in self.m.iter().enumerate() {
            if i > 0 {
                let innovation = draw_channel(self.rows, self.cols, omega, rng)?;
                h = ar1_step(&h, self.stats.corr, &innovation)?;
            }
            out.push(m * h.add(&err)?.frobenius_sq());
        }
        Ok(())
    }
}

struct Trajectory {
    sd: LinkTrack,
    sr: Vec<LinkTrack>,
    rd: Vec<LinkTrack>,
}

impl Trajectory {
    fn new(cfg: &NetworkConfig) -> Result<Self> {
        let n = cfg.n as usize;
        let nd = cfg.n_d as usize;
        Ok(Trajectory {
            sd: LinkTrack::new(cfg, nd, n, cfg.sd, cfg.source_rho())?,
            sr: (0..cfg.relays)
                .map(|r| LinkTrack::new(cfg, n, n, cfg.sr[r], cfg.source_rho()))
                .collect::<Result<_>>()?,
            rd: (0..cfg.relays)
                .map(|r| LinkTrack::new(cfg, nd, n, cfg.rd[r], cfg.relay_rho(r)))
                .collect::<Result<_>>()?,
        })
    }

    fn trial(&self, cfg: &NetworkConfig, rng: &mut ChaCha8Rng) -> Result<u64> {
        let mut sd = Vec::new();
        self.sd.snrs(rng, &mut sd)?;
        let mut sr = vec![Vec::new(); cfg.relays];
        let mut rd = vec![Vec::new(); cfg.relays];
        for r in 0..cfg.relays {
            self.sr[r].snrs(rng, &mut sr[r])?;
            self.rd[r].snrs(rng, &mut rd[r])?;
        }
        let mut events = 0;
        let mut sr_cw = vec![0.0; cfg.relays];
        let mut rd_cw = vec![0.0; cfg.relays];
        for cw in 0..cfg.block_len as usize {
            for r in 0..cfg.relays {
                sr_cw[r] = sr[r][cw];
                rd_cw[r] = rd[r][cw];
            }
            if is_outage(cfg.gamma0, sd[cw], &sr_cw, &rd_cw) {
                events += 1;
            }
        }
        Ok(events)
    }
}
