//! JSON configuration files.
//!
//! ```json
//! {
//!   "network": { "n": 2, "n_d": 2, "relays": 2, "code_rate": 1.0, "block_len": 15,
//!                "n_a": 2, "gamma0": 3.0, "noise_density": 1.0, "split": "equal" },
//!   "links": {
//!     "sd": { "avg_gain": 2.0, "est_err_var": 0.01, "tv_err_var": 0.1 },
//!     "sr": { "avg_gain": 2.0, "est_err_var": 0.01, "tv_err_var": 0.1 },
//!     "rd": { "avg_gain": 2.0, "est_err_var": 0.01, "tv_err_var": 0.1 }
//!   },
//!   "mobility": { "carrier_hz": 5.9e9, "speed": "32 mi/h", "symbol_rate": 1e4 },
//!   "sweep": { "snr_db_start": 0, "snr_db_stop": 30, "snr_db_step": 2 },
//!   "sim": { "trials": 1000000, "seed": 7, "mode": "gamma-draw" }
//! }
//! ```
//!
//! A link without `corr` takes the Jakes coefficient of the `mobility`
//! section. `sr` and `rd` accept one object (shared by every relay) or a
//! list with one entry per relay. `gamma0` may be replaced by `rate_target`
//! R, giving `γ₀ = 2^{2R} − 1`. Speeds need an explicit `m/s` or `mi/h` unit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fading::{correlation_coefficient, LinkStats, MobilityParams, SPEED_OF_LIGHT};
use crate::mcsim::{SimConfig, SimMode};
use crate::outage::NetworkConfig;
use crate::power::PowerSplit;

pub const METERS_PER_SECOND_PER_MPH: f64 = 0.447_04;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub links: LinksSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mobility: Option<MobilitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
}

fn default_cw_slots() -> u32 {
    2
}

fn default_noise_density() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n: u32,
    pub n_d: u32,
    pub relays: usize,
    pub code_rate: f64,
    pub block_len: u32,
    pub n_a: u32,
    #[serde(default = "default_cw_slots")]
    pub cw_slots: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_target: Option<f64>,
    #[serde(default = "default_noise_density")]
    pub noise_density: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power: Option<f64>,
    #[serde(default)]
    pub split: SplitSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitSpec {
    Named(String),
    Explicit { beta0: f64, beta_r: Vec<f64> },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Named("equal".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub avg_gain: f64,
    #[serde(default)]
    pub est_err_var: f64,
    #[serde(default)]
    pub tv_err_var: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinkList {
    Shared(LinkSpec),
    PerRelay(Vec<LinkSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksSection {
    pub sd: LinkSpec,
    pub sr: LinkList,
    pub rd: LinkList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySection {
    pub carrier_hz: f64,
    /// Number followed by `m/s` or `mi/h`.
    pub speed: String,
    pub symbol_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_speed_mps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !self.snr_db_start.is_finite() || !self.snr_db_stop.is_finite() {
            return Err("sweep bounds must be finite".into());
        }
        if !(self.snr_db_step > 0.0) {
            return Err(format!("sweep step must be positive, got {}", self.snr_db_step));
        }
        if self.snr_db_start > self.snr_db_stop {
            return Err(format!(
                "sweep start {} exceeds stop {}",
                self.snr_db_start, self.snr_db_stop
            ));
        }
        Ok(())
    }

    /// SNR grid in dB, ascending, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let span = self.snr_db_stop - self.snr_db_start;
        let count = (span / self.snr_db_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.snr_db_start + i as f64 * self.snr_db_step;
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_sim_mode")]
    pub mode: String,
}

fn default_sim_mode() -> String {
    "gamma-draw".into()
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    /// Whether `total_power` was given explicitly.
    pub power_specified: bool,
    pub mobility: Option<MobilityParams>,
    pub sweep: Option<SweepSpec>,
    pub sim: Option<SimConfig>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| ConfigError {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    file.into_scenario().map_err(|(key, message)| ConfigError {
        line: key.and_then(|k| locate_key(text, k)),
        message,
    })
}

fn locate_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// Parses `"<value> m/s"` or `"<value> mi/h"` into meters per second.
pub fn parse_speed(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, factor) = if let Some(v) = s.strip_suffix("mi/h") {
        (v, METERS_PER_SECOND_PER_MPH)
    } else if let Some(v) = s.strip_suffix("m/s") {
        (v, 1.0)
    } else {
        return Err(format!("speed \"{s}\" needs a unit suffix, m/s or mi/h"));
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from speed \"{s}\""))?;
    Ok(v * factor)
}

type KeyedError = (Option<&'static str>, String);

fn keyed(key: &'static str) -> impl Fn(String) -> KeyedError {
    move |m| (Some(key), m)
}

impl ConfigFile {
    fn into_scenario(self) -> Result<Scenario, KeyedError> {
        let net = &self.network;
        let mobility = match &self.mobility {
            Some(m) => {
                let speed = parse_speed(&m.speed).map_err(keyed("speed"))?;
                let p = MobilityParams {
                    carrier_hz: m.carrier_hz,
                    speed_mps: speed,
                    symbol_rate: m.symbol_rate,
                    wave_speed_mps: m.wave_speed_mps.unwrap_or(SPEED_OF_LIGHT),
                };
                p.validate().map_err(|e| (Some("mobility"), e.to_string()))?;
                Some(p)
            }
            None => None,
        };
        let resolve = |spec: &LinkSpec, key: &'static str| -> Result<LinkStats, KeyedError> {
            let corr = match (spec.corr, &mobility) {
                (Some(c), _) => c,
                (None, Some(m)) => correlation_coefficient(m).map_err(|e| (Some(key), e.to_string()))?,
                (None, None) => {
                    return Err((
                        Some(key),
                        format!("link \"{key}\" has no corr and there is no mobility section"),
                    ))
                }
            };
            let l = LinkStats {
                avg_gain: spec.avg_gain,
                est_err_var: spec.est_err_var,
                tv_err_var: spec.tv_err_var,
                corr,
            };
            l.validate().map_err(|e| (Some(key), format!("link \"{key}\": {e}")))?;
            Ok(l)
        };
        let expand = |list: &LinkList, key: &'static str| -> Result<Vec<LinkStats>, KeyedError> {
            match list {
                LinkList::Shared(s) => Ok(vec![resolve(s, key)?; net.relays]),
                LinkList::PerRelay(v) => {
                    if v.len() != net.relays {
                        return Err((
                            Some(key),
                            format!("\"{key}\" lists {} links for {} relays", v.len(), net.relays),
                        ));
                    }
                    v.iter().map(|s| resolve(s, key)).collect()
                }
            }
        };
        let sd = resolve(&self.links.sd, "sd")?;
        let sr = expand(&self.links.sr, "sr")?;
        let rd = expand(&self.links.rd, "rd")?;

        let gamma0 = match (net.gamma0, net.rate_target) {
            (Some(g), None) => g,
            (None, Some(r)) => {
                if !(r >= 0.0) {
                    return Err((Some("rate_target"), format!("rate target must be nonnegative, got {r}")));
                }
                2f64.powf(2.0 * r) - 1.0
            }
            (Some(_), Some(_)) => {
                return Err((Some("rate_target"), "give either gamma0 or rate_target, not both".into()))
            }
            (None, None) => return Err((Some("network"), "network needs gamma0 or rate_target".into())),
        };
        let split = match &net.split {
            SplitSpec::Named(name) if name == "equal" => PowerSplit::equal(net.relays),
            SplitSpec::Named(name) => {
                return Err((Some("split"), format!("unknown split \"{name}\"; use \"equal\" or explicit fractions")))
            }
            SplitSpec::Explicit { beta0, beta_r } => PowerSplit {
                beta0: *beta0,
                beta_r: beta_r.clone(),
            },
        };
        let network = NetworkConfig {
            n: net.n,
            n_d: net.n_d,
            relays: net.relays,
            code_rate: net.code_rate,
            block_len: net.block_len,
            n_a: net.n_a,
            gamma0,
            noise_density: net.noise_density,
            total_power: net.total_power.unwrap_or(net.noise_density),
            split,
            sd,
            sr,
            rd,
            cw_slots: net.cw_slots,
        };
        network.validate().map_err(|e| (Some("network"), e.to_string()))?;

        if let Some(s) = &self.sweep {
            s.validate().map_err(keyed("sweep"))?;
        }
        let sim = match &self.sim {
            Some(s) => {
                let mode = parse_sim_mode(&s.mode).map_err(keyed("mode"))?;
                if s.trials == 0 {
                    return Err((Some("trials"), "trials must be at least 1".into()));
                }
                Some(SimConfig {
                    trials: s.trials,
                    seed: s.seed,
                    mode,
                })
            }
            None => None,
        };
        Ok(Scenario {
            network,
            power_specified: net.total_power.is_some(),
            mobility,
            sweep: self.sweep,
            sim,
        })
    }
}

pub fn parse_sim_mode(s: &str) -> Result<SimMode, String> {
    match s {
        "gamma-draw" => Ok(SimMode::GammaDraw),
        "ar1-trajectory" => Ok(SimMode::Ar1Trajectory),
        other => Err(format!(
            "unknown simulation mode \"{other}\"; use gamma-draw or ar1-trajectory"
        )),
    }
}

fn sim_mode_name(m: SimMode) -> &'static str {
    match m {
        SimMode::GammaDraw => "gamma-draw",
        SimMode::Ar1Trajectory => "ar1-trajectory",
    }
}

fn link_spec(l: &LinkStats) -> LinkSpec {
    LinkSpec {
        avg_gain: l.avg_gain,
        est_err_var: l.est_err_var,
        tv_err_var: l.tv_err_var,
        corr: Some(l.corr),
    }
}

impl Scenario {
    /// Canonical configuration document that parses back to `self`.
    pub fn to_config_file(&self) -> ConfigFile {
        let n = &self.network;
        ConfigFile {
            network: NetworkSection {
                n: n.n,
                n_d: n.n_d,
                relays: n.relays,
                code_rate: n.code_rate,
                block_len: n.block_len,
                n_a: n.n_a,
                cw_slots: n.cw_slots,
                gamma0: Some(n.gamma0),
                rate_target: None,
                noise_density: n.noise_density,
                total_power: self.power_specified.then_some(n.total_power),
                split: SplitSpec::Explicit {
                    beta0: n.split.beta0,
                    beta_r: n.split.beta_r.clone(),
                },
            },
            links: LinksSection {
                sd: link_spec(&n.sd),
                sr: LinkList::PerRelay(n.sr.iter().map(link_spec).collect()),
                rd: LinkList::PerRelay(n.rd.iter().map(link_spec).collect()),
            },
            mobility: self.mobility.map(|m| MobilitySection {
                carrier_hz: m.carrier_hz,
                speed: format!("{} m/s", m.speed_mps),
                symbol_rate: m.symbol_rate,
                wave_speed_mps: Some(m.wave_speed_mps),
            }),
            sweep: self.sweep,
            sim: self.sim.map(|s| SimSection {
                trials: s.trials,
                seed: s.seed,
                mode: sim_mode_name(s.mode).into(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_config_file())
            .expect("configuration documents always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "network": { "n": 2, "n_d": 2, "relays": 2, "code_rate": 1.0, "block_len": 15,
               "n_a": 2, "gamma0": 3.0 },
  "links": {
    "sd": { "avg_gain": 2.0, "est_err_var": 0.01, "tv_err_var": 0.1 },
    "sr": { "avg_gain": 2.0, "est_err_var": 0.01, "tv_err_var": 0.1 },
    "rd": [ { "avg_gain": 2.0, "corr": 1.0 }, { "avg_gain": 3.0, "corr": 0.5 } ]
  },
  "mobility": { "carrier_hz": 5.9e9, "speed": "32 mi/h", "symbol_rate": 1e4 }
}"#;

    #[test]
    fn parses_and_resolves_links() {
        let s = parse_config(BASE).unwrap();
        assert_eq!(s.network.sr.len(), 2);
        assert!((s.network.sd.corr - 0.992_192_613_843_304_5).abs() < 1e-12);
        assert_eq!(s.network.rd[1].corr, 0.5);
        assert_eq!(s.network.split, PowerSplit::equal(2));
        assert!(!s.power_specified);
        let m = s.mobility.unwrap();
        assert!((m.speed_mps - 14.305_28).abs() < 1e-12);
    }

    #[test]
    fn speed_units() {
        assert_eq!(parse_speed("10 m/s").unwrap(), 10.0);
        assert!((parse_speed("58 mi/h").unwrap() - 25.928_32).abs() < 1e-12);
        assert!(parse_speed("58").is_err());
        assert!(parse_speed("fast m/s").is_err());
    }

    #[test]
    fn rate_target_sets_threshold() {
        let text = BASE.replace("\"gamma0\": 3.0", "\"rate_target\": 1.5");
        let s = parse_config(&text).unwrap();
        assert!((s.network.gamma0 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = BASE.replace("\"n_a\": 2,", "\"n_a\": 2,,");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let text = BASE.replace("\"speed\": \"32 mi/h\"", "\"speed\": \"32\"");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.to_string().starts_with("config error at line 9"));

        let text = BASE.replace("{ \"avg_gain\": 3.0, \"corr\": 0.5 }", "{ \"avg_gain\": -3.0, \"corr\": 0.5 }");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(7));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = BASE.replace("\"n_a\": 2,", "\"n_a\": 2, \"antennas\": 4,");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn missing_corr_without_mobility() {
        let text = r#"{
  "network": { "n": 1, "n_d": 1, "relays": 1, "code_rate": 1.0, "block_len": 1, "n_a": 1, "gamma0": 1.0 },
  "links": { "sd": { "avg_gain": 1.0 }, "sr": { "avg_gain": 1.0, "corr": 1.0 }, "rd": { "avg_gain": 1.0, "corr": 1.0 } }
}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.message.contains("no corr"));
    }

    #[test]
    fn sweep_points() {
        let s = SweepSpec { snr_db_start: 0.0, snr_db_stop: 30.0, snr_db_step: 2.0 };
        assert_eq!(s.points().len(), 16);
        let one = SweepSpec { snr_db_start: 5.0, snr_db_stop: 5.0, snr_db_step: 1.0 };
        assert_eq!(one.points(), vec![5.0]);
        let fine = SweepSpec { snr_db_start: 0.0, snr_db_stop: 1.0, snr_db_step: 0.1 };
        assert_eq!(fine.points().len(), 11);
        assert_eq!(fine.points()[3], 0.3);
        assert!(SweepSpec { snr_db_start: 2.0, snr_db_stop: 1.0, snr_db_step: 1.0 }.validate().is_err());
    }

    #[test]
    fn print_round_trip() {
        let s = parse_config(BASE).unwrap();
        let again = parse_config(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }
}
