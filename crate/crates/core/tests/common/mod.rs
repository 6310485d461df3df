#![allow(dead_code)]

use relay_outage::fading::LinkStats;
use relay_outage::outage::NetworkConfig;
use relay_outage::power::PowerSplit;
use relay_outage::specfun::{ln_gamma, regularized_gamma_pq};

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// Two relays, 2x2 antennas, fifteen codewords per block, moderate mobility.
pub fn mobile(snr_db: f64) -> NetworkConfig {
    let link = LinkStats::new(2.0, 0.01, 0.10, 0.9915).unwrap();
    NetworkConfig {
        n: 2,
        n_d: 2,
        relays: 2,
        code_rate: 1.0,
        block_len: 15,
        n_a: 2,
        gamma0: 3.0,
        noise_density: 1.0,
        total_power: 1.0,
        split: PowerSplit::equal(2),
        sd: link,
        sr: vec![link; 2],
        rd: vec![link; 2],
        cw_slots: 2,
    }
    .with_snr_db(snr_db)
}

/// Static links with perfect channel knowledge.
pub fn ideal(snr_db: f64, sd: f64, sr: f64, rd: f64) -> NetworkConfig {
    NetworkConfig {
        block_len: 1,
        sd: LinkStats::ideal(sd),
        sr: vec![LinkStats::ideal(sr); 2],
        rd: vec![LinkStats::ideal(rd); 2],
        ..mobile(snr_db)
    }
}

pub fn gamma_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if shape == 1.0 { 1.0 / scale } else { 0.0 };
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape).unwrap() - shape * scale.ln()).exp()
}

pub fn gamma_cdf(shape: f64, scale: f64, x: f64) -> f64 {
    regularized_gamma_pq(shape, x / scale).unwrap().0
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Split into panels first so narrow peaks are not missed.
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// CDF of the sum of two independent Gamma variates by numerical convolution.
pub fn convolved_cdf(a1: f64, s1: f64, a2: f64, s2: f64, x: f64) -> f64 {
    integrate(&|t| gamma_pdf(a1, s1, t) * gamma_cdf(a2, s2, x - t), 0.0, x, 1e-12)
}

pub fn convolved_pdf(a1: f64, s1: f64, a2: f64, s2: f64, x: f64) -> f64 {
    integrate(&|t| gamma_pdf(a1, s1, t) * gamma_pdf(a2, s2, x - t), 0.0, x, 1e-12)
}

/// Two-component grid: shapes × scales, sixteen cases.
pub fn two_component_grid() -> Vec<[(f64, f64); 2]> {
    let shapes = [(1.0, 1.0), (1.0, 3.0), (2.5, 2.0), (4.0, 6.0)];
    let scales = [(1.0, 2.0), (0.5, 4.0), (3.0, 1.5), (1.0, 1.1)];
    let mut out = Vec::new();
    for (a1, a2) in shapes {
        for (s1, s2) in scales {
            out.push([(a1, s1), (a2, s2)]);
        }
    }
    out
}

pub fn three_component_mixtures() -> Vec<[(f64, f64); 3]> {
    vec![
        [(1.0, 1.0), (2.0, 2.0), (3.0, 0.5)],
        [(4.0, 0.3), (4.0, 1.2), (8.0, 0.9)],
        [(0.5, 5.0), (1.5, 1.0), (2.0, 3.0)],
    ]
}
