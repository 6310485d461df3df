mod common;

use common::{ideal, mobile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use relay_outage::fading::LinkStats;
use relay_outage::mcsim::{simulate_outage, SimConfig, SimMode};
use relay_outage::outage::{
    combined_outage_prob, per_block_outage, relay_outage_prob, DecodeSet, OutageMode,
};

#[test]
fn relay_outage_matches_sampled_link_snr() {
    let cfg = mobile(6.0);
    let n = 400_000;
    for cw in [1, 8, 15] {
        let p = relay_outage_prob(&cfg, 0, cw).unwrap();
        let law = Gamma::new(cfg.sr_shape(), cfg.sr_scale(0, cw).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cw as u64);
        let hits = (0..n).filter(|_| law.sample(&mut rng) <= cfg.gamma0).count();
        let emp = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() <= 3.0 * se, "cw {cw}: {emp} vs {p}");
    }
}

#[test]
fn combined_outage_matches_sampled_sum() {
    let mut cfg = mobile(4.0);
    cfg.rd[1] = LinkStats::new(5.0, 0.01, 0.1, 0.99).unwrap();
    let n = 400_000;
    for psi in DecodeSet::enumerate(2) {
        let cw = 5;
        let p = combined_outage_prob(&cfg, psi, cw).unwrap();
        let shape = cfg.direct_shape();
        let mut laws = vec![Gamma::new(shape, cfg.sd_scale(cw).unwrap()).unwrap()];
        for r in psi.members() {
            laws.push(Gamma::new(shape, cfg.rd_scale(r, cw).unwrap()).unwrap());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31 + psi.len() as u64);
        let hits = (0..n)
            .filter(|_| laws.iter().map(|g| g.sample(&mut rng)).sum::<f64>() <= cfg.gamma0)
            .count();
        let emp = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() <= 3.0 * se, "{psi:?}: {emp} vs {p}");
    }
}

#[test]
fn block_average_matches_simulation() {
    for db in [2.0, 6.0] {
        let cfg = mobile(db);
        let p = per_block_outage(&cfg, OutageMode::TotalProbability).unwrap();
        let est = simulate_outage(&cfg, &SimConfig { trials: 100_000, seed: 4, mode: SimMode::GammaDraw }).unwrap();
        let z = (est.p_hat - p) / est.stderr;
        assert!(z.abs() <= 3.0, "{db} dB: {} vs {p}", est.p_hat);
    }
}

#[test]
fn outage_falls_with_power_and_rises_with_threshold() {
    let mut last = f64::INFINITY;
    for i in 0..20 {
        let p = per_block_outage(&mobile(i as f64 * 2.0), OutageMode::TotalProbability).unwrap();
        assert!(p <= last, "power step {i}");
        last = p;
    }
    let mut last = -1.0;
    for i in 0..20 {
        let mut cfg = mobile(8.0);
        cfg.gamma0 = i as f64 * 0.5;
        let p = per_block_outage(&cfg, OutageMode::TotalProbability).unwrap();
        assert!(p >= last, "threshold step {i}");
        last = p;
    }
}

#[test]
fn total_probability_is_a_bounded_sum_of_decode_set_terms() {
    for db in [-5.0, 0.0, 5.0, 15.0, 30.0] {
        let cfg = mobile(db);
        let p = per_block_outage(&cfg, OutageMode::TotalProbability).unwrap();
        assert!((0.0..=1.0).contains(&p));
        let mut ceiling = 0.0;
        for cw in 1..=cfg.block_len {
            for psi in DecodeSet::enumerate(2) {
                ceiling += combined_outage_prob(&cfg, psi, cw).unwrap();
            }
        }
        ceiling /= cfg.block_len as f64;
        assert!(p <= ceiling * (1.0 + 1e-12));
        let literal = per_block_outage(&cfg, OutageMode::PaperLiteral).unwrap();
        assert!(p <= literal * (1.0 + 1e-12) && literal <= ceiling * (1.0 + 1e-12));
    }
}

#[test]
fn modes_agree_when_relays_always_decode() {
    let mut cfg = mobile(10.0);
    cfg.sr = vec![LinkStats::new(1e12, 0.0, 0.0, 1.0).unwrap(); 2];
    for cw in 1..=cfg.block_len {
        assert!(relay_outage_prob(&cfg, 0, cw).unwrap() < 1e-30);
    }
    let a = per_block_outage(&cfg, OutageMode::TotalProbability).unwrap();
    let b = per_block_outage(&cfg, OutageMode::PaperLiteral).unwrap();
    assert!(((a - b) / a).abs() < 1e-12);
}

#[test]
fn literal_mode_counts_every_decode_set_when_relays_always_fail() {
    // Both relays fail with probability 1. The total-probability result is
    // the direct-link outage alone; the literal form still adds the
    // decode-set terms because it drops the success factors.
    let mut cfg = mobile(10.0);
    cfg.gamma0 = 3.0;
    cfg.sr = vec![LinkStats::new(1e-12, 0.0, 0.0, 1.0).unwrap(); 2];
    assert_eq!(relay_outage_prob(&cfg, 0, 1).unwrap(), 1.0);
    let total = per_block_outage(&cfg, OutageMode::TotalProbability).unwrap();
    let literal = per_block_outage(&cfg, OutageMode::PaperLiteral).unwrap();
    let mut direct = 0.0;
    let mut every = 0.0;
    for cw in 1..=cfg.block_len {
        direct += combined_outage_prob(&cfg, DecodeSet::empty(), cw).unwrap();
        for psi in DecodeSet::enumerate(2) {
            every += combined_outage_prob(&cfg, psi, cw).unwrap();
        }
    }
    let m = cfg.block_len as f64;
    assert!((total - direct / m).abs() < 1e-15);
    assert!((literal - every / m).abs() < 1e-15);
    assert!(literal > total);
}

#[test]
fn estimation_error_sets_a_floor() {
    let floor = |db: f64| {
        let link = LinkStats::new(2.0, 0.1, 0.1, 0.9724).unwrap();
        let mut c = mobile(db);
        c.sd = link;
        c.sr = vec![link; 2];
        c.rd = vec![link; 2];
        per_block_outage(&c, OutageMode::TotalProbability).unwrap()
    };
    let (a, b) = (floor(50.0), floor(60.0));
    assert!((b / a - 1.0).abs() < 0.1, "{a} {b}");
    let clean = |db: f64| per_block_outage(&ideal(db, 2.0, 2.0, 2.0), OutageMode::TotalProbability).unwrap();
    assert!(clean(50.0) / clean(60.0) >= 10.0);
}

#[test]
fn ideal_slope_grows_toward_the_diversity_order() {
    let lg = |db: f64| per_block_outage(&ideal(db, 2.0, 2.0, 2.0), OutageMode::TotalProbability).unwrap().log10();
    let mut last = 0.0;
    let mut db = 25.0;
    while db < 35.0 {
        let slope = (lg(db) - lg(db + 1.0)) * 10.0;
        assert!(slope >= last - 1e-9 && slope <= 12.0, "{db}: {slope}");
        last = slope;
        db += 1.0;
    }
}
