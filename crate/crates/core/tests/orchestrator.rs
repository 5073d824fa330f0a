use geoqrypt::localization::{fisher_matrix, position_covariance, Scenario};
use geoqrypt::orchestrator::{
    provision, reconstruct, relocation_attack, run_session, split_instructions, xor_all, DeviceModel, InstructionRecord,
    ProvisionCounts, Refusal, RelocationPlan, SessionConfig, SessionError, SlotRole, DECRYPTOR_QUBIT,
};
use geoqrypt::quantum::{measure_qubit, Basis};
use geoqrypt::{rng, Point};
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn config() -> SessionConfig {
    let mut s = Scenario::centered_square(1000.0, 1.8).unwrap();
    s.t_d = 10.0;
    SessionConfig::new(s)
}

fn drms(c: &SessionConfig) -> f64 {
    let s = &c.scenario;
    position_covariance(&fisher_matrix(&s.claim, s).unwrap()).unwrap().drms()
}

fn chi2_p(stat: f64, dof: usize) -> f64 {
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat)
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that a uniformly random `moved`-subset of `total` slots misses
/// all `tokens` token slots, by enumerating every subset.
fn enumerate_stay_probability(total: u32, tokens: u32, moved: u32) -> f64 {
    let token_mask = (1u64 << tokens) - 1;
    let (mut stay, mut all) = (0u64, 0u64);
    // Gosper's hack walks the `moved`-subsets of `total` bits.
    let mut set: u64 = (1 << moved) - 1;
    while set < 1 << total {
        all += 1;
        if set & token_mask == 0 {
            stay += 1;
        }
        let c = set & set.wrapping_neg();
        let r = set + c;
        set = (((r ^ set) >> 2) / c) | r;
    }
    stay as f64 / all as f64
}

#[test]
fn hypergeometric_oracle_agrees_with_closed_form() {
    let small = enumerate_stay_probability(12, 2, 6);
    assert!((small - binomial(10, 6) / binomial(12, 6)).abs() < 1e-15);
    let large = enumerate_stay_probability(24, 8, 12);
    assert!((large - binomial(16, 12) / binomial(24, 12)).abs() < 1e-15);
    assert!((large - binomial(12, 8) / binomial(24, 8)).abs() < 1e-15);
}

#[test]
fn obfuscated_halves_are_indistinguishable() {
    let counts = ProvisionCounts { n_message: 10_000, n_teleport: 0, n_qlv: 10_000, n_decoy: 0 };
    let mut r = rng::from_seed(1);
    let (view, ledger) = provision(counts, &mut r);
    // ones[0]: message halves, ones[1]: tokens.
    let mut ones = [0f64; 2];
    for slot in &view.slots {
        let (bit, _) = measure_qubit(&slot.state, DECRYPTOR_QUBIT, Basis::Z, &mut r).unwrap();
        let class = (ledger.entry(slot.slot_id).unwrap().role == SlotRole::QlvToken) as usize;
        ones[class] += bit as u8 as f64;
    }
    // 2×2 contingency table, one degree of freedom.
    let n = 10_000.0;
    let pooled = (ones[0] + ones[1]) / (2.0 * n);
    let stat: f64 = ones
        .iter()
        .map(|o| {
            let (e1, e0) = (n * pooled, n * (1.0 - pooled));
            (o - e1).powi(2) / e1 + ((n - o) - e0).powi(2) / e0
        })
        .sum();
    assert!(chi2_p(stat, 1) > 0.001, "{ones:?}");
    for o in ones {
        assert!((o / n - 0.5).abs() < 4.0 * (0.25 / n).sqrt());
    }
}

#[test]
fn remaining_shares_are_uniform() {
    let mut r = rng::from_seed(2);
    let record: Vec<u8> = b"slot roles and unitaries".iter().cycle().take(32).copied().collect();
    let mut hist = [0f64; 256];
    for _ in 0..10_000 {
        let shares = split_instructions(&record, 3, 32, &mut r).unwrap();
        let drop = r.random_range(0..3);
        let rest: Vec<_> = shares.into_iter().filter(|s| s.rs_id != drop).collect();
        assert_eq!(reconstruct(&rest, 3), Err(SessionError::IncompleteShares));
        for b in &xor_all(&rest)[..16] {
            hist[*b as usize] += 1.0;
        }
    }
    let expected = 160_000.0 / 256.0;
    let stat: f64 = hist.iter().map(|o| (o - expected).powi(2) / expected).sum();
    assert!(chi2_p(stat, 255) > 0.001, "χ² = {stat}");
}

#[test]
fn withholding_any_share_blocks_reconstruction() {
    let mut r = rng::from_seed(3);
    for _ in 0..1000 {
        let len = r.random_range(1..200);
        let record: Vec<u8> = (0..len).map(|_| r.random()).collect();
        let n = r.random_range(2..7);
        let shares = split_instructions(&record, n, 16, &mut r).unwrap();
        assert_eq!(xor_all(&shares), record);
        let drop = r.random_range(0..n);
        let rest: Vec<_> = shares.into_iter().filter(|s| s.rs_id != drop).collect();
        assert!(reconstruct(&rest, n).is_err());
    }
    // A real record fails its digest check when one share is missing.
    let c = config();
    let res = run_session(&c, &[true; 4], &DeviceModel::MissingShare(1), 20.0, &mut r).unwrap();
    assert_eq!(res.refusal, Some(Refusal::InstructionIncomplete));
    let rec = InstructionRecord { message_bits: 0, intertwine_k: 16, entries: vec![] }.encode(64, &mut r);
    let shares = split_instructions(&rec, 4, 64, &mut r).unwrap();
    assert!(InstructionRecord::decode(&xor_all(&shares[1..])).is_err());
}

#[test]
fn relocated_device_is_refused() {
    let c = config();
    let device = DeviceModel::Relocated { displacement: Point::new(20.0 * drms(&c), 0.0) };
    let refused = (0..10_000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::substream(4, "relocated", i);
            let res = run_session(&c, &[true, false, true], &device, 20.0, &mut r).unwrap();
            assert!(res.decrypted.is_none());
            res.refusal == Some(Refusal::QlvFailed)
        })
        .count();
    assert!(refused as f64 >= 0.999 * 10_000.0, "{refused}");
}

/// Sessions whose slots are moved by a role-blind adversary fail unless every
/// token happens to stay, which has hypergeometric probability.
fn relocation_failure_rate(n_qlv: usize, n_decoy: usize, moved: usize, seed: u64) -> (f64, f64, f64) {
    let mut c = config();
    c.n_qlv = n_qlv;
    c.n_decoy = n_decoy;
    c.control_fraction = 0.0;
    let msg = [true, false, false, true];
    let total = 2 * msg.len() + n_qlv + n_decoy;
    let d = Point::new(0.0, 20.0 * drms(&c));
    let trials = 10_000u64;
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, "partial", i);
            let res = relocation_attack(&c, &msg, RelocationPlan::RandomCount(moved), d, 20.0, &mut r).unwrap();
            let any_token_moved = res.challenges.iter().any(|ch| ch.relocated);
            if any_token_moved {
                assert_eq!(res.refusal, Some(Refusal::QlvFailed));
            }
            (any_token_moved, res.decrypted.is_none())
        })
        .collect();
    let p_stay = enumerate_stay_probability(total as u32, n_qlv as u32, moved as u32);
    let moved_rate = outcomes.iter().filter(|o| o.0).count() as f64 / trials as f64;
    let fail_rate = outcomes.iter().filter(|o| o.1).count() as f64 / trials as f64;
    let sd = (p_stay * (1.0 - p_stay) / trials as f64).sqrt();
    assert!((moved_rate - (1.0 - p_stay)).abs() <= 3.0 * sd + 1e-12, "{moved_rate} vs {}", 1.0 - p_stay);
    (p_stay, fail_rate, c.scenario.p_c)
}

#[test]
fn role_blind_relocation_matches_hypergeometric_oracle() {
    // 12 slots, 2 tokens, half moved.
    let (p_stay, fail, p_c) = relocation_failure_rate(2, 0, 6, 5);
    let expected = 1.0 - p_stay * p_c;
    let sd = (expected * (1.0 - expected) / 1e4).sqrt();
    // Honest coverage is P_c only up to the linearisation, ±0.015.
    assert!((fail - expected).abs() <= 3.0 * sd + p_stay * 0.015, "{fail} vs {expected}");

    // 24 slots, 8 tokens, half moved.
    let (p_stay, fail, p_c) = relocation_failure_rate(8, 8, 12, 6);
    let expected = 1.0 - p_stay * p_c;
    let sd = (expected * (1.0 - expected) / 1e4).sqrt();
    assert!((fail - expected).abs() <= 3.0 * sd + p_stay * 0.015, "{fail} vs {expected}");
}

#[test]
fn sessions_never_release_shares_before_the_time_lock() {
    let c = config();
    let mut r = rng::from_seed(7);
    for _ in 0..200 {
        let clock = r.random_range(-100.0..30.0);
        let res = run_session(&c, &[true, true], &DeviceModel::Honest, clock, &mut r).unwrap();
        if clock < c.scenario.t_d {
            assert_eq!(res.shares_released(), 0);
            assert_eq!(res.refusal, Some(Refusal::TimeLocked));
        } else {
            assert_eq!(res.shares_released(), c.n_rs_shares);
        }
        assert!(res.decrypted.is_some() != res.refusal.is_some());
    }
}
