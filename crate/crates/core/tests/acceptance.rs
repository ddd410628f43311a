//! Exit criteria. Runs every check, prints one PASS/FAIL line each and exits
//! non-zero if any failed.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twrc::capacity::{self, PowerProfile};
use twrc::coding::{pnc_chain_trial, CodeKind, RingLinearCode};
use twrc::harness::{self, ExperimentConfig, Mode};
use twrc::netfn::{self, NetFn};
use twrc::phy::{self, NoiseModel, PamScheme, SumConstellation};
use twrc::QPacket;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const QS: [u32; 3] = [2, 4, 8];
const SNRS: [f64; 3] = [0.0, 5.0, 10.0];
const MC_TRIALS: u64 = 1_000_000;
const SIGMAS: f64 = 4.0;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bound_arithmetic() -> Outcome {
    let b = capacity::upper_bound(&PowerProfile::new(15.0, 15.0, 15.0).unwrap()).unwrap();
    ensure((b.upper_bound - 1.0).abs() <= 1e-12 && (b.t1_opt - 0.5).abs() <= 1e-12, || {
        format!("bound {} t1 {}", b.upper_bound, b.t1_opt)
    })?;
    Ok(format!("C = {:.15}, t1 = {:.15}", b.upper_bound, b.t1_opt))
}

fn random_power(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(-4.0..6.0))
}

fn equalization_and_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let pp = PowerProfile::new(random_power(&mut rng), random_power(&mut rng), random_power(&mut rng))
            .unwrap();
        let b = capacity::upper_bound(&pp).unwrap();
        let resid = (b.t1_opt * b.uplink_rate - (1.0 - b.t1_opt) * b.downlink_rate).abs();
        worst = worst.max(resid);
        ensure(resid <= 1e-12, || format!("profile {i}: residual {resid:e}"))?;
        let bump = rng.random_range(1.001..3.0);
        for which in 0..3 {
            let mut up = pp;
            match which {
                0 => up.p1 *= bump,
                1 => up.p2 *= bump,
                _ => up.p3 *= bump,
            }
            let hi = capacity::upper_bound(&up).unwrap().upper_bound;
            ensure(hi >= b.upper_bound, || format!("profile {i}: raising power {which} lowered the bound"))?;
        }
    }
    Ok(format!("10^4 profiles, max residual {worst:.2e}"))
}

fn sic_low_snr() -> Outcome {
    let s = capacity::sic_rates(&PowerProfile::new(0.01, 0.01, 1.0).unwrap()).unwrap();
    let cut = 0.5 * 1.01f64.log2();
    let rel = (cut - s.min_rate) / cut;
    ensure(rel < 0.01, || format!("relative gap {rel} at p = 0.01"))?;
    let grid = [0.1, 0.05, 0.02, 0.01, 0.005];
    let gaps: Vec<f64> = grid
        .iter()
        .map(|&p| capacity::low_snr_gap(p, p).unwrap() / capacity::shannon_rate(p).unwrap())
        .collect();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), || format!("gaps not decreasing: {gaps:?}"))?;
    Ok(format!("rel gap {rel:.4e} at 0.01; along grid {gaps:?}"))
}

fn netfn_examples() -> Outcome {
    let tol = netfn::DEFAULT_TOL;
    for q in 2..=8 {
        let r = netfn::check_conditions(&NetFn::modq_add(q).unwrap(), tol).unwrap();
        ensure(r.valid, || format!("modq-add q={q} invalid"))?;
    }
    let x = netfn::check_conditions(&NetFn::xor(2).unwrap(), tol).unwrap();
    ensure(x.valid, || "xor invalid".into())?;
    let s = netfn::check_conditions(&NetFn::int_sum(2).unwrap(), tol).unwrap();
    ensure(
        s.satisfies_recoverability && !s.satisfies_independence && (s.i_w3_w1 - 0.5).abs() <= tol,
        || format!("int-sum report {s:?}"),
    )?;
    let c = netfn::check_conditions(&NetFn::constant(2, 0).unwrap(), tol).unwrap();
    ensure(
        c.satisfies_independence && !c.satisfies_recoverability && (c.h_w2_given_w1w3 - 1.0).abs() <= tol,
        || format!("const report {c:?}"),
    )?;
    Ok(format!("int-sum I(W3;W1) = {:.12}, const H(W2|W1,W3) = {:.12}", s.i_w3_w1, c.h_w2_given_w1w3))
}

fn identity_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for q in [2u32, 3, 4] {
        for i in 0..100 {
            let m = rng.random_range(1..=2 * q);
            let rows: Vec<Vec<u32>> =
                (0..q).map(|_| (0..q).map(|_| rng.random_range(0..m)).collect()).collect();
            let r = netfn::verify_identity_chain(&NetFn::from_rows(q, m, &rows).unwrap());
            worst = worst.max(r.recoverability).max(r.independence);
            ensure(r.recoverability <= 1e-9 && r.independence <= 1e-9, || {
                format!("q={q} table {i}: residuals {r:?}")
            })?;
        }
    }
    Ok(format!("300 tables, max residual {worst:.2e}"))
}

fn mc_grid(mode: Mode, seed: u64) -> Result<Vec<(u32, twrc::harness::PointTally)>, String> {
    let mut out = Vec::new();
    for q in QS {
        let cfg = ExperimentConfig::sweep(mode, q, SNRS.to_vec(), MC_TRIALS, seed);
        let pts = harness::run_sweep_tallies(&cfg).map_err(|e| e.to_string())?;
        out.extend(pts.into_iter().map(|p| (q, p)));
    }
    Ok(out)
}

fn check_mc(points: &[(u32, twrc::harness::PointTally)]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (q, p) in points {
        let r = p.row();
        let z = (r.empirical - r.analytic).abs() / r.stderr;
        worst = worst.max(z);
        ensure(z <= SIGMAS, || format!("q={q} snr={} dB: empirical {} analytic {} ({z:.2} se)", r.snr_db, r.empirical, r.analytic))?;
    }
    Ok(worst)
}

fn ser_p2p() -> Outcome {
    let worst = check_mc(&mc_grid(Mode::SerP2p, 61)?)?;
    Ok(format!("9 points x 10^6 trials, worst deviation {worst:.2} se"))
}

fn ser_sum() -> Outcome {
    let worst = check_mc(&mc_grid(Mode::SerSum, 62)?)?;
    for q in QS {
        for db in SNRS {
            let s = PamScheme::from_snr_db(q, db).unwrap();
            let ratio = phy::ser_sum_analytic(&s) / phy::ser_p2p_analytic(&s);
            let want = (q as f64 + 1.0) / q as f64;
            ensure((ratio - want).abs() <= 1e-12, || format!("q={q} {db} dB: ratio {ratio}"))?;
        }
    }
    Ok(format!("worst deviation {worst:.2} se; ratio (q+1)/q holds"))
}

fn pnc_ordering() -> Outcome {
    let points = mc_grid(Mode::SerPnc, 63)?;
    for (q, p) in &points {
        ensure(p.tally.errors <= p.tally.reference_errors, || {
            format!("q={q} {} dB: pnc {} > sum {}", p.snr_db, p.tally.errors, p.tally.reference_errors)
        })?;
    }
    let strict = points.iter().filter(|(_, p)| p.tally.errors < p.tally.reference_errors).count();
    Ok(format!("pnc <= sum detection errors at all 9 points ({strict} strictly)"))
}

fn noiseless_exactness() -> Outcome {
    for q in 2..=16u32 {
        let s = PamScheme::new(q, 1.0).unwrap();
        let sc = SumConstellation::new(&s);
        for u1 in 0..q {
            for u2 in 0..q {
                let x1 = phy::modulate(&QPacket::new(q, vec![u1]).unwrap(), &s).unwrap();
                let x2 = phy::modulate(&QPacket::new(q, vec![u2]).unwrap(), &s).unwrap();
                let y = phy::superimpose_and_noise(&x1, &x2, &NoiseModel::noiseless()).unwrap();
                let got = phy::pnc_demap(phy::detect_sum(&y, &sc)[0], q).unwrap();
                ensure(got == (u1 + u2) % q, || format!("q={q}: ({u1},{u2}) -> {got}"))?;
            }
        }
    }
    let mut chains = 0;
    for (kind, q, size) in [
        (CodeKind::Repetition, 2, 3),
        (CodeKind::Repetition, 5, 4),
        (CodeKind::SingleParityCheck, 2, 3),
        (CodeKind::SingleParityCheck, 3, 2),
        (CodeKind::SingleParityCheck, 4, 2),
    ] {
        let c = RingLinearCode::make(kind, q, size).unwrap();
        let s = PamScheme::new(q, 2.0).unwrap();
        let msgs = all_messages(q, c.k());
        for a in &msgs {
            for b in &msgs {
                let r = pnc_chain_trial(&c, &s, a, b, &NoiseModel::noiseless()).unwrap();
                ensure(!r.packet_error, || format!("{kind:?} q={q}: {a} + {b} decoded to {}", r.decoded))?;
                chains += 1;
            }
        }
    }
    Ok(format!("demap exhaustive q = 2..16; {chains} noiseless coded chains"))
}

fn all_messages(q: u32, k: usize) -> Vec<QPacket> {
    let n = (q as u64).pow(k as u32);
    (0..n)
        .map(|mut idx| {
            let mut v = vec![0; k];
            for s in v.iter_mut().rev() {
                *s = (idx % q as u64) as u32;
                idx /= q as u64;
            }
            QPacket::new(q, v).unwrap()
        })
        .collect()
}

fn linearity() -> Outcome {
    let mut pairs = 0;
    let mut codes = vec![RingLinearCode::make(CodeKind::SingleParityCheck, 4, 2).unwrap()];
    for q in 2..=8 {
        codes.push(RingLinearCode::make(CodeKind::Repetition, q, 5).unwrap());
    }
    for c in &codes {
        let msgs = all_messages(c.q(), c.k());
        for a in &msgs {
            for b in &msgs {
                let lhs = c.encode(a).unwrap().add_mod(&c.encode(b).unwrap()).unwrap();
                let rhs = c.encode(&a.add_mod(b).unwrap()).unwrap();
                ensure(lhs == rhs, || format!("q={}: {a} + {b}", c.q()))?;
                pairs += 1;
            }
        }
    }
    ensure(pairs >= 256, || "too few pairs".into())?;
    Ok(format!("{pairs} message pairs, SPC q=4 k=2 and repetition q=2..8"))
}

fn determinism() -> Outcome {
    let cfgs = [
        ExperimentConfig::sweep(Mode::SerPnc, 4, vec![0.0, 5.0], 150_000, 11),
        ExperimentConfig::sweep(Mode::Chain, 2, vec![0.0, 3.0], 80_000, 12)
            .with_code("rep:3".parse().unwrap()),
    ];
    for cfg in &cfgs {
        let csv = |threads: Option<usize>| -> Result<Vec<u8>, String> {
            let rows: Vec<_> = harness::run_sweep_tallies_on(cfg, threads)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|p| p.row())
                .collect();
            let mut buf = Vec::new();
            harness::write_sweep_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
            Ok(buf)
        };
        let first = csv(None)?;
        ensure(first == csv(None)?, || format!("{:?}: rerun differs", cfg.mode))?;
        ensure(first == csv(Some(1))?, || format!("{:?}: 1 thread differs", cfg.mode))?;
        ensure(first == csv(Some(3))?, || format!("{:?}: 3 threads differ", cfg.mode))?;
    }
    Ok("identical CSV across reruns and thread counts".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("bound arithmetic", bound_arithmetic),
        ("equalization and monotonicity", equalization_and_monotonicity),
        ("SIC low-SNR tightness", sic_low_snr),
        ("network-coding function examples", netfn_examples),
        ("entropy identity residuals", identity_residuals),
        ("single-user SER vs Monte Carlo", ser_p2p),
        ("superimposed SER vs Monte Carlo", ser_sum),
        ("PNC demap error ordering", pnc_ordering),
        ("noiseless exactness", noiseless_exactness),
        ("code linearity", linearity),
        ("sweep determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
