//! Seeded Monte Carlo sweeps over SNR.
//!
//! Trials at each grid point are cut into fixed-size shards. Shard `i` of
//! point `j` draws from its own ChaCha stream seeded by mixing `(seed, j, i)`,
//! so the merged counts do not depend on how many worker threads ran or in
//! which order shards finished. Set [`THREADS_ENV`] to cap the worker count.

mod report;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::PowerProfile;
use crate::coding::{self, CodeSpec, RingLinearCode};
use crate::error::{Error, Result};
use crate::packet::QPacket;
use crate::phy::{self, NoiseModel, PamScheme, SumConstellation};

pub use report::{parse_sweep_csv, write_sweep_csv, SweepReport, CSV_HEADER};

/// Environment variable holding the maximum number of worker threads.
pub const THREADS_ENV: &str = "TWRC_MAX_THREADS";

/// Trials per shard.
pub const SHARD_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    SerP2p,
    SerSum,
    SerPnc,
    Chain,
    Bounds,
    Rates,
    NetFnCheck,
}

impl Mode {
    pub fn is_sweep(self) -> bool {
        matches!(self, Mode::SerP2p | Mode::SerSum | Mode::SerPnc | Mode::Chain)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SerP2p => "p2p",
            Mode::SerSum => "sum",
            Mode::SerPnc => "pnc",
            Mode::Chain => "chain",
            Mode::Bounds => "bounds",
            Mode::Rates => "rates",
            Mode::NetFnCheck => "netfn",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p2p" => Mode::SerP2p,
            "sum" => Mode::SerSum,
            "pnc" => Mode::SerPnc,
            "chain" => Mode::Chain,
            "bounds" => Mode::Bounds,
            "rates" => Mode::Rates,
            "netfn" => Mode::NetFnCheck,
            other => return Err(Error::Usage(format!("unknown mode {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub q: u32,
    pub snr_db_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub code_spec: Option<CodeSpec>,
    pub powers: Option<PowerProfile>,
}

impl ExperimentConfig {
    pub fn sweep(mode: Mode, q: u32, snr_db_grid: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self { mode, q, snr_db_grid, trials, seed, code_spec: None, powers: None }
    }

    pub fn with_code(mut self, code: CodeSpec) -> Self {
        self.code_spec = Some(code);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::Config(format!("q must be at least 2, got {}", self.q)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.mode.is_sweep() {
            if self.snr_db_grid.is_empty() {
                return Err(Error::Config("SNR grid is empty".into()));
            }
            if let Some(bad) = self.snr_db_grid.iter().find(|v| !v.is_finite()) {
                return Err(Error::Config(format!("SNR grid value {bad} is not finite")));
            }
        }
        if self.mode == Mode::Chain && self.code_spec.is_none() {
            return Err(Error::Config("chain mode needs a code".into()));
        }
        Ok(())
    }
}

/// One grid point of a sweep.
///
/// `analytic` is the closed-form counterpart: the single-user SER, the
/// superimposed-detection SER, the demapped PNC SER, or (for the coded chain)
/// the uncoded PNC SER it improves on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl SweepRow {
    fn from_counts(snr_db: f64, analytic: f64, errors: u64, trials: u64) -> Self {
        let (empirical, stderr) = binomial(errors, trials);
        Self { snr_db, analytic, empirical, stderr, trials }
    }
}

/// Empirical rate and its normal-approximation standard error.
pub fn binomial(errors: u64, trials: u64) -> (f64, f64) {
    let p = errors as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Raw counts at one grid point.
///
/// `reference_errors / reference_trials` is a second error count taken on
/// the very same noise samples: superimposed-detection errors for
/// [`Mode::SerPnc`] and [`Mode::SerSum`], demapped channel-symbol errors
/// before decoding for [`Mode::Chain`], and zero for [`Mode::SerP2p`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub errors: u64,
    pub reference_trials: u64,
    pub reference_errors: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            errors: self.errors + o.errors,
            reference_trials: self.reference_trials + o.reference_trials,
            reference_errors: self.reference_errors + o.reference_errors,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTally {
    pub snr_db: f64,
    pub analytic: f64,
    pub tally: Tally,
}

impl PointTally {
    pub fn row(&self) -> SweepRow {
        SweepRow::from_counts(self.snr_db, self.analytic, self.tally.errors, self.tally.trials)
    }

    pub fn reference_rate(&self) -> f64 {
        if self.tally.reference_trials == 0 {
            return 0.0;
        }
        self.tally.reference_errors as f64 / self.tally.reference_trials as f64
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for shard `shard` of grid point `point`.
pub fn shard_seed(seed: u64, point: u64, shard: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ point) ^ shard)
}

/// Worker cap from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Per-point trial kernel, prepared once and shared read-only by all shards.
enum Kernel {
    P2p(PamScheme),
    Sum { scheme: PamScheme, sc: SumConstellation, pnc_primary: bool },
    Chain { scheme: PamScheme, code: RingLinearCode },
}

impl Kernel {
    fn new(cfg: &ExperimentConfig, scheme: PamScheme) -> Result<Self> {
        Ok(match cfg.mode {
            Mode::SerP2p => Kernel::P2p(scheme),
            Mode::SerSum | Mode::SerPnc => Kernel::Sum {
                scheme,
                sc: SumConstellation::new(&scheme),
                pnc_primary: cfg.mode == Mode::SerPnc,
            },
            Mode::Chain => {
                let spec = cfg.code_spec.expect("validated");
                let code = RingLinearCode::from_spec(spec, cfg.q)?;
                if code.codebook_size().is_none_or(|n| n > coding::MAX_CODEBOOK) {
                    return Err(Error::Capability(format!(
                        "code {spec} over Z_{} is too large to decode exhaustively",
                        cfg.q
                    )));
                }
                Kernel::Chain { scheme, code }
            }
            m => return Err(Error::Config(format!("mode {m} is not a sweep"))),
        })
    }

    fn analytic(&self) -> f64 {
        match self {
            Kernel::P2p(s) => phy::ser_p2p_analytic(s),
            Kernel::Sum { scheme, pnc_primary: false, .. } => phy::ser_sum_analytic(scheme),
            Kernel::Sum { scheme, pnc_primary: true, .. } => phy::ser_pnc_analytic(scheme),
            Kernel::Chain { scheme, .. } => phy::ser_pnc_analytic(scheme),
        }
    }

    fn run_shard(&self, trials: u64, rng: &mut ChaCha8Rng) -> Result<Tally> {
        let noise = NoiseModel::unit(0);
        let mut t = Tally { trials, ..Tally::default() };
        match self {
            Kernel::P2p(s) => {
                for _ in 0..trials {
                    let u = rng.random_range(0..s.q());
                    let y = s.point(u) + noise.sample(rng);
                    t.errors += u64::from(s.detect(y) != u);
                }
            }
            Kernel::Sum { scheme, sc, pnc_primary } => {
                let q = scheme.q() as usize;
                t.reference_trials = trials;
                for _ in 0..trials {
                    let u1 = rng.random_range(0..scheme.q());
                    let u2 = rng.random_range(0..scheme.q());
                    let y = scheme.point(u1) + scheme.point(u2) + noise.sample(rng);
                    let m = (u1 + u2) as usize;
                    let detected = sc.detect(y);
                    let sum_err = u64::from(detected != m);
                    let pnc_err = u64::from(detected % q != m % q);
                    if *pnc_primary {
                        t.errors += pnc_err;
                    } else {
                        t.errors += sum_err;
                    }
                    t.reference_errors += sum_err;
                }
            }
            Kernel::Chain { scheme, code } => {
                let q = code.q();
                t.reference_trials = trials * code.l() as u64;
                for _ in 0..trials {
                    let w1 = QPacket::new(q, (0..code.k()).map(|_| rng.random_range(0..q)).collect())?;
                    let w2 = QPacket::new(q, (0..code.k()).map(|_| rng.random_range(0..q)).collect())?;
                    let r = coding::pnc_chain_trial_with(code, scheme, &w1, &w2, &noise, rng)?;
                    t.errors += u64::from(r.packet_error);
                    t.reference_errors += r.channel_symbol_errors as u64;
                }
            }
        }
        Ok(t)
    }
}

/// Runs a sweep and returns the raw counts per grid point.
pub fn run_sweep_tallies(cfg: &ExperimentConfig) -> Result<Vec<PointTally>> {
    run_sweep_tallies_on(cfg, thread_cap()?)
}

/// As [`run_sweep_tallies`] with an explicit worker count instead of the
/// environment cap. The result is identical for every `threads` value.
pub fn run_sweep_tallies_on(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<PointTally>> {
    cfg.validate()?;
    if !cfg.mode.is_sweep() {
        return Err(Error::Config(format!("mode {} is not a sweep", cfg.mode)));
    }
    let kernels = cfg
        .snr_db_grid
        .iter()
        .map(|&db| Kernel::new(cfg, PamScheme::from_snr_db(cfg.q, db)?))
        .collect::<Result<Vec<_>>>()?;

    let shards_per_point = cfg.trials.div_ceil(SHARD_TRIALS);
    let jobs: Vec<(usize, u64)> = (0..kernels.len())
        .flat_map(|p| (0..shards_per_point).map(move |s| (p, s)))
        .collect();

    let work = || -> Result<Vec<Tally>> {
        jobs.par_iter()
            .map(|&(p, s)| {
                let start = s * SHARD_TRIALS;
                let n = SHARD_TRIALS.min(cfg.trials - start);
                let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(cfg.seed, p as u64, s));
                kernels[p].run_shard(n, &mut rng)
            })
            .collect()
    };
    let shard_tallies = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut totals = vec![Tally::default(); kernels.len()];
    for (&(p, _), t) in jobs.iter().zip(shard_tallies) {
        totals[p] = totals[p] + t;
    }
    Ok(cfg
        .snr_db_grid
        .iter()
        .zip(&kernels)
        .zip(totals)
        .map(|((&snr_db, k), tally)| PointTally { snr_db, analytic: k.analytic(), tally })
        .collect())
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    Ok(run_sweep_tallies(cfg)?.iter().map(PointTally::row).collect())
}
