//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on domain or I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::capacity::{self, PowerProfile};
use crate::coding::CodeSpec;
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig, Mode, SweepReport, SweepRow};
use crate::netfn::{self, Builtin, NetFn};

#[derive(Debug, Parser)]
#[command(name = "twrc", version, about = "Two-way relay channel bounds, rates and PNC simulation")]
#[command(after_help = "Set TWRC_MAX_THREADS to cap Monte Carlo worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cut-set upper bound and optimal uplink time share.
    Bounds(PowerArgs),
    /// Separated (SIC) and PNC exchange rates against the bound.
    Rates(PowerArgs),
    /// Monte Carlo symbol error rate sweep.
    Ser(SerArgs),
    /// Coded PNC uplink chain sweep.
    Chain(ChainArgs),
    /// Check a relay function for recoverability and independence.
    Netfn(NetFnArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write machine-readable CSV here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write a JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long, allow_negative_numbers = true)]
    p1_db: f64,
    #[arg(long, allow_negative_numbers = true)]
    p2_db: f64,
    #[arg(long, allow_negative_numbers = true)]
    p3_db: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SerMode {
    P2p,
    Sum,
    Pnc,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// SNR grid in dB, comma separated or repeated.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SerArgs {
    #[arg(long, value_enum)]
    mode: SerMode,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Debug, Args)]
struct ChainArgs {
    /// `rep:L` or `spc:K`.
    #[arg(long)]
    code: String,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Debug, Args)]
struct NetFnArgs {
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// xor, modq-add, int-sum or const.
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    builtin: Option<String>,
    /// Table file: header `q m`, then q rows of q entries.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = netfn::DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    out: Output,
}

/// Parses `args` (including the program name) and runs the command,
/// writing human-readable output to `stdout` and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Usage(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Bounds(a) => bounds(a, out),
        Command::Rates(a) => rates(a, out),
        Command::Ser(a) => {
            let mode = match a.mode {
                SerMode::P2p => Mode::SerP2p,
                SerMode::Sum => Mode::SerSum,
                SerMode::Pnc => Mode::SerPnc,
            };
            sweep(mode, None, a.sweep, out)
        }
        Command::Chain(a) => {
            let code: CodeSpec = a.code.parse()?;
            sweep(Mode::Chain, Some(code), a.sweep, out)
        }
        Command::Netfn(a) => netfn_check(a, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Single-record CSV for the non-sweep commands.
fn write_record_csv<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.serialize(value).map_err(|e| Error::Io(e.to_string()))?;
    w.flush()?;
    Ok(())
}

fn powers(a: &PowerArgs) -> Result<PowerProfile> {
    PowerProfile::from_db(a.p1_db, a.p2_db, a.p3_db)
}

#[derive(Serialize)]
struct BoundsRecord {
    p1: f64,
    p2: f64,
    p3: f64,
    uplink_rate: f64,
    downlink_rate: f64,
    t1_opt: f64,
    upper_bound: f64,
    degenerate: bool,
}

fn bounds(a: PowerArgs, out: &mut dyn Write) -> Result<()> {
    let pp = powers(&a)?;
    let b = capacity::upper_bound(&pp)?;
    writeln!(out, "powers (linear)   p1 = {:.6}  p2 = {:.6}  p3 = {:.6}", pp.p1, pp.p2, pp.p3)?;
    writeln!(out, "uplink rate       {:.12} bits/use", b.uplink_rate)?;
    writeln!(out, "downlink rate     {:.12} bits/use", b.downlink_rate)?;
    writeln!(out, "t1                {:.12}{}", b.t1_opt, if b.degenerate { " (degenerate)" } else { "" })?;
    writeln!(out, "upper_bound       {:.12} bits/use", b.upper_bound)?;
    let record = BoundsRecord {
        p1: pp.p1,
        p2: pp.p2,
        p3: pp.p3,
        uplink_rate: b.uplink_rate,
        downlink_rate: b.downlink_rate,
        t1_opt: b.t1_opt,
        upper_bound: b.upper_bound,
        degenerate: b.degenerate,
    };
    if let Some(p) = &a.out.csv {
        write_record_csv(p, &record)?;
    }
    if let Some(p) = &a.out.json {
        write_json(p, &serde_json::json!({ "powers": pp, "bound": b }))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RatesRecord {
    p1: f64,
    p2: f64,
    p3: f64,
    upper_bound: f64,
    sic_rate_strong: f64,
    sic_rate_weak: f64,
    sic_min_rate: f64,
    sic_regime: String,
    sic_exchange_rate: f64,
    sic_t1: f64,
    pnc_exchange_rate: f64,
    pnc_t1: f64,
}

fn rates(a: PowerArgs, out: &mut dyn Write) -> Result<()> {
    let pp = powers(&a)?;
    let r = capacity::strategy_rates(&pp)?;
    writeln!(out, "powers (linear)       p1 = {:.6}  p2 = {:.6}  p3 = {:.6}", pp.p1, pp.p2, pp.p3)?;
    writeln!(out, "upper bound           {:.12}", r.bound.upper_bound)?;
    writeln!(out, "SIC strong stream     {:.12}", r.sic.rate_strong)?;
    writeln!(out, "SIC weak stream       {:.12}", r.sic.rate_weak)?;
    writeln!(out, "SIC regime            {:?}", r.sic.regime)?;
    writeln!(out, "SIC exchange rate     {:.12}  (t1 = {:.6})", r.sic_exchange_rate, r.sic_t1)?;
    writeln!(out, "PNC exchange rate     {:.12}  (t1 = {:.6})", r.pnc_exchange_rate, r.pnc_t1)?;
    let record = RatesRecord {
        p1: pp.p1,
        p2: pp.p2,
        p3: pp.p3,
        upper_bound: r.bound.upper_bound,
        sic_rate_strong: r.sic.rate_strong,
        sic_rate_weak: r.sic.rate_weak,
        sic_min_rate: r.sic.min_rate,
        sic_regime: format!("{:?}", r.sic.regime),
        sic_exchange_rate: r.sic_exchange_rate,
        sic_t1: r.sic_t1,
        pnc_exchange_rate: r.pnc_exchange_rate,
        pnc_t1: r.pnc_t1,
    };
    if let Some(p) = &a.out.csv {
        write_record_csv(p, &record)?;
    }
    if let Some(p) = &a.out.json {
        write_json(p, &serde_json::json!({ "powers": pp, "rates": r }))?;
    }
    Ok(())
}

fn sweep(mode: Mode, code: Option<CodeSpec>, a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ExperimentConfig::sweep(mode, a.q, a.snr_db, a.trials, a.seed);
    cfg.code_spec = code;
    let rows = harness::run_sweep(&cfg)?;
    print_rows(&cfg, &rows, out)?;
    if let Some(p) = &a.out.csv {
        let mut f = create(p)?;
        harness::write_sweep_csv(&rows, &mut f)?;
        f.flush()?;
    }
    if let Some(p) = &a.out.json {
        let mut f = create(p)?;
        f.write_all(SweepReport { config: cfg, rows }.to_json()?.as_bytes())?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(())
}

fn print_rows(cfg: &ExperimentConfig, rows: &[SweepRow], out: &mut dyn Write) -> Result<()> {
    let code = cfg.code_spec.map(|c| format!("  code = {c}")).unwrap_or_default();
    writeln!(out, "mode = {}  q = {}  seed = {}{code}", cfg.mode, cfg.q, cfg.seed)?;
    writeln!(out, "{:>9} {:>14} {:>14} {:>12} {:>10}", "snr_db", "analytic", "empirical", "stderr", "trials")?;
    for r in rows {
        writeln!(
            out,
            "{:>9.3} {:>14.6e} {:>14.6e} {:>12.3e} {:>10}",
            r.snr_db, r.analytic, r.empirical, r.stderr, r.trials
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct NetFnRecord {
    q: u32,
    m: u32,
    h_w2_given_w1w3: f64,
    h_w1_given_w2w3: f64,
    i_w3_w1: f64,
    i_w3_w2: f64,
    satisfies_recoverability: bool,
    satisfies_independence: bool,
    valid: bool,
}

fn netfn_check(a: NetFnArgs, out: &mut dyn Write) -> Result<()> {
    let f = match (&a.builtin, &a.table) {
        (Some(name), None) => NetFn::builtin(name.parse::<Builtin>()?, a.q)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            text.parse::<NetFn>()?
        }
        _ => return Err(Error::Usage("give exactly one of --builtin or --table".into())),
    };
    let r = netfn::check_conditions(&f, a.tol)?;
    writeln!(out, "q = {}  output alphabet m = {}  tol = {:e}", f.q(), f.m(), a.tol)?;
    writeln!(out, "H(W2|W1,W3) = {:.12} bits", r.h_w2_given_w1w3)?;
    writeln!(out, "H(W1|W2,W3) = {:.12} bits", r.h_w1_given_w2w3)?;
    writeln!(out, "I(W3;W1)    = {:.12} bits", r.i_w3_w1)?;
    writeln!(out, "I(W3;W2)    = {:.12} bits", r.i_w3_w2)?;
    writeln!(out, "recoverability = {}", r.satisfies_recoverability)?;
    writeln!(out, "independence   = {}", r.satisfies_independence)?;
    writeln!(out, "valid={}", r.valid)?;
    let record = NetFnRecord {
        q: f.q(),
        m: f.m(),
        h_w2_given_w1w3: r.h_w2_given_w1w3,
        h_w1_given_w2w3: r.h_w1_given_w2w3,
        i_w3_w1: r.i_w3_w1,
        i_w3_w2: r.i_w3_w2,
        satisfies_recoverability: r.satisfies_recoverability,
        satisfies_independence: r.satisfies_independence,
        valid: r.valid,
    };
    if let Some(p) = &a.out.csv {
        write_record_csv(p, &record)?;
    }
    if let Some(p) = &a.out.json {
        write_json(p, &serde_json::json!({ "table": f, "report": r }))?;
    }
    Ok(())
}
