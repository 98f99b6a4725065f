//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 computation or storage failure,
//! 3 verification mismatch.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rug::Rational;

use crate::fixtures;
use crate::modforms::is_prime;
use crate::record::to_json_string;
use crate::slopes::{
    aggregate_measures, compute_record, detect_trains, exceptional_ssing_series, measure_mu, scan_exceptions,
    SlopeError, SlopeRecord,
};
use crate::store::{run_sweep, sweep_jobs, ResultStore, StoreError};
use crate::theta::{crosscheck_theta, predicted_slope_profile, theta_cycle, CheckStatus, ThetaReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "slopelab", version, about = "Exact p-adic slopes of level-one Hecke operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the slope record of one (p, k).
    Compute(ComputeArgs),
    /// Compute every (p, k) in a range into a result store.
    Sweep(SweepArgs),
    /// List the weights carrying exceptional slopes.
    Exceptions(StoreArgs),
    /// Check the trains of fractional pairs leading to exceptional slopes.
    Trains(StoreArgs),
    /// Print a Theta-cycle and the exceptional weights it predicts.
    Theta(ThetaArgs),
    /// Export the binned supersingularity distribution of one prime as CSV.
    Distribution(DistributionArgs),
    /// Compare stored records against the embedded reference tables.
    Verify(StoreArgs),
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub prime: u64,
    #[arg(long)]
    pub weight: u32,
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Inclusive range `A..B` (or a single value).
    #[arg(long, value_parser = parse_range::<u64>)]
    pub primes: (u64, u64),
    /// Inclusive range `C..D` (or a single value).
    #[arg(long, value_parser = parse_range::<u32>)]
    pub weights: (u32, u32),
    #[arg(long, env = "SLOPELAB_STORE")]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StoreArgs {
    #[arg(long, env = "SLOPELAB_STORE")]
    pub store: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[arg(long)]
    pub prime: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub max: u64,
    /// Compare the predictions with the records in this store.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    #[arg(long, env = "SLOPELAB_STORE")]
    pub store: PathBuf,
    #[arg(long)]
    pub prime: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins: u32,
    /// Only records of weight at most this.
    #[arg(long)]
    pub max_weight: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `A..B`, `A..=B` or `A` as an inclusive, nonempty range.
pub fn parse_range<T>(s: &str) -> Result<(T, T), String>
where
    T: FromStr + PartialOrd + Copy,
    T::Err: Display,
{
    let parse = |x: &str| x.trim().parse::<T>().map_err(|e| format!("bad bound {x:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

/// Renders an exact rational as `a/b`, integers bare.
pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn fmt_list(xs: &[Rational]) -> String {
    if xs.is_empty() {
        return "none".to_string();
    }
    xs.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

/// Plain-text rendering used by `compute --text`.
pub fn record_text(r: &SlopeRecord) -> String {
    format!(
        "p: {}\nk: {}\ndim: {}\nslopes: {}\nu_slopes: {}\nssing: {}\nulmer_ok: {}\nexceptional: {}\nfractional: {}\n",
        r.p,
        r.k,
        r.dim,
        fmt_list(r.lower_half()),
        fmt_list(&r.u_slopes),
        fmt_list(&r.ssing),
        r.ulmer_ok,
        fmt_list(&r.exceptional),
        fmt_list(&r.fractional),
    )
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
    fn compute(message: impl Into<String>) -> Self {
        Failure { code: EXIT_FAILURE, message: message.into() }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::compute(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compute(a) => cmd_compute(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Exceptions(a) => cmd_exceptions(&a, out),
        Command::Trains(a) => cmd_trains(&a, out),
        Command::Theta(a) => cmd_theta(&a, out),
        Command::Distribution(a) => cmd_distribution(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn check_prime(p: u64) -> Result<(), Failure> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Failure::usage(format!("{p} is not a prime")))
    }
}

fn check_weight(k: u32) -> Result<(), Failure> {
    if k % 2 == 1 {
        return Err(Failure::usage(format!(
            "weight {k} is odd; level-one cusp forms of odd weight are zero, so only even weights are supported"
        )));
    }
    if k < 12 {
        return Err(Failure::usage(format!("weight {k} is below 12; there are no cusp forms of level one")));
    }
    Ok(())
}

fn ulmer_warning(r: &SlopeRecord) -> String {
    format!("warning: p={} k={} has a T_p slope >= (k-1)/2; U slopes paired as ((k-1)/2, (k-1)/2)", r.p, r.k)
}

fn cmd_compute(a: &ComputeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    check_prime(a.prime)?;
    check_weight(a.weight)?;
    let rec = compute_record(a.prime, a.weight).map_err(|e| match e {
        SlopeError::BadWeight(_) | SlopeError::NotPrime(_) => Failure::usage(e.to_string()),
        e => Failure::compute(e.to_string()),
    })?;
    if !rec.ulmer_ok {
        writeln!(err, "{}", ulmer_warning(&rec))?;
    }
    if a.json {
        let text = to_json_string(&rec).map_err(|e| Failure::compute(e.to_string()))?;
        out.write_all(text.as_bytes())?;
    } else {
        out.write_all(record_text(&rec).as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (plo, phi) = a.primes;
    let (klo, khi) = a.weights;
    let odd = (klo..=khi).filter(|k| k % 2 == 1).count();
    if odd > 0 {
        writeln!(err, "note: rejecting {odd} odd weight(s) in {klo}..{khi}; level-one cusp forms of odd weight are zero")?;
    }
    let small = (klo..=khi.min(11)).filter(|k| k % 2 == 0).count();
    if small > 0 {
        writeln!(err, "note: rejecting {small} even weight(s) below 12; there are no cusp forms there")?;
    }
    let jobs = sweep_jobs(a.primes, a.weights);
    if jobs.is_empty() {
        return Err(Failure::usage(format!("no prime in {plo}..{phi} paired with an even weight >= 12 in {klo}..{khi}")));
    }
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    let mut store = ResultStore::open(&a.out)?;
    let outcome = run_sweep(&mut store, &jobs, workers)?;
    writeln!(
        out,
        "computed {}, skipped {} (already current), failed {}",
        outcome.computed.len(),
        outcome.skipped.len(),
        outcome.failed.len()
    )?;
    for &(p, k) in &outcome.computed {
        if let Some(rec) = store.get(p, k)?.filter(|r| !r.ulmer_ok) {
            writeln!(err, "{}", ulmer_warning(&rec))?;
        }
    }
    for (p, k, msg) in &outcome.failed {
        writeln!(out, "failed p={p} k={k}: {msg}")?;
    }
    for (p, ks) in &store.manifest().exceptional_weights {
        let list = ks.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
        writeln!(out, "exceptional weights p={p}: {list}")?;
    }
    Ok(if outcome.failed.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn open_existing(dir: &Path) -> Result<ResultStore, Failure> {
    if !dir.is_dir() {
        return Err(Failure::usage(format!("store {} does not exist", dir.display())));
    }
    Ok(ResultStore::open(dir)?)
}

fn cmd_exceptions(a: &StoreArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_existing(&a.store)?;
    let records = store.records(None)?;
    for row in scan_exceptions(&records) {
        writeln!(out, "p={} k={} exceptional: {}", row.p, row.k, fmt_list(&row.slopes))?;
    }
    Ok(EXIT_OK)
}

fn cmd_trains(a: &StoreArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_existing(&a.store)?;
    let records = store.records(None)?;
    for cert in detect_trains(&records) {
        let links = cert
            .links
            .iter()
            .map(|l| {
                let status = match l.found {
                    None => "missing".to_string(),
                    Some(2) => "ok".to_string(),
                    Some(m) => format!("x{m}"),
                };
                format!("{}:{} {}", l.weight, fmt_rational(&l.slope), status)
            })
            .collect::<Vec<_>>()
            .join(", ");
        let verdict = if cert.matched() { "complete" } else { "incomplete" };
        writeln!(out, "p={} k={} slope {} {verdict}: {links}", cert.p, cert.k, cert.n)?;
    }
    Ok(EXIT_OK)
}

fn cmd_theta(a: &ThetaArgs, out: &mut dyn Write) -> CmdResult {
    let cycle = theta_cycle(a.prime, a.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let list = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(", ");
    writeln!(out, "cycle: {}", list(&mut cycle.filtrations.iter().map(u64::to_string)))?;
    let profile = predicted_slope_profile(a.prime, a.seed, a.max).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out, "weights: {}", list(&mut profile.iter().map(|(w, _)| w.to_string())))?;
    writeln!(out, "slopes: {}", list(&mut profile.iter().map(|(_, s)| s.to_string())))?;
    let Some(dir) = &a.store else { return Ok(EXIT_OK) };
    let store = open_existing(dir)?;
    let records = store.records(Some(a.prime))?;
    let report = crosscheck_theta(&records, a.prime, a.seed);
    for item in report.items().iter().filter(|it| it.weight <= a.max) {
        let status = match &item.status {
            CheckStatus::Match => "match".to_string(),
            CheckStatus::Unverified => "unverified".to_string(),
            CheckStatus::Mismatch { found } if found.is_empty() => "mismatch (found none)".to_string(),
            CheckStatus::Mismatch { found } => format!("mismatch (found {})", found.join(", ")),
            CheckStatus::Unexpected { found } => format!("unexpected exception (found {})", found.join(", ")),
        };
        let predicted = item.predicted_slope.map_or("-".to_string(), |s| s.to_string());
        writeln!(out, "k={} predicted {predicted}: {status}", item.weight)?;
    }
    let clean = match &report {
        ThetaReport::Checked { items, .. } => items
            .iter()
            .filter(|it| it.weight <= a.max)
            .all(|it| matches!(it.status, CheckStatus::Match | CheckStatus::Unverified)),
        ThetaReport::NotApplicable(_) => false,
    };
    Ok(if clean { EXIT_OK } else { EXIT_MISMATCH })
}

/// CSV rows of the binned distribution, header included.
pub fn distribution_csv(records: &[SlopeRecord], bins: u32) -> String {
    let mut csv = String::from("bin_lo,bin_hi,mass_num,mass_den,mass_decimal\n");
    for bin in aggregate_measures(records, bins as usize) {
        csv.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            fmt_rational(&bin.lo),
            fmt_rational(&bin.hi),
            bin.mass.numer(),
            bin.mass.denom(),
            bin.mass.to_f64()
        ));
    }
    csv
}

fn cmd_distribution(a: &DistributionArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_existing(&a.store)?;
    let records: Vec<SlopeRecord> = store
        .records(Some(a.prime))?
        .into_iter()
        .filter(|r| a.max_weight.is_none_or(|m| r.k <= m))
        .collect();
    if records.iter().all(|r| r.dim == 0) {
        return Err(Failure::usage(format!("store has no nonempty records for p={}", a.prime)));
    }
    let csv = distribution_csv(&records, a.bins);
    let tmp = a.out.with_extension("csv.tmp");
    std::fs::write(&tmp, csv)?;
    std::fs::rename(&tmp, &a.out)?;
    writeln!(out, "wrote {} bins over {} records to {}", a.bins, records.len(), a.out.display())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyItem {
    pub verdict: Verdict,
    pub label: String,
    pub detail: String,
}

impl VerifyItem {
    fn new(verdict: Verdict, label: impl Into<String>, detail: impl Into<String>) -> Self {
        VerifyItem { verdict, label: label.into(), detail: detail.into() }
    }
}

/// Checks the records of `store` against the embedded reference data.
/// Items whose records are absent are reported as missing.
pub fn verify_records(records: &[SlopeRecord], orphans: &[String]) -> Vec<VerifyItem> {
    use Verdict::*;
    let find = |p: u64, k: u32| records.iter().find(|r| r.p == p && r.k == k);
    let mut items = Vec::new();

    for (k, row) in fixtures::P79_LOWER_HALVES {
        let label = format!("p=79 k={k} slope sequence");
        let expected = fixtures::parse_slopes(row);
        items.push(match find(79, *k) {
            None => VerifyItem::new(Missing, label, ""),
            Some(r) if r.lower_half() == expected.as_slice() => VerifyItem::new(Pass, label, ""),
            Some(r) => VerifyItem::new(Fail, label, format!("got {}", fmt_list(r.lower_half()))),
        });
    }

    for (p, ks) in fixtures::EXCEPTION_TABLE {
        for &k in *ks {
            let label = format!("p={p} k={k} exactly one exceptional slope");
            items.push(match find(*p, k) {
                None => VerifyItem::new(Missing, label, ""),
                Some(r) if r.exceptional.len() == 1 => VerifyItem::new(Pass, label, fmt_list(&r.exceptional)),
                Some(r) => VerifyItem::new(Fail, label, format!("got {}", fmt_list(&r.exceptional))),
            });
        }
    }

    for &(p, bound) in fixtures::EXHAUSTIVE_SWEEPS {
        let listed = fixtures::exception_weights(p).unwrap_or(&[]);
        let others: Vec<&SlopeRecord> =
            records.iter().filter(|r| r.p == p && r.k <= bound && !listed.contains(&r.k)).collect();
        let label = format!("p={p} k<={bound} no exceptions off the table");
        let stray: Vec<String> = others.iter().filter(|r| r.is_exceptional_weight()).map(|r| r.k.to_string()).collect();
        items.push(if others.is_empty() {
            VerifyItem::new(Missing, label, "")
        } else if stray.is_empty() {
            VerifyItem::new(Pass, label, format!("{} records", others.len()))
        } else {
            VerifyItem::new(Fail, label, format!("exceptional at {}", stray.join(", ")))
        });
    }

    for &(k, slope) in fixtures::P59_EXCEPTIONAL_SLOPES {
        let label = format!("p=59 k={k} exceptional slope {slope}");
        items.push(match find(59, k) {
            None => VerifyItem::new(Missing, label, ""),
            Some(r) if r.exceptional == [Rational::from(slope)] => VerifyItem::new(Pass, label, ""),
            Some(r) => VerifyItem::new(Fail, label, format!("got {}", fmt_list(&r.exceptional))),
        });
    }

    let p59 = fixtures::exception_weights(59).unwrap_or(&[]);
    let label = "p=59 supersingularities of exceptional slopes";
    items.push(if p59.iter().all(|&k| find(59, k).is_some()) {
        let subset: Vec<SlopeRecord> = p59.iter().filter_map(|&k| find(59, k).cloned()).collect();
        let series = exceptional_ssing_series(59, &subset);
        if series == fixtures::P59_EXCEPTIONAL_SSING {
            VerifyItem::new(Pass, label, "")
        } else {
            VerifyItem::new(Fail, label, format!("got {}", series.join(", ")))
        }
    } else {
        VerifyItem::new(Missing, label, "")
    });

    for &(p, k, n) in fixtures::STATED_TRAINS {
        let label = format!("p={p} k={k} train to slope {n}");
        let weights: Vec<u32> = (0..n).map(|j| k - 2 * j).collect();
        if weights.iter().any(|&w| find(p, w).is_none()) {
            items.push(VerifyItem::new(Missing, label, ""));
            continue;
        }
        let subset: Vec<SlopeRecord> = weights.iter().filter_map(|&w| find(p, w).cloned()).collect();
        let cert = detect_trains(&subset).into_iter().find(|c| c.k == k && c.n == n);
        items.push(match cert {
            Some(c) if c.matched() => VerifyItem::new(Pass, label, ""),
            Some(_) => VerifyItem::new(Fail, label, "fractional pairs incomplete"),
            None => VerifyItem::new(Fail, label, "exceptional slope absent"),
        });
    }

    if !records.is_empty() {
        let label = format!("slope symmetry over {} records", records.len());
        let bad: Vec<String> = records
            .iter()
            .filter(|r| !r.ulmer_ok || r.dim > 0 && !measure_mu(r).is_ok_and(|m| m.is_symmetric()))
            .map(|r| format!("p={} k={}", r.p, r.k))
            .collect();
        items.push(if bad.is_empty() {
            VerifyItem::new(Pass, label, "")
        } else {
            VerifyItem::new(Fail, label, bad.join("; "))
        });
    }

    let label = "manifest lists every record file";
    items.push(if orphans.is_empty() {
        VerifyItem::new(Pass, label, "")
    } else {
        VerifyItem::new(Fail, label, format!("orphans: {}", orphans.join(", ")))
    });
    items
}

fn cmd_verify(a: &StoreArgs, out: &mut dyn Write) -> CmdResult {
    let store = open_existing(&a.store)?;
    let records = store.records(None)?;
    let items = verify_records(&records, &store.orphans()?);
    let mut counts = [0usize; 3];
    for it in &items {
        let (tag, slot) = match it.verdict {
            Verdict::Pass => ("PASS", 0),
            Verdict::Fail => ("FAIL", 1),
            Verdict::Missing => ("MISSING", 2),
        };
        counts[slot] += 1;
        if it.detail.is_empty() {
            writeln!(out, "{tag:<8} {}", it.label)?;
        } else {
            writeln!(out, "{tag:<8} {} ({})", it.label, it.detail)?;
        }
    }
    for e in store.manifest().failures() {
        writeln!(out, "{:<8} p={} k={} computation failed: {}", "MISSING", e.p, e.k, e.error.as_deref().unwrap_or(""))?;
    }
    writeln!(out, "passed {}, failed {}, missing {}", counts[0], counts[1], counts[2])?;
    Ok(if counts[1] == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("slopelab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<u32>("12..28"), Ok((12, 28)));
        assert_eq!(parse_range::<u32>("12..=28"), Ok((12, 28)));
        assert_eq!(parse_range::<u64>("59"), Ok((59, 59)));
        assert!(parse_range::<u32>("28..12").is_err());
        assert!(parse_range::<u32>("a..b").is_err());
    }

    #[test]
    fn compute_text() {
        let (code, out, _) = run_capture(&["compute", "--prime", "79", "--weight", "38"]);
        assert_eq!(code, 0);
        assert!(out.contains("slopes: 0, 1\n"));
        assert!(out.contains("exceptional: 1\n"));
        assert!(out.contains("ssing: 0, 1/37, 36/37, 1\n"));
        let (_, out, _) = run_capture(&["compute", "--prime", "79", "--weight", "116", "--text"]);
        assert!(out.contains("slopes: 0, 1/2, 1/2, 1, 1, 1, 1, 1, 1\n"));
    }

    #[test]
    fn compute_usage_errors() {
        assert_eq!(run_capture(&["compute", "--prime", "79", "--weight", "13"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["compute", "--prime", "78", "--weight", "12"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["compute", "--prime", "79", "--weight", "10"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["compute", "--prime", "79"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn theta_weights() {
        let (code, out, _) = run_capture(&["theta", "--prime", "59", "--seed", "16", "--max", "500"]);
        assert_eq!(code, 0);
        assert!(out.contains(
            "weights: 16, 46, 76, 106, 136, 166, 196, 226, 256, 286, 316, 346, 376, 406, 436, 466, 496\n"
        ));
        assert_eq!(run_capture(&["theta", "--prime", "59", "--seed", "15", "--max", "500"]).0, EXIT_USAGE);
    }
}
