use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use rankmm::doa::{self, run_tracking_with, sweep_sampling_rate, Scenario};
use rankmm::io::{self, fmt_num};
use rankmm::linalg::{hermitian_eig, sample_covariance, SnapshotWindow};
use rankmm::rank::{default_lambda0_unit, kn_estimate_rank, select_rank, CostSchedule};
use rankmm::rmt::NoiseModel;
use rankmm::threshold::{lemma1_threshold, lemma2_threshold, solve_minimax_threshold, ThresholdProblem};
use rankmm::tracy_widom::tw_pdf;
use rankmm::Beta;

mod svg;

use svg::{Chart, Series};

/// Minimax rank estimation for spiked covariance models.
#[derive(Parser)]
#[command(name = "rankmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Tracy-Widom distributions F1, f1, F2, f2.
    Tw(TwArgs),
    /// Solve for the minimax eigenvalue threshold of the one-signal test.
    Threshold(ThresholdArgs),
    /// Estimate the rank of a snapshot CSV file.
    Rank(RankArgs),
    /// Track a direction-of-arrival scenario and write the per-step trace.
    Simulate(SimulateArgs),
    /// Rank error of both estimators against sampling rate.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct TwArgs {
    /// First grid point.
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    from: f64,
    /// Last grid point.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    to: f64,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also draw the two densities to this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Inclusion cost c_I (overestimating the rank).
    #[arg(long, default_value_t = 1.0)]
    ci: f64,
    /// Exclusion cost c_E (underestimating the rank), per signal.
    #[arg(long, default_value_t = 1.0)]
    ce: f64,
}

#[derive(Args)]
struct ThresholdArgs {
    /// 1 for real data, 2 for complex data.
    #[arg(long, default_value_t = 2)]
    beta: u32,
    /// Dimension n.
    #[arg(long)]
    n: usize,
    /// Number of snapshots N.
    #[arg(long = "N")]
    big_n: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Smallest signal strength to detect, in units of sigma2 [default: sqrt(n/N) + N^(-1/3)].
    #[arg(long)]
    lambda0: Option<f64>,
    #[command(flatten)]
    costs: CostArgs,
    /// Also print the small-gap closed-form approximation.
    #[arg(long)]
    lemma1: bool,
    /// Also print the h ~ N^(-1/3) approximation.
    #[arg(long)]
    lemma2: bool,
}

#[derive(Args)]
struct RankArgs {
    /// Snapshot CSV: header t,x_0,... (real) or t,re_0,im_0,... (complex).
    input: PathBuf,
    /// Known noise variance; estimated from the eigenvalues when omitted.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Smallest signal strength to detect, in units of sigma2 [default: sqrt(n/N) + N^(-1/3)].
    #[arg(long)]
    lambda0: Option<f64>,
    #[command(flatten)]
    costs: CostArgs,
    /// Largest rank worth considering; exclusion costs beyond it are zero.
    #[arg(long)]
    rmax: Option<usize>,
    /// Per-test false-alarm rate of the Tracy-Widom comparison rule.
    #[arg(long, default_value_t = 0.005)]
    false_alarm: f64,
    /// Write the per-index table as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or @varying_rank / @constant_rank for the built-in ones.
    scenario: String,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-test false-alarm rate of the Tracy-Widom comparison rule.
    #[arg(long, default_value_t = 0.005)]
    false_alarm: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Skip the SVG charts.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Smallest signal strength to detect, in units of sigma2 [default: sqrt(n/N) + N^(-1/3)].
    #[arg(long)]
    lambda0: Option<f64>,
    #[command(flatten)]
    costs: CostArgs,
    /// Largest rank worth considering; exclusion costs beyond it are zero.
    #[arg(long)]
    rmax: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Comma-separated sampling rates.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,16")]
    rates: Vec<f64>,
    /// Independent replicates per rate.
    #[arg(long, default_value_t = 20)]
    replicates: usize,
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Tw(a) => cmd_tw(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn parse_beta(beta: u32) -> Result<Beta> {
    Beta::from_int(beta).with_context(|| format!("--beta must be 1 or 2, got {beta}"))
}

fn schedule(n: usize, costs: &CostArgs, rmax: Option<usize>) -> Result<CostSchedule> {
    ensure!(costs.ci > 0.0 && costs.ci.is_finite(), "--ci must be positive, got {}", costs.ci);
    ensure!(costs.ce > 0.0 && costs.ce.is_finite(), "--ce must be positive, got {}", costs.ce);
    let s = match rmax {
        Some(r) => CostSchedule::with_rmax(n, costs.ci, costs.ce, r),
        None => CostSchedule::new(costs.ci, vec![costs.ce; n]),
    };
    Ok(s?)
}

fn check_lambda0(lambda0: Option<f64>) -> Result<()> {
    if let Some(l) = lambda0 {
        ensure!(l > 0.0 && l.is_finite(), "--lambda0 must be positive, got {l}");
    }
    Ok(())
}

fn check_false_alarm(p: f64) -> Result<()> {
    ensure!(p > 0.0 && p < 1.0, "--false-alarm must be in (0, 1), got {p}");
    Ok(())
}

/// Write through a temporary file so a failed run leaves no partial output.
fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let file = File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    let mut w = BufWriter::new(file);
    let written = fill(&mut w).and_then(|()| Ok(w.flush()?));
    drop(w);
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e.context(format!("writing {}", path.display())));
    }
    fs::rename(&tmp, path).with_context(|| format!("cannot move output into {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, |w| Ok(w.write_all(text.as_bytes())?))
}

fn cmd_tw(a: TwArgs) -> Result<()> {
    let points = io::grid(a.from, a.to, a.step)?;
    write_file(&a.out, |w| Ok(io::write_tw_table(w, &points)?))?;
    if let Some(path) = &a.svg {
        let density = |beta| points.iter().map(|&s| (s, tw_pdf(beta, s))).collect();
        let chart = Chart {
            title: "Tracy-Widom densities".into(),
            x_label: "s".into(),
            y_label: "density".into(),
            log_x: false,
            series: vec![Series::line("beta = 1", density(Beta::Real)), Series::line("beta = 2", density(Beta::Complex))],
        };
        write_text(path, &chart.render())?;
    }
    println!("wrote {} rows to {}", points.len(), a.out.display());
    Ok(())
}

fn cmd_threshold(a: ThresholdArgs) -> Result<()> {
    let beta = parse_beta(a.beta)?;
    ensure!(a.costs.ci > 0.0 && a.costs.ci.is_finite(), "--ci must be positive, got {}", a.costs.ci);
    ensure!(a.costs.ce > 0.0 && a.costs.ce.is_finite(), "--ce must be positive, got {}", a.costs.ce);
    check_lambda0(a.lambda0)?;
    let noise = NoiseModel::new(a.n, a.big_n, a.sigma2, beta)?;
    let unit = a.lambda0.unwrap_or_else(|| default_lambda0_unit(&noise));
    let problem = ThresholdProblem::new(noise, unit * a.sigma2, a.costs.ci, a.costs.ce)?;
    let sol = solve_minimax_threshold(&problem)?;

    println!("lambda0          {}", fmt_num(problem.lambda0()));
    println!("threshold        {}", fmt_num(sol.threshold));
    println!("standardized t   {}", fmt_num(sol.t));
    println!("null risk        {}", fmt_num(sol.null_risk));
    println!("alternate risk   {}", fmt_num(sol.alternate_risk));
    println!("max risk         {}", fmt_num(sol.max_risk));
    println!("residual         {}", fmt_num(sol.residual));

    let h = unit - noise.gamma().sqrt();
    if a.lemma1 {
        let l1 = lemma1_threshold(h, &noise, a.costs.ci, a.costs.ce).context("small-gap approximation")?;
        println!("lemma1 t         {}  (h = {}, {:?} case)", fmt_num(l1.t), fmt_num(h), l1.case);
    }
    if a.lemma2 {
        let h0 = h * (a.big_n as f64).cbrt();
        let l2 = lemma2_threshold(h0, &noise, a.costs.ci, a.costs.ce).context("medium-gap approximation")?;
        println!("lemma2 t         {}  (h0 = {})", fmt_num(l2.t), fmt_num(h0));
        if let Some(v) = l2.large_exclusion_limit {
            println!("  c_E >> c_I     {}", fmt_num(v));
        }
        if let Some(v) = l2.small_exclusion_limit {
            println!("  c_E << c_I     {}", fmt_num(v));
        }
    }
    Ok(())
}

fn cmd_rank(a: RankArgs) -> Result<()> {
    check_lambda0(a.lambda0)?;
    check_false_alarm(a.false_alarm)?;
    if let Some(s) = a.sigma2 {
        ensure!(s > 0.0 && s.is_finite(), "--sigma2 must be positive, got {s}");
    }
    let file = File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let data = io::read_snapshots(file).with_context(|| format!("reading {}", a.input.display()))?;
    let (n, big_n) = (data.dim(), data.snapshots.len());
    let mut window = SnapshotWindow::new(big_n, n, data.beta)?;
    for s in data.snapshots {
        window.push(s)?;
    }
    let eig = hermitian_eig(&sample_covariance(&window)?)?;
    let values = eig.values();

    let base = NoiseModel::new(n, big_n, 1.0, data.beta)?;
    let unit = a.lambda0.unwrap_or_else(|| default_lambda0_unit(&base));
    let sel = select_rank(values, &base, unit, &schedule(n, &a.costs, a.rmax)?, a.sigma2)?;
    let kn = kn_estimate_rank(values, &base.with_sigma2(sel.sigma2)?, a.false_alarm)?;

    println!("n = {n}, N = {big_n}, beta = {}", data.beta);
    let how = if sel.sigma2_estimated { "estimated" } else { "given" };
    println!("sigma2 = {} ({how})", fmt_num(sel.sigma2));
    println!("rank = {}", sel.estimate.r_hat);
    println!("rank (Tracy-Widom test at {}) = {}", fmt_num(a.false_alarm), kn.r_hat);
    println!("{:>3}  {:>16}  {:>16}", "i", "eigenvalue", "threshold");
    let thresholds = sel.sequence.thresholds();
    for (i, (&l, &t)) in values.iter().zip(thresholds).enumerate() {
        println!("{:>3}  {:>16}  {:>16}", i + 1, fmt_num(l), fmt_num(t));
    }
    if let Some(path) = &a.out {
        write_file(path, |w| {
            writeln!(w, "i,eigenvalue,threshold,exceeds")?;
            for (i, (&l, &t)) in values.iter().zip(thresholds).enumerate() {
                writeln!(w, "{},{},{},{}", i + 1, fmt_num(l), fmt_num(t), u8::from(sel.estimate.exceeds[i]))?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn load_scenario(a: &ScenarioArgs) -> Result<Scenario> {
    let scenario = match a.scenario.as_str() {
        "@varying_rank" => doa::varying_rank(),
        "@constant_rank" => doa::constant_rank(),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read scenario {path}"))?;
            Scenario::parse(&text).with_context(|| format!("in scenario {path}"))?
        }
    };
    check_false_alarm(a.false_alarm)?;
    Ok(match a.seed {
        Some(seed) => scenario.with_seed(seed),
        None => scenario,
    })
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let scenario = load_scenario(&a.common)?;
    check_lambda0(a.lambda0)?;
    let costs = schedule(scenario.n, &a.costs, a.rmax)?;
    let trace = run_tracking_with(&scenario, &costs, a.common.false_alarm, a.lambda0)?;
    prepare_out_dir(&a.common.out)?;
    let csv = a.common.out.join("trace.csv");
    write_file(&csv, |w| Ok(io::write_trace(w, &trace)?))?;
    if !a.common.no_svg {
        let rank = |f: fn(&doa::TrackingRecord) -> usize| trace.records.iter().map(|r| (r.t, f(r) as f64)).collect();
        let chart = Chart {
            title: "Rank over time".into(),
            x_label: "t".into(),
            y_label: "rank".into(),
            log_x: false,
            series: vec![
                Series::steps("true", rank(|r| r.r)),
                Series::steps("minimax", rank(|r| r.rhat_mm)),
                Series::steps("Tracy-Widom 0.5%", rank(|r| r.rhat_kn)),
            ],
        };
        write_text(&a.common.out.join("rank.svg"), &chart.render())?;
        let err = |f: fn(&doa::TrackingRecord) -> f64| trace.records.iter().map(|r| (r.t, f(r))).collect();
        let chart = Chart {
            title: "Subspace error".into(),
            x_label: "t".into(),
            y_label: "squared Frobenius error".into(),
            log_x: false,
            series: vec![Series::line("k = r", err(|r| r.err_r)), Series::line("k = minimax rank", err(|r| r.err_rhat_mm))],
        };
        write_text(&a.common.out.join("subspace_error.svg"), &chart.render())?;
    }
    println!("rank error: minimax {}, Tracy-Widom {}", fmt_num(trace.rank_error_mm()), fmt_num(trace.rank_error_kn()));
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let scenario = load_scenario(&a.common)?;
    if a.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    ensure!(!a.rates.is_empty(), "--rates must list at least one rate");
    for &r in &a.rates {
        ensure!(r > 0.0 && r.is_finite(), "--rates must be positive, got {r}");
    }
    let rows = sweep_sampling_rate(&scenario, &a.rates, a.replicates, a.common.false_alarm)?;
    prepare_out_dir(&a.common.out)?;
    let csv = a.common.out.join("sweep.csv");
    write_file(&csv, |w| Ok(io::write_sweep(w, &rows)?))?;
    if !a.common.no_svg {
        let series = |name: &str, f: fn(&doa::SweepRow) -> (f64, f64)| Series {
            error_bars: Some(rows.iter().map(|r| f(r).1).collect()),
            ..Series::line(name, rows.iter().map(|r| (r.rate, f(r).0)).collect())
        };
        let chart = Chart {
            title: "Rank error against sampling rate".into(),
            x_label: "sampling rate".into(),
            y_label: "mean |r - rhat|".into(),
            log_x: true,
            series: vec![series("minimax", |r| (r.mm_mean, r.mm_sd)), series("Tracy-Widom 0.5%", |r| (r.kn_mean, r.kn_sd))],
        };
        write_text(&a.common.out.join("sweep.svg"), &chart.render())?;
    }
    for r in &rows {
        println!(
            "rate {:>6}: minimax {} ± {}, Tracy-Widom {} ± {}",
            fmt_num(r.rate),
            fmt_num(r.mm_mean),
            fmt_num(r.mm_sd),
            fmt_num(r.kn_mean),
            fmt_num(r.kn_sd)
        );
    }
    println!("wrote {}", csv.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_has_help() {
        for sub in Cli::command().get_subcommands() {
            for arg in sub.get_arguments() {
                if arg.get_id() == "help" || arg.get_id() == "version" {
                    continue;
                }
                assert!(arg.get_help().is_some(), "{} --{}", sub.get_name(), arg.get_id());
            }
        }
    }
}
