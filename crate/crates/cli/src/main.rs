//! Batch entry point: configuration, experiment orchestration,
//! parallel replicates, CSV/JSON emission, and the canned verification
//! suites.
//!
//! Exit codes: 0 ok, 1 usage error, 2 numerical failure,
//! 3 verification failure.

mod config;

use clap::{Args, Parser, Subcommand};
use config::FileConfig;
use fppsim::limitlaw::{self, HorizonPolicy};
use fppsim::limits::{malthusian, stable_age_density, Disorder};
use fppsim::sampling::RngStream;
use fppsim::stats;
use fppsim::verify::{self, Suite};
use fppsim::{ctbp, fpp};
use serde_json::json;
use std::io::Write;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "fppsim", version, about = "Weak-disorder first-passage percolation on the complete graph", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Default)]
struct RunOpts {
    /// Disorder strength s (edge weights E^s).
    #[arg(long)]
    s: Option<f64>,
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// Number of replicates M; replicate r uses RNG stream (seed, r).
    #[arg(long)]
    replicates: Option<usize>,
    /// Master seed (mandatory; no wall-clock default).
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon target scale e^{lambda t} for CTBP-based commands.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output path (CSV); grid runs insert _n<N> before the extension.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for replicates (deterministic for any value).
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML config file; flags override file values.
    #[arg(long)]
    config: Option<String>,
}

impl RunOpts {
    /// Merge: flag wins over config-file value.
    fn merged(&self) -> anyhow::Result<RunOpts> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(RunOpts {
            s: self.s.or(file.s),
            n: self.n.or(file.n),
            n_grid: self.n_grid.clone().or(file.n_grid),
            replicates: self.replicates.or(file.replicates),
            seed: self.seed.or(file.seed),
            horizon: self.horizon.or(file.horizon),
            out: self.out.clone().or(file.out),
            jobs: self.jobs.or(file.jobs),
            config: None,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print lambda, beta1, beta2 and a stable-age density table.
    Constants {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Two-source races: per-replicate CSV plus a summary JSON.
    Fpp {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Single-source flow stopped at a target vertex.
    Single {
        #[command(flatten)]
        opts: RunOpts,
        /// Target vertex (1..n-1).
        #[arg(long, default_value_t = 1)]
        target: u32,
    },
    /// Grow one CTBP snapshot and emit it as CSV.
    Ctbp {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Sample the limit laws: W hat, 2 Xi, and the phi table.
    Limit {
        #[command(flatten)]
        opts: RunOpts,
        /// Emit W hat samples.
        #[arg(long)]
        w: bool,
        /// Emit 2 Xi samples.
        #[arg(long)]
        xi: bool,
        /// Emit the Laplace-transform fixed-point table.
        #[arg(long)]
        phi: bool,
        /// Prior fpp CSV for a cross KS against fresh 2 Xi samples.
        #[arg(long)]
        fpp_csv: Option<String>,
    },
    /// Race simulator vs brute-force shortest paths on small n.
    OracleCompare {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a canned verification suite and emit a JSON report.
    Verify {
        /// quick (about 5 minutes) or full (about 2 hours).
        suite: String,
        #[command(flatten)]
        opts: RunOpts,
        /// Run only the criterion with this id.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

fn usage(msg: &str) -> anyhow::Error {
    anyhow::anyhow!("usage: {msg}")
}

fn required_s(opts: &RunOpts) -> anyhow::Result<Disorder> {
    let s = opts.s.ok_or_else(|| usage("--s is required"))?;
    Disorder::new(s).map_err(|e| usage(&e.to_string()))
}

fn required_seed(opts: &RunOpts) -> anyhow::Result<u64> {
    opts.seed.ok_or_else(|| usage("--seed is required"))
}

fn grid_out_path(out: &str, n: usize) -> String {
    match out.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_n{n}.{ext}"),
        None => format!("{out}_n{n}"),
    }
}

fn cmd_constants(opts: &RunOpts) -> anyhow::Result<()> {
    let d = required_s(opts)?;
    let lc = malthusian(d);
    println!("lambda={:.12}", lc.lambda);
    println!("beta1={:.12}", lc.beta1);
    println!("beta2={:.12}", lc.beta2);
    let mut table = String::from("t,density\n");
    let t_max = lc.beta1 + 8.0 * lc.beta2;
    let steps = 200;
    // Midpoints: the density diverges at t = 0 when s > 1.
    for i in 0..steps {
        let t = t_max * (i as f64 + 0.5) / steps as f64;
        let rho = stable_age_density(d, t).map_err(anyhow::Error::from)?;
        table.push_str(&format!("{t:.8e},{rho:.8e}\n"));
    }
    match &opts.out {
        Some(path) => std::fs::write(path, table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn fpp_summary(outcomes: &[fpp::TwoSourceOutcome], n: usize, d: Disorder) -> anyhow::Result<serde_json::Value> {
    let hops: Vec<f64> = outcomes.iter().map(|o| o.hopcount as f64).collect();
    let hop_stats = stats::SummaryStats::from_slice(&hops);
    let z: Vec<f64> = outcomes
        .iter()
        .map(|o| stats::standardize_hopcount(o.hopcount as u64, o.n, d))
        .collect();
    let w: Vec<f64> = outcomes.iter().map(|o| o.recentered_weight).collect();
    let w_stats = stats::SummaryStats::from_slice(&w);
    let ks = stats::ks_one_sample(&z, stats::normal_cdf)?;
    let corr = stats::correlation(&z, &w)?;
    Ok(json!({
        "n": n,
        "s": d.s(),
        "replicates": outcomes.len(),
        "hopcount": { "mean": hop_stats.mean, "variance": hop_stats.variance },
        "recentered_weight": {
            "mean": w_stats.mean,
            "variance": w_stats.variance,
            "std_error": w_stats.std_error,
        },
        "standardized_hopcount_ks": { "statistic": ks.statistic, "p_value": ks.p_value },
        "hopcount_weight_correlation": corr,
    }))
}

fn write_outcomes(path: &str, outcomes: &[fpp::TwoSourceOutcome], seed: u64) -> anyhow::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{}", fpp::CSV_HEADER)?;
    for (r, o) in outcomes.iter().enumerate() {
        o.write_csv_row(&mut file, seed, r as u64)?;
    }
    file.flush()?;
    Ok(())
}

fn cmd_fpp(opts: &RunOpts) -> anyhow::Result<()> {
    let d = required_s(opts)?;
    let seed = required_seed(opts)?;
    let m = opts.replicates.unwrap_or(1000);
    let jobs = opts.jobs.unwrap_or(1);
    let ns: Vec<usize> = match (&opts.n_grid, opts.n) {
        (Some(grid), _) => grid.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Err(usage("--n or --n-grid is required")),
    };
    let mut summaries = Vec::new();
    let mut mean_points: Vec<(f64, f64, f64)> = Vec::new();
    let mut var_points: Vec<(f64, f64, f64)> = Vec::new();
    for &n in &ns {
        let outcomes = verify::run_replicates(n, d, seed, m, jobs)?;
        if let Some(out) = &opts.out {
            let path = if ns.len() == 1 { out.clone() } else { grid_out_path(out, n) };
            write_outcomes(&path, &outcomes, seed)?;
        }
        let summary = fpp_summary(&outcomes, n, d)?;
        let hops: Vec<f64> = outcomes.iter().map(|o| o.hopcount as f64).collect();
        let st = stats::SummaryStats::from_slice(&hops);
        mean_points.push(((n as f64).ln(), st.mean, st.std_error));
        var_points.push((
            (n as f64).ln(),
            st.variance,
            st.variance * (2.0 / (st.count as f64 - 1.0)).sqrt(),
        ));
        summaries.push(summary);
    }
    let mut report = json!({ "seed": seed, "runs": summaries });
    if ns.len() >= 3 {
        let xs: Vec<f64> = mean_points.iter().map(|p| p.0).collect();
        let (slope, _, se) = stats::slope_fit(
            &xs,
            &mean_points.iter().map(|p| p.1).collect::<Vec<_>>(),
            &mean_points.iter().map(|p| p.2).collect::<Vec<_>>(),
        )?;
        let (vslope, _, vse) = stats::slope_fit(
            &xs,
            &var_points.iter().map(|p| p.1).collect::<Vec<_>>(),
            &var_points.iter().map(|p| p.2).collect::<Vec<_>>(),
        )?;
        report["hopcount_mean_slope"] = json!({ "slope": slope, "std_error": se });
        report["hopcount_var_slope"] = json!({ "slope": vslope, "std_error": vse });
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_single(opts: &RunOpts, target: u32) -> anyhow::Result<()> {
    let d = required_s(opts)?;
    let seed = required_seed(opts)?;
    let n = opts.n.ok_or_else(|| usage("--n is required"))?;
    if target == 0 || target as usize >= n {
        return Err(usage("--target must be in 1..n-1"));
    }
    let m = opts.replicates.unwrap_or(1000);
    let mut rows = String::from("replicate,cost,hopcount,explored,activation_diag\n");
    let mut costs = Vec::with_capacity(m);
    let mut hops = Vec::with_capacity(m);
    for r in 0..m {
        let mut rng = RngStream::new(seed, r as u64);
        let (cost, h, cluster, diag) = fpp::run_single_source(n, d, target, &mut rng)?;
        rows.push_str(&format!("{r},{cost:.16e},{h},{},{diag}\n", cluster.size()));
        costs.push(cost);
        hops.push(h as f64);
    }
    match &opts.out {
        Some(path) => std::fs::write(path, rows)?,
        None => print!("{rows}"),
    }
    let report = json!({
        "n": n,
        "s": d.s(),
        "target": target,
        "replicates": m,
        "cost": stats::SummaryStats::from_slice(&costs).mean,
        "hopcount": stats::SummaryStats::from_slice(&hops).mean,
    });
    eprintln!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_ctbp(opts: &RunOpts) -> anyhow::Result<()> {
    let d = required_s(opts)?;
    let seed = required_seed(opts)?;
    let lc = malthusian(d);
    let policy = match opts.horizon {
        Some(scale) => HorizonPolicy::TargetScale(scale),
        None => HorizonPolicy::default(),
    };
    let t = policy.horizon(lc)?;
    let snap = ctbp::grow_until(d, t, ctbp::DEFAULT_POPULATION_CAP, RngStream::new(seed, 0))?;
    match &opts.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            snap.write_csv(&mut file)?;
            file.flush()?;
            let report = json!({
                "s": d.s(),
                "horizon": t,
                "population": snap.population(),
                "martingale_estimate": ctbp::martingale_estimate(&snap, lc),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        None => snap.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn read_recentered_weights(path: &str) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow::anyhow!("empty CSV {path}"))?;
    let column = header
        .split(',')
        .position(|name| name == "recentered_weight")
        .ok_or_else(|| anyhow::anyhow!("no recentered_weight column in {path}"))?;
    lines
        .map(|line| {
            line.split(',')
                .nth(column)
                .ok_or_else(|| anyhow::anyhow!("short row in {path}"))
                .and_then(|v| v.parse::<f64>().map_err(Into::into))
        })
        .collect()
}

fn cmd_limit(opts: &RunOpts, w: bool, xi: bool, phi: bool, fpp_csv: &Option<String>) -> anyhow::Result<()> {
    let d = required_s(opts)?;
    let seed = required_seed(opts)?;
    let m = opts.replicates.unwrap_or(1000);
    let policy = match opts.horizon {
        Some(scale) => HorizonPolicy::TargetScale(scale),
        None => HorizonPolicy::default(),
    };
    let prefix = opts.out.clone().unwrap_or_else(|| "limit".into());
    let all = !(w || xi || phi);
    let mut rng = RngStream::new(seed, 0);
    let mut report = json!({ "s": d.s(), "seed": seed });
    if w || all {
        let samples: Vec<f64> = (0..m)
            .map(|_| limitlaw::sample_w(d, policy, &mut rng))
            .collect::<Result<_, _>>()?;
        let mut text = String::from("w\n");
        for v in &samples {
            text.push_str(&format!("{v:.16e}\n"));
        }
        std::fs::write(format!("{prefix}_w.csv"), text)?;
        report["w"] = json!({
            "file": format!("{prefix}_w.csv"),
            "count": m,
            "mean": stats::SummaryStats::from_slice(&samples).mean,
        });
    }
    if xi || all || fpp_csv.is_some() {
        let samples: Vec<f64> = (0..m)
            .map(|_| {
                limitlaw::sample_limit(d, &mut rng, |r| {
                    limitlaw::sample_w(d, policy, r).expect("horizon validated above")
                })
                .xi2
            })
            .collect();
        let mut text = String::from("xi2\n");
        for v in &samples {
            text.push_str(&format!("{v:.16e}\n"));
        }
        std::fs::write(format!("{prefix}_xi2.csv"), text)?;
        report["xi2"] = json!({
            "file": format!("{prefix}_xi2.csv"),
            "count": m,
            "mean": stats::SummaryStats::from_slice(&samples).mean,
        });
        if let Some(path) = fpp_csv {
            let weights = read_recentered_weights(path)?;
            let ks = stats::ks_two_sample(&weights, &samples)?;
            report["cross_ks"] = json!({
                "fpp_csv": path,
                "statistic": ks.statistic,
                "p_value": ks.p_value,
            });
        }
    }
    if phi || all {
        let table = limitlaw::solve_phi(d, 10.0, 128, 1e-8)?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        std::fs::write(format!("{prefix}_phi.csv"), buf)?;
        report["phi"] = json!({
            "file": format!("{prefix}_phi.csv"),
            "grid_size": table.u_grid.len(),
        });
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_oracle_compare(opts: &RunOpts) -> anyhow::Result<bool> {
    let d = required_s(opts)?;
    let seed = required_seed(opts)?;
    let n = opts.n.ok_or_else(|| usage("--n is required"))?;
    let m = opts.replicates.unwrap_or(10_000);
    let mut race_cost = Vec::with_capacity(m);
    let mut race_hops = Vec::with_capacity(m);
    let mut oracle_cost = Vec::with_capacity(m);
    let mut oracle_hops = Vec::with_capacity(m);
    for r in 0..m {
        let o = fpp::run_two_source(n, d, &mut RngStream::new(seed, r as u64))?;
        race_cost.push(o.cost_original);
        race_hops.push(o.hopcount);
        let (c, h) = fpp::dijkstra_oracle(n, d, &mut RngStream::new(seed + 1, r as u64))?;
        oracle_cost.push(c);
        oracle_hops.push(h);
    }
    let ks = stats::ks_two_sample(&race_cost, &oracle_cost)?;
    let (chi, chi_p) = verify::hop_chi_square(&race_hops, &oracle_hops)?;
    let pass = ks.p_value > 0.01 && chi_p > 0.01;
    let report = json!({
        "n": n,
        "s": d.s(),
        "replicates": m,
        "cost_ks": { "statistic": ks.statistic, "p_value": ks.p_value },
        "hopcount_chi_square": { "statistic": chi, "p_value": chi_p },
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(pass)
}

fn cmd_verify(suite: &str, opts: &RunOpts, criterion: Option<u32>) -> anyhow::Result<bool> {
    let suite = match suite {
        "quick" => Suite::Quick,
        "full" => Suite::Full,
        other => return Err(usage(&format!("unknown suite '{other}' (quick or full)"))),
    };
    let seed = opts.seed.unwrap_or(verify::DEFAULT_SEED);
    let jobs = opts.jobs.unwrap_or(1);
    // Sensitivity test hook: perturb the Malthusian rate used by the
    // two-vertex checks.
    let lambda_scale = match std::env::var("FPPSIM_LAMBDA_SCALE") {
        Ok(v) => v.parse::<f64>().map_err(|_| usage("bad FPPSIM_LAMBDA_SCALE"))?,
        Err(_) => 1.0,
    };
    let criteria = verify::run_suite(suite, seed, jobs, lambda_scale, criterion)?;
    if criteria.is_empty() {
        return Err(usage("criterion id is not part of this suite"));
    }
    for c in &criteria {
        eprintln!(
            "criterion {:>2} ({}): {}",
            c.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let pass = criteria.iter().all(|c| c.pass);
    let report = json!({
        "suite": if suite == Suite::Quick { "quick" } else { "full" },
        "seed": seed,
        "lambda_scale": lambda_scale,
        "pass": pass,
        "criteria": criteria,
    });
    let text = serde_json::to_string_pretty(&report)?;
    match &opts.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(pass)
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Constants { opts } => cmd_constants(&opts.merged()?).map(|()| true),
        Command::Fpp { opts } => cmd_fpp(&opts.merged()?).map(|()| true),
        Command::Single { opts, target } => cmd_single(&opts.merged()?, *target).map(|()| true),
        Command::Ctbp { opts } => cmd_ctbp(&opts.merged()?).map(|()| true),
        Command::Limit { opts, w, xi, phi, fpp_csv } => {
            cmd_limit(&opts.merged()?, *w, *xi, *phi, fpp_csv).map(|()| true)
        }
        Command::OracleCompare { opts } => cmd_oracle_compare(&opts.merged()?),
        Command::Verify { suite, opts, criterion } => cmd_verify(suite, &opts.merged()?, *criterion),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.to_string().starts_with("usage:") {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
