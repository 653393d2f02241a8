#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stit_extremes::chenstein::{
    b1_bound, build_subdivision, estimate_pair_exceedance, p_i_analytic, rho0_satisfied, GridIndex,
};
use stit_extremes::experiments::{
    run_exceedance_experiment, run_gumbel_curve, run_order_statistics, run_two_disk_validation,
    run_typical_inradius_check, ExceedanceSummary, ExperimentConfig, MarginRule,
};
use stit_extremes::extremes::{build_window, collect_records, threshold_v, RECORD_CSV_HEADER};
use stit_extremes::laws::{agg_bound, poisson_pmf};
use stit_extremes::output::{fmt_f64, render_svg, write_json, RunMeta, SvgStyle};
use stit_extremes::rng::stream;
use stit_extremes::simulate;

#[derive(Parser)]
#[command(name = "stit-extremes", version, about = "STIT tessellation simulator and inradius extreme-value diagnostics")]
struct Cli {
    /// Worker threads for the replication pool (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key = value` lines using the long flag names; flags given on
    /// the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one tessellation on the observation window plus margin.
    Simulate(SimulateArgs),
    /// Exceedance counts at v_rho and their distance to Poisson(tau).
    Exceedances(ExceedanceArgs),
    /// Frequencies of M^(k) <= v_rho against the Poisson limit.
    OrderStats(OrderStatArgs),
    /// Law of the rescaled maximum inradius against the Gumbel limit.
    Gumbel(GumbelArgs),
    /// Pooled inradius distribution against Exp(2t).
    Typical(TypicalArgs),
    /// Skeleton avoidance of two disks against the closed form.
    TwoDisk(TwoDiskArgs),
    /// Sub-square bookkeeping and the Poisson approximation bound.
    ChenStein(ChenSteinArgs),
}

const SUBCOMMANDS: [&str; 7] = [
    "simulate",
    "exceedances",
    "order-stats",
    "gumbel",
    "typical",
    "two-disk",
    "chen-stein",
];

#[derive(Debug, Clone, Serialize)]
struct FloatList(Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    let v = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(FloatList(v))
}

/// `a:step:b` (inclusive) or a comma list.
fn parse_grid(s: &str) -> Result<FloatList, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(s);
    }
    let [a, step, b] = parts[..] else {
        return Err("expected a:step:b".into());
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (a, step, b) = (num(a)?, num(step)?, num(b)?);
    if !(step > 0.0) || b < a {
        return Err("need step > 0 and a <= b".into());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok(FloatList((0..=n).map(|i| a + i as f64 * step).collect()))
}

fn parse_pair(s: &str) -> Result<(GridIndex, GridIndex), String> {
    let idx = |x: &str| -> Result<GridIndex, String> {
        let (a, b) = x.split_once(',').ok_or("expected i1,i2")?;
        let p = |y: &str| y.trim().parse::<usize>().map_err(|e| e.to_string());
        Ok(GridIndex::new(p(a)?, p(b)?))
    };
    let (i, j) = s.split_once(':').ok_or("expected i1,i2:j1,j2")?;
    Ok((idx(i)?, idx(j)?))
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance added around the observation window; default 4 v + 2.
    #[arg(long)]
    margin: Option<f64>,
    /// Sets the exceedance threshold v_rho used for highlighting and the margin.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Per-cell inradius records (incenter in the observation window).
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct Common {
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    margin: Option<f64>,
    /// Drop records of cells touching the simulation boundary.
    #[arg(long)]
    filter_contaminated: bool,
}

impl Common {
    fn config(&self, rho_list: Vec<f64>, tau: f64) -> ExperimentConfig {
        ExperimentConfig {
            rho_list,
            tau,
            t: self.t,
            replications: self.reps,
            master_seed: self.seed,
            margin_rule: self.margin.map_or(MarginRule::Auto, MarginRule::Explicit),
            filter_contaminated: self.filter_contaminated,
            ..Default::default()
        }
    }
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct ExceedanceArgs {
    #[arg(long, value_parser = parse_list, default_value = "25,50,100,200")]
    rho_list: FloatList,
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Empirical and Poisson pmf per rho.
    #[arg(long)]
    pmf_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct OrderStatArgs {
    /// One value or a comma list.
    #[arg(long, value_parser = parse_list)]
    rho: FloatList,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 5)]
    kmax: usize,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct GumbelArgs {
    #[arg(long, value_parser = parse_list)]
    rho: FloatList,
    /// `a:step:b` or a comma list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-1,0,1,2")]
    u_grid: FloatList,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct TypicalArgs {
    #[arg(long)]
    rho: f64,
    /// Only enters through the auto margin `4 v_rho + 2`.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_parser = parse_list, default_value = "0.25,0.5,1.0")]
    v_grid: FloatList,
    #[command(flatten)]
    common: Common,
    /// Pooled sample with its empirical and exponential cdf.
    #[arg(long)]
    out: PathBuf,
    /// Survival table at the v grid.
    #[arg(long)]
    survival_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct TwoDiskArgs {
    #[arg(long)]
    r: f64,
    #[arg(long, value_parser = parse_list)]
    d_list: FloatList,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 10000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
#[command(args_override_self = true)]
struct ChenSteinArgs {
    #[arg(long, value_parser = parse_list)]
    rho: FloatList,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    b2: f64,
    #[arg(long, default_value_t = 0.0)]
    b3: f64,
    /// Also estimate P(M_i > v, M_j > v) for sub-squares `i1,i2:j1,j2`.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(GridIndex, GridIndex)>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Splices `--key=value` pairs from the config file in right after the
/// subcommand name, so that explicit flags (which come later) win.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), n + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match value.trim() {
            "true" => extra.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => extra.push(OsString::from(format!("--{key}={v}"))),
        }
    }
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    Ok(w)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn main() -> Result<()> {
    let cli = Cli::parse_from(expand_config(std::env::args_os().collect())?);
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let start = Instant::now();
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Exceedances(a) => cmd_exceedances(a)?,
        Command::OrderStats(a) => cmd_order_stats(a)?,
        Command::Gumbel(a) => cmd_gumbel(a)?,
        Command::Typical(a) => cmd_typical(a)?,
        Command::TwoDisk(a) => cmd_two_disk(a)?,
        Command::ChenStein(a) => cmd_chen_stein(a)?,
    }
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let window = build_window(a.rho, a.t)?;
    let v = threshold_v(a.rho, a.tau, a.t);
    let margin = a.margin.map_or(MarginRule::Auto, MarginRule::Explicit).resolve(v);
    let tess = simulate(&window.with_margin(margin)?, a.t, &mut stream(a.seed, 0))?;
    let recs = collect_records(&tess, &window)?;
    println!("cells {}", tess.cells.len());
    println!("segments {}", tess.segments.len());
    println!("records {} ({} contaminated)", recs.len(), recs.contaminated_count());
    println!("threshold {v:.6}, exceedances {}", recs.exceedance_count(v));
    println!("max inradius {:.6}", recs.order_statistic(1));

    let meta = RunMeta::new("simulate", Some(a.seed), a);
    if let Some(p) = &a.json {
        write_json(p, &tess)?;
        meta.write_beside(p)?;
    }
    if let Some(p) = &a.records {
        let mut w = csv_writer(p, &RECORD_CSV_HEADER)?;
        recs.write_csv_rows(0, &mut w)?;
        w.flush()?;
        meta.write_beside(p)?;
    }
    if let Some(p) = &a.svg {
        let style = SvgStyle {
            threshold: Some(v),
            highlight: Some(window.square.clone()),
            draw_all_incircles: false,
        };
        std::fs::write(p, render_svg(&tess, &style))?;
    }
    Ok(())
}

fn summary_fields(s: &ExceedanceSummary) -> Vec<String> {
    vec![
        f(s.mean),
        f(s.mean_stderr),
        f(s.variance),
        f(s.tv),
        f(s.tv_bootstrap_mean),
        f(s.tv_bias_corrected),
        f(s.tv_ci.0),
        f(s.tv_ci.1),
    ]
}

fn cmd_exceedances(a: &ExceedanceArgs) -> Result<()> {
    let cfg = a.common.config(a.rho_list.0.clone(), a.tau);
    let res = run_exceedance_experiment(&cfg)?;
    let mut w = csv_writer(
        &a.out,
        &[
            "rho", "subset", "threshold", "margin", "replications", "records", "contamination_rate",
            "mean", "mean_stderr", "variance", "tv", "tv_bootstrap_mean", "tv_bias_corrected",
            "tv_ci_lo", "tv_ci_hi",
        ],
    )?;
    let mut pmf_w = a
        .pmf_out
        .as_ref()
        .map(|p| csv_writer(p, &["rho", "subset", "n", "empirical", "poisson"]))
        .transpose()?;
    for r in &res.per_rho {
        for (name, s) in [("all", &r.all), ("clean", &r.clean)] {
            let mut row = vec![
                f(r.rho),
                name.to_string(),
                f(r.threshold),
                f(r.margin),
                res.replications.to_string(),
                r.records_total.to_string(),
                f(r.contamination_rate),
            ];
            row.extend(summary_fields(s));
            w.write_record(&row)?;
            if let Some(pw) = pmf_w.as_mut() {
                for (n, p) in s.pmf.iter().enumerate() {
                    pw.write_record([f(r.rho), name.into(), n.to_string(), f(*p), f(poisson_pmf(a.tau, n as u64))])?;
                }
            }
        }
        let s = r.primary(cfg.filter_contaminated);
        println!(
            "rho {:>8}  v {:.4}  mean {:.4} +- {:.4}  tv {:.4} [{:.4}, {:.4}]  contamination {:.4}",
            r.rho, r.threshold, s.mean, s.mean_stderr, s.tv, s.tv_ci.0, s.tv_ci.1, r.contamination_rate
        );
    }
    w.flush()?;
    if let Some(pw) = pmf_w.as_mut() {
        pw.flush()?;
    }
    RunMeta::new("exceedances", Some(a.common.seed), a).write_beside(&a.out)?;
    Ok(())
}

fn cmd_order_stats(a: &OrderStatArgs) -> Result<()> {
    let rows = run_order_statistics(&a.common.config(a.rho.0.clone(), a.tau), a.kmax)?;
    let mut w = csv_writer(&a.out, &["rho", "k", "threshold", "empirical", "stderr", "limit"])?;
    for r in &rows {
        w.write_record([f(r.rho), r.k.to_string(), f(r.threshold), f(r.empirical), f(r.stderr), f(r.limit)])?;
        println!("rho {:>8}  k {}  P(M <= v) {:.4} +- {:.4}  limit {:.4}", r.rho, r.k, r.empirical, r.stderr, r.limit);
    }
    w.flush()?;
    RunMeta::new("order-stats", Some(a.common.seed), a).write_beside(&a.out)?;
    Ok(())
}

fn cmd_gumbel(a: &GumbelArgs) -> Result<()> {
    let rows = run_gumbel_curve(&a.common.config(a.rho.0.clone(), 1.0), &a.u_grid.0)?;
    let mut w = csv_writer(&a.out, &["rho", "u", "threshold", "empirical", "stderr", "limit"])?;
    for r in &rows {
        w.write_record([f(r.rho), f(r.u), f(r.threshold), f(r.empirical), f(r.stderr), f(r.limit)])?;
        println!("rho {:>8}  u {:>6}  empirical {:.4} +- {:.4}  limit {:.4}", r.rho, r.u, r.empirical, r.stderr, r.limit);
    }
    w.flush()?;
    RunMeta::new("gumbel", Some(a.common.seed), a).write_beside(&a.out)?;
    Ok(())
}

fn cmd_typical(a: &TypicalArgs) -> Result<()> {
    let check = run_typical_inradius_check(&a.common.config(vec![a.rho], a.tau), &a.v_grid.0)?;
    let rate = 2.0 * a.common.t;
    let n = check.sample.len() as f64;
    let mut w = csv_writer(&a.out, &["inradius", "ecdf", "exponential_cdf"])?;
    for (i, x) in check.sample.iter().enumerate() {
        w.write_record([f(*x), f((i + 1) as f64 / n), f(-(-rate * x).exp_m1())])?;
    }
    w.flush()?;
    println!("records {}  KS {:.5}", check.records, check.ks_statistic);
    for r in &check.rows {
        println!("v {:.4}  survival {:.4} +- {:.4}  exp(-2tv) {:.4}", r.v, r.empirical, r.stderr, r.theory);
    }
    if let Some(p) = &a.survival_out {
        let mut sw = csv_writer(p, &["v", "empirical", "stderr", "theory"])?;
        for r in &check.rows {
            sw.write_record([f(r.v), f(r.empirical), f(r.stderr), f(r.theory)])?;
        }
        sw.flush()?;
    }
    RunMeta::new("typical", Some(a.common.seed), a).write_beside(&a.out)?;
    Ok(())
}

fn cmd_two_disk(a: &TwoDiskArgs) -> Result<()> {
    let rows = run_two_disk_validation(a.r, &a.d_list.0, a.t, a.reps, a.seed)?;
    let mut w = csv_writer(&a.out, &["r", "d", "empirical", "stderr", "ci_lo", "ci_hi", "closed_form", "bound"])?;
    for r in &rows {
        w.write_record([f(r.r), f(r.d), f(r.empirical), f(r.stderr), f(r.ci.0), f(r.ci.1), f(r.closed_form), f(r.bound)])?;
        println!(
            "d {:>6}  empirical {:.4} +- {:.4}  closed form {:.4}  bound {:.4}",
            r.d, r.empirical, r.stderr, r.closed_form, r.bound
        );
    }
    w.flush()?;
    RunMeta::new("two-disk", Some(a.seed), a).write_beside(&a.out)?;
    Ok(())
}

fn cmd_chen_stein(a: &ChenSteinArgs) -> Result<()> {
    let mut header = vec![
        "rho", "tau", "beta", "side_count", "squares", "sub_diagonal", "threshold", "rho0_satisfied",
        "p_i", "b1", "b2", "b3", "agg_bound",
    ];
    if a.pair.is_some() {
        header.extend(["pair_estimate", "pair_stderr", "p_i_mc", "p_j_mc"]);
    }
    let mut w = a.out.as_ref().map(|p| csv_writer(p, &header)).transpose()?;
    for &rho in &a.rho.0 {
        let spec = build_subdivision(rho, a.tau, a.beta)?;
        let ok = rho0_satisfied(&spec);
        let p_i = p_i_analytic(&spec).ok();
        let b1 = b1_bound(&spec);
        let agg = agg_bound(b1, a.b2, a.b3, a.tau);
        println!("rho {rho}: |V| = {} ({} per side)", spec.square_count(), spec.side_count);
        println!("  v_rho {:.6}  sub-square diagonal {:.6}  diagonal < v_rho: {ok}", spec.threshold(), spec.diagonal());
        match p_i {
            Some(p) => println!("  p_i {p:.6e}  p_i |V| {:.6}", p * spec.square_count() as f64),
            None => println!("  p_i undefined: diagonal not below v_rho"),
        }
        println!("  b1 {b1:.6}  b2 {}  b3 {}  bound {agg:.6}", a.b2, a.b3);
        let mut row = vec![
            f(rho),
            f(a.tau),
            f(a.beta),
            spec.side_count.to_string(),
            spec.square_count().to_string(),
            f(spec.diagonal()),
            f(spec.threshold()),
            ok.to_string(),
            p_i.map_or_else(String::new, f),
            f(b1),
            f(a.b2),
            f(a.b3),
            f(agg),
        ];
        if let Some((i, j)) = a.pair {
            let est = estimate_pair_exceedance(&spec, i, j, a.reps, a.seed, None)?;
            println!(
                "  P(M_i > v, M_j > v) {:.5} +- {:.5}  (marginals {:.5}, {:.5})",
                est.estimate, est.stderr, est.p_i, est.p_j
            );
            row.extend([f(est.estimate), f(est.stderr), f(est.p_i), f(est.p_j)]);
        }
        if let Some(w) = w.as_mut() {
            w.write_record(&row)?;
        }
    }
    if let (Some(w), Some(p)) = (w.as_mut(), &a.out) {
        w.flush()?;
        RunMeta::new("chen-stein", a.pair.map(|_| a.seed), a).write_beside(p)?;
    }
    Ok(())
}
