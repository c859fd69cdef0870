//! Command-line front end: builds library models, runs the analysis
//! commands, and emits CSV/JSON reports.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unreadable
//! or malformed inputs), 2 when a model refutes a checked property; a
//! code-2 exit prints one machine-readable JSON violation report on
//! stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use bmolab_core::denjoy::{self, DenjoyParams};
use bmolab_core::structure::{self, Verdict};
use bmolab_core::{measure, suite, weights};
use bmolab_core::{CellFn, CellSet, HedgehogVariant, Model, ModelSpec};

#[derive(Parser)]
#[command(
    name = "bmolab",
    version,
    about = "Mean-oscillation analysis on finite weighted cell spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Builds a library model and writes its JSON document.
    Gen {
        /// Output path; stdout when omitted.
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Decides whether the seminorm is a norm modulo constants.
    Banach {
        model: PathBuf,
        /// Writes the kernel witness as JSON when the verdict is negative.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Muckenhoupt constant, exponential bracket, and bracket curve.
    Weights {
        model: PathBuf,
        #[arg(long = "fn")]
        function: String,
        /// Muckenhoupt exponent.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Number of log-spaced bracket rates below the seminorm.
        #[arg(long, default_value_t = 8)]
        alpha_grid: usize,
        /// Per-generator distribution CSV: gen_id, t, mu_f, envelope.
        /// The envelope is the bracket bound at the largest grid rate.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Audits shrinking, doubling, growth, and weak differentiation.
    DenjoyAudit {
        model: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 6.0)]
        b: f64,
        /// Smallness threshold; smallest member measure when omitted.
        #[arg(long)]
        eps: Option<f64>,
        /// Function checked by the weak-differentiation audit.
        #[arg(long)]
        probe: Option<String>,
        /// Audit the family induced near this generator instead of the
        /// whole space.
        #[arg(long)]
        g0: Option<String>,
        /// Sampling seed for the local engulfing audit.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration cap on growth chains.
        #[arg(long)]
        j_max: Option<usize>,
    },
    /// Covering decomposition of a function at a deviation height.
    Cz {
        model: PathBuf,
        #[arg(long = "fn")]
        function: String,
        /// Base generator id; the largest member when omitted.
        #[arg(long)]
        g0: Option<String>,
        /// Deviation height; K*e when omitted.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 6.0)]
        b: f64,
    },
    /// Decay envelope check with structure-derived constants.
    Jn {
        model: PathBuf,
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 6.0)]
        b: f64,
        /// Per-generator curve CSV: gen_id, t, mu_f, envelope, margin.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Coverage of a target by generators of small measure.
    FineCover {
        model: PathBuf,
        /// Only members of measure strictly below this count; no
        /// measure restriction when omitted.
        #[arg(long)]
        eps: Option<f64>,
        /// Target the member of this generator; the whole space when
        /// omitted.
        #[arg(long)]
        target: Option<String>,
    },
    /// Runs the acceptance battery and writes a JSON report.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run a single criterion (1-based).
        #[arg(long)]
        only: Option<u32>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fault injection: scales the covering height constant. A
        /// value well below one must fail the covering-bound check.
        #[arg(long, default_value_t = 1.0)]
        tamper_k: f64,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Dyadic cubes of the unit interval (n = 1) or square (n = 2).
    #[command(name = "dyadic_cubes", alias = "dyadic-cubes")]
    DyadicCubes {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        depth: u32,
    },
    /// Axis-parallel rectangles with power-of-two sides on a grid.
    #[command(name = "axis_rectangles", alias = "axis-rectangles")]
    AxisRectangles {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        grid: u32,
        #[arg(long)]
        max_level: u32,
    },
    /// Column strips over an N-by-N grid with the function sqrt_sing.
    #[command(name = "vertical_strips", alias = "vertical-strips")]
    VerticalStrips {
        #[arg(long)]
        grid: u32,
    },
    /// Rays with interval generators, bridged through a hub or pairs.
    Hedgehog {
        #[arg(long)]
        rays: u32,
        #[arg(long)]
        cells_per_ray: u32,
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
    /// Spike blocks behind a measure floor; function spike_sum.
    #[command(name = "notjnp_instance", alias = "notjnp-instance")]
    NotJnp {
        #[arg(long)]
        trunc: u32,
        #[arg(long)]
        grid: u32,
    },
    /// Dyadic line carrying exact cell averages of ln(1/x).
    #[command(name = "log_singularity", alias = "log-singularity")]
    LogSingularity {
        #[arg(long)]
        depth: u32,
    },
}

/// Bridge-generator layout of a ray model.
#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Hub generators join every ray through a center cell.
    Ex62,
    /// Pair generators join the first cells of every two rays.
    Ex63,
}

impl From<VariantArg> for HedgehogVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Ex62 => HedgehogVariant::Hub,
            VariantArg::Ex63 => HedgehogVariant::Pairs,
        }
    }
}

enum Failure {
    Usage(String),
    Violation(serde_json::Value),
}

impl From<bmolab_core::Error> for Failure {
    fn from(e: bmolab_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Violation(report)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report is plain data"));
            ExitCode::from(2)
        }
    }
}

/// Caps the global thread pool when BMOLAB_THREADS is set.
fn init_threads() -> CmdResult {
    let Ok(raw) = std::env::var("BMOLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::Usage(format!("BMOLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Gen { out, kind } => cmd_gen(kind, out),
        Command::Banach { model, witness_out } => cmd_banach(&model, witness_out.as_deref()),
        Command::Weights { model, function, p, alpha_grid, csv } => {
            cmd_weights(&model, &function, p, alpha_grid, csv.as_deref())
        }
        Command::DenjoyAudit { model, a, b, eps, probe, g0, seed, j_max } => {
            cmd_denjoy_audit(&model, a, b, eps, probe.as_deref(), g0.as_deref(), seed, j_max)
        }
        Command::Cz { model, function, g0, alpha, a, b } => {
            cmd_cz(&model, &function, g0.as_deref(), alpha, a, b)
        }
        Command::Jn { model, function, a, b, csv } => {
            cmd_jn(&model, &function, a, b, csv.as_deref())
        }
        Command::FineCover { model, eps, target } => {
            cmd_fine_cover(&model, eps, target.as_deref())
        }
        Command::Suite { seed, only, out, tamper_k } => {
            cmd_suite(seed, only, out.as_deref(), tamper_k)
        }
    }
}

/// Floats print with 17 significant digits and a '.' separator.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &std::path::Path, text: &str) -> CmdResult {
    fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn gen_index(m: &Model, id: &str) -> Result<usize, Failure> {
    m.family
        .index_of(id)
        .ok_or_else(|| Failure::Usage(format!("unknown generator {id:?}")))
}

/// First few indices of a set for violation reports.
fn sample_cells(cells: &CellSet, cap: usize) -> Vec<u32> {
    cells.iter().take(cap).collect()
}

fn cmd_gen(kind: GenKind, out: Option<PathBuf>) -> CmdResult {
    let spec = match kind {
        GenKind::DyadicCubes { n, depth } => ModelSpec::DyadicCubes { n, depth },
        GenKind::AxisRectangles { n, grid, max_level } => {
            ModelSpec::AxisRectangles { n, grid, max_level }
        }
        GenKind::VerticalStrips { grid } => ModelSpec::VerticalStrips { grid },
        GenKind::Hedgehog { rays, cells_per_ray, variant } => ModelSpec::Hedgehog {
            rays,
            cells_per_ray,
            variant: variant.into(),
        },
        GenKind::NotJnp { trunc, grid } => ModelSpec::NotJnp { trunc, grid },
        GenKind::LogSingularity { depth } => ModelSpec::LogSingularity { depth },
    };
    let model = spec.build()?;
    let doc = model.to_json_string();
    match out {
        Some(path) => write_text(&path, &doc),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn cmd_banach(model: &std::path::Path, witness_out: Option<&std::path::Path>) -> CmdResult {
    let m = Model::from_path(model)?;
    let v = structure::banach_verdict(&m.family, &m.default_partition(), &m.space)?;
    if let (Some(path), Some(w)) = (witness_out, &v.witness) {
        let doc = json!({ "name": "kernel_witness", "values": w.values() });
        write_text(path, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("plain data")))?;
    }
    let diameter = v
        .chain_diameter
        .map_or("none".to_string(), |d| d.to_string());
    if v.verdict == Verdict::Banach {
        println!("verdict: Banach");
        println!("chain-connected: {}", v.chain_connected);
        println!("decomposable: {}", v.decomposable);
        println!("components: {}", v.components);
        println!("chain-diameter: {diameter}");
        return Ok(());
    }
    let witness = v.witness.as_ref().map(|w| {
        let s = measure::bmo_seminorm(w, &m.family, 1.0, &m.space)
            .map(|s| s.value)
            .unwrap_or(0.0);
        json!({ "seminorm": s, "values": w.values() })
    });
    Err(Failure::Violation(json!({
        "command": "banach",
        "violation": "seminorm-is-not-a-norm",
        "details": {
            "verdict": "NotNorm",
            "chain_connected": v.chain_connected,
            "decomposable": v.decomposable,
            "components": v.components,
            "uncovered_cells": sample_cells(&m.uncovered(), 32),
            "witness": witness,
        },
    })))
}

fn cmd_weights(
    model: &std::path::Path,
    function: &str,
    p: f64,
    alpha_grid: usize,
    csv: Option<&std::path::Path>,
) -> CmdResult {
    let m = Model::from_path(model)?;
    let f = m.function(function)?;
    let bmo = measure::bmo_seminorm(f, &m.family, 1.0, &m.space)?.value;
    let grid = weights::default_alpha_grid(bmo, alpha_grid);
    let report = weights::bracket_report(f, &m.family, p, &grid, &m.space)?;
    let chain = weights::a2_chain_check(f, &m.family, &m.space)?;

    println!("seminorm: {}", sig17(bmo));
    println!("ap-constant (p = {p}): {}", sig17(report.ap_constant));
    println!("exp-bracket: {}", sig17(report.exp_bracket));
    println!(
        "a2-chain: {} (lower margin {}, upper margin {})",
        if chain.ok { "ok" } else { "violated" },
        sig17(chain.lower_margin),
        sig17(chain.upper_margin),
    );
    println!("bracket-curve:");
    for &(alpha, value) in &report.bracket_curve {
        println!("  alpha {} -> {}", sig17(alpha), sig17(value));
    }

    if let Some(path) = csv {
        let top = report
            .bracket_curve
            .last()
            .copied()
            .ok_or_else(|| Failure::Usage("alpha grid must have at least one point".into()))?;
        let mut doc = String::from("gen_id,t,mu_f,envelope\n");
        for g in 0..m.family.len() {
            let dist = measure::distribution(f, m.family.member(g), &m.space)?;
            for &(t, frac) in dist.points() {
                let envelope = top.1 * (-top.0 * t / bmo).exp();
                let _ = writeln!(
                    doc,
                    "{},{},{},{}",
                    m.family.id(g),
                    sig17(t),
                    sig17(frac),
                    sig17(envelope)
                );
            }
        }
        write_text(path, &doc)?;
    }

    if chain.ok {
        Ok(())
    } else {
        Err(Failure::Violation(json!({
            "command": "weights",
            "violation": "a2-chain-broken",
            "details": {
                "a2_constant": chain.a2_constant,
                "exp_bracket": chain.exp_bracket,
                "lower_margin": chain.lower_margin,
                "upper_margin": chain.upper_margin,
            },
        })))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_denjoy_audit(
    model: &std::path::Path,
    a: f64,
    b: f64,
    eps: Option<f64>,
    probe: Option<&str>,
    g0: Option<&str>,
    seed: u64,
    j_max: Option<usize>,
) -> CmdResult {
    let m = Model::from_path(model)?;
    let mut params = DenjoyParams::new(a, b)?;
    if let Some(eps) = eps {
        params = params.with_eps(eps);
    }
    if let Some(j) = j_max {
        params = params.with_j_max(j);
    }
    let probe_fn: Option<&CellFn> = match probe {
        Some(name) => Some(m.function(name)?),
        None => None,
    };

    let (audit, local) = match g0 {
        None => (denjoy::denjoy_audit(&m.family, &params, probe_fn, &m.space), None),
        Some(id) => {
            let g = gen_index(&m, id)?;
            let local = denjoy::local_denjoy_audit(&m.family, g, &params, probe_fn, seed, &m.space)?;
            (local.audit.clone(), Some(local))
        }
    };

    println!("eps-shrink: {}", sig17(audit.eps_shrink));
    println!(
        "shrinking: {} ({} uncovered cells)",
        if audit.shrinking_ok { "ok" } else { "failed" },
        audit.shrinking_failures.len()
    );
    let missing = audit.doubles.iter().filter(|d| d.is_none()).count();
    println!(
        "doubling: {} ({missing} members without doubles)",
        if audit.doubling_ok { "ok" } else { "failed" }
    );
    println!(
        "growth: {} ({} stalled chains, longest pass {})",
        if audit.growth_ok { "ok" } else { "failed" },
        audit.growth_failures.len(),
        audit.growth_max_iterations
    );
    match audit.weak_diff_ok {
        None => println!("weak-differentiation: skipped (no probe)"),
        Some(ok) => println!(
            "weak-differentiation: {} ({} cells exceed their best small mean)",
            if ok { "ok" } else { "failed" },
            audit.weak_diff_failures.len()
        ),
    }
    let overall = match &local {
        None => audit.overall,
        Some(l) => {
            println!("induced-members: {}", l.induced.len());
            println!(
                "engulfing: {} ({} failures{})",
                if l.engulfing_ok { "ok" } else { "failed" },
                l.engulfing_failures,
                if l.degenerate { ", degenerate" } else { "" }
            );
            l.overall
        }
    };
    println!("overall: {}", if overall { "ok" } else { "failed" });

    if overall {
        Ok(())
    } else {
        Err(Failure::Violation(json!({
            "command": "denjoy-audit",
            "violation": "structure-audit-failed",
            "details": {
                "shrinking_ok": audit.shrinking_ok,
                "shrinking_failures": sample_cells(&audit.shrinking_failures, 32),
                "doubling_ok": audit.doubling_ok,
                "members_without_doubles": missing,
                "growth_ok": audit.growth_ok,
                "growth_failures": audit.growth_failures,
                "weak_diff_ok": audit.weak_diff_ok,
                "weak_diff_failures": sample_cells(&audit.weak_diff_failures, 32),
                "weak_diff_failure_count": audit.weak_diff_failures.len(),
                "engulfing_failures": local.map(|l| l.engulfing_failures),
            },
        })))
    }
}

fn cmd_cz(
    model: &std::path::Path,
    function: &str,
    g0: Option<&str>,
    alpha: Option<f64>,
    a: f64,
    b: f64,
) -> CmdResult {
    let m = Model::from_path(model)?;
    let params = DenjoyParams::new(a, b)?;
    let consts = denjoy::jn_constants(&params);
    let alpha = alpha.unwrap_or(consts.big_k * std::f64::consts::E);
    let g0 = match g0 {
        Some(id) => gen_index(&m, id)?,
        None => {
            let measures = m.family.measures(&m.space);
            (0..m.family.len())
                .max_by(|&x, &y| measures[x].total_cmp(&measures[y]).then(y.cmp(&x)))
                .ok_or_else(|| Failure::Usage("model has no generators".into()))?
        }
    };

    let f = m.function(function)?;
    let bmo = measure::bmo_seminorm(f, &m.family, 1.0, &m.space)?.value;
    if bmo == 0.0 {
        return Err(Failure::Usage(
            "function has zero seminorm, nothing to decompose".into(),
        ));
    }
    let fnorm = f.scaled(1.0 / bmo)?;
    let r = denjoy::cz_decompose(&fnorm, g0, &m.family, &params, alpha, &m.space)?;

    println!("base: {} (normalized by seminorm {})", m.family.id(g0), sig17(bmo));
    println!("alpha: {}", sig17(alpha));
    println!("constants: k = {}, K = {}", sig17(r.k), sig17(r.big_k));
    println!("picks: {}", r.selected.len());
    for pair in &r.selected {
        println!("  {} -> double {}", m.family.id(pair.picked), m.family.id(pair.double));
    }
    println!(
        "good-set height: {} <= {} ({})",
        sig17(r.max_dev_good),
        sig17(r.k * alpha),
        if r.bound_height_ok { "ok" } else { "violated" }
    );
    println!(
        "double means: {} <= {} ({})",
        sig17(r.max_double_mean_dev),
        sig17(r.k * alpha),
        if r.bound_means_ok { "ok" } else { "violated" }
    );
    println!(
        "double mass: {} <= {} ({})",
        sig17(r.double_measure_sum),
        sig17(r.big_k / alpha * m.space.measure(m.family.member(g0))),
        if r.bound_measure_ok { "ok" } else { "violated" }
    );

    if r.all_bounds_ok() {
        Ok(())
    } else {
        Err(Failure::Violation(json!({
            "command": "cz",
            "violation": "covering-bounds-broken",
            "details": {
                "alpha": alpha,
                "k": r.k,
                "big_k": r.big_k,
                "bound_height_ok": r.bound_height_ok,
                "bound_means_ok": r.bound_means_ok,
                "bound_measure_ok": r.bound_measure_ok,
                "margin_height": r.margin_height,
                "margin_means": r.margin_means,
                "margin_measure": r.margin_measure,
            },
        })))
    }
}

fn cmd_jn(
    model: &std::path::Path,
    function: &str,
    a: f64,
    b: f64,
    csv: Option<&std::path::Path>,
) -> CmdResult {
    let m = Model::from_path(model)?;
    let params = DenjoyParams::new(a, b)?;
    let consts = denjoy::jn_constants(&params);
    let f = m.function(function)?;
    let r = denjoy::jn_verify(f, &m.family, &params, &m.space)?;

    println!("c1: {}", sig17(r.c1));
    println!("c2: {}", sig17(r.c2));
    println!("seminorm: {}", sig17(r.seminorm));
    println!(
        "envelope: {} (worst margin {} at generator {} t {})",
        if r.ok { "ok" } else { "violated" },
        sig17(r.worst_margin),
        m.family.id(r.worst_gen),
        sig17(r.worst_t)
    );

    if let Some(path) = csv {
        let mut doc = String::from("gen_id,t,mu_f,envelope,margin\n");
        for g in 0..m.family.len() {
            let dist = measure::distribution(f, m.family.member(g), &m.space)?;
            let pts = dist.points();
            for k in 0..pts.len() {
                let t = pts[k].0;
                // Left limits: the checked value of each constant piece.
                let mu = if k == 0 {
                    if t == 0.0 {
                        continue;
                    }
                    1.0
                } else {
                    pts[k - 1].1
                };
                let envelope = consts.c1 * (-consts.c2 * t / r.seminorm).exp();
                let _ = writeln!(
                    doc,
                    "{},{},{},{},{}",
                    m.family.id(g),
                    sig17(t),
                    sig17(mu),
                    sig17(envelope),
                    sig17(envelope - mu)
                );
            }
        }
        write_text(path, &doc)?;
    }

    if r.ok {
        Ok(())
    } else {
        Err(Failure::Violation(json!({
            "command": "jn",
            "violation": "decay-envelope-broken",
            "details": {
                "c1": r.c1,
                "c2": r.c2,
                "seminorm": r.seminorm,
                "worst_margin": r.worst_margin,
                "worst_gen": m.family.id(r.worst_gen),
                "worst_t": r.worst_t,
            },
        })))
    }
}

fn cmd_fine_cover(
    model: &std::path::Path,
    eps: Option<f64>,
    target: Option<&str>,
) -> CmdResult {
    let m = Model::from_path(model)?;
    let target_set = match target {
        Some(id) => m.family.member(gen_index(&m, id)?).clone(),
        None => m.space.full_set(),
    };
    let eps = eps.unwrap_or(f64::INFINITY);
    let r = denjoy::fine_cover_check(&m.family, eps, &target_set, &m.space)?;

    println!("eps: {}", sig17(eps));
    println!("target-cells: {}", target_set.len());
    println!("small-members-used: {}", r.used.len());
    println!("covered: {}", r.covered);
    println!("uncovered-mass: {}", sig17(r.uncovered_mass));

    if r.covered {
        Ok(())
    } else {
        Err(Failure::Violation(json!({
            "command": "fine-cover",
            "violation": "target-not-covered",
            "details": {
                "eps": eps,
                "uncovered_mass": r.uncovered_mass,
                "uncovered_cells": sample_cells(&r.uncovered, 32),
                "used_members": r.used.len(),
            },
        })))
    }
}

fn cmd_suite(seed: u64, only: Option<u32>, out: Option<&std::path::Path>, tamper_k: f64) -> CmdResult {
    let ids: Vec<u32> = match only {
        Some(id) => vec![id],
        None => (1..=suite::CRITERIA).collect(),
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let r = suite::run_tampered(id, seed, tamper_k)?;
        eprintln!(
            "criterion {:2} {:<20} {} margin {}",
            r.id,
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            sig17(r.margin)
        );
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let report = json!({
        "seed": seed,
        "tamper_k": tamper_k,
        "pass": pass,
        "criteria": reports,
    });
    let doc = format!("{}\n", serde_json::to_string_pretty(&report).expect("plain data"));
    if let Some(path) = out {
        write_text(path, &doc)?;
    }
    if pass {
        if out.is_none() {
            print!("{doc}");
        }
        Ok(())
    } else {
        Err(Failure::Violation(report))
    }
}
