use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use nodal_core::graph::export::{export_graph, GraphFormat};
use nodal_core::graph::render::render_svg;
use nodal_core::graph::{build_graph, graph_summary};
use nodal_core::modes::{modes_in_range, spectral_count, weyl_index};
use nodal_core::oracle::stable_count;
use nodal_core::stats::{nodal_sequence, window_distribution, write_histogram_csv};
use nodal_core::trace::{
    trace_analysis, write_curve_csv, write_peaks_csv, write_spectrum_csv, CurveKind, TraceConfig,
};
use nodal_core::{nodal_count, reduce, ModePair, NodalSummary};

use crate::error::{CliError, Result};
use crate::manifest::{check_outputs, read_manifest, sibling, Outputs};
use crate::{
    Cli, Command, CountArgs, CountMethod, DistributionArgs, GraphArgs, GraphFormatArg, ModeOutArgs,
    ReplayArgs, TraceArgs, TraceKind, VerifyArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Count(a) => count(&a),
        Command::Verify(a) => verify(&a),
        Command::Distribution(a) => distribution(&a),
        Command::Trace(a) => trace(&a),
        Command::Render(a) => render(&a),
        Command::Graph(a) => graph(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn parameters<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialise")
}

/// Prints to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! say_raw {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! strings {
    ($($item:expr),* $(,)?) => {
        vec![$($item.to_string()),*]
    };
}

#[derive(Debug, Serialize)]
struct CountReport {
    m: u64,
    n: u64,
    lambda: u64,
    reduced: (u64, u64),
    tiles: u64,
    results: Vec<MethodResult>,
    agree: bool,
}

#[derive(Debug, Serialize)]
struct MethodResult {
    method: &'static str,
    nu: u64,
    eta: Option<u64>,
    loops: Option<u64>,
}

impl MethodResult {
    fn exact(method: &'static str, s: &NodalSummary) -> Self {
        MethodResult {
            method,
            nu: s.nu,
            eta: Some(s.eta),
            loops: Some(s.loops),
        }
    }
}

fn count(a: &CountArgs) -> Result<()> {
    let mode = ModePair::new(a.m, a.n).map_err(|e| CliError::Usage(e.to_string()))?;
    let red = reduce(mode);
    let mut results = Vec::new();
    if matches!(a.method, CountMethod::Recursion | CountMethod::Both) {
        results.push(MethodResult::exact("recursion", &nodal_count(mode)?));
    }
    if matches!(a.method, CountMethod::Graph | CountMethod::Both) {
        results.push(MethodResult::exact("graph", &graph_summary(mode)?));
    }
    if a.method == CountMethod::Oracle {
        results.push(MethodResult {
            method: "oracle",
            nu: stable_count(mode)?,
            eta: None,
            loops: None,
        });
    }
    let agree = results
        .windows(2)
        .all(|w| (w[0].nu, w[0].eta, w[0].loops) == (w[1].nu, w[1].eta, w[1].loops));
    let report = CountReport {
        m: mode.m(),
        n: mode.n(),
        lambda: mode.lambda(),
        reduced: (red.reduced.m(), red.reduced.n()),
        tiles: red.tiles,
        results,
        agree,
    };
    if a.json {
        say!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serialises")
        );
    } else {
        say_raw!("{}", format_count(&report));
    }
    if agree {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "methods disagree on {mode}"
        )))
    }
}

fn format_count(r: &CountReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode ({}, {})  lambda={}", r.m, r.n, r.lambda);
    let _ = writeln!(
        s,
        "reduced ({}, {})  tiles={}",
        r.reduced.0, r.reduced.1, r.tiles
    );
    for res in &r.results {
        let _ = write!(s, "{:<10} nu={}", res.method, res.nu);
        if let (Some(eta), Some(loops)) = (res.eta, res.loops) {
            let _ = write!(s, " eta={eta} loops={loops}");
        }
        s.push('\n');
    }
    if r.results.len() > 1 {
        s.push_str(if r.agree {
            "agreement\n"
        } else {
            "DISAGREEMENT\n"
        });
    }
    s
}

struct VerifyRow {
    mode: ModePair,
    tiles: u64,
    recursion: NodalSummary,
    graph: NodalSummary,
    oracle: Option<u64>,
}

impl VerifyRow {
    fn agrees(&self) -> bool {
        let (r, g) = (&self.recursion, &self.graph);
        (r.nu, r.eta, r.loops) == (g.nu, g.eta, g.loops) && self.oracle.is_none_or(|o| o == r.nu)
    }
}

const VERIFY_HEADER: &str = "m,n,lambda,tiles,nu_recursion,nu_graph,eta_recursion,eta_graph,\
loops_recursion,loops_graph,nu_oracle,agree\n";

fn verify(a: &VerifyArgs) -> Result<()> {
    if a.max_lambda < 5 {
        say!("empty sweep: no modes with lambda <= {}", a.max_lambda);
        if let Some(out) = &a.out {
            let mut files = Outputs::new(out);
            files.add(out.clone(), VERIFY_HEADER.as_bytes().to_vec());
            files.finish("verify", parameters(a), verify_args(a))?;
        }
        return Ok(());
    }
    let oracle_bound = a.oracle_bound.unwrap_or(0);
    let modes = modes_in_range(5, a.max_lambda);
    let rows: Vec<VerifyRow> = modes
        .par_iter()
        .map(|&mode| {
            let oracle = if mode.lambda() <= oracle_bound {
                Some(stable_count(mode)?)
            } else {
                None
            };
            Ok(VerifyRow {
                mode,
                tiles: reduce(mode).tiles,
                recursion: nodal_count(mode)?,
                graph: graph_summary(mode)?,
                oracle,
            })
        })
        .collect::<nodal_core::Result<_>>()?;
    let bad: Vec<&VerifyRow> = rows.iter().filter(|r| !r.agrees()).collect();
    let tiling = rows.iter().filter(|r| r.tiles > 1).count();
    let oracled = rows.iter().filter(|r| r.oracle.is_some()).count();
    say!(
        "{} modes with lambda <= {} ({} tiling), {} also checked on the grid oracle",
        rows.len(),
        a.max_lambda,
        tiling,
        oracled
    );
    say!("{} mismatches", bad.len());
    for r in bad.iter().take(10) {
        eprintln!(
            "mismatch {}: recursion {:?} graph {:?} oracle {:?}",
            r.mode,
            (r.recursion.nu, r.recursion.eta, r.recursion.loops),
            (r.graph.nu, r.graph.eta, r.graph.loops),
            r.oracle
        );
    }
    if let Some(out) = &a.out {
        let mut csv = String::from(VERIFY_HEADER);
        for r in &rows {
            let (rc, g) = (&r.recursion, &r.graph);
            let oracle = r.oracle.map(|o| o.to_string()).unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.mode.m(),
                r.mode.n(),
                r.mode.lambda(),
                r.tiles,
                rc.nu,
                g.nu,
                rc.eta,
                g.eta,
                rc.loops,
                g.loops,
                oracle,
                r.agrees()
            );
        }
        let mut files = Outputs::new(out);
        files.add(out.clone(), csv.into_bytes());
        files.finish("verify", parameters(a), verify_args(a))?;
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} mismatches", bad.len())))
    }
}

fn verify_args(a: &VerifyArgs) -> Vec<String> {
    let mut v = strings!["verify", "--max-lambda", a.max_lambda];
    if let Some(b) = a.oracle_bound {
        v.extend(strings!["--oracle-bound", b]);
    }
    v
}

fn distribution(a: &DistributionArgs) -> Result<()> {
    let h = window_distribution(a.lambda, a.g, a.bins)?;
    let mut csv = Vec::new();
    write_histogram_csv(&h, &mut csv)?;
    let mut files = Outputs::new(&a.out);
    files.add(a.out.clone(), csv);
    let manifest = files.finish(
        "distribution",
        parameters(a),
        strings![
            "distribution",
            "--lambda",
            a.lambda,
            "--g",
            a.g,
            "--bins",
            a.bins
        ],
    )?;
    say!(
        "{} eigenfunctions with lambda in [{}, {}], {} bins, {} interior maxima above 1%",
        h.total,
        h.lambda_low,
        h.lambda_high,
        h.bins(),
        h.interior_maxima(0.01).len()
    );
    say!("wrote {} and {}", a.out.display(), manifest.display());
    Ok(())
}

fn curve_kind(k: TraceKind) -> CurveKind {
    match k {
        TraceKind::Loops => CurveKind::Loops,
        TraceKind::LoopsByIndex => CurveKind::LoopsByIndex,
        TraceKind::Eta => CurveKind::BoundaryEta,
    }
}

/// Smallest eigenvalue cutoff whose rows cover the end of the grid.
fn cutoff_for(kind: CurveKind, end: f64) -> u64 {
    let k_cut = (end * end).ceil() as u64;
    if kind != CurveKind::LoopsByIndex {
        return k_cut.max(5);
    }
    let needed = weyl_index(end).floor() as u64;
    let mut cut = k_cut.max(5);
    while spectral_count(cut) < needed {
        cut += cut / 64 + 1;
    }
    cut
}

fn trace(a: &TraceArgs) -> Result<()> {
    let kind = curve_kind(a.kind);
    let start = a.kmin.unwrap_or(a.kmax / 4.0);
    if !(a.kmax > start) || !(start >= 0.0) {
        return Err(CliError::Usage(format!(
            "empty range [{start}, {}]",
            a.kmax
        )));
    }
    let mut config = TraceConfig::for_kind(kind);
    config.step = a.step;
    config.length_max = a.length_max;
    if let Some(d) = a.degree {
        config.degree = d;
    }
    let max_lambda = cutoff_for(kind, a.kmax);
    let seq = nodal_sequence(max_lambda)?;
    let report = trace_analysis(kind, &seq.rows, max_lambda, start, a.kmax, &config)?;

    let mut files = Outputs::new(&a.out);
    let mut curve = Vec::new();
    write_curve_csv(&report.curve, Some(&report.fit), &mut curve)?;
    let mut spectrum = Vec::new();
    write_spectrum_csv(&report.spectrum, &mut spectrum)?;
    let mut peaks = Vec::new();
    write_peaks_csv(&report.spectrum.peaks, &mut peaks)?;
    files.add(a.out.clone(), curve);
    files.add(sibling(&a.out, "spectrum"), spectrum);
    files.add(sibling(&a.out, "peaks"), peaks);
    let kind_name = a
        .kind
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let mut args = strings!["trace", "--kind", kind_name, "--kmin", start, "--kmax", a.kmax];
    args.extend(strings!["--step", a.step, "--degree", config.degree]);
    args.extend(strings!["--length-max", a.length_max]);
    let mut params = parameters(a);
    params["kmin"] = serde_json::json!(start);
    params["degree"] = serde_json::json!(config.degree);
    let manifest = files.finish("trace", params, args)?;

    say!(
        "{} grid points on [{start}, {}], smooth part degree {}, log-log slope {:.4}",
        report.curve.values.len(),
        report.curve.end(),
        report.fit.degree,
        report.slope
    );
    for p in report.spectrum.peaks.iter().take(5) {
        let orbit = p
            .orbit
            .map(|o| format!("{} at {:.4}", o.class.name(), o.length))
            .unwrap_or_else(|| "unmatched".into());
        say!("peak l={:.3} power={:.4e} {orbit}", p.length, p.power);
    }
    say!(
        "wrote {} (+ spectrum, peaks) and {}",
        a.out.display(),
        manifest.display()
    );
    Ok(())
}

fn parse_mode(m: u64, n: u64) -> Result<ModePair> {
    ModePair::new(m, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn render(a: &ModeOutArgs) -> Result<()> {
    let mode = parse_mode(a.m, a.n)?;
    let svg = render_svg(mode)?;
    let mut files = Outputs::new(&a.out);
    files.add(a.out.clone(), svg);
    let manifest = files.finish("render", parameters(a), strings!["render", a.m, a.n])?;
    let red = reduce(mode);
    say!(
        "{mode}: {} tile(s) of {}; wrote {} and {}",
        red.tiles,
        red.reduced,
        a.out.display(),
        manifest.display()
    );
    Ok(())
}

fn graph(a: &GraphArgs) -> Result<()> {
    let mode = parse_mode(a.m, a.n)?;
    let red = reduce(mode);
    if red.tiles > 1 {
        eprintln!(
            "{mode} tiles; exporting the pattern of {} ({} copies)",
            red.reduced, red.tiles
        );
    }
    let g = build_graph(red.reduced)?;
    let format = match a.format {
        GraphFormatArg::Dot => GraphFormat::Dot,
        GraphFormatArg::Json => GraphFormat::Json,
    };
    let bytes = export_graph(&g, format)?;
    let mut files = Outputs::new(&a.out);
    files.add(a.out.clone(), bytes);
    let format_name = a
        .format
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_string();
    let args = strings!["graph", a.m, a.n, "--format", format_name];
    let manifest = files.finish("graph", parameters(a), args)?;
    say!(
        "{} vertices, {} edges; wrote {} and {}",
        g.node_count(),
        g.edges.len(),
        a.out.display(),
        manifest.display()
    );
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let recorded = read_manifest(&a.manifest)?;
    let primary = recorded
        .outputs
        .first()
        .ok_or_else(|| CliError::Usage("manifest lists no outputs".into()))?;
    let dir: PathBuf = match &a.into {
        Some(d) => d.clone(),
        None => a
            .manifest
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf(),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let out = dir.join(&primary.path);
    let mut argv = vec!["nodal".to_string()];
    argv.extend(recorded.args.iter().cloned());
    argv.extend(["--out".to_string(), out.to_string_lossy().into_owned()]);
    let cli = Cli::try_parse_from(&argv)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a manifest cannot record a replay".into()));
    }
    run(cli.command)?;
    check_outputs(&recorded, &dir)?;
    say!(
        "{} output(s) reproduced byte for byte",
        recorded.outputs.len()
    );
    Ok(())
}
