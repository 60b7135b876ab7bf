//! Command-line front end: shear tables, reconstructions, Douady-Earle
//! extensions, Beltrami fields, the counter-example experiment, and the
//! sampled distortion metrics, all driven by a JSON config with flag
//! overrides. Outputs are CSV with a '#'-prefixed JSON header carrying the
//! resolved configuration; identical configurations produce byte-identical
//! files.

mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use num_complex::Complex64;
use rayon::prelude::*;
use shears::boundary::{normalize_fix_three, to_halfplane, BoundaryMap, Model};
use shears::douady_earle::{
    beltrami_at, counterexample_experiment, extend_with_rule, lemma3_check, QuadratureRule,
};
use shears::farey::{FareyVertex, Tesselation};
use shears::geom::Point;
use shears::metrics::{
    d_ac_estimate, d_am_estimate, d_c_estimate, d_m_estimate, DegeneratingSampler, UnitCrSampler,
};
use shears::shear::{characteristic_map, d_as, shear_function, shear_norm, ShearFunction};
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "shears",
    about = "Shear coordinates, Douady-Earle extensions, and distortion metrics of circle homeomorphisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file (flags override its fields).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tesselation depth.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Fan-window radius cap.
    #[arg(long, global = true)]
    kmax: Option<u32>,
    /// Sampler seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid scans (0 = serial, the default).
    #[arg(long, global = true)]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Farey edge listing "p/q r/s g" up to the given depth.
    Farey,
    /// Shear table and norm of a boundary map.
    Shear,
    /// Characteristic-map vertex table from a shear CSV.
    Reconstruct,
    /// Douady-Earle extension values at the configured points.
    Extend,
    /// |mu| of the extension on a polar grid.
    Beltrami,
    /// The counter-example experiment table.
    Counterexample,
    /// Sampled d_C / d_M estimates (and d_AC / d_AM curves when scales are set).
    Metrics,
    /// Finite-depth asymptotic-shear-distance curve between two maps.
    Das,
    /// Five-quadruple distortion control with a dilatation sup near the origin.
    Lemma3,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn numeric_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(config_err)?
        }
        None => RunConfig::default(),
    };
    // flag overrides
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.depth.is_some() {
        cfg.depth = cli.depth;
    }
    if cli.kmax.is_some() {
        cfg.kmax = cli.kmax;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.parallel.is_some() {
        cfg.parallel = cli.parallel;
    }
    cfg.validate().map_err(CliError::Config)?;

    let workers = cfg.parallel.unwrap_or(0);
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(config_err)?;
    }

    match cli.command {
        Command::Farey => cmd_farey(&cfg),
        Command::Shear => cmd_shear(&cfg),
        Command::Reconstruct => cmd_reconstruct(&cfg),
        Command::Extend => cmd_extend(&cfg),
        Command::Beltrami => cmd_beltrami(&cfg),
        Command::Counterexample => cmd_counterexample(&cfg),
        Command::Metrics => cmd_metrics(&cfg),
        Command::Das => cmd_das(&cfg),
        Command::Lemma3 => cmd_lemma3(&cfg),
    }
}

/// Writes the fully assembled output in one shot so failures leave no
/// partial files.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn header(cfg: &RunConfig, command: &str) -> String {
    let resolved = serde_json::json!({ "command": command, "config": cfg });
    format!("# {}\n", serde_json::to_string(&resolved).expect("config serializes"))
}

fn fmt_point(p: &Point) -> String {
    match p {
        Point::Infinity => "inf".to_string(),
        Point::Finite(z) => format!("{}", z.re),
    }
}

/// The primary map, conjugated to the half-plane if needed and normalized to
/// fix 0, 1, ∞ — the form shear computations expect.
fn normalized_line_map(cfg: &RunConfig, which: u8) -> Result<BoundaryMap, CliError> {
    let desc = match which {
        1 => cfg.map.as_ref().ok_or(CliError::Config("missing \"map\"".into()))?,
        _ => cfg
            .map2
            .as_ref()
            .ok_or(CliError::Config("missing \"map2\"".into()))?,
    };
    let built = desc.build().map_err(config_err)?;
    let line = match built.model() {
        Model::Line => built,
        Model::Circle => to_halfplane(&built).map_err(config_err)?,
    };
    normalize_fix_three(
        &line,
        &[Point::real(0.0), Point::real(1.0), Point::Infinity],
    )
    .map_err(numeric_err)
}

fn circle_map(cfg: &RunConfig, which: u8) -> Result<BoundaryMap, CliError> {
    let desc = match which {
        1 => cfg.map.as_ref().ok_or(CliError::Config("missing \"map\"".into()))?,
        _ => cfg
            .map2
            .as_ref()
            .ok_or(CliError::Config("missing \"map2\"".into()))?,
    };
    let built = desc.build().map_err(config_err)?;
    if built.model() != Model::Circle {
        return Err(CliError::Config(
            "this command needs a circle-model map".into(),
        ));
    }
    Ok(built)
}

fn cmd_farey(cfg: &RunConfig) -> Result<(), CliError> {
    let depth = cfg.depth.unwrap_or(3);
    let tess = Tesselation::enumerate(depth).map_err(config_err)?;
    let mut buf = Vec::new();
    tess.write_edge_listing(&mut buf).map_err(config_err)?;
    emit(&cfg.out, &String::from_utf8(buf).expect("ascii listing"))
}

fn build_shear_table(cfg: &RunConfig, which: u8) -> Result<ShearFunction, CliError> {
    let depth = cfg.depth.unwrap_or(6);
    let tess = Arc::new(Tesselation::enumerate(depth).map_err(config_err)?);
    let h = normalized_line_map(cfg, which)?;
    shear_function(&h, tess).map_err(numeric_err)
}

fn cmd_shear(cfg: &RunConfig) -> Result<(), CliError> {
    let kmax = cfg.kmax.unwrap_or(6);
    let s = build_shear_table(cfg, 1)?;
    let norm = shear_norm(&s, kmax);
    let mut out = header(cfg, "shear");
    out.push_str("v1,v2,generation,shear\n");
    for (v1, v2, g, val) in s.rows() {
        out.push_str(&format!("{v1},{v2},{g},{val}\n"));
    }
    emit(&cfg.out, &out)?;
    println!("{}", serde_json::json!({ "shear_norm": norm, "kmax": kmax }));
    Ok(())
}

fn parse_shear_csv(text: &str) -> Result<Vec<(FareyVertex, FareyVertex, f64)>, CliError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("v1,") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(CliError::Config(format!("malformed shear row: {line}")));
        }
        let vertex = |s: &str| -> Result<FareyVertex, CliError> {
            let (n, d) = s
                .split_once('/')
                .ok_or_else(|| CliError::Config(format!("malformed vertex: {s}")))?;
            let n: i64 = n.trim().parse().map_err(config_err)?;
            let d: i64 = d.trim().parse().map_err(config_err)?;
            if n == 0 && d == 0 {
                return Err(CliError::Config("vertex 0/0".into()));
            }
            Ok(FareyVertex::new(n, d))
        };
        let v1 = vertex(parts[0])?;
        let v2 = vertex(parts[1])?;
        let value: f64 = parts[3].trim().parse().map_err(config_err)?;
        rows.push((v1, v2, value));
    }
    if rows.is_empty() {
        return Err(CliError::Config("shear CSV contains no rows".into()));
    }
    Ok(rows)
}

fn cmd_reconstruct(cfg: &RunConfig) -> Result<(), CliError> {
    let input = cfg
        .shear_input
        .as_ref()
        .ok_or(CliError::Config("missing \"shear_input\"".into()))?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?;
    let rows = parse_shear_csv(&text)?;
    let depth = cfg.depth.unwrap_or(6);
    let tess = Arc::new(Tesselation::enumerate(depth).map_err(config_err)?);
    let s = ShearFunction::from_rows(tess, &rows).map_err(numeric_err)?;
    let cm = characteristic_map(&s).map_err(numeric_err)?;
    let mut out = header(cfg, "reconstruct");
    out.push_str("vertex,image\n");
    for (v, img) in cm.rows() {
        out.push_str(&format!("{v},{}\n", fmt_point(&img)));
    }
    emit(&cfg.out, &out)
}

fn cmd_extend(cfg: &RunConfig) -> Result<(), CliError> {
    let h = circle_map(cfg, 1)?;
    let points = cfg
        .points
        .as_ref()
        .ok_or(CliError::Config("missing \"points\"".into()))?;
    let tol = cfg.extend_tol.unwrap_or(1e-11);
    let rule = QuadratureRule::for_map(&h).map_err(numeric_err)?;
    let results: Vec<Result<Complex64, CliError>> = if cfg.parallel.unwrap_or(0) > 0 {
        points
            .par_iter()
            .map(|p| {
                extend_with_rule(&h, Complex64::new(p[0], p[1]), tol, &rule).map_err(numeric_err)
            })
            .collect()
    } else {
        points
            .iter()
            .map(|p| {
                extend_with_rule(&h, Complex64::new(p[0], p[1]), tol, &rule).map_err(numeric_err)
            })
            .collect()
    };
    let mut out = header(cfg, "extend");
    out.push_str("x,y,wx,wy\n");
    for (p, r) in points.iter().zip(results) {
        let w = r?;
        out.push_str(&format!("{},{},{},{}\n", p[0], p[1], w.re, w.im));
    }
    emit(&cfg.out, &out)
}

fn polar_grid(cfg: &RunConfig, max_radius: f64) -> Vec<Complex64> {
    let radii = cfg
        .grid_radii
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.3, 0.6, 0.9]);
    let angles = cfg.grid_angles.unwrap_or(8);
    let mut grid = Vec::new();
    for &r in &radii {
        let r = r.min(max_radius);
        if r == 0.0 {
            grid.push(Complex64::new(0.0, 0.0));
            continue;
        }
        for j in 0..angles {
            grid.push(Complex64::from_polar(r, TAU * j as f64 / angles as f64));
        }
    }
    grid
}

fn cmd_beltrami(cfg: &RunConfig) -> Result<(), CliError> {
    let h = circle_map(cfg, 1)?;
    let grid = polar_grid(cfg, 0.999);
    let results: Vec<Result<f64, CliError>> = if cfg.parallel.unwrap_or(0) > 0 {
        grid.par_iter()
            .map(|&z| beltrami_at(&h, z).map(|s| s.mu_abs()).map_err(numeric_err))
            .collect()
    } else {
        grid.iter()
            .map(|&z| beltrami_at(&h, z).map(|s| s.mu_abs()).map_err(numeric_err))
            .collect()
    };
    let mut out = header(cfg, "beltrami");
    out.push_str("x,y,mu_abs\n");
    for (z, r) in grid.iter().zip(results) {
        let mu = r?;
        out.push_str(&format!("{},{},{}\n", z.re, z.im, mu));
    }
    emit(&cfg.out, &out)
}

fn cmd_counterexample(cfg: &RunConfig) -> Result<(), CliError> {
    let ns = cfg
        .n_list
        .clone()
        .unwrap_or_else(|| vec![2, 4, 8, 16, 32, 64, 128, 256]);
    let rows = counterexample_experiment(&ns).map_err(numeric_err)?;
    let mut out = header(cfg, "counterexample");
    out.push_str("n,c1_re,c1_im,cm1_re,cm1_im,dm1_re,dm1_im,mu_abs,K0,h_tilde_minus1\n");
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.c1.re,
            r.c1.im,
            r.c_minus1.re,
            r.c_minus1.im,
            r.d_minus1.re,
            r.d_minus1.im,
            r.mu_abs,
            r.dilatation_at_origin,
            r.h_tilde_minus_one
        ));
    }
    emit(&cfg.out, &out)?;

    // acceptance-style pass/fail summary on stdout
    let target = 2.0 / std::f64::consts::PI;
    let c_bound = 2.2;
    let asymptotics = rows.iter().all(|r| {
        let n = r.n as f64;
        (r.c1.re - target).abs() <= c_bound / n
            && (r.c_minus1.re - target).abs() <= c_bound / n
            && (r.d_minus1.re - 1.0).abs() <= c_bound / n
    });
    let monotone = rows.windows(2).all(|w| w[1].mu_abs > w[0].mu_abs);
    let fixed = rows.iter().all(|r| r.h_tilde_minus_one == -1.0);
    println!(
        "asymptotics O(1/n) with C={c_bound}: {}",
        if asymptotics { "PASS" } else { "FAIL" }
    );
    println!("mu_abs strictly increasing: {}", if monotone { "PASS" } else { "FAIL" });
    println!("h_tilde(-1) = -1 exactly: {}", if fixed { "PASS" } else { "FAIL" });
    Ok(())
}

fn cmd_metrics(cfg: &RunConfig) -> Result<(), CliError> {
    let h1 = circle_map(cfg, 1)?;
    let h2 = circle_map(cfg, 2)?;
    let count = cfg.sample_count.unwrap_or(200);
    let seed = cfg.seed.unwrap_or(7);
    let sampler = UnitCrSampler::new(count, seed);
    let dc = d_c_estimate(&h1, &h2, &sampler).map_err(numeric_err)?;
    let dm = d_m_estimate(&h1, &h2, &sampler).map_err(numeric_err)?;
    let mut out = header(cfg, "metrics");
    out.push_str("metric,scale,estimate\n");
    out.push_str(&format!("d_C,,{dc}\n"));
    out.push_str(&format!("d_M,,{dm}\n"));
    if let Some(scales) = &cfg.scales {
        let per_scale = cfg.per_scale.unwrap_or(50);
        let dsampler = DegeneratingSampler::new(scales.clone(), per_scale, seed);
        for (scale, v) in d_ac_estimate(&h1, &h2, &dsampler).map_err(numeric_err)? {
            out.push_str(&format!("d_AC,{scale},{v}\n"));
        }
        for (scale, v) in d_am_estimate(&h1, &h2, &dsampler).map_err(numeric_err)? {
            out.push_str(&format!("d_AM,{scale},{v}\n"));
        }
    }
    emit(&cfg.out, &out)?;
    // reproducibility sidecar
    if let Some(path) = &cfg.out {
        let sidecar = path.with_extension("meta.json");
        let meta = serde_json::json!({
            "seed": seed,
            "count": count,
            "scales": cfg.scales,
            "per_scale": cfg.per_scale,
        });
        std::fs::write(&sidecar, format!("{}\n", serde_json::to_string_pretty(&meta).unwrap()))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", sidecar.display())))?;
    }
    Ok(())
}

fn cmd_das(cfg: &RunConfig) -> Result<(), CliError> {
    let depth = cfg.depth.unwrap_or(6);
    let s1 = build_shear_table(cfg, 1)?;
    let s2 = build_shear_table(cfg, 2)?;
    let thresholds = cfg
        .thresholds
        .clone()
        .unwrap_or_else(|| (0..depth.saturating_sub(1)).collect());
    let curve = d_as(&s1, &s2, &thresholds).map_err(numeric_err)?;
    let mut out = header(cfg, "das");
    out.push_str("G,estimate\n");
    for (g, v) in curve {
        out.push_str(&format!("{g},{v}\n"));
    }
    emit(&cfg.out, &out)
}

fn cmd_lemma3(cfg: &RunConfig) -> Result<(), CliError> {
    let h = circle_map(cfg, 1)?;
    let bound = cfg.lemma3_bound.unwrap_or(10.0);
    let mut grid = polar_grid(cfg, 0.45);
    grid.retain(|z| z.norm() < 0.5);
    let report = lemma3_check(&h, bound, &grid).map_err(numeric_err)?;
    let mut out = header(cfg, "lemma3");
    out.push_str("quantity,value\n");
    for (j, d) in report.distortions.iter().enumerate() {
        out.push_str(&format!("distortion_Q{j},{d}\n"));
    }
    out.push_str(&format!("bound,{}\n", report.bound));
    out.push_str(&format!(
        "within_bound,{}\n",
        if report.within_bound { 1 } else { 0 }
    ));
    out.push_str(&format!("max_dilatation,{}\n", report.max_dilatation_on_grid));
    emit(&cfg.out, &out)
}
