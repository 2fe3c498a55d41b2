mod figure;
mod record;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heisgeo::estimator::{
    box_dimension, dct_bounds, grid_pi_distance, interior_crossing_cost, DimInput, Gauge, GridSpec, GridSteps,
};
use heisgeo::group::{koranyi_dist, mul};
use heisgeo::metrics::{cc_dist, DEFAULT_TOL};
use heisgeo::obstacles::{assemble_a, build_maze, maze_level_union, Box3, MazeLayout, MazeTree, ObstacleSet};
use heisgeo::paths::{as_polyline, bang_bang_with_params, cc_length, pi_t_length};
use heisgeo::planner::{plan, PlanConfig};
use heisgeo::{Error, HPoint};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use figure::Figure;
use record::{object, to_json, ErrorBody, ErrorRecord, RunRecord, SCHEMA};

/// Experiments on horizontal paths, obstacles and fractal mazes in the
/// Heisenberg group.
#[derive(Debug, Parser)]
#[command(name = "heisgeo", version)]
struct Cli {
    /// Write the planar projection of the produced path or boxes as SVG.
    #[arg(long, global = true, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Write the produced path vertices or boxes as CSV.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bang-bang path between two points, with its length.
    Bb {
        #[arg(long, value_parser = parse_point)]
        p: HPoint,
        #[arg(long, value_parser = parse_point)]
        q: HPoint,
        #[command(flatten)]
        out: RecordOut,
    },
    /// Carnot-Carathéodory and Korányi distances.
    Dist {
        #[arg(long, value_parser = parse_point)]
        p: HPoint,
        #[arg(long, value_parser = parse_point)]
        q: HPoint,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: RecordOut,
    },
    /// Obstacle-avoiding horizontal path.
    Plan {
        #[arg(long, value_parser = parse_point)]
        p: HPoint,
        #[arg(long, value_parser = parse_point)]
        q: HPoint,
        /// Obstacle set JSON with `boxes` and `balls`.
        #[arg(long, value_name = "FILE")]
        obstacles: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Korányi clearance required of every segment.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_tries: u64,
        #[command(flatten)]
        out: RecordOut,
    },
    /// Build or certify a fractal maze.
    #[command(subcommand)]
    Maze(MazeCommand),
    /// Assemble normalized mazes for n = 1..=n_max into one compact set.
    Assemble {
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Where to write the assembled set.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Box-counting dimension of a maze level, box set or point sample.
    Dim {
        /// Maze, obstacle set, or array of `[x, y, t]` points.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = GaugeArg::Euclidean)]
        gauge: GaugeArg,
        /// Comma-separated scales, coarsest first.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_number, value_name = "S1,S2,..")]
        scales: Vec<f64>,
        /// Maze level to measure; the deepest by default.
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        out: RecordOut,
    },
    /// Envelope for the cc-dimension of a set of Euclidean dimension alpha.
    Dct {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        out: RecordOut,
    },
}

#[derive(Debug, Subcommand)]
enum MazeCommand {
    /// Build a maze tree and write it as JSON.
    Build {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[command(flatten)]
        layout: LayoutArgs,
        /// Where to write the maze.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Lattice estimates of the around and interior crossing costs.
    Certify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Planar lattice step; must divide 1.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Vertical lattice step for the interior crossing; defaults to `step`.
        #[arg(long)]
        t_step: Option<f64>,
        /// Maze level used as the obstacle; the deepest by default.
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        out: RecordOut,
    },
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// Use the degenerate layout whose plates do not overlap.
    #[arg(long)]
    zero_overlap: bool,
    #[arg(long)]
    span: Option<f64>,
    #[arg(long)]
    tiers: Option<usize>,
    #[arg(long)]
    thickness: Option<f64>,
}

impl LayoutArgs {
    fn layout(&self) -> MazeLayout {
        let base = if self.zero_overlap { MazeLayout::zero_overlap() } else { MazeLayout::default() };
        MazeLayout {
            span: self.span.unwrap_or(base.span),
            tiers: self.tiers.unwrap_or(base.tiers),
            thickness: self.thickness.unwrap_or(base.thickness),
            ..base
        }
    }
}

#[derive(Debug, Args)]
struct RecordOut {
    /// Write the run record here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GaugeArg {
    Euclidean,
    Koranyi,
}

fn parse_point(s: &str) -> Result<HPoint, String> {
    let v = parse_list(s)?;
    match v[..] {
        [x, y, t] => Ok(HPoint::new(x, y, t)),
        _ => Err(format!("expected x,y,t but got {} coordinate(s)", v.len())),
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

/// Failure of a run, reported as JSON with exit code 1.
#[derive(Debug)]
enum Failure {
    Compute(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl Failure {
    fn body(&self) -> ErrorBody {
        match self {
            Failure::Compute(e) => {
                let detail = match e {
                    Error::NumericFailure { iterations, .. } => Some(json!({ "iterations": iterations })),
                    Error::InvalidLayout { pair: Some(p), .. } => Some(json!({ "pair": p })),
                    Error::PlanningFailure { segment, tries } => Some(json!({ "segment": segment, "tries": tries })),
                    _ => None,
                };
                ErrorBody { kind: e.kind().to_string(), message: e.to_string(), detail }
            }
            Failure::Io(m) => ErrorBody { kind: "io".into(), message: m.clone(), detail: None },
        }
    }
}

struct Outcome {
    results: Value,
    figure: Figure,
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::Compute(Error::InvalidInput(format!("{what}: {e}"))))
}

fn serialize<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    to_json(v).map_err(|e| Failure::Compute(Error::Internal(e.to_string())))
}

fn value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn point(p: HPoint) -> Value {
    json!([p.x, p.y, p.t])
}

fn bb(p: HPoint, q: HPoint) -> Result<Outcome, Failure> {
    let (path, params) = bang_bang_with_params(p, q);
    let w = mul(p.inv(), q);
    let d = cc_dist(p, q, DEFAULT_TOL)?;
    let length = cc_length(&path);
    let waypoints = path.waypoints();
    let results = object(vec![
        ("a", json!(params.a)),
        ("b", json!(params.b)),
        ("c", json!(params.c)),
        ("d", json!(params.d)),
        ("displacements", json!(params.displacements())),
        ("waypoints", Value::Array(waypoints.iter().map(|&v| point(v)).collect())),
        ("cc_length", json!(length)),
        ("pi_t_length", json!(pi_t_length(&as_polyline(&path, 1)))),
        ("cc_dist", json!(d)),
        ("ratio", if d > 0.0 { json!(length / d) } else { Value::Null }),
        ("coordinate_bound", json!(5.0 * (w.x.abs() + w.y.abs() + w.t.abs().sqrt()))),
    ]);
    Ok(Outcome { results, figure: Figure { curves: vec![waypoints], marks: vec![p, q], ..Figure::default() } })
}

fn dist(p: HPoint, q: HPoint, tol: f64) -> Result<Outcome, Failure> {
    let d = cc_dist(p, q, tol)?;
    let results = object(vec![("cc_dist", json!(d)), ("koranyi_dist", json!(koranyi_dist(p, q)))]);
    Ok(Outcome { results, figure: Figure { marks: vec![p, q], ..Figure::default() } })
}

fn run_plan(p: HPoint, q: HPoint, a: &ObstacleSet, cfg: &PlanConfig) -> Result<Outcome, Failure> {
    let res = plan(p, q, a, cfg)?;
    let waypoints = res.path.waypoints();
    let mut results = value(&res);
    if let Value::Object(m) = &mut results {
        m.insert("waypoints".into(), Value::Array(waypoints.iter().map(|&v| point(v)).collect()));
        m.insert("cc_dist".into(), json!(cc_dist(p, q, DEFAULT_TOL)?));
    }
    let figure = Figure { curves: vec![waypoints], boxes: a.boxes.clone(), marks: vec![p, q] };
    Ok(Outcome { results, figure })
}

/// Boxes drawn for a maze: the deepest level up to level 2.
fn maze_figure(m: &MazeTree) -> Result<Vec<Box3>, Failure> {
    Ok(maze_level_union(m, m.levels.min(2))?.boxes)
}

fn maze_build(n: u32, levels: usize, layout: &MazeLayout, out: &Path) -> Result<Outcome, Failure> {
    let m = build_maze(n, levels, layout)?;
    let text = serialize(&m)?;
    write(out, &text)?;
    let diam: Vec<f64> = (0..=levels).filter_map(|j| m.max_diameter(j)).collect();
    let results = object(vec![
        ("file", json!(out.display().to_string())),
        ("sha256", json!(digest(text.as_bytes()))),
        ("n", json!(n)),
        ("levels", json!(levels)),
        ("layout", value(&m.layout)),
        ("overlap", json!(m.layout.overlap())),
        ("gap", json!(m.layout.gap())),
        ("rho", json!(m.layout.rho())),
        ("boxes_per_level", json!(m.nodes.iter().map(Vec::len).collect::<Vec<_>>())),
        ("max_diameter", json!(diam)),
    ]);
    Ok(Outcome { results, figure: Figure { boxes: maze_figure(&m)?, ..Figure::default() } })
}

/// `h` divides `len` up to rounding.
fn divides(h: f64, len: f64) -> bool {
    let r = len / h;
    (r - r.round()).abs() <= 1e-9 * r.max(1.0)
}

fn maze_certify(m: &MazeTree, step: f64, t_step: f64, level: usize) -> Result<Outcome, Failure> {
    m.validate()?;
    if !(step > 0.0 && t_step > 0.0) || !divides(step, 1.0) {
        return Err(Error::InvalidParameter(format!("step {step} must be positive and divide 1")).into());
    }
    if level == 0 || level > m.levels {
        return Err(Error::InvalidParameter(format!("level {level} must lie in 1..={}", m.levels)).into());
    }
    let half = 10.0 * m.n as f64;
    let r = ((half + 1.0) / step).ceil() * step;
    let region = Box3::new([-r, r], [-r, r], [-2.0, 2.0])?;
    let g = GridSpec::new(region, GridSteps::uniform(step));
    let (hp, hm) = (HPoint::new(0.0, 0.0, 1.0), HPoint::new(0.0, 0.0, -1.0));
    let b0 = maze_level_union(m, 0)?;
    let around0 = grid_pi_distance(&b0, hp, hm, &g)?;
    let a = maze_level_union(m, level)?;
    let around = grid_pi_distance(&a, hp, hm, &g)?;
    let interior = interior_crossing_cost(m, level - 1, GridSteps { hx: step, hy: step, ht: t_step })?;
    let gate = 40.0 * m.n as f64;
    let poly = |e: &heisgeo::estimator::PathEstimate| e.polyline.vertices.iter().map(|&v| point(v)).collect();
    let results = object(vec![
        ("n", json!(m.n)),
        ("level", json!(level)),
        ("steps", json!({ "planar": step, "t_interior": t_step })),
        ("b0_cost", json!(around0.cost)),
        ("around_cost", json!(around.cost)),
        ("around_band", json!([20.0 * m.n as f64, 20.0 * m.n as f64 + 4.0 * step])),
        ("interior_cost", json!(interior.cost)),
        ("interior_gate", json!(gate)),
        ("gate_passed", json!(interior.cost >= gate)),
        ("around_polyline", Value::Array(poly(&around))),
        ("interior_polyline", Value::Array(poly(&interior))),
        ("node_counts", json!({ "around": around.node_counts, "interior": interior.node_counts })),
    ]);
    let figure = Figure {
        curves: vec![around.polyline.vertices, interior.polyline.vertices],
        boxes: maze_figure(m)?,
        marks: vec![hp, hm],
    };
    Ok(Outcome { results, figure })
}

fn assemble(n_max: u32, levels: usize, out: &Path) -> Result<Outcome, Failure> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n-max must be at least 1".into()).into());
    }
    let trees = (1..=n_max).map(|n| build_maze(n, levels, &MazeLayout::default())).collect::<Result<Vec<_>, _>>()?;
    let set = assemble_a(&trees)?;
    let text = serialize(&set)?;
    write(out, &text)?;
    let comps: Vec<Value> = set
        .components
        .iter()
        .map(|c| json!({ "n": c.n, "center": point(c.center), "radius": c.radius, "scale": c.scale }))
        .collect();
    let results = object(vec![
        ("file", json!(out.display().to_string())),
        ("sha256", json!(digest(text.as_bytes()))),
        ("components", Value::Array(comps)),
        ("disjoint", json!(set.overlapping_pair().is_none())),
        ("includes_origin", json!(set.includes_origin)),
    ]);
    let marks = set.components.iter().map(|c| c.center).collect();
    Ok(Outcome { results, figure: Figure { marks, ..Figure::default() } })
}

/// Reads a maze (at `level`), an obstacle set, or a point array.
fn dim_input(bytes: &[u8], level: Option<usize>) -> Result<(DimInput, &'static str), Failure> {
    if let Ok(m) = serde_json::from_slice::<MazeTree>(bytes) {
        let j = level.unwrap_or(m.levels);
        return Ok((DimInput::Boxes(maze_level_union(&m, j)?.boxes), "maze"));
    }
    if level.is_some() {
        return Err(Error::InvalidParameter("--level applies to maze files only".into()).into());
    }
    if let Ok(a) = serde_json::from_slice::<ObstacleSet>(bytes) {
        if !a.balls.is_empty() {
            return Err(Error::InvalidInput("dimension of balls is not supported".into()).into());
        }
        return Ok((DimInput::Boxes(a.boxes), "boxes"));
    }
    let pts: Vec<[f64; 3]> = parse_json(bytes, "expected a maze, an obstacle set or [[x, y, t], ..]")?;
    Ok((DimInput::Points(pts.into_iter().map(|[x, y, t]| HPoint::new(x, y, t)).collect()), "points"))
}

fn dim(bytes: &[u8], gauge: Gauge, scales: &[f64], level: Option<usize>) -> Result<Outcome, Failure> {
    let (input, kind) = dim_input(bytes, level)?;
    let est = box_dimension(&input, gauge, scales)?;
    let mut results = value(&est);
    if let Value::Object(m) = &mut results {
        m.insert("input".into(), json!(kind));
    }
    let figure = match input {
        DimInput::Boxes(b) if b.len() <= 10_000 => Figure { boxes: b, ..Figure::default() },
        _ => Figure::default(),
    };
    Ok(Outcome { results, figure })
}

fn dct(alpha: f64) -> Result<Outcome, Failure> {
    let (lo, hi) = dct_bounds(alpha)?;
    Ok(Outcome { results: json!({ "beta_minus": lo, "beta_plus": hi }), figure: Figure::default() })
}

/// Name, parameters, seed and record destination of a command.
fn describe(c: &Command) -> (String, Value, Option<u64>, Option<PathBuf>) {
    match c {
        Command::Bb { p, q, out } => ("bb".into(), json!({ "p": point(*p), "q": point(*q) }), None, out.out.clone()),
        Command::Dist { p, q, tol, out } => {
            ("dist".into(), json!({ "p": point(*p), "q": point(*q), "tol": tol }), None, out.out.clone())
        }
        Command::Plan { p, q, obstacles, seed, margin, max_tries, out } => (
            "plan".into(),
            json!({
                "p": point(*p), "q": point(*q), "obstacles": obstacles.display().to_string(),
                "seed": seed, "margin": margin, "max_tries": max_tries,
            }),
            Some(*seed),
            out.out.clone(),
        ),
        Command::Maze(MazeCommand::Build { n, levels, layout, out }) => (
            "maze build".into(),
            json!({ "n": n, "levels": levels, "layout": value(&layout.layout()), "out": out.display().to_string() }),
            None,
            None,
        ),
        Command::Maze(MazeCommand::Certify { input, step, t_step, level, out }) => (
            "maze certify".into(),
            json!({ "in": input.display().to_string(), "step": step, "t_step": t_step.unwrap_or(*step), "level": level }),
            None,
            out.out.clone(),
        ),
        Command::Assemble { n_max, levels, out } => (
            "assemble".into(),
            json!({ "n_max": n_max, "levels": levels, "out": out.display().to_string() }),
            None,
            None,
        ),
        Command::Dim { input, gauge, scales, level, out } => (
            "dim".into(),
            json!({ "in": input.display().to_string(), "gauge": value(&gauge_of(*gauge)), "scales": scales, "level": level }),
            None,
            out.out.clone(),
        ),
        Command::Dct { alpha, out } => ("dct".into(), json!({ "alpha": alpha }), None, out.out.clone()),
    }
}

fn gauge_of(g: GaugeArg) -> Gauge {
    match g {
        GaugeArg::Euclidean => Gauge::Euclidean,
        GaugeArg::Koranyi => Gauge::Koranyi,
    }
}

/// Runs the command; input file digests are added to `params`.
fn execute(c: &Command, params: &mut Value) -> Result<Outcome, Failure> {
    let mut note = |key: &str, bytes: &[u8]| {
        if let Value::Object(m) = params {
            m.insert(key.into(), json!(digest(bytes)));
        }
    };
    match c {
        Command::Bb { p, q, .. } => bb(*p, *q),
        Command::Dist { p, q, tol, .. } => dist(*p, *q, *tol),
        Command::Plan { p, q, obstacles, seed, margin, max_tries, .. } => {
            let bytes = read(obstacles)?;
            note("obstacles_sha256", &bytes);
            let a: ObstacleSet = parse_json(&bytes, "obstacle set")?;
            let cfg = PlanConfig { seed: *seed, margin: *margin, max_tries: *max_tries, ..PlanConfig::default() };
            run_plan(*p, *q, &a, &cfg)
        }
        Command::Maze(MazeCommand::Build { n, levels, layout, out }) => maze_build(*n, *levels, &layout.layout(), out),
        Command::Maze(MazeCommand::Certify { input, step, t_step, level, .. }) => {
            let bytes = read(input)?;
            note("in_sha256", &bytes);
            let m: MazeTree = parse_json(&bytes, "maze")?;
            let level = level.unwrap_or(m.levels);
            maze_certify(&m, *step, t_step.unwrap_or(*step), level)
        }
        Command::Assemble { n_max, levels, out } => assemble(*n_max, *levels, out),
        Command::Dim { input, gauge, scales, level, .. } => {
            let bytes = read(input)?;
            note("in_sha256", &bytes);
            dim(&bytes, gauge_of(*gauge), scales, *level)
        }
        Command::Dct { alpha, .. } => dct(*alpha),
    }
}

fn emit(text: &str, dest: Option<&Path>) -> Result<(), Failure> {
    match dest {
        Some(p) => write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, mut params, seed, dest) = describe(&cli.command);
    let start = Instant::now();
    let res = execute(&cli.command, &mut params).and_then(|o| {
        if let Some(p) = &cli.svg {
            write(p, &o.figure.svg())?;
        }
        if let Some(p) = &cli.csv {
            write(p, &o.figure.csv())?;
        }
        Ok(o)
    });
    let wall_clock = start.elapsed().as_secs_f64();
    let written = match res {
        Ok(o) => {
            let rec = RunRecord {
                schema: SCHEMA,
                subcommand: name.clone(),
                params: params.clone(),
                seed,
                results: o.results,
                wall_clock,
                version: record::version(),
            };
            serialize(&rec).and_then(|t| emit(&t, dest.as_deref())).map(|_| true)
        }
        Err(f) => {
            let rec = ErrorRecord {
                schema: SCHEMA,
                subcommand: name.clone(),
                params: params.clone(),
                error: f.body(),
                version: record::version(),
            };
            serialize(&rec).and_then(|t| emit(&t, None)).map(|_| false)
        }
    };
    match written {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("heisgeo: {}", f.body().message);
            ExitCode::from(1)
        }
    }
}
