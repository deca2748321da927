use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use caop::apps::{
    apply_depots, bench_csv, covered_segments, gen_grid, gen_micro, gen_random_planar, gen_spiral, kmedoids_depots,
    render_svg, run_benchmark, BenchCase, MicroSpec, RenderSpec, ScenarioSpec,
};
use caop::correlation::{fov_weights_with, inverse_distance_weights_with, InverseDistanceOptions, DEFAULT_FOV_SAMPLES};
use caop::exact::{export_miqp, parse_lp, solve_bruteforce, ExportOptions, OracleLimits};
use caop::greedy::{evaluate_reward, solve_greedy, GreedyConfig, ObserverUpdate};
use caop::instance::{validate_instance, DistanceTable, Instance, InstanceFile, Robot, WeightEntry};
use caop::routing::{audit_solution, SolutionFile};
use caop::WeightModel;

#[derive(Parser)]
#[command(name = "caop", version, about = "Route planning with correlated edge observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance.
    Gen(GenArgs),
    /// Compute correlation weights and embed them in the instance.
    Correlate(CorrelateArgs),
    /// Place depots by k-medoids clustering, one robot per depot.
    Depots(DepotsArgs),
    /// Solve an instance and write the solution.
    Solve(SolveArgs),
    /// Write the mixed-integer quadratic model in LP format.
    ExportMiqp(ExportArgs),
    /// Draw a solution as SVG.
    Render(RenderArgs),
    /// Run a seeded benchmark batch and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Spiral,
    Grid,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Option<GenKind>,
    /// Build from a scenario JSON file instead of flags.
    #[arg(long, conflicts_with = "kind")]
    scenario: Option<PathBuf>,
    /// Spiral segment count.
    #[arg(long, default_value_t = 77)]
    segments: usize,
    /// Spiral arm spacing or grid cell size.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[arg(long, default_value_t = 4)]
    rows: usize,
    #[arg(long, default_value_t = 50)]
    vertices: usize,
    #[arg(long, default_value_t = 60)]
    edges: usize,
    /// Side of the square the random points are drawn from.
    #[arg(long, default_value_t = 100.0)]
    extent: f64,
    /// Budget of the single robot at vertex 0; defaults to the total edge length.
    #[arg(long)]
    capacity: Option<f64>,
    /// `service,deadhead` speeds: re-cost edges and add direct deadhead edges.
    #[arg(long, value_parser = parse_pair)]
    direct_deadhead: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Field-of-view width; mutually exclusive with --invdist.
    #[arg(long, conflicts_with = "invdist", required_unless_present = "invdist")]
    fov: Option<f64>,
    #[arg(long)]
    invdist: bool,
    #[arg(long, default_value_t = DEFAULT_FOV_SAMPLES)]
    samples: usize,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    sparsity_floor: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct DepotsArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    k: usize,
    /// Budget of every robot; defaults to the largest existing budget.
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    Exact,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    algo: Algo,
    /// `none`, `invdist`, `fov:<width>` or a JSON file holding a `weights`
    /// list; defaults to the weights embedded in the instance.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Accepted for uniformity; both solvers are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Use only first-order utility updates in the greedy solver.
    #[arg(long)]
    first_order: bool,
    #[arg(long, default_value_t = OracleLimits::default().max_edges)]
    max_edges: usize,
    #[arg(long, default_value_t = OracleLimits::default().max_robots)]
    max_robots: usize,
    /// Exact solver time budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    linearize: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    solution: PathBuf,
    /// Render settings as JSON; missing keys take defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    /// Small instances solved by greedy and the exact solver.
    Micro,
    /// Random planar instances solved by greedy only.
    Greedy,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum, default_value = "micro")]
    kind: BenchKind,
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Edge count for greedy batches.
    #[arg(long, default_value_t = 100)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<(InstanceFile, Instance)> {
    let raw = InstanceFile::read(path)?;
    let inst = validate_instance(&raw).with_context(|| format!("validating {}", path.display()))?;
    Ok((raw, inst))
}

fn weights_from_file(path: &Path, inst: &Instance) -> Result<WeightModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let entries: Vec<WeightEntry> = if doc.get("vertices").is_some() {
        InstanceFile::from_json(&text)?.weights.unwrap_or_default()
    } else {
        let list = doc.get("weights").cloned().context("weights file has no \"weights\" list")?;
        serde_json::from_value(list).context("parsing weights")?
    };
    Ok(WeightModel::for_instance(inst, &entries)?)
}

fn resolve_weights(spec: Option<&str>, raw: &InstanceFile, inst: &Instance) -> Result<WeightModel> {
    Ok(match spec {
        None => match &raw.weights {
            Some(entries) => WeightModel::for_instance(inst, entries)?,
            None => WeightModel::empty(inst.num_edges()),
        },
        Some("none") => WeightModel::empty(inst.num_edges()),
        Some("invdist") => inverse_distance_weights_with(inst, InverseDistanceOptions::default())?,
        Some(s) if s.starts_with("fov:") => {
            let fov: f64 = s[4..].parse().with_context(|| format!("bad field of view in {s}"))?;
            fov_weights_with(inst, fov, DEFAULT_FOV_SAMPLES)?
        }
        Some(path) => weights_from_file(Path::new(path), inst)?,
    })
}

fn gen(args: GenArgs) -> Result<()> {
    let (inst, wm) = if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: ScenarioSpec = serde_json::from_str(&text).context("parsing scenario")?;
        let (inst, wm) = spec.build()?;
        (inst, Some(wm))
    } else {
        let Some(kind) = args.kind else { bail!("give a generator kind or --scenario") };
        let mut inst = match kind {
            GenKind::Spiral => gen_spiral(args.segments, args.spacing)?,
            GenKind::Grid => gen_grid(args.cols, args.rows, args.spacing)?,
            GenKind::Random => {
                let Some(seed) = args.seed else { bail!("random instances need --seed") };
                gen_random_planar(args.vertices, args.edges, args.extent, seed)?
            }
        };
        if let Some((s, d)) = args.direct_deadhead {
            inst.set_speeds(s, d)?;
            inst.add_direct_deadhead_edges(s, d)?;
        }
        if let Some(capacity) = args.capacity {
            inst.set_robots(vec![Robot { depot: 0, capacity }])?;
        }
        (inst, None)
    };
    let weights = wm.filter(|w| !w.is_empty()).map(|w| w.to_entries());
    write(&args.out, &InstanceFile::from_instance(&inst, weights).to_json())?;
    eprintln!("{} vertices, {} edges -> {}", inst.num_vertices(), inst.num_edges(), args.out.display());
    Ok(())
}

fn correlate(args: CorrelateArgs) -> Result<()> {
    let (_, inst) = load(&args.input)?;
    let wm = match args.fov {
        Some(fov) => fov_weights_with(&inst, fov, args.samples)?,
        None => {
            let mut opts = InverseDistanceOptions::default();
            if let Some(d) = args.d_min {
                opts.d_min = d;
            }
            if let Some(f) = args.sparsity_floor {
                opts.sparsity_floor = f;
            }
            inverse_distance_weights_with(&inst, opts)?
        }
    };
    write(&args.out, &InstanceFile::from_instance(&inst, Some(wm.to_entries())).to_json())?;
    eprintln!("{} nonzero weights -> {}", wm.len(), args.out.display());
    Ok(())
}

fn depots(args: DepotsArgs) -> Result<()> {
    let (raw, mut inst) = load(&args.input)?;
    let dist = DistanceTable::new(&inst);
    let plan = kmedoids_depots(&inst, &dist, args.k, args.seed)?;
    let capacity = args.capacity.unwrap_or_else(|| inst.robots().iter().map(|r| r.capacity).fold(0.0, f64::max));
    apply_depots(&mut inst, &plan, capacity)?;
    write(&args.out, &InstanceFile::from_instance(&inst, raw.weights).to_json())?;
    let summary = serde_json::json!({
        "depots": plan.depots,
        "medoids": plan.medoids,
        "cluster_sizes": plan.clusters.iter().map(Vec::len).collect::<Vec<_>>(),
        "objective_trace": plan.objective_trace,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let (raw, inst) = load(&args.input)?;
    let wm = resolve_weights(args.weights.as_deref(), &raw, &inst)?;
    let dist = DistanceTable::new(&inst);
    let start = Instant::now();
    let sol = match args.algo {
        Algo::Greedy => {
            let mut cfg = GreedyConfig::default();
            if args.first_order {
                cfg.observer_update = ObserverUpdate::FirstOrder;
            }
            solve_greedy(&inst, &dist, &wm, &cfg)
        }
        Algo::Exact => {
            let limits = OracleLimits {
                max_edges: args.max_edges,
                max_robots: args.max_robots,
                time_budget: args.time_budget.map(Duration::from_secs_f64),
            };
            solve_bruteforce(&inst, &dist, &wm, &limits)?
        }
    };
    let elapsed = start.elapsed();
    let violations = audit_solution(&inst, &dist, &sol);
    if !violations.is_empty() {
        bail!("solver produced an infeasible solution: {violations:?}");
    }
    evaluate_reward(&inst, &wm, &sol)?;
    write(&args.output, &SolutionFile::from_solution(&inst, &dist, &sol).to_json())?;
    if let Some(svg) = &args.svg {
        write(svg, &render_svg(&inst, &dist, &sol, &RenderSpec::default()))?;
    }
    eprintln!(
        "reward {:.6} of {:.6}, cost {:.6}, {} serviced, {} covered, {:.3} ms",
        sol.total_reward(),
        inst.total_reward(),
        sol.total_cost(),
        sol.serviced().len(),
        covered_segments(&inst, &wm, &sol),
        elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let (raw, inst) = load(&args.input)?;
    let wm = resolve_weights(args.weights.as_deref(), &raw, &inst)?;
    let model = export_miqp(&inst, &wm, ExportOptions { linearize: args.linearize })?;
    let text = model.to_lp();
    let parsed = parse_lp(&text)?;
    if let Err(msg) = model.verify_parsed(&parsed) {
        bail!("written model does not read back: {msg}");
    }
    write(&args.out, &text)?;
    let census = model.census();
    eprintln!(
        "{} variables, {} constraints, lambda {} -> {}",
        census.total_vars(),
        census.total_constraints(),
        model.lambda,
        args.out.display()
    );
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let (_, inst) = load(&args.input)?;
    let dist = DistanceTable::new(&inst);
    let text = std::fs::read_to_string(&args.solution).with_context(|| format!("reading {}", args.solution.display()))?;
    let sol = SolutionFile::from_json(&text)?.to_solution(&inst, &dist)?;
    let spec = match &args.spec {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).context("parsing render spec")?,
        None => RenderSpec::default(),
    };
    write(&args.out, &render_svg(&inst, &dist, &sol, &spec))
}

fn bench(args: BenchArgs) -> Result<()> {
    let cases: Vec<BenchCase> = (0..args.count)
        .map(|i| -> Result<BenchCase> {
            let seed = args.seed.wrapping_add(i as u64);
            Ok(match args.kind {
                BenchKind::Micro => {
                    let (instance, weights) = gen_micro(&MicroSpec::default(), seed)?;
                    BenchCase { name: format!("micro-{seed}"), instance, weights, oracle: true }
                }
                BenchKind::Greedy => {
                    let n = (args.edges * 4).div_ceil(5).max(2);
                    let mut instance = gen_random_planar(n, args.edges, 100.0, seed)?;
                    let capacity = instance.total_reward() * 0.4;
                    instance.set_robots(vec![Robot { depot: 0, capacity }])?;
                    let weights = fov_weights_with(&instance, 10.0, DEFAULT_FOV_SAMPLES)?;
                    BenchCase { name: format!("planar-{seed}"), instance, weights, oracle: false }
                }
            })
        })
        .collect::<Result<_>>()?;
    let records = run_benchmark(&cases, &GreedyConfig::default(), &OracleLimits::default())?;
    let csv = bench_csv(&records)?;
    write(&args.out, &csv)?;
    eprint!("{}", csv.lines().rev().take(2).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join("\n"));
    eprintln!();
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Correlate(a) => correlate(a),
        Command::Depots(a) => depots(a),
        Command::Solve(a) => solve(a),
        Command::ExportMiqp(a) => export(a),
        Command::Render(a) => render(a),
        Command::Bench(a) => bench(a),
    }
}
