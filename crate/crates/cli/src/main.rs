use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phylocomb::branching::{sample_mbm, SplitLaw};
use phylocomb::chronos::{
    contour, contour_from_csv, contour_to_csv, reduced_comb, sample_splitting_tree, tree_from_contour, tree_from_json,
    tree_to_json, LifespanModel, Lifetime, SplittingOutcome,
};
use phylocomb::comb::{comb_distance, comb_from_csv, comb_to_csv, distance_matrix, tree_from_comb};
use phylocomb::combinatorics::{r_count, shape_probability, t_count, to_f64, ModelId};
use phylocomb::cpp::{
    bottleneck_transform, loglik_cpp, mle_fit, nu0_tail, nu_alpha_tail, pd_ratio, pd_ratio_inf, pd_ratio_inf_quadrature,
    sample_cpp, sample_cpp_poisson, scale_bd, scale_from_lifespan, BottleneckSchedule, Family, ScaleFunction,
};
use phylocomb::generators::{sample_gw_conditioned, sample_kingman, sample_yule, GW_DEFAULT_BUDGET, GW_DEFAULT_P};
use phylocomb::numerics::NelderMeadConfig;
use phylocomb::rng::{replicate, seeded};
use phylocomb::tree::{enumerate, from_newick, ranked_shapes, shapes, to_newick, Bounds, TreeKind};

/// Probabilistic models of phylogenies: tree shapes, branching models,
/// splitting trees, combs and coalescent point processes.
///
/// Exit status: 0 on success, 2 on a usage error, 3 on malformed input or
/// a numerical failure. PHYLOCOMB_THREADS caps the worker count.
#[derive(Parser)]
#[command(name = "phylocomb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of trees of a kind with n tips.
    Count {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Count by enumeration rather than closed form (small n only).
        #[arg(long)]
        enumerate: bool,
    },
    /// Exact probability of a tree under a model, as a fraction and a
    /// decimal. Labels are dropped unless --labelled is given.
    Prob {
        /// pda, erm, urt or beta:<value>
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        newick: String,
        /// Ranks of the internal nodes in preorder, comma separated.
        #[arg(long, value_delimiter = ',')]
        ranks: Option<Vec<u32>>,
        #[arg(long)]
        labelled: bool,
    },
    /// Draw tree shapes from a model, one Newick per line.
    Sample {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Forward simulators.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Contour path of a chronological tree (JSON in, CSV out), or the
    /// inverse with --inverse.
    Contour {
        #[arg(long)]
        input: String,
        #[arg(long)]
        inverse: bool,
    },
    /// Comb of the individuals alive at a height, from a contour CSV.
    Reduce {
        #[arg(long)]
        input: String,
        #[arg(long)]
        height: f64,
    },
    /// Comb metric operations on a `position,height` CSV.
    #[command(subcommand)]
    Comb(CombCommand),
    /// Coalescent point processes.
    #[command(subcommand)]
    Cpp(CppCommand),
    /// Run the exact golden checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Shape,
    Labelled,
    Ranked,
    RankedLabelled,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum TreeFormat {
    Newick,
    Json,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Pure-birth tree grown to n tips.
    Yule {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "newick")]
        format: TreeFormat,
    },
    /// Kingman coalescent on n labelled tips.
    Kingman {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "newick")]
        format: TreeFormat,
    },
    /// Binary Galton–Watson tree conditioned on n tips.
    Gw {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = GW_DEFAULT_P)]
        p: f64,
        #[arg(long, default_value_t = GW_DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Splitting tree up to a horizon, as JSON vertex records.
    Splitting {
        #[arg(long)]
        b: f64,
        /// exp:<rate>, det:<value> or gamma:<shape>,<scale>
        #[arg(long, value_parser = parse_lifetime)]
        lifetime: Lifetime,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CombCommand {
    /// Distance between two points, or the matrix between gap points.
    Dist {
        #[arg(long)]
        input: String,
        #[arg(long)]
        length: Option<f64>,
        /// Two points `s,t`; omitted gives the full matrix as CSV.
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
    },
    /// Ultrametric tree coded by the comb.
    Tree {
        #[arg(long)]
        input: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: TreeFormat,
    },
}

#[derive(Args, Clone)]
struct ScaleArgs {
    /// Birth rate.
    #[arg(long)]
    b: f64,
    /// Death rate of the birth–death model.
    #[arg(long, conflicts_with = "lifetime")]
    d: Option<f64>,
    /// Lifetime law of a splitting tree instead of a death rate:
    /// exp:<rate>, det:<value> or gamma:<shape>,<scale>.
    #[arg(long, value_parser = parse_lifetime)]
    lifetime: Option<Lifetime>,
    /// Grid step for lifetime laws; defaults to horizon / 1000.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Subcommand)]
enum CppCommand {
    /// Draw coalescent point processes; one comb as CSV, or tip counts as
    /// JSON when reps > 1.
    Sim {
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Poissonian process with intensity nu0 or alpha:<a>,<beta>.
    Poisson {
        #[arg(long, default_value = "nu0")]
        intensity: String,
        #[arg(long)]
        horizon: f64,
        /// Heights below the cutoff are dropped.
        #[arg(long)]
        cutoff: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Node-depth density W'/W² on a grid, as `t,density` CSV.
    Density {
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Log-likelihood of node depths (CSV with a `depth` column).
    Loglik {
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        depths: String,
    },
    /// Scale function after bottlenecks, as `t,w` CSV.
    Bottleneck {
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        horizon: f64,
        /// Bottlenecks `time:survival`, comma separated.
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<String>,
        /// Sampling probability of the tips.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Fraction of phylogenetic diversity kept under sampling.
    Pd {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        #[arg(long)]
        p: f64,
        /// A positive number or `inf`.
        #[arg(long)]
        horizon: String,
        /// Use quadrature rather than the closed form for `inf`.
        #[arg(long)]
        quadrature: bool,
    },
    /// Maximum-likelihood fit to node depths.
    Fit {
        #[arg(long)]
        depths: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long, value_enum, default_value = "bd")]
        family: FitFamily,
        #[arg(long)]
        step: Option<f64>,
        /// Fix the Gamma shape.
        #[arg(long)]
        shape: Option<f64>,
        #[arg(long, default_value_t = 4000)]
        max_evals: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitFamily {
    Bd,
    Gamma,
}

enum Failure {
    Usage(String),
    Input(String),
}

type Outcome = Result<String, Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn parse_lifetime(s: &str) -> Result<Lifetime, String> {
    let (law, rest) = s.split_once(':').ok_or("expected <law>:<parameters>")?;
    let nums: Vec<f64> = rest.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let life = match (law, nums.as_slice()) {
        ("exp", [rate]) => Lifetime::Exponential { rate: *rate },
        ("det", [value]) => Lifetime::Deterministic { value: *value },
        ("gamma", [shape, scale]) => Lifetime::Gamma { shape: *shape, scale: *scale },
        _ => return Err(format!("unknown lifetime `{s}`")),
    };
    life.validate().map_err(|e| e.to_string())?;
    Ok(life)
}

fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn seed_line(seed: u64) -> String {
    format!("# seed={seed}\n")
}

fn build_scale(args: &ScaleArgs, horizon: f64) -> Result<ScaleFunction, Failure> {
    match (&args.lifetime, args.d) {
        (Some(life), _) => scale_from_lifespan(args.b, life, horizon, args.step.unwrap_or(horizon / 1000.0)).map_err(input),
        (None, Some(d)) => scale_bd(args.b, d).map_err(input),
        (None, None) => Err(Failure::Usage("give --d or --lifetime".into())),
    }
}

fn read_depths(path: &str) -> Result<Vec<f64>, Failure> {
    let src = read(path)?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(src.as_bytes());
    let headers = r.headers().map_err(input)?.clone();
    let col = headers.iter().position(|h| h == "depth" || h == "height").unwrap_or(0);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(input)?;
        let field = rec.get(col).ok_or_else(|| Failure::Input("missing depth column".into()))?;
        out.push(field.parse::<f64>().map_err(|e| Failure::Input(format!("depth `{field}`: {e}")))?);
    }
    Ok(out)
}

fn count(kind: Kind, n: usize, by_enumeration: bool) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("n must be positive".into()));
    }
    let value = match (kind, by_enumeration) {
        (Kind::Labelled, false) => t_count(n as u64).to_string(),
        (Kind::RankedLabelled, false) => r_count(n as u64).to_string(),
        (Kind::Shape, _) => shapes(n).map_err(input)?.len().to_string(),
        (Kind::Ranked, _) => ranked_shapes(n).map_err(input)?.len().to_string(),
        (Kind::Labelled, true) => enumerate(n, TreeKind::Labelled, Bounds::default()).map_err(input)?.len().to_string(),
        (Kind::RankedLabelled, true) => enumerate(n, TreeKind::RankedLabelled, Bounds::default()).map_err(input)?.len().to_string(),
    };
    Ok(value + "\n")
}

fn prob(model: ModelId, newick: &str, ranks: Option<&[u32]>, labelled: bool) -> Outcome {
    let mut t = from_newick(newick).map_err(input)?;
    if let Some(r) = ranks {
        t = t.with_ranks_preorder(r).map_err(input)?;
    }
    t.kind().map_err(input)?;
    if !labelled {
        t = t.forget_labels();
    }
    match shape_probability(&t, model) {
        Ok(p) => Ok(format!("{p}\t{}\n", to_f64(&p))),
        Err(phylocomb::combinatorics::CombinatoricsError::IrrationalBeta(beta)) => {
            let lp = phylocomb::branching::beta_tree_probability(&t.forget_ranks(), beta).map_err(input)?;
            Ok(format!("{}\n", lp.exp()))
        }
        Err(e) => Err(input(e)),
    }
}

fn sample(model: ModelId, n: usize, reps: usize, seed: u64) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("n must be positive".into()));
    }
    let law = match model {
        ModelId::Pda => Some(SplitLaw::Pda),
        ModelId::Erm => Some(SplitLaw::Erm),
        ModelId::Beta(b) => Some(SplitLaw::Beta(b)),
        ModelId::Urt => None,
    };
    let trees = replicate(seed, reps, |r| match &law {
        Some(l) => sample_mbm(n, l, r).map(|t| to_newick(&t)).map_err(|e| e.to_string()),
        None if n == 1 => Ok(";".to_string()),
        None => sample_yule(n, 1.0, r).map(|y| to_newick(&y.tree)).map_err(|e| e.to_string()),
    });
    let mut out = seed_line(seed);
    for t in trees {
        out += &t.map_err(Failure::Input)?;
        out.push('\n');
    }
    Ok(out)
}

fn timed_output(trees: Vec<phylocomb::generators::TimedRankedTree>, seed: u64, format: TreeFormat) -> Outcome {
    match format {
        TreeFormat::Json => {
            let v = serde_json::json!({ "seed": seed, "trees": trees });
            Ok(serde_json::to_string_pretty(&v).map_err(input)? + "\n")
        }
        TreeFormat::Newick => {
            let mut out = seed_line(seed);
            for t in trees {
                out += &to_newick(&t.tree);
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn sim(cmd: SimCommand) -> Outcome {
    match cmd {
        SimCommand::Yule { n, b, reps, seed, format } => {
            let trees: Result<Vec<_>, _> = replicate(seed, reps, |r| sample_yule(n, b, r)).into_iter().collect();
            timed_output(trees.map_err(input)?, seed, format)
        }
        SimCommand::Kingman { n, c, reps, seed, format } => {
            let trees: Result<Vec<_>, _> = replicate(seed, reps, |r| sample_kingman(n, c, r)).into_iter().collect();
            timed_output(trees.map_err(input)?, seed, format)
        }
        SimCommand::Gw { n, p, budget, reps, seed } => {
            let trees = replicate(seed, reps, |r| sample_gw_conditioned(n, p, budget, r));
            let mut out = seed_line(seed);
            for t in trees {
                out += &to_newick(&t.map_err(input)?);
                out.push('\n');
            }
            Ok(out)
        }
        SimCommand::Splitting { b, lifetime, horizon, cap, seed } => {
            let model = LifespanModel::new(b, lifetime).map_err(input)?;
            match sample_splitting_tree(&model, horizon, cap, &mut seeded(seed)).map_err(input)? {
                SplittingOutcome::Tree(t) => {
                    let records: serde_json::Value = serde_json::from_str(&tree_to_json(&t)).map_err(input)?;
                    let v = serde_json::json!({ "seed": seed, "horizon": horizon, "vertices": records });
                    Ok(serde_json::to_string_pretty(&v).map_err(input)? + "\n")
                }
                SplittingOutcome::CapExceeded => Err(Failure::Input(format!("tree exceeded {cap} individuals"))),
            }
        }
    }
}

// Accepts either a bare record list or an object with a `vertices` field.
fn load_tree(src: &str) -> Result<phylocomb::ChronologicalTree, Failure> {
    let v: serde_json::Value = serde_json::from_str(src).map_err(input)?;
    let records = match v.get("vertices") {
        Some(inner) => inner.to_string(),
        None => src.to_string(),
    };
    tree_from_json(&records).map_err(input)
}

fn contour_cmd(path: &str, inverse: bool) -> Outcome {
    let src = read(path)?;
    if inverse {
        let p = contour_from_csv(&src).map_err(input)?;
        Ok(tree_to_json(&tree_from_contour(&p).map_err(input)?) + "\n")
    } else {
        Ok(contour_to_csv(&contour(&load_tree(&src)?).map_err(input)?))
    }
}

fn comb_cmd(cmd: CombCommand) -> Outcome {
    match cmd {
        CombCommand::Dist { input: path, length, points } => {
            let c = comb_from_csv(&read(&path)?, length).map_err(input)?;
            match points.as_deref() {
                Some([s, t]) => Ok(format!("{}\n", comb_distance(&c, *s, *t).map_err(input)?)),
                Some(_) => Err(Failure::Usage("--points takes two values".into())),
                None => Ok(distance_matrix(&c).to_csv()),
            }
        }
        CombCommand::Tree { input: path, horizon, format } => {
            let c = comb_from_csv(&read(&path)?, None).map_err(input)?;
            let t = tree_from_comb(&c, horizon).map_err(input)?;
            let shape = to_newick(&t.ranked_shape());
            match format {
                TreeFormat::Newick => Ok(shape + "\n"),
                TreeFormat::Json => {
                    let v = serde_json::json!({ "ranked_shape": shape, "tree": t });
                    Ok(serde_json::to_string_pretty(&v).map_err(input)? + "\n")
                }
            }
        }
    }
}

fn grid_csv(header: [&str; 2], horizon: f64, points: usize, f: impl Fn(f64) -> f64) -> Outcome {
    if points < 2 {
        return Err(Failure::Usage("need at least 2 points".into()));
    }
    let mut out = format!("{},{}\n", header[0], header[1]);
    for k in 0..points {
        let t = horizon * k as f64 / (points - 1) as f64;
        let _ = writeln!(out, "{t},{}", f(t));
    }
    Ok(out)
}

fn parse_schedule(items: &[String]) -> Result<Vec<(f64, f64)>, Failure> {
    items
        .iter()
        .map(|s| {
            let (a, b) = s.split_once(':').ok_or_else(|| Failure::Usage(format!("bottleneck `{s}` is not time:survival")))?;
            let a = a.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("{s}: {e}")))?;
            let b = b.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("{s}: {e}")))?;
            Ok((a, b))
        })
        .collect()
}

fn cpp_cmd(cmd: CppCommand) -> Outcome {
    match cmd {
        CppCommand::Sim { scale, horizon, reps, seed } => {
            let w = build_scale(&scale, horizon)?;
            if reps == 1 {
                let c = sample_cpp(&w, horizon, &mut seeded(seed)).map_err(input)?;
                return Ok(seed_line(seed) + &comb_to_csv(&c));
            }
            let tips: Result<Vec<usize>, _> = replicate(seed, reps, |r| sample_cpp(&w, horizon, r).map(|c| c.n_tips())).into_iter().collect();
            let tips = tips.map_err(input)?;
            let mean = tips.iter().sum::<usize>() as f64 / reps as f64;
            let v = serde_json::json!({ "seed": seed, "reps": reps, "mean_tips": mean, "expected_tips": w.value(horizon), "tips": tips });
            Ok(serde_json::to_string(&v).map_err(input)? + "\n")
        }
        CppCommand::Poisson { intensity, horizon, cutoff, seed } => {
            let tail: Box<dyn Fn(f64) -> f64> = if intensity == "nu0" {
                Box::new(nu0_tail)
            } else if let Some(rest) = intensity.strip_prefix("alpha:") {
                let (a, b) = rest.split_once(',').ok_or_else(|| Failure::Usage("alpha:<a>,<beta>".into()))?;
                let a = a.parse::<f64>().map_err(|e| Failure::Usage(e.to_string()))?;
                let b = b.parse::<f64>().map_err(|e| Failure::Usage(e.to_string()))?;
                Box::new(nu_alpha_tail(a, b))
            } else {
                return Err(Failure::Usage(format!("unknown intensity `{intensity}`")));
            };
            let c = sample_cpp_poisson(&tail, horizon, cutoff, &mut seeded(seed)).map_err(input)?;
            Ok(format!("{}# length={}\n{}", seed_line(seed), c.length, comb_to_csv(&c)))
        }
        CppCommand::Density { scale, horizon, points } => {
            let w = build_scale(&scale, horizon)?;
            grid_csv(["t", "density"], horizon, points, |t| w.depth_density(t))
        }
        CppCommand::Loglik { scale, horizon, depths } => {
            let w = build_scale(&scale, horizon)?;
            let hs = read_depths(&depths)?;
            Ok(format!("{}\n", loglik_cpp(&hs, &w, horizon).map_err(input)?))
        }
        CppCommand::Bottleneck { scale, horizon, schedule, p, points } => {
            let w = build_scale(&scale, horizon)?;
            let sched = BottleneckSchedule::new(parse_schedule(&schedule)?, p).map_err(input)?;
            let we = bottleneck_transform(&w, &sched, horizon).map_err(input)?;
            grid_csv(["t", "w"], horizon, points, |t| we.value(t))
        }
        CppCommand::Pd { b, d, p, horizon, quadrature } => {
            let v = if horizon == "inf" {
                if quadrature {
                    pd_ratio_inf_quadrature(&scale_bd(b, d).map_err(input)?, p)
                } else {
                    pd_ratio_inf(b, d, p)
                }
            } else {
                let t = horizon.parse::<f64>().map_err(|e| Failure::Usage(format!("horizon `{horizon}`: {e}")))?;
                pd_ratio(&scale_bd(b, d).map_err(input)?, t, p)
            };
            Ok(format!("{:.6}\n", v.map_err(input)?))
        }
        CppCommand::Fit { depths, horizon, family, step, shape, max_evals } => {
            let hs = read_depths(&depths)?;
            let fam = match family {
                FitFamily::Bd => Family::BirthDeath,
                FitFamily::Gamma => Family::GammaLifespan { step: step.unwrap_or(horizon / 1000.0), shape },
            };
            let cfg = NelderMeadConfig { max_evals, ..NelderMeadConfig::default() };
            let fit = mle_fit(&hs, horizon, &fam, &cfg).map_err(input)?;
            Ok(serde_json::to_string_pretty(&fit).map_err(input)? + "\n")
        }
    }
}

fn selftest() -> Outcome {
    let checks = phylocomb::golden::run_golden();
    let mut out = String::new();
    let mut failed = 0;
    for c in &checks {
        if c.pass {
            let _ = writeln!(out, "PASS {}", c.name);
        } else {
            failed += 1;
            let _ = writeln!(out, "FAIL {}: expected {} got {}", c.name, c.expected, c.actual);
        }
    }
    let _ = writeln!(out, "{} checks, {failed} failed", checks.len());
    if failed > 0 {
        print!("{out}");
        return Err(Failure::Input(format!("{failed} golden checks failed")));
    }
    Ok(out)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Count { kind, n, enumerate } => count(kind, n, enumerate),
        Command::Prob { model, newick, ranks, labelled } => prob(model, &newick, ranks.as_deref(), labelled),
        Command::Sample { model, n, reps, seed } => sample(model, n, reps, seed),
        Command::Sim(cmd) => sim(cmd),
        Command::Contour { input: path, inverse } => contour_cmd(&path, inverse),
        Command::Reduce { input: path, height } => {
            let p = contour_from_csv(&read(&path)?).map_err(input)?;
            Ok(comb_to_csv(&reduced_comb(&p, height).map_err(input)?))
        }
        Command::Comb(cmd) => comb_cmd(cmd),
        Command::Cpp(cmd) => cpp_cmd(cmd),
        Command::Selftest => selftest(),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("PHYLOCOMB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Failure::Usage(format!("PHYLOCOMB_THREADS=`{v}` is not a positive integer")))?;
    if n == 0 {
        return Err(Failure::Usage("PHYLOCOMB_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
