use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use spinbell::bell::{correlators, optimize_weight_ratio, psi_max_state, BellWeights};
use spinbell::diagnostics::{entanglement_entropy, fidelity};
use spinbell::eigensolver::ground_state_with;
use spinbell::hamiltonian::{build_hamiltonian, HamiltonianParams};
use spinbell::hilbert::enumerate_sector;
use spinbell::lrbound::{lr_bound_bruteforce, lr_bound_literal, LrBoundTable};
use spinbell::sweep::{
    self, psi_max_ratio, write_csv, write_jsonl, write_table1, EntropyBase, Grid, SweepConfig, Table1Row,
};

#[derive(Parser)]
#[command(name = "spinbell", version, about = "Bell nonlocality in spin-1 XXZ chain ground states")]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state at one (N, Jz, D) point.
    Ground(PointArgs),
    /// Correlators, optimal weight ratio and violation ratio at one point.
    Bell(BellArgs),
    /// Local-realistic bound for explicit weights.
    Lrbound(LrArgs),
    /// Grid over N, Jz and D.
    Sweep(GridArgs),
    /// Per-N optimum at criticality and the matched three-term state.
    Table1(Table1Args),
    /// Exponential fit of the ratio at criticality over N.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    krylov_dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Angle overrides in radians ("auto" restores the default).
    #[arg(long)]
    theta1: Option<String>,
    #[arg(long)]
    theta2: Option<String>,
    #[arg(long)]
    theta_nu: Option<String>,
    #[arg(long)]
    f_max: Option<f64>,
    #[arg(long)]
    f_points: Option<usize>,
    #[arg(long)]
    periodic: Option<bool>,
    /// e or 2
    #[arg(long)]
    entropy_base: Option<String>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    jz: f64,
    #[arg(long)]
    d: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BellArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Evaluate at this f̃ instead of optimizing.
    #[arg(long)]
    f_ratio: Option<f64>,
}

#[derive(Args)]
struct LrArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    f1: f64,
    #[arg(long)]
    f2: f64,
    /// Defaults to the maximizing angle for N.
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    /// Conjugation pattern such as 1,-1,1,-1 (default alternating).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<i8>>,
    /// dp, brute or literal.
    #[arg(long, default_value = "dp")]
    method: String,
}

#[derive(Args)]
struct GridArgs {
    /// Chain lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    jz_min: Option<f64>,
    #[arg(long)]
    jz_max: Option<f64>,
    #[arg(long)]
    jz_steps: Option<usize>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long)]
    d_steps: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    cut_jz: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Table1Args {
    #[command(flatten)]
    grid: GridArgs,
    /// Skip the criticality search and use these f̃ values, one per N.
    #[arg(long, value_delimiter = ',')]
    f_ratios: Option<Vec<f64>>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    json: bool,
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<SweepConfig> {
    Ok(match path {
        Some(p) => SweepConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => SweepConfig::default(),
    })
}

fn set(cfg: &mut SweepConfig, key: &str, value: impl ToString) -> anyhow::Result<()> {
    cfg.set(key, &value.to_string()).map_err(anyhow::Error::msg)
}

impl CommonArgs {
    fn apply(&self, cfg: &mut SweepConfig) -> anyhow::Result<()> {
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.krylov_dim {
            cfg.krylov_dim = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        for (key, v) in [("theta1", &self.theta1), ("theta2", &self.theta2), ("theta_nu", &self.theta_nu)] {
            if let Some(v) = v {
                set(cfg, key, v)?;
            }
        }
        if let Some(v) = self.f_max {
            cfg.f_max = v;
        }
        if let Some(v) = self.f_points {
            cfg.f_points = v;
        }
        if let Some(v) = self.periodic {
            cfg.periodic = v;
        }
        if let Some(v) = &self.entropy_base {
            cfg.entropy_base = v.parse::<EntropyBase>().map_err(anyhow::Error::msg)?;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got '{kv}'");
            };
            set(cfg, k.trim(), v)?;
        }
        Ok(())
    }
}

impl GridArgs {
    fn config(&self, path: &Option<PathBuf>) -> anyhow::Result<SweepConfig> {
        let mut cfg = load_config(path)?;
        if let Some(v) = &self.n {
            cfg.n_values = v.clone();
        }
        let grid = |g: &mut Grid, min: Option<f64>, max: Option<f64>, steps: Option<usize>| {
            g.min = min.unwrap_or(g.min);
            g.max = max.unwrap_or(g.max);
            g.steps = steps.unwrap_or(g.steps);
        };
        grid(&mut cfg.jz, self.jz_min, self.jz_max, self.jz_steps);
        grid(&mut cfg.d, self.d_min, self.d_max, self.d_steps);
        if let Some(v) = self.resolution {
            cfg.resolution = v;
        }
        if let Some(v) = self.cut_jz {
            cfg.cut_jz = v;
        }
        if self.csv.is_some() {
            cfg.csv = self.csv.clone();
        }
        if self.jsonl.is_some() {
            cfg.jsonl = self.jsonl.clone();
        }
        self.common.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PointArgs {
    fn config(&self, path: &Option<PathBuf>) -> anyhow::Result<SweepConfig> {
        let mut cfg = load_config(path)?;
        cfg.n_values = vec![self.n];
        self.common.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn ground(args: &PointArgs, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = args.config(path)?;
    let basis = Arc::new(enumerate_sector(args.n, 0)?);
    let params = HamiltonianParams {
        jz: args.jz,
        d: args.d,
        n: args.n,
        periodic: cfg.periodic,
    };
    let h = build_hamiltonian(&params, basis)?;
    let gs = ground_state_with(&h, &cfg.solver_options())?;
    let mut entropy = entanglement_entropy(&gs.state, args.n / 2)?;
    if cfg.entropy_base == EntropyBase::Bits {
        entropy /= std::f64::consts::LN_2;
    }
    let out = json!({
        "n": args.n, "jz": args.jz, "d": args.d,
        "dim": h.dim(), "energy": gs.energy, "degenerate": gs.degenerate,
        "odd_gap": gs.odd_gap, "residual": gs.residual, "iterations": gs.iterations,
        "entropy": entropy,
    });
    print_object(&out, args.json)
}

fn bell(args: &BellArgs, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let p = &args.point;
    let cfg = p.config(path)?;
    let basis = Arc::new(enumerate_sector(p.n, 0)?);
    let params = HamiltonianParams {
        jz: p.jz,
        d: p.d,
        n: p.n,
        periodic: cfg.periodic,
    };
    let gs = ground_state_with(&build_hamiltonian(&params, basis.clone())?, &cfg.solver_options())?;
    let scan = cfg.ratio_scan();
    let base = scan.angles.weights(p.n, 0.0);
    let table = LrBoundTable::new(&base.c)?;
    let mut out = match args.f_ratio {
        Some(f) => {
            let w = base.with_f_ratio(f);
            let g = correlators(&gs.state, &w.c)?;
            let bell = spinbell::bell::bell_from_correlators(p.n, &g, &w);
            let beta = table.bound(&w);
            json!({ "g1": g.g1.re, "g2": g.g2.re, "f_ratio": f, "bell": bell, "beta_lr": beta, "ratio": bell / beta })
        }
        None => {
            let opt = optimize_weight_ratio(&gs.state, |w| table.bound(w), &scan)?;
            let maxima: Vec<_> = opt
                .maxima
                .iter()
                .map(|m| json!({ "f_ratio": m.f_ratio, "ratio": m.ratio, "violating": m.violating }))
                .collect();
            json!({
                "g1": opt.correlators.g1.re, "g2": opt.correlators.g2.re, "f_ratio": opt.f_best,
                "bell": opt.bell, "beta_lr": opt.beta_lr, "ratio": opt.ratio, "maxima": maxima,
            })
        }
    };
    let f = out["f_ratio"].as_f64();
    if let Some(f) = f {
        let psi = psi_max_state(p.n, f)?;
        out["b"] = json!(psi.b);
        out["fidelity"] = json!(fidelity(&gs.state, &psi.state(basis)?)?);
    }
    out["n"] = json!(p.n);
    out["jz"] = json!(p.jz);
    out["d"] = json!(p.d);
    out["energy"] = json!(gs.energy);
    print_object(&out, p.json)
}

fn lrbound(args: &LrArgs) -> anyhow::Result<()> {
    let mut w = BellWeights::maximizing(args.n, 0.0);
    w.f1_mag = args.f1;
    w.f2_mag = args.f2;
    if let Some(t) = args.theta1 {
        w.theta1 = t;
    }
    if let Some(t) = args.theta2 {
        w.theta2 = t;
    }
    if let Some(c) = &args.c {
        w.c = c.clone();
    }
    let bound = match args.method.as_str() {
        "dp" => spinbell::lrbound::lr_bound_dp(args.n, &w)?,
        "brute" => lr_bound_bruteforce(args.n, &w)?,
        "literal" => lr_bound_literal(args.n, &w)?,
        m => bail!("unknown method '{m}' (dp, brute or literal)"),
    };
    println!("{bound:.16e}");
    Ok(())
}

fn run_sweep(args: &GridArgs, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = args.config(path)?;
    let records = sweep::run_sweep(&cfg)?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if cfg.csv.is_none() && cfg.jsonl.is_none() {
        write_csv(std::io::stdout().lock(), &records)?;
    } else {
        sweep::emit(&cfg, &records)?;
    }
    if failed > 0 {
        eprintln!("{failed} of {} points failed; see the status column", records.len());
    }
    Ok(())
}

fn table1(args: &Table1Args, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = args.grid.config(path)?;
    let rows = match &args.f_ratios {
        None => sweep::table1(&cfg)?,
        Some(fs) => {
            if fs.len() != cfg.n_values.len() {
                bail!("--f-ratios needs one value per N ({} given, {} N)", fs.len(), cfg.n_values.len());
            }
            cfg.n_values
                .iter()
                .zip(fs)
                .map(|(&n, &f)| {
                    let (b, ratio) = psi_max_ratio(n, f, &cfg.ratio_scan())?;
                    Ok(Table1Row {
                        n,
                        jz: f64::NAN,
                        d_star: f64::NAN,
                        f_ratio: f,
                        b,
                        ratio,
                        ground_state_ratio: f64::NAN,
                    })
                })
                .collect::<spinbell::Result<Vec<_>>>()?
        }
    };
    match &cfg.csv {
        Some(p) => write_table1(std::fs::File::create(p)?, &rows)?,
        None => write_table1(std::io::stdout().lock(), &rows)?,
    }
    if let Some(p) = &cfg.jsonl {
        let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
        for r in &rows {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn scaling(args: &ScalingArgs, path: &Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = args.grid.config(path)?;
    let report = sweep::scaling(&cfg)?;
    if let Some(p) = &cfg.jsonl {
        let records: Vec<_> = report.points.iter().map(|c| c.record.clone()).collect();
        write_jsonl(std::io::BufWriter::new(std::fs::File::create(p)?), &records)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!("{:>4} {:>10} {:>10} {:>10}", "n", "d_star", "f_ratio", "ratio");
    for c in &report.points {
        let f = c.record.f_ratio.map_or("-".into(), |f| format!("{f:.4}"));
        println!("{:>4} {:>10.4} {:>10} {:>10.5}", c.n, c.d_star, f, c.ratio);
    }
    println!(
        "gamma = {:.5}  ln A = {:.5}  rms ln residual = {:.2e}",
        report.gamma, report.log_prefactor, report.rms_log_residual
    );
    Ok(())
}

fn print_object(v: &serde_json::Value, as_json: bool) -> anyhow::Result<()> {
    if as_json {
        println!("{}", serde_json::to_string(v)?);
    } else if let Some(map) = v.as_object() {
        for (k, val) in map {
            println!("{k}: {val}");
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Ground(a) => ground(a, &cli.config),
        Command::Bell(a) => bell(a, &cli.config),
        Command::Lrbound(a) => lrbound(a),
        Command::Sweep(a) => run_sweep(a, &cli.config),
        Command::Table1(a) => table1(a, &cli.config),
        Command::Scaling(a) => scaling(a, &cli.config),
    }
}
