use clap::{Args, Parser, Subcommand};
use nlspde::gate::GateVerdict;
use nlspde::harness::{output_dir, positivity_suite, refinement_suite, run_scenario,
                      ScenarioConfig};
use nlspde::operator::getoor_ball_solution;
use nlspde::solver::duhamel_reference;
use nlspde::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulation and verification toolkit for stochastic heat equations driven
/// by stable nonlocal operators on bounded domains.
#[derive(Parser)]
#[command(name = "nlspde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of sample paths.
    #[arg(long)]
    paths: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::from_file(&self.config)?;
        if let Some(s) = self.seed {
            cfg.run.seed = Some(s);
        }
        if let Some(p) = self.paths {
            cfg.run.n_paths = p;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the parameter gate and print every clause.
    Gate(ConfigArgs),
    /// Run the full gate -> solve -> analyze pipeline.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Proceed past a failing gate (verdict still recorded).
        #[arg(long)]
        override_gate: bool,
        /// Output directory (defaults to $NLSPDE_OUT, then ./runs).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print closed-form and Monte Carlo reference values.
    Oracle {
        /// "getoor" or "duhamel".
        #[arg(long)]
        kind: String,
        #[arg(long)]
        alpha: f64,
        /// Dimension (1 for the interval, 2 for the disk), unit ball.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Probe point coordinates.
        #[arg(long, num_args = 1..=2, value_delimiter = ',', default_value = "0.0")]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the positivity and refinement suites for one scenario.
    Verify(ConfigArgs),
    /// Sweep one gate parameter over a grid and report pass/fail.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Gate parameter to vary: "theta", "gamma", "lambda" or "p".
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
    /// Gate + pipeline + positivity + refinement in one pass.
    Suite {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        override_gate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_verdict(v: &GateVerdict) {
    for c in &v.checks {
        let op = match c.op {
            nlspde::gate::CmpOp::Lt => "<",
            nlspde::gate::CmpOp::Le => "<=",
        };
        println!(
            "{} [{}] {} {} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.lhs,
            op,
            c.rhs
        );
    }
    println!("gate: {}", if v.pass { "PASS" } else { "FAIL" });
}

fn gate_cmd(args: &ConfigArgs) -> Result<()> {
    let cfg = args.load()?;
    match cfg.evaluate_gate()? {
        None => {
            println!("no gate configured");
            Ok(())
        }
        Some(v) => {
            print_verdict(&v);
            if v.pass {
                Ok(())
            } else {
                Err(Error::Gate(
                    v.first_failure().map(|c| c.id.clone()).unwrap_or_default(),
                ))
            }
        }
    }
}

fn oracle_cmd(
    kind: &str,
    alpha: f64,
    dim: usize,
    x: &[f64],
    t: f64,
    paths: usize,
    dt: f64,
    seed: u64,
) -> Result<()> {
    let point = [
        x.first().copied().unwrap_or(0.0),
        x.get(1).copied().unwrap_or(0.0),
    ];
    let dom = if dim == 1 {
        nlspde::geometry::DomainSpec::Interval { a: -1.0, b: 1.0 }
    } else {
        nlspde::geometry::DomainSpec::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    };
    match kind {
        "getoor" => {
            println!("getoor({alpha}, d={dim}, x={point:?}) = {}",
                getoor_ball_solution(alpha, dim, point));
            Ok(())
        }
        "duhamel" => {
            let f = |_: f64, _: nlspde::geometry::Point| 1.0;
            let (v, se) = duhamel_reference(alpha, &dom, &f, t, point, paths, dt, seed);
            println!("duhamel(f=1, t={t}, x={point:?}) = {v} +- {se}");
            println!("getoor steady value          = {}", getoor_ball_solution(alpha, dim, point));
            Ok(())
        }
        other => Err(Error::Config(format!("unknown oracle kind '{other}'"))),
    }
}

fn verify_cmd(args: &ConfigArgs) -> Result<()> {
    let cfg = args.load()?;
    let pos = positivity_suite(&cfg)?;
    println!(
        "positivity: min={} over {} paths -> {}",
        pos.min_value,
        pos.n_paths,
        if pos.pass { "PASS" } else { "FAIL" }
    );
    let refi = refinement_suite(&cfg)?;
    println!(
        "refinement: norms {} vs {} (ratio {}) decay {:?} -> {:?} : {}",
        refi.norm_coarse,
        refi.norm_fine,
        refi.ratio,
        refi.decay_coarse,
        refi.decay_fine,
        if refi.pass_ratio { "PASS" } else { "FAIL" }
    );
    if pos.pass && refi.pass_ratio {
        Ok(())
    } else {
        Err(Error::Numerics("verification suite failed".into()))
    }
}

fn sweep_cmd(args: &ConfigArgs, param: &str, from: f64, to: f64, steps: usize) -> Result<()> {
    let cfg = args.load()?;
    if cfg.gate.is_none() {
        return Err(Error::Config("sweep needs a [gate] section".into()));
    }
    println!("{param},pass");
    for k in 0..steps.max(2) {
        let v = from + (to - from) * k as f64 / (steps.max(2) - 1) as f64;
        let mut c = cfg.clone();
        let g = c.gate.as_mut().unwrap();
        match param {
            "theta" => g.theta = v,
            "gamma" => g.gamma = v,
            "lambda" => g.lambda = v,
            "p" => g.p = v,
            other => return Err(Error::Config(format!("unknown sweep param '{other}'"))),
        }
        let pass = c.evaluate_gate()?.map(|ver| ver.pass).unwrap_or(true);
        println!("{v},{}", u8::from(pass));
    }
    Ok(())
}

fn suite_cmd(args: &ConfigArgs, override_gate: bool, out: Option<PathBuf>) -> Result<()> {
    let cfg = args.load()?;
    let dir = out.unwrap_or_else(output_dir);
    let manifest = run_scenario(&cfg, &dir, override_gate)?;
    println!("scenario: wrote {} outputs (config {})",
        manifest.outputs.len(), &manifest.config_hash[..12]);
    verify_cmd(args)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gate(args) => gate_cmd(&args),
        Command::Solve {
            cfg,
            override_gate,
            out,
        } => {
            let c = cfg.load()?;
            let dir = out.unwrap_or_else(output_dir);
            let m = run_scenario(&c, &dir, override_gate)?;
            for f in &m.outputs {
                println!("wrote {} ({})", f.path, &f.sha256[..12]);
            }
            println!("wall clock: {:.3}s", m.wall_clock_secs);
            Ok(())
        }
        Command::Oracle {
            kind,
            alpha,
            dim,
            x,
            t,
            paths,
            dt,
            seed,
        } => oracle_cmd(&kind, alpha, dim, &x, t, paths, dt, seed),
        Command::Verify(args) => verify_cmd(&args),
        Command::Sweep {
            cfg,
            param,
            from,
            to,
            steps,
        } => sweep_cmd(&cfg, &param, from, to, steps),
        Command::Suite {
            cfg,
            override_gate,
            out,
        } => suite_cmd(&cfg, override_gate, out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::from(0),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Numerics(_) => 1,
                Error::Gate(_) => 2,
                Error::Config(_) => 3,
                Error::Io(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}
