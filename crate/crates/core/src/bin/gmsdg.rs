use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmsfem_dg::experiments::{self, ExperimentConfig};
use gmsfem_dg::spectral::Method;
use gmsfem_dg::Result;

#[derive(Parser)]
#[command(
    name = "gmsdg",
    version,
    about = "Spectral multiscale coarse spaces with interior penalty DG"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; defaults are used when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long, global = true, env = "GMSDG_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Single contrast replacing coefficient.eta
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Comma separated, e.g. 0,2,4
    #[arg(long = "l-add", global = true, value_delimiter = ',')]
    l_add: Option<Vec<usize>>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Error table over L_add
    Table,
    /// Coarse penalty scaling study
    PenaltySweep,
    /// Total error against 1/lambda_min
    LambdaPlot,
    /// Fine and coarse solutions written as text dumps
    Solve,
    /// Write the coarse basis for offline reuse
    DumpBasis,
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = c.method {
        cfg.solver.method = m;
        if cfg.solver.snapshot_mass.is_some_and(|s| s.method() != m) {
            cfg.solver.snapshot_mass = None;
        }
    }
    if let Some(eta) = c.eta {
        cfg.coefficient.eta = Some(vec![eta]);
    }
    if let Some(l) = &c.l_add {
        cfg.solver.l_add = l.clone();
    }
    if let Some(d) = c.delta {
        cfg.solver.delta = d;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load(&cli.common)?;
    let dir = cfg.output.dir.clone();
    match cli.command {
        Command::Table => {
            for t in experiments::run_table(&cfg)? {
                println!(
                    "method {} {} (assemble {:.2?}, fine {:.2?}, eigen {:.2?}, coarse {:.2?})",
                    t.method,
                    t.label,
                    t.timings.assemble,
                    t.timings.fine_solve,
                    t.timings.eigen,
                    t.timings.coarse
                );
                println!(
                    "{:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}",
                    "L_add", "dim", "interface", "interior", "total", "sqrt(total)", "lambda_min"
                );
                for r in &t.rows {
                    let e = &r.report;
                    println!(
                        "{:>5} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12}",
                        r.l_add,
                        r.dim,
                        e.interface,
                        e.interior,
                        e.total,
                        e.total_norm(),
                        e.lambda_min.map_or("-".into(), |l| format!("{l:.4e}"))
                    );
                }
                report(&experiments::write_table(&cfg, &t, &dir)?);
            }
        }
        Command::PenaltySweep => {
            for s in experiments::run_penalty_sweep(&cfg)? {
                report(&experiments::write_sweep(&cfg, &s, &dir)?);
            }
        }
        Command::LambdaPlot => {
            let curves = experiments::run_lambda_plot(&cfg)?;
            for c in &curves {
                match c.correlation {
                    Some(r) => println!("{}: pearson(total, 1/lambda_min) = {r:.4}", c.label),
                    None => println!("{}: correlation undefined", c.label),
                }
            }
            report(&experiments::write_lambda_plot(&cfg, &curves, &dir)?);
        }
        Command::Solve => {
            for &l in &cfg.solver.l_add {
                let out = experiments::run_solve(&cfg, l)?;
                println!(
                    "L_add {l}: dim {}, total {:.4e} (relative {:.4e}), energy {:.4e}",
                    out.coarse.dim(),
                    out.report.total,
                    out.report.relative,
                    out.report.energy
                );
                report(&experiments::write_solutions(&cfg, &out, &dir)?);
            }
        }
        Command::DumpBasis => {
            for &l in &cfg.solver.l_add {
                report(&[experiments::run_dump_basis(&cfg, l, &dir)?]);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
