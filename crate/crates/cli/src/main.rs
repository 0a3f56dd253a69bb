use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pgbeam::harness::{self, ConvergeQuantity, ExperimentConfig};

#[derive(Parser)]
#[command(name = "pgbeam", about = "Gaussian beam superposition engine and convergence harness", version)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full sweep: beams, assembly, references, rate fits, verdicts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Single-quantity convergence sweep.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Quadratic-phase caustic benchmark with its closed-form identity.
    CausticDemo {
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Dump the Eulerian phase-space fields as CSV.
    FieldsDump {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Quantity {
    Total,
    Residual,
    Initial,
    EulerianVsLagrangian,
}

impl From<Quantity> for ConvergeQuantity {
    fn from(q: Quantity) -> Self {
        match q {
            Quantity::Total => ConvergeQuantity::Total,
            Quantity::Residual => ConvergeQuantity::Residual,
            Quantity::Initial => ConvergeQuantity::Initial,
            Quantity::EulerianVsLagrangian => ConvergeQuantity::EulerianVsLagrangian,
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn print_report(report: &harness::RateReport) {
    println!("quantity: {} (k = {}, n = {})", report.quantity, report.k, report.n);
    println!("{:>12} {:>14} {:>14} {:>14}", "eps", "err_total", "err_init", "resid_l2");
    for r in &report.rows {
        println!(
            "{:>12.6} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.eps, r.err_total, r.err_init, r.resid_l2
        );
    }
    for (name, fit) in &report.slopes {
        println!("slope[{name}] = {:.4} (stderr {:.4})", fit.slope, fit.stderr);
    }
    for v in &report.verdicts {
        println!(
            "[{}] {}: measured {:.4} vs threshold {:.4}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.measured,
            v.threshold
        );
    }
    if !report.errors_monotone {
        println!("warning: errors are not monotone in eps");
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let report = harness::run(&cfg)?;
            harness::emit(&report, &out)?;
            print_report(&report);
            println!("wrote {}", out.join("report.json").display());
        }
        Command::Converge { config, quantity, out } => {
            let cfg = load_config(&config)?;
            let report = harness::converge(&cfg, quantity.into())?;
            harness::emit(&report, &out)?;
            print_report(&report);
            println!("wrote {}", out.join("report.json").display());
        }
        Command::CausticDemo { eps, beta } => {
            let demo = harness::caustic_demo(eps, beta)?;
            println!("{}", serde_json::to_string_pretty(&demo)?);
            let ok = demo.rel_l2_vs_closed_form <= 1e-3 && demo.identity_rel_err <= 0.01;
            println!("[{}] caustic identity", if ok { "PASS" } else { "FAIL" });
        }
        Command::FieldsDump { config, out } => {
            let cfg = load_config(&config)?;
            harness::dump_fields(&cfg, &out)?;
            println!("wrote {}", out.join("fields.csv").display());
        }
    }
    Ok(())
}
