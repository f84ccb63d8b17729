//! `alphaport`: analyses of one-ports built from identical power-law and
//! quasi-polynomial conductors.

mod commands;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::format::Format;

/// Exit status for malformed input or usage.
const EXIT_USAGE: u8 = 1;
/// Exit status for numerical solver failures.
const EXIT_SOLVER: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "alphaport", version)]
#[command(about = "Input characteristics, superposition errors and alpha-tests of nonlinear one-ports")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Print run metadata (version, timestamp) to standard error
    #[arg(long, global = true)]
    meta: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CircuitArgs {
    /// Built-in circuit: fig_a1, fig3, fig4, ladder, fig_b1
    #[arg(long, conflicts_with = "netlist")]
    pub canonical: Option<String>,

    /// Netlist file (`-` reads standard input)
    #[arg(long)]
    pub netlist: Option<PathBuf>,

    /// Ladder sections
    #[arg(long)]
    pub sections: Option<usize>,

    /// Add the direct a-b conductor to the ladder
    #[arg(long)]
    pub central: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact DC solution at one input voltage
    Analyze {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Characteristic `D:alpha,...`; defaults to the netlist's `.f`
        #[arg(long = "f")]
        f: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        vin: f64,
    },
    /// Power-law realizations: phi(alpha) and the ratios d_k
    AlphaTest {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, conflicts_with = "alphas")]
        alpha: Option<f64>,
        /// Comma-separated exponents
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Exact F against the superposition G at one input voltage
    Superpose {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Characteristic `D:alpha,...`; defaults to the netlist's `.f`
        #[arg(long = "f")]
        f: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        vin: f64,
    },
    /// Infinite-ladder fixed point lambda(alpha) and phi(alpha)
    Ladder {
        #[arg(long, conflicts_with = "alphas")]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Add the direct a-b conductor
        #[arg(long)]
        central: bool,
        /// Also solve the ladder truncated after this many sections
        #[arg(long)]
        sections: Option<usize>,
    },
    /// Resistive (v = f(i)) mesh solution with a current source
    Mesh {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Resistive characteristic `D:alpha,...`
        #[arg(long = "f", conflicts_with = "alpha")]
        f: Option<String>,
        /// Shorthand for `--f 1:ALPHA`
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        iin: f64,
    },
    /// Tables over an exponent grid, a drive grid, or the precision table
    Sweep {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Characteristic `D:alpha,...`; defaults to the netlist's `.f`
        #[arg(long = "f")]
        f: Option<String>,
        /// Comma-separated exponents
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["vins", "table1"])]
        alphas: Option<Vec<f64>>,
        /// Comma-separated input voltages
        #[arg(long, value_delimiter = ',', conflicts_with = "table1")]
        vins: Option<Vec<f64>>,
        /// Superposition errors of the bridge and the long ladder with and
        /// without its central conductor
        #[arg(long)]
        table1: bool,
    },
}

fn run(cli: &Cli) -> commands::Result<format::Output> {
    match &cli.command {
        Command::Analyze { circuit, f, vin } => commands::analyze(circuit, f.as_deref(), *vin),
        Command::AlphaTest {
            circuit,
            alpha,
            alphas,
        } => commands::alpha_test(circuit, &commands::grid(*alpha, alphas.as_deref(), "alpha")?),
        Command::Superpose { circuit, f, vin } => commands::superpose(circuit, f.as_deref(), *vin),
        Command::Ladder {
            alpha,
            alphas,
            central,
            sections,
        } => commands::ladder(
            &commands::grid(*alpha, alphas.as_deref(), "alpha")?,
            *central,
            *sections,
        ),
        Command::Mesh {
            circuit,
            f,
            alpha,
            iin,
        } => commands::mesh(circuit, f.as_deref(), *alpha, *iin),
        Command::Sweep {
            circuit,
            f,
            alphas,
            vins,
            table1,
        } => {
            if *table1 {
                commands::table1()
            } else if let Some(alphas) = alphas {
                commands::sweep_alphas(circuit, &commands::grid(None, Some(alphas), "alpha")?)
            } else if let Some(vins) = vins {
                commands::sweep_vins(circuit, f.as_deref(), &commands::grid(None, Some(vins), "v_in")?)
            } else {
                Err(commands::CliError::Usage(
                    "sweep needs one of --alphas, --vins or --table1".into(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if cli.meta {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        eprintln!(
            "alphaport {} unix_time={secs}",
            env!("CARGO_PKG_VERSION")
        );
    }
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.render(cli.format).as_bytes()).is_err() {
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_SOLVER)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
