use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use geokow_cli::config::{RawConfig, RunConfig};
use geokow_cli::report::{Report, SuiteOutput};
use geokow_cli::suites::{self, AB_CHOICES};

#[derive(Parser, Debug)]
#[command(
    name = "geokow",
    version,
    about = "Verification suites for pencils of conics, Kowalevski-type systems and the two-valued coset group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Pencil polynomials, discriminant separation and the Jacobi identity for one pencil.
    Pencil,
    /// Discriminant separation over random pencils and the special families.
    Sep,
    /// Integrals along the flow; with --ab a single system and its trajectory.
    Dyn,
    /// Kötter identity, P_i constants and the Kowalevski change of variables.
    Kotter,
    /// Two-valued coset group laws and the pencil action.
    Group,
    /// Poncelet closure for group-compatible conics.
    Poncelet,
    /// All suites.
    VerifyAll,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Pencil => "pencil",
            Command::Sep => "sep",
            Command::Dyn => "dyn",
            Command::Kotter => "kotter",
            Command::Group => "group",
            Command::Poncelet => "poncelet",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Global {
    /// Pencil coefficients a0,a1,a2,a3,a4,a5 (integers or p/q).
    #[arg(long, global = true, allow_hyphen_values = true)]
    spec: Option<String>,
    /// Kowalevski parameters l1,l,c,k.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kowalevski: Option<String>,
    /// Choice of (alpha, beta).
    #[arg(long, global = true, value_parser = ["kowalevski", "A", "B", "C"])]
    ab: Option<String>,
    /// Elastic deformation parameter.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tau: Option<i8>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Sample count overriding each suite's default.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Time horizon.
    #[arg(long = "T", global = true, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    atol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Group: only the associativity checks.
    #[arg(long, global = true)]
    assoc: bool,
    /// Group: number of associativity triples.
    #[arg(long, global = true)]
    triples: Option<usize>,
    /// Run sample batches on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

const EXIT_CONFIG: u8 = 2;

fn run(cmd: Command, cfg: &RunConfig) -> (SuiteOutput, Vec<Vec<f64>>) {
    let mut out = SuiteOutput::default();
    let mut rows = Vec::new();
    match cmd {
        Command::Pencil => {
            let spec = cfg.pencil.as_ref().expect("checked before dispatch");
            out.extend(suites::pencil_suite(cfg, spec));
            if cfg.kowalevski.is_some() {
                out.extend(suites::kowalevski_dictionary_suite());
            }
        }
        Command::Sep => {
            out.extend(suites::separation_suite(cfg));
            out.extend(suites::families_exact_suite(cfg));
        }
        Command::Dyn => match cfg.ab.as_deref() {
            Some(ab) => {
                out.extend(suites::conservation_suite(cfg, &[ab]));
                let (o, r) = suites::trajectory_suite(cfg, ab, 50);
                out.extend(o);
                rows = r;
            }
            None => {
                out.extend(suites::conservation_suite(cfg, &AB_CHOICES));
                out.extend(suites::family_conservation_suite(cfg));
                out.extend(suites::measure_suite(cfg));
            }
        },
        Command::Kotter => {
            out.extend(suites::kotter_suite(cfg));
            out.extend(suites::kowalevski_change_suite(cfg));
        }
        Command::Group => {
            out.extend(suites::group_suite(cfg));
            if !cfg.assoc {
                out.extend(suites::action_suite(cfg));
            }
        }
        Command::Poncelet => out.extend(suites::poncelet_suite(cfg)),
        Command::VerifyAll => out.extend(suites::verify_all(cfg)),
    }
    (out, rows)
}

fn csv(rows: &[Vec<f64>]) -> String {
    let mut s = suites::trajectory_columns().join(",");
    s.push('\n');
    for r in rows {
        s.push_str(
            &r.iter()
                .map(|v| format!("{v:e}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
    }
    s
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GEOKOW_LOG", "warn")).init();
    let cli = Cli::parse();
    let g = cli.global;
    let raw = RawConfig {
        spec: g.spec,
        kowalevski: g.kowalevski,
        ab: g.ab,
        tau: g.tau,
        seed: g.seed,
        samples: g.samples,
        t_end: g.t_end,
        rtol: g.rtol,
        atol: g.atol,
        assoc: g.assoc,
        triples: g.triples,
        sequential: g.sequential,
    };
    let cfg = match raw.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cli.command == Command::Pencil && cfg.pencil.is_none() {
        eprintln!("error: pencil requires --spec or --kowalevski");
        return ExitCode::from(EXIT_CONFIG);
    }
    if g.format == Format::Csv && !(cli.command == Command::Dyn && cfg.ab.is_some()) {
        eprintln!("error: --format csv is only available for dyn with --ab");
        return ExitCode::from(EXIT_CONFIG);
    }

    info!("running {} with seed {}", cli.command.name(), cfg.seed);
    let start = Instant::now();
    let (out, rows) = run(cli.command, &cfg);
    let report = Report::new(cli.command.name(), cfg, out, start.elapsed().as_secs_f64());
    for c in report.checks.iter().filter(|c| !c.passed()) {
        info!("{}: {:?}", c.name, c.verdict);
    }
    let text = match g.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => csv(&rows),
    };
    if let Err(e) = emit(&text, &g.out) {
        error!("cannot write report: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::from(report.exit_code() as u8)
}
