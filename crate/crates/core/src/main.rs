use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sglab::dsl::{EXPERIMENT_I, EXPERIMENT_II, EXPERIMENT_III};
use sglab::prover::{search, verify_paper_assignment, ConstraintSet, Field};
use sglab::spin::Sign;
use sglab::{parse_script, render_report, run_pipeline, sample_shots, Format};

const EXIT_RUNTIME: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "sglab", version, about = "Tandem Stern-Gerlach simulator and amplitude feasibility prover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment script.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        /// Sample this many particles instead of computing exact intensities.
        #[arg(long)]
        shots: Option<u64>,
        /// Seed for sampling; overrides the script's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search for amplitude assignments consistent with all three experiments.
    Prove {
        #[arg(long, value_enum)]
        field: FieldArg,
        /// Phase grid; defaults to 2 for real and 8 for complex.
        #[arg(long, value_parser = ["2", "4", "8"])]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
    },
    /// Check the conventional complex assignment and the three experiments.
    VerifyPaper,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            format,
            shots,
            seed,
        } => run(&file, format.into(), shots, seed),
        Command::Prove {
            field,
            grid,
            format,
        } => prove(field, grid, format.into()),
        Command::VerifyPaper => verify_paper(),
    }
}

fn run(file: &PathBuf, format: Format, shots: Option<u64>, seed: Option<u64>) -> ExitCode {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let script = match parse_script(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}:{e}", file.display());
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let shots = shots.or(script.shots);
    let seed = seed.or(script.seed);
    let rendered = match (shots, seed) {
        (None, _) => run_pipeline(&script).map(|r| render_report(&r, format)),
        (Some(n), Some(seed)) => sample_shots(&script, n, seed).map(|r| render_report(&r, format)),
        (Some(_), None) => {
            eprintln!("error: sampling requires an explicit seed (--seed or 'detect shots N seed S')");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    match rendered {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn prove(field: FieldArg, grid: Option<String>, format: Format) -> ExitCode {
    let field = match field {
        FieldArg::Real => Field::Real,
        FieldArg::Complex => Field::Complex,
    };
    let grid = match grid {
        Some(g) => g.parse().expect("clap restricts grid values"),
        None if field == Field::Real => 2,
        None => 8,
    };
    match ConstraintSet::new(field, grid) {
        Ok(c) => {
            print!("{}", render_report(&search(&c), format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn verify_paper() -> ExitCode {
    let mut ok = true;

    let check = verify_paper_assignment();
    println!("conventional assignment: {}", if check.passed() { "PASS" } else { "FAIL" });
    if !check.passed() {
        print!("{}", render_report(&check, Format::Table));
        ok = false;
    }

    for (name, text) in [("I", EXPERIMENT_I), ("II", EXPERIMENT_II), ("III", EXPERIMENT_III)] {
        let report = parse_script(text)
            .map_err(|e| e.to_string())
            .and_then(|s| run_pipeline(&s).map_err(|e| e.to_string()));
        match report {
            Ok(r) => {
                let pass = Sign::BOTH
                    .iter()
                    .all(|&s| (r.detector.get(s) - 0.5).abs() <= 1e-12);
                println!(
                    "experiment {name}: {:.6} / {:.6} {}",
                    r.detector.plus,
                    r.detector.minus,
                    if pass { "PASS" } else { "FAIL" }
                );
                ok &= pass;
            }
            Err(e) => {
                println!("experiment {name}: error {e}");
                ok = false;
            }
        }
    }

    let verdict = search(&ConstraintSet::new(Field::Complex, 8).expect("grid 8 is supported"));
    println!(
        "complex search (grid 8): {} ({} witnesses over {} pairs)",
        if verdict.feasible { "feasible" } else { "INFEASIBLE" },
        verdict.witness_count,
        verdict.search_size
    );
    if !verdict.feasible {
        return ExitCode::from(EXIT_INFEASIBLE);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUNTIME)
    }
}
