use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{One, Zero};

use factoric::formats::{self, ParseError, ParsedModel};
use factoric_core::constructions::{pairs_model, prop10_binomial, verify_kernel_membership, ConstructionsError};
use factoric_core::dist::{classify, normalize, recover_parameters, Distribution, RecoveryOutcome};
use factoric_core::fiber::{random_walk, WalkConfig};
use factoric_core::ideal::{
    render_binomial, render_histogram, toric_markov_basis_budgeted, Budget, IdealBasis, IdealError,
};
use factoric_core::indep::{cpd, cpr, pairwise_ideal, IndepError};
use factoric_core::model::{ModelMatrix, StateSpace};

#[derive(Parser)]
#[command(
    name = "factoric",
    version,
    about = "Exact factorization tests for log-linear and graphical models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Markov basis (minimal toric generators) of a model
    MarkovBasis {
        model: PathBuf,
        /// Wall-clock limit in seconds; prints TRUNCATED and exits 2 when hit
        #[arg(long)]
        budget: Option<u64>,
        /// Degree limit for Groebner pairs; prints TRUNCATED and exits 2 when hit
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Print the pairwise conditional-independence ideal of a graph model
    Pairwise { model: PathBuf },
    /// Decide whether a distribution factors over a model
    Classify {
        model: PathBuf,
        dist: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Recover exponential-family parameters from a distribution
    Recover {
        model: PathBuf,
        dist: PathBuf,
        /// Relative tolerance for the exact re-verification
        #[arg(long)]
        tol: f64,
    },
    /// Evaluate one cross-product difference and ratio exactly
    Cpr {
        model: PathBuf,
        dist: PathBuf,
        /// `X=<vars>:<s>|<s'>;Y=<vars>:<s>|<s'>;Z=<vars>:<s>`; omit Z for none
        #[arg(long)]
        spec: String,
    },
    /// Random-walk a contingency table along Markov-basis moves
    Walk {
        model: PathBuf,
        table: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Emit the model file of the n-pairs family
    PairsModel { n: usize },
    /// Print the degree-2^n kernel binomial of the n-pairs model
    Prop10 { n: usize },
    /// Check whether a binomial lies in the kernel of a model matrix
    Kernel { model: PathBuf, binomial: String },
}

enum Failure {
    /// Bad input; exit 1.
    Domain(String),
    /// Incomplete basis; prints TRUNCATED and exits 2.
    Truncated(String),
    /// Other resource limits; exit 2.
    Resource(String),
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ParseError) -> Failure {
    match e.line {
        Some(line) => Failure::Domain(format!("{}:{line}: {}", path.display(), e.message)),
        None => Failure::Domain(format!("{}: {}", path.display(), e.message)),
    }
}

fn load_model(path: &Path) -> Result<ParsedModel, Failure> {
    formats::parse_model(&read_file(path)?).map_err(|e| located(path, e))
}

fn load_distribution(path: &Path, space: &StateSpace) -> Result<Distribution, Failure> {
    let values = formats::parse_distribution(&read_file(path)?, space)
        .map_err(|e| located(path, e))?;
    let sum: BigRational = values.iter().sum();
    if !sum.is_one() {
        eprintln!(
            "warning: {}: probabilities sum to {sum}, normalizing",
            path.display()
        );
    }
    normalize(space, &values)
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn budget_from(seconds: Option<u64>, max_degree: Option<u32>) -> Budget {
    let mut budget = Budget::unlimited();
    if let Some(limit) = max_degree {
        budget = budget.with_max_degree(limit);
    }
    if let Some(secs) = seconds {
        let deadline = Instant::now() + Duration::from_secs(secs);
        budget = budget.with_stop(Box::new(move || Instant::now() >= deadline));
    }
    budget
}

fn basis_within(matrix: &ModelMatrix, budget: &Budget) -> Result<IdealBasis, Failure> {
    toric_markov_basis_budgeted(matrix, budget).map_err(|e| match e {
        IdealError::Truncated(_) => Failure::Truncated(format!("{e}")),
        other => Failure::Domain(format!("{other}")),
    })
}

fn print_basis(space: &StateSpace, basis: &IdealBasis) {
    for b in basis.binomials() {
        let line = render_binomial(space, b).expect("basis is over this space");
        println!("{line}");
    }
    println!("{}", render_histogram(&basis.degree_histogram()));
}

fn construction_failure(e: ConstructionsError) -> Failure {
    match e {
        ConstructionsError::TooManyStates { .. } => Failure::Resource(format!("{e}")),
        other => Failure::Domain(format!("{other}")),
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::MarkovBasis {
            model,
            budget,
            max_degree,
        } => {
            let model = load_model(&model)?;
            let basis = basis_within(&model.matrix(), &budget_from(budget, max_degree))?;
            print_basis(&model.space, &basis);
            Ok(0)
        }
        Command::Pairwise { model } => {
            let model = load_model(&model)?;
            let graph = model.graph().ok_or_else(|| {
                Failure::Domain(String::from(
                    "the pairwise ideal needs a graph model (edge declarations)",
                ))
            })?;
            let basis = pairwise_ideal(graph, &model.space)
                .map_err(|e| Failure::Domain(format!("{e}")))?;
            print_basis(&model.space, &basis);
            Ok(0)
        }
        Command::Classify {
            model,
            dist,
            budget,
            max_degree,
        } => {
            let model = load_model(&model)?;
            let p = load_distribution(&dist, &model.space)?;
            let matrix = model.matrix();
            let basis = basis_within(&matrix, &budget_from(budget, max_degree))?;
            let verdict =
                classify(&p, &matrix, &basis).map_err(|e| Failure::Domain(format!("{e}")))?;
            println!("{}", verdict.status());
            let labels: Vec<String> = verdict
                .support()
                .iter()
                .map(|&j| model.space.state_label(j).expect("support indexes states"))
                .collect();
            println!("support = {}", labels.join(" "));
            println!("nice = {}", verdict.is_nice());
            if let Some(witness) = verdict.failing_binomial() {
                let line =
                    render_binomial(&model.space, witness).expect("witness is over this space");
                println!("witness = {line}");
            }
            Ok(0)
        }
        Command::Recover { model, dist, tol } => {
            let model = load_model(&model)?;
            let p = load_distribution(&dist, &model.space)?;
            let matrix = model.matrix();
            let outcome = recover_parameters(&p, &matrix, tol)
                .map_err(|e| Failure::Domain(format!("{e}")))?;
            match outcome {
                RecoveryOutcome::Recovered(t) => {
                    for (label, value) in matrix.row_labels().iter().zip(t.values()) {
                        println!("t[{label}] = {value}");
                    }
                    Ok(0)
                }
                RecoveryOutcome::Failed(failure) => {
                    println!("RECOVERY_FAILED");
                    println!("{failure}");
                    Ok(3)
                }
            }
        }
        Command::Cpr { model, dist, spec } => {
            let model = load_model(&model)?;
            let p = load_distribution(&dist, &model.space)?;
            let (_, spec) = formats::parse_cpr_spec(&spec, &model.space)
                .map_err(|e| Failure::Domain(format!("--spec: {}", e.message)))?;
            let difference = cpd(&p, &spec).map_err(|e| Failure::Domain(format!("{e}")))?;
            println!("cpd = {difference}");
            match cpr(&p, &spec) {
                Ok(ratio) => {
                    println!("cpr = {ratio}");
                    Ok(0)
                }
                Err(IndepError::ZeroDenominator) => Err(Failure::Domain(String::from(
                    "cpr undefined: zero denominator",
                ))),
                Err(e) => Err(Failure::Domain(format!("{e}"))),
            }
        }
        Command::Walk {
            model,
            table,
            steps,
            seed,
            budget,
            max_degree,
        } => {
            let model = load_model(&model)?;
            let n0 = formats::parse_table(&read_file(&table)?, &model.space)
                .map_err(|e| located(&table, e))?;
            let cfg = WalkConfig::new(steps, seed)
                .map_err(|e| Failure::Domain(format!("{e}")))?;
            let basis = basis_within(&model.matrix(), &budget_from(budget, max_degree))?;
            let end = random_walk(&n0, &basis, &cfg)
                .map_err(|e| Failure::Domain(format!("{e}")))?;
            for (j, count) in end.counts().iter().enumerate() {
                if !count.is_zero() {
                    let label = model.space.state_label(j).expect("counts index states");
                    println!("{label} {count}");
                }
            }
            Ok(0)
        }
        Command::PairsModel { n } => {
            let model = pairs_model(n).map_err(construction_failure)?;
            let space = model.space();
            for i in 0..space.num_vars() {
                println!("var {} {}", space.name(i), space.cardinality(i));
            }
            for (u, v) in model.graph().edges() {
                println!("edge {} {}", space.name(u), space.name(v));
            }
            Ok(0)
        }
        Command::Prop10 { n } => {
            let binomial = prop10_binomial(n).map_err(construction_failure)?;
            let names: Vec<String> = (1..=2 * n).map(|k| format!("X{k}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let space = StateSpace::binary(&refs).expect("names are distinct");
            println!("{}", render_binomial(&space, &binomial).expect("sizes match"));
            Ok(0)
        }
        Command::Kernel { model, binomial } => {
            let model = load_model(&model)?;
            let matrix = model.matrix();
            let b = formats::parse_binomial(&binomial, &model.space)
                .map_err(|e| Failure::Domain(format!("binomial: {}", e.message)))?;
            let member =
                verify_kernel_membership(&b, &matrix).expect("binomial is over this space");
            println!("member = {member}");
            Ok(if member { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Domain(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Truncated(message)) => {
            println!("TRUNCATED");
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
