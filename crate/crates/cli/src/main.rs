mod json;

use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use cartan_core::classify::{non_unitary_normal_check, spectrum_normal};
use cartan_core::fixed_points::{common_eigen_fixed_points, detect_generic, enumerate_generic, FixedPointReport};
use cartan_core::generate::{generate, GenKind};
use cartan_core::spectral::{rank_of_c, verify_decomposition};
use cartan_core::{
    act, caratheodory_distance, classify, decompose, factorize, verify_relations, ComplexMatrix, Contraction, Error,
    GIsometryJson, ToleranceConfig,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cartan", version, about = "Isometries of the complex matrix unit ball")]
struct Cli {
    /// Equality tolerance used by every numerical test.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Refuse to enumerate more than 2^max-k fixed points.
    #[arg(long, global = true, default_value_t = 20)]
    max_k: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pretty,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an isometry of the given kind (random, normal, unitary, selfadjoint).
    Gen {
        kind: GenKind,
        m: usize,
        n: usize,
        /// Operator norm of the contraction A.
        #[arg(long, default_value_t = 0.8)]
        target_norm: f64,
    },
    /// Classify an isometry.
    Classify { input: PathBuf },
    /// Spectral data of the positive parts, plus the labeled spectrum for normal input.
    Spectrum { input: PathBuf },
    /// Generic fixed points and the eigenvector-based detection report.
    Fixpoints { input: PathBuf },
    /// Carathéodory distance between two points of the open ball.
    Distance { a1: PathBuf, a2: PathBuf },
    /// Image of a point of the closed ball.
    Act { t: PathBuf, a: PathBuf },
    /// Residuals of the six group relations.
    Verify { input: PathBuf },
}

enum Failure {
    Core(Error),
    Parse(String),
    KTooLarge { k: usize, max_k: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::KTooLarge { .. } => 4,
            Failure::Core(e) => match e {
                Error::NonFinite
                | Error::InvalidShape { .. }
                | Error::DimensionMismatch(_)
                | Error::NotStrictContraction { .. }
                | Error::NotContraction { .. }
                | Error::SquareDims(_) => 2,
                Error::NotAMember(_) => 3,
                Error::InternalInconsistency(_)
                | Error::SpectrumMismatch { .. }
                | Error::StructureResidual { .. }
                | Error::IllConditionedEigenbasis { .. }
                | Error::InconsistentPair { .. }
                | Error::DegenerateBlockGauge { .. } => 5,
                _ => 1,
            },
        }
    }

    fn report(&self) -> Value {
        match self {
            Failure::Parse(msg) => json!({"error": "ParseError", "message": msg}),
            Failure::KTooLarge { k, max_k } => json!({
                "error": "KTooLarge",
                "message": format!("k = {k} exceeds --max-k {max_k}"),
            }),
            Failure::Core(Error::NotAMember(report)) => json!({
                "error": "NotAMember",
                "message": Error::NotAMember(report.clone()).to_string(),
                "residuals": report.residuals,
            }),
            Failure::Core(e) => {
                let name = format!("{e:?}");
                let name = name.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
                json!({"error": name, "message": e.to_string()})
            }
        }
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn read_input(path: &PathBuf) -> std::result::Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Parse(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }
}

fn parse<T: serde::de::DeserializeOwned>(path: &PathBuf) -> std::result::Result<T, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Parse(format!("--tol must be positive, got {}", cli.tol)));
    }
    let tol = ToleranceConfig::with_eq_tol(cli.tol);
    match &cli.command {
        Command::Gen {
            kind,
            m,
            n,
            target_norm,
        } => {
            let t = generate(*kind, *m, *n, cli.seed, *target_norm, &tol)?;
            Ok(to_value(&t.to_json()))
        }
        Command::Classify { input } => {
            let t = parse::<GIsometryJson>(input)?.verify(&tol)?;
            Ok(to_value(&classify(&t, &tol)?))
        }
        Command::Spectrum { input } => {
            let t = parse::<GIsometryJson>(input)?.verify(&tol)?;
            let f = factorize(&t, &tol)?;
            let s = decompose(&f, &tol)?;
            let mut out = to_value(&s);
            out["residuals"] = to_value(&verify_decomposition(&f, &s).residuals);
            let nun = non_unitary_normal_check(&t, &tol)?;
            out["normal_spectrum"] = if nun.is_non_unitary_normal {
                to_value(&spectrum_normal(&t, &tol)?)
            } else {
                Value::Null
            };
            Ok(out)
        }
        Command::Fixpoints { input } => {
            let t = parse::<GIsometryJson>(input)?.verify(&tol)?;
            let k = rank_of_c(&factorize(&t, &tol)?, &tol)?;
            if k > cli.max_k {
                return Err(Failure::KTooLarge { k, max_k: cli.max_k });
            }
            let detection = detect_generic(&t, &tol)?;
            let nun = k >= 1 && non_unitary_normal_check(&t, &tol)?.is_non_unitary_normal;
            let (points, common) = if nun {
                let common: Vec<Value> = common_eigen_fixed_points(&t, &tol)?
                    .into_iter()
                    .map(|p| json!({"mu": [p.mu.re, p.mu.im], "F": to_value(&p.f), "residual": p.residual}))
                    .collect();
                (enumerate_generic(&t, &tol)?, common)
            } else {
                (Vec::new(), Vec::new())
            };
            let report = FixedPointReport {
                k,
                count: if nun { points.len() } else { detection.count },
                points,
            };
            let mut out = to_value(&report);
            out["detection"] = to_value(&detection);
            out["common_eigen"] = Value::Array(common);
            Ok(out)
        }
        Command::Distance { a1, a2 } => {
            let a1 = Contraction::open(parse::<ComplexMatrix>(a1)?, &tol)?;
            let a2 = Contraction::open(parse::<ComplexMatrix>(a2)?, &tol)?;
            Ok(json!({"distance": caratheodory_distance(&a1, &a2, &tol)?}))
        }
        Command::Act { t, a } => {
            let t = parse::<GIsometryJson>(t)?.verify(&tol)?;
            let a = Contraction::closed(parse::<ComplexMatrix>(a)?, &tol)?;
            Ok(to_value(act(&t, &a, &tol)?.matrix()))
        }
        Command::Verify { input } => {
            let raw = parse::<GIsometryJson>(input)?;
            let report = verify_relations(&raw.matrix, raw.m, raw.n)?;
            Ok(json!({
                "member": report.is_member(&tol),
                "max_residual": report.max_residual(),
                "residuals": report.residuals,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = matches!(cli.output, Format::Pretty);
    match run(&cli) {
        Ok(v) => {
            println!("{}", json::to_canonical(&v, pretty));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", json::to_canonical(&f.report(), pretty));
            ExitCode::from(f.exit_code())
        }
    }
}
