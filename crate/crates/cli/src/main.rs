use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use ringwalk::corpus::{corpus, run_corpus, summary_table};
use ringwalk::experiment::{
    self, build_matrix, compute_spectra, matrix_csv, matrix_dot, parse_spec, reverify, to_json, Artifacts,
    ExperimentSpec, RunError, SpecError, DOT_FILE, MATRIX_FILE, SPECTRUM_CSV_FILE, SPECTRUM_JSON_FILE,
    VERIFICATION_FILE,
};
use ringwalk::spectrum::{SpectralContext, SpectrumPath, GROUPING_TOLERANCE};
use ringwalk::verify::{perturbed, verify_power_sums, DEFAULT_TOLERANCE};

const EXIT_VERIFY: u8 = 1;
const EXIT_SPEC: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "ringwalk", version, about = "Exact spectra of random walks on finite modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SpecArgs {
    /// Experiment spec (JSON); `-` reads stdin.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory. Without one, the main artifact goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Power-sum tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Average P over unit orbits instead of rejecting it.
    #[arg(long)]
    symmetrize: bool,
    /// Comma-separated: general,frobenius,uniform,triple.
    #[arg(long)]
    paths: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the transition matrix as CSV (and DOT when requested).
    Build(SpecArgs),
    /// Write predicted spectra as JSON and grouped CSV.
    Spectrum(SpecArgs),
    /// Build, predict and verify; exit 1 on any failed check.
    Verify {
        #[command(flatten)]
        args: SpecArgs,
        /// Re-verify this spectrum JSON instead of recomputing it.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Run the bundled regression corpus and print a summary table.
    Corpus {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Also write per-case results as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the Z/4 example, then a copy with one eigenvalue moved by 0.01,
    /// which must fail (exit 1).
    Selftest {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
}

enum Failure {
    Spec(Vec<SpecError>),
    Io(String),
    Verify,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn read_spec_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

/// Command-line flags override `options` in the document.
fn load_spec(args: &SpecArgs) -> Result<ExperimentSpec, Failure> {
    let text = read_spec_text(&args.spec)?;
    let mut doc: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => return parse_spec(&text).map_err(Failure::Spec),
    };
    if let Some(obj) = doc.as_object_mut() {
        let opts = obj.entry("options").or_insert_with(|| Value::Object(Default::default()));
        if let Some(opts) = opts.as_object_mut() {
            if let Some(t) = args.tol {
                opts.insert("tol".into(), t.into());
            }
            if args.symmetrize {
                opts.insert("symmetrize".into(), true.into());
            }
            if let Some(p) = &args.paths {
                opts.insert("paths".into(), p.clone().into());
            }
        }
    }
    parse_spec(&doc.to_string()).map_err(Failure::Spec)
}

fn out_dir(args: &SpecArgs, spec: &ExperimentSpec) -> Option<PathBuf> {
    args.out.clone().or_else(|| spec.options.out.clone())
}

fn write_files(dir: &Path, files: &[(&str, &str)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn emit(args: &SpecArgs, spec: &ExperimentSpec, files: &[(&str, &str)]) -> Result<(), Failure> {
    match out_dir(args, spec) {
        Some(dir) => write_files(&dir, files),
        None => {
            io::stdout().write_all(files[0].1.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_build(args: &SpecArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let matrix = build_matrix(&spec);
    let csv = matrix_csv(&matrix, spec.module.labels());
    let dot = spec.options.dot.then(|| matrix_dot(&matrix, spec.module.labels()));
    let mut files = vec![(MATRIX_FILE, csv.as_str())];
    if let Some(d) = &dot {
        files.push((DOT_FILE, d.as_str()));
    }
    emit(args, &spec, &files)
}

fn run_error(e: RunError) -> Failure {
    match e {
        RunError::Io(e) => Failure::Io(e.to_string()),
        other => Failure::Spec(vec![SpecError {
            code: experiment::ErrorCode::InvalidValue,
            path: "$".into(),
            message: other.to_string(),
        }]),
    }
}

fn cmd_spectrum(args: &SpecArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let ctx = SpectralContext::new(&spec.module);
    let spectra = compute_spectra(&spec, &ctx).map_err(|e| run_error(RunError::Spectrum(e)))?;
    let json = to_json(&spectra);
    let csv = experiment::spectrum_csv(&spectra.paths[&SpectrumPath::General]);
    for (path, reason) in &spectra.skipped {
        eprintln!("skipped {} path: {reason}", path.name());
    }
    emit(args, &spec, &[(SPECTRUM_JSON_FILE, &json), (SPECTRUM_CSV_FILE, &csv)])
}

fn cmd_verify(args: &SpecArgs, spectrum: Option<&Path>) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let pass = match spectrum {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let verification = reverify(&spec, &text).map_err(run_error)?;
            emit(args, &spec, &[(VERIFICATION_FILE, &to_json(&verification))])?;
            verification.pass
        }
        None => {
            let art: Artifacts = experiment::run(&spec).map_err(run_error)?;
            let mut files = vec![
                (VERIFICATION_FILE, art.verification_json.as_str()),
                (MATRIX_FILE, art.matrix_csv.as_str()),
                (SPECTRUM_JSON_FILE, art.spectrum_json.as_str()),
                (SPECTRUM_CSV_FILE, art.spectrum_csv.as_str()),
            ];
            if let Some(d) = &art.dot {
                files.push((DOT_FILE, d.as_str()));
            }
            emit(args, &spec, &files)?;
            for (path, v) in &art.verification.paths {
                eprintln!(
                    "{:<10} max residual {:.3e}  {}",
                    path.name(),
                    v.verification.max_residual,
                    if v.verification.pass && v.agrees_with_general != Some(false) { "PASS" } else { "FAIL" }
                );
            }
            art.verification.pass
        }
    };
    eprintln!("{}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn cmd_corpus(tol: f64, out: Option<&Path>) -> Result<(), Failure> {
    let outcomes = run_corpus(&corpus(), tol);
    print!("{}", summary_table(&outcomes));
    if let Some(dir) = out {
        write_files(dir, &[("corpus.json", &to_json(&outcomes))])?;
    }
    if outcomes.iter().all(|o| o.pass()) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

const SELFTEST_SPEC: &str = r#"{"ring":{"zn":4},"module":{"free":1},"walk":{"affine":{}},
    "P":{"weights":["2/5","1/5","1/5","1/5"]},"Q":{"weights":["1/10","3/10","1/5","2/5"]}}"#;

fn cmd_selftest(tol: f64) -> Result<(), Failure> {
    let spec = parse_spec(SELFTEST_SPEC).map_err(Failure::Spec)?;
    let matrix = build_matrix(&spec);
    let ctx = SpectralContext::new(&spec.module);
    let spectra = compute_spectra(&spec, &ctx).map_err(|e| run_error(RunError::Spectrum(e)))?;
    let report = &spectra.paths[&SpectrumPath::General];
    let verify = |r| verify_power_sums(&matrix, r, tol).map_err(|e| run_error(RunError::Verify(e)));
    let honest = verify(report)?;
    println!("Z/4 affine spectrum:");
    for g in report.grouped(GROUPING_TOLERANCE) {
        println!("  {:+.6} {:+.6}i  x{}", g.re, g.im, g.multiplicity);
    }
    println!("unperturbed: max residual {:.3e}  {}", honest.max_residual, if honest.pass { "PASS" } else { "FAIL" });
    let shifted = verify(&perturbed(report, 1, 0.01))?;
    println!(
        "eigenvalue moved by 0.01: max residual {:.3e}  {}",
        shifted.max_residual,
        if shifted.pass { "PASS" } else { "FAIL" }
    );
    if !honest.pass {
        eprintln!("the unperturbed spectrum failed verification");
    }
    if shifted.pass {
        eprintln!("the perturbed spectrum passed verification");
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Verify { args, spectrum } => cmd_verify(args, spectrum.as_deref()),
        Command::Corpus { tol, out } => cmd_corpus(*tol, out.as_deref()),
        Command::Selftest { tol } => cmd_selftest(*tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Spec(errors)) => {
            for e in &errors {
                eprintln!("error: {e}");
            }
            ExitCode::from(EXIT_SPEC)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
