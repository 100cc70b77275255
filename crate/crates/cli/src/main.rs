//! `mvop`: build families, run the verification suites, evolve and bootstrap
//! the closed systems. Exit status 0 when every tolerance holds, 1 when one
//! fails, 2 on errors (with a JSON diagnostic on stderr).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvop_core::report::tol_scale;
use mvop_core::systems::{
    bootstrap_discrete, evolve_from_weight, scalar_piii_residual, uniform_grid, EvolvedState,
    OdeOptions,
};
use mvop_core::{compute_lax, run_suite, MvopFamily, ResidualReport, Suite, Weight, WeightSpec};
use rayon::prelude::*;
use serde_json::json;

const EVOLVE_TOL: f64 = 1e-5;
const BOOTSTRAP_TOL: f64 = 1e-5;
const PIII_TOL: f64 = 1e-3;
const PIII_FIRST_ORDER_TOL: f64 = 1e-6;
const PIII_FIRST_ORDER_H: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "mvop",
    version,
    about = "Matrix-valued orthogonal polynomials for deformed Laguerre weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix moments ∫x^k W dx for k = −1..=kmax as CSV.
    Moments {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        kmax: i64,
    },
    /// Polynomial coefficients, norms and recursion coefficients as JSON.
    Family {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        nmax: usize,
    },
    /// Residual report for one suite over a list of s values.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        nmax: usize,
        /// Comma-separated s values; defaults to the s of the spec.
        #[arg(long, value_delimiter = ',')]
        s_list: Option<Vec<f64>>,
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Writes PREFIX.json and PREFIX.csv.
        #[arg(long, default_value = "mvop-report")]
        out: PathBuf,
    },
    /// Integrates the closed first-order system from s0 to s1.
    Evolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        s1: f64,
        /// Print every accepted step as CSV instead of the JSON summary.
        #[arg(long)]
        dump_trajectory: bool,
    },
    /// Degree recursion from a_0, compared with the moment route.
    Bootstrap {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        nmax: usize,
    },
    /// Scalar Painlevé III residual scan over [s0, s1].
    Piii {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        s1: f64,
        #[arg(long)]
        ds: f64,
    },
    /// A suite over a uniform grid in s, run in parallel.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "s")]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        /// Worker threads; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = "mvop-sweep")]
        out: PathBuf,
    },
}

enum Failure {
    Core(mvop_core::Error),
    Io(String),
}

impl From<mvop_core::Error> for Failure {
    fn from(e: mvop_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Ok(true) when every checked tolerance holds.
type Outcome = Result<bool, Failure>;

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load_spec(path: &Path) -> Result<WeightSpec, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(WeightSpec::from_json(&text)?)
}

fn write_report(report: &ResidualReport, prefix: &Path) -> Result<(), Failure> {
    fs::write(prefix.with_extension("json"), report.to_json())?;
    fs::write(prefix.with_extension("csv"), report.to_csv())?;
    Ok(())
}

fn summarize(report: &ResidualReport, prefix: &Path) {
    let failed = report.failures().count();
    emit(&format!(
        "{} rows, {} failed, report in {} and {}\n",
        report.entries.len(),
        failed,
        prefix.with_extension("json").display(),
        prefix.with_extension("csv").display()
    ));
    for e in report.failures() {
        emit(&format!(
            "FAIL {} {} n={} s={} rel={:.3e} tol={:.1e}\n",
            e.suite, e.identity, e.n, e.s, e.rel_residual, e.tolerance
        ));
    }
    for note in &report.notes {
        emit(&format!("note: {note}\n"));
    }
}

fn moments(spec: &Path, kmax: i64) -> Outcome {
    let w = Weight::new(&load_spec(spec)?)?;
    let mut out = String::from("k,row,col,re,im\n");
    for k in -1..=kmax {
        let m = w.moment(k)?;
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                let z = m.get(i, j);
                out.push_str(&format!("{k},{i},{j},{:.17e},{:.17e}\n", z.re, z.im));
            }
        }
    }
    emit(&out);
    Ok(true)
}

fn family(spec: &Path, nmax: usize) -> Outcome {
    let fam = MvopFamily::new(Weight::new(&load_spec(spec)?)?, nmax)?;
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&fam.dump()).expect("family serializes")
    ));
    Ok(true)
}

fn verify(spec: &Path, nmax: usize, s_list: Option<Vec<f64>>, suite: Suite, out: &Path) -> Outcome {
    let spec = load_spec(spec)?;
    let s_list = s_list.unwrap_or_else(|| vec![spec.s]);
    let report = run_suite(&spec, suite, nmax, &s_list)?;
    write_report(&report, out)?;
    summarize(&report, out);
    Ok(report.all_pass())
}

fn evolve(spec: &Path, n: usize, s0: f64, s1: f64, dump: bool) -> Outcome {
    let w = Weight::new(&load_spec(spec)?)?;
    let tr = evolve_from_weight(&w, n, s0, s1, &OdeOptions::default(), dump)?;
    let reference = EvolvedState::from_lax(&compute_lax(&MvopFamily::new(w.at_s(s1)?, n)?, n)?);
    let deviation = tr.last().max_rel_deviation(&reference);
    let tolerance = EVOLVE_TOL * tol_scale();
    let pass = deviation <= tolerance;
    if dump {
        emit(&tr.to_csv());
    } else {
        let summary = json!({
            "n": n,
            "s0": s0,
            "s1": s1,
            "accepted": tr.accepted,
            "rejected": tr.rejected,
            "final": tr.last(),
            "reference_deviation": deviation,
            "tolerance": tolerance,
            "pass": pass,
        });
        emit(&format!(
            "{}\n",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        ));
    }
    Ok(pass)
}

fn bootstrap(spec: &Path, nmax: usize) -> Outcome {
    let w = Weight::new(&load_spec(spec)?)?;
    let steps = bootstrap_discrete(&w, None, nmax)?;
    let tolerance = BOOTSTRAP_TOL * tol_scale();
    let pass = steps.iter().all(|s| s.deviation <= tolerance);
    let out = json!({ "steps": steps, "tolerance": tolerance, "pass": pass });
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("steps serialize")
    ));
    Ok(pass)
}

fn piii(spec: &Path, n: usize, s0: f64, s1: f64, ds: f64) -> Outcome {
    let w = Weight::new(&load_spec(spec)?)?;
    let scan = scalar_piii_residual(&w, n, &uniform_grid(s0, s1, ds)?, PIII_FIRST_ORDER_H)?;
    let pass = scan.max_piii <= PIII_TOL * tol_scale()
        && scan.max_first_order <= PIII_FIRST_ORDER_TOL * tol_scale();
    let out = json!({ "scan": scan, "pass": pass });
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("scan serializes")
    ));
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    spec: &Path,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    suite: Suite,
    nmax: usize,
    jobs: Option<usize>,
    out: &Path,
) -> Outcome {
    if param != "s" {
        return Err(mvop_core::Error::InvalidArgument(format!(
            "only the deformation parameter s can be swept, got '{param}'"
        ))
        .into());
    }
    if steps == 0 {
        return Err(mvop_core::Error::InvalidArgument("--steps must be positive".into()).into());
    }
    let spec = load_spec(spec)?;
    let grid: Vec<f64> = match steps {
        1 => vec![from],
        k => (0..k)
            .map(|i| from + (to - from) * i as f64 / (k - 1) as f64)
            .collect(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Failure::Io(e.to_string()))?;
    let parts: Vec<ResidualReport> = pool.install(|| {
        grid.par_iter()
            .map(|&s| run_suite(&spec, suite, nmax, &[s]))
            .collect::<mvop_core::Result<_>>()
    })?;
    let mut report = ResidualReport::new(spec.digest());
    for p in parts {
        report.merge(p);
    }
    report.sort();
    write_report(&report, out)?;
    summarize(&report, out);
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Moments { spec, kmax } => moments(&spec, kmax),
        Command::Family { spec, nmax } => family(&spec, nmax),
        Command::Verify {
            spec,
            nmax,
            s_list,
            suite,
            out,
        } => verify(&spec, nmax, s_list, suite, &out),
        Command::Evolve {
            spec,
            n,
            s0,
            s1,
            dump_trajectory,
        } => evolve(&spec, n, s0, s1, dump_trajectory),
        Command::Bootstrap { spec, nmax } => bootstrap(&spec, nmax),
        Command::Piii {
            spec,
            n,
            s0,
            s1,
            ds,
        } => piii(&spec, n, s0, s1, ds),
        Command::Sweep {
            spec,
            param,
            from,
            to,
            steps,
            suite,
            nmax,
            jobs,
            out,
        } => sweep(&spec, &param, from, to, steps, suite, nmax, jobs, &out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            let diag = match failure {
                Failure::Core(e) => {
                    json!({ "error": e.kind(), "message": e.to_string(), "structural": e.is_structural() })
                }
                Failure::Io(msg) => json!({ "error": "Io", "message": msg, "structural": false }),
            };
            eprintln!("{diag}");
            ExitCode::from(2)
        }
    }
}
