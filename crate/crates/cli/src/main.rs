//! Batch driver for the soslab core: assemble moment matrices, decide
//! richness, verify and rewrite certificates, construct the
//! doubly-exponential counterexamples, and sweep coefficient growth.
//!
//! Exit codes classify failures: 2 verification, 3 richness (any exact
//! obstruction found by the library), 4 parameter guard, 5 I/O. All
//! outputs are deterministic for a fixed invocation; rationals appear as
//! exact `num/den` strings and never as floats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use soslab_core::certificate::{SoSCertificate, VerifyOutcome};
use soslab_core::counterexample::{
    audit_certificate_against_dual, boolean_chain_certificate, chain_certificate,
    chain_max_coeff, coefficient_lower_bound, phi_pseudoexpectation,
    product_pseudoexpectation, PseudoExpectation,
};
use soslab_core::moment::{kernel_polynomials, moment_matrix, spectral_richness};
use soslab_core::par::{self, Mode};
use soslab_core::poly::CoefficientStats;
use soslab_core::ratio::{parse_rat, rat_bits, rat_to_string, Rat};
use soslab_core::rewrite::rewrite_bounded;
use soslab_core::richness::richness_report;
use soslab_core::systems::{from_spec_string, ConstraintSystem};

#[derive(Parser)]
#[command(
    name = "soslab",
    version,
    about = "Exact arithmetic laboratory for sum-of-squares certificates"
)]
struct Cli {
    /// Worker threads for parallel stages (0 keeps the library default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a registry constraint system as JSON.
    System {
        /// Registry spec like `max_csp:3` or a path to a system JSON file.
        #[arg(long)]
        system: String,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the moment matrix of a system and report its kernel and
    /// spectral margin.
    Moment {
        #[arg(long)]
        system: String,
        /// Monomial degree bound d of the matrix.
        #[arg(long)]
        degree: usize,
        /// Output path for the JSON report (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide (d, k)-richness and emit the full report.
    Richness {
        #[arg(long)]
        system: String,
        /// Moment degree d.
        #[arg(long)]
        degree: usize,
        /// Derivation degree budget k (at least d).
        #[arg(long)]
        k: usize,
        /// Output path for the JSON report (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a certificate file against a system.
    VerifyCert {
        /// Path to the certificate JSON.
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        system: String,
    },
    /// Rewrite a verified certificate into the bounded-coefficient form
    /// guaranteed by a richness report.
    RewriteCert {
        /// Path to the certificate JSON.
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        system: String,
        /// Moment degree d of the richness report (defaults to
        /// ceil(certificate degree / 2)).
        #[arg(long)]
        degree: Option<usize>,
        /// Derivation budget k of the report (defaults to the certificate
        /// degree).
        #[arg(long)]
        k: Option<usize>,
        /// Output path for the rewritten certificate JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output path for the before/after coefficient statistics CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Construct the chain certificate with doubly-exponential
    /// coefficients and audit it against its dual functional.
    Counterexample {
        /// Chain length n.
        #[arg(long)]
        n: usize,
        /// Margin eps as an exact rational like `1/4`.
        #[arg(long)]
        eps: String,
        /// Boolean block half-width; selects the Boolean variant when set.
        #[arg(long)]
        k: Option<usize>,
        /// Output path for the certificate JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output path for the statistics CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep certificate coefficient growth against the dual lower bound.
    GrowthSweep {
        /// Chain lengths to sweep: a single `5` means 1..=5, or an
        /// explicit inclusive range `2..6`.
        #[arg(long)]
        n: String,
        /// Margin eps as an exact rational like `1/4`.
        #[arg(long)]
        eps: String,
        /// Proof degree for the lower bound.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Output path for the CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 5,
            message: message.into(),
        }
    }
}

impl From<soslab_core::Error> for CliError {
    fn from(e: soslab_core::Error) -> Self {
        use soslab_core::Error as E;
        let code = match &e {
            E::Parse(_)
            | E::Guard(_)
            | E::NvarsMismatch(..)
            | E::DimensionMismatch(_)
            | E::NotSymmetric => 4,
            E::PsdFailed(_) | E::SelfCheck(_) => 2,
            _ => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

/// Write to `out` when given, otherwise print to stdout.
fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// A system argument is either a registry spec string (contains `:` or is
/// a bare registry name) or a path to a JSON file produced by `system`.
fn resolve_system(arg: &str) -> CliResult<ConstraintSystem> {
    let looks_like_path = arg.ends_with(".json") || Path::new(arg).exists();
    if looks_like_path && !arg.contains(':') {
        let text = read_text(Path::new(arg))?;
        let sys: ConstraintSystem = serde_json::from_str(&text)
            .map_err(|e| CliError::io(format!("parsing {arg}: {e}")))?;
        return Ok(sys);
    }
    Ok(from_spec_string(arg)?)
}

fn stats_csv(rows: &[(&str, &CoefficientStats, usize)]) -> String {
    let mut out = String::from("phase,max_coeff_num_bits,total_bits,degree\n");
    for (phase, stats, degree) in rows {
        out.push_str(&format!(
            "{phase},{},{},{degree}\n",
            rat_bits(&stats.max_abs_coeff),
            stats.bit_size
        ));
    }
    out
}

fn read_certificate(path: &Path) -> CliResult<SoSCertificate> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("parsing {}: {e}", path.display())))
}

/// Require a passing verification, mapping a failed identity to the
/// verification exit class with a residue summary.
fn require_verified(cert: &SoSCertificate, sys: &ConstraintSystem) -> CliResult<()> {
    match cert.verify(sys)? {
        VerifyOutcome::Pass => Ok(()),
        VerifyOutcome::Fail { reason, residue } => {
            let summary = match residue {
                Some(r) => format!("{reason}; residue = {r}"),
                None => reason,
            };
            Err(CliError {
                code: 2,
                message: format!("certificate rejected: {summary}"),
            })
        }
    }
}

fn cmd_system(system: &str, out: Option<&PathBuf>) -> CliResult<()> {
    let sys = resolve_system(system)?;
    let text = serde_json::to_string_pretty(&sys)
        .map_err(|e| CliError::io(e.to_string()))?;
    emit(out, &text)
}

fn cmd_moment(system: &str, degree: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let sys = resolve_system(system)?;
    let mm = moment_matrix(&sys, degree)?;
    let kernel = kernel_polynomials(&mm);
    let (delta, sharp) = spectral_richness(&mm)?;
    let entries: Vec<Vec<String>> = (0..mm.basis.len())
        .map(|i| {
            (0..mm.basis.len())
                .map(|j| rat_to_string(mm.mat.at(i, j)))
                .collect()
        })
        .collect();
    let report = json!({
        "label": sys.label,
        "nvars": sys.nvars,
        "degree": degree,
        "basis": mm.basis.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "scale": mm.scale.to_string(),
        "entries": entries,
        "kernel_dim": kernel.len(),
        "kernel": kernel.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "delta": rat_to_string(&delta),
        "sharp_delta": sharp.as_ref().map(rat_to_string),
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::io(e.to_string()))?;
    emit(out, &text)
}

fn cmd_richness(system: &str, d: usize, k: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let sys = resolve_system(system)?;
    let rep = richness_report(&sys, d, k)?;
    let text = serde_json::to_string_pretty(&rep)
        .map_err(|e| CliError::io(e.to_string()))?;
    emit(out, &text)?;
    if !rep.rich_verdict {
        return Err(CliError {
            code: 3,
            message: format!(
                "{} is not ({d}, {k})-rich: complete = {}, robust = {}",
                sys.label, rep.complete, rep.robust
            ),
        });
    }
    Ok(())
}

fn cmd_verify(cert_path: &Path, system: &str) -> CliResult<()> {
    let sys = resolve_system(system)?;
    let cert = read_certificate(cert_path)?;
    require_verified(&cert, &sys)?;
    let stats = cert.stats();
    println!(
        "certificate verifies: degree {}, max coefficient {}, {} bits",
        cert.degree,
        rat_to_string(&stats.max_abs_coeff),
        stats.bit_size
    );
    Ok(())
}

fn cmd_rewrite(
    cert_path: &Path,
    system: &str,
    degree: Option<usize>,
    k: Option<usize>,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
) -> CliResult<()> {
    let sys = resolve_system(system)?;
    let cert = read_certificate(cert_path)?;
    require_verified(&cert, &sys)?;
    let d = degree.unwrap_or(cert.degree.div_ceil(2));
    let k = k.unwrap_or(cert.degree);
    let rich = richness_report(&sys, d, k)?;
    if !rich.rich_verdict {
        return Err(CliError {
            code: 3,
            message: format!("{} is not ({d}, {k})-rich", sys.label),
        });
    }
    let outcome = rewrite_bounded(&cert, &sys, &rich)?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&outcome.certificate)
            .map_err(|e| CliError::io(e.to_string()))?;
        write_text(path, &text)?;
    }
    if let Some(path) = report {
        let csv = stats_csv(&[
            ("before", &outcome.stats_before, cert.degree),
            ("after", &outcome.stats_after, outcome.certificate.degree),
        ]);
        write_text(path, &csv)?;
    }
    println!(
        "rewritten: max coefficient {} -> {}, total bits {} -> {} \
         (theoretical bound {} bits)",
        rat_to_string(&outcome.stats_before.max_abs_coeff),
        rat_to_string(&outcome.stats_after.max_abs_coeff),
        outcome.stats_before.bit_size,
        outcome.stats_after.bit_size,
        outcome.bound_bits
    );
    Ok(())
}

fn cmd_counterexample(
    n: usize,
    eps: &str,
    k: Option<usize>,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
) -> CliResult<()> {
    let eps = parse_rat(eps)?;
    let (sys, cert, pe): (ConstraintSystem, SoSCertificate, PseudoExpectation) =
        match k {
            None => {
                let (sys, cert) = chain_certificate(n, &eps)?;
                let pe = phi_pseudoexpectation(n, &eps, cert.degree)?;
                (sys, cert, pe)
            }
            Some(k) => {
                let (sys, cert) = boolean_chain_certificate(n, k, &eps)?;
                let pe = product_pseudoexpectation(n, k, &eps, cert.degree)?;
                (sys, cert, pe)
            }
        };
    require_verified(&cert, &sys)?;
    let audit = audit_certificate_against_dual(&cert, &pe, &sys)?;
    let stats = cert.stats();
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&cert)
            .map_err(|e| CliError::io(e.to_string()))?;
        write_text(path, &text)?;
    }
    if let Some(path) = report {
        let bound_stats = CoefficientStats {
            max_abs_coeff: audit.implied_coeff_bound.clone(),
            bit_size: rat_bits(&audit.implied_coeff_bound),
        };
        let csv = stats_csv(&[
            ("certificate", &stats, cert.degree),
            ("dual_bound", &bound_stats, cert.degree),
        ]);
        write_text(path, &csv)?;
    }
    println!(
        "{}: certificate max coefficient {} ({} bits total); dual functional \
         leaks {} through equality {} and forces coefficients >= {}",
        sys.label,
        rat_to_string(&stats.max_abs_coeff),
        stats.bit_size,
        rat_to_string(&audit.leak),
        audit.leaky_equality,
        rat_to_string(&audit.implied_coeff_bound)
    );
    Ok(())
}

fn parse_n_range(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError {
        code: 4,
        message: format!("unrecognized range '{s}'; use `5` or `2..6`"),
    };
    if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| bad())?;
        let hi: usize = b.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok((lo, hi))
    } else {
        let hi: usize = s.trim().parse().map_err(|_| bad())?;
        if hi == 0 {
            return Err(bad());
        }
        Ok((1, hi))
    }
}

fn cmd_growth_sweep(
    n: &str,
    eps: &str,
    degree: usize,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    let (lo, hi) = parse_n_range(n)?;
    let eps = parse_rat(eps)?;
    let eps_text = rat_to_string(&eps);
    let cells: Vec<soslab_core::Result<(Rat, Rat)>> =
        par::map_indexed(Mode::Auto, hi - lo + 1, |i| {
            let n = lo + i;
            Ok((
                chain_max_coeff(n, &eps)?,
                coefficient_lower_bound(n, &eps, degree)?,
            ))
        });
    let mut csv = String::from("n,eps,degree,upper_bits,lower_bits\n");
    for (i, cell) in cells.into_iter().enumerate() {
        let (upper, lower) = cell?;
        csv.push_str(&format!(
            "{},{eps_text},{degree},{},{}\n",
            lo + i,
            rat_bits(&upper),
            rat_bits(&lower)
        ));
    }
    emit(out, csv.trim_end())
}

fn run(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::System { system, out } => cmd_system(&system, out.as_ref()),
        Cmd::Moment {
            system,
            degree,
            out,
        } => cmd_moment(&system, degree, out.as_ref()),
        Cmd::Richness {
            system,
            degree,
            k,
            out,
        } => cmd_richness(&system, degree, k, out.as_ref()),
        Cmd::VerifyCert { cert, system } => cmd_verify(&cert, &system),
        Cmd::RewriteCert {
            cert,
            system,
            degree,
            k,
            out,
            report,
        } => cmd_rewrite(&cert, &system, degree, k, out.as_ref(), report.as_ref()),
        Cmd::Counterexample {
            n,
            eps,
            k,
            out,
            report,
        } => cmd_counterexample(n, &eps, k, out.as_ref(), report.as_ref()),
        Cmd::GrowthSweep {
            n,
            eps,
            degree,
            out,
        } => cmd_growth_sweep(&n, &eps, degree, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        par::configure_jobs(cli.jobs);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
