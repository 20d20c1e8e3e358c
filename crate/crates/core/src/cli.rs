//! Command-line front end. [`run`] maps argv to an exit code so that tests
//! can drive it without spawning a process.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::chain::Family;
use crate::error::{Error, Result};
use crate::higgs::HiggsParams;
use crate::kepler::{self, KeplerParams};
use crate::phase::Convention;
use crate::realize_one::FirstVariant;
use crate::realize_two::SecondVariant;
use crate::report::{Report, EXIT_INVALID, EXIT_PASS, EXIT_USAGE};
use crate::suite::{self, Gating, Grid, PhaseFlavor};

pub const THREADS_ENV: &str = "POLYFOCK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "polyfock", version, about = "Verify two-boson realizations of the cubic Higgs algebra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub c1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub c3: f64,
    /// Truncation caps `n1_max,n2_max`.
    #[arg(long, value_parser = parse_caps, default_value = "12,12")]
    pub caps: (usize, usize),
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    pub tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    #[value(name = "U11")]
    U11,
    #[value(name = "D11")]
    D11,
    #[value(name = "K11")]
    K11,
    #[value(name = "U22")]
    U22,
    #[value(name = "D22")]
    D22,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    #[value(name = "PAPER_LITERAL")]
    PaperLiteral,
    #[value(name = "LOWERING_CONSISTENT")]
    LoweringConsistent,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Higgs and Casimir residuals of a first-kind realization.
    VerifyFirst {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "U11")]
        variant: VariantArg,
    },
    /// Higgs and Casimir residuals of a second-kind realization.
    VerifySecond {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "U11")]
        variant: VariantArg,
    },
    /// Similarity transformations onto the unitary realizations.
    VerifySimilarity {
        #[command(flatten)]
        common: Common,
        /// Also try the printed closed-form SBAR transformations.
        #[arg(long)]
        printed: bool,
        /// Restrict to one kind; both by default.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Finite irreducible representation of dimension 2j+1.
    Irrep {
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        c1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        c3: f64,
        /// Highest weight j, integer or half-integer.
        #[arg(long)]
        jtilde: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Matrix elements as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Admissible states and nullspaces of the unitary (1,1) realization.
    Domain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "first")]
        kind: KindArg,
    },
    /// Energy levels of the Kepler problem on a curved plane.
    Kepler {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Coupling mu squared; give this or --mu.
        #[arg(long, conflicts_with = "mu", allow_hyphen_values = true)]
        mu2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Largest principal number N.
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        /// Tabulate odd N as well (marked unphysical).
        #[arg(long)]
        include_odd: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Spectrum table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Phase operators of the Higgs algebra.
    Phase {
        #[command(flatten)]
        common: Common,
        /// SUM(1,1) sector N; defaults to min(caps).
        #[arg(long)]
        sector: Option<usize>,
        #[arg(long, value_enum, default_value = "LOWERING_CONSISTENT")]
        convention: ConventionArg,
        /// Use unit shift coefficients instead of the literal construction.
        #[arg(long)]
        exact_shift: bool,
    },
    /// Every check over the default parameter grid.
    All {
        #[arg(long, value_parser = parse_caps, default_value = "16,16")]
        caps: (usize, usize),
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_caps(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.parse::<usize>().map_err(|e| format!("n1_max: {e}"))?;
            let b = b.parse::<usize>().map_err(|e| format!("n2_max: {e}"))?;
            Ok((a, b))
        }
        _ => Err(format!("expected N1,N2, got `{s}`")),
    }
}

fn first_variant(v: VariantArg) -> FirstVariant {
    match v {
        VariantArg::U11 => FirstVariant::U11,
        VariantArg::D11 => FirstVariant::D11,
        VariantArg::K11 => FirstVariant::K11,
        VariantArg::U22 => FirstVariant::U22,
        VariantArg::D22 => FirstVariant::D22,
    }
}

fn second_variant(v: VariantArg) -> SecondVariant {
    match v {
        VariantArg::U11 => SecondVariant::U11,
        VariantArg::D11 => SecondVariant::D11,
        VariantArg::K11 => SecondVariant::K11,
        VariantArg::U22 => SecondVariant::U22,
        VariantArg::D22 => SecondVariant::D22,
    }
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParam(format!("{name} must be finite")))
    }
}

fn params(c: &Common) -> Result<HiggsParams> {
    Ok(HiggsParams::new(finite("c1", c.c1)?, finite("c3", c.c3)?))
}

/// Worker count from `POLYFOCK_THREADS`; unset or empty means rayon's default.
pub fn thread_count(var: Option<String>) -> Result<Option<usize>> {
    match var.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParam(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

struct Outputs {
    report: Option<PathBuf>,
    csv: Option<(PathBuf, Vec<u8>)>,
}

fn execute(cmd: Command) -> Result<(Report, Outputs)> {
    let out = |report: Option<PathBuf>| Outputs { report, csv: None };
    Ok(match cmd {
        Command::VerifyFirst { common, variant } => {
            let p = params(&common)?;
            (suite::verify_first(&p, first_variant(variant), common.caps, common.tol, Gating::Fail)?, out(common.report))
        }
        Command::VerifySecond { common, variant } => {
            let p = params(&common)?;
            (suite::verify_second(&p, second_variant(variant), common.caps, common.tol, Gating::Fail)?, out(common.report))
        }
        Command::VerifySimilarity { common, printed, kind } => {
            let p = params(&common)?;
            let kinds: &[Family] = match kind {
                None => &[Family::First, Family::Second],
                Some(KindArg::First) => &[Family::First],
                Some(KindArg::Second) => &[Family::Second],
            };
            (suite::verify_similarity(&p, kinds, common.caps, common.tol, printed, Gating::Fail)?, out(common.report))
        }
        Command::Irrep { c1, c3, jtilde, tol, report, csv } => {
            let p = HiggsParams::new(finite("c1", c1)?, finite("c3", c3)?);
            let (rep, r, label) = suite::irrep_run(&p, jtilde, tol)?;
            let csv = csv.map(|path| {
                let mut buf = Vec::new();
                suite::write_irrep_csv(&r, &label, &p, &mut buf).expect("in-memory write");
                (path, buf)
            });
            (rep, Outputs { report, csv })
        }
        Command::Domain { common, kind } => {
            let p = params(&common)?;
            let fam = match kind {
                KindArg::First => Family::First,
                KindArg::Second => Family::Second,
            };
            (suite::domain_run(&p, fam, common.caps)?, out(common.report))
        }
        Command::Kepler { lambda, mu2, mu, nmax, include_odd, report, csv } => {
            let lambda = finite("lambda", lambda)?;
            let mut kp = match (mu2, mu) {
                (Some(m2), None) => KeplerParams::from_mu2(lambda, finite("mu2", m2)?, nmax)?,
                (None, Some(m)) => KeplerParams::new(lambda, finite("mu", m)?, nmax),
                _ => return Err(Error::InvalidParam("give exactly one of --mu2, --mu".into())),
            };
            kp.include_odd = include_odd;
            let (rep, table) = suite::kepler_run(&kp)?;
            let csv = csv.map(|path| {
                let mut buf = Vec::new();
                kepler::write_csv(&table, &mut buf).expect("in-memory write");
                (path, buf)
            });
            (rep, Outputs { report, csv })
        }
        Command::Phase { common, sector, convention, exact_shift } => {
            let p = params(&common)?;
            let n = sector.unwrap_or(common.caps.0.min(common.caps.1));
            let conv = match convention {
                ConventionArg::PaperLiteral => Convention::PaperLiteral,
                ConventionArg::LoweringConsistent => Convention::LoweringConsistent,
            };
            let flavor = if exact_shift { PhaseFlavor::ExactShift } else { PhaseFlavor::Literal };
            (suite::phase_run(&p, common.caps, n, conv, flavor, common.tol, Gating::Fail)?, out(common.report))
        }
        Command::All { caps, tol, report } => (suite::run_all(&Grid::default(), caps, tol)?, out(report)),
    })
}

fn write_file(path: &PathBuf, bytes: &[u8], err: &mut dyn Write) -> bool {
    match std::fs::write(path, bytes) {
        Ok(()) => true,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            false
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. The report goes to `out` unless `--report` is set.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let threads = match thread_count(std::env::var(THREADS_ENV).ok()) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_INVALID;
        }
    };

    let (rep, outputs) = match pool.install(|| execute(cli.command)) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let json = rep.to_json();
    let mut ok = match &outputs.report {
        Some(path) => write_file(path, format!("{json}\n").as_bytes(), err),
        None => writeln!(out, "{json}").is_ok(),
    };
    if let Some((path, bytes)) = &outputs.csv {
        ok &= write_file(path, bytes, err);
    }
    if !ok {
        return crate::report::EXIT_FAIL;
    }
    for e in &rep.errors {
        let _ = writeln!(err, "error: {e}");
    }
    rep.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_parser() {
        assert_eq!(parse_caps("12,8"), Ok((12, 8)));
        assert_eq!(parse_caps(" 3 , 4"), Ok((3, 4)));
        assert!(parse_caps("3").is_err());
        assert!(parse_caps("-1,2").is_err());
    }

    #[test]
    fn thread_env() {
        assert_eq!(thread_count(None).unwrap(), None);
        assert_eq!(thread_count(Some("4".into())).unwrap(), Some(4));
        assert!(thread_count(Some("0".into())).is_err());
        assert!(thread_count(Some("many".into())).is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["polyfock", "verify-first", "--bogus"], &mut o, &mut e), 64);
        assert_eq!(run(["polyfock", "frobnicate"], &mut o, &mut e), 64);
        assert!(!e.is_empty());
    }

    #[test]
    fn invalid_parameters_exit_65() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["polyfock", "verify-first", "--tol", "-1"], &mut o, &mut e), 65);
        assert!(String::from_utf8_lossy(&e).contains("tolerance"));
        let mut e = Vec::new();
        assert_eq!(run(["polyfock", "verify-second", "--caps", "3,3"], &mut o, &mut e), 65);
        assert!(String::from_utf8_lossy(&e).contains("caps >= 4"));
    }
}
