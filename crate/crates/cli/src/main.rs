use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bergman_core::basis::NormEngine;
use bergman_core::basis::DEFAULT_NODES;
use bergman_core::forms::CoefficientEntry;
use bergman_core::geometry::{audit, parse_profile};
use bergman_core::operators::assemble_block_with;
use bergman_core::report::{self, BlockJson, Header};
use bergman_core::reproduce;
use bergman_core::spectral::{solve_dbar, spectrum, Laplacian, DEFAULT_MMAX};
use bergman_core::{parse_model, Error, ErrorClass, FormCoefficients, ModelSpec};
use clap::{Parser, Subcommand, ValueEnum};

/// Weighted Bergman spaces: norms, Laplacian blocks, spectra, the canonical
/// ∂-solver and geometric audits.
#[derive(Debug, Parser)]
#[command(name = "bergman", version)]
struct Cli {
    /// Worker threads (defaults to the available cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Squared norms of monomial forms, closed form against quadrature.
    Norms {
        #[arg(long)]
        model: String,
        /// Form degree.
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 6)]
        max_degree: u32,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        #[command(flatten)]
        out: Output,
    },
    /// One degree block of the complex Laplacian in an orthonormal basis.
    Block {
        #[arg(long)]
        model: String,
        #[arg(long)]
        degree: u32,
        #[arg(long, value_enum, default_value_t = Op::Box1)]
        operator: Op,
        #[command(flatten)]
        out: Output,
    },
    /// Eigenvalues of the complex Laplacian on blocks 0..=mmax.
    Spectrum {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = DEFAULT_MMAX)]
        mmax: u32,
        #[arg(long, value_enum, default_value_t = Op::Box1)]
        operator: Op,
        #[command(flatten)]
        out: Output,
    },
    /// Canonical solution of ∂f = η for a closed polynomial (1,0)-form η.
    Solve {
        #[arg(long)]
        model: String,
        /// JSON list of {J, k, re, im} entries.
        #[arg(long)]
        eta: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Holomorphicity, torsion and curvature checks for a radial profile.
    Geometry {
        /// kahler:h=EXPR,psi=EXPR[,n=N][,R=R], conformal:phi=EXPR,psi=EXPR[,n=N][,R=R], or a model.
        #[arg(long)]
        profile: String,
        /// Test i∂∂̄ψ + Θ − μ iT∘T̄ ≥ ε ω_h at this ε.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        /// σ > 1, giving μ = σ/(σ−1); without it the torsion term is dropped.
        #[arg(long)]
        sigma: Option<f64>,
        /// Locate the largest ε for which the curvature condition holds.
        #[arg(long)]
        threshold: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Reproduce {
        /// Run a single criterion.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=11))]
        only: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Op {
    Box0,
    Box1,
}

impl From<Op> for Laplacian {
    fn from(o: Op) -> Self {
        match o {
            Op::Box0 => Laplacian::Box0,
            Op::Box1 => Laplacian::Box1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct Output {
    /// `json`, `csv`, or an output path (format from its extension).
    #[arg(long)]
    emit: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Output {
    fn target(&self, default: Format) -> (Format, Option<PathBuf>) {
        let (fmt, path) = match self.emit.as_deref() {
            None => (None, None),
            Some("json") => (Some(Format::Json), None),
            Some("csv") => (Some(Format::Csv), None),
            Some(p) => {
                let ext = Path::new(p).extension().and_then(|e| e.to_str());
                (
                    ext.and_then(|e| Format::from_str(e, true).ok()),
                    Some(PathBuf::from(p)),
                )
            }
        };
        (self.format.or(fmt).unwrap_or(default), path)
    }
}

enum Failure {
    Core(Error),
    Io(String),
    Criteria(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn write_out(
    out: &Output,
    default: Format,
    json: impl FnOnce() -> Result<String, Error>,
    csv: Option<&dyn Fn() -> Result<String, Error>>,
) -> Result<(), Failure> {
    let (fmt, path) = out.target(default);
    let text = match fmt {
        Format::Json => json()?,
        Format::Csv => match csv {
            Some(f) => f()?,
            None => {
                return Err(Failure::Core(Error::Domain(
                    "CSV output is not available for this verb".into(),
                )))
            }
        },
    };
    match path {
        Some(p) => fs::write(&p, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn model(s: &str) -> Result<ModelSpec, Failure> {
    Ok(parse_model(s)?)
}

fn run(verb: Verb) -> Result<(), Failure> {
    match verb {
        Verb::Norms {
            model: m,
            p,
            max_degree,
            nodes,
            out,
        } => {
            let m = model(&m)?;
            let rows = report::norm_rows(&m, p, max_degree, nodes)?;
            let header = Header::new(Some(&m), report::NORMS_IDENTITIES);
            write_out(
                &out,
                Format::Csv,
                || report::to_json(&header, &serde_json::json!({ "rows": &rows })),
                Some(&|| report::norms_csv(&rows)),
            )
        }
        Verb::Block {
            model: m,
            degree,
            operator,
            out,
        } => {
            let m = model(&m)?;
            let engine = NormEngine::preferred(m);
            let b = assemble_block_with(&engine, Laplacian::from(operator).degree(), degree)?;
            let header = Header::new(Some(&m), report::BLOCK_IDENTITIES);
            write_out(
                &out,
                Format::Json,
                || report::to_json(&header, &BlockJson::from(&b)),
                None,
            )
        }
        Verb::Spectrum {
            model: m,
            mmax,
            operator,
            out,
        } => {
            let m = model(&m)?;
            let r = spectrum(&m, mmax, operator.into())?;
            let header = Header::new(Some(&m), report::SPECTRUM_IDENTITIES);
            write_out(
                &out,
                Format::Json,
                || report::to_json(&header, &r),
                Some(&|| report::spectrum_csv(&r)),
            )
        }
        Verb::Solve { model: m, eta, out } => {
            let m = model(&m)?;
            let text = fs::read_to_string(&eta)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", eta.display())))?;
            let entries: Vec<CoefficientEntry> = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", eta.display())))?;
            let eta = FormCoefficients::from_entries(m.dim(), &entries)?;
            let r = solve_dbar(&m, &eta)?;
            let header = Header::new(Some(&m), report::SOLVE_IDENTITIES);
            write_out(&out, Format::Json, || report::to_json(&header, &r), None)
        }
        Verb::Geometry {
            profile,
            epsilon,
            sigma,
            threshold,
            out,
        } => {
            let p = parse_profile(&profile)?;
            let r = audit(&p, epsilon, sigma, threshold)?;
            let m = parse_model(&profile).ok();
            let header = Header::new(m.as_ref(), report::GEOMETRY_IDENTITIES);
            write_out(&out, Format::Json, || report::to_json(&header, &r), None)
        }
        Verb::Reproduce { only, out } => {
            let results = match only {
                Some(i) => reproduce::run_criterion(i).into_iter().collect(),
                None => reproduce::run_all(),
            };
            if out.emit.is_some() {
                let header = Header::new(None, &[]);
                write_out(
                    &out,
                    Format::Json,
                    || report::to_json(&header, &serde_json::json!({ "criteria": &results })),
                    None,
                )?;
            }
            if out.emit.as_deref() != Some("json") {
                for r in &results {
                    println!("{}", r.line());
                }
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failure::Criteria(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w as usize)
            .build_global()
        {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Domain => 1,
                ErrorClass::Accuracy => 2,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Criteria(n)) => {
            eprintln!("{n} acceptance criteria failed");
            ExitCode::from(2)
        }
    }
}
