//! `hlmetric`: weighted geodesics, extension-condition checks and theorem
//! verification from the command line.
//!
//! Exit codes: 0 success (for `verify`: every check passed or had an unmet
//! hypothesis), 1 a check failed or the computation could not finish,
//! 2 invalid arguments or config.

mod config;
mod io;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hlmetric_core::curves::{curve_integral, curve_length, DEFAULT_TOL};
use hlmetric_core::geodesics::{
    check_extension_condition, default_resolution, weighted_distance_upper_with, GeodesicOptions,
};
use hlmetric_core::sampling::{pairs_in_domain, PairSampling};
use serde::Serialize;

use config::{parse_list, point, DomainSpec, MajorantSpec, WeightSpec};

#[derive(Parser)]
#[command(name = "hlmetric", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound for the weighted distance between two points.
    Geodesic {
        /// e.g. unit_disk, half_plane, l_shape, annulus:0.5,2, rectangle:0,0,2,1
        #[arg(long, allow_hyphen_values = true)]
        domain: DomainSpec,
        /// unit, constant:c, dist, dist_pow:α, reciprocal_dist
        #[arg(long)]
        weight: WeightSpec,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Lattice spacing; defaults to min(0.01, |x − y|/20).
        #[arg(long)]
        h: Option<f64>,
        /// Report the lattice path without smoothing or the chord candidate.
        #[arg(long)]
        raw: bool,
        /// Write the curve as CSV, one vertex per row.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Write the JSON result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observed constant M of the extension condition on sampled pairs.
    Condition {
        #[arg(long, allow_hyphen_values = true)]
        domain: DomainSpec,
        #[arg(long)]
        weight: WeightSpec,
        /// power:α
        #[arg(long)]
        majorant: MajorantSpec,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Smallest boundary distance of sampled points.
        #[arg(long, default_value_t = 0.02)]
        min_clearance: f64,
        /// Lattice spacing; defaults per pair.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length and weighted integral of a CSV polyline.
    Integral {
        #[arg(long, allow_hyphen_values = true)]
        domain: DomainSpec,
        #[arg(long)]
        weight: WeightSpec,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Theorem checks listed in a TOML config.
    Verify {
        config: PathBuf,
        /// Directory for the per-instance JSON reports and summary.csv.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
}

/// Errors that should exit with status 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| Usage(e).into())
}

#[derive(Serialize)]
struct IntegralOutput {
    vertices: usize,
    length: f64,
    integral: f64,
    tol: f64,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Geodesic {
            domain,
            weight,
            from,
            to,
            h,
            raw,
            curve,
            out,
        } => {
            let d = usage(domain.build())?;
            let w = usage(weight.build(d))?;
            let x = usage(parse_list(&from).and_then(|c| point(&c)))?;
            let y = usage(parse_list(&to).and_then(|c| point(&c)))?;
            for (name, p) in [("--from", &x), ("--to", &y)] {
                if !w.domain().contains(p) {
                    return Err(Usage(anyhow::anyhow!("{name} point {p:?} is outside the domain")).into());
                }
            }
            let opts = if raw {
                GeodesicOptions::raw_grid()
            } else {
                GeodesicOptions::default()
            };
            let h = h.unwrap_or_else(|| default_resolution(&x, &y));
            let g = weighted_distance_upper_with(&w, &x, &y, h, &opts)?;
            if let Some(path) = curve {
                io::write_curve_file(&g.curve, &path)?;
            }
            io::write_json(&g, out.as_deref())?;
        }
        Command::Condition {
            domain,
            weight,
            majorant,
            pairs,
            seed,
            min_clearance,
            h,
            out,
        } => {
            let d = usage(domain.build())?;
            let w = usage(weight.build(d.clone()))?;
            let phi = usage(majorant.build())?;
            let sample = pairs_in_domain(&d, &PairSampling::new(pairs, min_clearance, seed))?;
            let report = check_extension_condition(&w, &phi, &sample, h)?;
            io::write_json(&report, out.as_deref())?;
        }
        Command::Integral {
            domain,
            weight,
            curve,
            tol,
        } => {
            let d = usage(domain.build())?;
            let w = usage(weight.build(d))?;
            let c = usage(io::read_curve_file(&curve))?;
            let integral = curve_integral(&w, &c, tol)?;
            let result = IntegralOutput {
                vertices: c.vertices().len(),
                length: curve_length(&c),
                integral,
                tol,
            };
            io::write_json(&result, None)?;
        }
        Command::Verify { config, out } => {
            let cfg = usage(verify::load(&config))?;
            let prepared = usage(verify::prepare_all(&cfg))?;
            let outcome = verify::execute(&prepared, &out)
                .with_context(|| format!("writing reports to {}", out.display()))?;
            return Ok(match outcome {
                verify::Outcome::AllAcceptable => ExitCode::SUCCESS,
                verify::Outcome::SomeFailed => ExitCode::from(1),
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
