//! Argument parsing and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sphere_energy::cluster::energy_cluster;
use sphere_energy::measure::fingerprint;
use sphere_energy::sampling::{UniformSphere, VonMisesFisher};
use sphere_energy::stats::{gof_test, independence_test, two_sample_test};
use sphere_energy::verify::{self, Check};
use sphere_energy::{Hemisphere, MetricPower, PairedSample, UnitVector};
use thiserror::Error;

use crate::input::{parse_measure, parse_points, InputError, PointSet};
use crate::report::{normalize, render, with_config, OutputFormat};

#[derive(Debug, Parser)]
#[command(
    name = "sphere-energy",
    version,
    about = "Energy statistics on spheres under the angular metric"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    /// Permutation replicates for the tests.
    #[arg(long, global = true, default_value_t = 999)]
    pub permutations: usize,
    /// Metric power, in (0, 1].
    #[arg(long = "r", global = true, default_value_t = 1.0)]
    pub r: f64,
    /// Test level.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Exit with status 1 when a test rejects at --alpha.
    #[arg(long, global = true)]
    pub strict_exit: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance covariance permutation test on paired samples.
    TestIndependence { x: PathBuf, y: PathBuf },
    /// Energy distance permutation test.
    TestTwoSample { a: PathBuf, b: PathBuf },
    /// Energy goodness-of-fit test against a reference law.
    TestGof {
        sample: PathBuf,
        /// `uniform` or `vmf:<kappa>:<pole-file>`.
        #[arg(long = "ref")]
        reference: String,
        /// Reference sample size; defaults to 4 times the sample size.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Agglomerative clustering with the energy linkage.
    Cluster {
        points: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Numerical verification: identity, energy, negtype, cw, symm or compare.
    Verify {
        #[arg(value_parser = parse_check)]
        check: Check,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Hemisphere masses of a measure over a set of directions.
    Fingerprint {
        measure: PathBuf,
        #[arg(long)]
        directions: PathBuf,
        /// Pole file of a hemisphere H; masses become those of H ∩ H_t.
        #[arg(long)]
        restrict: Option<PathBuf>,
    },
}

fn parse_check(s: &str) -> Result<Check, String> {
    s.parse().map_err(|e: sphere_energy::Error| e.to_string())
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Core(#[from] sphere_energy::Error),
    #[error("{0}")]
    Usage(String),
}

/// Effective configuration, echoed in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    pub permutations: usize,
    pub r: f64,
    pub alpha: f64,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let path = |p: &Path| p.display().to_string();
        let (command, inputs) = match &cli.command {
            Command::TestIndependence { x, y } => ("test-independence", vec![path(x), path(y)]),
            Command::TestTwoSample { a, b } => ("test-two-sample", vec![path(a), path(b)]),
            Command::TestGof { sample, .. } => ("test-gof", vec![path(sample)]),
            Command::Cluster { points, .. } => ("cluster", vec![path(points)]),
            Command::Verify { .. } => ("verify", vec![]),
            Command::Fingerprint {
                measure,
                directions,
                restrict,
            } => {
                let mut v = vec![path(measure), path(directions)];
                v.extend(restrict.as_deref().map(path));
                ("fingerprint", v)
            }
        };
        Self {
            command,
            inputs,
            seed: cli.seed,
            samples: cli.samples,
            permutations: cli.permutations,
            r: cli.r,
            alpha: cli.alpha,
            output_format: cli.format,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: u8,
}

fn unweighted(path: &Path) -> Result<Vec<UnitVector>, AppError> {
    let PointSet { points, weights } = parse_points(path)?;
    if weights.is_some() {
        return Err(AppError::Usage(format!(
            "{}: weight column not accepted here",
            path.display()
        )));
    }
    Ok(points)
}

fn single_point(path: &Path) -> Result<UnitVector, AppError> {
    let mut points = unweighted(path)?;
    if points.len() != 1 {
        return Err(AppError::Usage(format!(
            "{}: expected one point, found {}",
            path.display(),
            points.len()
        )));
    }
    Ok(points.remove(0))
}

enum Reference {
    Uniform,
    VonMisesFisher { kappa: f64, pole: PathBuf },
}

fn parse_reference(s: &str) -> Result<Reference, AppError> {
    if s == "uniform" {
        return Ok(Reference::Uniform);
    }
    let bad = || {
        AppError::Usage(format!(
            "--ref must be 'uniform' or 'vmf:<kappa>:<pole-file>', got '{s}'"
        ))
    };
    let rest = s.strip_prefix("vmf:").ok_or_else(bad)?;
    let (kappa, pole) = rest.split_once(':').ok_or_else(bad)?;
    let kappa = kappa.parse::<f64>().map_err(|_| bad())?;
    if pole.is_empty() {
        return Err(bad());
    }
    Ok(Reference::VonMisesFisher {
        kappa,
        pole: PathBuf::from(pole),
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, AppError> {
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(AppError::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            cli.alpha
        )));
    }
    let r = MetricPower::new(cli.r)?;
    let config = RunConfig::from_cli(cli);
    let mut exit_code = 0;

    let report: Value = match &cli.command {
        Command::TestIndependence { x, y } => {
            let s = PairedSample::new(unweighted(x)?, unweighted(y)?)?;
            let rep = independence_test(&s, r, cli.permutations, cli.seed)?;
            test_value(cli, &mut exit_code, &rep)
        }
        Command::TestTwoSample { a, b } => {
            let rep = two_sample_test(
                &unweighted(a)?,
                &unweighted(b)?,
                r,
                cli.permutations,
                cli.seed,
            )?;
            test_value(cli, &mut exit_code, &rep)
        }
        Command::TestGof {
            sample,
            reference,
            m,
        } => {
            let pts = unweighted(sample)?;
            let m = m.unwrap_or(4 * pts.len());
            let dim = pts[0].dim();
            let rep = match parse_reference(reference)? {
                Reference::Uniform => gof_test(
                    &pts,
                    &UniformSphere::new(dim)?,
                    m,
                    r,
                    cli.permutations,
                    cli.seed,
                )?,
                Reference::VonMisesFisher { kappa, pole } => {
                    let vmf = VonMisesFisher::new(single_point(&pole)?, kappa)?;
                    gof_test(&pts, &vmf, m, r, cli.permutations, cli.seed)?
                }
            };
            let mut v = test_value(cli, &mut exit_code, &rep);
            v["reference_size"] = json!(m);
            v
        }
        Command::Cluster { points, k } => {
            let c = energy_cluster(&unweighted(points)?, *k, r)?;
            to_value(&c)
        }
        Command::Verify { check, trials } => {
            let trials = trials.unwrap_or(check.default_trials());
            let rep = verify::run(*check, trials, cli.samples, cli.seed)?;
            if !rep.passed {
                exit_code = 1;
            }
            to_value(&rep)
        }
        Command::Fingerprint {
            measure,
            directions,
            restrict,
        } => {
            let m = parse_measure(measure)?;
            let dirs = unweighted(directions)?;
            let restriction = match restrict {
                Some(p) => Some(Hemisphere::new(single_point(p)?)),
                None => None,
            };
            let f = fingerprint(&m, &dirs, restriction.as_ref())?;
            to_value(&f)
        }
    };

    let value = normalize(with_config(report, to_value(&config)));
    Ok(Outcome {
        output: render(&value, cli.format),
        exit_code,
    })
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

fn test_value(cli: &Cli, exit_code: &mut u8, rep: &sphere_energy::TestReport) -> Value {
    let reject = rep.p_value <= cli.alpha;
    if reject && cli.strict_exit {
        *exit_code = 1;
    }
    let mut v = to_value(rep);
    v["reject"] = json!(reject);
    v
}
