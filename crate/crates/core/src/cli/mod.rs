//! Batch front end.
//!
//! Every subcommand writes a JSON report (or a CSV body with a sidecar
//! manifest) and returns an [`Outcome`]. Flags have `INVMETRIC_*`
//! environment overrides.

mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circularity::{asymptotics_sweep, corner_schedule, squeeze_lower_bound, SqueezeConfig};
use crate::domains::maps::{geometric_schedule, AutomorphismFamily};
use crate::domains::spec::{load_domain, parse_vector};
use crate::domains::{Domain, DomainKind, Orientation};
use crate::domination::{verify_convex_domination, verify_halfplane_domination, DominationConfig};
use crate::error::{Error, Result};
use crate::metrics::{indicatrix, kobayashi_distance, kobayashi_metric, Convention, MetricConfig};
use crate::numeric::Sampler;
use crate::scaling::{equivalence_audit, FrameConfig};
use crate::CVector;

pub use report::Manifest;

#[derive(Parser, Debug)]
#[command(name = "invmetric", version, about = "Kobayashi-Royden brackets, scaling audits, domination and squeezing checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Domain specification (JSON).
    #[arg(long, global = true, env = "INVMETRIC_DOMAIN")]
    pub domain: Option<PathBuf>,
    #[arg(long, global = true, env = "INVMETRIC_SEED", default_value_t = 7)]
    pub seed: u64,
    /// Tolerance of asserted properties.
    #[arg(long, global = true, env = "INVMETRIC_TOL", default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, env = "INVMETRIC_CONVENTION", value_enum, default_value_t = ConventionArg::Standard)]
    pub convention: ConventionArg,
    /// Output file, or directory for `verify-all`.
    #[arg(long, global = true, env = "INVMETRIC_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "INVMETRIC_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionArg {
    Standard,
    Paper,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Standard => Convention::Standard,
            ConventionArg::Paper => Convention::Paper,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bracket for K(x; v).
    Metric {
        #[arg(long)]
        at: String,
        #[arg(long)]
        dir: String,
    },
    /// Bracket for the Kobayashi distance.
    Distance {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Indicatrix radii along sampled directions (CSV).
    Indicatrix {
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 256)]
        count: usize,
        #[arg(long)]
        convexify: bool,
    },
    /// Scaling sequences and their normalizations.
    #[command(subcommand)]
    Scale(ScaleCommand),
    /// Box lemma for symmetric convex bodies.
    #[command(subcommand)]
    Boxlemma(BoxCommand),
    /// Domination profile over distance-ball samples.
    Dominate {
        /// Comma-separated radii.
        #[arg(long, default_value = "0.25,0.5,1")]
        radii: String,
        /// `auto`, or a JSON list of points (heights `b` for the half-plane).
        #[arg(long, default_value = "auto")]
        points: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Squeezing certificates and circularity bounds.
    #[command(subcommand)]
    Squeeze(SqueezeCommand),
    /// Runs every suite on the bundled zoo and writes CSVs plus a manifest.
    VerifyAll,
}

#[derive(Subcommand, Debug)]
pub enum ScaleCommand {
    /// Scaling audit along an automorphism schedule toward a boundary point.
    Audit {
        /// Model used when no domain is given: ball or polydisc.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoxCommand {
    /// Lemma boxes of random symmetric polytopes (CSV).
    Stress {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 500)]
        instances: usize,
        /// Vertex pairs per polytope (default: varies with the instance).
        #[arg(long)]
        pairs: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SqueezeCommand {
    /// Corner pipeline along `x_k -> corner` (CSV).
    Sweep {
        #[arg(long)]
        corner: String,
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
    },
    /// Squeeze certificate and circularity bound at one point.
    Point {
        #[arg(long)]
        at: String,
    },
}

/// Result of a command whose artifacts were written.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    /// An asserted property failed; carries the witness.
    Fail(String),
}

impl Outcome {
    fn of(passed: bool, witness: impl FnOnce() -> String) -> Self {
        if passed {
            Outcome::Pass
        } else {
            Outcome::Fail(witness())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail(_) => 1,
        }
    }
}

/// Exit status for an error: I/O, parse and usage problems are 2.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Spec { .. } | Error::Config(_) => 2,
        _ => 1,
    }
}

fn domain(g: &Global) -> Result<Domain> {
    let path = g.domain.as_deref().ok_or_else(|| Error::Config("--domain is required".into()))?;
    load_domain(path)
}

fn point(text: &str, d: &Domain) -> Result<CVector> {
    let v = parse_vector(text)?;
    if v.dim() != d.dim() {
        return Err(Error::spec(format!("point {text} has dimension {}, domain has {}", v.dim(), d.dim())));
    }
    Ok(v)
}

fn metric_config(g: &Global) -> MetricConfig {
    MetricConfig { seed: g.seed, convention: g.convention.into(), ..MetricConfig::default() }
}

fn radii_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("radius {s:?}: {e}"))))
        .collect()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        return Err(Error::Config(format!("--tol must be positive, got {}", g.tol)));
    }
    let started = Instant::now();
    let mut manifest = Manifest::new(command_name(&cli.command), g);
    let out = g.out.as_deref();
    let cfg = metric_config(g);
    match &cli.command {
        Command::Metric { at, dir } => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let b = kobayashi_metric(&d, &point(at, &d)?, &point(dir, &d)?, &cfg)?;
            if b.is_exact() {
                println!("{:?}", b.upper);
            } else {
                println!("[{:?}, {:?}]", b.lower, b.upper);
            }
            emit_json_if(out, manifest.finish(started), &b)?;
            Ok(Outcome::of(b.lower <= b.upper, || format!("{b:?}")))
        }
        Command::Distance { from, to } => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let b = kobayashi_distance(&d, &point(from, &d)?, &point(to, &d)?, &cfg)?;
            if b.lower == b.upper {
                println!("{:?}", b.upper);
            } else {
                println!("[{:?}, {:?}]", b.lower, b.upper);
            }
            emit_json_if(out, manifest.finish(started), &b)?;
            Ok(Outcome::of(b.lower <= b.upper * (1.0 + 1e-12), || format!("{b:?}")))
        }
        Command::Indicatrix { at, count, convexify } => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let x = match at {
                Some(t) => point(t, &d)?,
                None => d.basepoint().clone(),
            };
            let ind = indicatrix(&d, &x, *count, *convexify, g.seed, &cfg)?;
            report::emit_csv(out, &ind.to_csv(), &manifest.finish(started))?;
            Ok(Outcome::of(ind.gauge.iter().all(|b| b.lower <= b.upper), || "inverted bracket".into()))
        }
        Command::Scale(ScaleCommand::Audit { family, target, steps, grid }) => {
            let d = match (&g.domain, family.as_deref()) {
                (Some(_), _) => domain(g)?,
                (None, Some(name)) => {
                    let n = parse_vector(target)?.dim();
                    match name {
                        "ball" => Domain::unit_ball(n)?,
                        "polydisc" => Domain::unit_polydisc(n)?,
                        other => return Err(Error::Config(format!("unknown family {other:?}"))),
                    }
                }
                (None, None) => return Err(Error::Config("--domain or --family is required".into())),
            };
            manifest.domain = Some(d.name().to_string());
            let target = point(target, &d)?;
            let p = d.basepoint().clone();
            let family = AutomorphismFamily::drag(d.clone(), p.clone(), target)?;
            let grid_pts = audit_grid(&d, &p, *grid, g.seed);
            let fcfg = FrameConfig { metric: cfg.clone(), ..FrameConfig::default() };
            let rep = equivalence_audit(&d, &family, &p, &geometric_schedule(*steps), &grid_pts, &fcfg)?;
            emit_json(out, manifest.finish(started), &rep)?;
            Ok(Outcome::of(rep.bounded && rep.max_grid_difference <= 1e-8, || {
                format!("distortion {} grid difference {}", rep.max_distortion, rep.max_grid_difference)
            }))
        }
        Command::Boxlemma(BoxCommand::Stress { dim, instances, pairs }) => {
            let (csv, failures) = suites::box_stress(*dim, *instances, *pairs, g.seed)?;
            report::emit_csv(out, &csv, &manifest.finish(started))?;
            Ok(Outcome::of(failures.is_empty(), || failures.join("\n")))
        }
        Command::Dominate { radii, points, samples } => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let rs = radii_list(radii)?;
            let dcfg = DominationConfig { tolerance: g.tol, ..DominationConfig::default() }.with_convention(g.convention.into());
            let upper_half_plane =
                d.dim() == 1 && matches!(d.kind(), DomainKind::HalfPlaneProduct { orientation: Orientation::Upper });
            let profile = if upper_half_plane {
                let bs: Vec<f64> = if points == "auto" {
                    vec![0.1, 1.0, 10.0]
                } else {
                    serde_json::from_str(points).map_err(|e| Error::Config(format!("--points: {e}")))?
                };
                verify_halfplane_domination(&bs, &rs, *samples, g.seed, &dcfg)?
            } else {
                let xs = if points == "auto" {
                    auto_points(&d, g.seed)
                } else {
                    let raw: Vec<serde_json::Value> =
                        serde_json::from_str(points).map_err(|e| Error::Config(format!("--points: {e}")))?;
                    raw.iter().map(|v| point(&v.to_string(), &d)).collect::<Result<_>>()?
                };
                verify_convex_domination(&d, &xs, &rs, *samples, g.seed, &dcfg)?
            };
            emit_json(out, manifest.finish(started), &profile)?;
            Ok(Outcome::of(profile.passed(), || {
                let bad: Vec<String> =
                    profile.cells.iter().filter(|c| !c.passed).map(|c| format!("{:?}", c)).collect();
                bad.join("\n")
            }))
        }
        Command::Squeeze(SqueezeCommand::Sweep { corner, steps, threshold }) => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let q = point(corner, &d)?;
            let scfg = SqueezeConfig { seed: g.seed, metric: cfg.clone(), ..SqueezeConfig::default() };
            let rep = asymptotics_sweep(&d, &q, &corner_schedule(&d, &q, *steps), *threshold, &scfg)?;
            report::emit_csv(out, &rep.to_csv(), &manifest.finish(started))?;
            Ok(Outcome::of(rep.passed, || format!("final ratio below {threshold}: {:?}", rep.rows.last())))
        }
        Command::Squeeze(SqueezeCommand::Point { at }) => {
            let d = domain(g)?;
            manifest.domain = Some(d.name().to_string());
            let x = point(at, &d)?;
            let scfg = SqueezeConfig { seed: g.seed, metric: cfg.clone(), ..SqueezeConfig::default() };
            let model = Domain::unit_polydisc(d.dim())?;
            let cert = squeeze_lower_bound(&d, &x, &model, None, &scfg)?;
            let bound = crate::circularity::circularity_lower_bound(&d, &x, std::slice::from_ref(&cert), &cfg)?;
            #[derive(Serialize)]
            struct PointReport<'a> {
                certificate: &'a crate::circularity::SqueezeCertificate,
                circularity: &'a crate::circularity::CircularityBound,
            }
            emit_json(out, manifest.finish(started), &PointReport { certificate: &cert, circularity: &bound })?;
            Ok(Outcome::of(cert.verification.holds(1e-9), || format!("{:?}", cert.verification)))
        }
        Command::VerifyAll => suites::verify_all(g, out.unwrap_or(Path::new("invmetric-verify")), manifest, started),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Metric { .. } => "metric",
        Command::Distance { .. } => "distance",
        Command::Indicatrix { .. } => "indicatrix",
        Command::Scale(_) => "scale audit",
        Command::Boxlemma(_) => "boxlemma stress",
        Command::Dominate { .. } => "dominate",
        Command::Squeeze(SqueezeCommand::Sweep { .. }) => "squeeze sweep",
        Command::Squeeze(SqueezeCommand::Point { .. }) => "squeeze point",
        Command::VerifyAll => "verify-all",
    }
}

/// Interior samples of the domain, pulled halfway toward `p`.
pub(crate) fn audit_grid(d: &Domain, p: &CVector, count: usize, seed: u64) -> Vec<CVector> {
    let mut s = Sampler::new(seed);
    d.sample_interior(&mut s, count)
        .into_iter()
        .map(|z| p.axpy(crate::C64::new(0.5, 0.0), &(&z - p)))
        .collect()
}

/// The basepoint and two seeded interior points.
pub(crate) fn auto_points(d: &Domain, seed: u64) -> Vec<CVector> {
    let mut s = Sampler::new(seed);
    let mut xs = vec![d.basepoint().clone()];
    xs.extend(audit_grid(d, d.basepoint(), 2, s.index(usize::MAX) as u64));
    xs
}

fn emit_json(out: Option<&Path>, manifest: Manifest, body: &impl Serialize) -> Result<()> {
    report::emit_json(out, &manifest, body)
}

fn emit_json_if(out: Option<&Path>, manifest: Manifest, body: &impl Serialize) -> Result<()> {
    match out {
        Some(_) => emit_json(out, manifest, body),
        None => Ok(()),
    }
}
