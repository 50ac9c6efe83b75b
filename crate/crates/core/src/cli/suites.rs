//! The `verify-all` suites and the box-lemma stress run.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{self, Manifest, SuiteEntry};
use super::{audit_grid, Global, Outcome};
use crate::circularity::{
    asymptotics_sweep, barth_check, circularity_lower_bound, corner_schedule, squeeze_lower_bound, SqueezeConfig,
};
use crate::convexbox::{box_lemma_bound, random_symmetric_polytope, slope_check};
use crate::domains::maps::{geometric_schedule, model_automorphism, AutomorphismFamily};
use crate::domains::{zoo, Domain, Orientation};
use crate::domination::{verify_convex_domination, verify_halfplane_domination, DominationConfig};
use crate::error::Result;
use crate::metrics::{kobayashi_metric, Convention, MetricConfig};
use crate::numeric::Sampler;
use crate::scaling::{equivalence_audit, volume_jacobian_check, FrameConfig};
use crate::{CVector, C64};

/// Radii used by the domination suites.
pub const DOMINATION_RADII: [f64; 8] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5];

fn csv_of<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let _ = w.serialize(r);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

struct Suite {
    name: &'static str,
    passed: bool,
    csv: String,
    detail: String,
}

#[derive(Serialize)]
struct BoxRow {
    instance: usize,
    pairs: usize,
    r_1: f64,
    slack: f64,
    alpha_max: Option<f64>,
    slope_bound: Option<f64>,
}

/// Lemma boxes for `instances` seeded polytopes in dimension `dim`; returns
/// the CSV body and one witness line per failure.
pub(crate) fn box_stress(dim: usize, instances: usize, pairs: Option<usize>, seed: u64) -> Result<(String, Vec<String>)> {
    let base = Sampler::new(seed ^ (dim as u64) << 32);
    let rows: Vec<(BoxRow, Option<String>)> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<(BoxRow, Option<String>)> {
            let mut s = base.fork(i as u64);
            let k = pairs.unwrap_or_else(|| dim + 1 + s.index(2 * dim + 2));
            let body = random_symmetric_polytope(dim, k, &mut s);
            let lemma = match box_lemma_bound(&body) {
                Ok(l) => l,
                Err(e) => {
                    let row = BoxRow { instance: i, pairs: k, r_1: f64::NAN, slack: f64::NAN, alpha_max: None, slope_bound: None };
                    return Ok((row, Some(format!("instance {i}: {e}"))));
                }
            };
            let mut fail = None;
            let (mut alpha_max, mut slope_bound) = (None, None);
            if dim == 2 {
                let sc = slope_check(&body, &lemma)?;
                if !sc.holds(1e-9) {
                    fail = Some(format!("instance {i}: slope {} exceeds {}", sc.alpha_max, sc.bound));
                }
                alpha_max = Some(sc.alpha_max);
                slope_bound = Some(sc.bound);
            }
            let row = BoxRow {
                instance: i,
                pairs: k,
                r_1: lemma.inradii[0],
                slack: lemma.containment.worst_slack,
                alpha_max,
                slope_bound,
            };
            Ok((row, fail))
        })
        .collect::<Result<_>>()?;
    let failures = rows.iter().filter_map(|r| r.1.clone()).collect();
    let body: Vec<BoxRow> = rows.into_iter().map(|r| r.0).collect();
    Ok((csv_of(&body), failures))
}

#[derive(Serialize)]
struct MetricRow {
    domain: String,
    k: usize,
    lower: f64,
    upper: f64,
    lower_method: String,
    upper_method: String,
}

fn metric_suite(seed: u64, cfg: &MetricConfig) -> Result<Suite> {
    let per_domain = 60;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (di, d) in zoo::standard().iter().enumerate() {
        let mut s = Sampler::new(seed).fork(di as u64);
        let xs = d.sample_interior(&mut s, per_domain);
        let vs: Vec<CVector> = (0..per_domain).map(|_| s.unit_direction(d.dim()).scale_real(s.uniform_in(0.1, 3.0))).collect();
        let out = xs
            .par_iter()
            .zip(&vs)
            .map(|(x, v)| kobayashi_metric(d, x, v, cfg))
            .collect::<Result<Vec<_>>>()?;
        for (k, b) in out.into_iter().enumerate() {
            let sound = b.lower <= b.upper;
            let tight = !d.is_model() || b.width() <= 1e-9 * b.upper.max(1.0);
            if !(sound && tight) {
                bad.push(format!("{} #{k}: {b:?}", d.name()));
            }
            rows.push(MetricRow {
                domain: d.name().to_string(),
                k,
                lower: b.lower,
                upper: b.upper,
                lower_method: b.lower_method.to_string(),
                upper_method: b.upper_method.to_string(),
            });
        }
    }
    let h = Domain::half_plane_product(1, Orientation::Upper)?;
    let i = CVector::new(vec![C64::new(0.0, 1.0)]);
    let k = kobayashi_metric(&h, &i, &CVector::from_reals(&[1.0]), cfg)?;
    if k.lower != 0.5 || k.upper != 0.5 {
        bad.push(format!("K(i; 1) = {k:?}"));
    }
    Ok(Suite { name: "metric", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

#[derive(Serialize)]
struct ScalingRow {
    domain: String,
    index: usize,
    parameter: f64,
    boundary_distance: f64,
    c1: f64,
    c2: f64,
    det_abs: f64,
    grid_difference: f64,
    composition_error: f64,
}

fn scaling_suite(seed: u64, cfg: &MetricConfig) -> Result<Suite> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let fcfg = FrameConfig { metric: cfg.clone(), ..FrameConfig::default() };
    for d in [Domain::unit_ball(2)?, Domain::unit_polydisc(2)?] {
        let p = CVector::zeros(2);
        let fam = AutomorphismFamily::drag(d.clone(), p.clone(), CVector::from_reals(&[1.0, 0.0]))?;
        let grid = audit_grid(&d, &p, 100, seed);
        let rep = equivalence_audit(&d, &fam, &p, &geometric_schedule(20), &grid, &fcfg)?;
        if !rep.bounded || rep.max_grid_difference > 1e-8 {
            bad.push(format!("{}: distortion {} grid {}", d.name(), rep.max_distortion, rep.max_grid_difference));
        }
        rows.extend(rep.records.iter().map(|r| ScalingRow {
            domain: d.name().to_string(),
            index: r.index,
            parameter: r.parameter,
            boundary_distance: r.boundary_distance,
            c1: r.c1,
            c2: r.c2,
            det_abs: r.det_abs,
            grid_difference: r.grid_difference,
            composition_error: r.composition_error,
        }));
    }
    Ok(Suite { name: "scaling", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

fn boxlemma_suite(seed: u64) -> Result<Suite> {
    let mut csv = String::new();
    let mut bad = Vec::new();
    for dim in [2, 3, 4] {
        let (body, failures) = box_stress(dim, 100, None, seed)?;
        // prefix the dimension column
        for (i, line) in body.lines().enumerate() {
            if i == 0 {
                if dim == 2 {
                    csv.push_str("dim,");
                    csv.push_str(line);
                    csv.push('\n');
                }
            } else {
                csv.push_str(&format!("{dim},{line}\n"));
            }
        }
        bad.extend(failures);
    }
    Ok(Suite { name: "boxlemma", passed: bad.is_empty(), csv, detail: bad.join("; ") })
}

#[derive(Serialize)]
struct DominationRow {
    domain: String,
    convention: Convention,
    center: String,
    r: f64,
    lambda: f64,
    bound: f64,
    analytic: Option<f64>,
    worst_gauge: f64,
    best_constant: f64,
    certified: usize,
}

fn halfplane_suite(seed: u64, tol: f64) -> Result<Suite> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for conv in [Convention::Standard, Convention::Paper] {
        let cfg = DominationConfig { tolerance: tol, ..DominationConfig::default() }.with_convention(conv);
        let p = verify_halfplane_domination(&[0.1, 1.0, 10.0], &DOMINATION_RADII, 1000, seed, &cfg)?;
        push_cells(&mut rows, &mut bad, &p);
    }
    Ok(Suite { name: "halfplane_domination", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

fn push_cells(rows: &mut Vec<DominationRow>, bad: &mut Vec<String>, p: &crate::domination::DominationProfile) {
    for c in &p.cells {
        if !c.passed {
            bad.push(format!("{} r={} worst {} vs {}", p.domain, c.r, c.worst_gauge, c.bound));
        }
        rows.push(DominationRow {
            domain: p.domain.clone(),
            convention: p.convention,
            center: format!("{:?}", c.center.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
            r: c.r,
            lambda: c.lambda,
            bound: c.bound,
            analytic: c.analytic,
            worst_gauge: c.worst_gauge,
            best_constant: c.best_constant,
            certified: c.certified,
        });
    }
}

fn convex_domination_suite(seed: u64, tol: f64, conv: Convention) -> Result<Suite> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let cfg = DominationConfig { tolerance: tol, ..DominationConfig::default() }.with_convention(conv);
    for d in [Domain::unit_polydisc(2)?, Domain::unit_ball(2)?, zoo::three_face_polyhedron()] {
        let p = verify_convex_domination(&d, &[d.basepoint().clone()], &[0.25, 0.5, 1.0], 500, seed, &cfg)?;
        push_cells(&mut rows, &mut bad, &p);
    }
    Ok(Suite { name: "convex_domination", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

#[derive(Serialize)]
struct JacobianRow {
    domain: String,
    samples: usize,
    det_sq: f64,
    volume_ratio: f64,
    std_error: f64,
    z_score: f64,
}

fn jacobian_suite(seed: u64, cfg: &MetricConfig) -> Result<Suite> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let cases = [(Domain::unit_polydisc(1)?, CVector::from_reals(&[0.5]), 1000), (Domain::unit_ball(2)?, CVector::from_reals(&[0.5, 0.0]), 100_000)];
    for (d, a, samples) in cases {
        let z = CVector::zeros(d.dim());
        let phi = model_automorphism(&d, &a, &z)?;
        let j = volume_jacobian_check(&d, &phi, &z, samples, seed, cfg)?;
        let ok = if d.dim() == 1 { j.relative_error <= 1e-9 } else { j.z_score <= 3.0 };
        if !ok {
            bad.push(format!("{}: {j:?}", d.name()));
        }
        rows.push(JacobianRow {
            domain: d.name().to_string(),
            samples,
            det_sq: j.det_sq,
            volume_ratio: j.volume_ratio,
            std_error: j.ratio_std_error,
            z_score: j.z_score,
        });
    }
    Ok(Suite { name: "jacobian", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

#[derive(Serialize)]
struct BarthRow {
    domain: String,
    samples: usize,
    max_discrepancy: f64,
    max_bracket_width: f64,
}

fn barth_suite(seed: u64, cfg: &MetricConfig) -> Result<Suite> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for d in [Domain::unit_ball(2)?, Domain::unit_polydisc(2)?, zoo::modulus_balanced()] {
        let b = barth_check(&d, 500, seed, cfg)?;
        let limit = if d.is_model() { 1e-9 } else { 1e-9_f64.max(b.max_bracket_width) };
        if b.max_discrepancy > limit {
            bad.push(format!("{}: {}", d.name(), b.max_discrepancy));
        }
        rows.push(BarthRow {
            domain: d.name().to_string(),
            samples: b.samples,
            max_discrepancy: b.max_discrepancy,
            max_bracket_width: b.max_bracket_width,
        });
    }
    Ok(Suite { name: "barth", passed: bad.is_empty(), csv: csv_of(&rows), detail: bad.join("; ") })
}

fn sweep_suite(seed: u64, cfg: &MetricConfig) -> Result<Suite> {
    let d = zoo::three_face_polyhedron();
    let q = CVector::from_reals(&[1.0, -1.0]);
    let scfg = SqueezeConfig { seed, metric: cfg.clone(), ..SqueezeConfig::default() };
    let rep = asymptotics_sweep(&d, &q, &corner_schedule(&d, &q, 12), 0.9, &scfg)?;
    let mut bad = Vec::new();
    if !rep.passed {
        bad.push(format!("final ratio {:?}", rep.rows.last().map(|r| r.ratio)));
    }
    // circularity arithmetic at the centre: c >= ratio^2
    let cert = squeeze_lower_bound(&d, d.basepoint(), &Domain::unit_polydisc(2)?, None, &scfg)?;
    let c = circularity_lower_bound(&d, d.basepoint(), std::slice::from_ref(&cert), cfg)?;
    if c.lower < cert.ratio * cert.ratio || !cert.verification.holds(1e-9) {
        bad.push(format!("centre certificate {:?} bound {}", cert.verification, c.lower));
    }
    Ok(Suite { name: "squeeze_sweep", passed: bad.is_empty(), csv: rep.to_csv(), detail: bad.join("; ") })
}

pub(super) fn verify_all(g: &Global, dir: &Path, mut manifest: Manifest, started: Instant) -> Result<Outcome> {
    let cfg = MetricConfig { seed: g.seed, convention: g.convention.into(), ..MetricConfig::default() };
    let seed = g.seed;
    type SuiteFn<'a> = Box<dyn Fn() -> Result<Suite> + 'a>;
    let runs: Vec<(&str, SuiteFn)> = vec![
        ("metric", Box::new(|| metric_suite(seed, &cfg))),
        ("scaling", Box::new(|| scaling_suite(seed, &cfg))),
        ("boxlemma", Box::new(|| boxlemma_suite(seed))),
        ("halfplane_domination", Box::new(|| halfplane_suite(seed, g.tol))),
        ("convex_domination", Box::new(|| convex_domination_suite(seed, g.tol, cfg.convention))),
        ("jacobian", Box::new(|| jacobian_suite(seed, &cfg))),
        ("barth", Box::new(|| barth_suite(seed, &cfg))),
        ("squeeze_sweep", Box::new(|| sweep_suite(seed, &cfg))),
    ];
    let mut failures = Vec::new();
    for (name, run) in runs {
        let suite = run().unwrap_or_else(|e| Suite { name: "", passed: false, csv: String::new(), detail: e.to_string() });
        let artifact = format!("{name}.csv");
        report::write_file(&dir.join(&artifact), &suite.csv)?;
        println!("{} {name}{}", if suite.passed { "PASS" } else { "FAIL" }, if suite.detail.is_empty() { String::new() } else { format!(": {}", suite.detail) });
        if !suite.passed {
            failures.push(format!("{name}: {}", suite.detail));
        }
        debug_assert!(suite.name.is_empty() || suite.name == name);
        manifest.suites.push(SuiteEntry { name: name.to_string(), passed: suite.passed, artifact, detail: suite.detail });
    }
    let manifest = manifest.finish(started);
    report::write_file(&dir.join("manifest.json"), &report::json(&manifest)?)?;
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures.join("\n")) })
}
