//! JSON domain specifications.
//!
//! ```json
//! {"kind": "polyhedron", "dim": 2,
//!  "faces": [{"type": "modulus", "coeffs": [1, 0], "bound": 1}],
//!  "basepoint": [0, 0], "corners": [[1, -1]],
//!  "affine": {"linear": [[1, 0], [0, [0, 1]]], "translation": [0, 0]}}
//! ```
//!
//! Complex entries are numbers or `[re, im]` pairs. Validation failures
//! report the line of the offending key.

use std::path::Path;

use serde::Deserialize;

use super::{Domain, Face, Gauge, Orientation};
use crate::error::{Error, Result};
use crate::{AffineMap, CLinearMap, CVector, C64};

#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for C64 {
    fn from(c: ComplexRepr) -> C64 {
        match c {
            ComplexRepr::Real(x) => C64::new(x, 0.0),
            ComplexRepr::Pair([re, im]) => C64::new(re, im),
        }
    }
}

fn vector(v: &[ComplexRepr]) -> CVector {
    CVector::new(v.iter().map(|&c| c.into()).collect())
}

#[derive(Deserialize, Debug)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum FaceSpec {
    Modulus {
        coeffs: Vec<ComplexRepr>,
        #[serde(default)]
        shift: Option<ComplexRepr>,
        bound: f64,
    },
    Real {
        normal: Vec<ComplexRepr>,
        offset: f64,
    },
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    coeffs: Vec<ComplexRepr>,
    scale: f64,
}

#[derive(Deserialize, Debug)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GaugeSpec {
    Maxmodulus { terms: Vec<TermSpec> },
    Lp { p: f64, weights: Vec<f64> },
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct AffineSpec {
    linear: Vec<Vec<ComplexRepr>>,
    translation: Vec<ComplexRepr>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct DomainSpec {
    kind: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    radii: Option<Vec<f64>>,
    #[serde(default)]
    orientation: Option<Orientation>,
    #[serde(default)]
    faces: Option<Vec<FaceSpec>>,
    #[serde(default)]
    gauge: Option<GaugeSpec>,
    #[serde(default)]
    inner_radius: Option<f64>,
    #[serde(default)]
    basepoint: Option<Vec<ComplexRepr>>,
    #[serde(default)]
    corners: Option<Vec<Vec<ComplexRepr>>>,
    #[serde(default)]
    affine: Option<AffineSpec>,
}

/// First line (1-based) mentioning `"key"`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn at(text: &str, key: &str, e: Error) -> Error {
    let message = match e {
        Error::Spec { message, .. } => message,
        other => other.to_string(),
    };
    Error::Spec { message: format!("{key}: {message}"), line: line_of(text, key) }
}

/// Parses and validates a domain specification.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let spec: DomainSpec = serde_json::from_str(text)
        .map_err(|e| Error::Spec { message: e.to_string(), line: Some(e.line()) })?;
    let need_dim = |d: Option<usize>| -> Result<usize> {
        d.filter(|&n| n >= 1).ok_or_else(|| at(text, "kind", Error::spec("missing or zero \"dim\"")))
    };
    let mut domain = match spec.kind.as_str() {
        "ball" => Domain::unit_ball(need_dim(spec.dim)?).map_err(|e| at(text, "dim", e))?,
        "polydisc" => {
            let radii = match (&spec.radii, spec.dim) {
                (Some(r), _) => r.clone(),
                (None, Some(n)) => vec![1.0; n],
                (None, None) => return Err(at(text, "kind", Error::spec("polydisc needs \"radii\" or \"dim\""))),
            };
            if let (Some(n), Some(r)) = (spec.dim, &spec.radii) {
                if n != r.len() {
                    return Err(at(text, "radii", Error::DimensionMismatch { expected: n, found: r.len() }));
                }
            }
            Domain::polydisc(radii).map_err(|e| at(text, "radii", e))?
        }
        "halfplane" => Domain::half_plane_product(need_dim(spec.dim)?, spec.orientation.unwrap_or(Orientation::Upper))
            .map_err(|e| at(text, "dim", e))?,
        "polyhedron" => {
            let n = need_dim(spec.dim)?;
            let faces_spec = spec.faces.as_ref().ok_or_else(|| at(text, "kind", Error::spec("polyhedron needs \"faces\"")))?;
            let faces: Vec<Face> = faces_spec
                .iter()
                .map(|f| match f {
                    FaceSpec::Modulus { coeffs, shift, bound } => Face::Modulus {
                        coeffs: vector(coeffs),
                        shift: shift.map(C64::from).unwrap_or_default(),
                        bound: *bound,
                    },
                    FaceSpec::Real { normal, offset } => Face::Real { normal: vector(normal), offset: *offset },
                })
                .collect();
            let base = spec.basepoint.as_deref().map(vector).unwrap_or_else(|| CVector::zeros(n));
            base.check_dim(n).map_err(|e| at(text, "basepoint", e))?;
            Domain::polyhedron(faces, base).map_err(|e| match e {
                Error::NotInterior { .. } => at(text, "basepoint", e),
                other => at(text, "faces", other),
            })?
        }
        "balanced" => {
            let n = need_dim(spec.dim)?;
            let g = spec.gauge.as_ref().ok_or_else(|| at(text, "kind", Error::spec("balanced needs \"gauge\"")))?;
            let gauge = match g {
                GaugeSpec::Maxmodulus { terms } => Gauge::MaxModulus {
                    terms: terms.iter().map(|t| (vector(&t.coeffs), t.scale)).collect(),
                },
                GaugeSpec::Lp { p, weights } => Gauge::Lp { p: *p, weights: weights.clone() },
            };
            let r = spec.inner_radius.ok_or_else(|| at(text, "kind", Error::spec("balanced needs \"inner_radius\"")))?;
            Domain::balanced(n, gauge, r).map_err(|e| at(text, "gauge", e))?
        }
        other => return Err(at(text, "kind", Error::spec(format!("unknown kind {other:?}")))),
    };
    if let Some(cs) = &spec.corners {
        let corners = cs.iter().map(|c| vector(c)).collect();
        domain = domain.with_corners(corners).map_err(|e| at(text, "corners", e))?;
    }
    if spec.kind != "polyhedron" {
        if let Some(b) = &spec.basepoint {
            domain = domain.with_basepoint(vector(b)).map_err(|e| at(text, "basepoint", e))?;
        }
    }
    if let Some(a) = &spec.affine {
        let rows: Vec<Vec<C64>> = a.linear.iter().map(|r| r.iter().map(|&c| c.into()).collect()).collect();
        let linear = CLinearMap::from_rows(&rows).map_err(|e| at(text, "linear", e))?;
        let map = AffineMap::new(linear, vector(&a.translation)).map_err(|e| at(text, "translation", e))?;
        domain = Domain::affine_image(domain, map).map_err(|e| at(text, "affine", e))?;
    }
    if let Some(name) = spec.name {
        domain = domain.with_name(name);
    }
    Ok(domain)
}

/// Parses a point such as `[0, [1, -0.5]]`.
pub fn parse_vector(text: &str) -> Result<CVector> {
    let v: Vec<ComplexRepr> =
        serde_json::from_str(text).map_err(|e| Error::Spec { message: format!("vector {text:?}: {e}"), line: None })?;
    if v.is_empty() {
        return Err(Error::spec(format!("vector {text:?} is empty")));
    }
    Ok(vector(&v))
}

/// Reads and parses a specification file; I/O failures are spec errors.
pub fn load_domain(path: &Path) -> Result<Domain> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec { message: format!("{}: {e}", path.display()), line: None })?;
    parse_domain(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors() {
        let v = parse_vector("[0, [1, -0.5]]").unwrap();
        assert_eq!(v[1], C64::new(1.0, -0.5));
        assert!(parse_vector("[").is_err());
        assert!(parse_vector("[]").is_err());
    }

    #[test]
    fn parses_each_kind() {
        assert_eq!(parse_domain(r#"{"kind": "ball", "dim": 3}"#).unwrap().dim(), 3);
        let pd = parse_domain(r#"{"kind": "polydisc", "radii": [1, 2]}"#).unwrap();
        assert_eq!(pd.kind().label(), "polydisc");
        let hp = parse_domain(r#"{"kind": "halfplane", "dim": 1, "orientation": "left"}"#).unwrap();
        assert_eq!(hp.basepoint()[0], C64::new(-1.0, 0.0));
        let text = r#"{
  "kind": "polyhedron", "dim": 2, "name": "tri",
  "faces": [
    {"type": "modulus", "coeffs": [1, 0], "bound": 1},
    {"type": "modulus", "coeffs": [0, 1], "bound": 1},
    {"type": "modulus", "coeffs": [1, 1], "bound": 1.5}
  ],
  "corners": [[1, -1]]
}"#;
        let p = parse_domain(text).unwrap();
        assert_eq!(p.name(), "tri");
        assert_eq!(p.corners().len(), 1);
        let b = parse_domain(r#"{"kind": "balanced", "dim": 2, "inner_radius": 0.4,
            "gauge": {"type": "lp", "p": 4, "weights": [1, 2]}}"#)
        .unwrap();
        assert!(b.is_circular());
        let a = parse_domain(r#"{"kind": "ball", "dim": 2,
            "affine": {"linear": [[2, 0], [0, [0, 1]]], "translation": [1, [0, -1]]}}"#)
        .unwrap();
        assert_eq!(a.basepoint()[1], C64::new(0.0, -1.0));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = parse_domain("{\n  \"kind\": \"ball\",\n  \"dim\": ,\n}").unwrap_err();
        assert!(matches!(e, Error::Spec { line: Some(3), .. }), "{e:?}");
    }

    #[test]
    fn validation_errors_carry_lines() {
        let text = "{\n  \"kind\": \"polyhedron\",\n  \"dim\": 1,\n  \"faces\": [{\"type\": \"modulus\", \"coeffs\": [1], \"bound\": 1}],\n  \"basepoint\": [3]\n}";
        let e = parse_domain(text).unwrap_err();
        assert!(matches!(e, Error::Spec { line: Some(5), .. }), "{e:?}");
        let e = parse_domain("{\"kind\": \"torus\", \"dim\": 2}").unwrap_err();
        assert!(matches!(e, Error::Spec { line: Some(1), .. }));
    }

    #[test]
    fn missing_file_is_a_spec_error() {
        let e = load_domain(Path::new("/nonexistent/domain.json")).unwrap_err();
        assert!(matches!(e, Error::Spec { line: None, .. }));
    }
}
