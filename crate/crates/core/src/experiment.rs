//! JSON experiment specs and the build, predict, verify pipeline.
//!
//! ```json
//! {
//!   "ring": {"zn": 4},
//!   "module": {"free": 1},
//!   "walk": {"coin_toss": {"alpha": "1/2"}},
//!   "P": {"weights": ["2/5", "1/5", "1/5", "1/5"]},
//!   "Q": {"uniform": true},
//!   "options": {"tol": 1e-8, "paths": ["general", "frobenius"]}
//! }
//! ```
//!
//! Every key except `ring` is optional: the module defaults to `R`, the walk
//! to affine, and both distributions to uniform.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::matrix::Matrix;
use crate::module::{build_cyclic_module, build_free_module, direct_sum, FiniteModule};
use crate::ring::{build_gf, build_product, build_zn, principal_ideal, quotient_ring, Elem, RingError, RingRef};
use crate::scalar::parse_rational;
use crate::spectrum::{
    pair_and_triple_agree, predicted_spectrum_frobenius, predicted_spectrum_in, predicted_spectrum_triple_in,
    predicted_spectrum_uniform, SpectralContext, SpectrumError, SpectrumPath, SpectrumReport, GROUPING_TOLERANCE,
};
use crate::verify::{verify_power_sums, VerificationReport, VerifyError, DEFAULT_TOLERANCE};
use crate::walk::{
    build_transition, irreducibility_report, Distribution, IrreducibilityReport, Polynomial, TransitionMatrix,
    WalkError, WalkKind, WalkSpec,
};
use crate::Rational;

/// Largest module accepted from a spec.
pub const MAX_STATES: usize = 4096;

/// Tolerance for comparing spectra produced by different paths.
pub const PATH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedJson,
    UnknownKey,
    MissingKey,
    WrongType,
    BadRational,
    InvalidValue,
    WeightCount,
    NegativeWeight,
    WeightSum,
    AlphaRange,
    ReducibleGf,
    InvalidRing,
    InvalidModule,
    UnknownElement,
    NotConstantOnAssociates,
    UnknownPath,
    TooLarge,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MalformedJson => "malformed_json",
            ErrorCode::UnknownKey => "unknown_key",
            ErrorCode::MissingKey => "missing_key",
            ErrorCode::WrongType => "wrong_type",
            ErrorCode::BadRational => "bad_rational",
            ErrorCode::InvalidValue => "invalid_value",
            ErrorCode::WeightCount => "weight_count",
            ErrorCode::NegativeWeight => "negative_weight",
            ErrorCode::WeightSum => "weight_sum",
            ErrorCode::AlphaRange => "alpha_range",
            ErrorCode::ReducibleGf => "reducible_gf",
            ErrorCode::InvalidRing => "invalid_ring",
            ErrorCode::InvalidModule => "invalid_module",
            ErrorCode::UnknownElement => "unknown_element",
            ErrorCode::NotConstantOnAssociates => "not_constant_on_associates",
            ErrorCode::UnknownPath => "unknown_path",
            ErrorCode::TooLarge => "too_large",
        }
    }
}

/// A spec problem located by a JSON path such as `$.P.weights[2]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecError {
    pub code: ErrorCode,
    pub path: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code.as_str(), self.path, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOptions {
    pub tol: f64,
    pub symmetrize: bool,
    pub paths: Vec<SpectrumPath>,
    pub out: Option<PathBuf>,
    pub dot: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            tol: DEFAULT_TOLERANCE,
            symmetrize: false,
            paths: vec![SpectrumPath::General],
            out: None,
            dot: false,
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub ring: RingRef,
    pub module: FiniteModule,
    pub walk: WalkSpec<Rational>,
    pub options: ExperimentOptions,
}

impl ExperimentSpec {
    pub fn walk_name(&self) -> String {
        walk_name(&self.walk.kind)
    }
}

pub fn walk_name(kind: &WalkKind<Rational>) -> String {
    match kind {
        WalkKind::CoinToss { alpha } => format!("coin_toss(alpha={alpha})"),
        WalkKind::Affine => "affine".into(),
        WalkKind::Polynomial(p) => {
            let terms: Vec<String> = p
                .terms()
                .map(|(&(i, j), c)| {
                    let coeff = if c.im.is_zero() { c.re.to_string() } else { format!("({}+{}i)", c.re, c.im) };
                    format!("{coeff}*x^{i}*y^{j}")
                })
                .collect();
            format!("poly({})", terms.join(" + "))
        }
    }
}

struct Parser {
    errors: Vec<SpecError>,
    symmetrize: bool,
}

impl Parser {
    fn err(&mut self, code: ErrorCode, path: &str, message: impl Into<String>) {
        self.errors.push(SpecError {
            code,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.err(ErrorCode::WrongType, path, "expected an object");
            return None;
        };
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(
                    ErrorCode::UnknownKey,
                    &format!("{path}.{key}"),
                    format!("unknown key; expected one of {}", allowed.join(", ")),
                );
            }
        }
        Some(obj)
    }

    /// A single-key object `{tag: body}`.
    fn tagged<'a>(&mut self, v: &'a Value, path: &str, tags: &[&str]) -> Option<(&'a str, &'a Value)> {
        let obj = self.object(v, path, tags)?;
        if obj.len() != 1 {
            self.err(ErrorCode::InvalidValue, path, format!("expected exactly one of {}", tags.join(", ")));
            return None;
        }
        let (k, body) = obj.iter().next().unwrap();
        tags.contains(&k.as_str()).then_some((k.as_str(), body))
    }

    fn uint(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = v.as_u64();
        if n.is_none() {
            self.err(ErrorCode::WrongType, path, "expected a nonnegative integer");
        }
        n
    }

    fn rational(&mut self, v: &Value, path: &str) -> Option<Rational> {
        let parsed = match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
            Value::Number(_) => {
                self.err(ErrorCode::BadRational, path, "write non-integer rationals as strings such as \"1/2\"");
                return None;
            }
            _ => None,
        };
        if parsed.is_none() {
            self.err(ErrorCode::BadRational, path, "expected a rational literal such as \"2/5\"");
        }
        parsed
    }

    fn element(&mut self, v: &Value, labels: &[String], path: &str) -> Option<Elem> {
        let found = match v {
            Value::Number(n) => n.as_u64().map(|i| i as usize).filter(|&i| i < labels.len()),
            Value::String(s) => labels.iter().position(|l| l == s),
            _ => None,
        };
        if found.is_none() {
            self.err(ErrorCode::UnknownElement, path, format!("no element {v} among {} elements", labels.len()));
        }
        found
    }

    fn ring(&mut self, v: &Value, path: &str) -> Option<RingRef> {
        let (tag, body) = self.tagged(v, path, &["zn", "gf", "product", "quotient"])?;
        let here = format!("{path}.{tag}");
        let built = match tag {
            "zn" => {
                let n = self.uint(body, &here)?;
                if n > MAX_STATES as u64 {
                    self.err(ErrorCode::TooLarge, &here, format!("at most {MAX_STATES} elements"));
                    return None;
                }
                build_zn(n)
            }
            "gf" => {
                let obj = self.object(body, &here, &["p", "k", "poly"])?;
                let get = |k: &str| obj.get(k);
                let (Some(p), Some(k), Some(poly)) = (get("p"), get("k"), get("poly")) else {
                    self.err(ErrorCode::MissingKey, &here, "gf needs p, k and poly");
                    return None;
                };
                let p = self.uint(p, &format!("{here}.p"))?;
                let k = self.uint(k, &format!("{here}.k"))?;
                let Some(coeffs) = poly.as_array() else {
                    self.err(ErrorCode::WrongType, &format!("{here}.poly"), "expected coefficients, constant term first");
                    return None;
                };
                let mut cs = Vec::new();
                for (i, c) in coeffs.iter().enumerate() {
                    cs.push(self.uint(c, &format!("{here}.poly[{i}]"))?);
                }
                if p.checked_pow(k as u32).is_none_or(|q| q > MAX_STATES as u64) {
                    self.err(ErrorCode::TooLarge, &here, format!("at most {MAX_STATES} elements"));
                    return None;
                }
                build_gf(p, k as u32, &cs)
            }
            "product" => {
                let Some(parts) = body.as_array() else {
                    self.err(ErrorCode::WrongType, &here, "expected a list of rings");
                    return None;
                };
                let mut rings = Vec::new();
                for (i, part) in parts.iter().enumerate() {
                    rings.push(self.ring(part, &format!("{here}[{i}]"))?);
                }
                if rings.iter().map(|r| r.size()).product::<usize>() > MAX_STATES {
                    self.err(ErrorCode::TooLarge, &here, format!("at most {MAX_STATES} elements"));
                    return None;
                }
                build_product(&rings)
            }
            _ => {
                let obj = self.object(body, &here, &["ring", "ideal_of"])?;
                let (Some(inner), Some(gen)) = (obj.get("ring"), obj.get("ideal_of")) else {
                    self.err(ErrorCode::MissingKey, &here, "quotient needs ring and ideal_of");
                    return None;
                };
                let inner = self.ring(inner, &format!("{here}.ring"))?;
                let a = self.element(gen, inner.labels(), &format!("{here}.ideal_of"))?;
                quotient_ring(&inner, &principal_ideal(&inner, a)).map(|q| q.ring)
            }
        };
        match built {
            Ok(r) => Some(r),
            Err(e @ RingError::Reducible) => {
                self.err(ErrorCode::ReducibleGf, &here, e.to_string());
                None
            }
            Err(e) => {
                self.err(ErrorCode::InvalidRing, &here, e.to_string());
                None
            }
        }
    }

    fn module(&mut self, v: &Value, ring: &RingRef, path: &str) -> Option<FiniteModule> {
        let (tag, body) = self.tagged(v, path, &["free", "cyclic", "sum"])?;
        let here = format!("{path}.{tag}");
        let built = match tag {
            "free" => {
                let d = self.uint(body, &here)?;
                let too_big = (ring.size() as u64).checked_pow(d as u32).is_none_or(|n| n > MAX_STATES as u64);
                if too_big {
                    self.err(ErrorCode::TooLarge, &here, format!("at most {MAX_STATES} elements"));
                    return None;
                }
                build_free_module(ring, d as usize)
            }
            "cyclic" => {
                let obj = self.object(body, &here, &["ideal_of"])?;
                let Some(gen) = obj.get("ideal_of") else {
                    self.err(ErrorCode::MissingKey, &here, "cyclic needs ideal_of");
                    return None;
                };
                let a = self.element(gen, ring.labels(), &format!("{here}.ideal_of"))?;
                build_cyclic_module(ring, &principal_ideal(ring, a))
            }
            _ => {
                let Some(parts) = body.as_array() else {
                    self.err(ErrorCode::WrongType, &here, "expected a list of modules");
                    return None;
                };
                let mut mods = Vec::new();
                for (i, part) in parts.iter().enumerate() {
                    mods.push(self.module(part, ring, &format!("{here}[{i}]"))?);
                }
                if mods.iter().map(|m| m.size()).try_fold(1usize, |a, b| a.checked_mul(b)).is_none_or(|n| n > MAX_STATES) {
                    self.err(ErrorCode::TooLarge, &here, format!("at most {MAX_STATES} elements"));
                    return None;
                }
                direct_sum(&mods)
            }
        };
        match built {
            Ok(m) => Some(m),
            Err(e) => {
                self.err(ErrorCode::InvalidModule, &here, e.to_string());
                None
            }
        }
    }

    fn distribution(&mut self, v: Option<&Value>, labels: &[String], path: &str) -> Option<Distribution<Rational>> {
        let n = labels.len();
        let Some(v) = v else {
            return Some(Distribution::uniform(n));
        };
        let (tag, body) = self.tagged(v, path, &["uniform", "weights", "point_mass"])?;
        let here = format!("{path}.{tag}");
        let weights: Vec<Rational> = match tag {
            "uniform" => {
                if body != &Value::Bool(true) {
                    self.err(ErrorCode::InvalidValue, &here, "expected true");
                    return None;
                }
                return Some(Distribution::uniform(n));
            }
            "point_mass" => {
                let at = self.element(body, labels, &here)?;
                return Distribution::point_mass(n, at).ok();
            }
            _ => match body {
                Value::Array(items) => {
                    if items.len() != n {
                        self.err(ErrorCode::WeightCount, &here, format!("expected {n} weights, got {}", items.len()));
                        return None;
                    }
                    let mut ws = Vec::with_capacity(n);
                    for (i, item) in items.iter().enumerate() {
                        ws.push(self.rational(item, &format!("{here}[{i}]"))?);
                    }
                    ws
                }
                Value::Object(map) => {
                    let mut ws = vec![Rational::zero(); n];
                    for (key, item) in map {
                        let at = format!("{here}.{key}");
                        let Some(i) = labels.iter().position(|l| l == key) else {
                            self.err(ErrorCode::UnknownElement, &at, "no element with this label");
                            return None;
                        };
                        ws[i] = self.rational(item, &at)?;
                    }
                    ws
                }
                _ => {
                    self.err(ErrorCode::WrongType, &here, "expected a list or a map from labels to weights");
                    return None;
                }
            },
        };
        match Distribution::new(weights) {
            Ok(d) => Some(d),
            Err(WalkError::NegativeWeight(i)) => {
                self.err(ErrorCode::NegativeWeight, &format!("{here}[{i}]"), "weights must be nonnegative");
                None
            }
            Err(_) => {
                self.err(ErrorCode::WeightSum, &here, "weights must sum to 1");
                None
            }
        }
    }

    fn walk(&mut self, v: Option<&Value>, path: &str) -> Option<WalkKind<Rational>> {
        let Some(v) = v else {
            return Some(WalkKind::Affine);
        };
        if let Value::String(s) = v {
            if s == "affine" {
                return Some(WalkKind::Affine);
            }
            self.err(ErrorCode::InvalidValue, path, "expected \"affine\", {\"affine\": {}}, {\"coin_toss\": ...} or {\"poly\": ...}");
            return None;
        }
        let (tag, body) = self.tagged(v, path, &["affine", "coin_toss", "poly"])?;
        let here = format!("{path}.{tag}");
        match tag {
            "affine" => {
                self.object(body, &here, &[])?;
                Some(WalkKind::Affine)
            }
            "coin_toss" => {
                let obj = self.object(body, &here, &["alpha"])?;
                let Some(a) = obj.get("alpha") else {
                    self.err(ErrorCode::MissingKey, &here, "coin_toss needs alpha");
                    return None;
                };
                let alpha = self.rational(a, &format!("{here}.alpha"))?;
                if alpha < Rational::zero() || alpha > Rational::from_integer(1.into()) {
                    self.err(ErrorCode::AlphaRange, &format!("{here}.alpha"), "alpha must lie in [0, 1]");
                    return None;
                }
                Some(WalkKind::CoinToss { alpha })
            }
            _ => {
                let Some(terms) = body.as_array() else {
                    self.err(ErrorCode::WrongType, &here, "expected a list of [i, j, re, im] terms");
                    return None;
                };
                let mut out = Vec::new();
                for (t, term) in terms.iter().enumerate() {
                    let at = format!("{here}[{t}]");
                    let parts = term.as_array().filter(|p| p.len() == 3 || p.len() == 4);
                    let Some(parts) = parts else {
                        self.err(ErrorCode::WrongType, &at, "expected [i, j, re] or [i, j, re, im]");
                        return None;
                    };
                    let i = self.uint(&parts[0], &format!("{at}[0]"))?;
                    let j = self.uint(&parts[1], &format!("{at}[1]"))?;
                    let re = self.rational(&parts[2], &format!("{at}[2]"))?;
                    let im = match parts.get(3) {
                        Some(x) => self.rational(x, &format!("{at}[3]"))?,
                        None => Rational::zero(),
                    };
                    if i > 64 || j > 64 {
                        self.err(ErrorCode::InvalidValue, &at, "exponents above 64 are not supported");
                        return None;
                    }
                    out.push(((i as u32, j as u32), Complex::new(re, im)));
                }
                Some(WalkKind::Polynomial(Polynomial::new(out)))
            }
        }
    }

    fn options(&mut self, v: Option<&Value>, path: &str) -> ExperimentOptions {
        let mut opts = ExperimentOptions::default();
        let Some(v) = v else { return opts };
        let Some(obj) = self.object(v, path, &["tol", "symmetrize", "paths", "out", "dot"]) else {
            return opts;
        };
        if let Some(t) = obj.get("tol") {
            match t.as_f64().or_else(|| t.as_str().and_then(|s| s.parse().ok())) {
                Some(x) if x > 0.0 && x.is_finite() => opts.tol = x,
                _ => self.err(ErrorCode::InvalidValue, &format!("{path}.tol"), "expected a positive number"),
            }
        }
        for (key, slot) in [("symmetrize", &mut opts.symmetrize), ("dot", &mut opts.dot)] {
            if let Some(b) = obj.get(key) {
                match b.as_bool() {
                    Some(x) => *slot = x,
                    None => self.errors.push(SpecError {
                        code: ErrorCode::WrongType,
                        path: format!("{path}.{key}"),
                        message: "expected a boolean".into(),
                    }),
                }
            }
        }
        if let Some(p) = obj.get("paths") {
            let names: Option<Vec<&str>> = match p {
                Value::String(s) => Some(s.split(',').map(str::trim).collect()),
                Value::Array(xs) => xs.iter().map(Value::as_str).collect(),
                _ => None,
            };
            match names {
                Some(names) => match parse_paths(&names) {
                    Ok(paths) => opts.paths = paths,
                    Err(bad) => self.err(ErrorCode::UnknownPath, &format!("{path}.paths"), format!("unknown path {bad:?}")),
                },
                None => self.err(ErrorCode::WrongType, &format!("{path}.paths"), "expected a list of path names"),
            }
        }
        if let Some(o) = obj.get("out") {
            match o.as_str() {
                Some(s) => opts.out = Some(PathBuf::from(s)),
                None => self.err(ErrorCode::WrongType, &format!("{path}.out"), "expected a directory path"),
            }
        }
        self.symmetrize = opts.symmetrize;
        opts
    }
}

/// Parses `general,frobenius,...`; the general path is always included and
/// comes first.
pub fn parse_paths(names: &[&str]) -> Result<Vec<SpectrumPath>, String> {
    let mut paths = vec![SpectrumPath::General];
    for name in names {
        let p = SpectrumPath::parse(name).ok_or_else(|| name.to_string())?;
        if !paths.contains(&p) {
            paths.push(p);
        }
    }
    Ok(paths)
}

/// Parses and validates a spec. Errors carry a code and a JSON path.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, Vec<SpecError>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        vec![SpecError {
            code: ErrorCode::MalformedJson,
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        }]
    })?;
    let mut ps = Parser {
        errors: Vec::new(),
        symmetrize: false,
    };
    let Some(obj) = ps.object(&doc, "$", &["ring", "module", "walk", "P", "Q", "options"]) else {
        return Err(ps.errors);
    };
    let options = ps.options(obj.get("options"), "$.options");
    let kind = ps.walk(obj.get("walk"), "$.walk");
    let Some(ring_v) = obj.get("ring") else {
        ps.err(ErrorCode::MissingKey, "$.ring", "a ring is required");
        return Err(ps.errors);
    };
    let Some(ring) = ps.ring(ring_v, "$.ring") else {
        return Err(ps.errors);
    };
    let module = match obj.get("module") {
        Some(m) => ps.module(m, &ring, "$.module"),
        None => build_free_module(&ring, 1).ok(),
    };
    let Some(module) = module else {
        return Err(ps.errors);
    };
    let p = ps.distribution(obj.get("P"), module.labels(), "$.P");
    let q = ps.distribution(obj.get("Q"), ring.labels(), "$.Q");
    let (Some(kind), Some(p), Some(q)) = (kind, p, q) else {
        return Err(ps.errors);
    };
    if !ps.errors.is_empty() {
        return Err(ps.errors);
    }
    match WalkSpec::new(kind, p, q, &module, ps.symmetrize) {
        Ok(walk) => Ok(ExperimentSpec {
            ring,
            module,
            walk,
            options,
        }),
        Err(WalkError::NotConstantOnAssociates(v)) => Err(vec![SpecError {
            code: ErrorCode::NotConstantOnAssociates,
            path: "$.P".into(),
            message: format!(
                "P({}) != P({}) but the two are associates; set options.symmetrize to average over unit orbits",
                module.label(v.v),
                module.label(v.w)
            ),
        }]),
        Err(e) => Err(vec![SpecError {
            code: ErrorCode::InvalidValue,
            path: "$".into(),
            message: e.to_string(),
        }]),
    }
}

/// Spectra computed on each requested path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectraFile {
    pub dimension: usize,
    pub walk: String,
    pub paths: BTreeMap<SpectrumPath, SpectrumReport>,
    /// Paths that were requested but do not apply, with the reason.
    #[serde(default)]
    pub skipped: BTreeMap<SpectrumPath, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathVerification {
    pub verification: VerificationReport,
    /// Multiset agreement with the general path (pairwise per orbit for the
    /// triple path).
    pub agrees_with_general: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountIdentity {
    pub pair_count: usize,
    pub dimension: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationFile {
    pub pass: bool,
    pub tolerance: f64,
    pub walk: String,
    pub count_identity: CountIdentity,
    pub irreducibility: IrreducibilityReport,
    pub paths: BTreeMap<SpectrumPath, PathVerification>,
}

pub fn build_matrix(spec: &ExperimentSpec) -> TransitionMatrix<Rational> {
    build_transition(&spec.walk, &spec.module)
}

fn is_uniform(d: &Distribution<Rational>) -> bool {
    d.weights().windows(2).all(|w| w[0] == w[1])
}

pub fn compute_spectra(spec: &ExperimentSpec, ctx: &SpectralContext) -> Result<SpectraFile, SpectrumError> {
    let mut paths = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    for &path in &spec.options.paths {
        let report = match path {
            SpectrumPath::General => predicted_spectrum_in(&spec.walk, ctx),
            SpectrumPath::Triple => predicted_spectrum_triple_in(&spec.walk, ctx),
            SpectrumPath::Frobenius => match predicted_spectrum_frobenius(&spec.walk, &spec.module) {
                Err(e @ (SpectrumError::NotRegular | SpectrumError::NoGeneratingCharacter)) => {
                    skipped.insert(path, e.to_string());
                    continue;
                }
                other => other,
            },
            SpectrumPath::Uniform => match &spec.walk.kind {
                WalkKind::CoinToss { alpha } if is_uniform(&spec.walk.p) => {
                    predicted_spectrum_uniform(&spec.walk.q, alpha, &spec.module)
                }
                _ => {
                    skipped.insert(path, "needs a coin-toss walk with uniform P".into());
                    continue;
                }
            },
        };
        paths.insert(path, report?);
    }
    Ok(SpectraFile {
        dimension: spec.module.size(),
        walk: spec.walk_name(),
        paths,
        skipped,
    })
}

/// Verifies every spectrum in `spectra` against the matrix of `spec`.
pub fn verify_spectra(
    spec: &ExperimentSpec,
    ctx: &SpectralContext,
    matrix: &TransitionMatrix<Rational>,
    spectra: &SpectraFile,
) -> Result<VerificationFile, VerifyError> {
    let tol = spec.options.tol;
    let general = spectra.paths.get(&SpectrumPath::General);
    let mut paths = BTreeMap::new();
    for (&path, report) in &spectra.paths {
        let verification = verify_power_sums(matrix, report, tol)?;
        let agrees_with_general = match (path, general) {
            (SpectrumPath::General, _) | (_, None) => None,
            (SpectrumPath::Triple, Some(g)) => Some(pair_and_triple_agree(g, report, PATH_TOLERANCE)),
            (_, Some(g)) => Some(g.same_multiset(report, PATH_TOLERANCE)),
        };
        paths.insert(path, PathVerification { verification, agrees_with_general });
    }
    let pair_count = ctx.pair_count();
    let count_identity = CountIdentity {
        pair_count,
        dimension: spec.module.size(),
        holds: pair_count == spec.module.size(),
    };
    let pass = count_identity.holds
        && !paths.is_empty()
        && paths
            .values()
            .all(|p| p.verification.pass && p.agrees_with_general != Some(false));
    Ok(VerificationFile {
        pass,
        tolerance: tol,
        walk: spec.walk_name(),
        count_identity,
        irreducibility: irreducibility_report(&spec.walk, &spec.module),
        paths,
    })
}

/// Everything a run produces, serialized.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub matrix_csv: String,
    pub dot: Option<String>,
    pub spectra: SpectraFile,
    pub spectrum_json: String,
    pub spectrum_csv: String,
    pub verification: VerificationFile,
    pub verification_json: String,
}

#[derive(Debug)]
pub enum RunError {
    Spectrum(SpectrumError),
    Verify(VerifyError),
    Io(io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Spectrum(e) => write!(f, "{e}"),
            RunError::Verify(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Builds, predicts and verifies.
pub fn run(spec: &ExperimentSpec) -> Result<Artifacts, RunError> {
    let ctx = SpectralContext::new(&spec.module);
    let matrix = build_matrix(spec);
    let spectra = compute_spectra(spec, &ctx).map_err(RunError::Spectrum)?;
    let verification = verify_spectra(spec, &ctx, &matrix, &spectra).map_err(RunError::Verify)?;
    let general = &spectra.paths[&SpectrumPath::General];
    Ok(Artifacts {
        matrix_csv: matrix_csv(&matrix, spec.module.labels()),
        dot: spec.options.dot.then(|| matrix_dot(&matrix, spec.module.labels())),
        spectrum_json: to_json(&spectra),
        spectrum_csv: spectrum_csv(general),
        verification_json: to_json(&verification),
        spectra,
        verification,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn entry_text(z: &Complex<Rational>) -> String {
    if z.im.is_zero() {
        z.re.to_string()
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn matrix_rows(matrix: &TransitionMatrix<Rational>) -> Vec<Vec<String>> {
    let complex: Matrix<Complex<Rational>> = match matrix {
        TransitionMatrix::Real(m) => m.map(|x| Complex::new(x.clone(), Rational::zero())),
        TransitionMatrix::Complex(m) => m.clone(),
    };
    (0..complex.rows())
        .map(|i| complex.row(i).iter().map(entry_text).collect())
        .collect()
}

/// CSV with a header row of state labels and one labelled row per state.
pub fn matrix_csv(matrix: &TransitionMatrix<Rational>, labels: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["state".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (label, row) in labels.iter().zip(matrix_rows(matrix)) {
        let mut rec = vec![label.clone()];
        rec.extend(row);
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Grouped eigenvalues: `re,im,multiplicity`.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im", "multiplicity"]).expect("in-memory write");
    for g in report.grouped(GROUPING_TOLERANCE) {
        // Negative zero prints as "-0"; normalize for stable output.
        let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        w.write_record([clean(g.re).to_string(), clean(g.im).to_string(), g.multiplicity.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// The positive-entry transition graph in Graphviz DOT.
pub fn matrix_dot(matrix: &TransitionMatrix<Rational>, labels: &[String]) -> String {
    let mut out = String::from("digraph walk {\n");
    for (i, row) in matrix_rows(matrix).iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if entry != "0" {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", labels[i], labels[j], entry);
            }
        }
    }
    out.push_str("}\n");
    out
}

pub const MATRIX_FILE: &str = "matrix.csv";
pub const DOT_FILE: &str = "walk.dot";
pub const SPECTRUM_JSON_FILE: &str = "spectrum.json";
pub const SPECTRUM_CSV_FILE: &str = "spectrum.csv";
pub const VERIFICATION_FILE: &str = "verification.json";

impl Artifacts {
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut files = vec![
            (MATRIX_FILE, &self.matrix_csv),
            (SPECTRUM_JSON_FILE, &self.spectrum_json),
            (SPECTRUM_CSV_FILE, &self.spectrum_csv),
            (VERIFICATION_FILE, &self.verification_json),
        ];
        if let Some(dot) = &self.dot {
            files.push((DOT_FILE, dot));
        }
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Re-verifies a previously emitted `spectrum.json` against the spec's matrix.
pub fn reverify(spec: &ExperimentSpec, spectrum_json: &str) -> Result<VerificationFile, RunError> {
    let spectra: SpectraFile = serde_json::from_str(spectrum_json)
        .map_err(|e| RunError::Io(io::Error::new(io::ErrorKind::InvalidData, e)))?;
    let ctx = SpectralContext::new(&spec.module);
    verify_spectra(spec, &ctx, &build_matrix(spec), &spectra).map_err(RunError::Verify)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z4_AFFINE: &str = r#"{"ring":{"zn":4},"module":{"free":1},"walk":{"affine":{}},
        "P":{"weights":["2/5","1/5","1/5","1/5"]},"Q":{"weights":["1/10","3/10","1/5","2/5"]}}"#;

    fn codes(text: &str) -> Vec<(ErrorCode, String)> {
        parse_spec(text).unwrap_err().into_iter().map(|e| (e.code, e.path)).collect()
    }

    #[test]
    fn parses_z4_example() {
        let spec = parse_spec(Z4_AFFINE).unwrap();
        assert_eq!(spec.module.size(), 4);
        assert_eq!(spec.walk.kind, WalkKind::Affine);
        let art = run(&spec).unwrap();
        assert!(art.verification.pass);
        let vals = art.spectra.paths[&SpectrumPath::General].values();
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([-0.02, 0.14, 0.14, 1.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_ring_alone_is_valid() {
        let spec = parse_spec(r#"{"ring":{"zn":1}}"#).unwrap();
        assert_eq!(spec.module.size(), 1);
        assert!(run(&spec).unwrap().verification.pass);
    }

    #[test]
    fn error_codes_and_paths() {
        assert_eq!(codes("{not json")[0].0, ErrorCode::MalformedJson);
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"P":{"weights":["1/2","1/5","1/10","1/10"]}}"#),
            vec![(ErrorCode::WeightSum, "$.P.weights".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"walk":{"coin_toss":{"alpha":"3/2"}}}"#),
            vec![(ErrorCode::AlphaRange, "$.walk.coin_toss.alpha".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"gf":{"p":2,"k":2,"poly":[1,0,1]}}}"#),
            vec![(ErrorCode::ReducibleGf, "$.ring.gf".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"colour":1}"#),
            vec![(ErrorCode::UnknownKey, "$.colour".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"Q":{"weights":["1/2",0.5,0,0]}}"#),
            vec![(ErrorCode::BadRational, "$.Q.weights[1]".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"P":{"weights":["4/10","3/10","2/10","1/10"]}}"#),
            vec![(ErrorCode::NotConstantOnAssociates, "$.P".into())]
        );
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"options":{"paths":["general","fourier"]}}"#),
            vec![(ErrorCode::UnknownPath, "$.options.paths".into())]
        );
        assert_eq!(codes(r#"{"module":{"free":1}}"#), vec![(ErrorCode::MissingKey, "$.ring".into())]);
        assert_eq!(
            codes(r#"{"ring":{"zn":4},"P":{"weights":["1","0"]}}"#),
            vec![(ErrorCode::WeightCount, "$.P.weights".into())]
        );
        let both = codes(r#"{"ring":{"zn":4},"P":{"weights":["1/2","0","0","0"]},"Q":{"weights":["-1","1","1","0"]}}"#);
        assert_eq!(both.len(), 2);
    }

    #[test]
    fn symmetrize_option_repairs_p() {
        let spec = parse_spec(
            r#"{"ring":{"zn":4},"P":{"weights":["4/10","3/10","2/10","1/10"]},"options":{"symmetrize":true}}"#,
        )
        .unwrap();
        assert_eq!(spec.walk.p.weight(1), spec.walk.p.weight(3));
    }

    #[test]
    fn descriptors() {
        let spec = parse_spec(
            r#"{"ring":{"product":[{"zn":2},{"zn":4}]},"module":{"sum":[{"free":1},{"cyclic":{"ideal_of":"(0,2)"}}]},
                "walk":{"poly":[[2,1,"1"]]},"Q":{"weights":{"(1,1)":"1/2","(1,3)":"1/2"}},
                "options":{"paths":"general,triple,uniform","dot":true}}"#,
        )
        .unwrap();
        assert_eq!(spec.module.size(), 8 * 4);
        let art = run(&spec).unwrap();
        assert!(art.verification.pass, "{}", art.verification_json);
        assert!(art.spectra.skipped.contains_key(&SpectrumPath::Uniform));
        assert!(art.dot.unwrap().starts_with("digraph"));

        let spec = parse_spec(r#"{"ring":{"quotient":{"ring":{"zn":12},"ideal_of":4}},"walk":"affine"}"#).unwrap();
        assert_eq!(spec.ring.size(), 4);
        let spec = parse_spec(r#"{"ring":{"gf":{"p":3,"k":2,"poly":[1,0,1]}},"walk":{"coin_toss":{"alpha":"1/3"}},"options":{"paths":["frobenius","uniform"]}}"#).unwrap();
        let art = run(&spec).unwrap();
        assert!(art.verification.pass);
        assert_eq!(art.verification.paths.len(), 3);
    }

    #[test]
    fn outputs_are_deterministic_and_round_trip() {
        let spec = parse_spec(Z4_AFFINE).unwrap();
        let a = run(&spec).unwrap();
        let b = run(&spec).unwrap();
        assert_eq!(a.spectrum_json, b.spectrum_json);
        assert_eq!(a.verification_json, b.verification_json);
        assert_eq!(a.matrix_csv, b.matrix_csv);
        let again = reverify(&spec, &a.spectrum_json).unwrap();
        assert_eq!(to_json(&again), a.verification_json);
        assert!(a.matrix_csv.starts_with("state,0,1,2,3\n"));
    }
}
