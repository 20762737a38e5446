//! Confidence sets: membership predicates over opinion differences.
//!
//! Agent `i` trusts agent `j` when `ξ^j − ξ^i` belongs to the set. Each set
//! carries declared structural metadata (symmetry, whether it contains the
//! origin, a radius of a ball around the origin it contains) which the
//! certification routines spot-check by sampling.
//!
//! Boundary conventions: intervals and punctured intervals are open, ℓp
//! balls, stripes, min-coordinate sets, triangles and the unit disks of the
//! ray/line sets are closed.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, rat, Backend, Constant, Opinion, Rational, Scalar};
use crate::rng::SplitMix64;

/// Declared symmetry `O = −O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    DeclaredTrue,
    DeclaredFalse,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendSupport {
    ExactOnly,
    FloatOnly,
    Both,
}

impl BackendSupport {
    pub fn supports(self, backend: Backend) -> bool {
        matches!(
            (self, backend),
            (BackendSupport::Both, _)
                | (BackendSupport::ExactOnly, Backend::Exact)
                | (BackendSupport::FloatOnly, Backend::Float)
        )
    }

    fn intersect(self, other: BackendSupport) -> Option<BackendSupport> {
        use BackendSupport::*;
        match (self, other) {
            (Both, x) | (x, Both) => Some(x),
            (ExactOnly, ExactOnly) => Some(ExactOnly),
            (FloatOnly, FloatOnly) => Some(FloatOnly),
            _ => None,
        }
    }
}

/// Exponent of an ℓp ball.
#[derive(Debug, Clone, PartialEq)]
pub enum LpExponent {
    Integer(u32),
    Infinity,
    /// Non-integer exponent; only decidable in floating point.
    Real(f64),
}

impl LpExponent {
    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(LpExponent::Infinity);
        }
        let p = parse_rational(t)?;
        if !p.is_positive() {
            return Err(Error::Domain(format!("ℓp exponent must be positive, got {p}")));
        }
        if p.is_integer() {
            let k = p.to_integer().to_u32().ok_or_else(|| Error::Domain(format!("exponent {p} too large")))?;
            Ok(LpExponent::Integer(k))
        } else {
            Ok(LpExponent::Real(<f64 as Scalar>::from_rational(&p)))
        }
    }

    /// `‖v‖_p` evaluated in floating point.
    fn norm_f64(&self, v: &[f64]) -> f64 {
        match self {
            LpExponent::Infinity => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            LpExponent::Integer(p) => v.iter().map(|x| x.abs().powi(*p as i32)).sum::<f64>().powf(1.0 / *p as f64),
            LpExponent::Real(p) => v.iter().map(|x| x.abs().powf(*p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpExponent::Integer(p) => write!(f, "{p}"),
            LpExponent::Infinity => f.write_str("inf"),
            LpExponent::Real(p) => write!(f, "{p}"),
        }
    }
}

/// A ball `{v : ‖v‖_gauge < radius}` contained in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroNeighborhood {
    pub radius: Rational,
    pub gauge: LpExponent,
}

type ExactPredicate = Arc<dyn Fn(&[Rational]) -> bool + Send + Sync>;
type FloatPredicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
enum Shape {
    LpBall {
        p: LpExponent,
        bound: Constant,
    },
    Interval {
        low: Constant,
        high: Constant,
    },
    PuncturedInterval {
        low: Constant,
        high: Constant,
        punctures: Vec<Constant>,
    },
    Stripe {
        radius: Constant,
    },
    MinCoordinate {
        eps: Vec<Constant>,
    },
    Triangle {
        circumradius: Constant,
        half: Constant,
    },
    /// Rays `{(x, slope·x·s)}` with per-ray sign constraints, plus a closed
    /// disk of the given squared radius.
    RaysDisk {
        rays: Vec<Ray>,
        disk_sq: Constant,
    },
    /// At least one coordinate equals zero.
    CoordinateHyperplanes,
    Union(Vec<ConfidenceSet>),
    Custom {
        exact: Option<ExactPredicate>,
        float: Option<FloatPredicate>,
    },
}

/// A line or half-line through the origin: points `t·(1, slope)`;
/// `sign = Some(+1)` keeps `t > 0`, `Some(-1)` keeps `t < 0`.
#[derive(Clone, Debug)]
struct Ray {
    slope: Constant,
    sign: Option<i8>,
}

impl Ray {
    fn line(slope: Rational) -> Self {
        Ray { slope: Constant::new(slope), sign: None }
    }

    fn half(slope: Rational, sign: i8) -> Self {
        Ray { slope: Constant::new(slope), sign: Some(sign) }
    }

    fn contains<S: Scalar>(&self, v: &[S]) -> bool {
        let (x, y) = (&v[0], &v[1]);
        if *y != x.clone() * S::select(&self.slope).clone() {
            return false;
        }
        match self.sign {
            None => true,
            Some(s) if s > 0 => *x > S::zero(),
            Some(_) => *x < S::zero(),
        }
    }
}

/// Name and parameters a set was built from; the scenario-file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl SetSpec {
    pub fn new(name: &str, params: Value) -> Self {
        let params = match params {
            Value::Object(map) => map,
            _ => Map::new(),
        };
        SetSpec { name: name.to_owned(), params }
    }

    pub fn build(&self) -> Result<ConfidenceSet> {
        catalog_build(&self.name, &self.params)
    }
}

/// A confidence set `O ⊆ R^d` with declared metadata.
#[derive(Clone)]
pub struct ConfidenceSet {
    name: String,
    dim: usize,
    shape: Shape,
    symmetric: Symmetry,
    zero_member: bool,
    zero_neighborhood: Option<ZeroNeighborhood>,
    support: BackendSupport,
    /// Boundary witnesses checked by the certifiers in addition to samples.
    witnesses: Vec<Vec<Rational>>,
    spec: Option<SetSpec>,
}

impl fmt::Debug for ConfidenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConfidenceSet")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("symmetric", &self.symmetric)
            .field("zero_member", &self.zero_member)
            .field("zero_neighborhood", &self.zero_neighborhood)
            .field("support", &self.support)
            .finish()
    }
}

impl ConfidenceSet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetric
    }

    pub fn zero_member(&self) -> bool {
        self.zero_member
    }

    pub fn zero_neighborhood(&self) -> Option<&ZeroNeighborhood> {
        self.zero_neighborhood.as_ref()
    }

    pub fn zero_neighborhood_radius(&self) -> Option<&Rational> {
        self.zero_neighborhood.as_ref().map(|z| &z.radius)
    }

    pub fn backend_support(&self) -> BackendSupport {
        self.support
    }

    /// The catalog form, when the set came from the catalog.
    pub fn spec(&self) -> Option<&SetSpec> {
        self.spec.as_ref()
    }

    pub fn witnesses(&self) -> &[Vec<Rational>] {
        &self.witnesses
    }

    pub fn check_backend(&self, backend: Backend) -> Result<()> {
        if self.support.supports(backend) {
            Ok(())
        } else {
            Err(Error::Backend { set: self.name.clone(), backend })
        }
    }

    /// Whether `v ∈ O`.
    pub fn contains<S: Scalar>(&self, v: &Opinion<S>) -> Result<bool> {
        if v.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "set `{}` has dimension {}, query has {}",
                self.name,
                self.dim,
                v.dim()
            )));
        }
        self.check_backend(S::BACKEND)?;
        Ok(self.member(v.coords()))
    }

    /// Unchecked membership on a coordinate slice. Callers guarantee the
    /// dimension and backend (see [`ConfidenceSet::check_backend`]).
    pub(crate) fn member<S: Scalar>(&self, v: &[S]) -> bool {
        match &self.shape {
            Shape::LpBall { p, bound } => match p {
                LpExponent::Infinity => v.iter().all(|x| x.abs() <= *S::select(bound)),
                LpExponent::Integer(k) => {
                    let sum = v.iter().fold(S::zero(), |acc, x| acc + int_pow(&x.abs(), *k));
                    sum <= *S::select(bound)
                }
                LpExponent::Real(p) => {
                    let sum: f64 = v.iter().map(|x| x.to_float().abs().powf(*p)).sum();
                    sum <= bound.float() + 1e-12
                }
            },
            Shape::Interval { low, high } => {
                let x = &v[0];
                *S::select(low) < *x && *x < *S::select(high)
            }
            Shape::PuncturedInterval { low, high, punctures } => {
                let x = &v[0];
                *S::select(low) < *x && *x < *S::select(high) && punctures.iter().all(|p| *S::select(p) != *x)
            }
            Shape::Stripe { radius } => {
                let sum = v.iter().fold(S::zero(), |acc, x| acc + x.clone());
                sum.abs() <= *S::select(radius)
            }
            Shape::MinCoordinate { eps } => v.iter().zip(eps).any(|(x, e)| x.abs() <= *S::select(e)),
            Shape::Triangle { circumradius, half } => {
                let (x, y) = (&v[0], &v[1]);
                let r = S::select(circumradius);
                if *y < -S::select(half).clone() || *y > *r {
                    return false;
                }
                let gap = r.clone() - y.clone();
                S::from_i64(3) * x.clone() * x.clone() <= gap.clone() * gap
            }
            Shape::RaysDisk { rays, disk_sq } => {
                let norm_sq = v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone();
                norm_sq <= *S::select(disk_sq) || rays.iter().any(|r| r.contains(v))
            }
            Shape::CoordinateHyperplanes => v.iter().any(|x| x.is_zero()),
            Shape::Union(members) => members.iter().any(|m| m.member(v)),
            Shape::Custom { exact, float } => match S::BACKEND {
                Backend::Exact => {
                    let exact = exact.as_ref().expect("backend checked");
                    let coords: Vec<Rational> = v.iter().map(|x| x.to_rational().expect("exact backend")).collect();
                    exact(&coords)
                }
                Backend::Float => {
                    let float = float.as_ref().expect("backend checked");
                    let coords: Vec<f64> = v.iter().map(S::to_float).collect();
                    float(&coords)
                }
            },
        }
    }

    /// Membership of an exact point, routed through whichever backend the
    /// set supports.
    pub fn contains_rational(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("expected {} coordinates, got {}", self.dim, v.len())));
        }
        if self.support.supports(Backend::Exact) {
            Ok(self.member(v))
        } else {
            let f: Vec<f64> = v.iter().map(<f64 as Scalar>::from_rational).collect();
            Ok(self.member(&f))
        }
    }

    /// A set defined by user predicates. Metadata is taken as declared and
    /// should be checked with the certifiers.
    pub fn custom(
        name: &str,
        dim: usize,
        exact: Option<ExactPredicate>,
        float: Option<FloatPredicate>,
        symmetric: Symmetry,
        zero_neighborhood: Option<Rational>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let support = match (&exact, &float) {
            (Some(_), Some(_)) => BackendSupport::Both,
            (Some(_), None) => BackendSupport::ExactOnly,
            (None, Some(_)) => BackendSupport::FloatOnly,
            (None, None) => return Err(Error::Domain("custom set needs at least one predicate".into())),
        };
        let mut set = ConfidenceSet {
            name: name.to_owned(),
            dim,
            shape: Shape::Custom { exact, float },
            symmetric,
            zero_member: false,
            zero_neighborhood: zero_neighborhood
                .map(|radius| ZeroNeighborhood { radius, gauge: LpExponent::Integer(2) }),
            support,
            witnesses: Vec::new(),
            spec: None,
        };
        set.zero_member = set.contains_rational(&vec![Rational::zero(); dim])?;
        Ok(set)
    }

    /// Union with another set of the same dimension.
    pub fn union(members: Vec<ConfidenceSet>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::Domain("union of no sets".into()))?;
        let dim = first.dim;
        let mut support = BackendSupport::Both;
        for m in &members {
            if m.dim != dim {
                return Err(Error::Dimension(format!("union members have dimensions {} and {}", dim, m.dim)));
            }
            support = support
                .intersect(m.support)
                .ok_or_else(|| Error::Domain("union mixes exact-only and float-only members".into()))?;
        }
        let symmetric = if members.iter().all(|m| m.symmetric == Symmetry::DeclaredTrue) {
            Symmetry::DeclaredTrue
        } else {
            Symmetry::Unknown
        };
        let zero_member = members.iter().any(|m| m.zero_member);
        // Each member's ball lies inside the union; keep the largest.
        let zero_neighborhood =
            members.iter().filter_map(|m| m.zero_neighborhood.clone()).max_by(|a, b| a.radius.cmp(&b.radius));
        let witnesses = members.iter().flat_map(|m| m.witnesses.iter().cloned()).collect();
        let name = format!("union({})", members.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join(", "));
        let spec = members
            .iter()
            .map(|m| m.spec.clone())
            .collect::<Option<Vec<_>>>()
            .map(|specs| SetSpec::new("union", serde_json::json!({ "members": specs })));
        Ok(ConfidenceSet {
            name,
            dim,
            shape: Shape::Union(members),
            symmetric,
            zero_member,
            zero_neighborhood,
            support,
            witnesses,
            spec,
        })
    }

    fn sampling_radius(&self) -> Rational {
        let one = Rational::from_integer(1.into());
        match self.zero_neighborhood_radius() {
            Some(r) if *r > one => r.clone(),
            _ => one,
        }
    }
}

fn int_pow<S: Scalar>(x: &S, k: u32) -> S {
    let mut acc = S::one();
    for _ in 0..k {
        acc = acc * x.clone();
    }
    acc
}

fn rational_pow(x: &Rational, k: u32) -> Rational {
    num_traits::pow(x.clone(), k as usize)
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Names accepted by [`catalog_build`].
pub const CATALOG_NAMES: &[&str] = &[
    "lp_ball",
    "interval",
    "punctured_interval",
    "stripe",
    "min_coordinate",
    "triangle",
    "star_rays_example3",
    "lines_ball_example4",
    "cross_lines",
    "union",
    "custom",
];

struct Params<'a> {
    set: &'a str,
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => {
                value_to_rational(v).map(Some).map_err(|e| Error::Parse(format!("{}.params.{key}: {e}", self.set)))
            }
        }
    }

    fn required_rational(&self, key: &str) -> Result<Rational> {
        self.rational(key)?.ok_or_else(|| Error::Parse(format!("{}.params.{key}: missing", self.set)))
    }

    fn dim(&self, default: usize) -> Result<usize> {
        match self.raw("dim") {
            None | Some(Value::Null) => Ok(default),
            Some(Value::Number(n)) => match n.as_u64() {
                Some(d) if d >= 1 => Ok(d as usize),
                _ => Err(Error::Domain(format!("{}.params.dim must be a positive integer", self.set))),
            },
            Some(_) => Err(Error::Parse(format!("{}.params.dim must be an integer", self.set))),
        }
    }

    fn rational_list(&self, key: &str) -> Result<Vec<Rational>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| value_to_rational(v).map_err(|e| Error::Parse(format!("{}.params.{key}: {e}", self.set))))
                .collect(),
            Some(_) => Err(Error::Parse(format!("{}.params.{key} must be a list", self.set))),
        }
    }
}

/// Reads a rational from a JSON string (`"1/3"`, `"0.1"`) or number. Numbers
/// are parsed from their source text, never through `f64`.
pub fn value_to_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a number or rational string, got {other}"))),
    }
}

/// Builds a catalog set by name.
pub fn catalog_build(name: &str, params: &Map<String, Value>) -> Result<ConfidenceSet> {
    let p = Params { set: name, map: params };
    let mut set = match name {
        "lp_ball" => {
            let dim = p.dim(2)?;
            let exponent = match p.raw("p") {
                None => LpExponent::Integer(2),
                Some(Value::String(s)) => LpExponent::parse(s)?,
                Some(Value::Number(n)) => LpExponent::parse(&n.to_string())?,
                Some(_) => return Err(Error::Parse("lp_ball.params.p must be a number or \"inf\"".into())),
            };
            let radius = p.rational("radius")?.unwrap_or_else(|| rat(1, 1));
            lp_ball(dim, exponent, radius)?
        }
        "interval" => interval(p.required_rational("low")?, p.required_rational("high")?)?,
        "punctured_interval" => punctured_interval(
            p.required_rational("low")?,
            p.required_rational("high")?,
            p.rational_list("punctures")?,
        )?,
        "stripe" => stripe(p.dim(2)?, p.rational("radius")?.unwrap_or_else(|| rat(1, 1)))?,
        "min_coordinate" => {
            let eps = match p.raw("eps") {
                Some(Value::Array(_)) => p.rational_list("eps")?,
                _ => {
                    let e = p.rational("eps")?.unwrap_or_else(|| rat(1, 10));
                    vec![e; p.dim(2)?]
                }
            };
            min_coordinate(eps)?
        }
        "triangle" => triangle(p.rational("circumradius")?.unwrap_or_else(|| rat(1, 1)))?,
        "star_rays_example3" => star_rays(),
        "lines_ball_example4" => lines_ball(),
        "cross_lines" => cross_lines(p.dim(2)?)?,
        "union" => {
            let members = match p.raw("members") {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|item| {
                        let spec: SetSpec = serde_json::from_value(item.clone())
                            .map_err(|e| Error::Parse(format!("union.params.members: {e}")))?;
                        spec.build()
                    })
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(Error::Parse("union.params.members must be a list of sets".into())),
            };
            return ConfidenceSet::union(members);
        }
        "custom" => {
            return Err(Error::Catalog(
                "custom sets carry code predicates and are built with ConfidenceSet::custom".into(),
            ))
        }
        other => {
            return Err(Error::Catalog(format!(
                "unknown confidence set `{other}` (known: {})",
                CATALOG_NAMES.join(", ")
            )))
        }
    };
    set.spec = Some(SetSpec { name: name.to_owned(), params: params.clone() });
    Ok(set)
}

fn base(name: String, dim: usize, shape: Shape) -> ConfidenceSet {
    ConfidenceSet {
        name,
        dim,
        shape,
        symmetric: Symmetry::DeclaredTrue,
        zero_member: true,
        zero_neighborhood: None,
        support: BackendSupport::Both,
        witnesses: Vec::new(),
        spec: None,
    }
}

fn positive(value: &Rational, what: &str) -> Result<()> {
    if value.is_positive() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {value}")))
    }
}

/// Closed ℓp ball `{ξ : Σ|ξ_k|^p ≤ R^p}`.
pub fn lp_ball(dim: usize, p: LpExponent, radius: Rational) -> Result<ConfidenceSet> {
    positive(&radius, "ℓp radius")?;
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let (bound, support) = match &p {
        LpExponent::Infinity => (Constant::new(radius.clone()), BackendSupport::Both),
        LpExponent::Integer(k) => (Constant::new(rational_pow(&radius, *k)), BackendSupport::Both),
        LpExponent::Real(q) => {
            if q.is_nan() || *q <= 0.0 {
                return Err(Error::Domain(format!("ℓp exponent must be positive, got {q}")));
            }
            let r = <f64 as Scalar>::from_rational(&radius);
            (Constant::with_float(radius.clone(), r.powf(*q)), BackendSupport::FloatOnly)
        }
    };
    let mut set = base(format!("lp_ball(p={p}, R={radius})"), dim, Shape::LpBall { p: p.clone(), bound });
    set.support = support;
    let mut boundary = vec![Rational::zero(); dim];
    boundary[0] = radius.clone();
    set.witnesses = vec![boundary];
    set.zero_neighborhood = Some(ZeroNeighborhood { radius, gauge: p });
    Ok(set)
}

/// Open interval `(low, high)`.
pub fn interval(low: Rational, high: Rational) -> Result<ConfidenceSet> {
    punctured(format!("interval({low}, {high})"), low, high, Vec::new())
}

/// Open interval with finitely many points removed.
pub fn punctured_interval(low: Rational, high: Rational, punctures: Vec<Rational>) -> Result<ConfidenceSet> {
    let list = punctures.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
    punctured(format!("punctured_interval({low}, {high}) \\ {{{list}}}"), low, high, punctures)
}

fn punctured(name: String, low: Rational, high: Rational, mut punctures: Vec<Rational>) -> Result<ConfidenceSet> {
    if low >= high {
        return Err(Error::Domain(format!("empty interval ({low}, {high})")));
    }
    punctures.sort();
    punctures.dedup();
    let symmetric = low == -high.clone() && punctures.iter().all(|p| punctures.contains(&-p.clone()));
    let zero = Rational::zero();
    let zero_member = low < zero && zero < high && !punctures.contains(&zero);
    let zero_neighborhood = if zero_member {
        let mut r = Signed::abs(&low).min(high.clone());
        for p in punctures.iter().filter(|p| !p.is_zero()) {
            r = r.min(Signed::abs(p));
        }
        Some(ZeroNeighborhood { radius: r, gauge: LpExponent::Integer(2) })
    } else {
        None
    };
    let mut witnesses: Vec<Vec<Rational>> = Vec::new();
    let mut marks = punctures.clone();
    marks.push(low.clone());
    marks.push(high.clone());
    marks.sort();
    for m in &marks {
        witnesses.push(vec![m.clone()]);
        witnesses.push(vec![-m.clone()]);
    }
    // Midpoints between consecutive marks: members that probe segments
    // crossing the punctures.
    for pair in marks.windows(2) {
        let mid = (&pair[0] + &pair[1]) / Rational::from_integer(2.into());
        witnesses.push(vec![mid.clone()]);
        witnesses.push(vec![-mid]);
    }
    let shape = if punctures.is_empty() {
        Shape::Interval { low: Constant::new(low), high: Constant::new(high) }
    } else {
        Shape::PuncturedInterval {
            low: Constant::new(low),
            high: Constant::new(high),
            punctures: punctures.into_iter().map(Constant::new).collect(),
        }
    };
    let mut set = base(name, 1, shape);
    set.symmetric = if symmetric { Symmetry::DeclaredTrue } else { Symmetry::DeclaredFalse };
    set.zero_member = zero_member;
    set.zero_neighborhood = zero_neighborhood;
    set.witnesses = witnesses;
    Ok(set)
}

/// Closed stripe `{ξ : |ξ_1 + … + ξ_d| ≤ R}`.
pub fn stripe(dim: usize, radius: Rational) -> Result<ConfidenceSet> {
    positive(&radius, "stripe radius")?;
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut set =
        base(format!("stripe(d={dim}, R={radius})"), dim, Shape::Stripe { radius: Constant::new(radius.clone()) });
    // ‖ξ‖_∞ < R/d implies |Σ ξ_k| < R.
    set.zero_neighborhood = Some(ZeroNeighborhood {
        radius: radius.clone() / Rational::from_integer(dim.into()),
        gauge: LpExponent::Infinity,
    });
    let mut far = vec![Rational::zero(); dim];
    far[0] = radius.clone() * Rational::from_integer(10.into());
    if dim > 1 {
        far[1] = -far[0].clone();
    }
    set.witnesses = vec![far];
    Ok(set)
}

/// Closed set `{ξ : |ξ_k| ≤ ε_k for some k}`.
pub fn min_coordinate(eps: Vec<Rational>) -> Result<ConfidenceSet> {
    if eps.is_empty() {
        return Err(Error::Domain("min_coordinate needs at least one ε".into()));
    }
    for e in &eps {
        positive(e, "min_coordinate ε")?;
    }
    let dim = eps.len();
    let radius = eps.iter().min().cloned().expect("nonempty");
    let list = eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
    let mut set = base(
        format!("min_coordinate(ε=[{list}])"),
        dim,
        Shape::MinCoordinate { eps: eps.iter().cloned().map(Constant::new).collect() },
    );
    set.zero_neighborhood = Some(ZeroNeighborhood { radius, gauge: LpExponent::Infinity });
    // A point on the boundary of the first band, far along the others.
    let mut w = vec![rat(5, 1); dim];
    w[0] = eps[0].clone();
    set.witnesses = vec![w];
    Ok(set)
}

/// Closed equilateral triangle, centroid at the origin, one vertex at
/// `(0, r)`. Vertices `(0, r)`, `(±r√3/2, −r/2)`; membership is decided
/// exactly via `ξ_2 ≥ −r/2`, `ξ_2 ≤ r`, `3ξ_1² ≤ (r − ξ_2)²`.
pub fn triangle(circumradius: Rational) -> Result<ConfidenceSet> {
    positive(&circumradius, "triangle circumradius")?;
    let half = circumradius.clone() / Rational::from_integer(2.into());
    let mut set = base(
        format!("triangle(r={circumradius})"),
        2,
        Shape::Triangle { circumradius: Constant::new(circumradius.clone()), half: Constant::new(half.clone()) },
    );
    set.symmetric = Symmetry::DeclaredFalse;
    // The inradius is r/2.
    set.zero_neighborhood = Some(ZeroNeighborhood { radius: half.clone(), gauge: LpExponent::Integer(2) });
    set.witnesses = vec![vec![Rational::zero(), circumradius.clone()], vec![Rational::zero(), -half]];
    Ok(set)
}

/// Rays `{ξ_1 > 0, ξ_2 = 0}`, `{ξ_2 = ξ_1/5 < 0}`, `{ξ_2 = −ξ_1/5 > 0}` plus
/// the closed unit disk.
pub fn star_rays() -> ConfidenceSet {
    let fifth = rat(1, 5);
    let rays = vec![
        Ray::half(Rational::zero(), 1),
        // ξ_2 = ξ_1/5 < 0 means ξ_1 < 0
        Ray::half(fifth.clone(), -1),
        // ξ_2 = −ξ_1/5 > 0 means ξ_1 < 0
        Ray::half(-fifth, -1),
    ];
    let mut set = base("star_rays_example3".into(), 2, Shape::RaysDisk { rays, disk_sq: Constant::new(rat(1, 1)) });
    set.symmetric = Symmetry::DeclaredFalse;
    set.zero_neighborhood = Some(ZeroNeighborhood { radius: rat(1, 1), gauge: LpExponent::Integer(2) });
    set.witnesses = vec![
        vec![rat(2, 1), rat(0, 1)],
        vec![rat(-5, 1), rat(-1, 1)],
        vec![rat(-5, 1), rat(1, 1)],
        vec![rat(5, 1), rat(1, 1)],
        vec![rat(1, 1), rat(0, 1)],
    ];
    set
}

/// Full lines `ξ_2 = 0`, `ξ_2 = ±ξ_1/5` plus the closed unit disk.
pub fn lines_ball() -> ConfidenceSet {
    let fifth = rat(1, 5);
    let rays = vec![Ray::line(Rational::zero()), Ray::line(fifth.clone()), Ray::line(-fifth)];
    let mut set = base("lines_ball_example4".into(), 2, Shape::RaysDisk { rays, disk_sq: Constant::new(rat(1, 1)) });
    set.zero_neighborhood = Some(ZeroNeighborhood { radius: rat(1, 1), gauge: LpExponent::Integer(2) });
    set.witnesses = vec![
        vec![rat(2, 1), rat(0, 1)],
        vec![rat(-5, 1), rat(-1, 1)],
        vec![rat(-5, 1), rat(1, 1)],
        vec![rat(5, 1), rat(1, 1)],
    ];
    set
}

/// Union of the coordinate hyperplanes; for `d = 2` the cross `{ξ_1 = 0} ∪ {ξ_2 = 0}`.
/// Contains the origin but no ball around it.
pub fn cross_lines(dim: usize) -> Result<ConfidenceSet> {
    if dim < 2 {
        return Err(Error::Domain("cross_lines needs dimension ≥ 2".into()));
    }
    let mut set = base(format!("cross_lines(d={dim})"), dim, Shape::CoordinateHyperplanes);
    let mut on_axis = vec![rat(3, 1); dim];
    on_axis[0] = Rational::zero();
    set.witnesses = vec![on_axis, vec![rat(1, 1000); dim]];
    Ok(set)
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

fn sample_box(set: &ConfidenceSet, rng: &mut SplitMix64) -> Vec<Rational> {
    let half = set.sampling_radius() * Rational::from_integer(2.into());
    let low = -half.clone();
    (0..set.dim).map(|_| rng.uniform_rational(&low, &half)).collect()
}

/// Sampling test of `O = −O`: `samples` uniform points from the box of side
/// `4·max(1, R)` centred at the origin plus every boundary witness. Returns
/// false at the first `v` with `v ∈ O` but `−v ∉ O` (or vice versa).
pub fn is_symmetric_certified(set: &ConfidenceSet, samples: usize, seed: u64) -> bool {
    let mut rng = SplitMix64::new(seed);
    let mut points: Vec<Vec<Rational>> = set.witnesses.clone();
    points.extend((0..samples).map(|_| sample_box(set, &mut rng)));
    points.iter().all(|v| {
        let neg: Vec<Rational> = v.iter().map(|x| -x.clone()).collect();
        set.contains_rational(v).ok() == set.contains_rational(&neg).ok()
    })
}

/// Sampling test of star-shapedness at the origin: for every sampled member
/// `x` (and every member witness) the `segment_points` evenly spaced points
/// of `[0, x]`, together with the set's known critical points on that
/// segment, must all be members.
pub fn is_star_shaped_certified(set: &ConfidenceSet, samples: usize, segment_points: usize, seed: u64) -> bool {
    let segment_points = segment_points.max(2);
    let mut rng = SplitMix64::new(seed);
    let mut points: Vec<Vec<Rational>> = set.witnesses.clone();
    points.extend((0..samples).map(|_| sample_box(set, &mut rng)));
    let steps = Rational::from_integer((segment_points - 1).into());
    for x in points {
        if !set.contains_rational(&x).unwrap_or(false) {
            continue;
        }
        let mut fractions: Vec<Rational> =
            (0..segment_points).map(|j| Rational::from_integer(j.into()) / steps.clone()).collect();
        fractions.extend(critical_fractions(set, &x));
        for t in fractions {
            let point: Vec<Rational> = x.iter().map(|c| c * &t).collect();
            if !set.contains_rational(&point).unwrap_or(false) {
                return false;
            }
        }
    }
    true
}

/// Fractions `t ∈ (0, 1)` where `t·x` may hit a removed point of the set.
fn critical_fractions(set: &ConfidenceSet, x: &[Rational]) -> Vec<Rational> {
    match &set.shape {
        Shape::PuncturedInterval { punctures, .. } if !x[0].is_zero() => punctures
            .iter()
            .map(|p| p.exact() / &x[0])
            .filter(|t| t.is_positive() && *t < Rational::from_integer(1.into()))
            .collect(),
        Shape::Union(members) => members.iter().flat_map(|m| critical_fractions(m, x)).collect(),
        _ => Vec::new(),
    }
}

/// Spot check of the declared zero-neighbourhood: sampled points with
/// `‖v‖_gauge < R` must be members.
pub fn is_zero_neighborhood_certified(set: &ConfidenceSet, samples: usize, seed: u64) -> bool {
    let Some(zn) = set.zero_neighborhood() else {
        return false;
    };
    let mut rng = SplitMix64::new(seed);
    let low = -zn.radius.clone();
    let r = <f64 as Scalar>::from_rational(&zn.radius);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < samples && attempts < samples * 64 {
        attempts += 1;
        let v: Vec<Rational> = (0..set.dim).map(|_| rng.uniform_rational(&low, &zn.radius)).collect();
        let f: Vec<f64> = v.iter().map(<f64 as Scalar>::from_rational).collect();
        // Stay strictly inside, away from float rounding at the boundary.
        if zn.gauge.norm_f64(&f) >= r * (1.0 - 1e-9) {
            continue;
        }
        checked += 1;
        if !set.contains_rational(&v).unwrap_or(false) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn build(name: &str, params: Value) -> ConfidenceSet {
        SetSpec::new(name, params).build().unwrap()
    }

    fn q(p: i64) -> Opinion<Rational> {
        Opinion::new(vec![rat(p, 1)]).unwrap()
    }

    fn q2(a: (i64, i64), b: (i64, i64)) -> Opinion<Rational> {
        Opinion::new(vec![rat(a.0, a.1), rat(b.0, b.1)]).unwrap()
    }

    fn example2_set() -> ConfidenceSet {
        build("punctured_interval", json!({"low": -7, "high": 7, "punctures": [1, -1, 3, -3, 5, -5, -4, -2, 6]}))
    }

    #[test]
    fn punctured_interval_membership() {
        let set = example2_set();
        assert!(!set.contains(&q(1)).unwrap());
        assert!(set.contains(&q(-6)).unwrap());
        assert!(!set.contains(&q(7)).unwrap());
        assert!(!set.contains(&q(6)).unwrap());
        assert!(set.contains(&q(4)).unwrap());
        assert!(set.contains(&q(0)).unwrap());
        assert_eq!(set.symmetry(), Symmetry::DeclaredFalse);
        assert_eq!(set.zero_neighborhood_radius(), Some(&rat(1, 1)));
    }

    #[test]
    fn lp_ball_metadata_and_membership() {
        let ball = build("lp_ball", json!({"p": 2, "radius": 1, "dim": 2}));
        assert!(ball.contains(&q2((0, 1), (0, 1))).unwrap());
        assert!(ball.contains(&q2((3, 5), (4, 5))).unwrap(), "closed boundary");
        assert!(!ball.contains(&q2((3, 5), (81, 100))).unwrap());
        assert_eq!(ball.symmetry(), Symmetry::DeclaredTrue);
        assert_eq!(ball.zero_neighborhood_radius(), Some(&rat(1, 1)));

        let l1 = build("lp_ball", json!({"p": "1", "radius": "1"}));
        assert!(l1.contains(&q2((1, 2), (-1, 2))).unwrap());
        assert!(!l1.contains(&q2((1, 2), (51, 100))).unwrap());
        let linf = build("lp_ball", json!({"p": "inf", "radius": "1/2"}));
        assert!(linf.contains(&q2((1, 2), (-1, 2))).unwrap());
        assert!(!linf.contains(&q2((1, 2), (-51, 100))).unwrap());
    }

    #[test]
    fn fractional_lp_is_float_only() {
        let ball = build("lp_ball", json!({"p": "0.5", "radius": 1}));
        assert_eq!(ball.backend_support(), BackendSupport::FloatOnly);
        assert!(matches!(ball.contains(&q2((0, 1), (0, 1))), Err(Error::Backend { .. })));
        let inside = Opinion::new(vec![0.25, 0.25]).unwrap();
        assert!(ball.contains(&inside).unwrap(), "√.25 + √.25 = 1 is on the boundary");
        let outside = Opinion::new(vec![0.3, 0.3]).unwrap();
        assert!(!ball.contains(&outside).unwrap());
    }

    #[test]
    fn min_coordinate_membership() {
        let set = build("min_coordinate", json!({"eps": ["0.1", "0.1"]}));
        let a = Opinion::new(vec![rat(5, 100), rat(3, 1)]).unwrap();
        let b = Opinion::new(vec![rat(2, 10), rat(2, 10)]).unwrap();
        assert!(set.contains(&a).unwrap());
        assert!(!set.contains(&b).unwrap());
        assert!(set.contains(&Opinion::new(vec![rat(1, 10), rat(9, 1)]).unwrap()).unwrap());
    }

    #[test]
    fn cross_lines_membership_and_metadata() {
        let set = build("cross_lines", json!({}));
        assert!(set.contains(&q2((0, 1), (-2, 1))).unwrap());
        assert!(!set.contains(&q2((-2, 1), (-2, 1))).unwrap());
        assert!(set.zero_member());
        assert!(set.zero_neighborhood_radius().is_none());
        assert_eq!(set.symmetry(), Symmetry::DeclaredTrue);
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(catalog_build("nope", &Map::new()), Err(Error::Catalog(_))));
        assert!(matches!(SetSpec::new("lp_ball", json!({"radius": 0})).build(), Err(Error::Domain(_))));
        assert!(matches!(SetSpec::new("lp_ball", json!({"p": "-1"})).build(), Err(Error::Domain(_))));
        assert!(matches!(SetSpec::new("lp_ball", json!({"p": 0})).build(), Err(Error::Domain(_))));
        assert!(matches!(SetSpec::new("custom", json!({})).build(), Err(Error::Catalog(_))));
        assert!(matches!(SetSpec::new("interval", json!({"low": 1, "high": -1})).build(), Err(Error::Domain(_))));
    }

    #[test]
    fn triangle_membership() {
        let t = build("triangle", json!({}));
        assert!(t.contains(&q2((0, 1), (1, 1))).unwrap(), "top vertex");
        assert!(!t.contains(&q2((0, 1), (-1, 1))).unwrap());
        assert!(t.contains(&q2((0, 1), (-1, 2))).unwrap(), "bottom edge");
        assert!(t.contains(&q2((7, 10), (-2, 5))).unwrap());
        assert!(!t.contains(&q2((-7, 10), (2, 5))).unwrap());
        assert_eq!(t.symmetry(), Symmetry::DeclaredFalse);
    }

    #[test]
    fn ray_sets() {
        let star = build("star_rays_example3", json!({}));
        assert_eq!(star.symmetry(), Symmetry::DeclaredFalse);
        assert!(star.contains(&q2((4, 1), (0, 1))).unwrap());
        assert!(!star.contains(&q2((-4, 1), (0, 1))).unwrap());
        assert!(star.contains(&q2((-5, 1), (1, 1))).unwrap());
        assert!(star.contains(&q2((-5, 1), (-1, 1))).unwrap());
        assert!(!star.contains(&q2((5, 1), (1, 1))).unwrap());
        assert!(!star.contains(&q2((-3, 1), (1, 1))).unwrap());

        let lines = build("lines_ball_example4", json!({}));
        assert_eq!(lines.symmetry(), Symmetry::DeclaredTrue);
        assert!(lines.contains(&q2((5, 1), (1, 1))).unwrap());
        assert!(lines.contains(&q2((-4, 1), (0, 1))).unwrap());
        assert!(!lines.contains(&q2((-3, 1), (1, 1))).unwrap());
    }

    #[test]
    fn symmetry_certification() {
        assert!(is_symmetric_certified(&build("lp_ball", json!({"p": 1, "radius": 1})), 1000, 1));
        assert!(!is_symmetric_certified(&example2_set(), 100, 1));
        assert!(is_symmetric_certified(&build("cross_lines", json!({})), 1000, 2));
        assert!(!is_symmetric_certified(&build("star_rays_example3", json!({})), 100, 3));
        assert!(is_symmetric_certified(&build("lines_ball_example4", json!({})), 1000, 3));
        assert!(!is_symmetric_certified(&build("triangle", json!({})), 100, 3));
        let sym = build("punctured_interval", json!({"low": -1, "high": 1, "punctures": ["1/2", "-1/2"]}));
        assert!(is_symmetric_certified(&sym, 1000, 9));
    }

    #[test]
    fn star_shape_certification() {
        let ball = build("lp_ball", json!({"p": "0.5", "radius": 1}));
        assert!(is_star_shaped_certified(&ball, 500, 16, 1));
        assert!(is_star_shaped_certified(&build("star_rays_example3", json!({})), 500, 16, 1));
        assert!(!is_star_shaped_certified(&example2_set(), 50, 8, 1));
        // The documented witness: 6.5 is a member but 5 = 6.5·(10/13) is not.
        let set = example2_set();
        assert!(set.contains(&Opinion::new(vec![rat(13, 2)]).unwrap()).unwrap());
        assert!(!set.contains(&Opinion::new(vec![rat(13, 2) * rat(10, 13)]).unwrap()).unwrap());
        assert!(is_star_shaped_certified(&build("cross_lines", json!({})), 100, 8, 1));
    }

    #[test]
    fn zero_neighborhood_certification() {
        for (name, params) in [
            ("lp_ball", json!({"p": 1, "radius": 1})),
            ("lp_ball", json!({"p": "inf", "radius": "1/3", "dim": 3})),
            ("stripe", json!({"dim": 3, "radius": 1})),
            ("min_coordinate", json!({"eps": "0.1", "dim": 3})),
            ("triangle", json!({})),
            ("star_rays_example3", json!({})),
            ("punctured_interval", json!({"low": -1, "high": 1, "punctures": ["1/2", "-1/2"]})),
        ] {
            assert!(is_zero_neighborhood_certified(&build(name, params), 500, 4), "{name}");
        }
        assert!(!is_zero_neighborhood_certified(&build("cross_lines", json!({})), 500, 4));
    }

    #[test]
    fn union_is_disjunction() {
        let a = build("interval", json!({"low": -1, "high": 1}));
        let b = build("punctured_interval", json!({"low": 2, "high": 5, "punctures": [3]}));
        let u = build(
            "union",
            json!({"members": [{"name": "interval", "params": {"low": -1, "high": 1}},
                               {"name": "punctured_interval", "params": {"low": 2, "high": 5, "punctures": [3]}}]}),
        );
        let mut rng = SplitMix64::new(11);
        for _ in 0..2000 {
            let x = rng.uniform_rational(&rat(-8, 1), &rat(8, 1));
            let v = Opinion::new(vec![x]).unwrap();
            assert_eq!(u.contains(&v).unwrap(), a.contains(&v).unwrap() || b.contains(&v).unwrap());
        }
        for k in -8..=8 {
            let v = q(k);
            assert_eq!(u.contains(&v).unwrap(), a.contains(&v).unwrap() || b.contains(&v).unwrap());
        }
        assert_eq!(u.symmetry(), Symmetry::Unknown);
        assert_eq!(u.spec().unwrap().name, "union");
    }

    #[test]
    fn catalog_entries_contain_origin() {
        for name in [
            "lp_ball",
            "stripe",
            "min_coordinate",
            "triangle",
            "star_rays_example3",
            "lines_ball_example4",
            "cross_lines",
        ] {
            let set = build(name, json!({}));
            assert!(set.zero_member(), "{name}");
            assert!(set.contains_rational(&vec![Rational::zero(); set.dim()]).unwrap(), "{name}");
        }
        let set = example2_set();
        assert!(set.zero_member() && set.contains(&q(0)).unwrap());
    }

    #[test]
    fn custom_sets() {
        let exact: ExactPredicate = Arc::new(|v: &[Rational]| Signed::abs(&v[0]) <= rat(1, 1));
        let set = ConfidenceSet::custom("unit", 1, Some(exact), None, Symmetry::DeclaredTrue, Some(rat(1, 1))).unwrap();
        assert!(set.zero_member());
        assert_eq!(set.backend_support(), BackendSupport::ExactOnly);
        assert!(set.contains(&q(1)).unwrap());
        assert!(matches!(set.contains(&Opinion::new(vec![0.5]).unwrap()), Err(Error::Backend { .. })));
        assert!(is_symmetric_certified(&set, 200, 5));
    }
}
