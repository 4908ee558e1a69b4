use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::Profile;
use super::region::{RegionDescriptor, UnionPart};
use super::{MapError, Point, PointMap};
use crate::scalar::{dist, lift, lower, norm, Scalar};
use crate::spheres::{Chart, SphereMap};

const MAX_FIXED_POINT_ITERS: usize = 5000;

/// Radially symmetric map `x ↦ p(|x|) x/|x|` with `p` a profile fixing 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialRepr", into = "RadialRepr")]
pub struct RadialMap {
    profile: Profile,
    inverse: Profile,
    support: f64,
}

#[derive(Serialize, Deserialize)]
struct RadialRepr {
    profile: Profile,
}

impl TryFrom<RadialRepr> for RadialMap {
    type Error = MapError;
    fn try_from(r: RadialRepr) -> Result<Self, MapError> {
        RadialMap::new(r.profile)
    }
}

impl From<RadialMap> for RadialRepr {
    fn from(m: RadialMap) -> Self {
        RadialRepr { profile: m.profile }
    }
}

impl RadialMap {
    pub fn new(profile: Profile) -> Result<Self, MapError> {
        if profile.knots()[0] != (0.0, 0.0) {
            return Err(MapError::InvalidProfile("radial profile must start at (0, 0)".into()));
        }
        let support = if profile.is_identity() {
            0.0
        } else {
            profile
                .moved_range()
                .ok_or_else(|| MapError::InvalidProfile("radial profile must end on the identity".into()))?
                .1
        };
        Ok(RadialMap {
            inverse: profile.inverse(),
            profile,
            support,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    fn apply<S: Scalar>(&self, x: &[S], inverse: bool) -> Vec<S> {
        let r = norm(x);
        if r == S::zero() || r >= S::from_f64(self.support) {
            return x.to_vec();
        }
        let p = if inverse { &self.inverse } else { &self.profile };
        // on the segment through the origin the map is an exact scaling
        let factor = match p.segment_of(r) {
            Some(((0.0, 0.0), k1)) => S::from_f64(k1.1) / S::from_f64(k1.0),
            _ => p.eval(r) / r,
        };
        x.iter().map(|&c| c * factor).collect()
    }
}

/// `x ↦ x + β(|x - c|) a` with `β = 1` on `[0, inner]`, `0` beyond `outer`.
///
/// The displacement is Lipschitz with constant `|a| / (outer - inner) < 1`,
/// so the inverse is the unique fixed point of `x ↦ y - β(|x - c|) a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TranslationRepr", into = "TranslationRepr")]
pub struct LocalTranslation {
    center: Vec<f64>,
    shift: Vec<f64>,
    inner: f64,
    outer: f64,
}

#[derive(Serialize, Deserialize)]
struct TranslationRepr {
    center: Vec<f64>,
    shift: Vec<f64>,
    inner: f64,
    outer: f64,
}

impl TryFrom<TranslationRepr> for LocalTranslation {
    type Error = MapError;
    fn try_from(r: TranslationRepr) -> Result<Self, MapError> {
        LocalTranslation::new(r.center, r.shift, r.inner, r.outer)
    }
}

impl From<LocalTranslation> for TranslationRepr {
    fn from(m: LocalTranslation) -> Self {
        TranslationRepr {
            center: m.center,
            shift: m.shift,
            inner: m.inner,
            outer: m.outer,
        }
    }
}

impl LocalTranslation {
    pub fn new(center: Vec<f64>, shift: Vec<f64>, inner: f64, outer: f64) -> Result<Self, MapError> {
        if center.len() != shift.len() {
            return Err(MapError::DimensionMismatch {
                expected: center.len(),
                got: shift.len(),
            });
        }
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(MapError::InvalidParameter(format!(
                "translation cutoff needs 0 <= inner < outer, got [{inner}, {outer}]"
            )));
        }
        if center.iter().chain(&shift).any(|c| !c.is_finite()) {
            return Err(MapError::NonFinite);
        }
        let lip = crate::scalar::norm_f64(&shift) / (outer - inner);
        if lip >= 1.0 {
            return Err(MapError::InvalidParameter(format!(
                "displacement Lipschitz constant {lip} must be < 1"
            )));
        }
        Ok(LocalTranslation {
            center,
            shift,
            inner,
            outer,
        })
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn cutoff(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    pub fn lipschitz(&self) -> f64 {
        crate::scalar::norm_f64(&self.shift) / (self.outer - self.inner)
    }

    fn weight<S: Scalar>(&self, x: &[S]) -> Option<S> {
        let c: Vec<S> = lift(&self.center);
        let s = dist(x, &c);
        if s >= S::from_f64(self.outer) {
            None
        } else if s <= S::from_f64(self.inner) {
            Some(S::from_f64(1.0))
        } else {
            Some((S::from_f64(self.outer) - s) / S::from_f64(self.outer - self.inner))
        }
    }

    fn apply<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self.weight(x) {
            None => x.to_vec(),
            Some(b) => x
                .iter()
                .zip(&self.shift)
                .map(|(&c, &a)| c + b * S::from_f64(a))
                .collect(),
        }
    }

    fn apply_inverse<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>, MapError> {
        let tol = S::ITER_TOL * (1.0 + norm(y).to_f64());
        let mut x = y.to_vec();
        let mut step = f64::INFINITY;
        for _ in 0..MAX_FIXED_POINT_ITERS {
            let next: Vec<S> = match self.weight(&x) {
                None => y.to_vec(),
                Some(b) => y
                    .iter()
                    .zip(&self.shift)
                    .map(|(&c, &a)| c - b * S::from_f64(a))
                    .collect(),
            };
            step = dist(&next, &x).to_f64();
            x = next;
            if step <= tol {
                return Ok(x);
            }
        }
        Err(MapError::NoConvergence {
            iterations: MAX_FIXED_POINT_ITERS,
            step,
        })
    }
}

/// Fiberwise push along one axis:
/// `x ↦ x + (u(x_k) - x_k) χ(|x_⊥|) e_k`, raised to an integer power.
///
/// Where the transverse cutoff `χ` equals 1 the power is the analytic
/// composite `u^power`; in the cutoff ramp it is the iterated blend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PushRepr", into = "PushRepr")]
pub struct AxisPush {
    axis: usize,
    profile: Profile,
    inner: f64,
    outer: f64,
    power: i64,
    powered: Profile,
}

#[derive(Serialize, Deserialize)]
struct PushRepr {
    #[serde(default)]
    axis: usize,
    profile: Profile,
    inner: f64,
    outer: f64,
    #[serde(default = "one")]
    power: i64,
}

fn one() -> i64 {
    1
}

impl TryFrom<PushRepr> for AxisPush {
    type Error = MapError;
    fn try_from(r: PushRepr) -> Result<Self, MapError> {
        AxisPush::new(r.axis, r.profile, r.inner, r.outer, r.power)
    }
}

impl From<AxisPush> for PushRepr {
    fn from(m: AxisPush) -> Self {
        PushRepr {
            axis: m.axis,
            profile: m.profile,
            inner: m.inner,
            outer: m.outer,
            power: m.power,
        }
    }
}

impl AxisPush {
    pub fn new(axis: usize, profile: Profile, inner: f64, outer: f64, power: i64) -> Result<Self, MapError> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(MapError::InvalidParameter(format!(
                "push cutoff needs 0 <= inner < outer, got [{inner}, {outer}]"
            )));
        }
        if !profile.is_identity() && profile.moved_range().is_none() {
            return Err(MapError::InvalidProfile(
                "push profile must be the identity outside a bounded interval".into(),
            ));
        }
        Ok(AxisPush {
            axis,
            powered: profile.power(power),
            profile,
            inner,
            outer,
            power,
        })
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn power(&self) -> i64 {
        self.power
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    fn support(&self, dim: usize) -> f64 {
        match self.profile.moved_range() {
            None => 0.0,
            Some(_) if self.power == 0 => 0.0,
            Some((lo, hi)) => {
                let along = lo.abs().max(hi.abs());
                if dim == 1 {
                    along
                } else {
                    (along * along + self.outer * self.outer).sqrt()
                }
            }
        }
    }

    fn apply<S: Scalar>(&self, x: &[S], inverse: bool) -> Vec<S> {
        let mut perp = S::zero();
        for (i, &c) in x.iter().enumerate() {
            if i != self.axis {
                perp = perp + c * c;
            }
        }
        let perp = perp.sqrt();
        if perp >= S::from_f64(self.outer) || self.power == 0 {
            return x.to_vec();
        }
        let mut out = x.to_vec();
        let t = x[self.axis];
        let forward = (self.power > 0) != inverse;
        out[self.axis] = if perp <= S::from_f64(self.inner) {
            if inverse {
                self.powered.eval_inverse(t)
            } else {
                self.powered.eval(t)
            }
        } else {
            // ramp zone: blended profile applied |power| times; the weight is
            // only needed to f64 accuracy off the axis
            let c = ((S::from_f64(self.outer) - perp) / S::from_f64(self.outer - self.inner)).to_f64();
            let blended = self.profile.blend(c);
            let mut v = t;
            for _ in 0..self.power.unsigned_abs() {
                v = if forward {
                    blended.eval(v)
                } else {
                    blended.eval_inverse(v)
                };
            }
            v
        };
        out
    }
}

/// Global similarity `x ↦ s x + t`; never compactly supported unless trivial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: Vec<f64>,
}

impl AffineMap {
    fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.shift.iter().all(|&c| c == 0.0)
    }
}

/// A sphere map read back in one chart: `σ ∘ h ∘ σ⁻¹`, identity beyond
/// `support_radius` in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPatch {
    pub chart: Chart,
    pub map: SphereMap,
    pub support_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Identity,
    Radial(RadialMap),
    Translation(LocalTranslation),
    Push(AxisPush),
    Affine(AffineMap),
    Compose {
        maps: Vec<Arc<Node>>,
    },
    Inverse {
        map: Arc<Node>,
    },
    Union {
        parts: Vec<UnionPart>,
    },
    /// Infinite swindle: on the shell `2^-(i+1) <= |x| <= 2^-i` acts as
    /// `x ↦ 2^-i h(2^i x)`; fixes 0 and everything outside the unit ball.
    Swindle {
        map: Arc<Node>,
    },
    /// `map` with a tighter declared support: identity for `|x| >= radius`.
    Restrict {
        radius: f64,
        map: Arc<Node>,
    },
    Chart(ChartPatch),
}

impl Node {
    pub(crate) fn apply<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, MapError> {
        Ok(match self {
            Node::Identity => x.to_vec(),
            Node::Radial(r) => r.apply(x, false),
            Node::Translation(t) => t.apply(x),
            Node::Push(p) => p.apply(x, false),
            Node::Affine(a) => x
                .iter()
                .zip(&a.shift)
                .map(|(&c, &t)| c * S::from_f64(a.scale) + S::from_f64(t))
                .collect(),
            Node::Compose { maps } => {
                let mut y = x.to_vec();
                for m in maps.iter().rev() {
                    y = m.apply(&y)?;
                }
                y
            }
            Node::Inverse { map } => map.apply_inverse(x)?,
            Node::Union { parts } => match locate_part(parts, x)? {
                Some(i) => parts[i].map.apply(x)?,
                None => x.to_vec(),
            },
            Node::Swindle { map } => swindle_apply(map, x, false)?,
            Node::Restrict { radius, map } => {
                if norm(x) >= S::from_f64(*radius) {
                    x.to_vec()
                } else {
                    map.apply(x)?
                }
            }
            Node::Chart(c) => chart_apply(c, x, false)?,
        })
    }

    pub(crate) fn apply_inverse<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>, MapError> {
        Ok(match self {
            Node::Identity => y.to_vec(),
            Node::Radial(r) => r.apply(y, true),
            Node::Translation(t) => t.apply_inverse(y)?,
            Node::Push(p) => p.apply(y, true),
            Node::Affine(a) => y
                .iter()
                .zip(&a.shift)
                .map(|(&c, &t)| (c - S::from_f64(t)) / S::from_f64(a.scale))
                .collect(),
            Node::Compose { maps } => {
                let mut x = y.to_vec();
                for m in maps.iter() {
                    x = m.apply_inverse(&x)?;
                }
                x
            }
            Node::Inverse { map } => map.apply(y)?,
            Node::Union { parts } => match locate_part(parts, y)? {
                Some(i) => parts[i].map.apply_inverse(y)?,
                None => y.to_vec(),
            },
            Node::Swindle { map } => swindle_apply(map, y, true)?,
            Node::Restrict { radius, map } => {
                if norm(y) >= S::from_f64(*radius) {
                    y.to_vec()
                } else {
                    map.apply_inverse(y)?
                }
            }
            Node::Chart(c) => chart_apply(c, y, true)?,
        })
    }

    pub fn support_radius(&self, dim: usize) -> f64 {
        match self {
            Node::Identity => 0.0,
            Node::Radial(r) => r.support,
            Node::Translation(t) => {
                if t.shift.iter().all(|&c| c == 0.0) {
                    0.0
                } else {
                    crate::scalar::norm_f64(&t.center) + t.outer
                }
            }
            Node::Push(p) => p.support(dim),
            Node::Affine(a) => {
                if a.is_identity() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Node::Compose { maps } => maps.iter().map(|m| m.support_radius(dim)).fold(0.0, f64::max),
            Node::Inverse { map } => map.support_radius(dim),
            Node::Union { parts } => parts.iter().map(|p| p.map.support_radius(dim)).fold(0.0, f64::max),
            Node::Restrict { radius, map } => map.support_radius(dim).min(*radius),
            Node::Swindle { map } => {
                if map.is_identity() {
                    0.0
                } else {
                    1.0
                }
            }
            Node::Chart(c) => c.support_radius,
        }
    }

    /// Structural identity test (no sampling).
    pub fn is_identity(&self) -> bool {
        match self {
            Node::Identity => true,
            Node::Radial(r) => r.profile.is_identity(),
            Node::Translation(t) => t.shift.iter().all(|&c| c == 0.0),
            Node::Push(p) => p.power == 0 || p.profile.is_identity(),
            Node::Affine(a) => a.is_identity(),
            Node::Compose { maps } => maps.iter().all(|m| m.is_identity()),
            Node::Inverse { map } | Node::Swindle { map } | Node::Restrict { map, .. } => map.is_identity(),
            Node::Union { parts } => parts.iter().all(|p| p.map.is_identity()),
            Node::Chart(c) => c.map.is_identity(),
        }
    }

    fn validate(&self, dim: usize) -> Result<(), MapError> {
        let check = |got: usize| {
            if got == dim {
                Ok(())
            } else {
                Err(MapError::DimensionMismatch { expected: dim, got })
            }
        };
        match self {
            Node::Identity | Node::Radial(_) => Ok(()),
            Node::Translation(t) => check(t.center.len()),
            Node::Push(p) => {
                if p.axis < dim {
                    Ok(())
                } else {
                    Err(MapError::InvalidParameter(format!("push axis {} >= dim {dim}", p.axis)))
                }
            }
            Node::Affine(a) => {
                if !(a.scale > 0.0 && a.scale.is_finite()) {
                    return Err(MapError::InvalidParameter("affine scale must be positive".into()));
                }
                check(a.shift.len())
            }
            Node::Compose { maps } => maps.iter().try_for_each(|m| m.validate(dim)),
            Node::Inverse { map } | Node::Swindle { map } => map.validate(dim),
            Node::Restrict { radius, map } => {
                if !(*radius >= 0.0) {
                    return Err(MapError::InvalidParameter(format!("restriction radius {radius}")));
                }
                map.validate(dim)
            }
            Node::Union { parts } => parts.iter().try_for_each(|p| {
                p.region.transform.validate(dim)?;
                if let Some(b) = &p.region.bound {
                    check(b.center.len())?;
                }
                p.map.validate(dim)
            }),
            Node::Chart(c) => check(c.chart.plane_dim()),
        }
    }
}

fn locate_part<S: Scalar>(parts: &[UnionPart], x: &[S]) -> Result<Option<usize>, MapError> {
    let mut found = None;
    for (i, part) in parts.iter().enumerate() {
        if part.region.contains_scalar(x)? {
            if let Some(first) = found {
                return Err(MapError::RegionOverlap { first, second: i });
            }
            found = Some(i);
        }
    }
    Ok(found)
}

fn swindle_apply<S: Scalar>(inner: &Node, x: &[S], inverse: bool) -> Result<Vec<S>, MapError> {
    let r = norm(x);
    let one = S::from_f64(1.0);
    if r == S::zero() || r >= one {
        return Ok(x.to_vec());
    }
    let half = S::from_f64(0.5);
    let mut rr = r;
    let mut layer = 0i32;
    while rr < half {
        rr = rr * S::from_f64(2.0);
        layer += 1;
        if layer > 1000 {
            // below 2^-1000 the displacement is far under resolution
            return Ok(x.to_vec());
        }
    }
    let up = S::from_f64(2f64.powi(layer));
    let down = S::from_f64(2f64.powi(-layer));
    let z: Vec<S> = x.iter().map(|&c| c * up).collect();
    let hz = if inverse {
        inner.apply_inverse(&z)?
    } else {
        inner.apply(&z)?
    };
    Ok(hz.into_iter().map(|c| c * down).collect())
}

fn chart_apply<S: Scalar>(patch: &ChartPatch, x: &[S], inverse: bool) -> Result<Vec<S>, MapError> {
    if norm(x) >= S::from_f64(patch.support_radius) {
        return Ok(x.to_vec());
    }
    // sphere maps are evaluated in f64; chart coordinates here are O(1)
    let p = patch.chart.backward(&lower(x));
    let q = if inverse {
        patch.map.eval_inverse(&p)
    } else {
        patch.map.eval(&p)
    }
    .map_err(|e| MapError::Sphere(e.to_string()))?;
    Ok(lift(&patch.chart.forward(&q)))
}

/// An exactly invertible map of `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapExpr {
    dim: usize,
    node: Arc<Node>,
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    dim: usize,
    map: Arc<Node>,
}

impl Serialize for MapExpr {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        MapDoc {
            dim: self.dim,
            map: self.node.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MapExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = MapDoc::deserialize(d)?;
        MapExpr::from_node(doc.dim, doc.map).map_err(serde::de::Error::custom)
    }
}

impl MapExpr {
    pub fn from_node(dim: usize, node: Arc<Node>) -> Result<Self, MapError> {
        if dim == 0 {
            return Err(MapError::InvalidParameter("dimension must be >= 1".into()));
        }
        node.validate(dim)?;
        Ok(MapExpr { dim, node })
    }

    pub fn new(dim: usize, node: Node) -> Result<Self, MapError> {
        Self::from_node(dim, Arc::new(node))
    }

    pub fn identity(dim: usize) -> Self {
        MapExpr {
            dim,
            node: Arc::new(Node::Identity),
        }
    }

    pub fn radial(dim: usize, profile: Profile) -> Result<Self, MapError> {
        Self::new(dim, Node::Radial(RadialMap::new(profile)?))
    }

    pub fn translation(center: Vec<f64>, shift: Vec<f64>, inner: f64, outer: f64) -> Result<Self, MapError> {
        let dim = center.len();
        Self::new(
            dim,
            Node::Translation(LocalTranslation::new(center, shift, inner, outer)?),
        )
    }

    pub fn push(dim: usize, axis: usize, profile: Profile, inner: f64, outer: f64) -> Result<Self, MapError> {
        Self::new(dim, Node::Push(AxisPush::new(axis, profile, inner, outer, 1)?))
    }

    pub fn affine(scale: f64, shift: Vec<f64>) -> Result<Self, MapError> {
        let dim = shift.len();
        Self::new(dim, Node::Affine(AffineMap { scale, shift }))
    }

    /// `ms[0] ∘ ms[1] ∘ … ∘ ms[k-1]`; the empty list is the identity.
    pub fn compose(dim: usize, ms: &[MapExpr]) -> Result<Self, MapError> {
        for m in ms {
            if m.dim != dim {
                return Err(MapError::DimensionMismatch {
                    expected: dim,
                    got: m.dim,
                });
            }
        }
        let maps: Vec<Arc<Node>> = ms
            .iter()
            .filter(|m| !matches!(*m.node, Node::Identity))
            .map(|m| m.node.clone())
            .collect();
        Ok(match maps.len() {
            0 => MapExpr::identity(dim),
            1 => MapExpr {
                dim,
                node: maps[0].clone(),
            },
            _ => MapExpr {
                dim,
                node: Arc::new(Node::Compose { maps }),
            },
        })
    }

    pub fn then(&self, outer: &MapExpr) -> Result<Self, MapError> {
        Self::compose(self.dim, &[outer.clone(), self.clone()])
    }

    pub fn inverse(&self) -> MapExpr {
        let node = match &*self.node {
            Node::Identity => return self.clone(),
            Node::Inverse { map } => map.clone(),
            _ => Arc::new(Node::Inverse { map: self.node.clone() }),
        };
        MapExpr { dim: self.dim, node }
    }

    /// Analytic `k`-th power of a radial or push primitive.
    pub fn power_exact(&self, k: i64) -> Result<Self, MapError> {
        let node = match &*self.node {
            _ if k == 0 => Node::Identity,
            Node::Identity => Node::Identity,
            Node::Radial(r) => Node::Radial(RadialMap::new(r.profile.power(k))?),
            Node::Push(p) => Node::Push(AxisPush::new(p.axis, p.profile.clone(), p.inner, p.outer, p.power * k)?),
            Node::Inverse { map } => {
                let base = MapExpr {
                    dim: self.dim,
                    node: map.clone(),
                };
                return base.power_exact(-k);
            }
            Node::Translation(_) => return Err(MapError::UnsupportedPower("translation")),
            Node::Affine(_) => return Err(MapError::UnsupportedPower("affine")),
            Node::Compose { .. } => return Err(MapError::UnsupportedPower("compose")),
            Node::Union { .. } => return Err(MapError::UnsupportedPower("union")),
            Node::Swindle { .. } => return Err(MapError::UnsupportedPower("swindle")),
            Node::Restrict { .. } => return Err(MapError::UnsupportedPower("restrict")),
            Node::Chart(_) => return Err(MapError::UnsupportedPower("chart")),
        };
        Self::new(self.dim, node)
    }

    /// Map equal to `parts[i].1` on region `i` and the identity elsewhere.
    /// Each part map must be supported inside its region.
    pub fn piecewise_union(dim: usize, parts: Vec<(RegionDescriptor, MapExpr)>) -> Result<Self, MapError> {
        let mut out = Vec::with_capacity(parts.len());
        for (region, map) in parts {
            if map.dim != dim || region.dim() != dim {
                return Err(MapError::DimensionMismatch {
                    expected: dim,
                    got: if map.dim != dim { map.dim } else { region.dim() },
                });
            }
            out.push(UnionPart::new(region, map.node.clone()));
        }
        if out.is_empty() {
            return Ok(MapExpr::identity(dim));
        }
        Self::new(dim, Node::Union { parts: out })
    }

    /// Declares a tighter support radius. Sampled points between `radius`
    /// and the current support radius must be fixed to within `1e-12`.
    pub fn restrict_support(&self, radius: f64) -> Result<Self, MapError> {
        let current = self.support_radius();
        if radius >= current {
            return Ok(self.clone());
        }
        let outer = if current.is_finite() {
            current
        } else {
            2.0 * radius + 4.0
        };
        let mut rng = super::seeded_rng(0x5e7);
        for i in 0..256 {
            let r = radius + (outer - radius) * i as f64 / 255.0;
            let x = super::random_on_sphere(&mut rng, self.dim, r);
            let y = self.apply(&x)?;
            if crate::scalar::dist_f64(&x, &y) > 1e-12 {
                return Err(MapError::InvalidParameter(format!(
                    "map moves a point at radius {r}, beyond the claimed support {radius}"
                )));
            }
        }
        Self::new(
            self.dim,
            Node::Restrict {
                radius,
                map: self.node.clone(),
            },
        )
    }

    /// Swindle map built from `inner`, which must be supported in the open
    /// shell `1/2 < |x| < 1` (not checked here).
    pub fn swindle(inner: &MapExpr) -> Self {
        if inner.is_identity() {
            return MapExpr::identity(inner.dim);
        }
        MapExpr {
            dim: inner.dim,
            node: Arc::new(Node::Swindle {
                map: inner.node.clone(),
            }),
        }
    }

    pub fn chart_patch(chart: Chart, map: SphereMap, support_radius: f64) -> Result<Self, MapError> {
        let dim = chart.plane_dim();
        if map.is_identity() {
            return Ok(MapExpr::identity(dim));
        }
        Self::new(
            dim,
            Node::Chart(ChartPatch {
                chart,
                map,
                support_radius,
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn support_radius(&self) -> f64 {
        self.node.support_radius(self.dim)
    }

    pub fn is_identity(&self) -> bool {
        self.node.is_identity()
    }

    fn check_input<S: Scalar>(&self, x: &[S]) -> Result<(), MapError> {
        if x.len() != self.dim {
            return Err(MapError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.to_f64().is_finite()) {
            return Err(MapError::NonFinite);
        }
        Ok(())
    }

    pub fn apply<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, MapError> {
        self.check_input(x)?;
        self.node.apply(x)
    }

    pub fn apply_inverse<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>, MapError> {
        self.check_input(y)?;
        self.node.apply_inverse(y)
    }

    pub fn eval(&self, x: &Point) -> Result<Point, MapError> {
        Ok(Point(self.apply(x.coords())?))
    }

    pub fn eval_inverse(&self, y: &Point) -> Result<Point, MapError> {
        Ok(Point(self.apply_inverse(y.coords())?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map expressions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, MapError> {
        serde_json::from_str(s).map_err(|e| MapError::Json(e.to_string()))
    }
}

impl PointMap for MapExpr {
    fn dim(&self) -> usize {
        self.dim
    }
    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        self.apply(x)
    }
    fn unmap_point(&self, y: &[f64]) -> Result<Vec<f64>, MapError> {
        self.apply_inverse(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    fn f1() -> MapExpr {
        MapExpr::radial(2, Profile::new(vec![(0.0, 0.0), (2.0, 1.0), (4.0, 4.0)]).unwrap()).unwrap()
    }

    fn f2() -> MapExpr {
        MapExpr::translation(vec![0.0, 0.0], vec![0.5, 0.0], 1.0, 2.0).unwrap()
    }

    fn f3() -> MapExpr {
        let u = Profile::new(vec![(-1.5, -1.5), (0.0, 0.5), (1.0, 1.0)]).unwrap();
        MapExpr::push(2, 0, u, 0.5, 1.0).unwrap()
    }

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn identity_eval() {
        let id = MapExpr::identity(2);
        assert_eq!(id.eval(&p(&[0.3, 0.4])).unwrap(), p(&[0.3, 0.4]));
    }

    #[test]
    fn scaling_zone_is_exact() {
        assert_eq!(f1().eval(&p(&[1.0, 0.0])).unwrap(), p(&[0.5, 0.0]));
        assert_eq!(f1().eval_inverse(&p(&[0.5, 0.0])).unwrap(), p(&[1.0, 0.0]));
        assert_eq!(f1().support_radius(), 4.0);
        assert_eq!(f1().eval(&p(&[3.0, 4.0])).unwrap(), p(&[3.0, 4.0]));
    }

    #[test]
    fn translation_zone() {
        assert_eq!(f2().eval(&p(&[0.0, 0.0])).unwrap(), p(&[0.5, 0.0]));
        assert_eq!(f2().eval_inverse(&p(&[0.5, 0.0])).unwrap(), p(&[0.0, 0.0]));
        assert_eq!(f2().eval(&p(&[0.0, 2.0])).unwrap(), p(&[0.0, 2.0]));
    }

    #[test]
    fn rejects_non_contractive_translation() {
        assert!(MapExpr::translation(vec![0.0], vec![1.5], 0.0, 1.0).is_err());
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        assert!(matches!(
            f1().apply(&[1.0f64]),
            Err(MapError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(f1().apply(&[f64::NAN, 0.0]), Err(MapError::NonFinite)));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn compose_right_to_left() {
        let ff = MapExpr::compose(2, &[f1(), f1()]).unwrap();
        assert_eq!(ff.eval(&p(&[1.0, 0.0])).unwrap(), p(&[0.25, 0.0]));
        assert!(MapExpr::compose(2, &[]).unwrap().is_identity());
        let g = MapExpr::compose(2, &[f2(), f1()]).unwrap();
        // f1 first, then f2
        assert_eq!(g.eval(&p(&[1.0, 0.0])).unwrap(), p(&[1.0, 0.0]));
        assert!(MapExpr::compose(3, &[f1()]).is_err());
    }

    #[test]
    fn power_exact_matches_chains() {
        assert_eq!(
            f1().power_exact(3).unwrap().eval(&p(&[1.0, 0.0])).unwrap(),
            p(&[0.125, 0.0])
        );
        assert!(f1().power_exact(0).unwrap().is_identity());
        let mut x = vec![0.0, 0.0];
        for n in 1..=20 {
            x = f3().apply(&x).unwrap();
            let direct = f3().power_exact(n).unwrap().apply(&[0.0, 0.0]).unwrap();
            assert_eq!(direct[0], 1.0 - 2f64.powi(-(n as i32)));
            assert_eq!(direct, x);
        }
        assert!(matches!(f2().power_exact(2), Err(MapError::UnsupportedPower(_))));
    }

    #[test]
    fn push_ramp_zone_round_trip() {
        let g = f3().power_exact(5).unwrap();
        for &(a, b) in &[(0.2, 0.7), (-0.4, 0.55), (0.9, 0.99), (-1.2, 0.6)] {
            let y = g.apply(&[a, b]).unwrap();
            let back = g.apply_inverse(&y).unwrap();
            assert!((back[0] - a).abs() < 1e-12 && back[1] == b);
        }
    }

    #[test]
    fn double_double_resolves_contracted_words() {
        // F3^n F1^l pushes a point to within 2^-(l+n) of the orbit point;
        // coming back must recover the input to far better than f64 allows.
        let fwd = MapExpr::compose(2, &[f3().power_exact(6).unwrap(), f1().power_exact(30).unwrap()]).unwrap();
        let x = [0.3, -0.7];
        let xs: Vec<DoubleDouble> = lift(&x);
        let back = fwd.apply_inverse(&fwd.apply(&xs).unwrap()).unwrap();
        let err = dist(&back, &xs).to_f64();
        assert!(err < 1e-18, "double-double error {err}");
        let back64 = fwd.apply_inverse(&fwd.apply(&x).unwrap()).unwrap();
        assert!(dist(&back64, &x) > 1e-12);
    }

    #[test]
    fn swindle_layers_scale() {
        let h = MapExpr::translation(vec![0.75, 0.0], vec![0.05, 0.0], 0.02, 0.1).unwrap();
        let g = MapExpr::swindle(&h);
        assert_eq!(g.apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(g.apply(&[0.75, 0.0]).unwrap(), vec![0.8, 0.0]);
        assert_eq!(g.apply(&[0.375, 0.0]).unwrap(), vec![0.4, 0.0]);
        assert_eq!(g.apply(&[0.0, 1.5]).unwrap(), vec![0.0, 1.5]);
    }
}
