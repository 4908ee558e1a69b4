use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chart::{Chart, SpherePoint};
use super::decompose::{
    anchor_chart, anchor_support_radius, arc_chart, arc_support_radius, decompose_circle, decompose_sphere_rotation,
    twist_charts, twist_support_radius,
};
use super::map::SphereMap;
use super::SphereError;
use crate::geomaps::{random_on_sphere, seeded_rng, MapExpr, Profile};
use crate::scalar::{dist_f64, lift, lower, DoubleDouble};
use crate::witness::{
    build_generators_sparse, homeo_word, scale_for_final_ratio, schedule_powers, schedule_with_recurrence,
    standard_conjugator, swindle_factorize_with, GeneratorParams, WitnessError, WitnessPlan, CONJ,
};
use crate::words::{Assignment, Word};

/// Name of the per-chart normalizer that squeezes a piece into `B(0, 2)`.
pub const NORMALIZER: &str = "N";

/// Radius that normalized pieces are squeezed into.
const NORMAL_RADIUS: f64 = 1.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoOptions {
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Multiplier in `p(n) = (n+1) k_n scale`; chosen so the last ratio is
    /// below 0.01 when absent.
    #[serde(default)]
    pub scale: Option<u64>,
    /// Snap `p(n)` to continued-fraction denominators of a circle rotation.
    #[serde(default)]
    pub recurrence: bool,
}

impl DemoOptions {
    pub fn new(n_max: usize) -> Self {
        DemoOptions {
            n_max,
            samples: 500,
            seed: 0,
            tol: 1e-6,
            scale: None,
            recurrence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub n: usize,
    pub p_n: u64,
    pub k_n: u64,
    pub reduced_len: usize,
    /// `reduced_len / p_n`.
    pub ratio: f64,
    pub sup_err: f64,
    pub passed: bool,
    /// Circle displacement of `h^{p_n}` for rotations (recurrence measure).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub seed: u64,
    pub ambient_dim: usize,
    pub scale: u64,
    pub rows: Vec<DemoRow>,
    pub words: Vec<Word>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Per-slot length bounds of the demo; depends on the dimension only.
///
/// Each of the two pieces costs the commutator bound plus two letters for
/// the swindle conjugator and two for the chart normalizer.
pub fn demo_k_bounds(plane_dim: usize, n_max: usize) -> Result<Vec<u64>, SphereError> {
    let plan = WitnessPlan::build(GeneratorParams::defaults(plane_dim), n_max).map_err(witness_err)?;
    (0..n_max)
        .map(|n| Ok(2 * (plan.homeo_k_bound(n).map_err(witness_err)? + 2)))
        .collect()
}

fn witness_err(e: WitnessError) -> SphereError {
    SphereError::Witness(e.to_string())
}

/// `x ↦ (1.9/R) x` on `B(0, R)`, identity beyond `max(2R, 4)`.
pub fn normalizer(dim: usize, support: f64) -> MapExpr {
    let far = (2.0 * support).max(4.0);
    MapExpr::radial(
        dim,
        Profile::new(vec![(0.0, 0.0), (support, NORMAL_RADIUS), (far, far)]).expect("increasing"),
    )
    .expect("valid radial map")
}

/// A chart with its own copy of the witness machinery.
struct ChartSlots {
    chart: Chart,
    support: f64,
    slots: Vec<Option<MapExpr>>,
}

struct Piece {
    key: String,
    n: usize,
}

fn piece_targets(hp: &SphereMap, ambient: usize) -> Result<Vec<(String, Chart, f64, SphereMap)>, SphereError> {
    let mut out = Vec::new();
    if ambient == 2 {
        let split = decompose_circle(hp)?;
        if let Some(k) = split.anchor {
            // h = h1 ∘ h2, outer piece first in the word
            out.push(("I2".to_string(), arc_chart(), arc_support_radius(), split.h1));
            out.push((format!("J{k}"), anchor_chart(k), anchor_support_radius(), split.h2));
        }
    } else {
        let theta = match hp {
            SphereMap::Identity => return Ok(out),
            SphereMap::SphereRotation { theta } => *theta,
            _ => {
                return Err(SphereError::Decomposition(
                    "sphere demo supports rotations about the z-axis only".into(),
                ))
            }
        };
        let (t1, t2) = decompose_sphere_rotation(theta);
        let (south, north) = twist_charts();
        let r = twist_support_radius();
        if !t1.is_identity() {
            out.push(("S".to_string(), south, r, t1));
        }
        if !t2.is_identity() {
            out.push(("N".to_string(), north, r, t2));
        }
    }
    Ok(out)
}

/// End-to-end distortion demo for a circle homeomorphism or a rotation of
/// `S^2`: every power `h^{p(n)}` is written as a verified word whose length
/// is bounded by `k_n`, with `k_n / p(n) = 1 / ((n+1) scale)`.
pub fn sphere_distortion_demo(h: &SphereMap, opts: &DemoOptions) -> Result<DemoReport, SphereError> {
    let ambient = h.ambient_dim().unwrap_or(2);
    let plane = ambient - 1;
    let n_max = opts.n_max;
    // bounds first, from the plan alone
    let k = demo_k_bounds(plane, n_max)?;
    let plan = WitnessPlan::build(GeneratorParams::defaults(plane), n_max).map_err(witness_err)?;
    let scale = opts.scale.unwrap_or_else(|| scale_for_final_ratio(n_max, 0.01));
    let rotation = match h {
        SphereMap::CircleRotation { alpha } => Some(*alpha),
        _ => None,
    };
    let p = match rotation {
        Some(alpha) if opts.recurrence => schedule_with_recurrence(&k, scale, alpha),
        _ => schedule_powers(&k, scale),
    };

    let mut charts: BTreeMap<String, ChartSlots> = BTreeMap::new();
    let mut per_n: Vec<Vec<Piece>> = Vec::with_capacity(n_max);
    let mut powers = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let hp = h.power(p[n] as i64)?;
        let mut pieces = Vec::new();
        for (key, chart, support, piece) in piece_targets(&hp, ambient)? {
            let patch = MapExpr::chart_patch(chart.clone(), piece, support)?;
            let nz = normalizer(plane, support);
            let target =
                MapExpr::compose(plane, &[nz.clone(), patch, nz.inverse()])?.restrict_support(NORMAL_RADIUS)?;
            let entry = charts.entry(key.clone()).or_insert_with(|| ChartSlots {
                chart,
                support,
                slots: vec![None; n_max],
            });
            entry.slots[n] = Some(target);
            pieces.push(Piece { key, n });
        }
        per_n.push(pieces);
        powers.push(hp);
    }

    // one generating set per chart, namespaced by chart key
    let d = standard_conjugator(plane);
    let mut asgs: BTreeMap<String, Assignment> = BTreeMap::new();
    for (key, cs) in &charts {
        let mut pairs = Vec::with_capacity(n_max);
        for slot in &cs.slots {
            pairs.push(match slot {
                Some(t) => {
                    let f = swindle_factorize_with(t, &d).map_err(witness_err)?;
                    Some((f.g, f.phi))
                }
                None => None,
            });
        }
        let gens = build_generators_sparse(&plan, &pairs).map_err(witness_err)?;
        let mut local = gens.assignment();
        local.bind(CONJ, d.clone())?;
        local.bind(NORMALIZER, normalizer(plane, cs.support))?;
        let mut asg = Assignment::new(plane);
        asg.merge_namespaced(key, &local)?;
        asgs.insert(key.clone(), asg);
    }

    let mut rng = seeded_rng(opts.seed);
    let points: Vec<Vec<f64>> = (0..opts.samples)
        .map(|_| {
            let v = random_on_sphere(&mut rng, ambient, 1.0);
            SpherePoint::normalized(v).expect("nonzero").coords().to_vec()
        })
        .collect();

    let mut rows = Vec::with_capacity(n_max);
    let mut words = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let mut runs: Vec<(String, Word)> = Vec::new();
        for piece in &per_n[n] {
            let nw = Word::gen(NORMALIZER);
            let local = homeo_word(&plan, piece.n, false).map_err(witness_err)?;
            let w = Word::product(&[&nw.inverse(), &local, &nw]).namespaced(&piece.key);
            runs.push((piece.key.clone(), w));
        }
        let full = Word::product(&runs.iter().map(|(_, w)| w).collect::<Vec<_>>());
        let mut sup = 0.0f64;
        for v in &points {
            let mut y = v.clone();
            for (key, w) in runs.iter().rev() {
                y = eval_in_chart(&charts[key].chart, &asgs[key], w, &y)?;
            }
            let e = dist_f64(&y, &powers[n].eval(v)?);
            sup = if e.is_finite() { sup.max(e) } else { f64::INFINITY };
        }
        let reduced = full.reduce();
        let reduced_len = reduced.len();
        rows.push(DemoRow {
            n,
            p_n: p[n],
            k_n: k[n],
            reduced_len,
            ratio: reduced_len as f64 / p[n] as f64,
            sup_err: sup,
            passed: sup < opts.tol && reduced_len as u64 <= k[n],
            recurrence: rotation.map(|a| crate::witness::circle_distance(a, p[n])),
        });
        words.push(reduced);
    }
    Ok(DemoReport {
        seed: opts.seed,
        ambient_dim: ambient,
        scale,
        rows,
        words,
    })
}

/// Evaluates a word of one chart's alphabet on a sphere point, in
/// double-double chart coordinates. Points the word fixes are returned
/// unchanged.
fn eval_in_chart(chart: &Chart, asg: &Assignment, w: &Word, v: &[f64]) -> Result<Vec<f64>, SphereError> {
    if chart.pole_gap(v) <= 0.0 {
        return Ok(v.to_vec());
    }
    let x = chart.forward(v);
    let y = lower(
        &asg.evaluate::<DoubleDouble>(w, &lift(&x))
            .map_err(|e| SphereError::Witness(e.to_string()))?,
    );
    if y == x {
        return Ok(v.to_vec());
    }
    Ok(chart.backward(&y))
}
