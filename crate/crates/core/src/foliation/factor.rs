use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solve::{solve_monotone, SolveFailure};
use super::{FoliationError, FoliationOptions, SLOPE_THRESHOLD};
use crate::geomaps::{seeded_rng, MapError, MapExpr, PointMap, Sampler};

/// Shared state of one decomposition: the map, the cube, and the worst
/// residual seen by any 1-D solve.
#[derive(Debug)]
pub(crate) struct Chain {
    f: MapExpr,
    half_width: f64,
    solve_tol: f64,
    max_residual: AtomicU64,
}

impl Chain {
    pub(crate) fn new(f: MapExpr, half_width: f64, solve_tol: f64) -> Self {
        Chain {
            f,
            half_width,
            solve_tol,
            max_residual: AtomicU64::new(0f64.to_bits()),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.f.dim()
    }

    fn inside(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() < self.half_width)
    }

    pub(crate) fn max_residual(&self) -> f64 {
        f64::from_bits(self.max_residual.load(Ordering::Relaxed))
    }

    /// `f ∘ φ_1⁻¹ ∘ … ∘ φ_k⁻¹`, whose first `k` coordinates are the identity.
    pub(crate) fn peeled(&self, k: usize, x: &[f64]) -> Result<Vec<f64>, MapError> {
        let mut y = x.to_vec();
        for j in (0..k).rev() {
            y = self.factor_inverse(j, &y)?;
        }
        self.f.apply(&y)
    }

    pub(crate) fn factor(&self, k: usize, x: &[f64]) -> Result<Vec<f64>, MapError> {
        if self.f.is_identity() || !self.inside(x) {
            return Ok(x.to_vec());
        }
        let v = self.peeled(k, x)?[k];
        let mut y = x.to_vec();
        y[k] = v;
        Ok(y)
    }

    pub(crate) fn factor_inverse(&self, k: usize, y: &[f64]) -> Result<Vec<f64>, MapError> {
        if self.f.is_identity() || !self.inside(y) {
            return Ok(y.to_vec());
        }
        let mut z = y.to_vec();
        let t = self.solve_slice(k, y, |z| Ok(self.factor(k, z)?[k]))?;
        z[k] = t;
        Ok(z)
    }

    /// Finds `t` with `g(y[k := t]) = y_k` for a slice map `g` that is
    /// increasing along axis `k` and the identity on the cube faces.
    pub(crate) fn solve_slice(
        &self,
        k: usize,
        y: &[f64],
        g: impl Fn(&[f64]) -> Result<f64, MapError>,
    ) -> Result<f64, MapError> {
        let a = self.half_width;
        let mut z = y.to_vec();
        let root = solve_monotone(
            |t| {
                z[k] = t;
                g(&z)
            },
            y[k],
            -a,
            a,
            y[k],
        )
        .map_err(|e| match e {
            SolveFailure::Eval(e) => e,
            SolveFailure::NotBracketed { .. } => {
                MapError::InvalidParameter(format!("slice on axis {k} through {y:?} does not fix the cube faces"))
            }
        })?;
        self.max_residual.fetch_max(root.residual.to_bits(), Ordering::Relaxed);
        if root.residual > self.solve_tol {
            return Err(MapError::NoConvergence {
                iterations: root.evals,
                step: root.residual,
            });
        }
        Ok(root.t)
    }
}

/// `φ_k(f)`: rewrites coordinate `k` only and fixes every other coordinate
/// bitwise. Inverses are monotone 1-D solves.
#[derive(Clone, Debug)]
pub struct FoliationFactor {
    axis: usize,
    chain: Arc<Chain>,
}

impl FoliationFactor {
    pub(crate) fn new(axis: usize, chain: Arc<Chain>) -> Self {
        FoliationFactor { axis, chain }
    }

    /// The first factor `x ↦ (f_1(x), x_2, …, x_N)` of `f` on the cube
    /// `(-half_width, half_width)^N`; needs no monotonicity to evaluate.
    pub fn first(f: &MapExpr, half_width: f64) -> Self {
        FoliationFactor::new(0, Arc::new(Chain::new(f.clone(), half_width, 1e-10)))
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn tol(&self) -> f64 {
        self.chain.solve_tol
    }

    pub fn half_width(&self) -> f64 {
        self.chain.half_width
    }

    pub(crate) fn chain(&self) -> &Arc<Chain> {
        &self.chain
    }
}

impl PointMap for FoliationFactor {
    fn dim(&self) -> usize {
        self.chain.dim()
    }

    fn map_point(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        self.chain.factor(self.axis, x)
    }

    fn unmap_point(&self, y: &[f64]) -> Result<Vec<f64>, MapError> {
        self.chain.factor_inverse(self.axis, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub axis: usize,
    pub tol: f64,
    /// Sampled slice slope lower bound along the axis.
    pub min_slope: f64,
    /// `(min_slope - 0.2) / 0.8`; 1 for the identity, negative when the
    /// slice is too far from the identity.
    pub margin: f64,
    /// Sup of the coordinate displacement on the grid.
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub dim: usize,
    pub half_width: f64,
    pub grid: usize,
    pub tol: f64,
    pub factors: Vec<FactorSummary>,
    /// Sup over the grid of `|φ_N ∘ … ∘ φ_1 (x) - f(x)|`.
    pub sup_error: f64,
    /// Sup over the grid of `|p_k(f ∘ φ_1⁻¹ ∘ … ∘ φ_k⁻¹ (x)) - p_k(x)|`, per `k`.
    pub invariant_errors: Vec<f64>,
    pub max_solve_residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub factors: Vec<FoliationFactor>,
    pub report: DecompositionReport,
}

impl Decomposition {
    /// `φ_N ∘ … ∘ φ_1`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        let mut y = x.to_vec();
        for f in &self.factors {
            y = f.map_point(&y)?;
        }
        Ok(y)
    }
}

/// Difference quotients per grid cell along the factor's axis.
const SLOPE_REFINE: usize = 4;

pub fn slope_margin(min_slope: f64) -> f64 {
    (min_slope - SLOPE_THRESHOLD) / (1.0 - SLOPE_THRESHOLD)
}

/// Splits `f` (identity near the faces of the cube) into foliation factors
/// `φ_1, …, φ_N` with `f = φ_N ∘ … ∘ φ_1`, checking slice monotonicity on
/// the grid before each factor is used, then verifying reconstruction and
/// the partial-projection identities.
pub fn foliation_decompose(f: &MapExpr, opts: &FoliationOptions) -> Result<Decomposition, FoliationError> {
    let dim = f.dim();
    if dim == 0 {
        return Err(FoliationError::Dimension(dim));
    }
    let a = opts.half_width;
    let grid = Sampler::grid(opts.grid, a).points(dim);
    for x in grid.iter().filter(|x| x.iter().any(|c| c.abs() >= a)) {
        if f.apply(x)? != *x {
            return Err(FoliationError::SupportEscapesCube { sample: x.clone() });
        }
    }
    let chain = Arc::new(Chain::new(f.clone(), a, opts.solve_tol));
    let spacing = if opts.grid > 1 {
        2.0 * a / (opts.grid - 1) as f64
    } else {
        a
    };

    let mut factors = Vec::with_capacity(dim);
    let mut summaries = Vec::with_capacity(dim);
    for k in 0..dim {
        let phi = FoliationFactor::new(k, chain.clone());
        let step = spacing / SLOPE_REFINE as f64;
        let refined: Vec<Vec<f64>> = grid
            .iter()
            .filter(|x| x[k] < a)
            .flat_map(|x| {
                (0..SLOPE_REFINE).map(move |i| {
                    let mut p = x.clone();
                    p[k] += i as f64 * step;
                    p
                })
            })
            .collect();
        let leaf = leaf_preservation_check(&phi, k, &refined, step)?;
        if leaf.min_slope < SLOPE_THRESHOLD {
            return Err(FoliationError::Monotonicity {
                axis: k,
                sample: leaf.worst_sample,
                slope: leaf.min_slope,
                threshold: SLOPE_THRESHOLD,
            });
        }
        summaries.push(FactorSummary {
            axis: k,
            tol: opts.solve_tol,
            min_slope: leaf.min_slope,
            margin: leaf.margin,
            displacement: leaf.displacement,
        });
        factors.push(phi);
    }

    let mut dec = Decomposition {
        factors,
        report: DecompositionReport {
            dim,
            half_width: a,
            grid: opts.grid,
            tol: opts.tol,
            factors: summaries,
            sup_error: 0.0,
            invariant_errors: vec![0.0; dim],
            max_solve_residual: 0.0,
            passed: false,
        },
    };
    let mut sup = 0.0f64;
    for x in &grid {
        let e = crate::scalar::dist_f64(&dec.eval(x)?, &f.apply(x)?);
        sup = if e.is_finite() { sup.max(e) } else { f64::INFINITY };
    }
    let checks = invariant_points(dim, a, opts);
    for k in 1..=dim {
        let mut worst = 0.0f64;
        for x in &checks {
            let g = chain.peeled(k, x)?;
            for j in 0..k {
                worst = worst.max((g[j] - x[j]).abs());
            }
        }
        dec.report.invariant_errors[k - 1] = worst;
    }
    let r = &mut dec.report;
    r.sup_error = sup;
    r.max_solve_residual = chain.max_residual();
    r.passed = sup < opts.tol
        && r.invariant_errors.iter().all(|&e| e < opts.invariant_tol)
        && r.max_solve_residual < opts.solve_tol;
    Ok(dec)
}

/// Grid points, thinned to at most `invariant_samples` by a seeded shuffle.
fn invariant_points(dim: usize, a: f64, opts: &FoliationOptions) -> Vec<Vec<f64>> {
    use rand::seq::SliceRandom;
    let mut pts = Sampler::grid(opts.grid, a).points(dim);
    if pts.len() > opts.invariant_samples {
        pts.shuffle(&mut seeded_rng(opts.seed));
        pts.truncate(opts.invariant_samples);
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafReport {
    pub axis: usize,
    pub samples: usize,
    /// Largest change of any coordinate other than `axis`.
    pub off_axis_drift: f64,
    /// Smallest sampled difference quotient along `axis`.
    pub min_slope: f64,
    pub margin: f64,
    pub displacement: f64,
    pub worst_sample: Vec<f64>,
    pub increasing: bool,
    pub passed: bool,
}

/// Samples whether `m` preserves the lines parallel to `axis` and is
/// increasing along them (difference quotients over `step`).
pub fn leaf_preservation_check(
    m: &dyn PointMap,
    axis: usize,
    samples: &[Vec<f64>],
    step: f64,
) -> Result<LeafReport, MapError> {
    let mut drift = 0.0f64;
    let mut min_slope = f64::INFINITY;
    let mut displacement = 0.0f64;
    let mut worst_sample = Vec::new();
    for x in samples {
        let y = m.map_point(x)?;
        let mut x2 = x.clone();
        x2[axis] += step;
        let y2 = m.map_point(&x2)?;
        for j in (0..x.len()).filter(|&j| j != axis) {
            drift = drift.max((y[j] - x[j]).abs()).max((y2[j] - x2[j]).abs());
        }
        displacement = displacement.max((y[axis] - x[axis]).abs());
        let slope = (y2[axis] - y[axis]) / (x2[axis] - x[axis]);
        if slope < min_slope {
            min_slope = slope;
            worst_sample = x.clone();
        }
    }
    if samples.is_empty() {
        min_slope = 1.0;
    }
    Ok(LeafReport {
        axis,
        samples: samples.len(),
        off_axis_drift: drift,
        min_slope,
        margin: slope_margin(min_slope),
        displacement,
        worst_sample,
        increasing: min_slope > 0.0,
        passed: drift == 0.0 && min_slope > 0.0,
    })
}
