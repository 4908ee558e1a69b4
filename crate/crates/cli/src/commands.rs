use std::fs;
use std::path::Path;

use distortion_core::foliation::{
    even_slabs, foliation_decompose, fragment_product_error, fragmentation_c0, perturbation, FoliationError,
    FoliationOptions,
};
use distortion_core::geomaps::{check_round_trip, seeded_rng, MapError, MapExpr, Sampler};
use distortion_core::spheres::{sphere_distortion_demo, DemoOptions, SphereError, SphereMap};
use distortion_core::witness::{
    run_session, GeneratorParams, VerifyOptions, WitnessError, WitnessPlan, WitnessSession,
};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::{Command, DemoKind, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{0} needs --input")]
    MissingInput(&'static str),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Rendered results of one command.
#[derive(Debug)]
pub struct Outcome {
    pub json: String,
    pub csv: Option<String>,
    pub passed: bool,
    /// Why the run failed, when there is more to say than the report.
    pub diagnostic: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    passed: bool,
    report: T,
}

fn envelope<T: Serialize>(cfg: &RunConfig, passed: bool, report: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope {
        config: cfg,
        passed,
        report,
    })
    .expect("reports serialize");
    s.push('\n');
    s
}

/// CSV with an explicit header line, so empty tables still name their columns.
fn to_csv<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn input_map(cfg: &RunConfig, what: &'static str) -> Result<MapExpr, CliError> {
    let path = cfg.input.as_deref().ok_or(CliError::MissingInput(what))?;
    read_json(path)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Plan { lambda } => cmd_plan(cfg, *lambda),
        Command::Witness => cmd_witness(cfg),
        Command::Demo {
            kind,
            angle,
            scale,
            recurrence,
        } => cmd_demo(cfg, *kind, *angle, *scale, *recurrence),
        Command::Fragment {
            amplitude,
            slabs,
            slab_axis,
            overlap,
        } => cmd_fragment(cfg, *amplitude, *slabs, *slab_axis, *overlap),
        Command::Verify { radius } => cmd_verify(cfg, *radius),
    }
}

#[derive(Serialize)]
struct PlanRow {
    n: usize,
    l: u32,
    l_tilde: u32,
    k_n: u64,
}

#[derive(Serialize)]
struct PlanReport {
    params: GeneratorParams,
    rho: f64,
    l: Vec<u32>,
    l_tilde: Vec<u32>,
    k_bounds: Vec<u64>,
    check: distortion_core::witness::PlanCheck,
}

pub fn cmd_plan(cfg: &RunConfig, lambda: Option<f64>) -> Result<Outcome, CliError> {
    let mut params = GeneratorParams::defaults(cfg.dim);
    if let Some(l) = lambda {
        params.lambda = l;
    }
    params.validate()?;
    let plan = WitnessPlan::build(params.clone(), cfg.n_max)?;
    let check = plan.verify(cfg.samples, cfg.seed)?;
    let k = plan.k_bounds();
    let rows = (0..cfg.n_max).map(|n| PlanRow {
        n,
        l: plan.l[n],
        l_tilde: plan.l_tilde[n],
        k_n: k[n],
    });
    let csv = to_csv(&["n", "l", "l_tilde", "k_n"], rows)?;
    let passed = check.passed();
    let report = PlanReport {
        params,
        rho: plan.rho,
        l: plan.l.clone(),
        l_tilde: plan.l_tilde.clone(),
        k_bounds: k,
        check,
    };
    Ok(Outcome {
        json: envelope(cfg, passed, report),
        csv: Some(csv),
        passed,
        diagnostic: None,
    })
}

#[derive(Serialize)]
struct WitnessRow<'a> {
    n: usize,
    kind: &'a str,
    k_bound: u64,
    reduced_len: usize,
    sup_err: f64,
    passed: bool,
}

pub fn cmd_witness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let path = cfg.input.as_deref().ok_or(CliError::MissingInput("witness"))?;
    let session: WitnessSession = read_json(path)?;
    let opts = VerifyOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
        precision: cfg.precision,
        ..VerifyOptions::default()
    };
    let report = run_session(&session, &opts)?;
    let csv = to_csv(
        &["n", "kind", "k_bound", "reduced_len", "sup_err", "passed"],
        report.witnesses.iter().map(|w| WitnessRow {
            n: w.n,
            kind: &w.kind,
            k_bound: w.k_bound,
            reduced_len: w.reduced_len,
            sup_err: w.sup_err,
            passed: w.passed,
        }),
    )?;
    let passed = report.passed();
    Ok(Outcome {
        json: envelope(cfg, passed, report),
        csv: Some(csv),
        passed,
        diagnostic: None,
    })
}

#[derive(Serialize)]
struct DemoCsvRow {
    n: usize,
    p_n: u64,
    k_n: u64,
    reduced_len: usize,
    ratio: f64,
    sup_err: f64,
}

pub fn cmd_demo(
    cfg: &RunConfig,
    kind: DemoKind,
    angle: f64,
    scale: Option<u64>,
    recurrence: bool,
) -> Result<Outcome, CliError> {
    let h = match kind {
        DemoKind::Circle => SphereMap::circle_rotation(angle),
        DemoKind::Sphere => SphereMap::sphere_rotation(angle),
    };
    let opts = DemoOptions {
        n_max: cfg.n_max,
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
        scale,
        recurrence,
    };
    let report = sphere_distortion_demo(&h, &opts)?;
    let csv = to_csv(
        &["n", "p_n", "k_n", "reduced_len", "ratio", "sup_err"],
        report.rows.iter().map(|r| DemoCsvRow {
            n: r.n,
            p_n: r.p_n,
            k_n: r.k_n,
            reduced_len: r.reduced_len,
            ratio: r.ratio,
            sup_err: r.sup_err,
        }),
    )?;
    let passed = report.passed();
    Ok(Outcome {
        json: envelope(cfg, passed, report),
        csv: Some(csv),
        passed,
        diagnostic: None,
    })
}

#[derive(Serialize)]
struct FragmentSummary {
    slabs: usize,
    axis: usize,
    overlap: f64,
    pieces: usize,
    nontrivial: usize,
    product_error: f64,
}

#[derive(Serialize)]
struct FragmentReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<distortion_core::foliation::DecompositionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fragments: Option<FragmentSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<String>,
}

pub fn cmd_fragment(
    cfg: &RunConfig,
    amplitude: Option<f64>,
    slabs: usize,
    slab_axis: usize,
    overlap: f64,
) -> Result<Outcome, CliError> {
    let f = match amplitude {
        Some(a) => perturbation(cfg.dim, a, cfg.seed)?,
        None => input_map(cfg, "fragment without --amplitude")?,
    };
    let opts = FoliationOptions {
        grid: cfg.grid,
        tol: cfg.tol,
        seed: cfg.seed,
        ..FoliationOptions::default()
    };
    let failed = |e: FoliationError| -> Result<Outcome, CliError> {
        match e {
            FoliationError::Monotonicity { .. }
            | FoliationError::SupportEscapesCube { .. }
            | FoliationError::CoverTooFine { .. } => {
                let report = FragmentReport {
                    decomposition: None,
                    fragments: None,
                    diagnostic: Some(e.to_string()),
                };
                Ok(Outcome {
                    json: envelope(cfg, false, report),
                    csv: None,
                    passed: false,
                    diagnostic: Some(e.to_string()),
                })
            }
            other => Err(other.into()),
        }
    };
    let dec = match foliation_decompose(&f, &opts) {
        Ok(d) => d,
        Err(e) => return failed(e),
    };
    let mut passed = dec.report.passed;
    let mut fragments = None;
    if slabs > 0 {
        let cover = even_slabs(slab_axis, slabs, opts.half_width, overlap);
        let pieces = match fragmentation_c0(&f, &cover, &opts) {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        let mut rng = seeded_rng(cfg.seed);
        let a = opts.half_width;
        let pts: Vec<Vec<f64>> = (0..cfg.samples)
            .map(|_| (0..f.dim()).map(|_| rng.random_range(-a..a)).collect())
            .collect();
        let product_error = fragment_product_error(&f, &pieces, &pts)?;
        passed &= product_error < cfg.tol;
        fragments = Some(FragmentSummary {
            slabs,
            axis: slab_axis,
            overlap,
            pieces: pieces.len(),
            nontrivial: pieces.iter().filter(|p| !p.is_trivial()).count(),
            product_error,
        });
    }
    let report = FragmentReport {
        decomposition: Some(dec.report),
        fragments,
        diagnostic: None,
    };
    Ok(Outcome {
        json: envelope(cfg, passed, report),
        csv: None,
        passed,
        diagnostic: None,
    })
}

pub fn cmd_verify(cfg: &RunConfig, radius: Option<f64>) -> Result<Outcome, CliError> {
    let m = input_map(cfg, "verify")?;
    let support = m.support_radius();
    let r = radius.unwrap_or(if support.is_finite() { support + 1.0 } else { 4.0 });
    let sampler = Sampler::ball(m.dim(), r, cfg.samples, cfg.seed);
    let report = check_round_trip(&m, support, &sampler)?;
    let passed = report.max_round_trip < cfg.tol && report.support_violations == 0;
    Ok(Outcome {
        json: envelope(cfg, passed, report),
        csv: None,
        passed,
        diagnostic: None,
    })
}
