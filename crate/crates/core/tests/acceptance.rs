//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use distortion_core::foliation::{foliation_decompose, perturbation, FoliationOptions};
use distortion_core::geomaps::{
    random_in_ball, random_on_sphere, seeded_rng, MapExpr, PointMap, Profile, RegionDescriptor, Sampler,
};
use distortion_core::scalar::dist_f64;
use distortion_core::spheres::{
    decompose_sphere_rotation, sphere_distortion_demo, transport, Chart, DemoOptions, SphereMap,
};
use distortion_core::witness::{
    build_generators, commutator_witness_report, run_session, swindle_factorize, GeneratorParams, Target,
    VerifyOptions, WitnessPlan, WitnessSession,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, budget: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < budget, || format!("took {t:?}, budget {budget:?}"))
}

fn bump<R: Rng>(rng: &mut R, lo: f64) -> Profile {
    let r1: f64 = rng.random_range(0.2..1.0);
    let r2 = r1 + rng.random_range(0.4..1.2);
    let y = (r1 * rng.random_range(0.4..1.6)).min(0.95 * r2);
    Profile::new(vec![(lo, lo), (r1, y), (r2, r2)]).unwrap()
}

fn translation<R: Rng>(rng: &mut R, dim: usize, reach: f64) -> MapExpr {
    let outer = rng.random_range(0.3..0.9);
    let inner = outer * rng.random_range(0.1..0.6);
    let center = random_in_ball(rng, dim, reach - outer);
    let shift = random_in_ball(rng, dim, 0.9 * (outer - inner));
    MapExpr::translation(center, shift, inner, outer).unwrap()
}

/// One random planar primitive of every available kind.
fn primitive(rng: &mut ChaCha8Rng) -> MapExpr {
    match rng.random_range(0..10) {
        0 => MapExpr::identity(2),
        1 => MapExpr::radial(2, bump(rng, 0.0)).unwrap(),
        2 => translation(rng, 2, 2.5),
        3 => MapExpr::push(2, rng.random_range(0..2), bump(rng, -0.1), 0.1, 0.7).unwrap(),
        4 => MapExpr::affine(rng.random_range(0.8..1.25), random_in_ball(rng, 2, 0.3)).unwrap(),
        5 => {
            let c = random_in_ball(rng, 2, 1.5);
            let t = MapExpr::affine(1.0, c.clone()).unwrap();
            let shift = random_in_ball(rng, 2, 0.2);
            let part = MapExpr::translation(c, shift, 0.1, 0.5).unwrap();
            MapExpr::piecewise_union(2, vec![(RegionDescriptor::new(&t, 0.6, None), part)]).unwrap()
        }
        6 => {
            let inner = MapExpr::translation(vec![0.75, 0.0], vec![0.0, 0.1], 0.05, 0.2).unwrap();
            MapExpr::swindle(&inner)
        }
        7 => {
            let chart = Chart::from_south(8.0);
            let m = translation(rng, 2, 1.5);
            MapExpr::chart_patch(chart.clone(), transport(&m, &chart).unwrap(), 8.0).unwrap()
        }
        8 => {
            let m = translation(rng, 2, 1.5);
            let r = m.support_radius();
            m.restrict_support(r).unwrap()
        }
        _ => MapExpr::push(2, 0, bump(rng, -0.1), 0.1, 0.7)
            .unwrap()
            .power_exact(rng.random_range(-3..4))
            .unwrap(),
    }
}

fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> MapExpr {
    if depth == 0 {
        return primitive(rng);
    }
    match rng.random_range(0..4) {
        0 => random_expr(rng, depth - 1).inverse(),
        1 => primitive(rng),
        _ => {
            let k = rng.random_range(1..4);
            let ms: Vec<MapExpr> = (0..k).map(|_| random_expr(rng, depth - 1)).collect();
            MapExpr::compose(2, &ms).unwrap()
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(1);
    let (mut worst, mut checked, mut support_pts) = (0.0f64, 0, 0);
    for e in 0..200 {
        let m = random_expr(&mut rng, if e % 10 == 0 { 12 } else { e % 12 });
        for _ in 0..50 {
            let x = random_in_ball(&mut rng, 2, 4.0);
            let y = m.apply(&x).map_err(|e| e.to_string())?;
            let back = m.apply_inverse(&y).map_err(|e| e.to_string())?;
            worst = worst.max(dist_f64(&back, &x));
            checked += 1;
        }
        let r = m.support_radius();
        if r.is_finite() {
            for _ in 0..20 {
                let radius = r * (1.0 + 1e-12) + rng.random_range(0.0..2.0);
                let x = random_on_sphere(&mut rng, 2, radius);
                let y = m.apply(&x).map_err(|e| e.to_string())?;
                ensure(y == x, || format!("moved {x:?} beyond support {r}"))?;
                support_pts += 1;
            }
        }
    }
    ensure(checked >= 10_000, || format!("only {checked} points"))?;
    ensure(worst < 1e-9, || format!("round trip {worst:e}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "{checked} points, round trip {worst:.1e}, {support_pts} support points fixed"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let plan = WitnessPlan::build(GeneratorParams::defaults(2), 6).map_err(|e| e.to_string())?;
    let check = plan.verify(1000, 2).map_err(|e| e.to_string())?;
    ensure(check.passed(), || format!("{check:?}"))?;
    let d = &check.diameters;
    ensure(d.windows(2).all(|w| w[1] < w[0]), || format!("diameters {d:?}"))?;
    // independent resampling: U regions pairwise and F̂(V) against V
    let mut rng = seeded_rng(20);
    let mut hits = 0;
    for n in 0..6 {
        let f = plan.f_n(n).unwrap();
        let fhat = plan.f_hat(n).unwrap();
        let v = plan.v_region(n).unwrap();
        for _ in 0..1000 {
            let u = f.apply(&random_in_ball(&mut rng, 2, 2.0 * (1.0 - 1e-9))).unwrap();
            for m in (0..6).filter(|&m| m != n) {
                hits += plan.u_region(m).unwrap().contains(&u).unwrap() as usize;
            }
            let p = f.apply(&random_in_ball(&mut rng, 2, plan.rho)).unwrap();
            hits += v.contains(&fhat.apply(&p).unwrap()).unwrap() as usize;
        }
    }
    ensure(hits == 0, || format!("{hits} overlap samples"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("0 overlaps, diameters {:.3e}..{:.3e}", d[0], d[d.len() - 1]))
}

fn translation_pairs(dim: usize, count: usize, seed: u64) -> Vec<(MapExpr, MapExpr)> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| (translation(&mut rng, dim, 1.9), translation(&mut rng, dim, 1.9)))
        .collect()
}

fn commutator_reports() -> Result<String, String> {
    let mut out = Vec::new();
    for dim in [1, 2] {
        let plan = WitnessPlan::build(GeneratorParams::defaults(dim), 5).map_err(|e| e.to_string())?;
        let gens = build_generators(&plan, &translation_pairs(dim, 5, 30 + dim as u64)).map_err(|e| e.to_string())?;
        let opts = VerifyOptions {
            samples: 1000,
            seed: 3,
            ..VerifyOptions::default()
        };
        for n in 0..5 {
            let w = commutator_witness_report(&gens, n, &opts).map_err(|e| e.to_string())?;
            out.push(w);
        }
    }
    Ok(serde_json::to_string(&out).unwrap())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let json = commutator_reports()?;
    let ws: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let plan = WitnessPlan::build(GeneratorParams::defaults(2), 5).unwrap();
    let mut worst = 0.0f64;
    for w in &ws {
        let n = w["n"].as_u64().unwrap() as usize;
        let k = 14 * n as u64 + 12 * plan.l[n] as u64 + 2 * plan.l_tilde[n] as u64 + 14;
        let sup = w["report"]["sup_err"].as_f64().unwrap();
        let len = w["report"]["reduced_len"].as_u64().unwrap();
        ensure(sup < 1e-6, || format!("n {n}: sup {sup:e}"))?;
        ensure(len <= k, || format!("n {n}: length {len} > {k}"))?;
        worst = worst.max(sup);
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} witnesses, sup {worst:.1e}", ws.len()))
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(4);
    let (mut worst, mut layers) = (0.0f64, 0);
    for i in 0..10 {
        let parts: Vec<MapExpr> = (0..3).map(|_| translation(&mut rng, 2, 1.95)).collect();
        let h = MapExpr::compose(2, &parts).unwrap();
        let s = swindle_factorize(&h).map_err(|e| e.to_string())?;
        let pts: Vec<Vec<f64>> = (0..1000).map(|_| random_in_ball(&mut rng, 2, 2.5)).collect();
        let err = s.sup_error(&h, &pts).map_err(|e| e.to_string())?;
        ensure(err < 1e-6, || format!("target {i}: {err:e}"))?;
        worst = worst.max(err);
        let rows = s.continuity(20, 200, i).map_err(|e| e.to_string())?;
        for r in &rows {
            ensure(r.sup_displacement <= r.bound, || format!("target {i}: {r:?}"))?;
        }
        layers += rows.len();
    }
    Ok(format!("10 targets, sup {worst:.1e}, {layers} continuity layers"))
}

fn circle_report() -> Result<String, String> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let opts = DemoOptions {
        samples: 1000,
        ..DemoOptions::new(6)
    };
    let r = sphere_distortion_demo(&SphereMap::circle_rotation(golden), &opts).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&r).unwrap())
}

fn check_demo(json: &str, last_ratio: Option<f64>) -> Outcome {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let mut ratios = Vec::new();
    let mut worst = 0.0f64;
    for r in rows {
        let sup = r["sup_err"].as_f64().unwrap();
        ensure(sup < 1e-6, || format!("row {r}"))?;
        worst = worst.max(sup);
        ratios.push(r["k_n"].as_f64().unwrap() / r["p_n"].as_f64().unwrap());
    }
    if let Some(bound) = last_ratio {
        ensure(ratios.windows(2).all(|w| w[1] < w[0]), || format!("ratios {ratios:?}"))?;
        ensure(*ratios.last().unwrap() < bound, || format!("ratios {ratios:?}"))?;
    }
    Ok(format!(
        "{} rows, sup {worst:.1e}, final ratio {:.2e}",
        rows.len(),
        ratios.last().unwrap()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let json = circle_report()?;
    let msg = check_demo(&json, Some(0.01))?;
    within(start, Duration::from_secs(120))?;
    Ok(msg)
}

fn criterion_6() -> Outcome {
    let opts = DemoOptions {
        samples: 1000,
        ..DemoOptions::new(4)
    };
    let r = sphere_distortion_demo(&SphereMap::sphere_rotation(1.0), &opts).map_err(|e| e.to_string())?;
    let msg = check_demo(&serde_json::to_string(&r).unwrap(), None)?;
    let (t1, t2) = decompose_sphere_rotation(1.0);
    let mut rng = seeded_rng(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v = random_on_sphere(&mut rng, 3, 1.0);
        let (c, s) = (1f64.cos(), 1f64.sin());
        let rotated = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
        let y = t1.eval(&t2.eval(&v).unwrap()).unwrap();
        worst = worst.max(dist_f64(&y, &rotated));
    }
    ensure(worst < 1e-12, || format!("twist product off by {worst:e}"))?;
    Ok(format!("{msg}, twist product {worst:.1e}"))
}

fn k_column(targets: Vec<Target>) -> Result<String, String> {
    let s = WitnessSession {
        params: GeneratorParams::defaults(2),
        n_max: 4,
        targets,
    };
    let opts = VerifyOptions {
        samples: 200,
        ..VerifyOptions::default()
    };
    let r = run_session(&s, &opts).map_err(|e| e.to_string())?;
    let ks: Vec<u64> = r.witnesses.iter().map(|w| w.k_bound).collect();
    Ok(format!("{}|{:?}", serde_json::to_string(&r.k_bounds).unwrap(), ks))
}

fn criterion_7() -> Outcome {
    let a = translation_pairs(2, 4, 70)
        .into_iter()
        .map(|(f, g)| Target::Pair { f, g })
        .collect();
    let b = translation_pairs(2, 4, 71)
        .into_iter()
        .map(|(f, g)| Target::Pair { f, g })
        .collect();
    let (ka, kb) = (k_column(a)?, k_column(b)?);
    ensure(ka == kb, || format!("{ka} vs {kb}"))?;
    Ok(format!("k columns identical: {ka}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for dim in [2, 3] {
        let f = perturbation(dim, 0.05, 8).map_err(|e| e.to_string())?;
        let opts = FoliationOptions::default();
        let dec = foliation_decompose(&f, &opts).map_err(|e| e.to_string())?;
        let grid = Sampler::grid(17, 1.0).points(dim);
        let mut sup = 0.0f64;
        for x in &grid {
            let mut y = x.clone();
            for (k, fac) in dec.factors.iter().enumerate() {
                let z = fac.map_point(&y).map_err(|e| e.to_string())?;
                for i in (0..dim).filter(|&i| i != k) {
                    ensure(z[i] == y[i], || format!("factor {k} moved coordinate {i} at {y:?}"))?;
                }
                y = z;
            }
            sup = sup.max(dist_f64(&y, &f.apply(x).unwrap()));
        }
        ensure(sup < 1e-6, || format!("N={dim}: reconstruction {sup:e}"))?;
        let inv = dec.report.invariant_errors.iter().cloned().fold(0.0, f64::max);
        ensure(inv < 1e-8, || format!("N={dim}: invariant {inv:e}"))?;
        parts.push(format!("N={dim} sup {sup:.1e} invariant {inv:.1e}"));
    }
    within(start, Duration::from_secs(60))?;
    Ok(parts.join(", "))
}

fn criterion_9() -> Outcome {
    let (a, b) = (commutator_reports()?, commutator_reports()?);
    ensure(a == b, || "commutator reports differ".into())?;
    let (c, d) = (circle_report()?, circle_report()?);
    ensure(c == d, || "circle reports differ".into())?;
    Ok(format!("{} + {} bytes identical", a.len(), c.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("map algebra", criterion_1),
        ("plan soundness", criterion_2),
        ("commutator witnesses", criterion_3),
        ("swindle", criterion_4),
        ("circle demo", criterion_5),
        ("sphere demo", criterion_6),
        ("k independence", criterion_7),
        ("foliation", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(msg) => println!("PASS {} {name}: {msg} ({:.2?})", i + 1, start.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
