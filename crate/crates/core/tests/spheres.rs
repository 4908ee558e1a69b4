use distortion_core::geomaps::{random_on_sphere, seeded_rng, MapExpr};
use distortion_core::scalar::dist_f64;
use distortion_core::spheres::*;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[test]
fn golden_circle_demo() {
    let r = sphere_distortion_demo(&SphereMap::circle_rotation(golden()), &DemoOptions::new(6)).unwrap();
    for row in &r.rows {
        println!("{row:?}");
    }
    assert!(r.passed());
    let ratios: Vec<f64> = r.rows.iter().map(|x| x.k_n as f64 / x.p_n as f64).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    assert!(*ratios.last().unwrap() < 0.01);
}

#[test]
fn sphere_rotation_demo() {
    let r = sphere_distortion_demo(&SphereMap::sphere_rotation(1.0), &DemoOptions::new(4)).unwrap();
    for row in &r.rows {
        println!("{row:?}");
    }
    assert!(r.passed());
}

#[test]
fn chart_round_trips() {
    let mut rng = seeded_rng(5);
    for chart in [Chart::from_south(8.0), Chart::from_north(8.0)] {
        for _ in 0..10_000 {
            let v = random_on_sphere(&mut rng, 3, 1.0);
            let back = chart.backward(&chart.forward(&v));
            assert!(dist_f64(&back, &v) < 1e-12 || chart.pole_gap(&v) < 1e-3);
        }
    }
    for k in 0..ANCHOR_COUNT {
        let chart = anchor_chart(k);
        for i in 0..500 {
            let v = SpherePoint::on_circle(i as f64 / 500.0 + 1e-4);
            let back = chart.backward(&chart.forward(v.coords()));
            assert!(dist_f64(&back, v.coords()) < 1e-12);
        }
    }
}

#[test]
fn transport_round_trip_matches_planar_map() {
    let chart = Chart::from_south(8.0);
    let m = MapExpr::translation(vec![0.2, -0.1], vec![0.3, 0.1], 0.2, 0.9).unwrap();
    let s = transport(&m, &chart).unwrap();
    let back = MapExpr::chart_patch(chart.clone(), s.clone(), 8.0).unwrap();
    let mut rng = seeded_rng(8);
    for _ in 0..1000 {
        let x = distortion_core::geomaps::random_in_ball(&mut rng, 2, 3.0);
        assert!(dist_f64(&back.apply(&x).unwrap(), &m.apply(&x).unwrap()) < 1e-9);
    }
    // the projecting pole is fixed
    assert_eq!(s.eval(&[0.0, 0.0, -1.0]).unwrap(), vec![0.0, 0.0, -1.0]);
}
