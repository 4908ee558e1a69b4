use distortion_core::geomaps::{c0_distance, MapExpr, Profile, Sampler};
use distortion_core::words::{Assignment, Letter, Word};
use proptest::prelude::*;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Increasing profile equal to the identity outside `[0, r2]`.
fn bump_profile() -> impl Strategy<Value = Profile> {
    (0.2f64..1.0, 0.5f64..1.5, 0.3f64..1.7).prop_map(|(r1, gap, s)| {
        let y = (r1 * s).min(0.95 * (r1 + gap));
        Profile::new(vec![(0.0, 0.0), (r1, y), (r1 + gap, r1 + gap)]).unwrap()
    })
}

fn translation() -> impl Strategy<Value = MapExpr> {
    (
        prop::array::uniform2(-1.0f64..1.0),
        prop::array::uniform2(-1.0f64..1.0),
        0.0f64..0.5,
        0.3f64..1.5,
        0.05f64..0.9,
    )
        .prop_map(|(c, dir, inner, width, frac)| {
            let n = dir[0].hypot(dir[1]).max(1e-3);
            let len = frac * width;
            let shift = vec![dir[0] / n * len, dir[1] / n * len];
            MapExpr::translation(c.to_vec(), shift, inner, inner + width).unwrap()
        })
}

fn primitive() -> impl Strategy<Value = MapExpr> {
    prop_oneof![
        translation(),
        bump_profile().prop_map(|p| MapExpr::radial(2, p).unwrap()),
        (0usize..2, bump_profile(), 0.0f64..0.5, 0.3f64..1.0).prop_map(|(axis, p, inner, w)| MapExpr::push(
            2,
            axis,
            p,
            inner,
            inner + w
        )
        .unwrap()),
    ]
}

fn expr() -> impl Strategy<Value = MapExpr> {
    primitive().prop_recursive(4, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(|ms| MapExpr::compose(2, &ms).unwrap()),
            inner.prop_map(|m| m.inverse()),
        ]
    })
}

fn points(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 2), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expressions_round_trip(m in expr(), pts in points(20)) {
        for x in &pts {
            let y = m.apply(x).unwrap();
            prop_assert!(dist(&m.apply_inverse(&y).unwrap(), x) < 1e-9);
            let z = m.apply_inverse(x).unwrap();
            prop_assert!(dist(&m.apply(&z).unwrap(), x) < 1e-9);
        }
    }

    #[test]
    fn points_beyond_support_are_fixed(m in expr(), dirs in points(20), extra in 0.0f64..3.0) {
        let r = m.support_radius();
        prop_assume!(r.is_finite());
        for d in &dirs {
            let n = dist(d, &[0.0, 0.0]);
            prop_assume!(n > 1e-3);
            let x: Vec<f64> = d.iter().map(|c| c / n * (r + 1e-9 + extra)).collect();
            prop_assert_eq!(m.apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn exact_powers_agree_with_iteration(m in primitive(), k in -6i64..7, pts in points(10)) {
        prop_assume!(m.power_exact(1).is_ok());
        let p = m.power_exact(k).unwrap();
        for x in &pts {
            let mut y = x.clone();
            for _ in 0..k.unsigned_abs() {
                y = if k > 0 { m.apply(&y).unwrap() } else { m.apply_inverse(&y).unwrap() };
            }
            prop_assert!(dist(&p.apply(x).unwrap(), &y) < 1e-9);
        }
    }

    #[test]
    fn json_round_trip_preserves_evaluation(m in expr(), pts in points(10)) {
        let back = MapExpr::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), m.to_json());
        for x in &pts {
            prop_assert_eq!(back.apply(x).unwrap(), m.apply(x).unwrap());
        }
    }

    #[test]
    fn c0_distance_is_a_pseudometric(f in expr(), g in expr(), h in expr(), seed in 0u64..1000) {
        let s = Sampler::ball(2, 3.0, 50, seed);
        let fg = c0_distance(&f, &g, &s).unwrap();
        prop_assert_eq!(fg, c0_distance(&g, &f, &s).unwrap());
        prop_assert_eq!(c0_distance(&f, &f, &s).unwrap(), 0.0);
        let gh = c0_distance(&g, &h, &s).unwrap();
        let fh = c0_distance(&f, &h, &s).unwrap();
        prop_assert!(fh <= fg + gh + 1e-12);
    }
}

fn letter() -> impl Strategy<Value = Letter> {
    (0usize..3, any::<bool>()).prop_map(|(g, inv)| {
        let l = Letter::new(["a", "b", "c"][g]);
        if inv {
            l.inv()
        } else {
            l
        }
    })
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(), 0..40).prop_map(Word::from_letters)
}

/// Cancels the first adjacent inverse pair until none is left.
fn reduce_by_rescanning(w: &Word) -> Vec<(String, i64)> {
    let mut ls: Vec<(String, i64)> = w.letters().iter().map(|l| (l.gen().to_string(), l.exp())).collect();
    'outer: loop {
        for i in 0..ls.len().saturating_sub(1) {
            if ls[i].0 == ls[i + 1].0 && ls[i].1 == -ls[i + 1].1 {
                ls.drain(i..i + 2);
                continue 'outer;
            }
        }
        return ls;
    }
}

fn small_assignment() -> Assignment {
    Assignment::new(2)
        .with(
            "a",
            MapExpr::translation(vec![0.0, 0.0], vec![0.3, 0.1], 0.2, 1.0).unwrap(),
        )
        .unwrap()
        .with(
            "b",
            MapExpr::radial(2, Profile::new(vec![(0.0, 0.0), (0.5, 0.3), (1.2, 1.2)]).unwrap()).unwrap(),
        )
        .unwrap()
        .with(
            "c",
            MapExpr::push(
                2,
                1,
                Profile::new(vec![(-1.0, -1.0), (0.0, 0.4), (1.0, 1.0)]).unwrap(),
                0.1,
                0.8,
            )
            .unwrap(),
        )
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_matches_rescanning(w in word()) {
        let r = w.reduce();
        let oracle = reduce_by_rescanning(&w);
        let got: Vec<(String, i64)> = r.letters().iter().map(|l| (l.gen().to_string(), l.exp())).collect();
        prop_assert_eq!(got, oracle);
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.reduce(), r);
    }

    #[test]
    fn word_times_inverse_is_trivial(w in word()) {
        prop_assert!(w.concat(&w.inverse()).reduce().is_empty());
        prop_assert_eq!(w.inverse().inverse(), w);
    }

    #[test]
    fn reduced_length_is_subadditive(u in word(), v in word()) {
        let uv = u.concat(&v).reduce().len();
        prop_assert!(uv <= u.reduce().len() + v.reduce().len());
        prop_assert_eq!(u.concat(&v).inverse(), v.inverse().concat(&u.inverse()));
    }

    #[test]
    fn reduction_preserves_evaluation(w in prop::collection::vec(letter(), 0..12).prop_map(Word::from_letters),
                                      x in prop::collection::vec(-2.0f64..2.0, 2)) {
        let asg = small_assignment();
        let full: Vec<f64> = asg.evaluate(&w, &x).unwrap();
        let red: Vec<f64> = asg.evaluate(&w.reduce(), &x).unwrap();
        prop_assert!(dist(&full, &red) < 1e-9);
    }
}
