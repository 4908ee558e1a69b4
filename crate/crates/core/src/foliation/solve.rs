/// Residual at which a solve stops early.
const STOP: f64 = 1e-14;
const BISECT_WIDTH: f64 = 1e-2;
const MAX_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub t: f64,
    pub residual: f64,
    pub evals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveFailure<E> {
    /// `h(lo) > target` or `h(hi) < target`.
    NotBracketed {
        lo: f64,
        hi: f64,
    },
    Eval(E),
}

/// Solves `h(t) = target` for nondecreasing `h` on `[lo, hi]`.
///
/// Bisects until the bracket is narrow, then takes secant steps, falling
/// back to bisection whenever a step leaves the bracket. `guess` (usually
/// the target itself, for near-identity slices) narrows the first bracket.
pub fn solve_monotone<E>(
    mut h: impl FnMut(f64) -> Result<f64, E>,
    target: f64,
    lo: f64,
    hi: f64,
    guess: f64,
) -> Result<Root, SolveFailure<E>> {
    let mut evals = 0usize;
    let mut r = |t: f64, evals: &mut usize| -> Result<f64, SolveFailure<E>> {
        *evals += 1;
        h(t).map(|v| v - target).map_err(SolveFailure::Eval)
    };
    let (mut a, mut b) = (lo, hi);
    let mut fa = r(a, &mut evals)?;
    let mut fb = r(b, &mut evals)?;
    if fa > 0.0 || fb < 0.0 {
        return Err(SolveFailure::NotBracketed { lo, hi });
    }
    let mut best = if -fa < fb { (a, -fa) } else { (b, fb) };
    let record = |t: f64, v: f64, best: &mut (f64, f64)| {
        if v.abs() < best.1 {
            *best = (t, v.abs());
        }
    };
    if best.1 <= STOP {
        return Ok(Root {
            t: best.0,
            residual: best.1,
            evals,
        });
    }
    if guess > a && guess < b {
        let fg = r(guess, &mut evals)?;
        record(guess, fg, &mut best);
        if fg < 0.0 {
            (a, fa) = (guess, fg);
        } else {
            (b, fb) = (guess, fg);
        }
    }
    let mut steps = 0;
    while b - a > BISECT_WIDTH && best.1 > STOP && steps < MAX_STEPS {
        let m = 0.5 * (a + b);
        let fm = r(m, &mut evals)?;
        record(m, fm, &mut best);
        if fm < 0.0 {
            (a, fa) = (m, fm);
        } else {
            (b, fb) = (m, fm);
        }
        steps += 1;
    }
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    while best.1 > STOP && steps < MAX_STEPS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let mut t = if f1 != f0 { x1 - f1 * (x1 - x0) / (f1 - f0) } else { mid };
        if !(t > a && t < b) {
            t = mid;
        }
        let ft = r(t, &mut evals)?;
        record(t, ft, &mut best);
        if ft < 0.0 {
            a = t;
        } else {
            b = t;
        }
        (x0, f0, x1, f1) = (x1, f1, t, ft);
        steps += 1;
    }
    Ok(Root {
        t: best.0,
        residual: best.1,
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(t: f64) -> Result<f64, ()> {
        Ok(t)
    }

    #[test]
    fn linear_and_cubic() {
        let r = solve_monotone(ok, 0.3, -1.0, 1.0, 0.3).unwrap();
        assert_eq!(r.t, 0.3);
        let r = solve_monotone(|t| Ok::<_, ()>(t * t * t + 0.2 * t), 0.5, -1.0, 1.0, 0.5).unwrap();
        assert!(r.residual < 1e-13);
        assert!((r.t.powi(3) + 0.2 * r.t - 0.5).abs() < 1e-13);
    }

    #[test]
    fn flat_pieces_and_kinks() {
        // piecewise linear with a nearly flat part
        let h = |t: f64| Ok::<_, ()>(if t < 0.1 { t } else { 0.1 + 1e-3 * (t - 0.1) });
        let r = solve_monotone(h, 0.1005, -1.0, 1.0, 0.1005).unwrap();
        assert!(r.residual < 1e-13, "{r:?}");
        assert!((r.t - 0.6).abs() < 1e-9);
    }

    #[test]
    fn unbracketed_target() {
        let e = solve_monotone(ok, 2.0, -1.0, 1.0, 0.0).unwrap_err();
        assert_eq!(e, SolveFailure::NotBracketed { lo: -1.0, hi: 1.0 });
    }
}
