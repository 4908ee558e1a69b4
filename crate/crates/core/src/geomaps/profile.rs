//! Strictly increasing piecewise-linear maps of the real line.
//!
//! A [`Profile`] is determined by its knots `(x_i, y_i)`. Between knots it
//! interpolates linearly; outside the knot range it continues with slope 1,
//! so a profile whose end knots satisfy `y = x` is the identity far away.
//! Composition and powers are computed on the knots, which keeps `k`-fold
//! powers a single primitive instead of a `k`-deep evaluation chain.

use serde::{Deserialize, Serialize};

use super::MapError;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Profile {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<[f64; 2]>> for Profile {
    type Error = MapError;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self, MapError> {
        Profile::new(raw.into_iter().map(|[x, y]| (x, y)).collect())
    }
}

impl From<Profile> for Vec<[f64; 2]> {
    fn from(p: Profile) -> Self {
        p.knots.into_iter().map(|(x, y)| [x, y]).collect()
    }
}

impl Profile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, MapError> {
        if knots.is_empty() {
            return Err(MapError::InvalidProfile("profile needs at least one knot".into()));
        }
        for &(x, y) in &knots {
            if !x.is_finite() || !y.is_finite() {
                return Err(MapError::InvalidProfile("non-finite knot".into()));
            }
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(MapError::InvalidProfile(format!(
                    "knots must be strictly increasing in both coordinates: {:?} -> {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Profile { knots })
    }

    pub fn identity() -> Self {
        Profile {
            knots: vec![(0.0, 0.0)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn is_identity(&self) -> bool {
        self.knots.iter().all(|&(x, y)| x == y)
    }

    /// Smallest interval outside of which the profile is the identity, if any.
    pub fn moved_range(&self) -> Option<(f64, f64)> {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if first.0 != first.1 || last.0 != last.1 {
            return None;
        }
        let lo = self.knots.iter().position(|&(x, y)| x != y)?;
        let hi = self.knots.iter().rposition(|&(x, y)| x != y)?;
        Some((self.knots[lo - 1].0, self.knots[hi + 1].0))
    }

    /// Slopes of the interior segments (the outer rays have slope 1).
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    pub fn min_slope(&self) -> f64 {
        self.slopes().into_iter().fold(1.0, f64::min)
    }

    pub fn max_slope(&self) -> f64 {
        self.slopes().into_iter().fold(1.0, f64::max)
    }

    pub fn inverse(&self) -> Profile {
        Profile {
            knots: self.knots.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }

    pub fn eval<S: Scalar>(&self, t: S) -> S {
        eval_knots(&self.knots, t, false)
    }

    pub fn eval_inverse<S: Scalar>(&self, t: S) -> S {
        eval_knots(&self.knots, t, true)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.eval(t)
    }

    /// Segment `[(x0,y0),(x1,y1)]` containing `t`, or `None` on the outer rays.
    pub(crate) fn segment_of<S: Scalar>(&self, t: S) -> Option<((f64, f64), (f64, f64))> {
        locate(&self.knots, t, false).map(|i| (self.knots[i], self.knots[i + 1]))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Profile) -> Profile {
        let mut xs: Vec<f64> = inner.knots.iter().map(|k| k.0).collect();
        xs.extend(self.knots.iter().map(|k| inner.eval_inverse(k.0)));
        xs.sort_by(|a, b| a.total_cmp(b));
        xs.dedup();
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
        for x in xs {
            let y = self.eval(inner.eval(x));
            // rounding in the preimage step can produce near-duplicates
            if let Some(&(px, py)) = knots.last() {
                if x <= px || y <= py {
                    continue;
                }
            }
            knots.push((x, y));
        }
        Profile { knots }.simplified()
    }

    /// `k`-fold composite; negative `k` uses the inverse.
    pub fn power(&self, k: i64) -> Profile {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Profile::identity();
        for _ in 0..k.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Fiberwise blend `t ↦ (1-c) t + c p(t)` for `c ∈ [0, 1]`.
    pub fn blend(&self, c: f64) -> Profile {
        Profile {
            knots: self
                .knots
                .iter()
                .map(|&(x, y)| if x == y { (x, y) } else { (x, (1.0 - c) * x + c * y) })
                .collect(),
        }
    }

    /// Drops knots interior to an exactly straight run.
    fn simplified(self) -> Profile {
        if self.knots.len() < 3 {
            return self;
        }
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.knots.len());
        for &k in &self.knots {
            if out.len() >= 2 {
                let a = out[out.len() - 2];
                let b = out[out.len() - 1];
                let s1 = (b.1 - a.1) / (b.0 - a.0);
                let s2 = (k.1 - b.1) / (k.0 - b.0);
                if s1 == s2 {
                    out.pop();
                }
            }
            out.push(k);
        }
        // collinear end knots on identity rays are redundant too
        while out.len() >= 2 && out[0].0 == out[0].1 && out[1].0 == out[1].1 {
            out.remove(0);
        }
        while out.len() >= 2 {
            let n = out.len();
            if out[n - 1].0 == out[n - 1].1 && out[n - 2].0 == out[n - 2].1 {
                out.pop();
            } else {
                break;
            }
        }
        Profile { knots: out }
    }
}

/// Index `i` of the segment `[knots[i], knots[i+1]]` holding `t`.
fn locate<S: Scalar>(knots: &[(f64, f64)], t: S, by_y: bool) -> Option<usize> {
    let key = |k: &(f64, f64)| if by_y { k.1 } else { k.0 };
    let n = knots.len();
    if n < 2 || t < S::from_f64(key(&knots[0])) || t >= S::from_f64(key(&knots[n - 1])) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t < S::from_f64(key(&knots[mid])) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(lo)
}

fn eval_knots<S: Scalar>(knots: &[(f64, f64)], t: S, inverse: bool) -> S {
    let pick = |k: (f64, f64)| if inverse { (k.1, k.0) } else { k };
    let n = knots.len();
    match locate(knots, t, inverse) {
        Some(i) => {
            let (x0, y0) = pick(knots[i]);
            let (x1, y1) = pick(knots[i + 1]);
            let (x0s, y0s) = (S::from_f64(x0), S::from_f64(y0));
            let slope = (S::from_f64(y1) - y0s) / (S::from_f64(x1) - x0s);
            y0s + (t - x0s) * slope
        }
        None => {
            let first = pick(knots[0]);
            let end = if t < S::from_f64(first.0) {
                first
            } else {
                pick(knots[n - 1])
            };
            if end.0 == end.1 {
                t
            } else {
                t + (S::from_f64(end.1) - S::from_f64(end.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn push_profile() -> Profile {
        Profile::new(vec![(-1.5, -1.5), (0.0, 0.5), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(Profile::new(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(Profile::new(vec![]).is_err());
    }

    #[test]
    fn eval_and_inverse() {
        let p = push_profile();
        assert_eq!(p.eval_f64(0.0), 0.5);
        assert_eq!(p.eval_f64(1.0), 1.0);
        assert_eq!(p.eval_f64(5.0), 5.0);
        assert_eq!(p.eval_f64(-7.0), -7.0);
        assert_eq!(p.eval_inverse(0.5f64), 0.0);
        for i in 0..200 {
            let t = -3.0 + 0.03 * i as f64;
            assert!((p.eval_inverse(p.eval_f64(t)) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn power_matches_iteration() {
        let p = push_profile();
        for k in [0i64, 1, 2, 5, 17, 40] {
            let pk = p.power(k);
            for i in 0..100 {
                let t = -2.0 + 0.04 * i as f64;
                let mut it = t;
                for _ in 0..k {
                    it = p.eval_f64(it);
                }
                assert!((pk.eval_f64(t) - it).abs() < 1e-12, "k={k} t={t}");
            }
        }
        // orbit of 0 under u(t) = (t+1)/2 is 1 - 2^-n
        for n in 1..30 {
            assert_eq!(p.power(n).eval_f64(0.0), 1.0 - 2f64.powi(-(n as i32)));
        }
    }

    #[test]
    fn negative_power_inverts() {
        let p = push_profile();
        let f = p.power(6).compose(&p.power(-6));
        for i in 0..100 {
            let t = -2.0 + 0.04 * i as f64;
            assert!((f.eval_f64(t) - t).abs() < 1e-13);
        }
    }

    #[test]
    fn moved_range_of_radial_scaling() {
        let p = Profile::new(vec![(0.0, 0.0), (2.0, 1.0), (4.0, 4.0)]).unwrap();
        assert_eq!(p.moved_range(), Some((0.0, 4.0)));
        assert_eq!(Profile::identity().moved_range(), None);
        assert!(p.power(3).knots().contains(&(2.0, 0.25)));
    }
}
