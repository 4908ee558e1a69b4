//! Power schedules `p(n)` with `k_n / p(n) -> 0`.

/// `p(n) = (n+1) k_n scale`, bumped if needed to stay strictly increasing.
pub fn schedule_powers(k_bounds: &[u64], scale: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(k_bounds.len());
    for (n, &k) in k_bounds.iter().enumerate() {
        let mut p = (n as u64 + 1) * k * scale.max(1);
        if let Some(&prev) = out.last() {
            p = p.max(prev + 1);
        }
        out.push(p);
    }
    out
}

/// Smallest scale making the final ratio `k/p = 1/(N scale)` drop below `target`.
pub fn scale_for_final_ratio(n_slots: usize, target: f64) -> u64 {
    if n_slots == 0 {
        return 1;
    }
    let mut s = 1u64;
    while 1.0 / (n_slots as f64 * s as f64) >= target {
        s += 1;
    }
    s
}

/// Continued-fraction convergent denominators of `alpha` up to `limit`,
/// strictly increasing.
pub fn convergent_denominators(alpha: f64, limit: u64) -> Vec<u64> {
    let mut x = alpha.rem_euclid(1.0);
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut out = vec![1u64];
    // f64 partial quotients stay reliable while q^2 is far below 1/eps
    let cap = limit.min(50_000_000);
    while x > 1e-15 {
        let inv = 1.0 / x;
        let a = inv.floor();
        x = inv - a;
        let next = match (a as u64).checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if next > cap {
            break;
        }
        q_prev = q;
        q = next;
        if q > *out.last().unwrap() {
            out.push(q);
        }
    }
    out
}

/// Distance from `p alpha` to the nearest integer, the circle displacement of
/// the `p`-th rotation power.
pub fn circle_distance(alpha: f64, p: u64) -> f64 {
    let t = (alpha.rem_euclid(1.0) * p as f64).rem_euclid(1.0);
    t.min(1.0 - t)
}

/// Schedule intersected with convergent denominators of `alpha`: each `p(n)`
/// is the least denominator that is at least `(n+1) k_n scale` and exceeds
/// `p(n-1)`. Falls back to the plain value when denominators run out.
pub fn schedule_with_recurrence(k_bounds: &[u64], scale: u64, alpha: f64) -> Vec<u64> {
    let base = schedule_powers(k_bounds, scale);
    let limit = base.last().map_or(1, |&b| b.saturating_mul(1000));
    let dens = convergent_denominators(alpha, limit);
    let mut out: Vec<u64> = Vec::with_capacity(base.len());
    for &b in &base {
        let floor = out.last().map_or(b, |&p| b.max(p + 1));
        let p = dens.iter().copied().find(|&q| q >= floor).unwrap_or(floor);
        out.push(p);
    }
    out
}
