use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Deterministic point sets for sup-norm estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Regular grid on `[-half_width, half_width]^N`.
    Grid { per_axis: usize, half_width: f64 },
    /// Uniform points in a ball.
    Ball {
        center: Vec<f64>,
        radius: f64,
        count: usize,
        seed: u64,
    },
    /// Explicit list.
    Points { points: Vec<Vec<f64>> },
}

impl Sampler {
    pub fn grid(per_axis: usize, half_width: f64) -> Self {
        Sampler::Grid { per_axis, half_width }
    }

    pub fn ball(dim: usize, radius: f64, count: usize, seed: u64) -> Self {
        Sampler::Ball {
            center: vec![0.0; dim],
            radius,
            count,
            seed,
        }
    }

    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        match self {
            Sampler::Grid { per_axis, half_width } => {
                let n = *per_axis;
                if n == 0 || dim == 0 {
                    return Vec::new();
                }
                let coord = |i: usize| {
                    if n == 1 {
                        0.0
                    } else {
                        -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64
                    }
                };
                let total = n.checked_pow(dim as u32).unwrap_or(usize::MAX);
                let mut out = Vec::with_capacity(total.min(1 << 20));
                let mut idx = vec![0usize; dim];
                loop {
                    out.push(idx.iter().map(|&i| coord(i)).collect());
                    let mut k = 0;
                    loop {
                        if k == dim {
                            return out;
                        }
                        idx[k] += 1;
                        if idx[k] < n {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                }
            }
            Sampler::Ball {
                center,
                radius,
                count,
                seed,
            } => {
                let mut rng = seeded_rng(*seed);
                (0..*count)
                    .map(|_| {
                        let mut p = random_in_ball(&mut rng, dim, *radius);
                        for (c, o) in p.iter_mut().zip(center) {
                            *c += o;
                        }
                        p
                    })
                    .collect()
            }
            Sampler::Points { points } => points.clone(),
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `B(0, radius)` by rejection from the cube.
pub fn random_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: f64 = p.iter().map(|c| c * c).sum();
        if r2 < 1.0 {
            return p.into_iter().map(|c| c * radius).collect();
        }
    }
}

/// Uniform point on the sphere of the given radius.
pub fn random_on_sphere<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p = random_in_ball(rng, dim, 1.0);
        let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1e-3 {
            return p.into_iter().map(|c| c * radius / r).collect();
        }
    }
}
