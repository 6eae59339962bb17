//! Seeded sample points for residual checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connection::Point2;
use crate::extension::Point4;

/// `x¹` range of the sampling box.
pub const X1_RANGE: (f64, f64) = (0.5, 2.0);
/// `x²` range of the sampling box.
pub const X2_RANGE: (f64, f64) = (-1.0, 1.0);

/// Seed used by internal self-checks.
pub const INTERNAL_SEED: u64 = 0x5eed_a11f;

/// Number of points used by internal self-checks.
pub const INTERNAL_SAMPLES: usize = 20;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_point<R: Rng>(rng: &mut R) -> Point2 {
    Point2::new(rng.gen_range(X1_RANGE.0..=X1_RANGE.1), rng.gen_range(X2_RANGE.0..=X2_RANGE.1))
}

/// `n` points in the box `[0.5, 2] × [−1, 1]`.
pub fn sample_points(seed: u64, n: usize) -> Vec<Point2> {
    let mut r = rng(seed);
    (0..n).map(|_| sample_point(&mut r)).collect()
}

/// `n` points of `T*M` over the sampling box, fibre coordinates in `[−1, 1]²`.
pub fn sample_points4(seed: u64, n: usize) -> Vec<Point4> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let p = sample_point(&mut r);
            Point4::new(p.x1, p.x2, r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0))
        })
        .collect()
}

pub fn internal_points() -> Vec<Point2> {
    sample_points(INTERNAL_SEED, INTERNAL_SAMPLES)
}
