use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{edge_list, Point, Tin, TransformRecord};
use crate::error::{Error, Result};
use crate::scalar::{int, rat, Scalar};

/// Applies one shared shear `(x, y) -> (x + l*y, y)` plus an x-translation to
/// both TINs so that no edge is vertical and every x-coordinate is >= 1.
///
/// `l` is drawn from a seeded sequence of small nonzero rationals and redrawn
/// until no edge of either TIN is vertical. Heights are unchanged.
pub fn normalize_pair(f: &Tin, g: &Tin, seed: u64) -> Result<(Tin, Tin, TransformRecord)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<(Scalar, Scalar)> = [f, g]
        .iter()
        .flat_map(|t| {
            edge_list(t)
                .into_iter()
                .map(|(a, b, _)| (&t.points[b].x - &t.points[a].x, &t.points[b].y - &t.points[a].y))
        })
        .collect();
    // an edge (dx, dy) becomes vertical exactly when l = -dx/dy
    for _ in 0..10_000 {
        let num = rng.gen_range(1..=9i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let den = rng.gen_range(2..=17i64);
        let shear = rat(num, den);
        if dirs.iter().all(|(dx, dy)| !(dx + &shear * dy).is_zero()) {
            return normalize_pair_with(f, g, &shear);
        }
    }
    Err(Error::DegenerateInput("no admissible shear found".into()))
}

/// Normalization with a caller-chosen shear; still translates to x >= 1.
pub fn normalize_pair_with(f: &Tin, g: &Tin, shear: &Scalar) -> Result<(Tin, Tin, TransformRecord)> {
    let sheared = TransformRecord { shear: shear.clone(), shift: Scalar::zero() };
    let min_x = f
        .points
        .iter()
        .chain(&g.points)
        .map(|p| sheared.apply(p).x)
        .min()
        .ok_or_else(|| Error::InvalidTin("empty TIN".into()))?;
    let step = TransformRecord { shear: shear.clone(), shift: int(1) - min_x };
    let map = |t: &Tin| -> Tin {
        Tin {
            points: t.points.iter().map(|p| step.apply(p)).collect::<Vec<Point>>(),
            frame: step.compose(&t.frame),
            ..t.clone()
        }
    };
    Ok((map(f), map(g), step))
}
