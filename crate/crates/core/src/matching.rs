//! Moments, L2 distance and the least-squares vertical fit `f ≈ s·g + t`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fastinner::{inner_product_fast_with, FastOptions};
use crate::geom::{LinearFunc, Tin};
use crate::integrate::{integrate_product_over_triangle, naive_inner_product};
use crate::scalar::{sqrt_to_decimal, sum_balanced, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    Naive,
    #[default]
    Fast,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Method::Naive),
            "fast" => Ok(Method::Fast),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

pub fn inner_product(f: &Tin, g: &Tin, method: Method, opt: &FastOptions) -> Result<Scalar> {
    match method {
        Method::Naive => naive_inner_product(f, g),
        Method::Fast => Ok(inner_product_fast_with(f, g, opt)?.value),
    }
}

/// `(∬f, ∬f², area)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moments {
    pub integral: Scalar,
    pub square: Scalar,
    pub area: Scalar,
}

pub fn moments(t: &Tin) -> Result<Moments> {
    let one = LinearFunc::constant(Scalar::from_integer(1.into()));
    let mut lin = Vec::with_capacity(t.num_triangles());
    let mut sq = Vec::with_capacity(t.num_triangles());
    for i in 0..t.num_triangles() {
        let f = t.interpolant(i)?;
        let tri = t.tri_points(i);
        lin.push(integrate_product_over_triangle(&f, &one, tri));
        sq.push(integrate_product_over_triangle(&f, &f, tri));
    }
    Ok(Moments { integral: sum_balanced(lin), square: sum_balanced(sq), area: t.total_area() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distance {
    /// `‖f − g‖₂²`, exact.
    pub squared: Scalar,
    /// `‖f − g‖₂` to 17 significant digits.
    pub decimal: String,
}

pub fn l2_distance(f: &Tin, g: &Tin, method: Method, opt: &FastOptions) -> Result<Distance> {
    let fg = inner_product(f, g, method, opt)?;
    let (mf, mg) = (moments(f)?, moments(g)?);
    let squared = &mf.square - &fg * Scalar::from_integer(2.into()) + &mg.square;
    debug_assert!(!squared.is_negative());
    let decimal = sqrt_to_decimal(&squared, 17);
    Ok(Distance { squared, decimal })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fit {
    pub s: Scalar,
    pub t: Scalar,
    /// `‖f − (s·g + t)‖₂²`
    pub residual2: Scalar,
    /// `g` is constant, so only `t` is determined; `s` is reported as 0.
    pub degenerate: bool,
}

/// Residual of `f ≈ s·g + t` from the six moments.
pub fn fit_residual(mf: &Moments, mg: &Moments, fg: &Scalar, s: &Scalar, t: &Scalar) -> Scalar {
    let two = Scalar::from_integer(2.into());
    &mf.square - &two * s * fg - &two * t * &mf.integral + s * s * &mg.square + &two * s * t * &mg.integral + t * t * &mf.area
}

pub fn best_fit(f: &Tin, g: &Tin, method: Method, opt: &FastOptions) -> Result<Fit> {
    let fg = inner_product(f, g, method, opt)?;
    let (mf, mg) = (moments(f)?, moments(g)?);
    Ok(fit_from_moments(&mf, &mg, &fg))
}

/// Solves the 2×2 normal equations
/// `[∬g² ∬g; ∬g A] (s, t) = (∬fg, ∬f)`.
pub fn fit_from_moments(mf: &Moments, mg: &Moments, fg: &Scalar) -> Fit {
    let area = &mf.area;
    let det = area * &mg.square - &mg.integral * &mg.integral;
    let (s, t, degenerate) = if det.is_zero() {
        (Scalar::zero(), &mf.integral / area, true)
    } else {
        let s = (area * fg - &mg.integral * &mf.integral) / &det;
        let t = (&mg.square * &mf.integral - &mg.integral * fg) / &det;
        (s, t, false)
    };
    let residual2 = fit_residual(mf, mg, fg, &s, &t);
    Fit { s, t, residual2, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{generate_tin, normalize_pair_with, GenParams, Point, Rect, Surface};
    use crate::scalar::{int, rat};

    fn square(diag_up: bool, h: impl Fn(i64, i64) -> i64) -> Tin {
        let pts = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let tris = if diag_up { vec![[0, 1, 2], [0, 2, 3]] } else { vec![[0, 1, 3], [1, 2, 3]] };
        Tin::new(
            pts.iter().map(|&(x, y)| Point::new(int(x), int(y))).collect(),
            pts.iter().map(|&(x, y)| int(h(x, y))).collect(),
            tris,
            Rect::unit(),
        )
    }

    #[test]
    fn moments_by_hand() {
        let m = moments(&square(true, |x, _| x)).unwrap();
        assert_eq!((m.integral, m.square, m.area), (rat(1, 2), rat(1, 3), int(1)));
        let m = moments(&square(false, |_, _| 1)).unwrap();
        assert_eq!((m.integral, m.square, m.area), (int(1), int(1), int(1)));
    }

    #[test]
    fn cauchy_schwarz_on_random_tins() {
        for seed in 0..5 {
            let t = generate_tin(&GenParams::new(30, seed)).unwrap();
            let m = moments(&t).unwrap();
            assert!(&m.square * &m.area >= &m.integral * &m.integral);
        }
    }

    #[test]
    fn distance_between_x_and_y() {
        let f = square(true, |x, _| x);
        let g = square(false, |_, y| y);
        for method in [Method::Naive, Method::Fast] {
            let d = l2_distance(&f, &g, method, &FastOptions::default()).unwrap();
            assert_eq!(d.squared, rat(1, 6));
            assert_eq!(d.decimal, "0.40824829046386302");
        }
        let d = l2_distance(&f, &square(false, |x, _| x), Method::Fast, &FastOptions::default()).unwrap();
        assert!(d.squared.is_zero());
    }

    #[test]
    fn distance_is_symmetric_and_methods_agree() {
        let f = generate_tin(&GenParams::new(24, 4)).unwrap();
        let g = generate_tin(&GenParams::new(24, 5)).unwrap();
        let opt = FastOptions::default();
        let a = l2_distance(&f, &g, Method::Fast, &opt).unwrap();
        assert_eq!(a, l2_distance(&f, &g, Method::Naive, &opt).unwrap());
        assert_eq!(a, l2_distance(&g, &f, Method::Fast, &opt).unwrap());
    }

    #[test]
    fn triangle_inequality_spot_check() {
        let t = |seed| generate_tin(&GenParams::new(12, seed)).unwrap();
        let (a, b, c) = (t(1), t(2), t(3));
        let opt = FastOptions::default();
        let d = |x: &Tin, y: &Tin| l2_distance(x, y, Method::Naive, &opt).unwrap().squared;
        let (ab, bc, ac) = (d(&a, &b), d(&b, &c), d(&a, &c));
        // ac <= ab + bc + 2 sqrt(ab bc), checked without square roots
        let lhs = &ac - &ab - &bc;
        assert!(lhs.is_negative() || &lhs * &lhs <= int(4) * &ab * &bc);
    }

    #[test]
    fn exact_recovery() {
        let g = generate_tin(&GenParams::new(20, 8)).unwrap();
        let f = generate_tin(&GenParams::new(20, 9).surface(Surface::Plane(int(3), int(-2), int(5)))).unwrap();
        let g = g.map_heights(|p, _| int(3) - int(2) * &p.x + int(5) * &p.y);
        let f = f.map_heights(|_, h| int(2) * h + int(3));
        let fit = best_fit(&f, &g, Method::Fast, &FastOptions::default()).unwrap();
        assert_eq!((fit.s, fit.t, fit.residual2), (int(2), int(3), int(0)));
        assert!(!fit.degenerate);
    }

    #[test]
    fn constant_g_is_degenerate() {
        let f = square(true, |x, y| x + 2 * y);
        let g = square(false, |_, _| 4);
        let fit = best_fit(&f, &g, Method::Naive, &FastOptions::default()).unwrap();
        assert!(fit.degenerate);
        assert_eq!((fit.s, fit.t), (int(0), rat(3, 2)));
    }

    #[test]
    fn fit_is_a_local_minimum_and_shear_invariant() {
        let f = generate_tin(&GenParams::new(16, 21)).unwrap();
        let g = generate_tin(&GenParams::new(16, 22)).unwrap();
        let opt = FastOptions::default();
        let fg = inner_product(&f, &g, Method::Naive, &opt).unwrap();
        let (mf, mg) = (moments(&f).unwrap(), moments(&g).unwrap());
        let fit = fit_from_moments(&mf, &mg, &fg);
        let eps = rat(1, 1000);
        for (ds, dt) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let r = fit_residual(&mf, &mg, &fg, &(&fit.s + &eps * int(ds)), &(&fit.t + &eps * int(dt)));
            assert!(r >= fit.residual2);
        }
        let (fs, gs, _) = normalize_pair_with(&f, &g, &rat(2, 5)).unwrap();
        assert_eq!(best_fit(&fs, &gs, Method::Naive, &opt).unwrap(), fit);
    }
}
