//! TIN data model: exact points, per-triangle linear interpolants, the
//! rectangular domain and the shared shear frame used after normalization.

mod edges;
mod generate;
mod io;
mod normalize;
mod validate;

pub use edges::{build_edge_data, edge_list, EdgeData, EdgeTable};
pub use generate::{generate_tin, FlipMode, GenParams, Surface};
pub use io::{parse_tin, write_tin};
pub use normalize::{normalize_pair, normalize_pair_with};
pub use validate::{validate_pair, validate_tin, PairReport, Violation, ViolationKind};

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }
}

/// Sign of the cross product (b - a) x (c - a).
pub fn orient(a: &Point, b: &Point, c: &Point) -> Ordering {
    let l = (&b.x - &a.x) * (&c.y - &a.y);
    let r = (&b.y - &a.y) * (&c.x - &a.x);
    l.cmp(&r)
}

/// Twice the signed area of triangle abc.
pub fn cross3(a: &Point, b: &Point, c: &Point) -> Scalar {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

/// True when `p` lies strictly between `a` and `b` on segment ab.
pub fn strictly_on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    if orient(a, b, p) != Ordering::Equal {
        return false;
    }
    let within = |lo: &Scalar, hi: &Scalar, v: &Scalar| {
        if lo < hi {
            lo < v && v < hi
        } else if hi < lo {
            hi < v && v < lo
        } else {
            v == lo
        }
    };
    p != a && p != b && within(&a.x, &b.x, &p.x) && within(&a.y, &b.y, &p.y)
}

/// (x, y) -> a + b*x + c*y
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearFunc {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
}

impl LinearFunc {
    pub fn new(a: Scalar, b: Scalar, c: Scalar) -> Self {
        LinearFunc { a, b, c }
    }

    pub fn zero() -> Self {
        LinearFunc::default()
    }

    pub fn constant(a: Scalar) -> Self {
        LinearFunc { a, ..Default::default() }
    }

    pub fn eval(&self, x: &Scalar, y: &Scalar) -> Scalar {
        &self.a + &self.b * x + &self.c * y
    }

    pub fn eval_at(&self, p: &Point) -> Scalar {
        self.eval(&p.x, &p.y)
    }

    pub fn sub(&self, o: &LinearFunc) -> LinearFunc {
        LinearFunc::new(&self.a - &o.a, &self.b - &o.b, &self.c - &o.c)
    }

    pub fn scale(&self, k: &Scalar) -> LinearFunc {
        LinearFunc::new(&self.a * k, &self.b * k, &self.c * k)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    /// Coefficients of the product, ordered as monomials [1, x, y, x², xy, y²].
    pub fn product(&self, o: &LinearFunc) -> [Scalar; 6] {
        [
            &self.a * &o.a,
            &self.a * &o.b + &self.b * &o.a,
            &self.a * &o.c + &self.c * &o.a,
            &self.b * &o.b,
            &self.b * &o.c + &self.c * &o.b,
            &self.c * &o.c,
        ]
    }
}

/// Exponents (i, j) of x^i y^j matching [`LinearFunc::product`] ordering.
pub const QUADRATIC_MONOMIALS: [(u32, u32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// The interpolating plane through three points with heights.
pub fn plane_from_triangle(
    p1: (&Point, &Scalar),
    p2: (&Point, &Scalar),
    p3: (&Point, &Scalar),
) -> Result<LinearFunc> {
    let (a, za) = p1;
    let (b, zb) = p2;
    let (c, zc) = p3;
    let d = cross3(a, b, c);
    if d.is_zero() {
        return Err(Error::DegenerateTriangle);
    }
    let (bx, by, bz) = (&b.x - &a.x, &b.y - &a.y, zb - za);
    let (cx, cy, cz) = (&c.x - &a.x, &c.y - &a.y, zc - za);
    let slope_x = (&bz * &cy - &cz * &by) / &d;
    let slope_y = (&bx * &cz - &cx * &bz) / &d;
    let off = za - &slope_x * &a.x - &slope_y * &a.y;
    Ok(LinearFunc::new(off, slope_x, slope_y))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub xmin: Scalar,
    pub ymin: Scalar,
    pub xmax: Scalar,
    pub ymax: Scalar,
}

impl Rect {
    pub fn new(xmin: Scalar, ymin: Scalar, xmax: Scalar, ymax: Scalar) -> Self {
        Rect { xmin, ymin, xmax, ymax }
    }

    pub fn unit() -> Self {
        use crate::scalar::int;
        Rect::new(int(0), int(0), int(1), int(1))
    }

    pub fn area(&self) -> Scalar {
        (&self.xmax - &self.xmin) * (&self.ymax - &self.ymin)
    }

    pub fn is_proper(&self) -> bool {
        self.xmin < self.xmax && self.ymin < self.ymax
    }

    /// Corners in counterclockwise order starting at (xmin, ymin).
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin.clone(), self.ymin.clone()),
            Point::new(self.xmax.clone(), self.ymin.clone()),
            Point::new(self.xmax.clone(), self.ymax.clone()),
            Point::new(self.xmin.clone(), self.ymax.clone()),
        ]
    }

    pub fn contains_closed(&self, p: &Point) -> bool {
        self.xmin <= p.x && p.x <= self.xmax && self.ymin <= p.y && p.y <= self.ymax
    }

    pub fn on_boundary(&self, p: &Point) -> bool {
        self.contains_closed(p)
            && (p.x == self.xmin || p.x == self.xmax || p.y == self.ymin || p.y == self.ymax)
    }
}

/// The area-preserving map (x, y) -> (x + shear*y + shift, y).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TransformRecord {
    pub shear: Scalar,
    pub shift: Scalar,
}

impl TransformRecord {
    pub fn identity() -> Self {
        TransformRecord::default()
    }

    pub fn is_identity(&self) -> bool {
        self.shear.is_zero() && self.shift.is_zero()
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::new(&p.x + &self.shear * &p.y + &self.shift, p.y.clone())
    }

    pub fn invert(&self, p: &Point) -> Point {
        Point::new(&p.x - &self.shear * &p.y - &self.shift, p.y.clone())
    }

    /// Applies `self` after `inner`.
    pub fn compose(&self, inner: &TransformRecord) -> TransformRecord {
        // x' = (x + l1 y + t1) + l2 y + t2
        TransformRecord {
            shear: &self.shear + &inner.shear,
            shift: &self.shift + &inner.shift,
        }
    }
}

/// A triangulated irregular network.
///
/// Vertex coordinates live in `frame` coordinates: the domain occupied by the
/// triangles is `frame` applied to `domain`. Parsed and generated TINs use
/// the identity frame; [`normalize_pair`] produces sheared ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tin {
    pub points: Vec<Point>,
    pub heights: Vec<Scalar>,
    pub triangles: Vec<[usize; 3]>,
    pub domain: Rect,
    pub frame: TransformRecord,
}

impl Tin {
    pub fn new(points: Vec<Point>, heights: Vec<Scalar>, triangles: Vec<[usize; 3]>, domain: Rect) -> Self {
        Tin { points, heights, triangles, domain, frame: TransformRecord::identity() }
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn tri_points(&self, t: usize) -> [&Point; 3] {
        let [a, b, c] = self.triangles[t];
        [&self.points[a], &self.points[b], &self.points[c]]
    }

    pub fn interpolant(&self, t: usize) -> Result<LinearFunc> {
        let [a, b, c] = self.triangles[t];
        plane_from_triangle(
            (&self.points[a], &self.heights[a]),
            (&self.points[b], &self.heights[b]),
            (&self.points[c], &self.heights[c]),
        )
    }

    /// Corners of the occupied domain in the current frame (counterclockwise).
    pub fn domain_corners(&self) -> [Point; 4] {
        self.domain.corners().map(|p| self.frame.apply(&p))
    }

    /// Whether `p` (in frame coordinates) lies on the domain boundary.
    pub fn on_domain_boundary(&self, p: &Point) -> bool {
        self.domain.on_boundary(&self.frame.invert(p))
    }

    /// Same triangulation with every height replaced by `h(x, y, z)`.
    pub fn map_heights(&self, h: impl Fn(&Point, &Scalar) -> Scalar) -> Tin {
        let heights = self.points.iter().zip(&self.heights).map(|(p, z)| h(p, z)).collect();
        Tin { heights, ..self.clone() }
    }

    /// Sum of signed triangle areas.
    pub fn total_area(&self) -> Scalar {
        let two = crate::scalar::int(2);
        self.triangles
            .iter()
            .map(|&[a, b, c]| cross3(&self.points[a], &self.points[b], &self.points[c]))
            .fold(Scalar::zero(), |acc, v| acc + v)
            / two
    }

    pub fn max_abs_coordinate(&self) -> Scalar {
        self.points
            .iter()
            .flat_map(|p| [p.x.abs(), p.y.abs()])
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    /// Total bit size of all coordinates and heights (numerators + denominators).
    pub fn bit_size(&self) -> u64 {
        let bits = |s: &Scalar| s.numer().bits() + s.denom().bits();
        self.points.iter().map(|p| bits(&p.x) + bits(&p.y)).sum::<u64>()
            + self.heights.iter().map(bits).sum::<u64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn pt(x: i64, y: i64) -> Point {
        Point::new(int(x), int(y))
    }

    #[test]
    fn plane_through_x() {
        let f = plane_from_triangle((&pt(0, 0), &int(0)), (&pt(1, 0), &int(1)), (&pt(0, 1), &int(0))).unwrap();
        assert_eq!(f, LinearFunc::new(int(0), int(1), int(0)));
    }

    #[test]
    fn plane_constant() {
        let f = plane_from_triangle((&pt(0, 0), &int(5)), (&pt(1, 0), &int(5)), (&pt(0, 1), &int(5))).unwrap();
        assert_eq!(f, LinearFunc::constant(int(5)));
    }

    #[test]
    fn plane_collinear_is_degenerate() {
        let r = plane_from_triangle((&pt(0, 0), &int(0)), (&pt(1, 1), &int(1)), (&pt(2, 2), &int(2)));
        assert!(matches!(r, Err(Error::DegenerateTriangle)));
    }

    #[test]
    fn plane_matches_all_three_heights() {
        let (a, b, c) = (pt(3, -1), Point::new(rat(7, 2), int(4)), pt(-2, 5));
        let (za, zb, zc) = (rat(1, 3), int(-7), rat(22, 5));
        let f = plane_from_triangle((&a, &za), (&b, &zb), (&c, &zc)).unwrap();
        assert_eq!(f.eval_at(&a), za);
        assert_eq!(f.eval_at(&b), zb);
        assert_eq!(f.eval_at(&c), zc);
    }

    #[test]
    fn shear_is_invertible() {
        let t = TransformRecord { shear: rat(1, 2), shift: int(3) };
        let p = Point::new(rat(1, 3), rat(-5, 7));
        assert_eq!(t.invert(&t.apply(&p)), p);
    }

    #[test]
    fn segment_interior_test() {
        assert!(strictly_on_segment(&Point::new(rat(1, 2), rat(1, 2)), &pt(0, 0), &pt(1, 1)));
        assert!(!strictly_on_segment(&pt(1, 1), &pt(0, 0), &pt(1, 1)));
        assert!(!strictly_on_segment(&pt(2, 2), &pt(0, 0), &pt(1, 1)));
        assert!(strictly_on_segment(&Point::new(int(0), rat(1, 2)), &pt(0, 0), &pt(0, 1)));
    }
}
