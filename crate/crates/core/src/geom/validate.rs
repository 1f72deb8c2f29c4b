use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};

use super::{cross3, edge_list, orient, strictly_on_segment, Point, Tin};
use crate::error::{Error, Result};

/// Checks the single-TIN invariants: index ranges, distinct vertices,
/// positive CCW triangles, manifold edge sharing, boundary edges on the
/// domain boundary, and exact area coverage.
pub fn validate_tin(t: &Tin) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidTin(m));
    if !t.domain.is_proper() {
        return bad("domain rectangle is empty".into());
    }
    if t.points.len() != t.heights.len() {
        return bad("height count differs from vertex count".into());
    }
    if t.triangles.is_empty() {
        return bad("no triangles".into());
    }
    let n = t.points.len();
    let mut seen = HashSet::with_capacity(n);
    for (i, p) in t.points.iter().enumerate() {
        if !seen.insert(p) {
            return bad(format!("vertex {i} duplicates an earlier vertex"));
        }
    }
    for (ti, tri) in t.triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= n) {
            return bad(format!("triangle {ti} references a missing vertex"));
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return bad(format!("triangle {ti} repeats a vertex"));
        }
        let [a, b, c] = t.tri_points(ti);
        if orient(a, b, c) != Ordering::Greater {
            return bad(format!("triangle {ti} is not counterclockwise with positive area"));
        }
    }
    // directed half-edges must be unique; an undirected edge is used once or twice
    let mut half = HashSet::new();
    for tri in &t.triangles {
        for k in 0..3 {
            if !half.insert((tri[k], tri[(k + 1) % 3])) {
                return bad(format!("edge {}-{} used twice in the same direction", tri[k], tri[(k + 1) % 3]));
            }
        }
    }
    let corners = t.domain_corners();
    for (a, b, boundary) in edge_list(t) {
        if boundary && !on_polygon_side(&t.points[a], &t.points[b], &corners) {
            return bad(format!("boundary edge {a}-{b} is not on the domain boundary"));
        }
    }
    for (i, p) in t.points.iter().enumerate() {
        if !t.domain.contains_closed(&t.frame.invert(p)) {
            return bad(format!("vertex {i} lies outside the domain"));
        }
    }
    if t.total_area() != t.domain.area() {
        return bad("triangle areas do not sum to the domain area".into());
    }
    Ok(())
}

fn on_polygon_side(a: &Point, b: &Point, poly: &[Point; 4]) -> bool {
    (0..4).any(|k| {
        let (p, q) = (&poly[k], &poly[(k + 1) % 4]);
        let inside = |x: &Point| x == p || x == q || strictly_on_segment(x, p, q);
        inside(a) && inside(b)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    InvalidTin,
    DomainMismatch,
    VertexOnEdge,
    SharedInteriorVertex,
    CollinearOverlap,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::InvalidTin => "invalid-tin",
            ViolationKind::DomainMismatch => "domain-mismatch",
            ViolationKind::VertexOnEdge => "vertex-on-edge",
            ViolationKind::SharedInteriorVertex => "shared-interior-vertex",
            ViolationKind::CollinearOverlap => "collinear-overlap",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct PairReport {
    pub violations: Vec<Violation>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

struct Bbox<'a> {
    lo_x: &'a crate::scalar::Scalar,
    hi_x: &'a crate::scalar::Scalar,
    lo_y: &'a crate::scalar::Scalar,
    hi_y: &'a crate::scalar::Scalar,
}

impl<'a> Bbox<'a> {
    fn of(a: &'a Point, b: &'a Point) -> Self {
        let (lo_x, hi_x) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
        let (lo_y, hi_y) = if a.y <= b.y { (&a.y, &b.y) } else { (&b.y, &a.y) };
        Bbox { lo_x, hi_x, lo_y, hi_y }
    }

    fn contains(&self, p: &Point) -> bool {
        self.lo_x <= &p.x && &p.x <= self.hi_x && self.lo_y <= &p.y && &p.y <= self.hi_y
    }

    fn overlaps(&self, o: &Bbox) -> bool {
        self.lo_x <= o.hi_x && o.lo_x <= self.hi_x && self.lo_y <= o.hi_y && o.lo_y <= self.hi_y
    }
}

/// Quadratic cross-TIN general-position check. Violations are data.
pub fn validate_pair(f: &Tin, g: &Tin) -> PairReport {
    let mut rep = PairReport::default();
    for (name, t) in [("f", f), ("g", g)] {
        if let Err(e) = validate_tin(t) {
            rep.push(ViolationKind::InvalidTin, format!("{name}: {e}"));
        }
    }
    if !rep.passed() {
        return rep;
    }
    if f.domain != g.domain || f.frame != g.frame {
        rep.push(ViolationKind::DomainMismatch, "the two TINs cover different rectangles".into());
        return rep;
    }

    let g_index: HashMap<&Point, usize> = g.points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    for (i, p) in f.points.iter().enumerate() {
        if let Some(&j) = g_index.get(p) {
            if !f.on_domain_boundary(p) {
                rep.push(ViolationKind::SharedInteriorVertex, format!("f vertex {i} coincides with g vertex {j}"));
            }
        }
    }

    let ef = edge_list(f);
    let eg = edge_list(g);
    vertex_on_edge(&mut rep, ("f", f), ("g", g, &eg));
    vertex_on_edge(&mut rep, ("g", g), ("f", f, &ef));

    for &(a, b, fb) in &ef {
        if fb {
            continue;
        }
        let (pa, pb) = (&f.points[a], &f.points[b]);
        let bf = Bbox::of(pa, pb);
        for &(c, d, gb) in &eg {
            if gb {
                continue;
            }
            let (pc, pd) = (&g.points[c], &g.points[d]);
            if !bf.overlaps(&Bbox::of(pc, pd)) {
                continue;
            }
            if collinear_overlap(pa, pb, pc, pd) {
                rep.push(
                    ViolationKind::CollinearOverlap,
                    format!("interior edges f:{a}-{b} and g:{c}-{d} overlap"),
                );
            }
        }
    }
    rep
}

fn vertex_on_edge(rep: &mut PairReport, (vn, vt): (&str, &Tin), (en, et, edges): (&str, &Tin, &[(usize, usize, bool)])) {
    for &(a, b, boundary) in edges {
        if boundary {
            continue;
        }
        let (pa, pb) = (&et.points[a], &et.points[b]);
        let bb = Bbox::of(pa, pb);
        for (i, p) in vt.points.iter().enumerate() {
            if bb.contains(p) && strictly_on_segment(p, pa, pb) {
                rep.push(
                    ViolationKind::VertexOnEdge,
                    format!("{vn} vertex {i} lies inside interior edge {en}:{a}-{b}"),
                );
            }
        }
    }
}

/// Collinear segments sharing more than a single point.
fn collinear_overlap(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    if !cross3(a, b, c).is_zero() || !cross3(a, b, d).is_zero() {
        return false;
    }
    // project on the dominant axis
    let use_x = (&b.x - &a.x).abs() >= (&b.y - &a.y).abs();
    let key = |p: &Point| if use_x { p.x.clone() } else { p.y.clone() };
    let (mut s0, mut s1) = (key(a), key(b));
    if s0 > s1 {
        std::mem::swap(&mut s0, &mut s1);
    }
    let (mut t0, mut t1) = (key(c), key(d));
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let lo = if s0 > t0 { s0 } else { t0 };
    let hi = if s1 < t1 { s1 } else { t1 };
    lo < hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::scalar::{int, rat, Scalar};

    fn tin(pts: &[(Scalar, Scalar)], tris: Vec<[usize; 3]>, domain: Rect) -> Tin {
        let points = pts.iter().map(|(x, y)| Point::new(x.clone(), y.clone())).collect::<Vec<_>>();
        let heights = vec![int(0); points.len()];
        Tin::new(points, heights, tris, domain)
    }

    fn corners() -> Vec<(Scalar, Scalar)> {
        vec![(int(0), int(0)), (int(1), int(0)), (int(1), int(1)), (int(0), int(1))]
    }

    fn diag_up() -> Tin {
        tin(&corners(), vec![[0, 1, 2], [0, 2, 3]], Rect::unit())
    }

    fn diag_down() -> Tin {
        tin(&corners(), vec![[0, 1, 3], [1, 2, 3]], Rect::unit())
    }

    /// Unit square fanned around an interior vertex `c`.
    fn fan(c: (Scalar, Scalar)) -> Tin {
        let mut p = corners();
        p.push(c);
        tin(&p, vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]], Rect::unit())
    }

    #[test]
    fn valid_single_tins() {
        validate_tin(&diag_up()).unwrap();
        validate_tin(&fan((rat(1, 3), rat(1, 4)))).unwrap();
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let t = tin(&corners(), vec![[0, 2, 1], [0, 2, 3]], Rect::unit());
        assert!(validate_tin(&t).is_err());
    }

    #[test]
    fn missing_coverage_rejected() {
        let t = tin(&corners(), vec![[0, 1, 2]], Rect::unit());
        assert!(validate_tin(&t).is_err());
    }

    #[test]
    fn corners_only_pair_passes() {
        assert!(validate_pair(&diag_up(), &diag_down()).passed());
    }

    #[test]
    fn vertex_on_interior_edge_fails() {
        let g = fan((rat(1, 2), rat(1, 2)));
        let rep = validate_pair(&diag_up(), &g);
        assert!(rep.has(ViolationKind::VertexOnEdge), "{rep:?}");
    }

    #[test]
    fn different_rectangle_fails() {
        let pts = vec![(int(0), int(0)), (int(2), int(0)), (int(2), int(1)), (int(0), int(1))];
        let g = tin(&pts, vec![[0, 1, 2], [0, 2, 3]], Rect::new(int(0), int(0), int(2), int(1)));
        let rep = validate_pair(&diag_up(), &g);
        assert!(rep.has(ViolationKind::DomainMismatch));
    }

    #[test]
    fn shared_interior_vertex_fails() {
        let c = (rat(1, 3), rat(1, 5));
        let rep = validate_pair(&fan(c.clone()), &fan(c));
        assert!(rep.has(ViolationKind::SharedInteriorVertex));
    }

    #[test]
    fn identical_diagonals_overlap() {
        let rep = validate_pair(&diag_up(), &diag_up());
        assert!(rep.has(ViolationKind::CollinearOverlap));
        assert!(!rep.has(ViolationKind::VertexOnEdge));
    }
}
