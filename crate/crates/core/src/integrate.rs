//! The quadratic overlay oracle for `∬fg`, the vertex part of the wedge
//! decomposition, and a brute-force edge-crossing part used for testing.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::{build_edge_data, cross3, orient, EdgeTable, LinearFunc, Point, Tin};
use crate::locate::{batch_locate_with, Location};
use crate::ops;
use crate::scalar::{int, sum_balanced, Scalar};
use crate::sympoly::{corner_sign, wedge_integral_quadratic, WedgeLines};

fn lerp(a: &Point, b: &Point, t: &Scalar) -> Point {
    Point::new(&a.x + t * (&b.x - &a.x), &a.y + t * (&b.y - &a.y))
}

/// `t1 ∩ t2` for counterclockwise triangles, as a counterclockwise polygon
/// without repeated or collinear vertices; empty if the overlap has no area.
pub fn clip_triangles(t1: [&Point; 3], t2: [&Point; 3]) -> Vec<Point> {
    let mut poly: Vec<Point> = t1.iter().map(|p| (*p).clone()).collect();
    for k in 0..3 {
        if poly.is_empty() {
            break;
        }
        let (a, b) = (t2[k], t2[(k + 1) % 3]);
        let side: Vec<Scalar> = poly.iter().map(|p| cross3(a, b, p)).collect();
        ops::tick(5 * poly.len() as u64);
        let mut next = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let j = (i + 1) % poly.len();
            let (si, sj) = (&side[i], &side[j]);
            if !si.is_negative() {
                next.push(poly[i].clone());
            }
            if (si.is_positive() && sj.is_negative()) || (si.is_negative() && sj.is_positive()) {
                let t = si / (si - sj);
                next.push(lerp(&poly[i], &poly[j], &t));
                ops::tick(6);
            }
        }
        poly = next;
    }
    simplify(poly)
}

fn simplify(mut poly: Vec<Point>) -> Vec<Point> {
    poly.dedup();
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    loop {
        let n = poly.len();
        if n < 3 {
            return Vec::new();
        }
        let drop = (0..n).find(|&i| orient(&poly[(i + n - 1) % n], &poly[i], &poly[(i + 1) % n]) != Ordering::Greater);
        match drop {
            Some(i) => {
                poly.remove(i);
            }
            None => return poly,
        }
    }
}

/// `∬_tri f g` by the three-edge-midpoint rule (exact for degree two).
pub fn integrate_product_over_triangle(f: &LinearFunc, g: &LinearFunc, tri: [&Point; 3]) -> Scalar {
    let area = cross3(tri[0], tri[1], tri[2]).abs() / int(2);
    let mut acc = Scalar::zero();
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let m = Point::new((&a.x + &b.x) / int(2), (&a.y + &b.y) / int(2));
        acc += f.eval_at(&m) * g.eval_at(&m);
    }
    ops::tick(30);
    area * acc / int(3)
}

/// Overlay oracle: clips every triangle pair and integrates each cell with
/// the midpoint rule.
pub fn naive_inner_product(f: &Tin, g: &Tin) -> Result<Scalar> {
    let ff = (0..f.num_triangles()).map(|i| f.interpolant(i)).collect::<Result<Vec<_>>>()?;
    let gf = (0..g.num_triangles()).map(|i| g.interpolant(i)).collect::<Result<Vec<_>>>()?;
    let mut parts = Vec::new();
    for i in 0..f.num_triangles() {
        for j in 0..g.num_triangles() {
            let cell = clip_triangles(f.tri_points(i), g.tri_points(j));
            for k in 1..cell.len().saturating_sub(1) {
                parts.push(integrate_product_over_triangle(&ff[i], &gf[j], [&cell[0], &cell[k], &cell[k + 1]]));
            }
        }
    }
    Ok(sum_balanced(parts))
}

/// Angular order of direction vectors, starting at the positive x-axis.
fn angle_cmp(a: &(Scalar, Scalar), b: &(Scalar, Scalar)) -> Ordering {
    let half = |d: &(Scalar, Scalar)| !(d.1.is_positive() || (d.1.is_zero() && d.0.is_positive()));
    half(a).cmp(&half(b)).then_with(|| {
        let c = &a.0 * &b.1 - &a.1 * &b.0;
        Scalar::zero().cmp(&c)
    })
}

fn dir(p: &Point, q: &Point) -> (Scalar, Scalar) {
    (&q.x - &p.x, &q.y - &p.y)
}

fn cross(a: &(Scalar, Scalar), b: &(Scalar, Scalar)) -> Scalar {
    &a.0 * &b.1 - &a.1 * &b.0
}

/// Where a point sits in one TIN, for the angular merge.
#[derive(Clone, Copy)]
enum Site {
    Vertex(usize),
    Triangle(usize),
    BoundaryEdge(usize),
}

fn site(et: &EdgeTable, p: &Point, loc: Location) -> Result<Site> {
    match loc {
        Location::Vertex(v) => Ok(Site::Vertex(v)),
        Location::Triangle(tr) => Ok(Site::Triangle(tr)),
        Location::Edge(e) if et.edges[e].is_boundary => Ok(Site::BoundaryEdge(e)),
        Location::Edge(e) => {
            let [a, b] = et.edges[e].v;
            Err(Error::DegenerateInput(format!("vertex {p:?} lies inside interior edge {a}-{b}")))
        }
        Location::Outside => Err(Error::DegenerateInput(format!("vertex {p:?} lies outside the other domain"))),
    }
}

fn rays(t: &Tin, et: &EdgeTable, p: &Point, s: Site, out: &mut Vec<(Scalar, Scalar)>) {
    match s {
        Site::Vertex(v) => {
            for &e in &et.vertex_edges[v] {
                let [a, b] = et.edges[e].v;
                let q = if a == v { b } else { a };
                out.push(dir(p, &t.points[q]));
            }
        }
        Site::Triangle(_) => {}
        Site::BoundaryEdge(e) => {
            let [a, b] = et.edges[e].v;
            out.push(dir(p, &t.points[a]));
            out.push(dir(p, &t.points[b]));
        }
    }
}

/// The triangle of `t` containing the open sector around direction `m` at `p`.
fn corner(t: &Tin, et: &EdgeTable, p: &Point, s: Site, m: &(Scalar, Scalar)) -> Option<usize> {
    match s {
        Site::Triangle(tr) => Some(tr),
        Site::Vertex(v) => et.vertex_tris[v].iter().copied().find(|&tr| {
            let tri = t.triangles[tr];
            let k = tri.iter().position(|&w| w == v).unwrap();
            let a = &t.points[tri[(k + 1) % 3]];
            let b = &t.points[tri[(k + 2) % 3]];
            cross(&dir(p, a), m).is_positive() && cross(m, &dir(p, b)).is_positive()
        }),
        Site::BoundaryEdge(e) => {
            let ed = &et.edges[e];
            let tr = ed.upper_tri.or(ed.lower_tri)?;
            let d = dir(&t.points[ed.v[0]], &t.points[ed.v[1]]);
            let w = t.triangles[tr].iter().copied().find(|w| !ed.v.contains(w)).unwrap();
            let tw = cross(&d, &dir(p, &t.points[w]));
            let tm = cross(&d, m);
            (tw.is_positive() == tm.is_positive() && !tm.is_zero()).then_some(tr)
        }
    }
}

/// Σ_v with locations precomputed: `f_in_g[i]` locates f-vertex `i` in g and
/// `g_in_f[j]` locates g-vertex `j` in f.
pub fn vertex_term_sum_with(
    f: &Tin,
    ef: &EdgeTable,
    g: &Tin,
    eg: &EdgeTable,
    f_in_g: &[Location],
    g_in_f: &[Location],
) -> Result<Scalar> {
    let mut parts = Vec::new();
    let mut sites: Vec<(&Point, Site, Site)> = Vec::with_capacity(f.num_vertices() + g.num_vertices());
    for (i, p) in f.points.iter().enumerate() {
        sites.push((p, Site::Vertex(i), site(eg, p, f_in_g[i])?));
    }
    for (j, p) in g.points.iter().enumerate() {
        if matches!(g_in_f[j], Location::Vertex(_)) {
            continue;
        }
        sites.push((p, site(ef, p, g_in_f[j])?, Site::Vertex(j)));
    }
    let mut dirs = Vec::new();
    for (p, sf, sg) in sites {
        dirs.clear();
        rays(f, ef, p, sf, &mut dirs);
        rays(g, eg, p, sg, &mut dirs);
        dirs.sort_by(angle_cmp);
        dirs.dedup_by(|a, b| angle_cmp(a, b) == Ordering::Equal);
        let k = dirs.len();
        ops::tick(4 * k as u64 * (usize::BITS - k.leading_zeros()) as u64);
        for i in 0..k {
            let (d1, d2) = (&dirs[i], &dirs[(i + 1) % k]);
            if !cross(d1, d2).is_positive() {
                continue;
            }
            let m = (&d1.0 + &d2.0, &d1.1 + &d2.1);
            let (Some(tf), Some(tg)) = (corner(f, ef, p, sf, &m), corner(g, eg, p, sg, &m)) else {
                continue;
            };
            ops::tick(12);
            let h = ef.tri_funcs[tf].product(&eg.tri_funcs[tg]);
            let w = WedgeLines::through(p, &(&d1.1 / &d1.0), &(&d2.1 / &d2.0));
            let sample = Point::new(&p.x + &m.0, &p.y + &m.1);
            let part = wedge_integral_quadratic(&w, &h)?;
            match corner_sign(&w, &sample) {
                1 => parts.push(part),
                -1 => parts.push(-part),
                _ => return Err(Error::DegenerateInput(format!("sector at {p:?} has no interior"))),
            }
        }
    }
    Ok(sum_balanced(parts))
}

/// Σ_v for a normalized pair (no vertical edges, all x > 0).
pub fn vertex_term_sum(f: &Tin, g: &Tin) -> Result<Scalar> {
    let ef = build_edge_data(f)?;
    let eg = build_edge_data(g)?;
    let f_in_g = batch_locate_with(g, &eg, &f.points);
    let g_in_f = batch_locate_with(f, &ef, &g.points);
    vertex_term_sum_with(f, &ef, g, &eg, &f_in_g, &g_in_f)
}

/// How two closed segments meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contact {
    None,
    /// Transversal crossing interior to both.
    Cross,
    /// A shared endpoint and nothing else.
    SharedEndpoint,
    /// Any other contact (endpoint on interior, collinear overlap).
    Degenerate,
}

pub fn segment_contact(a: &Point, b: &Point, c: &Point, d: &Point) -> Contact {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    use Ordering::*;
    if o1 == Equal && o2 == Equal {
        // collinear: overlap beyond a single shared endpoint is degenerate
        let key = |p: &Point| (p.x.clone(), p.y.clone());
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
        return match lo.cmp(&hi) {
            Less => Contact::Degenerate,
            Equal => Contact::SharedEndpoint,
            Greater => Contact::None,
        };
    }
    if o1 != Equal && o2 != Equal && o3 != Equal && o4 != Equal {
        return if o1 != o2 && o3 != o4 { Contact::Cross } else { Contact::None };
    }
    if a == c || a == d || b == c || b == d {
        // not collinear, so the shared endpoint is the only contact
        return Contact::SharedEndpoint;
    }
    // an endpoint lies on the other segment's line: contact iff it is on the segment
    let on = |p: &Point, s: &Point, e: &Point| crate::geom::strictly_on_segment(p, s, e);
    if on(c, a, b) || on(d, a, b) || on(a, c, d) || on(b, c, d) {
        Contact::Degenerate
    } else {
        Contact::None
    }
}

/// Crossing point of the supporting lines `y = c1 + s1 x` and `y = c2 + s2 x`.
pub fn line_crossing(c1: &Scalar, s1: &Scalar, c2: &Scalar, s2: &Scalar) -> Point {
    let x = (c2 - c1) / (s1 - s2);
    let y = c1 + s1 * &x;
    Point::new(x, y)
}

/// The four cell terms at one crossing of interior edges `e1` (of f) and `e2` (of g).
pub fn crossing_term(ef: &EdgeTable, e1: usize, eg: &EdgeTable, e2: usize) -> Result<Scalar> {
    let (a, b) = (&ef.edges[e1], &eg.edges[e2]);
    let w = if a.slope > b.slope {
        WedgeLines::new(a.intercept.clone(), a.slope.clone(), b.intercept.clone(), b.slope.clone())
    } else {
        WedgeLines::new(b.intercept.clone(), b.slope.clone(), a.intercept.clone(), a.slope.clone())
    };
    let mut total = Scalar::zero();
    let cells = [
        (&a.upper, &b.lower, 1),
        (&a.lower, &b.upper, 1),
        (&a.upper, &b.upper, -1),
        (&a.lower, &b.lower, -1),
    ];
    for (fu, gv, sign) in cells {
        let v = wedge_integral_quadratic(&w, &fu.product(gv))?;
        if sign > 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    Ok(total)
}

/// All transversal crossings between interior edges, found by brute force.
pub fn crossing_pairs(f: &Tin, ef: &EdgeTable, g: &Tin, eg: &EdgeTable) -> Result<Vec<(usize, usize)>> {
    let fi: Vec<usize> = ef.interior_edges().collect();
    let gi: Vec<usize> = eg.interior_edges().collect();
    let mut out = Vec::new();
    for &i in &fi {
        let (a, b) = ef.endpoints(f, i);
        for &j in &gi {
            let (c, d) = eg.endpoints(g, j);
            if b.x <= c.x || d.x <= a.x {
                continue;
            }
            match segment_contact(a, b, c, d) {
                Contact::Cross => out.push((i, j)),
                Contact::None | Contact::SharedEndpoint => {}
                Contact::Degenerate => {
                    return Err(Error::DegenerateInput(format!("interior edges f:{i} and g:{j} touch non-transversally")))
                }
            }
        }
    }
    Ok(out)
}

/// Σ_e by enumerating every crossing pair of interior edges.
pub fn naive_edge_term_sum(f: &Tin, g: &Tin) -> Result<Scalar> {
    let ef = build_edge_data(f)?;
    let eg = build_edge_data(g)?;
    let mut parts = Vec::new();
    let mut seen = HashSet::new();
    for (i, j) in crossing_pairs(f, &ef, g, &eg)? {
        debug_assert!(seen.insert((i, j)));
        parts.push(crossing_term(&ef, i, &eg, j)?);
    }
    Ok(sum_balanced(parts))
}
