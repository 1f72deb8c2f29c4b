use std::collections::HashMap;

use num_traits::Zero;

use super::{LinearFunc, Point, Tin};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected edges `(min, max, is_boundary)` in order of first appearance.
pub fn edge_list(t: &Tin) -> Vec<(usize, usize, bool)> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    for tri in &t.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                Some(&i) => out[i].2 += 1,
                None => {
                    index.insert(key, out.len());
                    out.push((key.0, key.1, 1));
                }
            }
        }
    }
    out.into_iter().map(|(a, b, n)| (a, b, n == 1)).collect()
}

/// Supporting line `y = intercept + slope*x` of a non-vertical edge together
/// with the interpolants of the triangles above and below it.
#[derive(Clone, Debug)]
pub struct EdgeData {
    /// Endpoints ordered by x (then y).
    pub v: [usize; 2],
    pub intercept: Scalar,
    pub slope: Scalar,
    pub upper_tri: Option<usize>,
    pub lower_tri: Option<usize>,
    /// Zero when `upper_tri` is absent.
    pub upper: LinearFunc,
    /// Zero when `lower_tri` is absent.
    pub lower: LinearFunc,
    pub is_boundary: bool,
}

impl EdgeData {
    pub fn y_at(&self, x: &Scalar) -> Scalar {
        &self.intercept + &self.slope * x
    }

    /// Jump `f_u - f_l` across the edge.
    pub fn jump(&self) -> LinearFunc {
        self.upper.sub(&self.lower)
    }
}

/// Edge records plus the adjacency needed by the sweep and vertex sums.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub edges: Vec<EdgeData>,
    pub tri_funcs: Vec<LinearFunc>,
    pub tri_edges: Vec<[usize; 3]>,
    pub vertex_edges: Vec<Vec<usize>>,
    pub vertex_tris: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

impl EdgeTable {
    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn endpoints<'a>(&self, t: &'a Tin, e: usize) -> (&'a Point, &'a Point) {
        let [a, b] = self.edges[e].v;
        (&t.points[a], &t.points[b])
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| !e.is_boundary).map(|(i, _)| i)
    }
}

/// Builds one [`EdgeData`] per distinct edge. Fails on vertical edges.
pub fn build_edge_data(t: &Tin) -> Result<EdgeTable> {
    let tri_funcs = (0..t.num_triangles()).map(|i| t.interpolant(i)).collect::<Result<Vec<_>>>()?;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<EdgeData> = Vec::new();
    let mut tri_edges = vec![[0usize; 3]; t.num_triangles()];
    let mut vertex_edges = vec![Vec::new(); t.num_vertices()];
    let mut vertex_tris = vec![Vec::new(); t.num_vertices()];

    for (ti, tri) in t.triangles.iter().enumerate() {
        for k in 0..3 {
            vertex_tris[tri[k]].push(ti);
            let (a, b, w) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let key = (a.min(b), a.max(b));
            let ei = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let (pa, pb) = (&t.points[a], &t.points[b]);
                    if pa.x == pb.x {
                        return Err(Error::VerticalEdge(key.0, key.1));
                    }
                    let v = if (&pa.x, &pa.y) < (&pb.x, &pb.y) { [a, b] } else { [b, a] };
                    let (p0, p1) = (&t.points[v[0]], &t.points[v[1]]);
                    let slope = (&p1.y - &p0.y) / (&p1.x - &p0.x);
                    let intercept = &p0.y - &slope * &p0.x;
                    let i = edges.len();
                    index.insert(key, i);
                    vertex_edges[a].push(i);
                    vertex_edges[b].push(i);
                    edges.push(EdgeData {
                        v,
                        intercept,
                        slope,
                        upper_tri: None,
                        lower_tri: None,
                        upper: LinearFunc::zero(),
                        lower: LinearFunc::zero(),
                        is_boundary: true,
                    });
                    i
                }
            };
            tri_edges[ti][k] = ei;
            let e = &mut edges[ei];
            let pw = &t.points[w];
            let line_y = &e.intercept + &e.slope * &pw.x;
            let slot = if pw.y > line_y { &mut e.upper_tri } else { &mut e.lower_tri };
            if slot.is_some() {
                return Err(Error::InvalidTin(format!("two triangles on the same side of edge {}-{}", key.0, key.1)));
            }
            *slot = Some(ti);
        }
    }
    for e in &mut edges {
        if let Some(u) = e.upper_tri {
            e.upper = tri_funcs[u].clone();
        }
        if let Some(l) = e.lower_tri {
            e.lower = tri_funcs[l].clone();
        }
        e.is_boundary = e.upper_tri.is_none() || e.lower_tri.is_none();
    }
    Ok(EdgeTable { edges, tri_funcs, tri_edges, vertex_edges, vertex_tris, index })
}

impl EdgeData {
    /// y-coefficient of the jump; the jump equals `kappa * (y - intercept - slope*x)`.
    pub fn kappa(&self) -> Scalar {
        let j = self.jump();
        debug_assert!(self.is_boundary || {
            let expect_a = -(&j.c * &self.intercept);
            let expect_b = -(&j.c * &self.slope);
            j.a == expect_a && j.b == expect_b
        });
        if self.is_boundary {
            Scalar::zero()
        } else {
            j.c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rect, Tin};
    use crate::scalar::int;

    fn square(diag_up: bool, h: impl Fn(i64, i64) -> i64) -> Tin {
        let pts = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let points = pts.iter().map(|&(x, y)| Point::new(int(x), int(y))).collect();
        let heights = pts.iter().map(|&(x, y)| int(h(x, y))).collect();
        let tris = if diag_up { vec![[0, 1, 2], [0, 2, 3]] } else { vec![[0, 1, 3], [1, 2, 3]] };
        Tin::new(points, heights, tris, Rect::unit())
    }

    fn sheared(t: &Tin) -> Tin {
        let tr = crate::geom::TransformRecord { shear: crate::scalar::rat(1, 2), shift: int(0) };
        Tin { points: t.points.iter().map(|p| tr.apply(p)).collect(), frame: tr, ..t.clone() }
    }

    #[test]
    fn vertical_edges_rejected() {
        let t = square(true, |x, _| x);
        assert!(matches!(build_edge_data(&t), Err(Error::VerticalEdge(..))));
    }

    #[test]
    fn diagonal_has_both_sides() {
        let t = sheared(&square(true, |x, _| x));
        let et = build_edge_data(&t).unwrap();
        assert_eq!(et.edges.len(), 5);
        let d = et.find(0, 2).unwrap();
        let e = &et.edges[d];
        assert!(!e.is_boundary);
        assert!(e.upper_tri.is_some() && e.lower_tri.is_some());
        // diagonal (0,0)-(3/2,1): slope 2/3 through the origin
        assert_eq!(e.intercept, int(0));
        assert_eq!(e.slope, crate::scalar::rat(2, 3));
    }

    #[test]
    fn bottom_edge_is_boundary_with_absent_lower() {
        let t = sheared(&square(true, |x, y| x + 2 * y));
        let et = build_edge_data(&t).unwrap();
        let e = &et.edges[et.find(0, 1).unwrap()];
        assert!(e.is_boundary);
        assert!(e.lower_tri.is_none());
        assert!(e.lower.is_zero());
        assert!(e.upper_tri.is_some());
    }

    #[test]
    fn interpolants_agree_on_interior_edge_endpoints() {
        let t = sheared(&square(false, |x, y| 3 * x * y + x - y));
        let et = build_edge_data(&t).unwrap();
        for e in et.edges.iter().filter(|e| !e.is_boundary) {
            for &v in &e.v {
                let p = &t.points[v];
                assert_eq!(e.upper.eval_at(p), e.lower.eval_at(p));
            }
        }
    }

    #[test]
    fn edge_list_marks_boundary() {
        let t = square(true, |_, _| 0);
        let edges = edge_list(&t);
        assert_eq!(edges.len(), 5);
        assert_eq!(edges.iter().filter(|e| !e.2).count(), 1);
    }
}
