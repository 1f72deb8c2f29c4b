//! Batch point location by a left-to-right sweep over the edges of a TIN.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::Result;
use crate::geom::{build_edge_data, EdgeTable, Point, Tin};
use crate::ops;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    /// Strictly inside a triangle.
    Triangle(usize),
    /// In the relative interior of an edge (index into the edge table).
    Edge(usize),
    Vertex(usize),
    Outside,
}

#[derive(Clone, Debug)]
enum Key {
    Seg { x0: Scalar, c: Scalar, s: Scalar, id: usize },
    Probe { x: Scalar, y: Scalar },
}

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        ops::tick(4);
        match (self, o) {
            (Key::Seg { x0: xa, c: ca, s: sa, id: ia }, Key::Seg { x0: xb, c: cb, s: sb, id: ib }) => {
                if ia == ib {
                    return Ordering::Equal;
                }
                // both segments are active just right of the later start
                let x = if xa > xb { xa } else { xb };
                let ya = ca + sa * x;
                let yb = cb + sb * x;
                ya.cmp(&yb).then_with(|| sa.cmp(sb)).then_with(|| ia.cmp(ib))
            }
            (Key::Seg { c, s, .. }, Key::Probe { x, y }) => {
                let ys = c + s * x;
                match ys.cmp(y).then_with(|| s.cmp(&Scalar::default())) {
                    Ordering::Greater => Ordering::Greater,
                    _ => Ordering::Less,
                }
            }
            (Key::Probe { .. }, Key::Seg { .. }) => o.cmp(self).reverse(),
            (Key::Probe { .. }, Key::Probe { .. }) => Ordering::Equal,
        }
    }
}

pub fn batch_locate(t: &Tin, pts: &[Point]) -> Result<Vec<Location>> {
    let et = build_edge_data(t)?;
    Ok(batch_locate_with(t, &et, pts))
}

/// Classifies every query point against `t`, whose edges must be non-vertical.
pub fn batch_locate_with(t: &Tin, et: &EdgeTable, pts: &[Point]) -> Vec<Location> {
    let vertex_of: HashMap<&Point, usize> = t.points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut out = vec![Location::Outside; pts.len()];

    // (x, phase, payload): phase 0 = remove edge, 1 = insert edge, 2 = query
    let mut events: Vec<(&Scalar, u8, usize)> = Vec::with_capacity(2 * et.edges.len() + pts.len());
    for (i, e) in et.edges.iter().enumerate() {
        events.push((&t.points[e.v[0]].x, 1, i));
        events.push((&t.points[e.v[1]].x, 0, i));
    }
    for (i, q) in pts.iter().enumerate() {
        if let Some(&v) = vertex_of.get(q) {
            out[i] = Location::Vertex(v);
        } else {
            events.push((&q.x, 2, i));
        }
    }
    events.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
    ops::tick(events.len() as u64 * (usize::BITS - events.len().leading_zeros()) as u64);

    let key_of = |i: usize| {
        let e = &et.edges[i];
        Key::Seg { x0: t.points[e.v[0]].x.clone(), c: e.intercept.clone(), s: e.slope.clone(), id: i }
    };
    let mut status: BTreeSet<Key> = BTreeSet::new();
    for (_, phase, i) in events {
        match phase {
            0 => {
                status.remove(&key_of(i));
            }
            1 => {
                status.insert(key_of(i));
            }
            _ => {
                let q = &pts[i];
                let probe = Key::Probe { x: q.x.clone(), y: q.y.clone() };
                let below = status.range(..&probe).next_back();
                let above = status.range(&probe..).next();
                let on = |k: Option<&Key>| match k {
                    Some(Key::Seg { c, s, id, .. }) if (c + s * &q.x) == q.y => Some(*id),
                    _ => None,
                };
                out[i] = if let Some(e) = on(below).or_else(|| on(above)) {
                    Location::Edge(e)
                } else {
                    match below {
                        Some(Key::Seg { id, .. }) => match et.edges[*id].upper_tri {
                            Some(tri) => Location::Triangle(tri),
                            None => Location::Outside,
                        },
                        _ => Location::Outside,
                    }
                };
            }
        }
    }
    out
}

/// Brute-force classification of a single point; the reference for tests.
pub fn locate_brute(t: &Tin, et: &EdgeTable, q: &Point) -> Location {
    use crate::geom::{orient, strictly_on_segment};
    if let Some(v) = t.points.iter().position(|p| p == q) {
        return Location::Vertex(v);
    }
    for (i, e) in et.edges.iter().enumerate() {
        if strictly_on_segment(q, &t.points[e.v[0]], &t.points[e.v[1]]) {
            return Location::Edge(i);
        }
    }
    for ti in 0..t.num_triangles() {
        let [a, b, c] = t.tri_points(ti);
        if orient(a, b, q) == Ordering::Greater
            && orient(b, c, q) == Ordering::Greater
            && orient(c, a, q) == Ordering::Greater
        {
            return Location::Triangle(ti);
        }
    }
    Location::Outside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{generate_tin, normalize_pair_with, GenParams, Rect};
    use crate::scalar::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Unit square split by the diagonal (0,0)-(1,1), sheared slightly so
    /// that no edge is vertical: (x, y) -> (x + y/4, y).
    fn square() -> Tin {
        let pts = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let t = Tin::new(
            pts.iter().map(|&(x, y)| Point::new(int(x), int(y))).collect(),
            vec![int(0); 4],
            vec![[0, 1, 2], [0, 2, 3]],
            Rect::unit(),
        );
        normalize_pair_with(&t, &t, &rat(1, 4)).unwrap().0
    }

    fn map(t: &Tin, x: Scalar, y: Scalar) -> Point {
        t.frame.apply(&Point::new(x, y))
    }

    #[test]
    fn square_examples() {
        let t = square();
        let et = build_edge_data(&t).unwrap();
        let q = [
            map(&t, rat(1, 4), rat(3, 4)),
            map(&t, rat(1, 2), rat(1, 2)),
            map(&t, int(2), int(2)),
            map(&t, int(1), int(1)),
            map(&t, rat(3, 4), rat(1, 4)),
        ];
        let got = batch_locate_with(&t, &et, &q);
        assert_eq!(got[0], Location::Triangle(1));
        assert_eq!(got[1], Location::Edge(et.find(0, 2).unwrap()));
        assert_eq!(got[2], Location::Outside);
        assert_eq!(got[3], Location::Vertex(2));
        assert_eq!(got[4], Location::Triangle(0));
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..4 {
            let g = generate_tin(&GenParams::new(60, seed)).unwrap();
            let t = normalize_pair_with(&g, &g, &rat(1, 7)).unwrap().0;
            let et = build_edge_data(&t).unwrap();
            let mut q: Vec<Point> = (0..300)
                .map(|_| map(&t, rat(rng.gen_range(-2..34), 32), rat(rng.gen_range(-2..34), 32)))
                .collect();
            // vertices, edge midpoints, and points sharing a vertex's x
            q.extend(t.points.iter().take(10).cloned());
            for e in et.edges.iter().take(20) {
                let (a, b) = (&t.points[e.v[0]], &t.points[e.v[1]]);
                q.push(Point::new((&a.x + &b.x) / int(2), (&a.y + &b.y) / int(2)));
                q.push(Point::new(a.x.clone(), &a.y + rat(1, 1000)));
                q.push(Point::new(a.x.clone(), &a.y - rat(1, 1000)));
            }
            let got = batch_locate_with(&t, &et, &q);
            for (p, l) in q.iter().zip(&got) {
                assert_eq!(*l, locate_brute(&t, &et, p), "{p:?}");
            }
            // permutation equivariance
            let mut rev = q.clone();
            rev.reverse();
            let mut got_rev = batch_locate_with(&t, &et, &rev);
            got_rev.reverse();
            assert_eq!(got, got_rev);
        }
    }
}
