//! Seeded synthetic TINs: random point insertion on a fine integer grid,
//! optional edge flips, exact rational heights from a chosen surface.

use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Point, Rect, Tin};
use crate::error::{Error, Result};
use crate::scalar::{int, Scalar};

/// Grid resolution per axis for generated vertices.
const GRID: i64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    /// Integer heights drawn uniformly from 0..=1000.
    RandomUniform,
    /// a + b*x + c*y
    Plane(Scalar, Scalar, Scalar),
    /// x*y
    Saddle,
    /// Coefficients in graded order: 1, x, y, x², xy, y², x³, ...
    Polynomial(Vec<Scalar>),
}

impl Surface {
    pub fn eval(&self, p: &Point, rng: &mut impl Rng) -> Scalar {
        match self {
            Surface::RandomUniform => int(rng.gen_range(0..=1000)),
            Surface::Plane(a, b, c) => a + b * &p.x + c * &p.y,
            Surface::Saddle => &p.x * &p.y,
            Surface::Polynomial(coeffs) => {
                let mut acc = Scalar::zero();
                let mut k = 0;
                let mut deg = 0u32;
                while k < coeffs.len() {
                    for j in 0..=deg {
                        if k == coeffs.len() {
                            break;
                        }
                        let i = deg - j;
                        acc += &coeffs[k] * num_traits::pow(p.x.clone(), i as usize) * num_traits::pow(p.y.clone(), j as usize);
                        k += 1;
                    }
                    deg += 1;
                }
                acc
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipMode {
    None,
    /// Attempt this many random flips of interior edges (convex quads only).
    Random(usize),
    /// Lawson flips until the triangulation is Delaunay.
    Delaunay,
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub triangles: usize,
    pub seed: u64,
    pub surface: Surface,
    pub flips: FlipMode,
    pub domain: Rect,
}

impl GenParams {
    pub fn new(triangles: usize, seed: u64) -> Self {
        GenParams {
            triangles,
            seed,
            surface: Surface::RandomUniform,
            flips: FlipMode::Delaunay,
            domain: Rect::unit(),
        }
    }

    pub fn surface(mut self, s: Surface) -> Self {
        self.surface = s;
        self
    }

    pub fn flips(mut self, f: FlipMode) -> Self {
        self.flips = f;
        self
    }
}

type P = (i64, i64);

fn orient(a: P, b: P, c: P) -> i128 {
    (b.0 - a.0) as i128 * (c.1 - a.1) as i128 - (b.1 - a.1) as i128 * (c.0 - a.0) as i128
}

/// > 0 when d lies strictly inside the circumcircle of CCW triangle abc.
fn in_circle(a: P, b: P, c: P, d: P) -> i128 {
    let row = |p: P| {
        let (x, y) = ((p.0 - d.0) as i128, (p.1 - d.1) as i128);
        (x, y, x * x + y * y)
    };
    let (ax, ay, a2) = row(a);
    let (bx, by, b2) = row(b);
    let (cx, cy, c2) = row(c);
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

struct Mesh {
    pts: Vec<P>,
    tris: Vec<[usize; 3]>,
}

impl Mesh {
    fn edge_map(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for (ti, t) in self.tris.iter().enumerate() {
            for k in 0..3 {
                m.insert((t[k], t[(k + 1) % 3]), ti);
            }
        }
        m
    }

    /// Flips directed edge (a, b) of triangle `t1` with its twin in `t2`.
    /// Returns false when the quad is not strictly convex.
    fn try_flip(&mut self, map: &mut HashMap<(usize, usize), usize>, a: usize, b: usize) -> Option<[usize; 4]> {
        let t1 = *map.get(&(a, b))?;
        let t2 = *map.get(&(b, a))?;
        let c = third(self.tris[t1], a, b);
        let d = third(self.tris[t2], b, a);
        let (pa, pb, pc, pd) = (self.pts[a], self.pts[b], self.pts[c], self.pts[d]);
        // new diagonal c-d; both new triangles must be CCW
        if orient(pc, pd, pb) <= 0 || orient(pd, pc, pa) <= 0 {
            return None;
        }
        for t in [t1, t2] {
            let tri = self.tris[t];
            for k in 0..3 {
                map.remove(&(tri[k], tri[(k + 1) % 3]));
            }
        }
        self.tris[t1] = [c, d, b];
        self.tris[t2] = [d, c, a];
        for t in [t1, t2] {
            let tri = self.tris[t];
            for k in 0..3 {
                map.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        Some([a, b, c, d])
    }

    fn delaunay(&mut self) {
        let mut map = self.edge_map();
        let mut stack: Vec<(usize, usize)> = map.keys().copied().filter(|&(a, b)| a < b).collect();
        stack.sort_unstable();
        while let Some((a, b)) = stack.pop() {
            let (Some(&t1), Some(&t2)) = (map.get(&(a, b)), map.get(&(b, a))) else {
                continue;
            };
            let c = third(self.tris[t1], a, b);
            let d = third(self.tris[t2], b, a);
            if in_circle(self.pts[a], self.pts[b], self.pts[c], self.pts[d]) <= 0 {
                continue;
            }
            if self.try_flip(&mut map, a, b).is_some() {
                stack.extend([(a, c), (c, b), (b, d), (d, a)]);
            }
        }
    }

    fn random_flips(&mut self, k: usize, rng: &mut ChaCha8Rng) {
        let mut map = self.edge_map();
        for _ in 0..k {
            let t = rng.gen_range(0..self.tris.len());
            let e = rng.gen_range(0..3);
            let (a, b) = (self.tris[t][e], self.tris[t][(e + 1) % 3]);
            if map.contains_key(&(b, a)) {
                self.try_flip(&mut map, a, b);
            }
        }
    }
}

fn third(t: [usize; 3], a: usize, b: usize) -> usize {
    *t.iter().find(|&&v| v != a && v != b).expect("triangle has a third vertex")
}

/// Deterministic random TIN with exactly `triangles` triangles.
pub fn generate_tin(params: &GenParams) -> Result<Tin> {
    let n = params.triangles;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("triangle count must be even and >= 2, got {n}")));
    }
    if !params.domain.is_proper() {
        return Err(Error::InvalidParameter("empty domain".into()));
    }
    let inserts = (n - 2) / 2;
    if inserts as i64 > (GRID - 1) * (GRID - 1) / 4 {
        return Err(Error::InvalidParameter(format!("too many triangles: {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut mesh = Mesh {
        pts: vec![(0, 0), (GRID, 0), (GRID, GRID), (0, GRID)],
        tris: vec![[0, 1, 2], [0, 2, 3]],
    };
    let mut taken: std::collections::HashSet<P> = mesh.pts.iter().copied().collect();
    while mesh.pts.len() < 4 + inserts {
        let p = (rng.gen_range(1..GRID), rng.gen_range(1..GRID));
        if taken.contains(&p) {
            continue;
        }
        let hit = mesh.tris.iter().position(|t| {
            let (a, b, c) = (mesh.pts[t[0]], mesh.pts[t[1]], mesh.pts[t[2]]);
            orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0
        });
        let Some(ti) = hit else {
            continue; // on an edge
        };
        taken.insert(p);
        let v = mesh.pts.len();
        mesh.pts.push(p);
        let [a, b, c] = mesh.tris[ti];
        mesh.tris[ti] = [a, b, v];
        mesh.tris.push([b, c, v]);
        mesh.tris.push([c, a, v]);
    }
    match params.flips {
        FlipMode::None => {}
        FlipMode::Random(k) => mesh.random_flips(k, &mut rng),
        FlipMode::Delaunay => mesh.delaunay(),
    }

    let d = &params.domain;
    let (w, h) = (&d.xmax - &d.xmin, &d.ymax - &d.ymin);
    let grid = int(GRID);
    let points: Vec<Point> = mesh
        .pts
        .iter()
        .map(|&(i, j)| Point::new(&d.xmin + &w * int(i) / &grid, &d.ymin + &h * int(j) / &grid))
        .collect();
    let heights = points.iter().map(|p| params.surface.eval(p, &mut rng)).collect();
    Ok(Tin::new(points, heights, mesh.tris, d.clone()))
}
