//! Bipartite clique cover of the crossing pairs between red and blue
//! segment sets.
//!
//! A segment tree over the endpoint x-coordinates assigns every segment to
//! the nodes whose slab it spans ("long") and the nodes it only partly
//! covers ("short"). Within a slab the long segments of one color are
//! totally ordered, and a segment of the other color crosses a contiguous
//! rank range of them; those ranges are cut into canonical pieces of a
//! balanced tree over the ranks, and each piece becomes one clique.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::integrate::{segment_contact, Contact};
use crate::ops;
use crate::scalar::{int, to_f64, Scalar};

/// A non-vertical segment with `a.x < b.x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub intercept: Scalar,
    pub slope: Scalar,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Result<Self> {
        let (a, b) = match p.x.cmp(&q.x) {
            Ordering::Less => (p, q),
            Ordering::Greater => (q, p),
            Ordering::Equal => return Err(Error::DegenerateInput("vertical segment".into())),
        };
        let slope = (&b.y - &a.y) / (&b.x - &a.x);
        let intercept = &a.y - &slope * &a.x;
        Ok(Segment { a, b, intercept, slope })
    }

    pub fn y_at(&self, x: &Scalar) -> Scalar {
        &self.intercept + &self.slope * x
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    pub red: Vec<usize>,
    pub blue: Vec<usize>,
    /// Every red slope is below every blue slope (otherwise above).
    pub red_lower_slope: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueFamily {
    pub cliques: Vec<Clique>,
}

impl CliqueFamily {
    /// Σ(|R_k| + |B_k|).
    pub fn size(&self) -> usize {
        self.cliques.iter().map(|c| c.red.len() + c.blue.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Number of red/blue pairs covered, with multiplicity.
    pub fn pairs(&self) -> usize {
        self.cliques.iter().map(|c| c.red.len() * c.blue.len()).sum()
    }
}

struct Node {
    lo: usize,
    hi: usize,
    kids: Option<(usize, usize)>,
    long: [Vec<usize>; 2],
    short: [Vec<usize>; 2],
}

struct Tree<'a> {
    xs: Vec<&'a Scalar>,
    nodes: Vec<Node>,
}

impl<'a> Tree<'a> {
    fn build(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, kids: None, long: Default::default(), short: Default::default() });
        if hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let l = self.build(lo, mid);
            let r = self.build(mid, hi);
            self.nodes[id].kids = Some((l, r));
        }
        id
    }

    fn insert(&mut self, id: usize, i0: usize, i1: usize, color: usize, seg: usize) {
        let (lo, hi, kids) = (self.nodes[id].lo, self.nodes[id].hi, self.nodes[id].kids);
        if i0 <= lo && hi <= i1 {
            self.nodes[id].long[color].push(seg);
            return;
        }
        self.nodes[id].short[color].push(seg);
        if let Some((l, r)) = kids {
            for k in [l, r] {
                let (clo, chi) = (self.nodes[k].lo, self.nodes[k].hi);
                if i0 < chi && clo < i1 {
                    self.insert(k, i0, i1, color, seg);
                }
            }
        }
    }
}

fn sign(v: &Scalar) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Whether `l` is below `o` just right of `x` (or just left of it when
/// `from_left`), given that both are defined there.
fn below(l: &Segment, o: &Segment, x: &Scalar, from_left: bool) -> Result<bool> {
    ops::tick(6);
    let d = l.y_at(x) - o.y_at(x);
    let s = sign(&d);
    if s != 0 {
        return Ok(s < 0);
    }
    let ds = sign(&(&l.slope - &o.slope));
    if ds == 0 {
        return Err(Error::DegenerateInput("collinear overlapping red/blue segments".into()));
    }
    Ok(if from_left { ds > 0 } else { ds < 0 })
}

/// Canonical pieces of `[p, q)` in a balanced tree over `[lo, hi)`.
fn canonical(node: usize, lo: usize, hi: usize, p: usize, q: usize, out: &mut Vec<(usize, usize, usize)>) {
    if q <= lo || hi <= p {
        return;
    }
    if p <= lo && hi <= q {
        out.push((node, lo, hi));
        return;
    }
    let mid = (lo + hi) / 2;
    canonical(2 * node, lo, mid, p, q, out);
    canonical(2 * node + 1, mid, hi, p, q, out);
}

/// Builds the clique family for crossing pairs between `red` and `blue`.
/// Contacts other than transversal crossings interior to both segments,
/// shared endpoints excepted, must not occur.
pub fn build_clique_cover(red: &[Segment], blue: &[Segment]) -> Result<CliqueFamily> {
    let mut xs: Vec<&Scalar> = red.iter().chain(blue).flat_map(|s| [&s.a.x, &s.b.x]).collect();
    xs.sort();
    xs.dedup();
    ops::tick(xs.len() as u64 * (usize::BITS - xs.len().leading_zeros()) as u64);
    let mut fam = CliqueFamily::default();
    if xs.len() < 2 || red.is_empty() || blue.is_empty() {
        return Ok(fam);
    }
    let mut tree = Tree { xs, nodes: Vec::new() };
    tree.build(0, tree.xs.len() - 1);
    let idx = |x: &Scalar, xs: &[&Scalar]| xs.binary_search(&x).expect("endpoint is a grid coordinate");
    for (color, set) in [red, blue].into_iter().enumerate() {
        for (i, s) in set.iter().enumerate() {
            let (i0, i1) = (idx(&s.a.x, &tree.xs), idx(&s.b.x, &tree.xs));
            tree.insert(0, i0, i1, color, i);
        }
    }
    let segs = [red, blue];
    for node in &tree.nodes {
        let (a, b) = (tree.xs[node.lo], tree.xs[node.hi]);
        // long reds against all blues here, then long blues against short reds
        let passes = [
            (0usize, node.long[1].iter().chain(&node.short[1]).copied().collect::<Vec<_>>()),
            (1usize, node.short[0].clone()),
        ];
        for (lc, others) in passes {
            if node.long[lc].is_empty() || others.is_empty() {
                continue;
            }
            let longs_set = segs[lc];
            let others_set = segs[1 - lc];
            let mid = (a + b) / int(2);
            let mut longs = node.long[lc].clone();
            longs.sort_by(|&i, &j| {
                let (si, sj) = (&longs_set[i], &longs_set[j]);
                si.y_at(&mid).cmp(&sj.y_at(&mid))
            });
            ops::tick(4 * longs.len() as u64 * (usize::BITS - longs.len().leading_zeros()) as u64);

            let m = longs.len();
            let mut buckets: BTreeMap<(usize, bool), (usize, usize, Vec<usize>)> = BTreeMap::new();
            let mut pieces = Vec::new();
            for &oi in &others {
                let o = &others_set[oi];
                let a2 = if &o.a.x > a { &o.a.x } else { a };
                let b2 = if &o.b.x < b { &o.b.x } else { b };
                let mut err = None;
                let mut check = |r: Result<bool>| {
                    r.unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        false
                    })
                };
                let cnt_l = longs.partition_point(|&li| {
                    let l = &longs_set[li];
                    // a crossing exactly at the left slab boundary belongs here
                    let open_left = &o.a.x < a2 && &l.a.x < a2;
                    check(below(l, o, a2, open_left))
                });
                let cnt_r = longs.partition_point(|&li| check(below(&longs_set[li], o, b2, true)));
                if let Some(e) = err {
                    return Err(e);
                }
                let (p, q, steeper) = match cnt_l.cmp(&cnt_r) {
                    Ordering::Equal => continue,
                    Ordering::Greater => (cnt_r, cnt_l, true),
                    Ordering::Less => (cnt_l, cnt_r, false),
                };
                pieces.clear();
                canonical(1, 0, m, p, q, &mut pieces);
                for &(id, lo, hi) in &pieces {
                    buckets.entry((id, steeper)).or_insert_with(|| (lo, hi, Vec::new())).2.push(oi);
                }
            }
            for ((_, steeper), (lo, hi, os)) in buckets {
                let ranked: Vec<usize> = longs[lo..hi].to_vec();
                let clique = if lc == 0 {
                    Clique { red: ranked, blue: os, red_lower_slope: !steeper }
                } else {
                    Clique { red: os, blue: ranked, red_lower_slope: steeper }
                };
                fam.cliques.push(clique);
            }
        }
    }
    Ok(fam)
}

#[derive(Clone, Debug, Default)]
pub struct CoverReport {
    pub violations: Vec<String>,
    pub crossing_pairs: usize,
    pub size: usize,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Brute-force check of the cover properties: every clique pair crosses,
/// slopes are separated as flagged, and every crossing pair is covered
/// exactly once.
pub fn verify_clique_cover(fam: &CliqueFamily, red: &[Segment], blue: &[Segment]) -> CoverReport {
    let mut rep = CoverReport { size: fam.size(), ..Default::default() };
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, c) in fam.cliques.iter().enumerate() {
        for &r in &c.red {
            for &b in &c.blue {
                let (rs, bs) = (&red[r], &blue[b]);
                if segment_contact(&rs.a, &rs.b, &bs.a, &bs.b) != Contact::Cross {
                    rep.violations.push(format!("(i) clique {k}: red {r} and blue {b} do not cross"));
                }
                if (rs.slope < bs.slope) != c.red_lower_slope || rs.slope == bs.slope {
                    rep.violations.push(format!("(ii) clique {k}: slopes of red {r} and blue {b} are not separated"));
                }
                *seen.entry((r, b)).or_default() += 1;
            }
        }
    }
    // padded float boxes: disjoint boxes rule out a crossing, anything else
    // goes to the exact test
    let boxes = |segs: &[Segment]| -> Vec<[f64; 4]> {
        segs.iter()
            .map(|s| {
                let (ax, ay, bx, by) = (to_f64(&s.a.x), to_f64(&s.a.y), to_f64(&s.b.x), to_f64(&s.b.y));
                let pad = 1e-9 * (1.0 + ax.abs().max(ay.abs()).max(bx.abs()).max(by.abs()));
                [ax.min(bx) - pad, ax.max(bx) + pad, ay.min(by) - pad, ay.max(by) + pad]
            })
            .collect()
    };
    let (rbox, bbox) = (boxes(red), boxes(blue));
    for (r, rs) in red.iter().enumerate() {
        for (b, bs) in blue.iter().enumerate() {
            let (p, q) = (&rbox[r], &bbox[b]);
            if p[1] < q[0] || q[1] < p[0] || p[3] < q[2] || q[3] < p[2] {
                continue;
            }
            let crosses = segment_contact(&rs.a, &rs.b, &bs.a, &bs.b) == Contact::Cross;
            let n = seen.get(&(r, b)).copied().unwrap_or(0);
            if crosses {
                rep.crossing_pairs += 1;
            }
            if crosses && n != 1 {
                rep.violations.push(format!("(iii) crossing red {r} / blue {b} covered {n} times"));
            }
        }
    }
    rep
}

/// `size / (n log2² n)` with `n` the total number of segments.
pub fn size_ratio(size: usize, n: usize) -> f64 {
    let l = (n.max(2) as f64).log2();
    size as f64 / (n as f64 * l * l)
}
