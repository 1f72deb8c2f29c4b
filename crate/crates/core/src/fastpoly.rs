//! Dense univariate polynomials over an abstract field: NTT multiplication,
//! Newton-inverse division, subproduct-tree multipoint evaluation, and
//! divide-and-conquer summation of `u / (X - v)^d` fractions.
//!
//! Polynomials are plain coefficient vectors, lowest degree first, with no
//! trailing zeros (the zero polynomial is the empty vector).

use num_traits::{One, Zero};

use crate::field::PrimeField;
use crate::ops;
use crate::scalar::Scalar;

pub trait Field: Sync {
    type Elem: Clone + PartialEq + std::fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;
    /// Image of a rational; `None` when its denominator vanishes.
    fn from_scalar(&self, q: &Scalar) -> Option<Self::Elem>;

    fn from_scalars(&self, qs: &[&Scalar]) -> Option<Vec<Self::Elem>> {
        qs.iter().map(|q| self.from_scalar(q)).collect()
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    /// Product of two nonempty coefficient vectors (not necessarily trimmed).
    fn mul_poly(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Vec<Self::Elem> {
        schoolbook(self, a, b)
    }
}

/// Exact rationals.
#[derive(Clone, Copy, Debug, Default)]
pub struct RationalField;

impl Field for RationalField {
    type Elem = Scalar;

    fn zero(&self) -> Scalar {
        Scalar::zero()
    }
    fn one(&self) -> Scalar {
        Scalar::one()
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }
    fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a - b
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }
    fn inv(&self, a: &Scalar) -> Option<Scalar> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn from_i64(&self, v: i64) -> Scalar {
        crate::scalar::int(v)
    }
    fn from_scalar(&self, q: &Scalar) -> Option<Scalar> {
        Some(q.clone())
    }
}

/// Below this length (of the shorter factor) products use the schoolbook method.
pub const NTT_THRESHOLD: usize = 48;

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        PrimeField::one(self)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::add(self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::sub(self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::mul(self, *a, *b)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        PrimeField::inv(self, *a)
    }
    fn from_i64(&self, v: i64) -> u64 {
        PrimeField::from_i64(self, v)
    }
    fn from_scalar(&self, q: &Scalar) -> Option<u64> {
        crate::field::rat_to_fp(q, self, 0).ok()
    }
    fn from_scalars(&self, qs: &[&Scalar]) -> Option<Vec<u64>> {
        let mut dens: Vec<u64> = qs.iter().map(|q| self.from_bigint(q.denom())).collect();
        if !self.batch_inv(&mut dens) {
            return None;
        }
        Some(qs.iter().zip(dens).map(|(q, d)| PrimeField::mul(self, self.from_bigint(q.numer()), d)).collect())
    }
    fn neg(&self, a: &u64) -> u64 {
        PrimeField::neg(self, *a)
    }

    fn mul_poly(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.len().min(b.len()) <= NTT_THRESHOLD {
            return schoolbook_fp(self, a, b);
        }
        let out_len = a.len() + b.len() - 1;
        let n = out_len.next_power_of_two();
        if n.trailing_zeros() > self.adicity() {
            return schoolbook_fp(self, a, b);
        }
        let mut fa = a.to_vec();
        fa.resize(n, 0);
        let mut fb = b.to_vec();
        fb.resize(n, 0);
        ntt(self, &mut fa, false);
        ntt(self, &mut fb, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = PrimeField::mul(self, *x, *y);
        }
        ops::tick(n as u64);
        ntt(self, &mut fa, true);
        fa.truncate(out_len);
        fa
    }
}

/// Inverts every entry in place using a single field inversion. Returns
/// false if some entry is zero.
pub fn invert_all<F: Field + ?Sized>(f: &F, xs: &mut [F::Elem]) -> bool {
    let mut pre = Vec::with_capacity(xs.len());
    let mut acc = f.one();
    for x in xs.iter() {
        if f.is_zero(x) {
            return false;
        }
        pre.push(acc.clone());
        acc = f.mul(&acc, x);
    }
    let Some(mut inv) = f.inv(&acc) else {
        return false;
    };
    for i in (0..xs.len()).rev() {
        let x = std::mem::replace(&mut xs[i], f.mul(&inv, &pre[i]));
        inv = f.mul(&inv, &x);
    }
    ops::tick(3 * xs.len() as u64);
    true
}

fn schoolbook<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    ops::tick(2 * (a.len() * b.len()) as u64);
    out
}

fn schoolbook_fp(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    ops::tick(2 * (a.len() * b.len()) as u64);
    out
}

/// In-place radix-2 number-theoretic transform; `a.len()` must be a power of
/// two not exceeding the field's 2-adic order.
pub fn ntt(f: &PrimeField, a: &mut [u64], invert: bool) {
    let n = a.len();
    if n <= 1 {
        return;
    }
    let log = n.trailing_zeros();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut ws = Vec::with_capacity(n / 2);
    for s in 1..=log {
        let len = 1usize << s;
        let half = len / 2;
        let mut w = f.root_of_unity(s).expect("transform length within the 2-adic order");
        if invert {
            w = f.inv(w).unwrap();
        }
        ws.clear();
        let mut cur = f.one();
        for _ in 0..half {
            ws.push(cur);
            cur = f.mul(cur, w);
        }
        for blk in a.chunks_exact_mut(len) {
            let (lo, hi) = blk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = f.mul(hi[k], ws[k]);
                lo[k] = f.add(u, v);
                hi[k] = f.sub(u, v);
            }
        }
    }
    if invert {
        let ninv = f.inv(f.from_u64(n as u64)).unwrap();
        for x in a.iter_mut() {
            *x = f.mul(*x, ninv);
        }
    }
    ops::tick((3 * (n / 2) * log as usize + n) as u64);
}

pub fn trim<F: Field + ?Sized>(f: &F, mut p: Vec<F::Elem>) -> Vec<F::Elem> {
    while p.last().is_some_and(|c| f.is_zero(c)) {
        p.pop();
    }
    p
}

/// Degree, or `None` for the zero polynomial.
pub fn degree<E>(p: &[E]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn poly_mul<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    trim(f, f.mul_poly(a, b))
}

pub fn poly_add<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n).map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    ops::tick(n as u64);
    trim(f, out)
}

pub fn poly_sub<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n).map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    ops::tick(n as u64);
    trim(f, out)
}

pub fn poly_scale<F: Field + ?Sized>(f: &F, a: &[F::Elem], k: &F::Elem) -> Vec<F::Elem> {
    ops::tick(a.len() as u64);
    trim(f, a.iter().map(|c| f.mul(c, k)).collect())
}

pub fn horner<F: Field + ?Sized>(f: &F, p: &[F::Elem], x: &F::Elem) -> F::Elem {
    let mut acc = f.zero();
    for c in p.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    ops::tick(2 * p.len() as u64);
    acc
}

/// `a^{-1} mod X^n` by Newton iteration; `a[0]` must be invertible.
pub fn inverse_series<F: Field + ?Sized>(f: &F, a: &[F::Elem], n: usize) -> Vec<F::Elem> {
    let mut g = vec![f.inv(&a[0]).expect("constant term must be invertible")];
    let mut k = 1;
    while k < n {
        k = (2 * k).min(n);
        // g <- g (2 - a g) mod X^k
        let a_k = &a[..a.len().min(k)];
        let mut ag = f.mul_poly(a_k, &g);
        ag.truncate(k);
        let mut two_minus: Vec<F::Elem> = ag.iter().map(|c| f.neg(c)).collect();
        two_minus[0] = f.add(&two_minus[0], &f.from_i64(2));
        ops::tick(ag.len() as u64);
        let mut next = f.mul_poly(&g, &two_minus);
        next.truncate(k);
        g = next;
    }
    g.truncate(n);
    g
}

/// Below this quotient length, division uses the schoolbook method.
const DIV_THRESHOLD: usize = 64;

/// Quotient and remainder of `a` by nonzero `b`.
pub fn poly_divrem<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    let b = trim(f, b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let a = trim(f, a.to_vec());
    if a.len() < b.len() {
        return (Vec::new(), a);
    }
    let qlen = a.len() - b.len() + 1;
    if qlen <= DIV_THRESHOLD || b.len() <= DIV_THRESHOLD {
        return divrem_schoolbook(f, a, &b);
    }
    // reversed quotient = rev(a) * rev(b)^{-1} mod X^qlen
    let ra: Vec<F::Elem> = a.iter().rev().take(qlen).cloned().collect();
    let rb: Vec<F::Elem> = b.iter().rev().cloned().collect();
    let inv = inverse_series(f, &rb, qlen);
    let mut rq = f.mul_poly(&ra, &inv);
    rq.truncate(qlen);
    rq.reverse();
    let q = trim(f, rq);
    let qb = poly_mul(f, &q, &b);
    let r = poly_sub(f, &a[..b.len() - 1], &qb[..(b.len() - 1).min(qb.len())]);
    (q, r)
}

fn divrem_schoolbook<F: Field + ?Sized>(f: &F, mut a: Vec<F::Elem>, b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    if a.len() < b.len() {
        return (Vec::new(), a);
    }
    let lead_inv = f.inv(b.last().unwrap()).expect("nonzero leading coefficient");
    let qlen = a.len() - b.len() + 1;
    let mut q = vec![f.zero(); qlen];
    for i in (0..qlen).rev() {
        let c = f.mul(&a[i + b.len() - 1], &lead_inv);
        if !f.is_zero(&c) {
            for (j, bj) in b.iter().enumerate() {
                a[i + j] = f.sub(&a[i + j], &f.mul(&c, bj));
            }
        }
        q[i] = c;
    }
    ops::tick(2 * (qlen * b.len()) as u64);
    a.truncate(b.len() - 1);
    (trim(f, q), trim(f, a))
}

pub fn poly_rem<F: Field + ?Sized>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    poly_divrem(f, a, b).1
}

/// Leaves of this many points or fewer are evaluated by Horner's rule.
const LEAF_POINTS: usize = 16;

/// Subproduct tree over a fixed point set, reusable for many polynomials.
pub struct SubproductTree<E> {
    points: Vec<E>,
    /// Nodes as (start, end, product polynomial), children at 2i+1, 2i+2.
    nodes: Vec<(usize, usize, Vec<E>)>,
}

impl<E: Clone + PartialEq + std::fmt::Debug + Send + Sync> SubproductTree<E> {
    pub fn new<F: Field<Elem = E> + ?Sized>(f: &F, points: &[E]) -> Self {
        let mut t = SubproductTree { points: points.to_vec(), nodes: Vec::new() };
        if !points.is_empty() {
            t.build(f, 0, points.len());
        }
        t
    }

    fn build<F: Field<Elem = E> + ?Sized>(&mut self, f: &F, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push((lo, hi, Vec::new()));
        let poly = if hi - lo <= LEAF_POINTS {
            let mut p = vec![f.one()];
            for x in &self.points[lo..hi] {
                p = poly_mul(f, &p, &[f.neg(x), f.one()]);
            }
            p
        } else {
            let mid = lo + (hi - lo).div_ceil(2);
            let l = self.build(f, lo, mid);
            let r = self.build(f, mid, hi);
            poly_mul(f, &self.nodes[l].2, &self.nodes[r].2)
        };
        self.nodes[id].2 = poly;
        id
    }

    pub fn root_poly(&self) -> Option<&[E]> {
        self.nodes.first().map(|n| n.2.as_slice())
    }

    /// Values of `p` at every point, in input order.
    pub fn eval<F: Field<Elem = E> + ?Sized>(&self, f: &F, p: &[E]) -> Vec<E> {
        let mut out = vec![f.zero(); self.points.len()];
        if self.points.is_empty() {
            return out;
        }
        self.descend(f, 0, poly_rem(f, p, &self.nodes[0].2), &mut out);
        out
    }

    fn descend<F: Field<Elem = E> + ?Sized>(&self, f: &F, id: usize, r: Vec<E>, out: &mut [E]) -> usize {
        let (lo, hi, _) = &self.nodes[id];
        if hi - lo <= LEAF_POINTS {
            for i in *lo..*hi {
                out[i] = horner(f, &r, &self.points[i]);
            }
            return id + 1;
        }
        let left = id + 1;
        let rl = poly_rem(f, &r, &self.nodes[left].2);
        let right = self.descend(f, left, rl, out);
        let rr = poly_rem(f, &r, &self.nodes[right].2);
        self.descend(f, right, rr, out)
    }
}

/// `result[i] = p(points[i])`.
pub fn multipoint_eval<F: Field + ?Sized>(f: &F, p: &[F::Elem], points: &[F::Elem]) -> Vec<F::Elem> {
    SubproductTree::new(f, points).eval(f, p)
}

/// `N / D` with `N` possibly a vector of numerators sharing `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracSum<E> {
    pub nums: Vec<Vec<E>>,
    pub den: Vec<E>,
}

/// `Σ u_e / (X - v_e)^d` as a single fraction `N / D`.
pub fn sum_fractions<F: Field + ?Sized>(f: &F, terms: &[(F::Elem, F::Elem)], d: u32) -> (Vec<F::Elem>, Vec<F::Elem>) {
    let us: Vec<Vec<F::Elem>> = terms.iter().map(|(u, _)| vec![u.clone()]).collect();
    let vs: Vec<F::Elem> = terms.iter().map(|(_, v)| v.clone()).collect();
    let mut r = sum_fractions_multi(f, &us, &vs, d);
    (r.nums.pop().unwrap_or_default(), r.den)
}

/// For each numerator index `k`, `Σ_e us[e][k] / (X - vs[e])^d`, all sharing
/// the denominator `Π (X - v_e)^d`. Degrees: `N_k <= (n-1)d`, `D = nd`.
pub fn sum_fractions_multi<F: Field + ?Sized>(
    f: &F,
    us: &[Vec<F::Elem>],
    vs: &[F::Elem],
    d: u32,
) -> FracSum<F::Elem> {
    assert!(d >= 1, "fraction order must be positive");
    assert_eq!(us.len(), vs.len());
    let k = us.first().map_or(0, |u| u.len());
    if vs.is_empty() {
        return FracSum { nums: vec![Vec::new(); k], den: vec![f.one()] };
    }
    combine(f, us, vs, d)
}

fn combine<F: Field + ?Sized>(f: &F, us: &[Vec<F::Elem>], vs: &[F::Elem], d: u32) -> FracSum<F::Elem> {
    if vs.len() == 1 {
        let lin = [f.neg(&vs[0]), f.one()];
        let mut den = vec![f.one()];
        for _ in 0..d {
            den = poly_mul(f, &den, &lin);
        }
        let nums = us[0].iter().map(|u| trim(f, vec![u.clone()])).collect();
        return FracSum { nums, den };
    }
    let mid = vs.len().div_ceil(2);
    let a = combine(f, &us[..mid], &vs[..mid], d);
    let b = combine(f, &us[mid..], &vs[mid..], d);
    let nums = a
        .nums
        .iter()
        .zip(&b.nums)
        .map(|(na, nb)| poly_add(f, &poly_mul(f, na, &b.den), &poly_mul(f, nb, &a.den)))
        .collect();
    FracSum { nums, den: poly_mul(f, &a.den, &b.den) }
}

/// Sparse multivariate polynomial for [`multipoint_multivar`]: terms
/// `(exponents, coefficient)` over variables `X_0, ..., X_r`.
pub type SparsePoly<E> = Vec<(Vec<u32>, E)>;

/// Evaluates `P(X_0, ..., X_r)` at many points by grouping on the exponents
/// of `X_1..X_r`, multipoint-evaluating each univariate coefficient in `X_0`.
pub fn multipoint_multivar<F: Field + ?Sized>(f: &F, p: &SparsePoly<F::Elem>, pts: &[Vec<F::Elem>]) -> Vec<F::Elem> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<Vec<u32>, Vec<F::Elem>> = BTreeMap::new();
    for (e, c) in p {
        let coeffs = groups.entry(e[1..].to_vec()).or_default();
        let k = e[0] as usize;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, f.zero());
        }
        coeffs[k] = f.add(&coeffs[k], c);
    }
    let xs: Vec<F::Elem> = pts.iter().map(|q| q[0].clone()).collect();
    let tree = SubproductTree::new(f, &xs);
    let mut out = vec![f.zero(); pts.len()];
    for (rest, coeffs) in groups {
        let vals = tree.eval(f, &trim(f, coeffs));
        for (i, q) in pts.iter().enumerate() {
            let mut m = vals[i].clone();
            for (x, &d) in q[1..].iter().zip(&rest) {
                for _ in 0..d {
                    m = f.mul(&m, x);
                }
            }
            out[i] = f.add(&out[i], &m);
        }
        ops::tick(pts.len() as u64 * (1 + rest.iter().sum::<u32>() as u64));
    }
    out
}
