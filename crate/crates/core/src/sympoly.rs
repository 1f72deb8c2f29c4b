//! Small exact multivariate polynomials, the closed-form wedge integrals
//! built from them, and polygon integration as a signed sum of wedges.
//!
//! For lines `L: y = y_l + s_l x` (higher slope) and `U: y = y_u + s_u x`
//! meeting at `x_p = -(y_u - y_l)/(s_u - s_l)`,
//!
//! ```text
//! ∫_0^{x_p} ∫_{y_l+s_l x}^{y_u+s_u x} x^i y^j dy dx = P_ij(y_l, y_u, s_l, s_u) / (s_u - s_l)^(i+j+1)
//! ```
//!
//! `P_ij` is derived here from the x-antiderivative `Q_ij(u, v, x)` of
//! `x^i (u + v x)^j`, and checked to have zero remainder when the cleared
//! numerator is divided by `s_u - s_l`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::ops;
use crate::scalar::{int, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The polynomial `x_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        MPoly::monomial(e, Scalar::one())
    }

    pub fn monomial(exps: Vec<u32>, c: Scalar) -> Self {
        let mut p = MPoly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Scalar)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Scalar) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, k: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[k]).max()
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Scalar) -> MPoly {
        if k.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut r = MPoly::constant(self.nvars, Scalar::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self, k: usize) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                r.add_term(e2, c * int(e[k] as i64));
            }
        }
        r
    }

    /// Substitutes `x_k := repl`; `repl` must live in the same variable set.
    pub fn substitute(&self, k: usize, repl: &MPoly) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        let mut powers: Vec<MPoly> = vec![MPoly::constant(self.nvars, Scalar::one())];
        for (e, c) in &self.terms {
            while powers.len() <= e[k] as usize {
                let next = powers.last().unwrap().mul(repl);
                powers.push(next);
            }
            let mut rest = e.clone();
            rest[k] = 0;
            r = r.add(&powers[e[k] as usize].mul(&MPoly::monomial(rest, c.clone())));
        }
        r
    }

    /// Re-expresses the polynomial in a different variable set: variable
    /// `i` of `self` becomes `map[i]` (a polynomial over `nvars` variables).
    pub fn compose(&self, nvars: usize, map: &[MPoly]) -> MPoly {
        assert_eq!(map.len(), self.nvars);
        let mut r = MPoly::zero(nvars);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(nvars, c.clone());
            for (i, &d) in e.iter().enumerate() {
                if d > 0 {
                    t = t.mul(&map[i].pow(d));
                }
            }
            r = r.add(&t);
        }
        r
    }

    pub fn eval(&self, at: &[Scalar]) -> Scalar {
        assert_eq!(at.len(), self.nvars);
        let mut acc = Scalar::zero();
        let mut mults = 0u64;
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &d) in at.iter().zip(e) {
                for _ in 0..d {
                    t *= x;
                    mults += 1;
                }
            }
            acc += t;
        }
        ops::tick(mults + self.terms.len() as u64);
        acc
    }

    /// Exact quotient by `(x_k - r)` where `r` does not involve `x_k`.
    /// Returns `None` if the remainder is nonzero.
    pub fn div_linear(&self, k: usize, r: &MPoly) -> Option<MPoly> {
        assert_eq!(r.degree_in(k).unwrap_or(0), 0);
        let deg = match self.degree_in(k) {
            None => return Some(MPoly::zero(self.nvars)),
            Some(d) => d,
        };
        // coefficients c_d (polys without x_k), highest first
        let mut coeffs: Vec<MPoly> = vec![MPoly::zero(self.nvars); deg as usize + 1];
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[k] = 0;
            coeffs[e[k] as usize].add_term(rest, c.clone());
        }
        // synthetic division: q_{d-1} = c_d, q_{i-1} = c_i + r*q_i
        let mut q = vec![MPoly::zero(self.nvars); deg as usize];
        let mut carry = MPoly::zero(self.nvars);
        for i in (1..=deg as usize).rev() {
            carry = coeffs[i].add(&r.mul(&carry));
            q[i - 1] = carry.clone();
        }
        let rem = coeffs[0].add(&r.mul(&carry));
        if !rem.is_zero() {
            return None;
        }
        let xk = MPoly::var(self.nvars, k);
        let mut out = MPoly::zero(self.nvars);
        for (i, qi) in q.into_iter().enumerate() {
            out = out.add(&qi.mul(&xk.pow(i as u32)));
        }
        Some(out)
    }
}

fn binom(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Variables of `Q_ij`: (u, v, x).
pub const Q_U: usize = 0;
pub const Q_V: usize = 1;
pub const Q_X: usize = 2;

/// The unique `Q` with `∂Q/∂x = x^i (u + v x)^j` and `Q(u, v, 0) = 0`.
pub fn antiderivative_q(i: u32, j: u32) -> MPoly {
    let mut q = MPoly::zero(3);
    for t in 0..=j {
        let c = Scalar::new(binom(j, t), BigInt::from(i + t + 1));
        q.add_term(vec![j - t, t, i + t + 1], c);
    }
    q
}

/// Variables of `P_ij`: (y_l, y_u, s_l, s_u).
pub const P_YL: usize = 0;
pub const P_YU: usize = 1;
pub const P_SL: usize = 2;
pub const P_SU: usize = 3;

/// Numerator `P_ij` of the wedge monomial integral over `(s_u - s_l)^(i+j+1)`.
pub fn wedge_numerator_p(i: u32, j: u32) -> MPoly {
    let q = antiderivative_q(i, j + 1);
    let v = |k| MPoly::var(4, k);
    // Q(y_u, s_u, x) - Q(y_l, s_l, x) in variables (y_l, y_u, s_l, s_u, x)
    let five = |k: usize| MPoly::var(5, k);
    let upper = q.compose(5, &[five(P_YU), five(P_SU), five(4)]);
    let lower = q.compose(5, &[five(P_YL), five(P_SL), five(4)]);
    let diff = upper.sub(&lower).scale(&Scalar::new(BigInt::one(), BigInt::from(j + 1)));

    // x_p = -(y_u - y_l)/(s_u - s_l); a term c x^k becomes
    // c (-(y_u - y_l))^k (s_u - s_l)^(n - k) after clearing (s_u - s_l)^n
    let n = i + j + 2;
    let dy_neg = v(P_YL).sub(&v(P_YU));
    let ds = v(P_SU).sub(&v(P_SL));
    let mut num = MPoly::zero(4);
    for (e, c) in diff.terms() {
        let k = e[4];
        assert!(k <= n);
        let base = MPoly::monomial(e[..4].to_vec(), c.clone());
        num = num.add(&base.mul(&dy_neg.pow(k)).mul(&ds.pow(n - k)));
    }
    // divide once by (s_u - s_l), i.e. by (s_u - r) with r = s_l
    num.div_linear(P_SU, &v(P_SL))
        .expect("cleared wedge numerator must be divisible by (s_u - s_l)")
}

/// Highest `i + j` for which `P_ij` is cached.
pub const CACHED_DEGREE: u32 = 2;

fn p_cache() -> &'static Vec<Vec<MPoly>> {
    static CACHE: OnceLock<Vec<Vec<MPoly>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (0..=CACHED_DEGREE)
            .map(|i| (0..=CACHED_DEGREE - i).map(|j| wedge_numerator_p(i, j)).collect())
            .collect()
    })
}

/// Cached `P_ij` for `i + j <= 2`; derived on demand otherwise.
pub fn p_ij(i: u32, j: u32) -> std::borrow::Cow<'static, MPoly> {
    if i + j <= CACHED_DEGREE {
        std::borrow::Cow::Borrowed(&p_cache()[i as usize][j as usize])
    } else {
        std::borrow::Cow::Owned(wedge_numerator_p(i, j))
    }
}

/// The pair of lines bounding a corner wedge. `lower` has the higher slope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeLines {
    pub y_l: Scalar,
    pub s_l: Scalar,
    pub y_u: Scalar,
    pub s_u: Scalar,
}

impl WedgeLines {
    pub fn new(y_l: Scalar, s_l: Scalar, y_u: Scalar, s_u: Scalar) -> Self {
        WedgeLines { y_l, s_l, y_u, s_u }
    }

    /// Lines through `p` with the given slopes, ordered so that `L` is steeper.
    pub fn through(p: &Point, s1: &Scalar, s2: &Scalar) -> Self {
        let (sl, su) = if s1 > s2 { (s1, s2) } else { (s2, s1) };
        WedgeLines::new(&p.y - sl * &p.x, sl.clone(), &p.y - su * &p.x, su.clone())
    }

    pub fn swapped(&self) -> Self {
        WedgeLines::new(self.y_u.clone(), self.s_u.clone(), self.y_l.clone(), self.s_l.clone())
    }
}

/// `∫_0^{x_p} ∫_{y_l+s_l x}^{y_u+s_u x} x^i y^j dy dx`, exactly.
pub fn wedge_integral_monomial(w: &WedgeLines, i: u32, j: u32) -> Result<Scalar> {
    let ds = &w.s_u - &w.s_l;
    if ds.is_zero() {
        return Err(Error::ParallelLines);
    }
    let p = p_ij(i, j);
    let num = p.eval(&[w.y_l.clone(), w.y_u.clone(), w.s_l.clone(), w.s_u.clone()]);
    ops::tick(i as u64 + j as u64 + 2);
    Ok(num / num_traits::pow(ds, (i + j + 1) as usize))
}

/// Wedge integral of a quadratic given as coefficients of [1, x, y, x², xy, y²].
pub fn wedge_integral_quadratic(w: &WedgeLines, h: &[Scalar; 6]) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    for (c, &(i, j)) in h.iter().zip(crate::geom::QUADRATIC_MONOMIALS.iter()) {
        if !c.is_zero() {
            acc += c * wedge_integral_monomial(w, i, j)?;
            ops::tick(2);
        }
    }
    Ok(acc)
}

/// Sign of `p.y - (intercept + slope * p.x)`.
fn side(p: &Point, intercept: &Scalar, slope: &Scalar) -> i32 {
    let d = &p.y - intercept - slope * &p.x;
    if d.is_positive() {
        1
    } else if d.is_negative() {
        -1
    } else {
        0
    }
}

/// Corner sign: +1 when `inside` lies between the two lines, -1 when it is
/// above both or below both.
pub fn corner_sign(w: &WedgeLines, inside: &Point) -> i32 {
    -side(inside, &w.y_l, &w.s_l) * side(inside, &w.y_u, &w.s_u)
}

/// `∬_polygon h dx dy` for `h` over variables (x, y), as a sum over vertices
/// of signed corner-wedge integrals. Vertical edges are removed internally by
/// an area-preserving shear applied to both polygon and integrand.
pub fn integrate_over_convex_polygon(verts: &[Point], h: &MPoly) -> Result<Scalar> {
    assert_eq!(h.nvars(), 2);
    let k = verts.len();
    if k < 3 {
        return Err(Error::NotConvex);
    }
    for t in 0..k {
        let (a, b, c) = (&verts[t], &verts[(t + 1) % k], &verts[(t + 2) % k]);
        if crate::geom::orient(a, b, c) != std::cmp::Ordering::Greater {
            return Err(Error::NotConvex);
        }
    }
    if !has_vertical_edge(verts) {
        return integrate_nonvertical(verts, h);
    }
    // shear x' = x + l*y with l avoiding every edge direction
    let mut l = Scalar::new(BigInt::one(), BigInt::from(3));
    while has_vertical_edge(&shear(verts, &l)) {
        l += Scalar::new(BigInt::one(), BigInt::from(7));
    }
    // h'(x', y) = h(x' - l*y, y)
    let x_back = MPoly::var(2, 0).sub(&MPoly::var(2, 1).scale(&l));
    let h2 = h.compose(2, &[x_back, MPoly::var(2, 1)]);
    integrate_nonvertical(&shear(verts, &l), &h2)
}

fn has_vertical_edge(v: &[Point]) -> bool {
    (0..v.len()).any(|t| v[t].x == v[(t + 1) % v.len()].x)
}

fn shear(v: &[Point], l: &Scalar) -> Vec<Point> {
    v.iter().map(|p| Point::new(&p.x + l * &p.y, p.y.clone())).collect()
}

fn integrate_nonvertical(verts: &[Point], h: &MPoly) -> Result<Scalar> {
    let k = verts.len();
    let n = int(k as i64);
    let centroid = Point::new(
        verts.iter().fold(Scalar::zero(), |a, p| a + &p.x) / &n,
        verts.iter().fold(Scalar::zero(), |a, p| a + &p.y) / &n,
    );
    let slope = |a: &Point, b: &Point| (&b.y - &a.y) / (&b.x - &a.x);
    let mut total = Scalar::zero();
    for t in 0..k {
        let p = &verts[t];
        let prev = &verts[(t + k - 1) % k];
        let next = &verts[(t + 1) % k];
        let w = WedgeLines::through(p, &slope(prev, p), &slope(p, next));
        let delta = corner_sign(&w, &centroid);
        let mut part = Scalar::zero();
        for (e, c) in h.terms() {
            part += c * wedge_integral_monomial(&w, e[0], e[1])?;
        }
        if delta > 0 {
            total += part;
        } else {
            total -= part;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn xy(i: u32, j: u32) -> MPoly {
        MPoly::monomial(vec![i, j], Scalar::one())
    }

    fn pt(x: Scalar, y: Scalar) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn q_small_cases() {
        assert_eq!(antiderivative_q(0, 0), MPoly::var(3, Q_X));
        let expect = MPoly::monomial(vec![1, 0, 1], Scalar::one()).add(&MPoly::monomial(vec![0, 1, 2], rat(1, 2)));
        assert_eq!(antiderivative_q(0, 1), expect);
    }

    #[test]
    fn q_derivative_identity() {
        let u_vx = MPoly::var(3, Q_U).add(&MPoly::var(3, Q_V).mul(&MPoly::var(3, Q_X)));
        for i in 0..=4 {
            for j in 0..=4 {
                let q = antiderivative_q(i, j);
                let target = MPoly::var(3, Q_X).pow(i).mul(&u_vx.pow(j));
                assert_eq!(q.derivative(Q_X), target, "({i},{j})");
                assert_eq!(q.total_degree(), Some(i + 2 * j + 1));
                assert_eq!(q.coeff(&[0, j, i + j + 1]), Scalar::new(BigInt::one(), BigInt::from(i + j + 1)));
            }
        }
    }

    #[test]
    fn p00_is_minus_half_dy_squared() {
        let dy = MPoly::var(4, P_YU).sub(&MPoly::var(4, P_YL));
        assert_eq!(wedge_numerator_p(0, 0), dy.pow(2).scale(&rat(-1, 2)));
    }

    #[test]
    fn p_degree_bounds() {
        for i in 0..=4 {
            for j in 0..=4 - i {
                let p = wedge_numerator_p(i, j);
                assert!(p.total_degree().unwrap() <= i + 2 * j + 2, "({i},{j})");
            }
        }
        assert_eq!(wedge_numerator_p(1, 1).total_degree(), Some(5));
    }

    #[test]
    fn wedge_examples() {
        // L: y = x, U: y = 1
        let w = WedgeLines::new(int(0), int(1), int(1), int(0));
        assert_eq!(wedge_integral_monomial(&w, 0, 0).unwrap(), rat(1, 2));
        assert_eq!(wedge_integral_monomial(&w, 0, 1).unwrap(), rat(1, 3));
        let par = WedgeLines::new(int(0), int(1), int(1), int(1));
        assert!(matches!(wedge_integral_monomial(&par, 0, 0), Err(Error::ParallelLines)));
    }

    fn upoly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut r = vec![Scalar::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                r[i + j] += x * y;
            }
        }
        r
    }

    /// `∫_0^{x_p} ∫_{L(x)}^{U(x)} x^i y^j dy dx` by expanding the inner
    /// antiderivative as a polynomial in x.
    fn iterated(w: &WedgeLines, i: u32, j: u32) -> Scalar {
        let xp = -(&w.y_u - &w.y_l) / (&w.s_u - &w.s_l);
        let pow = |y: &Scalar, s: &Scalar| {
            (0..=j).fold(vec![Scalar::one()], |acc, _| upoly_mul(&acc, &[y.clone(), s.clone()]))
        };
        let (hi, lo) = (pow(&w.y_u, &w.s_u), pow(&w.y_l, &w.s_l));
        let mut total = Scalar::zero();
        for (k, (a, b)) in hi.iter().zip(&lo).enumerate() {
            let e = k as u32 + i + 1;
            total += (a - b) * num_traits::pow(xp.clone(), e as usize) / Scalar::from_integer(BigInt::from(e));
        }
        total / Scalar::from_integer(BigInt::from(j + 1))
    }

    #[test]
    fn wedge_matches_iterated_integral() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let r = |rng: &mut rand_chacha::ChaCha8Rng| rat(rng.gen_range(-20..=20), rng.gen_range(1..=7));
        for _ in 0..20 {
            let (y_l, y_u, s_l) = (r(&mut rng), r(&mut rng), r(&mut rng));
            let mut s_u = r(&mut rng);
            while s_u == s_l {
                s_u = r(&mut rng);
            }
            let w = WedgeLines::new(y_l, s_l, y_u, s_u);
            for i in 0..=2 {
                for j in 0..=2 - i {
                    assert_eq!(wedge_integral_monomial(&w, i, j).unwrap(), iterated(&w, i, j), "{w:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn wedge_sign_flips_on_swap() {
        let w = WedgeLines::new(rat(1, 3), int(2), int(-1), rat(-1, 2));
        for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let a = wedge_integral_monomial(&w, i, j).unwrap();
            let b = wedge_integral_monomial(&w.swapped(), i, j).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn unit_square_shifted() {
        let sq = [pt(int(1), int(0)), pt(int(2), int(0)), pt(int(2), int(1)), pt(int(1), int(1))];
        assert_eq!(integrate_over_convex_polygon(&sq, &xy(0, 0)).unwrap(), int(1));
        assert_eq!(integrate_over_convex_polygon(&sq, &xy(1, 0)).unwrap(), rat(3, 2));
        assert_eq!(integrate_over_convex_polygon(&sq, &xy(1, 1)).unwrap(), rat(3, 4));
    }

    #[test]
    fn triangle_moments() {
        let t = [pt(int(1), int(0)), pt(int(3), int(1)), pt(int(2), int(2))];
        // area = |cross|/2 = |(2,1)x(1,2)|/2 = 3/2
        assert_eq!(integrate_over_convex_polygon(&t, &xy(0, 0)).unwrap(), rat(3, 2));
        // ∬x = area * centroid_x = 3/2 * 2 = 3
        assert_eq!(integrate_over_convex_polygon(&t, &xy(1, 0)).unwrap(), int(3));
    }

    #[test]
    fn non_convex_rejected() {
        let cw = [pt(int(1), int(0)), pt(int(1), int(1)), pt(int(2), int(0))];
        assert!(matches!(integrate_over_convex_polygon(&cw, &xy(0, 0)), Err(Error::NotConvex)));
    }
}
