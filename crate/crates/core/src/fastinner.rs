//! Fast exact ∬fg: Σ_v from the angular vertex merge, Σ_e from a clique
//! cover of the interior-edge crossings, evaluated per prime by fraction
//! summation plus multipoint evaluation and recovered by CRT.

use std::sync::OnceLock;

use num_traits::Zero;
use rayon::prelude::*;

use crate::cliques::{build_clique_cover, Clique, CliqueFamily, Segment};
use crate::error::{Error, Result};
use crate::fastpoly::{invert_all, poly_add, poly_mul, sum_fractions_multi, Field, SubproductTree};
use crate::field::{crt_reconstruct, PrimeBasket};
use crate::geom::{build_edge_data, normalize_pair, validate_pair, EdgeTable, Tin};
use crate::integrate::vertex_term_sum_with;
use crate::locate::batch_locate_with;
use crate::ops;
use crate::scalar::Scalar;
use crate::sympoly::{p_ij, P_SL, P_SU, P_YL, P_YU};

/// How a clique's Σ_e contribution is expanded before fraction summation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SigmaForm {
    /// Per crossing `κ₁κ₂(y₁−y₂)⁴ / (24|s₁−s₂|)`, binomially expanded in the
    /// red intercept: five fraction sums of order one.
    #[default]
    Factored,
    /// `−∬(f_u−f_l)(g_u−g_l)` over the wedge, split into nine separable
    /// monomial terms.
    Difference,
    /// The four cell products, 36 separable monomial terms.
    Literal,
}

impl std::str::FromStr for SigmaForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factored" => Ok(SigmaForm::Factored),
            "difference" => Ok(SigmaForm::Difference),
            "literal" => Ok(SigmaForm::Literal),
            _ => Err(Error::InvalidParameter(format!("unknown form {s:?}"))),
        }
    }
}

/// Per-edge values of one color in some field: intercept, slope, jump
/// coefficient κ, and (for the literal form) the upper and lower
/// interpolants as `[a_u, b_u, c_u, a_l, b_l, c_l]`.
#[derive(Clone, Debug, Default)]
pub struct EdgeVals<E> {
    pub y: Vec<E>,
    pub s: Vec<E>,
    pub kappa: Vec<E>,
    pub funcs: Vec<[E; 6]>,
}

impl<E: Clone> EdgeVals<E> {
    /// Maps rational edge data into a field; the interpolants only when
    /// `with_funcs` is set.
    pub fn convert<F: Field<Elem = E> + ?Sized>(f: &F, q: &EdgeVals<Scalar>, with_funcs: bool) -> Option<Self> {
        let mut qs: Vec<&Scalar> = Vec::with_capacity(q.y.len() * if with_funcs { 9 } else { 3 });
        for k in 0..q.y.len() {
            qs.extend([&q.y[k], &q.s[k], &q.kappa[k]]);
            if with_funcs {
                qs.extend(q.funcs[k].iter());
            }
        }
        let vals = f.from_scalars(&qs)?;
        ops::tick(qs.len() as u64);
        let stride = if with_funcs { 9 } else { 3 };
        let mut v = EdgeVals { y: Vec::new(), s: Vec::new(), kappa: Vec::new(), funcs: Vec::new() };
        for c in vals.chunks(stride) {
            v.y.push(c[0].clone());
            v.s.push(c[1].clone());
            v.kappa.push(c[2].clone());
            if with_funcs {
                v.funcs.push(std::array::from_fn(|k| c[3 + k].clone()));
            }
        }
        Some(v)
    }
}

impl EdgeVals<Scalar> {
    /// Exact data of the edges `ids` of `et`.
    pub fn from_edges(et: &EdgeTable, ids: &[usize], with_funcs: bool) -> Self {
        let mut v = EdgeVals::default();
        for &i in ids {
            let e = &et.edges[i];
            v.y.push(e.intercept.clone());
            v.s.push(e.slope.clone());
            v.kappa.push(e.kappa());
            if with_funcs {
                let (u, l) = (&e.upper, &e.lower);
                v.funcs.push([&u.a, &u.b, &u.c, &l.a, &l.b, &l.c].map(|c| c.clone()));
            }
        }
        v
    }
}

/// `P_{i,j}` written as a polynomial in the red edge's (slope X, intercept Y)
/// with coefficients monomial in the blue edge's (intercept, slope).
struct Expansion {
    /// Distinct (dX, dY).
    slots: Vec<(u32, u32)>,
    /// (slot, blue y exponent, blue s exponent, coefficient)
    terms: Vec<(usize, u32, u32, Scalar)>,
}

fn expansion(i: u32, j: u32, red_steeper: bool) -> &'static Expansion {
    static TABLE: OnceLock<Vec<Expansion>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for steeper in [false, true] {
                    let mut e = Expansion { slots: Vec::new(), terms: Vec::new() };
                    if i + j <= 2 {
                        // the steeper line is the wedge's L
                        let (ry, rs, by, bs) =
                            if steeper { (P_YL, P_SL, P_YU, P_SU) } else { (P_YU, P_SU, P_YL, P_SL) };
                        for (ex, c) in p_ij(i, j).terms() {
                            let slot = (ex[rs], ex[ry]);
                            let k = match e.slots.iter().position(|s| *s == slot) {
                                Some(k) => k,
                                None => {
                                    e.slots.push(slot);
                                    e.slots.len() - 1
                                }
                            };
                            e.terms.push((k, ex[by], ex[bs], c.clone()));
                        }
                    }
                    out.push(e);
                }
            }
        }
        out
    });
    &table[((i * 3 + j) * 2 + red_steeper as u32) as usize]
}

/// Field constants used by [`clique_sigma`], converted once per field.
pub struct SigmaContext<'a, F: Field + ?Sized> {
    pub field: &'a F,
    pub form: SigmaForm,
    /// Cliques with at most this many pairs are summed directly.
    pub direct_pairs: usize,
    inv24: F::Elem,
    binom4: [F::Elem; 5],
    /// Expansion coefficients, indexed like [`expansion`].
    coeffs: Vec<Vec<F::Elem>>,
}

impl<'a, F: Field + ?Sized> SigmaContext<'a, F> {
    pub fn new(field: &'a F, form: SigmaForm, direct_pairs: usize) -> Option<Self> {
        let inv24 = field.inv(&field.from_i64(24))?;
        let binom4 = [1, 4, 6, 4, 1].map(|b| field.from_i64(b));
        let mut coeffs = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for steeper in [false, true] {
                    let e = expansion(i, j, steeper);
                    coeffs.push(e.terms.iter().map(|t| field.from_scalar(&t.3)).collect::<Option<Vec<_>>>()?);
                }
            }
        }
        Some(SigmaContext { field, form, direct_pairs, inv24, binom4, coeffs })
    }
}

const MON: [(u32, u32); 3] = [(0, 0), (1, 0), (0, 1)];

/// One separable grid term: `sign * v(r) * w(b) * W(x^i y^j)`.
struct GridTerm<E> {
    negative: bool,
    i: u32,
    j: u32,
    v: Vec<E>,
    w: Vec<E>,
}

fn grid_terms<F: Field + ?Sized>(
    f: &F,
    form: SigmaForm,
    red: &EdgeVals<F::Elem>,
    rs: &[usize],
    blue: &EdgeVals<F::Elem>,
    bs: &[usize],
) -> Vec<GridTerm<F::Elem>> {
    // jump = κ (y_line - c - s x) = [-κc, -κs, κ] over (1, x, y)
    let jump = |e: &EdgeVals<F::Elem>, k: usize, m: usize| match m {
        0 => f.neg(&f.mul(&e.kappa[k], &e.y[k])),
        1 => f.neg(&f.mul(&e.kappa[k], &e.s[k])),
        _ => e.kappa[k].clone(),
    };
    let mut out = Vec::new();
    match form {
        SigmaForm::Factored => unreachable!("factored form has its own path"),
        SigmaForm::Difference => {
            for m1 in 0..3 {
                for m2 in 0..3 {
                    out.push(GridTerm {
                        negative: true,
                        i: MON[m1].0 + MON[m2].0,
                        j: MON[m1].1 + MON[m2].1,
                        v: rs.iter().map(|&r| jump(red, r, m1)).collect(),
                        w: bs.iter().map(|&b| jump(blue, b, m2)).collect(),
                    });
                }
            }
            ops::tick(4 * (rs.len() + bs.len()) as u64);
        }
        SigmaForm::Literal => {
            // (red side offset, blue side offset, negative): u = 0, l = 3
            for (ro, bo, negative) in [(0, 3, false), (3, 0, false), (0, 0, true), (3, 3, true)] {
                for m1 in 0..3 {
                    for m2 in 0..3 {
                        out.push(GridTerm {
                            negative,
                            i: MON[m1].0 + MON[m2].0,
                            j: MON[m1].1 + MON[m2].1,
                            v: rs.iter().map(|&r| red.funcs[r][ro + m1].clone()).collect(),
                            w: bs.iter().map(|&b| blue.funcs[b][bo + m2].clone()).collect(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Σ_e contribution (mod the context's field) of the crossings in one
/// clique. `None` when a slope difference or the constant 24 vanishes in
/// the field.
pub fn clique_sigma<F: Field + ?Sized>(
    ctx: &SigmaContext<F>,
    red: &EdgeVals<F::Elem>,
    blue: &EdgeVals<F::Elem>,
    clique: &Clique,
) -> Option<F::Elem> {
    let f = ctx.field;
    let (rs, bs) = (&clique.red, &clique.blue);
    if rs.is_empty() || bs.is_empty() {
        return Some(f.zero());
    }
    let red_steeper = !clique.red_lower_slope;
    if rs.len() * bs.len() <= ctx.direct_pairs {
        return direct_sigma(ctx, red, blue, clique);
    }
    let pts: Vec<F::Elem> = rs.iter().map(|&r| red.s[r].clone()).collect();
    let tree = SubproductTree::new(f, &pts);
    let bv: Vec<F::Elem> = bs.iter().map(|&b| blue.s[b].clone()).collect();

    if ctx.form == SigmaForm::Factored {
        // Σ_b κ_b (Y - y_b)^4 / (X - s_b) = Σ_k C(4,k) Y^k Σ_b κ_b (-y_b)^{4-k} / (X - s_b)
        let us: Vec<Vec<F::Elem>> = bs
            .iter()
            .map(|&b| {
                let ny = f.neg(&blue.y[b]);
                let mut pw = vec![f.one(); 5];
                for k in 1..5 {
                    pw[k] = f.mul(&pw[k - 1], &ny);
                }
                (0..5).map(|k| f.mul(&f.mul(&ctx.binom4[k], &blue.kappa[b]), &pw[4 - k])).collect()
            })
            .collect();
        ops::tick(13 * bs.len() as u64);
        let fs = sum_fractions_multi(f, &us, &bv, 1);
        let mut dens = tree.eval(f, &fs.den);
        if !invert_all(f, &mut dens) {
            return None;
        }
        let nvals: Vec<Vec<F::Elem>> = fs.nums.iter().map(|n| tree.eval(f, n)).collect();
        let mut total = f.zero();
        for (k, &r) in rs.iter().enumerate() {
            let y = &red.y[r];
            let mut acc = nvals[4][k].clone();
            for d in (0..4).rev() {
                acc = f.add(&f.mul(&acc, y), &nvals[d][k]);
            }
            total = f.add(&total, &f.mul(&f.mul(&acc, &dens[k]), &red.kappa[r]));
        }
        ops::tick(12 * rs.len() as u64);
        let v = f.mul(&total, &ctx.inv24);
        return Some(if red_steeper { v } else { f.neg(&v) });
    }

    let terms = grid_terms(f, ctx.form, red, rs, blue, bs);
    // per-blue expansion coefficients for every (i, j)
    let mut slot_vals: Vec<Option<Vec<Vec<F::Elem>>>> = vec![None; 9];
    for t in &terms {
        let key = (t.i * 3 + t.j) as usize;
        if slot_vals[key].is_some() {
            continue;
        }
        let e = expansion(t.i, t.j, red_steeper);
        let cs = &ctx.coeffs[key * 2 + red_steeper as usize];
        let vals = bs
            .iter()
            .map(|&b| {
                let mut py = vec![f.one()];
                let mut ps = vec![f.one()];
                for _ in 0..7 {
                    py.push(f.mul(py.last().unwrap(), &blue.y[b]));
                    ps.push(f.mul(ps.last().unwrap(), &blue.s[b]));
                }
                let mut v = vec![f.zero(); e.slots.len()];
                for (c, (slot, ey, es, _)) in cs.iter().zip(&e.terms) {
                    let m = f.mul(&f.mul(c, &py[*ey as usize]), &ps[*es as usize]);
                    v[*slot] = f.add(&v[*slot], &m);
                }
                ops::tick(14 + 3 * e.terms.len() as u64);
                v
            })
            .collect();
        slot_vals[key] = Some(vals);
    }

    // D_1(X) = Π (X - s_b) at the red slopes; D_d = D_1^d
    let mut den = vec![f.one()];
    for s in &bv {
        den = poly_mul(f, &den, &[f.neg(s), f.one()]);
    }
    let mut d1 = tree.eval(f, &den);
    if !invert_all(f, &mut d1) {
        return None;
    }
    let mut total = f.zero();
    for d in 1..=3u32 {
        let group: Vec<&GridTerm<F::Elem>> = terms.iter().filter(|t| t.i + t.j + 1 == d).collect();
        if group.is_empty() {
            continue;
        }
        // numerator columns: (term, slot)
        let us: Vec<Vec<F::Elem>> = (0..bs.len())
            .map(|bi| {
                let mut row = Vec::new();
                for t in &group {
                    let sv = &slot_vals[(t.i * 3 + t.j) as usize].as_ref().unwrap()[bi];
                    row.extend(sv.iter().map(|c| f.mul(c, &t.w[bi])));
                }
                row
            })
            .collect();
        let fs = sum_fractions_multi(f, &us, &bv, d);
        let mut col = 0;
        for t in &group {
            let e = expansion(t.i, t.j, red_steeper);
            // fold X^dX into the numerators sharing each dY
            let max_dy = e.slots.iter().map(|s| s.1).max().unwrap_or(0);
            let mut by_dy: Vec<Vec<F::Elem>> = vec![Vec::new(); max_dy as usize + 1];
            for (k, &(dx, dy)) in e.slots.iter().enumerate() {
                let n = &fs.nums[col + k];
                if n.is_empty() {
                    continue;
                }
                let mut shifted = vec![f.zero(); dx as usize];
                shifted.extend(n.iter().cloned());
                by_dy[dy as usize] = poly_add(f, &by_dy[dy as usize], &shifted);
            }
            col += e.slots.len();
            let vals: Vec<Vec<F::Elem>> = by_dy.iter().map(|p| tree.eval(f, p)).collect();
            let mut sub = f.zero();
            for (k, &r) in rs.iter().enumerate() {
                let y = &red.y[r];
                let mut acc = vals[max_dy as usize][k].clone();
                for dy in (0..max_dy as usize).rev() {
                    acc = f.add(&f.mul(&acc, y), &vals[dy][k]);
                }
                let mut inv = d1[k].clone();
                for _ in 1..d {
                    inv = f.mul(&inv, &d1[k]);
                }
                sub = f.add(&sub, &f.mul(&f.mul(&acc, &inv), &t.v[k]));
            }
            ops::tick((4 + 2 * max_dy as u64 + d as u64) * rs.len() as u64);
            // (s_U - s_L)^d = (-1)^d (X - s_b)^d when the red line is L
            let flip = t.negative ^ (red_steeper && d % 2 == 1);
            total = if flip { f.sub(&total, &sub) } else { f.add(&total, &sub) };
        }
    }
    Some(total)
}

/// Direct double sum of the per-crossing closed form.
fn direct_sigma<F: Field + ?Sized>(
    ctx: &SigmaContext<F>,
    red: &EdgeVals<F::Elem>,
    blue: &EdgeVals<F::Elem>,
    clique: &Clique,
) -> Option<F::Elem> {
    let f = ctx.field;
    let mut dens = Vec::with_capacity(clique.red.len() * clique.blue.len());
    for &r in &clique.red {
        for &b in &clique.blue {
            dens.push(f.sub(&red.s[r], &blue.s[b]));
        }
    }
    if !invert_all(f, &mut dens) {
        return None;
    }
    let mut total = f.zero();
    let mut k = 0;
    for &r in &clique.red {
        let mut row = f.zero();
        for &b in &clique.blue {
            let dy = f.sub(&red.y[r], &blue.y[b]);
            let dy2 = f.mul(&dy, &dy);
            let t = f.mul(&f.mul(&dy2, &dy2), &blue.kappa[b]);
            row = f.add(&row, &f.mul(&t, &dens[k]));
            k += 1;
        }
        total = f.add(&total, &f.mul(&row, &red.kappa[r]));
    }
    ops::tick(8 * dens.len() as u64 + 2 * clique.red.len() as u64);
    // the closed form divides by |s_r - s_b|
    let v = f.mul(&total, &ctx.inv24);
    Some(if clique.red_lower_slope { f.neg(&v) } else { v })
}

#[derive(Clone, Debug)]
pub struct FastOptions {
    /// Initial prime count; estimated from the input size when `None`.
    pub primes: Option<usize>,
    pub prime_bits: u32,
    pub form: SigmaForm,
    pub direct_pairs: usize,
    /// Run the pairwise validation first (not counted in the op total).
    pub validate: bool,
    pub seed: u64,
}

impl Default for FastOptions {
    fn default() -> Self {
        FastOptions {
            primes: None,
            prime_bits: 62,
            form: SigmaForm::Factored,
            direct_pairs: DIRECT_PAIRS,
            validate: true,
            seed: 0,
        }
    }
}

/// Default clique size (pairs) below which the direct double sum is used.
pub const DIRECT_PAIRS: usize = 64;

#[derive(Clone, Debug)]
pub struct FastReport {
    pub value: Scalar,
    pub sigma_v: Scalar,
    pub sigma_e: Scalar,
    /// Operations on the calling thread: Σ_v, the clique cover and one
    /// prime's Σ_e evaluation.
    pub ops: u64,
    pub cliques: usize,
    pub cover_size: usize,
    pub primes_used: usize,
    pub primes_discarded: usize,
}

/// Normalized pair with everything the Σ_e evaluation needs.
pub struct Prepared {
    pub f: Tin,
    pub g: Tin,
    pub ef: EdgeTable,
    pub eg: EdgeTable,
    pub red: Vec<usize>,
    pub blue: Vec<usize>,
    pub family: CliqueFamily,
    /// Exact red and blue edge data, with interpolants.
    pub red_q: EdgeVals<Scalar>,
    pub blue_q: EdgeVals<Scalar>,
}

/// Interior edges of both TINs as segments, and their clique cover.
pub fn prepare(f: &Tin, g: &Tin, seed: u64) -> Result<Prepared> {
    let (f, g, _) = normalize_pair(f, g, seed)?;
    let ef = build_edge_data(&f)?;
    let eg = build_edge_data(&g)?;
    let red: Vec<usize> = ef.interior_edges().collect();
    let blue: Vec<usize> = eg.interior_edges().collect();
    let segs = |t: &Tin, et: &EdgeTable, ids: &[usize]| -> Result<Vec<Segment>> {
        ids.iter()
            .map(|&i| {
                let (a, b) = et.endpoints(t, i);
                Segment::new(a.clone(), b.clone())
            })
            .collect()
    };
    let family = build_clique_cover(&segs(&f, &ef, &red)?, &segs(&g, &eg, &blue)?)?;
    let red_q = EdgeVals::from_edges(&ef, &red, true);
    let blue_q = EdgeVals::from_edges(&eg, &blue, true);
    Ok(Prepared { f, g, ef, eg, red, blue, family, red_q, blue_q })
}

/// Σ_e modulo the `id`-th prime of `basket`.
pub fn sigma_e_mod(p: &Prepared, basket: &PrimeBasket, id: usize, form: SigmaForm, direct_pairs: usize) -> Result<u64> {
    let f = basket.field(id);
    let bad = || Error::BadPrime(id);
    let funcs = form == SigmaForm::Literal;
    let red = EdgeVals::convert(f, &p.red_q, funcs).ok_or_else(bad)?;
    let blue = EdgeVals::convert(f, &p.blue_q, funcs).ok_or_else(bad)?;
    let ctx = SigmaContext::new(f, form, direct_pairs).ok_or_else(bad)?;
    let mut total = 0u64;
    for c in &p.family.cliques {
        let v = clique_sigma(&ctx, &red, &blue, c).ok_or_else(bad)?;
        total = f.add(total, v);
    }
    Ok(total)
}

/// Σ_e over the rationals, through the same clique machinery.
pub fn sigma_e_rational(p: &Prepared, form: SigmaForm, direct_pairs: usize) -> Result<Scalar> {
    let q = crate::fastpoly::RationalField;
    let (red, blue) = (&p.red_q, &p.blue_q);
    let ctx = SigmaContext::new(&q, form, direct_pairs).expect("rationals");
    let mut total = Scalar::zero();
    for c in &p.family.cliques {
        total += clique_sigma(&ctx, red, blue, c)
            .ok_or_else(|| Error::DegenerateInput("equal slopes inside a clique".into()))?;
    }
    Ok(total)
}

/// Prime count to start with, from the bit size of both inputs.
pub fn initial_prime_count(f: &Tin, g: &Tin, prime_bits: u32) -> usize {
    let bits = (f.bit_size() + g.bit_size()) * 7 / 2 + 4096;
    (bits as usize).div_ceil(prime_bits as usize).max(2) + 1
}

fn thread_pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var("TINCALC_THREADS").ok().and_then(|v| v.parse::<usize>().ok())?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    })
    .as_ref()
}

pub fn inner_product_fast(f: &Tin, g: &Tin) -> Result<Scalar> {
    Ok(inner_product_fast_with(f, g, &FastOptions::default())?.value)
}

pub fn inner_product_fast_with(f: &Tin, g: &Tin, opt: &FastOptions) -> Result<FastReport> {
    if opt.validate {
        let rep = ops::untracked(|| validate_pair(f, g));
        if !rep.passed() {
            let list: Vec<String> = rep.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect();
            return Err(Error::DegenerateInput(list.join("; ")));
        }
    }
    let start = ops::current();
    let p = prepare(f, g, opt.seed)?;
    let f_in_g = batch_locate_with(&p.g, &p.eg, &p.f.points);
    let g_in_f = batch_locate_with(&p.f, &p.ef, &p.g.points);
    let sigma_v = vertex_term_sum_with(&p.f, &p.ef, &p.g, &p.eg, &f_in_g, &g_in_f)?;

    let want = opt.primes.unwrap_or_else(|| initial_prime_count(f, g, opt.prime_bits)).max(2);
    let mut basket = PrimeBasket::new(want, opt.prime_bits)?;
    let mut residues: Vec<(usize, u64)> = Vec::new();
    let mut done = 0;
    let mut counted = false;
    let sigma_e = loop {
        let ids: Vec<usize> = (done..basket.len()).collect();
        let mut results: Vec<(usize, Result<u64>)> = Vec::with_capacity(ids.len());
        let mut rest = &ids[..];
        if !counted {
            if let Some((&first, tail)) = ids.split_first() {
                results.push((first, sigma_e_mod(&p, &basket, first, opt.form, opt.direct_pairs)));
                rest = tail;
                counted = true;
            }
        }
        let run = |id: &usize| (*id, sigma_e_mod(&p, &basket, *id, opt.form, opt.direct_pairs));
        let more: Vec<(usize, Result<u64>)> = ops::untracked(|| match thread_pool() {
            Some(pool) => pool.install(|| rest.par_iter().map(run).collect()),
            None => rest.par_iter().map(run).collect(),
        });
        results.extend(more);
        for (id, r) in results {
            match r {
                Ok(v) => residues.push((id, v)),
                Err(Error::BadPrime(_)) => basket.discard(id, "slope difference or denominator vanishes"),
                Err(e) => return Err(e),
            }
        }
        done = basket.len();
        match crt_reconstruct(&residues, &basket) {
            Ok(q) => break q,
            Err(Error::InsufficientPrimes) => basket.grow_to(2 * basket.len())?,
            Err(e) => return Err(e),
        }
    };
    let ops_used = ops::current().wrapping_sub(start);
    Ok(FastReport {
        value: &sigma_v + &sigma_e,
        sigma_v,
        sigma_e,
        ops: ops_used,
        cliques: p.family.len(),
        cover_size: p.family.size(),
        primes_used: residues.len(),
        primes_discarded: basket.len() - basket.good().count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ntt_primes, rat_to_fp, PrimeField};
    use crate::fastpoly::RationalField;
    use crate::geom::{generate_tin, GenParams, Point, Rect};
    use crate::integrate::{crossing_pairs, crossing_term, naive_edge_term_sum, naive_inner_product};
    use crate::scalar::{int, rat};

    fn pt(x: i64, y: i64) -> Point {
        Point::new(int(x), int(y))
    }

    fn square(diag_up: bool, h: impl Fn(i64, i64) -> i64) -> Tin {
        let pts = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let tris = if diag_up { vec![[0, 1, 2], [0, 2, 3]] } else { vec![[0, 1, 3], [1, 2, 3]] };
        Tin::new(
            pts.iter().map(|&(x, y)| pt(x, y)).collect(),
            pts.iter().map(|&(x, y)| int(h(x, y))).collect(),
            tris,
            Rect::unit(),
        )
    }

    fn pair(n: usize, seed: u64) -> (Tin, Tin) {
        (
            generate_tin(&GenParams::new(n, seed)).unwrap(),
            generate_tin(&GenParams::new(n, seed + 1000)).unwrap(),
        )
    }

    #[test]
    fn opposite_diagonals() {
        let f = square(true, |x, _| x);
        let g = square(false, |_, y| y);
        assert_eq!(inner_product_fast(&f, &g).unwrap(), rat(1, 4));
        let one = |t: &Tin| t.map_heights(|_, _| int(1));
        assert_eq!(inner_product_fast(&one(&f), &one(&g)).unwrap(), int(1));
    }

    #[test]
    fn forms_agree_with_naive_per_clique() {
        let (f, g) = pair(40, 3);
        let p = prepare(&f, &g, 0).unwrap();
        let q = RationalField;
        let mut total = Scalar::zero();
        for form in [SigmaForm::Factored, SigmaForm::Difference, SigmaForm::Literal] {
            let (red, blue) = (&p.red_q, &p.blue_q);
            let poly = SigmaContext::new(&q, form, 0).unwrap();
            let direct = SigmaContext::new(&q, form, usize::MAX).unwrap();
            total = Scalar::zero();
            for c in &p.family.cliques {
                let mut expect = Scalar::zero();
                for &r in &c.red {
                    for &b in &c.blue {
                        expect += crossing_term(&p.ef, p.red[r], &p.eg, p.blue[b]).unwrap();
                    }
                }
                assert_eq!(clique_sigma(&poly, red, blue, c).unwrap(), expect, "{form:?}");
                assert_eq!(clique_sigma(&direct, red, blue, c).unwrap(), expect);
                total += expect;
            }
        }
        assert_eq!(total, naive_edge_term_sum(&p.f, &p.g).unwrap());
    }

    #[test]
    fn forms_agree_mod_p_on_a_large_clique() {
        // 20 red lines of slope in [2, 3), 20 blue of slope in [-3, -2): all cross
        let f = PrimeField::new(ntt_primes(62, 1).unwrap()[0]);
        let mut red = EdgeVals::default();
        let mut blue = EdgeVals::default();
        let mut red_q = EdgeVals::default();
        let mut blue_q = EdgeVals::default();
        for k in 0..20i64 {
            for (vals, q, y, s, kap) in [
                (&mut red, &mut red_q, rat(k, 7), rat(2 * 20 + k, 20), rat(3 - k, 5)),
                (&mut blue, &mut blue_q, rat(50 + k, 3), rat(-3 * 20 + k, 20), rat(k + 1, 2)),
            ] {
                let fn6 = [rat(k, 3), rat(1, k + 2), int(k), rat(-k, 5), int(2), rat(k, 11)];
                vals.y.push(rat_to_fp(&y, &f, 0).unwrap());
                vals.s.push(rat_to_fp(&s, &f, 0).unwrap());
                vals.kappa.push(rat_to_fp(&kap, &f, 0).unwrap());
                vals.funcs.push(fn6.clone().map(|c| rat_to_fp(&c, &f, 0).unwrap()));
                q.y.push(y);
                q.s.push(s);
                q.kappa.push(kap);
                q.funcs.push(fn6);
            }
        }
        let c = Clique { red: (0..20).collect(), blue: (0..20).collect(), red_lower_slope: false };
        let mut seen = Vec::new();
        for form in [SigmaForm::Factored, SigmaForm::Difference] {
            let ctx = SigmaContext::new(&f, form, 0).unwrap();
            seen.push(clique_sigma(&ctx, &red, &blue, &c).unwrap());
        }
        let direct = SigmaContext::new(&f, SigmaForm::Factored, usize::MAX).unwrap();
        seen.push(clique_sigma(&direct, &red, &blue, &c).unwrap());
        let exact = clique_sigma(&SigmaContext::new(&RationalField, SigmaForm::Difference, 0).unwrap(), &red_q, &blue_q, &c)
            .unwrap();
        seen.push(rat_to_fp(&exact, &f, 0).unwrap());
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "{seen:?}");
        // the literal form with arbitrary funcs: poly path equals its own rational value
        let lit = clique_sigma(&SigmaContext::new(&f, SigmaForm::Literal, 0).unwrap(), &red, &blue, &c).unwrap();
        let lit_q = clique_sigma(&SigmaContext::new(&RationalField, SigmaForm::Literal, 0).unwrap(), &red_q, &blue_q, &c)
            .unwrap();
        assert_eq!(lit, rat_to_fp(&lit_q, &f, 0).unwrap());
        let empty = Clique { red: vec![], blue: vec![0], red_lower_slope: true };
        assert_eq!(clique_sigma(&direct, &red, &blue, &empty), Some(0));
    }

    #[test]
    fn single_pair_clique_matches_crossing_term() {
        let f = square(true, |x, y| 3 * x * y + x);
        let g = square(false, |x, y| x * x - 2 * y);
        let p = prepare(&f, &g, 5).unwrap();
        let pairs = crossing_pairs(&p.f, &p.ef, &p.g, &p.eg).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(p.family.len(), 1);
        let basket = PrimeBasket::new(1, 62).unwrap();
        let expect = crossing_term(&p.ef, pairs[0].0, &p.eg, pairs[0].1).unwrap();
        for form in [SigmaForm::Factored, SigmaForm::Difference, SigmaForm::Literal] {
            for direct in [0, 1] {
                let got = sigma_e_mod(&p, &basket, 0, form, direct).unwrap();
                assert_eq!(got, rat_to_fp(&expect, basket.field(0), 0).unwrap());
            }
        }
    }

    #[test]
    fn random_pairs_match_naive() {
        for (n, seed) in [(16, 1), (32, 2), (64, 3)] {
            let (f, g) = pair(n, seed);
            let rep = inner_product_fast_with(&f, &g, &FastOptions::default()).unwrap();
            assert_eq!(rep.value, naive_inner_product(&f, &g).unwrap());
            let p = prepare(&f, &g, 0).unwrap();
            assert_eq!(sigma_e_rational(&p, SigmaForm::Factored, 0).unwrap(), rep.sigma_e);
        }
    }

    #[test]
    fn prime_choice_does_not_matter() {
        let (f, g) = pair(32, 9);
        let a = inner_product_fast_with(&f, &g, &FastOptions { primes: Some(2), ..Default::default() }).unwrap();
        let b = inner_product_fast_with(&f, &g, &FastOptions { primes: Some(40), prime_bits: 50, ..Default::default() })
            .unwrap();
        assert_eq!(a.sigma_e, b.sigma_e);
        assert!(a.primes_used > 2);
    }

    #[test]
    fn rejects_invalid_pairs() {
        let f = square(true, |x, _| x);
        assert!(matches!(inner_product_fast(&f, &f), Err(Error::DegenerateInput(_))));
    }
}
