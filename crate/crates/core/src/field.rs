//! Word-size NTT-friendly prime fields (Montgomery form), prime baskets,
//! CRT combination and rational reconstruction.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// 2-adic order requested for primes of the given size.
pub fn two_adicity_for(bits: u32) -> u32 {
    24.min(bits.saturating_sub(7))
}

/// The first `count` primes `p = c * 2^k + 1 < 2^bits`, largest first.
pub fn ntt_primes(bits: u32, count: usize) -> Result<Vec<u64>> {
    if !(16..=62).contains(&bits) {
        return Err(Error::InvalidParameter(format!("prime size must be 16..=62 bits, got {bits}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, (u64, Vec<u64>)>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    let k = two_adicity_for(bits);
    let entry = cache.entry(bits).or_insert_with(|| (((1u64 << bits) - 1) >> k, Vec::new()));
    while entry.1.len() < count {
        let c = entry.0;
        if c == 0 {
            return Err(Error::InvalidParameter(format!("not enough {bits}-bit NTT primes")));
        }
        entry.0 -= 1;
        let p = (c << k) + 1;
        if p < (1u64 << bits) && is_prime_u64(p) {
            entry.1.push(p);
        }
    }
    Ok(entry.1[..count].to_vec())
}

/// Arithmetic modulo an odd prime `p < 2^62`. Elements are kept in
/// Montgomery form as plain `u64` values in `[0, p)`.
#[derive(Clone, Debug)]
pub struct PrimeField {
    p: u64,
    /// -p^{-1} mod 2^64
    nprime: u64,
    r2: u64,
    one: u64,
    /// Primitive 2^adicity-th root of unity, Montgomery form.
    root: u64,
    adicity: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1 << 62) && p > 2, "unsupported modulus {p}");
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = mulmod(r, r, p);
        let mut f = PrimeField { p, nprime: inv.wrapping_neg(), r2, one: r, root: 0, adicity: 0 };
        let adicity = (p - 1).trailing_zeros();
        let odd = (p - 1) >> adicity;
        for g in 2..p {
            let x = powmod(g, odd, p);
            if adicity == 0 || powmod(x, 1 << (adicity - 1), p) == p - 1 {
                f.root = f.from_u64(x);
                f.adicity = adicity;
                break;
            }
        }
        f
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn adicity(&self) -> u32 {
        self.adicity
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.nprime);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn from_u64(&self, v: u64) -> u64 {
        self.redc((v % self.p) as u128 * self.r2 as u128)
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        let x = self.from_u64(v.unsigned_abs());
        if v < 0 {
            self.neg(x)
        } else {
            x
        }
    }

    #[inline]
    pub fn to_u64(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    #[inline]
    pub fn zero(&self) -> u64 {
        0
    }

    #[inline]
    pub fn one(&self) -> u64 {
        self.one
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = self.one;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// Inverts every entry in place with one field inversion. Returns false
    /// (leaving `xs` unspecified) if any entry is zero.
    pub fn batch_inv(&self, xs: &mut [u64]) -> bool {
        let mut pre = Vec::with_capacity(xs.len());
        let mut acc = self.one;
        for &x in xs.iter() {
            if x == 0 {
                return false;
            }
            pre.push(acc);
            acc = self.mul(acc, x);
        }
        let Some(mut inv) = self.inv(acc) else {
            return false;
        };
        for i in (0..xs.len()).rev() {
            let x = xs[i];
            xs[i] = self.mul(inv, pre[i]);
            inv = self.mul(inv, x);
        }
        crate::ops::tick(3 * xs.len() as u64);
        true
    }

    /// A primitive `2^log_n`-th root of unity, if the field has one.
    pub fn root_of_unity(&self, log_n: u32) -> Option<u64> {
        if log_n > self.adicity {
            return None;
        }
        let mut w = self.root;
        for _ in log_n..self.adicity {
            w = self.mul(w, w);
        }
        Some(w)
    }

    /// Residue of a big integer, Montgomery form.
    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let mut r = 0u64;
        for d in v.magnitude().iter_u64_digits().rev() {
            r = ((((r as u128) << 64) | d as u128) % self.p as u128) as u64;
        }
        let x = self.from_u64(r);
        if v.sign() == Sign::Minus {
            self.neg(x)
        } else {
            x
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeStatus {
    Ok,
    Discarded(String),
}

/// Distinct NTT primes with per-prime status. The last good prime acts as
/// the held-out verification prime during reconstruction.
#[derive(Clone, Debug)]
pub struct PrimeBasket {
    bits: u32,
    fields: Vec<PrimeField>,
    status: Vec<PrimeStatus>,
}

impl PrimeBasket {
    pub fn new(count: usize, bits: u32) -> Result<Self> {
        let mut b = PrimeBasket { bits, fields: Vec::new(), status: Vec::new() };
        b.grow_to(count)?;
        Ok(b)
    }

    /// Adds primes until the basket holds `count` of them.
    pub fn grow_to(&mut self, count: usize) -> Result<()> {
        if count > self.fields.len() {
            let primes = ntt_primes(self.bits, count)?;
            for &p in &primes[self.fields.len()..] {
                self.fields.push(PrimeField::new(p));
                self.status.push(PrimeStatus::Ok);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn field(&self, id: usize) -> &PrimeField {
        &self.fields[id]
    }

    pub fn status(&self, id: usize) -> &PrimeStatus {
        &self.status[id]
    }

    pub fn discard(&mut self, id: usize, reason: impl Into<String>) {
        self.status[id] = PrimeStatus::Discarded(reason.into());
    }

    pub fn good(&self) -> impl Iterator<Item = usize> + '_ {
        self.status.iter().enumerate().filter(|(_, s)| **s == PrimeStatus::Ok).map(|(i, _)| i)
    }
}

/// `num * den^{-1} mod p`, Montgomery form.
pub fn rat_to_fp(r: &Scalar, f: &PrimeField, prime_id: usize) -> Result<u64> {
    let d = f.from_bigint(r.denom());
    let inv = f.inv(d).ok_or(Error::BadPrime(prime_id))?;
    Ok(f.mul(f.from_bigint(r.numer()), inv))
}

/// Chinese remaindering of plain (non-Montgomery) residues.
pub fn crt(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for &(p, r) in residues {
        let xm = (&x % p).to_u64().unwrap();
        let mm = (&m % p).to_u64().unwrap();
        let t = mulmod((r + p - xm) % p, powmod(mm, p - 2, p), p);
        x += &m * t;
        m *= p;
    }
    (x, m)
}

/// Finds `a/b` with `a ≡ b*x (mod m)`, `|a|, |b| <= sqrt(m/2)`.
pub fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<Scalar> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let q = Scalar::new(r1, t1);
    // guard against a non-coprime pair
    let back = (q.numer() - x * q.denom()).mod_floor(m);
    back.is_zero().then_some(q)
}

/// Reconstructs a rational from per-prime residues (Montgomery form, keyed
/// by basket id). The last entry is held out and used only to verify.
pub fn crt_reconstruct(residues: &[(usize, u64)], basket: &PrimeBasket) -> Result<Scalar> {
    if residues.len() < 2 {
        return Err(Error::InsufficientPrimes);
    }
    let plain = |&(id, v): &(usize, u64)| {
        let f = basket.field(id);
        (f.modulus(), f.to_u64(v))
    };
    let (head, last) = residues.split_at(residues.len() - 1);
    let pairs: Vec<(u64, u64)> = head.iter().map(plain).collect();
    let (x, m) = crt(&pairs);
    let q = rational_reconstruct(&x, &m).ok_or(Error::InsufficientPrimes)?;
    let (vid, vres) = last[0];
    match rat_to_fp(&q, basket.field(vid), vid) {
        Ok(v) if v == vres => Ok(q),
        _ => Err(Error::InsufficientPrimes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn small_prime_conversions() {
        let f = PrimeField::new(7);
        assert_eq!(f.to_u64(rat_to_fp(&rat(1, 2), &f, 0).unwrap()), 4);
        assert!(matches!(rat_to_fp(&rat(1, 7), &f, 3), Err(Error::BadPrime(3))));
        assert_eq!(f.to_u64(rat_to_fp(&int(-1), &f, 0).unwrap()), 6);
    }

    #[test]
    fn crt_by_hand() {
        let (x, m) = crt(&[(5, 2), (7, 3)]);
        assert_eq!(x, BigInt::from(17));
        assert_eq!(m, BigInt::from(35));
    }

    #[test]
    fn ntt_primes_are_prime_and_distinct() {
        let ps = ntt_primes(62, 8).unwrap();
        for (i, &p) in ps.iter().enumerate() {
            assert!(is_prime_u64(p));
            assert!(p < 1 << 62);
            assert_eq!((p - 1) % (1 << 24), 0);
            assert!(!ps[..i].contains(&p));
            let f = PrimeField::new(p);
            let w = f.root_of_unity(24).unwrap();
            assert_eq!(f.pow(w, 1 << 23), f.neg(f.one()));
        }
        let small = ntt_primes(31, 3).unwrap();
        assert!(small.iter().all(|&p| p < 1 << 31 && is_prime_u64(p)));
    }

    #[test]
    fn miller_rabin_known_values() {
        for p in [2u64, 3, 5, 97, 998244353, 18446744073709551557] {
            assert!(is_prime_u64(p), "{p}");
        }
        for c in [1u64, 4, 561, 3215031751, 18446744073709551555] {
            assert!(!is_prime_u64(c), "{c}");
        }
    }

    #[test]
    fn reconstruct_minus_one_third() {
        let basket = PrimeBasket::new(4, 62).unwrap();
        let q = rat(-1, 3);
        let res: Vec<(usize, u64)> = (0..4).map(|i| (i, rat_to_fp(&q, basket.field(i), i).unwrap())).collect();
        assert_eq!(crt_reconstruct(&res, &basket).unwrap(), q);
    }

    #[test]
    fn single_prime_is_insufficient() {
        let basket = PrimeBasket::new(1, 62).unwrap();
        let r = rat_to_fp(&int(5), basket.field(0), 0).unwrap();
        assert!(matches!(crt_reconstruct(&[(0, r)], &basket), Err(Error::InsufficientPrimes)));
    }

    #[test]
    fn too_large_value_is_detected() {
        let basket = PrimeBasket::new(3, 62).unwrap();
        // ~400-bit rational cannot come back from two 62-bit primes
        let big = Scalar::new(BigInt::from(3).pow(200u32), BigInt::from(7).pow(90u32));
        let res: Vec<(usize, u64)> = (0..3).map(|i| (i, rat_to_fp(&big, basket.field(i), i).unwrap())).collect();
        assert!(matches!(crt_reconstruct(&res, &basket), Err(Error::InsufficientPrimes)));
    }

    #[test]
    fn batch_inverse() {
        let f = PrimeField::new(ntt_primes(62, 1).unwrap()[0]);
        let xs: Vec<u64> = (1..50).map(|v| f.from_u64(v * 12345)).collect();
        let mut ys = xs.clone();
        assert!(f.batch_inv(&mut ys));
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(f.mul(*x, *y), f.one());
        }
        let mut with_zero = vec![f.one(), 0];
        assert!(!f.batch_inv(&mut with_zero));
    }

    proptest! {
        #[test]
        fn field_axioms(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let f = PrimeField::new(ntt_primes(62, 2).unwrap()[1]);
            let (a, b, c) = (f.from_u64(a), f.from_u64(b), f.from_u64(c));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }

        #[test]
        fn montgomery_matches_plain(a in any::<u64>(), b in any::<u64>()) {
            let p = ntt_primes(62, 1).unwrap()[0];
            let f = PrimeField::new(p);
            let m = f.mul(f.from_u64(a), f.from_u64(b));
            prop_assert_eq!(f.to_u64(m), mulmod(a % p, b % p, p));
        }

        #[test]
        fn reconstruction_roundtrip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let basket = PrimeBasket::new(3, 62).unwrap();
            let q = rat(n, d);
            let res: Vec<(usize, u64)> = (0..3).map(|i| (i, rat_to_fp(&q, basket.field(i), i).unwrap())).collect();
            let back = crt_reconstruct(&res, &basket).unwrap();
            prop_assert_eq!(&back, &q);
            for &(i, v) in &res {
                prop_assert_eq!(rat_to_fp(&back, basket.field(i), i).unwrap(), v);
            }
        }
    }
}
