//! Exact rational scalars: parsing from decimal / `p/q` text and rounded
//! decimal rendering (including correctly rounded square roots).

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `-12`, `0.25`, `1.5e-3`, or `p/q`. Float specials are rejected.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let bad = || Error::BadScalar(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = parse_int(p).ok_or_else(bad)?;
        let q: BigInt = parse_int(q).ok_or_else(bad)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Scalar::new(p, q));
    }
    let (neg, body) = match t.as_bytes()[0] {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..].parse().map_err(|_| bad())?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (ip, fp) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.bytes().chain(fp.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.unsigned_abs() > 10_000 {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let v = if scale >= 0 {
        Scalar::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Scalar::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(v)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// `p/q` rendering used by all textual outputs (denominator always shown).
pub fn to_fraction(q: &Scalar) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Approximate base-10 exponent of a positive rational (may be off by one).
fn approx_log10(a: &Scalar) -> i64 {
    let bits = a.numer().bits() as i64 - a.denom().bits() as i64;
    (bits as f64 * std::f64::consts::LOG10_2).floor() as i64
}

fn pow10(k: u64) -> BigUint {
    num_traits::pow(BigUint::from(10u32), k as usize)
}

/// Multiplies by 10^k for signed k.
fn scale10(a: &Scalar, k: i64) -> Scalar {
    let p = BigInt::from_biguint(Sign::Plus, pow10(k.unsigned_abs()));
    if k >= 0 {
        a * Scalar::from_integer(p)
    } else {
        a / Scalar::from_integer(p)
    }
}

/// Round-half-even of a non-negative rational.
fn round_half_even(a: &Scalar) -> BigUint {
    let (q, r) = a.numer().div_rem(a.denom());
    let twice: BigInt = &r * 2;
    let q = q.to_biguint().expect("non-negative");
    match twice.cmp(a.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1u32,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1u32
            }
        }
    }
}

/// Correctly rounded decimal with `sig` significant digits.
pub fn to_decimal(q: &Scalar, sig: u32) -> String {
    if q.is_zero() {
        return render(false, BigUint::zero(), sig as i64 - 1, sig);
    }
    let a = q.abs();
    let lo = pow10(sig as u64 - 1);
    let hi = pow10(sig as u64);
    // choose k with 10^(sig-1) <= a*10^k < 10^sig
    let mut k = sig as i64 - 1 - approx_log10(&a);
    loop {
        let v = scale10(&a, k);
        let fl = v.floor().to_integer().to_biguint().unwrap_or_default();
        if fl < lo {
            k += 1;
        } else if fl >= hi {
            k -= 1;
        } else {
            let mut m = round_half_even(&v);
            if m == hi {
                m = lo.clone();
                k -= 1;
            }
            return render(q.is_negative(), m, k, sig);
        }
    }
}

/// Correctly rounded decimal of the square root of a non-negative rational.
pub fn sqrt_to_decimal(q: &Scalar, sig: u32) -> String {
    assert!(!q.is_negative(), "square root of a negative value");
    if q.is_zero() {
        return to_decimal(q, sig);
    }
    let lo = pow10(sig as u64 - 1);
    let hi = pow10(sig as u64);
    let mut k = sig as i64 - 1 - approx_log10(q) / 2;
    loop {
        // floor(sqrt(Q)) == isqrt(floor(Q)) for Q = q * 10^(2k)
        let big_q = scale10(q, 2 * k);
        let fl = big_q.floor().to_integer().to_biguint().unwrap_or_default();
        let m = fl.sqrt();
        if m < lo {
            k += 1;
            continue;
        }
        if m >= hi {
            k -= 1;
            continue;
        }
        // round up iff Q >= (m + 1/2)^2, i.e. 4Q >= (2m+1)^2
        let two_m1 = BigInt::from(2u32 * &m + 1u32);
        let lhs = &big_q * Scalar::from_integer(BigInt::from(4));
        let rhs = Scalar::from_integer(&two_m1 * &two_m1);
        let mut m = if lhs >= rhs { m + 1u32 } else { m };
        if m == hi {
            m = lo.clone();
            k -= 1;
        }
        return render(false, m, k, sig);
    }
}

/// Renders `m * 10^-k` where `m` has exactly `sig` digits (or is zero).
fn render(neg: bool, m: BigUint, k: i64, sig: u32) -> String {
    let digits = if m.is_zero() {
        "0".repeat(sig as usize)
    } else {
        m.to_str_radix(10)
    };
    let exp10 = digits.len() as i64 - 1 - k; // exponent of leading digit
    let sign = if neg { "-" } else { "" };
    if !(-7..=20).contains(&exp10) {
        return format!("{sign}{}.{}e{exp10}", &digits[..1], &digits[1..]);
    }
    let s = if exp10 < 0 {
        format!("0.{}{}", "0".repeat((-exp10 - 1) as usize), digits)
    } else {
        let int_len = (exp10 + 1) as usize;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    format!("{sign}{s}")
}

/// Sum by pairwise halving, which keeps intermediate denominators balanced
/// instead of growing one accumulator.
pub fn sum_balanced(mut v: Vec<Scalar>) -> Scalar {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a + b,
                None => a,
            });
        }
        v = next;
    }
    v.pop().unwrap_or_else(Scalar::zero)
}

/// Lossy conversion for diagnostics only.
pub fn to_f64(q: &Scalar) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn is_one(q: &Scalar) -> bool {
    q.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_sum() {
        let v: Vec<Scalar> = (1..=10).map(|k| rat(1, k)).collect();
        let mut seq = Scalar::zero();
        for q in &v {
            seq += q;
        }
        assert_eq!(sum_balanced(v), seq);
        assert_eq!(sum_balanced(Vec::new()), int(0));
    }

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(parse_scalar("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_scalar("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_scalar("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_scalar("-2/4").unwrap(), rat(-1, 2));
        assert_eq!(parse_scalar("1e-2").unwrap(), rat(1, 100));
        assert_eq!(parse_scalar("2.5E1").unwrap(), int(25));
        assert_eq!(parse_scalar(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
    }

    #[test]
    fn rejects_specials_and_junk() {
        for s in ["NaN", "nan", "inf", "-inf", "Infinity", "1/0", "", "1.2.3", "0x10", "1/-"] {
            assert!(parse_scalar(s).is_err(), "{s}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(1, 4), 17), "0.25000000000000000");
        assert_eq!(to_decimal(&rat(1, 3), 17), "0.33333333333333333");
        assert_eq!(to_decimal(&rat(2, 3), 17), "0.66666666666666667");
        assert_eq!(to_decimal(&int(-12), 5), "-12.000");
        assert_eq!(to_decimal(&int(0), 3), "0.00");
        assert_eq!(to_decimal(&rat(99999, 10000), 4), "10.00");
    }

    #[test]
    fn sqrt_rendering_is_correctly_rounded() {
        assert_eq!(sqrt_to_decimal(&int(4), 17), "2.0000000000000000");
        assert_eq!(sqrt_to_decimal(&rat(1, 6), 17), "0.40824829046386302");
        assert_eq!(sqrt_to_decimal(&int(2), 17), "1.4142135623730950");
        assert_eq!(sqrt_to_decimal(&int(0), 17), "0.0000000000000000");
    }
}
