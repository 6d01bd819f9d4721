//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parses `7`, `-3`, `3/4`, `0.25`, `1e-3` is *not* accepted.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches('-');
        if !dec.chars().all(|c| c.is_ascii_digit()) || dec.is_empty() {
            return None;
        }
        let whole: BigInt = if int_abs.is_empty() {
            BigInt::zero()
        } else {
            int_abs.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(dec.len() as u32);
        let frac_part: BigInt = dec.parse().ok()?;
        let v = Rat::new(whole * &scale + frac_part, scale);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Rat::from_integer)
}

/// `num/den` or plain integer.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators: fall back on a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Decimal rendering rounded half-up (away from zero) to `sig` significant
/// digits, trailing zeros stripped: `91/11` -> `8.27273`, `8/7` -> `1.14286`.
pub fn fmt_decimal(r: &Rat, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // e = floor(log10(a))
    let ten = rat(10);
    let mut e: i64 = 0;
    let mut probe = one();
    if a >= one() {
        while &probe * &ten <= a {
            probe *= &ten;
            e += 1;
        }
    } else {
        while probe > a {
            probe /= &ten;
            e -= 1;
        }
    }
    let shift = sig as i64 - 1 - e;
    let scaled = if shift >= 0 {
        &a * Rat::from_integer(BigInt::from(10u32).pow(shift as u32))
    } else {
        &a / Rat::from_integer(BigInt::from(10u32).pow((-shift) as u32))
    };
    let half = frac(1, 2);
    let mut digits = (scaled + half).floor().to_integer();
    let mut shift = shift;
    // Rounding may carry into a new digit (9.999995 -> 10.0000).
    if digits.to_string().len() > sig {
        digits /= BigInt::from(10);
        shift -= 1;
    }
    let ds = digits.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{ds}{zeros}")
    } else {
        let shift = shift as usize;
        if ds.len() > shift {
            let (i, f) = ds.split_at(ds.len() - shift);
            let f = f.trim_end_matches('0');
            if f.is_empty() {
                i.to_string()
            } else {
                format!("{i}.{f}")
            }
        } else {
            let f = format!("{}{}", "0".repeat(shift - ds.len()), ds);
            let f = f.trim_end_matches('0');
            if f.is_empty() {
                "0".to_string()
            } else {
                format!("0.{f}")
            }
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
