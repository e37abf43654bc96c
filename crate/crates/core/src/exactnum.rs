//! Big integers, rationals and the legacy base 10⁴ wire codec.

pub use num_bigint::{BigInt, Sign};
pub use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const RADIX: u32 = 10_000;
const POS_OFFSET: u16 = 10_000;
const NEG_OFFSET: u16 = 20_000;

/// A big integer as a sequence of base 10⁴ words, most significant first.
///
/// The last word carries the sign: 10000 is added for a nonnegative value and
/// 20000 for a negative one. Zero is `[10000]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LegacyRecord {
    words: Vec<u16>,
}

impl LegacyRecord {
    pub fn new(words: Vec<u16>) -> Result<Self> {
        let rec = LegacyRecord { words };
        rec.validate()?;
        Ok(rec)
    }

    pub fn words(&self) -> &[u16] {
        &self.words
    }

    fn validate(&self) -> Result<()> {
        let w = &self.words;
        let (last, head) = match w.split_last() {
            Some(x) => x,
            None => return Err(Error::Format("empty legacy record".into())),
        };
        if !(10_000..=29_999).contains(last) {
            return Err(Error::Format(format!("bad terminator word {last}")));
        }
        if let Some(bad) = head.iter().find(|&&x| x > 9_999) {
            return Err(Error::Format(format!("digit word {bad} out of range")));
        }
        if !head.is_empty() && head[0] == 0 {
            return Err(Error::Format("leading zero word".into()));
        }
        if head.is_empty() && *last == NEG_OFFSET {
            return Err(Error::Format("negative zero".into()));
        }
        Ok(())
    }

    /// Slash separated decimal rendering of the words, the on-disk form.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.words.iter().map(|w| w.to_string()).collect();
        parts.join("/")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut words = Vec::new();
        for tok in s.split('/') {
            let v: u32 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad legacy word `{tok}`")))?;
            if v > 29_999 {
                return Err(Error::Format(format!("legacy word {v} out of range")));
            }
            words.push(v as u16);
        }
        LegacyRecord::new(words)
    }
}

pub fn legacy_encode(n: &BigInt) -> LegacyRecord {
    let negative = n.is_negative();
    let mut mag = n.abs();
    let radix = BigInt::from(RADIX);
    let mut digits = Vec::new();
    loop {
        let (q, r) = mag.div_rem(&radix);
        digits.push(r.to_u16().expect("digit below radix"));
        mag = q;
        if mag.is_zero() {
            break;
        }
    }
    digits.reverse();
    let last = digits.last_mut().expect("at least one digit");
    *last += if negative { NEG_OFFSET } else { POS_OFFSET };
    LegacyRecord { words: digits }
}

pub fn legacy_decode(r: &LegacyRecord) -> Result<BigInt> {
    r.validate()?;
    let (last, head) = r.words.split_last().expect("validated");
    let (a0, negative) = if *last >= NEG_OFFSET {
        (last - NEG_OFFSET, true)
    } else {
        (last - POS_OFFSET, false)
    };
    let radix = BigInt::from(RADIX);
    let mut acc = BigInt::zero();
    for &w in head {
        acc = acc * &radix + BigInt::from(w);
    }
    acc = acc * &radix + BigInt::from(a0);
    Ok(if negative { -acc } else { acc })
}

/// Euclidean division: `a = q*b + r` with `0 <= r < |b|`.
pub fn div_euclid(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt)> {
    if b.is_zero() {
        return Err(Error::Domain("division by zero".into()));
    }
    let (mut q, mut r) = a.div_rem(b);
    if r.is_negative() {
        if b.is_positive() {
            q -= 1;
            r += b;
        } else {
            q += 1;
            r -= b;
        }
    }
    Ok((q, r))
}

/// Exact quotient; fails when `b` does not divide `a`.
pub fn div_exact(a: &BigInt, b: &BigInt) -> Result<BigInt> {
    let (q, r) = div_euclid(a, b)?;
    if !r.is_zero() {
        return Err(Error::Domain(format!("{b} does not divide {a}")));
    }
    Ok(q)
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

pub fn rat_floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn rat_ceil(x: &BigRational) -> BigInt {
    ceil_div(x.numer(), x.denom())
}

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

pub fn is_integral(x: &BigRational) -> bool {
    x.denom().is_one()
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Extended gcd by the textbook recursion: returns `(g, x, y)` with
/// `g = a*x + b*y` and `g >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        if a.is_negative() {
            return (-a, -BigInt::one(), BigInt::zero());
        }
        return (a.clone(), BigInt::one(), BigInt::zero());
    }
    let (q, r) = a.div_rem(b);
    let (g, x, y) = ext_gcd(b, &r);
    let ny = &x - &q * &y;
    (g, y, ny)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    if n.is_zero() {
        return u32::MAX;
    }
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_encodings() {
        assert_eq!(legacy_encode(&int(123456789)).words(), &[1, 2345, 16789]);
        assert_eq!(legacy_encode(&int(-123456789)).words(), &[1, 2345, 26789]);
        assert_eq!(legacy_encode(&int(0)).words(), &[10000]);
        let r = LegacyRecord::new(vec![1, 2345, 26789]).unwrap();
        assert_eq!(legacy_decode(&r).unwrap(), int(-123456789));
    }

    #[test]
    fn malformed_records() {
        assert!(LegacyRecord::new(vec![]).is_err());
        assert!(LegacyRecord::new(vec![12000, 10000]).is_err());
        assert!(LegacyRecord::new(vec![0, 10001]).is_err());
        assert!(LegacyRecord::new(vec![5, 9999]).is_err());
        assert!(LegacyRecord::new(vec![20000]).is_err());
        assert!(LegacyRecord::parse("1/30000").is_err());
        assert_eq!(LegacyRecord::parse("1/2345/16789").unwrap().to_text(), "1/2345/16789");
    }

    #[test]
    fn small_values_and_digit_boundaries() {
        for v in [1i64, -1, 9999, 10000, -10000, 99999999, 100000000] {
            let r = legacy_encode(&int(v));
            assert_eq!(legacy_decode(&r).unwrap(), int(v));
        }
        assert_eq!(legacy_encode(&int(10000)).words(), &[1, 10000]);
        assert_eq!(legacy_encode(&int(-5)).words(), &[20005]);
    }

    #[test]
    fn euclid_remainder_nonnegative() {
        for a in -20..20 {
            for b in [-7i64, -3, 3, 7] {
                let (q, r) = div_euclid(&int(a), &int(b)).unwrap();
                assert!(r >= int(0) && r < int(b.abs()));
                assert_eq!(q * int(b) + r, int(a));
            }
        }
        assert!(div_euclid(&int(1), &int(0)).is_err());
    }

    #[test]
    fn ext_gcd_small() {
        assert_eq!(ext_gcd(&int(2), &int(1)), (int(1), int(0), int(1)));
        let (g, x, y) = ext_gcd(&int(240), &int(46));
        assert_eq!(g, int(2));
        assert_eq!(int(240) * x + int(46) * y, int(2));
    }
}
