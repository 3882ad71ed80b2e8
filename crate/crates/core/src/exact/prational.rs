//! Elements of `Z[1/p]`: rationals whose denominator is a power of the prime
//! `p`, stored as `mantissa * p^exp` with the mantissa coprime to `p`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{parse_error, NumError, Rat};

/// An element of `Z[1/p]`, canonically `mantissa * p^exp` with `p` not
/// dividing the mantissa (and `exp = 0` when the mantissa is zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PRational {
    p: u32,
    mantissa: BigInt,
    exp: i64,
}

/// Splits `m = unit * p^k` with `p` not dividing `unit`. `m` must be nonzero.
pub(crate) fn split_p(m: &BigInt, p: u32) -> (BigInt, i64) {
    debug_assert!(!m.is_zero());
    let p_big = BigInt::from(p);
    let mut unit = m.clone();
    let mut k = 0i64;
    loop {
        let (q, r) = unit.div_rem(&p_big);
        if r.is_zero() {
            unit = q;
            k += 1;
        } else {
            return (unit, k);
        }
    }
}

impl PRational {
    /// Builds `mantissa * p^exp` in canonical form.
    pub fn new(p: u32, mantissa: impl Into<BigInt>, exp: i64) -> Self {
        let mantissa = mantissa.into();
        if mantissa.is_zero() {
            return PRational {
                p,
                mantissa,
                exp: 0,
            };
        }
        let (unit, k) = split_p(&mantissa, p);
        PRational {
            p,
            mantissa: unit,
            exp: exp + k,
        }
    }

    pub fn zero(p: u32) -> Self {
        PRational::new(p, 0, 0)
    }

    pub fn one(p: u32) -> Self {
        PRational::new(p, 1, 0)
    }

    pub fn from_int(p: u32, n: impl Into<BigInt>) -> Self {
        PRational::new(p, n, 0)
    }

    /// The unit `sign * p^k`.
    pub fn unit_pow(p: u32, sign: i8, k: i64) -> Self {
        PRational::new(p, i64::from(sign.signum()), k)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.mantissa.is_one() && self.exp == 0
    }

    /// True exactly for the units `+-p^k` of `Z[1/p]`.
    pub fn is_unit(&self) -> bool {
        self.mantissa.abs().is_one()
    }

    /// True when the element is an ordinary integer.
    pub fn is_integer(&self) -> bool {
        self.is_zero() || self.exp >= 0
    }

    /// p-adic valuation; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp)
        }
    }

    fn assert_same_prime(&self, other: &Self) {
        assert_eq!(
            self.p, other.p,
            "mixed primes in Z[1/p] arithmetic: {} vs {}",
            self.p, other.p
        );
    }

    pub fn neg(&self) -> Self {
        PRational {
            p: self.p,
            mantissa: -&self.mantissa,
            exp: if self.mantissa.is_zero() { 0 } else { self.exp },
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_prime(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let p_big = BigInt::from(self.p);
        let a = &self.mantissa * p_big.pow((self.exp - e) as u32);
        let b = &other.mantissa * p_big.pow((other.exp - e) as u32);
        PRational::new(self.p, a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_prime(other);
        if self.is_zero() || other.is_zero() {
            return PRational::zero(self.p);
        }
        // The product of two p-free mantissas is p-free.
        PRational {
            p: self.p,
            mantissa: &self.mantissa * &other.mantissa,
            exp: self.exp + other.exp,
        }
    }

    pub fn mul_pow_p(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        PRational {
            p: self.p,
            mantissa: self.mantissa.clone(),
            exp: self.exp + k,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        if self.is_zero() {
            return if k == 0 {
                PRational::one(self.p)
            } else {
                self.clone()
            };
        }
        PRational {
            p: self.p,
            mantissa: self.mantissa.pow(k),
            exp: self.exp * i64::from(k),
        }
    }

    /// Inverse, defined only for the units `+-p^k`.
    pub fn inv_unit(&self) -> Result<Self, NumError> {
        if !self.is_unit() {
            return Err(NumError::NonInvertible(self.to_string()));
        }
        Ok(PRational {
            p: self.p,
            mantissa: self.mantissa.clone(),
            exp: -self.exp,
        })
    }

    /// Exact division inside `Z[1/p]`: defined when the divisor's mantissa
    /// divides the dividend's.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        self.assert_same_prime(other);
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(PRational::zero(self.p));
        }
        let (q, r) = self.mantissa.div_rem(&other.mantissa);
        if !r.is_zero() {
            return None;
        }
        Some(PRational {
            p: self.p,
            mantissa: q,
            exp: self.exp - other.exp,
        })
    }

    pub fn to_rat(&self) -> Rat {
        let p_big = BigInt::from(self.p);
        if self.exp >= 0 {
            Rat::from_integer(&self.mantissa * p_big.pow(self.exp as u32))
        } else {
            Rat::new(self.mantissa.clone(), p_big.pow((-self.exp) as u32))
        }
    }

    /// Recognizes a rational as an element of `Z[1/p]`.
    pub fn try_from_rat(p: u32, r: &Rat) -> Option<Self> {
        if r.is_zero() {
            return Some(PRational::zero(p));
        }
        let (unit, k) = split_p(r.denom(), p);
        if !unit.abs().is_one() {
            return None;
        }
        Some(PRational::new(p, r.numer() * unit.signum(), -k))
    }

    /// Parses a `Z[1/p]` literal such as `7`, `-3/8`, `5/p^3`, `p^2` or
    /// `3*p^2`; the letter `p` and any numeric base are validated against the
    /// active prime.
    pub fn parse(s: &str, p: u32) -> Result<Self, NumError> {
        let t = s.trim();
        let (num_part, den_part) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (t, None),
        };
        let (mut num_coeff, num_exp) = parse_factor(num_part, p, s)?;
        let mut exp = num_exp;
        if let Some(den) = den_part {
            let (den_coeff, den_exp) = parse_factor(den, p, s)?;
            if den_coeff.is_zero() {
                return Err(parse_error("Z[1/p]", s, "zero denominator"));
            }
            let (unit, k) = split_p(&den_coeff, p);
            if !unit.abs().is_one() {
                return Err(NumError::NotAPPower(den.to_string(), p));
            }
            exp -= den_exp + k;
            if unit.is_negative() {
                num_coeff = -num_coeff;
            }
        }
        Ok(PRational::new(p, num_coeff, exp))
    }
}

/// Parses `n`, `p`, `p^k`, `n*p^k` or `B^k` with `B == p`, returning
/// `(coefficient, exponent)`.
fn parse_factor(s: &str, p: u32, whole: &str) -> Result<(BigInt, i64), NumError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_error("Z[1/p]", whole, "empty factor"));
    }
    let (coeff_str, pow_str) = match s.split_once('*') {
        Some((c, rest)) => (Some(c.trim()), Some(rest.trim())),
        None => {
            if s.contains('^') || s == "p" || s == "-p" {
                (None, Some(s))
            } else {
                (Some(s), None)
            }
        }
    };
    let mut coeff = BigInt::one();
    if let Some(c) = coeff_str {
        coeff = c
            .parse::<BigInt>()
            .map_err(|e| parse_error("Z[1/p]", whole, e.to_string()))?;
    }
    let mut exp = 0i64;
    if let Some(ps) = pow_str {
        let (base_str, exp_str) = match ps.split_once('^') {
            Some((b, e)) => (b.trim(), Some(e.trim())),
            None => (ps, None),
        };
        let (neg, base_str) = match base_str.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, base_str),
        };
        if base_str != "p" {
            let base: u32 = base_str
                .parse()
                .map_err(|_| parse_error("Z[1/p]", whole, "bad power base"))?;
            if base != p {
                return Err(NumError::NotAPPower(base_str.to_string(), p));
            }
        }
        if neg {
            coeff = -coeff;
        }
        exp = match exp_str {
            Some(e) => e
                .parse::<i64>()
                .map_err(|e| parse_error("Z[1/p]", whole, e.to_string()))?,
            None => 1,
        };
    }
    Ok((coeff, exp))
}

impl PartialOrd for PRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.assert_same_prime(other);
        let e = self.exp.min(other.exp);
        let p_big = BigInt::from(self.p);
        let a = if self.is_zero() {
            BigInt::zero()
        } else {
            &self.mantissa * p_big.pow((self.exp - e) as u32)
        };
        let b = if other.is_zero() {
            BigInt::zero()
        } else {
            &other.mantissa * p_big.pow((other.exp - e) as u32)
        };
        a.cmp(&b)
    }
}

impl fmt::Display for PRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() || self.exp == 0 {
            return write!(f, "{}", self.mantissa);
        }
        if self.exp > 0 {
            let p_big = BigInt::from(self.p);
            return write!(f, "{}", &self.mantissa * p_big.pow(self.exp as u32));
        }
        let k = -self.exp;
        if k == 1 {
            write!(f, "{}/{}", self.mantissa, self.p)
        } else {
            write!(f, "{}/{}^{}", self.mantissa, self.p, k)
        }
    }
}
