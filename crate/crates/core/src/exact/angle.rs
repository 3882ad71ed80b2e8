//! Rational angles: elements of `Q/Z`, standing for `e^{2*pi*i*value}`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::Rat;

/// A rational angle in `[0, 1)`; addition is mod 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(Rat);

impl Angle {
    pub fn new(value: Rat) -> Self {
        Angle(&value - value.floor())
    }

    pub fn zero() -> Self {
        Angle(Rat::zero())
    }

    pub fn from_ints(n: i64, d: i64) -> Self {
        Angle::new(Rat::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn value(&self) -> &Rat {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Angle::new(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Angle::new(&self.0 - &other.0)
    }

    pub fn neg(&self) -> Self {
        Angle::new(-&self.0)
    }

    /// Integer multiple mod 1 (the only scaling well defined on `Q/Z`).
    pub fn scale_int(&self, m: &BigInt) -> Self {
        Angle::new(&self.0 * Rat::from_integer(m.clone()))
    }

    pub fn double(&self) -> Self {
        self.add(self)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.0)
    }

    /// Distance to the nearest representative on the circle, as f64.
    pub fn circle_distance(&self, other: &Self) -> f64 {
        let d = (self.to_f64() - other.to_f64()).abs();
        d.min(1.0 - d)
    }
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Good enough for tolerance checks at desk scale.
    let nf = num.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = den.to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(Angle::from_ints(7, 3), Angle::from_ints(1, 3));
        assert_eq!(Angle::from_ints(-1, 4), Angle::from_ints(3, 4));
        assert_eq!(Angle::from_ints(4, 2), Angle::zero());
    }

    #[test]
    fn group_ops() {
        let a = Angle::from_ints(2, 3);
        let b = Angle::from_ints(1, 2);
        assert_eq!(a.add(&b), Angle::from_ints(1, 6));
        assert_eq!(a.add(&a.neg()), Angle::zero());
        assert_eq!(a.scale_int(&BigInt::from(3)), Angle::zero());
        assert_eq!(a.sub(&b), Angle::from_ints(1, 6));
    }
}
