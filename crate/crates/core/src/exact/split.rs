//! Split scalars: elements of `R x Q_p` restricted to the dense rational
//! subgroup, stored as a pair of exact rationals with componentwise ring
//! operations.

use std::fmt;

use num_traits::Zero;

use super::{NumError, PRational, Rat};

/// A point of `R x Q_p` with both components rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitScalar {
    t: Rat,
    r: Rat,
}

impl SplitScalar {
    pub fn new(t: Rat, r: Rat) -> Self {
        SplitScalar { t, r }
    }

    pub fn from_ints(tn: i64, td: i64, rn: i64, rd: i64) -> Self {
        SplitScalar::new(
            Rat::new(tn.into(), td.into()),
            Rat::new(rn.into(), rd.into()),
        )
    }

    pub fn zero() -> Self {
        SplitScalar::new(Rat::zero(), Rat::zero())
    }

    /// The diagonal embedding `n -> (n, n)` of `Z[1/p]`.
    pub fn delta(n: &PRational) -> Self {
        let r = n.to_rat();
        SplitScalar::new(r.clone(), r)
    }

    /// Diagonal embedding of an arbitrary rational.
    pub fn delta_rat(x: &Rat) -> Self {
        SplitScalar::new(x.clone(), x.clone())
    }

    /// Real-only embedding `n -> (n, 0)`; the kernel of the level-0
    /// exponential, used by the torus instance.
    pub fn real_only(x: &Rat) -> Self {
        SplitScalar::new(x.clone(), Rat::zero())
    }

    pub fn real(&self) -> &Rat {
        &self.t
    }

    pub fn padic(&self) -> &Rat {
        &self.r
    }

    pub fn is_zero(&self) -> bool {
        self.t.is_zero() && self.r.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        SplitScalar::new(&self.t + &other.t, &self.r + &other.r)
    }

    pub fn sub(&self, other: &Self) -> Self {
        SplitScalar::new(&self.t - &other.t, &self.r - &other.r)
    }

    pub fn neg(&self) -> Self {
        SplitScalar::new(-&self.t, -&self.r)
    }

    pub fn mul(&self, other: &Self) -> Self {
        SplitScalar::new(&self.t * &other.t, &self.r * &other.r)
    }

    /// Componentwise inverse; fails when either component vanishes.
    pub fn inv(&self) -> Result<Self, NumError> {
        if self.t.is_zero() || self.r.is_zero() {
            return Err(NumError::NonInvertible(self.to_string()));
        }
        Ok(SplitScalar::new(self.t.recip(), self.r.recip()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, NumError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Scalar multiplication by a rational (acting on both components).
    pub fn scale_rat(&self, s: &Rat) -> Self {
        SplitScalar::new(&self.t * s, &self.r * s)
    }

    pub fn scale(&self, s: &PRational) -> Self {
        self.scale_rat(&s.to_rat())
    }
}

impl fmt::Display for SplitScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.t, self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_example() {
        let x = SplitScalar::from_ints(1, 3, 5, 2);
        assert_eq!(x.inv().unwrap(), SplitScalar::from_ints(3, 1, 2, 5));
        assert_eq!(x.inv().unwrap().inv().unwrap(), x);
        assert!(SplitScalar::from_ints(0, 1, 5, 2).inv().is_err());
    }

    #[test]
    fn delta_embedding() {
        let zero = PRational::zero(2);
        assert_eq!(SplitScalar::delta(&zero), SplitScalar::zero());
        let half = PRational::new(2, 1, -1);
        let x = SplitScalar::from_ints(1, 3, 5, 2);
        assert_eq!(
            x.mul(&SplitScalar::delta(&half)),
            SplitScalar::from_ints(1, 6, 5, 4)
        );
        // Ring embedding.
        let a = PRational::new(2, 3, -2);
        let b = PRational::new(2, -5, 1);
        assert_eq!(
            SplitScalar::delta(&a.add(&b)),
            SplitScalar::delta(&a).add(&SplitScalar::delta(&b))
        );
        assert_eq!(
            SplitScalar::delta(&a.mul(&b)),
            SplitScalar::delta(&a).mul(&SplitScalar::delta(&b))
        );
    }

    #[test]
    fn ring_laws_randomized() {
        let mut rng = crate::sampling::stream_rng(3, 0);
        for _ in 0..200 {
            let a = crate::sampling::split(&mut rng, 20, 12);
            let b = crate::sampling::split(&mut rng, 20, 12);
            let c = crate::sampling::split(&mut rng, 20, 12);
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            if let Ok(inv) = a.inv() {
                assert_eq!(inv.inv().unwrap(), a);
            }
        }
    }
}
