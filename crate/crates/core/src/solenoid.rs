//! The p-solenoid at a finite truncation level: coherent towers of rational
//! angles under the p-th power maps, the exponential from `R x Q_p`, the
//! translation action, and the constructive preimage solver.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::exact::{Angle, PRational, Rat, SplitScalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolenoidError {
    #[error("levels differ: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("incoherent angle tower at index {index}: p*theta_{{n+1}} != theta_n (mod 1)")]
    IncoherentPoint { index: u32 },
}

/// A point of the p-solenoid truncated at level `L`: angles
/// `(theta_0, ..., theta_L)` with `p * theta_{n+1} = theta_n (mod 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolenoidPoint {
    p: u32,
    angles: Vec<Angle>,
}

impl SolenoidPoint {
    /// Validates coherence and builds a point from an angle tower.
    pub fn from_angles(p: u32, angles: Vec<Angle>) -> Result<Self, SolenoidError> {
        assert!(!angles.is_empty(), "a point needs at least level 0");
        let p_big = BigInt::from(p);
        for n in 0..angles.len() - 1 {
            if angles[n + 1].scale_int(&p_big) != angles[n] {
                return Err(SolenoidError::IncoherentPoint { index: n as u32 });
            }
        }
        Ok(SolenoidPoint { p, angles })
    }

    /// The identity: all angles zero.
    pub fn identity(p: u32, level: u32) -> Self {
        SolenoidPoint {
            p,
            angles: vec![Angle::zero(); level as usize + 1],
        }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn level(&self) -> u32 {
        (self.angles.len() - 1) as u32
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn angle(&self, n: u32) -> &Angle {
        &self.angles[n as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.angles.iter().all(Angle::is_zero)
    }

    fn assert_compatible(&self, other: &Self) -> Result<(), SolenoidError> {
        assert_eq!(self.p, other.p, "mixed primes in solenoid arithmetic");
        if self.angles.len() != other.angles.len() {
            return Err(SolenoidError::LevelMismatch(self.level(), other.level()));
        }
        Ok(())
    }

    /// Componentwise product (the group law of the solenoid).
    pub fn mul(&self, other: &Self) -> Result<Self, SolenoidError> {
        self.assert_compatible(other)?;
        Ok(SolenoidPoint {
            p: self.p,
            angles: self
                .angles
                .iter()
                .zip(&other.angles)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn inv(&self) -> Self {
        SolenoidPoint {
            p: self.p,
            angles: self.angles.iter().map(Angle::neg).collect(),
        }
    }

    /// Truncates to a shallower level.
    pub fn restrict_level(&self, level: u32) -> Self {
        assert!(level <= self.level(), "cannot deepen a truncated point");
        SolenoidPoint {
            p: self.p,
            angles: self.angles[..=level as usize].to_vec(),
        }
    }

    /// Product after truncating the deeper factor to the shallower level.
    pub fn mul_auto(&self, other: &Self) -> Self {
        let level = self.level().min(other.level());
        self.restrict_level(level)
            .mul(&other.restrict_level(level))
            .expect("levels aligned")
    }
}

impl fmt::Display for SolenoidPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.angles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// The exponential `pi(t, r)`: level-n angle `t/p^n + {-r/p^n} (mod 1)`,
/// combining the winding line with the p-adic fractional-part embedding.
/// A group homomorphism `(R x Q_p, +) -> (S_p, *)` at every level.
///
/// The fractional parts accumulate one digit of `-r` per level, so the
/// whole tower costs a single modular inversion.
pub fn pi_map(p: u32, q: &SplitScalar, level: u32) -> SolenoidPoint {
    let minus_r = -q.padic();
    let valuation = crate::exact::rat_valuation(&minus_r, p);
    let digits = match valuation {
        Some(v) if v < i64::from(level) => {
            crate::exact::padic_digits(&minus_r, p, v, i64::from(level), false)
                .expect("window starts at the valuation")
        }
        _ => Vec::new(),
    };
    let v = valuation.unwrap_or(0);

    let p_big = BigInt::from(p);
    let mut angles = Vec::with_capacity(level as usize + 1);
    // x_n = sum of the digits of -r below index n; {-r/p^n} = x_n / p^n.
    let mut x = Rat::from_integer(BigInt::from(0));
    let mut digit_weight = pow_p(&p_big, v);
    let mut digit_idx = v;
    let mut level_weight = Rat::from_integer(BigInt::from(1));
    for n in 0..=i64::from(level) {
        while digit_idx < n {
            let offset = (digit_idx - v) as usize;
            if let Some(d) = digits.get(offset) {
                if *d != 0 {
                    x += Rat::from_integer(BigInt::from(*d)) * &digit_weight;
                }
            }
            digit_weight *= Rat::from_integer(p_big.clone());
            digit_idx += 1;
        }
        angles.push(Angle::new((q.real() + &x) * &level_weight));
        level_weight /= Rat::from_integer(p_big.clone());
    }
    SolenoidPoint { p, angles }
}

fn pow_p(p_big: &BigInt, e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(p_big.pow(e as u32))
    } else {
        Rat::new(BigInt::from(1), p_big.pow((-e) as u32))
    }
}

/// The translation action of `R x Q_p` on the solenoid.
pub fn act_rho(p: u32, q: &SplitScalar, z: &SolenoidPoint) -> SolenoidPoint {
    pi_map(p, q, z.level())
        .mul(z)
        .expect("pi_map builds at the target level")
}

/// Constructive preimage: produces `q` with `pi_map(q, z.level()) == z`
/// exactly. Takes `t := theta_0`; the residual `omega(-t) * z` has level-k
/// angle `m_k / p^k`, and `r := -m_L` reproduces it on all coordinates.
pub fn orbit_solve(z: &SolenoidPoint) -> Result<SplitScalar, SolenoidError> {
    let p = z.p;
    let level = z.level();
    let t = z.angle(0).value().clone();
    let p_big = BigInt::from(p);
    let mut m_deep = BigInt::from(0);
    for k in 0..=level {
        // y_k = theta_k - t / p^k; coherence forces p^k * y_k integral.
        let scale = Rat::from_integer(p_big.pow(k));
        let y_k = Angle::new(z.angle(k).value() - &t / &scale);
        let m_k = y_k.value() * &scale;
        if !m_k.denom().abs().eq(&BigInt::from(1)) {
            return Err(SolenoidError::IncoherentPoint { index: k });
        }
        m_deep = m_k.numer().clone();
    }
    let q = SplitScalar::new(t, Rat::from_integer(-m_deep));
    Ok(q)
}

/// Certifies that a point of the level-L kernel of `pi` is a lattice
/// perturbation of `delta(n)`: returns `n` in `Z[1/p]` with the real
/// component of `q - delta(n)` zero and the p-adic component of valuation
/// at least L. `None` when `q` is not in the kernel shape.
pub fn kernel_certificate(p: u32, q: &SplitScalar, level: u32) -> Option<PRational> {
    let n = PRational::try_from_rat(p, q.real())?;
    let diff = q.padic() - q.real();
    let ok = crate::exact::rat_valuation(&diff, p).is_none_or(|v| v >= i64::from(level));
    if ok {
        Some(n)
    } else {
        None
    }
}

/// Parses a point literal: comma-separated angle rationals
/// `theta0,theta1,...`, validated for coherence.
pub fn parse_point(s: &str, p: u32) -> Result<SolenoidPoint, crate::exact::NumError> {
    let mut angles = Vec::new();
    for piece in s.split(',') {
        angles.push(Angle::new(crate::exact::parse_rat(piece)?));
    }
    SolenoidPoint::from_angles(p, angles).map_err(|e| crate::exact::NumError::Parse {
        kind: "solenoid point",
        text: s.to_string(),
        reason: e.to_string(),
    })
}
