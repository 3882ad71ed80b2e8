//! Exact arithmetic substrate: `Z[1/p]`, rationals, rational angles (`Q/Z`),
//! p-adic fractional parts and digit expansions, split scalars on the dense
//! rational subgroup of `R x Q_p`, and cyclotomic complex numbers with
//! decidable equality.

mod angle;
mod cyclo;
mod digits;
mod prational;
mod split;

pub use angle::Angle;
pub use cyclo::{cyclo_cap, set_cyclo_cap, CycloComplex, CycloError};
pub use digits::{format_padic_digits, frac_part, padic_digits, parse_padic_digits, rat_valuation};
pub use prational::PRational;
pub use split::SplitScalar;

use thiserror::Error;

/// Exact rational number; reduced, with positive denominator.
pub type Rat = num_rational::BigRational;

/// Errors raised by the exact-number layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    /// Inversion of an element with a zero component.
    #[error("element is not invertible: {0}")]
    NonInvertible(String),
    /// A digit window was requested below the valuation in strict mode.
    #[error("digit window starts at {start} but v_p = {valuation}; low digits are zero")]
    WindowBelowValuation { start: i64, valuation: i64 },
    /// A digit window that misses nonzero low digits cannot satisfy the
    /// reconstruction contract.
    #[error("digit window starts at {start} above v_p = {valuation}; nonzero digits missed")]
    WindowAboveValuation { start: i64, valuation: i64 },
    /// Literal parsing failure.
    #[error("cannot parse {kind} literal {text:?}: {reason}")]
    Parse {
        kind: &'static str,
        text: String,
        reason: String,
    },
    /// A denominator that must be a power of the active prime is not.
    #[error("{0} is not a power of the active prime {1}")]
    NotAPPower(String, u32),
}

pub(crate) fn parse_error(kind: &'static str, text: &str, reason: impl Into<String>) -> NumError {
    NumError::Parse {
        kind,
        text: text.to_string(),
        reason: reason.into(),
    }
}

/// Parses a rational literal `n`, `n/d`, or a decimal `x.y` (decimals are
/// exact).
pub fn parse_rat(s: &str) -> Result<Rat, NumError> {
    let t = s.trim();
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let digits = format!("{int_part}{frac_part}");
        let numer = digits
            .parse::<num_bigint::BigInt>()
            .map_err(|e| parse_error("rational", s, e.to_string()))?;
        let denom = num_bigint::BigInt::from(10u32).pow(frac_part.len() as u32);
        let signed = if int_part.trim_start().starts_with('-') && numer >= 0.into() {
            -numer
        } else {
            numer
        };
        return Ok(Rat::new(signed, denom));
    }
    t.parse::<Rat>()
        .map_err(|e| parse_error("rational", s, e.to_string()))
}

/// Approximate f64 value of an exact rational.
pub fn to_f64(r: &Rat) -> f64 {
    angle::rat_to_f64(r)
}
