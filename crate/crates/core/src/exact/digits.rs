//! p-adic fractional parts and digit windows for rational numbers, computed
//! by modular inversion of the prime-to-p part of the denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::prational::{split_p, PRational};
use super::{parse_error, NumError, Rat};

/// p-adic valuation of a rational; `None` for zero.
pub fn rat_valuation(r: &Rat, p: u32) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let (_, vn) = split_p(r.numer(), p);
    let (_, vd) = split_p(r.denom(), p);
    Some(vn - vd)
}

/// Inverse of `a` modulo `m` (`m > 1`, `gcd(a, m) = 1`).
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "modular inverse of non-unit");
    e.x.mod_floor(m)
}

use num_traits::One;

/// The negative-index portion of the p-adic digit expansion of `r`: the
/// unique element of `[0,1)` in `Z[1/p]` such that `r - frac_part(r)` is
/// p-integral.
pub fn frac_part(r: &Rat, p: u32) -> PRational {
    let v = match rat_valuation(r, p) {
        None => return PRational::zero(p),
        Some(v) => v,
    };
    if v >= 0 {
        return PRational::zero(p);
    }
    let k = (-v) as u32;
    let p_big = BigInt::from(p);
    let pk = p_big.pow(k);
    // r = a / (n * p^k) with p dividing neither a nor n.
    let (n, _) = split_p(r.denom(), p);
    let a = r.numer();
    let x = (a * mod_inverse(&n, &pk)).mod_floor(&pk);
    PRational::new(p, x, -(k as i64))
}

/// Digits `d_j` of the p-adic expansion of `r` for `j` in `[start, end)`.
///
/// With `strict_below` set, asking for digits below the valuation (which are
/// zero by convention) is an error; the window may never start above the
/// valuation, since then the reconstruction contract cannot hold.
pub fn padic_digits(
    r: &Rat,
    p: u32,
    start: i64,
    end: i64,
    strict_below: bool,
) -> Result<Vec<u32>, NumError> {
    let width = end.saturating_sub(start).max(0) as usize;
    let v = match rat_valuation(r, p) {
        None => return Ok(vec![0; width]),
        Some(v) => v,
    };
    if start > v {
        return Err(NumError::WindowAboveValuation {
            start,
            valuation: v,
        });
    }
    if strict_below && start < v {
        return Err(NumError::WindowBelowValuation {
            start,
            valuation: v,
        });
    }
    let mut digits = vec![0u32; width];
    if end <= v {
        return Ok(digits);
    }
    // Unit part u = r / p^v = m/n with p dividing neither m nor n; its digits
    // at offsets 0..end-v are those of m * n^{-1} mod p^(end-v).
    let (m, _) = split_p(r.numer(), p);
    let (n, _) = split_p(r.denom(), p);
    let prec = (end - v) as u32;
    let p_big = BigInt::from(p);
    let modulus = p_big.pow(prec);
    let mut x = (&m * mod_inverse(&n, &modulus)).mod_floor(&modulus);
    for j in 0..prec as i64 {
        let (q, d) = x.div_rem(&p_big);
        let idx = v + j - start;
        if idx >= 0 && (idx as usize) < width {
            digits[idx as usize] = digit_to_u32(&d);
        }
        x = q;
    }
    Ok(digits)
}

fn digit_to_u32(d: &BigInt) -> u32 {
    let (_, words) = d.to_u32_digits();
    words.first().copied().unwrap_or(0)
}

/// Parses a digit string `d0.d1d2...@v` (digits from valuation `v`) into the
/// rational it denotes.
pub fn parse_padic_digits(s: &str, p: u32) -> Result<Rat, NumError> {
    let t = s.trim();
    let (digits_part, val_part) = t
        .split_once('@')
        .ok_or_else(|| parse_error("p-adic digits", s, "missing @valuation"))?;
    let v: i64 = val_part
        .trim()
        .parse()
        .map_err(|e: std::num::ParseIntError| parse_error("p-adic digits", s, e.to_string()))?;
    if digits_part.chars().filter(|&c| c == '.').count() > 1 {
        return Err(parse_error("p-adic digits", s, "more than one dot"));
    }
    let mut value = Rat::zero();
    let mut idx = 0i64;
    for c in digits_part.chars() {
        if c == '.' {
            continue;
        }
        let d = c.to_digit(p).ok_or_else(|| {
            parse_error("p-adic digits", s, format!("bad digit {c:?} for base {p}"))
        })?;
        value += Rat::from_integer(BigInt::from(d)) * pow_rat(p, v + idx);
        idx += 1;
    }
    if idx == 0 {
        return Err(parse_error("p-adic digits", s, "no digits"));
    }
    Ok(value)
}

/// Formats the digits of `r` over the window `[start, end)` as
/// `d0.d1d2...@start`.
pub fn format_padic_digits(r: &Rat, p: u32, start: i64, end: i64) -> Result<String, NumError> {
    let digits = padic_digits(r, p, start, end, false)?;
    let mut out = String::new();
    for (i, d) in digits.iter().enumerate() {
        out.push(std::char::from_digit(*d, p).expect("digit below p"));
        if i == 0 && digits.len() > 1 {
            out.push('.');
        }
    }
    out.push('@');
    out.push_str(&start.to_string());
    Ok(out)
}

fn pow_rat(p: u32, e: i64) -> Rat {
    let p_big = BigInt::from(p);
    if e >= 0 {
        Rat::from_integer(p_big.pow(e as u32))
    } else {
        Rat::new(BigInt::one(), p_big.pow((-e) as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent digit oracle: peels one digit at a time by matching
    /// valuations, never touching the modular-inverse path.
    fn oracle_digits(r: &Rat, p: u32, start: i64, end: i64) -> Vec<u32> {
        let mut rest = r.clone();
        let mut digits = Vec::new();
        for j in start..end {
            let mut found = 0u32;
            for d in 0..p {
                let cand = &rest - Rat::from_integer(BigInt::from(d)) * pow_rat(p, j);
                if rat_valuation(&cand, p).is_none_or(|v| v > j) {
                    found = d;
                    rest = cand;
                    break;
                }
            }
            digits.push(found);
        }
        digits
    }

    fn oracle_frac(r: &Rat, p: u32) -> Rat {
        match rat_valuation(r, p) {
            None => Rat::zero(),
            Some(v) if v >= 0 => Rat::zero(),
            Some(v) => {
                let digits = oracle_digits(r, p, v, 0);
                let mut acc = Rat::zero();
                for (i, d) in digits.iter().enumerate() {
                    acc += Rat::from_integer(BigInt::from(*d)) * pow_rat(p, v + i as i64);
                }
                acc
            }
        }
    }

    #[test]
    fn frac_part_examples() {
        // Frozen from the digit-peeling oracle.
        assert_eq!(oracle_frac(&rat(5, 2), 2), rat(1, 2));
        assert_eq!(frac_part(&rat(5, 2), 2).to_rat(), rat(1, 2));

        assert_eq!(frac_part(&rat(3, 1), 2).to_rat(), rat(0, 1));

        assert_eq!(oracle_frac(&rat(-1, 4), 2), rat(3, 4));
        assert_eq!(frac_part(&rat(-1, 4), 2).to_rat(), rat(3, 4));
    }

    #[test]
    fn frac_part_decomposition() {
        let mut rng = crate::sampling::stream_rng(7, 0);
        for _ in 0..1000 {
            let r = crate::sampling::rat(&mut rng, 60, 40);
            for p in [2u32, 3, 5] {
                let f = frac_part(&r, p).to_rat();
                let rest = &r - &f;
                assert!(f >= Rat::zero() && f < Rat::new(1.into(), 1.into()));
                assert!(
                    rat_valuation(&rest, p).is_none_or(|v| v >= 0),
                    "r={r} p={p}"
                );
                // frac_part vanishes exactly on p-integral inputs.
                let integral = rat_valuation(&r, p).is_none_or(|v| v >= 0);
                assert_eq!(f.is_zero(), integral);
            }
        }
    }

    #[test]
    fn digit_examples() {
        // p=2, 1/3 over [0,4): 3x = 1 mod 16 gives x = 11 = 1101b.
        assert_eq!(
            padic_digits(&rat(1, 3), 2, 0, 4, false).unwrap(),
            vec![1, 1, 0, 1]
        );
        assert_eq!(oracle_digits(&rat(1, 3), 2, 0, 4), vec![1, 1, 0, 1]);

        assert_eq!(
            padic_digits(&Rat::zero(), 2, -3, 3, false).unwrap(),
            vec![0; 6]
        );

        // 5/2 = 2^-1 + 2.
        assert_eq!(
            padic_digits(&rat(5, 2), 2, -1, 2, false).unwrap(),
            vec![1, 0, 1]
        );
        assert_eq!(oracle_digits(&rat(5, 2), 2, -1, 2), vec![1, 0, 1]);
    }

    #[test]
    fn digit_window_flags() {
        let r = rat(1, 1);
        assert!(matches!(
            padic_digits(&r, 2, -2, 2, true),
            Err(NumError::WindowBelowValuation { .. })
        ));
        assert_eq!(padic_digits(&r, 2, -2, 2, false).unwrap(), vec![0, 0, 1, 0]);
        assert!(matches!(
            padic_digits(&rat(1, 2), 2, 0, 3, false),
            Err(NumError::WindowAboveValuation { .. })
        ));
    }

    #[test]
    fn digits_match_oracle_randomized() {
        let mut rng = crate::sampling::stream_rng(8, 1);
        for _ in 0..300 {
            let r = crate::sampling::rat(&mut rng, 50, 30);
            for p in [2u32, 3] {
                let start = rat_valuation(&r, p).unwrap_or(0).min(0) - 1;
                let got = padic_digits(&r, p, start, start + 8, false).unwrap();
                assert_eq!(got, oracle_digits(&r, p, start, start + 8), "r={r} p={p}");
            }
        }
    }

    #[test]
    fn digits_reconstruct_sums() {
        // Additivity with carry: the window digits of r1 + r2 reconstruct the
        // sum to the window precision.
        let mut rng = crate::sampling::stream_rng(9, 2);
        for _ in 0..200 {
            let r1 = crate::sampling::rat(&mut rng, 30, 16);
            let r2 = crate::sampling::rat(&mut rng, 30, 16);
            let sum = &r1 + &r2;
            let p = 2u32;
            let start = rat_valuation(&sum, p)
                .unwrap_or(0)
                .min(rat_valuation(&r1, p).unwrap_or(0))
                .min(rat_valuation(&r2, p).unwrap_or(0))
                .min(0);
            let end = start + 10;
            let digits = padic_digits(&sum, p, start, end, false).unwrap();
            let mut acc = Rat::zero();
            for (i, d) in digits.iter().enumerate() {
                acc += Rat::from_integer(BigInt::from(*d)) * pow_rat(p, start + i as i64);
            }
            let diff = &sum - &acc;
            assert!(rat_valuation(&diff, p).is_none_or(|v| v >= end));
        }
    }

    #[test]
    fn digit_string_round_trip() {
        let r = parse_padic_digits("1.01@-1", 2).unwrap();
        assert_eq!(r, rat(5, 2));
        assert_eq!(format_padic_digits(&r, 2, -1, 2).unwrap(), "1.01@-1");
        assert!(parse_padic_digits("1.21@0", 2).is_err());
        assert!(parse_padic_digits("101", 2).is_err());
    }
}
