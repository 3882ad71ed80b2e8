//! Exact complex numbers of the form `sum c_j * e^{2*pi*i*phi_j}` with
//! rational coefficients and rational phases. Equality and zero-testing are
//! decided by reduction modulo the N-th cyclotomic polynomial, where N is the
//! least common modulus of the phases.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::angle::rat_to_f64;
use super::{parse_error, Angle, NumError, Rat};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycloError {
    /// The common phase modulus exceeds the configured cap; callers may retry
    /// in float mode.
    #[error("cyclotomic modulus {modulus} exceeds cap {cap}")]
    ModulusOverflow { modulus: u64, cap: u64 },
}

static CYCLO_CAP: AtomicU64 = AtomicU64::new(1 << 16);

pub fn cyclo_cap() -> u64 {
    CYCLO_CAP.load(Ordering::Relaxed)
}

/// Sets the process-wide cap on cyclotomic moduli.
pub fn set_cyclo_cap(cap: u64) {
    CYCLO_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// A finite sum of rational-phase roots of unity with rational coefficients.
/// Zero coefficients are never stored; the empty sum is zero.
#[derive(Debug, Clone)]
pub struct CycloComplex {
    terms: BTreeMap<Angle, Rat>,
}

impl CycloComplex {
    pub fn zero() -> Self {
        CycloComplex {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        CycloComplex::from_rat(Rat::one())
    }

    pub fn from_rat(c: Rat) -> Self {
        CycloComplex::from_term(Angle::zero(), c)
    }

    pub fn from_int(n: i64) -> Self {
        CycloComplex::from_rat(Rat::from_integer(BigInt::from(n)))
    }

    /// The root of unity `e^{2*pi*i*phase}`.
    pub fn root_of_unity(phase: Angle) -> Self {
        CycloComplex::from_term(phase, Rat::one())
    }

    pub fn from_term(phase: Angle, coeff: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(phase, coeff);
        }
        CycloComplex { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Angle, &Rat)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn insert(terms: &mut BTreeMap<Angle, Rat>, phase: Angle, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match terms.entry(phase) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let next = e.get() + &coeff;
                if next.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = next;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (phase, coeff) in &other.terms {
            Self::insert(&mut terms, phase.clone(), coeff.clone());
        }
        CycloComplex { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycloComplex {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (a1, c1) in &self.terms {
            for (a2, c2) in &other.terms {
                Self::insert(&mut terms, a1.add(a2), c1 * c2);
            }
        }
        CycloComplex { terms }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return CycloComplex::zero();
        }
        CycloComplex {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    /// Multiplication by the root of unity `e^{2*pi*i*phase}`.
    pub fn times_phase(&self, phase: &Angle) -> Self {
        CycloComplex {
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.add(phase), c.clone()))
                .collect(),
        }
    }

    /// Complex conjugation: negates every phase.
    pub fn conj(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (a, c) in &self.terms {
            Self::insert(&mut terms, a.neg(), c.clone());
        }
        CycloComplex { terms }
    }

    /// Least common modulus of the stored phases.
    pub fn modulus(&self) -> u64 {
        let mut n = BigInt::one();
        for a in self.terms.keys() {
            n = n.lcm(a.value().denom());
        }
        n.to_u64().unwrap_or(u64::MAX)
    }

    pub fn try_is_zero(&self) -> Result<bool, CycloError> {
        if self.terms.is_empty() {
            return Ok(true);
        }
        if self.terms.len() == 1 {
            // A single nonzero multiple of a root of unity is nonzero.
            return Ok(false);
        }
        Ok(self.try_canonicalize()?.terms.is_empty())
    }

    /// Zero test; panics if the cyclotomic cap is exceeded (use
    /// [`CycloComplex::try_is_zero`] to handle that case).
    pub fn is_zero(&self) -> bool {
        self.try_is_zero().expect("cyclotomic modulus over cap")
    }

    /// Canonical representative: phases rewritten over the common modulus N
    /// and reduced modulo the N-th cyclotomic polynomial. The result is empty
    /// exactly when the value is zero.
    pub fn try_canonicalize(&self) -> Result<Self, CycloError> {
        if self.terms.is_empty() {
            return Ok(self.clone());
        }
        let n = self.modulus();
        let cap = cyclo_cap();
        if n > cap {
            return Err(CycloError::ModulusOverflow { modulus: n, cap });
        }
        let n_big = BigInt::from(n);
        let mut poly: BTreeMap<u64, Rat> = BTreeMap::new();
        for (a, c) in &self.terms {
            let k = (a.value().numer() * &n_big / a.value().denom())
                .to_u64()
                .expect("phase exponent fits modulus");
            let entry = poly.entry(k).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                poly.remove(&k);
            }
        }
        let phi = cyclotomic_poly(n);
        reduce_mod_cyclotomic(&mut poly, &phi);
        let terms = poly
            .into_iter()
            .map(|(k, c)| (Angle::new(Rat::new(BigInt::from(k), n_big.clone())), c))
            .collect();
        Ok(CycloComplex { terms })
    }

    pub fn canonicalize(&self) -> Self {
        self.try_canonicalize()
            .expect("cyclotomic modulus over cap")
    }

    /// Evaluates as (re, im) in f64; used by float mode and sanity checks.
    pub fn eval_f64(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, c) in &self.terms {
            let phase = 2.0 * std::f64::consts::PI * a.to_f64();
            let cf = rat_to_f64(c);
            re += cf * phase.cos();
            im += cf * phase.sin();
        }
        (re, im)
    }

    pub fn abs_f64(&self) -> f64 {
        let (re, im) = self.eval_f64();
        (re * re + im * im).sqrt()
    }

    /// Parses literals like `1`, `-2/3`, `e(1/3)`, `1/2*e(-1/4)` joined by
    /// `+` / `-`.
    pub fn parse(s: &str) -> Result<Self, NumError> {
        let text = s.trim();
        if text.is_empty() {
            return Err(parse_error("cyclo", s, "empty literal"));
        }
        let mut acc = CycloComplex::zero();
        for piece in split_sum(text) {
            acc = acc.add(&parse_cyclo_term(&piece, s)?);
        }
        Ok(acc)
    }
}

fn split_sum(text: &str) -> Vec<String> {
    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '+' | '-' if depth == 0 && i > 0 && !current.trim().is_empty() => {
                pieces.push(current.clone());
                current.clear();
                if ch == '-' {
                    current.push('-');
                }
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    if !current.trim().is_empty() {
        pieces.push(current);
    }
    pieces
}

fn parse_cyclo_term(piece: &str, whole: &str) -> Result<CycloComplex, NumError> {
    let t = piece.trim();
    let (coeff_str, phase_str) = match t.find("e(") {
        Some(idx) => {
            let inner = t[idx + 2..]
                .strip_suffix(')')
                .ok_or_else(|| parse_error("cyclo", whole, "unclosed e("))?;
            let head = t[..idx].trim().trim_end_matches('*').trim();
            (head, Some(inner))
        }
        None => (t, None),
    };
    let coeff = match coeff_str {
        "" => Rat::one(),
        "-" => -Rat::one(),
        c => super::parse_rat(c)?,
    };
    let phase = match phase_str {
        Some(p) => Angle::new(super::parse_rat(p)?),
        None => Angle::zero(),
    };
    Ok(CycloComplex::from_term(phase, coeff))
}

impl PartialEq for CycloComplex {
    fn eq(&self, other: &Self) -> bool {
        if self.terms == other.terms {
            return true;
        }
        self.sub(other).is_zero()
    }
}

impl Eq for CycloComplex {}

impl fmt::Display for CycloComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if a.is_zero() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "e({a})")?;
            } else {
                write!(f, "{c}*e({a})")?;
            }
        }
        Ok(())
    }
}

/// Sparse monic integer polynomial as (exponent, coefficient) pairs.
type SparsePoly = Vec<(u64, BigInt)>;

fn cyclotomic_cache() -> &'static Mutex<BTreeMap<u64, Arc<SparsePoly>>> {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, Arc<SparsePoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// N-th cyclotomic polynomial via the divisor recurrence on the radical of N
/// followed by the substitution `x -> x^(N/rad(N))`.
pub(crate) fn cyclotomic_poly(n: u64) -> Arc<SparsePoly> {
    assert!(n >= 1);
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut rad = 1u64;
    let mut m = n;
    let mut q = 2u64;
    while q * q <= m {
        if m.is_multiple_of(q) {
            rad *= q;
            while m.is_multiple_of(q) {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        rad *= m;
    }

    // Phi_rad by the recurrence Phi_{rq}(x) = Phi_r(x^q) / Phi_r(x) over the
    // squarefree radical, starting from Phi_1 = x - 1.
    let mut dense: Vec<BigInt> = vec![BigInt::from(-1), BigInt::one()];
    let mut q = 2u64;
    let mut rest = rad;
    while rest > 1 {
        if rest.is_multiple_of(q) {
            rest /= q;
            let substituted = substitute_power(&dense, q as usize);
            dense = divide_exact(&substituted, &dense);
        }
        q += 1;
    }

    let stretch = n / rad;
    let sparse: SparsePoly = dense
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e as u64 * stretch, c.clone()))
        .collect();
    let arc = Arc::new(sparse);
    cyclotomic_cache().lock().unwrap().insert(n, arc.clone());
    arc
}

fn substitute_power(poly: &[BigInt], q: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); (poly.len() - 1) * q + 1];
    for (e, c) in poly.iter().enumerate() {
        out[e * q] = c.clone();
    }
    out
}

/// Exact division of integer polynomials (the divisor's leading coefficient
/// is a unit here).
fn divide_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    let lead = den[dn].clone();
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for i in (dn..rem.len()).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let q = &rem[i] / &lead;
        quot[i - dn] = q.clone();
        for (j, d) in den.iter().enumerate() {
            let delta = &q * d;
            rem[i - dn + j] -= delta;
        }
    }
    debug_assert!(rem.iter().all(BigInt::is_zero), "inexact division");
    while quot.len() > 1 && quot.last().is_some_and(BigInt::is_zero) {
        quot.pop();
    }
    quot
}

fn reduce_mod_cyclotomic(poly: &mut BTreeMap<u64, Rat>, phi: &SparsePoly) {
    let deg = phi.last().expect("nonempty cyclotomic").0;
    while let Some((&d, _)) = poly.iter().next_back() {
        if d < deg {
            break;
        }
        let c = poly.remove(&d).expect("just observed");
        let shift = d - deg;
        for (e, coeff) in phi.iter().take(phi.len() - 1) {
            let delta = &c * Rat::from_integer(coeff.clone());
            let entry = poly.entry(e + shift).or_insert_with(Rat::zero);
            *entry -= delta;
            if entry.is_zero() {
                poly.remove(&(e + shift));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys() {
        let check = |n: u64, expect: &[(u64, i64)]| {
            let got: Vec<(u64, BigInt)> = cyclotomic_poly(n).as_ref().clone();
            let want: Vec<(u64, BigInt)> =
                expect.iter().map(|(e, c)| (*e, BigInt::from(*c))).collect();
            assert_eq!(got, want, "Phi_{n}");
        };
        check(1, &[(0, -1), (1, 1)]);
        check(2, &[(0, 1), (1, 1)]);
        check(3, &[(0, 1), (1, 1), (2, 1)]);
        check(4, &[(0, 1), (2, 1)]);
        check(6, &[(0, 1), (1, -1), (2, 1)]);
        check(12, &[(0, 1), (2, -1), (4, 1)]);
        // Phi_{3 * 2^5}(x) = Phi_6(x^16).
        check(96, &[(0, 1), (16, -1), (32, 1)]);
        check(105, &cyclo105());
    }

    // Phi_105 is the first cyclotomic polynomial with a coefficient of
    // absolute value 2; frozen from the published coefficient table.
    fn cyclo105() -> Vec<(u64, i64)> {
        let coeffs: [(u64, i64); 33] = [
            (0, 1),
            (1, 1),
            (2, 1),
            (5, -1),
            (6, -1),
            (7, -2),
            (8, -1),
            (9, -1),
            (12, 1),
            (13, 1),
            (14, 1),
            (15, 1),
            (16, 1),
            (17, 1),
            (20, -1),
            (22, -1),
            (24, -1),
            (26, -1),
            (28, -1),
            (31, 1),
            (32, 1),
            (33, 1),
            (34, 1),
            (35, 1),
            (36, 1),
            (39, -1),
            (40, -1),
            (41, -2),
            (42, -1),
            (43, -1),
            (46, 1),
            (47, 1),
            (48, 1),
        ];
        coeffs.to_vec()
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let sum = CycloComplex::one()
            .add(&CycloComplex::root_of_unity(Angle::from_ints(1, 3)))
            .add(&CycloComplex::root_of_unity(Angle::from_ints(2, 3)));
        assert!(sum.is_zero());
        assert!(sum.canonicalize().terms.is_empty());
    }

    #[test]
    fn half_turn_is_minus_one() {
        let z = CycloComplex::root_of_unity(Angle::from_ints(1, 2));
        let c = z.canonicalize();
        assert_eq!(c, CycloComplex::from_int(-1));
        assert_eq!(c.terms.len(), 1);
        assert!(c.terms.contains_key(&Angle::zero()));
    }

    #[test]
    fn already_canonical() {
        let one = CycloComplex::one();
        assert_eq!(one.canonicalize(), one);
    }

    #[test]
    fn equality_across_presentations() {
        // e(1/6) - 1 equals e(1/3) after reduction.
        let lhs = CycloComplex::root_of_unity(Angle::from_ints(1, 6)).sub(&CycloComplex::one());
        let rhs = CycloComplex::root_of_unity(Angle::from_ints(1, 3));
        assert_eq!(lhs, rhs);
        assert_ne!(lhs, CycloComplex::root_of_unity(Angle::from_ints(2, 3)));
    }

    #[test]
    fn conjugation_and_norm() {
        let mut rng = crate::sampling::stream_rng(11, 0);
        for _ in 0..100 {
            let x = crate::sampling::cyclo(&mut rng, 3, 12);
            let norm = x.mul(&x.conj());
            // Conjugation-invariant canonical form: the norm is real.
            assert_eq!(norm, norm.conj());
        }
    }

    #[test]
    fn mul_assoc_comm_randomized() {
        let mut rng = crate::sampling::stream_rng(12, 0);
        for _ in 0..60 {
            let a = crate::sampling::cyclo(&mut rng, 3, 12);
            let b = crate::sampling::cyclo(&mut rng, 3, 12);
            let c = crate::sampling::cyclo(&mut rng, 3, 12);
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }

    #[test]
    fn zero_test_matches_float() {
        let mut rng = crate::sampling::stream_rng(13, 0);
        for _ in 0..200 {
            let x = crate::sampling::cyclo(&mut rng, 4, 12);
            let exact_zero = x.is_zero();
            let float_zero = x.abs_f64() < 1e-12;
            assert_eq!(exact_zero, float_zero, "value {x}");
        }
    }

    #[test]
    fn cap_overflow() {
        let old = cyclo_cap();
        set_cyclo_cap(8);
        let x = CycloComplex::root_of_unity(Angle::from_ints(1, 9)).add(&CycloComplex::one());
        assert!(matches!(
            x.try_is_zero(),
            Err(CycloError::ModulusOverflow { modulus: 9, cap: 8 })
        ));
        set_cyclo_cap(old);
        assert_eq!(x.try_is_zero(), Ok(false));
    }

    #[test]
    fn literal_parsing() {
        let x = CycloComplex::parse("1/2*e(1/3) + 1 - e(-1/4)").unwrap();
        let want = CycloComplex::from_term(Angle::from_ints(1, 3), rat(1, 2))
            .add(&CycloComplex::one())
            .sub(&CycloComplex::root_of_unity(Angle::from_ints(3, 4)));
        assert_eq!(x, want);
        let shown = x.to_string();
        assert_eq!(CycloComplex::parse(&shown).unwrap(), x);
        assert!(CycloComplex::parse("e(1/3").is_err());
    }
}
