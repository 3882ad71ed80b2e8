//! `GL_2(Z[1/p])` matrices, the linear-fractional action on `R x Q_p`, the
//! factorization through `SL_2` and a diagonal unit matrix, and the scaling
//! isomorphism between solenoidal groupoids.

use std::fmt;

use thiserror::Error;

use crate::exact::{NumError, PRational, Rat, SplitScalar};
use crate::groupoid::{Arrow, SolenoidalAction};
use crate::report::SuiteReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoebiusError {
    #[error("a - c*alpha vanishes in the {0} component")]
    SingularAt(&'static str),
    #[error("determinant {0} is not a unit +-p^k of Z[1/p]")]
    NotInGL(String),
    #[error("{0} is not a unit +-p^k of Z[1/p]")]
    NotAUnit(String),
    #[error("matrix is singular")]
    Singular,
}

/// A 2x2 matrix over `Z[1/p]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub a: PRational,
    pub b: PRational,
    pub c: PRational,
    pub d: PRational,
}

impl Mat2 {
    pub fn new(a: PRational, b: PRational, c: PRational, d: PRational) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(p: u32, a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(
            PRational::from_int(p, a),
            PRational::from_int(p, b),
            PRational::from_int(p, c),
            PRational::from_int(p, d),
        )
    }

    pub fn identity(p: u32) -> Self {
        Mat2::from_ints(p, 1, 0, 0, 1)
    }

    pub fn antidiagonal(p: u32) -> Self {
        Mat2::from_ints(p, 0, 1, 1, 0)
    }

    pub fn diagonal(e: PRational, f: PRational) -> Self {
        let p = e.prime();
        Mat2::new(e, PRational::zero(p), PRational::zero(p), f)
    }

    pub fn prime(&self) -> u32 {
        self.a.prime()
    }

    pub fn det(&self) -> PRational {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn is_sl2(&self) -> bool {
        self.det().is_one()
    }

    /// Member of `GL_2(Z[1/p])`: determinant a unit `+-p^k`.
    pub fn is_gl2(&self) -> bool {
        self.det().is_unit()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Mat2 {
            a: self.a.mul(&other.a).add(&self.b.mul(&other.c)),
            b: self.a.mul(&other.b).add(&self.b.mul(&other.d)),
            c: self.c.mul(&other.a).add(&self.d.mul(&other.c)),
            d: self.c.mul(&other.b).add(&self.d.mul(&other.d)),
        }
    }

    /// Inverse inside `GL_2(Z[1/p])`.
    pub fn inverse(&self) -> Result<Self, MoebiusError> {
        let det = self.det();
        if det.is_zero() {
            return Err(MoebiusError::Singular);
        }
        let det_inv = det
            .inv_unit()
            .map_err(|_| MoebiusError::NotInGL(det.to_string()))?;
        Ok(Mat2 {
            a: self.d.mul(&det_inv),
            b: self.b.neg().mul(&det_inv),
            c: self.c.neg().mul(&det_inv),
            d: self.a.mul(&det_inv),
        })
    }

    /// Parses a matrix literal `a,b;c,d` with `Z[1/p]` entries.
    pub fn parse(s: &str, p: u32) -> Result<Self, NumError> {
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(NumError::Parse {
                kind: "matrix",
                text: s.to_string(),
                reason: "expected two rows separated by ';'".into(),
            });
        }
        let parse_row = |row: &str| -> Result<(PRational, PRational), NumError> {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != 2 {
                return Err(NumError::Parse {
                    kind: "matrix",
                    text: s.to_string(),
                    reason: "expected two entries per row".into(),
                });
            }
            Ok((PRational::parse(cols[0], p)?, PRational::parse(cols[1], p)?))
        };
        let (a, b) = parse_row(rows[0])?;
        let (c, d) = parse_row(rows[1])?;
        Ok(Mat2::new(a, b, c, d))
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{};{},{}", self.a, self.b, self.c, self.d)
    }
}

/// The pullback `beta = M^{-1} * alpha = -(b - d*alpha) / (a - c*alpha)`,
/// computed componentwise on `(t, r)`.
pub fn mobius_pullback(m: &Mat2, alpha: &SplitScalar) -> Result<SplitScalar, MoebiusError> {
    let component = |x: &Rat, which: &'static str| -> Result<Rat, MoebiusError> {
        let denom = a_minus_c_alpha_component(m, x);
        if num_traits::Zero::is_zero(&denom) {
            return Err(MoebiusError::SingularAt(which));
        }
        let num = m.b.to_rat() - m.d.to_rat() * x;
        Ok(-num / denom)
    };
    Ok(SplitScalar::new(
        component(alpha.real(), "real")?,
        component(alpha.padic(), "p-adic")?,
    ))
}

fn a_minus_c_alpha_component(m: &Mat2, x: &Rat) -> Rat {
    m.a.to_rat() - m.c.to_rat() * x
}

/// `a - c*alpha` as a split scalar; the derived quantity every bibundle
/// formula is built from.
pub fn a_minus_c_alpha(m: &Mat2, alpha: &SplitScalar) -> SplitScalar {
    SplitScalar::new(
        a_minus_c_alpha_component(m, alpha.real()),
        a_minus_c_alpha_component(m, alpha.padic()),
    )
}

/// The forward action `M * alpha`, defined by pulling back along `M^{-1}`.
pub fn mobius_apply(m: &Mat2, alpha: &SplitScalar) -> Result<SplitScalar, MoebiusError> {
    mobius_pullback(&m.inverse()?, alpha)
}

/// Factors `M~ = M * M_eps` with `M` in `SL_2` and `M_eps = diag(eps, 1)`,
/// where `eps = det(M~)` must be a unit `+-p^k`.
pub fn factor_eps(m_tilde: &Mat2) -> Result<(Mat2, Mat2, PRational), MoebiusError> {
    let eps = m_tilde.det();
    if eps.is_zero() || !eps.is_unit() {
        return Err(MoebiusError::NotInGL(eps.to_string()));
    }
    let eps_inv = eps.inv_unit().expect("unit checked");
    let m = Mat2 {
        a: m_tilde.a.mul(&eps_inv),
        b: m_tilde.b.clone(),
        c: m_tilde.c.mul(&eps_inv),
        d: m_tilde.d.clone(),
    };
    let p = m_tilde.prime();
    let m_eps = Mat2::diagonal(eps.clone(), PRational::one(p));
    Ok((m, m_eps, eps))
}

/// The scaling isomorphism between solenoidal groupoids for `alpha` and
/// `eps * alpha`: `(n, z) -> (eps^{-1} n, z)`. Units map to units, and the
/// range of the image equals the range of the input.
pub fn mu_eps(
    eps: &PRational,
    arrow: &Arrow<SolenoidalAction>,
) -> Result<Arrow<SolenoidalAction>, MoebiusError> {
    if eps.is_zero() || !eps.is_unit() {
        return Err(MoebiusError::NotAUnit(eps.to_string()));
    }
    let eps_inv = eps.inv_unit().expect("unit checked");
    Ok(Arrow::new(arrow.g.mul(&eps_inv), arrow.src.clone()))
}

/// The scaled target system `S_{eps * alpha}` for [`mu_eps`] images.
pub fn scaled_system(sys: &SolenoidalAction, eps: &PRational) -> SolenoidalAction {
    SolenoidalAction::new(sys.p, sys.alpha.scale(eps), sys.level)
}

/// Random `SL_2(Z[1/p])` matrix with `c` a unit `+-p^k`: pick `a`, `d`, `c`
/// and solve `b = (ad - 1)/c`, which stays in `Z[1/p]` exactly because `c`
/// is a unit.
pub fn sample_strict_sl2(
    rng: &mut rand_chacha::ChaCha8Rng,
    p: u32,
    c_exp_lo: i64,
    c_exp_hi: i64,
) -> Mat2 {
    loop {
        let a = crate::sampling::prational(rng, p, 12, -2, 2);
        let d = crate::sampling::prational(rng, p, 12, -2, 2);
        let c = crate::sampling::unit(rng, p, c_exp_lo, c_exp_hi);
        let b = match a.mul(&d).sub(&PRational::one(p)).checked_div(&c) {
            Some(b) => b,
            None => continue,
        };
        let m = Mat2::new(a, b, c, d);
        debug_assert!(m.is_sl2());
        return m;
    }
}

/// For `c = 0` the pullback is an affine map `beta = eps*alpha + n` with
/// `eps` a unit and `n` in `Z[1/p]`; returns `(eps, n)`.
pub fn c_zero_affine_parts(m: &Mat2) -> Result<(PRational, PRational), MoebiusError> {
    if !m.c.is_zero() {
        return Err(MoebiusError::NotAUnit("c != 0".into()));
    }
    if m.a.is_zero() {
        return Err(MoebiusError::Singular);
    }
    // beta = -(b - d*alpha)/a = (d/a)*alpha - b/a.
    let a_inv =
        m.a.inv_unit()
            .map_err(|_| MoebiusError::NotInGL(m.a.to_string()))?;
    let eps = m.d.mul(&a_inv);
    let n = m.b.neg().mul(&a_inv);
    Ok((eps, n))
}

/// Standalone functoriality check for one scaling isomorphism, used by the
/// matrix-route pipeline when a determinant unit is split off.
pub fn mu_eps_check(
    sys: &SolenoidalAction,
    eps: &PRational,
    samples: u64,
    seed: u64,
    stream: u64,
    mode: &crate::verify::EqMode,
) -> crate::report::Check {
    use crate::groupoid::{compose, invert, range, ActionSystem};
    let mut rng = crate::sampling::stream_rng(seed, stream);
    let mut check = crate::report::Check::new(format!("scaling_iso[eps={eps}]"));
    let target = scaled_system(sys, eps);
    for _ in 0..samples {
        let n1 = sys.sample_g(&mut rng);
        let n2 = sys.sample_g(&mut rng);
        let z = sys.sample_x(&mut rng);
        let inner = Arrow::<SolenoidalAction>::new(n2, z);
        let outer = Arrow::<SolenoidalAction>::new(n1, range(sys, &inner));
        let ok = (|| -> Option<bool> {
            let img_outer = mu_eps(eps, &outer).ok()?;
            let img_inner = mu_eps(eps, &inner).ok()?;
            let composed = compose(sys, mode, &outer, &inner).ok()?;
            let img_composed = compose(&target, mode, &img_outer, &img_inner).ok()?;
            Some(
                img_composed == mu_eps(eps, &composed).ok()?
                    && range(&target, &img_outer) == range(sys, &outer)
                    && invert(&target, &img_outer) == mu_eps(eps, &invert(sys, &outer)).ok()?
                    && mu_eps(&eps.inv_unit().ok()?, &img_outer).ok()? == outer,
            )
        })()
        .unwrap_or(false);
        check.record(ok, || format!("n1={} n2={}", outer.g, inner.g));
    }
    check
}

/// Options for [`moebius_suite`].
#[derive(Debug, Clone, Copy)]
pub struct MoebiusOptions {
    pub samples: u64,
    pub seed: u64,
    pub stream: u64,
    pub mode: crate::verify::EqMode,
}

/// The matrix-layer suite: the pullback group law, the factorization through
/// a diagonal unit, functoriality of the scaling isomorphism, the two
/// diagonal equivalences (sign flip and prime power), and the affine route
/// for `c = 0`.
pub fn moebius_suite(p: u32, alpha: &SplitScalar, opts: &MoebiusOptions) -> SuiteReport {
    use crate::groupoid::{compose, invert, range, ActionSystem};
    use crate::report::Check;
    use crate::sampling;

    let mode = &opts.mode;
    let mut suite = SuiteReport::new(format!("moebius[p={p}, alpha={alpha}]"));

    // Group law (M M') . alpha = M . (M' . alpha) wherever defined.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(1));
        let mut check = Check::new("pullback_group_law");
        let mut done = 0;
        while done < opts.samples {
            let m1 = sample_strict_sl2(&mut rng, p, -3, 3);
            let m2 = sample_strict_sl2(&mut rng, p, -3, 3);
            let inner = match mobius_pullback(&m1, alpha) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let (lhs, rhs) = match (
                mobius_pullback(&m2, &inner),
                mobius_pullback(&m1.mul(&m2), alpha),
            ) {
                (Ok(l), Ok(r)) => (l, r),
                _ => continue,
            };
            check.record(mode.split_eq(&lhs, &rhs), || format!("m1={m1} m2={m2}"));
            done += 1;
        }
        suite.push(check.finish());
    }

    // Factorization: M in SL_2, M_eps diagonal, exact reassembly.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(2));
        let mut check = Check::new("factor_reassembly");
        for _ in 0..opts.samples {
            let sl = sample_strict_sl2(&mut rng, p, -3, 3);
            let eps = sampling::unit(&mut rng, p, -3, 3);
            let m_tilde = sl.mul(&Mat2::diagonal(eps, PRational::one(p)));
            let ok = factor_eps(&m_tilde)
                .map(|(m, m_eps, _)| m.is_sl2() && m.mul(&m_eps) == m_tilde)
                .unwrap_or(false);
            check.record(ok, || format!("m~={m_tilde}"));
        }
        suite.push(check.finish());
    }

    // Functoriality of the scaling isomorphism on composable pairs, with
    // range preservation and the inverse isomorphism.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(3));
        let mut check = Check::new("mu_eps_functoriality");
        let sys = SolenoidalAction::new(p, alpha.clone(), 8);
        for _ in 0..opts.samples {
            let eps = sampling::unit(&mut rng, p, -2, 2);
            let target = scaled_system(&sys, &eps);
            let n1 = sys.sample_g(&mut rng);
            let n2 = sys.sample_g(&mut rng);
            let z = sys.sample_x(&mut rng);
            let inner = Arrow::<SolenoidalAction>::new(n2, z);
            let outer = Arrow::<SolenoidalAction>::new(n1, range(&sys, &inner));
            let ok = (|| -> Result<bool, MoebiusError> {
                let img_outer = mu_eps(&eps, &outer)?;
                let img_inner = mu_eps(&eps, &inner)?;
                let composed = compose(&sys, mode, &outer, &inner).expect("constructed");
                let img_composed = compose(&target, mode, &img_outer, &img_inner)
                    .map_err(|_| MoebiusError::Singular)?;
                let eps_inv = eps.inv_unit().map_err(|_| MoebiusError::Singular)?;
                Ok(img_composed == mu_eps(&eps, &composed)?
                    && range(&target, &img_outer) == range(&sys, &outer)
                    && invert(&target, &img_outer) == mu_eps(&eps, &invert(&sys, &outer))?
                    && mu_eps(&eps_inv, &img_outer)? == outer)
            })()
            .unwrap_or(false);
            check.record(ok, || format!("eps={eps} n1={} n2={}", outer.g, inner.g));
        }
        suite.push(check.finish());
    }

    // The two diagonal equivalences: alpha ~ -alpha and alpha ~ p^l alpha.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(4));
        let mut check = Check::new("diagonal_unit_equivalences");
        let sys = SolenoidalAction::new(p, alpha.clone(), 8);
        let cases: Vec<(Mat2, PRational)> = vec![
            (
                Mat2::diagonal(PRational::from_int(p, -1), PRational::one(p)),
                PRational::from_int(p, -1),
            ),
            (
                Mat2::diagonal(PRational::unit_pow(p, 1, 2), PRational::one(p)),
                PRational::unit_pow(p, 1, 2),
            ),
        ];
        for (m_tilde, want_eps) in cases {
            for _ in 0..opts.samples.min(50) {
                let ok = (|| -> Option<bool> {
                    let (m, m_eps, eps) = factor_eps(&m_tilde).ok()?;
                    let target = scaled_system(&sys, &eps);
                    let n = sys.sample_g(&mut rng);
                    let z = sys.sample_x(&mut rng);
                    let arrow = Arrow::<SolenoidalAction>::new(n, z);
                    let img = mu_eps(&eps, &arrow).ok()?;
                    Some(
                        eps == want_eps
                            && m.is_sl2()
                            && m.mul(&m_eps) == m_tilde
                            && range(&target, &img) == range(&sys, &arrow)
                            && mu_eps(&eps.inv_unit().ok()?, &img).ok()? == arrow,
                    )
                })()
                .unwrap_or(false);
                check.record(ok, || format!("m~={m_tilde}"));
            }
        }
        suite.push(check.finish());
    }

    // c = 0: the pullback groupoid equals the scaled groupoid actionwise.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(5));
        let mut check = Check::new("c_zero_affine_route");
        for _ in 0..opts.samples {
            let a = sampling::unit(&mut rng, p, -2, 2);
            let b = sampling::prational(&mut rng, p, 10, -2, 2);
            let d = a.inv_unit().expect("unit");
            let m = Mat2::new(a, b, PRational::zero(p), d);
            let ok = (|| -> Option<bool> {
                let (eps, off) = c_zero_affine_parts(&m).ok()?;
                let beta = mobius_pullback(&m, alpha).ok()?;
                let decomposed = beta == alpha.scale(&eps).add(&SplitScalar::delta(&off));
                let s_beta = SolenoidalAction::new(p, beta, 8);
                let s_scaled = SolenoidalAction::new(p, alpha.scale(&eps), 8);
                let q = sampling::prational(&mut rng, p, 20, -3, 3);
                let z = s_beta.sample_x(&mut rng);
                Some(decomposed && mode.point_eq(&s_beta.act(&q, &z), &s_scaled.act(&q, &z)))
            })()
            .unwrap_or(false);
            check.record(ok, || format!("m={m}"));
        }
        suite.push(check.finish());
    }

    suite
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{compose, invert, range, ActionSystem};
    use crate::sampling;
    use crate::verify::EqMode;

    fn alpha() -> SplitScalar {
        SplitScalar::from_ints(1, 3, 5, 2)
    }

    #[test]
    fn pullback_examples() {
        // Antidiagonal matrix inverts alpha componentwise.
        let m = Mat2::antidiagonal(2);
        assert_eq!(
            mobius_pullback(&m, &alpha()).unwrap(),
            SplitScalar::from_ints(3, 1, 2, 5)
        );

        assert_eq!(
            mobius_pullback(&Mat2::identity(2), &alpha()).unwrap(),
            alpha()
        );

        // Frozen from the componentwise rational oracle -(1-2x)/(1-x).
        let m = Mat2::from_ints(2, 1, 1, 1, 2);
        assert_eq!(
            mobius_pullback(&m, &alpha()).unwrap(),
            SplitScalar::from_ints(-1, 2, -8, 3)
        );
    }

    #[test]
    fn singular_pullback() {
        // a - c*alpha has real component 0 when alpha_t = a/c.
        let m = Mat2::from_ints(2, 1, 0, 3, 1);
        let bad = SplitScalar::from_ints(1, 3, 1, 1);
        assert_eq!(
            mobius_pullback(&m, &bad),
            Err(MoebiusError::SingularAt("real"))
        );
    }

    #[test]
    fn group_law_randomized() {
        let mut rng = sampling::stream_rng(31, 0);
        let mut tested = 0;
        while tested < 100 {
            let m1 = sample_strict_sl2(&mut rng, 2, -3, 3);
            let m2 = sample_strict_sl2(&mut rng, 2, -3, 3);
            let a = alpha();
            let inner = match mobius_pullback(&m1, &a) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let lhs = match mobius_pullback(&m2, &inner) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let rhs = match mobius_pullback(&m1.mul(&m2), &a) {
                Ok(v) => v,
                Err(_) => continue,
            };
            assert_eq!(lhs, rhs, "m1={m1} m2={m2}");
            tested += 1;
        }
    }

    #[test]
    fn factorization_examples() {
        // diag(-1, 1): eps = -1 and the SL_2 part is the identity.
        let mt = Mat2::from_ints(2, -1, 0, 0, 1);
        let (m, m_eps, eps) = factor_eps(&mt).unwrap();
        assert_eq!(eps, PRational::from_int(2, -1));
        assert_eq!(m, Mat2::identity(2));
        assert_eq!(m.mul(&m_eps), mt);

        // An SL_2 input factors trivially.
        let sl = Mat2::from_ints(2, 1, 1, 1, 2);
        let (m, m_eps, eps) = factor_eps(&sl).unwrap();
        assert_eq!(m, sl);
        assert_eq!(m_eps, Mat2::identity(2));
        assert!(eps.is_one());

        // diag(p^2, 1): eps = 4.
        let mt = Mat2::from_ints(2, 4, 0, 0, 1);
        let (m, m_eps, eps) = factor_eps(&mt).unwrap();
        assert_eq!(eps, PRational::from_int(2, 4));
        assert!(m.is_sl2());
        assert_eq!(m.mul(&m_eps), mt);

        // Non-unit determinant is rejected.
        assert!(matches!(
            factor_eps(&Mat2::from_ints(2, 3, 0, 0, 1)),
            Err(MoebiusError::NotInGL(_))
        ));
    }

    #[test]
    fn factorization_randomized() {
        let mut rng = sampling::stream_rng(32, 0);
        for _ in 0..100 {
            let sl = sample_strict_sl2(&mut rng, 2, -3, 3);
            let eps = sampling::unit(&mut rng, 2, -3, 3);
            let mt = sl.mul(&Mat2::diagonal(eps, PRational::one(2)));
            let (m, m_eps, _) = factor_eps(&mt).unwrap();
            assert!(m.is_sl2());
            assert_eq!(m.mul(&m_eps), mt);
        }
    }

    #[test]
    fn mu_eps_is_identity_for_unit_eps() {
        let sys = SolenoidalAction::new(2, alpha(), 8);
        let mut rng = sampling::stream_rng(33, 0);
        let one = PRational::one(2);
        for _ in 0..20 {
            let g = sys.sample_g(&mut rng);
            let x = sys.sample_x(&mut rng);
            let arrow = Arrow::new(g, x);
            assert_eq!(mu_eps(&one, &arrow).unwrap(), arrow);
        }
        assert!(matches!(
            mu_eps(
                &PRational::from_int(2, 3),
                &Arrow::new(one, sys.sample_x(&mut rng))
            ),
            Err(MoebiusError::NotAUnit(_))
        ));
    }

    #[test]
    fn mu_eps_preserves_structure() {
        let sys = SolenoidalAction::new(2, alpha(), 8);
        let eps = PRational::new(2, 1, 1); // eps = p
        let target = scaled_system(&sys, &eps);
        let mode = EqMode::Exact;
        let mut rng = sampling::stream_rng(34, 0);
        for _ in 0..100 {
            let n1 = sys.sample_g(&mut rng);
            let n2 = sys.sample_g(&mut rng);
            let z = sys.sample_x(&mut rng);
            let inner = Arrow::<SolenoidalAction>::new(n2, z);
            let outer = Arrow::<SolenoidalAction>::new(n1, range(&sys, &inner));

            // Ranges agree: pi(eps^{-1} n * eps alpha) = pi(n alpha).
            let img = mu_eps(&eps, &outer).unwrap();
            assert_eq!(range(&target, &img), range(&sys, &outer));

            // Functor on composition and inverses.
            let composed = compose(&sys, &mode, &outer, &inner).unwrap();
            let img_inner = mu_eps(&eps, &inner).unwrap();
            let img_composed = compose(&target, &mode, &img, &img_inner).unwrap();
            assert_eq!(img_composed, mu_eps(&eps, &composed).unwrap());
            assert_eq!(
                invert(&target, &img),
                mu_eps(&eps, &invert(&sys, &outer)).unwrap()
            );

            // mu_{eps^{-1}} inverts mu_eps.
            let back = mu_eps(&eps.inv_unit().unwrap(), &img).unwrap();
            assert_eq!(back, outer);
        }
    }

    #[test]
    fn mu_eps_power_example() {
        // eps = p sends (1/p, z) to (1/p^2, z).
        let sys = SolenoidalAction::new(2, alpha(), 6);
        let eps = PRational::new(2, 1, 1);
        let z = pi_map_sample();
        let arrow = Arrow::<SolenoidalAction>::new(PRational::new(2, 1, -1), z.clone());
        let img = mu_eps(&eps, &arrow).unwrap();
        assert_eq!(img.g, PRational::new(2, 1, -2));
        assert_eq!(img.src, z);
        let target = scaled_system(&sys, &eps);
        assert_eq!(range(&target, &img), range(&sys, &arrow));
    }

    fn pi_map_sample() -> crate::solenoid::SolenoidPoint {
        crate::solenoid::pi_map(2, &SplitScalar::from_ints(2, 7, 1, 5), 6)
    }

    #[test]
    fn c_zero_route_matches_scaled_action() {
        // For c = 0 the pullback groupoid and the scaled groupoid have the
        // same action: the affine part acts through the kernel.
        let mut rng = sampling::stream_rng(35, 0);
        for _ in 0..50 {
            let a = sampling::unit(&mut rng, 2, -2, 2);
            let b = sampling::prational(&mut rng, 2, 10, -2, 2);
            let d = a.inv_unit().unwrap();
            let m = Mat2::new(a, b, PRational::zero(2), d);
            assert!(m.is_sl2());
            let (eps, n) = c_zero_affine_parts(&m).unwrap();
            let beta = mobius_pullback(&m, &alpha()).unwrap();
            assert_eq!(
                beta,
                alpha().scale(&eps).add(&SplitScalar::delta(&n)),
                "affine decomposition"
            );

            let s_beta = SolenoidalAction::new(2, beta, 8);
            let s_scaled = SolenoidalAction::new(2, alpha().scale(&eps), 8);
            let q = sampling::prational(&mut rng, 2, 20, -3, 3);
            let z = s_beta.sample_x(&mut rng);
            assert_eq!(s_beta.act(&q, &z), s_scaled.act(&q, &z), "m={m} q={q}");
        }
    }

    #[test]
    fn suite_passes() {
        let report = moebius_suite(
            2,
            &alpha(),
            &MoebiusOptions {
                samples: 40,
                seed: 42,
                stream: 0,
                mode: EqMode::Exact,
            },
        );
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn matrix_literals() {
        let m = Mat2::parse("1,1;1,2", 2).unwrap();
        assert_eq!(m, Mat2::from_ints(2, 1, 1, 1, 2));
        let m = Mat2::parse("1/p^2,0;0,1", 2).unwrap();
        assert_eq!(m.a, PRational::new(2, 1, -2));
        assert!(Mat2::parse("1,1;1", 2).is_err());
        assert!(Mat2::parse("1,1;1/3,2", 2).is_err());
    }
}
