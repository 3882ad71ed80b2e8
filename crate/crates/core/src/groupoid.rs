//! Generic action-groupoid engine. An arrow stores its group element and its
//! source point; the range is always computed, never stored. Three instances
//! live here: the solenoidal groupoid (Z[1/p] acting on the solenoid through
//! a scaled exponential), the full solenoidal groupoid (R x Q_p acting on a
//! pair of solenoids), and the circle-rotation groupoid behind the
//! noncommutative torus.

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{PRational, Rat, SplitScalar};
use crate::report::{Check, SuiteReport};
use crate::sampling;
use crate::solenoid::{act_rho, pi_map, SolenoidPoint};
use crate::verify::EqMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("arrows do not match: source of the left factor != range of the right factor")]
    NotComposable,
}

/// A group acting on a space; the data of an action groupoid.
pub trait ActionSystem {
    type G: Clone + PartialEq + fmt::Debug + fmt::Display;
    type X: Clone + PartialEq + fmt::Debug + fmt::Display;

    fn name(&self) -> String;
    fn g_zero(&self) -> Self::G;
    fn g_add(&self, a: &Self::G, b: &Self::G) -> Self::G;
    fn g_neg(&self, a: &Self::G) -> Self::G;
    fn act(&self, g: &Self::G, x: &Self::X) -> Self::X;
    fn x_eq(&self, mode: &EqMode, a: &Self::X, b: &Self::X) -> bool;
    fn sample_g(&self, rng: &mut ChaCha8Rng) -> Self::G;
    fn sample_x(&self, rng: &mut ChaCha8Rng) -> Self::X;
}

/// An arrow `(g, x)` with source `x` and range `g * x`.
pub struct Arrow<S: ActionSystem> {
    pub g: S::G,
    pub src: S::X,
}

impl<S: ActionSystem> Arrow<S> {
    pub fn new(g: S::G, src: S::X) -> Self {
        Arrow { g, src }
    }
}

impl<S: ActionSystem> Clone for Arrow<S> {
    fn clone(&self) -> Self {
        Arrow {
            g: self.g.clone(),
            src: self.src.clone(),
        }
    }
}

impl<S: ActionSystem> PartialEq for Arrow<S> {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.src == other.src
    }
}

impl<S: ActionSystem> fmt::Debug for Arrow<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Arrow")
            .field("g", &self.g)
            .field("src", &self.src)
            .finish()
    }
}

impl<S: ActionSystem> fmt::Display for Arrow<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.g, self.src)
    }
}

pub fn unit<S: ActionSystem>(sys: &S, x: &S::X) -> Arrow<S> {
    Arrow::new(sys.g_zero(), x.clone())
}

pub fn source<S: ActionSystem>(gamma: &Arrow<S>) -> S::X {
    gamma.src.clone()
}

pub fn range<S: ActionSystem>(sys: &S, gamma: &Arrow<S>) -> S::X {
    sys.act(&gamma.g, &gamma.src)
}

/// `(g', x') * (g, x) = (g' + g, x)` whenever `x' = g * x`.
pub fn compose<S: ActionSystem>(
    sys: &S,
    mode: &EqMode,
    left: &Arrow<S>,
    right: &Arrow<S>,
) -> Result<Arrow<S>, ComposeError> {
    if !sys.x_eq(mode, &left.src, &range(sys, right)) {
        return Err(ComposeError::NotComposable);
    }
    Ok(Arrow::new(sys.g_add(&left.g, &right.g), right.src.clone()))
}

/// `(g, x)^{-1} = (-g, g * x)`.
pub fn invert<S: ActionSystem>(sys: &S, gamma: &Arrow<S>) -> Arrow<S> {
    Arrow::new(sys.g_neg(&gamma.g), range(sys, gamma))
}

/// The solenoidal groupoid: `Z[1/p]` acting on the level-L solenoid by
/// `n * z = pi(n * alpha) * z`.
#[derive(Debug, Clone)]
pub struct SolenoidalAction {
    pub p: u32,
    pub alpha: SplitScalar,
    pub level: u32,
}

impl SolenoidalAction {
    pub fn new(p: u32, alpha: SplitScalar, level: u32) -> Self {
        SolenoidalAction { p, alpha, level }
    }
}

impl ActionSystem for SolenoidalAction {
    type G = PRational;
    type X = SolenoidPoint;

    fn name(&self) -> String {
        format!(
            "S_alpha[p={}, alpha={}, L={}]",
            self.p, self.alpha, self.level
        )
    }

    fn g_zero(&self) -> PRational {
        PRational::zero(self.p)
    }

    fn g_add(&self, a: &PRational, b: &PRational) -> PRational {
        a.add(b)
    }

    fn g_neg(&self, a: &PRational) -> PRational {
        a.neg()
    }

    fn act(&self, g: &PRational, x: &SolenoidPoint) -> SolenoidPoint {
        act_rho(self.p, &self.alpha.scale(g), x)
    }

    fn x_eq(&self, mode: &EqMode, a: &SolenoidPoint, b: &SolenoidPoint) -> bool {
        mode.point_eq(a, b)
    }

    fn sample_g(&self, rng: &mut ChaCha8Rng) -> PRational {
        sampling::prational(rng, self.p, 40, -3, 3)
    }

    fn sample_x(&self, rng: &mut ChaCha8Rng) -> SolenoidPoint {
        pi_map(self.p, &sampling::split(rng, 30, 20), self.level)
    }
}

/// A pair of solenoid points, the unit space of the full solenoidal groupoid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint(pub SolenoidPoint, pub SolenoidPoint);

impl fmt::Display for PairPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// The full solenoidal groupoid: `R x Q_p` acting on `S_p x S_p` by
/// `q * (x, y) = (pi(q) x, pi(q alpha) y)`.
#[derive(Debug, Clone)]
pub struct FullSolenoidalAction {
    pub p: u32,
    pub alpha: SplitScalar,
    pub level: u32,
}

impl FullSolenoidalAction {
    pub fn new(p: u32, alpha: SplitScalar, level: u32) -> Self {
        FullSolenoidalAction { p, alpha, level }
    }
}

impl ActionSystem for FullSolenoidalAction {
    type G = SplitScalar;
    type X = PairPoint;

    fn name(&self) -> String {
        format!(
            "full_S_alpha[p={}, alpha={}, L={}]",
            self.p, self.alpha, self.level
        )
    }

    fn g_zero(&self) -> SplitScalar {
        SplitScalar::zero()
    }

    fn g_add(&self, a: &SplitScalar, b: &SplitScalar) -> SplitScalar {
        a.add(b)
    }

    fn g_neg(&self, a: &SplitScalar) -> SplitScalar {
        a.neg()
    }

    fn act(&self, g: &SplitScalar, x: &PairPoint) -> PairPoint {
        PairPoint(
            act_rho(self.p, g, &x.0),
            act_rho(self.p, &g.mul(&self.alpha), &x.1),
        )
    }

    fn x_eq(&self, mode: &EqMode, a: &PairPoint, b: &PairPoint) -> bool {
        mode.point_eq(&a.0, &b.0) && mode.point_eq(&a.1, &b.1)
    }

    fn sample_g(&self, rng: &mut ChaCha8Rng) -> SplitScalar {
        sampling::split(rng, 20, 12)
    }

    fn sample_x(&self, rng: &mut ChaCha8Rng) -> PairPoint {
        PairPoint(
            pi_map(self.p, &sampling::split(rng, 20, 12), self.level),
            pi_map(self.p, &sampling::split(rng, 20, 12), self.level),
        )
    }
}

/// The circle-rotation groupoid: `Z` acting on the circle (a level-0
/// solenoid point) by rotation by `theta`.
#[derive(Debug, Clone)]
pub struct CircleRotation {
    pub theta: Rat,
}

impl CircleRotation {
    pub fn new(theta: Rat) -> Self {
        CircleRotation { theta }
    }
}

impl ActionSystem for CircleRotation {
    type G = BigInt;
    type X = SolenoidPoint;

    fn name(&self) -> String {
        format!("T_theta[theta={}]", self.theta)
    }

    fn g_zero(&self) -> BigInt {
        BigInt::from(0)
    }

    fn g_add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }

    fn g_neg(&self, a: &BigInt) -> BigInt {
        -a
    }

    fn act(&self, g: &BigInt, x: &SolenoidPoint) -> SolenoidPoint {
        let shift = Rat::from_integer(g.clone()) * &self.theta;
        act_rho(x.prime(), &SplitScalar::real_only(&shift), x)
    }

    fn x_eq(&self, mode: &EqMode, a: &SolenoidPoint, b: &SolenoidPoint) -> bool {
        mode.point_eq(a, b)
    }

    fn sample_g(&self, rng: &mut ChaCha8Rng) -> BigInt {
        BigInt::from(rng.random_range(-64i64..=64))
    }

    fn sample_x(&self, rng: &mut ChaCha8Rng) -> SolenoidPoint {
        // Any single angle is a coherent level-0 tower.
        crate::solenoid::SolenoidPoint::from_angles(2, vec![sampling::angle(rng, 24)])
            .expect("level-0 towers are coherent")
    }
}

/// Samples composable triples constructively and checks the groupoid axioms:
/// source/range compatibility, associativity, unit laws, inverse laws.
pub fn axiom_suite<S: ActionSystem>(
    sys: &S,
    n_samples: u64,
    seed: u64,
    stream: u64,
    mode: &EqMode,
) -> SuiteReport {
    let mut rng = sampling::stream_rng(seed, stream);
    let mut source_range = Check::new("source_range");
    let mut associativity = Check::new("associativity");
    let mut unit_laws = Check::new("unit_laws");
    let mut inverse_laws = Check::new("inverse_laws");

    for _ in 0..n_samples {
        let g1 = sys.sample_g(&mut rng);
        let g2 = sys.sample_g(&mut rng);
        let g3 = sys.sample_g(&mut rng);
        let x = sys.sample_x(&mut rng);

        // Composable triple built from the inside out.
        let delta = Arrow::<S>::new(g3, x.clone());
        let eta = Arrow::<S>::new(g2, range(sys, &delta));
        let gamma = Arrow::<S>::new(g1, range(sys, &eta));

        let ge = compose(sys, mode, &gamma, &eta).expect("constructed composable");
        let sr_ok = sys.x_eq(mode, &range(sys, &ge), &range(sys, &gamma))
            && sys.x_eq(mode, &source(&ge), &source(&eta));
        source_range.record(sr_ok, || format!("gamma={gamma} eta={eta}"));

        let ed = compose(sys, mode, &eta, &delta).expect("constructed composable");
        let assoc_ok = match (
            compose(sys, mode, &ge, &delta),
            compose(sys, mode, &gamma, &ed),
        ) {
            (Ok(l), Ok(r)) => l.g == r.g && sys.x_eq(mode, &l.src, &r.src),
            _ => false,
        };
        associativity.record(assoc_ok, || {
            format!("gamma={gamma} eta={eta} delta={delta}")
        });

        let u_src = unit(sys, &source(&gamma));
        let u_rng = unit(sys, &range(sys, &gamma));
        let unit_ok = compose(sys, mode, &gamma, &u_src)
            .map(|a| a.g == gamma.g && sys.x_eq(mode, &a.src, &gamma.src))
            .unwrap_or(false)
            && compose(sys, mode, &u_rng, &gamma)
                .map(|a| a.g == gamma.g && sys.x_eq(mode, &a.src, &gamma.src))
                .unwrap_or(false);
        unit_laws.record(unit_ok, || format!("gamma={gamma}"));

        let inv = invert(sys, &gamma);
        let inv_ok = compose(sys, mode, &gamma, &inv)
            .map(|a| a.g == sys.g_zero() && sys.x_eq(mode, &a.src, &range(sys, &gamma)))
            .unwrap_or(false)
            && compose(sys, mode, &inv, &gamma)
                .map(|a| a.g == sys.g_zero() && sys.x_eq(mode, &a.src, &source(&gamma)))
                .unwrap_or(false)
            && invert(sys, &inv).g == gamma.g
            && sys.x_eq(mode, &invert(sys, &inv).src, &gamma.src);
        inverse_laws.record(inv_ok, || format!("gamma={gamma}"));
    }

    let mut suite = SuiteReport::new(format!("groupoid_axioms[{}]", sys.name()));
    suite.push(source_range.finish());
    suite.push(associativity.finish());
    suite.push(unit_laws.finish());
    suite.push(inverse_laws.finish());
    suite
}

/// The immersion of the solenoidal groupoid into the full one:
/// `i(n, z) = (delta(n), (1, z))`. Checks that the image arrows stay in the
/// reduced set, and that `i` preserves composition and inverses.
pub fn immersion_check(
    sys: &SolenoidalAction,
    n_samples: u64,
    seed: u64,
    stream: u64,
    mode: &EqMode,
) -> Check {
    let full = FullSolenoidalAction::new(sys.p, sys.alpha.clone(), sys.level);
    let embed = |arrow: &Arrow<SolenoidalAction>| -> Arrow<FullSolenoidalAction> {
        Arrow::new(
            SplitScalar::delta(&arrow.g),
            PairPoint(SolenoidPoint::identity(sys.p, sys.level), arrow.src.clone()),
        )
    };
    let mut rng = sampling::stream_rng(seed, stream);
    let mut check = Check::new("immersion_into_full_groupoid");
    for _ in 0..n_samples {
        let n1 = sys.sample_g(&mut rng);
        let n2 = sys.sample_g(&mut rng);
        let z = sys.sample_x(&mut rng);
        let inner = Arrow::<SolenoidalAction>::new(n2, z);
        let outer = Arrow::<SolenoidalAction>::new(n1, range(sys, &inner));
        let composed = compose(sys, mode, &outer, &inner).expect("constructed composable");

        let img_outer = embed(&outer);
        let img_inner = embed(&inner);
        let img_composed = compose(&full, mode, &img_outer, &img_inner);

        // Image source stays in V = {(1, y)} and the group part stays diagonal.
        let in_reduced_set = img_outer.src.0.is_identity()
            && range(&full, &img_outer).0.is_identity()
            && img_outer.g.real() == img_outer.g.padic();

        let ok = in_reduced_set
            && img_composed.is_ok_and(|a| {
                a.g == embed(&composed).g && full.x_eq(mode, &a.src, &embed(&composed).src)
            })
            && invert(&full, &img_outer).g == embed(&invert(sys, &outer)).g
            && full.x_eq(
                mode,
                &invert(&full, &img_outer).src,
                &embed(&invert(sys, &outer)).src,
            );
        check.record(ok, || format!("n1={} n2={}", outer.g, inner.g));
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Angle;

    fn s_alpha() -> SolenoidalAction {
        SolenoidalAction::new(2, SplitScalar::from_ints(1, 3, 5, 2), 8)
    }

    #[test]
    fn composition_formula() {
        let sys = s_alpha();
        let mode = EqMode::Exact;
        let half = PRational::new(2, 1, -1);
        let z = pi_map(2, &SplitScalar::from_ints(1, 7, 3, 4), 8);
        let inner = Arrow::<SolenoidalAction>::new(half.clone(), z.clone());
        let outer = Arrow::<SolenoidalAction>::new(half.clone(), range(&sys, &inner));
        let composed = compose(&sys, &mode, &outer, &inner).unwrap();
        assert_eq!(composed.g, PRational::one(2));
        assert_eq!(composed.src, z);

        // Mismatched pair is rejected.
        let bad = Arrow::<SolenoidalAction>::new(half, z.clone());
        assert!(compose(&sys, &mode, &bad, &bad).is_err());
    }

    #[test]
    fn unit_composition() {
        let sys = s_alpha();
        let mode = EqMode::Exact;
        let z = pi_map(2, &SplitScalar::from_ints(2, 5, 1, 6), 8);
        let gamma = Arrow::<SolenoidalAction>::new(PRational::new(2, 3, -2), z);
        let u = unit(&sys, &range(&sys, &gamma));
        assert_eq!(compose(&sys, &mode, &u, &gamma).unwrap(), gamma);
    }

    #[test]
    fn inverse_formula() {
        let sys = s_alpha();
        let z = pi_map(2, &SplitScalar::from_ints(1, 5, 1, 3), 8);
        let half = PRational::new(2, 1, -1);
        let gamma = Arrow::<SolenoidalAction>::new(half.clone(), z.clone());
        let inv = invert(&sys, &gamma);
        assert_eq!(inv.g, half.neg());
        assert_eq!(inv.src, sys.act(&half, &z));
        assert_eq!(invert(&sys, &inv), gamma);
        let u = unit(&sys, &z);
        assert_eq!(invert(&sys, &u), u);
    }

    #[test]
    fn axioms_pass_for_all_instances() {
        let mode = EqMode::Exact;
        let s = axiom_suite(&s_alpha(), 200, 7, 0, &mode);
        assert!(s.passed(), "{s:?}");

        let full = FullSolenoidalAction::new(2, SplitScalar::from_ints(1, 3, 5, 2), 6);
        let s = axiom_suite(&full, 150, 7, 1, &mode);
        assert!(s.passed(), "{s:?}");

        let torus = CircleRotation::new(Rat::new(1.into(), 3.into()));
        let s = axiom_suite(&torus, 200, 7, 2, &mode);
        assert!(s.passed(), "{s:?}");
    }

    #[test]
    fn degenerate_action_passes() {
        let sys = SolenoidalAction::new(2, SplitScalar::zero(), 4);
        let s = axiom_suite(&sys, 100, 7, 3, &EqMode::Exact);
        assert!(s.passed(), "{s:?}");
    }

    #[test]
    fn torus_rotation_acts_by_angle_addition() {
        let torus = CircleRotation::new(Rat::new(1.into(), 3.into()));
        let x = SolenoidPoint::from_angles(2, vec![Angle::from_ints(1, 4)]).unwrap();
        let moved = torus.act(&BigInt::from(2), &x);
        assert_eq!(moved.angle(0), &Angle::from_ints(11, 12));
    }

    #[test]
    fn immersion_preserves_structure() {
        let check = immersion_check(&s_alpha(), 150, 7, 4, &EqMode::Exact);
        let report = check.finish();
        assert!(report.passed(), "{report:?}");
    }
}
