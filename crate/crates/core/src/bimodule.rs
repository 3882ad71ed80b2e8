//! Step functions on the bibundle total space, the algebra-valued inner
//! products and module actions as exact finite sums over the acting
//! lattices, and the imprimitivity-relation checker.
//!
//! Every integral is a counting-measure sum whose index set is enumerated
//! exactly: a translate `base + n * step` meets a compactly supported cell
//! for finitely many lattice points `n`, computed from the real interval and
//! the p-adic ball by modular truncation. Inner-product values are lazy
//! pointwise evaluators tied to a strict-mode bibundle.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgElem, AlgebraError};
use crate::bibundle::{BibundleError, BibundleSpec};
use crate::exact::{rat_valuation, CycloComplex, NumError, PRational, Rat, SplitScalar};
use crate::groupoid::{ActionSystem, Arrow, SolenoidalAction};
use crate::report::{Check, SuiteReport};
use crate::sampling;
use crate::solenoid::{orbit_solve, SolenoidError, SolenoidPoint};
use crate::verify::EqMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BimoduleError {
    #[error("inner products require a strict-mode bibundle")]
    NonStrictSpec,
    #[error("function lacks a declared finite group support")]
    InfiniteSupport,
    #[error("translation step vanishes in the {0} component")]
    ZeroStepComponent(&'static str),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Solenoid(#[from] SolenoidError),
    #[error(transparent)]
    Bibundle(#[from] BibundleError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A basic compact-open set of `Q_p`: `{x : v_p(x - center) >= order}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PBall {
    pub center: Rat,
    pub order: i64,
}

impl PBall {
    pub fn new(center: Rat, order: i64) -> Self {
        PBall { center, order }
    }

    pub fn contains(&self, p: u32, x: &Rat) -> bool {
        rat_valuation(&(x - &self.center), p).is_none_or(|v| v >= self.order)
    }

    /// Ultrametric dichotomy: two balls either nest or are disjoint.
    pub fn overlaps(&self, p: u32, other: &PBall) -> bool {
        let shallow = self.order.min(other.order);
        rat_valuation(&(&self.center - &other.center), p).is_none_or(|v| v >= shallow)
    }
}

/// One cell of a step function: a coefficient on (real interval) x (ball).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub coeff: CycloComplex,
    pub lo: Rat,
    pub hi: Rat,
    pub ball: PBall,
}

impl Cell {
    pub fn contains(&self, p: u32, q: &SplitScalar) -> bool {
        q.real() >= &self.lo && q.real() < &self.hi && self.ball.contains(p, q.padic())
    }

    /// The cell translated by a split scalar (supports of translated
    /// functions).
    fn translated(&self, shift: &SplitScalar) -> Cell {
        Cell {
            coeff: self.coeff.clone(),
            lo: &self.lo + shift.real(),
            hi: &self.hi + shift.real(),
            ball: PBall::new(&self.ball.center + shift.padic(), self.ball.order),
        }
    }
}

/// A compactly supported step function on the bibundle total space: the
/// value at a point is the sum of the coefficients of the cells containing
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFn {
    pub p: u32,
    pub cells: Vec<Cell>,
}

impl StepFn {
    pub fn zero(p: u32) -> Self {
        StepFn { p, cells: vec![] }
    }

    pub fn new(p: u32, cells: Vec<Cell>) -> Self {
        StepFn { p, cells }
    }

    /// Indicator of a single cell.
    pub fn indicator(p: u32, lo: Rat, hi: Rat, ball: PBall) -> Self {
        StepFn::new(
            p,
            vec![Cell {
                coeff: CycloComplex::one(),
                lo,
                hi,
                ball,
            }],
        )
    }

    pub fn value(&self, q: &SplitScalar) -> CycloComplex {
        let mut acc = CycloComplex::zero();
        for cell in &self.cells {
            if cell.contains(self.p, q) {
                acc = acc.add(&cell.coeff);
            }
        }
        acc
    }

    /// Pointwise sum: cells concatenate.
    pub fn add(&self, other: &StepFn) -> StepFn {
        assert_eq!(self.p, other.p);
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        StepFn { p: self.p, cells }
    }

    pub fn scale(&self, s: &CycloComplex) -> StepFn {
        StepFn {
            p: self.p,
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    coeff: c.coeff.mul(s),
                    ..c.clone()
                })
                .collect(),
        }
    }

    pub fn from_literal(lit: &StepFnLiteral, p: u32) -> Result<StepFn, NumError> {
        let mut cells = Vec::new();
        for cl in &lit.cells {
            cells.push(Cell {
                coeff: CycloComplex::parse(&cl.coeff)?,
                lo: crate::exact::parse_rat(&cl.interval[0])?,
                hi: crate::exact::parse_rat(&cl.interval[1])?,
                ball: PBall::new(crate::exact::parse_rat(&cl.ball.center)?, cl.ball.order),
            });
        }
        Ok(StepFn { p, cells })
    }

    pub fn to_literal(&self) -> StepFnLiteral {
        StepFnLiteral {
            cells: self
                .cells
                .iter()
                .map(|c| CellLiteral {
                    coeff: c.coeff.to_string(),
                    interval: [c.lo.to_string(), c.hi.to_string()],
                    ball: BallLiteral {
                        center: c.ball.center.to_string(),
                        order: c.ball.order,
                    },
                })
                .collect(),
        }
    }
}

/// Wire form of a step function (CLI / JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFnLiteral {
    pub cells: Vec<CellLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellLiteral {
    pub coeff: String,
    pub interval: [String; 2],
    pub ball: BallLiteral,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallLiteral {
    pub center: String,
    pub order: i64,
}

/// All lattice points `n` with `base + n * step` inside one of the cells.
/// Real intervals bound `n` to a rational interval; the ball condition pins
/// `n` modulo a power of p via the digit truncation of the ball's preimage.
pub fn enumerate_translates(
    spec: &BibundleSpec,
    base: &SplitScalar,
    step: &SplitScalar,
    cells: &[Cell],
) -> Result<Vec<PRational>, BimoduleError> {
    if step.real().is_zero() {
        return Err(BimoduleError::ZeroStepComponent("real"));
    }
    if step.padic().is_zero() && spec.lattice == crate::bibundle::LatticeKind::Diagonal {
        return Err(BimoduleError::ZeroStepComponent("p-adic"));
    }
    let p = spec.p;
    let mut out: BTreeSet<PRational> = BTreeSet::new();
    for cell in cells {
        if cell.lo >= cell.hi {
            continue;
        }
        // Real window: n*step_t in [lo - base_t, hi - base_t).
        let a = (&cell.lo - base.real()) / step.real();
        let b = (&cell.hi - base.real()) / step.real();
        let (lo_n, hi_n) = if a <= b { (a, b) } else { (b, a) };

        // Ball window: v_p(n - x0) >= k.
        let candidates: Vec<Rat> = if step.padic().is_zero() {
            // Real-only lattice: the ball constraint involves n only through
            // the fixed base; membership is base-dependent, not n-dependent.
            if !cell.ball.contains(p, base.padic()) {
                continue;
            }
            lattice_scan(&lo_n, &hi_n, &Rat::zero(), 0, p)
        } else {
            let x0 = (&cell.ball.center - base.padic()) / step.padic();
            let k = cell.ball.order - rat_valuation(step.padic(), p).expect("nonzero step");
            let n0 = truncate_padic(&x0, p, k);
            lattice_scan(&lo_n, &hi_n, &n0, k, p)
        };

        for n in candidates {
            let m = match spec.lattice_member(&n) {
                Some(m) => m,
                None => continue,
            };
            // Exact membership filter.
            if cell.contains(p, &base.add(&spec.embed(&m).mul(step))) {
                out.insert(m);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Digit truncation of `x` below index `k`: the unique `n0` in `Z[1/p]` with
/// digits of `x` on `[v_p(x), k)` and zeros above (zero when `v_p(x) >= k`).
fn truncate_padic(x: &Rat, p: u32, k: i64) -> Rat {
    let v = match rat_valuation(x, p) {
        None => return Rat::zero(),
        Some(v) => v,
    };
    if v >= k {
        return Rat::zero();
    }
    let digits = crate::exact::padic_digits(x, p, v, k, false).expect("window from valuation");
    let mut acc = Rat::zero();
    let p_big = BigInt::from(p);
    for (i, d) in digits.iter().enumerate() {
        if *d == 0 {
            continue;
        }
        let e = v + i as i64;
        let pw = if e >= 0 {
            Rat::from_integer(p_big.pow(e as u32))
        } else {
            Rat::new(BigInt::one(), p_big.pow((-e) as u32))
        };
        acc += Rat::from_integer(BigInt::from(*d)) * pw;
    }
    acc
}

/// Integer scan of the residue class `n0 + p^k Z` against `[lo, hi]`.
fn lattice_scan(lo: &Rat, hi: &Rat, n0: &Rat, k: i64, p: u32) -> Vec<Rat> {
    let p_big = BigInt::from(p);
    let modulus = if k >= 0 {
        Rat::from_integer(p_big.pow(k as u32))
    } else {
        Rat::new(BigInt::one(), p_big.pow((-k) as u32))
    };
    let s_lo = ((lo - n0) / &modulus).ceil();
    let s_hi = ((hi - n0) / &modulus).floor();
    let mut out = Vec::new();
    let mut s = s_lo;
    while s <= s_hi {
        out.push(n0 + &s * &modulus);
        s += Rat::one();
    }
    out
}

/// Deterministic section of the left moment map: a point `omega` with
/// `mu(omega) = z` exactly, built from the constructive orbit preimage.
pub fn section_mu(spec: &BibundleSpec, z: &SolenoidPoint) -> Result<SplitScalar, BimoduleError> {
    let q = orbit_solve(z)?;
    Ok(q.mul(&spec.left_scalar().inv().expect("moment scalars invertible")))
}

/// Deterministic section of the right moment map: `eps(c * q) = pi(q)`.
pub fn section_eps(spec: &BibundleSpec, z: &SolenoidPoint) -> Result<SplitScalar, BimoduleError> {
    let q = orbit_solve(z)?;
    Ok(q.scale(&spec.matrix.c))
}

/// A function on the total space with a declared support superset, evaluated
/// lazily: either a literal step function or the result of a module action.
#[derive(Clone)]
pub struct PointFn {
    cells: Vec<Cell>,
    kind: PointKind,
}

#[derive(Clone)]
enum PointKind {
    Step(StepFn),
    /// `(f . phi)(q) = sum_n f(n, mu(q)) phi(q - delta(n))`.
    ActLeft {
        spec: Arc<BibundleSpec>,
        f: LeftFn,
        inner: Arc<PointFn>,
    },
    /// `(phi . f)(q) = sum_m phi(q + m step) f(-m, m * eps(q))`.
    ActRight {
        spec: Arc<BibundleSpec>,
        inner: Arc<PointFn>,
        f: RightFn,
    },
}

impl PointFn {
    pub fn step(f: StepFn) -> Self {
        PointFn {
            cells: f.cells.clone(),
            kind: PointKind::Step(f),
        }
    }

    pub fn support_cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn eval(&self, q: &SplitScalar) -> Result<CycloComplex, BimoduleError> {
        match &self.kind {
            PointKind::Step(f) => Ok(f.value(q)),
            PointKind::ActLeft { spec, f, inner } => {
                let mut acc = CycloComplex::zero();
                let minus_delta = spec.embed(&PRational::one(spec.p)).neg();
                let ns = match f.group_support() {
                    Some(s) => s,
                    None => enumerate_translates(spec, q, &minus_delta, &inner.cells)?,
                };
                let mu_q = spec.moment_left_at(q, spec.level.max(f.depth()));
                for n in ns {
                    let value = f.eval(&n, &mu_q)?;
                    if value.is_zero() {
                        continue;
                    }
                    let arg = q.sub(&spec.embed(&n));
                    acc = acc.add(&value.mul(&inner.eval(&arg)?));
                }
                Ok(acc)
            }
            PointKind::ActRight { spec, inner, f } => {
                let mut acc = CycloComplex::zero();
                let ms = match f.group_support() {
                    Some(s) => s.into_iter().map(|n| n.neg()).collect(),
                    None => enumerate_translates(spec, q, spec.right_step(), &inner.cells)?,
                };
                let eps_q = spec.moment_right_at(q, spec.level.max(f.depth()));
                for m in ms {
                    let phi_val = inner.eval(&spec.right_translate(q, &m))?;
                    if phi_val.is_zero() {
                        continue;
                    }
                    // f evaluated at the inverse arrow (-m, m * eps(q)).
                    let src = spec.right_groupoid().act(&m, &eps_q);
                    acc = acc.add(&phi_val.mul(&f.eval(&m.neg(), &src)?));
                }
                Ok(acc)
            }
        }
    }
}

/// A function on arrows of the left groupoid: a finitely supported algebra
/// element or a lazy inner product.
#[derive(Clone)]
pub enum LeftFn {
    Elem(AlgElem),
    Inner(Arc<InnerLeft>),
}

impl LeftFn {
    pub fn group_support(&self) -> Option<Vec<PRational>> {
        match self {
            LeftFn::Elem(f) => Some(f.group_support()),
            LeftFn::Inner(_) => None,
        }
    }

    pub fn eval(&self, n: &PRational, src: &SolenoidPoint) -> Result<CycloComplex, BimoduleError> {
        match self {
            LeftFn::Elem(f) => Ok(f.eval(n, src)?),
            LeftFn::Inner(inner) => inner.eval(&Arrow::new(n.clone(), src.clone())),
        }
    }

    /// Character depth the arrow source must support.
    pub fn depth(&self) -> u32 {
        match self {
            LeftFn::Elem(f) => f.depth(),
            LeftFn::Inner(_) => 0,
        }
    }
}

/// A function on arrows of the right groupoid.
#[derive(Clone)]
pub enum RightFn {
    Elem(AlgElem),
    Inner(Arc<InnerRight>),
}

impl RightFn {
    pub fn group_support(&self) -> Option<Vec<PRational>> {
        match self {
            RightFn::Elem(f) => Some(f.group_support()),
            RightFn::Inner(_) => None,
        }
    }

    pub fn eval(&self, n: &PRational, src: &SolenoidPoint) -> Result<CycloComplex, BimoduleError> {
        match self {
            RightFn::Elem(f) => Ok(f.eval(n, src)?),
            RightFn::Inner(inner) => inner.eval(&Arrow::new(n.clone(), src.clone())),
        }
    }

    /// Character depth the arrow source must support.
    pub fn depth(&self) -> u32 {
        match self {
            RightFn::Elem(f) => f.depth(),
            RightFn::Inner(_) => 0,
        }
    }
}

/// The left-algebra-valued inner product: at an arrow `gamma = (n, z)` with
/// base `omega = section_mu(z)`,
/// `<phi, psi>(gamma) = sum_m phi(omega + m step) conj psi(omega - delta(n) + m step)`.
pub struct InnerLeft {
    pub spec: Arc<BibundleSpec>,
    pub phi: PointFn,
    pub psi: PointFn,
}

impl InnerLeft {
    pub fn new(
        spec: &Arc<BibundleSpec>,
        phi: PointFn,
        psi: PointFn,
    ) -> Result<Arc<Self>, BimoduleError> {
        if !spec.strict() {
            return Err(BimoduleError::NonStrictSpec);
        }
        Ok(Arc::new(InnerLeft {
            spec: spec.clone(),
            phi,
            psi,
        }))
    }

    pub fn eval(&self, gamma: &Arrow<SolenoidalAction>) -> Result<CycloComplex, BimoduleError> {
        let omega = section_mu(&self.spec, &gamma.src)?;
        self.eval_at_base(gamma, &omega)
    }

    /// Evaluation from an explicit base with `mu(base) = s(gamma)`; the value
    /// is independent of the admissible choice (a tested property).
    pub fn eval_at_base(
        &self,
        gamma: &Arrow<SolenoidalAction>,
        base: &SplitScalar,
    ) -> Result<CycloComplex, BimoduleError> {
        let spec = &self.spec;
        let shift = spec.embed(&gamma.g);
        let mut acc = CycloComplex::zero();
        for m in enumerate_translates(spec, base, spec.right_step(), self.phi.support_cells())? {
            let at = spec.right_translate(base, &m);
            let phi_val = self.phi.eval(&at)?;
            if phi_val.is_zero() {
                continue;
            }
            let psi_val = self.psi.eval(&at.sub(&shift))?;
            acc = acc.add(&phi_val.mul(&psi_val.conj()));
        }
        Ok(acc)
    }
}

/// The right-algebra-valued inner product: at an arrow `eta = (m, z)` with
/// base `rho = section_eps(z)`,
/// `<psi, chi>_*(eta) = sum_n conj psi(rho - delta(n)) chi(rho - delta(n) + m step)`.
pub struct InnerRight {
    pub spec: Arc<BibundleSpec>,
    pub psi: PointFn,
    pub chi: PointFn,
}

impl InnerRight {
    pub fn new(
        spec: &Arc<BibundleSpec>,
        psi: PointFn,
        chi: PointFn,
    ) -> Result<Arc<Self>, BimoduleError> {
        if !spec.strict() {
            return Err(BimoduleError::NonStrictSpec);
        }
        Ok(Arc::new(InnerRight {
            spec: spec.clone(),
            psi,
            chi,
        }))
    }

    pub fn eval(&self, eta: &Arrow<SolenoidalAction>) -> Result<CycloComplex, BimoduleError> {
        let rho = section_eps(&self.spec, &eta.src)?;
        self.eval_at_base(eta, &rho)
    }

    pub fn eval_at_base(
        &self,
        eta: &Arrow<SolenoidalAction>,
        base: &SplitScalar,
    ) -> Result<CycloComplex, BimoduleError> {
        let spec = &self.spec;
        let minus_delta = spec.embed(&PRational::one(spec.p)).neg();
        let mut acc = CycloComplex::zero();
        for n in enumerate_translates(spec, base, &minus_delta, self.psi.support_cells())? {
            let at = base.sub(&spec.embed(&n));
            let psi_val = self.psi.eval(&at)?;
            if psi_val.is_zero() {
                continue;
            }
            let chi_val = self.chi.eval(&spec.right_translate(&at, &eta.g))?;
            acc = acc.add(&psi_val.conj().mul(&chi_val));
        }
        Ok(acc)
    }
}

/// The left module action `f . phi` as a lazy point function; the support
/// superset is the union of delta-translates of `phi`'s support when `f`
/// declares finite support.
pub fn act_left(
    spec: &Arc<BibundleSpec>,
    f: LeftFn,
    phi: &PointFn,
) -> Result<PointFn, BimoduleError> {
    let cells = match f.group_support() {
        Some(support) => {
            let mut cells = Vec::new();
            for n in &support {
                let shift = spec.embed(n);
                cells.extend(phi.cells.iter().map(|c| c.translated(&shift)));
            }
            cells
        }
        None => phi.cells.clone(),
    };
    Ok(PointFn {
        cells,
        kind: PointKind::ActLeft {
            spec: spec.clone(),
            f,
            inner: Arc::new(phi.clone()),
        },
    })
}

/// The right module action `phi . f` as a lazy point function.
pub fn act_right(
    spec: &Arc<BibundleSpec>,
    phi: &PointFn,
    f: RightFn,
) -> Result<PointFn, BimoduleError> {
    let cells = match f.group_support() {
        Some(support) => {
            let mut cells = Vec::new();
            for n in &support {
                let shift = spec.embed(n).mul(spec.right_step());
                cells.extend(phi.cells.iter().map(|c| c.translated(&shift)));
            }
            cells
        }
        None => phi.cells.clone(),
    };
    Ok(PointFn {
        cells,
        kind: PointKind::ActRight {
            spec: spec.clone(),
            inner: Arc::new(phi.clone()),
            f,
        },
    })
}

/// Right convolution of a lazy arrow function with a finitely supported
/// algebra element, evaluated at one arrow:
/// `(F * f)(n, z) = sum_{n2} F(n - n2, n2 * z) f(n2, z)`.
pub fn convolve_lazy_elem(
    spec: &BibundleSpec,
    big_f: &InnerLeft,
    f: &AlgElem,
    gamma: &Arrow<SolenoidalAction>,
) -> Result<CycloComplex, BimoduleError> {
    let left = spec.left_groupoid();
    let mut acc = CycloComplex::zero();
    for n2 in f.group_support() {
        let f_val = f.eval(&n2, &gamma.src)?;
        if f_val.is_zero() {
            continue;
        }
        let inner_arrow = Arrow::new(gamma.g.sub(&n2), left.act(&n2, &gamma.src));
        acc = acc.add(&big_f.eval(&inner_arrow)?.mul(&f_val));
    }
    Ok(acc)
}

/// Options for [`bimodule_suite`].
#[derive(Debug, Clone, Copy)]
pub struct BimoduleOptions {
    pub arrows: u64,
    pub points: u64,
    pub triples: u64,
    pub windows: u64,
    pub seed: u64,
    pub stream: u64,
    pub mode: EqMode,
}

/// Random step function with small support geometry, sized so the working
/// level dominates every ball order.
pub fn sample_step_fn(p: u32, rng: &mut rand_chacha::ChaCha8Rng) -> StepFn {
    let mut cells = Vec::new();
    for _ in 0..rand::Rng::random_range(rng, 1..=2usize) {
        let lo = sampling::rat(rng, 8, 4);
        let width = Rat::new(
            BigInt::from(rand::Rng::random_range(rng, 1..=4i64)),
            BigInt::from(rand::Rng::random_range(rng, 1..=2i64)),
        );
        let center = sampling::rat(rng, 4, 4);
        let order = rand::Rng::random_range(rng, -2..=2i64);
        let coeff =
            CycloComplex::from_term(sampling::angle(rng, 8), sampling::nonzero_rat(rng, 3, 2));
        cells.push(Cell {
            coeff,
            hi: &lo + &width,
            lo,
            ball: PBall::new(center, order),
        });
    }
    StepFn::new(p, cells)
}

/// Sampled arrows of a groupoid built over constructed moment points, so
/// section computations stay inside the coherent towers.
fn sample_left_arrow(
    spec: &BibundleSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Arrow<SolenoidalAction> {
    let n = spec.sample_group(rng);
    let q = spec.sample_point(rng);
    spec.left_arrow(&n, &q)
}

fn sample_right_arrow(
    spec: &BibundleSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Arrow<SolenoidalAction> {
    let n = spec.sample_group(rng);
    let q = spec.sample_point(rng);
    spec.right_arrow(&n, &q)
}

/// The full bimodule check suite: translate enumeration against brute force,
/// base-point independence, conjugate symmetry, unit actions, the
/// imprimitivity relation, module compatibility, bilinearity and the mixed
/// action associativity.
pub fn bimodule_suite(
    spec: &Arc<BibundleSpec>,
    opts: &BimoduleOptions,
) -> Result<SuiteReport, BimoduleError> {
    if !spec.strict() {
        return Err(BimoduleError::NonStrictSpec);
    }
    let mut suite = SuiteReport::new(format!("bimodule[matrix={}]", spec.matrix));
    let mode = &opts.mode;

    // Enumerated translates match a brute-force lattice scan.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(1));
        let mut check = Check::new("enumerate_translates_vs_bruteforce");
        for _ in 0..opts.windows {
            let base = spec.sample_point(&mut rng);
            let step = loop {
                let s = spec.sample_point(&mut rng);
                if !s.real().is_zero() && !s.padic().is_zero() {
                    break s;
                }
            };
            let cell = sample_step_fn(spec.p, &mut rng).cells[0].clone();
            let got = enumerate_translates(spec, &base, &step, std::slice::from_ref(&cell))?;
            let want = brute_force_translates(spec, &base, &step, &cell);
            check.record(got == want, || {
                format!(
                    "base={base} step={step} cell=[{},{}) ball({},{})",
                    cell.lo, cell.hi, cell.ball.center, cell.ball.order
                )
            });
        }
        suite.push(check.finish());
    }

    // Base-point independence of both inner products.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(2));
        let mut check = Check::new("base_point_independence");
        for _ in 0..opts.arrows {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let psi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let gamma = sample_left_arrow(spec, &mut rng);
            let inner = InnerLeft::new(spec, phi.clone(), psi.clone())?;
            let omega = section_mu(spec, &gamma.src)?;
            let m0 = spec.sample_group(&mut rng);
            let omega2 = spec.right_translate(&omega, &m0);
            let same_fiber = spec.moment_left(&omega2) == spec.moment_left(&omega);
            let v1 = inner.eval_at_base(&gamma, &omega)?;
            let v2 = inner.eval_at_base(&gamma, &omega2)?;

            let eta = sample_right_arrow(spec, &mut rng);
            let inner_r = InnerRight::new(spec, psi.clone(), phi.clone())?;
            let rho = section_eps(spec, &eta.src)?;
            let n0 = spec.sample_group(&mut rng);
            let rho2 = rho.add(&spec.embed(&n0.mul(&spec.matrix.c)));
            let same_fiber_r = spec.moment_right(&rho2) == spec.moment_right(&rho);
            let w1 = inner_r.eval_at_base(&eta, &rho)?;
            let w2 = inner_r.eval_at_base(&eta, &rho2)?;

            check.record(
                same_fiber && same_fiber_r && mode.cyclo_eq(&v1, &v2) && mode.cyclo_eq(&w1, &w2),
                || format!("gamma=({}, {}) m0={m0} n0={n0}", gamma.g, gamma.src),
            );
        }
        suite.push(check.finish());
    }

    // Conjugate symmetry and positivity at unit arrows.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(3));
        let mut sym = Check::new("conjugate_symmetry");
        let mut pos = Check::new("unit_arrow_positivity");
        for _ in 0..opts.arrows {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let psi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let gamma = sample_left_arrow(spec, &mut rng);
            let fwd = InnerLeft::new(spec, phi.clone(), psi.clone())?;
            let bwd = InnerLeft::new(spec, psi.clone(), phi.clone())?;
            let gamma_inv = crate::groupoid::invert(spec.left_groupoid(), &gamma);
            let ok = mode.cyclo_eq(&fwd.eval(&gamma)?, &bwd.eval(&gamma_inv)?.conj());

            let eta = sample_right_arrow(spec, &mut rng);
            let fwd_r = InnerRight::new(spec, phi.clone(), psi.clone())?;
            let bwd_r = InnerRight::new(spec, psi.clone(), phi.clone())?;
            let eta_inv = crate::groupoid::invert(spec.right_groupoid(), &eta);
            let ok_r = mode.cyclo_eq(&fwd_r.eval(&eta)?, &bwd_r.eval(&eta_inv)?.conj());
            sym.record(ok && ok_r, || format!("gamma g={}", gamma.g));

            // <phi, phi> at a unit arrow is a nonnegative real.
            let self_inner = InnerLeft::new(spec, phi.clone(), phi.clone())?;
            let z = spec.moment_left(&spec.sample_point(&mut rng));
            let unit = Arrow::new(PRational::zero(spec.p), z);
            let val = self_inner.eval(&unit)?;
            let real = val == val.conj();
            let (re, im) = val.eval_f64();
            pos.record(real && im.abs() < 1e-9 && re >= -1e-9, || {
                format!("value {val}")
            });
        }
        suite.push(sym.finish());
        suite.push(pos.finish());
    }

    // Unit algebra elements act as the identity.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(4));
        let mut check = Check::new("unit_actions");
        let left_ctx = crate::algebra::AlgContext::new(spec.p, spec.alpha.clone());
        let right_ctx = crate::algebra::AlgContext::new(spec.p, spec.beta.clone());
        for _ in 0..opts.points {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let q = spec.sample_point(&mut rng);
            let lhs = act_left(spec, LeftFn::Elem(AlgElem::unit(&left_ctx)), &phi)?.eval(&q)?;
            let rhs = act_right(spec, &phi, RightFn::Elem(AlgElem::unit(&right_ctx)))?.eval(&q)?;
            let direct = phi.eval(&q)?;
            check.record(
                mode.cyclo_eq(&lhs, &direct) && mode.cyclo_eq(&rhs, &direct),
                || format!("q={q}"),
            );
        }
        suite.push(check.finish());
    }

    // The imprimitivity relation: <phi, psi> . chi = phi . <psi, chi>_* at
    // sampled points, both sides evaluated by independent lazy sums.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(5));
        let mut check = Check::new("imprimitivity_relation");
        let points_per_triple = (opts.points / opts.triples.max(1)).max(1);
        for _ in 0..opts.triples {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let psi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let chi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let lhs_fn = act_left(
                spec,
                LeftFn::Inner(InnerLeft::new(spec, phi.clone(), psi.clone())?),
                &chi,
            )?;
            let rhs_fn = act_right(
                spec,
                &phi,
                RightFn::Inner(InnerRight::new(spec, psi.clone(), chi.clone())?),
            )?;
            for _ in 0..points_per_triple {
                let q = spec.sample_point(&mut rng);
                let lhs = lhs_fn.eval(&q)?;
                let rhs = rhs_fn.eval(&q)?;
                check.record(mode.cyclo_eq(&lhs, &rhs), || {
                    format!("q={q} lhs={lhs} rhs={rhs}")
                });
            }
        }
        suite.push(check.finish());
    }

    // Module compatibility: <f . phi, psi> equals the inner product
    // right-convolved with f.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(6));
        let mut check = Check::new("module_compatibility");
        let left_ctx = crate::algebra::AlgContext::new(spec.p, spec.alpha.clone());
        for _ in 0..opts.arrows.min(40) {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let psi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let f = sample_shallow_elem(&left_ctx, spec.level, &mut rng);
            let gamma = sample_left_arrow(spec, &mut rng);
            let lhs = InnerLeft::new(
                spec,
                act_left(spec, LeftFn::Elem(f.clone()), &phi)?,
                psi.clone(),
            )?
            .eval(&gamma)?;
            let base_inner = InnerLeft::new(spec, phi.clone(), psi.clone())?;
            let rhs = convolve_lazy_elem(spec, &base_inner, &f, &gamma)?;
            check.record(mode.cyclo_eq(&lhs, &rhs), || {
                format!("gamma g={} f={f}", gamma.g)
            });
        }
        suite.push(check.finish());
    }

    // Bilinearity of the inner products and linearity of the actions.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(7));
        let mut check = Check::new("bilinearity");
        for _ in 0..opts.arrows.min(40) {
            let phi1 = sample_step_fn(spec.p, &mut rng);
            let phi2 = sample_step_fn(spec.p, &mut rng);
            let psi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let gamma = sample_left_arrow(spec, &mut rng);
            let joint =
                InnerLeft::new(spec, PointFn::step(phi1.add(&phi2)), psi.clone())?.eval(&gamma)?;
            let split = InnerLeft::new(spec, PointFn::step(phi1.clone()), psi.clone())?
                .eval(&gamma)?
                .add(
                    &InnerLeft::new(spec, PointFn::step(phi2.clone()), psi.clone())?
                        .eval(&gamma)?,
                );
            check.record(mode.cyclo_eq(&joint, &split), || {
                format!("gamma g={}", gamma.g)
            });
        }
        suite.push(check.finish());
    }

    // Mixed associativity (f . phi) . h = f . (phi . h) at sampled points.
    {
        let mut rng = sampling::stream_rng(opts.seed, opts.stream.wrapping_add(8));
        let mut check = Check::new("action_associativity");
        let left_ctx = crate::algebra::AlgContext::new(spec.p, spec.alpha.clone());
        let right_ctx = crate::algebra::AlgContext::new(spec.p, spec.beta.clone());
        for _ in 0..opts.points.min(60) {
            let phi = PointFn::step(sample_step_fn(spec.p, &mut rng));
            let f = sample_shallow_elem(&left_ctx, spec.level, &mut rng);
            let h = sample_shallow_elem(&right_ctx, spec.level, &mut rng);
            let q = spec.sample_point(&mut rng);
            let lhs = act_right(
                spec,
                &act_left(spec, LeftFn::Elem(f.clone()), &phi)?,
                RightFn::Elem(h.clone()),
            )?
            .eval(&q)?;
            let rhs = act_left(
                spec,
                LeftFn::Elem(f.clone()),
                &act_right(spec, &phi, RightFn::Elem(h.clone()))?,
            )?
            .eval(&q)?;
            check.record(mode.cyclo_eq(&lhs, &rhs), || format!("q={q}"));
        }
        suite.push(check.finish());
    }

    Ok(suite)
}

/// Options for [`imprimitivity_check`].
#[derive(Debug, Clone, Copy)]
pub struct TripleOptions {
    pub points: u64,
    pub seed: u64,
    pub stream: u64,
    pub mode: EqMode,
}

/// Pointwise imprimitivity check for one explicit step-function triple:
/// `<phi, psi> . chi = phi . <psi, chi>_*` at sampled points, plus
/// bilinearity of both sides in `phi`.
pub fn imprimitivity_check(
    spec: &Arc<BibundleSpec>,
    phi: &StepFn,
    psi: &StepFn,
    chi: &StepFn,
    opts: &TripleOptions,
) -> Result<SuiteReport, BimoduleError> {
    let TripleOptions {
        points,
        seed,
        stream,
        mode,
    } = *opts;
    let mode = &mode;
    if !spec.strict() {
        return Err(BimoduleError::NonStrictSpec);
    }
    let mut suite = SuiteReport::new(format!("bimodule_triple[matrix={}]", spec.matrix));
    let phi = PointFn::step(phi.clone());
    let psi = PointFn::step(psi.clone());
    let chi = PointFn::step(chi.clone());
    let lhs_fn = act_left(
        spec,
        LeftFn::Inner(InnerLeft::new(spec, phi.clone(), psi.clone())?),
        &chi,
    )?;
    let rhs_fn = act_right(
        spec,
        &phi,
        RightFn::Inner(InnerRight::new(spec, psi.clone(), chi.clone())?),
    )?;
    let mut rng = sampling::stream_rng(seed, stream);
    let mut relation = Check::new("imprimitivity_relation");
    for _ in 0..points {
        let q = spec.sample_point(&mut rng);
        let lhs = lhs_fn.eval(&q)?;
        let rhs = rhs_fn.eval(&q)?;
        relation.record(mode.cyclo_eq(&lhs, &rhs), || {
            format!("q={q} lhs={lhs} rhs={rhs}")
        });
    }
    suite.push(relation.finish());

    let mut bilinear = Check::new("bilinearity_in_first_slot");
    for _ in 0..points.min(25) {
        let extra = sample_step_fn(spec.p, &mut rng);
        let gamma = sample_left_arrow(spec, &mut rng);
        let joint = InnerLeft::new(spec, PointFn::step(step_of(&phi).add(&extra)), psi.clone())?
            .eval(&gamma)?;
        let split = InnerLeft::new(spec, phi.clone(), psi.clone())?
            .eval(&gamma)?
            .add(&InnerLeft::new(spec, PointFn::step(extra), psi.clone())?.eval(&gamma)?);
        bilinear.record(mode.cyclo_eq(&joint, &split), || {
            format!("gamma g={}", gamma.g)
        });
    }
    suite.push(bilinear.finish());
    Ok(suite)
}

fn step_of(f: &PointFn) -> StepFn {
    match &f.kind {
        PointKind::Step(s) => s.clone(),
        _ => unreachable!("triple checks start from literal step functions"),
    }
}

/// Independent oracle for the translate enumeration: scans a superset
/// lattice derived from the window data and filters by direct membership.
fn brute_force_translates(
    spec: &BibundleSpec,
    base: &SplitScalar,
    step: &SplitScalar,
    cell: &Cell,
) -> Vec<PRational> {
    let p = spec.p;
    let a = (&cell.lo - base.real()) / step.real();
    let b = (&cell.hi - base.real()) / step.real();
    let (lo_n, hi_n) = if a <= b { (a, b) } else { (b, a) };
    // Depth bound: solutions live in p^k Z translated by a truncation whose
    // denominator divides both the step's and the ball data's denominators.
    let k = cell.ball.order - rat_valuation(step.padic(), p).unwrap_or(0);
    let x0 = (&cell.ball.center - base.padic()) / step.padic();
    let depth = (-k).max(0).max(-rat_valuation(&x0, p).unwrap_or(0)).max(0) + 1;
    let p_big = BigInt::from(p);
    let denom = Rat::from_integer(p_big.pow(depth as u32));
    let m_lo = (&lo_n * &denom).floor();
    let m_hi = (&hi_n * &denom).ceil();
    let mut out = Vec::new();
    let mut m = m_lo;
    while m <= m_hi {
        let n = &m / &denom;
        if let Some(v) = spec.lattice_member(&n) {
            if cell.contains(p, &base.add(&spec.embed(&v).mul(step))) && !out.contains(&v) {
                out.push(v);
            }
        }
        m += Rat::one();
    }
    out.sort();
    out
}

/// Sparse algebra element whose characters stay within the working level.
fn sample_shallow_elem(
    ctx: &crate::algebra::AlgContext,
    level: u32,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> AlgElem {
    use crate::algebra::TrigPoly;
    let depth_cap = level.min(2) as i64;
    let mut acc = AlgElem::zero(ctx);
    for _ in 0..rand::Rng::random_range(rng, 1..=2usize) {
        let n = sampling::prational(rng, ctx.p, 4, -2, 1);
        let idx = sampling::prational(rng, ctx.p, 3, -depth_cap, 1);
        let coeff =
            CycloComplex::from_term(sampling::angle(rng, 8), sampling::nonzero_rat(rng, 2, 2));
        acc = acc
            .add(&AlgElem::monomial(ctx, n, TrigPoly::term(idx, coeff)))
            .unwrap();
    }
    acc
}

impl fmt::Debug for PointFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PointKind::Step(_) => write!(f, "PointFn::Step({} cells)", self.cells.len()),
            PointKind::ActLeft { .. } => write!(f, "PointFn::ActLeft"),
            PointKind::ActRight { .. } => write!(f, "PointFn::ActRight"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::Mat2;

    fn spec() -> Arc<BibundleSpec> {
        Arc::new(
            BibundleSpec::build(
                2,
                &SplitScalar::from_ints(1, 3, 5, 2),
                &Mat2::antidiagonal(2),
                8,
            )
            .unwrap(),
        )
    }

    fn opts(n: u64) -> BimoduleOptions {
        BimoduleOptions {
            arrows: n,
            points: n,
            triples: 3,
            windows: n,
            seed: 42,
            stream: 0,
            mode: EqMode::Exact,
        }
    }

    #[test]
    fn ball_membership_and_dichotomy() {
        let ball = PBall::new(Rat::zero(), 1);
        assert!(ball.contains(2, &Rat::new(4.into(), 1.into())));
        assert!(ball.contains(2, &Rat::zero()));
        assert!(!ball.contains(2, &Rat::new(1.into(), 1.into())));
        assert!(!ball.contains(2, &Rat::new(1.into(), 2.into())));

        let mut rng = sampling::stream_rng(50, 0);
        for _ in 0..200 {
            let b1 = PBall::new(
                sampling::rat(&mut rng, 8, 6),
                rand::Rng::random_range(&mut rng, -2..=2),
            );
            let b2 = PBall::new(
                sampling::rat(&mut rng, 8, 6),
                rand::Rng::random_range(&mut rng, -2..=2),
            );
            if b1.overlaps(2, &b2) {
                // Overlapping balls nest: the shallower contains the deeper.
                let (inner, outer) = if b1.order >= b2.order {
                    (&b1, &b2)
                } else {
                    (&b2, &b1)
                };
                assert!(outer.contains(2, &inner.center));
            } else {
                assert!(!b1.contains(2, &b2.center));
            }
        }
    }

    #[test]
    fn step_fn_values_and_literals() {
        let f = StepFn::indicator(2, Rat::zero(), Rat::one(), PBall::new(Rat::zero(), 0));
        assert_eq!(
            f.value(&SplitScalar::from_ints(1, 2, 4, 1)),
            CycloComplex::one()
        );
        assert_eq!(
            f.value(&SplitScalar::from_ints(1, 2, 1, 2)),
            CycloComplex::zero()
        );
        assert_eq!(
            f.value(&SplitScalar::from_ints(3, 2, 0, 1)),
            CycloComplex::zero()
        );

        let lit = f.to_literal();
        let json = serde_json::to_string(&lit).unwrap();
        let back: StepFnLiteral = serde_json::from_str(&json).unwrap();
        assert_eq!(StepFn::from_literal(&back, 2).unwrap(), f);
    }

    #[test]
    fn translate_enumeration_examples() {
        let s = spec();
        // delta-translates, window [0,1), ball v_2(n) >= 0: just n = 0.
        let cell = Cell {
            coeff: CycloComplex::one(),
            lo: Rat::zero(),
            hi: Rat::one(),
            ball: PBall::new(Rat::zero(), 0),
        };
        let delta = s.embed(&PRational::one(2));
        let got = enumerate_translates(&s, &SplitScalar::zero(), &delta, std::slice::from_ref(&cell)).unwrap();
        assert_eq!(got, vec![PRational::zero(2)]);

        // Window [0,4) with v_2(n) >= 1: {0, 2}.
        let cell = Cell {
            coeff: CycloComplex::one(),
            lo: Rat::zero(),
            hi: Rat::new(4.into(), 1.into()),
            ball: PBall::new(Rat::zero(), 1),
        };
        let got = enumerate_translates(&s, &SplitScalar::zero(), &delta, &[cell]).unwrap();
        assert_eq!(got, vec![PRational::zero(2), PRational::from_int(2, 2)]);

        // Empty real window.
        let cell = Cell {
            coeff: CycloComplex::one(),
            lo: Rat::one(),
            hi: Rat::one(),
            ball: PBall::new(Rat::zero(), 0),
        };
        let got = enumerate_translates(&s, &SplitScalar::zero(), &delta, &[cell]).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn translate_enumeration_with_fractional_step() {
        let s = spec();
        // Steps by alpha^{-1} = (3, 2/5): n with n*3 in [0, 9) and
        // v_2(n * 2/5) >= 1, i.e. integers n in {0, 1, 2} with v_2(n) >= ...
        // v_2(2n/5) = v_2(n) + 1 >= 1 always for integers; plus halves.
        let step = SplitScalar::from_ints(3, 1, 2, 5);
        let cell = Cell {
            coeff: CycloComplex::one(),
            lo: Rat::zero(),
            hi: Rat::new(9.into(), 1.into()),
            ball: PBall::new(Rat::zero(), 1),
        };
        let got = enumerate_translates(&s, &SplitScalar::zero(), &step, std::slice::from_ref(&cell)).unwrap();
        let want = brute_force_translates(&s, &SplitScalar::zero(), &step, &cell);
        assert_eq!(got, want);
        assert!(got.contains(&PRational::zero(2)));
        assert!(got.contains(&PRational::from_int(2, 1)));
    }

    #[test]
    fn sections_hit_their_fibers() {
        let s = spec();
        let mut rng = sampling::stream_rng(51, 0);
        for _ in 0..50 {
            let q = s.sample_point(&mut rng);
            let z = s.moment_left(&q);
            let omega = section_mu(&s, &z).unwrap();
            assert_eq!(s.moment_left(&omega), z);

            let z = s.moment_right(&q);
            let rho = section_eps(&s, &z).unwrap();
            assert_eq!(s.moment_right(&rho), z);
        }
    }

    #[test]
    fn zero_functions_give_zero() {
        let s = spec();
        let zero = PointFn::step(StepFn::zero(2));
        let psi = PointFn::step(StepFn::indicator(
            2,
            Rat::zero(),
            Rat::one(),
            PBall::new(Rat::zero(), 0),
        ));
        let inner = InnerLeft::new(&s, zero.clone(), psi.clone()).unwrap();
        let gamma = s.left_arrow(&PRational::one(2), &SplitScalar::zero());
        assert!(inner.eval(&gamma).unwrap().is_zero());
        let inner_r = InnerRight::new(&s, zero, psi).unwrap();
        let eta = s.right_arrow(&PRational::one(2), &SplitScalar::zero());
        assert!(inner_r.eval(&eta).unwrap().is_zero());
    }

    #[test]
    fn single_cell_inner_product_matches_bruteforce() {
        // Independent oracle: scan a wide window of translates directly.
        let s = spec();
        let mut rng = sampling::stream_rng(52, 0);
        for _ in 0..10 {
            let phi = sample_step_fn(2, &mut rng);
            let psi = sample_step_fn(2, &mut rng);
            let gamma = sample_left_arrow(&s, &mut rng);
            let inner =
                InnerLeft::new(&s, PointFn::step(phi.clone()), PointFn::step(psi.clone())).unwrap();
            let got = inner.eval(&gamma).unwrap();

            let omega = section_mu(&s, &gamma.src).unwrap();
            let shift = s.embed(&gamma.g);
            let mut want = CycloComplex::zero();
            // The scan covers denominators to p^4 and a wide numerator range.
            let denom = BigInt::from(16);
            for num in -2000i64..=2000 {
                let n = Rat::new(BigInt::from(num), denom.clone());
                let m = match s.lattice_member(&n) {
                    Some(m) => m,
                    None => continue,
                };
                let at = s.right_translate(&omega, &m);
                let phi_val = phi.value(&at);
                if phi_val.is_zero() {
                    continue;
                }
                want = want.add(&phi_val.mul(&psi.value(&at.sub(&shift)).conj()));
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn suite_passes_for_antidiagonal() {
        let s = spec();
        let report = bimodule_suite(&s, &opts(12)).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn suite_passes_for_second_strict_matrix() {
        let s = Arc::new(
            BibundleSpec::build(
                2,
                &SplitScalar::from_ints(1, 3, 5, 2),
                &Mat2::from_ints(2, 1, 0, 2, 1),
                8,
            )
            .unwrap(),
        );
        let report = bimodule_suite(&s, &opts(10)).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn non_strict_spec_rejected() {
        let s = Arc::new(
            BibundleSpec::build(
                2,
                &SplitScalar::from_ints(2, 3, 5, 2),
                &Mat2::from_ints(2, 1, 1, 3, 4),
                8,
            )
            .unwrap(),
        );
        assert!(matches!(
            bimodule_suite(&s, &opts(4)),
            Err(BimoduleError::NonStrictSpec)
        ));
        let phi = PointFn::step(StepFn::zero(2));
        assert!(matches!(
            InnerLeft::new(&s, phi.clone(), phi),
            Err(BimoduleError::NonStrictSpec)
        ));
    }

    #[test]
    fn act_left_translation_shifts() {
        // A single-arrow element translates the function by delta(n0).
        let s = spec();
        let ctx = crate::algebra::AlgContext::new(2, s.alpha.clone());
        let n0 = PRational::new(2, 3, -1);
        let f = AlgElem::monomial(&ctx, n0.clone(), crate::algebra::TrigPoly::one(2));
        let phi = StepFn::indicator(2, Rat::zero(), Rat::one(), PBall::new(Rat::zero(), 0));
        let acted = act_left(&s, LeftFn::Elem(f), &PointFn::step(phi.clone())).unwrap();
        let mut rng = sampling::stream_rng(53, 0);
        for _ in 0..20 {
            let q = s.sample_point(&mut rng);
            let got = acted.eval(&q).unwrap();
            let want = phi.value(&q.sub(&s.embed(&n0)));
            assert_eq!(got, want, "q={q}");
        }
    }

    #[test]
    fn act_right_translation_shifts() {
        let s = spec();
        let ctx = crate::algebra::AlgContext::new(2, s.beta.clone());
        let m0 = PRational::new(2, 3, 0);
        let h = AlgElem::monomial(&ctx, m0.clone(), crate::algebra::TrigPoly::one(2));
        let phi = StepFn::indicator(2, Rat::zero(), Rat::one(), PBall::new(Rat::zero(), 0));
        let acted = act_right(&s, &PointFn::step(phi.clone()), RightFn::Elem(h)).unwrap();
        let mut rng = sampling::stream_rng(54, 0);
        for _ in 0..20 {
            let q = s.sample_point(&mut rng);
            let got = acted.eval(&q).unwrap();
            // The single arrow at m0 contributes phi(q - m0 * step).
            let want = phi.value(&s.right_translate(&q, &m0.neg()));
            assert_eq!(got, want, "q={q}");
        }
    }
}
