//! Equality regime for the verification suites: exact by default, with a
//! non-normative float mode (binary64 with a configurable tolerance) for
//! exploring inputs that have no exact representation.

use crate::exact::{Angle, CycloComplex, SplitScalar};
use crate::solenoid::SolenoidPoint;

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub enum EqMode {
    #[default]
    Exact,
    Float { tol: f64 },
}


impl EqMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, EqMode::Exact)
    }

    pub fn angle_eq(&self, a: &Angle, b: &Angle) -> bool {
        match self {
            EqMode::Exact => a == b,
            EqMode::Float { tol } => a.circle_distance(b) <= *tol,
        }
    }

    pub fn point_eq(&self, a: &SolenoidPoint, b: &SolenoidPoint) -> bool {
        match self {
            EqMode::Exact => a == b,
            EqMode::Float { tol } => {
                a.level() == b.level()
                    && a.angles()
                        .iter()
                        .zip(b.angles())
                        .all(|(x, y)| x.circle_distance(y) <= *tol)
            }
        }
    }

    pub fn split_eq(&self, a: &SplitScalar, b: &SplitScalar) -> bool {
        match self {
            EqMode::Exact => a == b,
            EqMode::Float { tol } => {
                let dt = crate::exact::to_f64(a.real()) - crate::exact::to_f64(b.real());
                let dr = crate::exact::to_f64(a.padic()) - crate::exact::to_f64(b.padic());
                dt.abs() <= *tol && dr.abs() <= *tol
            }
        }
    }

    pub fn cyclo_eq(&self, a: &CycloComplex, b: &CycloComplex) -> bool {
        match self {
            EqMode::Exact => a == b,
            EqMode::Float { tol } => a.sub(b).abs_f64() <= *tol,
        }
    }
}
