//! Exact arithmetic for p-solenoids and the structures built on top of them:
//! action groupoids, equivalence bibundles, twisted convolution algebras and
//! imprimitivity bimodules, together with randomized verification suites that
//! check every structural identity with exact (big-rational / cyclotomic)
//! arithmetic at a finite truncation level.
//!
//! Everything in this crate is a pure value; no operation mutates shared
//! state, so all types can be used freely across threads.

pub mod algebra;
pub mod bibundle;
pub mod bimodule;
pub mod exact;
pub mod groupoid;
pub mod moebius;
pub mod report;
pub mod sampling;
pub mod solenoid;
pub mod verify;

pub use exact::{Angle, CycloComplex, CycloError, NumError, PRational, Rat, SplitScalar};
pub use groupoid::{Arrow, ComposeError};
pub use moebius::Mat2;
pub use report::{CheckReport, ReportStatus, SuiteReport};
pub use solenoid::SolenoidPoint;
pub use verify::EqMode;
