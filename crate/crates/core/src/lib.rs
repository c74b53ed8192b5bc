//! Integral cohomology of the projective unitary groups `PU(n)`.

pub mod arithmetic;
pub mod error;
pub mod gradedalg;
pub mod indexcalc;
pub mod intlinalg;
pub mod koszul;
pub mod presentation;
pub mod theta;

pub use error::{Error, Result};
pub use gradedalg::{Degree, ExtElem, PresElem, PresMonomial};
pub use indexcalc::{MultiIndex, PSequence};
pub use intlinalg::{AbelianGroup, SparseIntMatrix};
pub use koszul::{Ambient, E2Elem, E3Page, OracleLimits};
pub use presentation::{Check, Provenance, Relation, RingPresentation};
