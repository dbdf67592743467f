//! Concrete amenable groups, finite subsets, invariance and Følner limits.
//!
//! Only `Z^d` is implemented. Group elements are integer vectors and the
//! group law is coordinatewise addition; the left action on finite sets is
//! `g . F = F g^{-1}`, i.e. `F - g` in additive notation.

mod element;
mod folner;
mod limits;
mod subset;

pub use element::{CountableGroup, GroupElement, Zd};
pub use folner::{folner_window, BoxKind, FolnerSchedule};
pub use limits::{limsup_along, ConvergenceReport, LimitOptions, SeriesPoint, Trend};
pub use subset::{invariance_defect, is_invariant, translate, FiniteSubset, InvariancePair};
