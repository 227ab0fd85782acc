//! Functions and forms on the reduced seam `Gamma x T^{n-1}`.

mod function;
mod key;
mod section;

pub use function::{AlgebraConfig, Record, TorusFn};
pub use key::Key;
pub use section::{Classification, LSection, SectionRecords, TwoFormSection};
