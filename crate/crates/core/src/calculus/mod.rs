//! Invariant sequences, Taylor sequences and the recursion between them.

mod germ;
mod inversion;
mod io;
mod recursion;
mod sequence;
mod series;

pub use germ::{
    closedness_transfer, closedness_transfer_s, equivalent_first_order, first_order_class, integrality_check,
    integrality_of, FirstOrderClass, GermChange, TransferVerdict,
};
pub use inversion::series_inversion;
pub use io::{AnySequence, GermFile, SequenceFile, SequenceKind, CONVENTION};
pub use recursion::{ell_to_s, s_to_ell};
pub use sequence::{AdmissibilityFailure, AdmissibilityReport, Closedness, EllSequence, SSequence};
pub use series::{shift_substitute, Series};
