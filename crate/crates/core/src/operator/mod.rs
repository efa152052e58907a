//! Dense complex operators on labeled tensor-product spaces.

mod dense;
mod dims;
pub mod random;
mod state;
pub mod text;

pub use dense::{fidelity, DenseOperator, C64, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
pub use dims::SystemDims;
pub use state::PureState;

pub(crate) use dense::{c64, permutation_indices};
pub(crate) use dims::SubsystemSplit;

/// Kronecker product of two operators with concatenated subsystem lists.
pub fn tensor(a: &DenseOperator, b: &DenseOperator) -> crate::Result<DenseOperator> {
    a.tensor(b)
}

pub fn partial_trace<S: AsRef<str>>(op: &DenseOperator, traced: &[S]) -> crate::Result<DenseOperator> {
    op.partial_trace(traced)
}

pub fn partial_transpose<S: AsRef<str>>(
    op: &DenseOperator,
    transposed: &[S],
) -> crate::Result<DenseOperator> {
    op.partial_transpose(transposed)
}

pub fn trace_norm(op: &DenseOperator) -> crate::Result<f64> {
    op.trace_norm()
}

pub fn operator_norm(op: &DenseOperator) -> crate::Result<f64> {
    op.operator_norm()
}
