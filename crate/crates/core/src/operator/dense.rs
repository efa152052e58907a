use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::dims::{SubsystemSplit, SystemDims};
use super::state::PureState;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A complex matrix whose row and column spaces carry labeled tensor
/// structure. Square operators (states, unitaries, Choi operators) have
/// `dims == codims`; isometries and Kraus operators may not.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    dims: SystemDims,
    codims: SystemDims,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>, dims: SystemDims, codims: SystemDims) -> Result<Self> {
        if mat.nrows() != dims.total() || mat.ncols() != codims.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but systems [{}] -> [{}] need {}x{}",
                mat.nrows(),
                mat.ncols(),
                dims,
                codims,
                dims.total(),
                codims.total()
            )));
        }
        Ok(DenseOperator { mat, dims, codims })
    }

    pub fn square(mat: DMatrix<C64>, dims: SystemDims) -> Result<Self> {
        let codims = dims.clone();
        DenseOperator::new(mat, dims, codims)
    }

    pub fn identity(dims: SystemDims) -> Self {
        let n = dims.total();
        DenseOperator {
            mat: DMatrix::identity(n, n),
            codims: dims.clone(),
            dims,
        }
    }

    pub fn zeros(dims: SystemDims) -> Self {
        let n = dims.total();
        DenseOperator {
            mat: DMatrix::zeros(n, n),
            codims: dims.clone(),
            dims,
        }
    }

    /// Real diagonal operator.
    pub fn diagonal(dims: SystemDims, diag: &[f64]) -> Result<Self> {
        if diag.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries for dimension {}",
                diag.len(),
                dims.total()
            )));
        }
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c64(x, 0.0)));
        DenseOperator::square(DMatrix::from_diagonal(&v), dims)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(state: &PureState) -> Self {
        let v = state.amplitudes();
        DenseOperator {
            mat: v * v.adjoint(),
            dims: state.dims().clone(),
            codims: state.dims().clone(),
        }
    }

    /// `|ψ⟩` as an operator from the trivial space.
    pub fn ket(state: &PureState) -> Self {
        DenseOperator {
            mat: DMatrix::from_column_slice(state.amplitudes().len(), 1, state.amplitudes().as_slice()),
            dims: state.dims().clone(),
            codims: SystemDims::trivial(),
        }
    }

    /// `⟨ψ|` as an operator into the trivial space.
    pub fn bra(state: &PureState) -> Self {
        DenseOperator::ket(state).adjoint()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn codims(&self) -> &SystemDims {
        &self.codims
    }

    pub fn nrows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.mat.ncols()
    }

    /// Row and column spaces coincide (same labels, same order).
    pub fn is_square(&self) -> bool {
        self.dims == self.codims
    }

    fn require_square(&self) -> Result<()> {
        if self.mat.nrows() != self.mat.ncols() {
            return Err(Error::NotSquare {
                rows: self.mat.nrows(),
                cols: self.mat.ncols(),
            });
        }
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "row systems [{}] differ from column systems [{}]",
                self.dims, self.codims
            )));
        }
        Ok(())
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    /// Kronecker product; subsystem lists are concatenated.
    pub fn tensor(&self, other: &DenseOperator) -> Result<DenseOperator> {
        let dims = self.dims.concat(&other.dims)?;
        let codims = self.codims.concat(&other.codims)?;
        Ok(DenseOperator {
            mat: self.mat.kronecker(&other.mat),
            dims,
            codims,
        })
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.adjoint(),
            dims: self.codims.clone(),
            codims: self.dims.clone(),
        }
    }

    pub fn transpose(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.transpose(),
            dims: self.codims.clone(),
            codims: self.dims.clone(),
        }
    }

    pub fn conj(&self) -> DenseOperator {
        DenseOperator {
            mat: self.mat.map(|z| z.conj()),
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.codims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose [{}] <- [{}] with [{}] <- [{}]",
                self.dims, self.codims, other.dims, other.codims
            )));
        }
        Ok(DenseOperator {
            mat: &self.mat * &other.mat,
            dims: self.dims.clone(),
            codims: other.codims.clone(),
        })
    }

    pub fn scale(&self, factor: C64) -> DenseOperator {
        DenseOperator {
            mat: self.mat.map(|z| z * factor),
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> DenseOperator {
        self.scale(c64(factor, 0.0))
    }

    /// Entrywise sum; `other` is reordered to this operator's subsystem order
    /// when both are square over the same systems.
    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        let other = self.align(other)?;
        Ok(DenseOperator {
            mat: &self.mat + &other.mat,
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.add(&other.scale_real(-1.0))
    }

    fn align(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.dims == other.dims && self.codims == other.codims {
            return Ok(other.clone());
        }
        if self.is_square() && other.is_square() && self.dims.same_systems(&other.dims) {
            return other.permute(self.dims.labels());
        }
        Err(Error::DimensionMismatch(format!(
            "[{}] <- [{}] vs [{}] <- [{}]",
            self.dims, self.codims, other.dims, other.codims
        )))
    }

    /// Largest entrywise modulus of `self − other` (subsystem order aligned).
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        let other = self.align(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn trace(&self) -> Result<C64> {
        self.require_square()?;
        Ok(self.mat.trace())
    }

    pub fn real_trace(&self) -> Result<f64> {
        Ok(self.trace()?.re)
    }

    /// Reorders the subsystems of a square operator.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DenseOperator> {
        self.require_square()?;
        let new_dims = self.dims.select(order)?;
        if new_dims.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation [{}] does not cover [{}]",
                new_dims, self.dims
            )));
        }
        if new_dims == self.dims {
            return Ok(self.clone());
        }
        let perm = permutation_indices(&self.dims, &new_dims);
        let n = self.mat.nrows();
        let mat = DMatrix::from_fn(n, n, |r, c| self.mat[(perm[r], perm[c])]);
        Ok(DenseOperator {
            mat,
            dims: new_dims.clone(),
            codims: new_dims,
        })
    }

    /// Renames the subsystems of a square operator, keeping their order.
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<DenseOperator> {
        self.require_square()?;
        let dims = self.dims.relabel(labels)?;
        Ok(DenseOperator {
            mat: self.mat.clone(),
            codims: dims.clone(),
            dims,
        })
    }

    /// Renames both row and column subsystem lists (rectangular allowed).
    pub fn relabel_spaces<S: AsRef<str>, T: AsRef<str>>(
        &self,
        row_labels: &[S],
        col_labels: &[T],
    ) -> Result<DenseOperator> {
        Ok(DenseOperator {
            mat: self.mat.clone(),
            dims: self.dims.relabel(row_labels)?,
            codims: self.codims.relabel(col_labels)?,
        })
    }

    pub fn partial_trace<S: AsRef<str>>(&self, traced: &[S]) -> Result<DenseOperator> {
        self.require_square()?;
        let split = SubsystemSplit::new(&self.dims, traced)?;
        let kept = self.dims.without(traced)?;
        let m = split.n_rest;
        let mut out = DMatrix::<C64>::zeros(m, m);
        let n = self.mat.nrows();
        for c in 0..n {
            for r in 0..n {
                if let Some((rr, cc)) = split.trace_pair(r, c) {
                    out[(rr, cc)] += self.mat[(r, c)];
                }
            }
        }
        Ok(DenseOperator {
            mat: out,
            codims: kept.clone(),
            dims: kept,
        })
    }

    pub fn partial_transpose<S: AsRef<str>>(&self, transposed: &[S]) -> Result<DenseOperator> {
        self.require_square()?;
        let split = SubsystemSplit::new(&self.dims, transposed)?;
        let n = self.mat.nrows();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                let (rr, cc) = split.transpose_pair(r, c);
                out[(rr, cc)] = self.mat[(r, c)];
            }
        }
        Ok(DenseOperator {
            mat: out,
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        })
    }

    /// Applies `Σ_k (K_k ⊗ I) ρ (K_k ⊗ I)†` where each `K_k` maps the
    /// subsystems in its column space to those in its row space; every other
    /// subsystem of `self` is a spectator. The result lists the Kraus output
    /// systems first, followed by the spectators in their original order.
    pub fn conjugate_subsystems(&self, kraus: &[DenseOperator]) -> Result<DenseOperator> {
        self.require_square()?;
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        for k in kraus {
            if k.dims != first.dims || k.codims != first.codims {
                return Err(Error::DimensionMismatch(
                    "Kraus operators act on different systems".into(),
                ));
            }
        }
        let inputs = first.codims.labels();
        for (label, &d) in inputs.iter().zip(first.codims.dims()) {
            let have = self.dims.dim_of(label)?;
            if have != d {
                return Err(Error::DimensionMismatch(format!(
                    "subsystem `{label}` has dimension {have}, channel expects {d}"
                )));
            }
        }
        let spectators = self.dims.without(inputs)?;
        let out_dims = first.dims.concat(&spectators)?;
        let mut order: Vec<String> = inputs.to_vec();
        order.extend(spectators.labels().iter().cloned());
        let rho = self.permute(&order)?;
        let id = DMatrix::<C64>::identity(spectators.total(), spectators.total());
        let n_out = out_dims.total();
        let mut acc = DMatrix::<C64>::zeros(n_out, n_out);
        for k in kraus {
            let full = k.mat.kronecker(&id);
            let tmp = &full * &rho.mat;
            acc += tmp * full.adjoint();
        }
        Ok(DenseOperator {
            mat: acc,
            codims: out_dims.clone(),
            dims: out_dims,
        })
    }

    /// `U ρ U†` for a unitary acting on a subset of the subsystems; subsystem
    /// order of `self` is preserved.
    pub fn conjugate_local(&self, unitary: &DenseOperator) -> Result<DenseOperator> {
        if unitary.dims != unitary.codims {
            return Err(Error::DimensionMismatch(
                "local conjugation needs a square unitary".into(),
            ));
        }
        let out = self.conjugate_subsystems(std::slice::from_ref(unitary))?;
        out.permute(self.dims.labels())
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if self.mat.nrows() != self.mat.ncols() {
            return f64::INFINITY;
        }
        let n = self.mat.nrows();
        let mut dev = 0.0_f64;
        for c in 0..n {
            for r in 0..=c {
                dev = dev.max((self.mat[(r, c)] - self.mat[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * (1.0 + self.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Result<DenseOperator> {
        self.require_square()?;
        let mat = (&self.mat + self.mat.adjoint()).map(|z| z * 0.5);
        Ok(DenseOperator {
            mat,
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        })
    }

    fn require_hermitian(&self) -> Result<()> {
        self.require_square()?;
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * (1.0 + self.max_abs()) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(())
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let h = self.hermitian_part()?;
        let eig = SymmetricEigen::new(h.mat);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }

    /// Eigen-decomposition of a Hermitian operator: (ascending eigenvalues,
    /// matching eigenvector columns).
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        self.require_hermitian()?;
        let h = self.hermitian_part()?;
        let eig = SymmetricEigen::new(h.mat);
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| {
            eig.eigenvectors[(r, idx[c])]
        });
        Ok((vals, vecs))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.mat.singular_values().iter().copied().collect()
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> Result<f64> {
        if self.mat.nrows() != self.mat.ncols() {
            return Err(Error::NotSquare {
                rows: self.mat.nrows(),
                cols: self.mat.ncols(),
            });
        }
        Ok(self.singular_values().iter().sum())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        if self.mat.nrows() != self.mat.ncols() {
            return Err(Error::NotSquare {
                rows: self.mat.nrows(),
                cols: self.mat.ncols(),
            });
        }
        Ok(self.singular_values().iter().copied().fold(0.0, f64::max))
    }

    /// Checks PSD (eigenvalue floor −1e-10) and unit trace (within 1e-10).
    pub fn is_density(&self) -> bool {
        let Ok(tr) = self.trace() else { return false };
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return false;
        }
        self.min_eigenvalue().map(|m| m >= -PSD_TOL).unwrap_or(false)
    }

    pub fn require_density(&self) -> Result<()> {
        if self.is_density() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "operator is not a density operator".into(),
            ))
        }
    }

    /// Square root of a PSD operator (negative eigenvalues clipped).
    pub fn sqrt_psd(&self) -> Result<DenseOperator> {
        let (vals, vecs) = self.eigen()?;
        let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| c64(v.max(0.0).sqrt(), 0.0)));
        let mat = &vecs * DMatrix::from_diagonal(&d) * vecs.adjoint();
        Ok(DenseOperator {
            mat,
            dims: self.dims.clone(),
            codims: self.codims.clone(),
        })
    }

    /// `‖ρ − σ‖₁ / 2`.
    pub fn trace_distance(&self, other: &DenseOperator) -> Result<f64> {
        Ok(self.sub(other)?.trace_norm()? / 2.0)
    }
}

/// Uhlmann fidelity `‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    rho.require_square()?;
    let sigma = rho.align(sigma)?;
    let a = rho.sqrt_psd()?;
    let b = sigma.sqrt_psd()?;
    let prod = DenseOperator {
        mat: a.mat * b.mat,
        dims: rho.dims.clone(),
        codims: rho.dims.clone(),
    };
    let f = prod.trace_norm()?;
    Ok((f * f).clamp(0.0, 1.0))
}

/// `perm[new_index] = old_index` for reordering `from` into `to`.
pub(crate) fn permutation_indices(from: &SystemDims, to: &SystemDims) -> Vec<usize> {
    let pos: Vec<usize> = to
        .labels()
        .iter()
        .map(|l| from.position(l).expect("label present"))
        .collect();
    (0..to.total())
        .map(|new| {
            let nd = to.digits(new);
            let mut od = vec![0; from.len()];
            for (k, &p) in pos.iter().enumerate() {
                od[p] = nd[k];
            }
            from.index(&od)
        })
        .collect()
}
