//! State-level entanglement quantities computed by semidefinite programming.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DenseOperator, SystemDims, C64, PSD_TOL};
use crate::solver::{HermExpr, SdpProblem, SolverOptions};

/// Largest extended dimension accepted by [`emax_dps_state`].
pub const MAX_EXTENSION_DIM: usize = 32;

/// Relative eigenvalue threshold below which a marginal direction is
/// treated as outside the support.
const SUPPORT_TOL: f64 = 1e-12;

/// A partition of a state's subsystems into two parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteCut {
    left: Vec<String>,
    right: Vec<String>,
}

impl BipartiteCut {
    pub fn new<S: AsRef<str>, T: AsRef<str>>(left: &[S], right: &[T]) -> Result<Self> {
        let left: Vec<String> = left.iter().map(|s| s.as_ref().to_string()).collect();
        let right: Vec<String> = right.iter().map(|s| s.as_ref().to_string()).collect();
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidParameter("both sides of a cut need a subsystem".into()));
        }
        for (i, l) in left.iter().chain(&right).enumerate() {
            if left.iter().chain(&right).skip(i + 1).any(|m| m == l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(BipartiteCut { left, right })
    }

    pub fn left(&self) -> &[String] {
        &self.left
    }

    pub fn right(&self) -> &[String] {
        &self.right
    }

    /// Checks that the cut covers exactly the subsystems in `dims`.
    pub fn validate(&self, dims: &SystemDims) -> Result<()> {
        dims.check_labels(&self.left)?;
        dims.check_labels(&self.right)?;
        if self.left.len() + self.right.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "cut {self} does not cover [{dims}]"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for BipartiteCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.left.join(" "), self.right.join(" "))
    }
}

/// The operator set a reported value was optimized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibleSet {
    /// Operators with `‖T_B σ‖₁ ≤ 1`; exact for max-Rains quantities.
    PptPrime,
    /// PPT relaxation of the separable set; a lower estimate of the
    /// separable-set value.
    PptRelaxed,
    /// PPT relaxation tightened by a symmetric extension of the given level.
    PptSymmetricExtension(usize),
}

impl fmt::Display for FeasibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSet::PptPrime => write!(f, "PPT'"),
            FeasibleSet::PptRelaxed => write!(f, "PPT-relaxed"),
            FeasibleSet::PptSymmetricExtension(k) => write!(f, "PPT-relaxed, {k}-extendible"),
        }
    }
}

/// An SDP-based value in bits together with its dual bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub bits: f64,
    /// `log₂` of the dual objective; a certified lower estimate of `bits`.
    pub dual_bits: f64,
    pub gap: f64,
    pub feasible_set: FeasibleSet,
}

impl Measurement {
    fn from_solution(primal: f64, dual: f64, gap: f64, feasible_set: FeasibleSet) -> Measurement {
        // Both optima are ≥ 1 in exact arithmetic; the clamp absorbs rounding.
        Measurement {
            bits: primal.log2().max(0.0),
            dual_bits: dual.max(f64::MIN_POSITIVE).log2().max(0.0),
            gap,
            feasible_set,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptTest {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn is_ppt(rho: &DenseOperator, cut: &BipartiteCut) -> Result<PptTest> {
    cut.validate(rho.dims())?;
    let min = rho.partial_transpose(cut.right())?.min_eigenvalue()?;
    Ok(PptTest {
        is_ppt: min >= -PSD_TOL,
        min_eigenvalue: min,
    })
}

/// Reorders `rho` to `left ⊗ right` and merges each side into one system
/// labeled `L` and `R`.
fn merge_cut(rho: &DenseOperator, cut: &BipartiteCut) -> Result<DenseOperator> {
    cut.validate(rho.dims())?;
    let order: Vec<&String> = cut.left().iter().chain(cut.right()).collect();
    let p = rho.permute(&order)?;
    let nl = rho.dims().select(cut.left())?.total();
    let nr = rho.dims().select(cut.right())?.total();
    DenseOperator::square(p.into_matrix(), SystemDims::new([("L", nl), ("R", nr)])?)
}

fn support_basis(marginal: &DenseOperator) -> Result<DMatrix<C64>> {
    let (vals, vecs) = marginal.eigen()?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > SUPPORT_TOL * top).collect();
    Ok(DMatrix::from_fn(vecs.nrows(), keep.len().max(1), |r, c| {
        keep.get(c).map_or(C64::default(), |&k| vecs[(r, k)])
    }))
}

/// Restricts `rho` to the product of the supports of its two marginals,
/// `(V_L ⊗ V_R)† ρ (V_L ⊗ V_R)`. The state lives inside that subspace, and
/// both SDPs below have optimal points there, so their values are unchanged.
pub fn compress_to_local_support(rho: &DenseOperator, cut: &BipartiteCut) -> Result<DenseOperator> {
    let merged = merge_cut(rho, cut)?;
    let vl = support_basis(&merged.partial_trace(&["R"])?)?;
    let vr = support_basis(&merged.partial_trace(&["L"])?)?;
    let v = vl.kronecker(&vr);
    let m = v.adjoint() * merged.matrix() * &v;
    let dims = SystemDims::new([("L", vl.ncols()), ("R", vr.ncols())])?;
    DenseOperator::square(m, dims)?.hermitian_part()
}

pub fn max_rains_state(rho: &DenseOperator, cut: &BipartiteCut) -> Result<Measurement> {
    max_rains_state_with(rho, cut, &SolverOptions::default())
}

/// `log₂ min Tr(P + Q)` over `P, Q ⪰ 0` with `T_R(P − Q) ⪰ ρ`.
pub fn max_rains_state_with(
    rho: &DenseOperator,
    cut: &BipartiteCut,
    opts: &SolverOptions,
) -> Result<Measurement> {
    rho.require_density()?;
    let rho = compress_to_local_support(rho, cut)?;
    let dims = rho.dims().clone();
    let mut p = SdpProblem::new();
    let pv = p.psd("P", dims.clone());
    let qv = p.psd("Q", dims);
    let diff = pv.expr().sub(&qv.expr())?.partial_transpose(&["R"])?;
    p.constrain_psd("T(P-Q)-rho", diff.sub(&HermExpr::constant(&rho)?)?);
    p.minimize(pv.trace() + qv.trace());
    let sol = p.solve_optimal(opts)?;
    Ok(Measurement::from_solution(
        sol.primal_value,
        sol.dual_value,
        sol.gap,
        FeasibleSet::PptPrime,
    ))
}

pub fn emax_ppt_state(rho: &DenseOperator, cut: &BipartiteCut) -> Result<Measurement> {
    emax_ppt_state_with(rho, cut, &SolverOptions::default())
}

/// `log₂ min Tr X` over `X ⪰ ρ` with `T_R X ⪰ 0`.
pub fn emax_ppt_state_with(
    rho: &DenseOperator,
    cut: &BipartiteCut,
    opts: &SolverOptions,
) -> Result<Measurement> {
    rho.require_density()?;
    let rho = compress_to_local_support(rho, cut)?;
    let mut p = SdpProblem::new();
    let x = p.hermitian("X", rho.dims().clone());
    p.constrain_psd("X-rho", x.expr().sub(&HermExpr::constant(&rho)?)?);
    p.constrain_psd("T(X)", x.expr().partial_transpose(&["R"])?);
    p.minimize(x.trace());
    let sol = p.solve_optimal(opts)?;
    Ok(Measurement::from_solution(
        sol.primal_value,
        sol.dual_value,
        sol.gap,
        FeasibleSet::PptRelaxed,
    ))
}

pub fn emax_dps_state(rho: &DenseOperator, cut: &BipartiteCut, level: usize) -> Result<Measurement> {
    emax_dps_state_with(rho, cut, level, &SolverOptions::default())
}

/// As [`emax_ppt_state`], additionally requiring that `X` have a
/// `level`-fold symmetric extension `X̃` on `L R₁…R_k`, PPT across every
/// cut `L R₁…R_j : R_{j+1}…R_k`. Level 1 is the plain PPT relaxation.
pub fn emax_dps_state_with(
    rho: &DenseOperator,
    cut: &BipartiteCut,
    level: usize,
    opts: &SolverOptions,
) -> Result<Measurement> {
    if level == 0 {
        return Err(Error::InvalidParameter("extension level must be at least 1".into()));
    }
    rho.require_density()?;
    if level == 1 {
        return emax_ppt_state_with(rho, cut, opts);
    }
    let rho = merge_cut(rho, cut)?;
    let nl = rho.dims().dim_of("L")?;
    let nr = rho.dims().dim_of("R")?;
    nr
        .checked_pow(level as u32)
        .and_then(|v| v.checked_mul(nl))
        .filter(|&v| v <= MAX_EXTENSION_DIM)
        .ok_or_else(|| {
            Error::SizeLimit(format!(
                "a {level}-fold extension of a {nl}x{nr} state exceeds dimension {MAX_EXTENSION_DIM}"
            ))
        })?;

    let copies: Vec<String> = (1..=level).map(|i| format!("R{i}")).collect();
    let mut systems = vec![("L".to_string(), nl)];
    systems.extend(copies.iter().map(|c| (c.clone(), nr)));
    let ext_dims = SystemDims::new(systems)?;

    let mut p = SdpProblem::new();
    let ext = p.psd("Xext", ext_dims);
    let xe = ext.expr();
    for w in copies.windows(2) {
        p.constrain_zero(
            &format!("sym({},{})", w[0], w[1]),
            &xe.sub(&xe.swap_subsystems(&w[0], &w[1])?)?,
        );
    }
    for j in 0..level {
        p.constrain_psd(&format!("ppt{j}"), xe.partial_transpose(&copies[j..])?);
    }
    let x = xe.partial_trace(&copies[1..])?.relabel(&["L", "R"])?;
    p.constrain_psd("X-rho", x.sub(&HermExpr::constant(&rho)?)?);
    p.minimize(x.trace());
    let sol = p.solve_optimal(opts)?;
    Ok(Measurement::from_solution(
        sol.primal_value,
        sol.dual_value,
        sol.gap,
        FeasibleSet::PptSymmetricExtension(level),
    ))
}
