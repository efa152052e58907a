//! Wiretap memory cells, the controlled isometry a reader interacts with,
//! the induced bidirectional channel and the erasure-cell bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bounds::{bidirectional_emax, BoundReport, OptimizerConfig, Quantity};
use crate::channels::{check_probability, params, BidirectionalChannel};
use crate::error::{Error, Result};
use crate::measures::FeasibleSet;
use crate::operator::{c64 as c, C64};

/// Tolerance on `V†V = I` for cell isometries.
pub const ISOMETRY_TOL: f64 = 1e-12;

/// `X^a Z^b` on `C^d`, with `X|j⟩ = |j+1 mod d⟩` and `Z|j⟩ = e^{2πij/d}|j⟩`.
pub fn heisenberg_weyl(d: usize, a: usize, b: usize) -> Result<DMatrix<C64>> {
    if d == 0 || a >= d || b >= d {
        return Err(Error::InvalidParameter(format!(
            "Heisenberg-Weyl indices ({a}, {b}) need 0 <= a, b < d = {d}"
        )));
    }
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let phase = C64::from_polar(1.0, 2.0 * PI * ((b * j) % d) as f64 / d as f64);
        m[((j + a) % d, j)] = phase;
    }
    Ok(m)
}

fn isometry_residual(v: &DMatrix<C64>) -> f64 {
    let n = v.ncols();
    (v.adjoint() * v - DMatrix::<C64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// A family of isometries `V^x : B′ → B E` sharing their dimensions. Rows
/// of each matrix are ordered `B ⊗ E`.
#[derive(Debug, Clone)]
pub struct WiretapMemoryCell {
    name: String,
    params: BTreeMap<String, f64>,
    isometries: Vec<DMatrix<C64>>,
    dim_in: usize,
    dim_b: usize,
    dim_e: usize,
}

impl WiretapMemoryCell {
    pub fn new(
        name: &str,
        params: BTreeMap<String, f64>,
        dims: (usize, usize, usize),
        isometries: Vec<DMatrix<C64>>,
    ) -> Result<Self> {
        let (dim_in, dim_b, dim_e) = dims;
        if isometries.is_empty() {
            return Err(Error::InvalidParameter("a memory cell needs at least one channel".into()));
        }
        for (x, v) in isometries.iter().enumerate() {
            if v.shape() != (dim_b * dim_e, dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "cell channel {x} has shape {:?}, expected ({}, {dim_in})",
                    v.shape(),
                    dim_b * dim_e
                )));
            }
            let dev = isometry_residual(v);
            if dev > ISOMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "cell channel {x} is not an isometry (deviation {dev:e})"
                )));
            }
        }
        Ok(WiretapMemoryCell {
            name: name.to_string(),
            params,
            isometries,
            dim_in,
            dim_b,
            dim_e,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn isometries(&self) -> &[DMatrix<C64>] {
        &self.isometries
    }

    /// Number of stored values `|X|`.
    pub fn len(&self) -> usize {
        self.isometries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.isometries.is_empty()
    }

    /// `(|B′|, |B|, |E|)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.dim_in, self.dim_b, self.dim_e)
    }
}

/// Messages and their codewords over a cell's index set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    codewords: Vec<Vec<usize>>,
}

impl Codebook {
    /// Codeword `k` is `codewords[k]`; all must share a length and use
    /// indices below `alphabet`.
    pub fn new(codewords: Vec<Vec<usize>>, alphabet: usize) -> Result<Self> {
        let Some(first) = codewords.first() else {
            return Err(Error::InvalidParameter("a codebook needs at least one message".into()));
        };
        let n = first.len();
        for (k, w) in codewords.iter().enumerate() {
            if w.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "codeword {k} has length {}, expected {n}",
                    w.len()
                )));
            }
            if let Some(&x) = w.iter().find(|&&x| x >= alphabet) {
                return Err(Error::InvalidParameter(format!(
                    "codeword {k} uses index {x} outside 0..{alphabet}"
                )));
            }
        }
        Ok(Codebook { codewords })
    }

    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    pub fn length(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn codeword(&self, k: usize) -> Option<&[usize]> {
        self.codewords.get(k).map(Vec::as_slice)
    }
}

/// Erasure isometry `U^p|ψ⟩ = √(1−p)|ψ⟩_B|e⟩_E + √p|e⟩_B|ψ⟩_E`, with `|e⟩`
/// the last basis vector of the `(d+1)`-dimensional `B` and `E`.
fn erasure_isometry(d: usize, p: f64) -> DMatrix<C64> {
    let de = d + 1;
    let mut u = DMatrix::zeros(de * de, d);
    for j in 0..d {
        u[(j * de + d, j)] = c((1.0 - p).sqrt(), 0.0);
        u[(d * de + j, j)] = c(p.sqrt(), 0.0);
    }
    u
}

/// The qudit erasure cell `V^x = U^p σ^x`, with `x = a·d + b` indexing
/// `σ^x = X^a Z^b`.
pub fn erasure_wiretap_cell(d: usize, p: f64) -> Result<WiretapMemoryCell> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("erasure cell needs d >= 2, got {d}")));
    }
    check_probability("p", p)?;
    let u = erasure_isometry(d, p);
    let mut isometries = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            isometries.push(&u * heisenberg_weyl(d, a, b)?);
        }
    }
    WiretapMemoryCell::new(
        "erasure-cell",
        params(&[("d", d as f64), ("p", p)]),
        (d, d + 1, d + 1),
        isometries,
    )
}

/// `U^M = Σ_x |x⟩⟨x|_X ⊗ V^x`, mapping `X B′` to `X B E`.
pub fn controlled_isometry(cell: &WiretapMemoryCell) -> DMatrix<C64> {
    let (din, db, de) = cell.dims();
    let nx = cell.len();
    let out = db * de;
    let mut m = DMatrix::zeros(nx * out, nx * din);
    for (x, v) in cell.isometries().iter().enumerate() {
        m.view_mut((x * out, x * din), (out, din)).copy_from(v);
    }
    m
}

/// `Tr_E[U^M · (U^M)†]` as a bidirectional channel: the control `X` plays
/// Alice's input and output, `B′ → B` is Bob's.
pub fn induced_bidirectional_channel(cell: &WiretapMemoryCell) -> Result<BidirectionalChannel> {
    let (din, db, de) = cell.dims();
    let nx = cell.len();
    let u = controlled_isometry(cell);
    let kraus = (0..de)
        .map(|k| DMatrix::from_fn(nx * db, nx * din, |r, col| u[((r / db) * db * de + (r % db) * de + k, col)]))
        .collect();
    BidirectionalChannel::from_kraus(
        &format!("{}-induced", cell.name()),
        cell.params().clone(),
        (nx, din),
        (nx, db),
        kraus,
    )
}

/// `2(1−p) log₂ d`.
pub fn erasure_private_reading_bound(d: usize, p: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("erasure cell needs d >= 2, got {d}")));
    }
    check_probability("p", p)?;
    Ok(2.0 * (1.0 - p) * (d as f64).log2())
}

/// [`erasure_private_reading_bound`] wrapped as a report.
pub fn erasure_formula_report(d: usize, p: f64) -> Result<BoundReport> {
    Ok(BoundReport {
        quantity: Quantity::ErasureFormula,
        value_bits: erasure_private_reading_bound(d, p)?,
        channel: "erasure-cell".into(),
        parameters: params(&[("d", d as f64), ("p", p)]),
        gap: None,
        feasible_set: "analytic".into(),
        optimizer: None,
    })
}

/// `E_max` of the induced channel, relaxed to PPT. Only `d = 2` fits under
/// [`crate::bounds::MAX_CHOI_DIM`]; there each random start costs seconds
/// where [`OptimizerConfig::deterministic`] costs a fraction of one.
pub fn reading_bound_via_emax(cell: &WiretapMemoryCell, cfg: &OptimizerConfig) -> Result<BoundReport> {
    let channel = induced_bidirectional_channel(cell)?;
    let mut report = bidirectional_emax(&channel, cfg)?;
    report.quantity = Quantity::ReadingBound;
    report.channel = cell.name().to_string();
    report.feasible_set = FeasibleSet::PptRelaxed.to_string();
    Ok(report)
}
