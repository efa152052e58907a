//! Modeling layer: Hermitian matrix variables, affine Hermitian expressions
//! and the lowering to a real symmetric standard form.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::embed::hermitian_embed;
use super::ipm::{self, Block, StandardForm};
use super::{SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::operator::{DenseOperator, SubsystemSplit, SystemDims, C64};

const DROP_TOL: f64 = 1e-15;

/// A Hermitian matrix variable, parametrized by `n²` real unknowns: the
/// diagonal, then the real and imaginary parts of each upper entry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianVar {
    name: String,
    offset: usize,
    dims: SystemDims,
}

impl HermitianVar {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.dims.total()
    }

    pub fn expr(&self) -> HermExpr {
        let n = self.side();
        let mut terms = BTreeMap::new();
        for a in 0..n {
            terms.insert(self.offset + a, vec![(a, a, C64::new(1.0, 0.0))]);
        }
        let mut k = self.offset + n;
        for a in 0..n {
            for b in a + 1..n {
                terms.insert(k, vec![(a, b, C64::new(1.0, 0.0)), (b, a, C64::new(1.0, 0.0))]);
                terms.insert(k + 1, vec![(a, b, C64::new(0.0, 1.0)), (b, a, C64::new(0.0, -1.0))]);
                k += 2;
            }
        }
        HermExpr {
            dims: self.dims.clone(),
            constant: DMatrix::zeros(n, n),
            terms,
        }
    }

    /// Linear functional `Tr X`.
    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::default();
        for a in 0..self.side() {
            e.terms.insert(self.offset + a, 1.0);
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarVar {
    index: usize,
}

impl ScalarVar {
    pub fn expr(self) -> LinExpr {
        LinExpr::from(self)
    }
}

/// Real affine expression `Σ a_i x_i + b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<usize, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn constant(value: f64) -> LinExpr {
        LinExpr {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn scale(mut self, f: f64) -> LinExpr {
        for v in self.terms.values_mut() {
            *v *= f;
        }
        self.constant *= f;
        self
    }

    fn axpy(&mut self, f: f64, other: &LinExpr) {
        for (&k, &v) in &other.terms {
            *self.terms.entry(k).or_insert(0.0) += f * v;
        }
        self.constant += f * other.constant;
        self.terms.retain(|_, v| v.abs() > DROP_TOL);
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&k, &v)| v * x[k]).sum::<f64>()
    }
}

impl From<ScalarVar> for LinExpr {
    fn from(v: ScalarVar) -> LinExpr {
        let mut terms = BTreeMap::new();
        terms.insert(v.index, 1.0);
        LinExpr { terms, constant: 0.0 }
    }
}

impl From<f64> for LinExpr {
    fn from(v: f64) -> LinExpr {
        LinExpr::constant(v)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, rhs: f64) -> LinExpr {
        self.scale(rhs)
    }
}

type Entries = Vec<(usize, usize, C64)>;

/// Affine Hermitian-matrix-valued expression on labeled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct HermExpr {
    dims: SystemDims,
    constant: DMatrix<C64>,
    terms: BTreeMap<usize, Entries>,
}

fn normalize(mut entries: Entries) -> Entries {
    entries.sort_by_key(|&(r, c, _)| (r, c));
    let mut out: Entries = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2.norm() > DROP_TOL);
    out
}

impl HermExpr {
    pub fn zeros(dims: SystemDims) -> HermExpr {
        let n = dims.total();
        HermExpr {
            dims,
            constant: DMatrix::zeros(n, n),
            terms: BTreeMap::new(),
        }
    }

    /// A constant expression; the operator must be square and Hermitian.
    pub fn constant(op: &DenseOperator) -> Result<HermExpr> {
        if !op.is_square() {
            return Err(Error::NotSquare {
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        if !op.is_hermitian() {
            return Err(Error::NotHermitian(op.hermitian_deviation()));
        }
        let h = op.hermitian_part()?;
        Ok(HermExpr {
            dims: op.dims().clone(),
            constant: h.into_matrix(),
            terms: BTreeMap::new(),
        })
    }

    /// `t · I` on the given space.
    pub fn scaled_identity(dims: SystemDims, t: &LinExpr) -> HermExpr {
        let n = dims.total();
        let one = C64::new(1.0, 0.0);
        let terms = t
            .terms
            .iter()
            .map(|(&k, &v)| (k, (0..n).map(|i| (i, i, one * v)).collect()))
            .collect();
        HermExpr {
            dims,
            constant: DMatrix::identity(n, n) * C64::new(t.constant, 0.0),
            terms,
        }
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    fn map_entries(&self, dims: SystemDims, f: impl Fn(usize, usize) -> Option<(usize, usize)>) -> HermExpr {
        let n = dims.total();
        let mut constant = DMatrix::zeros(n, n);
        for c in 0..self.constant.ncols() {
            for r in 0..self.constant.nrows() {
                if let Some((rr, cc)) = f(r, c) {
                    constant[(rr, cc)] += self.constant[(r, c)];
                }
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(&k, ents)| {
                let mapped = ents
                    .iter()
                    .filter_map(|&(r, c, v)| f(r, c).map(|(rr, cc)| (rr, cc, v)))
                    .collect();
                (k, normalize(mapped))
            })
            .filter(|(_, e): &(usize, Entries)| !e.is_empty())
            .collect();
        HermExpr { dims, constant, terms }
    }

    /// Aligns `other` to this expression's subsystem order.
    fn aligned(&self, other: &HermExpr) -> Result<HermExpr> {
        if other.dims == self.dims {
            return Ok(other.clone());
        }
        if !self.dims.same_systems(&other.dims) {
            return Err(Error::DimensionMismatch(format!(
                "[{}] vs [{}]",
                self.dims, other.dims
            )));
        }
        other.permute(self.dims.labels())
    }

    fn combine(&self, other: &HermExpr, f: f64) -> Result<HermExpr> {
        let other = self.aligned(other)?;
        let mut out = self.clone();
        out.constant += other.constant * C64::new(f, 0.0);
        for (k, ents) in other.terms {
            let slot = out.terms.entry(k).or_default();
            slot.extend(ents.into_iter().map(|(r, c, v)| (r, c, v * f)));
            *slot = normalize(std::mem::take(slot));
        }
        out.terms.retain(|_, e| !e.is_empty());
        Ok(out)
    }

    pub fn add(&self, other: &HermExpr) -> Result<HermExpr> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &HermExpr) -> Result<HermExpr> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, f: f64) -> HermExpr {
        let mut out = self.clone();
        out.constant *= C64::new(f, 0.0);
        for ents in out.terms.values_mut() {
            for e in ents.iter_mut() {
                e.2 *= f;
            }
        }
        if f == 0.0 {
            out.terms.clear();
        }
        out
    }

    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<HermExpr> {
        let split = SubsystemSplit::new(&self.dims, labels)?;
        Ok(self.map_entries(self.dims.clone(), |r, c| Some(split.transpose_pair(r, c))))
    }

    pub fn partial_trace<S: AsRef<str>>(&self, labels: &[S]) -> Result<HermExpr> {
        let split = SubsystemSplit::new(&self.dims, labels)?;
        let kept = self.dims.without(labels)?;
        Ok(self.map_entries(kept, |r, c| split.trace_pair(r, c)))
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<HermExpr> {
        let new_dims = self.dims.select(order)?;
        if new_dims.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation [{}] does not cover [{}]",
                new_dims, self.dims
            )));
        }
        let perm = crate::operator::permutation_indices(&self.dims, &new_dims);
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        Ok(self.map_entries(new_dims, |r, c| Some((inverse[r], inverse[c]))))
    }

    /// Conjugation by the swap of two equal-dimension subsystems; labels and
    /// order are unchanged.
    pub fn swap_subsystems(&self, a: &str, b: &str) -> Result<HermExpr> {
        let (pa, pb) = match (self.dims.position(a), self.dims.position(b)) {
            (Some(pa), Some(pb)) => (pa, pb),
            (None, _) => return Err(Error::UnknownLabel(a.into())),
            (_, None) => return Err(Error::UnknownLabel(b.into())),
        };
        if self.dims.dims()[pa] != self.dims.dims()[pb] {
            return Err(Error::DimensionMismatch(format!(
                "cannot swap {a} and {b} of different dimension"
            )));
        }
        let sigma: Vec<usize> = (0..self.dims.total())
            .map(|i| {
                let mut d = self.dims.digits(i);
                d.swap(pa, pb);
                self.dims.index(&d)
            })
            .collect();
        Ok(self.map_entries(self.dims.clone(), |r, c| Some((sigma[r], sigma[c]))))
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<HermExpr> {
        let mut out = self.clone();
        out.dims = self.dims.relabel(labels)?;
        Ok(out)
    }

    /// Real linear functional `Tr(self)`.
    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::constant(self.constant.trace().re);
        for (&k, ents) in &self.terms {
            let v: f64 = ents.iter().filter(|(r, c, _)| r == c).map(|(_, _, v)| v.re).sum();
            if v.abs() > DROP_TOL {
                e.terms.insert(k, v);
            }
        }
        e
    }

    /// Real linear functional `Tr(A · self)` for a Hermitian constant `A`.
    pub fn inner(&self, a: &DenseOperator) -> Result<LinExpr> {
        let a = self.aligned(&HermExpr::constant(a)?)?.constant;
        let mut e = LinExpr::constant((a.transpose().component_mul(&self.constant)).sum().re);
        for (&k, ents) in &self.terms {
            let v: f64 = ents.iter().map(|&(r, c, v)| (a[(c, r)] * v).re).sum();
            if v.abs() > DROP_TOL {
                e.terms.insert(k, v);
            }
        }
        Ok(e)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<DenseOperator> {
        let mut m = self.constant.clone();
        for (&k, ents) in &self.terms {
            for &(r, c, v) in ents {
                m[(r, c)] += v * x[k];
            }
        }
        DenseOperator::square(m, self.dims.clone())
    }
}

#[derive(Debug, Clone)]
struct Lmi {
    name: String,
    expr: HermExpr,
}

#[derive(Debug, Clone)]
struct VarInfo {
    name: String,
    offset: usize,
    len: usize,
}

/// A semidefinite program over Hermitian and real scalar variables, always
/// a minimization.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    n_vars: usize,
    vars: Vec<VarInfo>,
    psd_vars: Vec<HermitianVar>,
    objective: LinExpr,
    equalities: Vec<(LinExpr, String)>,
    lmis: Vec<Lmi>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Values of variables declared PSD, as real symmetric embeddings.
    pub block_values: BTreeMap<String, DMatrix<f64>>,
    x: Vec<f64>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.x[v.index]
    }

    pub fn hermitian(&self, v: &HermitianVar) -> Result<DenseOperator> {
        v.expr().evaluate(&self.x)
    }

    pub fn evaluate(&self, e: &LinExpr) -> f64 {
        e.evaluate(&self.x)
    }
}

impl SdpProblem {
    pub fn new() -> SdpProblem {
        SdpProblem::default()
    }

    pub fn num_variables(&self) -> usize {
        self.n_vars
    }

    /// Names and side lengths of the variables declared PSD.
    pub fn psd_blocks(&self) -> Vec<(String, usize)> {
        self.psd_vars.iter().map(|v| (v.name.clone(), v.side())).collect()
    }

    fn alloc(&mut self, name: &str, len: usize) -> usize {
        let offset = self.n_vars;
        self.n_vars += len;
        self.vars.push(VarInfo {
            name: name.to_string(),
            offset,
            len,
        });
        offset
    }

    pub fn hermitian(&mut self, name: &str, dims: SystemDims) -> HermitianVar {
        let n = dims.total();
        let offset = self.alloc(name, n * n);
        HermitianVar {
            name: name.to_string(),
            offset,
            dims,
        }
    }

    /// A Hermitian variable constrained to be PSD.
    pub fn psd(&mut self, name: &str, dims: SystemDims) -> HermitianVar {
        let v = self.hermitian(name, dims);
        self.lmis.push(Lmi {
            name: name.to_string(),
            expr: v.expr(),
        });
        self.psd_vars.push(v.clone());
        v
    }

    pub fn scalar(&mut self, name: &str) -> ScalarVar {
        ScalarVar {
            index: self.alloc(name, 1),
        }
    }

    pub fn minimize(&mut self, objective: LinExpr) {
        self.objective = objective;
    }

    pub fn constrain_psd(&mut self, name: &str, expr: HermExpr) {
        self.lmis.push(Lmi {
            name: name.to_string(),
            expr,
        });
    }

    /// `lhs == rhs` for real affine expressions.
    pub fn constrain_eq(&mut self, name: &str, lhs: LinExpr, rhs: LinExpr) {
        self.equalities.push((lhs - rhs, name.to_string()));
    }

    /// `expr == 0` entrywise.
    pub fn constrain_zero(&mut self, name: &str, expr: &HermExpr) {
        let n = expr.dims.total();
        let mut rows: BTreeMap<(usize, usize, bool), LinExpr> = BTreeMap::new();
        for c in 0..n {
            for r in 0..=c {
                let z = expr.constant[(r, c)];
                rows.entry((r, c, false)).or_default().constant = z.re;
                if r < c {
                    rows.entry((r, c, true)).or_default().constant = z.im;
                }
            }
        }
        for (&k, ents) in &expr.terms {
            for &(r, c, v) in ents {
                if r > c {
                    continue;
                }
                if v.re.abs() > DROP_TOL {
                    *rows.entry((r, c, false)).or_default().terms.entry(k).or_insert(0.0) += v.re;
                }
                if r < c && v.im.abs() > DROP_TOL {
                    *rows.entry((r, c, true)).or_default().terms.entry(k).or_insert(0.0) += v.im;
                }
            }
        }
        for ((r, c, im), e) in rows {
            if e.terms.is_empty() && e.constant.abs() <= DROP_TOL {
                continue;
            }
            let part = if im { "im" } else { "re" };
            self.equalities.push((e, format!("{name}[{r},{c}].{part}")));
        }
    }

    pub(crate) fn standard_form(&self) -> Result<StandardForm> {
        let n = self.n_vars;
        let mut c = DVector::zeros(n);
        for (&k, &v) in &self.objective.terms {
            c[k] = v;
        }
        let (e, f) = reduce_equalities(n, &self.equalities)?;
        let mut blocks = Vec::with_capacity(self.lmis.len());
        for lmi in &self.lmis {
            let k = lmi.expr.dims.total();
            let constant = hermitian_embed(&lmi.expr.constant)?;
            let terms = lmi
                .expr
                .terms
                .iter()
                .map(|(&var, ents)| {
                    let mut out = Vec::with_capacity(4 * ents.len());
                    for &(r, cc, v) in ents {
                        if v.re != 0.0 {
                            out.push((r, cc, v.re));
                            out.push((k + r, k + cc, v.re));
                        }
                        if v.im != 0.0 {
                            out.push((k + r, cc, v.im));
                            out.push((r, k + cc, -v.im));
                        }
                    }
                    (var, out)
                })
                .collect();
            blocks.push(Block {
                size: 2 * k,
                constant,
                terms,
            });
        }
        Ok(StandardForm {
            n,
            c,
            c0: self.objective.constant,
            e,
            f,
            blocks,
        })
    }

    /// Solves the problem. Non-optimal outcomes are reported through the
    /// solution status; only malformed or oversized problems return `Err`.
    pub fn solve(&self, opts: &SolverOptions) -> Result<SdpSolution> {
        if self.n_vars > opts.max_variables {
            return Err(Error::SizeLimit(format!(
                "{} real variables exceeds the limit of {}",
                self.n_vars, opts.max_variables
            )));
        }
        let sf = match self.standard_form() {
            Ok(sf) => sf,
            Err(Error::Solver {
                status: SolveStatus::Infeasible,
                ..
            }) => {
                return Ok(SdpSolution {
                    status: SolveStatus::Infeasible,
                    primal_value: f64::NAN,
                    dual_value: f64::NAN,
                    gap: f64::NAN,
                    primal_residual: f64::NAN,
                    dual_residual: f64::NAN,
                    iterations: 0,
                    block_values: BTreeMap::new(),
                    x: vec![0.0; self.n_vars],
                })
            }
            Err(e) => return Err(e),
        };
        let res = ipm::solve(&sf, opts);
        let x: Vec<f64> = res.x.iter().copied().collect();
        let mut block_values = BTreeMap::new();
        if res.status == SolveStatus::Optimal {
            for v in &self.psd_vars {
                let m = v.expr().evaluate(&x)?;
                block_values.insert(v.name.clone(), hermitian_embed(&m.hermitian_part()?.into_matrix())?);
            }
        }
        Ok(SdpSolution {
            status: res.status,
            primal_value: res.primal,
            dual_value: res.dual,
            gap: res.gap,
            primal_residual: res.primal_residual,
            dual_residual: res.dual_residual,
            iterations: res.iterations,
            block_values,
            x,
        })
    }

    /// Like [`solve`](Self::solve) but anything other than an optimal status
    /// becomes an error.
    pub fn solve_optimal(&self, opts: &SolverOptions) -> Result<SdpSolution> {
        let sol = self.solve(opts)?;
        if sol.is_optimal() {
            Ok(sol)
        } else {
            Err(Error::Solver {
                status: sol.status,
                detail: format!(
                    "after {} iterations: gap {:.3e}, primal residual {:.3e}, dual residual {:.3e}",
                    sol.iterations, sol.gap, sol.primal_residual, sol.dual_residual
                ),
            })
        }
    }

    /// Human-readable dump of the lowered standard form.
    pub fn write_standard_form<W: Write>(&self, mut w: W) -> Result<()> {
        let sf = self.standard_form()?;
        writeln!(w, "variables {}", sf.n)?;
        for v in &self.vars {
            writeln!(w, "  {} [{}..{})", v.name, v.offset, v.offset + v.len)?;
        }
        write!(w, "minimize {}", sf.c0)?;
        for (i, ci) in sf.c.iter().enumerate() {
            if *ci != 0.0 {
                write!(w, " + {ci}*x{i}")?;
            }
        }
        writeln!(w)?;
        writeln!(w, "equalities {}", sf.e.nrows())?;
        for r in 0..sf.e.nrows() {
            let row: Vec<String> = (0..sf.n)
                .filter(|&k| sf.e[(r, k)].abs() > DROP_TOL)
                .map(|k| format!("{}*x{k}", sf.e[(r, k)]))
                .collect();
            writeln!(w, "  {} = {}", row.join(" + "), sf.f[r])?;
        }
        for (lmi, b) in self.lmis.iter().zip(&sf.blocks) {
            writeln!(w, "psd {} size {}", lmi.name, b.size)?;
            for (var, ents) in &b.terms {
                let list: Vec<String> = ents.iter().map(|(r, c, v)| format!("({r},{c})={v}")).collect();
                writeln!(w, "  x{var}: {}", list.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Orthonormalizes the equality rows, dropping redundant ones. An
/// inconsistent redundant row makes the problem infeasible.
fn reduce_equalities(n: usize, rows: &[(LinExpr, String)]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    for (e, name) in rows {
        let mut a = DVector::zeros(n);
        for (&k, &v) in &e.terms {
            a[k] = v;
        }
        let mut b = -e.constant;
        let scale = a.norm().max(b.abs());
        for _ in 0..2 {
            for (q, qb) in &basis {
                let proj = q.dot(&a);
                a.axpy(-proj, q, 1.0);
                b -= proj * qb;
            }
        }
        let norm = a.norm();
        if norm <= 1e-10 * scale.max(1e-300) || norm == 0.0 {
            if b.abs() > 1e-8 * (1.0 + scale) {
                return Err(Error::Solver {
                    status: SolveStatus::Infeasible,
                    detail: format!("equality `{name}` is inconsistent"),
                });
            }
            continue;
        }
        basis.push((a / norm, b / norm));
    }
    let p = basis.len();
    let mut e = DMatrix::zeros(p, n);
    let mut f = DVector::zeros(p);
    for (i, (q, qb)) in basis.into_iter().enumerate() {
        e.set_row(i, &q.transpose());
        f[i] = qb;
    }
    Ok((e, f))
}

/// `t` with `t ≥ ‖M‖_∞`, via `t·I ± M ⪰ 0`.
pub fn opnorm_epigraph(problem: &mut SdpProblem, name: &str, m: &HermExpr) -> Result<ScalarVar> {
    let t = problem.scalar(name);
    let ti = HermExpr::scaled_identity(m.dims().clone(), &t.expr());
    problem.constrain_psd(&format!("{name}+"), ti.sub(m)?);
    problem.constrain_psd(&format!("{name}-"), ti.add(m)?);
    Ok(t)
}

/// `Tr P + Tr Q` with `M = P − Q`, `P, Q ⪰ 0`; minimizing it yields `‖M‖₁`.
pub fn tracenorm_epigraph(problem: &mut SdpProblem, name: &str, m: &HermExpr) -> Result<LinExpr> {
    let p = problem.psd(&format!("{name}.P"), m.dims().clone());
    let q = problem.psd(&format!("{name}.Q"), m.dims().clone());
    let diff = p.expr().sub(&q.expr())?;
    problem.constrain_zero(name, &m.sub(&diff)?);
    Ok(p.trace() + q.trace())
}
