//! Primal-dual interior-point method on a homogeneous self-dual embedding.
//!
//! Standard form, all matrices real symmetric:
//!
//! ```text
//! primal:  min cᵀx        s.t.  E x = f,  S_j = C_j + Σ_i x_i G_{j,i} ⪰ 0
//! dual:    max fᵀy − Σ⟨C_j, Z_j⟩  s.t.  Σ_j G_j*(Z_j) + Eᵀy = c,  Z_j ⪰ 0
//! ```
//!
//! Search directions use Nesterov–Todd scaling and a Mehrotra
//! predictor-corrector; the reduced system is the dense Schur complement
//! `M_ik = Σ_j ⟨G_{j,i}, W_j⁻¹ G_{j,k} W_j⁻¹⟩`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{SolveStatus, SolverOptions};

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub size: usize,
    pub constant: DMatrix<f64>,
    /// `(variable, entries)` with each coefficient matrix stored as its full
    /// list of nonzero `(row, col, value)` entries.
    pub terms: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub c: DVector<f64>,
    pub c0: f64,
    pub e: DMatrix<f64>,
    pub f: DVector<f64>,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

type Blocks = Vec<DMatrix<f64>>;

struct Scaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    winv: DMatrix<f64>,
    lambda: DVector<f64>,
}

#[derive(Clone)]
struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: Blocks,
    dz: Blocks,
    dtau: f64,
    dkappa: f64,
}

fn dot_blocks(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm_blocks(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for c in 0..n {
        for r in 0..c {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

impl StandardForm {
    fn apply(&self, x: &DVector<f64>) -> Blocks {
        self.blocks
            .iter()
            .map(|b| {
                let mut s = DMatrix::zeros(b.size, b.size);
                for (v, ents) in &b.terms {
                    let xv = x[*v];
                    if xv != 0.0 {
                        for &(r, c, g) in ents {
                            s[(r, c)] += g * xv;
                        }
                    }
                }
                s
            })
            .collect()
    }

    fn adjoint(&self, z: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (b, zb) in self.blocks.iter().zip(z) {
            for (v, ents) in &b.terms {
                out[*v] += ents.iter().map(|&(r, c, g)| g * zb[(r, c)]).sum::<f64>();
            }
        }
        out
    }

    fn constants(&self) -> Blocks {
        self.blocks.iter().map(|b| b.constant.clone()).collect()
    }

    fn schur(&self, scalings: &[Scaling]) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for (b, sc) in self.blocks.iter().zip(scalings) {
            let v = &sc.winv;
            for (ii, (vi, ei)) in b.terms.iter().enumerate() {
                for (vk, ek) in &b.terms[ii..] {
                    let mut s = 0.0;
                    for &(a, bb, g) in ei {
                        for &(c, d, h) in ek {
                            s += g * h * v[(a, c)] * v[(d, bb)];
                        }
                    }
                    let (lo, hi) = if vi <= vk { (*vi, *vk) } else { (*vk, *vi) };
                    m[(lo, hi)] += s;
                }
            }
        }
        for c in 0..self.n {
            for r in 0..c {
                m[(c, r)] = m[(r, c)];
            }
        }
        m
    }
}

fn nt_scaling(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let n = s.nrows();
    let ls = Cholesky::new(s.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let svd = (lz.transpose() * &ls).svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let lambda = svd.singular_values;
    if lambda.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let mut r = &ls * vt.transpose();
    let mut rinv = u.transpose() * lz.transpose();
    for j in 0..n {
        let f = lambda[j].sqrt();
        r.column_mut(j).unscale_mut(f);
        rinv.row_mut(j).unscale_mut(f);
    }
    let mut winv = rinv.transpose() * &rinv;
    symmetrize(&mut winv);
    Some(Scaling {
        r,
        rinv,
        winv,
        lambda,
    })
}

/// `X` with `Λ X + X Λ = 2 r`, i.e. `X_ab = 2 r_ab / (λ_a + λ_b)`.
fn lambda_div(lambda: &DVector<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(r.nrows(), r.ncols(), |a, b| 2.0 * r[(a, b)] / (lambda[a] + lambda[b]))
}

/// Largest `α` with `Λ + α D ⪰ 0` (infinite if `D ⪰ 0`).
fn max_step(lambda: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    let mut m = DMatrix::from_fn(n, n, |a, b| d[(a, b)] / (lambda[a] * lambda[b]).sqrt());
    symmetrize(&mut m);
    let min = m.symmetric_eigenvalues().min();
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

/// Solver for `[M, −Eᵀ; E, 0] [x; y] = [p; q]`.
struct Kkt {
    m: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    e: DMatrix<f64>,
    minv_et: DMatrix<f64>,
    schur_e: Option<Cholesky<f64, Dyn>>,
}

impl Kkt {
    fn new(m: DMatrix<f64>, e: &DMatrix<f64>) -> Option<Kkt> {
        let n = m.nrows();
        let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut reg = 1e-13 * diag_max;
        let chol = loop {
            let mut mr = m.clone();
            for i in 0..n {
                mr[(i, i)] += reg;
            }
            if let Some(ch) = Cholesky::new(mr) {
                break ch;
            }
            reg *= 100.0;
            if reg > 1e-4 * diag_max {
                return None;
            }
        };
        let p = e.nrows();
        let (minv_et, schur_e) = if p == 0 {
            (DMatrix::zeros(n, 0), None)
        } else {
            let minv_et = chol.solve(&e.transpose());
            let mut se = e * &minv_et;
            symmetrize(&mut se);
            let se_max = (0..p).map(|i| se[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
            let mut sreg = 1e-14 * se_max;
            let ch = loop {
                let mut sr = se.clone();
                for i in 0..p {
                    sr[(i, i)] += sreg;
                }
                if let Some(ch) = Cholesky::new(sr) {
                    break ch;
                }
                sreg *= 100.0;
                if sreg > 1e-4 * se_max {
                    return None;
                }
            };
            (minv_et, Some(ch))
        };
        Some(Kkt {
            m,
            chol,
            e: e.clone(),
            minv_et,
            schur_e,
        })
    }

    fn solve_once(&self, p: &DVector<f64>, q: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let w = self.chol.solve(p);
        match &self.schur_e {
            None => (w, DVector::zeros(0)),
            Some(se) => {
                let dy = se.solve(&(q - &self.e * &w));
                let dx = w + &self.minv_et * &dy;
                (dx, dy)
            }
        }
    }

    fn solve(&self, p: &DVector<f64>, q: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut x, mut y) = self.solve_once(p, q);
        for _ in 0..2 {
            let rp = p - (&self.m * &x - self.e.tr_mul(&y));
            let rq = q - &self.e * &x;
            let (cx, cy) = self.solve_once(&rp, &rq);
            x += cx;
            y += cy;
        }
        (x, y)
    }
}

const REFINEMENT_ROUNDS: usize = 4;
/// Extra iterations spent past the tolerances, aiming at `POLISH_FACTOR`
/// times them; the best point meeting the tolerances is returned.
const POLISH_ITERATIONS: usize = 5;
const POLISH_FACTOR: f64 = 1e-2;
/// Allowance on the dual residual for certification. Recovering `ΔZ`
/// through the scaling cancels to about 1e-8 once `μ` is tiny, while the
/// reported value only relies on primal feasibility and the gap.
const DUAL_RESIDUAL_SLACK: f64 = 1e2;

pub(crate) fn solve(sf: &StandardForm, opts: &SolverOptions) -> IpmResult {
    let n = sf.n;
    let p = sf.e.nrows();
    let nu: f64 = sf.blocks.iter().map(|b| b.size as f64).sum();
    let cmat = sf.constants();

    let mut x = DVector::<f64>::zeros(n);
    let mut y = DVector::<f64>::zeros(p);
    let mut s: Blocks = sf.blocks.iter().map(|b| DMatrix::identity(b.size, b.size)).collect();
    let mut z = s.clone();
    let mut tau = 1.0_f64;
    let mut kappa = 1.0_f64;

    let norm_c = sf.c.norm();
    let norm_data = (norm_blocks(&cmat).powi(2) + sf.f.norm_squared()).sqrt();

    let mut result = IpmResult {
        status: SolveStatus::NumericalFailure,
        x: x.clone(),
        primal: f64::NAN,
        dual: f64::NAN,
        gap: f64::INFINITY,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        iterations: 0,
    };

    let mut certified: Option<IpmResult> = None;
    let mut polish_left = POLISH_ITERATIONS;
    for iter in 0..=opts.max_iterations {
        let gx = sf.apply(&x);
        let gz = sf.adjoint(&z);
        let r_x = &gz + sf.e.tr_mul(&y) - &sf.c * tau;
        let r_y = &sf.e * &x - &sf.f * tau;
        let r_s: Blocks = s
            .iter()
            .zip(&gx)
            .zip(&cmat)
            .map(|((sj, gj), cj)| sj - gj - cj * tau)
            .collect();
        let cx = sf.c.dot(&x);
        let dual_lin = sf.f.dot(&y) - dot_blocks(&cmat, &z);
        let r_tau = kappa + cx - dual_lin;

        let pobj = cx / tau + sf.c0;
        let dobj = dual_lin / tau + sf.c0;
        let pres = (norm_blocks(&r_s).powi(2) + r_y.norm_squared()).sqrt() / tau / (1.0 + norm_data);
        let dres = r_x.norm() / tau / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / pobj.abs().max(1.0);

        result.x = &x / tau;
        result.primal = pobj;
        result.dual = dobj;
        result.gap = gap;
        result.primal_residual = pres;
        result.dual_residual = dres;
        result.iterations = iter;

        let meets = |scale: f64| {
            pres < scale * opts.feasibility_tolerance
                && dres < scale * DUAL_RESIDUAL_SLACK * opts.feasibility_tolerance
                && gap < scale * opts.gap_tolerance
        };
        if meets(1.0) {
            result.status = SolveStatus::Optimal;
            let sharp = meets(POLISH_FACTOR) && dres < opts.feasibility_tolerance;
            if sharp || polish_left == 0 {
                return result;
            }
            // Keep the certified point and try for a few sharper ones.
            let worst = |r: &IpmResult| r.gap.max(r.primal_residual).max(r.dual_residual);
            if certified.as_ref().is_none_or(|c| worst(&result) <= worst(c)) {
                certified = Some(result.clone());
            }
            polish_left -= 1;
            result.status = SolveStatus::NumericalFailure;
        }
        if certified.is_none() && kappa > tau {
            if dual_lin > 0.0 {
                let ray = (&gz + sf.e.tr_mul(&y)).norm() / dual_lin;
                if ray < opts.feasibility_tolerance {
                    result.status = SolveStatus::Infeasible;
                    return certified.unwrap_or(result);
                }
            }
            if cx < 0.0 {
                let ex = (&sf.e * &x).norm();
                let sx: f64 = s
                    .iter()
                    .zip(&gx)
                    .map(|(sj, gj)| (sj - gj).norm_squared())
                    .sum::<f64>()
                    .sqrt();
                let ray = (ex * ex + sx * sx).sqrt() / -cx;
                if ray < opts.feasibility_tolerance {
                    result.status = SolveStatus::Unbounded;
                    return certified.unwrap_or(result);
                }
            }
        }
        if iter == opts.max_iterations {
            break;
        }

        let mu = (dot_blocks(&s, &z) + tau * kappa) / (nu + 1.0);
        let scalings: Option<Vec<Scaling>> = s.iter().zip(&z).map(|(sj, zj)| nt_scaling(sj, zj)).collect();
        let Some(scalings) = scalings else {
            return certified.unwrap_or(result);
        };
        let Some(kkt) = Kkt::new(sf.schur(&scalings), &sf.e) else {
            return certified.unwrap_or(result);
        };

        let hinv = |u: &[DMatrix<f64>]| -> Blocks {
            u.iter()
                .zip(&scalings)
                .map(|(uj, sc)| {
                    let mut m = &sc.winv * uj * &sc.winv;
                    symmetrize(&mut m);
                    m
                })
                .collect()
        };

        let p2 = -(sf.adjoint(&hinv(&cmat)) + &sf.c);
        let (x2, y2) = kkt.solve(&p2, &sf.f);
        let gx2 = sf.apply(&x2);
        let dz2 = hinv(&gx2.iter().zip(&cmat).map(|(g, c)| -(g + c)).collect::<Vec<_>>());
        let cx2 = sf.c.dot(&x2) - sf.f.dot(&y2) + dot_blocks(&cmat, &dz2);

        // Solves the linearized system
        //   G*(ΔZ) + EᵀΔy − cΔτ = −rx,   EΔx − fΔτ = −ry,   ΔS − G(Δx) − CΔτ = −rs,
        //   Δκ + cᵀΔx − fᵀΔy + ⟨C,ΔZ⟩ = −rt,   τΔκ + κΔτ = dk,   ΔS + WΔZW = ds_target.
        let newton = |rx: &DVector<f64>,
                      ry: &DVector<f64>,
                      rs: &[DMatrix<f64>],
                      rt: f64,
                      ds_target: &[DMatrix<f64>],
                      dk: f64|
         -> Direction {
            let rhs: Blocks = ds_target.iter().zip(rs).map(|(d, r)| d + r).collect();
            let p1 = rx + sf.adjoint(&hinv(&rhs));
            let q1 = -ry;
            let (x1, y1) = kkt.solve(&p1, &q1);
            let gx1 = sf.apply(&x1);
            let dz1 = hinv(&rhs.iter().zip(&gx1).map(|(r, g)| r - g).collect::<Vec<_>>());
            let num = -rt - dk / tau - sf.c.dot(&x1) + sf.f.dot(&y1) - dot_blocks(&cmat, &dz1);
            let den = -kappa / tau + cx2;
            let dtau = num / den;
            let dx = x1 + &x2 * dtau;
            let dy = y1 + &y2 * dtau;
            let gdx = sf.apply(&dx);
            let ds: Blocks = gdx
                .iter()
                .zip(&cmat)
                .zip(rs)
                .map(|((g, c), r)| g + c * dtau - r)
                .collect();
            let dz: Blocks = dz1.iter().zip(&dz2).map(|(a, b)| a + b * dtau).collect();
            let dkappa = (dk - kappa * dtau) / tau;
            Direction {
                dx,
                dy,
                ds,
                dz,
                dtau,
                dkappa,
            }
        };

        let zero_blocks: Blocks = s.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect();
        let direction = |d_s: &[DMatrix<f64>], eta: f64, d_kappa: f64| -> Direction {
            let rx = &r_x * eta;
            let ry = &r_y * eta;
            let rs: Blocks = r_s.iter().map(|r| r * eta).collect();
            let rt = r_tau * eta;
            let mut d = newton(&rx, &ry, &rs, rt, d_s, d_kappa);
            // Iterative refinement against the unreduced equations; the
            // reduced system loses accuracy as the scaling degenerates.
            // Keeps the best round and gives up once the rounds diverge.
            let mut best: Option<(f64, Direction)> = None;
            for round in 0..=REFINEMENT_ROUNDS {
                let e1 = sf.adjoint(&d.dz) + sf.e.tr_mul(&d.dy) - &sf.c * d.dtau + &rx;
                let e2 = &sf.e * &d.dx - &sf.f * d.dtau + &ry;
                let gdx = sf.apply(&d.dx);
                let e3: Blocks = d
                    .ds
                    .iter()
                    .zip(&gdx)
                    .zip(&cmat)
                    .zip(&rs)
                    .map(|(((ds, g), c), r)| ds - g - c * d.dtau + r)
                    .collect();
                let e4 = d.dkappa + sf.c.dot(&d.dx) - sf.f.dot(&d.dy) + dot_blocks(&cmat, &d.dz) + rt;
                let err = e1.norm_squared() + e2.norm_squared() + norm_blocks(&e3).powi(2) + e4 * e4;
                if !err.is_finite() || best.as_ref().is_some_and(|(b, _)| err > 1e2 * b) {
                    break;
                }
                if best.as_ref().is_none_or(|(b, _)| err < *b) {
                    best = Some((err, d.clone()));
                }
                if round == REFINEMENT_ROUNDS {
                    break;
                }
                let corr = newton(&e1, &e2, &e3, e4, &zero_blocks, 0.0);
                d.dx += corr.dx;
                d.dy += corr.dy;
                for (a, b) in d.ds.iter_mut().zip(&corr.ds) {
                    *a += b;
                }
                for (a, b) in d.dz.iter_mut().zip(&corr.dz) {
                    *a += b;
                }
                d.dtau += corr.dtau;
                d.dkappa += corr.dkappa;
            }
            if let Some((_, b)) = best {
                d = b;
            }
            d
        };

        let scaled = |d: &Direction| -> (Blocks, Blocks) {
            let ds: Blocks = d
                .ds
                .iter()
                .zip(&scalings)
                .map(|(m, sc)| &sc.rinv * m * sc.rinv.transpose())
                .collect();
            let dz: Blocks = d
                .dz
                .iter()
                .zip(&scalings)
                .map(|(m, sc)| sc.r.transpose() * m * &sc.r)
                .collect();
            (ds, dz)
        };

        let step_to_boundary = |d: &Direction, ds_t: &[DMatrix<f64>], dz_t: &[DMatrix<f64>]| -> f64 {
            let mut alpha = f64::INFINITY;
            for ((a, b), sc) in ds_t.iter().zip(dz_t).zip(&scalings) {
                alpha = alpha.min(max_step(&sc.lambda, a)).min(max_step(&sc.lambda, b));
            }
            if d.dtau < 0.0 {
                alpha = alpha.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                alpha = alpha.min(-kappa / d.dkappa);
            }
            alpha
        };

        // Predictor.
        let d_aff: Blocks = scalings
            .iter()
            .map(|sc| {
                let lam2 = DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l));
                let xs = lambda_div(&sc.lambda, &lam2);
                &sc.r * xs * sc.r.transpose()
            })
            .collect();
        let aff = direction(&d_aff, 1.0, -tau * kappa);
        let (ds_a, dz_a) = scaled(&aff);
        let alpha_aff = step_to_boundary(&aff, &ds_a, &dz_a).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let d_comb: Blocks = scalings
            .iter()
            .zip(ds_a.iter().zip(&dz_a))
            .map(|(sc, (a, b))| {
                let mut r = DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l + sigma * mu));
                let ab = a * b;
                r -= (&ab + ab.transpose()) * 0.5;
                let xs = lambda_div(&sc.lambda, &r);
                &sc.r * xs * sc.r.transpose()
            })
            .collect();
        let d_kappa = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
        let comb = direction(&d_comb, 1.0 - sigma, d_kappa);
        let (ds_c, dz_c) = scaled(&comb);
        let alpha = (opts.step_fraction * step_to_boundary(&comb, &ds_c, &dz_c)).min(1.0);
        if !(alpha > 1e-12) || !alpha.is_finite() {
            return certified.unwrap_or(result);
        }

        x += &comb.dx * alpha;
        y += &comb.dy * alpha;
        for (sj, d) in s.iter_mut().zip(&comb.ds) {
            *sj += d * alpha;
            symmetrize(sj);
        }
        for (zj, d) in z.iter_mut().zip(&comb.dz) {
            *zj += d * alpha;
            symmetrize(zj);
        }
        tau += alpha * comb.dtau;
        kappa += alpha * comb.dkappa;
        if !(tau > 0.0) || !(kappa > 0.0) || !tau.is_finite() {
            return certified.unwrap_or(result);
        }
    }
    certified.unwrap_or(result)
}
