//! Bidirectional channels `A′B′ → AB`, the example channels, group
//! representations, bicovariance checks and teleportation simulation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::{is_ppt, BipartiteCut};
use crate::operator::{c64 as c, random, DenseOperator, PureState, SystemDims, C64};

pub const IN_A: &str = "A'";
pub const IN_B: &str = "B'";
pub const OUT_A: &str = "A";
pub const OUT_B: &str = "B";
/// Reference systems paired with the inputs in Choi operators.
pub const REF_A: &str = "LA";
pub const REF_B: &str = "LB";

pub const KRAUS_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-12;
pub const BICOVARIANCE_TOL: f64 = 1e-10;

/// A CPTP map from Alice's and Bob's inputs `A′ B′` to outputs `A B`,
/// stored as Kraus operators with row systems `[A, B]` and column systems
/// `[A′, B′]`.
#[derive(Debug, Clone)]
pub struct BidirectionalChannel {
    name: String,
    params: BTreeMap<String, f64>,
    kraus: Vec<DenseOperator>,
    in_dims: SystemDims,
    out_dims: SystemDims,
}

impl BidirectionalChannel {
    /// Builds a channel from Kraus matrices acting on `A′ ⊗ B′` (row-major
    /// Kronecker order). Checks shapes and `Σ K†K = I`.
    pub fn from_kraus(
        name: &str,
        params: BTreeMap<String, f64>,
        in_dims: (usize, usize),
        out_dims: (usize, usize),
        kraus: Vec<DMatrix<C64>>,
    ) -> Result<Self> {
        let in_sys = SystemDims::new([(IN_A, in_dims.0), (IN_B, in_dims.1)])?;
        let out_sys = SystemDims::new([(OUT_A, out_dims.0), (OUT_B, out_dims.1)])?;
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus list".into()));
        }
        let ops = kraus
            .into_iter()
            .map(|k| DenseOperator::new(k, out_sys.clone(), in_sys.clone()))
            .collect::<Result<Vec<_>>>()?;
        let n = in_sys.total();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for k in &ops {
            sum += k.matrix().adjoint() * k.matrix();
        }
        let dev = (sum - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > KRAUS_TOL {
            return Err(Error::InvalidParameter(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(BidirectionalChannel {
            name: name.to_string(),
            params,
            kraus: ops,
            in_dims: in_sys,
            out_dims: out_sys,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn kraus(&self) -> &[DenseOperator] {
        &self.kraus
    }

    pub fn in_dims(&self) -> &SystemDims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &SystemDims {
        &self.out_dims
    }

    /// `max |Σ K†K − I|` entrywise.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.in_dims.total();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for k in &self.kraus {
            sum += k.matrix().adjoint() * k.matrix();
        }
        (sum - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Applies the channel to the `A′ B′` subsystems of `rho`. Other
    /// subsystems pass through; the result is ordered `A, B, <others>`.
    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        rho.conjugate_subsystems(&self.kraus)
    }

    /// Unnormalized Choi operator `J` on `LA A B LB`, obtained by sending
    /// `A′ B′` halves of `|Υ⟩_{LA A′} ⊗ |Υ⟩_{B′ LB}` through the channel.
    pub fn choi(&self) -> Result<DenseOperator> {
        let da = self.in_dims.dim_of(IN_A)?;
        let db = self.in_dims.dim_of(IN_B)?;
        let ups_a = PureState::maximally_entangled(REF_A, IN_A, da)?;
        let ups_b = PureState::maximally_entangled(IN_B, REF_B, db)?;
        let input = DenseOperator::projector(&ups_a.tensor(&ups_b)?).scale_real((da * db) as f64);
        self.apply(&input)?.permute(&[REF_A, OUT_A, OUT_B, REF_B])
    }

    /// Choi operator normalized to unit trace.
    pub fn choi_state(&self) -> Result<DenseOperator> {
        let scale = self.in_dims.total() as f64;
        Ok(self.choi()?.scale_real(1.0 / scale))
    }

    /// `(Wa ⊗ Wb) ∘ N ∘ (Ua ⊗ Ub)` for local unitaries on inputs and outputs.
    pub fn with_local_unitaries(
        &self,
        pre: (&DMatrix<C64>, &DMatrix<C64>),
        post: (&DMatrix<C64>, &DMatrix<C64>),
    ) -> Result<BidirectionalChannel> {
        let u_in = pre.0.kronecker(pre.1);
        let u_out = post.0.kronecker(post.1);
        let kraus = self
            .kraus
            .iter()
            .map(|k| &u_out * k.matrix() * &u_in)
            .collect();
        let mut params = self.params.clone();
        params.insert("local_unitaries".into(), 1.0);
        BidirectionalChannel::from_kraus(
            &self.name,
            params,
            (self.in_dims.dims()[0], self.in_dims.dims()[1]),
            (self.out_dims.dims()[0], self.out_dims.dims()[1]),
            kraus,
        )
    }
}

pub(crate) fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

fn identity4() -> DMatrix<C64> {
    DMatrix::identity(4, 4)
}

/// Two-qubit swap `S = Σ |ij⟩⟨ji|`.
pub fn swap_matrix() -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, col| {
        let (i, j) = (col / 2, col % 2);
        if r == j * 2 + i {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn cnot_matrix() -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, col| {
        let (a, b) = (col / 2, col % 2);
        if r == a * 2 + (a ^ b) {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `U_p = √p I + i √(1−p) S`.
pub fn partial_swap_unitary(p: f64) -> Result<DMatrix<C64>> {
    check_probability("p", p)?;
    Ok(identity4() * c(p.sqrt(), 0.0) + swap_matrix() * c(0.0, (1.0 - p).sqrt()))
}

pub fn identity_channel() -> Result<BidirectionalChannel> {
    BidirectionalChannel::from_kraus("identity", BTreeMap::new(), (2, 2), (2, 2), vec![identity4()])
}

pub fn swap_channel() -> Result<BidirectionalChannel> {
    BidirectionalChannel::from_kraus("swap", BTreeMap::new(), (2, 2), (2, 2), vec![swap_matrix()])
}

pub fn partial_swap(p: f64) -> Result<BidirectionalChannel> {
    let u = partial_swap_unitary(p)?;
    BidirectionalChannel::from_kraus("partial-swap", params(&[("p", p)]), (2, 2), (2, 2), vec![u])
}

/// Partial swap followed by discarding Alice's output: Kraus `{⟨a|_A U_p}`,
/// with a one-dimensional `A` output.
pub fn partial_swap_traceout(p: f64) -> Result<BidirectionalChannel> {
    let u = partial_swap_unitary(p)?;
    let kraus = (0..2)
        .map(|a| DMatrix::from_fn(2, 4, |b, col| u[(a * 2 + b, col)]))
        .collect();
    BidirectionalChannel::from_kraus(
        "partial-swap-traceout",
        params(&[("p", p)]),
        (2, 2),
        (1, 2),
        kraus,
    )
}

/// `Z_φ = diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(1.0, 0.0),
        C64::from_polar(1.0, phi),
    ]))
}

/// Swap that suffers a collective phase rotation `Z_φ ⊗ Z_φ` with
/// probability `1 − p`.
pub fn collective_dephasing_swap(p: f64, phi: f64) -> Result<BidirectionalChannel> {
    check_probability("p", p)?;
    let z = phase_gate(phi);
    let zz = z.kronecker(&z);
    let s = swap_matrix();
    BidirectionalChannel::from_kraus(
        "collective-dephasing",
        params(&[("p", p), ("phi", phi)]),
        (2, 2),
        (2, 2),
        vec![&s * c(p.sqrt(), 0.0), zz * s * c((1.0 - p).sqrt(), 0.0)],
    )
}

pub fn cnot_channel() -> Result<BidirectionalChannel> {
    BidirectionalChannel::from_kraus("cnot", BTreeMap::new(), (2, 2), (2, 2), vec![cnot_matrix()])
}

/// Kraus operators `w·|k⟩⟨l|` for all `k, l`: with `w² = r/4` they
/// implement `ρ ↦ r·Tr(ρ)·I/4`.
fn replacement_kraus(weight: f64) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(16);
    for k in 0..4 {
        for l in 0..4 {
            let mut m = DMatrix::zeros(4, 4);
            m[(k, l)] = c(weight, 0.0);
            out.push(m);
        }
    }
    out
}

/// CNOT with probability `q`, otherwise the maximally mixed output.
pub fn noisy_cnot(q: f64) -> Result<BidirectionalChannel> {
    check_probability("q", q)?;
    let mut kraus = vec![cnot_matrix() * c(q.sqrt(), 0.0)];
    kraus.extend(replacement_kraus(((1.0 - q) / 4.0).sqrt()));
    BidirectionalChannel::from_kraus("noisy-cnot", params(&[("q", q)]), (2, 2), (2, 2), kraus)
}

/// Two-qubit depolarizing channel `ρ ↦ (1 − p)ρ + p·Tr(ρ)·I/4`; `p = 1` is
/// the constant channel to `I/4`.
pub fn depolarizing(p: f64) -> Result<BidirectionalChannel> {
    check_probability("p", p)?;
    let mut kraus = vec![identity4() * c((1.0 - p).sqrt(), 0.0)];
    kraus.extend(replacement_kraus((p / 4.0).sqrt()));
    BidirectionalChannel::from_kraus("depolarizing", params(&[("p", p)]), (2, 2), (2, 2), kraus)
}

/// A finite list of unitaries on one labeled system forming a unitary
/// one-design.
#[derive(Debug, Clone)]
pub struct GroupRepresentation {
    label: String,
    elements: Vec<DenseOperator>,
}

impl GroupRepresentation {
    pub fn new(label: &str, elements: Vec<DMatrix<C64>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("empty representation".into()));
        }
        let d = elements[0].nrows();
        let dims = SystemDims::single(label, d)?;
        let mut ops = Vec::with_capacity(elements.len());
        for u in elements {
            let op = DenseOperator::square(u, dims.clone())?;
            let dev = (op.matrix().adjoint() * op.matrix() - DMatrix::<C64>::identity(d, d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > UNITARY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "representation element is not unitary (deviation {dev:e})"
                )));
            }
            ops.push(op);
        }
        let rep = GroupRepresentation {
            label: label.to_string(),
            elements: ops,
        };
        let dev = rep.one_design_deviation();
        if dev > KRAUS_TOL {
            return Err(Error::InvalidParameter(format!(
                "representation is not a unitary one-design (deviation {dev:e})"
            )));
        }
        Ok(rep)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn elements(&self) -> &[DenseOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Largest entry of `(1/|G|) Σ U E_ij U† − δ_ij I/d` over matrix units.
    pub fn one_design_deviation(&self) -> f64 {
        let d = self.dim();
        let n = self.elements.len() as f64;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = DMatrix::<C64>::zeros(d, d);
                for u in &self.elements {
                    let u = u.matrix();
                    acc += u.column(i) * u.column(j).adjoint();
                }
                acc /= c(n, 0.0);
                if i == j {
                    acc -= DMatrix::<C64>::identity(d, d) * c(1.0 / d as f64, 0.0);
                }
                worst = acc.iter().map(|z| z.norm()).fold(worst, f64::max);
            }
        }
        worst
    }

    /// The same elements in a different order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let elements = order
            .iter()
            .map(|&i| {
                self.elements
                    .get(i)
                    .map(|e| e.matrix().clone())
                    .ok_or_else(|| Error::InvalidParameter(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        GroupRepresentation::new(&self.label, elements)
    }
}

/// Single-qubit Pauli operator `X^a Z^b`.
pub fn pauli(a: usize, b: usize) -> DMatrix<C64> {
    let x = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let xa = if a % 2 == 1 { x } else { DMatrix::identity(2, 2) };
    let zb = if b % 2 == 1 { z } else { DMatrix::identity(2, 2) };
    xa * zb
}

/// `{X^a Z^b}` indexed by `2a + b`.
pub fn pauli_representation(label: &str) -> Result<GroupRepresentation> {
    GroupRepresentation::new(label, (0..4).map(|g| pauli(g / 2, g % 2)).collect())
}

/// Output representations `(W, T)` for the CNOT channel with Pauli inputs
/// `g = X^a Z^b` on `A′` and `h = X^c Z^e` on `B′`, indexed by `4g + h`:
/// conjugating by CNOT gives `W = X^a Z^{b⊕e}` and `T = X^{a⊕c} Z^e`.
pub fn cnot_output_representations() -> Result<(GroupRepresentation, GroupRepresentation)> {
    let mut w = Vec::with_capacity(16);
    let mut t = Vec::with_capacity(16);
    for g in 0..4 {
        for h in 0..4 {
            let (a, b) = (g / 2, g % 2);
            let (cc, e) = (h / 2, h % 2);
            w.push(pauli(a, b ^ e));
            t.push(pauli(a ^ cc, e));
        }
    }
    Ok((
        GroupRepresentation::new(OUT_A, w)?,
        GroupRepresentation::new(OUT_B, t)?,
    ))
}

fn check_rep(rep: &GroupRepresentation, label: &str, dim: usize, count: Option<usize>) -> Result<()> {
    if rep.label() != label || rep.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "representation on {}={} does not match channel system {label}={dim}",
            rep.label(),
            rep.dim()
        )));
    }
    if let Some(n) = count {
        if rep.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "output representation on {label} has {} elements, expected {n}",
                rep.len()
            )));
        }
    }
    Ok(())
}

/// Input and output representations for a bicovariance claim. `w` and `t`
/// are indexed by `g·|H| + h`.
#[derive(Debug, Clone)]
pub struct Bicovariance<'a> {
    pub g: &'a GroupRepresentation,
    pub h: &'a GroupRepresentation,
    pub w: &'a GroupRepresentation,
    pub t: &'a GroupRepresentation,
}

impl Bicovariance<'_> {
    fn validate(&self, ch: &BidirectionalChannel) -> Result<()> {
        let pairs = self.g.len() * self.h.len();
        check_rep(self.g, IN_A, ch.in_dims.dim_of(IN_A)?, None)?;
        check_rep(self.h, IN_B, ch.in_dims.dim_of(IN_B)?, None)?;
        check_rep(self.w, OUT_A, ch.out_dims.dim_of(OUT_A)?, Some(pairs))?;
        check_rep(self.t, OUT_B, ch.out_dims.dim_of(OUT_B)?, Some(pairs))?;
        Ok(())
    }
}

/// `max_{g,h,ij} ‖N((U_g⊗V_h) E_ij (U_g⊗V_h)†) − (W⊗T) N(E_ij) (W⊗T)†‖₁`
/// over the matrix units `E_ij` of `A′B′`.
pub fn check_bicovariance(ch: &BidirectionalChannel, reps: &Bicovariance<'_>) -> Result<f64> {
    reps.validate(ch)?;
    let n = ch.in_dims.total();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut m = DMatrix::<C64>::zeros(n, n);
            m[(i, j)] = c(1.0, 0.0);
            let unit = DenseOperator::square(m, ch.in_dims.clone())?;
            let direct = ch.apply(&unit)?;
            for (gi, ug) in reps.g.elements().iter().enumerate() {
                for (hi, vh) in reps.h.elements().iter().enumerate() {
                    let k = gi * reps.h.len() + hi;
                    let uv = ug.tensor(vh)?;
                    let lhs = ch.apply(&unit.conjugate_local(&uv)?)?;
                    let wt = reps.w.elements()[k].tensor(&reps.t.elements()[k])?;
                    let rhs = direct.conjugate_local(&wt)?;
                    worst = worst.max(lhs.sub(&rhs)?.trace_norm()?);
                }
            }
        }
    }
    Ok(worst)
}

/// `(U† ⊗ I)|Φ⟩` on `(input, reference)`, as a bra.
fn twisted_bell_bra(u: &DenseOperator, input: &str, reference: &str) -> Result<DenseOperator> {
    let d = u.nrows();
    let w = 1.0 / (d as f64).sqrt();
    let m = u.matrix();
    let amps = nalgebra::DVector::from_fn(d * d, |idx, _| {
        let (i, j) = (idx / d, idx % d);
        m[(j, i)].conj() * w
    });
    let state = PureState::new(amps, SystemDims::new([(input, d), (reference, d)])?)?;
    Ok(DenseOperator::bra(&state))
}

/// Runs the generalized teleportation protocol: Bell-type measurements on
/// `A′ LA` and `B′ LB` against the normalized Choi state, followed by the
/// `(W ⊗ T)†` correction. Refuses channels that are not bicovariant under
/// `reps`. Subsystems of `rho` other than `A′ B′` pass through and follow
/// `A B` in the output, as in [`BidirectionalChannel::apply`].
pub fn teleportation_simulate(
    ch: &BidirectionalChannel,
    reps: &Bicovariance<'_>,
    rho: &DenseOperator,
) -> Result<DenseOperator> {
    let dev = check_bicovariance(ch, reps)?;
    if dev > BICOVARIANCE_TOL {
        return Err(Error::NotBicovariant(dev));
    }
    let resource = ch.choi_state()?;
    let joint = rho.tensor(&resource)?;
    let da = reps.g.dim() as f64;
    let db = reps.h.dim() as f64;
    let weight = (da * da / reps.g.len() as f64) * (db * db / reps.h.len() as f64);
    let mut order: Vec<String> = vec![OUT_A.into(), OUT_B.into()];
    order.extend(
        rho.dims()
            .labels()
            .iter()
            .filter(|l| *l != IN_A && *l != IN_B)
            .cloned(),
    );
    let mut acc: Option<DenseOperator> = None;
    for (gi, ug) in reps.g.elements().iter().enumerate() {
        let bra_a = twisted_bell_bra(ug, IN_A, REF_A)?;
        for (hi, vh) in reps.h.elements().iter().enumerate() {
            let bra_b = twisted_bell_bra(vh, IN_B, REF_B)?;
            let meas = bra_a.tensor(&bra_b)?.scale_real(weight.sqrt());
            let post = joint.conjugate_subsystems(std::slice::from_ref(&meas))?.permute(&order)?;
            let k = gi * reps.h.len() + hi;
            let wt = reps.w.elements()[k].tensor(&reps.t.elements()[k])?.adjoint();
            let corrected = post.conjugate_local(&wt)?;
            acc = Some(match acc {
                None => corrected,
                Some(a) => a.add(&corrected)?,
            });
        }
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty representation".into()))
}

/// Trace distances between [`teleportation_simulate`] and direct action
/// on `trials` seeded random states of `A′ B′`.
pub fn teleportation_trials(
    ch: &BidirectionalChannel,
    reps: &Bicovariance<'_>,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let rho = random::random_density(ch.in_dims().clone(), &mut rng)?;
            teleportation_simulate(ch, reps, &rho)?.trace_distance(&ch.apply(&rho)?)
        })
        .collect()
}

/// Whether the normalized Choi state is PPT across `LA A : B LB`.
pub fn is_ppt_preserving(ch: &BidirectionalChannel) -> Result<bool> {
    let cut = BipartiteCut::new(&[REF_A, OUT_A], &[OUT_B, REF_B])?;
    Ok(is_ppt(&ch.choi_state()?, &cut)?.is_ppt)
}
