use nalgebra::DVector;

use super::dense::{c64, C64};
use super::dims::SystemDims;
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;

/// A normalized state vector on labeled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
    dims: SystemDims,
}

impl PureState {
    pub fn new(amps: DVector<C64>, dims: SystemDims) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for [{}]",
                amps.len(),
                dims
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state vector has norm {norm}"
            )));
        }
        Ok(PureState { amps, dims })
    }

    /// Normalizes `amps` before construction.
    pub fn normalized(amps: DVector<C64>, dims: SystemDims) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize zero vector".into()));
        }
        PureState::new(amps.map(|z| z / norm), dims)
    }

    pub fn basis(dims: SystemDims, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut amps = DVector::zeros(n);
        amps[index] = c64(1.0, 0.0);
        Ok(PureState { amps, dims })
    }

    /// `Σ_i |i⟩|i⟩ / √d` on two `d`-dimensional systems.
    pub fn maximally_entangled(a: &str, b: &str, d: usize) -> Result<Self> {
        let dims = SystemDims::new([(a, d), (b, d)])?;
        let mut amps = DVector::zeros(d * d);
        let w = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            amps[i * d + i] = c64(w, 0.0);
        }
        Ok(PureState { amps, dims })
    }

    /// Two-qubit Bell state `(|00⟩ + s|11⟩)/√2` for `s = ±1`.
    pub fn phi(a: &str, b: &str, sign: f64) -> Result<Self> {
        let dims = SystemDims::new([(a, 2), (b, 2)])?;
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let amps = DVector::from_vec(vec![c64(w, 0.0), C64::default(), C64::default(), c64(sign * w, 0.0)]);
        PureState::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let dims = self.dims.concat(&other.dims)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(PureState { amps, dims })
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "[{}] vs [{}]",
                self.dims, other.dims
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        let dims = SystemDims::single("A", 2).unwrap();
        let v = DVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
        assert!(PureState::new(v.clone(), dims.clone()).is_err());
        let s = PureState::normalized(v, dims).unwrap();
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_states_are_orthogonal() {
        let p = PureState::phi("A", "B", 1.0).unwrap();
        let m = PureState::phi("A", "B", -1.0).unwrap();
        assert!(p.inner(&m).unwrap().norm() < 1e-15);
        let me = PureState::maximally_entangled("A", "B", 2).unwrap();
        assert!((p.inner(&me).unwrap().re - 1.0).abs() < 1e-15);
    }
}
