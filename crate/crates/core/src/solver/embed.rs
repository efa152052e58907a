use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{C64, HERMITIAN_TOL};

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian
/// matrix. Each eigenvalue of `H` appears twice in the result, so the
/// embedding is PSD exactly when `H` is.
pub fn hermitian_embed(h: &DMatrix<C64>) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: h.ncols(),
        });
    }
    let scale = 1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut dev = 0.0_f64;
    for c in 0..n {
        for r in 0..=c {
            dev = dev.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..n {
        for r in 0..n {
            // Average with the mirrored entry so the output is exactly symmetric.
            let z = (h[(r, c)] + h[(c, r)].conj()) * 0.5;
            out[(r, c)] = z.re;
            out[(n + r, n + c)] = z.re;
            out[(n + r, c)] = z.im;
            out[(r, n + c)] = -z.im;
        }
    }
    Ok(out)
}

/// Recovers `H` from its real embedding (reads the left block column).
pub fn hermitian_unembed(m: &DMatrix<f64>) -> DMatrix<C64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |r, c| C64::new(m[(r, c)], m[(n + r, c)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_embeds_to_identity() {
        let e = hermitian_embed(&DMatrix::<C64>::identity(2, 2)).unwrap();
        assert_eq!(e, DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn pauli_y_eigenvalues_doubled() {
        let y = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        );
        let e = hermitian_embed(&y).unwrap();
        assert_eq!(e, e.transpose());
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(matches!(hermitian_embed(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn unembed_inverts() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.5, -0.25), C64::new(0.5, 0.25), C64::new(-2.0, 0.0)],
        );
        assert_eq!(hermitian_unembed(&hermitian_embed(&h).unwrap()), h);
    }
}
