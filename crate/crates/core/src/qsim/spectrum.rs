use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{Operator, QuantumState};

/// Eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Lowest part of a Hermitian spectrum, ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<QuantumState>,
}

impl Spectrum {
    /// `E₁ − E₀`, or zero within [`DEGENERACY_TOL`].
    pub fn gap(&self) -> Option<f64> {
        match self.values.as_slice() {
            [e0, e1, ..] => {
                let g = e1 - e0;
                Some(if g < DEGENERACY_TOL { 0.0 } else { g })
            }
            _ => None,
        }
    }

    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.values[0];
        self.values
            .iter()
            .take_while(|&&e| e - e0 < DEGENERACY_TOL)
            .count()
    }
}

/// The `k` lowest eigenpairs of `op`.
pub fn instantaneous_spectrum(op: &Operator, k: usize) -> Spectrum {
    let m = op.matrix();
    let n = op.qubits();
    let k = k.min(m.nrows());
    if is_real(&m) {
        let eig = SymmetricEigen::new(m.map(|z| z.re));
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order
            .iter()
            .take(k)
            .map(|&i| {
                let col = eig.eigenvectors.column(i);
                QuantumState::from_raw(n, col.iter().map(|&x| C64::new(x, 0.0)).collect())
            })
            .collect();
        Spectrum { values, vectors }
    } else {
        let eig = SymmetricEigen::new(m);
        let order = ascending(eig.eigenvalues.as_slice());
        let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order
            .iter()
            .take(k)
            .map(|&i| {
                QuantumState::from_raw(n, eig.eigenvectors.column(i).iter().copied().collect())
            })
            .collect();
        Spectrum { values, vectors }
    }
}

/// All eigenvalues, ascending, without eigenvectors.
pub fn eigenvalues(op: &Operator) -> Vec<f64> {
    let m = op.matrix();
    let mut values: Vec<f64> = if is_real(&m) {
        m.map(|z| z.re)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    } else {
        SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}
