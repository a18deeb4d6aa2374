use num_complex::Complex64 as C64;

const MAX_DIM: usize = 30;
const TOL: f64 = 1e-14;

/// Applies `exp(−iτH)` to a vector with a Lanczos projection.
///
/// `H` is only touched through `apply(v, out)` (`out = H v`). The Krylov space
/// grows until the standard a-posteriori estimate `β_m |e_mᵀ exp(−iτT_m) e_1|`
/// drops below a fixed tolerance; if that does not happen within
/// [`MAX_DIM`] vectors, the interval is split in half.
pub(crate) struct Lanczos {
    basis: Vec<Vec<C64>>,
    w: Vec<C64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Lanczos {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            basis: (0..=MAX_DIM)
                .map(|_| vec![C64::new(0.0, 0.0); dim])
                .collect(),
            w: vec![C64::new(0.0, 0.0); dim],
            alpha: Vec::with_capacity(MAX_DIM),
            beta: Vec::with_capacity(MAX_DIM),
        }
    }

    pub(crate) fn expm_apply<F>(&mut self, apply: &mut F, tau: f64, psi: &mut [C64])
    where
        F: FnMut(&[C64], &mut [C64]),
    {
        if !self.try_apply(apply, tau, psi) {
            self.expm_apply(apply, 0.5 * tau, psi);
            self.expm_apply(apply, 0.5 * tau, psi);
        }
    }

    fn try_apply<F>(&mut self, apply: &mut F, tau: f64, psi: &mut [C64]) -> bool
    where
        F: FnMut(&[C64], &mut [C64]),
    {
        let norm0 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 || tau == 0.0 {
            return true;
        }
        for (b, &a) in self.basis[0].iter_mut().zip(psi.iter()) {
            *b = a / norm0;
        }
        self.alpha.clear();
        self.beta.clear();
        let mut leading = 1.0;
        for j in 0..MAX_DIM {
            apply(&self.basis[j], &mut self.w);
            if j > 0 {
                let prev_beta = self.beta[j - 1];
                for (w, v) in self.w.iter_mut().zip(&self.basis[j - 1]) {
                    *w -= v * prev_beta;
                }
            }
            let a: f64 = self.basis[j]
                .iter()
                .zip(&self.w)
                .map(|(v, w)| (v.conj() * w).re)
                .sum();
            self.alpha.push(a);
            for (w, v) in self.w.iter_mut().zip(&self.basis[j]) {
                *w -= v * a;
            }
            let b = self.w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let m = j + 1;
            let exhausted = b <= 1e-12 * a.abs().max(1.0);
            // Leading Taylor term of β_m |e_mᵀ exp(−iτT) e_1|: a cheap predictor
            // that gates the exact (eigendecomposition) check.
            if exhausted || b * leading < TOL || m == MAX_DIM {
                let coeffs = small_expm(&self.alpha, &self.beta, tau);
                if exhausted || b * coeffs[m - 1].norm() < TOL {
                    self.combine(&coeffs, norm0, psi);
                    return true;
                }
            }
            self.beta.push(b);
            leading *= tau * b / m as f64;
            let next = &mut self.basis[j + 1];
            for (v, w) in next.iter_mut().zip(&self.w) {
                *v = w / b;
            }
        }
        false
    }

    fn combine(&self, coeffs: &[C64], norm0: f64, psi: &mut [C64]) {
        psi.iter_mut().for_each(|p| *p = C64::new(0.0, 0.0));
        for (c, v) in coeffs.iter().zip(&self.basis) {
            let c = c * norm0;
            for (p, x) in psi.iter_mut().zip(v) {
                *p += c * x;
            }
        }
    }
}

/// `exp(−iτT) e_1` for the real symmetric tridiagonal `T` given by its
/// diagonal `alpha` and off-diagonal `beta`, by Taylor series on sub-intervals
/// short enough that `τ‖T‖` stays below one.
fn small_expm(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C64> {
    let m = alpha.len();
    let bound = (0..m)
        .map(|r| {
            alpha[r].abs()
                + if r > 0 { beta[r - 1].abs() } else { 0.0 }
                + if r + 1 < m { beta[r].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let pieces = (tau.abs() * bound).ceil().max(1.0) as usize;
    let h = tau / pieces as f64;
    let mut y = vec![C64::new(0.0, 0.0); m];
    y[0] = C64::new(1.0, 0.0);
    let mut term = vec![C64::new(0.0, 0.0); m];
    let mut next = vec![C64::new(0.0, 0.0); m];
    for _ in 0..pieces {
        term.copy_from_slice(&y);
        for k in 1..60 {
            // next = (−i h / k) T term
            let scale = C64::new(0.0, -h / k as f64);
            for r in 0..m {
                let mut acc = term[r] * alpha[r];
                if r > 0 {
                    acc += term[r - 1] * beta[r - 1];
                }
                if r + 1 < m {
                    acc += term[r + 1] * beta[r];
                }
                next[r] = acc * scale;
            }
            std::mem::swap(&mut term, &mut next);
            let size = term.iter().map(|t| t.norm_sqr()).sum::<f64>();
            y.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
            if size < 1e-36 {
                break;
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Axis, Operator};
    use nalgebra::{DVector, SymmetricEigen};

    fn dense_expm(op: &Operator, tau: f64, psi: &[C64]) -> Vec<C64> {
        let eig = SymmetricEigen::new(op.matrix());
        let v = &eig.eigenvectors;
        let mut p = v.adjoint() * DVector::from_column_slice(psi);
        for (x, &l) in p.iter_mut().zip(eig.eigenvalues.iter()) {
            *x *= C64::from_polar(1.0, -tau * l);
        }
        (v * p).as_slice().to_vec()
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 4;
        let mut op = Operator::zero(n);
        for q in 0..n {
            op = op
                .plus(
                    &Operator::pauli_term(n, &[(q, Axis::X)])
                        .unwrap()
                        .scaled(0.7),
                )
                .unwrap();
            op = op
                .plus(
                    &Operator::pauli_term(n, &[(q, Axis::Z), ((q + 1) % n, Axis::Z)])
                        .unwrap()
                        .scaled(1.3),
                )
                .unwrap();
        }
        op = op
            .plus(&Operator::pauli_term(n, &[(1, Axis::Y)]).unwrap())
            .unwrap();
        let psi0: Vec<C64> = (0..1 << n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let norm = psi0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi0: Vec<C64> = psi0.iter().map(|a| a / norm).collect();
        let mut lz = Lanczos::new(1 << n);
        for tau in [0.01, 0.3, 2.0, 25.0] {
            let mut psi = psi0.clone();
            lz.expm_apply(
                &mut |v: &[C64], out: &mut [C64]| {
                    out.fill(C64::new(0.0, 0.0));
                    op.apply_add(1.0, v, out)
                },
                tau,
                &mut psi,
            );
            let want = dense_expm(&op, tau, &psi0);
            let err = psi
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-11, "tau {tau}: error {err:e}");
        }
    }

    #[test]
    fn invariant_subspace_terminates_early() {
        // |+⟩ is an eigenvector of Σσx: the Krylov space is one-dimensional
        let n = 3;
        let mut op = Operator::zero(n);
        for q in 0..n {
            op = op
                .plus(&Operator::pauli_term(n, &[(q, Axis::X)]).unwrap())
                .unwrap();
        }
        let a = 1.0 / (8f64).sqrt();
        let mut psi = vec![C64::new(a, 0.0); 8];
        let mut lz = Lanczos::new(8);
        lz.expm_apply(
            &mut |v: &[C64], out: &mut [C64]| {
                out.fill(C64::new(0.0, 0.0));
                op.apply_add(1.0, v, out)
            },
            0.5,
            &mut psi,
        );
        let phase = C64::from_polar(a, -1.5);
        assert!(psi.iter().all(|p| (p - phase).norm() < 1e-14));
    }
}
