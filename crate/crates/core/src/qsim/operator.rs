use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{QuantumState, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis acting on a basis index `b` as
/// `P|b⟩ = phase · (−1)^{|b ∧ sign_mask|} |b ⊕ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PauliString {
    flip: usize,
    sign_mask: usize,
    phase: C64,
}

#[derive(Debug, Clone)]
enum Action {
    Pauli(PauliString),
    Diagonal(Arc<[f64]>),
    /// `I − |v⟩⟨v|`
    ProjectorComplement(Arc<[C64]>),
    /// Row-major `dim × dim`.
    Dense(Arc<[C64]>),
}

#[derive(Debug, Clone)]
struct Term {
    coeff: f64,
    action: Action,
}

/// Hermitian operator on `n` qubits.
///
/// Stored as a real-weighted sum of structured terms (Pauli strings, diagonals,
/// projector complements, dense blocks) so that `H|ψ⟩` costs `O(2^n)` per
/// structured term; [`Operator::matrix`] materializes the dense form.
#[derive(Debug, Clone)]
pub struct Operator {
    n: usize,
    terms: Vec<Term>,
}

impl Operator {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::single(
            n,
            Action::Pauli(PauliString {
                flip: 0,
                sign_mask: 0,
                phase: C64::new(1.0, 0.0),
            }),
        )
    }

    /// Tensor product of the listed Paulis with identity elsewhere.
    pub fn pauli_term(n: usize, factors: &[(usize, Axis)]) -> Result<Self, SimError> {
        let mut flip = 0usize;
        let mut sign_mask = 0usize;
        let mut seen = 0usize;
        let mut ys = 0u32;
        for &(q, axis) in factors {
            if q >= n {
                return Err(SimError::QubitOutOfRange { qubit: q, n });
            }
            let bit = 1usize << (n - 1 - q);
            if seen & bit != 0 {
                return Err(SimError::DuplicateQubit { qubit: q });
            }
            seen |= bit;
            match axis {
                Axis::X => flip |= bit,
                Axis::Z => sign_mask |= bit,
                Axis::Y => {
                    flip |= bit;
                    sign_mask |= bit;
                    ys += 1;
                }
            }
        }
        let phase = match ys % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        Ok(Self::single(
            n,
            Action::Pauli(PauliString {
                flip,
                sign_mask,
                phase,
            }),
        ))
    }

    pub fn diagonal(n: usize, entries: Vec<f64>) -> Result<Self, SimError> {
        if entries.len() != 1 << n {
            return Err(SimError::DimensionMismatch {
                expected: 1 << n,
                got: entries.len(),
            });
        }
        Ok(Self::single(n, Action::Diagonal(entries.into())))
    }

    /// `I − |v⟩⟨v|`.
    pub fn projector_complement(v: &QuantumState) -> Self {
        Self::single(
            v.qubits(),
            Action::ProjectorComplement(v.amplitudes().to_vec().into()),
        )
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self, SimError> {
        let dim = m.nrows();
        if dim == 0 || !dim.is_power_of_two() || m.ncols() != dim {
            return Err(SimError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                got: m.ncols(),
            });
        }
        let residual = hermiticity_residual(m);
        if residual >= 1e-12 {
            return Err(SimError::NotHermitian { residual });
        }
        let n = dim.trailing_zeros() as usize;
        let data: Vec<C64> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .collect();
        Ok(Self::single(n, Action::Dense(data.into())))
    }

    fn single(n: usize, action: Action) -> Self {
        Self {
            n,
            terms: vec![Term { coeff: 1.0, action }],
        }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coeff *= c);
        self.terms.retain(|t| t.coeff != 0.0);
        self
    }

    pub fn plus(mut self, other: &Operator) -> Result<Self, SimError> {
        if other.n != self.n {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        self.terms.extend(other.terms.iter().cloned());
        Ok(self)
    }

    /// `Σ_k c_k A_k`; zero weights are dropped.
    pub fn linear_combination<'a>(
        n: usize,
        parts: impl IntoIterator<Item = (f64, &'a Operator)>,
    ) -> Result<Self, SimError> {
        let mut out = Self::zero(n);
        for (c, op) in parts {
            if c != 0.0 {
                out = out.plus(&op.clone().scaled(c))?;
            }
        }
        Ok(out)
    }

    /// `out += scale · A ψ`.
    pub fn apply_add(&self, scale: f64, psi: &[C64], out: &mut [C64]) {
        for term in &self.terms {
            let c = scale * term.coeff;
            match &term.action {
                Action::Pauli(p) => {
                    let cp = p.phase * c;
                    if p.sign_mask == 0 && cp.im == 0.0 {
                        for (b, &a) in psi.iter().enumerate() {
                            out[b ^ p.flip] += a * cp.re;
                        }
                    } else if p.flip == 0 && cp.im == 0.0 {
                        for (b, (o, &a)) in out.iter_mut().zip(psi).enumerate() {
                            let v = a * cp.re;
                            if (b & p.sign_mask).count_ones() & 1 == 1 {
                                *o -= v;
                            } else {
                                *o += v;
                            }
                        }
                    } else {
                        for (b, &a) in psi.iter().enumerate() {
                            let v = cp * a;
                            if (b & p.sign_mask).count_ones() & 1 == 1 {
                                out[b ^ p.flip] -= v;
                            } else {
                                out[b ^ p.flip] += v;
                            }
                        }
                    }
                }
                Action::Diagonal(d) => {
                    for ((o, &a), &e) in out.iter_mut().zip(psi).zip(d.iter()) {
                        *o += a * (c * e);
                    }
                }
                Action::ProjectorComplement(v) => {
                    let proj: C64 = v.iter().zip(psi).map(|(x, a)| x.conj() * a).sum::<C64>() * c;
                    for ((o, &a), &x) in out.iter_mut().zip(psi).zip(v.iter()) {
                        *o += a * c - x * proj;
                    }
                }
                Action::Dense(m) => {
                    let dim = psi.len();
                    for (r, o) in out.iter_mut().enumerate() {
                        let row = &m[r * dim..(r + 1) * dim];
                        let acc: C64 = row.iter().zip(psi).map(|(x, a)| x * a).sum();
                        *o += acc * c;
                    }
                }
            }
        }
    }

    pub fn apply(&self, psi: &QuantumState) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.dim()];
        self.apply_add(1.0, psi.amplitudes(), &mut out);
        out
    }

    /// Dense matrix `⟨r|A|c⟩`.
    pub fn matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        self.add_to_matrix(1.0, &mut m);
        m
    }

    /// `m += scale · A`.
    pub fn add_to_matrix(&self, scale: f64, m: &mut DMatrix<C64>) {
        let dim = self.dim();
        for term in &self.terms {
            let c = scale * term.coeff;
            match &term.action {
                Action::Pauli(p) => {
                    for col in 0..dim {
                        let sign = if (col & p.sign_mask).count_ones() & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        m[(col ^ p.flip, col)] += p.phase * (c * sign);
                    }
                }
                Action::Diagonal(d) => {
                    for (i, &e) in d.iter().enumerate() {
                        m[(i, i)] += C64::new(c * e, 0.0);
                    }
                }
                Action::ProjectorComplement(v) => {
                    for r in 0..dim {
                        m[(r, r)] += C64::new(c, 0.0);
                        for col in 0..dim {
                            m[(r, col)] -= v[r] * v[col].conj() * c;
                        }
                    }
                }
                Action::Dense(d) => {
                    for r in 0..dim {
                        for col in 0..dim {
                            m[(r, col)] += d[r * dim + col] * c;
                        }
                    }
                }
            }
        }
    }

    /// Diagonal entries when the operator is diagonal in the computational basis.
    pub fn diagonal_entries(&self) -> Option<Vec<f64>> {
        let dim = self.dim();
        let mut d = vec![0.0; dim];
        for term in &self.terms {
            match &term.action {
                Action::Pauli(p) if p.flip == 0 => {
                    for (b, e) in d.iter_mut().enumerate() {
                        let sign = if (b & p.sign_mask).count_ones() & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        *e += term.coeff * sign * p.phase.re;
                    }
                }
                Action::Diagonal(v) => {
                    for (e, x) in d.iter_mut().zip(v.iter()) {
                        *e += term.coeff * x;
                    }
                }
                _ => {
                    // Structured terms may still be diagonal, e.g. I − |b⟩⟨b| for a basis state.
                    let m = self.matrix();
                    let off = (0..dim)
                        .flat_map(|r| (0..dim).map(move |c| (r, c)))
                        .filter(|(r, c)| r != c)
                        .map(|(r, c)| m[(r, c)].norm())
                        .fold(0.0, f64::max);
                    if off > 1e-14 {
                        return None;
                    }
                    return Some((0..dim).map(|i| m[(i, i)].re).collect());
                }
            }
        }
        Some(d)
    }

    /// Upper bound on the spectral norm from the triangle inequality.
    pub fn norm_bound(&self) -> f64 {
        let dim = self.dim();
        self.terms
            .iter()
            .map(|t| {
                t.coeff.abs()
                    * match &t.action {
                        Action::Pauli(_) | Action::ProjectorComplement(_) => 1.0,
                        Action::Diagonal(d) => d.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                        Action::Dense(m) => (0..dim)
                            .map(|r| m[r * dim..(r + 1) * dim].iter().map(|x| x.norm()).sum())
                            .fold(0.0f64, f64::max),
                    }
            })
            .sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix())
    }
}

pub(crate) fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}
