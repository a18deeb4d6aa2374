use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::qsim::{AdiabaticHamiltonian, Axis, Channel, Operator, QuantumState};

/// Driver that is active only at intermediate times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntermediateKind {
    /// `Σ_{i<j} σ^x_i σ^x_j`, unit weight per unordered pair.
    Xx,
    /// `Σ_j σ^y_j`
    Y,
    /// `Σ_{i<j} (σ^x_i σ^z_j + σ^z_i σ^x_j)`
    Xz,
}

impl std::str::FromStr for IntermediateKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xx" => Ok(Self::Xx),
            "y" => Ok(Self::Y),
            "xz" => Ok(Self::Xz),
            other => Err(ProblemError::Size(format!(
                "unknown intermediate kind '{other}'"
            ))),
        }
    }
}

fn sum_terms(n: usize, terms: &[Vec<(usize, Axis)>]) -> Operator {
    terms.iter().fold(Operator::zero(n), |acc, factors| {
        acc.plus(&Operator::pauli_term(n, factors).expect("valid distinct qubits"))
            .expect("same qubit count")
    })
}

pub fn intermediate_hamiltonian(
    kind: IntermediateKind,
    n: usize,
) -> Result<Operator, ProblemError> {
    let two_local = matches!(kind, IntermediateKind::Xx | IntermediateKind::Xz);
    if n == 0 || (two_local && n < 2) {
        return Err(ProblemError::Size(format!(
            "{kind:?} driver needs more than {n} qubits"
        )));
    }
    let mut terms = Vec::new();
    match kind {
        IntermediateKind::Y => terms.extend((0..n).map(|j| vec![(j, Axis::Y)])),
        IntermediateKind::Xx | IntermediateKind::Xz => {
            for i in 0..n {
                for j in i + 1..n {
                    if kind == IntermediateKind::Xx {
                        terms.push(vec![(i, Axis::X), (j, Axis::X)]);
                    } else {
                        terms.push(vec![(i, Axis::X), (j, Axis::Z)]);
                        terms.push(vec![(i, Axis::Z), (j, Axis::X)]);
                    }
                }
            }
        }
    }
    Ok(sum_terms(n, &terms))
}

/// Transverse field `−Σ_j σ^x_j`, whose ground state is `|+⟩^⊗n`.
pub fn initial_hamiltonian(n: usize) -> Result<Operator, ProblemError> {
    if n == 0 {
        return Err(ProblemError::Size("initial Hamiltonian needs n ≥ 1".into()));
    }
    let terms: Vec<_> = (0..n).map(|j| vec![(j, Axis::X)]).collect();
    Ok(sum_terms(n, &terms).scaled(-1.0))
}

/// `[I − |+⟩⟨+|, I − |m⟩⟨m|]` with channels `x_1 = y_0`, `x_2 = y_1`.
pub fn grover_problem(n: usize, m: usize) -> Result<AdiabaticHamiltonian, ProblemError> {
    let marked = QuantumState::basis(n, m)?;
    let primitives = vec![
        Operator::projector_complement(&QuantumState::uniform(n)),
        Operator::projector_complement(&marked),
    ];
    Ok(AdiabaticHamiltonian::new(
        primitives,
        vec![Channel::Control(0), Channel::Control(1)],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{eigenvalues, instantaneous_spectrum};
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;

    #[test]
    fn y_driver_on_one_qubit_is_pauli_y() {
        let m = intermediate_hamiltonian(IntermediateKind::Y, 1)
            .unwrap()
            .matrix();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!((m - expected).norm() < 1e-15);
    }

    #[test]
    fn xx_driver_on_two_qubits_is_unit_pair() {
        let m = intermediate_hamiltonian(IntermediateKind::Xx, 2)
            .unwrap()
            .matrix();
        let pair = Operator::pauli_term(2, &[(0, Axis::X), (1, Axis::X)])
            .unwrap()
            .matrix();
        assert!((&m - pair).norm() < 1e-15);
        assert_eq!(m.trace().norm(), 0.0);
    }

    #[test]
    fn drivers_are_hermitian_and_sized() {
        for n in 2..=4 {
            for kind in [
                IntermediateKind::Xx,
                IntermediateKind::Y,
                IntermediateKind::Xz,
            ] {
                let op = intermediate_hamiltonian(kind, n).unwrap();
                assert!(op.hermiticity_residual() < 1e-12);
                assert_eq!(op.dim(), 1 << n);
            }
        }
        assert!(intermediate_hamiltonian(IntermediateKind::Xx, 1).is_err());
        assert!(intermediate_hamiltonian(IntermediateKind::Xz, 1).is_err());
        assert!(intermediate_hamiltonian(IntermediateKind::Y, 0).is_err());
        assert_eq!(
            "XZ".parse::<IntermediateKind>().unwrap(),
            IntermediateKind::Xz
        );
    }

    #[test]
    fn xz_driver_is_real_symmetric() {
        let m = intermediate_hamiltonian(IntermediateKind::Xz, 2)
            .unwrap()
            .matrix();
        assert!(m.iter().all(|c| c.im == 0.0));
        assert!((&m - m.transpose()).norm() < 1e-15);
    }

    #[test]
    fn transverse_field_ground_state() {
        let h1 = initial_hamiltonian(1).unwrap();
        let sp = instantaneous_spectrum(&h1, 2);
        assert!((sp.values[0] + 1.0).abs() < 1e-12);
        let overlap = sp.vectors[0]
            .inner(&QuantumState::uniform(1))
            .unwrap()
            .norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        let h3 = initial_hamiltonian(3).unwrap();
        let e = eigenvalues(&h3);
        assert!((e[0] + 3.0).abs() < 1e-12);
        assert!(e[1] - e[0] > 1.0);
        let plus = QuantumState::uniform(3);
        let expectation = plus
            .inner(&QuantumState::from_raw(3, h3.apply(&plus)))
            .unwrap();
        assert!((expectation.re + 3.0).abs() < 1e-12);
    }

    #[test]
    fn grover_marked_state_is_a_zero_mode() {
        for n in 1..=4 {
            for m in 0..1 << n {
                let h = grover_problem(n, m).unwrap();
                let marked = QuantumState::basis(n, m).unwrap();
                let image = h.primitives()[1].apply(&marked);
                assert!(image.iter().all(|a| a.norm() < 1e-15));
            }
        }
        assert!(grover_problem(2, 4).is_err());
    }

    #[test]
    fn grover_single_qubit_start() {
        let h = grover_problem(1, 1).unwrap();
        let e = eigenvalues(&h.primitives()[0]);
        assert!(e[0].abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }
}
