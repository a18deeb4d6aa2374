use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::qsim::Operator;

/// Restart budget for [`generate_usa_instance`].
pub const DEFAULT_RETRY_BUDGET: usize = 10_000;

/// A literal is `x_var` (`negated == false`) or `¬x_var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    /// `v^m_j`: `+1` for a plain literal, `−1` for a negated one.
    pub fn sign(&self) -> i8 {
        if self.negated {
            -1
        } else {
            1
        }
    }

    fn holds(&self, assignment: usize, n: usize) -> bool {
        value_of(assignment, self.var, n) != self.negated
    }
}

/// Two-literal disjunction, stored with `a.var < b.var`.
///
/// Serialized as `[j1, sign1, j2, sign2]` with 0-based variables and `±1` signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub a: Literal,
    pub b: Literal,
}

impl Clause {
    pub fn new(a: Literal, b: Literal) -> Result<Self, ProblemError> {
        if a.var == b.var {
            return Err(ProblemError::InvalidClause(format!(
                "both literals use variable {}",
                a.var
            )));
        }
        Ok(if a.var < b.var {
            Self { a, b }
        } else {
            Self { a: b, b: a }
        })
    }

    pub fn satisfied_by(&self, assignment: usize, n: usize) -> bool {
        self.a.holds(assignment, n) || self.b.holds(assignment, n)
    }
}

impl Serialize for Clause {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [
            self.a.var as i64,
            self.a.sign() as i64,
            self.b.var as i64,
            self.b.sign() as i64,
        ]
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Clause {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let [j1, s1, j2, s2] = <[i64; 4]>::deserialize(d)?;
        let lit = |j: i64, s: i64| -> Result<Literal, D::Error> {
            if j < 0 || !(s == 1 || s == -1) {
                return Err(D::Error::custom(format!("bad literal ({j}, {s})")));
            }
            Ok(Literal {
                var: j as usize,
                negated: s == -1,
            })
        };
        Clause::new(lit(j1, s1)?, lit(j2, s2)?).map_err(D::Error::custom)
    }
}

/// Boolean value of `x_var` encoded in a basis index: `true ↔ σ^z = +1 ↔ bit 0`.
pub fn value_of(assignment: usize, var: usize, n: usize) -> bool {
    (assignment >> (n - 1 - var)) & 1 == 0
}

/// A 2-SAT instance with its Ising couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n: usize,
    pub clauses: Vec<Clause>,
    /// `h_j = −Σ_m v^m_j`
    pub h: Vec<f64>,
    /// `J_ij = Σ_m v^m_i v^m_j` for `i ≠ j`, symmetric with zero diagonal.
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    pub usa: bool,
    pub ground_index: Option<usize>,
    pub seed: Option<u64>,
}

impl ProblemInstance {
    pub fn from_clauses(
        n: usize,
        clauses: Vec<Clause>,
        seed: Option<u64>,
    ) -> Result<Self, ProblemError> {
        if n == 0 || n > 20 {
            return Err(ProblemError::Size(format!(
                "2-SAT instances need 1 ≤ n ≤ 20, got {n}"
            )));
        }
        for c in &clauses {
            if c.b.var >= n {
                return Err(ProblemError::InvalidClause(format!(
                    "variable {} out of range for n = {n}",
                    c.b.var
                )));
            }
        }
        let (h, j) = couplings(n, &clauses);
        let satisfying: Vec<usize> = (0..1usize << n)
            .filter(|&z| clauses.iter().all(|c| c.satisfied_by(z, n)))
            .collect();
        let usa = satisfying.len() == 1;
        Ok(Self {
            n,
            clauses,
            h,
            j,
            usa,
            ground_index: usa.then(|| satisfying[0]),
            seed,
        })
    }

    /// Re-derives couplings and satisfiability and compares with the stored fields.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let fresh = Self::from_clauses(self.n, self.clauses.clone(), self.seed)?;
        if fresh.h != self.h || fresh.j != self.j {
            return Err(ProblemError::Inconsistent(
                "h/J do not match the clause list".into(),
            ));
        }
        if fresh.usa != self.usa || fresh.ground_index != self.ground_index {
            return Err(ProblemError::Inconsistent(
                "usa/ground_index do not match the clause list".into(),
            ));
        }
        Ok(())
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    /// `n / M_c`.
    pub fn variables_per_clause(&self) -> f64 {
        self.n as f64 / self.clauses.len() as f64
    }

    /// `M_c / n`.
    pub fn clauses_per_variable(&self) -> f64 {
        self.clauses.len() as f64 / self.n as f64
    }

    /// `E(z) = Σ h_j s_j + Σ_{i<j} J_ij s_i s_j` for every basis index.
    pub fn energies(&self) -> Vec<f64> {
        let n = self.n;
        (0..1usize << n)
            .map(|z| {
                let s = |q: usize| if value_of(z, q, n) { 1.0 } else { -1.0 };
                let mut e = 0.0;
                for i in 0..n {
                    e += self.h[i] * s(i);
                    for j in i + 1..n {
                        e += self.j[i][j] * s(i) * s(j);
                    }
                }
                e
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ProblemError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

fn couplings(n: usize, clauses: &[Clause]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut h = vec![0.0; n];
    let mut j = vec![vec![0.0; n]; n];
    for c in clauses {
        let (va, vb) = (c.a.sign() as f64, c.b.sign() as f64);
        h[c.a.var] -= va;
        h[c.b.var] -= vb;
        j[c.a.var][c.b.var] += va * vb;
        j[c.b.var][c.a.var] += va * vb;
    }
    (h, j)
}

/// `(H_P1, H_P2) = (Σ h_j σ^z_j, Σ_{i<j} J_ij σ^z_i σ^z_j)`, both diagonal.
pub fn compile_2sat(instance: &ProblemInstance) -> (Operator, Operator) {
    let n = instance.n;
    let spin = |z: usize, q: usize| if value_of(z, q, n) { 1.0 } else { -1.0 };
    let local = (0..1usize << n)
        .map(|z| (0..n).map(|q| instance.h[q] * spin(z, q)).sum())
        .collect();
    let pair = (0..1usize << n)
        .map(|z| {
            let mut e = 0.0;
            for a in 0..n {
                for b in a + 1..n {
                    e += instance.j[a][b] * spin(z, a) * spin(z, b);
                }
            }
            e
        })
        .collect();
    (
        Operator::diagonal(n, local).expect("length 2^n"),
        Operator::diagonal(n, pair).expect("length 2^n"),
    )
}

/// Rejection-samples a 2-SAT instance with exactly one satisfying assignment.
///
/// Random distinct clauses are added one at a time; the satisfying set is
/// tracked by brute force over all `2^n` assignments. The first instance left
/// with a single solution is returned, and an unsatisfiable overshoot restarts
/// from an empty clause list.
pub fn generate_usa_instance(
    n: usize,
    seed: u64,
    retry_budget: usize,
) -> Result<ProblemInstance, ProblemError> {
    if !(2..=20).contains(&n) {
        return Err(ProblemError::Size(format!(
            "USA generation needs 2 ≤ n ≤ 20, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in i + 1..n {
            for (ni, nj) in [(false, false), (false, true), (true, false), (true, true)] {
                pool.push(Clause {
                    a: Literal {
                        var: i,
                        negated: ni,
                    },
                    b: Literal {
                        var: j,
                        negated: nj,
                    },
                });
            }
        }
    }
    for _ in 0..retry_budget {
        pool.shuffle(&mut rng);
        let mut alive: Vec<usize> = (0..1usize << n).collect();
        let mut clauses = Vec::new();
        for clause in &pool {
            alive.retain(|&z| clause.satisfied_by(z, n));
            clauses.push(*clause);
            match alive.len() {
                0 => break,
                1 => {
                    // Clause order carries no meaning; keep a canonical sorted list.
                    clauses.sort();
                    return ProblemInstance::from_clauses(n, clauses, Some(seed));
                }
                _ => {}
            }
        }
    }
    Err(ProblemError::RetryBudget {
        n,
        seed,
        retry_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{instantaneous_spectrum, Axis};

    fn lit(var: usize, negated: bool) -> Literal {
        Literal { var, negated }
    }

    #[test]
    fn single_clause_couplings_and_energies() {
        let inst = ProblemInstance::from_clauses(
            2,
            vec![Clause::new(lit(0, false), lit(1, false)).unwrap()],
            None,
        )
        .unwrap();
        assert_eq!(inst.h, vec![-1.0, -1.0]);
        assert_eq!(inst.j[0][1], 1.0);
        assert_eq!(inst.j[1][0], 1.0);
        let mut e = inst.energies();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, vec![-1.0, -1.0, -1.0, 3.0]);
        // three satisfying assignments: not a USA instance
        assert!(!inst.usa);
        assert_eq!(inst.ground_index, None);
        let unsat = 0b11;
        assert_eq!(inst.energies()[unsat], 3.0);

        let neg = ProblemInstance::from_clauses(
            2,
            vec![Clause::new(lit(0, true), lit(1, false)).unwrap()],
            None,
        )
        .unwrap();
        assert_eq!(neg.h, vec![1.0, -1.0]);
        assert_eq!(neg.j[0][1], -1.0);
    }

    #[test]
    fn compiled_operators_match_pauli_assembly() {
        let inst = generate_usa_instance(5, 3, DEFAULT_RETRY_BUDGET).unwrap();
        let (p1, p2) = compile_2sat(&inst);
        let n = inst.n;
        let mut ref1 = Operator::zero(n);
        let mut ref2 = Operator::zero(n);
        for a in 0..n {
            ref1 = ref1
                .plus(
                    &Operator::pauli_term(n, &[(a, Axis::Z)])
                        .unwrap()
                        .scaled(inst.h[a]),
                )
                .unwrap();
            for b in a + 1..n {
                ref2 = ref2
                    .plus(
                        &Operator::pauli_term(n, &[(a, Axis::Z), (b, Axis::Z)])
                            .unwrap()
                            .scaled(inst.j[a][b]),
                    )
                    .unwrap();
            }
        }
        assert!((p1.matrix() - ref1.matrix()).norm() < 1e-12);
        assert!((p2.matrix() - ref2.matrix()).norm() < 1e-12);
        let m = p1.plus(&p2).unwrap().matrix();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if r != c {
                    assert!(m[(r, c)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn empty_instance_compiles_to_zero() {
        let inst = ProblemInstance::from_clauses(3, vec![], None).unwrap();
        let (p1, p2) = compile_2sat(&inst);
        assert_eq!(p1.matrix().norm(), 0.0);
        assert_eq!(p2.matrix().norm(), 0.0);
    }

    #[test]
    fn usa_instances_have_nondegenerate_satisfying_ground_state() {
        for seed in 0..25 {
            let inst = generate_usa_instance(6, seed, DEFAULT_RETRY_BUDGET).unwrap();
            assert!(inst.usa);
            let (p1, p2) = compile_2sat(&inst);
            let sp = instantaneous_spectrum(&p1.plus(&p2).unwrap(), 2);
            assert!(sp.gap().unwrap() > 0.0);
            let ground = sp.vectors[0]
                .probabilities()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(Some(ground), inst.ground_index);
            assert!(inst.clauses.iter().all(|c| c.satisfied_by(ground, inst.n)));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_usa_instance(6, 77, DEFAULT_RETRY_BUDGET).unwrap();
        let b = generate_usa_instance(6, 77, DEFAULT_RETRY_BUDGET).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = generate_usa_instance(4, 8, DEFAULT_RETRY_BUDGET).unwrap();
        let text = inst.to_json();
        assert!(text.contains("\"J\""));
        let back = ProblemInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_rejects_tampered_couplings() {
        let inst = generate_usa_instance(4, 8, DEFAULT_RETRY_BUDGET).unwrap();
        let mut tampered = inst.clone();
        tampered.h[0] += 1.0;
        assert!(ProblemInstance::from_json(&tampered.to_json()).is_err());
        assert!(ProblemInstance::from_json(r#"{"n":2,"clauses":[[0,2,1,1]],"h":[0,0],"J":[[0,0],[0,0]],"usa":false,"ground_index":null,"seed":null}"#).is_err());
    }

    #[test]
    fn retry_budget_exhaustion_is_reported() {
        assert!(matches!(
            generate_usa_instance(6, 1, 0),
            Err(ProblemError::RetryBudget { .. })
        ));
        assert!(generate_usa_instance(1, 1, 10).is_err());
    }
}
