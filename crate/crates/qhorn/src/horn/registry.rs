//! Mutable evaluation context for a program run: named systems with one joint
//! quantum state, registered operators and kets, the walk register, and the
//! Fock register, plus the seeded RNG behind measurement sampling.

use super::ast::{Directive, KetExpr, Program};
use super::HornError;
use crate::fockweyl::{weyl_apply, ExponentialVectorSum, TestFunction};
use crate::linalg::{hermitian_eigen, partial_trace, ComplexMatrix, ComplexVector, C64};
use crate::qwalk::WalkState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

type Result<T> = std::result::Result<T, HornError>;

/// Horizon and cell count of the built-in Fock register.
pub const FOCK_GRID: (f64, usize) = (1.0, 8);

#[derive(Debug, Clone)]
pub struct RegisteredOp {
    pub matrix: ComplexMatrix,
    pub antiunitary: bool,
}

#[derive(Debug, Clone)]
struct SystemInfo {
    name: String,
    dim: usize,
    bits: usize,
}

/// Evaluation context. Cloned wholesale at solver choice points, so all the
/// state here must stay cheap to copy.
#[derive(Debug, Clone)]
pub struct Registry {
    systems: Vec<SystemInfo>,
    state: ComplexVector,
    pub operators: BTreeMap<String, RegisteredOp>,
    pub named_kets: BTreeMap<String, KetExpr>,
    pub walk: Option<WalkState>,
    pub fock: Option<ExponentialVectorSum>,
    rng: ChaCha8Rng,
    pub seed: u64,
    /// Recorded outcome distributions of measurement builtins.
    pub distributions: Vec<(String, Vec<f64>)>,
}

impl Registry {
    pub fn new(seed: u64) -> Self {
        Self {
            systems: Vec::new(),
            state: ComplexVector::new(vec![C64::new(1.0, 0.0)]),
            operators: BTreeMap::new(),
            named_kets: BTreeMap::new(),
            walk: None,
            fock: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            distributions: Vec::new(),
        }
    }

    /// Build a registry from a program's directives.
    pub fn from_program(program: &Program, seed: u64) -> Result<Self> {
        let mut reg = Self::new(seed);
        let mut initial: BTreeMap<String, KetExpr> = BTreeMap::new();
        for d in &program.directives {
            match d {
                Directive::System(name, dims) => {
                    let dim: usize = dims.iter().product();
                    if !dim.is_power_of_two() {
                        return Err(HornError::Registry(format!(
                            "system {name}: dimension {dim} is not a power of two"
                        )));
                    }
                    if reg.systems.iter().any(|s| s.name == *name) {
                        return Err(HornError::Registry(format!("duplicate system {name}")));
                    }
                    reg.systems.push(SystemInfo {
                        name: name.clone(),
                        dim,
                        bits: dim.trailing_zeros() as usize,
                    });
                }
                Directive::Op(name, matrix) => {
                    if !matrix.is_square() {
                        return Err(HornError::Registry(format!("operator {name} not square")));
                    }
                    reg.operators.insert(
                        name.clone(),
                        RegisteredOp { matrix: matrix.clone(), antiunitary: false },
                    );
                }
                Directive::State(name, ket) => {
                    initial.insert(name.clone(), ket.clone());
                }
            }
        }
        // Joint state: declared order, defaulting each system to |0…0⟩.
        let mut joint = ComplexVector::new(vec![C64::new(1.0, 0.0)]);
        for sys in &reg.systems {
            let ket = initial
                .remove(&sys.name)
                .unwrap_or_else(|| KetExpr::basis(&"0".repeat(sys.bits)));
            let v = ket.to_vector().ok_or_else(|| {
                HornError::Registry(format!("state for {} is not a bitstring ket", sys.name))
            })?;
            if v.dim() != sys.dim {
                return Err(HornError::Registry(format!(
                    "state for {} has dimension {} (system is {})",
                    sys.name,
                    v.dim(),
                    sys.dim
                )));
            }
            joint = joint.kron(&v.normalized());
        }
        reg.state = joint;
        // Remaining #state entries are named ket constants.
        for (name, ket) in initial {
            reg.named_kets.insert(name, ket);
        }
        Ok(reg)
    }

    pub fn register_antiunitary(&mut self, name: &str, matrix: ComplexMatrix) {
        self.operators
            .insert(name.to_string(), RegisteredOp { matrix, antiunitary: true });
    }

    pub fn system_names(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn has_system(&self, name: &str) -> bool {
        self.systems.iter().any(|s| s.name == name)
    }

    pub fn joint_state(&self) -> &ComplexVector {
        &self.state
    }

    pub fn joint_dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    fn positions(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.systems
                    .iter()
                    .position(|s| s.name == *n)
                    .ok_or_else(|| HornError::Registry(format!("unknown system {n}")))
            })
            .collect()
    }

    /// Apply a registered operator to the listed systems (in listed order).
    /// Unitarity within 1e-9 is enforced; an antiunitary entry conjugates the
    /// state first.
    pub fn apply_operator(&mut self, op_name: &str, systems: &[String]) -> Result<()> {
        let op = self
            .operators
            .get(op_name)
            .ok_or_else(|| HornError::Registry(format!("unknown operator {op_name}")))?
            .clone();
        if !op.matrix.is_unitary(1e-9) {
            return Err(HornError::DecorationViolation(format!(
                "operator {op_name} is not unitary (residual {:.3e})",
                op.matrix.unitarity_defect()
            )));
        }
        let positions = self.positions(systems)?;
        let sub_dim: usize = positions.iter().map(|&p| self.systems[p].dim).product();
        if op.matrix.rows != sub_dim {
            return Err(HornError::Registry(format!(
                "operator {op_name} is {}x{} but systems span dimension {sub_dim}",
                op.matrix.rows, op.matrix.cols
            )));
        }
        if op.antiunitary {
            for c in &mut self.state.data {
                *c = c.conj();
            }
        }
        self.state = self.apply_on_positions(&op.matrix, &positions);
        Ok(())
    }

    /// Apply `op` to the sub-factors at `positions` (in that order).
    fn apply_on_positions(&self, op: &ComplexMatrix, positions: &[usize]) -> ComplexVector {
        let dims = self.joint_dims();
        let total = self.state.dim();
        let digits_of = |mut idx: usize| -> Vec<usize> {
            let mut digits = vec![0usize; dims.len()];
            for (slot, &d) in dims.iter().enumerate().rev() {
                digits[slot] = idx % d;
                idx /= d;
            }
            digits
        };
        let flat_of = |digits: &[usize]| -> usize {
            let mut idx = 0usize;
            for (slot, &d) in dims.iter().enumerate() {
                idx = idx * d + digits[slot];
            }
            idx
        };
        let sub_of = |digits: &[usize]| -> usize {
            let mut idx = 0usize;
            for &p in positions {
                idx = idx * dims[p] + digits[p];
            }
            idx
        };
        let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let mut out = ComplexVector::zeros(total);
        for idx in 0..total {
            let mut digits = digits_of(idx);
            let row = sub_of(&digits);
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..op.cols {
                let v = op.get(row, col);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                // Scatter the column sub-index back into the digit vector.
                let mut c = col;
                for (k, &p) in positions.iter().enumerate().rev() {
                    digits[p] = c % sub_dims[k];
                    c /= sub_dims[k];
                    let _ = k;
                }
                acc += v * self.state.data[flat_of(&digits)];
            }
            out.data[idx] = acc;
        }
        out
    }

    /// Pure marginal of the listed systems, as a labeled ket. Fails when the
    /// listed systems are entangled with the rest (purity below 1 − 1e-9).
    pub fn marginal_ket(&self, systems: &[String]) -> Result<std::result::Result<KetExpr, String>> {
        let positions = self.positions(systems)?;
        let dims = self.joint_dims();
        let rho_full = self.state.outer(&self.state);
        let mut keep_sorted = positions.clone();
        keep_sorted.sort_unstable();
        let reduced = partial_trace(&rho_full, &dims, &keep_sorted)?;
        let purity = reduced.matmul(&reduced).trace().re;
        if purity < 1.0 - 1e-9 {
            return Ok(Err(format!("substate is mixed (purity {purity:.6})")));
        }
        let eig = hermitian_eigen(&reduced)?;
        let top = eig.eigenvectors.column(reduced.rows - 1);
        // Reorder the kept factors from sorted order into the listed order.
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&p| dims[p]).collect();
        let perm: Vec<usize> = positions
            .iter()
            .map(|p| keep_sorted.iter().position(|q| q == p).unwrap())
            .collect();
        let reordered = permute_factors(&top, &kept_dims, &perm);
        let bits: usize = positions.iter().map(|&p| self.systems[p].bits).sum();
        Ok(Ok(KetExpr::from_vector(&reordered, bits)))
    }

    /// Project the listed systems onto `target`, renormalize, and return the
    /// outcome probability. A vanishing amplitude collapses to a failure.
    pub fn project(&mut self, systems: &[String], target: &KetExpr) -> Result<f64> {
        let positions = self.positions(systems)?;
        let v = target
            .to_vector()
            .ok_or_else(|| HornError::Registry("projection target is not a bitstring ket".into()))?
            .normalized();
        let sub_dim: usize = positions.iter().map(|&p| self.systems[p].dim).product();
        if v.dim() != sub_dim {
            return Err(HornError::Registry(format!(
                "projection target dimension {} differs from systems ({})",
                v.dim(),
                sub_dim
            )));
        }
        let projector = v.outer(&v);
        let projected = self.apply_on_positions_general(&projector, &positions);
        let prob = projected.norm().powi(2);
        if prob > 1e-12 {
            self.state = projected.scale(C64::new(1.0 / prob.sqrt(), 0.0));
        }
        Ok(prob)
    }

    fn apply_on_positions_general(
        &self,
        op: &ComplexMatrix,
        positions: &[usize],
    ) -> ComplexVector {
        // Same scatter as apply_on_positions; kept separate because projection
        // need not be unitary.
        self.apply_on_positions(op, positions)
    }

    /// Projective measurement of a registered observable on the listed
    /// systems: samples an eigenvalue with the seeded RNG, collapses, and
    /// records the full outcome distribution.
    pub fn measure(
        &mut self,
        op_name: &str,
        systems: &[String],
        record_key: String,
    ) -> Result<(f64, Vec<f64>)> {
        let op = self
            .operators
            .get(op_name)
            .ok_or_else(|| HornError::Registry(format!("unknown operator {op_name}")))?
            .clone();
        let positions = self.positions(systems)?;
        let spec = crate::qprob::SpectralDecomposition::of(&op.matrix, 1e-9)
            .map_err(|e| HornError::Registry(e.to_string()))?;
        let mut probs = Vec::with_capacity(spec.eigenvalues.len());
        let mut branches = Vec::with_capacity(spec.eigenvalues.len());
        for proj in &spec.projectors {
            let branch = self.apply_on_positions_general(proj.matrix(), &positions);
            let p = branch.norm().powi(2);
            probs.push(p);
            branches.push(branch);
        }
        let draw: f64 = self.rng.random_range(0.0..1.0);
        let mut acc = 0.0;
        let mut outcome = probs.len() - 1;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if draw < acc {
                outcome = k;
                break;
            }
        }
        let norm = probs[outcome].sqrt();
        if norm > 1e-12 {
            self.state = branches[outcome].scale(C64::new(1.0 / norm, 0.0));
        }
        self.distributions.push((record_key, probs.clone()));
        Ok((spec.eigenvalues[outcome], probs))
    }

    /// Advance the walk register by `steps` (initialized localized-right).
    pub fn walk_steps(&mut self, steps: usize) {
        let walk = self.walk.take().unwrap_or_else(WalkState::localized_right);
        self.walk = Some(walk.steps(steps));
    }

    /// Displace the Fock register by the constant test function `amplitude`.
    pub fn weyl_displace(&mut self, amplitude: C64) -> Result<()> {
        let (horizon, cells) = FOCK_GRID;
        let current = self
            .fock
            .take()
            .unwrap_or_else(|| ExponentialVectorSum::vacuum(horizon, cells));
        let f = TestFunction::constant(amplitude, horizon, cells);
        let displaced = weyl_apply(&f, &current).map_err(|e| HornError::Registry(e.to_string()))?;
        self.fock = Some(displaced);
        Ok(())
    }
}

/// Permute the tensor factors of a state vector.
fn permute_factors(v: &ComplexVector, dims: &[usize], perm: &[usize]) -> ComplexVector {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return v.clone();
    }
    let total = v.dim();
    let mut out = ComplexVector::zeros(total);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    for idx in 0..total {
        // Digits of the source index.
        let mut digits = vec![0usize; dims.len()];
        let mut rem = idx;
        for (slot, &d) in dims.iter().enumerate().rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        let mut new_idx = 0usize;
        for (slot, &p) in perm.iter().enumerate() {
            new_idx = new_idx * new_dims[slot] + digits[p];
        }
        out.data[new_idx] = v.data[idx];
    }
    out
}
