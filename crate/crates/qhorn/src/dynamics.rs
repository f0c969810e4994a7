//! Lindblad master-equation integration for SLH components, with reduced
//! two-qubit readout: fixed-step RK4, trace/purity/concurrence series, and
//! the driven-cascade entanglement experiment.

use crate::linalg::{
    self, anticommutator, commutator, gates, hermitian_eigen, kron, ComplexMatrix, C64,
};
use crate::qprob::QuantumState;
use crate::slh::{self, adiabatic_jc_cascade, JCParams, SLHTriple};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Slh(#[from] slh::SlhError),
    #[error("Hamiltonian not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("step size too large: trace drift {0:.3e} at t = {1}")]
    StepSizeTooLarge(f64, f64),
    #[error("not a two-qubit state (dim {0})")]
    NotTwoQubit(usize),
    #[error("not a density matrix: {0}")]
    NotState(String),
    #[error("unknown initial state label {0:?} (expected ee, eg, ge, gg)")]
    UnknownInitial(String),
    #[error("X-pattern violated along the trajectory (deviation {0:.3e})")]
    XPatternViolated(f64),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Markovian generator data: Hamiltonian and dissipator operators.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub h: ComplexMatrix,
    pub ls: Vec<ComplexMatrix>,
    pub dim: usize,
}

impl LindbladModel {
    pub fn new(h: ComplexMatrix, ls: Vec<ComplexMatrix>) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect >= 1e-9 {
            return Err(DynamicsError::NotHermitian(defect));
        }
        let dim = h.rows;
        for l in &ls {
            if l.rows != dim || l.cols != dim {
                return Err(DynamicsError::DimensionMismatch(
                    "dissipator dimension".into(),
                ));
            }
        }
        Ok(Self { h, ls, dim })
    }

    /// `dρ/dt = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ})`.
    pub fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = commutator(&self.h, rho)
            .expect("validated dims")
            .scale(C64::new(0.0, -1.0));
        for l in &self.ls {
            let ldl = l.dagger().matmul(l);
            let jump = l.matmul(rho).matmul(&l.dagger());
            out = out.add(&jump.sub(&anticommutator(&ldl, rho).scale(C64::new(0.5, 0.0))));
        }
        out
    }
}

/// Drop the scattering matrix of a triple and keep `(H, L)` as the master
/// equation generator.
pub fn lindblad_from_slh(g: &SLHTriple) -> Result<LindbladModel> {
    LindbladModel::new(g.h.clone(), g.l.clone())
}

/// Integration record: times, states, and named real series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
    pub concurrence: Option<Vec<f64>>,
    /// Largest off-pattern magnitude seen, when the initial state was
    /// X-patterned and the state is two-qubit.
    pub x_pattern_deviation: Option<f64>,
}

impl Trajectory {
    pub fn max_concurrence(&self) -> f64 {
        self.concurrence
            .as_ref()
            .map(|c| c.iter().cloned().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    pub fn final_state(&self) -> &ComplexMatrix {
        self.states.last().expect("non-empty trajectory")
    }

    /// CSV with `t,trace,purity,concurrence` columns; `include_rho` appends
    /// the flattened density matrix as `re+imj` cells.
    pub fn write_csv<W: Write>(&self, include_rho: bool, mut w: W) -> std::io::Result<()> {
        write!(w, "t,trace,purity,concurrence")?;
        if include_rho {
            let dim = self.states[0].rows;
            for i in 0..dim {
                for j in 0..dim {
                    write!(w, ",rho_{i}{j}")?;
                }
            }
        }
        writeln!(w)?;
        for (idx, &t) in self.times.iter().enumerate() {
            let conc = self
                .concurrence
                .as_ref()
                .map(|c| c[idx])
                .unwrap_or(f64::NAN);
            write!(
                w,
                "{:?},{:?},{:?},{:?}",
                t, self.trace[idx], self.purity[idx], conc
            )?;
            if include_rho {
                let rho = &self.states[idx];
                for i in 0..rho.rows {
                    for j in 0..rho.cols {
                        let v = rho.get(i, j);
                        write!(w, ",{:?}{:+?}j", v.re, v.im)?;
                    }
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Indices (row, col) allowed to be nonzero in a two-qubit X-state.
const X_PATTERN: [(usize, usize); 8] = [
    (0, 0),
    (1, 1),
    (2, 2),
    (3, 3),
    (0, 3),
    (3, 0),
    (1, 2),
    (2, 1),
];

fn x_pattern_deviation(rho: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if !X_PATTERN.contains(&(i, j)) {
                worst = worst.max(rho.get(i, j).norm());
            }
        }
    }
    worst
}

/// Two-qubit density matrix supported on the diagonal and anti-diagonal.
#[derive(Debug, Clone)]
pub struct XState {
    rho: ComplexMatrix,
}

impl XState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.rows != 4 || rho.cols != 4 {
            return Err(DynamicsError::NotTwoQubit(rho.rows));
        }
        let deviation = x_pattern_deviation(&rho);
        if deviation >= 1e-12 {
            return Err(DynamicsError::NotState(format!(
                "off-pattern entry of magnitude {deviation:.3e}"
            )));
        }
        let state = QuantumState::new(rho)
            .map_err(|e| DynamicsError::NotState(e.to_string()))?;
        Ok(Self { rho: state.rho().clone() })
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Closed-form concurrence
    /// `2·max(0, |ρ₁₄| − √(ρ₂₂ρ₃₃), |ρ₂₃| − √(ρ₁₁ρ₄₄))`.
    pub fn concurrence_closed_form(&self) -> f64 {
        let r = &self.rho;
        let c1 = r.get(0, 3).norm() - (r.get(1, 1).re * r.get(2, 2).re).max(0.0).sqrt();
        let c2 = r.get(1, 2).norm() - (r.get(0, 0).re * r.get(3, 3).re).max(0.0).sqrt();
        (2.0 * c1.max(c2)).max(0.0)
    }
}

/// Classical fixed-step RK4 on the master equation with per-step Hermitian
/// symmetrization. Trace drift past 1e-6 aborts with a step-size error.
pub fn rk4_integrate(
    model: &LindbladModel,
    rho0: &QuantumState,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    if rho0.dim() != model.dim {
        return Err(DynamicsError::DimensionMismatch(format!(
            "state dim {} vs model dim {}",
            rho0.dim(),
            model.dim
        )));
    }
    assert!(dt > 0.0 && t_max >= 0.0);
    let steps = (t_max / dt).round() as usize;
    let mut rho = rho0.rho().clone();
    let two_qubit = model.dim == 4;
    let x_tracked = two_qubit && x_pattern_deviation(&rho) < 1e-12;

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        trace: Vec::with_capacity(steps + 1),
        purity: Vec::with_capacity(steps + 1),
        concurrence: if two_qubit { Some(Vec::with_capacity(steps + 1)) } else { None },
        x_pattern_deviation: if x_tracked { Some(0.0) } else { None },
    };

    let record = |traj: &mut Trajectory, t: f64, rho: &ComplexMatrix| -> Result<()> {
        traj.times.push(t);
        traj.trace.push(rho.trace().re);
        traj.purity.push(rho.matmul(rho).trace().re);
        if let Some(conc) = traj.concurrence.as_mut() {
            conc.push(concurrence_of_matrix(rho)?);
        }
        if let Some(dev) = traj.x_pattern_deviation.as_mut() {
            *dev = dev.max(x_pattern_deviation(rho));
        }
        traj.states.push(rho.clone());
        Ok(())
    };

    record(&mut traj, 0.0, &rho)?;
    let half = dt / 2.0;
    for step in 1..=steps {
        let k1 = model.rhs(&rho);
        let k2 = model.rhs(&rho.add(&k1.scale(C64::new(half, 0.0))));
        let k3 = model.rhs(&rho.add(&k2.scale(C64::new(half, 0.0))));
        let k4 = model.rhs(&rho.add(&k3.scale(C64::new(dt, 0.0))));
        let increment = k1
            .add(&k2.scale(C64::new(2.0, 0.0)))
            .add(&k3.scale(C64::new(2.0, 0.0)))
            .add(&k4)
            .scale(C64::new(dt / 6.0, 0.0));
        rho = rho.add(&increment);
        // Re-symmetrize to suppress Hermiticity drift.
        rho = rho.add(&rho.dagger()).scale(C64::new(0.5, 0.0));
        let t = step as f64 * dt;
        let drift = (rho.trace().re - 1.0).abs();
        if drift.is_nan() || drift > 1e-6 {
            return Err(DynamicsError::StepSizeTooLarge(drift, t));
        }
        record(&mut traj, t, &rho)?;
    }
    Ok(traj)
}

fn concurrence_of_matrix(rho: &ComplexMatrix) -> Result<f64> {
    let yy = kron(&gates::sigma_y(), &gates::sigma_y());
    let rho_tilde = yy.matmul(&rho.conjugate()).matmul(&yy);
    // Eigenvalues of ρ·ρ̃ through the Hermitian form √ρ·ρ̃·√ρ.
    let eig = hermitian_eigen(&rho.add(&rho.dagger()).scale(C64::new(0.5, 0.0)))?;
    let mut sqrt_rho = ComplexMatrix::zeros(4, 4);
    for k in 0..4 {
        let lambda = eig.eigenvalues[k].max(0.0);
        let v = eig.eigenvectors.column(k);
        sqrt_rho = sqrt_rho.add(&v.outer(&v).scale(C64::new(lambda.sqrt(), 0.0)));
    }
    let m = sqrt_rho.matmul(&rho_tilde).matmul(&sqrt_rho);
    let m = m.add(&m.dagger()).scale(C64::new(0.5, 0.0));
    let eig_m = hermitian_eigen(&m)?;
    // Zero out eigenvalues at the numerical noise floor so pure states
    // give exact landmark values.
    let scale = eig_m.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-13 * scale.max(1e-300);
    let mut lambdas: Vec<f64> = eig_m
        .eigenvalues
        .iter()
        .map(|&mu| if mu < floor { 0.0 } else { mu.sqrt() })
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of a two-qubit state,
/// with the λ the decreasing square roots of the eigenvalues of
/// `ρ(σy⊗σy)ρ*(σy⊗σy)`.
pub fn wootters_concurrence(state: &QuantumState) -> Result<f64> {
    if state.dim() != 4 {
        return Err(DynamicsError::NotTwoQubit(state.dim()));
    }
    concurrence_of_matrix(state.rho())
}

/// Initial product states of the two atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialAtoms {
    BothExcited,
    FirstExcitedSecondGround,
    FirstGroundSecondExcited,
    BothGround,
}

impl InitialAtoms {
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "ee" => Ok(Self::BothExcited),
            "eg" => Ok(Self::FirstExcitedSecondGround),
            "ge" => Ok(Self::FirstGroundSecondExcited),
            "gg" => Ok(Self::BothGround),
            other => Err(DynamicsError::UnknownInitial(other.to_string())),
        }
    }

    /// Basis index on (atom1, atom2) with ground = 0, excited = 1.
    pub fn basis_index(self) -> usize {
        match self {
            Self::BothGround => 0,
            Self::FirstGroundSecondExcited => 1,
            Self::FirstExcitedSecondGround => 2,
            Self::BothExcited => 3,
        }
    }

    pub fn density(self) -> QuantumState {
        let v = linalg::ComplexVector::basis(4, self.basis_index());
        QuantumState::pure(&v).expect("basis state")
    }
}

/// Integrate the adiabatically eliminated two-qubit cascade and record the
/// concurrence series. When the generator is parity-preserving (no drive),
/// X-patterned initial states must stay X-patterned and any deviation is an
/// error; with a coherent drive the single-qubit terms break the pattern, so
/// the deviation is recorded in the trajectory instead.
pub fn run_jc_cascade(
    p: &JCParams,
    initial: InitialAtoms,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    let triple = adiabatic_jc_cascade(p)?;
    let model = lindblad_from_slh(&triple)?;
    let traj = rk4_integrate(&model, &initial.density(), t_max, dt)?;
    let parity_preserving = p.alpha.norm() < 1e-14 || p.g.abs() < 1e-14;
    if parity_preserving {
        if let Some(dev) = traj.x_pattern_deviation {
            if dev > 1e-8 {
                return Err(DynamicsError::XPatternViolated(dev));
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell_state() -> QuantumState {
        let mut v = ComplexVector::zeros(4);
        v.data[1] = c(1.0 / 2f64.sqrt(), 0.0);
        v.data[2] = c(1.0 / 2f64.sqrt(), 0.0);
        QuantumState::pure(&v).unwrap()
    }

    #[test]
    fn generator_extraction() {
        let pass = SLHTriple::passthrough(2);
        let model = lindblad_from_slh(&pass).unwrap();
        assert_eq!(model.ls.len(), 2);
        assert!(model.h.max_abs() < 1e-15);
        let rho = ComplexMatrix::identity(1);
        assert!(model.rhs(&rho).max_abs() < 1e-15);

        let jc = slh::jc_triple(&JCParams::reference(), "jc1").unwrap();
        let model = lindblad_from_slh(&jc).unwrap();
        assert_eq!(model.ls.len(), 2);

        let adiabatic = adiabatic_jc_cascade(&JCParams::reference()).unwrap();
        let model = lindblad_from_slh(&adiabatic).unwrap();
        assert_eq!(model.ls.len(), 3);
        assert_eq!(model.dim, 4);
    }

    #[test]
    fn free_evolution_is_constant() {
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        let rho0 = QuantumState::maximally_mixed(2);
        let traj = rk4_integrate(&model, &rho0, 1.0, 0.01).unwrap();
        for state in &traj.states {
            assert!(state.sub(rho0.rho()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn pure_dephasing_closed_form() {
        let gamma: f64 = 0.3;
        let l = gates::sigma_z().scale(c(gamma.sqrt(), 0.0));
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        let plus = ComplexVector::from_real(&[1.0, 1.0]);
        let rho0 = QuantumState::pure(&plus).unwrap();
        let traj = rk4_integrate(&model, &rho0, 2.0, 1e-3).unwrap();
        for (idx, &t) in traj.times.iter().enumerate().step_by(250) {
            let expect = 0.5 * (-2.0 * gamma * t).exp();
            let got = traj.states[idx].get(0, 1).re;
            assert!((got - expect).abs() < 1e-6, "t={t}: {got} vs {expect}");
        }
    }

    #[test]
    fn amplitude_damping_closed_form() {
        let gamma: f64 = 0.7;
        let l = gates::lowering().scale(c(gamma.sqrt(), 0.0));
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        let excited = ComplexVector::basis(2, 1);
        let rho0 = QuantumState::pure(&excited).unwrap();
        let traj = rk4_integrate(&model, &rho0, 2.0, 1e-3).unwrap();
        for (idx, &t) in traj.times.iter().enumerate().step_by(199) {
            let expect = (-gamma * t).exp();
            let got = traj.states[idx].get(1, 1).re;
            assert!((got - expect).abs() < 1e-6, "t={t}: {got} vs {expect}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let gamma: f64 = 1.0;
        let l = gates::lowering().scale(c(gamma.sqrt(), 0.0));
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        let rho0 = QuantumState::pure(&ComplexVector::basis(2, 1)).unwrap();
        let endpoint_error = |dt: f64| -> f64 {
            let traj = rk4_integrate(&model, &rho0, 1.0, dt).unwrap();
            (traj.final_state().get(1, 1).re - (-1.0f64).exp()).abs()
        };
        let coarse = endpoint_error(0.1);
        let fine = endpoint_error(0.05);
        let ratio = coarse / fine;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "step-halving ratio {ratio} (errors {coarse:.3e}/{fine:.3e})"
        );
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let l = gates::lowering().scale(c(50f64.sqrt(), 0.0));
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![l]).unwrap();
        let rho0 = QuantumState::pure(&ComplexVector::basis(2, 1)).unwrap();
        assert!(matches!(
            rk4_integrate(&model, &rho0, 5.0, 0.5),
            Err(DynamicsError::StepSizeTooLarge(_, _))
        ));
    }

    #[test]
    fn concurrence_landmarks() {
        assert!((wootters_concurrence(&bell_state()).unwrap() - 1.0).abs() < 1e-10);

        // Product state |eg⟩.
        let product = QuantumState::pure(&ComplexVector::basis(4, 2)).unwrap();
        assert!(wootters_concurrence(&product).unwrap() < 1e-10);

        assert!(matches!(
            wootters_concurrence(&QuantumState::maximally_mixed(2)),
            Err(DynamicsError::NotTwoQubit(2))
        ));
    }

    #[test]
    fn concurrence_local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let state = bell_state();
        for _ in 0..3 {
            let u1 = random_unitary2(&mut rng);
            let u2 = random_unitary2(&mut rng);
            let u = kron(&u1, &u2);
            let rotated = QuantumState::new(
                u.matmul(state.rho()).matmul(&u.dagger()),
            )
            .unwrap();
            let conc = wootters_concurrence(&rotated).unwrap();
            assert!((conc - 1.0).abs() < 1e-9, "concurrence {conc}");
        }
    }

    fn random_unitary2(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let h = m.add(&m.dagger()).scale(c(0.5, 0.0));
        linalg::matrix_exp(&h.scale(c(0.0, 1.0))).unwrap()
    }

    pub(crate) fn random_x_state(rng: &mut ChaCha8Rng) -> XState {
        let mut pops: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = pops.iter().sum();
        pops.iter_mut().for_each(|p| *p /= total);
        let mag14 = rng.random_range(0.0..1.0) * (pops[0] * pops[3]).sqrt();
        let ph14 = rng.random_range(0.0..std::f64::consts::TAU);
        let mag23 = rng.random_range(0.0..1.0) * (pops[1] * pops[2]).sqrt();
        let ph23 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut rho = ComplexMatrix::zeros(4, 4);
        for (i, &p) in pops.iter().enumerate() {
            rho.set(i, i, c(p, 0.0));
        }
        let c14 = C64::from_polar(mag14, ph14);
        let c23 = C64::from_polar(mag23, ph23);
        rho.set(0, 3, c14);
        rho.set(3, 0, c14.conj());
        rho.set(1, 2, c23);
        rho.set(2, 1, c23.conj());
        XState::new(rho).unwrap()
    }

    #[test]
    fn x_state_closed_form_matches_eigenvalue_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..200 {
            let x = random_x_state(&mut rng);
            let closed = x.concurrence_closed_form();
            let general =
                wootters_concurrence(&QuantumState::new(x.rho().clone()).unwrap()).unwrap();
            assert!(
                (closed - general).abs() < 1e-10,
                "closed {closed} vs general {general}"
            );
        }
    }

    #[test]
    fn x_state_pattern_validation() {
        let mut rho = ComplexMatrix::identity(4).scale(c(0.25, 0.0));
        rho.set(0, 1, c(0.1, 0.0));
        rho.set(1, 0, c(0.1, 0.0));
        assert!(XState::new(rho).is_err());
    }

    #[test]
    fn cascade_reference_run() {
        let p = JCParams::reference();
        let traj = run_jc_cascade(&p, InitialAtoms::BothExcited, 10.0, 1e-3).unwrap();
        assert!(traj.max_concurrence() > 0.01, "peak {}", traj.max_concurrence());
        assert!(traj.x_pattern_deviation.unwrap() < 1e-10);
        // Trace and positivity held along the run.
        for tr in &traj.trace {
            assert!((tr - 1.0).abs() < 1e-8);
        }
        let eig = hermitian_eigen(traj.final_state()).unwrap();
        assert!(eig.eigenvalues[0] > -1e-7);

        let ge = run_jc_cascade(&p, InitialAtoms::FirstGroundSecondExcited, 10.0, 1e-3).unwrap();
        assert!(ge.max_concurrence() < 1e-3, "ge peak {}", ge.max_concurrence());
        let gg = run_jc_cascade(&p, InitialAtoms::BothGround, 10.0, 1e-3).unwrap();
        assert!(gg.max_concurrence() < 1e-3);

        // Strong atomic decay suppresses the peak.
        let mut fast = p;
        fast.gamma = 100.0;
        let suppressed = run_jc_cascade(&fast, InitialAtoms::BothExcited, 5.0, 1e-3).unwrap();
        assert!(suppressed.max_concurrence() < traj.max_concurrence());
    }

    #[test]
    fn initial_label_parsing() {
        assert_eq!(InitialAtoms::parse("ee").unwrap().basis_index(), 3);
        assert_eq!(InitialAtoms::parse("gg").unwrap().basis_index(), 0);
        assert_eq!(InitialAtoms::parse("ge").unwrap().basis_index(), 1);
        assert_eq!(InitialAtoms::parse("eg").unwrap().basis_index(), 2);
        assert!(InitialAtoms::parse("xx").is_err());
    }

    #[test]
    fn trajectory_csv_format() {
        let model = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        let traj = rk4_integrate(&model, &QuantumState::maximally_mixed(2), 0.002, 1e-3).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,trace,purity,concurrence");
        assert!(lines.next().unwrap().starts_with("0.0,1.0,0.5,"));

        let mut buf = Vec::new();
        traj.write_csv(true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains("rho_00"));
    }
}
