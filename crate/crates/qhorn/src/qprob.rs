//! Quantum-logic lattice operations, Gleason-state probabilities, conditional
//! expectation, and the probe-observable protocol.
//!
//! Projections of a finite-dimensional Hilbert space form an orthomodular
//! lattice; meets and joins act on ranges, and states assign probabilities
//! `tr(ρE)` to projections. The probe construction copies an observable's
//! statistics onto a pointer factor through a single unitary.

use crate::linalg::{
    self, commutator, hermitian_eigen, kron, projector_from_vectors, ComplexMatrix, ComplexVector,
    C64, HERMITICITY_TOL, RANK_TOL, UNITARITY_TOL,
};
use thiserror::Error;

/// Numerical guard for clipping probabilities at the [0,1] boundary.
pub const PROBABILITY_CLIP: f64 = 1e-12;
/// Commutant membership tolerance for conditional expectations.
pub const COMMUTANT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QprobError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a projection (defect {0:.3e})")]
    NotProjection(f64),
    #[error("not a density matrix: {0}")]
    NotState(String),
    #[error("not conditionable: operator outside the commutant (residual {0:.3e})")]
    NotConditionable(f64),
    #[error("null event: spectral projector has vanishing probability")]
    NullEvent,
    #[error("degenerate spectral data: {0} distinct eigenvalues on a {1}-dimensional system")]
    DegenerateSpectrum(usize, usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),
    #[error("not unitary (residual {0:.3e})")]
    NotUnitary(f64),
}

pub type Result<T> = std::result::Result<T, QprobError>;

/// Orthogonal projection operator: `P² = P = P†` within 1e-10.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: ComplexMatrix,
}

impl Projection {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let idem = matrix.matmul(&matrix).sub(&matrix).max_abs();
        let herm = matrix.hermiticity_defect();
        let defect = idem.max(herm);
        if defect >= HERMITICITY_TOL {
            return Err(QprobError::NotProjection(defect));
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    /// Rank-one projector onto a (normalized copy of a) vector.
    pub fn onto_vector(v: &ComplexVector) -> Result<Self> {
        let p = projector_from_vectors(std::slice::from_ref(v))?;
        Ok(Self { matrix: p })
    }

    pub fn onto_span(vs: &[ComplexVector]) -> Result<Self> {
        Ok(Self { matrix: projector_from_vectors(vs)? })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round() as usize
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuantumState {
    rho: ComplexMatrix,
}

impl QuantumState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(QprobError::NotState("not square".into()));
        }
        if rho.hermiticity_defect() >= HERMITICITY_TOL {
            return Err(QprobError::NotState("not Hermitian".into()));
        }
        if (rho.trace().re - 1.0).abs() >= 1e-8 {
            return Err(QprobError::NotState(format!("trace {} ≠ 1", rho.trace().re)));
        }
        let eig = hermitian_eigen(&rho)?;
        if eig.eigenvalues.iter().any(|&l| l < -1e-7) {
            return Err(QprobError::NotState(format!(
                "negative eigenvalue {:.3e}",
                eig.eigenvalues[0]
            )));
        }
        Ok(Self { rho })
    }

    pub fn pure(v: &ComplexVector) -> Result<Self> {
        let n = v.normalized();
        Self::new(n.outer(&n))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows
    }

    pub fn purity(&self) -> f64 {
        self.rho.matmul(&self.rho).trace().re
    }
}

/// Spectral decomposition of a Hermitian observable into distinct eigenvalues
/// and the matching orthogonal projectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Projection>,
}

impl SpectralDecomposition {
    /// Group the eigenvalues of a Hermitian matrix within `gap_tol` and build
    /// one projector per distinct eigenvalue.
    pub fn of(observable: &ComplexMatrix, gap_tol: f64) -> Result<Self> {
        let eig = hermitian_eigen(observable)?;
        let n = observable.rows;
        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut groups: Vec<Vec<ComplexVector>> = Vec::new();
        for k in 0..n {
            let lambda = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k);
            match eigenvalues.last() {
                Some(&last) if (lambda - last).abs() < gap_tol => {
                    groups.last_mut().unwrap().push(v)
                }
                _ => {
                    eigenvalues.push(lambda);
                    groups.push(vec![v]);
                }
            }
        }
        let projectors = groups
            .iter()
            .map(|g| Projection::onto_span(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eigenvalues, projectors })
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map(|p| p.dim()).unwrap_or(0)
    }

    /// `Σ_i λ_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = out.add(&p.matrix().scale(C64::new(*l, 0.0)));
        }
        out
    }
}

/// `tr(ρE)`, clipped to [0,1] when within [`PROBABILITY_CLIP`] of the boundary.
pub fn gleason_probability(state: &QuantumState, e: &Projection) -> Result<f64> {
    if state.dim() != e.dim() {
        return Err(QprobError::DimensionMismatch(format!(
            "state dim {} vs projection dim {}",
            state.dim(),
            e.dim()
        )));
    }
    let p = state.rho().matmul(e.matrix()).trace().re;
    if p < 0.0 && p > -PROBABILITY_CLIP {
        return Ok(0.0);
    }
    if p > 1.0 && p < 1.0 + PROBABILITY_CLIP {
        return Ok(1.0);
    }
    Ok(p)
}

/// Projector onto `range(p) ∩ range(q)`, the lattice meet.
///
/// Computed as the null space of `(I−p) + (I−q)`: a vector is annihilated by
/// that Hermitian PSD sum exactly when both projections fix it.
pub fn lattice_meet(p: &Projection, q: &Projection) -> Result<Projection> {
    let dim = require_same_dim(p, q)?;
    let i = ComplexMatrix::identity(dim);
    let m = i.sub(p.matrix()).add(&i.sub(q.matrix()));
    let eig = hermitian_eigen(&m)?;
    let vs: Vec<ComplexVector> = (0..dim)
        .filter(|&k| eig.eigenvalues[k].abs() < RANK_TOL.max(1e-12))
        .map(|k| eig.eigenvectors.column(k))
        .collect();
    if vs.is_empty() {
        return Ok(Projection::zero(dim));
    }
    Projection::onto_span(&vs)
}

/// Projector onto the span of `range(p) ∪ range(q)`, the lattice join.
///
/// Computed directly from the range of `p + q` so the De Morgan law remains a
/// genuine cross-check against [`lattice_meet`].
pub fn lattice_join(p: &Projection, q: &Projection) -> Result<Projection> {
    let dim = require_same_dim(p, q)?;
    let sum = p.matrix().add(q.matrix());
    let eig = hermitian_eigen(&sum)?;
    let vs: Vec<ComplexVector> = (0..dim)
        .filter(|&k| eig.eigenvalues[k] > RANK_TOL)
        .map(|k| eig.eigenvectors.column(k))
        .collect();
    if vs.is_empty() {
        return Ok(Projection::zero(dim));
    }
    Projection::onto_span(&vs)
}

/// `I − p`.
pub fn orthocomplement(p: &Projection) -> Projection {
    Projection {
        matrix: ComplexMatrix::identity(p.dim()).sub(p.matrix()),
    }
}

/// Two projections are co-measurable exactly when they commute; commuting
/// pairs admit the decomposition `p = a∨b`, `q = a∨c` with `a = p⊓q`,
/// `b = p⊓q'`, `c = p'⊓q` mutually orthogonal.
pub fn is_compatible(p: &Projection, q: &Projection) -> Result<bool> {
    require_same_dim(p, q)?;
    let comm = commutator(p.matrix(), q.matrix())?;
    Ok(comm.max_abs() < COMMUTANT_TOL)
}

/// Check that conjugation by a unitary acts as a lattice automorphism on the
/// given sample: it must fix 0 and 1 and commute with joins, meets, and
/// orthocomplements within 1e-9.
pub fn check_automorphism(tau: &ComplexMatrix, sample: &[Projection]) -> Result<bool> {
    let defect = tau.unitarity_defect();
    if defect >= UNITARITY_TOL {
        return Err(QprobError::NotUnitary(defect));
    }
    let dim = tau.rows;
    let map = |p: &Projection| -> Result<Projection> {
        let m = tau.matmul(p.matrix()).matmul(&tau.dagger());
        // Conjugated projectors stay projectors; rebuild through the
        // validating constructor to catch drift.
        Projection::new(m)
    };
    let tol = 1e-9;
    let close = |a: &Projection, b: &Projection| a.matrix().sub(b.matrix()).max_abs() < tol;

    if !close(&map(&Projection::zero(dim))?, &Projection::zero(dim)) {
        return Ok(false);
    }
    if !close(&map(&Projection::identity(dim))?, &Projection::identity(dim)) {
        return Ok(false);
    }
    for p in sample {
        if !close(&map(&orthocomplement(p))?, &orthocomplement(&map(p)?)) {
            return Ok(false);
        }
        for q in sample {
            let join_then_map = map(&lattice_join(p, q)?)?;
            let map_then_join = lattice_join(&map(p)?, &map(q)?)?;
            if !close(&join_then_map, &map_then_join) {
                return Ok(false);
            }
            let meet_then_map = map(&lattice_meet(p, q)?)?;
            let map_then_meet = lattice_meet(&map(p)?, &map(q)?)?;
            if !close(&meet_then_map, &map_then_meet) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Conditional expectation `Σ_i [tr(ρ d A_i)/tr(ρ A_i)] A_i` of `d` onto the
/// commutative algebra spanned by the spectral projectors of `a`.
///
/// `d` must commute with every projector ("D ∈ A′") and every used projector
/// must carry positive probability.
pub fn conditional_expectation(
    d: &ComplexMatrix,
    a: &SpectralDecomposition,
    state: &QuantumState,
) -> Result<ComplexMatrix> {
    let dim = a.dim();
    if d.rows != dim || d.cols != dim || state.dim() != dim {
        return Err(QprobError::DimensionMismatch(format!(
            "conditional_expectation: d {}x{}, decomposition dim {}, state dim {}",
            d.rows,
            d.cols,
            dim,
            state.dim()
        )));
    }
    let mut worst = 0.0f64;
    for p in &a.projectors {
        worst = worst.max(commutator(d, p.matrix())?.max_abs());
    }
    if worst >= COMMUTANT_TOL {
        return Err(QprobError::NotConditionable(worst));
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for p in &a.projectors {
        let denom = state.rho().matmul(p.matrix()).trace().re;
        if denom <= PROBABILITY_CLIP {
            return Err(QprobError::NullEvent);
        }
        let numer = state.rho().matmul(d).matmul(p.matrix()).trace();
        out = out.add(&p.matrix().scale(numer / denom));
    }
    Ok(out)
}

/// Level-swap unitary on the probe space: exchanges basis levels `a` and `b`
/// and fixes the rest; the identity when `a = b`.
pub fn build_xprime(a: usize, b: usize, basis: &[ComplexVector]) -> Result<ComplexMatrix> {
    let m = basis.len();
    if a >= m {
        return Err(QprobError::IndexOutOfRange(a));
    }
    if b >= m {
        return Err(QprobError::IndexOutOfRange(b));
    }
    let dim = basis[0].dim();
    if a == b {
        return Ok(ComplexMatrix::identity(dim));
    }
    let mut out = basis[b].outer(&basis[a]).add(&basis[a].outer(&basis[b]));
    for (c, v) in basis.iter().enumerate() {
        if c != a && c != b {
            out = out.add(&v.outer(v));
        }
    }
    Ok(out)
}

/// Probe apparatus: a pointer system of the same dimension as the probed
/// observable's spectrum and the unitary `U = Σ_a P_a ⊗ X′_{a,p}` copying the
/// observable's statistics onto it.
#[derive(Debug, Clone)]
pub struct ProbeSystem {
    pub system_dim: usize,
    pub observable: SpectralDecomposition,
    pub pointer_index: usize,
    pub unitary: ComplexMatrix,
}

/// Build the probe unitary for a non-degenerate observable.
///
/// `p` is the pre-determined pointer eigenvalue index. The pointer space uses
/// the canonical basis with one level per eigenvalue.
pub fn build_probe_unitary(a: &SpectralDecomposition, p: usize) -> Result<ProbeSystem> {
    let m = a.dim();
    if a.eigenvalues.len() != m {
        return Err(QprobError::DegenerateSpectrum(a.eigenvalues.len(), m));
    }
    if p >= m {
        return Err(QprobError::IndexOutOfRange(p));
    }
    let pointer_basis: Vec<ComplexVector> = (0..m).map(|i| ComplexVector::basis(m, i)).collect();
    let mut u = ComplexMatrix::zeros(m * m, m * m);
    for (idx, proj) in a.projectors.iter().enumerate() {
        let x = build_xprime(idx, p, &pointer_basis)?;
        u = u.add(&kron(proj.matrix(), &x));
    }
    let defect = u.unitarity_defect();
    if defect >= UNITARITY_TOL {
        return Err(QprobError::NotUnitary(defect));
    }
    Ok(ProbeSystem {
        system_dim: m,
        observable: a.clone(),
        pointer_index: p,
        unitary: u,
    })
}

impl ProbeSystem {
    /// Pointer projector `P′_c` on the probe factor.
    fn pointer_projector(&self, c: usize) -> ComplexMatrix {
        let v = ComplexVector::basis(self.system_dim, c);
        v.outer(&v)
    }

    /// Heisenberg-evolved pointer projector `U†(I ⊗ P′_c)U`.
    pub fn evolved_pointer(&self, c: usize) -> ComplexMatrix {
        let i = ComplexMatrix::identity(self.system_dim);
        let op = kron(&i, &self.pointer_projector(c));
        self.unitary.dagger().matmul(&op).matmul(&self.unitary)
    }

    /// Residual of the copy identity for outcome `c`:
    /// `U†(I⊗P′_c)U = P_c⊗P′_p + (1−P_c)⊗P′_c` for `c ≠ p` and
    /// `Σ_a P_a⊗P′_a` for `c = p`.
    pub fn copy_identity_residual(&self, c: usize) -> f64 {
        let evolved = self.evolved_pointer(c);
        let expected = if c != self.pointer_index {
            let i = ComplexMatrix::identity(self.system_dim);
            let pc = self.observable.projectors[c].matrix();
            kron(pc, &self.pointer_projector(self.pointer_index))
                .add(&kron(&i.sub(pc), &self.pointer_projector(c)))
        } else {
            let mut acc = ComplexMatrix::zeros(self.system_dim.pow(2), self.system_dim.pow(2));
            for (a_idx, proj) in self.observable.projectors.iter().enumerate() {
                acc = acc.add(&kron(proj.matrix(), &self.pointer_projector(a_idx)));
            }
            acc
        };
        evolved.sub(&expected).max_abs()
    }

    /// Joint initial state `ρ ⊗ |Ψ_p⟩⟨Ψ_p|` with the pointer parked at `p`.
    fn joint_state(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        kron(rho, &self.pointer_projector(self.pointer_index))
    }

    /// Conditional probability that the evolved pointer reads `c` given the
    /// system observable reads `c`; equals 1 for every outcome.
    pub fn conditional_ratio(&self, state: &QuantumState, c: usize) -> Result<f64> {
        if state.dim() != self.system_dim {
            return Err(QprobError::DimensionMismatch(
                "probe conditional_ratio: state dimension".into(),
            ));
        }
        let joint = self.joint_state(state.rho());
        let pc_sys = kron(
            self.observable.projectors[c].matrix(),
            &ComplexMatrix::identity(self.system_dim),
        );
        let denom = joint.matmul(&pc_sys).trace().re;
        if denom <= PROBABILITY_CLIP {
            return Err(QprobError::NullEvent);
        }
        let numer = joint
            .matmul(&self.evolved_pointer(c))
            .matmul(&pc_sys)
            .trace()
            .re;
        Ok(numer / denom)
    }

    /// Probability that the evolved pointer reads `c`; the copy property makes
    /// this equal `tr(ρ P_c)`.
    pub fn pointer_statistic(&self, state: &QuantumState, c: usize) -> f64 {
        self.joint_state(state.rho())
            .matmul(&self.evolved_pointer(c))
            .trace()
            .re
    }
}

/// Outcome-statistics disturbance of observable `a` caused by a subsequent
/// probe of `b`, on the three-factor space system ⊗ pointer_a ⊗ pointer_b.
///
/// Probes `a` then `b` (pointer index 0 for both), then compares the
/// distribution of `a` on the system against its pre-probe distribution,
/// returning the largest outcome deviation.
pub fn probe_disturbance(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    state: &QuantumState,
) -> Result<f64> {
    let m = a.dim();
    if b.dim() != m || state.dim() != m {
        return Err(QprobError::DimensionMismatch(
            "probe_disturbance: all inputs must share the system dimension".into(),
        ));
    }
    let probe_a = build_probe_unitary(a, 0)?;
    let probe_b = build_probe_unitary(b, 0)?;
    let i = ComplexMatrix::identity(m);
    // Factor order: system, pointer for a, pointer for b.
    let u_a = kron(&probe_a.unitary, &i);
    let u_b = {
        // U_b acts on (system, pointer_b); interleave an identity pointer_a.
        let mut u = ComplexMatrix::zeros(m * m * m, m * m * m);
        for si in 0..m {
            for sj in 0..m {
                for bi in 0..m {
                    for bj in 0..m {
                        let v = probe_b.unitary.get(si * m + bi, sj * m + bj);
                        if v.norm_sqr() == 0.0 {
                            continue;
                        }
                        for k in 0..m {
                            let row = (si * m + k) * m + bi;
                            let col = (sj * m + k) * m + bj;
                            u.set(row, col, v);
                        }
                    }
                }
            }
        }
        u
    };
    let pointer0 = ComplexVector::basis(m, 0);
    let pointer0 = pointer0.outer(&pointer0);
    let joint0 = kron(&kron(state.rho(), &pointer0), &pointer0);
    let u_total = u_b.matmul(&u_a);
    let evolved = u_total.matmul(&joint0).matmul(&u_total.dagger());

    let mut worst = 0.0f64;
    for proj in &a.projectors {
        let before = state.rho().matmul(proj.matrix()).trace().re;
        let proj_full = kron(&kron(proj.matrix(), &i), &i);
        let after = evolved.matmul(&proj_full).trace().re;
        worst = worst.max((after - before).abs());
    }
    Ok(worst)
}

fn require_same_dim(p: &Projection, q: &Projection) -> Result<usize> {
    if p.dim() != q.dim() {
        return Err(QprobError::DimensionMismatch(format!(
            "projections of dim {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(p.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket0() -> ComplexVector {
        ComplexVector::basis(2, 0)
    }

    fn ket1() -> ComplexVector {
        ComplexVector::basis(2, 1)
    }

    fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let rho = m.matmul(&m.dagger());
        let rho = rho.scale(c(1.0 / rho.trace().re, 0.0));
        QuantumState::new(rho).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let h = m.add(&m.dagger()).scale(c(0.5, 0.0));
        crate::linalg::matrix_exp(&h.scale(c(0.0, 1.0))).unwrap()
    }

    fn angled_projector(theta: f64) -> Projection {
        let v = ComplexVector::from_real(&[theta.cos(), theta.sin()]);
        Projection::onto_vector(&v).unwrap()
    }

    #[test]
    fn gleason_basics() {
        let state = QuantumState::pure(&ket0()).unwrap();
        let e = Projection::onto_vector(&ket0()).unwrap();
        assert!((gleason_probability(&state, &e).unwrap() - 1.0).abs() < 1e-12);

        // Highly probable but incompatible propositions: cos²θ = 0.9999999.
        let theta = (0.9999999f64).sqrt().acos();
        let e_angled = angled_projector(theta);
        let p = gleason_probability(&state, &e_angled).unwrap();
        assert!((p - 0.9999999).abs() < 1e-9);

        let mixed = QuantumState::maximally_mixed(2);
        assert!((gleason_probability(&mixed, &e_angled).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn meet_and_join_on_the_lantern() {
        // Spin-½ lattice: distinct rank-1 projectors meet at 0, join at I.
        let theta = (0.9999999f64).sqrt().acos();
        let e_p = angled_projector(theta);
        let e_q = angled_projector(-theta);

        let meet = lattice_meet(&e_p, &e_q).unwrap();
        assert!(meet.matrix().max_abs() < 1e-10, "meet of distinct rays is 0");
        let state = QuantumState::pure(&ket0()).unwrap();
        assert!(gleason_probability(&state, &meet).unwrap() < 1e-12);

        let join = lattice_join(&e_p, &e_q).unwrap();
        assert!(join.matrix().sub(&ComplexMatrix::identity(2)).max_abs() < 1e-10);

        // Idempotence and unit laws.
        let p = angled_projector(0.3);
        assert!(lattice_meet(&p, &p).unwrap().matrix().sub(p.matrix()).max_abs() < 1e-10);
        let top = Projection::identity(2);
        assert!(lattice_meet(&top, &p).unwrap().matrix().sub(p.matrix()).max_abs() < 1e-10);
        let bottom = Projection::zero(2);
        assert!(lattice_join(&bottom, &p).unwrap().matrix().sub(p.matrix()).max_abs() < 1e-10);
        let p0 = Projection::onto_vector(&ket0()).unwrap();
        let p1 = Projection::onto_vector(&ket1()).unwrap();
        let j = lattice_join(&p0, &p1).unwrap();
        assert!(j.matrix().sub(&ComplexMatrix::identity(2)).max_abs() < 1e-10);
    }

    #[test]
    fn orthocomplement_laws() {
        assert!(orthocomplement(&Projection::zero(3))
            .matrix()
            .sub(&ComplexMatrix::identity(3))
            .max_abs()
            < 1e-15);
        let p = angled_projector(0.7);
        let pc = orthocomplement(&p);
        let join = lattice_join(&p, &pc).unwrap();
        assert!(join.matrix().sub(&ComplexMatrix::identity(2)).max_abs() < 1e-9);
        let meet = lattice_meet(&p, &pc).unwrap();
        assert!(meet.matrix().max_abs() < 1e-9);
        assert!(orthocomplement(&pc).matrix().sub(p.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn de_morgan() {
        let p = angled_projector(0.4);
        let q = angled_projector(1.1);
        let lhs = orthocomplement(&lattice_join(&p, &q).unwrap());
        let rhs = lattice_meet(&orthocomplement(&p), &orthocomplement(&q)).unwrap();
        assert!(lhs.matrix().sub(rhs.matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn nondistributivity_of_the_lantern() {
        // meet(p', join(q, q')) ≠ join(meet(p', q), meet(p', q')) for the
        // incompatible qubit sample.
        let theta = 0.25;
        let e_p = angled_projector(theta);
        let q = Projection::onto_vector(&ket0()).unwrap();
        let qc = Projection::onto_vector(&ket1()).unwrap();
        let lhs = lattice_meet(&e_p, &lattice_join(&q, &qc).unwrap()).unwrap();
        let rhs = lattice_join(
            &lattice_meet(&e_p, &q).unwrap(),
            &lattice_meet(&e_p, &qc).unwrap(),
        )
        .unwrap();
        assert!(lhs.matrix().sub(rhs.matrix()).max_abs() > 0.5);
    }

    #[test]
    fn gleason_additive_on_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let state = random_state(&mut rng, 4);
        let e = Projection::onto_span(&[ComplexVector::basis(4, 0), ComplexVector::basis(4, 2)])
            .unwrap();
        let f = Projection::onto_vector(&ComplexVector::basis(4, 1)).unwrap();
        let join = lattice_join(&e, &f).unwrap();
        let p_join = gleason_probability(&state, &join).unwrap();
        let p_sum = gleason_probability(&state, &e).unwrap()
            + gleason_probability(&state, &f).unwrap();
        assert!((p_join - p_sum).abs() < 1e-9);
    }

    #[test]
    fn compatibility() {
        let p0 = Projection::onto_vector(&ket0()).unwrap();
        let p1 = Projection::onto_vector(&ket1()).unwrap();
        assert!(is_compatible(&p0, &p1).unwrap());

        let theta = (0.9999999f64).sqrt().acos();
        assert!(!is_compatible(&angled_projector(theta), &angled_projector(-theta)).unwrap());

        // Operators on different tensor factors are co-measurable.
        let i2 = ComplexMatrix::identity(2);
        let pa = Projection::new(kron(p0.matrix(), &i2)).unwrap();
        let pb = Projection::new(kron(&i2, p1.matrix())).unwrap();
        assert!(is_compatible(&pa, &pb).unwrap());
    }

    #[test]
    fn automorphism_checks() {
        let sample = vec![
            Projection::zero(2),
            Projection::identity(2),
            Projection::onto_vector(&ket0()).unwrap(),
            Projection::onto_vector(&ket1()).unwrap(),
        ];
        assert!(check_automorphism(&ComplexMatrix::identity(2), &sample).unwrap());
        assert!(check_automorphism(&gates::hadamard(), &sample).unwrap());

        let bad = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(
            check_automorphism(&bad, &sample),
            Err(QprobError::NotUnitary(_))
        ));
    }

    #[test]
    fn conditional_expectation_unital_and_tower() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a = SpectralDecomposition::of(&gates::sigma_z(), 1e-8).unwrap();
        let state = random_state(&mut rng, 2);

        let ce_i = conditional_expectation(&ComplexMatrix::identity(2), &a, &state).unwrap();
        assert!(ce_i.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-10);

        // d = A reconstructs A; check through the tower property.
        let obs = a.reconstruct();
        let ce_a = conditional_expectation(&obs, &a, &state).unwrap();
        for p in &a.projectors {
            let lhs = state.rho().matmul(&ce_a).matmul(p.matrix()).trace();
            let rhs = state.rho().matmul(&obs).matmul(p.matrix()).trace();
            assert!((lhs - rhs).norm() < 1e-9);
        }

        // σx is not in the commutant of σz's projectors.
        assert!(matches!(
            conditional_expectation(&gates::sigma_x(), &a, &QuantumState::maximally_mixed(2)),
            Err(QprobError::NotConditionable(_))
        ));
    }

    #[test]
    fn conditional_expectation_null_event() {
        let a = SpectralDecomposition::of(&gates::sigma_z(), 1e-8).unwrap();
        let state = QuantumState::pure(&ket0()).unwrap();
        // |0⟩ gives probability zero to one σz eigenprojector.
        assert!(matches!(
            conditional_expectation(&gates::sigma_z(), &a, &state),
            Err(QprobError::NullEvent)
        ));
    }

    #[test]
    fn xprime_swap() {
        let basis: Vec<ComplexVector> = (0..2).map(|i| ComplexVector::basis(2, i)).collect();
        let x = build_xprime(0, 0, &basis).unwrap();
        assert!(x.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let x01 = build_xprime(0, 1, &basis).unwrap();
        assert!(x01.sub(&gates::sigma_x()).max_abs() < 1e-15);

        for dim in 2..=5 {
            let basis: Vec<ComplexVector> =
                (0..dim).map(|i| ComplexVector::basis(dim, i)).collect();
            for a in 0..dim {
                for b in 0..dim {
                    let x = build_xprime(a, b, &basis).unwrap();
                    assert!(x.is_unitary(1e-12));
                    assert!(x.matmul(&x).sub(&ComplexMatrix::identity(dim)).max_abs() < 1e-12);
                }
            }
        }
        assert!(build_xprime(5, 0, &basis).is_err());
    }

    #[test]
    fn probe_copies_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dim in 2..=4 {
            // Non-degenerate random Hermitian observable.
            let mut diag = Vec::new();
            for k in 0..dim {
                diag.push(c(k as f64 + rng.random_range(0.0..0.5), 0.0));
            }
            let basis_change = random_unitary(&mut rng, dim);
            let obs = basis_change
                .matmul(&ComplexMatrix::diag(&diag))
                .matmul(&basis_change.dagger());
            let spec = SpectralDecomposition::of(&obs, 1e-6).unwrap();
            let probe = build_probe_unitary(&spec, 1 % dim).unwrap();
            let state = random_state(&mut rng, dim);
            for c_out in 0..dim {
                assert!(probe.copy_identity_residual(c_out) < 1e-10);
                let ratio = probe.conditional_ratio(&state, c_out).unwrap();
                assert!((ratio - 1.0).abs() < 1e-10, "ratio {}", ratio);
                let stat = probe.pointer_statistic(&state, c_out);
                let direct = state
                    .rho()
                    .matmul(spec.projectors[c_out].matrix())
                    .trace()
                    .re;
                assert!((stat - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn probe_rejects_degenerate_observable() {
        let spec = SpectralDecomposition::of(&ComplexMatrix::identity(3), 1e-8).unwrap();
        assert!(matches!(
            build_probe_unitary(&spec, 0),
            Err(QprobError::DegenerateSpectrum(_, _))
        ));
    }

    #[test]
    fn disturbance_of_incompatible_probe() {
        let a = SpectralDecomposition::of(&gates::sigma_z(), 1e-8).unwrap();
        let b = SpectralDecomposition::of(&gates::sigma_x(), 1e-8).unwrap();
        let state = QuantumState::pure(&ket0()).unwrap();
        let d = probe_disturbance(&a, &b, &state).unwrap();
        assert!(d > 0.1, "σz/σx disturbance {}", d);

        // The same observable probed twice leaves the statistics alone.
        let d_same = probe_disturbance(&a, &a, &state).unwrap();
        assert!(d_same < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let diag_a = ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let diag_b = ComplexMatrix::diag(&[c(2.0, 0.0), c(-1.0, 0.0)]);
        let spec_a = SpectralDecomposition::of(&diag_a, 1e-8).unwrap();
        let spec_b = SpectralDecomposition::of(&diag_b, 1e-8).unwrap();
        let state = random_state(&mut rng, 2);
        assert!(probe_disturbance(&spec_a, &spec_b, &state).unwrap() < 1e-10);
    }
}
