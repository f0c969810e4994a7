//! Discrete-time quantum stochastic flows: structure maps, the flow recursion
//! with its Markov property, discrete noise martingales, the Hadamard walk,
//! and the embedding of classical Markov chains.
//!
//! A coined walk is driven by a unital *-homomorphism `Θ(X) = V†(X⊗I)V` with
//! `V = Λ_w(I⊗U_c)`; its coin matrix elements `θ_i^j` are the structure maps
//! and `θ_0^0` is the classical transition operator. The flow `j_n` lives on
//! the walker space tensored with an `n`-fold coin chain stabilized by `e_0`.

use crate::linalg::{self, kron, ComplexMatrix, ComplexVector, C64, UNITARITY_TOL};
use std::io::Write;
use thiserror::Error;

/// Largest dense dimension the flow representation is allowed to reach.
pub const CHAIN_DIM_CAP: usize = 512;
/// Largest number of coin-chain slots for dense noise operators (2^12 = 4096).
pub const NOISE_SLOT_CAP: usize = 12;
/// Largest classical state set accepted by the Markov embedding.
pub const MARKOV_STATE_CAP: usize = 8;

#[derive(Debug, Error)]
pub enum QwalkError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("coin matrix is not unitary (residual {0:.3e})")]
    NonUnitaryCoin(f64),
    #[error("truncation exceeded: flow dimension {0} past cap {CHAIN_DIM_CAP}")]
    TruncationExceeded(usize),
    #[error("noise chain of {0} slots past cap {NOISE_SLOT_CAP}")]
    NoiseCapExceeded(usize),
    #[error("pivot degenerate: first transition probability is zero")]
    PivotDegenerate,
    #[error("bad probability row: {0}")]
    BadProbabilities(String),
    #[error("inconsistent map table: {0}")]
    InconsistentMaps(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, QwalkError>;

/// Coin specification: a unitary on the coin space plus one walker shift per
/// coin outcome (in ring steps on the truncated walker).
#[derive(Debug, Clone)]
pub struct CoinSpec {
    pub coin: ComplexMatrix,
    pub shifts: Vec<i64>,
}

impl CoinSpec {
    pub fn new(coin: ComplexMatrix, shifts: Vec<i64>) -> Result<Self> {
        let defect = coin.unitarity_defect();
        if defect >= UNITARITY_TOL {
            return Err(QwalkError::NonUnitaryCoin(defect));
        }
        if coin.rows != shifts.len() {
            return Err(QwalkError::DimensionMismatch(format!(
                "coin dim {} vs {} shifts",
                coin.rows,
                shifts.len()
            )));
        }
        Ok(Self { coin, shifts })
    }

    /// The Hadamard coin with right/left unit shifts.
    pub fn hadamard() -> Self {
        Self {
            coin: linalg::gates::hadamard(),
            shifts: vec![1, -1],
        }
    }

    pub fn dim(&self) -> usize {
        self.coin.rows
    }

    /// Cyclic shift of the walker ring by `steps`.
    pub(crate) fn shift_matrix(walker_dim: usize, steps: i64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(walker_dim, walker_dim);
        let w = walker_dim as i64;
        for x in 0..walker_dim {
            let target = (((x as i64 + steps) % w) + w) % w;
            m.set(target as usize, x, C64::new(1.0, 0.0));
        }
        m
    }

    /// One-step unitary `V = Λ_w (I ⊗ U_c)` on walker ⊗ coin.
    pub fn step_unitary(&self, walker_dim: usize) -> ComplexMatrix {
        let d = self.dim();
        let mut cond_shift = ComplexMatrix::zeros(walker_dim * d, walker_dim * d);
        for (k, &s) in self.shifts.iter().enumerate() {
            let l = Self::shift_matrix(walker_dim, s);
            let mut sel = ComplexMatrix::zeros(d, d);
            sel.set(k, k, C64::new(1.0, 0.0));
            cond_shift = cond_shift.add(&kron(&l, &sel));
        }
        let coin_full = kron(&ComplexMatrix::identity(walker_dim), &self.coin);
        cond_shift.matmul(&coin_full)
    }
}

/// The `d×d` table of structure maps `θ_i^j`, stored as dense superoperators
/// on row-major vectorized walker operators.
#[derive(Debug, Clone)]
pub struct StructureMaps {
    pub coin_dim: usize,
    pub walker_dim: usize,
    super_maps: Vec<ComplexMatrix>,
}

/// Superoperator of `X ↦ A X B` on row-major `vec(X)`.
fn sandwich_superop(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let w = a.rows;
    let mut s = ComplexMatrix::zeros(w * w, w * w);
    for i in 0..w {
        for j in 0..w {
            for p in 0..w {
                for q in 0..w {
                    s.set(i * w + j, p * w + q, a.get(i, p) * b.get(q, j));
                }
            }
        }
    }
    s
}

impl StructureMaps {
    /// Structure maps of a coined walk on a cyclic walker of `walker_dim`
    /// positions: `θ_i^j(X) = Σ_k conj(U_c[k,i]) U_c[k,j] · L_k† X L_k`.
    pub fn from_coined(coin: &CoinSpec, walker_dim: usize) -> Result<Self> {
        if walker_dim < 2 {
            return Err(QwalkError::DimensionMismatch(
                "walker dimension must be at least 2".into(),
            ));
        }
        let d = coin.dim();
        let shifts: Vec<ComplexMatrix> = coin
            .shifts
            .iter()
            .map(|&s| CoinSpec::shift_matrix(walker_dim, s))
            .collect();
        let mut super_maps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut s = ComplexMatrix::zeros(walker_dim * walker_dim, walker_dim * walker_dim);
                for (k, l) in shifts.iter().enumerate() {
                    let weight = coin.coin.get(k, i).conj() * coin.coin.get(k, j);
                    if weight.norm_sqr() == 0.0 {
                        continue;
                    }
                    s = s.add(&sandwich_superop(&l.dagger(), l).scale(weight));
                }
                super_maps.push(s);
            }
        }
        Ok(Self { coin_dim: d, walker_dim, super_maps })
    }

    /// Structure maps of a classical Markov chain in random-map form:
    /// `θ_i^j(f) = Σ_k U[i,k] conj(U[j,k]) · C_k† f C_k` with `C_k` the
    /// composition operator of the measurable map `φ_k`.
    fn from_markov(unitary: &ComplexMatrix, phi_maps: &[Vec<usize>], states: usize) -> Self {
        let d = unitary.rows;
        let comps: Vec<ComplexMatrix> = phi_maps
            .iter()
            .map(|phi| {
                let mut c = ComplexMatrix::zeros(states, states);
                for (s, &target) in phi.iter().enumerate() {
                    c.set(target, s, C64::new(1.0, 0.0));
                }
                c
            })
            .collect();
        let mut super_maps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut s = ComplexMatrix::zeros(states * states, states * states);
                for (k, c) in comps.iter().enumerate() {
                    let weight = unitary.get(i, k) * unitary.get(j, k).conj();
                    if weight.norm_sqr() == 0.0 {
                        continue;
                    }
                    s = s.add(&sandwich_superop(&c.dagger(), c).scale(weight));
                }
                super_maps.push(s);
            }
        }
        Self { coin_dim: d, walker_dim: states, super_maps }
    }

    /// Apply `θ_i^j` to a walker operator.
    pub fn theta(&self, i: usize, j: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let w = self.walker_dim;
        let s = &self.super_maps[i * self.coin_dim + j];
        let mut out = ComplexMatrix::zeros(w, w);
        for row in 0..w * w {
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..w * w {
                let sv = s.get(row, col);
                if sv.norm_sqr() == 0.0 {
                    continue;
                }
                acc += sv * x.get(col / w, col % w);
            }
            out.set(row / w, row % w, acc);
        }
        out
    }

    /// Residual of unitality: `‖θ_0^0(I) − I‖`.
    pub fn unitality_defect(&self) -> f64 {
        let i = ComplexMatrix::identity(self.walker_dim);
        self.theta(0, 0, &i).sub(&i).max_abs()
    }
}

/// The flow `j_n` represented by its images on the walker-operator basis.
///
/// `images[a·w + b] = j_n(E_ab)` on the space walker ⊗ (coin chain of n
/// slots); `apply` extends linearly to arbitrary walker operators.
#[derive(Debug, Clone)]
pub struct Flow {
    pub n: usize,
    pub walker_dim: usize,
    pub coin_dim: usize,
    images: Vec<ComplexMatrix>,
}

impl Flow {
    /// `j_0(X) = X` (tensored with nothing yet).
    pub fn initial(walker_dim: usize, coin_dim: usize) -> Self {
        let mut images = Vec::with_capacity(walker_dim * walker_dim);
        for a in 0..walker_dim {
            for b in 0..walker_dim {
                let mut m = ComplexMatrix::zeros(walker_dim, walker_dim);
                m.set(a, b, C64::new(1.0, 0.0));
                images.push(m);
            }
        }
        Self { n: 0, walker_dim, coin_dim, images }
    }

    pub fn dim(&self) -> usize {
        self.walker_dim * self.coin_dim.pow(self.n as u32)
    }

    /// Advance one step: `j_n(X) = Σ_ij j_{n−1}(θ_i^j(X)) ⊗ |e_i⟩⟨e_j|`.
    pub fn step(&self, maps: &StructureMaps) -> Result<Flow> {
        if maps.walker_dim != self.walker_dim || maps.coin_dim != self.coin_dim {
            return Err(QwalkError::DimensionMismatch(
                "flow/structure-map shape".into(),
            ));
        }
        let new_dim = self.dim() * self.coin_dim;
        if new_dim > CHAIN_DIM_CAP {
            return Err(QwalkError::TruncationExceeded(new_dim));
        }
        let w = self.walker_dim;
        let d = self.coin_dim;
        let mut images = Vec::with_capacity(w * w);
        for a in 0..w {
            for b in 0..w {
                let mut e_ab = ComplexMatrix::zeros(w, w);
                e_ab.set(a, b, C64::new(1.0, 0.0));
                let mut acc = ComplexMatrix::zeros(new_dim, new_dim);
                for i in 0..d {
                    for j in 0..d {
                        let y = maps.theta(i, j, &e_ab);
                        let prev = self.apply(&y);
                        let mut e_ij = ComplexMatrix::zeros(d, d);
                        e_ij.set(i, j, C64::new(1.0, 0.0));
                        acc = acc.add(&kron(&prev, &e_ij));
                    }
                }
                images.push(acc);
            }
        }
        Ok(Flow {
            n: self.n + 1,
            walker_dim: w,
            coin_dim: d,
            images,
        })
    }

    /// Evaluate `j_n(X)` for an arbitrary walker operator by linearity.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let w = self.walker_dim;
        assert_eq!(x.rows, w, "flow argument must be a walker operator");
        let dim = self.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for a in 0..w {
            for b in 0..w {
                let coeff = x.get(a, b);
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                out = out.add(&self.images[a * w + b].scale(coeff));
            }
        }
        out
    }
}

/// Conditional expectation `E_{m]}` of an operator living on
/// walker ⊗ (coin chain of `n` slots): the future slots `m+1..n` are averaged
/// in the stabilizing vector `phi`, leaving an operator on the first `m`.
pub fn condition_on_past(
    op: &ComplexMatrix,
    walker_dim: usize,
    coin_dim: usize,
    n: usize,
    m: usize,
    phi: &ComplexVector,
) -> Result<ComplexMatrix> {
    if m > n {
        return Err(QwalkError::DimensionMismatch(format!(
            "condition_on_past: target step {m} past source step {n}"
        )));
    }
    let full = walker_dim * coin_dim.pow(n as u32);
    if op.rows != full || op.cols != full {
        return Err(QwalkError::DimensionMismatch(format!(
            "operator is {}x{}, expected {}",
            op.rows, op.cols, full
        )));
    }
    if phi.dim() != coin_dim {
        return Err(QwalkError::DimensionMismatch(
            "stabilizing vector must live on the coin space".into(),
        ));
    }
    let kept = walker_dim * coin_dim.pow(m as u32);
    let future = coin_dim.pow((n - m) as u32);
    // Amplitude of the product vector phi^{⊗(n−m)} at a future multi-index.
    let phi_amp = |mut idx: usize| -> C64 {
        let mut amp = C64::new(1.0, 0.0);
        for _ in 0..(n - m) {
            amp *= phi.data[idx % coin_dim];
            idx /= coin_dim;
        }
        amp
    };
    let mut out = ComplexMatrix::zeros(kept, kept);
    for i in 0..kept {
        for j in 0..kept {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..future {
                let amp_a = phi_amp(a);
                if amp_a.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..future {
                    let amp_b = phi_amp(b);
                    if amp_b.norm_sqr() == 0.0 {
                        continue;
                    }
                    acc += amp_a.conj() * op.get(i * future + a, j * future + b) * amp_b;
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Position-space amplitudes of the Hadamard walk at step `n`, indexed by
/// `x ∈ [−n, n]`.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub n: usize,
    psi_r: Vec<C64>,
    psi_l: Vec<C64>,
}

impl WalkState {
    /// Walker localized at the origin in the right coin state.
    pub fn localized_right() -> Self {
        Self {
            n: 0,
            psi_r: vec![C64::new(1.0, 0.0)],
            psi_l: vec![C64::new(0.0, 0.0)],
        }
    }

    /// Start from arbitrary coin amplitudes at the origin (normalized).
    pub fn localized(right: C64, left: C64) -> Self {
        let norm = (right.norm_sqr() + left.norm_sqr()).sqrt();
        Self {
            n: 0,
            psi_r: vec![right / norm],
            psi_l: vec![left / norm],
        }
    }

    pub fn amp_r(&self, x: i64) -> C64 {
        self.amp(&self.psi_r, x)
    }

    pub fn amp_l(&self, x: i64) -> C64 {
        self.amp(&self.psi_l, x)
    }

    fn amp(&self, side: &[C64], x: i64) -> C64 {
        let n = self.n as i64;
        if x < -n || x > n {
            C64::new(0.0, 0.0)
        } else {
            side[(x + n) as usize]
        }
    }

    pub fn norm(&self) -> f64 {
        self.psi_r
            .iter()
            .chain(self.psi_l.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// One coined step:
    /// `ψ_R(x, n+1) = [ψ_R(x−1, n) + ψ_L(x−1, n)]/√2`,
    /// `ψ_L(x, n+1) = [ψ_R(x+1, n) − ψ_L(x+1, n)]/√2`.
    pub fn hadamard_step(&self) -> WalkState {
        let n1 = self.n + 1;
        let len = 2 * n1 + 1;
        let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let mut psi_r = vec![C64::new(0.0, 0.0); len];
        let mut psi_l = vec![C64::new(0.0, 0.0); len];
        for (idx, (r, l)) in psi_r.iter_mut().zip(psi_l.iter_mut()).enumerate() {
            let x = idx as i64 - n1 as i64;
            *r = (self.amp_r(x - 1) + self.amp_l(x - 1)) * inv_sqrt2;
            *l = (self.amp_r(x + 1) - self.amp_l(x + 1)) * inv_sqrt2;
        }
        WalkState { n: n1, psi_r, psi_l }
    }

    pub fn steps(&self, count: usize) -> WalkState {
        let mut s = self.clone();
        for _ in 0..count {
            s = s.hadamard_step();
        }
        s
    }

    /// `P(x) = |ψ_R(x)|² + |ψ_L(x)|²` over `x ∈ [−n, n]`.
    pub fn position_distribution(&self) -> Vec<(i64, f64)> {
        let n = self.n as i64;
        (-n..=n)
            .map(|x| (x, self.amp_r(x).norm_sqr() + self.amp_l(x).norm_sqr()))
            .collect()
    }

    /// Standard deviation of the position distribution.
    pub fn position_std(&self) -> f64 {
        let dist = self.position_distribution();
        let mean: f64 = dist.iter().map(|(x, p)| *x as f64 * p).sum();
        let var: f64 = dist
            .iter()
            .map(|(x, p)| (*x as f64 - mean).powi(2) * p)
            .sum();
        var.sqrt()
    }

    /// Emit the distribution as CSV with an `x,prob` header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,prob")?;
        for (x, p) in self.position_distribution() {
            writeln!(w, "{},{:?}", x, p)?;
        }
        Ok(())
    }
}

/// Dense discrete noise martingales `A_n`, `A†_n`, `Λ_n` on a coin chain of
/// `chain_len` qubit slots.
#[derive(Debug, Clone)]
pub struct NoiseOps {
    pub annihilation: ComplexMatrix,
    pub creation: ComplexMatrix,
    pub gauge: ComplexMatrix,
}

/// Place a local 2×2 operator at slot `k` (1-based) of the chain.
pub fn slot_operator(local: &ComplexMatrix, k: usize, chain_len: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for slot in 1..=chain_len {
        let f = if slot == k {
            local.clone()
        } else {
            ComplexMatrix::identity(2)
        };
        acc = kron(&acc, &f);
    }
    acc
}

/// Basis vector `e_U` of the chain: slot `k` is excited exactly when `k ∈ u`.
pub fn chain_basis(u: &[usize], chain_len: usize) -> ComplexVector {
    let mut idx = 0usize;
    for slot in 1..=chain_len {
        idx = idx * 2 + usize::from(u.contains(&slot));
    }
    ComplexVector::basis(1 << chain_len, idx)
}

/// Partial sums `A_n = a_1 + … + a_n`, `A†_n`, `Λ_n = Σ a_k† a_k` with
/// `a_k = |e_0⟩⟨e_1|` at slot `k`.
pub fn discrete_noise_ops(n: usize, chain_len: usize) -> Result<NoiseOps> {
    if chain_len > NOISE_SLOT_CAP {
        return Err(QwalkError::NoiseCapExceeded(chain_len));
    }
    if n > chain_len {
        return Err(QwalkError::DimensionMismatch(format!(
            "martingale index {n} past chain length {chain_len}"
        )));
    }
    let dim = 1 << chain_len;
    let lower = linalg::gates::lowering();
    let counter = lower.dagger().matmul(&lower);
    let mut annihilation = ComplexMatrix::zeros(dim, dim);
    let mut gauge = ComplexMatrix::zeros(dim, dim);
    for k in 1..=n {
        annihilation = annihilation.add(&slot_operator(&lower, k, chain_len));
        gauge = gauge.add(&slot_operator(&counter, k, chain_len));
    }
    let creation = annihilation.dagger();
    Ok(NoiseOps { annihilation, creation, gauge })
}

/// Number of excited slots among the first `n`: the actual `Λ_n` eigenvalue
/// on `e_U`.
pub fn gauge_count(u: &[usize], n: usize) -> usize {
    u.iter().filter(|&&k| k >= 1 && k <= n).count()
}

/// The signed weight `n − 2|U|` (kept alongside [`gauge_count`] for
/// inspection; it is not the gauge eigenvalue).
pub fn signed_weight(u: &[usize], n: usize) -> i64 {
    n as i64 - 2 * u.len() as i64
}

/// Row-stochastic transition matrix of a classical chain.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub probs: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for row in &probs {
            if row.len() != probs.len() {
                return Err(QwalkError::BadProbabilities("not square".into()));
            }
            if row.iter().any(|&p| p < -1e-12) {
                return Err(QwalkError::BadProbabilities("negative entry".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() >= 1e-12 {
                return Err(QwalkError::BadProbabilities(format!("row sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    /// `(T^steps f)(start)`: the classical n-step expectation of `f`.
    pub fn expectation(&self, f: &[f64], start: usize, steps: usize) -> f64 {
        let mut current = f.to_vec();
        for _ in 0..steps {
            let next: Vec<f64> = (0..self.states())
                .map(|s| {
                    self.probs[s]
                        .iter()
                        .zip(current.iter())
                        .map(|(p, v)| p * v)
                        .sum()
                })
                .collect();
            current = next;
        }
        current[start]
    }
}

fn validate_probability_row(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(QwalkError::BadProbabilities("empty row".into()));
    }
    if p.iter().any(|&x| x < -1e-12) {
        return Err(QwalkError::BadProbabilities("negative entry".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() >= 1e-9 {
        return Err(QwalkError::BadProbabilities(format!("sums to {sum}")));
    }
    Ok(())
}

/// The real orthogonal matrix with first row `(√p_0, …, √p_{d−1})`, first
/// column `(√p_0, −√p_1, …, −√p_{d−1})ᵀ`, and lower block `I − Q` with
/// `q_ij = √(p_i p_j)/(1 + √p_0)`.
pub fn markov_chain_unitary(p_row: &[f64]) -> Result<ComplexMatrix> {
    validate_probability_row(p_row)?;
    if p_row[0] <= 1e-12 {
        return Err(QwalkError::PivotDegenerate);
    }
    let d = p_row.len();
    let sqrt_p: Vec<f64> = p_row.iter().map(|&p| p.max(0.0).sqrt()).collect();
    let denom = 1.0 + sqrt_p[0];
    let mut u = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        u.set(0, j, C64::new(sqrt_p[j], 0.0));
    }
    for i in 1..d {
        u.set(i, 0, C64::new(-sqrt_p[i], 0.0));
        for j in 1..d {
            let q = sqrt_p[i] * sqrt_p[j] / denom;
            let val = if i == j { 1.0 - q } else { -q };
            u.set(i, j, C64::new(val, 0.0));
        }
    }
    Ok(u)
}

/// A classical Markov chain embedded as a quantum flow.
#[derive(Debug, Clone)]
pub struct MarkovEmbedding {
    pub unitary: ComplexMatrix,
    pub maps: StructureMaps,
    pub transition: TransitionMatrix,
}

/// Embed the random-map chain `(p, φ_0, …, φ_{d−1})` on `states` classical
/// states: `Θ(f) = U diag(f∘φ_0, …, f∘φ_{d−1}) U†` with `U` from
/// [`markov_chain_unitary`]. The induced transition matrix is
/// `T[s,t] = Σ_{k: φ_k(s)=t} p_k`.
pub fn embed_markov_chain(
    p_row: &[f64],
    phi_maps: &[Vec<usize>],
    states: usize,
) -> Result<MarkovEmbedding> {
    if states == 0 || states > MARKOV_STATE_CAP {
        return Err(QwalkError::InconsistentMaps(format!(
            "state set of cardinality {states} (cap {MARKOV_STATE_CAP})"
        )));
    }
    if phi_maps.len() != p_row.len() {
        return Err(QwalkError::InconsistentMaps(format!(
            "{} maps for {} probabilities",
            phi_maps.len(),
            p_row.len()
        )));
    }
    for phi in phi_maps {
        if phi.len() != states {
            return Err(QwalkError::InconsistentMaps(
                "map table length differs from state count".into(),
            ));
        }
        if phi.iter().any(|&t| t >= states) {
            return Err(QwalkError::InconsistentMaps("map target out of range".into()));
        }
    }
    let unitary = markov_chain_unitary(p_row)?;
    let maps = StructureMaps::from_markov(&unitary, phi_maps, states);
    let mut probs = vec![vec![0.0f64; states]; states];
    for (k, phi) in phi_maps.iter().enumerate() {
        for (s, &t) in phi.iter().enumerate() {
            probs[s][t] += p_row[k];
        }
    }
    let transition = TransitionMatrix::new(probs)?;
    Ok(MarkovEmbedding { unitary, maps, transition })
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

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        m
    }

    fn vacuum() -> ComplexVector {
        ComplexVector::basis(2, 0)
    }

    #[test]
    fn identity_coin_gives_kronecker_delta_maps() {
        let coin = CoinSpec::new(ComplexMatrix::identity(2), vec![0, 0]).unwrap();
        let maps = StructureMaps::from_coined(&coin, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = random_matrix(&mut rng, 3);
        for i in 0..2 {
            for j in 0..2 {
                let out = maps.theta(i, j, &x);
                if i == j {
                    assert!(out.sub(&x).max_abs() < 1e-12);
                } else {
                    assert!(out.max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_unitary_coin_rejected() {
        let bad = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(
            CoinSpec::new(bad, vec![1, -1]),
            Err(QwalkError::NonUnitaryCoin(_))
        ));
    }

    #[test]
    fn hadamard_maps_are_unital_and_linear() {
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), 4).unwrap();
        assert!(maps.unitality_defect() < 1e-12);

        // Θ(I) = I on the full space.
        let coin = CoinSpec::hadamard();
        let v = coin.step_unitary(4);
        assert!(v.is_unitary(1e-12));
        let theta_i = v
            .dagger()
            .matmul(&kron(&ComplexMatrix::identity(4), &ComplexMatrix::identity(2)))
            .matmul(&v);
        assert!(theta_i.sub(&ComplexMatrix::identity(8)).max_abs() < 1e-12);

        // Linearity probe on the operator basis.
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x = random_matrix(&mut rng, 4);
        let y = random_matrix(&mut rng, 4);
        let alpha = c(0.3, -0.8);
        for i in 0..2 {
            for j in 0..2 {
                let lhs = maps.theta(i, j, &x.scale(alpha).add(&y));
                let rhs = maps.theta(i, j, &x).scale(alpha).add(&maps.theta(i, j, &y));
                assert!(lhs.sub(&rhs).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hadamard_theta00_mixes_both_shifts() {
        // θ_0^0 = ½(L⁺†XL⁺ + L⁻†XL⁻): both shifts appear, not a single
        // shifted compression.
        let w = 4;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let mut x = ComplexMatrix::zeros(w, w);
        x.set(0, 0, c(1.0, 0.0));
        let out = maps.theta(0, 0, &x);
        let up = CoinSpec::shift_matrix(w, 1);
        let down = CoinSpec::shift_matrix(w, -1);
        let expect = up
            .dagger()
            .matmul(&x)
            .matmul(&up)
            .add(&down.dagger().matmul(&x).matmul(&down))
            .scale(c(0.5, 0.0));
        assert!(out.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn flow_base_case_and_star_property() {
        let w = 3;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let flow0 = Flow::initial(w, 2);
        let i = ComplexMatrix::identity(w);
        assert!(flow0.apply(&i).sub(&i).max_abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = random_matrix(&mut rng, w);
        let flow2 = flow0.step(&maps).unwrap().step(&maps).unwrap();
        let jx = flow2.apply(&x);
        let jx_dag = flow2.apply(&x.dagger());
        assert!(jx.dagger().sub(&jx_dag).max_abs() < 1e-9);
    }

    #[test]
    fn flow_homomorphism_small_instances() {
        let w = 3;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mut flow = Flow::initial(w, 2);
        for _ in 0..3 {
            flow = flow.step(&maps).unwrap();
            let x = random_matrix(&mut rng, w);
            let y = random_matrix(&mut rng, w);
            let lhs = flow.apply(&x.matmul(&y));
            let rhs = flow.apply(&x).matmul(&flow.apply(&y));
            assert!(lhs.sub(&rhs).max_abs() < 1e-9);
        }
    }

    #[test]
    fn flow_markov_property() {
        // E_{n−1]}(j_n(X)) = j_{n−1}(θ_0^0(X)) for d = 2, n ≤ 4.
        let w = 3;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let mut prev = Flow::initial(w, 2);
        for n in 1..=4usize {
            let next = prev.step(&maps).unwrap();
            let x = random_matrix(&mut rng, w);
            let conditioned =
                condition_on_past(&next.apply(&x), w, 2, n, n - 1, &vacuum()).unwrap();
            let expected = prev.apply(&maps.theta(0, 0, &x));
            assert!(
                conditioned.sub(&expected).max_abs() < 1e-9,
                "markov residual at n={n}"
            );
            prev = next;
        }
    }

    #[test]
    fn conditioning_tower_property() {
        let w = 2;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let flow3 = Flow::initial(w, 2)
            .step(&maps)
            .unwrap()
            .step(&maps)
            .unwrap()
            .step(&maps)
            .unwrap();
        let x = random_matrix(&mut rng, w);
        let jx = flow3.apply(&x);

        // condition_on_past(j_0(X)) = X.
        let f0 = Flow::initial(w, 2);
        let cond0 = condition_on_past(&f0.apply(&x), w, 2, 0, 0, &vacuum()).unwrap();
        assert!(cond0.sub(&x).max_abs() < 1e-12);

        // Tower E_m E_n = E_m for m ≤ n, and idempotence at fixed step.
        let to2 = condition_on_past(&jx, w, 2, 3, 2, &vacuum()).unwrap();
        let to1_via2 = condition_on_past(&to2, w, 2, 2, 1, &vacuum()).unwrap();
        let to1 = condition_on_past(&jx, w, 2, 3, 1, &vacuum()).unwrap();
        assert!(to1_via2.sub(&to1).max_abs() < 1e-12);
        let again = condition_on_past(&to1, w, 2, 1, 1, &vacuum()).unwrap();
        assert!(again.sub(&to1).max_abs() < 1e-15);
    }

    #[test]
    fn flow_truncation_guard() {
        let w = 2;
        let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).unwrap();
        let mut flow = Flow::initial(w, 2);
        let mut hit_cap = false;
        for _ in 0..13 {
            match flow.step(&maps) {
                Ok(f) => flow = f,
                Err(QwalkError::TruncationExceeded(_)) => {
                    hit_cap = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(hit_cap);
    }

    #[test]
    fn walk_first_steps_by_hand() {
        let s0 = WalkState::localized_right();
        let s1 = s0.hadamard_step();
        let d1 = s1.position_distribution();
        let p = |dist: &[(i64, f64)], x: i64| {
            dist.iter().find(|(xx, _)| *xx == x).map(|(_, p)| *p).unwrap_or(0.0)
        };
        assert!((p(&d1, 1) - 0.5).abs() < 1e-12);
        assert!((p(&d1, -1) - 0.5).abs() < 1e-12);

        let s2 = s1.hadamard_step();
        let d2 = s2.position_distribution();
        assert!((p(&d2, 2) - 0.25).abs() < 1e-12);
        assert!((p(&d2, 0) - 0.5).abs() < 1e-12);
        assert!((p(&d2, -2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn walk_norm_and_parity() {
        let s = WalkState::localized_right().steps(200);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        for (x, p) in s.position_distribution() {
            if (x.rem_euclid(2)) as usize != s.n % 2 {
                assert!(p < 1e-30, "odd-parity support at {x}");
            }
        }
        let total: f64 = s.position_distribution().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    /// Brute-force oracle: the coined step as one dense unitary on a ring
    /// large enough that the walk never wraps.
    fn brute_force_distribution(steps: usize) -> Vec<(i64, f64)> {
        let ring = 2 * steps + 3;
        let half = (ring / 2) as i64;
        let coin = CoinSpec::hadamard();
        let u = coin.step_unitary(ring);
        // Start at the ring midpoint, coin R.
        let mut v = ComplexVector::zeros(ring * 2);
        v.data[(half as usize) * 2] = c(1.0, 0.0);
        for _ in 0..steps {
            v = u.apply(&v);
        }
        (0..ring)
            .map(|pos| {
                let x = pos as i64 - half;
                let p = v.data[pos * 2].norm_sqr() + v.data[pos * 2 + 1].norm_sqr();
                (x, p)
            })
            .collect()
    }

    #[test]
    fn walk_matches_full_unitary_oracle() {
        for steps in [1usize, 7, 20] {
            let s = WalkState::localized_right().steps(steps);
            let oracle = brute_force_distribution(steps);
            for (x, p) in s.position_distribution() {
                let po = oracle
                    .iter()
                    .find(|(xx, _)| *xx == x)
                    .map(|(_, p)| *p)
                    .unwrap();
                assert!((p - po).abs() < 1e-10, "x={x}: {p} vs {po}");
            }
        }
    }

    #[test]
    fn walk_is_ballistic() {
        let s50 = WalkState::localized_right().steps(50);
        let s100 = s50.steps(50);
        let ratio = s100.position_std() / s50.position_std();
        assert!(
            (1.85..=2.05).contains(&ratio),
            "ballistic ratio {ratio} out of window"
        );
    }

    #[test]
    fn walk_csv_shape() {
        let mut buf = Vec::new();
        WalkState::localized_right().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,prob\n0,1.0\n");
    }

    #[test]
    fn noise_ops_slot_algebra() {
        let chain = 4;
        let ops1 = discrete_noise_ops(1, chain).unwrap();
        // A_1 e_{{1}} = e_∅.
        let excited = chain_basis(&[1], chain);
        let ground = chain_basis(&[], chain);
        let out = ops1.annihilation.apply(&excited);
        assert!(out.sub(&ground).norm() < 1e-14);

        // Disjoint slots commute: [a_1, a_2†] = 0.
        let a1 = slot_operator(&gates::lowering(), 1, chain);
        let a2 = slot_operator(&gates::lowering(), 2, chain);
        let comm = crate::linalg::commutator(&a1, &a2.dagger()).unwrap();
        assert!(comm.max_abs() < 1e-15);

        // a_k² = 0 and λ_k² = λ_k.
        assert!(a1.matmul(&a1).max_abs() < 1e-15);
        let lam = a1.dagger().matmul(&a1);
        assert!(lam.matmul(&lam).sub(&lam).max_abs() < 1e-15);

        // Vacuum expectation of the gauge vanishes.
        let ops = discrete_noise_ops(chain, chain).unwrap();
        let vac = chain_basis(&[], chain);
        let exp = vac.inner(&ops.gauge.apply(&vac));
        assert!(exp.norm() < 1e-15);
    }

    #[test]
    fn gauge_eigenvalue_is_the_count() {
        let chain = 5;
        let ops = discrete_noise_ops(3, chain).unwrap();
        let u = vec![1usize, 3, 5];
        let e_u = chain_basis(&u, chain);
        let out = ops.gauge.apply(&e_u);
        let count = gauge_count(&u, 3) as f64;
        assert!(out.sub(&e_u.scale(c(count, 0.0))).norm() < 1e-13);
        // The printed signed weight disagrees with the spectral action here.
        assert_ne!(signed_weight(&u, 3), count as i64);
    }

    #[test]
    fn noise_cap() {
        assert!(matches!(
            discrete_noise_ops(1, 13),
            Err(QwalkError::NoiseCapExceeded(13))
        ));
    }

    #[test]
    fn markov_unitary_closed_forms() {
        let u = markov_chain_unitary(&[1.0, 0.0]).unwrap();
        assert!(u.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-12);

        let u = markov_chain_unitary(&[0.25, 0.75]).unwrap();
        let r3 = 3f64.sqrt() / 2.0;
        let expect = ComplexMatrix::from_real_rows(&[vec![0.5, r3], vec![-r3, 0.5]]);
        assert!(u.sub(&expect).max_abs() < 1e-12);

        assert!(matches!(
            markov_chain_unitary(&[0.0, 1.0]),
            Err(QwalkError::PivotDegenerate)
        ));
    }

    #[test]
    fn markov_unitary_random_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for d in 2..=6 {
            let mut row: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            let u = markov_chain_unitary(&row).unwrap();
            assert!(u.unitarity_defect() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn embedding_identity_chain() {
        let emb = embed_markov_chain(&[0.5, 0.5], &[vec![0, 1], vec![0, 1]], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let f = ComplexMatrix::diag(&[c(rng.random_range(0.0..1.0), 0.0), c(2.0, 0.0)]);
        let out = emb.maps.theta(0, 0, &f);
        assert!(out.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn embedding_two_state_swap_chain() {
        let emb = embed_markov_chain(&[0.5, 0.5], &[vec![0, 1], vec![1, 0]], 2).unwrap();
        let f = ComplexMatrix::diag(&[c(3.0, 0.0), c(-1.0, 0.0)]);
        // θ_0^0(f)(s) = ½ f(s) + ½ f(swap(s)) = 1 for both states.
        let out = emb.maps.theta(0, 0, &f);
        let expect = ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(out.sub(&expect).max_abs() < 1e-12);
        assert!((emb.transition.probs[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn embedding_vacuum_flow_matches_classical_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let p = {
            let a: f64 = rng.random_range(0.2..0.8);
            vec![a, 1.0 - a]
        };
        let emb = embed_markov_chain(&p, &[vec![0, 1], vec![1, 0]], 2).unwrap();
        let f_values = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = ComplexMatrix::diag(&[c(f_values[0], 0.0), c(f_values[1], 0.0)]);

        let mut flow = Flow::initial(2, 2);
        for n in 1..=5usize {
            flow = flow.step(&emb.maps).unwrap();
            let jf = flow.apply(&f);
            let conditioned = condition_on_past(&jf, 2, 2, n, 0, &vacuum()).unwrap();
            for s in 0..2 {
                let classical = emb.transition.expectation(&f_values, s, n);
                let quantum = conditioned.get(s, s).re;
                assert!(
                    (classical - quantum).abs() < 1e-10,
                    "n={n} s={s}: {classical} vs {quantum}"
                );
                // Off-diagonals stay zero for diagonal f.
                assert!(conditioned.get(s, 1 - s).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn embedding_input_validation() {
        assert!(embed_markov_chain(&[0.5, 0.5], &[vec![0, 1]], 2).is_err());
        assert!(embed_markov_chain(&[0.5, 0.5], &[vec![0, 1], vec![0, 5]], 2).is_err());
        assert!(embed_markov_chain(&[0.5, 0.5], &[vec![0], vec![1]], 2).is_err());
    }

    #[test]
    fn step_unitary_is_lattice_automorphism() {
        use crate::qprob::{check_automorphism, Projection};
        let coin = CoinSpec::hadamard();
        let v = coin.step_unitary(3);
        assert!(v.is_unitary(1e-12));
        let dim = v.rows;
        let sample = vec![
            Projection::zero(dim),
            Projection::identity(dim),
            Projection::onto_vector(&ComplexVector::basis(dim, 0)).unwrap(),
            Projection::onto_span(&[ComplexVector::basis(dim, 1), ComplexVector::basis(dim, 4)])
                .unwrap(),
        ];
        assert!(check_automorphism(&v, &sample).unwrap());
    }
}
