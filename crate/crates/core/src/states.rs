//! Named qubit states, parametric families, ensembles and random generators.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::tensor::{kron, CMatrix, Contraction, DensityMatrix, RegisterShape, C64, DEFAULT_TOL};

/// Normalized amplitude vector over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    shape: RegisterShape,
    amps: Vec<C64>,
}

impl PureState {
    /// Wrap an amplitude vector; its norm must be 1 within [`DEFAULT_TOL`].
    pub fn new(shape: RegisterShape, amps: Vec<C64>) -> Result<Self> {
        check_len(&shape, amps.len())?;
        let norm = norm(&amps);
        if (norm - 1.0).abs() > DEFAULT_TOL {
            return invalid(format!("amplitude vector has norm {norm}, expected 1"));
        }
        Ok(Self { shape, amps })
    }

    /// Wrap a non-zero vector after rescaling it to unit norm.
    pub fn normalized(shape: RegisterShape, mut amps: Vec<C64>) -> Result<Self> {
        check_len(&shape, amps.len())?;
        let norm = norm(&amps);
        if !norm.is_finite() || norm <= 0.0 {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self { shape, amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis(shape: RegisterShape, index: usize) -> Result<Self> {
        let d = shape.total_dim();
        if index >= d {
            return invalid(format!(
                "basis index {index} out of range for dimension {d}"
            ));
        }
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { shape, amps })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self> ⊗ |other>`.
    pub fn kron(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState {
            shape: self.shape.concat(&other.shape),
            amps,
        }
    }

    /// `|psi><psi|`.
    pub fn to_density(&self) -> DensityMatrix {
        let v = DVector::from_column_slice(&self.amps);
        DensityMatrix::from_parts_unchecked(self.shape.clone(), &v * v.adjoint())
    }

    /// Reduced state on `keep`, contracted straight from the amplitudes.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = self.shape.subset(keep)?;
        let layout = Contraction::new(&self.shape, &keep);
        Ok(DensityMatrix::from_parts_unchecked(
            self.shape.restrict(&keep),
            layout.reduce_vector(&self.amps),
        ))
    }

    /// Apply one `d_k × d_k` matrix to each subsystem `k`.
    pub fn apply_local(&self, ops: &[CMatrix]) -> Result<PureState> {
        let dims = self.shape.dims();
        if ops.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} local operators for {} subsystems",
                ops.len(),
                dims.len()
            )));
        }
        let mut amps = self.amps.clone();
        let total = amps.len();
        let mut stride = total;
        for (k, op) in ops.iter().enumerate() {
            let d = dims[k];
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "operator {k} is {}x{}, subsystem dimension is {d}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            stride /= d;
            let block = stride * d;
            let mut scratch = vec![C64::new(0.0, 0.0); d];
            for hi in (0..total).step_by(block) {
                for lo in 0..stride {
                    for (r, s) in scratch.iter_mut().enumerate() {
                        *s = (0..d)
                            .map(|c| op[(r, c)] * amps[hi + c * stride + lo])
                            .sum();
                    }
                    for (r, s) in scratch.iter().enumerate() {
                        amps[hi + r * stride + lo] = *s;
                    }
                }
            }
        }
        PureState::normalized(self.shape.clone(), amps)
    }
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_len(shape: &RegisterShape, len: usize) -> Result<()> {
    if shape.total_dim() != len {
        return Err(Error::ShapeMismatch(format!(
            "{len} amplitudes for register dimension {}",
            shape.total_dim()
        )));
    }
    Ok(())
}

/// A pure or mixed state; measures accept either.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn shape(&self) -> &RegisterShape {
        match self {
            State::Pure(p) => p.shape(),
            State::Mixed(m) => m.shape(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Mixed(m) => m.clone(),
        }
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        match self {
            State::Pure(p) => p.marginal(keep),
            State::Mixed(m) => m.partial_trace(keep),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, State::Pure(_))
    }
}

impl From<PureState> for State {
    fn from(p: PureState) -> Self {
        State::Pure(p)
    }
}

impl From<DensityMatrix> for State {
    fn from(m: DensityMatrix) -> Self {
        State::Mixed(m)
    }
}

/// Probability-weighted decomposition `{p_i, member_i}` over one register.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    members: Vec<State>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, members: Vec<State>) -> Result<Self> {
        if weights.len() != members.len() {
            return invalid(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            ));
        }
        if members.is_empty() {
            return invalid("ensemble must have at least one member");
        }
        if let Some(p) = weights.iter().find(|&&p| p.is_nan() || p < 0.0) {
            return invalid(format!("negative or non-finite weight {p}"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return invalid(format!("weights sum to {total}, expected 1"));
        }
        let shape = members[0].shape();
        if members.iter().any(|m| m.shape() != shape) {
            return Err(Error::ShapeMismatch(
                "ensemble members have different shapes".into(),
            ));
        }
        Ok(Self { weights, members })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[State] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn shape(&self) -> &RegisterShape {
        self.members[0].shape()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &State)> {
        self.weights.iter().copied().zip(&self.members)
    }
}

fn qubit_state(n: usize, entries: &[(usize, f64)]) -> Result<PureState> {
    let shape = RegisterShape::qubits(n)?;
    let mut amps = vec![C64::new(0.0, 0.0); shape.total_dim()];
    for &(idx, a) in entries {
        amps[idx] += C64::new(a, 0.0);
    }
    PureState::normalized(shape, amps)
}

fn all_ones(n: usize) -> usize {
    (1usize << n) - 1
}

/// `(|0…0> + |1…1>)/√2` on `n ≥ 2` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return invalid(format!("GHZ state needs n >= 2, got {n}"));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    qubit_state(n, &[(0, a), (all_ones(n), a)])
}

/// The two-qubit Bell state, identical to `ghz(2)`.
pub fn epr() -> PureState {
    ghz(2).expect("n = 2 is valid")
}

/// Equal superposition of the Hamming-weight-1 basis states.
pub fn w(n: usize) -> Result<PureState> {
    if n < 2 {
        return invalid(format!("W state needs n >= 2, got {n}"));
    }
    let a = 1.0 / (n as f64).sqrt();
    let entries: Vec<_> = (0..n).map(|k| (1usize << (n - 1 - k), a)).collect();
    qubit_state(n, &entries)
}

/// Equal superposition of the Hamming-weight-(n−1) basis states.
pub fn wbar(n: usize) -> Result<PureState> {
    if n < 2 {
        return invalid(format!("W-bar state needs n >= 2, got {n}"));
    }
    let a = 1.0 / (n as f64).sqrt();
    let entries: Vec<_> = (0..n)
        .map(|k| (all_ones(n) ^ (1usize << (n - 1 - k)), a))
        .collect();
    qubit_state(n, &entries)
}

/// `½(|0^n> + |0^{n/2}1^{n/2}> + |1^{n/2}0^{n/2}> − |1^n>)` for even `n ≥ 4`.
///
/// The prefactor is ½ for every `n`; the four terms are orthogonal.
pub fn cluster(n: usize) -> Result<PureState> {
    if n < 4 || !n.is_multiple_of(2) {
        return invalid(format!("cluster state needs even n >= 4, got {n}"));
    }
    let half = n / 2;
    let low = (1usize << half) - 1;
    let high = low << half;
    qubit_state(n, &[(0, 0.5), (low, 0.5), (high, 0.5), (all_ones(n), -0.5)])
}

/// `EPR^{⊗ n/2}` for even `n ≥ 2`.
pub fn epr_power(n: usize) -> Result<PureState> {
    if n < 2 || !n.is_multiple_of(2) {
        return invalid(format!("EPR power needs even n >= 2, got {n}"));
    }
    let pair = epr();
    let mut out = pair.clone();
    for _ in 1..n / 2 {
        out = out.kron(&pair);
    }
    Ok(out)
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("family parameter x = {x} outside [0, 1]"));
    }
    Ok(())
}

fn superpose(x: f64, a: &PureState, b: &PureState) -> Result<PureState> {
    let (sa, sb) = (x.sqrt(), (1.0 - x).sqrt());
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(u, v)| u * sa + v * sb)
        .collect();
    PureState::new(a.shape().clone(), amps)
}

/// `√x |GHZ_n> + √(1−x) |W_n>`, `n ≥ 3`.
pub fn family1(x: f64, n: usize) -> Result<PureState> {
    check_x(x)?;
    if n < 3 {
        return invalid(format!("family1 needs n >= 3, got {n}"));
    }
    superpose(x, &ghz(n)?, &w(n)?)
}

/// `√x |W_n> + √(1−x) |W̄_n>`, `n ≥ 3` (the branches coincide at n = 2).
pub fn family2(x: f64, n: usize) -> Result<PureState> {
    check_x(x)?;
    if n < 3 {
        return invalid(format!("family2 needs n >= 3, got {n}"));
    }
    superpose(x, &w(n)?, &wbar(n)?)
}

/// `|psi_1> ⊗ … ⊗ |psi_k>`.
pub fn product(states: &[PureState]) -> Result<PureState> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("product of zero states".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, s| acc.kron(s)))
}

/// `|psi><psi|`.
pub fn dm(psi: &PureState) -> DensityMatrix {
    psi.to_density()
}

/// `Σ p_i ρ_i`.
pub fn mix(e: &Ensemble) -> DensityMatrix {
    let d = e.shape().total_dim();
    let mut acc = CMatrix::zeros(d, d);
    for (p, member) in e.iter() {
        acc += member.to_density().matrix() * C64::new(p, 0.0);
    }
    DensityMatrix::from_parts_unchecked(e.shape().clone(), acc)
}

/// `Σ p_i ρ_i ⊗ |i><i|` with one appended flag subsystem.
///
/// The flag has dimension `max(k, 2)` so that a one-member ensemble still
/// forms a valid register.
pub fn flagged_mixture(e: &Ensemble) -> DensityMatrix {
    let k = e.len().max(2);
    let shape = e
        .shape()
        .concat(&RegisterShape::new(vec![k]).expect("k >= 2"));
    let d = shape.total_dim();
    let mut acc = CMatrix::zeros(d, d);
    for (i, (p, member)) in e.iter().enumerate() {
        let mut flag = CMatrix::zeros(k, k);
        flag[(i, i)] = C64::new(p, 0.0);
        acc += kron(member.to_density().matrix(), &flag);
    }
    DensityMatrix::from_parts_unchecked(shape, acc)
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state, deterministic per seed.
pub fn random_pure(shape: &RegisterShape, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_with(shape, &mut rng)
}

pub fn random_pure_with(shape: &RegisterShape, rng: &mut impl Rng) -> PureState {
    let amps = (0..shape.total_dim())
        .map(|_| complex_gaussian(rng))
        .collect();
    PureState::normalized(shape.clone(), amps).expect("gaussian vector is non-zero")
}

/// `G G† / Tr(G G†)` for a `D × rank` complex Gaussian `G`.
pub fn random_density(shape: &RegisterShape, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(shape, rank, &mut rng)
}

pub fn random_density_with(
    shape: &RegisterShape,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    let d = shape.total_dim();
    if rank == 0 || rank > d {
        return invalid(format!("rank {rank} outside 1..={d}"));
    }
    let g = CMatrix::from_fn(d, rank, |_, _| complex_gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(shape.clone(), rho))
}

/// Haar-random `d × d` unitary (QR of a complex Gaussian with phase fix).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Random local unitaries, one per subsystem.
pub fn random_local_unitaries(shape: &RegisterShape, rng: &mut impl Rng) -> Vec<CMatrix> {
    shape
        .dims()
        .iter()
        .map(|&d| random_unitary(d, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::validate_density;

    const EPS: f64 = 1e-12;

    fn close(a: C64, b: f64) -> bool {
        (a - C64::new(b, 0.0)).norm() < EPS
    }

    fn assert_mat_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let diff = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= tol, "matrices differ by {diff}");
    }

    #[test]
    fn ghz_two_is_epr() {
        let g = ghz(2).unwrap();
        assert_eq!(g, epr());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(g.amplitudes()[0], s) && close(g.amplitudes()[3], s));
        let g3 = ghz(3).unwrap();
        assert!(close(g3.amplitudes()[0], s) && close(g3.amplitudes()[7], s));
        assert!(ghz(1).is_err());
    }

    #[test]
    fn w_and_wbar_readback() {
        assert_eq!(w(2).unwrap(), wbar(2).unwrap());
        let w3 = w(3).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for (i, amp) in w3.amplitudes().iter().enumerate() {
            let expect = if [1, 2, 4].contains(&i) { a } else { 0.0 };
            assert!(close(*amp, expect), "index {i}");
        }
        assert!(w(4).unwrap().inner(&wbar(4).unwrap()).norm() < EPS);
        assert!(w(1).is_err() && wbar(0).is_err());
    }

    #[test]
    fn cluster_four() {
        let c4 = cluster(4).unwrap();
        let expect = [(0usize, 0.5), (3, 0.5), (12, 0.5), (15, -0.5)];
        for (i, amp) in c4.amplitudes().iter().enumerate() {
            let e = expect
                .iter()
                .find(|(k, _)| *k == i)
                .map_or(0.0, |(_, v)| *v);
            assert!(close(*amp, e));
        }
        assert!((c4.norm() - 1.0).abs() < EPS);
        assert!((cluster(8).unwrap().norm() - 1.0).abs() < EPS);
        assert!(cluster(5).is_err() && cluster(2).is_err());
    }

    #[test]
    fn cluster_cross_pair_marginal_is_maximally_mixed() {
        // direct contraction: rho_{02}[a,b] = sum over (q1,q3) of psi(a0,q1,a2,q3) psi*(...)
        let c4 = cluster(4).unwrap();
        let amps = c4.amplitudes();
        let mut oracle = CMatrix::zeros(4, 4);
        for a in 0..4usize {
            for b in 0..4usize {
                for q1 in 0..2usize {
                    for q3 in 0..2usize {
                        let ia = ((a >> 1) << 3) | (q1 << 2) | ((a & 1) << 1) | q3;
                        let ib = ((b >> 1) << 3) | (q1 << 2) | ((b & 1) << 1) | q3;
                        oracle[(a, b)] += amps[ia] * amps[ib].conj();
                    }
                }
            }
        }
        let got = c4.marginal(&[0, 2]).unwrap();
        assert_mat_close(got.matrix(), &oracle, 1e-14);
        assert_mat_close(
            &oracle,
            &(CMatrix::identity(4, 4) * C64::new(0.25, 0.0)),
            1e-14,
        );
    }

    #[test]
    fn family_endpoints_and_norms() {
        assert_eq!(family1(1.0, 4).unwrap(), ghz(4).unwrap());
        assert_eq!(family1(0.0, 4).unwrap(), w(4).unwrap());
        assert!((family1(0.5, 3).unwrap().norm() - 1.0).abs() < 1e-12);
        assert_eq!(family2(1.0, 5).unwrap(), w(5).unwrap());
        let f = family2(0.5, 4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (wa, wb) = (w(4).unwrap(), wbar(4).unwrap());
        for i in 0..16 {
            let e = (wa.amplitudes()[i] + wb.amplitudes()[i]) * s;
            assert!((f.amplitudes()[i] - e).norm() < EPS);
        }
        assert!(family2(0.5, 2).is_err());
        assert!(family1(1.5, 3).is_err() && family2(-0.1, 3).is_err());
    }

    #[test]
    fn families_are_sqrt_continuous() {
        let delta = 1e-3;
        for n in [3usize, 5] {
            for k in 0..1000 {
                let x = k as f64 * delta;
                for f in [family1, family2] {
                    let a = f(x, n).unwrap();
                    let b = f((x + delta).min(1.0), n).unwrap();
                    let dist: f64 = a
                        .amplitudes()
                        .iter()
                        .zip(b.amplitudes())
                        .map(|(u, v)| (u - v).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    assert!(dist <= 2.0 * delta.sqrt(), "x={x} n={n} dist={dist}");
                }
            }
        }
    }

    #[test]
    fn product_and_mixtures() {
        let q = RegisterShape::qubits(1).unwrap();
        let p = product(&[
            PureState::basis(q.clone(), 0).unwrap(),
            PureState::basis(q, 1).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            p,
            PureState::basis(RegisterShape::qubits(2).unwrap(), 1).unwrap()
        );
        assert!(product(&[]).is_err());

        let e = Ensemble::new(vec![1.0], vec![epr().into()]).unwrap();
        assert_eq!(mix(&e), dm(&epr()));

        let shape = RegisterShape::qubits(2).unwrap();
        let e = Ensemble::new(
            vec![0.5, 0.5],
            vec![epr().into(), DensityMatrix::maximally_mixed(shape).into()],
        )
        .unwrap();
        assert!(validate_density(mix(&e).matrix(), 1e-10).is_valid());
    }

    #[test]
    fn ensemble_validation() {
        let one = RegisterShape::qubits(1).unwrap();
        let a: State = PureState::basis(one.clone(), 0).unwrap().into();
        let b: State = epr().into();
        assert!(Ensemble::new(vec![0.5, 0.5], vec![a.clone(), b]).is_err());
        assert!(Ensemble::new(vec![0.7, 0.7], vec![a.clone(), a.clone()]).is_err());
        assert!(Ensemble::new(vec![-0.5, 1.5], vec![a.clone(), a.clone()]).is_err());
        assert!(Ensemble::new(vec![], vec![]).is_err());
    }

    #[test]
    fn flagged_mixture_structure() {
        let single = Ensemble::new(vec![1.0], vec![epr().into()]).unwrap();
        let f = flagged_mixture(&single);
        let mut zero = CMatrix::zeros(2, 2);
        zero[(0, 0)] = C64::new(1.0, 0.0);
        assert_mat_close(f.matrix(), &kron(dm(&epr()).matrix(), &zero), 0.0);

        let shape = RegisterShape::qubits(2).unwrap();
        let e = Ensemble::new(
            vec![0.3, 0.7],
            vec![epr().into(), random_density(&shape, 2, 5).unwrap().into()],
        )
        .unwrap();
        let f = flagged_mixture(&e);
        assert_eq!(f.shape().dims(), &[2, 2, 2]);
        for r in 0..8 {
            for c in 0..8 {
                if r % 2 != c % 2 {
                    assert_eq!(f.matrix()[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
        let back = f.partial_trace(&[0, 1]).unwrap();
        assert_mat_close(back.matrix(), mix(&e).matrix(), 1e-12);
    }

    #[test]
    fn random_generators_are_deterministic() {
        let shape = RegisterShape::new(vec![2, 3]).unwrap();
        assert_eq!(random_pure(&shape, 9), random_pure(&shape, 9));
        assert_ne!(random_pure(&shape, 9), random_pure(&shape, 10));
        assert!((random_pure(&shape, 9).norm() - 1.0).abs() < 1e-10);
        let r = random_density(&shape, 3, 4).unwrap();
        assert_eq!(r, random_density(&shape, 3, 4).unwrap());
        assert!((r.trace() - 1.0).abs() < 1e-10);
        assert!(random_density(&shape, 0, 1).is_err());
        assert!(random_density(&shape, 7, 1).is_err());
    }

    #[test]
    fn random_density_rank() {
        let shape = RegisterShape::qubits(2).unwrap();
        let ev = random_density(&shape, 2, 11).unwrap().eigenvalues();
        assert!(ev[1].abs() <= 1e-10 && ev[0].abs() <= 1e-10);
        assert!(ev[2] > 1e-6);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(3, &mut rng);
        assert_mat_close(&(u.adjoint() * &u), &CMatrix::identity(3, 3), 1e-12);
    }

    #[test]
    fn apply_local_matches_full_kron() {
        let shape = RegisterShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure(&shape, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ops = random_local_unitaries(&shape, &mut rng);
        let full = kron(&kron(&ops[0], &ops[1]), &ops[2]);
        let expect = &full * DVector::from_column_slice(psi.amplitudes());
        let got = psi.apply_local(&ops).unwrap();
        for (a, b) in got.amplitudes().iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn constructors_validate() {
        let states = [
            ghz(4).unwrap(),
            w(5).unwrap(),
            wbar(5).unwrap(),
            cluster(6).unwrap(),
            epr_power(4).unwrap(),
            family1(0.3, 4).unwrap(),
            family2(0.7, 4).unwrap(),
        ];
        for s in &states {
            assert!(dm(s).validate(1e-10).is_valid());
        }
    }
}
