//! Correlation functionals evaluated directly on a state.
//!
//! All entropies are in bits. Mixed inputs always get the direct functional
//! value; the convex-roof extension lives in [`crate::roof`].
//!
//! | Function | Quantity |
//! |----------|----------|
//! | [`measure_m`] | `M = Σ_{i<j} ½ I(i:j)` |
//! | [`measure_o`] | `O = ½ (Σ_i S(ρ_i) − S(ρ))` |
//! | [`measure_s`] | `S = (O + M) / 2` |
//! | [`measure_mw`] | `Σ_i (1 − Tr ρ_i²)` |
//! | [`bipartite_correlation`] | `S(ρ_R) + S(ρ_R̄) − S(ρ)` |
//! | [`subset_correlation_sum`] | sum of the above over all bipartitions |

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::format::sig12;
use crate::states::{PureState, State};
use crate::tensor::{
    eigen_unchecked, eigenvalues_unchecked, CMatrix, Contraction, DensityMatrix, RegisterShape, C64,
};

/// Eigenvalues below this contribute nothing to an entropy.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Support tolerance for [`relative_entropy`].
pub const SUPPORT_TOL: f64 = 1e-10;

/// Anything exposing reduced states and a global entropy.
pub trait QuantumState {
    fn shape(&self) -> &RegisterShape;

    /// Reduced state on `keep` (kept subsystems in register order).
    fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix>;

    /// Entropy of the whole state, in bits.
    fn global_entropy(&self) -> f64;
}

impl QuantumState for PureState {
    fn shape(&self) -> &RegisterShape {
        PureState::shape(self)
    }

    fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        PureState::marginal(self, keep)
    }

    fn global_entropy(&self) -> f64 {
        0.0
    }
}

impl QuantumState for DensityMatrix {
    fn shape(&self) -> &RegisterShape {
        DensityMatrix::shape(self)
    }

    fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.partial_trace(keep)
    }

    fn global_entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }
}

impl QuantumState for State {
    fn shape(&self) -> &RegisterShape {
        State::shape(self)
    }

    fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        State::marginal(self, keep)
    }

    fn global_entropy(&self) -> f64 {
        match self {
            State::Pure(_) => 0.0,
            State::Mixed(m) => von_neumann_entropy(m),
        }
    }
}

/// `−Σ λ log₂ λ` over eigenvalues above [`EIGEN_CLAMP`].
pub fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&l| l > EIGEN_CLAMP)
        .map(|&l| -l * l.log2())
        .sum()
}

fn matrix_entropy(m: &CMatrix) -> f64 {
    entropy_of_spectrum(&eigenvalues_unchecked(m))
}

fn purity(m: &CMatrix) -> f64 {
    // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `1 − Tr ρ²`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    (1.0 - purity(rho.matrix())).max(0.0)
}

fn entropy_of<S: QuantumState + ?Sized>(state: &S, keep: &[usize]) -> Result<f64> {
    if keep.len() == state.shape().len() {
        return Ok(state.global_entropy());
    }
    Ok(von_neumann_entropy(&state.marginal(keep)?))
}

fn check_disjoint(
    shape: &RegisterShape,
    a: &[usize],
    b: &[usize],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let a = shape.subset(a)?;
    let b = shape.subset(b)?;
    if a.iter().any(|i| b.contains(i)) {
        return invalid("index sets overlap");
    }
    Ok((a, b))
}

/// `I(A:B) = S(A) + S(B) − S(AB)`.
pub fn mutual_information<S: QuantumState + ?Sized>(
    state: &S,
    a: &[usize],
    b: &[usize],
) -> Result<f64> {
    let (a, b) = check_disjoint(state.shape(), a, b)?;
    let mut ab: Vec<usize> = a.iter().chain(&b).copied().collect();
    ab.sort_unstable();
    Ok(entropy_of(state, &a)? + entropy_of(state, &b)? - entropy_of(state, &ab)?)
}

/// `P(i, j) = ½ I(i:j)`.
pub fn pairwise_probe<S: QuantumState + ?Sized>(state: &S, i: usize, j: usize) -> Result<f64> {
    Ok(0.5 * mutual_information(state, &[i], &[j])?)
}

fn single_entropies<S: QuantumState + ?Sized>(state: &S) -> Result<Vec<f64>> {
    (0..state.shape().len())
        .map(|i| entropy_of(state, &[i]))
        .collect()
}

fn pair_values<S: QuantumState + ?Sized>(state: &S, singles: &[f64]) -> Result<Vec<PairValue>> {
    let n = singles.len();
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let joint = entropy_of(state, &[i, j])?;
            out.push(PairValue {
                i,
                j,
                p: 0.5 * (singles[i] + singles[j] - joint),
            });
        }
    }
    Ok(out)
}

fn require_pairs(shape: &RegisterShape) -> Result<()> {
    if shape.len() < 2 {
        return invalid("pairwise measure needs at least two subsystems");
    }
    Ok(())
}

/// Pairwise measure `M = Σ_{i<j} P(i, j)`.
pub fn measure_m<S: QuantumState + ?Sized>(state: &S) -> Result<f64> {
    require_pairs(state.shape())?;
    let singles = single_entropies(state)?;
    Ok(pair_values(state, &singles)?.iter().map(|p| p.p).sum())
}

/// Global measure `O = ½ (Σ S(ρ_i) − S(ρ))`.
pub fn measure_o<S: QuantumState + ?Sized>(state: &S) -> Result<f64> {
    let singles = single_entropies(state)?;
    Ok(0.5 * (singles.iter().sum::<f64>() - state.global_entropy()))
}

/// `S = (O + M) / 2`.
pub fn measure_s<S: QuantumState + ?Sized>(state: &S) -> Result<f64> {
    Ok(0.5 * (measure_o(state)? + measure_m(state)?))
}

/// Meyer–Wallach-type sum of single-site linear entropies.
pub fn measure_mw<S: QuantumState + ?Sized>(state: &S) -> Result<f64> {
    (0..state.shape().len())
        .map(|i| Ok(linear_entropy(&state.marginal(&[i])?)))
        .sum()
}

/// `S(ρ_R) + S(ρ_R̄) − S(ρ)` for a proper non-empty subset `R`.
pub fn bipartite_correlation<S: QuantumState + ?Sized>(state: &S, part: &[usize]) -> Result<f64> {
    let shape = state.shape();
    let part = shape.subset(part)?;
    if part.len() == shape.len() {
        return invalid("bipartition must be a proper subset");
    }
    let rest = shape.complement(&part);
    Ok(entropy_of(state, &part)? + entropy_of(state, &rest)? - state.global_entropy())
}

/// Largest register handled by [`subset_correlation_sum`].
pub const MAX_SUBSET_SUBSYSTEMS: usize = 12;

/// Sum of [`bipartite_correlation`] over all `2^{N−1} − 1` bipartitions,
/// each subset/complement pair counted once.
pub fn subset_correlation_sum<S: QuantumState + ?Sized>(state: &S) -> Result<f64> {
    let n = state.shape().len();
    require_pairs(state.shape())?;
    if n > MAX_SUBSET_SUBSYSTEMS {
        return Err(Error::ResourceCap(format!(
            "subset sum over {n} subsystems (limit {MAX_SUBSET_SUBSYSTEMS})"
        )));
    }
    let mut total = 0.0;
    // subsets containing subsystem 0, excluding the full register
    for mask in 0..(1usize << (n - 1)) - 1 {
        let full = (mask << 1) | 1;
        let part: Vec<usize> = (0..n).filter(|i| full >> i & 1 == 1).collect();
        total += bipartite_correlation(state, &part)?;
    }
    Ok(total)
}

/// `S(ρ‖σ) = Tr ρ (log₂ ρ − log₂ σ)`.
///
/// Fails with [`Error::SupportViolation`] when ρ has weight above
/// [`SUPPORT_TOL`] on the kernel of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::ShapeMismatch(
            "relative entropy of different registers".into(),
        ));
    }
    let (mu, f) = eigen_unchecked(sigma.matrix());
    let r = rho.matrix();
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (k, &m) in mu.iter().enumerate() {
        let col = f.column(k);
        let weight = (col.adjoint() * r * col)[(0, 0)].re;
        if m > SUPPORT_TOL {
            cross += weight * m.log2();
        } else {
            outside += weight.max(0.0);
        }
    }
    if outside > SUPPORT_TOL {
        return Err(Error::SupportViolation(outside));
    }
    Ok(-von_neumann_entropy(rho) - cross)
}

/// `S` via relative entropies:
/// `[Σ_{i<j} S(ρ_ij‖ρ_i⊗ρ_j) + S(ρ‖ρ_1⊗…⊗ρ_N)] / 4`.
pub fn measure_s_form2(state: &State) -> Result<f64> {
    let shape = state.shape();
    require_pairs(shape)?;
    let n = shape.len();
    let singles: Vec<DensityMatrix> = (0..n)
        .map(|i| state.marginal(&[i]))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let joint = state.marginal(&[i, j])?;
            total += relative_entropy(&joint, &singles[i].kron(&singles[j]))?;
        }
    }
    let product = singles[1..]
        .iter()
        .fold(singles[0].clone(), |acc, s| acc.kron(s));
    total += relative_entropy(&state.to_density(), &product)?;
    Ok(total / 4.0)
}

fn binomial2(n: usize) -> f64 {
    (n * (n - 1) / 2) as f64
}

/// `(2 − δ_{2,n})⁻¹ C(n,2) log₂ d`.
pub fn bound_m(n: usize, d: usize) -> f64 {
    let factor = if n == 2 { 1.0 } else { 0.5 };
    factor * binomial2(n) * (d as f64).log2()
}

/// `(C(n,2) (2 − δ_{n,2})⁻¹ + n/2) / 2 · log₂ d`.
pub fn bound_s(n: usize, d: usize) -> f64 {
    let factor = if n == 2 { 1.0 } else { 0.5 };
    (binomial2(n) * factor + n as f64 / 2.0) / 2.0 * (d as f64).log2()
}

/// `S(XY) + S(YZ) − S(Y) − S(XYZ)` for disjoint non-empty index sets.
pub fn ssa_residual<S: QuantumState + ?Sized>(
    state: &S,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> Result<f64> {
    let shape = state.shape();
    let (x, y) = check_disjoint(shape, x, y)?;
    let (_, z) = check_disjoint(shape, &y, z)?;
    if x.iter().any(|i| z.contains(i)) {
        return invalid("index sets overlap");
    }
    let join = |a: &[usize], b: &[usize]| {
        let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
        v.sort_unstable();
        v
    };
    let xy = join(&x, &y);
    let yz = join(&y, &z);
    let xyz = join(&xy, &z);
    Ok(entropy_of(state, &xy)? + entropy_of(state, &yz)?
        - entropy_of(state, &y)?
        - entropy_of(state, &xyz)?)
}

/// Strong-subadditivity residual of a three-subsystem state (X|Y|Z = 0|1|2).
pub fn ssa_check(rho: &DensityMatrix) -> Result<f64> {
    if rho.shape().len() != 3 {
        return invalid(format!(
            "strong-subadditivity check needs 3 subsystems, got {}",
            rho.shape().len()
        ));
    }
    ssa_residual(rho, &[0], &[1], &[2])
}

/// One of the roof-extendable functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Measure {
    #[value(name = "M")]
    M,
    #[value(name = "O")]
    O,
    #[value(name = "S")]
    S,
    #[value(name = "MW")]
    MW,
}

impl Measure {
    pub fn evaluate<Q: QuantumState + ?Sized>(self, state: &Q) -> Result<f64> {
        match self {
            Measure::M => measure_m(state),
            Measure::O => measure_o(state),
            Measure::S => measure_s(state),
            Measure::MW => measure_mw(state),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::M => "M",
            Measure::O => "O",
            Measure::S => "S",
            Measure::MW => "MW",
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fast evaluation of a measure on (possibly unnormalized) pure vectors.
///
/// Contraction tables for every single site and pair are built once.
#[derive(Clone, Debug)]
pub struct PureEvaluator {
    measure: Measure,
    n: usize,
    singles: Vec<Contraction>,
    pairs: Vec<Contraction>,
}

impl PureEvaluator {
    pub fn new(shape: &RegisterShape, measure: Measure) -> Result<Self> {
        let n = shape.len();
        if matches!(measure, Measure::M | Measure::S) {
            require_pairs(shape)?;
        }
        let singles = (0..n).map(|i| Contraction::new(shape, &[i])).collect();
        let mut pairs = Vec::new();
        if matches!(measure, Measure::M | Measure::S) {
            let dims = shape.dims();
            for i in 0..n {
                for j in i + 1..n {
                    // a pure state has S(K) = S(complement of K); reduce the smaller side
                    let rest = shape.complement(&[i, j]);
                    if rest.is_empty() {
                        continue;
                    }
                    let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
                    if rest_dim < dims[i] * dims[j] {
                        pairs.push(Contraction::new(shape, &rest));
                    } else {
                        pairs.push(Contraction::new(shape, &[i, j]));
                    }
                }
            }
        }
        Ok(Self {
            measure,
            n,
            singles,
            pairs,
        })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// `p · T(ψ/√p)` where `p = ‖ψ‖²`; zero for a zero vector.
    pub fn weighted(&self, psi: &[C64]) -> f64 {
        let p: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return 0.0;
        }
        p * self.normalized_value(psi, p)
    }

    fn normalized_value(&self, psi: &[C64], p: f64) -> f64 {
        let scale = C64::new(1.0 / p, 0.0);
        let reduce = |c: &Contraction| c.reduce_vector(psi) * scale;
        match self.measure {
            Measure::MW => self
                .singles
                .iter()
                .map(|c| (1.0 - purity(&reduce(c))).max(0.0))
                .sum(),
            Measure::O | Measure::M | Measure::S => {
                let singles: f64 = self
                    .singles
                    .iter()
                    .map(|c| matrix_entropy(&reduce(c)))
                    .sum();
                let o = 0.5 * singles;
                if self.measure == Measure::O {
                    return o;
                }
                let pairs: f64 = self.pairs.iter().map(|c| matrix_entropy(&reduce(c))).sum();
                // Σ_{i<j} ½(S_i + S_j − S_ij) = ½((N−1) Σ S_i − Σ S_ij)
                let m = 0.5 * ((self.n - 1) as f64 * singles - pairs);
                if self.measure == Measure::M {
                    m
                } else {
                    0.5 * (o + m)
                }
            }
        }
    }
}

/// `P(i, j)` for one unordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "P", serialize_with = "sig12")]
    pub p: f64,
}

/// All directly evaluated quantities for one state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub shape: RegisterShape,
    pub pairs: Vec<PairValue>,
    #[serde(rename = "O", serialize_with = "sig12")]
    pub o: f64,
    #[serde(rename = "M", serialize_with = "sig12")]
    pub m: f64,
    #[serde(rename = "S", serialize_with = "sig12")]
    pub s: f64,
    #[serde(rename = "MW", serialize_with = "sig12")]
    pub mw: f64,
    #[serde(rename = "bound_M", serialize_with = "sig12")]
    pub bound_m: f64,
    #[serde(rename = "bound_S", serialize_with = "sig12")]
    pub bound_s: f64,
}

impl MeasureReport {
    /// Evaluate every measure; needs at least two subsystems.
    pub fn evaluate<Q: QuantumState + ?Sized>(state: &Q) -> Result<Self> {
        let shape = state.shape().clone();
        require_pairs(&shape)?;
        let singles = single_entropies(state)?;
        let pairs = pair_values(state, &singles)?;
        let m: f64 = pairs.iter().map(|p| p.p).sum();
        let o = 0.5 * (singles.iter().sum::<f64>() - state.global_entropy());
        let mw = measure_mw(state)?;
        let n = shape.len();
        let d = shape.dims().iter().copied().max().unwrap_or(2);
        Ok(Self {
            shape,
            pairs,
            o,
            m,
            s: 0.5 * (o + m),
            mw,
            bound_m: bound_m(n, d),
            bound_s: bound_s(n, d),
        })
    }
}

/// `ρ_1 ⊗ … ⊗ ρ_N` built from single-site marginals.
pub fn product_of_marginals<Q: QuantumState + ?Sized>(state: &Q) -> Result<DensityMatrix> {
    let n = state.shape().len();
    let first = state.marginal(&[0])?;
    (1..n).try_fold(first, |acc, i| Ok(acc.kron(&state.marginal(&[i])?)))
}
