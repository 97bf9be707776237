//! Convex-roof extension of pure-state measures.
//!
//! Every pure-state decomposition of a rank-`r` density matrix
//! `ρ = Σ_k λ_k |e_k><e_k|` with `m` members is generated by an `m × r`
//! isometry `V`: member `i` is the unnormalized vector `Σ_k V_ik √λ_k |e_k>`
//! and its weight is the squared norm. The optimizer searches over `V` by
//! left-multiplying with unitaries, which keeps `V` an isometry.
//!
//! Each restart alternates greedy sweeps of complex Givens rotations between
//! member pairs with a numeric-gradient step on the unitary group (Cayley
//! retraction, step halving). The step size is halved whenever a sweep gains
//! less than the configured tolerance; the restart has converged once the
//! step falls below [`MIN_STEP`] without further gain.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::{entropy_of_spectrum, Measure, PureEvaluator};
use crate::states::{flagged_mixture, Ensemble, PureState, State};
use crate::tensor::{eigen_unchecked, CMatrix, DensityMatrix, RegisterShape, C64};

/// Eigenvalues at or below this are treated as outside the support.
pub const RANK_TOL: f64 = 1e-12;

/// Initial Givens angle (radians).
pub const INITIAL_STEP: f64 = 0.5;

/// Givens angle below which a non-improving restart counts as converged.
pub const MIN_STEP: f64 = 1e-3;

/// Members lighter than this are dropped from reported ensembles.
const WEIGHT_FLOOR: f64 = 1e-14;

/// Smallest accepted decrease of the objective.
const IMPROVE_EPS: f64 = 1e-13;

const GRADIENT_H: f64 = 1e-6;

const PHASES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
    3.0 * std::f64::consts::FRAC_PI_4,
];

/// Which decompositions the roof minimizes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Decompositions into pure states.
    #[value(name = "pure_roof")]
    PureRoof,
    /// Additionally groups the pure members into `k` mixed members,
    /// `k = 1..m`, evaluating the direct measure on each group.
    #[value(name = "mixed_roof")]
    MixedRoof,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofConfig {
    /// Number of decomposition members; `None` means `r²`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Objective-change threshold per sweep.
    pub tolerance: f64,
    pub seed: u64,
    pub strategy: Strategy,
    /// Hard cap on the register dimension `D`.
    pub max_dim: usize,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 20,
            max_iterations: 2000,
            tolerance: 1e-6,
            seed: 0,
            strategy: Strategy::PureRoof,
            max_dim: 256,
        }
    }
}

impl RoofConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn ensemble_size_for(&self, rank: usize) -> Result<usize> {
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return invalid(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        let m = self.ensemble_size.unwrap_or(rank * rank);
        if m < rank {
            return invalid(format!("ensemble size {m} is below the rank {rank}"));
        }
        Ok(m)
    }
}

/// Best decomposition found by [`roof_minimize`].
#[derive(Clone, Debug, PartialEq)]
pub struct RoofResult {
    pub value: f64,
    pub ensemble: Ensemble,
    pub per_restart_values: Vec<f64>,
    /// Whether the winning run met the stopping criterion before `max_iterations`.
    pub converged: bool,
    /// Objective after each iteration, one list per run.
    pub histories: Vec<Vec<f64>>,
}

/// Support of ρ: eigenvalues above [`RANK_TOL`] and the columns `√λ_k |e_k>`.
struct Support {
    weights: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

fn support(rho: &DensityMatrix) -> Support {
    let (vals, vecs) = eigen_unchecked(rho.matrix());
    let mut weights = Vec::new();
    let mut vectors = Vec::new();
    // descending, so the dominant eigenvector comes first
    for k in (0..vals.len()).rev() {
        if vals[k] > RANK_TOL {
            let s = vals[k].sqrt();
            weights.push(vals[k]);
            vectors.push(vecs.column(k).iter().map(|z| z * s).collect());
        }
    }
    Support { weights, vectors }
}

/// Purification on `shape ⊕ [max(r, 2)]` whose ancilla trace is `rho`.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let sup = support(rho);
    let r = sup.weights.len().max(2);
    let d = rho.dim();
    let mut amps = vec![C64::new(0.0, 0.0); d * r];
    for (k, v) in sup.vectors.iter().enumerate() {
        for (a, z) in v.iter().enumerate() {
            amps[a * r + k] = *z;
        }
    }
    let shape = rho
        .shape()
        .concat(&RegisterShape::new(vec![r]).expect("r >= 2"));
    PureState::normalized(shape, amps).expect("purification of a unit-trace state")
}

fn isometry_error(v: &CMatrix) -> f64 {
    let g = v.adjoint() * v;
    let id = CMatrix::identity(g.nrows(), g.ncols());
    (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn members_from(v: &CMatrix, sup: &Support) -> Vec<Vec<C64>> {
    let d = sup.vectors.first().map_or(0, |x| x.len());
    (0..v.nrows())
        .map(|i| {
            let mut psi = vec![C64::new(0.0, 0.0); d];
            for (k, w) in sup.vectors.iter().enumerate() {
                let c = v[(i, k)];
                for (p, x) in psi.iter_mut().zip(w) {
                    *p += c * x;
                }
            }
            psi
        })
        .collect()
}

fn pure_ensemble(shape: &RegisterShape, members: &[Vec<C64>]) -> Result<Ensemble> {
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for psi in members {
        let p: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if p > WEIGHT_FLOOR {
            weights.push(p);
            states.push(State::Pure(PureState::normalized(
                shape.clone(),
                psi.clone(),
            )?));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|p| *p /= total);
    Ensemble::new(weights, states)
}

/// Decomposition of `rho` steered by an `m × r` isometry `v`.
///
/// The identity isometry yields the eigen-ensemble; zero-weight members are
/// dropped.
pub fn ensemble_from_isometry(rho: &DensityMatrix, v: &CMatrix) -> Result<Ensemble> {
    let sup = support(rho);
    let r = sup.weights.len();
    if v.ncols() != r {
        return Err(Error::ShapeMismatch(format!(
            "isometry has {} columns, state has rank {r}",
            v.ncols()
        )));
    }
    let err = isometry_error(v);
    if err > 1e-8 {
        return invalid(format!(
            "matrix is not an isometry (V†V deviates by {err:e})"
        ));
    }
    pure_ensemble(rho.shape(), &members_from(v, &sup))
}

/// Objective for one grouping of the `m` pure members.
struct Objective<'a> {
    shape: &'a RegisterShape,
    measure: Measure,
    pure: &'a PureEvaluator,
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
}

impl<'a> Objective<'a> {
    fn new(shape: &'a RegisterShape, pure: &'a PureEvaluator, m: usize, k: usize) -> Self {
        let group_of: Vec<usize> = (0..m).map(|i| i % k).collect();
        let mut groups = vec![Vec::new(); k];
        for (i, &g) in group_of.iter().enumerate() {
            groups[g].push(i);
        }
        Self {
            shape,
            measure: pure.measure(),
            pure,
            group_of,
            groups,
        }
    }

    fn group_cost(&self, g: usize, members: &[Vec<C64>]) -> f64 {
        let idx = &self.groups[g];
        if idx.len() == 1 {
            return self.pure.weighted(&members[idx[0]]);
        }
        let rho = group_matrix(idx, members);
        let p = rho.trace().re;
        if p <= WEIGHT_FLOOR {
            return 0.0;
        }
        let dm = DensityMatrix::from_parts_unchecked(self.shape.clone(), rho / C64::new(p, 0.0));
        p * self.measure.evaluate(&dm).unwrap_or(f64::INFINITY)
    }

    fn all_costs(&self, members: &[Vec<C64>]) -> Vec<f64> {
        (0..self.groups.len())
            .map(|g| self.group_cost(g, members))
            .collect()
    }
}

fn group_matrix(idx: &[usize], members: &[Vec<C64>]) -> CMatrix {
    let d = members[0].len();
    let mut rho = CMatrix::zeros(d, d);
    for &i in idx {
        let v = DVector::from_column_slice(&members[i]);
        rho += &v * v.adjoint();
    }
    rho
}

/// Result of one optimizer run.
#[derive(Clone, Debug)]
struct RunOutcome {
    members: Vec<Vec<C64>>,
    value: f64,
    converged: bool,
    history: Vec<f64>,
}

struct Search<'a, 'b> {
    obj: &'b Objective<'a>,
    members: Vec<Vec<C64>>,
    costs: Vec<f64>,
}

impl<'a, 'b> Search<'a, 'b> {
    fn new(obj: &'b Objective<'a>, members: Vec<Vec<C64>>) -> Self {
        let costs = obj.all_costs(&members);
        Self {
            obj,
            members,
            costs,
        }
    }

    fn value(&self) -> f64 {
        self.costs.iter().sum()
    }

    fn rotate(&mut self, i: usize, j: usize, theta: f64, phi: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let e = C64::from_polar(1.0, phi);
        let (a, b) = if i < j {
            let (lo, hi) = self.members.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        } else {
            let (lo, hi) = self.members.split_at_mut(i);
            (&mut hi[0], &mut lo[j])
        };
        for (x, y) in a.iter_mut().zip(b.iter_mut()) {
            let (xi, yj) = (*x, *y);
            *x = xi * c - e.conj() * yj * s;
            *y = e * xi * s + yj * c;
        }
    }

    /// Cost of groups `gi`, `gj` after rotating members `i`, `j`; the
    /// rotation is undone before returning.
    fn probe(&mut self, i: usize, j: usize, theta: f64, phi: f64) -> f64 {
        let (gi, gj) = (self.obj.group_of[i], self.obj.group_of[j]);
        let saved = (self.members[i].clone(), self.members[j].clone());
        self.rotate(i, j, theta, phi);
        let cost = self.obj.group_cost(gi, &self.members) + self.obj.group_cost(gj, &self.members);
        self.members[i] = saved.0;
        self.members[j] = saved.1;
        cost
    }

    fn try_rotation(&mut self, i: usize, j: usize, theta: f64, phi: f64) -> bool {
        let (gi, gj) = (self.obj.group_of[i], self.obj.group_of[j]);
        let before = self.costs[gi] + self.costs[gj];
        let saved = (self.members[i].clone(), self.members[j].clone());
        self.rotate(i, j, theta, phi);
        let ci = self.obj.group_cost(gi, &self.members);
        let cj = self.obj.group_cost(gj, &self.members);
        if ci + cj < before - IMPROVE_EPS {
            self.costs[gi] = ci;
            self.costs[gj] = cj;
            true
        } else {
            self.members[i] = saved.0;
            self.members[j] = saved.1;
            false
        }
    }

    fn sweep(&mut self, step: f64) {
        let m = self.members.len();
        for i in 0..m {
            for j in i + 1..m {
                if self.obj.group_of[i] == self.obj.group_of[j] {
                    continue;
                }
                for &phi in &PHASES {
                    if !self.try_rotation(i, j, step, phi) {
                        self.try_rotation(i, j, -step, phi);
                    }
                }
            }
        }
    }

    /// One descent step along the numeric gradient on the unitary group.
    fn gradient_step(&mut self, step: f64) -> bool {
        let m = self.members.len();
        let mut gen = CMatrix::zeros(m, m);
        let mut norm2 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                if self.obj.group_of[i] == self.obj.group_of[j] {
                    continue;
                }
                for phi in [0.0, std::f64::consts::FRAC_PI_2] {
                    let up = self.probe(i, j, GRADIENT_H, phi);
                    let down = self.probe(i, j, -GRADIENT_H, phi);
                    let g = (up - down) / (2.0 * GRADIENT_H);
                    if !g.is_finite() {
                        continue;
                    }
                    norm2 += g * g;
                    // generator of rotate(i, j, θ, φ) at θ = 0
                    let e = C64::from_polar(1.0, phi);
                    gen[(i, j)] += e.conj() * g;
                    gen[(j, i)] -= e * g;
                }
            }
        }
        let norm = norm2.sqrt();
        if norm.is_nan() || norm <= 1e-12 {
            return false;
        }
        let before = self.value();
        let mut t = step / norm;
        let id = CMatrix::identity(m, m);
        for _ in 0..30 {
            let half = &gen * C64::new(0.5 * t, 0.0);
            let lhs = &id - &half;
            let rhs = &id + &half;
            let Some(u) = lhs.lu().solve(&rhs) else {
                t *= 0.5;
                continue;
            };
            let moved: Vec<Vec<C64>> = (0..m)
                .map(|i| {
                    let mut out = vec![C64::new(0.0, 0.0); self.members[0].len()];
                    for k in 0..m {
                        let c = u[(i, k)];
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for (o, x) in out.iter_mut().zip(&self.members[k]) {
                            *o += c * x;
                        }
                    }
                    out
                })
                .collect();
            let costs = self.obj.all_costs(&moved);
            if costs.iter().sum::<f64>() < before - IMPROVE_EPS {
                self.members = moved;
                self.costs = costs;
                return true;
            }
            t *= 0.5;
        }
        false
    }

    fn run(mut self, max_iterations: usize, tolerance: f64) -> RunOutcome {
        let mut step = INITIAL_STEP;
        let mut history = vec![self.value()];
        let mut converged = false;
        for _ in 0..max_iterations {
            let before = self.value();
            self.sweep(step);
            if before - self.value() < tolerance {
                self.gradient_step(step);
            }
            let after = self.value();
            history.push(after);
            if before - after < tolerance {
                if step <= MIN_STEP {
                    converged = true;
                    break;
                }
                step *= 0.5;
            }
        }
        let value = self.value();
        RunOutcome {
            members: self.members,
            value,
            converged,
            history,
        }
    }
}

fn random_isometry(m: usize, r: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = crate::states::random_unitary(m, &mut rng);
    u.columns(0, r).into_owned()
}

fn check_cap(rho: &DensityMatrix, config: &RoofConfig) -> Result<()> {
    if rho.dim() > config.max_dim {
        return Err(Error::ResourceCap(format!(
            "register dimension {} exceeds the roof cap {}",
            rho.dim(),
            config.max_dim
        )));
    }
    Ok(())
}

/// Convex-roof value of `measure` at `rho`, minimized over decompositions.
///
/// The returned value is an upper bound on the true roof. Restarts are run in
/// parallel with seeds `seed + restart`; the reduction keeps the lowest value,
/// ties going to the lowest restart index.
pub fn roof_minimize(
    rho: &DensityMatrix,
    measure: Measure,
    config: &RoofConfig,
) -> Result<RoofResult> {
    check_cap(rho, config)?;
    let shape = rho.shape();
    let pure = PureEvaluator::new(shape, measure)?;
    let sup = support(rho);
    let r = sup.weights.len();
    let m = config.ensemble_size_for(r)?;

    if r == 1 {
        let psi = PureState::normalized(shape.clone(), sup.vectors[0].clone())?;
        let value = measure.evaluate(&psi)?;
        return Ok(RoofResult {
            value,
            ensemble: Ensemble::new(vec![1.0], vec![State::Pure(psi)])?,
            per_restart_values: vec![value],
            converged: true,
            histories: vec![vec![value]],
        });
    }

    let identity = Objective::new(shape, &pure, m, m);
    let mut runs: Vec<RunOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let v = random_isometry(m, r, config.seed.wrapping_add(k as u64));
            Search::new(&identity, members_from(&v, &sup))
                .run(config.max_iterations, config.tolerance)
        })
        .collect();
    let mut groupings = vec![m; runs.len()];

    if config.strategy == Strategy::MixedRoof {
        let start = best_index(&runs);
        let seed_members = runs[start].members.clone();
        let grouped: Vec<(usize, RunOutcome)> = (1..m)
            .into_par_iter()
            .map(|k| {
                let obj = Objective::new(shape, &pure, m, k);
                (
                    k,
                    Search::new(&obj, seed_members.clone())
                        .run(config.max_iterations, config.tolerance),
                )
            })
            .collect();
        for (k, run) in grouped {
            groupings.push(k);
            runs.push(run);
        }
    }

    let best = best_index(&runs);
    let k = groupings[best];
    let winner = &runs[best];
    let (value, ensemble) = if k == m {
        let ensemble = pure_ensemble(shape, &winner.members)?;
        let value = ensemble_value(&ensemble, measure)?;
        (value, ensemble)
    } else {
        let obj = Objective::new(shape, &pure, m, k);
        grouped_ensemble(&obj, &winner.members, measure)?
    };
    let mut per_restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    per_restart_values[best] = value;
    Ok(RoofResult {
        value,
        ensemble,
        per_restart_values,
        converged: winner.converged,
        histories: runs.iter().map(|r| r.history.clone()).collect(),
    })
}

fn best_index(runs: &[RunOutcome]) -> usize {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value < runs[best].value {
            best = i;
        }
    }
    best
}

/// `Σ p_i T(member_i)`.
pub fn ensemble_value(e: &Ensemble, measure: Measure) -> Result<f64> {
    e.iter().map(|(p, s)| Ok(p * measure.evaluate(s)?)).sum()
}

fn grouped_ensemble(
    obj: &Objective<'_>,
    members: &[Vec<C64>],
    measure: Measure,
) -> Result<(f64, Ensemble)> {
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for idx in &obj.groups {
        let rho = group_matrix(idx, members);
        let p = rho.trace().re;
        if p <= WEIGHT_FLOOR {
            continue;
        }
        weights.push(p);
        let dm = DensityMatrix::from_parts_unchecked(obj.shape.clone(), rho / C64::new(p, 0.0));
        states.push(State::Mixed(dm));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|p| *p /= total);
    let e = Ensemble::new(weights, states)?;
    Ok((ensemble_value(&e, measure)?, e))
}

fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum(&[p, 1.0 - p])
}

/// Two-qubit concurrence from the spin-flipped spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.shape().dims() != [2, 2] {
        return Err(Error::ShapeMismatch(format!(
            "concurrence needs a two-qubit state, got dims {:?}",
            rho.shape().dims()
        )));
    }
    let (vals, vecs) = eigen_unchecked(rho.matrix());
    let sqrt_diag = CMatrix::from_diagonal(&DVector::from_iterator(
        4,
        vals.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    let sqrt_rho = &vecs * sqrt_diag * vecs.adjoint();
    // σy ⊗ σy is real: anti-diagonal (−1, 1, 1, −1)
    let mut yy = CMatrix::zeros(4, 4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].iter().enumerate() {
        yy[(i, 3 - i)] = C64::new(*s, 0.0);
    }
    let flipped = &yy * rho.matrix().conjugate() * &yy;
    let r = &sqrt_rho * flipped * &sqrt_rho;
    let (mu, _) = eigen_unchecked(&r);
    let s: Vec<f64> = mu.iter().rev().map(|&x| x.max(0.0).sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Entanglement of formation `h((1 + √(1 − C²))/2)` of a two-qubit state.
pub fn eof_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?.min(1.0);
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}

/// Direct value, roof value and their difference `direct − roof`.
#[derive(Clone, Debug, PartialEq)]
pub struct PcrcGap {
    pub direct: f64,
    pub roof: f64,
    pub gap: f64,
    pub converged: bool,
}

/// `T(ρ) − T*(ρ)`; a negative gap is a counterexample report, not an error.
pub fn pcrc_gap(rho: &DensityMatrix, measure: Measure, config: &RoofConfig) -> Result<PcrcGap> {
    let direct = measure.evaluate(rho)?;
    let roof = roof_minimize(rho, measure, config)?;
    Ok(PcrcGap {
        direct,
        roof: roof.value,
        gap: direct - roof.value,
        converged: roof.converged,
    })
}

fn member_roof(state: &State, measure: Measure, config: &RoofConfig) -> Result<f64> {
    match state {
        State::Pure(p) => measure.evaluate(p),
        State::Mixed(m) => Ok(roof_minimize(m, measure, config)?.value),
    }
}

/// `|T*(Σ p_i ρ_i ⊗ |i><i|) − Σ p_i T*(ρ_i)|`.
pub fn flags_residual(e: &Ensemble, measure: Measure, config: &RoofConfig) -> Result<f64> {
    let flagged = flagged_mixture(e);
    check_cap(&flagged, config)?;
    let joint = roof_minimize(&flagged, measure, config)?.value;
    let mut parts = 0.0;
    for (p, s) in e.iter() {
        parts += p * member_roof(s, measure, config)?;
    }
    Ok((joint - parts).abs())
}

/// `T*(σ ⊗ η) − T*(σ) − T*(η)`.
pub fn roof_additivity_gap(
    sigma: &DensityMatrix,
    eta: &DensityMatrix,
    measure: Measure,
    config: &RoofConfig,
) -> Result<f64> {
    let joint = sigma.kron(eta);
    check_cap(&joint, config)?;
    let j = roof_minimize(&joint, measure, config)?.value;
    let a = roof_minimize(sigma, measure, config)?.value;
    let b = roof_minimize(eta, measure, config)?.value;
    Ok(j - a - b)
}
