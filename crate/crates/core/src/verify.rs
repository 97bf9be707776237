//! Randomized verification suites behind `totcorr verify`.
//!
//! Every check turns one trial into a residual that must not exceed the
//! check's tolerance. The first failing trial is kept with its states so it
//! can be replayed through `measure --file` or `roof --file`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::format::sig12;
use crate::io::StateFile;
use crate::measures::{
    bound_m, bound_s, measure_m, measure_s, measure_s_form2, mutual_information, ssa_check,
    von_neumann_entropy, Measure,
};
use crate::roof::{flags_residual, pcrc_gap, RoofConfig};
use crate::states::{
    ghz, random_density_with, random_local_unitaries, random_pure_with, Ensemble, PureState, State,
};
use crate::tensor::{DensityMatrix, RegisterShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Entropy,
    Bounds,
    Additivity,
    Flags,
    Pcrc,
    Form2,
}

impl Suite {
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Entropy => 200,
            Suite::Bounds => 500,
            Suite::Additivity | Suite::Form2 | Suite::Pcrc => 100,
            Suite::Flags => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    #[serde(serialize_with = "sig12")]
    pub residual: f64,
    pub detail: String,
    pub states: Vec<StateFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub tolerance: f64,
    #[serde(serialize_with = "sig12")]
    pub worst_residual: f64,
    pub failure: Option<Failure>,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            trials: 0,
            passed: 0,
            tolerance,
            worst_residual: f64::NEG_INFINITY,
            failure: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }

    fn record(
        &mut self,
        trial: usize,
        residual: f64,
        states: &[&State],
        detail: impl FnOnce() -> String,
    ) {
        self.record_if(trial, residual, residual <= self.tolerance, states, detail)
    }

    /// Like `record`, but the caller decides pass/fail.
    fn record_if(
        &mut self,
        trial: usize,
        residual: f64,
        pass: bool,
        states: &[&State],
        detail: impl FnOnce() -> String,
    ) {
        self.trials += 1;
        if residual.is_nan() || residual > self.worst_residual {
            self.worst_residual = residual;
        }
        if pass && residual.is_finite() {
            self.passed += 1;
        } else if self.failure.is_none() {
            self.failure = Some(Failure {
                trial,
                residual,
                detail: detail(),
                states: states.iter().map(|s| StateFile::from(*s)).collect(),
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}/{} passed, worst residual {:.3e} (tol {:e})",
                if c.ok() { "PASS" } else { "FAIL" },
                c.name,
                c.passed,
                c.trials,
                c.worst_residual,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

fn qubits(n: usize) -> RegisterShape {
    RegisterShape::qubits(n).expect("n >= 1")
}

fn rng_for(seed: u64, check: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(check);
    rng
}

fn random_mixed(shape: &RegisterShape, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=shape.total_dim());
    random_density_with(shape, rank, rng)
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Entropy => entropy(seed, trials)?,
        Suite::Bounds => bounds(seed, trials)?,
        Suite::Additivity => additivity(seed, trials)?,
        Suite::Flags => flags(seed, trials)?,
        Suite::Pcrc => pcrc(seed, trials)?,
        Suite::Form2 => form2(seed, trials)?,
    };
    Ok(SuiteReport {
        suite,
        seed,
        trials,
        passed: checks.iter().all(CheckReport::ok),
        checks,
    })
}

fn entropy(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut ssa = CheckReport::new("ssa", 1e-8);
    let mut range = CheckReport::new("entropy_range", 1e-9);
    let mut mi = CheckReport::new("mutual_information_nonnegative", 1e-9);
    let mut rng = rng_for(seed, 0);
    let shape = qubits(3);
    for t in 0..trials {
        let rho = random_mixed(&shape, &mut rng)?;
        let state = State::Mixed(rho.clone());
        let r = ssa_check(&rho)?;
        ssa.record(t, -r, &[&state], || {
            format!("S(XY)+S(YZ)-S(Y)-S(XYZ) = {r}")
        });
        let s = von_neumann_entropy(&rho);
        range.record(t, (s - 3.0).max(-s), &[&state], || format!("S = {s}"));
        let i = mutual_information(&rho, &[0], &[1, 2])?;
        mi.record(t, -i, &[&state], || format!("I(0:12) = {i}"));
    }
    Ok(vec![ssa, range, mi])
}

fn bounds(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (k, n) in [3usize, 4, 5].into_iter().enumerate() {
        let mut bm = CheckReport::new(&format!("bound_m_n{n}"), 1e-9);
        let mut bs = CheckReport::new(&format!("bound_s_n{n}"), 1e-9);
        let mut rng = rng_for(seed, k as u64);
        let shape = qubits(n);
        for t in 0..trials {
            let psi = random_pure_with(&shape, &mut rng);
            let m = measure_m(&psi)?;
            let s = measure_s(&psi)?;
            let state = State::Pure(psi);
            bm.record(t, m - bound_m(n, 2), &[&state], || format!("M = {m}"));
            bs.record(t, s - bound_s(n, 2), &[&state], || format!("S = {s}"));
        }
        out.push(bm);
        out.push(bs);
    }
    let mut attain = CheckReport::new("ghz_attains_bound", 1e-9);
    for n in 2..=8 {
        let g = ghz(n)?;
        let m = measure_m(&g)?;
        attain.record(n, (m - bound_m(n, 2)).abs(), &[&State::Pure(g)], || {
            format!("M(GHZ_{n}) = {m}")
        });
    }
    out.push(attain);
    Ok(out)
}

const DIRECT: [Measure; 3] = [Measure::M, Measure::O, Measure::S];

fn additivity(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut add = CheckReport::new("product_additivity", 1e-8);
    let mut ssa = CheckReport::new("pure_super_additivity", 1e-8);
    let mut lu = CheckReport::new("local_unitary_invariance", 1e-8);
    let mut anc = CheckReport::new("ancilla_invariance", 1e-9);
    let mut rng = rng_for(seed, 0);
    let two = qubits(2);
    let four = qubits(4);
    let zero = PureState::basis(qubits(1), 0)?;
    for t in 0..trials {
        let sigma = random_pure_with(&two, &mut rng);
        let eta = random_pure_with(&two, &mut rng);
        let joint = sigma.kron(&eta);
        let mut worst: f64 = 0.0;
        for m in DIRECT {
            worst =
                worst.max((m.evaluate(&joint)? - m.evaluate(&sigma)? - m.evaluate(&eta)?).abs());
        }
        add.record(t, worst, &[&State::Pure(sigma), &State::Pure(eta)], || {
            "T(a⊗b) - T(a) - T(b) for M, O, S".into()
        });

        let psi = random_pure_with(&four, &mut rng);
        let whole = measure_s(&psi)?;
        let parts = measure_s(&psi.marginal(&[0, 1])?)? + measure_s(&psi.marginal(&[2, 3])?)?;
        let state = State::Pure(psi.clone());
        ssa.record(t, parts - whole, &[&state], || {
            format!("S(ψ) = {whole}, S(ρ_01) + S(ρ_23) = {parts}")
        });

        let moved = psi.apply_local(&random_local_unitaries(&four, &mut rng))?;
        let extended = psi.kron(&zero);
        let mut du: f64 = 0.0;
        let mut da: f64 = 0.0;
        for m in [Measure::M, Measure::O, Measure::S, Measure::MW] {
            let v = m.evaluate(&psi)?;
            du = du.max((m.evaluate(&moved)? - v).abs());
            if m != Measure::MW {
                da = da.max((m.evaluate(&extended)? - v).abs());
            }
        }
        lu.record(t, du, &[&state], || {
            "largest change under local unitaries".into()
        });
        anc.record(t, da, &[&state], || {
            "largest change after appending |0>".into()
        });
    }
    Ok(vec![add, ssa, lu, anc])
}

fn flags(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut check = CheckReport::new("flags_equality", 5e-3);
    let mut rng = rng_for(seed, 0);
    let two = qubits(2);
    for t in 0..trials {
        let a = if rng.random_bool(0.5) {
            State::Pure(random_pure_with(&two, &mut rng))
        } else {
            State::Mixed(random_density_with(&two, 2, &mut rng)?)
        };
        let b = State::Mixed(random_mixed(&two, &mut rng)?);
        let p = rng.random_range(0.1..0.9);
        let e = Ensemble::new(vec![p, 1.0 - p], vec![a.clone(), b.clone()])?;
        let config = RoofConfig::default().with_seed(seed.wrapping_add(t as u64));
        let r = flags_residual(&e, Measure::M, &config)?;
        check.record(t, r, &[&a, &b], || format!("weights [{p}, {}]", 1.0 - p));
    }
    Ok(vec![check])
}

/// Only negative gaps from converged runs fail; the rest are still reported.
fn pcrc(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut check = CheckReport::new("pcrc_gap", 1e-6);
    let mut rng = rng_for(seed, 0);
    let two = qubits(2);
    for t in 0..trials {
        let rank = rng.random_range(2..=4);
        let rho = random_density_with(&two, rank, &mut rng)?;
        let config = RoofConfig::default().with_seed(seed.wrapping_add(t as u64));
        let g = pcrc_gap(&rho, Measure::M, &config)?;
        let residual = -g.gap;
        let pass = residual <= check.tolerance || !g.converged;
        check.record_if(t, residual, pass, &[&State::Mixed(rho)], || {
            format!(
                "direct {} < roof {} (converged: {}, roof seed {})",
                g.direct, g.roof, g.converged, config.seed
            )
        });
    }
    Ok(vec![check])
}

fn form2(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let mut check = CheckReport::new("form2_identity", 1e-8);
    let mut rng = rng_for(seed, 0);
    for t in 0..trials {
        let shape = qubits(3 + t % 3);
        let state = State::Pure(random_pure_with(&shape, &mut rng));
        let a = measure_s_form2(&state)?;
        let b = measure_s(&state)?;
        check.record(t, (a - b).abs(), &[&state], || format!("form2 {a}, S {b}"));
    }
    Ok(vec![check])
}
