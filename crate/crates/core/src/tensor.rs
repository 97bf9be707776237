//! Dense complex tensor-product algebra over qudit registers.
//!
//! Basis convention: subsystem 0 is the most significant digit of a
//! computational-basis index, so `|q0 q1 ... q(N-1)>` maps to the mixed-radix
//! number `q0 q1 ... q(N-1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default tolerance for density-matrix invariants.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Ordered list of subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RegisterShape {
    dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return invalid("register shape must have at least one subsystem");
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return invalid(format!("subsystem dimension {d} < 2"));
        }
        Ok(Self { dims })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Total Hilbert-space dimension.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Concatenate two registers (`self` first).
    pub fn concat(&self, other: &RegisterShape) -> RegisterShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        RegisterShape { dims }
    }

    /// Validate a subset of subsystem indices and return it in register order.
    pub fn subset(&self, indices: &[usize]) -> Result<Vec<usize>> {
        if indices.is_empty() {
            return invalid("subsystem subset must be non-empty");
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return invalid(format!("subsystem index {} repeated", w[0]));
            }
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= self.len()) {
            return invalid(format!(
                "subsystem index {bad} out of range for {} subsystems",
                self.len()
            ));
        }
        Ok(sorted)
    }

    /// Shape of the kept subsystems (indices assumed validated and ordered).
    pub fn restrict(&self, keep: &[usize]) -> RegisterShape {
        RegisterShape {
            dims: keep.iter().map(|&i| self.dims[i]).collect(),
        }
    }

    /// Complement of a validated subset, in register order.
    pub fn complement(&self, keep: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !keep.contains(i)).collect()
    }
}

impl TryFrom<Vec<usize>> for RegisterShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        RegisterShape::new(dims)
    }
}

impl From<RegisterShape> for Vec<usize> {
    fn from(shape: RegisterShape) -> Self {
        shape.dims
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Index table splitting a register into kept and traced subsystems.
///
/// `full_index(a, c)` is the register index whose kept digits encode `a` and
/// whose traced digits encode `c`.
#[derive(Clone, Debug)]
pub struct Contraction {
    kept_dim: usize,
    rest_dim: usize,
    table: Vec<usize>,
}

impl Contraction {
    /// `keep` must be validated (see [`RegisterShape::subset`]).
    pub fn new(shape: &RegisterShape, keep: &[usize]) -> Self {
        let dims = shape.dims();
        let rest = shape.complement(keep);
        let kept_dim: usize = keep.iter().map(|&i| dims[i]).product();
        let rest_dim: usize = rest.iter().map(|&i| dims[i]).product();
        let total = kept_dim * rest_dim;

        // place value of each subsystem in the full index
        let mut stride = vec![0usize; dims.len()];
        let mut acc = 1;
        for i in (0..dims.len()).rev() {
            stride[i] = acc;
            acc *= dims[i];
        }

        let mut table = vec![0usize; total];
        for a in 0..kept_dim {
            let mut base = 0;
            let mut rem = a;
            for &i in keep.iter().rev() {
                base += (rem % dims[i]) * stride[i];
                rem /= dims[i];
            }
            for c in 0..rest_dim {
                let mut idx = base;
                let mut rem = c;
                for &i in rest.iter().rev() {
                    idx += (rem % dims[i]) * stride[i];
                    rem /= dims[i];
                }
                table[a * rest_dim + c] = idx;
            }
        }
        Self {
            kept_dim,
            rest_dim,
            table,
        }
    }

    pub fn kept_dim(&self) -> usize {
        self.kept_dim
    }

    #[inline]
    pub fn full_index(&self, a: usize, c: usize) -> usize {
        self.table[a * self.rest_dim + c]
    }

    /// Reduced (unnormalized if `psi` is) density matrix of a pure vector.
    pub fn reduce_vector(&self, psi: &[C64]) -> CMatrix {
        let k = self.kept_dim;
        let mut out = CMatrix::zeros(k, k);
        for a in 0..k {
            let row_a = &self.table[a * self.rest_dim..(a + 1) * self.rest_dim];
            for b in a..k {
                let row_b = &self.table[b * self.rest_dim..(b + 1) * self.rest_dim];
                let mut s = C64::new(0.0, 0.0);
                for (&ia, &ib) in row_a.iter().zip(row_b) {
                    s += psi[ia] * psi[ib].conj();
                }
                out[(a, b)] = s;
                if a != b {
                    out[(b, a)] = s.conj();
                }
            }
        }
        out
    }

    /// Partial trace of a full matrix over the traced subsystems.
    pub fn reduce_matrix(&self, rho: &CMatrix) -> CMatrix {
        let k = self.kept_dim;
        let mut out = CMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut s = C64::new(0.0, 0.0);
                for c in 0..self.rest_dim {
                    s += rho[(self.full_index(a, c), self.full_index(b, c))];
                }
                out[(a, b)] = s;
            }
        }
        out
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    shape: RegisterShape,
    data: CMatrix,
}

impl DensityMatrix {
    /// Build and validate at [`DEFAULT_TOL`].
    pub fn new(shape: RegisterShape, data: CMatrix) -> Result<Self> {
        Self::with_tolerance(shape, data, DEFAULT_TOL)
    }

    pub fn with_tolerance(shape: RegisterShape, data: CMatrix, tol: f64) -> Result<Self> {
        let d = shape.total_dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, register dimension is {d}",
                data.nrows(),
                data.ncols()
            )));
        }
        let report = validate_density(&data, tol);
        if !report.is_valid() {
            return Err(Error::InvalidDensity(report.to_string()));
        }
        Ok(Self { shape, data })
    }

    pub(crate) fn from_parts_unchecked(shape: RegisterShape, data: CMatrix) -> Self {
        debug_assert_eq!(data.nrows(), shape.total_dim());
        Self { shape, data }
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        let data = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self { shape, data }
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_unchecked(&self.data)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > tol).count()
    }

    /// Tensor product `self ⊗ other` on the concatenated register.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            shape: self.shape.concat(&other.shape),
            data: kron(&self.data, &other.data),
        }
    }

    /// Reduced state on `keep`; kept subsystems stay in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_density(&self.data, tol)
    }
}

/// Reduced state of `rho` on the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = rho.shape.subset(keep)?;
    if keep.len() == rho.shape.len() {
        return Ok(rho.clone());
    }
    let layout = Contraction::new(&rho.shape, &keep);
    Ok(DensityMatrix {
        shape: rho.shape.restrict(&keep),
        data: layout.reduce_matrix(&rho.data),
    })
}

/// Largest entrywise deviation `|h - h†|`.
pub fn hermiticity_error(h: &CMatrix) -> f64 {
    let n = h.nrows();
    if h.ncols() != n {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    Ok(eigenvalues_unchecked(h))
}

/// Ascending eigenvalues with matching eigenvector columns.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(h)?;
    Ok(eigen_unchecked(h))
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return invalid(format!("matrix is not square: {}x{}", h.nrows(), h.ncols()));
    }
    let err = hermiticity_error(h);
    if err.is_nan() || err > DEFAULT_TOL {
        return invalid(format!("matrix is not Hermitian (deviation {err:e})"));
    }
    Ok(())
}

pub(crate) fn eigenvalues_unchecked(h: &CMatrix) -> Vec<f64> {
    match h.nrows() {
        0 => Vec::new(),
        1 => vec![h[(0, 0)].re],
        2 => {
            let a = h[(0, 0)].re;
            let d = h[(1, 1)].re;
            let b = h[(0, 1)];
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let r = (half * half + b.norm_sqr()).sqrt();
            vec![mean - r, mean + r]
        }
        _ => {
            let mut vals: Vec<f64> = SymmetricEigen::new(hermitize(h))
                .eigenvalues
                .iter()
                .copied()
                .collect();
            vals.sort_by(f64::total_cmp);
            vals
        }
    }
}

pub(crate) fn eigen_unchecked(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(hermitize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn hermitize(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// One violated density-matrix invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    NonFinite,
    NotHermitian { deviation: f64 },
    Trace { trace: f64 },
    Negative { min_eigenvalue: f64 },
}

/// Outcome of checking the density-matrix invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub tol: f64,
    pub hermitian_deviation: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid (tol {:e})", self.tol);
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| match v {
                Violation::NotSquare { rows, cols } => format!("not square ({rows}x{cols})"),
                Violation::NonFinite => "non-finite entries".to_string(),
                Violation::NotHermitian { deviation } => {
                    format!("not Hermitian (deviation {deviation:e})")
                }
                Violation::Trace { trace } => format!("trace {trace} != 1"),
                Violation::Negative { min_eigenvalue } => {
                    format!("negative eigenvalue {min_eigenvalue:e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Check Hermiticity, unit trace and positivity of `rho` at tolerance `tol`.
pub fn validate_density(rho: &CMatrix, tol: f64) -> ValidationReport {
    let mut report = ValidationReport {
        tol,
        hermitian_deviation: 0.0,
        trace: f64::NAN,
        min_eigenvalue: f64::NAN,
        violations: Vec::new(),
    };
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        report.violations.push(Violation::NotSquare {
            rows: rho.nrows(),
            cols: rho.ncols(),
        });
        return report;
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        report.violations.push(Violation::NonFinite);
        return report;
    }
    report.hermitian_deviation = hermiticity_error(rho);
    if report.hermitian_deviation > tol {
        report.violations.push(Violation::NotHermitian {
            deviation: report.hermitian_deviation,
        });
    }
    let tr = rho.trace();
    report.trace = tr.re;
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        report.violations.push(Violation::Trace { trace: tr.re });
    }
    let vals = eigenvalues_unchecked(rho);
    report.min_eigenvalue = vals.first().copied().unwrap_or(f64::NAN);
    if report.min_eigenvalue < -tol {
        report.violations.push(Violation::Negative {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    report
}
