//! Dense complex matrix kernel for few-site quantum states.
//!
//! Everything here is sized for detection-space dimensions (4, 9, 16, up to
//! 256 for the loss dilation), so the storage is a plain row-major `Vec` and
//! the eigensolver is a cyclic Jacobi sweep with complex rotations. The
//! numerical contracts (Hermiticity tolerance, eigenpair residual, real
//! expectation values) are enforced here once so the physics modules can rely
//! on them.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{tol, Error, Result};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// `0 + 0i`.
pub const ZERO: C64 = Complex::new(0.0, 0.0);
/// `1 + 0i`.
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// Square complex matrix, dense, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    /// Build entry-wise from a closure over `(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from nested rows; every row must have the same length as the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "from_rows",
                    expected: dim,
                    actual: row.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Diagonal matrix from real entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, C64::new(d, 0.0));
        }
        m
    }

    /// Rank-one projector `v v†` from a state vector.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Matrix dimension (rows == cols).
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Scale every entry by a complex factor.
    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    /// Scale every entry by a real factor.
    pub fn scale_re(&self, r: f64) -> Self {
        self.scale(C64::new(r, 0.0))
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Kronecker (tensor) product; `self` indexes the leftmost, slowest
    /// -varying subsystem of the result.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim, rhs.dim);
        let mut out = Self::zeros(da * db);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.get(ia, ja);
                if a == ZERO {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out.set(ia * db + ib, ja * db + jb, a * rhs.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise difference `max |self_ij - rhs_ij|`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†)/2`: the Hermitian part.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    /// Error unless the matrix is Hermitian within [`tol::HERMITICITY`].
    pub fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol::HERMITICITY {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: tol::HERMITICITY,
            });
        }
        Ok(())
    }

    /// Transpose of the subsystem `subsystem` only, with the rest untouched.
    ///
    /// The matrix must act on the composite space described by `shape`.
    pub fn partial_transpose(&self, shape: &SubsystemShape, subsystem: usize) -> Result<Self> {
        shape.require_total(self.dim, "partial_transpose")?;
        shape.require_index(subsystem)?;
        let mut out = Self::zeros(self.dim);
        for row in 0..self.dim {
            let mut ridx = shape.decompose(row);
            for col in 0..self.dim {
                let mut cidx = shape.decompose(col);
                std::mem::swap(&mut ridx[subsystem], &mut cidx[subsystem]);
                let v = self.get(row, col);
                out.set(shape.compose(&ridx), shape.compose(&cidx), v);
                std::mem::swap(&mut ridx[subsystem], &mut cidx[subsystem]);
            }
        }
        Ok(out)
    }

    /// Trace out every subsystem not listed in `keep`; `keep` must be strictly
    /// ascending. The result is ordered as the kept subsystems were.
    pub fn partial_trace(&self, shape: &SubsystemShape, keep: &[usize]) -> Result<Self> {
        shape.require_total(self.dim, "partial_trace")?;
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidShape(format!(
                "keep set {keep:?} must be nonempty and strictly ascending"
            )));
        }
        for &k in keep {
            shape.require_index(k)?;
        }
        let traced: Vec<usize> = (0..shape.len()).filter(|k| !keep.contains(k)).collect();
        let keep_shape = SubsystemShape::new(keep.iter().map(|&k| shape.dim_of(k)).collect())?;
        let traced_dim: usize = traced.iter().map(|&k| shape.dim_of(k)).product();
        let traced_shape = if traced.is_empty() {
            None
        } else {
            Some(SubsystemShape::new(
                traced.iter().map(|&k| shape.dim_of(k)).collect(),
            )?)
        };

        let n = shape.len();
        let mut out = Self::zeros(keep_shape.total_dim());
        let mut full_row = vec![0usize; n];
        let mut full_col = vec![0usize; n];
        for kr in 0..keep_shape.total_dim() {
            let kr_parts = keep_shape.decompose(kr);
            for kc in 0..keep_shape.total_dim() {
                let kc_parts = keep_shape.decompose(kc);
                let mut acc = ZERO;
                for t in 0..traced_dim {
                    let t_parts = match &traced_shape {
                        Some(ts) => ts.decompose(t),
                        None => Vec::new(),
                    };
                    for (pos, &k) in keep.iter().enumerate() {
                        full_row[k] = kr_parts[pos];
                        full_col[k] = kc_parts[pos];
                    }
                    for (pos, &k) in traced.iter().enumerate() {
                        full_row[k] = t_parts[pos];
                        full_col[k] = t_parts[pos];
                    }
                    acc += self.get(shape.compose(&full_row), shape.compose(&full_col));
                }
                out.set(kr, kc, acc);
            }
        }
        Ok(out)
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    ///
    /// The input is checked against [`tol::HERMITICITY`], symmetrized to
    /// `(m + m†)/2`, and diagonalized by cyclic Jacobi sweeps. Each eigenpair
    /// satisfies `‖Mv - λv‖ ≤ 1e-9` for dimensions up to 256.
    pub fn hermitian_eigenvalues(&self) -> Result<HermitianSpectrum> {
        let (values, _) = jacobi_hermitian(self, false)?;
        Ok(HermitianSpectrum { values })
    }

    /// Ascending eigenvalues plus the matching orthonormal eigenvectors
    /// (columns of the returned matrix), under the same contract as
    /// [`Self::hermitian_eigenvalues`].
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let (values, vectors) = jacobi_hermitian(self, true)?;
        Ok((values, vectors.expect("vectors requested")))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Dimensions of the tensor factors a matrix acts on, leftmost factor first.
///
/// Subsystem 0 is the slowest-varying index: the composite basis index of
/// parts `(i_0, …, i_{n-1})` is `((i_0·d_1 + i_1)·d_2 + i_2)…`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    /// Validate and build; every factor dimension must be at least 1 and the
    /// list nonempty.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no subsystems".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero-dim subsystem in {dims:?}")));
        }
        Ok(Self { dims })
    }

    /// Two factors of equal dimension — the common bipartite case.
    pub fn pair(d: usize) -> Self {
        Self { dims: vec![d, d] }
    }

    /// Product of all factor dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of tensor factors.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    /// True if there is exactly one factor.
    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Dimension of factor `k`.
    pub fn dim_of(&self, k: usize) -> usize {
        self.dims[k]
    }

    /// All factor dimensions, leftmost first.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Split a flat index into per-subsystem indices.
    pub fn decompose(&self, mut flat: usize) -> Vec<usize> {
        let mut parts = vec![0usize; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            parts[k] = flat % d;
            flat /= d;
        }
        parts
    }

    /// Flatten per-subsystem indices (inverse of [`Self::decompose`]).
    pub fn compose(&self, parts: &[usize]) -> usize {
        debug_assert_eq!(parts.len(), self.dims.len());
        let mut flat = 0usize;
        for (k, &d) in self.dims.iter().enumerate() {
            debug_assert!(parts[k] < d);
            flat = flat * d + parts[k];
        }
        flat
    }

    fn require_total(&self, dim: usize, context: &'static str) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.total_dim(),
                actual: dim,
            });
        }
        Ok(())
    }

    fn require_index(&self, k: usize) -> Result<()> {
        if k >= self.dims.len() {
            return Err(Error::InvalidShape(format!(
                "subsystem index {k} out of range for {} factors",
                self.dims.len()
            )));
        }
        Ok(())
    }
}

/// Ascending real eigenvalues of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSpectrum {
    values: Vec<f64>,
}

impl HermitianSpectrum {
    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest eigenvalue.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest eigenvalue.
    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    /// Sum of all eigenvalues (equals the trace of the matrix).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Cyclic Jacobi diagonalization for Hermitian matrices.
///
/// Rotations `R(p,q)` with a complex phase zero one off-diagonal pair at a
/// time; sweeps repeat until the off-diagonal Frobenius norm falls below
/// `1e-14 · max(1, ‖A‖_F)`. Quadratic convergence makes ~10 sweeps enough for
/// dim 256.
fn jacobi_hermitian(
    m: &ComplexMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    m.require_hermitian()?;
    let n = m.dim();
    let mut a = m.symmetrized();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));

    if n == 1 {
        return Ok((vec![a.get(0, 0).re], v));
    }

    let target = 1e-14 * a.frobenius().max(1.0);
    let max_sweeps = 60;
    let mut sweeps = 0;
    loop {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j).norm_sqr();
            }
        }
        let off = off.sqrt();
        if off <= target {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let g = a.get(p, q);
                let gn = g.norm();
                if gn <= target / (n as f64) {
                    continue;
                }
                let phase = g / gn; // e^{i phi}
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let tau = (beta - alpha) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s; // s e^{i phi}
                let spc = sp.conj(); // s e^{-i phi}

                // Columns p and q of A (rows follow by Hermitian symmetry).
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    let new_kp = akp * c - akq * spc;
                    let new_kq = akp * sp + akq * c;
                    a.set(k, p, new_kp);
                    a.set(p, k, new_kp.conj());
                    a.set(k, q, new_kq);
                    a.set(q, k, new_kq.conj());
                }
                a.set(p, p, C64::new(alpha - t * gn, 0.0));
                a.set(q, q, C64::new(beta + t * gn, 0.0));
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);

                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm.get(k, p);
                        let vkq = vm.get(k, q);
                        vm.set(k, p, vkp * c - vkq * spc);
                        vm.set(k, q, vkp * sp + vkq * c);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = v.map(|vm| {
        ComplexMatrix::from_fn(n, |i, j| vm.get(i, order[j]))
    });
    Ok((values, vectors))
}

/// Hermitian operator with a lazily cached spectral decomposition.
#[derive(Debug)]
pub struct Observable {
    matrix: ComplexMatrix,
    spectral: OnceLock<Spectral>,
}

#[derive(Debug)]
struct Spectral {
    /// Distinct outcomes (ascending) with their spectral projectors.
    outcomes: Vec<(f64, ComplexMatrix)>,
}

impl Clone for Observable {
    fn clone(&self) -> Self {
        Self {
            matrix: self.matrix.clone(),
            spectral: OnceLock::new(),
        }
    }
}

impl Observable {
    /// Validate Hermiticity (within [`tol::HERMITICITY`]) and wrap; the stored
    /// matrix is the symmetrized input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_hermitian()?;
        Ok(Self {
            matrix: matrix.symmetrized(),
            spectral: OnceLock::new(),
        })
    }

    /// The operator matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Operator dimension.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Sum of two observables on the same space.
    pub fn sum(&self, rhs: &Observable) -> Observable {
        Observable {
            matrix: &self.matrix + &rhs.matrix,
            spectral: OnceLock::new(),
        }
    }

    /// Distinct measurement outcomes (ascending) with spectral projectors.
    ///
    /// Eigenvalues closer than [`tol::OUTCOME_CLUSTER`] are grouped into a
    /// single outcome whose projector spans the whole cluster; the outcome
    /// value is the cluster mean.
    pub fn outcomes(&self) -> Result<&[(f64, ComplexMatrix)]> {
        if self.spectral.get().is_none() {
            let (values, vectors) = self.matrix.hermitian_eigen()?;
            let n = values.len();
            let mut outcomes: Vec<(f64, ComplexMatrix)> = Vec::new();
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && values[end] - values[end - 1] <= tol::OUTCOME_CLUSTER {
                    end += 1;
                }
                let mut proj = ComplexMatrix::zeros(n);
                for k in start..end {
                    let col: Vec<C64> = (0..n).map(|i| vectors.get(i, k)).collect();
                    proj = &proj + &ComplexMatrix::outer(&col);
                }
                let value = values[start..end].iter().sum::<f64>() / (end - start) as f64;
                outcomes.push((value, proj));
                start = end;
            }
            let _ = self.spectral.set(Spectral { outcomes });
        }
        Ok(&self.spectral.get().expect("cached").outcomes)
    }
}

/// Validated quantum state: Hermitian, unit trace, positive semidefinite
/// within tolerance, carrying its subsystem shape.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    shape: SubsystemShape,
}

impl DensityMatrix {
    /// Validate and wrap a matrix as a state on the composite space `shape`.
    ///
    /// Checks performed: shape total matches the dimension, Hermiticity within
    /// [`tol::HERMITICITY`] (the stored matrix is symmetrized), trace within
    /// [`tol::STATE_TRACE`] of one, minimum eigenvalue at least
    /// `-`[`tol::STATE_EIGENVALUE`].
    pub fn new(matrix: ComplexMatrix, shape: SubsystemShape) -> Result<Self> {
        if shape.total_dim() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                context: "density matrix shape",
                expected: shape.total_dim(),
                actual: matrix.dim(),
            });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol::HERMITICITY {
            return Err(Error::InvalidState(format!(
                "Hermiticity deviation {deviation:.3e} exceeds {:.1e}",
                tol::HERMITICITY
            )));
        }
        let matrix = matrix.symmetrized();
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::STATE_TRACE || trace.im.abs() > tol::STATE_TRACE {
            return Err(Error::InvalidState(format!(
                "trace {trace} differs from 1 beyond {:.1e}",
                tol::STATE_TRACE
            )));
        }
        let min = matrix.hermitian_eigenvalues()?.min();
        if min < -tol::STATE_EIGENVALUE {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:.3e} below -{:.1e}",
                tol::STATE_EIGENVALUE
            )));
        }
        Ok(Self { matrix, shape })
    }

    /// The state matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The subsystem shape the state acts on.
    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr[ρ²]`, equal to 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = ZERO;
        let n = self.matrix.dim();
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix.get(i, j) * self.matrix.get(j, i);
            }
        }
        acc.re
    }
}

/// `Tr[obs · rho]`, guaranteed real for a Hermitian observable; errors if the
/// imaginary part exceeds [`tol::IMAG_PART`].
pub fn expectation(obs: &Observable, rho: &DensityMatrix) -> Result<f64> {
    trace_product_real(obs.matrix(), rho.matrix())
}

/// `⟨obs²⟩ - ⟨obs⟩²`; tiny negative results (above `-`[`tol::VARIANCE_CLAMP`])
/// are clamped to zero, anything lower is a contract violation.
pub fn variance(obs: &Observable, rho: &DensityMatrix) -> Result<f64> {
    let mean = expectation(obs, rho)?;
    let squared = obs.matrix().matmul(obs.matrix());
    let second = trace_product_real(&squared, rho.matrix())?;
    let var = second - mean * mean;
    if var < -tol::VARIANCE_CLAMP {
        return Err(Error::ContractViolation(format!(
            "variance {var:.3e} below -{:.1e}",
            tol::VARIANCE_CLAMP
        )));
    }
    Ok(var.max(0.0))
}

/// `Re Tr[a · b]` with the imaginary-part contract enforced.
pub(crate) fn trace_product_real(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "trace product",
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let mut acc = ZERO;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            acc += a.get(i, j) * b.get(j, i);
        }
    }
    if acc.im.abs() > tol::IMAG_PART {
        return Err(Error::ContractViolation(format!(
            "trace product has imaginary part {:.3e} beyond {:.1e}",
            acc.im,
            tol::IMAG_PART
        )));
    }
    Ok(acc.re)
}

// ── Serialization ────────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct DenseStateJson {
    dim: usize,
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut re = vec![vec![0.0; n]; n];
        let mut im = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix.get(i, j);
                re[i][j] = v.re;
                im[i][j] = v.im;
            }
        }
        DenseStateJson {
            dim: n,
            dims: self.shape.dims().to_vec(),
            re,
            im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = DenseStateJson::deserialize(deserializer)?;
        if raw.re.len() != raw.dim
            || raw.im.len() != raw.dim
            || raw.re.iter().any(|r| r.len() != raw.dim)
            || raw.im.iter().any(|r| r.len() != raw.dim)
        {
            return Err(D::Error::custom("re/im must be dim x dim"));
        }
        let matrix = ComplexMatrix::from_fn(raw.dim, |i, j| C64::new(raw.re[i][j], raw.im[i][j]));
        let shape = SubsystemShape::new(raw.dims).map_err(D::Error::custom)?;
        DensityMatrix::new(matrix, shape).map_err(D::Error::custom)
    }
}
