//! Collective spin in the symmetric (Dicke) subspace.
//!
//! An ensemble of `2N` spin-1/2 particles restricted to its maximal-spin
//! sector has total spin `J = N` and is represented on the `2N + 1`
//! eigenstates `|m>` of `J_z`, `m = -N..=N`. Matrix index `i` corresponds to
//! `m = i - N`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute tolerance for Hermiticity and unit trace.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Floor for the smallest eigenvalue of a valid density matrix.
pub const PSD_FLOOR: f64 = -1e-10;
/// Expectation values with a larger imaginary part signal an upstream bug.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-8;
/// Below this mean-spin length the squeezing axis is undefined.
pub const MEAN_SPIN_FLOOR: f64 = 1e-12;

/// Physical parameters of the spin ensemble and the mechanical mode.
///
/// All frequencies are in units of the single-phonon coupling `g`, so times
/// are reported as the dimensionless `g t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    n: usize,
    g: f64,
    omega_a: f64,
    q: f64,
    n_th: f64,
}

impl EnsembleSpec {
    pub const DEFAULT_N: usize = 10;
    pub const DEFAULT_OMEGA_A: f64 = 1000.0;
    pub const DEFAULT_Q: f64 = 1000.0;

    /// Builds a spec with `g = 1`.
    pub fn new(n: usize, omega_a: f64, q: f64, n_th: f64) -> Result<Self> {
        Self::with_coupling(n, 1.0, omega_a, q, n_th)
    }

    pub fn with_coupling(n: usize, g: f64, omega_a: f64, q: f64, n_th: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("N", "must be at least 1"));
        }
        // g = 0 decouples spin and phonon
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::param("g", format!("must be non-negative, got {g}")));
        }
        if !(omega_a.is_finite() && omega_a > 0.0) {
            return Err(Error::param("omega_a", format!("must be positive, got {omega_a}")));
        }
        // Q = inf is allowed and means a lossless resonator.
        if q.is_nan() || q <= 0.0 {
            return Err(Error::param("Q", format!("must be positive, got {q}")));
        }
        if !(n_th.is_finite() && n_th >= 0.0) {
            return Err(Error::param("n_th", format!("must be non-negative, got {n_th}")));
        }
        Ok(Self {
            n,
            g,
            omega_a,
            q,
            n_th,
        })
    }

    /// `N = 10`, `omega_a = 1000 g`, `Q = 1000`, `n_th = 0`.
    pub fn defaults() -> Self {
        Self {
            n: Self::DEFAULT_N,
            g: 1.0,
            omega_a: Self::DEFAULT_OMEGA_A,
            q: Self::DEFAULT_Q,
            n_th: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// Mechanical energy decay rate `omega_a / Q`.
    pub fn gamma(&self) -> f64 {
        self.omega_a / self.q
    }

    /// `(n_th + 1/2) / Q`, the decoherence accumulated per unit of twisting.
    pub fn mu(&self) -> f64 {
        (self.n_th + 0.5) / self.q
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::with_coupling(n, self.g, self.omega_a, self.q, self.n_th)
    }
    pub fn with_q(self, q: f64) -> Result<Self> {
        Self::with_coupling(self.n, self.g, self.omega_a, q, self.n_th)
    }
    pub fn with_n_th(self, n_th: f64) -> Result<Self> {
        Self::with_coupling(self.n, self.g, self.omega_a, self.q, n_th)
    }
    pub fn with_omega_a(self, omega_a: f64) -> Result<Self> {
        Self::with_coupling(self.n, self.g, omega_a, self.q, self.n_th)
    }
}

/// Density matrix over the Dicke states of a spin-`N` ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeMatrix {
    n: usize,
    data: DMatrix<C64>,
}

impl DickeMatrix {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a square odd-dimensional matrix without the physical checks.
    pub fn from_matrix_unchecked(data: DMatrix<C64>) -> Result<Self> {
        let dim = data.nrows();
        if data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.ncols(),
            });
        }
        if dim % 2 == 0 || dim == 0 {
            return Err(Error::InvalidState(format!(
                "dimension {dim} is not of the form 2N+1"
            )));
        }
        Ok(Self {
            n: (dim - 1) / 2,
            data,
        })
    }

    /// Projector onto a normalized state vector given in the Dicke basis.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let dim = amplitudes.len();
        let scale = 1.0 / norm;
        let data = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj() * scale);
        Self::from_matrix_unchecked(data)
    }

    /// The stretched or intermediate Dicke state `|m><m|`.
    pub fn dicke_state(n: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > n {
            return Err(Error::param("m", format!("|m| must not exceed N={n}")));
        }
        let dim = 2 * n + 1;
        let mut data = DMatrix::zeros(dim, dim);
        let i = index(n, m);
        data[(i, i)] = C64::new(1.0, 0.0);
        Self::from_matrix_unchecked(data)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 2 * n + 1;
        let data = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }
    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Element `<m|rho|n>` addressed by magnetic quantum numbers.
    pub fn get(&self, m: i64, n: i64) -> C64 {
        self.data[(index(self.n, m), index(self.n, n))]
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(HERMITIAN_TOL, TRACE_TOL, PSD_FLOOR)
    }

    pub fn validate_with(&self, herm_tol: f64, trace_tol: f64, psd_floor: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < psd_floor {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }
}

/// Matrix index of magnetic quantum number `m` in a spin-`n` basis.
#[inline]
pub fn index(n: usize, m: i64) -> usize {
    (m + n as i64) as usize
}

/// Magnetic quantum number at matrix index `i`.
#[inline]
pub fn magnetic(n: usize, i: usize) -> i64 {
    i as i64 - n as i64
}

/// The Cartesian components of the collective spin for total spin `J = N`.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub jx: DMatrix<C64>,
    pub jy: DMatrix<C64>,
    pub jz: DMatrix<C64>,
}

/// `J_x`, `J_y`, `J_z` in the Dicke basis, built from the ladder operators.
pub fn collective_operators(n: usize) -> CollectiveOperators {
    let dim = 2 * n + 1;
    let j = n as f64;
    let mut jp = DMatrix::<C64>::zeros(dim, dim);
    let mut jz = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        let m = magnetic(n, i) as f64;
        jz[(i, i)] = C64::new(m, 0.0);
        if i + 1 < dim {
            // <m+1|J+|m>
            jp[(i + 1, i)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::new(0.5, 0.0);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    CollectiveOperators { jx, jy, jz }
}

/// Natural log of `k!` for `k = 0..=max`.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Amplitudes `c_m = 2^{-N} sqrt(C(2N, N+m))` of the coherent spin state along +x.
pub fn css_x_amplitudes(n: usize) -> Vec<f64> {
    let lf = ln_factorials(2 * n);
    let ln2 = std::f64::consts::LN_2;
    (0..=2 * n)
        .map(|i| {
            let ln_binom = lf[2 * n] - lf[i] - lf[2 * n - i];
            (0.5 * ln_binom - n as f64 * ln2).exp()
        })
        .collect()
}

/// Coherent spin state polarized along +x, `J_x |psi> = N |psi>`.
pub fn css_x(n: usize) -> DickeMatrix {
    let c = css_x_amplitudes(n);
    let dim = c.len();
    let data = DMatrix::from_fn(dim, dim, |i, j| C64::new(c[i] * c[j], 0.0));
    DickeMatrix { n, data }
}

/// Exact one-axis twisting `e^{-i theta J_z^2} rho e^{i theta J_z^2}`.
pub fn one_axis_twist(rho: &DickeMatrix, theta: f64) -> DickeMatrix {
    let n = rho.n;
    let data = DMatrix::from_fn(rho.dim(), rho.dim(), |i, j| {
        let (m, k) = (magnetic(n, i) as f64, magnetic(n, j) as f64);
        rho.data[(i, j)] * C64::from_polar(1.0, -theta * (m * m - k * k))
    });
    DickeMatrix { n, data }
}

/// First and symmetrized second moments of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    /// Spin size `N` the moments were taken for.
    pub n: usize,
    pub mean: [f64; 3],
    /// `<(J_i J_j + J_j J_i)/2> - <J_i><J_j>`.
    pub cov: [[f64; 3]; 3],
}

impl SpinMoments {
    pub fn mean_norm(&self) -> f64 {
        self.mean.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Smallest variance in the plane perpendicular to the mean spin.
    ///
    /// `frame_angle` rotates the orthonormal pair spanning that plane; the
    /// result does not depend on it.
    pub fn min_perpendicular_variance(&self, frame_angle: f64) -> Result<f64> {
        let len = self.mean_norm();
        if len <= MEAN_SPIN_FLOOR {
            return Err(Error::MeanSpinVanished { norm: len });
        }
        let n0 = self.mean.map(|x| x / len);
        // helper axis least aligned with n0
        let k = (0..3)
            .min_by(|&a, &b| n0[a].abs().total_cmp(&n0[b].abs()))
            .unwrap_or(0);
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let a = normalize(cross(n0, e));
        let b = cross(n0, a);
        let (s, c) = frame_angle.sin_cos();
        let n1 = [0, 1, 2].map(|i| c * a[i] + s * b[i]);
        let n2 = [0, 1, 2].map(|i| -s * a[i] + c * b[i]);
        let c11 = quad_form(&self.cov, n1, n1);
        let c22 = quad_form(&self.cov, n2, n2);
        let c12 = quad_form(&self.cov, n1, n2);
        let half_sum = 0.5 * (c11 + c22);
        let half_diff = 0.5 * (c11 - c22);
        Ok(half_sum - half_diff.hypot(c12))
    }

    pub fn squeezing(&self) -> Result<f64> {
        Ok(self.min_perpendicular_variance(0.0)? / (self.n as f64 / 2.0))
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / l)
}

fn quad_form(m: &[[f64; 3]; 3], u: [f64; 3], v: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += u[i] * m[i][j] * v[j];
        }
    }
    acc
}

/// Collective operators together with their symmetrized pair products, so
/// that moments reduce to elementwise trace pairings.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    n: usize,
    linear: [DMatrix<C64>; 3],
    // xx, yy, zz, xy, xz, yz
    quadratic: [DMatrix<C64>; 6],
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

impl SpinOperators {
    pub fn new(n: usize) -> Self {
        let CollectiveOperators { jx, jy, jz } = collective_operators(n);
        let linear = [jx, jy, jz];
        let quadratic = PAIRS.map(|(a, b)| {
            (&linear[a] * &linear[b] + &linear[b] * &linear[a]) * C64::new(0.5, 0.0)
        });
        Self {
            n,
            linear,
            quadratic,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn moments(&self, rho: &DickeMatrix) -> Result<SpinMoments> {
        if rho.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n + 1,
                found: rho.dim(),
            });
        }
        let mut residue = 0.0f64;
        let mut real_part = |z: C64| {
            residue = residue.max(z.im.abs());
            z.re
        };
        let mean = [0, 1, 2].map(|k| real_part(trace_product(&rho.data, &self.linear[k])));
        let second: Vec<f64> = self
            .quadratic
            .iter()
            .map(|op| real_part(trace_product(&rho.data, op)))
            .collect();
        if residue > IMAG_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue { residue });
        }
        let mut cov = [[0.0; 3]; 3];
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            let c = second[k] - mean[a] * mean[b];
            cov[a][b] = c;
            cov[b][a] = c;
        }
        Ok(SpinMoments {
            n: self.n,
            mean,
            cov,
        })
    }

    pub fn squeezing(&self, rho: &DickeMatrix) -> Result<f64> {
        self.moments(rho)?.squeezing()
    }
}

/// `Tr(rho A)` without forming the product.
fn trace_product(rho: &DMatrix<C64>, op: &DMatrix<C64>) -> C64 {
    let d = rho.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc
}

pub fn spin_moments(rho: &DickeMatrix) -> Result<SpinMoments> {
    SpinOperators::new(rho.n).moments(rho)
}

/// Kitagawa-Ueda squeezing parameter: minimal perpendicular variance over `N/2`.
pub fn squeezing_parameter(rho: &DickeMatrix) -> Result<f64> {
    spin_moments(rho)?.squeezing()
}
