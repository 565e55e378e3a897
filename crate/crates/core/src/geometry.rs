//! Phonon phase-space trajectories and the dissipative geometric phase.
//!
//! For the spin eigenvalue `m` the mechanical mode is displaced to
//! `m * alpha(t)` with the per-unit-`J_z` amplitude
//! `alpha(t) = -i g / k * (1 - exp(-k t))`, `k = gamma/2 + i omega_a`.
//! The coherence between `|m>` and `|n>` then acquires the exponent
//!
//! ```text
//! phi_mn(t) = -(n_th + 1/2) (n - m)^2 { gamma * int_0^t |alpha|^2 + |alpha(t)|^2 }
//!             + i g (n^2 - m^2) Re int_0^t alpha
//! ```
//!
//! Both time integrals have exact antiderivatives, evaluated here segment by
//! segment so that the piecewise-driven Bang-Bang amplitude can reuse them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dicke::{css_x, index, magnetic, DickeMatrix, EnsembleSpec, SpinOperators};
use crate::error::{Error, Result};
use crate::quadrature::{uniform_breakpoints, Quadrature};

/// Agreement required between closed forms and quadrature.
pub const QUADRATURE_CHECK_TOL: f64 = 1e-8;

const SERIES_RADIUS: f64 = 0.1;
const SERIES_TERMS: usize = 18;

/// `(1 - e^{-z}) / z`, stable near zero.
pub(crate) fn phi1(z: C64) -> C64 {
    if z.norm() < SERIES_RADIUS {
        // sum_j (-z)^j / (j+1)!
        let mut term = C64::new(1.0, 0.0);
        let mut acc = term;
        for j in 1..SERIES_TERMS {
            term = term * (-z) / (j as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (C64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

/// `(z - 1 + e^{-z}) / z^2`, stable near zero.
fn phi2(z: C64) -> C64 {
    if z.norm() < SERIES_RADIUS {
        // sum_j (-z)^j / (j+2)!
        let mut term = C64::new(0.5, 0.0);
        let mut acc = term;
        for j in 1..SERIES_TERMS {
            term = term * (-z) / (j as f64 + 2.0);
            acc += term;
        }
        acc
    } else {
        (z - C64::new(1.0, 0.0) + (-z).exp()) / (z * z)
    }
}

/// `(1 - e^{-x}) / x` for real `x >= 0`, equal to 1 at `x = 0`.
fn phi1_real(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `1 - 2 Re phi1(z) + phi1(2 Re z)`, i.e. `(1/Δ) int_0^Δ |1 - e^{-k u}|^2 du`.
fn loop_kernel(z: C64) -> f64 {
    if z.norm() < SERIES_RADIUS {
        let x = 2.0 * z.re;
        let mut zp = C64::new(1.0, 0.0);
        let mut xp = 1.0;
        let mut fact = 1.0;
        let mut acc = 0.0;
        for j in 1..SERIES_TERMS {
            zp *= -z;
            xp *= -x;
            fact *= j as f64 + 1.0;
            acc += (-2.0 * zp.re + xp) / fact;
        }
        acc
    } else {
        1.0 - 2.0 * phi1(z).re + phi1_real(2.0 * z.re)
    }
}

/// `phi1(conj z) - phi1(2 Re z)`, i.e. `(1/Δ) int_0^Δ e^{-conj(k) u}(1 - e^{-k u}) du`.
fn mixed_kernel(z: C64) -> C64 {
    if z.norm() < SERIES_RADIUS {
        let zc = z.conj();
        let x = C64::new(2.0 * z.re, 0.0);
        let mut zp = C64::new(1.0, 0.0);
        let mut xp = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..SERIES_TERMS {
            zp *= -zc;
            xp *= -x;
            fact *= j as f64 + 1.0;
            acc += (zp - xp) / fact;
        }
        acc
    } else {
        phi1(z.conj()) - phi1_real(2.0 * z.re)
    }
}

/// Damped oscillator constants shared by all segments.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Oscillator {
    pub g: f64,
    pub gamma: f64,
    /// `gamma / 2 + i omega_a`
    pub k: C64,
}

impl Oscillator {
    pub fn new(spec: &EnsembleSpec) -> Self {
        Self {
            g: spec.g(),
            gamma: spec.gamma(),
            k: C64::new(spec.gamma() / 2.0, spec.omega_a()),
        }
    }

    /// Steady displacement `-i s g / k` for drive sign `s`.
    pub fn drive(&self, sign: f64) -> C64 {
        C64::new(0.0, -sign * self.g) / self.k
    }

    /// Amplitude after evolving `alpha0` for `delta` under drive sign `sign`.
    pub fn amplitude_after(&self, alpha0: C64, sign: f64, delta: f64) -> C64 {
        let z = self.k * delta;
        alpha0 * (-z).exp() + self.drive(sign) * z * phi1(z)
    }

    /// Exact integrals over one constant-drive segment of width `delta`.
    pub fn segment(&self, alpha0: C64, sign: f64, delta: f64) -> Segment {
        let c = self.drive(sign);
        let z = self.k * delta;
        let p1 = phi1(z);
        let end = alpha0 * (-z).exp() + c * z * p1;
        let integral = (alpha0 * p1 + c * z * phi2(z)) * delta;
        let integral_sq = delta
            * (alpha0.norm_sqr() * phi1_real(self.gamma * delta)
                + c.norm_sqr() * loop_kernel(z)
                + 2.0 * (alpha0.conj() * c * mixed_kernel(z)).re);
        Segment {
            end,
            integral,
            integral_sq,
        }
    }
}

/// Result of propagating the amplitude across one constant-drive segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment {
    pub end: C64,
    /// `int alpha dtau` over the segment
    pub integral: C64,
    /// `int |alpha|^2 dtau` over the segment
    pub integral_sq: f64,
}

/// Per-unit-`J_z` phonon amplitude `alpha(t)` starting from `alpha(0) = 0`.
pub fn unit_amplitude(spec: &EnsembleSpec, t: f64) -> C64 {
    Oscillator::new(spec).amplitude_after(C64::new(0.0, 0.0), 1.0, t)
}

/// One point on a phase-space trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSample {
    pub t: f64,
    pub alpha: C64,
}

/// Phase-space trajectory `m * alpha(t)` of the mode for spin eigenvalue `m`.
pub fn trajectory(spec: &EnsembleSpec, m: i64, times: &[f64]) -> Result<Vec<AmplitudeSample>> {
    if m.unsigned_abs() as usize > spec.n() {
        return Err(Error::param("m", format!("|m| must not exceed N={}", spec.n())));
    }
    Ok(times
        .iter()
        .map(|&t| AmplitudeSample {
            t,
            alpha: unit_amplitude(spec, t) * m as f64,
        })
        .collect())
}

/// The time integrals that enter the phase exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseIntegrals {
    pub alpha_end: C64,
    /// `int_0^t alpha`
    pub integral: C64,
    /// `int_0^t |alpha|^2`
    pub integral_sq: f64,
}

impl PhaseIntegrals {
    /// `gamma int |alpha|^2 + |alpha(t)|^2`
    pub fn decoherence(&self, gamma: f64) -> f64 {
        gamma * self.integral_sq + self.alpha_end.norm_sqr()
    }
}

/// Closed-form integrals for the undriven-start amplitude.
pub fn phase_integrals(spec: &EnsembleSpec, t: f64) -> PhaseIntegrals {
    let seg = Oscillator::new(spec).segment(C64::new(0.0, 0.0), 1.0, t);
    PhaseIntegrals {
        alpha_end: seg.end,
        integral: seg.integral,
        integral_sq: seg.integral_sq,
    }
}

/// Same integrals by adaptive quadrature over one panel per phonon period.
pub fn phase_integrals_by_quadrature(spec: &EnsembleSpec, t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let amp = spec.g() / spec.omega_a();
    let bp = uniform_breakpoints(0.0, t, 2.0 * PI / spec.omega_a());
    let re = check_quadrature(amp * t)
        .integrate(|tau| unit_amplitude(spec, tau).re, &bp)?
        .value;
    let sq = check_quadrature(amp * amp * t)
        .integrate(|tau| unit_amplitude(spec, tau).norm_sqr(), &bp)?
        .value;
    Ok((re, sq))
}

/// Relative scale below which closed form and quadrature are compared in
/// absolute terms.
pub(crate) const CHECK_SCALE: f64 = 1e-4;

/// Quadrature for the self-checks, with an absolute floor well under the
/// agreement tolerance at `scale`.
pub(crate) fn check_quadrature(scale: f64) -> Quadrature {
    Quadrature {
        rel_tol: 1e-10,
        abs_tol: 0.1 * QUADRATURE_CHECK_TOL * CHECK_SCALE * scale,
        ..Quadrature::default()
    }
}

pub(crate) fn check_agreement(what: &'static str, closed: f64, quad: f64, scale: f64) -> Result<()> {
    let diff = (closed - quad).abs();
    let tol = QUADRATURE_CHECK_TOL * closed.abs().max(quad.abs()).max(scale);
    if diff > tol {
        return Err(Error::QuadratureMismatch {
            what,
            closed_form: closed,
            quadrature: quad,
        });
    }
    Ok(())
}

fn validate_integrals(spec: &EnsembleSpec, t: f64) -> Result<PhaseIntegrals> {
    let closed = phase_integrals(spec, t);
    let (re, sq) = phase_integrals_by_quadrature(spec, t)?;
    // scale floors guard the comparison near loop closure where values vanish
    let amp = spec.g() / spec.omega_a();
    check_agreement("Re int alpha", closed.integral.re, re, CHECK_SCALE * amp * t)?;
    check_agreement("int |alpha|^2", closed.integral_sq, sq, CHECK_SCALE * amp * amp * t)?;
    Ok(closed)
}

/// Matrix of coherence exponents `phi_mn(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    n: usize,
    t: f64,
    data: DMatrix<C64>,
}

impl PhaseMatrix {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self {
            n,
            t,
            data: DMatrix::zeros(2 * n + 1, 2 * n + 1),
        }
    }

    /// Builds `-(n_th+1/2)(n-m)^2 D + i g (n^2-m^2) R - kappa(|n-m|)` with
    /// `kappa(0) = 0`.
    pub fn assemble(
        n: usize,
        t: f64,
        thermal_weight: f64,
        decoherence: f64,
        g_twist: f64,
        kappa: impl Fn(u64) -> f64,
    ) -> Self {
        let dim = 2 * n + 1;
        let data = DMatrix::from_fn(dim, dim, |i, j| {
            let (m, k) = (magnetic(n, i), magnetic(n, j));
            if m == k {
                return C64::new(0.0, 0.0);
            }
            let dm = (k - m) as f64;
            let re = -thermal_weight * dm * dm * decoherence - kappa((k - m).unsigned_abs());
            let im = g_twist * ((k * k - m * m) as f64);
            C64::new(re, im)
        });
        Self { n, t, data }
    }

    pub(crate) fn from_parts(n: usize, t: f64, data: DMatrix<C64>) -> Self {
        Self { n, t, data }
    }

    /// Wraps an arbitrary exponent matrix, e.g. one from another model.
    pub fn from_matrix(n: usize, t: f64, data: DMatrix<C64>) -> Result<Self> {
        let dim = 2 * n + 1;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { n, t, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }
    pub fn get(&self, m: i64, n: i64) -> C64 {
        self.data[(index(self.n, m), index(self.n, n))]
    }

    /// Zero diagonal, conjugate symmetry and non-positive real parts.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let d = 2 * self.n + 1;
        for i in 0..d {
            if self.data[(i, i)] != C64::new(0.0, 0.0) {
                return Err(Error::InvalidState(format!("phi diagonal {i} nonzero")));
            }
            for j in 0..d {
                let z = self.data[(i, j)];
                if (z - self.data[(j, i)].conj()).norm() > tol {
                    return Err(Error::InvalidState(format!(
                        "phi not conjugate-symmetric at ({i},{j})"
                    )));
                }
                if z.re > tol {
                    return Err(Error::InvalidState(format!("Re phi positive at ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}

/// Closed-form phase matrix for the undriven-start mode, cross-checked
/// against quadrature on every call.
pub fn phase_matrix(spec: &EnsembleSpec, t: f64) -> Result<PhaseMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("must be a non-negative time, got {t}")));
    }
    let ints = validate_integrals(spec, t)?;
    Ok(phase_matrix_from(spec, t, &ints))
}

fn phase_matrix_from(spec: &EnsembleSpec, t: f64, ints: &PhaseIntegrals) -> PhaseMatrix {
    PhaseMatrix::assemble(
        spec.n(),
        t,
        spec.n_th() + 0.5,
        ints.decoherence(spec.gamma()),
        spec.g() * ints.integral.re,
        |_| 0.0,
    )
}

/// Applies `rho_mn(t) = rho_mn(0) exp(phi_mn)` and verifies the result is a
/// valid density matrix.
pub fn apply_phase(rho0: &DickeMatrix, phi: &PhaseMatrix) -> Result<DickeMatrix> {
    if rho0.n() != phi.n {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: 2 * phi.n + 1,
        });
    }
    let data = rho0.matrix().zip_map(&phi.data, |r, p| r * p.exp());
    DickeMatrix::new(data)
}

/// Phase matrices and squeezing curves for one parameter set.
///
/// The closed-form integrals are validated against quadrature once, when the
/// engine is built; later evaluations use the closed forms alone.
#[derive(Debug, Clone)]
pub struct PhaseEngine {
    spec: EnsembleSpec,
    ops: SpinOperators,
    initial: DickeMatrix,
}

impl PhaseEngine {
    /// Validation time: a generic, non-commensurate `g t`, capped to a few
    /// thousand phonon periods.
    pub fn validation_time(spec: &EnsembleSpec) -> f64 {
        std::f64::consts::E.powi(2).min(2000.0 * 2.0 * PI / spec.omega_a() + 0.123 / spec.omega_a())
    }

    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        validate_integrals(&spec, Self::validation_time(&spec))?;
        Ok(Self {
            ops: SpinOperators::new(spec.n()),
            initial: css_x(spec.n()),
            spec,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }
    pub fn operators(&self) -> &SpinOperators {
        &self.ops
    }
    pub fn initial_state(&self) -> &DickeMatrix {
        &self.initial
    }

    pub fn phase_matrix(&self, t: f64) -> PhaseMatrix {
        phase_matrix_from(&self.spec, t, &phase_integrals(&self.spec, t))
    }

    pub fn state(&self, t: f64) -> Result<DickeMatrix> {
        apply_phase(&self.initial, &self.phase_matrix(t))
    }

    /// `xi^2` of the evolved x-polarized coherent spin state at time `t`.
    pub fn squeezing(&self, t: f64) -> Result<f64> {
        self.ops.squeezing(&self.state(t)?)
    }
}
