//! Bang-Bang decoupling: alternating `±pi` collective rotations about `y`.
//!
//! The pulses flip the sign of `J_z` in both the phonon coupling and the
//! spin-bath coupling, while `J_z^2` (the twisting generator) is untouched.
//! The phonon part is handled exactly, interval by interval; the bath enters
//! only through the upper bound on the dephasing exponent
//! `kappa_mn(t) <= (|n-m| + 2) int_0^inf G(w) F_M(w, t) dw`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dicke::{css_x, DickeMatrix, EnsembleSpec, SpinOperators};
use crate::error::{Error, Result};
use crate::geometry::{
    apply_phase, check_agreement, check_quadrature, Oscillator, PhaseMatrix, CHECK_SCALE,
};
use crate::quadrature::{uniform_breakpoints, Quadrature};

/// Pulse schedule: `M` equal intervals covering `[0, t_total)`, the first
/// with sign `+1`, alternating afterwards. `M = 0` and `M = 1` both mean a
/// constant `+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBSchedule {
    pulses: u32,
    t_total: f64,
    start_sign: f64,
}

impl BBSchedule {
    pub fn new(pulses: u32, t_total: f64) -> Result<Self> {
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::param("t_total", format!("must be positive, got {t_total}")));
        }
        Ok(Self {
            pulses,
            t_total,
            start_sign: 1.0,
        })
    }

    /// Same schedule with every interval sign reversed.
    pub fn flipped(self) -> Self {
        Self {
            start_sign: -self.start_sign,
            ..self
        }
    }

    pub fn pulses(&self) -> u32 {
        self.pulses
    }
    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    pub fn intervals(&self) -> usize {
        self.pulses.max(1) as usize
    }

    /// Start of interval `p`; `boundary(intervals())` is `t_total`.
    pub fn boundary(&self, p: usize) -> f64 {
        if p >= self.intervals() {
            self.t_total
        } else {
            p as f64 * self.t_total / self.intervals() as f64
        }
    }

    pub fn sign_of_interval(&self, p: usize) -> f64 {
        if p % 2 == 0 {
            self.start_sign
        } else {
            -self.start_sign
        }
    }
}

/// `epsilon(tau) = (-1)^floor(M tau / t_total)`.
pub fn switch_function(sched: &BBSchedule, tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau < sched.t_total) {
        return Err(Error::TimeOutOfRange {
            tau,
            t_total: sched.t_total,
        });
    }
    let p = ((sched.intervals() as f64 * tau / sched.t_total).floor() as usize)
        .min(sched.intervals() - 1);
    Ok(sched.sign_of_interval(p))
}

/// Amplitude and the two phase integrals accumulated up to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBIntegrals {
    pub alpha_end: C64,
    /// `Re int_0^t epsilon alpha'`
    pub twist: f64,
    /// `int_0^t |alpha'|^2`
    pub integral_sq: f64,
}

fn check_time(sched: &BBSchedule, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= sched.t_total) {
        return Err(Error::TimeOutOfRange {
            tau: t,
            t_total: sched.t_total,
        });
    }
    Ok(())
}

/// Walks the intervals, calling `visit(p, start, end, sign, alpha_start)`.
fn walk_intervals(
    osc: &Oscillator,
    sched: &BBSchedule,
    t: f64,
    mut visit: impl FnMut(usize, f64, f64, f64, C64),
) -> C64 {
    let mut alpha = C64::new(0.0, 0.0);
    for p in 0..sched.intervals() {
        let start = sched.boundary(p);
        if start >= t {
            break;
        }
        let end = sched.boundary(p + 1).min(t);
        let s = sched.sign_of_interval(p);
        visit(p, start, end, s, alpha);
        alpha = osc.amplitude_after(alpha, s, end - start);
    }
    alpha
}

pub fn bb_integrals(spec: &EnsembleSpec, sched: &BBSchedule, t: f64) -> Result<BBIntegrals> {
    check_time(sched, t)?;
    let osc = Oscillator::new(spec);
    let mut twist = 0.0;
    let mut integral_sq = 0.0;
    let mut alpha = C64::new(0.0, 0.0);
    for p in 0..sched.intervals() {
        let start = sched.boundary(p);
        if start >= t {
            break;
        }
        let end = sched.boundary(p + 1).min(t);
        let s = sched.sign_of_interval(p);
        let seg = osc.segment(alpha, s, end - start);
        twist += s * seg.integral.re;
        integral_sq += seg.integral_sq;
        alpha = seg.end;
    }
    Ok(BBIntegrals {
        alpha_end: alpha,
        twist,
        integral_sq,
    })
}

/// `alpha'(t) = -i g int_0^t epsilon(tau) exp(-(gamma/2 + i omega_a)(t - tau)) dtau`
/// by exact propagation across the intervals.
pub fn amplitude_bb(spec: &EnsembleSpec, sched: &BBSchedule, t: f64) -> Result<C64> {
    check_time(sched, t)?;
    Ok(walk_intervals(&Oscillator::new(spec), sched, t, |_, _, _, _, _| {}))
}

/// Breakpoints at every interval boundary and every phonon period inside.
fn check_breakpoints(spec: &EnsembleSpec, sched: &BBSchedule, t: f64) -> Vec<f64> {
    let period = 2.0 * PI / spec.omega_a();
    let mut bp = vec![0.0];
    for p in 0..sched.intervals() {
        let start = sched.boundary(p);
        if start >= t {
            break;
        }
        let end = sched.boundary(p + 1).min(t);
        bp.extend(uniform_breakpoints(start, end, period).into_iter().skip(1));
    }
    bp
}

/// Direct quadrature of the defining integral of `alpha'(t)`.
///
/// Each panel is integrated in a local variable and carried to `t` by an
/// exact decay factor, so rounding in `omega_a tau` does not pollute the
/// error estimates.
pub fn amplitude_bb_by_quadrature(spec: &EnsembleSpec, sched: &BBSchedule, t: f64) -> Result<C64> {
    check_time(sched, t)?;
    if t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let k = C64::new(spec.gamma() / 2.0, spec.omega_a());
    let bp = check_breakpoints(spec, sched, t);
    let mut total = C64::new(0.0, 0.0);
    for w in bp.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = b - a;
        // the integrand has unit modulus
        let quad = Quadrature {
            rel_tol: 1e-12,
            abs_tol: 1e-13 * h,
            ..Quadrature::default()
        };
        let s = switch_function(sched, 0.5 * (a + b))?;
        let local = |v: f64| (-k * (h - v)).exp();
        let re = quad.integrate(|v| local(v).re, &[0.0, h])?.value;
        let im = quad.integrate(|v| local(v).im, &[0.0, h])?.value;
        total += C64::new(re, im) * s * (-k * (t - b)).exp();
    }
    Ok(C64::new(0.0, -spec.g()) * total)
}

fn validate_bb(spec: &EnsembleSpec, sched: &BBSchedule, t: f64) -> Result<BBIntegrals> {
    let closed = bb_integrals(spec, sched, t)?;
    if t == 0.0 {
        return Ok(closed);
    }
    let amp = spec.g() / spec.omega_a();
    let direct = amplitude_bb_by_quadrature(spec, sched, t)?;
    check_agreement("Re alpha'", closed.alpha_end.re, direct.re, CHECK_SCALE * amp)?;
    check_agreement("Im alpha'", closed.alpha_end.im, direct.im, CHECK_SCALE * amp)?;

    // integrate alpha' sampled through the per-interval representation
    let osc = Oscillator::new(spec);
    let mut starts = Vec::with_capacity(sched.intervals());
    walk_intervals(&osc, sched, t, |_, start, _, s, a| starts.push((start, s, a)));
    let alpha_at = |tau: f64| {
        let idx = starts.partition_point(|&(start, _, _)| start <= tau).saturating_sub(1);
        let (start, s, a) = starts[idx];
        (s, osc.amplitude_after(a, s, tau - start))
    };
    let bp = check_breakpoints(spec, sched, t);
    let twist = check_quadrature(amp * t)
        .integrate(|tau| {
            let (s, a) = alpha_at(tau);
            s * a.re
        }, &bp)?
        .value;
    let sq = check_quadrature(amp * amp * t)
        .integrate(|tau| alpha_at(tau).1.norm_sqr(), &bp)?
        .value;
    check_agreement("Re int eps alpha'", closed.twist, twist, CHECK_SCALE * amp * t)?;
    check_agreement("int |alpha'|^2", closed.integral_sq, sq, CHECK_SCALE * amp * amp * t)?;
    Ok(closed)
}

/// Ohmic spin bath: spectral density `eta w exp(-w / omega_c)` at inverse
/// temperature `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    eta: f64,
    omega_c: f64,
    lambda: f64,
}

impl BathSpec {
    /// Cutoff used when none is configured, in units of `g`.
    pub const DEFAULT_OMEGA_C: f64 = 1.0;

    pub fn new(eta: f64, omega_c: f64, lambda: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::param("eta", format!("must be non-negative, got {eta}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::param("omega_c", format!("must be positive, got {omega_c}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(Self {
            eta,
            omega_c,
            lambda,
        })
    }

    /// A bath that does nothing.
    pub fn none() -> Self {
        Self {
            eta: 0.0,
            omega_c: Self::DEFAULT_OMEGA_C,
            lambda: 1.0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// `x coth x`, equal to 1 at `x = 0`.
fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// `G(w) = eta w e^{-w/omega_c} (2/(e^{lambda w} - 1) + 1)`, finite at `w -> 0`.
pub fn bath_spectrum(bath: &BathSpec, omega: f64) -> f64 {
    if bath.eta == 0.0 {
        return 0.0;
    }
    let x = 0.5 * bath.lambda * omega;
    // w coth(lambda w / 2) = (2 / lambda) x coth x
    bath.eta * (-omega / bath.omega_c).exp() * 2.0 / bath.lambda * x_coth_x(x)
}

/// `F_M(w, t) = tan^2(w t / (2M+2)) (1 + (-1)^M cos(w t)) / w^2`, with the
/// removable singularities at `cos(w t / (2M+2)) = 0` resolved analytically.
pub fn filter_modulation(pulses: u32, omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let l = 2.0 * pulses as f64 + 2.0;
    let x = omega * t / l;
    let parity = if pulses % 2 == 0 { 1.0 } else { -1.0 };
    // sin^2(x) / x^2, finite at 0
    let sinc2 = if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        (x.sin() / x).powi(2)
    };
    let prefactor = sinc2 * t * t / (l * l);
    // distance to the nearest pole x_k = pi/2 + k pi
    let k = ((x - 0.5 * PI) / PI).round();
    let delta = x - (0.5 * PI + k * PI);
    if delta.abs() < 0.25 * PI {
        // near a pole the numerator is 2 sin^2((M+1) delta), so
        // F = prefactor * 2 sin^2((M+1) delta) / sin^2(delta)
        let half = 0.5 * l;
        let ratio = if delta.abs() < 1e-9 {
            half * (1.0 - (half * half - 1.0) * delta * delta / 6.0)
        } else {
            (half * delta).sin() / delta.sin()
        };
        prefactor * 2.0 * ratio * ratio
    } else {
        let c = x.cos();
        prefactor * (1.0 + parity * (omega * t).cos()) / (c * c)
    }
}

/// Upper integration limit relative to the bath cutoff.
pub const CUTOFF_MULTIPLE: f64 = 50.0;
const KAPPA_REL_TOL: f64 = 1e-8;
const MAX_INITIAL_PANELS: f64 = 200_000.0;

/// `int_0^omega_max G(w) F_M(w, t) dw`.
pub fn kappa_integral(bath: &BathSpec, pulses: u32, t: f64, omega_max: f64) -> Result<f64> {
    if bath.eta == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    // poles sit at odd multiples of (M+1) pi / t; half periods of cos(w t)
    // at multiples of pi / t
    let mut width = PI / t;
    if omega_max / width > MAX_INITIAL_PANELS {
        width *= (pulses + 1) as f64;
    }
    let bp = uniform_breakpoints(0.0, omega_max, width);
    let quad = Quadrature {
        rel_tol: KAPPA_REL_TOL,
        abs_tol: 1e-300,
        max_panels: 4_000_000,
    };
    let r = quad.integrate(
        |w| bath_spectrum(bath, w) * filter_modulation(pulses, w, t),
        &bp,
    )?;
    Ok(r.value)
}

/// Right-hand side of the dephasing bound for the pair `(m, n)`; zero on
/// the diagonal so populations are untouched.
pub fn kappa_bound(bath: &BathSpec, sched: &BBSchedule, m: i64, n: i64, t: f64) -> Result<f64> {
    if m == n {
        return Ok(0.0);
    }
    let integral = kappa_integral(bath, sched.pulses, t, CUTOFF_MULTIPLE * bath.omega_c)?;
    Ok(((n - m).unsigned_abs() as f64 + 2.0) * integral)
}

fn assemble(spec: &EnsembleSpec, ints: &BBIntegrals, kappa_unit: f64, t: f64) -> PhaseMatrix {
    PhaseMatrix::assemble(
        spec.n(),
        t,
        spec.n_th() + 0.5,
        spec.gamma() * ints.integral_sq + ints.alpha_end.norm_sqr(),
        spec.g() * ints.twist,
        |d| (d as f64 + 2.0) * kappa_unit,
    )
}

/// Coherence exponents under Bang-Bang control, with quadrature checks on
/// every call.
pub fn phase_matrix_bb(
    spec: &EnsembleSpec,
    sched: &BBSchedule,
    bath: &BathSpec,
    t: f64,
) -> Result<PhaseMatrix> {
    let ints = validate_bb(spec, sched, t)?;
    let kappa_unit = kappa_integral(bath, sched.pulses, t, CUTOFF_MULTIPLE * bath.omega_c)?;
    let phi = assemble(spec, &ints, kappa_unit, t);
    phi.check_invariants(1e-12)?;
    Ok(phi)
}

/// `xi^2(t)` under Bang-Bang control where, as in the pulse-count sweeps,
/// the `M` intervals always span `[0, t]`.
#[derive(Debug, Clone)]
pub struct BangBangEngine {
    spec: EnsembleSpec,
    pulses: u32,
    bath: BathSpec,
    ops: SpinOperators,
    initial: DickeMatrix,
}

impl BangBangEngine {
    /// Validates the closed forms once at a generic time.
    pub fn new(spec: EnsembleSpec, pulses: u32, bath: BathSpec) -> Result<Self> {
        let t_check = crate::geometry::PhaseEngine::validation_time(&spec);
        validate_bb(&spec, &BBSchedule::new(pulses, t_check)?, t_check)?;
        Ok(Self {
            ops: SpinOperators::new(spec.n()),
            initial: css_x(spec.n()),
            spec,
            pulses,
            bath,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }
    pub fn pulses(&self) -> u32 {
        self.pulses
    }
    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn phase_matrix(&self, t: f64) -> Result<PhaseMatrix> {
        if t == 0.0 {
            return Ok(PhaseMatrix::zeros(self.spec.n(), 0.0));
        }
        let sched = BBSchedule::new(self.pulses, t)?;
        let ints = bb_integrals(&self.spec, &sched, t)?;
        let kappa_unit =
            kappa_integral(&self.bath, self.pulses, t, CUTOFF_MULTIPLE * self.bath.omega_c)?;
        Ok(assemble(&self.spec, &ints, kappa_unit, t))
    }

    pub fn state(&self, t: f64) -> Result<DickeMatrix> {
        apply_phase(&self.initial, &self.phase_matrix(t)?)
    }

    pub fn squeezing(&self, t: f64) -> Result<f64> {
        self.ops.squeezing(&self.state(t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{phase_matrix, unit_amplitude};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec(q: f64, n_th: f64) -> EnsembleSpec {
        EnsembleSpec::new(3, 1000.0, q, n_th).unwrap()
    }

    #[test]
    fn switch_function_conventions() {
        let none = BBSchedule::new(0, 2.0).unwrap();
        let one = BBSchedule::new(1, 2.0).unwrap();
        for tau in [0.0, 0.3, 1.99] {
            assert_eq!(switch_function(&none, tau).unwrap(), 1.0);
            assert_eq!(switch_function(&one, tau).unwrap(), 1.0);
        }
        let two = BBSchedule::new(2, 1.0).unwrap();
        assert_eq!(switch_function(&two, 0.25).unwrap(), 1.0);
        assert_eq!(switch_function(&two, 0.75).unwrap(), -1.0);
        assert!(switch_function(&two, 1.0).is_err());
        assert!(switch_function(&two, -0.1).is_err());
    }

    #[test]
    fn four_intervals_average_to_zero() {
        let s = BBSchedule::new(4, 1.0).unwrap();
        let samples = 4000;
        let mean: f64 = (0..samples)
            .map(|k| switch_function(&s, (k as f64 + 0.5) / samples as f64).unwrap())
            .sum::<f64>()
            / samples as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unpulsed_amplitude_matches_free_amplitude() {
        let sp = spec(300.0, 0.0);
        let s = BBSchedule::new(0, 5.0).unwrap();
        for t in [0.0, 0.001, 1.3, 5.0] {
            assert_eq!(amplitude_bb(&sp, &s, t).unwrap(), unit_amplitude(&sp, t));
        }
    }

    #[test]
    fn half_period_flip_doubles_displacement() {
        let sp = spec(f64::INFINITY, 0.0);
        let period = 2.0 * PI / 1000.0;
        let s = BBSchedule::new(2, period).unwrap();
        let a = amplitude_bb(&sp, &s, period).unwrap();
        assert_abs_diff_eq!(a.re, 4.0 / 1000.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn commensurate_intervals_close_every_loop() {
        let sp = spec(f64::INFINITY, 0.0);
        let period = 2.0 * PI / 1000.0;
        let s = BBSchedule::new(6, 6.0 * period).unwrap();
        assert!(amplitude_bb(&sp, &s, 6.0 * period).unwrap().norm() < 1e-15);
    }

    #[test]
    fn propagation_agrees_with_direct_quadrature() {
        let sp = spec(200.0, 0.0);
        let s = BBSchedule::new(7, 0.0523).unwrap();
        for t in [0.0131, 0.0523] {
            let a = amplitude_bb(&sp, &s, t).unwrap();
            let b = amplitude_bb_by_quadrature(&sp, &s, t).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm().max(1e-3));
        }
    }

    #[test]
    fn filter_limits_at_zero() {
        assert_eq!(filter_modulation(3, 2.0, 0.0), 0.0);
        for pulses in [0u32, 2, 4, 500] {
            let l = 2.0 * pulses as f64 + 2.0;
            assert_relative_eq!(
                filter_modulation(pulses, 1e-9, 3.0),
                2.0 * 9.0 / (l * l),
                max_relative = 1e-12
            );
        }
        for pulses in [1u32, 3, 501] {
            assert!(filter_modulation(pulses, 1e-9, 3.0) < 1e-15);
        }
    }

    #[test]
    fn filter_free_induction_form() {
        // M = 0 reduces to 2 sin^2(w t / 2) / w^2
        for &(w, t) in &[(0.7, 3.0), (13.1, 0.4), (2.0, 10.0)] {
            let expected = 2.0 * (w * t / 2.0f64).sin().powi(2) / (w * w);
            assert_relative_eq!(filter_modulation(0, w, t), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn bath_spectrum_limits() {
        let b = BathSpec::new(0.0, 1.0, 4.0).unwrap();
        assert_eq!(bath_spectrum(&b, 0.3), 0.0);
        let b = BathSpec::new(4e-4, 1.0, 4.0).unwrap();
        assert_relative_eq!(bath_spectrum(&b, 1e-12), 2.0 * 4e-4 / 4.0, max_relative = 1e-10);
        assert_relative_eq!(bath_spectrum(&b, 0.0), 2.0 * 4e-4 / 4.0, max_relative = 1e-15);
        let cold = BathSpec::new(4e-4, 1.0, 1e6).unwrap();
        let w = 0.5;
        assert_relative_eq!(
            bath_spectrum(&cold, w),
            4e-4 * w * (-w as f64).exp(),
            max_relative = 1e-12
        );
        // printed thermal form
        let w = 0.37;
        let printed = 4e-4 * w * (-w / 1.0f64).exp() * (2.0 / ((4.0 * w as f64).exp() - 1.0) + 1.0);
        assert_relative_eq!(bath_spectrum(&b, w), printed, max_relative = 1e-13);
    }

    #[test]
    fn kappa_trivial_cases() {
        let s = BBSchedule::new(10, 5.0).unwrap();
        let quiet = BathSpec::new(0.0, 1.0, 4.0).unwrap();
        assert_eq!(kappa_bound(&quiet, &s, 1, -1, 5.0).unwrap(), 0.0);
        let b = BathSpec::new(4e-4, 1.0, 4.0).unwrap();
        assert_eq!(kappa_bound(&b, &s, 1, -1, 0.0).unwrap(), 0.0);
        assert_eq!(kappa_bound(&b, &s, 2, 2, 5.0).unwrap(), 0.0);
        let k1 = kappa_bound(&b, &s, 0, 1, 5.0).unwrap();
        let k3 = kappa_bound(&b, &s, -1, 2, 5.0).unwrap();
        assert!(k1 > 0.0);
        assert_relative_eq!(k3 / k1, 5.0 / 3.0, max_relative = 1e-12);
        assert_eq!(k1, kappa_bound(&b, &s, 1, 0, 5.0).unwrap());
    }

    #[test]
    fn unpulsed_quiet_bb_matches_free_phase() {
        let sp = spec(150.0, 3.0);
        let t = 2.345;
        let s = BBSchedule::new(0, t).unwrap();
        let a = phase_matrix_bb(&sp, &s, &BathSpec::none(), t).unwrap();
        let b = phase_matrix(&sp, t).unwrap();
        let diff = (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn global_sign_flip_leaves_phases_unchanged() {
        let sp = spec(400.0, 2.0);
        let t = 0.731;
        let bath = BathSpec::new(1e-3, 1.0, 4.0).unwrap();
        let s = BBSchedule::new(9, t).unwrap();
        let a = phase_matrix_bb(&sp, &s, &bath, t).unwrap();
        let b = phase_matrix_bb(&sp, &s.flipped(), &bath, t).unwrap();
        let diff = (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }
}
