//! Long-time analytic squeezing and the optimal-time search.
//!
//! Once the mechanical transient has decayed (`t >> 1/gamma`) the coherence
//! exponent becomes linear in time,
//! `phi_mn = i K t [(m^2 - n^2) + i mu (m - n)^2]` with
//! `K = g^2 omega_a / ((gamma/2)^2 + omega_a^2)`, which gives a closed-form
//! squeezing parameter in terms of the twisting angle `Ct = K t` and
//! `mu = (n_th + 1/2) / Q`.

use num_complex::Complex64 as C64;

use crate::bang_bang::{BangBangEngine, BathSpec};
use crate::dicke::{css_x, one_axis_twist, EnsembleSpec, SpinOperators};
use crate::error::{Error, Result};
use crate::geometry::PhaseEngine;

/// The two dimensionless numbers the analytic squeezing depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    pub n: usize,
    /// Twisting angle `Ct`.
    pub ct: f64,
    pub mu: f64,
}

impl AnalyticParams {
    pub fn new(n: usize, ct: f64, mu: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("N", "must be at least 1"));
        }
        if !(ct >= 0.0) {
            return Err(Error::param("Ct", format!("must be non-negative, got {ct}")));
        }
        if !(mu >= 0.0) {
            return Err(Error::param("mu", format!("must be non-negative, got {mu}")));
        }
        Ok(Self { n, ct, mu })
    }

    /// Exact map from a physical spec and time to `(Ct, mu)`.
    pub fn from_spec(spec: &EnsembleSpec, t: f64) -> Self {
        Self {
            n: spec.n(),
            ct: twist_rate(spec) * t,
            mu: spec.mu(),
        }
    }
}

/// `K = g^2 omega_a / ((gamma/2)^2 + omega_a^2)`.
pub fn twist_rate(spec: &EnsembleSpec) -> f64 {
    let q = spec.q();
    spec.g() * spec.g() / spec.omega_a() / (1.0 + 1.0 / (4.0 * q * q))
}

/// Steady-state coherence exponent for the pair `(m, n)`.
pub fn steady_phase(spec: &EnsembleSpec, m: i64, n: i64, t: f64) -> C64 {
    let kt = twist_rate(spec) * t;
    let twist = (m * m - n * n) as f64;
    let damp = ((m - n) * (m - n)) as f64;
    C64::new(0.0, kt) * C64::new(twist, spec.mu() * damp)
}

/// `|cos x|^p` evaluated in log space; `p` is always even here.
fn even_cos_power(x: f64, p: u32) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let c = x.cos().abs();
    if c == 0.0 {
        0.0
    } else {
        (p as f64 * c.ln()).exp()
    }
}

/// Closed-form squeezing of the x-polarized coherent state,
/// `1 + (2N-1)/4 (A - sqrt(A^2 + B^2))`.
pub fn xi_analytic(params: &AnalyticParams) -> f64 {
    let AnalyticParams { n, ct, mu } = *params;
    let p = 2 * n as u32 - 2;
    let damping = (-4.0 * ct * mu).exp();
    let a = 1.0 - even_cos_power(2.0 * ct, p) * damping;
    let b = -4.0 * ct.sin() * even_cos_power(ct, p) * damping;
    1.0 + (2.0 * n as f64 - 1.0) / 4.0 * (a - a.hypot(b))
}

/// Approximate upper bound on the optimal squeezing,
/// `1 - exp(-1/2 - 4 mu/sqrt(N)) / (1 - exp(-1 - 2 mu/sqrt(N)))`.
pub fn xi_upper_bound(n: usize, mu: f64) -> f64 {
    let r = mu / (n as f64).sqrt();
    1.0 - (-0.5 - 4.0 * r).exp() / (1.0 - (-1.0 - 2.0 * r).exp())
}

/// Which model produces `xi^2(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Long-time closed form.
    Analytic,
    /// Exact dissipative phase applied to the coherent spin state.
    Numeric,
    /// Bang-Bang pulses with `pulses` equal intervals spanning `[0, t]` plus
    /// spin-bath dephasing.
    BangBang { pulses: u32, bath: BathSpec },
}

/// Location and value of the global minimum of `xi^2(g t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub gt: f64,
    pub xi: f64,
}

/// Coarse scan followed by golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub step: f64,
    /// Upper end of the scanned window in `g t`; `None` uses
    /// `400 sqrt(10 / N)`.
    pub gt_max: Option<f64>,
    pub rel_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            step: 0.5,
            gt_max: None,
            rel_tol: 1e-4,
        }
    }
}

impl SearchOptions {
    pub fn window(&self, n: usize) -> f64 {
        self.gt_max
            .unwrap_or_else(|| 400.0 * (10.0 / n as f64).sqrt())
    }
}

/// `xi^2` as a function of `g t` for a given backend.
pub struct SqueezingCurve {
    spec: EnsembleSpec,
    kind: CurveKind,
}

enum CurveKind {
    Analytic,
    Numeric(PhaseEngine),
    BangBang(BangBangEngine),
}

impl SqueezingCurve {
    pub fn new(spec: EnsembleSpec, backend: Backend) -> Result<Self> {
        let kind = match backend {
            Backend::Analytic => CurveKind::Analytic,
            Backend::Numeric => CurveKind::Numeric(PhaseEngine::new(spec)?),
            Backend::BangBang { pulses, bath } => {
                CurveKind::BangBang(BangBangEngine::new(spec, pulses, bath)?)
            }
        };
        Ok(Self { spec, kind })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// `xi^2` at dimensionless time `gt`.
    pub fn eval(&self, gt: f64) -> Result<f64> {
        let t = gt / self.spec.g();
        match &self.kind {
            CurveKind::Analytic => Ok(xi_analytic(&AnalyticParams::from_spec(&self.spec, t))),
            CurveKind::Numeric(engine) => engine.squeezing(t),
            CurveKind::BangBang(engine) => engine.squeezing(t),
        }
    }

    /// Like [`eval`](Self::eval) but maps a vanished mean spin (over-twisted
    /// state) to `+inf` so searches step over it.
    pub fn eval_or_inf(&self, gt: f64) -> Result<f64> {
        match self.eval(gt) {
            Err(Error::MeanSpinVanished { .. }) => Ok(f64::INFINITY),
            other => other,
        }
    }

    pub fn optimum(&self, opts: &SearchOptions) -> Result<Optimum> {
        let gt_max = opts.window(self.spec.n());
        let count = (gt_max / opts.step).floor() as usize;
        if count < 3 {
            return Err(Error::NoInteriorMinimum { gt_max });
        }
        let grid: Vec<f64> = (1..=count).map(|i| i as f64 * opts.step).collect();
        let values = grid
            .iter()
            .map(|&gt| self.eval_or_inf(gt))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best] {
                best = i;
            }
        }
        if best == 0 || best + 1 == values.len() || !values[best].is_finite() {
            return Err(Error::NoInteriorMinimum { gt_max });
        }
        self.refine(grid[best - 1], grid[best + 1], grid[best], values[best], opts.rel_tol)
    }

    fn refine(&self, mut a: f64, mut b: f64, x0: f64, f0: f64, rel_tol: f64) -> Result<Optimum> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut best = Optimum { gt: x0, xi: f0 };
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.eval_or_inf(c)?;
        let mut fd = self.eval_or_inf(d)?;
        while (b - a) > rel_tol * best.gt {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.eval_or_inf(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.eval_or_inf(d)?;
            }
            for (x, f) in [(c, fc), (d, fd)] {
                if f < best.xi || (f == best.xi && x < best.gt) {
                    best = Optimum { gt: x, xi: f };
                }
            }
        }
        Ok(best)
    }
}

/// Global minimum of `xi^2(g t)` on `(0, gt_max]` with default search options.
pub fn optimal_squeezing(spec: &EnsembleSpec, backend: Backend) -> Result<Optimum> {
    SqueezingCurve::new(*spec, backend)?.optimum(&SearchOptions::default())
}

/// Optimal one-axis twist of the coherent spin state, found by brute force
/// on the exact Dicke-space unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OatOptimum {
    /// Twisting angle `Ct` at the minimum.
    pub ct: f64,
    pub xi: f64,
}

/// Lossless reference: minimum of `xi^2` over the twisting angle.
pub fn oat_optimum(n: usize) -> Result<OatOptimum> {
    if n < 2 {
        return Err(Error::param("N", "one-axis twisting needs N >= 2"));
    }
    let ops = SpinOperators::new(n);
    let rho0 = css_x(n);
    let xi = |ct: f64| match ops.squeezing(&one_axis_twist(&rho0, ct)) {
        Err(Error::MeanSpinVanished { .. }) => Ok(f64::INFINITY),
        other => other,
    };
    // The optimum sits well below Ct = 1 for every N >= 2.
    let step = 1e-3;
    let mut best = (step, xi(step)?);
    for k in 2..=1000 {
        let ct = k as f64 * step;
        let v = xi(ct)?;
        if v < best.1 {
            best = (ct, v);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    while b - a > 1e-12 {
        let c = b - 0.618_033_988_749_894_8 * (b - a);
        let d = a + 0.618_033_988_749_894_8 * (b - a);
        if xi(c)? <= xi(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let ct = 0.5 * (a + b);
    Ok(OatOptimum { ct, xi: xi(ct)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn oat_reference_values() {
        // independent dense scan of the closed form at zero loss
        for (n, xi) in [(2, 0.302_483_900_748_497), (5, 0.196_063_580_114_622), (10, 0.132_276_358_415_761), (40, 0.055_440_380_747_416)] {
            assert!((oat_optimum(n).unwrap().xi - xi).abs() < 1e-10, "N={n}");
        }
        assert!(oat_optimum(1).is_err());
    }

    #[test]
    fn no_twist_no_squeezing() {
        for n in [1, 2, 10, 50] {
            let p = AnalyticParams::new(n, 0.0, 0.3).unwrap();
            assert_abs_diff_eq!(xi_analytic(&p), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn analytic_stays_below_trivial_ceiling() {
        for n in [1, 3, 10] {
            for k in 0..500 {
                let p = AnalyticParams::new(n, k as f64 * 0.013, 0.05).unwrap();
                let xi = xi_analytic(&p);
                assert!(xi <= 1.0 + (2.0 * n as f64 - 1.0) / 2.0 + 1e-12);
                assert!(xi >= 0.0);
            }
        }
    }

    #[test]
    fn lossless_steady_phase_is_pure_twist() {
        let s = EnsembleSpec::new(4, 1000.0, f64::INFINITY, 0.0).unwrap();
        let z = steady_phase(&s, 2, -1, 37.0);
        assert_eq!(z.re, 0.0);
        assert_abs_diff_eq!(z.im, 37.0 / 1000.0 * 3.0, epsilon = 1e-15);
        assert_eq!(steady_phase(&s, 3, 3, 37.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn upper_bound_limits() {
        let expected = 1.0 - (-0.5f64).exp() / (1.0 - (-1.0f64).exp());
        for n in [1, 4, 100] {
            assert_abs_diff_eq!(xi_upper_bound(n, 0.0), expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(expected, 0.0405, epsilon = 1e-4);
        assert_abs_diff_eq!(xi_upper_bound(10, 1e4), 1.0, epsilon = 1e-12);
        let mut prev = xi_upper_bound(10, 0.0);
        for k in 1..100 {
            let v = xi_upper_bound(10, k as f64 * 0.05);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn twist_rate_maps_exactly() {
        let s = EnsembleSpec::new(10, 1000.0, 5.0, 0.0).unwrap();
        let gamma = s.gamma();
        let k = s.omega_a() / (gamma * gamma / 4.0 + s.omega_a() * s.omega_a());
        assert_abs_diff_eq!(twist_rate(&s), k, epsilon = 1e-18);
        let p = AnalyticParams::from_spec(&s, 160.0);
        assert_abs_diff_eq!(p.ct, 160.0 * k, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mu, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn monotone_curve_has_no_interior_minimum() {
        // heavy damping: mu = 50 kills the twist before it squeezes
        let s = EnsembleSpec::new(10, 1000.0, 0.01, 0.0).unwrap();
        let curve = SqueezingCurve::new(s, Backend::Analytic).unwrap();
        let opts = SearchOptions {
            gt_max: Some(2.0),
            ..SearchOptions::default()
        };
        assert!(matches!(
            curve.optimum(&opts),
            Err(Error::NoInteriorMinimum { .. })
        ));
    }
}
