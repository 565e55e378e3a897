//! Brute-force master-equation reference on a truncated phonon Fock space
//! tensored with the Dicke space.
//!
//! The Hamiltonian `omega_a a^dag a + g J_z (a + a^dag)` commutes with `J_z`
//! and the dissipators act on the phonon alone, so in the `J_z` basis the
//! composite density matrix splits into phonon blocks `X^{mn} = <m|rho|n>`
//! that obey decoupled linear equations
//!
//! ```text
//! dX/dt = -i (H_m X - X H_n) + G- L(a) X + G+ L(a^dag) X,
//! H_m = omega_a a^dag a + g m (a + a^dag),
//! ```
//!
//! with `G- = (gamma/2)(n_th+1)` and `G+ = (gamma/2) n_th`. Each block is
//! integrated with fixed-step RK4; only blocks with `m <= n` are stored, the
//! rest follow from Hermiticity.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dicke::{css_x, index, magnetic, DickeMatrix, EnsembleSpec};
use crate::error::{Error, Result};
use crate::geometry::PhaseMatrix;

/// Largest composite dimension `(n_max+1)(2N+1)` the oracle accepts.
pub const DIM_LIMIT: usize = 2000;
/// Allowed `|Tr rho - 1|`.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
/// Relative change allowed when `n_max` is doubled or the step halved.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Unwrapping fails when one sample-to-sample increment exceeds this.
pub const UNWRAP_LIMIT: f64 = 0.5 * PI;
/// Thermal weight allowed at the top Fock level by the default truncation.
pub const THERMAL_TAIL: f64 = 1e-9;
/// Target spacing of unwrap samples, in units of `1/g`.
const SAMPLE_SPACING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    /// `ceil(4 (N g / omega_a)^2 + 10 (n_th + 1))`.
    pub fn floor(spec: &EnsembleSpec) -> usize {
        let x = spec.n() as f64 * spec.g() / spec.omega_a();
        (4.0 * x * x + 10.0 * (spec.n_th() + 1.0)).ceil() as usize
    }

    /// The floor, raised if needed so the thermal occupation of the top
    /// level, `(n_th/(n_th+1))^n_max`, is below `THERMAL_TAIL`.
    pub fn for_spec(spec: &EnsembleSpec) -> Self {
        let n_th = spec.n_th();
        let tail = if n_th > 0.0 {
            (THERMAL_TAIL.ln() / (n_th / (n_th + 1.0)).ln()).ceil() as usize
        } else {
            0
        };
        Self::new(Self::floor(spec).max(tail))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Phonon dimension `n_max + 1`.
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn doubled(&self) -> Self {
        Self::new((2 * self.n_max).max(1))
    }

    pub fn check_floor(&self, spec: &EnsembleSpec) -> Result<()> {
        let floor = Self::floor(spec);
        if self.n_max < floor {
            return Err(Error::TruncationTooSmall {
                n_max: self.n_max,
                floor,
            });
        }
        Ok(())
    }
}

fn check_dimension(spec: &EnsembleSpec, trunc: &FockTruncation) -> Result<()> {
    let dim = trunc.levels() * spec.dim();
    if dim > DIM_LIMIT {
        return Err(Error::DimensionOverflow {
            dim,
            limit: DIM_LIMIT,
        });
    }
    Ok(())
}

/// Thermal phonon state with mean occupation `n_th`, restricted to the
/// truncated space and renormalized.
pub fn thermal_phonon(n_th: f64, trunc: &FockTruncation) -> DMatrix<C64> {
    let d = trunc.levels();
    let ratio = if n_th > 0.0 { n_th / (n_th + 1.0) } else { 0.0 };
    let weights: Vec<f64> = (0..d).map(|k| ratio.powi(k as i32)).collect();
    let total: f64 = weights.iter().sum();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(weights[i] / total, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Density matrix on phonon (x) spin, stored as phonon blocks indexed by the
/// spin quantum numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    n: usize,
    levels: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl CompositeState {
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.n + 1) + j
    }

    /// `phonon (x) spin`.
    pub fn product(phonon: &DMatrix<C64>, spin: &DickeMatrix) -> Result<Self> {
        if phonon.nrows() != phonon.ncols() || phonon.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: phonon.nrows(),
                found: phonon.ncols(),
            });
        }
        let dim = spin.dim();
        let blocks = (0..dim * dim)
            .map(|s| phonon * spin.matrix()[(s / dim, s % dim)])
            .collect();
        Ok(Self {
            n: spin.n(),
            levels: phonon.nrows(),
            blocks,
        })
    }

    /// From a dense matrix in the `phonon (x) spin` ordering, index
    /// `p (2N+1) + s`.
    pub fn from_dense(n: usize, levels: usize, rho: &DMatrix<C64>) -> Result<Self> {
        let sd = 2 * n + 1;
        if rho.nrows() != levels * sd || rho.ncols() != levels * sd {
            return Err(Error::DimensionMismatch {
                expected: levels * sd,
                found: rho.nrows(),
            });
        }
        let blocks = (0..sd * sd)
            .map(|s| {
                let (a, b) = (s / sd, s % sd);
                DMatrix::from_fn(levels, levels, |p, q| rho[(p * sd + a, q * sd + b)])
            })
            .collect();
        Ok(Self { n, levels, blocks })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let sd = 2 * self.n + 1;
        DMatrix::from_fn(self.levels * sd, self.levels * sd, |r, c| {
            self.blocks[self.slot(r % sd, c % sd)][(r / sd, c / sd)]
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Phonon block `<m| rho |n>`.
    pub fn block(&self, m: i64, n: i64) -> &DMatrix<C64> {
        &self.blocks[self.slot(index(self.n, m), index(self.n, n))]
    }

    pub fn trace(&self) -> C64 {
        (0..2 * self.n + 1)
            .map(|i| self.blocks[self.slot(i, i)].trace())
            .sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let sd = 2 * self.n + 1;
        let mut worst: f64 = 0.0;
        for i in 0..sd {
            for j in i..sd {
                let d = &self.blocks[self.slot(i, j)] - self.blocks[self.slot(j, i)].adjoint();
                worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of the dense matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.to_dense();
        let herm = (&d + d.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Spin reduced state `Tr_phonon rho`, without physical checks.
    pub fn spin_matrix(&self) -> DMatrix<C64> {
        let sd = 2 * self.n + 1;
        DMatrix::from_fn(sd, sd, |i, j| self.blocks[self.slot(i, j)].trace())
    }

    /// Spin reduced state, validated with the oracle's tolerances.
    pub fn reduce_spin(&self) -> Result<DickeMatrix> {
        let rho = DickeMatrix::from_matrix_unchecked(self.spin_matrix())?;
        rho.validate_with(TRACE_DRIFT_LIMIT, TRACE_DRIFT_LIMIT, -1e-7)?;
        Ok(rho)
    }

    /// Phonon reduced state `Tr_spin rho`.
    pub fn reduce_phonon(&self) -> DMatrix<C64> {
        (0..2 * self.n + 1)
            .map(|i| self.blocks[self.slot(i, i)].clone())
            .fold(DMatrix::zeros(self.levels, self.levels), |acc, b| acc + b)
    }

    /// Same state in a larger truncation, padded with zeros.
    pub fn embed(&self, trunc: &FockTruncation) -> Result<Self> {
        if trunc.levels() < self.levels {
            return Err(Error::param("n_max", "embedding cannot shrink the Fock space"));
        }
        let d = trunc.levels();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                DMatrix::from_fn(d, d, |p, q| {
                    if p < self.levels && q < self.levels {
                        b[(p, q)]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Ok(Self {
            n: self.n,
            levels: d,
            blocks,
        })
    }
}

/// Action of the master-equation generator on a composite state.
#[derive(Debug, Clone)]
pub struct Generator {
    n: usize,
    levels: usize,
    omega_a: f64,
    g: f64,
    decay: f64,
    pump: f64,
}

pub fn build_generator(spec: &EnsembleSpec, trunc: &FockTruncation) -> Result<Generator> {
    check_dimension(spec, trunc)?;
    let half = 0.5 * spec.gamma();
    Ok(Generator {
        n: spec.n(),
        levels: trunc.levels(),
        omega_a: spec.omega_a(),
        g: spec.g(),
        decay: half * (spec.n_th() + 1.0),
        pump: half * spec.n_th(),
    })
}

impl Generator {
    pub fn levels(&self) -> usize {
        self.levels
    }

    fn kernel(&self, m: i64, n: i64) -> BlockKernel {
        BlockKernel::new(self, m, n)
    }

    /// `d rho / dt`.
    pub fn apply(&self, rho: &CompositeState) -> Result<CompositeState> {
        if rho.n != self.n || rho.levels != self.levels {
            return Err(Error::DimensionMismatch {
                expected: self.levels * (2 * self.n + 1),
                found: rho.levels * (2 * rho.n + 1),
            });
        }
        let sd = 2 * self.n + 1;
        let blocks = (0..sd * sd)
            .map(|s| {
                let (i, j) = (s / sd, s % sd);
                let k = self.kernel(magnetic(self.n, i), magnetic(self.n, j));
                let x = k.pad(&rho.blocks[s]);
                let mut out = Split::zeros(x.re.len());
                k.derivative(&x, &mut out);
                k.unpad(&out)
            })
            .collect();
        Ok(CompositeState {
            n: self.n,
            levels: self.levels,
            blocks,
        })
    }
}

const FIRST: u8 = 0;
const MID: u8 = 1;
const LAST: u8 = 2;

/// Stencil for one block on a zero-padded `(d+2) x (d+2)` grid, so the
/// truncation edges need no branches. Real and imaginary parts are kept in
/// separate arrays.
struct BlockKernel {
    d: usize,
    stride: usize,
    /// diagonal rate, real and imaginary parts, per padded cell
    dr: Vec<f64>,
    di: Vec<f64>,
    /// `-g m sqrt(i+1)`, `-g m sqrt(i)` by row
    row_up: Vec<f64>,
    row_down: Vec<f64>,
    /// `g n sqrt(j)`, `g n sqrt(j+1)` by padded column
    col_down: Vec<f64>,
    col_up: Vec<f64>,
    /// `sqrt(2 G-) sqrt(k+1)` and `sqrt(2 G+) sqrt(k)` by padded index
    lower: Vec<f64>,
    raise: Vec<f64>,
}

/// Block in split storage on the padded grid.
#[derive(Clone)]
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(len: usize) -> Self {
        Self {
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }
}

impl BlockKernel {
    fn new(gen: &Generator, m: i64, n: i64) -> Self {
        let d = gen.levels;
        let stride = d + 2;
        let sqrt: Vec<f64> = (0..=d).map(|k| (k as f64).sqrt()).collect();
        // diagonal of the truncated a a^dag
        let aad = |i: usize| if i + 1 < d { (i + 1) as f64 } else { 0.0 };
        let mut dr = vec![0.0; stride * stride];
        let mut di = vec![0.0; stride * stride];
        for i in 0..d {
            for j in 0..d {
                let c = (i + 1) * stride + j + 1;
                dr[c] = -gen.decay * (i + j) as f64 - gen.pump * (aad(i) + aad(j));
                di[c] = -gen.omega_a * (i as f64 - j as f64);
            }
        }
        let gm = gen.g * m as f64;
        let gn = gen.g * n as f64;
        let padded = |f: &dyn Fn(usize) -> f64| {
            let mut v = vec![0.0; stride];
            for k in 0..d {
                v[k + 1] = f(k);
            }
            v
        };
        let (sd, sp) = ((2.0 * gen.decay).sqrt(), (2.0 * gen.pump).sqrt());
        Self {
            d,
            stride,
            dr,
            di,
            row_up: (0..d).map(|i| -gm * sqrt[i + 1]).collect(),
            row_down: (0..d).map(|i| -gm * sqrt[i]).collect(),
            col_down: padded(&|j| gn * sqrt[j]),
            col_up: padded(&|j| gn * sqrt[j + 1]),
            lower: padded(&|k| sd * sqrt[k + 1]),
            raise: padded(&|k| sp * sqrt[k]),
        }
    }

    fn pad(&self, x: &DMatrix<C64>) -> Split {
        let mut out = Split::zeros(self.stride * self.stride);
        for i in 0..self.d {
            for j in 0..self.d {
                let c = (i + 1) * self.stride + j + 1;
                out.re[c] = x[(i, j)].re;
                out.im[c] = x[(i, j)].im;
            }
        }
        out
    }

    fn unpad(&self, x: &Split) -> DMatrix<C64> {
        DMatrix::from_fn(self.d, self.d, |i, j| {
            let c = (i + 1) * self.stride + j + 1;
            C64::new(x.re[c], x.im[c])
        })
    }

    fn trace(&self, x: &Split) -> C64 {
        (1..=self.d)
            .map(|i| {
                let c = i * (self.stride + 1);
                C64::new(x.re[c], x.im[c])
            })
            .sum()
    }

    /// Writes the derivative of the interior cells into `out`.
    fn derivative(&self, x: &Split, out: &mut Split) {
        let mut unused = Split::zeros(out.re.len());
        self.stage::<FIRST>(x, 0.0, 0.0, x, out, &mut unused);
    }

    /// Evaluates `k = L(eval)` cell by cell and folds it into the RK4
    /// accumulators. `FIRST`: `acc = k`, `next = base + wt k`. `MID`:
    /// `acc += wa k`, `next = base + wt k`. `LAST`: `base += wt (acc + k)`,
    /// written through `next`, which must then alias nothing else.
    #[inline]
    fn stage<const MODE: u8>(
        &self,
        eval: &Split,
        wa: f64,
        wt: f64,
        base: &Split,
        acc: &mut Split,
        next: &mut Split,
    ) {
        let (s, d) = (self.stride, self.d);
        let cd = &self.col_down[1..d + 1];
        let cu = &self.col_up[1..d + 1];
        let lo = &self.lower[1..d + 1];
        let ra = &self.raise[1..d + 1];
        for i in 1..=d {
            let r = i * s;
            let (a, b) = (self.row_up[i - 1], self.row_down[i - 1]);
            let (li, ri) = (self.lower[i], self.raise[i]);
            let c = r + 1;
            let xr = &eval.re[c..c + d];
            let xi = &eval.im[c..c + d];
            let xr_l = &eval.re[c - 1..c - 1 + d];
            let xi_l = &eval.im[c - 1..c - 1 + d];
            let xr_r = &eval.re[c + 1..c + 1 + d];
            let xi_r = &eval.im[c + 1..c + 1 + d];
            let ur = &eval.re[c + s..c + s + d];
            let ui = &eval.im[c + s..c + s + d];
            let ur_r = &eval.re[c + s + 1..c + s + 1 + d];
            let ui_r = &eval.im[c + s + 1..c + s + 1 + d];
            let wr = &eval.re[c - s..c - s + d];
            let wi = &eval.im[c - s..c - s + d];
            let wr_l = &eval.re[c - s - 1..c - s - 1 + d];
            let wi_l = &eval.im[c - s - 1..c - s - 1 + d];
            let dr = &self.dr[c..c + d];
            let di = &self.di[c..c + d];
            let br = &base.re[c..c + d];
            let bi = &base.im[c..c + d];
            let ar = &mut acc.re[c..c + d];
            let ai = &mut acc.im[c..c + d];
            let nr = &mut next.re[c..c + d];
            let ni = &mut next.im[c..c + d];
            for j in 0..d {
                let s_re = a * ur[j] + b * wr[j] + cd[j] * xr_l[j] + cu[j] * xr_r[j];
                let s_im = a * ui[j] + b * wi[j] + cd[j] * xi_l[j] + cu[j] * xi_r[j];
                let (lw, rw) = (li * lo[j], ri * ra[j]);
                let kr = dr[j] * xr[j] - di[j] * xi[j] - s_im + lw * ur_r[j] + rw * wr_l[j];
                let ki = dr[j] * xi[j] + di[j] * xr[j] + s_re + lw * ui_r[j] + rw * wi_l[j];
                match MODE {
                    FIRST => {
                        ar[j] = kr;
                        ai[j] = ki;
                        nr[j] = br[j] + wt * kr;
                        ni[j] = bi[j] + wt * ki;
                    }
                    MID => {
                        ar[j] += wa * kr;
                        ai[j] += wa * ki;
                        nr[j] = br[j] + wt * kr;
                        ni[j] = bi[j] + wt * ki;
                    }
                    _ => {
                        nr[j] = br[j] + wt * (ar[j] + kr);
                        ni[j] = bi[j] + wt * (ai[j] + ki);
                    }
                }
            }
        }
    }

    /// One classical RK4 step in place.
    fn rk4_step(&self, x: &mut Split, h: f64, scratch: &mut [Split; 3]) {
        let [ta, tb, acc] = scratch;
        self.stage::<FIRST>(x, 0.0, 0.5 * h, x, acc, ta);
        self.stage::<MID>(ta, 2.0, 0.5 * h, x, acc, tb);
        self.stage::<MID>(tb, 2.0, h, x, acc, ta);
        // the last stage reads `ta` and `x` cellwise, so write into `tb`
        self.stage::<LAST>(ta, 0.0, h / 6.0, x, acc, tb);
        std::mem::swap(x, tb);
    }

    fn symmetrize(&self, x: &mut Split) {
        let s = self.stride;
        for i in 1..=self.d {
            for j in i..=self.d {
                let (p, q) = (i * s + j, j * s + i);
                let re = 0.5 * (x.re[p] + x.re[q]);
                let im = 0.5 * (x.im[p] - x.im[q]);
                x.re[p] = re;
                x.re[q] = re;
                x.im[p] = im;
                x.im[q] = -im;
            }
        }
    }
}

/// Largest RK4 step allowed: `min(0.01/omega_a, 0.1/(gamma (n_th+1)))`.
pub fn max_step(spec: &EnsembleSpec) -> f64 {
    let loss = spec.gamma() * (spec.n_th() + 1.0);
    let a = 0.01 / spec.omega_a();
    if loss > 0.0 {
        a.min(0.1 / loss)
    } else {
        a
    }
}

/// Time grid: `targets` are hit exactly; between them the step is the
/// largest not exceeding `h` that divides the gap, and block traces are
/// sampled roughly every `SAMPLE_SPACING / g`.
#[derive(Debug, Clone)]
struct Grid {
    /// `(step, steps_per_sample, samples)` per target gap
    legs: Vec<(f64, usize, usize)>,
}

impl Grid {
    fn new(targets: &[f64], h: f64, g: f64) -> Result<Self> {
        let mut legs = Vec::with_capacity(targets.len());
        let mut prev = 0.0;
        for &t in targets {
            if !(t >= prev && t.is_finite()) {
                return Err(Error::param("times", "must be finite, non-negative and increasing"));
            }
            let gap = t - prev;
            let samples = ((gap * g / SAMPLE_SPACING).ceil() as usize).max(1);
            let per = ((gap / samples as f64 / h).ceil() as usize).max(1);
            legs.push((gap / (samples * per) as f64, per, samples));
            prev = t;
        }
        Ok(Self { legs })
    }
}

/// Block trace history: one value per unwrap sample, and the state at each
/// target.
struct BlockRun {
    traces: Vec<Vec<C64>>,
    states: Vec<DMatrix<C64>>,
}

fn run_block(kernel: &BlockKernel, x0: &DMatrix<C64>, grid: &Grid, hermitian: bool) -> BlockRun {
    let mut x = kernel.pad(x0);
    let len = x.re.len();
    let mut scratch = [Split::zeros(len), Split::zeros(len), Split::zeros(len)];
    let mut traces = Vec::with_capacity(grid.legs.len());
    let mut states = Vec::with_capacity(grid.legs.len());
    for &(h, per, samples) in &grid.legs {
        let mut leg = Vec::with_capacity(samples);
        for _ in 0..samples {
            for _ in 0..per {
                kernel.rk4_step(&mut x, h, &mut scratch);
                if hermitian {
                    kernel.symmetrize(&mut x);
                }
            }
            leg.push(kernel.trace(&x));
        }
        traces.push(leg);
        states.push(kernel.unpad(&x));
    }
    BlockRun { traces, states }
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let sd = 2 * n + 1;
    (0..sd).flat_map(|i| (i..sd).map(move |j| (i, j))).collect()
}

/// Index pair of the block `(-n, -m)` for block `(m, n)`.
fn mirror(n: usize, (i, j): (usize, usize)) -> (usize, usize) {
    (2 * n - j, 2 * n - i)
}

/// Integrates the master equation for the listed blocks and returns their
/// histories in the same order.
fn integrate(
    gen: &Generator,
    rho0: &CompositeState,
    grid: &Grid,
    pairs: &[(usize, usize)],
) -> Vec<((usize, usize), BlockRun)> {
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let kernel = gen.kernel(magnetic(gen.n, i), magnetic(gen.n, j));
            let run = run_block(&kernel, &rho0.blocks[rho0.slot(i, j)], grid, i == j);
            ((i, j), run)
        })
        .collect()
}

fn assemble_states(
    n: usize,
    levels: usize,
    runs: &[((usize, usize), BlockRun)],
    targets: usize,
) -> Vec<CompositeState> {
    let sd = 2 * n + 1;
    (0..targets)
        .map(|k| {
            let mut blocks = vec![DMatrix::zeros(levels, levels); sd * sd];
            for ((i, j), run) in runs {
                let b = &run.states[k];
                blocks[j * sd + i] = b.adjoint();
                blocks[i * sd + j] = b.clone();
            }
            CompositeState { n, levels, blocks }
        })
        .collect()
}

fn check_trace(state: &CompositeState, t: f64) -> Result<()> {
    let tr = state.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TRACE_DRIFT_LIMIT {
        return Err(Error::TraceDrift { trace: tr.re, t });
    }
    Ok(())
}

/// Evolves `rho0` to each of `times` with step `h`, no convergence checks.
pub fn evolve_fixed(
    rho0: &CompositeState,
    spec: &EnsembleSpec,
    trunc: &FockTruncation,
    times: &[f64],
    h: f64,
) -> Result<Vec<CompositeState>> {
    let gen = build_generator(spec, trunc)?;
    check_compatible(rho0, &gen)?;
    let grid = Grid::new(times, h, spec.g())?;
    let runs = integrate(&gen, rho0, &grid, &upper_pairs(gen.n));
    let states = assemble_states(gen.n, gen.levels, &runs, times.len());
    for (s, &t) in states.iter().zip(times) {
        check_trace(s, t)?;
    }
    Ok(states)
}

fn check_compatible(rho0: &CompositeState, gen: &Generator) -> Result<()> {
    if rho0.n != gen.n || rho0.levels != gen.levels {
        return Err(Error::DimensionMismatch {
            expected: gen.levels * (2 * gen.n + 1),
            found: rho0.levels * (2 * rho0.n + 1),
        });
    }
    Ok(())
}

/// Largest entrywise change between two matrices, relative to the larger
/// magnitude or 1, whichever is bigger.
fn relative_change(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm() / x.norm().max(y.norm()).max(1.0))
        .fold(0.0, f64::max)
}

fn converged(what: &'static str, change: f64) -> Result<()> {
    if change >= CONVERGENCE_TOL {
        return Err(Error::NotConverged {
            what,
            change,
            tolerance: CONVERGENCE_TOL,
        });
    }
    Ok(())
}

/// Evolves to `t` with the largest allowed step, then repeats with `n_max`
/// doubled and with the step halved; the result is accepted only if the
/// reduced spin state changes by less than `CONVERGENCE_TOL` in both.
pub fn evolve_master(
    rho0: &CompositeState,
    spec: &EnsembleSpec,
    trunc: &FockTruncation,
    t: f64,
) -> Result<CompositeState> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be non-negative"));
    }
    trunc.check_floor(spec)?;
    let h = max_step(spec);
    let base = evolve_fixed(rho0, spec, trunc, &[t], h)?.remove(0);
    let big = trunc.doubled();
    let wide = evolve_fixed(&rho0.embed(&big)?, spec, &big, &[t], h)?.remove(0);
    converged("Fock truncation", relative_change(&base.spin_matrix(), &wide.spin_matrix()))?;
    let fine = evolve_fixed(rho0, spec, trunc, &[t], 0.5 * h)?.remove(0);
    converged("time step", relative_change(&base.spin_matrix(), &fine.spin_matrix()))?;
    base.reduce_spin()?;
    Ok(base)
}

/// `log(rho_mn(t) / rho_mn(0))` from the reduced spin state; with
/// `previous`, imaginary parts are moved onto the branch nearest to it.
pub fn reduce_and_extract_phases(
    rho: &CompositeState,
    rho0_spin: &DickeMatrix,
    t: f64,
    previous: Option<&PhaseMatrix>,
) -> Result<PhaseMatrix> {
    phases_from_spin(&rho.spin_matrix(), rho0_spin, t, previous)
}

fn phases_from_spin(
    spin: &DMatrix<C64>,
    rho0_spin: &DickeMatrix,
    t: f64,
    previous: Option<&PhaseMatrix>,
) -> Result<PhaseMatrix> {
    let n = rho0_spin.n();
    if spin.nrows() != rho0_spin.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0_spin.dim(),
            found: spin.nrows(),
        });
    }
    let mut data = DMatrix::zeros(spin.nrows(), spin.ncols());
    for i in 0..spin.nrows() {
        for j in 0..spin.ncols() {
            let r0 = rho0_spin.matrix()[(i, j)];
            if r0.norm() <= 1e-10 {
                return Err(Error::InvalidState(format!(
                    "initial coherence ({}, {}) too small to divide by",
                    magnetic(n, i),
                    magnetic(n, j)
                )));
            }
            let mut phi = (spin[(i, j)] / r0).ln();
            if let Some(prev) = previous {
                phi.im = unwrap(prev.matrix()[(i, j)].im, phi.im, magnetic(n, i), magnetic(n, j))?;
            }
            data[(i, j)] = phi;
        }
    }
    Ok(PhaseMatrix::from_parts(n, t, data))
}

fn unwrap(prev: f64, raw: f64, m: i64, n: i64) -> Result<f64> {
    let turns = ((prev - raw) / (2.0 * PI)).round();
    let value = raw + 2.0 * PI * turns;
    let increment = value - prev;
    if increment.abs() > UNWRAP_LIMIT {
        return Err(Error::PhaseUnwrapAmbiguity { m, n, increment });
    }
    Ok(value)
}

/// Outcome of an oracle phase run.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub phases: Vec<PhaseMatrix>,
    /// Largest relative phase change when `n_max` was doubled.
    pub truncation_change: f64,
    /// Largest relative phase change when the step was halved.
    pub step_change: f64,
    pub n_max: usize,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub trunc: Option<FockTruncation>,
    /// Step; defaults to [`max_step`].
    pub step: Option<f64>,
    /// Run the doubled-`n_max` and halved-step comparisons.
    pub check_convergence: bool,
    /// Integrate one block of each mirror pair when the initial state allows.
    pub use_symmetry: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            trunc: None,
            step: None,
            check_convergence: true,
            use_symmetry: true,
        }
    }
}

/// `true` when the phonon state commutes with `(-1)^{a^dag a}`.
fn parity_symmetric(phonon: &DMatrix<C64>) -> bool {
    (0..phonon.nrows())
        .all(|p| (0..phonon.ncols()).all(|q| (p + q) % 2 == 0 || phonon[(p, q)].norm() == 0.0))
}

/// Phase history from `rho0`. With `mirrored`, the initial state must be
/// invariant under `m -> -m` combined with phonon parity; then block
/// `(-n, -m)` is the parity-conjugated adjoint of block `(m, n)`, its trace is
/// the complex conjugate, and only one block of each pair is integrated.
fn phase_history(
    spec: &EnsembleSpec,
    trunc: &FockTruncation,
    rho0: &CompositeState,
    rho0_spin: &DickeMatrix,
    times: &[f64],
    h: f64,
    mirrored: bool,
) -> Result<Vec<PhaseMatrix>> {
    let gen = build_generator(spec, trunc)?;
    check_compatible(rho0, &gen)?;
    let grid = Grid::new(times, h, spec.g())?;
    let n = spec.n();
    let pairs: Vec<(usize, usize)> = upper_pairs(n)
        .into_iter()
        .filter(|&p| !mirrored || p <= mirror(n, p))
        .collect();
    let runs = integrate(&gen, rho0, &grid, &pairs);
    let sd = spec.dim();
    let mut spin = DMatrix::zeros(sd, sd);
    let mut prev = PhaseMatrix::zeros(n, 0.0);
    let mut out = Vec::with_capacity(times.len());
    let mut clock = 0.0;
    for (leg, &(step, per, samples)) in grid.legs.iter().enumerate() {
        for s in 0..samples {
            clock += step * per as f64;
            for (pair, run) in &runs {
                let v = run.traces[leg][s];
                let mut put = |(i, j): (usize, usize), v: C64| {
                    spin[(i, j)] = v;
                    spin[(j, i)] = v.conj();
                };
                put(*pair, v);
                if mirrored {
                    put(mirror(n, *pair), v.conj());
                }
            }
            let tr: C64 = (0..sd).map(|i| spin[(i, i)]).sum();
            if (tr - C64::new(1.0, 0.0)).norm() > TRACE_DRIFT_LIMIT {
                return Err(Error::TraceDrift { trace: tr.re, t: clock });
            }
            prev = phases_from_spin(&spin, rho0_spin, clock, Some(&prev))?;
        }
        out.push(PhaseMatrix::from_parts(n, times[leg], prev.matrix().clone()));
    }
    Ok(out)
}

fn max_phase_change(a: &[PhaseMatrix], b: &[PhaseMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| relative_change(x.matrix(), y.matrix()))
        .fold(0.0, f64::max)
}

/// Oracle phases `phi_mn(t)` for the x-polarized coherent spin state times
/// `phonon0`, at each of the increasing `times`.
pub fn oracle_phases(
    spec: &EnsembleSpec,
    phonon0: &DMatrix<C64>,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let trunc = opts.trunc.unwrap_or_else(|| FockTruncation::for_spec(spec));
    trunc.check_floor(spec)?;
    if phonon0.nrows() != trunc.levels() {
        return Err(Error::DimensionMismatch {
            expected: trunc.levels(),
            found: phonon0.nrows(),
        });
    }
    let h = opts.step.unwrap_or_else(|| max_step(spec));
    if !(h > 0.0 && h <= max_step(spec) * (1.0 + 1e-12)) {
        return Err(Error::param("step", format!("must lie in (0, {}]", max_step(spec))));
    }
    let spin0 = css_x(spec.n());
    let rho0 = CompositeState::product(phonon0, &spin0)?;
    let mirrored = opts.use_symmetry && parity_symmetric(phonon0);
    let phases = phase_history(spec, &trunc, &rho0, &spin0, times, h, mirrored)?;
    let (mut truncation_change, mut step_change) = (0.0, 0.0);
    if opts.check_convergence {
        let big = trunc.doubled();
        let wide = phase_history(spec, &big, &rho0.embed(&big)?, &spin0, times, h, mirrored)?;
        truncation_change = max_phase_change(&phases, &wide);
        converged("Fock truncation", truncation_change)?;
        let fine = phase_history(spec, &trunc, &rho0, &spin0, times, 0.5 * h, mirrored)?;
        step_change = max_phase_change(&phases, &fine);
        converged("time step", step_change)?;
    }
    Ok(OracleRun {
        times: times.to_vec(),
        phases,
        truncation_change,
        step_change,
        n_max: trunc.n_max(),
        step: h,
    })
}

/// Largest `|phi_oracle - phi_ref| / |phi_ref|` over off-diagonal entries,
/// using the real part only when `real_only`.
pub fn phase_residual(oracle: &PhaseMatrix, reference: &PhaseMatrix, real_only: bool) -> f64 {
    let (a, b) = (oracle.matrix(), reference.matrix());
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i == j {
                continue;
            }
            let (x, y) = if real_only {
                (C64::new(a[(i, j)].re, 0.0), C64::new(b[(i, j)].re, 0.0))
            } else {
                (a[(i, j)], b[(i, j)])
            };
            worst = worst.max((x - y).norm() / y.norm());
        }
    }
    worst
}
