//! Runs a resolved [`ScenarioConfig`] into a [`Table`].
//!
//! Independent curves and sweep points run in parallel; results are collected
//! in input order and rows are sorted, so output does not depend on thread
//! scheduling.

use rayon::prelude::*;

use crate::analytic::{oat_optimum, Backend, SearchOptions, SqueezingCurve};
use crate::bang_bang::BathSpec;
use crate::config::{BackendChoice, Scenario, ScenarioConfig, SweepParam};
use crate::dicke::EnsembleSpec;
use crate::geometry::{phase_matrix, trajectory};
use crate::oracle::{oracle_phases, phase_residual, thermal_phonon, FockTruncation, OracleOptions};
use crate::output::{Cell, Table};
use crate::Result;

/// Curve labels for the three spin-bath comparison curves: `(eta, pulses)`.
pub fn fig3a_curves(cfg: &ScenarioConfig) -> [(f64, u32); 3] {
    [(0.0, 0), (cfg.bath.eta(), 0), (cfg.bath.eta(), cfg.pulses)]
}

/// `0, step, 2 step, ...` up to and including `gt_max`.
pub fn gt_grid(gt_max: f64, step: f64) -> Vec<f64> {
    let count = (gt_max / step * (1.0 + 1e-12)).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (gt_max - *last).abs() <= 1e-9 * step {
            *last = gt_max;
        }
    }
    grid
}

/// The backend implied by `choice` for the given pulse count and bath.
pub fn backend_for(choice: BackendChoice, pulses: u32, bath: BathSpec) -> Backend {
    match choice {
        BackendChoice::Analytic => Backend::Analytic,
        BackendChoice::Numeric => Backend::Numeric,
        BackendChoice::BangBang => Backend::BangBang { pulses, bath },
        BackendChoice::Auto if pulses > 0 || bath.eta() > 0.0 => Backend::BangBang { pulses, bath },
        BackendChoice::Auto => Backend::Numeric,
    }
}

fn search(cfg: &ScenarioConfig) -> SearchOptions {
    SearchOptions {
        step: cfg.step,
        gt_max: Some(cfg.gt_max),
        ..SearchOptions::default()
    }
}

fn curve_rows(spec: EnsembleSpec, backend: Backend, grid: &[f64], label: &[Cell]) -> Result<Vec<Vec<Cell>>> {
    let curve = SqueezingCurve::new(spec, backend)?;
    grid.iter()
        .map(|&gt| {
            let mut row = label.to_vec();
            row.push(Cell::Real(gt));
            row.push(Cell::Real(curve.eval_or_inf(gt)?));
            Ok(row)
        })
        .collect()
}

fn collect(table: &mut Table, chunks: Vec<Vec<Vec<Cell>>>, keys: usize) -> Result<()> {
    for row in chunks.into_iter().flatten() {
        table.push(row)?;
    }
    table.sort_by_leading(keys);
    Ok(())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Table> {
    let spec = cfg.spec;
    let grid = gt_grid(cfg.gt_max, cfg.step);
    let mut table = match cfg.scenario {
        Scenario::Fig1 => {
            let times: Vec<f64> = grid.iter().map(|gt| gt / spec.g()).collect();
            let mut table = Table::new(["m", "gt", "re_alpha", "im_alpha"]);
            let chunks = cfg
                .m_values
                .par_iter()
                .map(|&m| {
                    Ok(trajectory(&spec, m, &times)?
                        .into_iter()
                        .map(|s| {
                            vec![
                                Cell::Int(m),
                                Cell::Real(s.t * spec.g()),
                                Cell::Real(s.alpha.re),
                                Cell::Real(s.alpha.im),
                            ]
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 2)?;
            table
        }
        Scenario::Fig2a | Scenario::Fig2b => {
            let (name, values) = if cfg.scenario == Scenario::Fig2a {
                ("Q", &cfg.q_values)
            } else {
                ("n_th", &cfg.n_th_values)
            };
            let mut table = Table::new([name, "gt", "xi2"]);
            let chunks = values
                .par_iter()
                .map(|&v| {
                    let s = if name == "Q" { spec.with_q(v)? } else { spec.with_n_th(v)? };
                    let backend = backend_for(cfg.backend, cfg.pulses, cfg.bath);
                    curve_rows(s, backend, &grid, &[Cell::Real(v)])
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 2)?;
            table
        }
        Scenario::Fig2c => {
            let reference = oat_optimum(spec.n())?.xi;
            let qs = log_grid(cfg.q_min, cfg.q_max, cfg.q_points);
            let opts = search(cfg);
            let mut table = Table::new(["Q", "xi_opt", "gt_opt", "xi_oat_ref"]);
            let chunks = qs
                .par_iter()
                .map(|&q| {
                    let backend = backend_for(cfg.backend, cfg.pulses, cfg.bath);
                    let opt = SqueezingCurve::new(spec.with_q(q)?, backend)?.optimum(&opts)?;
                    Ok(vec![vec![q.into(), opt.xi.into(), opt.gt.into(), reference.into()]])
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 1)?;
            table
        }
        Scenario::Fig3a => {
            let mut table = Table::new(["eta", "pulses", "gt", "xi2"]);
            let chunks = fig3a_curves(cfg)
                .par_iter()
                .map(|&(eta, pulses)| {
                    let bath = BathSpec::new(eta, cfg.bath.omega_c(), cfg.bath.lambda())?;
                    let backend = Backend::BangBang { pulses, bath };
                    curve_rows(spec, backend, &grid, &[Cell::Real(eta), Cell::Int(pulses.into())])
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 3)?;
            table
        }
        Scenario::Fig3b => {
            let opts = search(cfg);
            let reference = SqueezingCurve::new(spec, Backend::Analytic)?.optimum(&opts)?.xi;
            let mut table = Table::new(["pulses", "xi_opt", "gt_opt", "xi_nobath_ref"]);
            let chunks = cfg
                .pulses_values
                .par_iter()
                .map(|&pulses| {
                    let backend = Backend::BangBang { pulses, bath: cfg.bath };
                    let opt = SqueezingCurve::new(spec, backend)?.optimum(&opts)?;
                    Ok(vec![vec![
                        Cell::Int(pulses.into()),
                        opt.xi.into(),
                        opt.gt.into(),
                        reference.into(),
                    ]])
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 1)?;
            table
        }
        Scenario::Sweep => {
            let axis = cfg.sweep;
            let opts = search(cfg);
            let mut table = Table::new([axis.param.key(), "xi_opt", "gt_opt"]);
            let chunks = axis
                .values()
                .par_iter()
                .map(|&v| {
                    let (s, pulses, bath) = sweep_point(cfg, axis.param, v)?;
                    let backend = backend_for(cfg.backend, pulses, bath);
                    let opt = SqueezingCurve::new(s, backend)?.optimum(&opts)?;
                    let x = if axis.param.is_integer() { Cell::Int(v as i64) } else { Cell::Real(v) };
                    Ok(vec![vec![x, opt.xi.into(), opt.gt.into()]])
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 1)?;
            table
        }
        Scenario::OracleCheck => {
            let mut table = Table::new([
                "Q",
                "n_th",
                "gt",
                "residual",
                "residual_real",
                "n_max",
                "truncation_change",
                "step_change",
            ]);
            let times: Vec<f64> = cfg.times.iter().map(|gt| gt / spec.g()).collect();
            let chunks = cfg
                .oracle_configs
                .par_iter()
                .map(|&(q, n_th)| {
                    let s = spec.with_q(q)?.with_n_th(n_th)?;
                    let trunc = FockTruncation::for_spec(&s);
                    let run = oracle_phases(&s, &thermal_phonon(n_th, &trunc), &times, &OracleOptions::default())?;
                    times
                        .iter()
                        .zip(&run.phases)
                        .map(|(&t, oracle)| {
                            let reference = phase_matrix(&s, t)?;
                            Ok(vec![
                                q.into(),
                                n_th.into(),
                                (t * s.g()).into(),
                                phase_residual(oracle, &reference, false).into(),
                                phase_residual(oracle, &reference, true).into(),
                                Cell::Int(run.n_max as i64),
                                run.truncation_change.into(),
                                run.step_change.into(),
                            ])
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            collect(&mut table, chunks, 3)?;
            table
        }
    };
    table.metadata = cfg.metadata().clone();
    Ok(table)
}

/// `points` values spaced evenly in `ln` between `min` and `max`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points)
        .map(|k| {
            let f = k as f64 / (points - 1) as f64;
            (min.ln() + f * (max.ln() - min.ln())).exp()
        })
        .collect()
}

fn sweep_point(cfg: &ScenarioConfig, param: SweepParam, v: f64) -> Result<(EnsembleSpec, u32, BathSpec)> {
    let (spec, bath) = (cfg.spec, cfg.bath);
    Ok(match param {
        SweepParam::N => (spec.with_n(v as usize)?, cfg.pulses, bath),
        SweepParam::Q => (spec.with_q(v)?, cfg.pulses, bath),
        SweepParam::NTh => (spec.with_n_th(v)?, cfg.pulses, bath),
        SweepParam::OmegaA => (spec.with_omega_a(v)?, cfg.pulses, bath),
        SweepParam::Pulses => (spec, v as u32, bath),
        SweepParam::Eta => (spec, cfg.pulses, BathSpec::new(v, bath.omega_c(), bath.lambda())?),
        SweepParam::Lambda => (spec, cfg.pulses, BathSpec::new(bath.eta(), bath.omega_c(), v)?),
        SweepParam::OmegaC => (spec, cfg.pulses, BathSpec::new(bath.eta(), v, bath.lambda())?),
    })
}
