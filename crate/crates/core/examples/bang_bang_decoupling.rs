//! Spin-bath dephasing with and without Bang-Bang pulses.

use phonon_squeezing::analytic::{Backend, SearchOptions, SqueezingCurve};
use phonon_squeezing::bang_bang::{BBSchedule, BathSpec, bb_integrals, kappa_bound};
use phonon_squeezing::dicke::EnsembleSpec;

fn main() -> phonon_squeezing::Result<()> {
    let spec = EnsembleSpec::new(10, 1000.0, 1000.0, 10.0)?;
    let bath = BathSpec::new(4e-4, BathSpec::DEFAULT_OMEGA_C, 4.0)?;

    let t = 157.0;
    for pulses in [0, 100, 500] {
        let sched = BBSchedule::new(pulses, t)?;
        let bb = bb_integrals(&spec, &sched, t)?;
        let kappa = kappa_bound(&bath, &sched, 0, 1, t)?;
        println!("M = {pulses:>3}: twist {:+.4e}, kappa(0,1) = {kappa:.3e}", bb.twist);
    }

    let opts = SearchOptions { gt_max: Some(300.0), ..SearchOptions::default() };
    for (label, pulses, bath) in [
        ("no bath, no pulses", 0, BathSpec::none()),
        ("bath, no pulses", 0, bath),
        ("bath, 500 pulses", 500, bath),
    ] {
        let opt = SqueezingCurve::new(spec, Backend::BangBang { pulses, bath })?.optimum(&opts)?;
        println!("{label:>20}: xi^2_opt = {:.5} at gt = {:.2}", opt.xi, opt.gt);
    }
    Ok(())
}
