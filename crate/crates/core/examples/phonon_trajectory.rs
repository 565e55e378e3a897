//! Displacement of the mechanical mode conditioned on the collective spin
//! projection `m`, over one mechanical period.

use std::f64::consts::PI;

use phonon_squeezing::dicke::EnsembleSpec;
use phonon_squeezing::geometry::{phase_integrals, trajectory};

fn main() -> phonon_squeezing::Result<()> {
    let spec = EnsembleSpec::defaults();
    let period = 2.0 * PI / spec.omega_a();
    let times: Vec<f64> = (0..=8).map(|k| k as f64 * period / 8.0).collect();
    for m in [1, 3] {
        println!("m = {m}");
        for s in trajectory(&spec, m, &times)? {
            println!("  t = {:.6e}  alpha = {:+.4e} {:+.4e}i", s.t, s.alpha.re, s.alpha.im);
        }
    }
    let pi = phase_integrals(&spec, period);
    println!(
        "after one period: |alpha_1| = {:.3e}, decoherence weight = {:.3e}",
        pi.alpha_end.norm(),
        pi.decoherence(spec.gamma())
    );
    Ok(())
}
