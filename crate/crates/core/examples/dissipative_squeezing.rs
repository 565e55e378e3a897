//! Squeezing versus time with a lossy, thermal mechanical mode: the exact
//! phase against the long-time closed form.

use phonon_squeezing::analytic::{Backend, SqueezingCurve};
use phonon_squeezing::dicke::EnsembleSpec;

fn main() -> phonon_squeezing::Result<()> {
    for (q, n_th) in [(1000.0, 0.0), (1000.0, 50.0), (10.0, 0.0)] {
        let spec = EnsembleSpec::new(10, 1000.0, q, n_th)?;
        let exact = SqueezingCurve::new(spec, Backend::Numeric)?;
        let closed = SqueezingCurve::new(spec, Backend::Analytic)?;
        println!("Q = {q}, n_th = {n_th}");
        for gt in [25.0, 50.0, 100.0, 150.0, 200.0] {
            println!(
                "  gt = {gt:>5}: exact {:.6}  closed form {:.6}",
                exact.eval(gt)?,
                closed.eval(gt)?
            );
        }
    }
    Ok(())
}
