//! Best achievable squeezing and when it occurs, against quality factor.

use phonon_squeezing::analytic::{optimal_squeezing, oat_optimum, xi_upper_bound, Backend};
use phonon_squeezing::dicke::EnsembleSpec;

fn main() -> phonon_squeezing::Result<()> {
    let reference = oat_optimum(10)?.xi;
    println!("lossless reference xi^2 = {reference:.6}");
    for q in [1e2, 1e3, 1e4, 1e5] {
        let spec = EnsembleSpec::new(10, 1000.0, q, 100.0)?;
        let opt = optimal_squeezing(&spec, Backend::Numeric)?;
        println!(
            "Q = {q:>8}: xi^2_opt = {:.6} at gt = {:.2} (bound {:.6})",
            opt.xi,
            opt.gt,
            xi_upper_bound(spec.n(), spec.mu())
        );
    }
    Ok(())
}
