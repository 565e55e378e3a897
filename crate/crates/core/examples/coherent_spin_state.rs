//! Coherent spin state along x and its squeezing under ideal one-axis twisting.

use phonon_squeezing::analytic::oat_optimum;
use phonon_squeezing::dicke::{css_x, one_axis_twist, SpinOperators};

fn main() -> phonon_squeezing::Result<()> {
    let n = 10;
    let ops = SpinOperators::new(n);
    let rho = css_x(n);
    let m = ops.moments(&rho)?;
    println!("N = {n}: |<J>| = {:.6}, xi^2 = {:.6}", m.mean_norm(), m.squeezing()?);

    for theta in [0.02, 0.05, 0.1, 0.2] {
        let xi = ops.squeezing(&one_axis_twist(&rho, theta))?;
        println!("twist {theta:>5}: xi^2 = {xi:.6}");
    }
    let best = oat_optimum(n)?;
    println!("best twist {:.6}: xi^2 = {:.6}", best.ct, best.xi);
    Ok(())
}
