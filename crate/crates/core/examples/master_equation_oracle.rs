//! Full spin-phonon master equation for a small ensemble, compared with the
//! closed-form geometric phase.

use phonon_squeezing::dicke::EnsembleSpec;
use phonon_squeezing::geometry::phase_matrix;
use phonon_squeezing::oracle::{
    oracle_phases, phase_residual, thermal_phonon, FockTruncation, OracleOptions,
};

fn main() -> phonon_squeezing::Result<()> {
    let spec = EnsembleSpec::with_coupling(2, 1.0, 50.0, 25.0, 0.0)?;
    let trunc = FockTruncation::for_spec(&spec);
    let times = [0.5, 1.0, 2.0];
    let opts = OracleOptions { check_convergence: false, ..OracleOptions::default() };
    let run = oracle_phases(&spec, &thermal_phonon(0.0, &trunc), &times, &opts)?;
    println!("Fock levels 0..={}, step {:.2e}", run.n_max, run.step);
    for (t, oracle) in times.iter().zip(&run.phases) {
        let closed = phase_matrix(&spec, *t)?;
        println!(
            "gt = {t}: phi(-2,2) = {:.6e}, max relative residual {:.2e}",
            oracle.get(-2, 2),
            phase_residual(oracle, &closed, false)
        );
    }
    Ok(())
}
