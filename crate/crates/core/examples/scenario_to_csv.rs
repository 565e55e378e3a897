//! Runs a scenario from an in-memory config and prints the CSV.

use phonon_squeezing::{parse_config, run_scenario};

fn main() -> phonon_squeezing::Result<()> {
    let cfg = parse_config(
        "scenario = sweep\n\
         # optimal squeezing against ensemble size, closed form\n\
         backend = analytic\n\
         sweep_param = N\n\
         sweep_min = 2\n\
         sweep_max = 40\n\
         sweep_points = 5\n\
         sweep_scale = log\n\
         gt_max = 2000\n",
    )?;
    let table = run_scenario(&cfg)?;
    table.write(std::io::stdout())
}
