//! Reservoir correlation functions of a dipole coupling and the half-line
//! integrals that define `a = iα`.

use std::sync::Arc;

use wcl::correlations::{halfline_a, CorrelationKernel, HalflineOptions, KernelSource, ProfileOptions, Reservoir, DEFAULT_STEP_FACTOR};
use wcl::lambshift::assemble_alpha;
use wcl::model::{Dispersion, FormFactor, InteractionSpec, OccupationDensity, Statistics};
use wcl::C64;

fn main() -> wcl::Result<()> {
    for (name, center, radius) in [("origin bump", [0.0; 3], 1.5), ("shell bump", [2.0, 0.0, 0.0], 1.0)] {
        let f = FormFactor::bump(center, radius, C64::new(1.0, 0.0));
        let spec = InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f);
        let res = Reservoir::new(Statistics::Fermi, OccupationDensity::fermi(1.0, 0.0)?, Dispersion::Massive);
        let src = Arc::new(KernelSource::new(&spec, &res, &ProfileOptions::default())?);
        let table = CorrelationKernel::tabulate(src.clone(), 200.0, DEFAULT_STEP_FACTOR)?;
        println!("{name}: decay constant C = {:.4}, table points {}, interpolation error {:.1e}", table.decay_constant(), table.tau_grid().len(), table.interpolation_error());
        println!("  {:>8} {:>24} {:>14}", "tau", "c+(tau)", "|c+|(1+tau)^1.5");
        for tau in [0.0, 0.5, 2.0, 10.0, 50.0, 200.0] {
            let c = table.c_plus(0, 0, tau);
            println!("  {tau:>8.1} {:>11.4e}{:+11.4e}i {:>14.4e}", c.re, c.im, c.norm() * (1.0f64 + tau).powf(1.5));
        }
        let alpha = assemble_alpha(&spec, &res)?;
        let a = halfline_a(&src, 0, 0, &HalflineOptions::default())?;
        println!("  i*alpha = {:.10}, time domain a = {:.10} (tail bound {:.2e})", alpha.a[0][0], a.value, a.tail_bound);
    }
    Ok(())
}
