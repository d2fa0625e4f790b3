//! `|Ω_{γ,π}(λ) - U(γ,π)|` for every ordering at orders 2 and 4, with the
//! fitted log-log slope and the crossed/nested pairing split.
//!
//! Usage: `dyson_convergence [t] [log2 points]`

use wcl::correlations::Reservoir;
use wcl::dyson::{self, DysonModel, OmegaMethod, QmcOptions};
use wcl::lambshift::assemble_alpha;
use wcl::model::{Dispersion, FormFactor, InteractionSpec, OccupationDensity, Statistics};
use wcl::C64;

fn main() -> wcl::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let t: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6.0);
    let log2: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(16);
    let lambdas = [0.4, 0.2, 0.1, 0.05];

    let f = FormFactor::bump([0.0; 3], 1.5, C64::new(1.0, 0.0));
    let spec = InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f);
    let res = Reservoir::new(Statistics::Fermi, OccupationDensity::fermi(1.0, 0.0)?, Dispersion::Massive);
    let model = DysonModel::new(&spec, &res, t / (0.05 * 0.05))?;
    let alpha = assemble_alpha(&spec, &res)?;
    let qmc = OmegaMethod::Qmc(QmcOptions { points_log2: log2, ..QmcOptions::default() });

    println!("t = {t}, alpha = {:.8}", alpha.alpha[0][0].re);
    for order in [2, 4] {
        let gamma = vec![0; order];
        for pi in dyson::sprime(order)? {
            let u = dyson::u_limit(&gamma, &pi, t, &alpha.a, &alpha.b)?;
            let mut errs = Vec::new();
            let mut line = String::new();
            for l in lambdas {
                let r = dyson::omega_integral(&model, &gamma, &pi, l, t, qmc)?;
                let e = (r.value - u).norm();
                errs.push(e);
                line += &format!(" {e:.3e}(+-{:.0e})", r.stderr);
                if order == 4 && l == 0.05 {
                    let crossed: f64 = r.contributions.iter().filter(|c| c.pairing.is_crossing()).map(|c| c.value.norm()).sum();
                    line += &format!(" crossed {crossed:.2e}");
                }
            }
            let fit = dyson::rate_fit(&lambdas, &errs)?;
            println!("{pi:>10} U = {u:.5}:{line}  slope {:.3}", fit.slope);
        }
    }
    Ok(())
}
