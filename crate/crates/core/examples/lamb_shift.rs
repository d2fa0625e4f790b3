//! Lamb-shift coefficients for Fermi, Bose and Maxwell reservoirs and the
//! resulting modified one-particle symbol.

use wcl::correlations::Reservoir;
use wcl::lambshift::{assemble_alpha, hamiltonian_symbol};
use wcl::model::{Dispersion, FormFactor, InteractionSpec, OccupationDensity, Statistics};
use wcl::C64;

fn main() -> wcl::Result<()> {
    let f = FormFactor::bump([0.0; 3], 1.5, C64::new(1.0, 0.0));
    let cases = [
        ("Fermi beta=1 mu=0", Statistics::Fermi, OccupationDensity::fermi(1.0, 0.0)?),
        ("Fermi beta=4 mu=1", Statistics::Fermi, OccupationDensity::fermi(4.0, 1.0)?),
        ("Bose beta=1 mu=-0.5", Statistics::Bose, OccupationDensity::bose(1.0, -0.5)?),
        ("Maxwell beta=1 mu=0", Statistics::Fermi, OccupationDensity::maxwell(1.0, 0.0)?),
    ];
    for q in [1, 2] {
        let disp = Dispersion::from_exponent(q)?;
        for (name, stat, rho) in cases {
            let spec = InteractionSpec::dipole(stat, [4.0, -4.0, 0.0], f.clone());
            let res = Reservoir::new(stat, rho, disp);
            let a = assemble_alpha(&spec, &res)?;
            let h = hamiltonian_symbol(&spec, &a, 0.1, disp)?;
            let k = [1.0, -1.0, 0.0];
            println!(
                "q={q} {name:<20} alpha = {:+.10} (+-{:.0e})  omega~(1,-1,0) = {:.6}",
                a.alpha[0][0].re,
                a.error,
                h.eval(&k).re
            );
        }
    }
    Ok(())
}
