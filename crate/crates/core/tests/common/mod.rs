#![allow(dead_code)]

use wcl::correlations::Reservoir;
use wcl::model::{Bump, Coupling, Dispersion, FormFactor, InteractionSpec, MomentumSymbol, OccupationDensity, Statistics};
use wcl::C64;

/// Dipole coupling to a Fermi sea at β = 1, μ = 0 with `|k|²` dispersion,
/// through a bump centred at the origin. Its correlations decay like
/// `τ^{-3/2}`.
pub fn origin_model() -> (InteractionSpec, Reservoir) {
    let f = FormFactor::bump([0.0, 0.0, 0.0], 1.5, C64::new(1.0, 0.0));
    (
        InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f),
        Reservoir::new(Statistics::Fermi, OccupationDensity::fermi(1.0, 0.0).unwrap(), Dispersion::Massive),
    )
}

/// Same reservoir with a bump supported on `1 ≤ |k| ≤ 3`; the correlations
/// decay faster than any power.
pub fn shell_model() -> (InteractionSpec, Reservoir) {
    let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, C64::new(1.0, 0.0));
    (
        InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f),
        Reservoir::new(Statistics::Fermi, OccupationDensity::fermi(1.0, 0.0).unwrap(), Dispersion::Massive),
    )
}

/// Shell bump with a Maxwell density, used for the time-domain check of
/// `a = iα`.
pub fn shell_maxwell_model() -> (InteractionSpec, Reservoir) {
    let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, C64::new(1.0, 0.0));
    (
        InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f),
        Reservoir::new(Statistics::Fermi, OccupationDensity::maxwell(1.0, 0.0).unwrap(), Dispersion::Massive),
    )
}

/// `F_1 = a†(f) + a(g)`, `F_2 = a†(g) + a(f)` with `σ = (2 1)` and complex,
/// off-centre form factors.
pub fn hermitian_pair_spec(statistics: Statistics) -> InteractionSpec {
    let f = FormFactor::new(vec![
        Bump { center: [2.0, 0.0, 0.0], radius: 1.0, amplitude: C64::new(1.0, 0.5) },
        Bump { center: [-1.5, 0.5, 0.0], radius: 0.8, amplitude: C64::new(0.0, -0.7) },
    ])
    .unwrap();
    let g = FormFactor::bump([1.8, 0.0, 0.3], 1.1, C64::new(0.3, -0.9));
    let sym = MomentumSymbol::linear([1.0, -0.5, 0.25]);
    InteractionSpec::new(
        statistics,
        1,
        vec![
            Coupling { f: vec![f.clone()], g: vec![g.clone()], symbol: sym.clone() },
            Coupling { f: vec![g], g: vec![f], symbol: sym },
        ],
        vec![1, 0],
    )
    .unwrap()
}
