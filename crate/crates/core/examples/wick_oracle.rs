//! Wick expansion of a fermionic moment compared with the same moment
//! computed on an explicit Fock space.

use wcl::model::Statistics;
use wcl::wick::{self, enumerate_pairings, finite_mode_moment, quasi_free_moment, Factor, FiniteModes, Monomial};
use wcl::C64;

fn main() -> wcl::Result<()> {
    // three smearing functions over four modes
    let modes = FiniteModes {
        statistics: Statistics::Fermi,
        energies: vec![0.3, 1.1, 1.7, 2.4],
        occupations: vec![0.8, 0.45, 0.2, 0.05],
        amplitudes: vec![
            vec![vec![C64::new(1.0, 0.0), C64::new(0.5, 0.2), C64::new(0.0, -0.3), C64::new(0.1, 0.0)]],
            vec![vec![C64::new(0.2, 0.7), C64::new(-0.4, 0.0), C64::new(0.6, 0.1), C64::new(0.0, 0.9)]],
            vec![vec![C64::new(-0.3, 0.0), C64::new(0.0, 0.5), C64::new(0.8, -0.2), C64::new(0.4, 0.4)]],
        ],
    };
    let m = Monomial::new(
        vec![
            Factor::create(0, 0, 0.4),
            Factor::annihilate(1, 0, 0.1),
            Factor::create(2, 0, -0.7),
            Factor::annihilate(0, 0, 1.3),
        ],
        Statistics::Fermi,
    );
    let w = quasi_free_moment(&m, &modes)?;
    let f = finite_mode_moment(&m, &modes)?;
    println!("pairings of 4 positions:");
    for p in enumerate_pairings(4)? {
        println!("  {p} sign {:+} {}", wick::pairing_sign(&p), if p.is_crossing() { "crossing" } else { "" });
    }
    println!("wick   {w:.15}");
    println!("oracle {f:.15}");
    println!("difference {:.2e}", (w - f).norm());

    let report = wick::wick_check(1, 200)?;
    println!("random suite: {} monomials, max deviation {:.2e}, passed {}", report.trials, report.max_deviation, report.passed());
    Ok(())
}
