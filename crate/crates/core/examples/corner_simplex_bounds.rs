//! Corner-simplex integrals `G_{k,p}(λ)` against `k 2^{k+p} t^{p-1/2} λ`.

use wcl::dyson;

fn main() -> wcl::Result<()> {
    let t = 1.0;
    println!("{:>2} {:>2} {:>6} {:>12} {:>12} {:>8}", "k", "p", "lambda", "G", "bound", "ratio");
    for k in 1..=3 {
        for p in 1..=2 {
            for l in [0.4, 0.2, 0.1, 0.05] {
                let g = dyson::gkp_integral(k, p, l, t)?;
                println!("{k:>2} {p:>2} {l:>6} {:>12.5e} {:>12.5e} {:>8.4}", g.value, g.bound, g.value / g.bound);
            }
        }
    }
    let (l, t) = (0.1, 2.0);
    println!("G_11 closed form {:.15e}, quadrature {:.15e}", dyson::g11_closed_form(l, t), dyson::gkp_integral(1, 1, l, t)?.value);
    Ok(())
}
