//! Free and modified Gaussian wave-packet densities on the plane `x₃ = 0`,
//! written as PGM images, with the momentum-grid oracle as a check.
//!
//! Usage: `wavepacket_snapshots [out_dir]`

use std::path::PathBuf;

use wcl::wavepacket::{self, Hamiltonian, PacketConfig};

fn main() -> wcl::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "snapshots".into()));
    std::fs::create_dir_all(&out)?;
    for c in [[4.0, -4.0, 0.0], [4.0, 0.0, 0.0]] {
        let cfg = PacketConfig { c, ..PacketConfig::default() };
        println!("c = {c:?}");
        for pair in wavepacket::render_snapshots(&cfg)? {
            let oracle = wavepacket::momentum_oracle_evolve(&cfg, pair.t, Hamiltonian::Modified)?;
            let a = pair.modified.anisotropy();
            println!(
                "  t = {:.1}: oracle distance {:.1e}, major axis ({:+.3}, {:+.3}), variances {:.3} / {:.3}, free variance {:.3}",
                pair.t,
                oracle.grid.sup_distance(&pair.modified),
                a.major_axis[0],
                a.major_axis[1],
                a.major_variance,
                a.minor_variance,
                pair.free.anisotropy().major_variance
            );
            for g in [&pair.free, &pair.modified] {
                let name = format!("c{}{}_{}_t{:.1}.pgm", c[0], c[1], g.hamiltonian.name(), g.t);
                std::fs::write(out.join(name), g.to_pgm())?;
            }
        }
    }
    println!("images in {}", out.display());
    Ok(())
}
