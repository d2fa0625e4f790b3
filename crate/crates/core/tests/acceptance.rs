//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use wcl::correlations::{halfline_a, halfline_b, HalflineOptions, KernelSource, ProfileOptions};
use wcl::dyson::{self, DysonModel, OmegaMethod, QmcOptions, SPrimePermutation, Sign};
use wcl::lambshift::{assemble_alpha, hamiltonian_symbol};
use wcl::model::{validate_interaction, Dispersion, Statistics};
use wcl::wavepacket::{self, GaussianDensity, Hamiltonian, PacketConfig};
use wcl::wick::{self, Pairing};

const LAMBDAS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn wick_vs_oracle() -> Outcome {
    let r = wick::wick_check(2024, 100).unwrap();
    Outcome::new(
        r.passed(),
        format!(
            "{} monomials, max |wick - oracle| = {:.2e}, gauge violations {}, polarization violations {}",
            r.trials, r.max_deviation, r.gauge_violations, r.polarization_violations
        ),
    )
}

fn combinatorics() -> Outcome {
    let mut ok = true;
    for n in 1..=12 {
        let s = dyson::sprime(n).unwrap();
        let mut v: Vec<Vec<usize>> = s.iter().map(|p| p.values().to_vec()).collect();
        v.sort();
        v.dedup();
        ok &= s.len() == 1 << (n - 1) && v.len() == s.len();
    }
    let mut checked = 0;
    for k in 1..=5 {
        for pi in dyson::sprime(2 * k).unwrap() {
            ok &= dyson::permutation_sign(&dyson::sigma_of_pi(&pi).unwrap()) == 1.0;
            checked += 1;
        }
    }
    Outcome::new(ok, format!("|S'(n)| = 2^(n-1) for n <= 12; sgn(sigma) = +1 on all {checked} orderings up to order 10"))
}

fn corner_simplex_bounds() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 1..=3 {
        for p in 1..=2 {
            for t in [0.5, 1.0, 2.0] {
                for l in LAMBDAS {
                    let g = dyson::gkp_integral(k, p, l, t).unwrap();
                    ok &= g.value <= g.bound;
                    worst = worst.max(g.value / g.bound);
                }
            }
        }
    }
    let mut closed: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        for l in LAMBDAS {
            let g = dyson::gkp_integral(1, 1, l, t).unwrap();
            closed = closed.max((g.value - dyson::g11_closed_form(l, t)).abs());
        }
    }
    ok &= closed < 1e-10;
    Outcome::new(ok, format!("max G/bound = {worst:.3}, |G_11 - closed form| = {closed:.1e}"))
}

fn identity_ordering(order: usize) -> SPrimePermutation {
    SPrimePermutation::from_trace(vec![Sign::Plus; order - 1])
}

fn dyson_convergence() -> Outcome {
    let (spec, res) = common::origin_model();
    let t = 6.0;
    let model = DysonModel::new(&spec, &res, t / (0.05 * 0.05)).unwrap();
    let alpha = assemble_alpha(&spec, &res).unwrap();
    let qmc = QmcOptions { points_log2: 20, replicates: 16, seed: 7, ..QmcOptions::default() };
    let mut ok = true;
    let mut parts = Vec::new();
    for order in [2, 4] {
        let pi = identity_ordering(order);
        let gamma = vec![0; order];
        let u = dyson::u_limit(&gamma, &pi, t, &alpha.a, &alpha.b).unwrap();
        let mut errs = Vec::new();
        let mut worst_se: f64 = 0.0;
        for l in LAMBDAS {
            let r = dyson::omega_integral(&model, &gamma, &pi, l, t, OmegaMethod::Qmc(qmc)).unwrap();
            let e = (r.value - u).norm();
            worst_se = worst_se.max(r.stderr / e);
            errs.push(e);
        }
        let fit = dyson::rate_fit(&LAMBDAS, &errs).unwrap();
        ok &= (0.85..=1.15).contains(&fit.slope) && worst_se < 0.1;
        parts.push(format!("k={} pi={pi}: slope {:.3}, max stderr/err {:.3}", order / 2, fit.slope, worst_se));
    }
    Outcome::new(ok, parts.join("; "))
}

fn odd_orders_vanish() -> Outcome {
    let (spec, res) = common::shell_model();
    let model = DysonModel::new(&spec, &res, 40.0).unwrap();
    let mut ok = true;
    let perms = dyson::sprime(3).unwrap();
    for pi in &perms {
        let r = dyson::omega_integral(&model, &[0, 0, 0], pi, 0.5, 1.0, OmegaMethod::Qmc(QmcOptions::default())).unwrap();
        ok &= r.value.re == 0.0 && r.value.im == 0.0 && r.evaluations == 0;
    }
    Outcome::new(ok, format!("all {} orderings in S'(3) give exactly 0 with no integrand evaluations", perms.len()))
}

fn time_domain_cross_check() -> Outcome {
    let (spec, res) = common::shell_maxwell_model();
    let alpha = assemble_alpha(&spec, &res).unwrap();
    let src = KernelSource::new(&spec, &res, &ProfileOptions::default()).unwrap();
    let opts = HalflineOptions { t_cut: 1e4, ..HalflineOptions::default() };
    let a = halfline_a(&src, 0, 0, &opts).unwrap();
    let b = halfline_b(&src, 0, 0, &opts).unwrap();
    let ra = (a.value - alpha.a[0][0]).norm() / alpha.a[0][0].norm();
    let rb = (b.value - alpha.b[0][0]).norm() / alpha.b[0][0].norm();
    Outcome::new(
        ra < 0.01 && rb < 0.01,
        format!("relative deviation a: {ra:.2e}, b: {rb:.2e} (tail bound {:.2e}, alpha {:.6e})", a.tail_bound, alpha.alpha[0][0].re),
    )
}

fn crossing_suppression() -> Outcome {
    let (spec, res) = common::shell_model();
    let t = 4.0;
    let model = DysonModel::new(&spec, &res, t / (0.05 * 0.05)).unwrap();
    let qmc = QmcOptions { points_log2: 20, replicates: 16, seed: 11, ..QmcOptions::default() };
    let pi = identity_ordering(4);
    let crossed = Pairing { pairs: vec![(0, 2), (1, 3)] };
    let nested = Pairing { pairs: vec![(0, 1), (2, 3)] };
    let mut cross = Vec::new();
    let mut nest = Vec::new();
    for l in LAMBDAS {
        let r = dyson::omega_integral(&model, &[0; 4], &pi, l, t, OmegaMethod::Qmc(qmc)).unwrap();
        cross.push(r.contribution(&crossed).unwrap().value.norm());
        nest.push(r.contribution(&nested).unwrap().clone());
    }
    let slope = dyson::rate_fit(&LAMBDAS, &cross).unwrap().slope;
    let (n1, n2) = (&nest[2], &nest[3]);
    let change = (n1.value - n2.value).norm() / n2.value.norm();
    let nonzero = n2.value.norm() > 10.0 * n2.stderr;
    Outcome::new(
        slope >= 0.85 && change < 0.05 && nonzero,
        format!("crossed slope {slope:.3}; nested {:.4e} -> {:.4e}, relative change {change:.3}", n1.value, n2.value),
    )
}

fn wavepacket_reproduction() -> Outcome {
    let mut ok = true;
    let mut sup: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    let mut asym: f64 = 0.0;
    let mut alignment: f64 = 1.0;
    for c in [[4.0, -4.0, 0.0], [4.0, 0.0, 0.0]] {
        let cfg = PacketConfig { c, alpha: 4.0, lambda: 0.1, points: 256, ..PacketConfig::default() };
        let orth = [-c[1], c[0]];
        for &t in &cfg.times {
            for ham in [Hamiltonian::Free, Hamiltonian::Modified] {
                let closed = wavepacket::closed_form_grid(&cfg, t, ham).unwrap();
                let oracle = wavepacket::momentum_oracle_evolve(&cfg, t, ham).unwrap();
                sup = sup.max(closed.sup_distance(&oracle.grid));
                let density = GaussianDensity::new(&cfg.matrix(t, ham)).unwrap();
                norm_dev = norm_dev.max((closed.normalization(&density) - 1.0).abs());
                norm_dev = norm_dev.max((oracle.grid.normalization(&density) - 1.0).abs());
                if ham == Hamiltonian::Free {
                    asym = asym.max(closed.symmetry_defect());
                } else if t > 0.0 {
                    let a = closed.anisotropy();
                    alignment = alignment.min(a.major_alignment(orth));
                    ok &= a.minor_variance < a.major_variance;
                }
            }
        }
    }
    ok &= sup < 1e-3 && norm_dev < 1e-6 && asym < 1e-10 && alignment > 1.0 - 1e-9;
    Outcome::new(
        ok,
        format!(
            "oracle sup distance {sup:.2e}, |mass - 1| <= {norm_dev:.1e}, free asymmetry {asym:.1e}, major axis alignment with c-orthogonal {alignment:.12}"
        ),
    )
}

fn hermiticity() -> Outcome {
    let mut ok = true;
    let mut herm: f64 = 0.0;
    let mut real: f64 = 0.0;
    let (dipole, res) = common::origin_model();
    let pair = common::hermitian_pair_spec(Statistics::Fermi);
    for spec in [&dipole, &pair] {
        ok &= validate_interaction(spec).passed();
        let m = assemble_alpha(spec, &res).unwrap();
        herm = herm.max(m.max_hermiticity_residual());
        match hamiltonian_symbol(spec, &m, 0.1, Dispersion::Massive) {
            Ok(h) => real = real.max(h.realness_residual(1000, 3.0)),
            Err(_) => ok = false,
        }
    }
    ok &= herm < 1e-8 && real < 1e-8;
    Outcome::new(ok, format!("max |alpha_s(j)s(i) - conj(alpha_ij)| = {herm:.1e}, max relative Im of symbol = {real:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Wick expansion vs finite-mode oracle", wick_vs_oracle),
        ("S' combinatorics and sigma sign", combinatorics),
        ("corner-simplex integral bounds", corner_simplex_bounds),
        ("Dyson terms converge at rate lambda", dyson_convergence),
        ("odd orders vanish", odd_orders_vanish),
        ("time-domain a, b vs frequency-domain alpha", time_domain_cross_check),
        ("crossed pairings suppressed", crossing_suppression),
        ("wave-packet snapshots", wavepacket_reproduction),
        ("Hermiticity of alpha and the modified symbol", hermiticity),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let el: Duration = start.elapsed();
        println!(
            "criterion {}: {} | {name} | {} | {:.1} s",
            n + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            el.as_secs_f64()
        );
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed in {:.1} s", criteria.len() - failed, criteria.len(), total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
