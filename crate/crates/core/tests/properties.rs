use proptest::prelude::*;

use wcl::dyson::{self, SPrimePermutation, Sign};
use wcl::wavepacket::{self, GaussianDensity, PacketConfig};
use wcl::C64;

fn trace(max_len: usize) -> impl Strategy<Value = Vec<Sign>> {
    prop::collection::vec(prop_oneof![Just(Sign::Plus), Just(Sign::Minus)], 0..max_len)
}

proptest! {
    #[test]
    fn traces_build_permutations(tr in trace(13)) {
        let p = SPrimePermutation::from_trace(tr.clone());
        let mut v = p.values().to_vec();
        v.sort_unstable();
        prop_assert_eq!(v, (0..tr.len() + 1).collect::<Vec<_>>());
        prop_assert_eq!(p.trace(), tr.as_slice());
    }

    #[test]
    fn sigma_is_even(tr in trace(13).prop_filter("even order", |t| t.len() % 2 == 1)) {
        let p = SPrimePermutation::from_trace(tr);
        prop_assert_eq!(dyson::permutation_sign(&dyson::sigma_of_pi(&p).unwrap()), 1.0);
    }

    #[test]
    fn limit_is_homogeneous_in_time(
        tr in trace(8).prop_filter("even order", |t| t.len() % 2 == 1),
        t in 0.1f64..5.0,
        s in 0.1f64..3.0,
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
    ) {
        let p = SPrimePermutation::from_trace(tr);
        let a = vec![vec![C64::new(re, im)]];
        let b = vec![vec![C64::new(-im, re)]];
        let gamma = vec![0; p.order()];
        let k = (p.order() / 2) as i32;
        let u1 = dyson::u_limit(&gamma, &p, t, &a, &b).unwrap();
        let u2 = dyson::u_limit(&gamma, &p, s * t, &a, &b).unwrap();
        prop_assert!((u2 - u1 * s.powi(k)).norm() <= 1e-12 * (1.0 + u2.norm()));
    }

    #[test]
    fn evolution_matrix_is_symmetric_and_invertible(
        c in prop::array::uniform3(-5.0f64..5.0),
        alpha in -5.0f64..5.0,
        lambda in 0.01f64..0.5,
        t in 0.0f64..10.0,
    ) {
        let cfg = PacketConfig { c, alpha, lambda, ..PacketConfig::default() };
        let m = wavepacket::m_matrix(t, &cfg);
        prop_assert_eq!(m.symmetry_defect(), 0.0);
        prop_assert!(m.det().norm() >= 1.0 - 1e-9);
    }

    #[test]
    fn densities_are_nonnegative_and_finite(
        c in prop::array::uniform3(-5.0f64..5.0),
        alpha in -5.0f64..5.0,
        t in 0.0f64..3.0,
        x in prop::array::uniform3(-20.0f64..20.0),
    ) {
        let cfg = PacketConfig { c, alpha, ..PacketConfig::default() };
        let d = GaussianDensity::new(&wavepacket::m_matrix(t, &cfg)).unwrap();
        let v = d.eval(&x);
        prop_assert!(v >= 0.0 && v.is_finite());
        prop_assert!(v <= d.eval(&[0.0; 3]));
    }

    #[test]
    fn anisotropy_follows_sign_of_alpha(
        phi in 0.0f64..std::f64::consts::PI,
        alpha in prop_oneof![-4.0f64..-0.5, 0.5f64..4.0],
        t in 0.2f64..1.5,
    ) {
        let c = [2.0 * phi.cos(), 2.0 * phi.sin(), 0.0];
        let cfg = PacketConfig { c, alpha, lambda: 0.1, points: 64, ..PacketConfig::default() };
        let cov = GaussianDensity::new(&wavepacket::m_matrix(t, &cfg)).unwrap().covariance();
        let along = (0..2).map(|i| (0..2).map(|j| c[i] * cov[i][j] * c[j]).sum::<f64>()).sum::<f64>() / 4.0;
        let o = [-c[1], c[0]];
        let orth = (0..2).map(|i| (0..2).map(|j| o[i] * cov[i][j] * o[j]).sum::<f64>()).sum::<f64>() / 4.0;
        if alpha > 0.0 { prop_assert!(along < orth); } else { prop_assert!(along > orth); }
    }

    #[test]
    fn rate_fit_recovers_power_laws(p in 0.2f64..4.0, scale in 1e-6f64..1e3) {
        let l: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
        let e: Vec<f64> = l.iter().map(|x| scale * x.powf(p)).collect();
        let f = dyson::rate_fit(&l, &e).unwrap();
        prop_assert!((f.slope - p).abs() < 1e-9);
        prop_assert!((f.r_squared - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corner_simplex_integrals_respect_bound(
        k in 1usize..=2,
        p in 1u32..=2,
        lambda in 0.02f64..0.5,
        t in 0.25f64..3.0,
    ) {
        let g = dyson::gkp_integral(k, p, lambda, t).unwrap();
        prop_assert!(g.value > 0.0 && g.value <= g.bound);
    }
}
