//! Moments of gauge-invariant quasi-free states: pairing enumeration,
//! permutation signs, contraction rules, and a brute-force finite-mode
//! oracle built from explicit Jordan–Wigner matrices.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correlations::{ProfileCache, ProfileOptions, RadialProfile, Reservoir, Weight};
use crate::error::{arg_err, Result};
use crate::model::{FormFactor, InteractionSpec, Statistics};
use crate::C64;

/// Largest monomial length handled by the pairing sum.
pub const MAX_WICK_LENGTH: usize = 16;

/// One ladder operator `a#_p(e^{-i s h} φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub dagger: bool,
    /// Zero-based polarization index.
    pub polarization: usize,
    /// Index of the smearing function in the contraction table.
    pub form: usize,
    pub shift: f64,
}

impl Factor {
    pub fn create(form: usize, polarization: usize, shift: f64) -> Self {
        Factor { dagger: true, polarization, form, shift }
    }

    pub fn annihilate(form: usize, polarization: usize, shift: f64) -> Self {
        Factor { dagger: false, polarization, form, shift }
    }
}

/// Ordered product of ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub factors: Vec<Factor>,
    pub statistics: Statistics,
}

impl Monomial {
    pub fn new(factors: Vec<Factor>, statistics: Statistics) -> Self {
        Monomial { factors, statistics }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Equal numbers of creators and annihilators.
    pub fn is_balanced(&self) -> bool {
        2 * self.factors.iter().filter(|f| f.dagger).count() == self.factors.len()
    }
}

/// Partition of `{0, …, 2k-1}` into pairs `(n, m)` with `n < m`, listed by
/// increasing first element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        write!(f, "}}")
    }
}

impl Pairing {
    /// True if two pairs interleave, `n_a < n_b < m_a < m_b`.
    pub fn is_crossing(&self) -> bool {
        self.pairs.iter().enumerate().any(|(x, &(a, b))| {
            self.pairs.iter().enumerate().any(|(y, &(c, d))| x != y && a < c && c < b && b < d)
        })
    }
}

/// All `(2k-1)!!` pairings of `two_k` points, lexicographically ordered.
pub fn enumerate_pairings(two_k: usize) -> Result<Vec<Pairing>> {
    if two_k % 2 == 1 {
        return arg_err(format!("pairings need an even number of points, got {two_k}"));
    }
    if two_k > MAX_WICK_LENGTH {
        return arg_err(format!("at most {MAX_WICK_LENGTH} points can be paired, got {two_k}"));
    }
    let mut out = Vec::new();
    let mut used = vec![false; two_k];
    let mut cur = Vec::with_capacity(two_k / 2);
    fn rec(used: &mut [bool], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(Pairing { pairs: cur.clone() });
            return;
        };
        used[first] = true;
        for m in first + 1..used.len() {
            if !used[m] {
                used[m] = true;
                cur.push((first, m));
                rec(used, cur, out);
                cur.pop();
                used[m] = false;
            }
        }
        used[first] = false;
    }
    rec(&mut used, &mut cur, &mut out);
    Ok(out)
}

/// Sign of the permutation `(0, 1, …) ↦ (n_1, m_1, n_2, m_2, …)`.
pub fn pairing_sign(p: &Pairing) -> f64 {
    let seq: Vec<usize> = p.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut inv = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Signed sum over all pairings of `n` points of products of `c(x, y)`
/// (`x < y`). Evaluated recursively by expanding along the first free point;
/// the order of summation is the lexicographic pairing order.
pub fn pairing_sum<C: Fn(usize, usize) -> C64>(n: usize, statistics: Statistics, c: C) -> C64 {
    if n % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let fermi = statistics == Statistics::Fermi;
    let mut free: Vec<usize> = (0..n).collect();
    fn rec<C: Fn(usize, usize) -> C64>(free: &mut Vec<usize>, fermi: bool, c: &C) -> C64 {
        if free.is_empty() {
            return C64::new(1.0, 0.0);
        }
        let first = free.remove(0);
        let mut total = C64::new(0.0, 0.0);
        for k in 0..free.len() {
            let m = free.remove(k);
            let v = c(first, m);
            if v.re != 0.0 || v.im != 0.0 {
                let sign = if fermi && k % 2 == 1 { -1.0 } else { 1.0 };
                total += v * rec(free, fermi, c) * sign;
            }
            free.insert(k, m);
        }
        free.insert(0, first);
        total
    }
    rec(&mut free, fermi, &c)
}

/// Two-point contraction rules of a gauge-invariant quasi-free state.
pub trait ContractionTable {
    /// `ω(x y)` for the ordered pair of ladder operators.
    fn contract(&self, x: &Factor, y: &Factor) -> Result<C64>;
}

/// Wick expansion of `ω(m)` through the given contraction table.
pub fn quasi_free_moment<T: ContractionTable + ?Sized>(m: &Monomial, table: &T) -> Result<C64> {
    let n = m.len();
    if n > MAX_WICK_LENGTH {
        return arg_err(format!("monomial length {n} exceeds {MAX_WICK_LENGTH}"));
    }
    if n % 2 == 1 || !m.is_balanced() {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut c = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for y in x + 1..n {
            c[x * n + y] = table.contract(&m.factors[x], &m.factors[y])?;
        }
    }
    Ok(pairing_sum(n, m.statistics, |x, y| c[x * n + y]))
}

/// Contractions of continuum modes, evaluated through the radial profiles of
/// module `correlations` and memoized per (form pair, polarization, weight).
pub struct ContinuumTable {
    forms: Vec<Vec<FormFactor>>,
    res: Reservoir,
    opts: ProfileOptions,
    cache: ProfileCache<(usize, usize, usize, bool)>,
}

impl ContinuumTable {
    /// `forms[id][polarization]`.
    pub fn new(forms: Vec<Vec<FormFactor>>, res: Reservoir, opts: ProfileOptions) -> Self {
        ContinuumTable { forms, res, opts, cache: ProfileCache::new() }
    }

    /// Registers `f_j` as form `j` and `g_j` as form `ν + j`.
    pub fn from_spec(spec: &InteractionSpec, res: Reservoir) -> Self {
        let nu = spec.nu();
        let np = spec.polarizations();
        let mut forms = Vec::with_capacity(2 * nu);
        for j in 0..nu {
            forms.push((0..np).map(|p| spec.f(j, p).clone()).collect());
        }
        for j in 0..nu {
            forms.push((0..np).map(|p| spec.g(j, p).clone()).collect());
        }
        ContinuumTable::new(forms, res, ProfileOptions::default())
    }

    fn profile(&self, f: usize, g: usize, p: usize, w: Weight) -> Result<Arc<RadialProfile>> {
        if f >= self.forms.len() || g >= self.forms.len() || p >= self.forms[f].len() {
            return arg_err("factor refers to an unknown form factor");
        }
        self.cache.get_or_build((f, g, p, w == Weight::Occupied), || {
            RadialProfile::build(&self.forms[f][p], &self.forms[g][p], &self.res, w, &self.opts)
        })
    }

    pub fn cached_profiles(&self) -> usize {
        self.cache.len()
    }
}

impl ContractionTable for ContinuumTable {
    fn contract(&self, x: &Factor, y: &Factor) -> Result<C64> {
        if x.polarization != y.polarization || x.dagger == y.dagger {
            return Ok(C64::new(0.0, 0.0));
        }
        if x.dagger {
            // ω(a†(e^{-ish}f) a(e^{-iuh}g)) = ∫ρ f conj(g) e^{i(u-s)E}
            Ok(self.profile(x.form, y.form, x.polarization, Weight::Occupied)?.eval(y.shift - x.shift))
        } else {
            // ω(a(e^{-ish}g) a†(e^{-iuh}f)) = ∫(1∓ρ) f conj(g) e^{i(s-u)E}
            Ok(self.profile(y.form, x.form, x.polarization, Weight::Hole)?.eval(x.shift - y.shift))
        }
    }
}

/// A reservoir of finitely many discrete modes per polarization, used as a
/// brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModes {
    pub statistics: Statistics,
    pub energies: Vec<f64>,
    pub occupations: Vec<f64>,
    /// `amplitudes[form][polarization][mode]`.
    pub amplitudes: Vec<Vec<Vec<C64>>>,
}

/// Limit on `polarizations × modes` for the explicit matrix oracle.
pub const MAX_ORACLE_MODES: usize = 10;

impl FiniteModes {
    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }

    pub fn polarizations(&self) -> usize {
        self.amplitudes.first().map_or(1, |a| a.len())
    }

    fn amp(&self, f: &Factor, m: usize) -> C64 {
        self.amplitudes[f.form][f.polarization][m] * C64::from_polar(1.0, -f.shift * self.energies[m])
    }
}

impl ContractionTable for FiniteModes {
    fn contract(&self, x: &Factor, y: &Factor) -> Result<C64> {
        if x.polarization != y.polarization || x.dagger == y.dagger {
            return Ok(C64::new(0.0, 0.0));
        }
        let hole = self.statistics.hole_sign();
        let mut s = C64::new(0.0, 0.0);
        for m in 0..self.n_modes() {
            let (c, a) = if x.dagger { (x, y) } else { (y, x) };
            let w = if x.dagger { self.occupations[m] } else { 1.0 + hole * self.occupations[m] };
            s += self.amp(c, m) * self.amp(a, m).conj() * w;
        }
        Ok(s)
    }
}

/// Exact `Tr(ρ X_1 ⋯ X_n)` on the `2^N`-dimensional Fock space of the finite
/// modes (all polarizations), with `a†(φ) = Σ φ_m c†_m`,
/// `a(φ) = Σ conj(φ_m) c_m`, Jordan–Wigner ladder matrices and the product
/// state `⊗ diag(1 - p_m, p_m)`.
pub fn finite_mode_moment(m: &Monomial, modes: &FiniteModes) -> Result<C64> {
    if modes.statistics != Statistics::Fermi || m.statistics != Statistics::Fermi {
        return arg_err("the finite-mode oracle is fermionic only");
    }
    let np = modes.polarizations();
    let nm = modes.n_modes();
    let total = np * nm;
    if total > MAX_ORACLE_MODES {
        return arg_err(format!("finite-mode oracle limited to {MAX_ORACLE_MODES} modes, got {total}"));
    }
    let dim = 1usize << total;
    // weight of each occupation basis state
    let weights: Vec<f64> = (0..dim)
        .map(|b| {
            (0..total)
                .map(|bit| {
                    let p = modes.occupations[bit % nm];
                    if b >> bit & 1 == 1 {
                        p
                    } else {
                        1.0 - p
                    }
                })
                .product()
        })
        .collect();
    // coefficient of c#_{bit} in each factor
    let coeffs: Vec<Vec<C64>> = m
        .factors
        .iter()
        .map(|f| {
            (0..total)
                .map(|bit| {
                    let (p, mode) = (bit / nm, bit % nm);
                    if p != f.polarization {
                        return C64::new(0.0, 0.0);
                    }
                    let a = modes.amp(f, mode);
                    if f.dagger {
                        a
                    } else {
                        a.conj()
                    }
                })
                .collect()
        })
        .collect();
    let mut trace = C64::new(0.0, 0.0);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for (b, &wb) in weights.iter().enumerate() {
        if wb == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        v[b] = C64::new(1.0, 0.0);
        // apply X_n first, X_1 last
        for (f, cf) in m.factors.iter().zip(&coeffs).rev() {
            w.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            for (state, amp) in v.iter().enumerate() {
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                for (bit, c) in cf.iter().enumerate() {
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    let occupied = state >> bit & 1 == 1;
                    if occupied == f.dagger {
                        continue;
                    }
                    let parity = (state & ((1 << bit) - 1)).count_ones() % 2;
                    let sign = if parity == 1 { -1.0 } else { 1.0 };
                    w[state ^ (1 << bit)] += amp * c * sign;
                }
            }
            std::mem::swap(&mut v, &mut w);
        }
        trace += v[b] * wb;
    }
    Ok(trace)
}

/// Outcome of the oracle-equivalence suite.
#[derive(Debug, Clone, PartialEq)]
pub struct WickCheckReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub gauge_violations: usize,
    pub polarization_violations: usize,
    pub tolerance: f64,
}

impl WickCheckReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance && self.gauge_violations == 0 && self.polarization_violations == 0
    }
}

fn random_modes(rng: &mut ChaCha8Rng, n_forms: usize, pols: usize, n_modes: usize) -> FiniteModes {
    let energies = (0..n_modes).map(|_| rng.gen_range(0.0..3.0)).collect();
    let occupations = (0..n_modes).map(|_| rng.gen_range(0.0..1.0)).collect();
    let amplitudes = (0..n_forms)
        .map(|_| {
            (0..pols)
                .map(|_| (0..n_modes).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                .collect()
        })
        .collect();
    FiniteModes { statistics: Statistics::Fermi, energies, occupations, amplitudes }
}

fn random_monomial(rng: &mut ChaCha8Rng, len: usize, n_forms: usize, pols: usize, balanced: bool) -> Monomial {
    let mut daggers: Vec<bool> = (0..len).map(|i| if balanced { i % 2 == 0 } else { rng.gen_bool(0.5) }).collect();
    if balanced {
        for i in (1..len).rev() {
            let j = rng.gen_range(0..=i);
            daggers.swap(i, j);
        }
    }
    let factors = daggers
        .into_iter()
        .map(|dagger| Factor {
            dagger,
            polarization: rng.gen_range(0..pols),
            form: rng.gen_range(0..n_forms),
            shift: rng.gen_range(-2.0..2.0),
        })
        .collect();
    Monomial::new(factors, Statistics::Fermi)
}

/// Compares the Wick expansion with the finite-mode oracle on `trials`
/// random Fermi monomials of length at most 6 over at most 6 modes.
pub fn wick_check(seed: u64, trials: usize) -> Result<WickCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    let mut gauge_violations = 0;
    let mut polarization_violations = 0;
    for t in 0..trials {
        let pols = if t % 3 == 2 { 2 } else { 1 };
        let n_modes = rng.gen_range(1..=6 / pols);
        let n_forms = 3;
        let modes = random_modes(&mut rng, n_forms, pols, n_modes);
        let len = [2usize, 4, 6, 3, 5][t % 5];
        let m = random_monomial(&mut rng, len, n_forms, pols, true);
        let wick = quasi_free_moment(&m, &modes)?;
        let exact = finite_mode_moment(&m, &modes)?;
        max_dev = max_dev.max((wick - exact).norm());

        let unbalanced = random_monomial(&mut rng, 2 + 2 * (t % 3), n_forms, pols, false);
        if !unbalanced.is_balanced() && quasi_free_moment(&unbalanced, &modes)? != C64::new(0.0, 0.0) {
            gauge_violations += 1;
        }
        if pols == 2 {
            let x = Factor::create(0, 0, 0.3);
            let y = Factor::annihilate(1, 1, -0.2);
            if modes.contract(&x, &y)? != C64::new(0.0, 0.0) {
                polarization_violations += 1;
            }
        }
    }
    Ok(WickCheckReport { trials, max_deviation: max_dev, gauge_violations, polarization_violations, tolerance: 1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_counts_and_order() {
        let p2 = enumerate_pairings(2).unwrap();
        assert_eq!(p2, vec![Pairing { pairs: vec![(0, 1)] }]);
        let p4 = enumerate_pairings(4).unwrap();
        let expect = [vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]];
        assert_eq!(p4.iter().map(|p| p.pairs.clone()).collect::<Vec<_>>(), expect);
        assert_eq!(p4[1].to_string(), "{(1,3),(2,4)}");
        let mut df = 1;
        for k in 1..=6 {
            df *= 2 * k - 1;
            assert_eq!(enumerate_pairings(2 * k).unwrap().len(), df);
        }
        assert_eq!(enumerate_pairings(8).unwrap().len(), 105);
        assert!(enumerate_pairings(3).is_err());
        assert!(enumerate_pairings(18).is_err());
        assert_eq!(enumerate_pairings(0).unwrap().len(), 1);
    }

    #[test]
    fn pairing_signs() {
        let p4 = enumerate_pairings(4).unwrap();
        assert_eq!(pairing_sign(&p4[0]), 1.0);
        assert_eq!(pairing_sign(&p4[1]), -1.0);
        assert_eq!(pairing_sign(&p4[2]), 1.0);
        assert!(!p4[0].is_crossing() && p4[1].is_crossing() && !p4[2].is_crossing());
    }

    #[test]
    fn recursive_sum_matches_enumeration() {
        let n = 8;
        let c = |x: usize, y: usize| C64::new((x * 7 + y * 3) as f64 * 0.1 + 1.0, (x as f64 - y as f64) * 0.05);
        for stat in [Statistics::Fermi, Statistics::Bose] {
            let direct: C64 = enumerate_pairings(n)
                .unwrap()
                .iter()
                .map(|p| {
                    let s = if stat == Statistics::Fermi { pairing_sign(p) } else { 1.0 };
                    p.pairs.iter().map(|&(a, b)| c(a, b)).product::<C64>() * s
                })
                .sum();
            let rec = pairing_sum(n, stat, c);
            assert!((direct - rec).norm() < 1e-10 * direct.norm());
        }
    }

    fn one_mode(p: f64) -> FiniteModes {
        FiniteModes {
            statistics: Statistics::Fermi,
            energies: vec![1.0],
            occupations: vec![p],
            amplitudes: vec![vec![vec![C64::new(1.0, 0.0)]]],
        }
    }

    #[test]
    fn single_mode_oracle() {
        let aa = Monomial::new(vec![Factor::annihilate(0, 0, 0.0), Factor::create(0, 0, 0.0)], Statistics::Fermi);
        assert!((finite_mode_moment(&aa, &one_mode(0.0)).unwrap() - 1.0).norm() < 1e-15);
        let n = Monomial::new(vec![Factor::create(0, 0, 0.0), Factor::annihilate(0, 0, 0.0)], Statistics::Fermi);
        assert!((finite_mode_moment(&n, &one_mode(0.37)).unwrap() - 0.37).norm() < 1e-15);
    }

    #[test]
    fn odd_and_unbalanced_vanish() {
        let modes = one_mode(0.5);
        let odd = Monomial::new(vec![Factor::create(0, 0, 0.0); 3], Statistics::Fermi);
        assert_eq!(quasi_free_moment(&odd, &modes).unwrap(), C64::new(0.0, 0.0));
        let cc = Monomial::new(vec![Factor::create(0, 0, 0.0), Factor::create(0, 0, 1.0)], Statistics::Fermi);
        assert_eq!(quasi_free_moment(&cc, &modes).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn length_four_equal_shifts_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let modes = random_modes(&mut rng, 2, 1, 4);
        let m = Monomial::new(
            vec![
                Factor::create(0, 0, 0.4),
                Factor::annihilate(1, 0, 0.4),
                Factor::create(1, 0, 0.4),
                Factor::annihilate(0, 0, 0.4),
            ],
            Statistics::Fermi,
        );
        let a = quasi_free_moment(&m, &modes).unwrap();
        let b = finite_mode_moment(&m, &modes).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} {b}");
    }

    #[test]
    fn oracle_suite_passes() {
        let r = wick_check(2024, 100).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn continuum_contractions_follow_correlations() {
        use crate::correlations::{two_point_minus, two_point_plus};
        use crate::model::{Dispersion, OccupationDensity};
        let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, C64::new(1.0, 0.0));
        let spec = InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f.clone());
        let res = Reservoir::new(Statistics::Fermi, OccupationDensity::fermi(1.0, 0.3).unwrap(), Dispersion::Massive);
        let t = ContinuumTable::from_spec(&spec, res);
        let x = Factor::create(0, 0, 0.5);
        let y = Factor::annihilate(1, 0, 2.0);
        let v = t.contract(&x, &y).unwrap();
        assert!((v - two_point_plus(&f, &f, &res, 1.5).unwrap()).norm() < 1e-15);
        let v = t.contract(&y, &x).unwrap();
        assert!((v - two_point_minus(&f, &f, &res, 1.5).unwrap()).norm() < 1e-15);
        let _ = t.contract(&x, &y).unwrap();
        assert_eq!(t.cached_profiles(), 2);
        let z = Factor::annihilate(1, 0, 0.0);
        assert_eq!(t.contract(&z, &z).unwrap(), C64::new(0.0, 0.0));
    }
}
