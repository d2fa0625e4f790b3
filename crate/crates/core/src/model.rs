//! Physical inputs: form factors, dispersion relations, occupation densities
//! and the interaction `V = Σ_j Q_j ⊗ F_j`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result, WclError};
use crate::quadrature::lowdisc::halton;
use crate::{Vec3, C64};

/// Smooth bump profile `exp(-1/(1-s²))` for `s² < 1`, zero otherwise.
#[inline]
pub fn bump_profile(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn norm3(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// One compactly supported component of a form factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vec3,
    pub radius: f64,
    pub amplitude: C64,
}

impl Bump {
    #[inline]
    pub fn eval(&self, k: &Vec3) -> C64 {
        let d0 = k[0] - self.center[0];
        let d1 = k[1] - self.center[1];
        let d2 = k[2] - self.center[2];
        let s2 = (d0 * d0 + d1 * d1 + d2 * d2) / (self.radius * self.radius);
        if s2 >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        self.amplitude * bump_profile(s2)
    }

    /// Interval of `|k|` on which this component can be nonzero.
    pub fn radial_range(&self) -> (f64, f64) {
        let d = norm3(&self.center);
        ((d - self.radius).max(0.0), d + self.radius)
    }
}

/// Momentum-space form factor: a finite sum of smooth bumps, hence compactly
/// supported in momentum space and Schwartz in position space.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFactor {
    terms: Vec<Bump>,
}

impl FormFactor {
    pub fn new(terms: Vec<Bump>) -> Result<Self> {
        for b in &terms {
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return arg_err(format!("bump radius must be positive, got {}", b.radius));
            }
            if b.center.iter().any(|c| !c.is_finite()) || !b.amplitude.is_finite() {
                return arg_err("bump center and amplitude must be finite");
            }
        }
        Ok(FormFactor { terms })
    }

    /// Single bump; panics on a non-positive radius.
    pub fn bump(center: Vec3, radius: f64, amplitude: C64) -> Self {
        FormFactor::new(vec![Bump {
            center,
            radius,
            amplitude,
        }])
        .expect("valid bump")
    }

    pub fn zero() -> Self {
        FormFactor { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[Bump] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn eval(&self, k: &Vec3) -> C64 {
        self.terms.iter().map(|t| t.eval(k)).sum()
    }

    /// Upper bound on `|k|` over the support.
    pub fn support_radius(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| norm3(&t.center) + t.radius)
            .fold(0.0, f64::max)
    }

    /// Smallest interval of `|k|` containing the support, if nonempty.
    pub fn radial_support(&self) -> Option<(f64, f64)> {
        self.terms
            .iter()
            .filter(|t| t.amplitude != C64::new(0.0, 0.0))
            .map(Bump::radial_range)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> FormFactor {
        FormFactor {
            terms: self
                .terms
                .iter()
                .map(|t| Bump {
                    amplitude: t.amplitude.conj(),
                    ..*t
                })
                .collect(),
        }
    }
}

/// One-particle dispersion `|k|^q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dispersion {
    /// `q = 1`
    Massless,
    /// `q = 2`
    Massive,
}

impl Dispersion {
    pub fn from_exponent(q: u32) -> Result<Self> {
        match q {
            1 => Ok(Dispersion::Massless),
            2 => Ok(Dispersion::Massive),
            _ => Err(WclError::Config(format!("dispersion exponent q must be 1 or 2, got {q}"))),
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Dispersion::Massless => 1,
            Dispersion::Massive => 2,
        }
    }

    #[inline]
    pub fn energy_of_radius(self, r: f64) -> f64 {
        match self {
            Dispersion::Massless => r,
            Dispersion::Massive => r * r,
        }
    }

    #[inline]
    pub fn radius_of_energy(self, e: f64) -> f64 {
        match self {
            Dispersion::Massless => e,
            Dispersion::Massive => e.sqrt(),
        }
    }

    #[inline]
    pub fn energy(self, k: &Vec3) -> f64 {
        self.energy_of_radius(norm3(k))
    }
}

/// Particle statistics of the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermi,
    Bose,
}

impl Statistics {
    /// Sign in `ω(a a†) = (1 ∓ ρ)`: `-1` for Fermi, `+1` for Bose.
    pub fn hole_sign(self) -> f64 {
        match self {
            Statistics::Fermi => -1.0,
            Statistics::Bose => 1.0,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Fermi => write!(f, "fermi"),
            Statistics::Bose => write!(f, "bose"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupationKind {
    Fermi,
    Bose,
    Maxwell,
}

/// Occupation density `ρ(e)` of a gauge-invariant quasi-free state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationDensity {
    kind: OccupationKind,
    beta: f64,
    mu: f64,
}

impl OccupationDensity {
    pub fn new(kind: OccupationKind, beta: f64, mu: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(WclError::Config(format!("inverse temperature beta must be positive, got {beta}")));
        }
        if !mu.is_finite() {
            return Err(WclError::Config("chemical potential mu must be finite".into()));
        }
        if kind == OccupationKind::Bose && beta * mu >= 0.0 {
            return Err(WclError::Config(format!(
                "Bose occupation requires fugacity exp(beta*mu) < 1, got beta*mu = {}",
                beta * mu
            )));
        }
        Ok(OccupationDensity { kind, beta, mu })
    }

    pub fn fermi(beta: f64, mu: f64) -> Result<Self> {
        Self::new(OccupationKind::Fermi, beta, mu)
    }

    pub fn bose(beta: f64, mu: f64) -> Result<Self> {
        Self::new(OccupationKind::Bose, beta, mu)
    }

    pub fn maxwell(beta: f64, mu: f64) -> Result<Self> {
        Self::new(OccupationKind::Maxwell, beta, mu)
    }

    pub fn kind(&self) -> OccupationKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `ρ(e)` for one-particle energy `e ≥ 0`.
    #[inline]
    pub fn occupation(&self, e: f64) -> f64 {
        let x = self.beta * (e - self.mu);
        match self.kind {
            OccupationKind::Fermi => {
                if x > 0.0 {
                    let z = (-x).exp();
                    z / (1.0 + z)
                } else {
                    1.0 / (1.0 + x.exp())
                }
            }
            OccupationKind::Bose => 1.0 / x.exp_m1(),
            OccupationKind::Maxwell => (-x).exp(),
        }
    }
}

/// Real polynomial symbol `q(k) = Σ c · k₁^a k₂^b k₃^c` of a multiplication
/// operator in the momentum representation. Real coefficients make the
/// operator self-adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSymbol {
    pub monomials: Vec<(f64, [u32; 3])>,
}

impl MomentumSymbol {
    /// Linear symbol `c·k`, e.g. the dipole coupling `c·P`.
    pub fn linear(c: Vec3) -> Self {
        MomentumSymbol {
            monomials: vec![(c[0], [1, 0, 0]), (c[1], [0, 1, 0]), (c[2], [0, 0, 1])],
        }
    }

    #[inline]
    pub fn eval(&self, k: &Vec3) -> f64 {
        self.monomials
            .iter()
            .map(|(c, e)| c * k[0].powi(e[0] as i32) * k[1].powi(e[1] as i32) * k[2].powi(e[2] as i32))
            .sum()
    }

    /// Coefficient vector if the symbol is purely linear.
    pub fn as_linear(&self) -> Option<Vec3> {
        let mut c = [0.0; 3];
        for (coef, e) in &self.monomials {
            match e {
                [1, 0, 0] => c[0] += coef,
                [0, 1, 0] => c[1] += coef,
                [0, 0, 1] => c[2] += coef,
                _ if *coef == 0.0 => {}
                _ => return None,
            }
        }
        Some(c)
    }
}

/// One term `Q_j ⊗ F_j` with `F_j = Σ_p a†_p(f_jp) + a_p(g_jp)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// Creation smearing per polarization.
    pub f: Vec<FormFactor>,
    /// Annihilation smearing per polarization.
    pub g: Vec<FormFactor>,
    pub symbol: MomentumSymbol,
}

/// Interaction specification `V = Σ_j Q_j ⊗ F_j` with its Hermiticity
/// involution `σ` (zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec {
    statistics: Statistics,
    polarizations: usize,
    couplings: Vec<Coupling>,
    sigma: Vec<usize>,
}

impl InteractionSpec {
    pub fn new(
        statistics: Statistics,
        polarizations: usize,
        couplings: Vec<Coupling>,
        sigma: Vec<usize>,
    ) -> Result<Self> {
        if couplings.is_empty() {
            return arg_err("interaction needs at least one coupling term");
        }
        if !(1..=2).contains(&polarizations) {
            return arg_err(format!("polarizations must be 1 or 2, got {polarizations}"));
        }
        for (j, c) in couplings.iter().enumerate() {
            if c.f.len() != polarizations || c.g.len() != polarizations {
                return arg_err(format!("coupling {j} must carry one form factor per polarization"));
            }
        }
        if sigma.len() != couplings.len() || sigma.iter().any(|&s| s >= couplings.len()) {
            return arg_err("sigma must map {0..nu} into itself");
        }
        Ok(InteractionSpec {
            statistics,
            polarizations,
            couplings,
            sigma,
        })
    }

    /// The single-term model `(c·P) ⊗ (a†(f) + a(f))`.
    pub fn dipole(statistics: Statistics, c: Vec3, f: FormFactor) -> Self {
        InteractionSpec {
            statistics,
            polarizations: 1,
            couplings: vec![Coupling {
                f: vec![f.clone()],
                g: vec![f],
                symbol: MomentumSymbol::linear(c),
            }],
            sigma: vec![0],
        }
    }

    pub fn nu(&self) -> usize {
        self.couplings.len()
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn polarizations(&self) -> usize {
        self.polarizations
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn f(&self, j: usize, p: usize) -> &FormFactor {
        &self.couplings[j].f[p]
    }

    pub fn g(&self, j: usize, p: usize) -> &FormFactor {
        &self.couplings[j].g[p]
    }

    pub fn symbol(&self, j: usize) -> &MomentumSymbol {
        &self.couplings[j].symbol
    }

    /// Largest `|k|` at which any form factor is nonzero.
    pub fn support_radius(&self) -> f64 {
        self.couplings
            .iter()
            .flat_map(|c| c.f.iter().chain(c.g.iter()))
            .map(FormFactor::support_radius)
            .fold(0.0, f64::max)
    }
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<20} {} (max violation {:.3e})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.max_violation
            )?;
        }
        Ok(())
    }
}

pub const PAIRING_SAMPLES: usize = 4096;
pub const PAIRING_TOLERANCE: f64 = 1e-12;

/// Deterministic sample of points inside the supports of the given form
/// factors; bump centers come first.
pub(crate) fn support_samples(ffs: &[&FormFactor], n: usize) -> Vec<Vec3> {
    let balls: Vec<(Vec3, f64)> = ffs
        .iter()
        .flat_map(|f| f.terms().iter().map(|t| (t.center, t.radius)))
        .collect();
    if balls.is_empty() {
        return Vec::new();
    }
    let mut pts: Vec<Vec3> = balls.iter().map(|b| b.0).collect();
    let mut i = 0usize;
    while pts.len() < n {
        let (c, r) = balls[i % balls.len()];
        let u = [halton(i as u64 + 1, 2), halton(i as u64 + 1, 3), halton(i as u64 + 1, 5)];
        let rad = r * u[0].cbrt();
        let ct = 2.0 * u[1] - 1.0;
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let ph = 2.0 * std::f64::consts::PI * u[2];
        pts.push([c[0] + rad * st * ph.cos(), c[1] + rad * st * ph.sin(), c[2] + rad * ct]);
        i += 1;
    }
    pts
}

/// Checks the structural conditions on an interaction: `σ` is an involution,
/// `F_j† = F_{σ(j)}` (i.e. `f_{σ(j)p} = g_{jp}`), and `Q_j† = Q_{σ(j)}`, which
/// for real symbols means `q_{σ(j)} = q_j`.
pub fn validate_interaction(spec: &InteractionSpec) -> ValidationReport {
    let nu = spec.nu();
    let sigma = spec.sigma();
    let bad = (0..nu).filter(|&j| sigma[sigma[j]] != j).count();
    let mut checks = vec![CheckOutcome {
        name: "sigma-involution",
        passed: bad == 0,
        max_violation: bad as f64,
    }];

    let mut pair_violation = 0.0f64;
    let mut symbol_violation = 0.0f64;
    for j in 0..nu {
        let sj = sigma[j];
        for p in 0..spec.polarizations() {
            let fs = spec.f(sj, p);
            let g = spec.g(j, p);
            for k in support_samples(&[fs, g], PAIRING_SAMPLES) {
                pair_violation = pair_violation.max((fs.eval(&k) - g.eval(&k)).norm());
            }
        }
        let mut pts = support_samples(&[spec.f(j, 0), spec.g(j, 0)], 256);
        pts.push([1.0, 0.0, 0.0]);
        pts.push([0.0, 1.0, 0.0]);
        pts.push([0.0, 0.0, 1.0]);
        for k in pts {
            let a = spec.symbol(sj).eval(&k);
            let b = spec.symbol(j).eval(&k);
            symbol_violation = symbol_violation.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    checks.push(CheckOutcome {
        name: "adjoint-pairing",
        passed: pair_violation <= PAIRING_TOLERANCE,
        max_violation: pair_violation,
    });
    checks.push(CheckOutcome {
        name: "symbol-pairing",
        passed: symbol_violation <= PAIRING_TOLERANCE,
        max_violation: symbol_violation,
    });
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn bump_values() {
        let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, c(1.0));
        assert_eq!(f.eval(&[5.0, 0.0, 0.0]), c(0.0));
        assert!((f.eval(&[2.0, 0.0, 0.0]).re - (-1.0f64).exp()).abs() < 1e-15);
        // exp(-1/0.75) = exp(-4/3)
        assert!((f.eval(&[2.5, 0.0, 0.0]).re - 0.263_597_138_115_727_7).abs() < 1e-12);
        assert_eq!(f.eval(&[3.0, 0.0, 0.0]), c(0.0));
        assert_eq!(f.support_radius(), 3.0);
        assert_eq!(f.radial_support(), Some((1.0, 3.0)));
    }

    #[test]
    fn occupation_examples() {
        let fermi = OccupationDensity::fermi(1.0, 0.0).unwrap();
        assert_eq!(fermi.occupation(0.0), 0.5);
        let mw = OccupationDensity::maxwell(2.0, 0.0).unwrap();
        assert!((mw.occupation(1.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
        let bose = OccupationDensity::bose(1.0, -1.0).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((bose.occupation(0.0) - e1 / (1.0 - e1)).abs() < 1e-14);
        assert!((bose.occupation(0.0) - 0.581_976_706_869_326_4).abs() < 1e-12);
    }

    #[test]
    fn bose_requires_subunit_fugacity() {
        assert!(matches!(OccupationDensity::bose(1.0, 0.0), Err(WclError::Config(_))));
        assert!(matches!(OccupationDensity::bose(2.0, 0.5), Err(WclError::Config(_))));
        let err = OccupationDensity::bose(1.0, 0.1).unwrap_err().to_string();
        assert!(err.contains("fugacity"));
    }

    #[test]
    fn deep_vacuum_fermi_is_zero() {
        let rho = OccupationDensity::fermi(1.0, -1e6).unwrap();
        assert_eq!(rho.occupation(0.0), 0.0);
    }

    #[test]
    fn occupations_are_rapidly_decreasing() {
        let dens = [
            OccupationDensity::fermi(1.0, 0.5).unwrap(),
            OccupationDensity::bose(1.0, -0.2).unwrap(),
            OccupationDensity::maxwell(0.7, 0.3).unwrap(),
        ];
        for d in dens {
            let tail = d.occupation(100.0) * 101f64.powi(8);
            assert!(tail < 1e-10, "{d:?} tail {tail}");
        }
        let f = OccupationDensity::fermi(2.0, 1.0).unwrap();
        let mut prev = f.occupation(0.0);
        for i in 1..1000 {
            let v = f.occupation(i as f64 * 0.1);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn validate_single_real_bump() {
        let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, c(1.0));
        let spec = InteractionSpec::dipole(Statistics::Fermi, [1.0, 0.0, 0.0], f);
        let rep = validate_interaction(&spec);
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn validate_dipole_model() {
        let f = FormFactor::bump([0.0, 0.0, 0.0], 1.5, c(1.0));
        let spec = InteractionSpec::dipole(Statistics::Fermi, [4.0, -4.0, 0.0], f);
        assert!(validate_interaction(&spec).passed());
    }

    #[test]
    fn validate_detects_amplitude_mismatch() {
        let bump = |a: f64| FormFactor::bump([2.0, 0.0, 0.0], 1.0, c(a));
        let sym = MomentumSymbol::linear([1.0, 0.0, 0.0]);
        let couplings = vec![
            Coupling { f: vec![bump(1.0)], g: vec![bump(1.0)], symbol: sym.clone() },
            Coupling { f: vec![bump(1.0)], g: vec![bump(2.0)], symbol: sym },
        ];
        let spec = InteractionSpec::new(Statistics::Fermi, 1, couplings, vec![1, 0]).unwrap();
        let rep = validate_interaction(&spec);
        assert!(!rep.passed());
        let v = rep.check("adjoint-pairing").unwrap().max_violation;
        // |1 - 2| times the bump maximum exp(-1), attained at the center sample
        assert!((v - (-1.0f64).exp()).abs() < 1e-12, "{v}");
        assert!(rep.check("sigma-involution").unwrap().passed);
    }

    #[test]
    fn validate_detects_non_involution() {
        let f = FormFactor::bump([2.0, 0.0, 0.0], 1.0, c(1.0));
        let sym = MomentumSymbol::linear([1.0, 0.0, 0.0]);
        let cp = Coupling { f: vec![f.clone()], g: vec![f], symbol: sym };
        let spec =
            InteractionSpec::new(Statistics::Fermi, 1, vec![cp.clone(), cp.clone(), cp], vec![1, 2, 0]).unwrap();
        let rep = validate_interaction(&spec);
        assert!(!rep.check("sigma-involution").unwrap().passed);
    }

    #[test]
    fn symbol_eval() {
        let s = MomentumSymbol::linear([1.0, 2.0, 3.0]);
        assert_eq!(s.eval(&[1.0, 1.0, 1.0]), 6.0);
        assert_eq!(s.as_linear(), Some([1.0, 2.0, 3.0]));
        let sq = MomentumSymbol { monomials: vec![(1.0, [2, 0, 0])] };
        assert_eq!(sq.eval(&[3.0, 0.0, 0.0]), 9.0);
        assert_eq!(sq.as_linear(), None);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn zero_outside_support(
            cx in -3.0..3.0f64, cy in -3.0..3.0f64, cz in -3.0..3.0f64,
            r in 0.1..2.0f64, dir in prop::array::uniform3(-1.0..1.0f64), extra in 0.0..5.0f64,
        ) {
            let f = FormFactor::new(vec![
                Bump { center: [cx, cy, cz], radius: r, amplitude: C64::new(0.3, -1.2) },
                Bump { center: [0.5, 0.0, 0.0], radius: 0.7, amplitude: C64::new(1.0, 0.0) },
            ]).unwrap();
            let n = norm3(&dir).max(1e-9);
            let rad = f.support_radius() * (1.0 + 1e-12) + extra + 1e-9;
            let k = [dir[0] / n * rad, dir[1] / n * rad, dir[2] / n * rad];
            prop_assert_eq!(f.eval(&k), C64::new(0.0, 0.0));
        }
    }
}
