//! Lamb-shift coefficients `α_ij` from the frequency-domain formulas, the
//! derived half-line integrals `a = iα`, `b_ij = -a_ji`, and the modified
//! one-particle symbol `ω̃(k) = |k|^q - λ² Σ α_ij q_i(k) q_j(k)`.

use rayon::prelude::*;

use crate::correlations::{angular_product, product_radial_support, AngularRule, Reservoir, Weight};
use crate::error::{Result, WclError};
use crate::model::{Dispersion, FormFactor, InteractionSpec, MomentumSymbol, Statistics};
use crate::quadrature::{self, lowdisc::halton, Tolerance};
use crate::{Vec3, C64};

/// Residual above which an assembled matrix is flagged as non-Hermitian.
pub const HERMITICITY_FLAG: f64 = 1e-6;

/// Value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

/// `∫ w(|k|^q) f conj(g) |k|^{-q} d³k = ∫ A(r) w(r^q) r^{2-q} dr`.
///
/// The radial integrand is smooth even when the support touches the origin:
/// `A` is even in `r`, and `r^{2-q}` is `1` or `r`.
fn inverse_energy_moment(f: &FormFactor, g: &FormFactor, res: &Reservoir, w: Weight) -> Result<Estimate> {
    let Some((lo, hi)) = product_radial_support(f, g) else {
        return Ok(Estimate { value: C64::new(0.0, 0.0), error: 0.0 });
    };
    let q = res.disp.exponent() as i32;
    let rule = AngularRule::default();
    let breaks: Vec<f64> = (0..=8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
    let r = quadrature::adaptive(
        |r| {
            let e = res.disp.energy_of_radius(r);
            angular_product(f, g, r, rule) * (res.weight(w, e) * r.powi(2 - q))
        },
        &breaks,
        Tolerance::new(1e-15, 1e-12),
    );
    if !r.converged {
        return Err(WclError::NonConvergence {
            what: "inverse-energy moment".into(),
            achieved: r.error,
            requested: 1e-12 * r.value.norm(),
        });
    }
    Ok(Estimate { value: r.value, error: r.error })
}

fn alpha_entry(spec: &InteractionSpec, res: &Reservoir, i: usize, j: usize) -> Result<Estimate> {
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    for p in 0..spec.polarizations() {
        let occ = inverse_energy_moment(spec.f(i, p), spec.g(j, p), res, Weight::Occupied)?;
        let hole = inverse_energy_moment(spec.f(j, p), spec.g(i, p), res, Weight::Hole)?;
        value += hole.value - occ.value;
        error += occ.error + hole.error;
    }
    Ok(Estimate { value, error })
}

/// `α_ij = -Σ_p ∫ [f_ip conj(g_jp) ρ + f_jp conj(g_ip)(ρ - 1)] / |k|^q d³k`.
pub fn alpha_fermi(spec: &InteractionSpec, res: &Reservoir, i: usize, j: usize) -> Result<Estimate> {
    if res.statistics != Statistics::Fermi {
        return Err(WclError::Config("alpha_fermi needs a Fermi reservoir".into()));
    }
    alpha_entry(spec, res, i, j)
}

/// `α_ij = Σ_p ∫ [-f_ip conj(g_jp) ρ + f_jp conj(g_ip)(1 + ρ)] / |k|^q d³k`.
pub fn alpha_bose(spec: &InteractionSpec, res: &Reservoir, i: usize, j: usize) -> Result<Estimate> {
    if res.statistics != Statistics::Bose {
        return Err(WclError::Config("alpha_bose needs a Bose reservoir".into()));
    }
    alpha_entry(spec, res, i, j)
}

/// `ν × ν` Lamb-shift coefficients with the derived `a`, `b` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatrix {
    pub statistics: Statistics,
    pub alpha: Vec<Vec<C64>>,
    pub a: Vec<Vec<C64>>,
    pub b: Vec<Vec<C64>>,
    /// Largest quadrature error estimate among the entries.
    pub error: f64,
    sigma: Vec<usize>,
}

impl AlphaMatrix {
    /// Builds `a = iα` and `b_ij = -a_ji` from given coefficients.
    pub fn from_alpha(statistics: Statistics, alpha: Vec<Vec<C64>>, sigma: Vec<usize>, error: f64) -> Self {
        let nu = alpha.len();
        let i = C64::new(0.0, 1.0);
        let a: Vec<Vec<C64>> = alpha.iter().map(|row| row.iter().map(|x| i * x).collect()).collect();
        let b = (0..nu).map(|r| (0..nu).map(|c| -a[c][r]).collect()).collect();
        AlphaMatrix { statistics, alpha, a, b, error, sigma }
    }

    pub fn nu(&self) -> usize {
        self.alpha.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// `|α_{σ(j)σ(i)} - conj(α_ij)|`.
    pub fn hermiticity_residual(&self, i: usize, j: usize) -> f64 {
        let s = &self.sigma;
        (self.alpha[s[j]][s[i]] - self.alpha[i][j].conj()).norm()
    }

    pub fn max_hermiticity_residual(&self) -> f64 {
        let nu = self.nu();
        (0..nu)
            .flat_map(|i| (0..nu).map(move |j| (i, j)))
            .map(|(i, j)| self.hermiticity_residual(i, j))
            .fold(0.0, f64::max)
    }

    /// Warning text when the Hermiticity relation is violated.
    pub fn warning(&self) -> Option<String> {
        let r = self.max_hermiticity_residual();
        (r > HERMITICITY_FLAG).then(|| format!("alpha matrix violates the Hermiticity relation by {r:.3e}"))
    }
}

/// Full matrix from the frequency-domain formulas.
pub fn assemble_alpha(spec: &InteractionSpec, res: &Reservoir) -> Result<AlphaMatrix> {
    if spec.statistics() != res.statistics {
        return Err(WclError::Config("interaction and reservoir statistics differ".into()));
    }
    let nu = spec.nu();
    let entries: Vec<Result<Estimate>> = (0..nu * nu)
        .into_par_iter()
        .map(|k| alpha_entry(spec, res, k / nu, k % nu))
        .collect();
    let mut alpha = vec![vec![C64::new(0.0, 0.0); nu]; nu];
    let mut error: f64 = 0.0;
    for (k, e) in entries.into_iter().enumerate() {
        let e = e?;
        alpha[k / nu][k % nu] = e.value;
        error = error.max(e.error);
    }
    Ok(AlphaMatrix::from_alpha(res.statistics, alpha, spec.sigma().to_vec(), error))
}

/// The modified one-particle symbol `ω̃(k) = |k|^q - λ² Σ α_ij q_i(k) q_j(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSymbol {
    pub disp: Dispersion,
    pub lambda: f64,
    pub symbols: Vec<MomentumSymbol>,
    pub alpha: Vec<Vec<C64>>,
}

impl HamiltonianSymbol {
    /// Single-term dipole symbol `|k|² - λ² α (c·k)²`.
    pub fn dipole(alpha: f64, c: Vec3, lambda: f64) -> Self {
        HamiltonianSymbol {
            disp: Dispersion::Massive,
            lambda,
            symbols: vec![MomentumSymbol::linear(c)],
            alpha: vec![vec![C64::new(alpha, 0.0)]],
        }
    }

    pub fn eval(&self, k: &Vec3) -> C64 {
        let qs: Vec<f64> = self.symbols.iter().map(|s| s.eval(k)).collect();
        let mut shift = C64::new(0.0, 0.0);
        for (i, row) in self.alpha.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                shift += a * (qs[i] * qs[j]);
            }
        }
        C64::new(self.disp.energy(k), 0.0) - shift * (self.lambda * self.lambda)
    }

    /// `max |Im ω̃(k)| / (1 + |ω̃(k)|)` over `n` deterministic points in the
    /// cube `[-extent, extent]³`.
    pub fn realness_residual(&self, n: usize, extent: f64) -> f64 {
        (1..=n as u64)
            .map(|i| {
                let k = [
                    extent * (2.0 * halton(i, 2) - 1.0),
                    extent * (2.0 * halton(i, 3) - 1.0),
                    extent * (2.0 * halton(i, 5) - 1.0),
                ];
                let w = self.eval(&k);
                w.im.abs() / (1.0 + w.norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Tolerance on `|Im ω̃| / (1 + |ω̃|)`.
pub const REALNESS_TOLERANCE: f64 = 1e-8;

/// Builds `ω̃` and verifies it is real on a 1000-point sample.
pub fn hamiltonian_symbol(spec: &InteractionSpec, alpha: &AlphaMatrix, lambda: f64, disp: Dispersion) -> Result<HamiltonianSymbol> {
    let sym = HamiltonianSymbol {
        disp,
        lambda,
        symbols: spec.couplings().iter().map(|c| c.symbol.clone()).collect(),
        alpha: alpha.alpha.clone(),
    };
    let r = sym.realness_residual(1000, spec.support_radius().max(1.0));
    if r > REALNESS_TOLERANCE {
        return Err(WclError::ComplexSymbol(r));
    }
    Ok(sym)
}
