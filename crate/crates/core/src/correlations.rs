//! Reservoir two-point functions, their decay envelopes and half-line time
//! integrals.
//!
//! A contraction `∫ w(|k|^q) f(k) conj(g(k)) e^{iτ|k|^q} d³k` is reduced to a
//! one-dimensional integral over the energy `E = |k|^q` of a τ-independent
//! radial profile `h(E)`, which is stored as piecewise Legendre series so that
//! every lag is integrated exactly against the oscillating factor.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{arg_err, Result, WclError};
use crate::model::{norm3, Bump, Dispersion, FormFactor, InteractionSpec, OccupationDensity, Statistics};
use crate::quadrature::{self, gl16, GlRule, LegendrePanel, Tolerance};
use crate::{Vec3, C64};

/// Reservoir data: statistics, occupation density and dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reservoir {
    pub statistics: Statistics,
    pub rho: OccupationDensity,
    pub disp: Dispersion,
}

impl Reservoir {
    pub fn new(statistics: Statistics, rho: OccupationDensity, disp: Dispersion) -> Self {
        Reservoir { statistics, rho, disp }
    }

    /// Weight of the contraction: `ρ(e)` or `1 ∓ ρ(e)`.
    #[inline]
    pub fn weight(&self, w: Weight, e: f64) -> f64 {
        match w {
            Weight::Occupied => self.rho.occupation(e),
            Weight::Hole => 1.0 + self.statistics.hole_sign() * self.rho.occupation(e),
        }
    }
}

/// Which occupation factor enters a contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    /// `ω(a†(f) a(g))`-type: weight `ρ`.
    Occupied,
    /// `ω(a(g) a†(f))`-type: weight `1 - ρ` (Fermi) or `1 + ρ` (Bose).
    Hole,
}

/// Product rule on the unit sphere: composite Gauss–Legendre in the polar
/// angle (restricted to the caps where the bumps live), trapezoid in azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularRule {
    pub theta_panels: usize,
    pub phi_points: usize,
}

impl Default for AngularRule {
    fn default() -> Self {
        AngularRule { theta_panels: 6, phi_points: 64 }
    }
}

impl AngularRule {
    pub fn refined(self) -> Self {
        AngularRule { theta_panels: 2 * self.theta_panels, phi_points: 2 * self.phi_points }
    }
}

struct Frame {
    axis: Vec3,
    e1: Vec3,
    e2: Vec3,
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn frame_along(dir: Option<Vec3>) -> Frame {
    let axis = dir
        .map(|c| {
            let n = norm3(&c);
            [c[0] / n, c[1] / n, c[2] / n]
        })
        .unwrap_or([0.0, 0.0, 1.0]);
    let trial = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross(&axis, &trial);
    let n1 = norm3(&e1);
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = cross(&axis, &e1);
    Frame { axis, e1, e2 }
}

fn on_axis(t: &Bump, frame: &Frame) -> bool {
    let d = norm3(&t.center);
    d <= 1e-14 || norm3(&cross(&t.center, &frame.axis)) <= 1e-12 * d
}

/// Polar-angle intervals on the sphere of radius `r` that meet the ball of
/// a bump centred on the frame axis.
fn polar_cap(t: &Bump, frame: &Frame, r: f64) -> Vec<(f64, f64)> {
    let pi = std::f64::consts::PI;
    let d = norm3(&t.center);
    if d <= 1e-14 {
        return if r < t.radius { vec![(0.0, pi)] } else { Vec::new() };
    }
    let kappa = (r * r + d * d - t.radius * t.radius) / (2.0 * r * d);
    if kappa >= 1.0 {
        return Vec::new();
    }
    let psi = if kappa <= -1.0 { pi } else { kappa.acos() };
    if dot(&t.center, &frame.axis) > 0.0 {
        vec![(0.0, psi)]
    } else {
        vec![(pi - psi, pi)]
    }
}

fn intersect_intervals(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in x {
        for &(c, d) in y {
            let lo = a.max(c);
            let hi = b.min(d);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// `∫_{S²} f(rω) conj(g(rω)) dΩ`, summed over pairs of bump terms. Each pair
/// is integrated in a frame aligned with the first bump, so the polar range
/// is that bump's cap and the azimuthal integral is trivial whenever the
/// second bump is collinear.
pub fn angular_product(f: &FormFactor, g: &FormFactor, r: f64, rule: AngularRule) -> C64 {
    if r <= 0.0 {
        let z = [0.0; 3];
        return f.eval(&z) * g.eval(&z).conj() * (4.0 * std::f64::consts::PI);
    }
    let mut total = C64::new(0.0, 0.0);
    for ta in f.terms() {
        for tb in g.terms() {
            total += pair_angular(ta, tb, r, rule);
        }
    }
    total
}

fn pair_angular(ta: &Bump, tb: &Bump, r: f64, rule: AngularRule) -> C64 {
    let zero = C64::new(0.0, 0.0);
    if r <= (norm3(&ta.center) - ta.radius) || r >= norm3(&ta.center) + ta.radius {
        return zero;
    }
    if r <= (norm3(&tb.center) - tb.radius) || r >= norm3(&tb.center) + tb.radius {
        return zero;
    }
    let dir = [ta.center, tb.center].into_iter().find(|c| norm3(c) > 1e-14);
    let frame = frame_along(dir);
    let mut caps = polar_cap(ta, &frame, r);
    let collinear = on_axis(tb, &frame);
    if collinear {
        caps = intersect_intervals(&caps, &polar_cap(tb, &frame, r));
    }
    if caps.is_empty() {
        return zero;
    }
    let rule16 = gl16();
    let nphi = if collinear { 1 } else { rule.phi_points };
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    let trig: Vec<(f64, f64)> = (0..nphi).map(|m| ((m as f64 * dphi).cos(), (m as f64 * dphi).sin())).collect();
    let mut total = zero;
    for (lo, hi) in caps {
        let width = (hi - lo) / rule.theta_panels as f64;
        for p in 0..rule.theta_panels {
            let a = lo + p as f64 * width;
            total += rule16.integrate(a, a + width, |theta| {
                let (st, ct) = theta.sin_cos();
                let mut s = zero;
                for &(cp, sp) in &trig {
                    let k = [
                        r * (st * (cp * frame.e1[0] + sp * frame.e2[0]) + ct * frame.axis[0]),
                        r * (st * (cp * frame.e1[1] + sp * frame.e2[1]) + ct * frame.axis[1]),
                        r * (st * (cp * frame.e1[2] + sp * frame.e2[2]) + ct * frame.axis[2]),
                    ];
                    let fv = ta.eval(&k);
                    if fv.re != 0.0 || fv.im != 0.0 {
                        s += fv * tb.eval(&k).conj();
                    }
                }
                s * (st * dphi)
            });
        }
    }
    total
}

/// Radial support `[lo, hi]` of the product `f · conj(g)`, if nonempty.
pub fn product_radial_support(f: &FormFactor, g: &FormFactor) -> Option<(f64, f64)> {
    let (a, b) = f.radial_support()?;
    let (c, d) = g.radial_support()?;
    let lo = a.max(c);
    let hi = b.min(d);
    (hi > lo).then_some((lo, hi))
}

/// Accuracy controls of the radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Gauss–Legendre nodes (polynomial degree + 1) per energy panel.
    pub order: usize,
    pub initial_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub angular: AngularRule,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            order: 24,
            initial_panels: 8,
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_panels: 4000,
            angular: AngularRule::default(),
        }
    }
}

impl ProfileOptions {
    /// Same rule with every step size halved.
    pub fn refined(self) -> Self {
        ProfileOptions {
            initial_panels: 2 * self.initial_panels,
            angular: self.angular.refined(),
            ..self
        }
    }
}

/// The τ-independent energy profile `h(E)` of one contraction, such that the
/// contraction at lag `τ` equals `∫ h(E) e^{iτE} dE`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    panels: Vec<LegendrePanel>,
    energy_panels: Vec<LegendrePanel>,
    error: f64,
    max_energy: f64,
}

impl RadialProfile {
    pub fn zero() -> Self {
        RadialProfile { panels: Vec::new(), energy_panels: Vec::new(), error: 0.0, max_energy: 0.0 }
    }

    pub fn build(f: &FormFactor, g: &FormFactor, res: &Reservoir, weight: Weight, opts: &ProfileOptions) -> Result<Self> {
        let Some((r_lo, r_hi)) = product_radial_support(f, g) else {
            return Ok(RadialProfile::zero());
        };
        let disp = res.disp;
        let e_lo = disp.energy_of_radius(r_lo);
        let e_hi = disp.energy_of_radius(r_hi);
        let q = disp.exponent() as i32;
        let h = |e: f64| -> C64 {
            let r = disp.radius_of_energy(e);
            let w = res.weight(weight, e);
            if w == 0.0 {
                return C64::new(0.0, 0.0);
            }
            angular_product(f, g, r, opts.angular) * (w * r.powi(3 - q) / q as f64)
        };
        let rule = GlRule::new(opts.order);
        let make = |a: f64, b: f64| {
            let samples: Vec<C64> = rule.nodes.iter().map(|x| h(0.5 * (a + b) + 0.5 * (b - a) * x)).collect();
            LegendrePanel::from_samples(a, b, &rule, &samples)
        };

        let mut edges: Vec<f64> = (0..=opts.initial_panels)
            .map(|i| e_lo + (e_hi - e_lo) * i as f64 / opts.initial_panels as f64)
            .collect();
        if e_lo == 0.0 && disp == Dispersion::Massive {
            // the √E volume factor is singular at the origin; grade towards it
            let first = edges[1];
            for j in 1..=12 {
                edges.push(first * 0.25f64.powi(j));
            }
            edges.sort_by(f64::total_cmp);
        }
        let mut pending: Vec<LegendrePanel> = edges.windows(2).map(|w| make(w[0], w[1])).collect();
        let mut done: Vec<LegendrePanel> = Vec::new();
        let mass: f64 = pending.iter().map(|p| (p.b - p.a) * p.coef[0].norm()).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * mass);
        let span = e_hi - e_lo;
        while let Some(p) = pending.pop() {
            let allowed = tol * (p.b - p.a) / span;
            if p.tail_error() <= allowed || p.b - p.a < 1e-14 * span.max(1.0) {
                done.push(p);
                continue;
            }
            if done.len() + pending.len() + 2 > opts.max_panels {
                let achieved: f64 = done.iter().chain(pending.iter()).map(LegendrePanel::tail_error).sum();
                return Err(WclError::NonConvergence {
                    what: "radial profile".into(),
                    achieved,
                    requested: tol,
                });
            }
            let m = 0.5 * (p.a + p.b);
            pending.push(make(p.a, m));
            pending.push(make(m, p.b));
        }
        done.sort_by(|x, y| x.a.total_cmp(&y.a));
        let error = done.iter().map(LegendrePanel::tail_error).sum();
        let energy_panels = done.iter().map(LegendrePanel::times_energy).collect();
        Ok(RadialProfile { panels: done, energy_panels, error, max_energy: e_hi })
    }

    pub fn is_zero(&self) -> bool {
        self.panels.is_empty()
    }

    /// Lag-independent bound on the quadrature error of [`Self::eval`].
    pub fn error(&self) -> f64 {
        self.error
    }

    /// Largest energy in the support; sets the fastest oscillation in τ.
    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// `∫ h(E) e^{iτE} dE`.
    pub fn eval(&self, tau: f64) -> C64 {
        let mut scratch = Vec::new();
        self.panels.iter().map(|p| p.fourier(tau, &mut scratch)).sum()
    }

    /// Value and τ-derivative.
    pub fn eval_with_derivative(&self, tau: f64) -> (C64, C64) {
        let mut scratch = Vec::new();
        let v: C64 = self.panels.iter().map(|p| p.fourier(tau, &mut scratch)).sum();
        let d: C64 = self.energy_panels.iter().map(|p| p.fourier(tau, &mut scratch)).sum();
        (v, d * C64::new(0.0, 1.0))
    }
}

/// `ω(a†(e^{iτh}g)… )`-ordered contraction `∫ ρ(|k|^q) f conj(g) e^{iτ|k|^q} d³k`.
pub fn two_point_plus(f: &FormFactor, g: &FormFactor, res: &Reservoir, tau: f64) -> Result<C64> {
    Ok(RadialProfile::build(f, g, res, Weight::Occupied, &ProfileOptions::default())?.eval(tau))
}

/// `∫ (1 ∓ ρ(|k|^q)) f conj(g) e^{iτ|k|^q} d³k` (`-` Fermi, `+` Bose).
pub fn two_point_minus(f: &FormFactor, g: &FormFactor, res: &Reservoir, tau: f64) -> Result<C64> {
    Ok(RadialProfile::build(f, g, res, Weight::Hole, &ProfileOptions::default())?.eval(tau))
}

/// Exact evaluator of the kernel `K_ij(s) = ω(F_i(s) F_j)` for all index
/// pairs, assembled from radial profiles.
///
/// With `F_j(τ) = Σ_p a†_p(e^{-iτh} f_jp) + a_p(e^{-iτh} g_jp)`,
/// `K_ij(s) = Σ_p P(f_ip, g_jp; -s) + M(f_jp, g_ip; s)` where `P`, `M` are the
/// occupied and hole contractions.
#[derive(Debug, Clone)]
pub struct KernelSource {
    nu: usize,
    occupied: Vec<Vec<Vec<Arc<RadialProfile>>>>,
    hole: Vec<Vec<Vec<Arc<RadialProfile>>>>,
    error: f64,
    max_energy: f64,
}

impl KernelSource {
    pub fn new(spec: &InteractionSpec, res: &Reservoir, opts: &ProfileOptions) -> Result<Self> {
        let nu = spec.nu();
        let np = spec.polarizations();
        let mut cache: HashMap<(usize, usize, usize, bool), Arc<RadialProfile>> = HashMap::new();
        let mut get = |a: usize, b: usize, p: usize, occ: bool| -> Result<Arc<RadialProfile>> {
            if let Some(v) = cache.get(&(a, b, p, occ)) {
                return Ok(v.clone());
            }
            // occupied: P(f_ap, g_bp); hole: M(f_ap, g_bp)
            let w = if occ { Weight::Occupied } else { Weight::Hole };
            let prof = Arc::new(RadialProfile::build(spec.f(a, p), spec.g(b, p), res, w, opts)?);
            cache.insert((a, b, p, occ), prof.clone());
            Ok(prof)
        };
        let mut occupied = vec![vec![Vec::new(); nu]; nu];
        let mut hole = vec![vec![Vec::new(); nu]; nu];
        for i in 0..nu {
            for j in 0..nu {
                for p in 0..np {
                    occupied[i][j].push(get(i, j, p, true)?);
                    hole[i][j].push(get(j, i, p, false)?);
                }
            }
        }
        let all: Vec<&Arc<RadialProfile>> = occupied.iter().chain(hole.iter()).flatten().flatten().collect();
        let max_energy = all.iter().map(|p| p.max_energy()).fold(0.0, f64::max);
        let mut error: f64 = 0.0;
        for i in 0..nu {
            for j in 0..nu {
                let e: f64 = occupied[i][j].iter().chain(&hole[i][j]).map(|p| p.error()).sum();
                error = error.max(e);
            }
        }
        Ok(KernelSource { nu, occupied, hole, error, max_energy })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Lag-uniform quadrature error bound of [`Self::kernel`].
    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    pub fn is_zero(&self) -> bool {
        self.occupied.iter().chain(self.hole.iter()).flatten().flatten().all(|p| p.is_zero())
    }

    /// `K_ij(s) = ω(F_i(s) F_j)` for any real `s`.
    pub fn kernel(&self, i: usize, j: usize, s: f64) -> C64 {
        let a: C64 = self.occupied[i][j].iter().map(|p| p.eval(-s)).sum();
        let b: C64 = self.hole[i][j].iter().map(|p| p.eval(s)).sum();
        a + b
    }

    /// `K_ij(s)` and `dK_ij/ds`.
    pub fn kernel_with_derivative(&self, i: usize, j: usize, s: f64) -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for p in &self.occupied[i][j] {
            let (pv, pd) = p.eval_with_derivative(-s);
            v += pv;
            d -= pd;
        }
        for p in &self.hole[i][j] {
            let (pv, pd) = p.eval_with_derivative(s);
            v += pv;
            d += pd;
        }
        (v, d)
    }

    /// `c⁺_ij(τ) = ω(F_i(τ) F_j)`.
    pub fn c_plus(&self, i: usize, j: usize, tau: f64) -> C64 {
        self.kernel(i, j, tau)
    }

    /// `c⁻_ij(τ) = ω(F_j F_i(τ)) = K_ji(-τ)`.
    pub fn c_minus(&self, i: usize, j: usize, tau: f64) -> C64 {
        self.kernel(j, i, -tau)
    }
}

/// Sampled lower bound for the constant `C` in `|c(τ)| ≤ C (1+|τ|)^{-3/2}`:
/// the supremum of `|c(τ)| (1+τ)^{3/2}` over `n_samples` nested lags in
/// `[0, tau_max]` (a van der Corput sequence starting at 0), all index pairs,
/// both orderings. Adding samples can only increase the estimate.
pub fn estimate_decay_constant(src: &KernelSource, tau_max: f64, n_samples: usize) -> Result<f64> {
    if !(tau_max > 0.0) {
        return arg_err("tau_max must be positive");
    }
    let nu = src.nu();
    let vals: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let tau = tau_max * quadrature::lowdisc::halton(k as u64, 2);
            let env = (1.0 + tau).powf(1.5);
            let mut m: f64 = 0.0;
            for i in 0..nu {
                for j in 0..nu {
                    m = m.max(src.c_plus(i, j, tau).norm() * env);
                    m = m.max(src.c_minus(i, j, tau).norm() * env);
                }
            }
            m
        })
        .collect();
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Tabulated kernel on a uniform lag grid with cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct CorrelationKernel {
    source: Arc<KernelSource>,
    step: f64,
    tau_grid: Vec<f64>,
    // [i][j][n] → (value, derivative)
    plus: Vec<Vec<Vec<(C64, C64)>>>,
    minus: Vec<Vec<Vec<(C64, C64)>>>,
    decay_constant: f64,
    interpolation_error: f64,
}

/// Default grid density: steps per radian of the fastest oscillation.
pub const DEFAULT_STEP_FACTOR: f64 = 0.05;

impl CorrelationKernel {
    /// Tabulates `c⁺` and `c⁻` on `[0, tau_max]` with step
    /// `step_factor / E_max`.
    pub fn tabulate(source: Arc<KernelSource>, tau_max: f64, step_factor: f64) -> Result<Self> {
        if !(tau_max > 0.0) {
            return arg_err("tau_max must be positive");
        }
        let emax = source.max_energy().max(1e-3);
        let n = ((tau_max * emax / step_factor).ceil() as usize).max(16);
        let step = tau_max / n as f64;
        let nu = source.nu();
        let tau_grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        let rows: Vec<Vec<((C64, C64), (C64, C64))>> = tau_grid
            .par_iter()
            .map(|&tau| {
                let mut row = Vec::with_capacity(nu * nu);
                for i in 0..nu {
                    for j in 0..nu {
                        let p = source.kernel_with_derivative(i, j, tau);
                        let (mv, md) = source.kernel_with_derivative(j, i, -tau);
                        row.push((p, (mv, -md)));
                    }
                }
                row
            })
            .collect();
        let mut plus = vec![vec![Vec::with_capacity(n + 1); nu]; nu];
        let mut minus = vec![vec![Vec::with_capacity(n + 1); nu]; nu];
        for row in &rows {
            for i in 0..nu {
                for j in 0..nu {
                    let (p, m) = row[i * nu + j];
                    plus[i][j].push(p);
                    minus[i][j].push(m);
                }
            }
        }
        let decay_constant = tau_grid
            .iter()
            .enumerate()
            .map(|(k, tau)| {
                let env = (1.0 + tau).powf(1.5);
                let mut m: f64 = 0.0;
                for i in 0..nu {
                    for j in 0..nu {
                        m = m.max(plus[i][j][k].0.norm() * env).max(minus[i][j][k].0.norm() * env);
                    }
                }
                m
            })
            .fold(0.0, f64::max);
        let mut kernel = CorrelationKernel {
            source,
            step,
            tau_grid,
            plus,
            minus,
            decay_constant,
            interpolation_error: 0.0,
        };
        kernel.interpolation_error = kernel.measure_interpolation_error();
        Ok(kernel)
    }

    fn measure_interpolation_error(&self) -> f64 {
        let n = self.tau_grid.len() - 1;
        let stride = (n / 257).max(1);
        let nu = self.source.nu();
        let errs: Vec<f64> = (0..n)
            .step_by(stride)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&k| {
                let mut e: f64 = 0.0;
                for frac in [0.5, 0.2113] {
                    let tau = (k as f64 + frac) * self.step;
                    for i in 0..nu {
                        for j in 0..nu {
                            e = e.max((self.c_plus(i, j, tau) - self.source.c_plus(i, j, tau)).norm());
                            e = e.max((self.c_minus(i, j, tau) - self.source.c_minus(i, j, tau)).norm());
                        }
                    }
                }
                e
            })
            .collect();
        errs.into_iter().fold(0.0, f64::max)
    }

    pub fn source(&self) -> &Arc<KernelSource> {
        &self.source
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau_grid.last().unwrap()
    }

    pub fn decay_constant(&self) -> f64 {
        self.decay_constant
    }

    /// Measured interpolation error plus the quadrature error of the samples.
    pub fn error(&self) -> f64 {
        self.interpolation_error + self.source.error()
    }

    pub fn interpolation_error(&self) -> f64 {
        self.interpolation_error
    }

    /// Tabulated `c⁺_ij` at grid index `n`.
    pub fn plus_sample(&self, i: usize, j: usize, n: usize) -> C64 {
        self.plus[i][j][n].0
    }

    pub fn minus_sample(&self, i: usize, j: usize, n: usize) -> C64 {
        self.minus[i][j][n].0
    }

    #[inline]
    fn interp(table: &[(C64, C64)], step: f64, tau: f64) -> C64 {
        let x = tau / step;
        let k = (x.floor() as usize).min(table.len() - 2);
        let u = x - k as f64;
        let (y0, d0) = table[k];
        let (y1, d1) = table[k + 1];
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        y0 * h00 + d0 * (h10 * step) + y1 * h01 + d1 * (h11 * step)
    }

    /// Interpolated `c⁺_ij(τ)` for `τ ≥ 0`; exact evaluation beyond the table.
    #[inline]
    pub fn c_plus(&self, i: usize, j: usize, tau: f64) -> C64 {
        if tau > self.tau_max() {
            return self.source.c_plus(i, j, tau);
        }
        Self::interp(&self.plus[i][j], self.step, tau)
    }

    #[inline]
    pub fn c_minus(&self, i: usize, j: usize, tau: f64) -> C64 {
        if tau > self.tau_max() {
            return self.source.c_minus(i, j, tau);
        }
        Self::interp(&self.minus[i][j], self.step, tau)
    }

    /// `K_ij(s) = ω(F_i(s) F_j)` for signed lag `s`.
    #[inline]
    pub fn kernel(&self, i: usize, j: usize, s: f64) -> C64 {
        if s >= 0.0 {
            self.c_plus(i, j, s)
        } else {
            self.c_minus(j, i, -s)
        }
    }
}

/// Result of a truncated half-line time integral.
#[derive(Debug, Clone, PartialEq)]
pub struct HalflineIntegral {
    pub value: C64,
    pub quadrature_error: f64,
    /// `2 C (1 + t_cut)^{-1/2}` with the sampled decay constant `C`.
    pub tail_bound: f64,
    pub decay_constant: f64,
    pub warning: Option<String>,
}

impl HalflineIntegral {
    pub fn total_error(&self) -> f64 {
        self.quadrature_error + self.tail_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalflineOptions {
    pub t_cut: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// The tail bound may not exceed this fraction of `|value|` (or
    /// `abs_tol`) without raising a warning.
    pub tail_rel_tol: f64,
    pub decay_tau_max: f64,
    pub decay_samples: usize,
}

impl Default for HalflineOptions {
    fn default() -> Self {
        HalflineOptions {
            t_cut: 1e4,
            abs_tol: 1e-10,
            rel_tol: 1e-6,
            tail_rel_tol: 0.05,
            decay_tau_max: 200.0,
            decay_samples: 512,
        }
    }
}

fn halfline<F: Fn(f64) -> C64>(f: F, src: &KernelSource, opts: &HalflineOptions, what: &str) -> Result<HalflineIntegral> {
    if !(opts.t_cut > 0.0) {
        return arg_err("t_cut must be positive");
    }
    if src.is_zero() {
        return Ok(HalflineIntegral {
            value: C64::new(0.0, 0.0),
            quadrature_error: 0.0,
            tail_bound: 0.0,
            decay_constant: 0.0,
            warning: None,
        });
    }
    let breaks = quadrature::halfline_breaks(opts.t_cut, 200.0);
    let r = quadrature::adaptive(&f, &breaks, Tolerance::new(opts.abs_tol, opts.rel_tol));
    let c = estimate_decay_constant(src, opts.decay_tau_max, opts.decay_samples)?;
    let tail_bound = 2.0 * c / (1.0 + opts.t_cut).sqrt();
    let quadrature_error = r.error + src.error() * opts.t_cut;
    let mut warning = None;
    if !r.converged {
        warning = Some(format!("{what}: adaptive quadrature stalled at error {:.3e}", r.error));
    } else if tail_bound > opts.abs_tol.max(opts.tail_rel_tol * r.value.norm()) {
        warning = Some(format!(
            "{what}: tail bound {tail_bound:.3e} exceeds {:.1}% of |value| {:.3e}",
            100.0 * opts.tail_rel_tol,
            r.value.norm()
        ));
    }
    Ok(HalflineIntegral { value: r.value, quadrature_error, tail_bound, decay_constant: c, warning })
}

/// `a_ij = ∫_0^{t_cut} ω(F_i(t) F_j) dt` with tail bound.
pub fn halfline_a(src: &KernelSource, i: usize, j: usize, opts: &HalflineOptions) -> Result<HalflineIntegral> {
    halfline(|t| src.c_plus(i, j, t), src, opts, &format!("a[{i}][{j}]"))
}

/// `b_ij = ∫_0^{t_cut} ω(F_j F_i(t)) dt` with tail bound.
pub fn halfline_b(src: &KernelSource, i: usize, j: usize, opts: &HalflineOptions) -> Result<HalflineIntegral> {
    halfline(|t| src.c_minus(i, j, t), src, opts, &format!("b[{i}][{j}]"))
}

/// Memo table of radial profiles keyed by an arbitrary identifier; safe for
/// concurrent use, values are a pure function of the key.
#[derive(Debug, Default)]
pub struct ProfileCache<K> {
    map: Mutex<HashMap<K, Arc<RadialProfile>>>,
}

impl<K: std::hash::Hash + Eq + Clone> ProfileCache<K> {
    pub fn new() -> Self {
        ProfileCache { map: Mutex::new(HashMap::new()) }
    }

    pub fn get_or_build<F: FnOnce() -> Result<RadialProfile>>(&self, key: K, build: F) -> Result<Arc<RadialProfile>> {
        if let Some(p) = self.map.lock().expect("profile cache poisoned").get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(build()?);
        let mut m = self.map.lock().expect("profile cache poisoned");
        Ok(m.entry(key).or_insert(p).clone())
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("profile cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
