//! Dyson-series bookkeeping and the weak-coupling limit of its terms:
//! the `S′(k)` permutations, the pairing permutation `σ(π)`, simplex
//! integrals `Ω_{γ,π}(λ)`, the limiting values `U(γ,π)`, the `G_{k,p}`
//! integrals and log-log rate fits.
//!
//! Orders count operators: `Ω_{γ,π}` with `π ∈ S′(n)` integrates a product of
//! `n` interaction fields over `t_1 > … > t_n > 0`; even orders `n = 2k` pair
//! them into `k` contractions.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlations::{CorrelationKernel, KernelSource, ProfileOptions, Reservoir, DEFAULT_STEP_FACTOR};
use crate::error::{arg_err, Result, WclError};
use crate::model::{InteractionSpec, Statistics};
use crate::quadrature::{self, lowdisc, Tolerance};
use crate::wick::{enumerate_pairings, pairing_sign, Pairing};
use crate::C64;

/// Largest order accepted by [`sprime`].
pub const MAX_SPRIME_ORDER: usize = 14;
/// Largest order accepted by the QMC simplex integral.
pub const MAX_QMC_ORDER: usize = 6;
/// Largest order accepted by the nested quadrature.
pub const MAX_NESTED_ORDER: usize = 4;

/// Which of the two embeddings built a permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    /// `S₊(π) = (1, π(1)+1, …, π(k)+1)`
    Plus,
    /// `S₋(π) = (π(1)+1, …, π(k)+1, 1)`
    Minus,
}

/// Element of `S′(n)` together with the `±` choices that produced it.
/// `trace[0]` is the outermost (last applied) embedding; `values` is
/// zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SPrimePermutation {
    trace: Vec<Sign>,
    values: Vec<usize>,
}

impl SPrimePermutation {
    /// Rebuilds the permutation from its construction trace.
    pub fn from_trace(trace: Vec<Sign>) -> Self {
        let mut values = vec![0usize];
        for s in trace.iter().rev() {
            let shifted = values.iter().map(|v| v + 1);
            values = match s {
                Sign::Plus => std::iter::once(0).chain(shifted).collect(),
                Sign::Minus => shifted.chain(std::iter::once(0)).collect(),
            };
        }
        SPrimePermutation { trace, values }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn trace(&self) -> &[Sign] {
        &self.trace
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// The permutation `π′` with `π = S_{trace[0]}(S_{trace[1]}(π′))`.
    pub fn inner(&self, depth: usize) -> SPrimePermutation {
        SPrimePermutation::from_trace(self.trace[depth..].to_vec())
    }
}

impl fmt::Display for SPrimePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

/// All `2^{n-1}` elements of `S′(n)` in trace-lexicographic order
/// (`+` before `-`, outermost choice most significant).
pub fn sprime(n: usize) -> Result<Vec<SPrimePermutation>> {
    if !(1..=MAX_SPRIME_ORDER).contains(&n) {
        return arg_err(format!("S'(n) is available for 1 <= n <= {MAX_SPRIME_ORDER}, got {n}"));
    }
    let len = n - 1;
    Ok((0..1usize << len)
        .map(|idx| {
            let trace = (0..len)
                .map(|m| if idx >> (len - 1 - m) & 1 == 0 { Sign::Plus } else { Sign::Minus })
                .collect();
            SPrimePermutation::from_trace(trace)
        })
        .collect())
}

/// Sign of a zero-based permutation by inversion count.
pub fn permutation_sign(p: &[usize]) -> f64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
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

/// `σ(2j-1) = min{π⁻¹(2j-1), π⁻¹(2j)}`, `σ(2j) = max{…}` (zero-based).
pub fn sigma_of_pi(pi: &SPrimePermutation) -> Result<Vec<usize>> {
    let n = pi.order();
    if n % 2 == 1 {
        return arg_err(format!("sigma is defined for even orders only, got {n}"));
    }
    let mut inv = vec![0usize; n];
    for (pos, &v) in pi.values().iter().enumerate() {
        inv[v] = pos;
    }
    let mut sigma = Vec::with_capacity(n);
    for j in 0..n / 2 {
        let (x, y) = (inv[2 * j], inv[2 * j + 1]);
        sigma.push(x.min(y));
        sigma.push(x.max(y));
    }
    Ok(sigma)
}

/// Limiting value `U(γ, π)`: `t·a_ij` for `π = (1,2)`, `t·b_ij` for
/// `π = (2,1)`, and `U = (t c_ij / k) U(γ′, π′)` for `π ∈ S′(2k)` with
/// `c = a` if the outermost embedding is `S₊` and `c = b` otherwise.
/// `γ = (i, j, γ′)` is zero-based.
pub fn u_limit(gamma: &[usize], pi: &SPrimePermutation, t: f64, a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<C64> {
    let n = pi.order();
    if n % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    if gamma.len() != n {
        return arg_err(format!("multi-index has length {} but the permutation has order {n}", gamma.len()));
    }
    let nu = a.len();
    if gamma.iter().any(|&g| g >= nu) {
        return arg_err("multi-index entry out of range");
    }
    let (i, j) = (gamma[0], gamma[1]);
    let pairs = (n / 2) as f64;
    let c = match pi.trace().first() {
        Some(Sign::Plus) => a[i][j],
        Some(Sign::Minus) => b[i][j],
        None => return Err(WclError::Argument("permutation trace too short to classify".into())),
    };
    if n == 2 {
        return Ok(c * t);
    }
    Ok(c * (t / pairs) * u_limit(&gamma[2..], &pi.inner(2), t, a, b)?)
}

/// Precomputed ingredients for simplex integrals: the tabulated kernel and
/// the reservoir statistics.
#[derive(Debug, Clone)]
pub struct DysonModel {
    kernel: CorrelationKernel,
    statistics: Statistics,
}

impl DysonModel {
    /// Tabulates the kernel on `[0, tau_max]`; `tau_max` must cover the
    /// largest rescaled time `t/λ²` to be used.
    pub fn new(spec: &InteractionSpec, res: &Reservoir, tau_max: f64) -> Result<Self> {
        let src = Arc::new(KernelSource::new(spec, res, &ProfileOptions::default())?);
        let kernel = CorrelationKernel::tabulate(src, tau_max, DEFAULT_STEP_FACTOR)?;
        Ok(DysonModel { kernel, statistics: res.statistics })
    }

    pub fn from_kernel(kernel: CorrelationKernel, statistics: Statistics) -> Self {
        DysonModel { kernel, statistics }
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
}

/// Point sets mapping the unit cube onto the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Sorted coordinates of `T·u`, weight `T^n / n!`.
    Uniform,
    /// Gap coordinates `t_m - t_{m+1}`: gaps inside the leading pairs drawn
    /// from the density `∝ (1+τ)^{-3/2}`, gaps between pairs from an equal
    /// mixture of that density and the uniform one; points outside the
    /// simplex get weight zero.
    SpacingImportance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcOptions {
    pub points_log2: u32,
    pub replicates: usize,
    pub seed: u64,
    pub sampler: Sampler,
    /// Flag results whose standard error exceeds this fraction of `|Ω|`.
    pub target_rel_stderr: Option<f64>,
}

impl Default for QmcOptions {
    fn default() -> Self {
        QmcOptions { points_log2: 20, replicates: 16, seed: 0, sampler: Sampler::SpacingImportance, target_rel_stderr: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NestedOptions {
    fn default() -> Self {
        NestedOptions { abs_tol: 1e-10, rel_tol: 1e-7, max_evaluations: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaMethod {
    Qmc(QmcOptions),
    Nested(NestedOptions),
    /// One-dimensional formula `∫_0^T (t - λ²τ) c(τ) dτ`, order 2 only.
    SemiAnalytic,
}

/// Contribution of one pairing of positions to `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingContribution {
    pub pairing: Pairing,
    pub value: C64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexIntegralResult {
    pub value: C64,
    /// Standard error (QMC) or quadrature error estimate, including the
    /// kernel interpolation budget.
    pub stderr: f64,
    pub lambda: f64,
    pub t: f64,
    pub order: usize,
    pub contributions: Vec<PairingContribution>,
    pub evaluations: u64,
    pub warning: Option<String>,
}

impl SimplexIntegralResult {
    fn zero(lambda: f64, t: f64, order: usize) -> Self {
        SimplexIntegralResult {
            value: C64::new(0.0, 0.0),
            stderr: 0.0,
            lambda,
            t,
            order,
            contributions: Vec::new(),
            evaluations: 0,
            warning: None,
        }
    }

    pub fn contribution(&self, pairing: &Pairing) -> Option<&PairingContribution> {
        self.contributions.iter().find(|c| &c.pairing == pairing)
    }
}

struct Integrand<'a> {
    kernel: &'a CorrelationKernel,
    /// `(pair positions, signed with statistics)` per pairing.
    pairings: Vec<(Pairing, f64)>,
    /// interaction index at each position
    index: Vec<usize>,
    /// time index at each position
    time_of: Vec<usize>,
}

impl<'a> Integrand<'a> {
    fn new(model: &'a DysonModel, gamma: &[usize], pi: &SPrimePermutation) -> Result<Self> {
        let n = pi.order();
        let pairings = enumerate_pairings(n)?
            .into_iter()
            .map(|p| {
                let s = if model.statistics == Statistics::Fermi { pairing_sign(&p) } else { 1.0 };
                (p, s)
            })
            .collect();
        let index = pi.values().iter().map(|&v| gamma[v]).collect();
        Ok(Integrand { kernel: &model.kernel, pairings, index, time_of: pi.values().to_vec() })
    }

    /// Per-pairing terms of `ω(F_{γ,π}(t_1, …, t_n))`.
    #[inline]
    fn terms(&self, times: &[f64], out: &mut [C64]) {
        for ((p, sign), o) in self.pairings.iter().zip(out.iter_mut()) {
            let mut prod = C64::new(*sign, 0.0);
            for &(x, y) in &p.pairs {
                let s = times[self.time_of[x]] - times[self.time_of[y]];
                prod *= self.kernel.kernel(self.index[x], self.index[y], s);
            }
            *o = prod;
        }
    }

    fn total(&self, times: &[f64], scratch: &mut [C64]) -> C64 {
        self.terms(times, scratch);
        scratch.iter().sum()
    }
}

fn check_args(gamma: &[usize], pi: &SPrimePermutation, lambda: f64, t: f64, nu: usize) -> Result<()> {
    if gamma.len() != pi.order() {
        return arg_err(format!("multi-index has length {} but the permutation has order {}", gamma.len(), pi.order()));
    }
    if gamma.iter().any(|&g| g >= nu) {
        return arg_err("multi-index entry out of range");
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return arg_err(format!("lambda must lie in (0, 1], got {lambda}"));
    }
    if !(t > 0.0) {
        return arg_err(format!("t must be positive, got {t}"));
    }
    Ok(())
}

/// `Ω_{γ,π}(λ) = λ^n ∫_{Δ_n(λ⁻²t)} ω(F_{γ,π}(t_1, …, t_n)) dt`.
///
/// Odd orders return exactly zero without evaluating anything.
pub fn omega_integral(
    model: &DysonModel,
    gamma: &[usize],
    pi: &SPrimePermutation,
    lambda: f64,
    t: f64,
    method: OmegaMethod,
) -> Result<SimplexIntegralResult> {
    check_args(gamma, pi, lambda, t, model.kernel.source().nu())?;
    let n = pi.order();
    if n % 2 == 1 {
        return Ok(SimplexIntegralResult::zero(lambda, t, n));
    }
    let big_t = t / (lambda * lambda);
    if big_t > model.kernel.tau_max() * (1.0 + 1e-12) {
        return arg_err(format!(
            "rescaled time {big_t} exceeds the kernel table range {}",
            model.kernel.tau_max()
        ));
    }
    match method {
        OmegaMethod::Qmc(opts) => qmc(model, gamma, pi, lambda, t, &opts),
        OmegaMethod::Nested(opts) => nested(model, gamma, pi, lambda, t, &opts),
        OmegaMethod::SemiAnalytic => semi_analytic(model, gamma, pi, lambda, t),
    }
}

/// Bound on the effect of kernel interpolation errors on `Ω`.
fn interpolation_budget(model: &DysonModel, n: usize, t: f64, n_pairings: usize) -> f64 {
    let k = n / 2;
    let delta = model.kernel.error();
    let c = model.kernel.decay_constant().max(delta);
    // |Π K - Π K̃| ≤ k δ C^{k-1}; the simplex volume times λ^n is t^n/n!
    let vol: f64 = (1..=n).fold(1.0, |acc, m| acc * t / m as f64);
    n_pairings as f64 * k as f64 * delta * c.powi(k as i32 - 1) * vol
}

/// Inverse CDF of the density `∝ (1+τ)^{-3/2}` on `[0, T]`; returns the
/// sample and its density.
#[inline]
fn decay_sample(u: f64, big_t: f64) -> (f64, f64) {
    let z = 2.0 * (1.0 - 1.0 / (1.0 + big_t).sqrt());
    let s = 1.0 - u * z / 2.0;
    let tau = (1.0 / (s * s) - 1.0).clamp(0.0, big_t);
    (tau, decay_density(tau, big_t))
}

#[inline]
fn decay_density(tau: f64, big_t: f64) -> f64 {
    let z = 2.0 * (1.0 - 1.0 / (1.0 + big_t).sqrt());
    (1.0 + tau).powf(-1.5) / z
}

/// Maps a cube point to simplex times; returns the estimator weight (zero
/// outside the simplex).
#[inline]
fn map_point(sampler: Sampler, u: &[f64], big_t: f64, times: &mut [f64], gaps: &mut [f64], fact: f64) -> f64 {
    let n = u.len();
    match sampler {
        Sampler::Uniform => {
            for (t, x) in times.iter_mut().zip(u) {
                *t = big_t * x;
            }
            times.sort_by(|a, b| b.total_cmp(a));
            big_t.powi(n as i32) / fact
        }
        Sampler::SpacingImportance => {
            let mut w = 1.0;
            let mut sum = 0.0;
            for m in 0..n {
                let (g, dens) = if m % 2 == 0 {
                    decay_sample(u[m], big_t)
                } else if u[m] < 0.5 {
                    let g = 2.0 * u[m] * big_t;
                    (g, 0.5 / big_t + 0.5 * decay_density(g, big_t))
                } else {
                    let (g, _) = decay_sample(2.0 * u[m] - 1.0, big_t);
                    (g, 0.5 / big_t + 0.5 * decay_density(g, big_t))
                };
                gaps[m] = g;
                sum += g;
                w /= dens;
            }
            if sum > big_t {
                return 0.0;
            }
            let mut acc = 0.0;
            for m in (0..n).rev() {
                acc += gaps[m];
                times[m] = acc;
            }
            w
        }
    }
}

fn qmc(
    model: &DysonModel,
    gamma: &[usize],
    pi: &SPrimePermutation,
    lambda: f64,
    t: f64,
    opts: &QmcOptions,
) -> Result<SimplexIntegralResult> {
    let n = pi.order();
    if n > MAX_QMC_ORDER {
        return arg_err(format!("QMC simplex integrals are limited to order {MAX_QMC_ORDER}, got {n}"));
    }
    if opts.replicates < 2 {
        return arg_err("at least two randomized replicates are needed for an error bar");
    }
    let integrand = Integrand::new(model, gamma, pi)?;
    let np = integrand.pairings.len();
    let big_t = t / (lambda * lambda);
    let alpha = lowdisc::kronecker_alpha(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts: Vec<Vec<f64>> = (0..opts.replicates).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    let points = 1u64 << opts.points_log2;
    let fact: f64 = (1..=n).map(|m| m as f64).product();
    let scale = lambda.powi(n as i32);

    let replicate_means: Vec<Vec<C64>> = shifts
        .par_iter()
        .map(|shift| {
            let mut acc = vec![C64::new(0.0, 0.0); np];
            let mut u = vec![0.0; n];
            let mut times = vec![0.0; n];
            let mut gaps = vec![0.0; n];
            let mut terms = vec![C64::new(0.0, 0.0); np];
            for i in 0..points {
                lowdisc::kronecker_point(i, &alpha, shift, &mut u);
                let w = map_point(opts.sampler, &u, big_t, &mut times, &mut gaps, fact);
                if w == 0.0 {
                    continue;
                }
                integrand.terms(&times, &mut terms);
                for (a, x) in acc.iter_mut().zip(&terms) {
                    *a += x * w;
                }
            }
            acc.into_iter().map(|a| a * (scale / points as f64)).collect()
        })
        .collect();

    let mut contributions = Vec::with_capacity(np);
    for (k, (p, _)) in integrand.pairings.iter().enumerate() {
        let vals: Vec<C64> = replicate_means.iter().map(|m| m[k]).collect();
        let (mean, se) = mean_stderr(&vals);
        contributions.push(PairingContribution { pairing: p.clone(), value: mean, stderr: se });
    }
    let totals: Vec<C64> = replicate_means.iter().map(|m| m.iter().sum()).collect();
    let (value, se) = mean_stderr(&totals);
    let stderr = se + interpolation_budget(model, n, t, np);
    let warning = opts.target_rel_stderr.and_then(|target| {
        (stderr > target * value.norm()).then(|| {
            format!("QMC budget exhausted: stderr {stderr:.3e} exceeds {target} x |omega| = {:.3e}", value.norm())
        })
    });
    Ok(SimplexIntegralResult {
        value,
        stderr,
        lambda,
        t,
        order: n,
        contributions,
        evaluations: points * opts.replicates as u64,
        warning,
    })
}

/// Mean and standard error of the mean of complex replicates (modulus of
/// the complex deviation).
fn mean_stderr(vals: &[C64]) -> (C64, f64) {
    let r = vals.len() as f64;
    let mean: C64 = vals.iter().sum::<C64>() / r;
    let var: f64 = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

fn nested(
    model: &DysonModel,
    gamma: &[usize],
    pi: &SPrimePermutation,
    lambda: f64,
    t: f64,
    opts: &NestedOptions,
) -> Result<SimplexIntegralResult> {
    let n = pi.order();
    if n > MAX_NESTED_ORDER {
        return arg_err(format!("nested quadrature is limited to order {MAX_NESTED_ORDER}, got {n}"));
    }
    let integrand = Integrand::new(model, gamma, pi)?;
    let big_t = t / (lambda * lambda);
    let evals = std::cell::Cell::new(0u64);
    let exhausted = std::cell::Cell::new(false);

    // integrates over the gap d_m ∈ [0, rem] given the earlier gaps
    fn level(
        it: &Integrand,
        opts: &NestedOptions,
        gaps: &[f64],
        rem: f64,
        n: usize,
        evals: &std::cell::Cell<u64>,
        exhausted: &std::cell::Cell<bool>,
    ) -> (C64, f64) {
        let breaks = quadrature::halfline_breaks(rem, 1.0);
        let tol = Tolerance { max_intervals: 2000, ..Tolerance::new(opts.abs_tol, opts.rel_tol) };
        let r = quadrature::adaptive(
            |x| {
                if exhausted.get() {
                    return C64::new(0.0, 0.0);
                }
                let mut g = gaps.to_vec();
                g.push(x);
                if g.len() == n {
                    evals.set(evals.get() + 1);
                    if evals.get() as usize > opts.max_evaluations {
                        exhausted.set(true);
                    }
                    let mut times = vec![0.0; n];
                    let mut acc = 0.0;
                    for m in (0..n).rev() {
                        acc += g[m];
                        times[m] = acc;
                    }
                    let mut scratch = vec![C64::new(0.0, 0.0); it.pairings.len()];
                    it.total(&times, &mut scratch)
                } else {
                    level(it, opts, &g, rem - x, n, evals, exhausted).0
                }
            },
            &breaks,
            tol,
        );
        (r.value, r.error)
    }

    let (v, err) = level(&integrand, opts, &[], big_t, n, &evals, &exhausted);
    let scale = lambda.powi(n as i32);
    let value = v * scale;
    let stderr = err * scale + interpolation_budget(model, n, t, integrand.pairings.len());
    let warning = exhausted
        .get()
        .then(|| format!("nested quadrature stopped after {} evaluations; error {stderr:.3e}", opts.max_evaluations));
    Ok(SimplexIntegralResult {
        value,
        stderr,
        lambda,
        t,
        order: n,
        contributions: Vec::new(),
        evaluations: evals.get(),
        warning,
    })
}

fn semi_analytic(
    model: &DysonModel,
    gamma: &[usize],
    pi: &SPrimePermutation,
    lambda: f64,
    t: f64,
) -> Result<SimplexIntegralResult> {
    if pi.order() != 2 {
        return arg_err("the semi-analytic formula covers order 2 only");
    }
    let (i, j) = (gamma[0], gamma[1]);
    let k = &model.kernel;
    let plus = pi.trace()[0] == Sign::Plus;
    let l2 = lambda * lambda;
    let big_t = t / l2;
    let breaks = quadrature::halfline_breaks(big_t, 200.0);
    let r = quadrature::adaptive(
        |tau| {
            let c = if plus { k.c_plus(i, j, tau) } else { k.c_minus(i, j, tau) };
            c * (t - l2 * tau)
        },
        &breaks,
        Tolerance::new(1e-13, 1e-11),
    );
    let stderr = r.error + k.error() * t * big_t;
    Ok(SimplexIntegralResult {
        value: r.value,
        stderr,
        lambda,
        t,
        order: 2,
        contributions: Vec::new(),
        evaluations: r.evaluations as u64,
        warning: (!r.converged).then(|| format!("semi-analytic quadrature stalled at {:.3e}", r.error)),
    })
}

/// Least-squares line through `(ln λ, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn rate_fit(lambdas: &[f64], errors: &[f64]) -> Result<RateFit> {
    if lambdas.len() != errors.len() || lambdas.len() < 3 {
        return arg_err("rate fit needs at least three (lambda, error) pairs");
    }
    if lambdas.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return arg_err("rate fit needs strictly positive finite inputs");
    }
    let x: Vec<f64> = lambdas.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return arg_err("rate fit needs at least two distinct lambdas");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept, r_squared })
}

/// `χ(τ) = (1+|τ|)^{-3/2}`.
#[inline]
pub fn chi(tau: f64) -> f64 {
    (1.0 + tau.abs()).powf(-1.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpResult {
    pub value: f64,
    pub error: f64,
    /// `k 2^{k+p} t^{p-1/2} λ`.
    pub bound: f64,
}

/// `k 2^{k+p} t^{p-1/2} λ`.
pub fn gkp_bound(k: usize, p: u32, lambda: f64, t: f64) -> f64 {
    k as f64 * 2f64.powi(k as i32 + p as i32) * t.powf(p as f64 - 0.5) * lambda
}

/// `λ² [2√(1+T) + 2/√(1+T) - 4]` with `T = t/λ²`, the exact `G_{1,1}`.
pub fn g11_closed_form(lambda: f64, t: f64) -> f64 {
    let s = (1.0 + t / (lambda * lambda)).sqrt();
    lambda * lambda * (2.0 * s + 2.0 / s - 4.0)
}

/// `G_{k,p}(λ) = λ^{2p} ∫_{S_k(λ⁻²t)} χ(t_1)⋯χ(t_k) (t_1+…+t_k)^p dt` by
/// iterated adaptive quadrature over the corner simplex.
pub fn gkp_integral(k: usize, p: u32, lambda: f64, t: f64) -> Result<GkpResult> {
    if !(1..=4).contains(&k) || !(1..=3).contains(&p) {
        return arg_err(format!("G_(k,p) is available for k <= 4, 1 <= p <= 3; got k={k}, p={p}"));
    }
    if !(lambda > 0.0) || !(t > 0.0) {
        return arg_err("lambda and t must be positive");
    }
    let big_t = t / (lambda * lambda);
    let (rel, abs) = match k {
        1 => (1e-14, 0.0),
        2 => (1e-11, 1e-300),
        _ => (1e-9, 1e-300),
    };
    fn level(m: usize, k: usize, p: u32, rem: f64, sum: f64, rel: f64, abs: f64) -> (f64, f64) {
        let breaks = quadrature::halfline_breaks(rem, 1.0);
        let (v, e, _) = quadrature::adaptive_real(
            |x| {
                let c = chi(x);
                if m + 1 == k {
                    c * (sum + x).powi(p as i32)
                } else {
                    c * level(m + 1, k, p, rem - x, sum + x, rel, abs).0
                }
            },
            &breaks,
            Tolerance::new(abs, rel),
        );
        (v, e)
    }
    let (v, e) = level(0, k, p, big_t, 0.0, rel, abs);
    let scale = lambda.powi(2 * p as i32);
    Ok(GkpResult { value: v * scale, error: e * scale, bound: gkp_bound(k, p, lambda, t) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sprime_small_orders() {
        let s1 = sprime(1).unwrap();
        assert_eq!(s1.len(), 1);
        assert_eq!(s1[0].values(), &[0]);
        let s2 = sprime(2).unwrap();
        assert_eq!(s2.iter().map(|p| p.to_string()).collect::<Vec<_>>(), ["(1,2)", "(2,1)"]);
        let s3: Vec<String> = sprime(3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(s3, ["(1,2,3)", "(1,3,2)", "(2,3,1)", "(3,2,1)"]);
        assert!(sprime(0).is_err() && sprime(15).is_err());
    }

    #[test]
    fn sprime_counts_and_distinct() {
        for n in 1..=12 {
            let s = sprime(n).unwrap();
            assert_eq!(s.len(), 1 << (n - 1));
            let set: HashSet<Vec<usize>> = s.iter().map(|p| p.values().to_vec()).collect();
            assert_eq!(set.len(), s.len());
            for p in &s {
                let mut v = p.values().to_vec();
                v.sort_unstable();
                assert_eq!(v, (0..n).collect::<Vec<_>>());
                assert_eq!(&SPrimePermutation::from_trace(p.trace().to_vec()), p);
            }
        }
    }

    #[test]
    fn sigma_is_even_for_all_small_orders() {
        let s = sprime(2).unwrap();
        assert_eq!(sigma_of_pi(&s[0]).unwrap(), vec![0, 1]);
        assert_eq!(sigma_of_pi(&s[1]).unwrap(), vec![0, 1]);
        for k in 1..=5 {
            for pi in sprime(2 * k).unwrap() {
                assert_eq!(permutation_sign(&sigma_of_pi(&pi).unwrap()), 1.0, "{pi}");
            }
        }
        assert!(sigma_of_pi(&sprime(3).unwrap()[0]).is_err());
    }

    #[test]
    fn u_limit_recursion() {
        let a = vec![vec![C64::new(0.0, 2.0)]];
        let b = vec![vec![C64::new(0.0, -2.0)]];
        let s2 = sprime(2).unwrap();
        let t = 1.5;
        assert_eq!(u_limit(&[0, 0], &s2[0], t, &a, &b).unwrap(), a[0][0] * t);
        assert_eq!(u_limit(&[0, 0], &s2[1], t, &a, &b).unwrap(), b[0][0] * t);
        let pp = SPrimePermutation::from_trace(vec![Sign::Plus, Sign::Plus, Sign::Plus]);
        assert_eq!(pp.to_string(), "(1,2,3,4)");
        let u = u_limit(&[0, 0, 0, 0], &pp, t, &a, &b).unwrap();
        assert!((u - a[0][0] * t / 2.0 * a[0][0] * t).norm() < 1e-15);
        let mp = SPrimePermutation::from_trace(vec![Sign::Minus, Sign::Plus, Sign::Minus]);
        let u = u_limit(&[0, 0, 0, 0], &mp, t, &a, &b).unwrap();
        assert!((u - b[0][0] * t / 2.0 * b[0][0] * t).norm() < 1e-15);
    }

    #[test]
    fn rate_fit_exact_powers() {
        let l = [0.4, 0.2, 0.1, 0.05];
        let f = rate_fit(&l, &l.map(|x| 3.0 * x)).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let f = rate_fit(&l, &l.map(|x| x * x)).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(rate_fit(&l, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(rate_fit(&l[..2], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn g11_matches_closed_form() {
        for lambda in [0.4, 0.2, 0.1, 0.05] {
            for t in [0.5, 1.0, 2.0] {
                let g = gkp_integral(1, 1, lambda, t).unwrap();
                let c = g11_closed_form(lambda, t);
                assert!((g.value - c).abs() < 1e-10 * c.max(1.0), "{} {c}", g.value);
            }
        }
    }

    #[test]
    fn single_variable_bound() {
        for lambda in [0.4, 0.2, 0.1, 0.05] {
            for t in [0.5, 1.0, 2.0] {
                for p in [1, 2] {
                    let g = gkp_integral(1, p, lambda, t).unwrap();
                    assert!(g.value <= 2.0 * t.powf(p as f64 - 0.5) * lambda);
                }
            }
        }
    }

    #[test]
    fn decay_sampler_inverts_its_cdf() {
        let big_t = 300.0;
        let quad = quadrature::adaptive_real(|x| decay_density(x, big_t), &quadrature::halfline_breaks(big_t, 1.0), Tolerance::new(1e-13, 1e-13));
        assert!((quad.0 - 1.0).abs() < 1e-11);
        for u in [0.0, 0.25, 0.5, 0.999] {
            let (tau, _) = decay_sample(u, big_t);
            let cdf = quadrature::adaptive_real(|x| decay_density(x, big_t), &[0.0, tau.max(1e-300)], Tolerance::new(1e-13, 1e-13)).0;
            assert!((cdf - u).abs() < 1e-10, "{u} {cdf}");
        }
    }
}
