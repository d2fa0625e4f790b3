//! Quadrature building blocks: Gauss–Legendre and Gauss–Kronrod rules,
//! adaptive integration, spherical Bessel functions for Legendre–Fourier
//! moments, and low-discrepancy sequences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::C64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `P_0(x) … P_{n-1}(x)`.
pub fn legendre_values(n: usize, x: f64, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = x;
    }
    for k in 2..n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Cached Gauss–Legendre rule.
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GlRule { nodes, weights }
    }

    /// Integral over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(c + h * x) * *w;
        }
        s * h
    }
}

pub(crate) fn gl16() -> &'static GlRule {
    static R: OnceLock<GlRule> = OnceLock::new();
    R.get_or_init(|| GlRule::new(16))
}

// Kronrod abscissae and weights (QUADPACK qk15); Gauss weights for the
// embedded 7-point rule at XGK[1], XGK[3], XGK[5], XGK[7].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod estimate on `[a, b]` with the Kronrod–Gauss difference
/// as error estimate.
pub fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    let val = rk * h;
    let err = ((rk - rg) * h).norm();
    (val, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Interval {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then_with(|| o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod integration over the partition given by
/// `breaks` (sorted, at least two points).
pub fn adaptive<F: FnMut(f64) -> C64>(mut f: F, breaks: &[f64], tol: Tolerance) -> QuadResult {
    assert!(breaks.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (val, err) = gk15(&mut f, w[0], w[1]);
            evals += 15;
            heap.push(Interval { a: w[0], b: w[1], val, err });
        }
    }
    let (mut total, mut err) = sum_intervals(&heap);
    let mut iter = 0usize;
    loop {
        let target = tol.abs.max(tol.rel * total.norm());
        if err <= target || heap.len() >= tol.max_intervals {
            let (total, err) = sum_intervals(&heap);
            let converged = err <= tol.abs.max(tol.rel * total.norm());
            return QuadResult { value: total, error: err, evaluations: evals, converged };
        }
        let Some(worst) = heap.pop() else {
            return QuadResult { value: total, error: err, evaluations: evals, converged: true };
        };
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            heap.push(worst);
            let (total, err) = sum_intervals(&heap);
            return QuadResult { value: total, error: err, evaluations: evals, converged: false };
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        evals += 30;
        total += v1 + v2 - worst.val;
        err += e1 + e2 - worst.err;
        heap.push(Interval { a: worst.a, b: m, val: v1, err: e1 });
        heap.push(Interval { a: m, b: worst.b, val: v2, err: e2 });
        iter += 1;
        if iter % 64 == 0 {
            (total, err) = sum_intervals(&heap);
        }
    }
}

// Sums in interval order so results do not depend on heap layout.
fn sum_intervals(heap: &BinaryHeap<Interval>) -> (C64, f64) {
    let mut v: Vec<&Interval> = heap.iter().collect();
    v.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut s = C64::new(0.0, 0.0);
    let mut e = 0.0;
    for iv in v {
        s += iv.val;
        e += iv.err;
    }
    (s, e)
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> (f64, f64, bool) {
    let r = adaptive(|x| C64::new(f(x), 0.0), breaks, tol);
    (r.value.re, r.error, r.converged)
}

/// Breakpoints for `[0, t_max]`: unit steps up to `min(t_max, linear_end)`,
/// then geometric with ratio 2.
pub fn halfline_breaks(t_max: f64, linear_end: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let lin = linear_end.min(t_max);
    let n = lin.floor() as usize;
    for i in 1..=n {
        b.push(i as f64);
    }
    let mut x = *b.last().unwrap();
    if x <= 0.0 && t_max > 0.0 {
        x = t_max.min(1.0);
        b.push(x);
    }
    while x < t_max {
        x = (2.0 * x).min(t_max);
        b.push(x);
    }
    b
}

/// Spherical Bessel functions `j_0(x) … j_{n-1}(x)` for real `x`.
pub fn spherical_bessel(n: usize, x: f64, out: &mut [f64]) {
    if n == 0 {
        return;
    }
    let ax = x.abs();
    if ax < 1.0 {
        bessel_series(n, ax, out);
    } else if ax > (n as f64) {
        out[0] = ax.sin() / ax;
        if n > 1 {
            out[1] = ax.sin() / (ax * ax) - ax.cos() / ax;
        }
        for m in 2..n {
            out[m] = (2.0 * m as f64 - 1.0) / ax * out[m - 1] - out[m - 2];
        }
    } else {
        bessel_miller(n, ax, out);
    }
    if x < 0.0 {
        for (m, v) in out.iter_mut().enumerate().take(n) {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
    }
}

fn bessel_series(n: usize, x: f64, out: &mut [f64]) {
    let x2 = x * x;
    let mut pref = 1.0;
    for m in 0..n {
        if m > 0 {
            pref *= x / (2.0 * m as f64 + 1.0);
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= -x2 / (2.0 * k as f64 * (2.0 * (m + k) as f64 + 1.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        out[m] = pref * sum;
    }
}

fn bessel_miller(n: usize, x: f64, out: &mut [f64]) {
    let start = n + 20 + (x as usize);
    let mut fp1 = 0.0;
    let mut f = 1e-300;
    for m in (0..=start).rev() {
        if m < n {
            out[m] = f;
        }
        if m == 0 {
            break;
        }
        let fm1 = (2.0 * m as f64 + 1.0) / x * f - fp1;
        fp1 = f;
        f = fm1;
        if f.abs() > 1e250 {
            let s = 1e-250;
            f *= s;
            fp1 *= s;
            for v in out.iter_mut().take(n).skip(m) {
                *v *= s;
            }
        }
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    // normalise against whichever of j0, j1 is better conditioned
    let scale = if j0.abs() > j1.abs() { j0 / out[0] } else { j1 / out[1.min(n - 1)] };
    let scale = if n == 1 { j0 / out[0] } else { scale };
    for v in out.iter_mut().take(n) {
        *v *= scale;
    }
}

/// Degree-`(n-1)` polynomial on one panel `[a, b]`, stored by Legendre
/// coefficients, with exact Fourier moments `∫ p(E) e^{iτE} dE`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendrePanel {
    pub a: f64,
    pub b: f64,
    pub coef: Vec<C64>,
}

impl LegendrePanel {
    /// Projects samples taken at the Gauss–Legendre nodes of `rule`.
    pub fn from_samples(a: f64, b: f64, rule: &GlRule, samples: &[C64]) -> Self {
        let n = rule.nodes.len();
        let mut coef = vec![C64::new(0.0, 0.0); n];
        let mut p = vec![0.0; n];
        for (i, x) in rule.nodes.iter().enumerate() {
            legendre_values(n, *x, &mut p);
            let wf = samples[i] * rule.weights[i];
            for m in 0..n {
                coef[m] += wf * p[m];
            }
        }
        for (m, c) in coef.iter_mut().enumerate() {
            *c *= (2.0 * m as f64 + 1.0) / 2.0;
        }
        LegendrePanel { a, b, coef }
    }

    /// Crude bound on `∫|h - p|` from the two trailing coefficients.
    pub fn tail_error(&self) -> f64 {
        let n = self.coef.len();
        let t = self.coef[n - 1].norm() + self.coef[n - 2].norm();
        (self.b - self.a) * t
    }

    /// Coefficients of `E · p(E)`; the degree grows by one.
    pub fn times_energy(&self) -> LegendrePanel {
        let n = self.coef.len();
        let c = 0.5 * (self.a + self.b);
        let h = 0.5 * (self.b - self.a);
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (m, &cm) in self.coef.iter().enumerate() {
            out[m] += cm * c;
            // x P_m = ((m+1) P_{m+1} + m P_{m-1}) / (2m+1)
            let d = 2.0 * m as f64 + 1.0;
            out[m + 1] += cm * (h * (m as f64 + 1.0) / d);
            if m > 0 {
                out[m - 1] += cm * (h * m as f64 / d);
            }
        }
        LegendrePanel { a: self.a, b: self.b, coef: out }
    }

    /// `∫_a^b p(E) e^{iτE} dE`, using `∫ P_m(x) e^{iθx} dx = 2 i^m j_m(θ)`.
    pub fn fourier(&self, tau: f64, scratch: &mut Vec<f64>) -> C64 {
        let n = self.coef.len();
        let c = 0.5 * (self.a + self.b);
        let h = 0.5 * (self.b - self.a);
        scratch.resize(n, 0.0);
        let theta = tau * h;
        spherical_bessel(n, theta, scratch);
        let mut re = 0.0;
        let mut im = 0.0;
        // i^m cycles 1, i, -1, -i
        for (m, cm) in self.coef.iter().enumerate() {
            let j = scratch[m];
            match m % 4 {
                0 => {
                    re += cm.re * j;
                    im += cm.im * j;
                }
                1 => {
                    re -= cm.im * j;
                    im += cm.re * j;
                }
                2 => {
                    re -= cm.re * j;
                    im -= cm.im * j;
                }
                _ => {
                    re += cm.im * j;
                    im -= cm.re * j;
                }
            }
        }
        C64::new(re, im) * C64::from_polar(2.0 * h, tau * c)
    }
}

/// Low-discrepancy point sets.
pub mod lowdisc {
    /// Radical inverse of `i` in the given prime base.
    pub fn halton(mut i: u64, base: u64) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        let b = base as f64;
        while i > 0 {
            f /= b;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }

    /// Generator of the `d`-dimensional Kronecker (R_d) sequence: powers of
    /// the inverse of the unique positive root of `x^{d+1} = x + 1`.
    pub fn kronecker_alpha(d: usize) -> Vec<f64> {
        let mut phi = 2.0f64;
        for _ in 0..200 {
            phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
        }
        (1..=d).map(|j| (1.0 / phi).powi(j as i32).fract()).collect()
    }

    /// Point `i` of the shifted Kronecker sequence, written into `out`.
    #[inline]
    pub fn kronecker_point(i: u64, alpha: &[f64], shift: &[f64], out: &mut [f64]) {
        let fi = i as f64;
        for ((o, a), s) in out.iter_mut().zip(alpha).zip(shift) {
            let v = s + fi * a;
            *o = v - v.floor();
        }
    }
}
