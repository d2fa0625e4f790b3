//! Gaussian wave packet `π^{-3/4} e^{-|x|²/2}` evolved by `|k|²` and by the
//! modified symbol `|k|² - λ²α(c·k)²`: closed-form densities, a momentum-grid
//! oracle, and the `x₃ = 0` snapshots with their diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use libm::erfc;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{arg_err, Result, WclError};
use crate::lambshift::HamiltonianSymbol;
use crate::{Vec3, C64};

/// Boundary mass above which a grid is rejected.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;
/// `|det M|` below which the closed form is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Momenta with `|k|²` above this carry `e^{-40}` of the initial amplitude
/// and are skipped by the oracle.
const K2_CUTOFF: f64 = 80.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PacketConfig {
    pub c: Vec3,
    pub alpha: f64,
    pub lambda: f64,
    pub times: Vec<f64>,
    /// Half-width `L` of the box `[-L, L)²`.
    pub extent: f64,
    /// Points per axis `N`.
    pub points: usize,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig {
            c: [4.0, -4.0, 0.0],
            alpha: 4.0,
            lambda: 0.1,
            times: vec![0.0, 0.5, 1.0, 1.5],
            extent: 16.0,
            points: 256,
        }
    }
}

impl PacketConfig {
    pub fn validate(&self) -> Result<()> {
        if !(64..=1024).contains(&self.points) || !self.points.is_power_of_two() {
            return Err(WclError::Config(format!("grid points must be a power of two in [64, 1024], got {}", self.points)));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(WclError::Config(format!("grid extent must be positive, got {}", self.extent)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(WclError::Config(format!("lambda must lie in (0, 1), got {}", self.lambda)));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(WclError::Config(format!("times must be non-negative, got {t}")));
        }
        if self.c.iter().chain([&self.alpha]).any(|v| !v.is_finite()) {
            return Err(WclError::Config("coupling direction and alpha must be finite".into()));
        }
        Ok(())
    }

    /// Sample positions `x_j = -L + 2jL/N`.
    pub fn axis(&self) -> Vec<f64> {
        grid_axis(self.extent, self.points)
    }

    pub fn symbol(&self, ham: Hamiltonian) -> HamiltonianSymbol {
        match ham {
            Hamiltonian::Free => HamiltonianSymbol::dipole(0.0, self.c, 0.0),
            Hamiltonian::Modified => HamiltonianSymbol::dipole(self.alpha, self.c, self.lambda),
        }
    }

    pub fn matrix(&self, t: f64, ham: Hamiltonian) -> EvolutionMatrix {
        match ham {
            Hamiltonian::Free => m0_matrix(t),
            Hamiltonian::Modified => m_matrix(t, self),
        }
    }
}

fn grid_axis(extent: f64, n: usize) -> Vec<f64> {
    let dx = 2.0 * extent / n as f64;
    (0..n).map(|j| -extent + j as f64 * dx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hamiltonian {
    Free,
    Modified,
}

impl Hamiltonian {
    pub fn name(self) -> &'static str {
        match self {
            Hamiltonian::Free => "free",
            Hamiltonian::Modified => "modified",
        }
    }
}

/// Complex symmetric 3×3 matrix with `ψ̂_t(k) ∝ exp(-½ kᵀ M(t) k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionMatrix(pub [[C64; 3]; 3]);

/// `(1 + 2it) 𝕀₃`.
pub fn m0_matrix(t: f64) -> EvolutionMatrix {
    let d = C64::new(1.0, 2.0 * t);
    let z = C64::new(0.0, 0.0);
    EvolutionMatrix([[d, z, z], [z, d, z], [z, z, d]])
}

/// `(1 + 2it) 𝕀₃ - 2iα λ² t c cᵀ`.
pub fn m_matrix(t: f64, cfg: &PacketConfig) -> EvolutionMatrix {
    let mut m = m0_matrix(t).0;
    let s = 2.0 * cfg.alpha * cfg.lambda * cfg.lambda * t;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= C64::new(0.0, s * (cfg.c[i] * cfg.c[j]));
        }
    }
    EvolutionMatrix(m)
}

impl EvolutionMatrix {
    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by the adjugate.
    pub fn inverse(&self) -> Result<[[C64; 3]; 3]> {
        let d = self.det();
        if d.norm() < SINGULAR_DET {
            return Err(WclError::Singular(d.norm()));
        }
        let m = &self.0;
        let mut inv = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in inv.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (c, e) = ((i + 1) % 3, (i + 2) % 3);
                *v = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) / d;
            }
        }
        Ok(inv)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let m = &self.0;
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((m[i][j] - m[j][i]).norm());
            }
        }
        d
    }
}

/// `ρ(x) = π^{-3/2} |det M|^{-1} exp(-xᵀ B x)` with `B = Re M⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDensity {
    /// `Re M⁻¹`
    pub precision: [[f64; 3]; 3],
    pub prefactor: f64,
}

impl GaussianDensity {
    pub fn new(m: &EvolutionMatrix) -> Result<Self> {
        let inv = m.inverse()?;
        let mut precision = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                precision[i][j] = inv[i][j].re;
            }
        }
        Ok(GaussianDensity { precision, prefactor: PI.powf(-1.5) / m.det().norm() })
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let b = &self.precision;
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += x[i] * b[i][j] * x[j];
            }
        }
        self.prefactor * (-q).exp()
    }

    /// `∫ ρ(x₁, x₂, x₃) dx₃ / ρ(x₁, x₂, 0)`.
    pub fn off_plane_factor(&self, x1: f64, x2: f64) -> f64 {
        let b = &self.precision;
        let s = b[0][2] * x1 + b[1][2] * x2;
        (PI / b[2][2]).sqrt() * (s * s / b[2][2]).exp()
    }

    /// Covariance `B⁻¹/2` of the normalized density.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let b = &self.precision;
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let mut cov = [[0.0; 3]; 3];
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (a, bb) = ((j + 1) % 3, (j + 2) % 3);
                let (c, e) = ((i + 1) % 3, (i + 2) % 3);
                *v = (b[a][c] * b[bb][e] - b[a][e] * b[bb][c]) / det / 2.0;
            }
        }
        cov
    }

    /// Sum over axes of the probability of `|x_i| > extent`.
    pub fn boundary_mass(&self, extent: f64) -> f64 {
        let cov = self.covariance();
        (0..3).map(|i| erfc(extent / (2.0 * cov[i][i]).sqrt())).sum()
    }
}

/// `π^{-3/2} |det M|^{-1} |exp(-½ xᵀ M⁻¹ x)|²`.
pub fn density_closed_form(x: &Vec3, m: &EvolutionMatrix) -> Result<f64> {
    Ok(GaussianDensity::new(m)?.eval(x))
}

/// `|x|²/(4t²+1) + λ² 16αt²/(4t²+1)² (cᵀx)²`, the quadratic form quoted for
/// the first-order density.
pub fn g_quadratic_form(x: &Vec3, t: f64, cfg: &PacketConfig) -> f64 {
    quadratic_form(x, t, cfg, 16.0)
}

/// First-order expansion of `Re xᵀ M⁻¹ x` in `λ²`; its anisotropic
/// coefficient is `8αt²λ²/(4t²+1)²`, half the one in [`g_quadratic_form`].
pub fn first_order_exponent(x: &Vec3, t: f64, cfg: &PacketConfig) -> f64 {
    quadratic_form(x, t, cfg, 8.0)
}

fn quadratic_form(x: &Vec3, t: f64, cfg: &PacketConfig, coef: f64) -> f64 {
    let d = 4.0 * t * t + 1.0;
    let x2 = x.iter().map(|v| v * v).sum::<f64>();
    let cx: f64 = cfg.c.iter().zip(x).map(|(a, b)| a * b).sum();
    x2 / d + cfg.lambda * cfg.lambda * coef * cfg.alpha * t * t / (d * d) * cx * cx
}

/// Samples of a density on the plane `x₃ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub t: f64,
    pub hamiltonian: Hamiltonian,
    pub axis: Vec<f64>,
    /// `values[i * N + j] = ρ(axis[i], axis[j], 0)`
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn n(&self) -> usize {
        self.axis.len()
    }

    pub fn spacing(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &DensityGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Total probability: plane samples times the analytic `x₃` marginal.
    pub fn normalization(&self, density: &GaussianDensity) -> f64 {
        let n = self.n();
        let h = self.spacing();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * density.off_plane_factor(self.axis[i], self.axis[j])).sum::<f64>())
            .sum::<f64>()
            * h
            * h
    }

    /// Largest relative deviation from the eight symmetries of the square
    /// (reflections `x_i → -x_i` and the swap `x₁ ↔ x₂`).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        let max = self.max();
        let mirror = |i: usize| (n - i) % n;
        let mut d: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                let v = self.get(i, j);
                for w in [self.get(j, i), self.get(mirror(i), j), self.get(i, mirror(j)), self.get(mirror(j), mirror(i))] {
                    d = d.max((v - w).abs() / max);
                }
            }
        }
        d
    }

    /// In-plane second-moment matrix of the samples about their mean.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let n = self.n();
        let (mut m0, mut m1, mut m2) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                let x = [self.axis[i], self.axis[j]];
                m0 += v;
                for a in 0..2 {
                    m1[a] += v * x[a];
                    for b in 0..2 {
                        m2[a][b] += v * x[a] * x[b];
                    }
                }
            }
        }
        let mut cov = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] = m2[a][b] / m0 - m1[a] * m1[b] / (m0 * m0);
            }
        }
        cov
    }

    pub fn anisotropy(&self) -> Anisotropy {
        Anisotropy::from_covariance(self.covariance())
    }

    /// `"x1,x2,rho"` rows in storage order with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,x2,rho")?;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", self.axis[i], self.axis[j], self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Binary greyscale PGM scaled to the frame maximum.
    pub fn to_pgm(&self) -> Vec<u8> {
        let n = self.n();
        let max = self.max();
        let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
        out.extend(self.values.iter().map(|v| if max > 0.0 { (255.0 * v / max).round() as u8 } else { 0 }));
        out
    }
}

/// Principal axes of an in-plane covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anisotropy {
    /// Unit vector of the largest variance.
    pub major_axis: [f64; 2],
    pub minor_axis: [f64; 2],
    pub major_variance: f64,
    pub minor_variance: f64,
}

impl Anisotropy {
    pub fn from_covariance(c: [[f64; 2]; 2]) -> Self {
        let tr = c[0][0] + c[1][1];
        let disc = ((c[0][0] - c[1][1]).powi(2) / 4.0 + c[0][1] * c[0][1]).sqrt();
        let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
        let theta = 0.5 * (2.0 * c[0][1]).atan2(c[0][0] - c[1][1]);
        let major = [theta.cos(), theta.sin()];
        Anisotropy { major_axis: major, minor_axis: [-major[1], major[0]], major_variance: l1, minor_variance: l2 }
    }

    /// `|cos|` of the angle between the major axis and `v`.
    pub fn major_alignment(&self, v: [f64; 2]) -> f64 {
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        (self.major_axis[0] * v[0] + self.major_axis[1] * v[1]).abs() / n
    }
}

/// Closed-form density on the configured grid.
pub fn closed_form_grid(cfg: &PacketConfig, t: f64, ham: Hamiltonian) -> Result<DensityGrid> {
    cfg.validate()?;
    let density = GaussianDensity::new(&cfg.matrix(t, ham))?;
    let axis = cfg.axis();
    let values = axis
        .par_iter()
        .flat_map_iter(|&x1| axis.iter().map(move |&x2| density.eval(&[x1, x2, 0.0])))
        .collect();
    Ok(DensityGrid { t, hamiltonian: ham, axis, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub grid: DensityGrid,
    /// Sup-norm change of the shared samples when `N` is doubled.
    pub convergence: f64,
    pub boundary_mass: f64,
}

/// Evolves `ψ̂₀(k) = π^{-3/4} e^{-|k|²/2}` by `e^{-iω̃(k)t}` on the momentum
/// grid dual to the box, sums over `k₃`, and inverts the in-plane transform
/// with an FFT.
pub fn momentum_oracle_evolve(cfg: &PacketConfig, t: f64, ham: Hamiltonian) -> Result<OracleResult> {
    cfg.validate()?;
    let density = GaussianDensity::new(&cfg.matrix(t, ham))?;
    let boundary_mass = density.boundary_mass(cfg.extent);
    if boundary_mass > BOUNDARY_MASS_LIMIT {
        return Err(WclError::GridTooSmall { boundary_mass, limit: BOUNDARY_MASS_LIMIT });
    }
    let symbol = cfg.symbol(ham);
    let grid = oracle_grid(&symbol, cfg.extent, cfg.points, t, ham)?;
    let fine = oracle_grid(&symbol, cfg.extent, 2 * cfg.points, t, ham)?;
    let n = cfg.points;
    let mut convergence: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            convergence = convergence.max((grid.get(i, j) - fine.get(2 * i, 2 * j)).abs());
        }
    }
    Ok(OracleResult { grid, convergence, boundary_mass })
}

fn oracle_grid(symbol: &HamiltonianSymbol, extent: f64, n: usize, t: f64, ham: Hamiltonian) -> Result<DensityGrid> {
    let dk = PI / extent;
    let freq = |m: usize| if m < n / 2 { m as f64 } else { m as f64 - n as f64 } * dk;
    let norm = PI.powf(-0.75) * (2.0 * PI).powf(-1.5) * dk * dk * dk;
    let kmax = K2_CUTOFF.sqrt();
    let m3 = (kmax / dk).ceil() as i64;

    // b[m1][m2] = Σ_{k3} ψ̂_t(k) · e^{-i(k1+k2)L}
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|m1| {
            let k1 = freq(m1);
            (0..n)
                .map(|m2| {
                    let k2 = freq(m2);
                    let mut acc = C64::new(0.0, 0.0);
                    if k1 * k1 + k2 * k2 <= K2_CUTOFF {
                        for j in -m3..=m3 {
                            let k3 = j as f64 * dk;
                            let k = [k1, k2, k3];
                            let k2s = k1 * k1 + k2 * k2 + k3 * k3;
                            if k2s > K2_CUTOFF {
                                continue;
                            }
                            let w = symbol.eval(&k);
                            acc += (C64::new(-0.5 * k2s, 0.0) - C64::i() * w * t).exp();
                        }
                    }
                    acc * C64::from_polar(norm, -(k1 + k2) * extent)
                })
                .collect()
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    let mut data: Vec<C64> = rows.into_iter().flatten().collect();
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
    let values: Vec<f64> = data.iter().map(|z| z.norm_sqr()).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(WclError::NonConvergence { what: "momentum oracle".into(), achieved: f64::NAN, requested: 0.0 });
    }
    Ok(DensityGrid { t, hamiltonian: ham, axis: grid_axis(extent, n), values })
}

/// Free and modified snapshots at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotPair {
    pub t: f64,
    pub free: DensityGrid,
    pub modified: DensityGrid,
}

/// Closed-form snapshots at every configured time.
pub fn render_snapshots(cfg: &PacketConfig) -> Result<Vec<SnapshotPair>> {
    cfg.validate()?;
    if cfg.times.is_empty() {
        return arg_err("no snapshot times given");
    }
    cfg.times
        .iter()
        .map(|&t| {
            Ok(SnapshotPair {
                t,
                free: closed_form_grid(cfg, t, Hamiltonian::Free)?,
                modified: closed_form_grid(cfg, t, Hamiltonian::Modified)?,
            })
        })
        .collect()
}
