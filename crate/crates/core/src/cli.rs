//! Command-line front end: JSON run configuration, subcommands and the
//! CSV/PGM files they write.
//!
//! Exit codes: 0 success, 1 a numerical warning was raised, 2 missing
//! configuration file, 3 malformed JSON, 4 constraint violation.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::correlations::{halfline_a, halfline_b, HalflineOptions, KernelSource, ProfileOptions, Reservoir};
use crate::dyson::{self, DysonModel, OmegaMethod, QmcOptions, SPrimePermutation};
use crate::error::WclError;
use crate::lambshift::{assemble_alpha, AlphaMatrix};
use crate::model::{
    validate_interaction, Bump, Dispersion, FormFactor, InteractionSpec, OccupationDensity, OccupationKind, Statistics,
};
use crate::wavepacket::{self, Hamiltonian, PacketConfig};
use crate::wick;
use crate::{Vec3, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_MISSING_FILE: i32 = 2;
pub const EXIT_MALFORMED: i32 = 3;
pub const EXIT_CONSTRAINT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wcl", version, about = "Weak-coupling-limit experiments for quasi-free reservoirs")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalOpts {
    /// JSON run configuration; defaults are used when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated coupling strengths
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda_list: Option<Vec<f64>>,
    /// Comma-separated snapshot times
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Grid points per axis
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Grid half-width
    #[arg(long, global = true)]
    pub extent: Option<f64>,
    /// Number of contracted pairs in the Dyson term (order 2k)
    #[arg(long, global = true)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Lamb-shift matrix alpha and the half-line integrals a, b
    Alpha,
    /// Two-point correlation functions on a time grid
    Corr,
    /// Dyson terms against their weak-coupling limits
    Dyson,
    /// Corner-simplex integrals against their bounds
    Bounds,
    /// Randomized Wick-theorem check against finite-mode moments
    WickCheck,
    /// Free and modified wave-packet snapshots
    Wavepacket,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BumpConfig {
    #[serde(default)]
    pub center: Vec3,
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

/// Run configuration as read from JSON (kebab-case keys, unknown keys
/// rejected).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RunConfig {
    pub statistics: Statistics,
    pub q: u32,
    pub beta: f64,
    pub mu: f64,
    /// Occupation density; defaults to the one matching `statistics`.
    pub occupation: Option<OccupationKind>,
    /// Bumps summed into the form factor `f`.
    pub form_factor: Vec<BumpConfig>,
    pub c: Vec3,
    /// Replaces the computed `α` in the wave-packet experiment.
    pub alpha_override: Option<f64>,
    pub lambda: f64,
    pub lambda_list: Vec<f64>,
    pub t: f64,
    pub k: usize,
    /// Multi-index of the Dyson term (1-based); all ones by default.
    pub gamma: Option<Vec<usize>>,
    /// Orderings `π ∈ S′(2k)` (1-based); all of them by default.
    pub pi: Option<Vec<Vec<usize>>>,
    pub qmc_points_log2: u32,
    pub replicates: usize,
    pub tau_max: f64,
    pub tau_points: usize,
    pub t_cut: f64,
    pub bounds_t: Vec<f64>,
    pub wick_trials: usize,
    pub times: Vec<f64>,
    pub grid: usize,
    pub extent: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            statistics: Statistics::Fermi,
            q: 2,
            beta: 1.0,
            mu: 0.0,
            occupation: None,
            form_factor: vec![BumpConfig { center: [0.0; 3], radius: 1.5, amplitude: 1.0, phase: 0.0 }],
            c: [4.0, -4.0, 0.0],
            alpha_override: None,
            lambda: 0.1,
            lambda_list: vec![0.4, 0.2, 0.1, 0.05],
            t: 6.0,
            k: 1,
            gamma: None,
            pi: None,
            qmc_points_log2: 20,
            replicates: 16,
            tau_max: 50.0,
            tau_points: 501,
            t_cut: 1e4,
            bounds_t: vec![0.5, 1.0, 2.0],
            wick_trials: 100,
            times: vec![0.0, 0.5, 1.0, 1.5],
            grid: 256,
            extent: 16.0,
            out_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<WclError> for CliError {
    fn from(e: WclError) -> Self {
        let code = match e {
            WclError::Config(_) | WclError::Argument(_) | WclError::GridTooSmall { .. } => EXIT_CONSTRAINT,
            _ => EXIT_NUMERICAL,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_NUMERICAL, format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound { EXIT_MISSING_FILE } else { EXIT_MALFORMED };
        CliError::new(code, format!("cannot read {}: {e}", path.display()))
    })?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
        let code = match e.classify() {
            serde_json::error::Category::Data => EXIT_CONSTRAINT,
            _ => EXIT_MALFORMED,
        };
        CliError::new(code, format!("{}: {e}", path.display()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn apply(&mut self, opts: &GlobalOpts) {
        if let Some(d) = &opts.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(s) = opts.seed {
            self.seed = s;
        }
        if let Some(l) = &opts.lambda_list {
            self.lambda_list = l.clone();
        }
        if let Some(t) = &opts.times {
            self.times = t.clone();
        }
        if let Some(n) = opts.grid {
            self.grid = n;
        }
        if let Some(l) = opts.extent {
            self.extent = l;
        }
        if let Some(k) = opts.k {
            self.k = k;
        }
    }

    /// Checks every physical and numerical constraint.
    pub fn validate(&self) -> std::result::Result<(), WclError> {
        let cfg_err = |m: String| Err(WclError::Config(m));
        self.reservoir()?;
        let spec = self.interaction()?;
        let report = validate_interaction(&spec);
        if !report.passed() {
            return cfg_err(format!("interaction fails validation:\n{report}"));
        }
        if self.lambda_list.iter().chain([&self.lambda]).any(|l| !(*l > 0.0 && *l <= 1.0)) {
            return cfg_err("coupling strengths must lie in (0, 1]".into());
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return cfg_err(format!("t must be positive, got {}", self.t));
        }
        if !(1..=dyson::MAX_QMC_ORDER / 2).contains(&self.k) {
            return cfg_err(format!("k must lie in 1..={}, got {}", dyson::MAX_QMC_ORDER / 2, self.k));
        }
        if let Some(g) = &self.gamma {
            if g.len() != 2 * self.k || g.iter().any(|&i| i == 0 || i > spec.nu()) {
                return cfg_err(format!("gamma must have {} entries in 1..={}", 2 * self.k, spec.nu()));
            }
        }
        if self.replicates < 2 || !(4..=26).contains(&self.qmc_points_log2) {
            return cfg_err("QMC needs at least 2 replicates and 4 <= qmc-points-log2 <= 26".into());
        }
        if !(self.tau_max > 0.0) || self.tau_points < 2 || !(self.t_cut > 0.0) {
            return cfg_err("tau-max and t-cut must be positive and tau-points at least 2".into());
        }
        if self.bounds_t.iter().any(|t| !(*t > 0.0)) {
            return cfg_err("bounds-t entries must be positive".into());
        }
        if let Some(a) = self.alpha_override {
            if !a.is_finite() {
                return cfg_err("alpha-override must be finite".into());
            }
        }
        self.packet(0.0).validate()?;
        self.orderings()?;
        Ok(())
    }

    pub fn dispersion(&self) -> std::result::Result<Dispersion, WclError> {
        Dispersion::from_exponent(self.q)
    }

    pub fn reservoir(&self) -> std::result::Result<Reservoir, WclError> {
        let kind = self.occupation.unwrap_or(match self.statistics {
            Statistics::Fermi => OccupationKind::Fermi,
            Statistics::Bose => OccupationKind::Bose,
        });
        Ok(Reservoir::new(self.statistics, OccupationDensity::new(kind, self.beta, self.mu)?, self.dispersion()?))
    }

    pub fn form_factor(&self) -> std::result::Result<FormFactor, WclError> {
        if self.form_factor.is_empty() {
            return Err(WclError::Config("form-factor needs at least one bump".into()));
        }
        FormFactor::new(
            self.form_factor
                .iter()
                .map(|b| Bump { center: b.center, radius: b.radius, amplitude: C64::from_polar(b.amplitude, b.phase) })
                .collect(),
        )
    }

    /// Dipole interaction `(c·P) ⊗ (a†(f) + a(f))`.
    pub fn interaction(&self) -> std::result::Result<InteractionSpec, WclError> {
        Ok(InteractionSpec::dipole(self.statistics, self.c, self.form_factor()?))
    }

    /// Wave-packet parameters with the given `α`.
    pub fn packet(&self, alpha: f64) -> PacketConfig {
        PacketConfig {
            c: self.c,
            alpha,
            lambda: self.lambda,
            times: self.times.clone(),
            extent: self.extent,
            points: self.grid,
        }
    }

    fn orderings(&self) -> std::result::Result<Vec<SPrimePermutation>, WclError> {
        let all = dyson::sprime(2 * self.k)?;
        match &self.pi {
            None => Ok(all),
            Some(list) => list
                .iter()
                .map(|p| {
                    let zero: Vec<usize> = p.iter().map(|v| v.wrapping_sub(1)).collect();
                    all.iter().find(|s| s.values() == zero.as_slice()).cloned().ok_or_else(|| {
                        WclError::Config(format!("{p:?} is not an element of S'({})", 2 * self.k))
                    })
                })
                .collect(),
        }
    }
}

/// Files written and warnings raised by one subcommand.
#[derive(Debug, Default)]
pub struct RunReport {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunReport {
    fn wrote(&mut self, path: &Path, what: impl std::fmt::Display) {
        self.lines.push(format!("wrote {}: {what}", path.display()));
    }

    fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn exit_code(&self) -> i32 {
        if self.warnings.is_empty() {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| {
        CliError::new(EXIT_NUMERICAL, format!("cannot create {}: {e}", path.display()))
    })?))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_one_based(v: &[usize]) -> String {
    v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("-")
}

/// Runs one subcommand with a validated configuration.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> CliResult<RunReport> {
    fs::create_dir_all(&cfg.out_dir)?;
    let mut report = RunReport::default();
    match cmd {
        Command::Alpha => run_alpha(cfg, &mut report)?,
        Command::Corr => run_corr(cfg, &mut report)?,
        Command::Dyson => run_dyson(cfg, &mut report)?,
        Command::Bounds => run_bounds(cfg, &mut report)?,
        Command::WickCheck => run_wick(cfg, &mut report)?,
        Command::Wavepacket => run_wavepacket(cfg, &mut report)?,
    }
    Ok(report)
}

fn computed_alpha(cfg: &RunConfig) -> CliResult<AlphaMatrix> {
    Ok(assemble_alpha(&cfg.interaction()?, &cfg.reservoir()?)?)
}

fn run_alpha(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let spec = cfg.interaction()?;
    let res = cfg.reservoir()?;
    let alpha = assemble_alpha(&spec, &res)?;
    let src = KernelSource::new(&spec, &res, &ProfileOptions::default())?;
    let opts = HalflineOptions { t_cut: cfg.t_cut, ..HalflineOptions::default() };
    let path = cfg.out_dir.join("alpha.csv");
    let mut w = create(&path)?;
    writeln!(
        w,
        "i,j,re_alpha,im_alpha,re_a,im_a,re_b,im_b,re_a_time,im_a_time,re_b_time,im_b_time,time_error,hermiticity_residual"
    )?;
    let nu = alpha.nu();
    for i in 0..nu {
        for j in 0..nu {
            let a = halfline_a(&src, i, j, &opts)?;
            let b = halfline_b(&src, i, j, &opts)?;
            for h in [&a, &b] {
                if let Some(msg) = &h.warning {
                    report.warn(format!("half-line integral ({},{}): {msg}", i + 1, j + 1));
                }
            }
            let (al, fa, fb) = (alpha.alpha[i][j], alpha.a[i][j], alpha.b[i][j]);
            let row = [al.re, al.im, fa.re, fa.im, fb.re, fb.im, a.value.re, a.value.im, b.value.re, b.value.im];
            let cells: Vec<String> = row.iter().map(|v| fmt_f(*v)).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                i + 1,
                j + 1,
                cells.join(","),
                fmt_f(a.total_error().max(b.total_error())),
                fmt_f(alpha.hermiticity_residual(i, j))
            )?;
        }
    }
    w.flush()?;
    if let Some(msg) = alpha.warning() {
        report.warn(msg);
    }
    report.wrote(&path, format!("{nu}x{nu} entries, alpha_11 = {:.10e}", alpha.alpha[0][0].re));
    Ok(())
}

fn run_corr(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let spec = cfg.interaction()?;
    let src = KernelSource::new(&spec, &cfg.reservoir()?, &ProfileOptions::default())?;
    let nu = src.nu();
    let n = cfg.tau_points;
    for i in 0..nu {
        for j in 0..nu {
            let path = cfg.out_dir.join(format!("corr_{}_{}.csv", i + 1, j + 1));
            let mut w = create(&path)?;
            writeln!(w, "tau,re_c_plus,im_c_plus,re_c_minus,im_c_minus")?;
            for m in 0..n {
                let tau = cfg.tau_max * m as f64 / (n - 1) as f64;
                let (p, q) = (src.c_plus(i, j, tau), src.c_minus(i, j, tau));
                writeln!(w, "{},{},{},{},{}", fmt_f(tau), fmt_f(p.re), fmt_f(p.im), fmt_f(q.re), fmt_f(q.im))?;
            }
            w.flush()?;
            report.wrote(&path, format!("{n} samples on [0, {}], profile error {:.2e}", cfg.tau_max, src.error()));
        }
    }
    Ok(())
}

fn run_dyson(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let spec = cfg.interaction()?;
    let res = cfg.reservoir()?;
    let alpha = assemble_alpha(&spec, &res)?;
    let lmin = cfg.lambda_list.iter().copied().fold(f64::INFINITY, f64::min);
    let model = DysonModel::new(&spec, &res, cfg.t / (lmin * lmin))?;
    let order = 2 * cfg.k;
    let gamma: Vec<usize> = cfg.gamma.as_ref().map(|g| g.iter().map(|v| v - 1).collect()).unwrap_or(vec![0; order]);
    let qmc = QmcOptions {
        points_log2: cfg.qmc_points_log2,
        replicates: cfg.replicates,
        seed: cfg.seed,
        ..QmcOptions::default()
    };
    let path = cfg.out_dir.join("dyson.csv");
    let rates_path = cfg.out_dir.join("rates.csv");
    let mut w = create(&path)?;
    let mut rates = create(&rates_path)?;
    writeln!(w, "gamma,pi,lambda,re_omega,im_omega,stderr,re_u,im_u,abs_err")?;
    writeln!(rates, "gamma,pi,slope,intercept,r_squared")?;
    let pis = cfg.orderings()?;
    for pi in &pis {
        let u = dyson::u_limit(&gamma, pi, cfg.t, &alpha.a, &alpha.b)?;
        let mut errs = Vec::new();
        for &l in &cfg.lambda_list {
            let r = dyson::omega_integral(&model, &gamma, pi, l, cfg.t, OmegaMethod::Qmc(qmc))?;
            if let Some(msg) = &r.warning {
                report.warn(format!("pi {pi}, lambda {l}: {msg}"));
            }
            let err = (r.value - u).norm();
            errs.push(err);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                join_one_based(&gamma),
                join_one_based(pi.values()),
                fmt_f(l),
                fmt_f(r.value.re),
                fmt_f(r.value.im),
                fmt_f(r.stderr),
                fmt_f(u.re),
                fmt_f(u.im),
                fmt_f(err)
            )?;
        }
        match dyson::rate_fit(&cfg.lambda_list, &errs) {
            Ok(fit) => writeln!(
                rates,
                "{},{},{},{},{}",
                join_one_based(&gamma),
                join_one_based(pi.values()),
                fmt_f(fit.slope),
                fmt_f(fit.intercept),
                fmt_f(fit.r_squared)
            )?,
            Err(e) => report.warn(format!("pi {pi}: no rate fit ({e})")),
        }
    }
    w.flush()?;
    rates.flush()?;
    report.wrote(&path, format!("{} orderings x {} couplings at order {order}", pis.len(), cfg.lambda_list.len()));
    report.wrote(&rates_path, "log-log slopes of |omega - U| against lambda");
    Ok(())
}

fn run_bounds(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let path = cfg.out_dir.join("bounds.csv");
    let mut w = create(&path)?;
    writeln!(w, "k,p,lambda,t,g,error,bound,holds")?;
    let mut violations = 0;
    let mut rows = 0;
    for k in 1..=3 {
        for p in 1..=2 {
            for &t in &cfg.bounds_t {
                for &l in &cfg.lambda_list {
                    let g = dyson::gkp_integral(k, p, l, t)?;
                    let holds = g.value <= g.bound;
                    violations += usize::from(!holds);
                    rows += 1;
                    writeln!(w, "{k},{p},{},{},{},{},{},{holds}", fmt_f(l), fmt_f(t), fmt_f(g.value), fmt_f(g.error), fmt_f(g.bound))?;
                }
            }
        }
    }
    w.flush()?;
    if violations > 0 {
        report.warn(format!("{violations} of {rows} corner-simplex integrals exceed their bound"));
    }
    report.wrote(&path, format!("{rows} integrals, {violations} above bound"));
    Ok(())
}

fn run_wick(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let r = wick::wick_check(cfg.seed, cfg.wick_trials)?;
    report.lines.push(format!(
        "wick check: {} trials, max deviation {:.3e} (tolerance {:.0e}), gauge violations {}, polarization violations {}",
        r.trials, r.max_deviation, r.tolerance, r.gauge_violations, r.polarization_violations
    ));
    if !r.passed() {
        report.warn("Wick expansion disagrees with the finite-mode oracle");
    }
    Ok(())
}

fn run_wavepacket(cfg: &RunConfig, report: &mut RunReport) -> CliResult<()> {
    let alpha = match cfg.alpha_override {
        Some(a) => a,
        None => {
            let m = computed_alpha(cfg)?;
            if let Some(msg) = m.warning() {
                report.warn(msg);
            }
            m.alpha[0][0].re
        }
    };
    let packet = cfg.packet(alpha);
    for pair in wavepacket::render_snapshots(&packet)? {
        for grid in [&pair.free, &pair.modified] {
            let stem = format!("{}_t{:.3}", grid.hamiltonian.name(), grid.t);
            let density = wavepacket::GaussianDensity::new(&packet.matrix(grid.t, grid.hamiltonian))?;
            let mass = grid.normalization(&density);
            if (mass - 1.0).abs() > 1e-6 {
                report.warn(format!("{stem}: total probability {mass:.9}"));
            }
            let csv = cfg.out_dir.join(format!("{stem}.csv"));
            let mut w = create(&csv)?;
            grid.write_csv(&mut w)?;
            w.flush()?;
            report.wrote(&csv, format!("{n}x{n} samples, probability {mass:.9}", n = grid.n()));
            let pgm = cfg.out_dir.join(format!("{stem}.pgm"));
            fs::write(&pgm, grid.to_pgm())?;
            let a = grid.anisotropy();
            report.wrote(
                &pgm,
                format!(
                    "peak {:.6e}, major axis ({:.4}, {:.4}), variances {:.4} / {:.4}",
                    grid.max(),
                    a.major_axis[0],
                    a.major_axis[1],
                    a.major_variance,
                    a.minor_variance
                ),
            );
        }
        if pair.t > 0.0 && pair.modified.hamiltonian == Hamiltonian::Modified {
            let diff = pair.free.sup_distance(&pair.modified);
            report.lines.push(format!("t = {}: sup |rho - rho~| = {diff:.4e}", pair.t));
        }
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("WCL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        // a second call fails harmlessly when the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONSTRAINT } else { EXIT_OK };
        }
    };
    configure_threads();
    let loaded = match &cli.opts.config {
        Some(p) => parse_config(p),
        None => Ok(RunConfig::default()),
    };
    let result = loaded.and_then(|mut cfg| {
        cfg.apply(&cli.opts);
        cfg.validate()?;
        run_command(cli.command, &cfg)
    });
    match result {
        Ok(report) => {
            for l in &report.lines {
                println!("{l}");
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
