//! The `abeta` command line.
//!
//! Every subcommand reads a parameter file (all-ones constant-rate model when
//! `--params` is absent), validates it, writes CSV artifacts and a `run.meta`
//! provenance file. `--out` names a directory, or a `.csv` file whose parent
//! directory then receives `run.meta`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::ModelConfig;
use crate::diagnostics::{self, SuiteSettings};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::model::{validate, RateKind, RateModel};
use crate::ode::{self, OdeOptions, OdeState};
use crate::pde::{
    picard_solve, run_coupled, CoupledSettings, DensitySpec, InitialData, PicardSettings, TimeScheme,
};
use crate::stability::{analyze, find_steady_state, LyapunovCertificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "abeta", version, about = "Amyloid-beta / PrP-C plaque model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the closed ODE system (constant rates).
    SimulateOde(OdeArgs),
    /// Solve the size-structured problem on a grid, optionally by Picard iteration.
    SimulatePde(PdeArgs),
    /// Positive equilibrium.
    Equilibrium(EqArgs),
    /// Jacobian, characteristic coefficients, Routh–Hurwitz and eigenvalues.
    Stability(EqArgs),
    /// Lyapunov function along a trajectory (alpha = 0).
    Lyapunov(LyapunovArgs),
    /// Balance laws, invariant bounds and solver cross-checks.
    Check(CheckArgs),
    /// Equilibrium and stability over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// `key = value` parameter file.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override one key after reading the file, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replace the rate model: `constant(rho,mu)` or `power_law(c,theta,mu)`.
    #[arg(long)]
    rates: Option<String>,
    /// Output directory, or a `.csv` file.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct Initial {
    #[arg(long, default_value_t = 1.0)]
    u0: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    #[arg(long, default_value_t = 1.0)]
    b0: f64,
    /// Initial plaque density: `zero`, `exp_decay(scale[,total])` or `table(path)`.
    #[arg(long, default_value = "exp_decay(1)")]
    density: String,
    /// Upper end of the size domain.
    #[arg(long, default_value_t = 40.0)]
    x_max: f64,
}

impl Initial {
    fn data(&self) -> Result<InitialData> {
        Ok(InitialData { u: self.u0, p: self.p0, b: self.b0, density: DensitySpec::parse(&self.density)? })
    }

    fn describe(&self) -> String {
        format!(
            "u0={};p0={};b0={};density={};x_max={}",
            fmt_f64(self.u0),
            fmt_f64(self.p0),
            fmt_f64(self.b0),
            self.density,
            fmt_f64(self.x_max)
        )
    }
}

#[derive(Debug, Args)]
struct OdeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    initial: Initial,
    /// Initial plaque count; defaults to the zeroth moment of the density.
    #[arg(long)]
    a0: Option<f64>,
    /// Initial plaque mass; defaults to the first moment of the density.
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Record this many equal intervals instead of every accepted step.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Heun,
    Split,
}

#[derive(Debug, Args)]
struct PdeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    initial: Initial,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 2000)]
    cells: usize,
    /// Fixed time step; the CFL-limited step is used otherwise.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scheme::Heun)]
    scheme: Scheme,
    /// Extra density snapshot times, comma separated. The initial and final
    /// densities are always written.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
    /// Also run the Picard fixed-point solver.
    #[arg(long)]
    picard: bool,
    #[arg(long, default_value_t = 50)]
    picard_steps: usize,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
}

#[derive(Debug, Args)]
struct EqArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
}

#[derive(Debug, Args)]
struct LyapunovArgs {
    #[command(flatten)]
    common: Common,
    /// Initial state `A,u,p,b,M`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 1.0, 1.0, 2.0])]
    state: Vec<f64>,
    #[arg(long, default_value_t = 20.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    initial: Initial,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 2000)]
    cells: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// `name=lo:hi:count` or `name=log:lo:hi:count`; repeat for a grid.
    #[arg(long, required = true)]
    vary: Vec<String>,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

/// One swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("bad --vary `{text}`: expected name=lo:hi:count or name=log:lo:hi:count"));
        let (name, range) = text.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let (log, nums) = match parts.as_slice() {
            ["log", rest @ ..] => (true, rest),
            rest => (false, rest),
        };
        let [lo, hi, count] = nums else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 || !lo.is_finite() || !hi.is_finite() || (log && !(lo > 0.0 && hi > 0.0)) {
            return Err(bad());
        }
        let values = (0..count)
            .map(|i| {
                if count == 1 {
                    return lo;
                }
                let w = i as f64 / (count - 1) as f64;
                if i == count - 1 {
                    hi
                } else if log {
                    (lo.ln() + w * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + w * (hi - lo)
                }
            })
            .collect();
        Ok(SweepAxis { name: name.trim().to_string(), values })
    }
}

/// Cartesian product of the axes, last axis fastest.
pub fn sweep_grid(base: &ModelConfig, axes: &[SweepAxis]) -> Result<Vec<ModelConfig>> {
    let mut out = vec![*base];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.values.len());
        for cfg in &out {
            for &v in &axis.values {
                let mut c = *cfg;
                c.set(&axis.name, v)?;
                next.push(c);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Sweep result columns after the parameter columns.
pub const SWEEP_COLUMNS: [&str; 14] = [
    "u_inf", "A_inf", "p_inf", "b_inf", "a1", "a2", "a3", "a4", "rh_margin", "cond1", "cond2", "cond3", "lyap_ok",
    "status",
];

/// One sweep row after the parameter columns.
pub fn sweep_row(cfg: &ModelConfig, tol: f64) -> Vec<String> {
    let eval = || -> Result<Vec<String>> {
        validate(&cfg.params, &cfg.rates).into_result()?;
        let ss = find_steady_state(&cfg.params, &cfg.rates, tol)?;
        let st = analyze(&ss, &cfg.params, &cfg.rates)?;
        let mut row: Vec<String> = [ss.u_inf, ss.a_inf, ss.p_inf, ss.b_inf].iter().map(|v| fmt_f64(*v)).collect();
        row.extend(st.coefficients.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(st.routh_hurwitz.margin));
        row.extend([st.chain.cond1, st.chain.cond2, st.chain.cond3].iter().map(|v| fmt_f64(*v)));
        row.push(st.lyapunov_ok.to_string());
        row.push("ok".into());
        Ok(row)
    };
    eval().unwrap_or_else(|e| {
        let mut row = vec!["NaN".to_string(); SWEEP_COLUMNS.len() - 2];
        row.push("false".into());
        row.push(e.to_string());
        row
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

struct Output {
    dir: PathBuf,
    file: Option<PathBuf>,
}

impl Output {
    fn new(out: &Path) -> Result<Self> {
        let is_file = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let (dir, file) = if is_file {
            let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            (dir.to_path_buf(), Some(out.to_path_buf()))
        } else {
            (out.to_path_buf(), None)
        };
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir, file })
    }

    /// The main artifact: `--out` itself when it is a file.
    fn main_path(&self, default: &str) -> PathBuf {
        self.file.clone().unwrap_or_else(|| self.dir.join(default))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn create(path: &Path) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
    }

    fn write_meta(&self, command: &str, cfg: &ModelConfig, settings: &str, started: Instant) -> Result<()> {
        let mut h = Sha256::new();
        h.update(cfg.to_config_string().as_bytes());
        h.update([0u8]);
        h.update(settings.as_bytes());
        let mut text = String::new();
        let _ = writeln!(text, "command={command}");
        let _ = writeln!(text, "config_hash={}", hex::encode(h.finalize()));
        let _ = writeln!(text, "version={}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "settings={settings}");
        let _ = writeln!(text, "wall_time_s={:.6}", started.elapsed().as_secs_f64());
        let mut w = Self::create(&self.path("run.meta"))?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn load(common: &Common) -> Result<ModelConfig> {
    let mut cfg = match &common.params {
        Some(p) => ModelConfig::from_file(p)?,
        None => ModelConfig::unit(),
    };
    for o in &common.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Argument(format!("bad --set `{o}`: expected key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Argument(format!("bad value in --set `{o}`")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(r) = &common.rates {
        cfg.rates = RateModel::new(parse_rates(r)?, cfg.params.x0);
    }
    validate(&cfg.params, &cfg.rates).into_result()?;
    Ok(cfg)
}

/// `constant(rho,mu)` or `power_law(c,theta,mu)`.
pub fn parse_rates(text: &str) -> Result<RateKind> {
    let bad = || Error::Argument(format!("bad rate model `{text}`: expected constant(rho,mu) or power_law(c,theta,mu)"));
    let t = text.trim();
    let (name, rest) = t.split_once('(').ok_or_else(bad)?;
    let inner = rest.strip_suffix(')').ok_or_else(bad)?;
    let v = inner.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<f64>>>()?;
    match (name.trim(), v.as_slice()) {
        ("constant", [rho, mu]) => Ok(RateKind::Constant { rho: *rho, mu: *mu }),
        ("power_law", [c, theta, mu]) => Ok(RateKind::PowerLaw { c: *c, theta: *theta, mu: *mu }),
        _ => Err(bad()),
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    let started = Instant::now();
    match cmd {
        Command::SimulateOde(a) => simulate_ode(a, started),
        Command::SimulatePde(a) => simulate_pde(a, started),
        Command::Equilibrium(a) => equilibrium(a, started),
        Command::Stability(a) => stability(a, started),
        Command::Lyapunov(a) => lyapunov(a, started),
        Command::Check(a) => check(a, started),
        Command::Sweep(a) => sweep(a, started),
    }
}

fn simulate_ode(a: OdeArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let data = a.initial.data()?;
    let x0 = cfg.params.x0;
    let plaques = a.a0.unwrap_or_else(|| data.density.moment(0.0, x0, a.initial.x_max, x0));
    let mass = a.m0.unwrap_or_else(|| data.density.moment(1.0, x0, a.initial.x_max, x0));
    let start = OdeState::new(plaques, data.u, data.p, data.b, mass);
    let mut opts = OdeOptions::with_tolerance(a.tol);
    if let Some(k) = a.samples.filter(|&k| k > 0) {
        opts = opts.sampled_at((1..k).map(|i| a.t_end * i as f64 / k as f64).collect());
    }
    let traj = ode::integrate(&start, &cfg.params, &cfg.rates, a.t_end, &opts)?;
    let mut w = Output::create(&out.main_path("trajectory.csv"))?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    let last = traj.last();
    println!(
        "t = {}  A = {}  u = {}  p = {}  b = {}  M = {}",
        a.t_end, last.plaques, last.oligomer, last.prion, last.complex, last.mass
    );
    let settings = format!("A0={};M0={};T={};tol={};{}", fmt_f64(plaques), fmt_f64(mass), fmt_f64(a.t_end), fmt_f64(a.tol), a.initial.describe());
    out.write_meta("simulate-ode", &cfg, &settings, started)?;
    Ok(EXIT_OK)
}

fn simulate_pde(a: PdeArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let data = a.initial.data()?;
    let state = data.state(cfg.params.x0, a.initial.x_max, a.cells)?;
    let settings = CoupledSettings {
        dt: a.dt,
        scheme: match a.scheme {
            Scheme::Heun => TimeScheme::Heun,
            Scheme::Split => TimeScheme::SplitEuler,
        },
        snapshot_times: snapshot_times(&a.snapshots, a.t_end),
        ..CoupledSettings::default()
    };
    let run = run_coupled(state, a.t_end, &settings, &cfg.params, &cfg.rates)?;
    let mut w = Output::create(&out.main_path("moments.csv"))?;
    run.write_moments_csv(&mut w)?;
    w.flush()?;
    let mut w = Output::create(&out.path("density.csv"))?;
    run.write_density_csv(&mut w)?;
    w.flush()?;
    for msg in &run.warnings {
        eprintln!("warning: {msg}");
    }
    let s = run.samples.last().expect("a run has samples");
    println!("t = {}  u = {}  p = {}  b = {}  M0 = {}  M1 = {}  steps = {}", s.t, s.u, s.p, s.b, s.m0, s.m1, run.steps);

    if a.picard {
        let ps = PicardSettings { time_steps: a.picard_steps, tol: a.tol, x_max: a.initial.x_max, ..PicardSettings::default() };
        let res = picard_solve(&data.density, [data.u, data.p, data.b], a.t_end, &ps, &cfg.params, &cfg.rates)?;
        let mut w = csv::Writer::from_path(out.path("picard.csv"))?;
        w.write_record(["t", "u", "p", "b", "rho_integral"])?;
        for i in 0..res.times.len() {
            w.write_record([res.times[i], res.u[i], res.p[i], res.b[i], res.rho_integral[i]].map(fmt_f64))?;
        }
        w.flush()?;
        println!(
            "picard: {} iterations, converged = {}, max contraction ratio = {}",
            res.iterations,
            res.converged,
            res.max_ratio()
        );
    }
    let meta = format!(
        "T={};cells={};dt={:?};scheme={:?};picard={};{}",
        fmt_f64(a.t_end),
        a.cells,
        a.dt,
        a.scheme,
        a.picard,
        a.initial.describe()
    );
    out.write_meta("simulate-pde", &cfg, &meta, started)?;
    Ok(EXIT_OK)
}

/// Requested snapshots plus the initial and final times, sorted.
fn snapshot_times(requested: &[f64], t_end: f64) -> Vec<f64> {
    let mut t: Vec<f64> = requested.iter().copied().filter(|v| (0.0..=t_end).contains(v)).collect();
    t.push(0.0);
    t.push(t_end);
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn equilibrium(a: EqArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let ss = find_steady_state(&cfg.params, &cfg.rates, a.tol)?;
    let fields = [
        ("u_inf", ss.u_inf),
        ("A_inf", ss.a_inf),
        ("p_inf", ss.p_inf),
        ("b_inf", ss.b_inf),
        ("M_inf", ss.m_inf),
        ("tau_star", ss.tau_star),
        ("a", ss.a_coeff),
        ("q_value", ss.q_value),
        ("residual", ss.residual),
        ("binding_residual", ss.binding_residual),
    ];
    let mut w = csv::Writer::from_path(out.main_path("equilibrium.csv"))?;
    w.write_record(fields.iter().map(|f| f.0))?;
    w.write_record(fields.iter().map(|f| fmt_f64(f.1)))?;
    w.flush()?;
    for (k, v) in &fields[..5] {
        println!("{k} = {v}");
    }
    out.write_meta("equilibrium", &cfg, &format!("tol={}", fmt_f64(a.tol)), started)?;
    Ok(EXIT_OK)
}

fn stability(a: EqArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let ss = find_steady_state(&cfg.params, &cfg.rates, a.tol)?;
    let st = analyze(&ss, &cfg.params, &cfg.rates)?;
    let mut header: Vec<String> = ["a1", "a2", "a3", "a4", "rh_margin", "rh_stable"].map(String::from).to_vec();
    let mut row: Vec<String> = st.coefficients.iter().map(|v| fmt_f64(*v)).collect();
    row.push(fmt_f64(st.routh_hurwitz.margin));
    row.push(st.routh_hurwitz.stable().to_string());
    for (i, z) in st.eigenvalues.iter().enumerate() {
        header.push(format!("eig{}_re", i + 1));
        header.push(format!("eig{}_im", i + 1));
        row.push(fmt_f64(z.re));
        row.push(fmt_f64(z.im));
    }
    header.extend(["trace", "cond1", "cond2", "cond3", "lyap_ok"].map(String::from));
    row.extend([st.trace(), st.chain.cond1, st.chain.cond2, st.chain.cond3].map(fmt_f64));
    row.push(st.lyapunov_ok.to_string());
    let mut w = csv::Writer::from_path(out.main_path("stability.csv"))?;
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;

    let mut j = csv::Writer::from_path(out.path("jacobian.csv"))?;
    j.write_record(["row", "A", "u", "p", "b"])?;
    for (i, r) in st.jacobian.iter().enumerate() {
        let mut rec = vec![["A", "u", "p", "b"][i].to_string()];
        rec.extend(r.iter().map(|v| fmt_f64(*v)));
        j.write_record(&rec)?;
    }
    j.flush()?;

    let c = st.coefficients;
    println!("a = [{}, {}, {}, {}]", c[0], c[1], c[2], c[3]);
    println!("rh_margin = {}  stable = {}", st.routh_hurwitz.margin, st.routh_hurwitz.stable());
    println!("max Re(lambda) = {}", st.max_real_part());
    println!("lyap_ok = {}", st.lyapunov_ok);
    out.write_meta("stability", &cfg, &format!("tol={}", fmt_f64(a.tol)), started)?;
    Ok(EXIT_OK)
}

fn lyapunov(a: LyapunovArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let ss = find_steady_state(&cfg.params, &cfg.rates, 1e-13)?;
    let cert = LyapunovCertificate::new(&ss, &cfg.params, &cfg.rates)?;
    let s = &a.state;
    if s.len() != 5 {
        return Err(Error::Argument(format!("--state needs five values A,u,p,b,M, got {}", s.len())));
    }
    let start = OdeState::new(s[0], s[1], s[2], s[3], s[4]);
    let traj = ode::integrate(&start, &cfg.params, &cfg.rates, a.t_end, &OdeOptions::with_tolerance(a.tol))?;
    let mut w = csv::Writer::from_path(out.main_path("lyapunov.csv"))?;
    w.write_record(["t", "phi", "phi_dot", "phi_dot_chain"])?;
    let mut rises = 0.0f64;
    let mut prev: Option<f64> = None;
    for (t, st) in traj.times.iter().zip(&traj.states) {
        let v = cert.evaluate(st);
        w.write_record([*t, v.phi, v.phi_dot, v.phi_dot_chain].map(fmt_f64))?;
        if let Some(p) = prev {
            rises = rises.max(v.phi - p);
        }
        prev = Some(v.phi);
    }
    w.flush()?;
    println!("theta1 = {}  theta2 = {}  s1 = {}", cert.t1, cert.t2, cert.s1);
    println!("phi(0) = {}  phi(T) = {}  largest increase = {}", cert.evaluate(&start).phi, prev.unwrap_or(0.0), rises);
    let settings = format!("state={:?};T={};tol={}", start.to_array(), fmt_f64(a.t_end), fmt_f64(a.tol));
    out.write_meta("lyapunov", &cfg, &settings, started)?;
    Ok(EXIT_OK)
}

fn check(a: CheckArgs, started: Instant) -> Result<i32> {
    let cfg = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let settings = SuiteSettings {
        t_end: a.t_end,
        cells: a.cells,
        x_max: a.initial.x_max,
        ode_rtol: a.tol,
        initial: a.initial.data()?,
    };
    let reports = diagnostics::run_suite(&cfg.params, &cfg.rates, &settings)?;
    let mut w = Output::create(&out.main_path("checks.csv"))?;
    diagnostics::write_reports(&reports, &mut w)?;
    w.flush()?;
    for r in &reports {
        println!("{:<22} {}  violation {:.3e}  tolerance {:.3e}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.max_violation, r.tolerance);
    }
    let meta = format!("T={};cells={};tol={};{}", fmt_f64(a.t_end), a.cells, fmt_f64(a.tol), a.initial.describe());
    out.write_meta("check", &cfg, &meta, started)?;
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VALIDATION })
}

fn sweep(a: SweepArgs, started: Instant) -> Result<i32> {
    let base = load(&a.common)?;
    let out = Output::new(&a.common.out)?;
    let axes = a.vary.iter().map(|v| SweepAxis::parse(v)).collect::<Result<Vec<_>>>()?;
    let grid = sweep_grid(&base, &axes)?;
    let compute = || grid.par_iter().map(|c| sweep_row(c, a.tol)).collect::<Vec<_>>();
    let rows = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Argument(format!("thread pool: {e}")))?
            .install(compute),
        None => compute(),
    };

    let mut w = csv::Writer::from_path(out.main_path("sweep.csv"))?;
    let mut header: Vec<&str> = base.columns().iter().map(|c| c.0).collect();
    header.extend(SWEEP_COLUMNS);
    w.write_record(&header)?;
    for (cfg, row) in grid.iter().zip(rows) {
        let mut rec: Vec<String> = cfg.columns().iter().map(|c| fmt_f64(c.1)).collect();
        rec.extend(row);
        w.write_record(&rec)?;
    }
    w.flush()?;
    println!("{} sweep points", grid.len());
    let meta = format!("vary={};tol={}", a.vary.join(","), fmt_f64(a.tol));
    out.write_meta("sweep", &base, &meta, started)?;
    Ok(EXIT_OK)
}
