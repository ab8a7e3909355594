//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on numerical failure or a failed check,
//! 2 on invalid arguments.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::mode;
use crate::potential::{PotentialProfile, ProfileKind, ProfileSpec};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{self, sig9};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Reproduce the radiated-energy table.
    Table6,
    /// Density snapshots `x,t,T00R`.
    Pulse,
    /// Static vacuum energy.
    StaticEnergy,
    /// Mode amplitude over time.
    ModeTrace,
    /// Step switch-off spectrum and total.
    StepCase,
    /// Quasi-static spectrum, total and optional rational sweep.
    Quasistatic,
    /// Run the oracle cross-checks.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Static,
    Step,
    Rational,
}

impl From<ProfileArg> for ProfileKind {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Static => ProfileKind::Static,
            ProfileArg::Step => ProfileKind::Step,
            ProfileArg::Rational => ProfileKind::Rational,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "negpulse",
    about = "Negative-energy pulses from a switched-off delta potential",
    allow_negative_numbers = true
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long = "command", value_enum)]
    pub command_flag: Option<Command>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Initial coupling λ₀.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Rate parameter of the rational switch-off (f₂ > λ₀).
    #[arg(long)]
    pub f2: Option<f64>,
    /// Step duration (default 100/λ₀).
    #[arg(long = "T")]
    pub duration: Option<f64>,
    /// Mode frequency for mode-trace.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Snapshot time(s); repeatable.
    #[arg(long = "t")]
    pub t: Vec<f64>,
    #[arg(long)]
    pub xmin: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    /// Grid points in x (pulse) or in the spectrum (step-case, quasistatic).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Time samples for mode-trace.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Frequency cutoff Λ of the spectral integrals.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
    /// Number of `f₂ → λ₀⁺` points for the quasi-static sweep.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully merged run settings. Also the schema of `--config` files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub profile: ProfileSpec,
    pub omega: Option<f64>,
    pub t: Vec<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_x: Option<usize>,
    pub n_t: Option<usize>,
    pub cutoff: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub sweep: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn apply(&mut self, args: Args) -> Result<(), CliError> {
        if args.command.is_some() && args.command_flag.is_some() && args.command != args.command_flag {
            return Err(CliError::Usage(
                "positional command and --command disagree".into(),
            ));
        }
        if let Some(c) = args.command.or(args.command_flag) {
            self.command = Some(c);
        }
        macro_rules! take {
            ($($dst:expr => $src:expr),* $(,)?) => {
                $(if let Some(v) = $src { $dst = Some(v); })*
            };
        }
        take!(
            self.profile.kind => args.profile.map(ProfileKind::from),
            self.profile.lambda0 => args.lambda0,
            self.profile.f2 => args.f2,
            self.profile.duration => args.duration,
            self.omega => args.omega,
            self.x_min => args.xmin,
            self.x_max => args.xmax,
            self.n_x => args.nx,
            self.n_t => args.nt,
            self.cutoff => args.cutoff,
            self.rel_tol => args.rel_tol,
            self.abs_tol => args.abs_tol,
            self.sweep => args.sweep,
            self.format => args.format,
            self.out => args.out,
        );
        if !args.t.is_empty() {
            self.t = args.t;
        }
        Ok(())
    }

    fn quad(&self, default_cutoff: f64) -> Result<QuadratureSpec, CliError> {
        let base = QuadratureSpec::default();
        let spec = QuadratureSpec {
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            cutoff: self.cutoff.unwrap_or(default_cutoff),
            ..base
        };
        spec.validate().map_err(CliError::from)?;
        Ok(spec)
    }

    /// Profile from the settings; an absent kind defaults to rational
    /// `λ₀ = 1, f₂ = 2`, or to rational when `f₂` alone is given.
    fn profile(&self) -> Result<PotentialProfile, CliError> {
        let mut spec = self.profile.clone();
        if spec.kind.is_none() {
            spec.kind = Some(ProfileKind::Rational);
            if spec.lambda0.is_none() && spec.f2.is_none() {
                spec.lambda0 = Some(1.0);
                spec.f2 = Some(2.0);
            }
        }
        if spec.lambda0.is_none() && spec.samples.is_none() {
            spec.lambda0 = Some(1.0);
        }
        spec.build().map_err(CliError::from)
    }

    fn lambda0(&self) -> f64 {
        self.profile.lambda0.unwrap_or(1.0)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(std::io::Error),
    ChecksFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidProfile(_)
            | Error::NoSwitchOff
            | Error::Domain { .. }
            | Error::InvalidQuadrature(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `argv`, runs the command and writes the report to `--out` or
/// `stdout`. Returns the process exit status.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(args) {
        Ok((text, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text.as_bytes()),
                None => stdout.write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "{}", CliError::Io(e));
                    1
                }
            }
        }
        Err((e, partial)) => {
            if let Some(text) = partial {
                let _ = stdout.write_all(text.as_bytes());
            }
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

type Outcome = Result<(String, Option<PathBuf>), (CliError, Option<String>)>;
type Reported = Result<String, (CliError, Option<String>)>;

fn execute(args: Args) -> Outcome {
    let mut config = match &args.config {
        Some(path) => load_config(path).map_err(|e| (e, None))?,
        None => RunConfig::default(),
    };
    config.apply(args).map_err(|e| (e, None))?;
    let command = config
        .command
        .ok_or_else(|| (CliError::Usage("no command given".into()), None))?;
    let out = config.out.clone();
    let text = match command {
        Command::Table6 => return table6(&config).map(|t| (t, out)),
        Command::Verify => return verify_cmd().map(|t| (t, out)),
        Command::Pulse => pulse(&config),
        Command::StaticEnergy => static_energy(&config),
        Command::ModeTrace => mode_trace(&config),
        Command::StepCase => step_case(&config),
        Command::Quasistatic => quasistatic(&config),
    };
    text.map(|t| (t, out)).map_err(|e| (e, None))
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values always serialize");
    s.push('\n');
    s
}

fn table6(config: &RunConfig) -> Reported {
    let quad = config.quad(100.0).map_err(|e| (e, None))?;
    let rows: Vec<(f64, f64, Option<f64>)> = match (config.profile.f2, config.profile.lambda0) {
        (Some(f2), Some(l0)) => {
            let printed = verify::TABLE
                .iter()
                .find(|(f, l, _)| *f == f2 && *l == l0)
                .map(|(_, _, e)| *e);
            vec![(f2, l0, printed)]
        }
        (None, None) => verify::TABLE.iter().map(|(f, l, e)| (*f, *l, Some(*e))).collect(),
        _ => {
            return Err((
                CliError::Usage("single-row mode needs both --f2 and --lambda0".into()),
                None,
            ))
        }
    };

    let format = config.format.unwrap_or(Format::Csv);
    let mut records = Vec::new();
    let mut failures = 0;
    for (f2, l0, printed) in rows {
        let profile = PotentialProfile::rational(l0, f2).map_err(|e| (e.into(), None))?;
        let report = spectral::radiated_energy(&profile, &quad).map_err(|e| (e.into(), None))?;
        let status = match printed {
            Some(p) if (report.e_radiated_half - p).abs() <= verify::printed_tolerance(p) => "PASS",
            Some(_) => {
                failures += 1;
                "FAIL"
            }
            None => "n/a",
        };
        records.push((report, printed, status));
    }

    let text = match format {
        Format::Csv => {
            let mut s = String::from("f2,lambda0,T,E_half,E_reference,tail_estimate,status\n");
            for (r, printed, status) in &records {
                let reference = printed.map(|p| p.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.f2.unwrap_or(f64::NAN),
                    r.lambda0,
                    sig9(r.duration),
                    sig9(r.e_radiated_half),
                    reference,
                    sig9(r.tail_estimate),
                    status
                );
            }
            s
        }
        Format::Json => to_json(&json!(records
            .iter()
            .map(|(r, printed, status)| json!({"report": r, "E_reference": printed, "status": status}))
            .collect::<Vec<_>>())),
    };
    if failures > 0 {
        Err((CliError::ChecksFailed(failures), Some(text)))
    } else {
        Ok(text)
    }
}

fn pulse(config: &RunConfig) -> Result<String, CliError> {
    let profile = config.profile()?;
    let end = profile.switch_off_duration()?;
    let quad = config.quad(100.0)?;
    let times = if config.t.is_empty() {
        vec![end]
    } else {
        config.t.clone()
    };
    let reach = times.iter().cloned().fold(0.0, f64::max) + 0.5 * end;
    let x_min = config.x_min.unwrap_or(-reach);
    let x_max = config.x_max.unwrap_or(reach);
    let n_x = config.n_x.unwrap_or(101);
    if n_x < 1 || !(x_min < x_max) {
        return Err(CliError::Usage(format!(
            "bad grid: [{x_min}, {x_max}] with {n_x} points"
        )));
    }
    let xs = linspace(x_min, x_max, n_x);
    let samples = spectral::pulse_density_grid(&xs, &times, &profile, &quad)?;
    Ok(match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            spectral::write_density_csv(&mut buf, &samples)?;
            String::from_utf8(buf).expect("csv is ascii")
        }
        Format::Json => to_json(&json!(samples)),
    })
}

fn static_energy(config: &RunConfig) -> Result<String, CliError> {
    let lambda0 = config.lambda0();
    if !(lambda0 >= 0.0) {
        return Err(CliError::Usage(format!("lambda0 must be >= 0, got {lambda0}")));
    }
    let quad = config.quad(1e4)?;
    let e_k = spectral::static_total_energy(lambda0);
    let continuum = spectral::static_density_continuum(lambda0, quad.cutoff, &quad)?;
    Ok(match config.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "lambda0": lambda0,
            "E_K": e_k,
            "L_T00R_numeric": continuum,
            "cutoff": quad.cutoff,
        })),
        Format::Csv => format!(
            "lambda0,E_K,L_T00R_numeric,cutoff\n{},{},{},{}\n",
            lambda0,
            sig9(e_k),
            sig9(continuum),
            quad.cutoff
        ),
    })
}

fn mode_trace(config: &RunConfig) -> Result<String, CliError> {
    let profile = config.profile()?;
    let omega = config.omega.unwrap_or(1.0);
    let t_end = match config.t.last() {
        Some(t) => *t,
        None => profile.switch_off_duration().unwrap_or(1.0),
    };
    let n_t = config.n_t.unwrap_or(101);
    if n_t < 1 || !(t_end >= 0.0) {
        return Err(CliError::Usage(format!(
            "bad time grid: [0, {t_end}] with {n_t} points"
        )));
    }
    let mut rows = Vec::with_capacity(n_t);
    for t in linspace(0.0, t_end, n_t) {
        rows.push((t, mode::amplitude(omega, &profile, t)?));
    }
    Ok(match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("t,Re(C),Im(C),|C|\n");
            for (t, c) in rows {
                let _ = writeln!(s, "{},{},{},{}", sig9(t), sig9(c.re), sig9(c.im), sig9(c.norm()));
            }
            s
        }
        Format::Json => to_json(&json!(rows
            .iter()
            .map(|(t, c)| json!({"t": t, "re": c.re, "im": c.im, "abs": c.norm()}))
            .collect::<Vec<_>>())),
    })
}

fn spectrum_grid(config: &RunConfig) -> Vec<f64> {
    let n = config.n_x.unwrap_or(50).max(1);
    let top = config.x_max.unwrap_or(10.0);
    (1..=n).map(|i| top * i as f64 / n as f64).collect()
}

fn step_case(config: &RunConfig) -> Result<String, CliError> {
    let lambda0 = config.lambda0();
    if !(lambda0 > 0.0) {
        return Err(CliError::Usage(format!("lambda0 must be > 0, got {lambda0}")));
    }
    let quad = config.quad(1e4)?;
    let spectrum: Vec<(f64, f64)> = spectrum_grid(config)
        .into_iter()
        .map(|w| (w, spectral::step_mode_energy_change(w, lambda0)))
        .collect();
    let total = spectral::step_total_energy_change(lambda0, &quad)?;
    Ok(match config.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "lambda0": lambda0,
            "spectrum": spectrum,
            "all_negative": spectrum.iter().all(|(_, d)| *d < 0.0),
            "total": total.value,
            "total_closed_form": spectral::step_total_closed(lambda0),
            "cutoff": quad.cutoff,
            "tail_estimate": total.tail,
        })),
        Format::Csv => {
            let mut s = String::from("omega,delta_xi\n");
            for (w, d) in &spectrum {
                let _ = writeln!(s, "{},{}", sig9(*w), sig9(*d));
            }
            s
        }
    })
}

fn quasistatic(config: &RunConfig) -> Result<String, CliError> {
    let lambda0 = config.lambda0();
    if !(lambda0 > 0.0) {
        return Err(CliError::Usage(format!("lambda0 must be > 0, got {lambda0}")));
    }
    let quad = config.quad(1e4)?;
    // the per-mode quasi-static change depends only on λ₀
    let profile = PotentialProfile::step(lambda0, 1.0)?;
    let mut spectrum = Vec::new();
    for w in spectrum_grid(config) {
        spectrum.push((w, spectral::quasistatic_mode_energy_change(w, &profile)?));
    }
    let numeric = spectral::quasistatic_total_numeric(lambda0, &quad)?;

    let mut sweep = Vec::new();
    if let Some(n) = config.sweep {
        let pulse_quad = config.quad(100.0)?;
        for k in 0..n {
            let f2 = lambda0 * (1.0 + 0.5f64.powi(k as i32));
            let p = PotentialProfile::rational(lambda0, f2)?;
            let r = spectral::radiated_energy(&p, &pulse_quad)?;
            sweep.push(json!({"f2": f2, "T": r.duration, "E_radiated_total": r.e_radiated_total}));
        }
    }

    Ok(match config.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "lambda0": lambda0,
            "spectrum": spectrum,
            "total_numeric": numeric.value,
            "total_closed_form": spectral::quasistatic_total(lambda0),
            "E_K": spectral::static_total_energy(lambda0),
            "balance": spectral::static_total_energy(lambda0) + numeric.value,
            "cutoff": quad.cutoff,
            "sweep": sweep,
        })),
        Format::Csv => {
            let mut s = String::from("omega,delta_xi\n");
            for (w, d) in &spectrum {
                let _ = writeln!(s, "{},{}", sig9(*w), sig9(*d));
            }
            s
        }
    })
}

fn verify_cmd() -> Reported {
    let checks = verify::run_all().map_err(|e| (e.into(), None))?;
    let mut text = String::new();
    let mut failures = 0;
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            failures += 1;
        }
        let _ = writeln!(
            text,
            "{:<45} deviation {:.3e}  threshold {:.1e}  {verdict}",
            c.name, c.deviation, c.threshold
        );
    }
    if failures > 0 {
        Err((CliError::ChecksFailed(failures), Some(text)))
    } else {
        Ok(text)
    }
}
