//! `emr-dlt` command-line front end.
//!
//! Settings are resolved in three layers: built-in defaults, an optional
//! `key=value` config file (`--config`), then explicit flags. Every run
//! writes `manifest.txt` with the resolved settings next to its outputs.
//! All output files are a pure function of the resolved settings.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::degree_dist::{
    raptor_user_dist, reference_relay_dist, robust_soliton, DegreeDistribution, Perspective,
};
use crate::density_evolution::{overhead_grid, write_curve_csv, DecoderModel};
use crate::emr_sim::{default_max_phases, run_campaign, CampaignResult, NetworkConfig, RelayMode};
use crate::error::Error;
use crate::lp_design::{design_report, sweep_design, DesignParams, PowerBasis};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Design,
    DeCurve,
    Simulate,
    Compare,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Design => "design",
            CommandKind::DeCurve => "de-curve",
            CommandKind::Simulate => "simulate",
            CommandKind::Compare => "compare",
        }
    }
}

/// Encoder used by the uncoded-relay baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum UserDistSpec {
    Degree1,
    Rsd,
    Raptor,
    File(PathBuf),
}

impl std::str::FromStr for UserDistSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "degree1" => UserDistSpec::Degree1,
            "rsd" => UserDistSpec::Rsd,
            "raptor" => UserDistSpec::Raptor,
            "" => return Err(Error::Config("empty user distribution".into())),
            path => UserDistSpec::File(PathBuf::from(path)),
        })
    }
}

impl std::fmt::Display for UserDistSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UserDistSpec::Degree1 => f.write_str("degree1"),
            UserDistSpec::Rsd => f.write_str("rsd"),
            UserDistSpec::Raptor => f.write_str("raptor"),
            UserDistSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub users: usize,
    pub k: usize,
    /// One value for all users, or one per user.
    pub eps_up: Vec<f64>,
    pub eps_down: Vec<f64>,
    /// `None` selects the built-in ten-user reference design.
    pub relay_dist: Option<PathBuf>,
    pub user_dist: UserDistSpec,
    pub rsd_c: f64,
    pub rsd_sigma: f64,
    pub delta: f64,
    /// `None` means `D = users`.
    pub max_degree: Option<usize>,
    pub m: usize,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_step: f64,
    pub basis: PowerBasis,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: RelayMode,
    pub compare_buffer: bool,
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_step: f64,
    /// `None` means `5 (r-1) K`.
    pub max_phases: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            users: 10,
            k: 1000,
            eps_up: vec![0.0],
            eps_down: vec![0.1],
            relay_dist: None,
            user_dist: UserDistSpec::Rsd,
            rsd_c: 0.03,
            rsd_sigma: 0.05,
            delta: 0.02,
            max_degree: None,
            m: 200,
            sweep_start: 1.0,
            sweep_stop: 20.0,
            sweep_step: 0.05,
            basis: PowerBasis::Relay,
            trials: 100,
            seed: 1,
            out: PathBuf::from("out"),
            mode: RelayMode::Buffered,
            compare_buffer: false,
            grid_start: 0.0,
            grid_stop: 2.5,
            grid_step: 0.05,
            max_phases: None,
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad probability '{v}'")))
        })
        .collect()
}

fn join_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_val<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
}

fn parse_opt<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>, Error> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_val(key, v).map(Some)
    }
}

impl ExperimentConfig {
    /// Sets one key. Keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let v = value.trim();
        match key.trim() {
            "users" => self.users = parse_val(key, v)?,
            "k" => self.k = parse_val(key, v)?,
            "eps-up" => self.eps_up = parse_list(v)?,
            "eps-down" => self.eps_down = parse_list(v)?,
            "relay-dist" => {
                self.relay_dist = (v != "builtin").then(|| PathBuf::from(v));
            }
            "user-dist" => self.user_dist = v.parse()?,
            "rsd-c" => self.rsd_c = parse_val(key, v)?,
            "rsd-sigma" => self.rsd_sigma = parse_val(key, v)?,
            "delta" => self.delta = parse_val(key, v)?,
            "max-degree" => self.max_degree = parse_opt(key, v)?,
            "m" => self.m = parse_val(key, v)?,
            "sweep-start" => self.sweep_start = parse_val(key, v)?,
            "sweep-stop" => self.sweep_stop = parse_val(key, v)?,
            "sweep-step" => self.sweep_step = parse_val(key, v)?,
            "basis" => self.basis = v.parse()?,
            "trials" => self.trials = parse_val(key, v)?,
            "seed" => self.seed = parse_val(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "mode" => self.mode = v.parse()?,
            "compare-buffer" => self.compare_buffer = parse_val(key, v)?,
            "grid-start" => self.grid_start = parse_val(key, v)?,
            "grid-stop" => self.grid_stop = parse_val(key, v)?,
            "grid-step" => self.grid_step = parse_val(key, v)?,
            "max-phases" => self.max_phases = parse_opt(key, v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Serialises every key; `from_text(to_text())` gives back `self`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let mut s = String::new();
        let _ = writeln!(s, "users={}", self.users);
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "eps-up={}", join_list(&self.eps_up));
        let _ = writeln!(s, "eps-down={}", join_list(&self.eps_down));
        let _ = writeln!(
            s,
            "relay-dist={}",
            self.relay_dist
                .as_ref()
                .map_or_else(|| "builtin".to_string(), |p| p.display().to_string())
        );
        let _ = writeln!(s, "user-dist={}", self.user_dist);
        let _ = writeln!(s, "rsd-c={}", self.rsd_c);
        let _ = writeln!(s, "rsd-sigma={}", self.rsd_sigma);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "max-degree={}", opt(self.max_degree.map(|d| d.to_string())));
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "sweep-start={}", self.sweep_start);
        let _ = writeln!(s, "sweep-stop={}", self.sweep_stop);
        let _ = writeln!(s, "sweep-step={}", self.sweep_step);
        let _ = writeln!(s, "basis={}", self.basis);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "out={}", self.out.display());
        let _ = writeln!(s, "mode={}", self.mode);
        let _ = writeln!(s, "compare-buffer={}", self.compare_buffer);
        let _ = writeln!(s, "grid-start={}", self.grid_start);
        let _ = writeln!(s, "grid-stop={}", self.grid_stop);
        let _ = writeln!(s, "grid-step={}", self.grid_step);
        let _ = writeln!(s, "max-phases={}", opt(self.max_phases.map(|d| d.to_string())));
        s
    }

    fn per_user(&self, v: &[f64], name: &str) -> Result<Vec<f64>, Error> {
        match v.len() {
            1 => Ok(vec![v[0]; self.users]),
            n if n == self.users => Ok(v.to_vec()),
            n => Err(Error::Config(format!(
                "{name} lists {n} values for {} users",
                self.users
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.users < 2 {
            return Err(Error::Config("users must be at least 2".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        for v in self.per_user(&self.eps_up, "eps-up")?.iter().chain(&self.per_user(&self.eps_down, "eps-down")?) {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Config(format!("erasure probability {v} outside [0,1]")));
            }
        }
        overhead_grid(self.grid_start, self.grid_stop, self.grid_step)
            .map_err(|e| Error::Config(e.to_string()))?;
        overhead_grid(self.sweep_start, self.sweep_stop, self.sweep_step)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn overhead_grid(&self) -> Vec<f64> {
        overhead_grid(self.grid_start, self.grid_stop, self.grid_step).unwrap_or_default()
    }

    pub fn design_params(&self) -> DesignParams {
        DesignParams {
            r: self.users,
            max_degree: self.max_degree.unwrap_or(self.users),
            delta: self.delta,
            m: self.m,
            sweep_grid: overhead_grid(self.sweep_start, self.sweep_stop, self.sweep_step)
                .unwrap_or_default(),
            basis: self.basis,
        }
    }

    /// Loads the relay distribution; a bad file is a configuration error.
    pub fn relay_distribution(&self) -> Result<DegreeDistribution, Error> {
        let dist = match &self.relay_dist {
            None => reference_relay_dist(),
            Some(path) => DegreeDistribution::read_file(path).map_err(|e| {
                Error::Config(format!("relay distribution {}: {e}", path.display()))
            })?,
        };
        if dist.perspective() != Perspective::Node {
            return Err(Error::Config("relay distribution must be node perspective".into()));
        }
        Ok(dist)
    }

    pub fn user_distribution(&self) -> Result<DegreeDistribution, Error> {
        let dist = match &self.user_dist {
            UserDistSpec::Degree1 => DegreeDistribution::single(Perspective::Node, 1),
            UserDistSpec::Rsd => robust_soliton(self.k, self.rsd_c, self.rsd_sigma)
                .map_err(|e| Error::Config(e.to_string()))?,
            UserDistSpec::Raptor => raptor_user_dist(),
            UserDistSpec::File(path) => DegreeDistribution::read_file(path).map_err(|e| {
                Error::Config(format!("user distribution {}: {e}", path.display()))
            })?,
        };
        if dist.perspective() != Perspective::Node {
            return Err(Error::Config("user distribution must be node perspective".into()));
        }
        Ok(dist)
    }

    /// Network for the coded relay modes (user encoders send single bits).
    pub fn network(&self, mode: RelayMode) -> Result<NetworkConfig, Error> {
        let gamma = self.relay_distribution()?;
        let omega = match mode {
            RelayMode::UncodedBroadcast => self.user_distribution()?,
            _ => DegreeDistribution::single(Perspective::Node, 1),
        };
        let net = NetworkConfig {
            r: self.users,
            k: self.k,
            eps_up: self.per_user(&self.eps_up, "eps-up")?,
            eps_down: self.per_user(&self.eps_down, "eps-down")?,
            omega,
            gamma,
            relay_mode: mode,
            max_broadcast_phases: self
                .max_phases
                .unwrap_or_else(|| default_max_phases(self.users, self.k)),
            seed: self.seed,
        };
        net.validate()?;
        Ok(net)
    }
}

#[derive(Debug, Parser)]
#[command(name = "emr-dlt", version, about = "Distributed LT codes over an erasure multi-way relay channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a relay distribution by LP sweep.
    Design(Flags),
    /// Asymptotic erasure rate against overhead for a relay distribution.
    DeCurve(Flags),
    /// Monte Carlo campaign in one relay mode.
    Simulate(Flags),
    /// Buffered, unbuffered and uncoded relays on common random numbers.
    Compare(Flags),
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// key=value file applied before the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// uplink erasure probability, or a comma-separated per-user list
    #[arg(long)]
    pub eps_up: Option<String>,
    /// downlink erasure probability, or a comma-separated per-user list
    #[arg(long)]
    pub eps_down: Option<String>,
    /// relay distribution file; `builtin` for the ten-user reference design
    #[arg(long)]
    pub relay_dist: Option<String>,
    /// uncoded-baseline encoder: degree1, rsd, raptor or a file
    #[arg(long)]
    pub user_dist: Option<String>,
    #[arg(long)]
    pub rsd_c: Option<f64>,
    #[arg(long)]
    pub rsd_sigma: Option<f64>,
    /// target erasure rate of the design
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    /// design grid points
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub sweep_start: Option<f64>,
    #[arg(long)]
    pub sweep_stop: Option<f64>,
    #[arg(long)]
    pub sweep_step: Option<f64>,
    /// relay LP power basis: relay or residual
    #[arg(long)]
    pub basis: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// buffered, unbuffered or uncoded
    #[arg(long)]
    pub mode: Option<String>,
    /// also run unbuffered and lossless-uplink campaigns
    #[arg(long)]
    pub compare_buffer: bool,
    #[arg(long)]
    pub grid_start: Option<f64>,
    #[arg(long)]
    pub grid_stop: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub max_phases: Option<u64>,
    /// worker threads; defaults to the available parallelism
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        macro_rules! push {
            ($key:literal, $field:expr) => {
                if let Some(x) = &$field {
                    v.push(($key, x.to_string()));
                }
            };
        }
        push!("users", self.users);
        push!("k", self.k);
        push!("eps-up", self.eps_up);
        push!("eps-down", self.eps_down);
        push!("relay-dist", self.relay_dist);
        push!("user-dist", self.user_dist);
        push!("rsd-c", self.rsd_c);
        push!("rsd-sigma", self.rsd_sigma);
        push!("delta", self.delta);
        push!("max-degree", self.max_degree);
        push!("m", self.m);
        push!("sweep-start", self.sweep_start);
        push!("sweep-stop", self.sweep_stop);
        push!("sweep-step", self.sweep_step);
        push!("basis", self.basis);
        push!("trials", self.trials);
        push!("seed", self.seed);
        push!("mode", self.mode);
        push!("grid-start", self.grid_start);
        push!("grid-stop", self.grid_stop);
        push!("grid-step", self.grid_step);
        push!("max-phases", self.max_phases);
        if let Some(out) = &self.out {
            v.push(("out", out.display().to_string()));
        }
        if self.compare_buffer {
            v.push(("compare-buffer", "true".into()));
        }
        v
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_text(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        for (key, value) in self.overrides() {
            cfg.set(key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::InvalidDistribution(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Output of a run: files written (relative to `out`) and a short report.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<String>,
    pub lines: Vec<String>,
}

struct Outputs<'a> {
    dir: &'a Path,
    report: RunReport,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.report.files.push(name.to_string());
        Ok(())
    }

    fn campaign(&mut self, stem: &str, c: &CampaignResult) -> Result<(), CliError> {
        let mut csv = Vec::new();
        c.write_csv(&mut csv).expect("in-memory write");
        self.write(&format!("{stem}.csv"), &csv)?;
        let mut summary = Vec::new();
        c.write_summary(&mut summary).expect("in-memory write");
        self.write(&format!("{stem}_summary.txt"), &summary)?;
        self.report.lines.push(format!(
            "{stem}: success={:.3} mean_overhead={} mean_transmission_overhead={}",
            c.success_fraction,
            c.mean_overhead.map_or("none".into(), |v| format!("{v:.4}")),
            c.mean_tx_overhead.map_or("none".into(), |v| format!("{v:.4}")),
        ));
        Ok(())
    }

    fn de_curve(&mut self, gamma: &DegreeDistribution, cfg: &ExperimentConfig) -> Result<(), CliError> {
        let model = DecoderModel::new(gamma, cfg.users)?;
        let curve = model.curve(&cfg.overhead_grid())?;
        let mut csv = Vec::new();
        write_curve_csv(&mut csv, &curve).expect("in-memory write");
        self.write("de_curve.csv", &csv)?;
        if let Ok(t) = model.threshold_overhead(cfg.delta) {
            self.report
                .lines
                .push(format!("asymptotic overhead at erasure {}: {t:.6}", cfg.delta));
        }
        Ok(())
    }
}

/// Runs one command with resolved settings and writes its outputs.
pub fn execute(kind: CommandKind, cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", cfg.out.display()))
    })?;
    let mut out = Outputs {
        dir: &cfg.out,
        report: RunReport::default(),
    };
    let grid = cfg.overhead_grid();
    match kind {
        CommandKind::Design => {
            let params = cfg.design_params();
            let result = sweep_design(&params)?;
            out.write("design_report.txt", design_report(&params, &result).as_bytes())?;
            out.write("relay.dist", result.gamma_node.to_text().as_bytes())?;
            out.report.lines.push(format!(
                "selected gamma_bar={:.4} lp_overhead={:.6} design_overhead={:.6}",
                result.sweep_parameter, result.lp_overhead, result.design_overhead
            ));
            out.de_curve(&result.gamma_node, cfg)?;
        }
        CommandKind::DeCurve => {
            out.de_curve(&cfg.relay_distribution()?, cfg)?;
        }
        CommandKind::Simulate => {
            let net = cfg.network(cfg.mode)?;
            let c = run_campaign(&net, cfg.trials, &grid)?;
            out.campaign(&format!("sim_{}", cfg.mode), &c)?;
            if cfg.compare_buffer {
                let other = match cfg.mode {
                    RelayMode::Unbuffered => RelayMode::Buffered,
                    _ => RelayMode::Unbuffered,
                };
                let c = run_campaign(&cfg.network(other)?, cfg.trials, &grid)?;
                out.campaign(&format!("sim_{other}"), &c)?;
                let mut lossless = cfg.network(RelayMode::Buffered)?;
                lossless.eps_up = vec![0.0; cfg.users];
                let c = run_campaign(&lossless, cfg.trials, &grid)?;
                out.campaign("sim_buffered_lossless", &c)?;
            }
            if cfg.mode != RelayMode::UncodedBroadcast {
                out.de_curve(&net.gamma, cfg)?;
            }
        }
        CommandKind::Compare => {
            for mode in [RelayMode::Buffered, RelayMode::Unbuffered, RelayMode::UncodedBroadcast] {
                let c = run_campaign(&cfg.network(mode)?, cfg.trials, &grid)?;
                out.campaign(&format!("sim_{mode}"), &c)?;
            }
            out.de_curve(&cfg.relay_distribution()?, cfg)?;
        }
    }
    let mut manifest = format!(
        "# emr-dlt {}\ncommand={}\n",
        env!("CARGO_PKG_VERSION"),
        kind.name()
    );
    manifest.push_str(&cfg.to_text());
    for f in &out.report.files {
        let _ = writeln!(manifest, "output={f}");
    }
    out.write("manifest.txt", manifest.as_bytes())?;
    Ok(out.report)
}

/// Parses arguments, runs, and maps failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(report) => {
            for line in report.lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<RunReport, CliError> {
    let (kind, flags) = match cli.command {
        Command::Design(f) => (CommandKind::Design, f),
        Command::DeCurve(f) => (CommandKind::DeCurve, f),
        Command::Simulate(f) => (CommandKind::Simulate, f),
        Command::Compare(f) => (CommandKind::Compare, f),
    };
    let cfg = flags.resolve()?;
    let workers = flags
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Usage("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| execute(kind, &cfg))
}
