//! Run configuration: one typed key table per command, fed by an optional
//! JSON/TOML file and overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgAction, ArgMatches};
use serde_json::{Map, Number, Value};

pub const TOOL: &str = "yles";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: expected {expected}, got `{got}`")]
    Type {
        key: String,
        expected: &'static str,
        got: String,
    },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("cannot read config `{path}`: {reason}")]
    File { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Help(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    EdScan,
    SpectralFlow,
    Quench,
    Response,
    Scaling,
    Floquet,
    Feasibility,
    ReproduceFig1,
    ReproduceFig3,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::EdScan,
        Command::SpectralFlow,
        Command::Quench,
        Command::Response,
        Command::Scaling,
        Command::Floquet,
        Command::Feasibility,
        Command::ReproduceFig1,
        Command::ReproduceFig3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::EdScan => "ed-scan",
            Command::SpectralFlow => "spectral-flow",
            Command::Quench => "quench",
            Command::Response => "response",
            Command::Scaling => "scaling",
            Command::Floquet => "floquet",
            Command::Feasibility => "feasibility",
            Command::ReproduceFig1 => "reproduce-fig1",
            Command::ReproduceFig3 => "reproduce-fig3",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Command::EdScan => "Ground-state γ scan by exact diagonalization",
            Command::SpectralFlow => "Full complex spectrum at a list of γ values",
            Command::Quench => "Time series of one nonunitary quench",
            Command::Response => "Dynamical order parameter M_x(T) over γ and its kink",
            Command::Scaling => "Finite-size extrapolation and exponent fit from an L,gamma_yl CSV",
            Command::Floquet => "Dense Floquet emulation compared with direct evolution",
            Command::Feasibility => "Rydberg coupling derivation and timing checks",
            Command::ReproduceFig1 => "Static scan and spectral flow at L = 8",
            Command::ReproduceFig3 => "tMPS response curves for L = 8..16 and the scaling fits",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::Usage(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text,
    IntList,
}

impl Kind {
    fn expected(self) -> &'static str {
        match self {
            Kind::Int => "a non-negative integer",
            Kind::Float => "a number",
            Kind::Text => "a string",
            Kind::IntList => "a comma-separated list of integers",
        }
    }

    /// Parse a flag token.
    fn parse(self, key: &str, raw: &str) -> Result<Value, ConfigError> {
        let err = || ConfigError::Type {
            key: key.into(),
            expected: self.expected(),
            got: raw.into(),
        };
        match self {
            Kind::Int => raw.trim().parse::<u64>().map(Value::from).map_err(|_| err()),
            Kind::Float => raw
                .trim()
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map(Value::Number)
                .ok_or_else(err),
            Kind::Text => Ok(Value::String(raw.into())),
            Kind::IntList => raw
                .split(',')
                .map(|t| t.trim().parse::<u64>().map(Value::from))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
                .map_err(|_| err()),
        }
    }

    /// Check and normalize a value read from a config file.
    fn coerce(self, key: &str, v: &Value) -> Result<Value, ConfigError> {
        let err = || ConfigError::Type {
            key: key.into(),
            expected: self.expected(),
            got: v.to_string(),
        };
        match (self, v) {
            (Kind::Int, Value::Number(n)) if n.is_u64() => Ok(v.clone()),
            (Kind::Float, Value::Number(n)) => n
                .as_f64()
                .and_then(Number::from_f64)
                .map(Value::Number)
                .ok_or_else(err),
            (Kind::Text, Value::String(_)) => Ok(v.clone()),
            (Kind::IntList, Value::Array(items)) if items.iter().all(|i| i.is_u64()) => Ok(v.clone()),
            (Kind::IntList, Value::String(s)) => self.parse(key, s),
            _ => Err(err()),
        }
    }
}

/// One configurable key: flag `--{name}`, file key `{name}`.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` marks a required key; `Some("")` an optional key without default.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        kind,
        default: Some(default),
        help,
    }
}

const L8: Key = key("L", Kind::Int, "8", "chain length");
const J: Key = key("J", Kind::Float, "1", "Ising coupling");
const HX: Key = key("hx", Kind::Float, "1.5", "transverse field");
const T: Key = key("T", Kind::Float, "20", "measurement time in units of 1/J");
const BACKEND: Key = key("backend", Kind::Text, "auto", "propagator: auto, ed or mps");
const DT: Key = key("dt", Kind::Float, "0.05", "Trotter step");
const CUTOFF: Key = key("cutoff", Kind::Float, "1e-10", "relative singular-value cutoff");
const CHI: Key = key("chi-max", Kind::Int, "64", "maximal bond dimension");
const PSI0: Key = key("initial-state", Kind::Text, "all-down", "initial product state: all-down or y-left");
const DEGREE: Key = key("degree", Kind::Int, "2", "polynomial degree of the 1/L extrapolation");

/// Keys accepted by `command`, excluding `output-dir` and `seed`.
pub fn schema(command: Command) -> Vec<Key> {
    let scan_window = |lo: &'static str, hi: &'static str, step: &'static str| {
        vec![
            key("gamma-min", Kind::Float, lo, "first γ"),
            key("gamma-max", Kind::Float, hi, "last γ"),
            key("gamma-step", Kind::Float, step, "γ spacing"),
        ]
    };
    let mps = [BACKEND, DT, CUTOFF, CHI, PSI0];
    match command {
        Command::EdScan | Command::ReproduceFig1 => {
            let mut k = vec![L8, J, HX];
            k.extend(scan_window("0", "0.35", "0.0025"));
            if command == Command::ReproduceFig1 {
                k.push(key("flow-gammas", Kind::Text, "0,0.1,0.1837,0.25", "comma-separated γ values of the spectral flow"));
            }
            k
        }
        Command::SpectralFlow => {
            let mut k = vec![key("L", Kind::Int, "6", "chain length"), J, HX];
            k.extend(scan_window("0", "0.35", "0.05"));
            k
        }
        Command::Quench => {
            let mut k = vec![L8, J, HX, key("gamma", Kind::Float, "0.25", "loss rate γ"), T];
            k.extend(mps);
            k.push(key("sample-interval", Kind::Float, "0.1", "time between samples"));
            k
        }
        Command::Response => {
            let mut k = vec![L8, J, HX, T];
            k.extend(scan_window("0", "0.35", "0.005"));
            k.extend(mps);
            k
        }
        Command::Scaling => vec![
            Key {
                name: "input",
                kind: Kind::Text,
                default: None,
                help: "CSV with header L,gamma_yl",
            },
            DEGREE,
        ],
        Command::Floquet => {
            let mut k = vec![
                key("L", Kind::Int, "6", "chain length (at most 10)"),
                J,
                HX,
                key("gamma", Kind::Float, "0.25", "loss rate γ"),
                key("T", Kind::Float, "10", "evolution time in units of 1/J"),
                key("n-cycles", Kind::Int, "50", "Floquet cycles N"),
                key("j0", Kind::Float, "5", "native coupling J0 in units of J"),
                key("tau-x", Kind::Float, "0.1", "field pulse duration in units of 1/J"),
                key("tau-gamma", Kind::Float, "0.05", "loss pulse duration in units of 1/J"),
                key("tau-j", Kind::Float, "", "dressing duration; checked against N when given"),
                key("tau-se", Kind::Float, "0", "echo pulse duration in units of 1/J"),
            ];
            k.push(PSI0);
            k
        }
        Command::Feasibility => vec![
            key("L", Kind::Int, "6", "chain length of the emulated schedule"),
            key("omega-mhz", Kind::Float, "6.8", "dressing Rabi frequency Ω/2π in MHz"),
            key("delta-mhz", Kind::Float, "22", "dressing detuning Δ/2π in MHz"),
            key("gamma-ryd-khz", Kind::Float, "1.1", "Rydberg linewidth Γ/2π in kHz"),
            key("gamma-laser-khz", Kind::Float, "7", "laser linewidth γ_l/2π in kHz"),
            key("r-um", Kind::Float, "3.4", "atom spacing in µm"),
            key("c6-ghz-um6", Kind::Float, "360", "C6/2π in GHz·µm⁶"),
            key("tau-ryd-us", Kind::Float, "148", "Rydberg lifetime in µs"),
            key("omega-mw-khz", Kind::Float, "70", "microwave Rabi frequency Ω_MW/2π in kHz"),
            key("j0-khz", Kind::Float, "", "schedule coupling J0/2π in kHz; derived when absent"),
        ],
        Command::ReproduceFig3 => {
            let mut k = vec![
                key("sizes", Kind::IntList, "8,10,12,14,16", "chain lengths"),
                J,
                HX,
                T,
            ];
            k.extend(scan_window("0.1", "0.25", "0.005"));
            k.extend([key("backend", Kind::Text, "mps", "propagator: auto, ed or mps"), DT, CUTOFF, CHI, PSI0, DEGREE]);
            k
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: BTreeMap<String, Value>,
    pub output_dir: PathBuf,
    /// Reserved; every algorithm is deterministic.
    pub seed: u64,
}

impl RunConfig {
    fn get(&self, key: &str) -> Result<&Value, ConfigError> {
        self.parameters
            .get(key)
            .ok_or_else(|| ConfigError::Missing(key.into()))
    }

    pub fn int(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.get(key)?;
        v.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| type_error(key, Kind::Int, v))
    }

    pub fn float(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.get(key)?;
        v.as_f64().ok_or_else(|| type_error(key, Kind::Float, v))
    }

    pub fn opt_float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.parameters.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => self.float(key).map(Some),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str, ConfigError> {
        let v = self.get(key)?;
        v.as_str().ok_or_else(|| type_error(key, Kind::Text, v))
    }

    pub fn int_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let v = self.get(key)?;
        v.as_array()
            .and_then(|a| a.iter().map(|i| i.as_u64().map(|n| n as usize)).collect())
            .ok_or_else(|| type_error(key, Kind::IntList, v))
    }

    /// Parse a typed value from a text key.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let raw = self.text(key)?;
        raw.parse().map_err(|_| ConfigError::Type {
            key: key.into(),
            expected: "a recognised value",
            got: raw.into(),
        })
    }

    /// Comma-separated floats stored under a text key.
    pub fn float_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.text(key)?;
        raw.split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ConfigError::Type {
                key: key.into(),
                expected: "a comma-separated list of numbers",
                got: raw.into(),
            })
    }

    /// `{tool, version, command, parameters, output_dir, seed}`.
    pub fn manifest(&self, outputs: &[String]) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), TOOL.into());
        m.insert("version".into(), VERSION.into());
        m.insert("command".into(), self.command.name().into());
        m.insert(
            "parameters".into(),
            Value::Object(self.parameters.clone().into_iter().collect()),
        );
        m.insert("output_dir".into(), self.output_dir.display().to_string().into());
        m.insert("seed".into(), self.seed.into());
        m.insert("outputs".into(), outputs.iter().cloned().map(Value::from).collect());
        Value::Object(m)
    }
}

fn type_error(key: &str, kind: Kind, v: &Value) -> ConfigError {
    ConfigError::Type {
        key: key.into(),
        expected: kind.expected(),
        got: v.to_string(),
    }
}

/// Clap definition generated from the key tables.
pub fn cli() -> clap::Command {
    let mut root = clap::Command::new(TOOL)
        .version(VERSION)
        .about("Yang–Lee edge singularity experiments on the non-Hermitian transverse-field Ising chain")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for command in Command::ALL {
        let mut sub = clap::Command::new(command.name()).about(command.about());
        for k in schema(command)
            .into_iter()
            .chain([
                key("output-dir", Kind::Text, DEFAULT_OUTPUT_DIR, "directory receiving all artifacts"),
                key("seed", Kind::Int, "0", "reserved; all algorithms are deterministic"),
            ])
        {
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name("VALUE")
                    .help(k.help)
                    .action(ArgAction::Set),
            );
        }
        sub = sub.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("JSON or TOML file of keys; flags take precedence"),
        );
        root = root.subcommand(sub);
    }
    root
}

/// Flat key map from a JSON or TOML file; a previous `manifest.json` is accepted too.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let file_err = |reason: String| ConfigError::File {
        path: path.display().to_string(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let value: Value = if is_toml {
        toml::from_str(&text).map_err(|e| file_err(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))?
    };
    let Value::Object(mut map) = value else {
        return Err(file_err("top level must be a table of keys".into()));
    };
    if map.get("tool").and_then(Value::as_str) == Some(TOOL) {
        let mut flat = match map.remove("parameters") {
            Some(Value::Object(p)) => p,
            _ => return Err(file_err("manifest without a parameters table".into())),
        };
        for k in ["command", "output_dir", "seed"] {
            if let Some(v) = map.remove(k) {
                flat.insert(k.replace('_', "-"), v);
            }
        }
        return Ok(flat);
    }
    Ok(map)
}

/// Resolve `argv` (program name first) into a [`RunConfig`].
pub fn parse_config(argv: &[String]) -> Result<RunConfig, ConfigError> {
    let matches = cli()
        .try_get_matches_from(argv)
        .map_err(|e| {
            let text = e.render().to_string();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ConfigError::Help(text)
                }
                _ => ConfigError::Usage(text),
            }
        })?;
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| ConfigError::Usage("a command is required".into()))?;
    let command: Command = name.parse()?;
    let file = match sub.get_one::<String>("config") {
        Some(p) => read_config_file(Path::new(p))?,
        None => Map::new(),
    };
    resolve(command, file, sub)
}

fn resolve(command: Command, mut file: Map<String, Value>, sub: &ArgMatches) -> Result<RunConfig, ConfigError> {
    if let Some(v) = file.remove("command") {
        if v.as_str() != Some(command.name()) {
            return Err(ConfigError::Type {
                key: "command".into(),
                expected: "the invoked command",
                got: v.to_string(),
            });
        }
    }
    let table = schema(command);
    let meta = [
        key("output-dir", Kind::Text, DEFAULT_OUTPUT_DIR, ""),
        key("seed", Kind::Int, "0", ""),
    ];
    if let Some(unknown) = file
        .keys()
        .find(|k| !table.iter().chain(&meta).any(|t| t.name == k.as_str()))
    {
        return Err(ConfigError::UnknownKey(unknown.clone()));
    }
    let mut resolved = BTreeMap::new();
    for k in table.iter().chain(&meta) {
        let flag = sub.get_one::<String>(k.name);
        let value = match (flag, file.get(k.name)) {
            (Some(raw), _) => Some(k.kind.parse(&format!("--{}", k.name), raw)?),
            (None, Some(Value::Null)) => None,
            (None, Some(v)) => Some(k.kind.coerce(k.name, v)?),
            (None, None) => match k.default {
                None => return Err(ConfigError::Missing(k.name.into())),
                Some("") => None,
                Some(d) => Some(k.kind.parse(k.name, d)?),
            },
        };
        resolved.insert(k.name.to_string(), value.unwrap_or(Value::Null));
    }
    let output_dir = PathBuf::from(resolved.remove("output-dir").and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
    let seed = resolved.remove("seed").and_then(|v| v.as_u64()).unwrap_or(0);
    Ok(RunConfig {
        command,
        parameters: resolved,
        output_dir,
        seed,
    })
}
