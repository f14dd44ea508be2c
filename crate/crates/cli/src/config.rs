use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bergtrace::{PolySymbol, Symbol};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    HeltonHowe,
    SemicommutatorDisk,
    PartialAntisym,
    ConnesChern,
    QuantizationDecay,
    HankelSchatten,
    UncertaintyS4,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::HeltonHowe,
        Experiment::SemicommutatorDisk,
        Experiment::PartialAntisym,
        Experiment::ConnesChern,
        Experiment::QuantizationDecay,
        Experiment::HankelSchatten,
        Experiment::UncertaintyS4,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::HeltonHowe => "helton-howe",
            Experiment::SemicommutatorDisk => "semicommutator-disk",
            Experiment::PartialAntisym => "partial-antisym",
            Experiment::ConnesChern => "connes-chern",
            Experiment::QuantizationDecay => "quantization-decay",
            Experiment::HankelSchatten => "hankel-schatten",
            Experiment::UncertaintyS4 => "uncertainty-s4",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment '{s}'")))
    }
}

/// On-disk form: flat keys only.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    n: usize,
    #[serde(default)]
    fs: Vec<String>,
    #[serde(default)]
    gs: Vec<String>,
    t: Vec<f64>,
    #[serde(rename = "N")]
    degrees: Vec<usize>,
    tolerance: f64,
    k: Option<usize>,
    p: Option<usize>,
    parity: Option<String>,
    seed: Option<u64>,
    budget: Option<usize>,
    out_dir: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub fs: Vec<Symbol>,
    pub gs: Vec<Symbol>,
    /// The literals as written, kept for report metadata.
    pub fs_text: Vec<String>,
    pub gs_text: Vec<String>,
    pub t: Vec<f64>,
    pub degrees: Vec<usize>,
    pub tolerance: f64,
    pub k: usize,
    pub p: usize,
    pub odd: bool,
    pub seed: u64,
    pub budget: usize,
    pub out_dir: Option<String>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn parse_symbols(n: usize, key: &str, texts: &[String]) -> Result<Vec<Symbol>, CliError> {
    texts
        .iter()
        .enumerate()
        .map(|(i, s)| PolySymbol::parse(n, s).map_err(|e| CliError::Config(format!("{key}[{i}] = \"{s}\": {e}"))))
        .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path, id: Option<Experiment>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, id).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates; `id` from the command line wins over the file
    /// but the two must agree when both are given.
    pub fn parse(text: &str, id: Option<Experiment>) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let from_file = raw.experiment.as_deref().map(Experiment::from_str).transpose()?;
        let experiment = match (id, from_file) {
            (Some(a), Some(b)) if a != b => return bad(format!("command line asks for {a} but the config is for {b}")),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return bad("no experiment given"),
        };
        if raw.n == 0 {
            return bad("n must be at least 1");
        }
        if raw.t.is_empty() {
            return bad("t grid is empty");
        }
        if raw.degrees.is_empty() {
            return bad("N grid is empty");
        }
        if let Some(t) = raw.t.iter().find(|t| !t.is_finite() || **t < -1.0) {
            return bad(format!("weight t = {t} must be finite and >= -1"));
        }
        if !(raw.tolerance > 0.0 && raw.tolerance.is_finite()) {
            return bad("tolerance must be positive");
        }
        let fs = parse_symbols(raw.n, "fs", &raw.fs)?;
        let gs = parse_symbols(raw.n, "gs", &raw.gs)?;
        let odd = match raw.parity.as_deref() {
            None | Some("odd") => true,
            Some("even") => false,
            Some(other) => return bad(format!("parity must be odd or even, not '{other}'")),
        };
        let cfg = ExperimentConfig {
            experiment,
            n: raw.n,
            fs,
            gs,
            fs_text: raw.fs,
            gs_text: raw.gs,
            t: raw.t,
            degrees: raw.degrees,
            tolerance: raw.tolerance,
            k: raw.k.unwrap_or(0),
            p: raw.p.unwrap_or(1),
            odd,
            seed: raw.seed.unwrap_or(0),
            budget: raw.budget.unwrap_or(bergtrace::operators::DEFAULT_BUDGET),
            out_dir: raw.out_dir,
        };
        cfg.check_shape()?;
        Ok(cfg)
    }

    fn check_shape(&self) -> Result<(), CliError> {
        let (n, nf, ng, p) = (self.n, self.fs.len(), self.gs.len(), self.p);
        match self.experiment {
            Experiment::HeltonHowe if nf != 2 * n => bad(format!("helton-howe needs 2n = {} symbols in fs", 2 * n)),
            Experiment::SemicommutatorDisk if n != 1 || nf != 1 || ng != 1 => {
                bad("semicommutator-disk needs n = 1 and one symbol in each of fs and gs")
            }
            Experiment::PartialAntisym if nf != n || ng != n => bad(format!("partial-antisym needs n = {n} symbols in fs and gs")),
            Experiment::ConnesChern if p <= n || nf != 2 * p => {
                bad(format!("connes-chern needs p > n and 2p symbols in fs (p = {p}, {nf} given)"))
            }
            Experiment::QuantizationDecay if n != 1 || nf != 1 || ng != 1 => {
                bad("quantization-decay needs n = 1 and one symbol in each of fs and gs")
            }
            Experiment::QuantizationDecay if self.t.len() < 2 || self.t.iter().any(|&t| t <= 0.0) => {
                bad("quantization-decay fits a slope: give at least two positive weights")
            }
            Experiment::HankelSchatten if nf != 1 || !(p > n || (p == 1 && n == 1)) => {
                bad("hankel-schatten needs one symbol and either p > n or p = n = 1")
            }
            Experiment::UncertaintyS4 if n != 2 || nf != 2 => bad("uncertainty-s4 needs n = 2 and two symbols in fs"),
            _ => Ok(()),
        }
    }
}
