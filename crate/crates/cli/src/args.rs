//! Command-line flags, the TOML config file and their merge into a spec.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use ellc::channel::ChannelKind;
use ellc::codec::{CodeParams, DEFAULT_LIST_CAP};
use ellc::sim::{CodebookMode, ExperimentSpec, SearchOptions};

/// Population sizes for `scale` when none are given.
pub const DEFAULT_POPULATIONS: [usize; 9] = [25, 50, 75, 100, 125, 150, 175, 200, 225];
/// Erasure probabilities for `sweep` when none are given.
pub const DEFAULT_SWEEP: [f64; 5] = [0.025, 0.05, 0.075, 0.1, 0.125];

#[derive(Debug, Parser)]
#[command(name = "ellc-sim", version, about = "Monte-Carlo simulator for linked-loop codes on erasure channels")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vary the erasure probability.
    Sweep(Common),
    /// Vary the number of users at one erasure probability.
    Scale(Common),
    /// Largest erasure probability that keeps PDP at or below a target.
    Maxpe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check the set/multiset coincidence probability against simulation,
    /// and optionally the codec invariants.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Alphabet size for the coincidence check.
        #[arg(long = "Q", default_value_t = 65536)]
        q: u64,
        /// Also run the codec invariant suite on the configured code.
        #[arg(long)]
        invariants: bool,
    },
    /// Encode payloads (one hex string per line) and pass them through the
    /// channel once.
    Encode {
        #[command(flatten)]
        common: Common,
        /// Payload file; a single `-` reads standard input.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Decode a channel output written by `encode`.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Recovered payloads as hex lines; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    A,
    B,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::A => ChannelKind::AChannel,
            ChannelArg::B => ChannelKind::BChannel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookArg {
    Fresh,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of users; `scale` takes several.
    #[arg(long = "K", value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Sections.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Bits per section.
    #[arg(long = "J")]
    pub j: Option<usize>,
    /// Parity window (window codes only).
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Payload bits.
    #[arg(long = "B")]
    pub b: Option<usize>,
    /// Decoding rounds with erasure filling.
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Erasure probability; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub pe: Vec<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    /// Defaults to on for the B-channel and off for the A-channel.
    #[arg(long, value_enum)]
    pub sic: Option<Switch>,
    /// ellc, llc or tree.
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long, value_enum)]
    pub codebook: Option<CodebookArg>,
    #[arg(long = "list-cap")]
    pub list_cap: Option<usize>,
    /// Output format; inferred from the `--out` extension, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: ELLC_WORKERS, else all cores).
    #[arg(long, env = "ELLC_WORKERS")]
    pub workers: Option<usize>,
    /// No progress lines on standard error.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0.1)]
    pub target: f64,
    #[arg(long, default_value_t = 0.002)]
    pub resolution: f64,
    /// Lowest trial count any probe may use.
    #[arg(long = "min-trials", default_value_t = 50)]
    pub min_trials: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hi: f64,
    /// Always run the full trial count at every probe.
    #[arg(long = "no-early-stop")]
    pub no_early_stop: bool,
}

impl SearchArgs {
    pub fn options(&self, trials: usize) -> SearchOptions {
        SearchOptions {
            target_pdp: self.target,
            resolution: self.resolution,
            trials,
            min_trials: self.min_trials,
            lo: self.lo,
            hi: self.hi,
            early_stop: !self.no_early_stop,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "K")]
    k: Option<OneOrMany<usize>>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "J")]
    j: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "B")]
    b: Option<usize>,
    #[serde(rename = "T")]
    t: Option<usize>,
    pe: Option<OneOrMany<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
    channel: Option<ChannelArg>,
    sic: Option<Switch>,
    code: Option<String>,
    codebook: Option<CodebookArg>,
    #[serde(alias = "list-cap")]
    list_cap: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
    workers: Option<usize>,
}

/// Problems with what the user asked for, reported as usage errors.
#[derive(Debug)]
pub struct Usage(pub String);

impl Common {
    /// Fills unset flags from `--config`.
    pub fn merged(&self) -> Result<Common, Usage> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        let f: FileConfig = toml::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        let mut c = self.clone();
        if c.k.is_empty() {
            c.k = f.k.map(OneOrMany::into_vec).unwrap_or_default();
        }
        if c.pe.is_empty() {
            c.pe = f.pe.map(OneOrMany::into_vec).unwrap_or_default();
        }
        c.l = c.l.or(f.l);
        c.j = c.j.or(f.j);
        c.m = c.m.or(f.m);
        c.b = c.b.or(f.b);
        c.t = c.t.or(f.t);
        c.trials = c.trials.or(f.trials);
        c.seed = c.seed.or(f.seed);
        c.channel = c.channel.or(f.channel);
        c.sic = c.sic.or(f.sic);
        c.code = c.code.or(f.code);
        c.codebook = c.codebook.or(f.codebook);
        c.list_cap = c.list_cap.or(f.list_cap);
        c.format = c.format.or(f.format);
        c.out = c.out.or(f.out);
        c.workers = c.workers.or(f.workers);
        Ok(c)
    }

    /// The experiment these flags describe. `users` and `pe` fall back to the
    /// given defaults when unset.
    pub fn spec(&self, users: usize, pe: &[f64], trials: usize) -> ExperimentSpec {
        let d = CodeParams::default();
        ExperimentSpec {
            users,
            code: self.code.clone().unwrap_or_else(|| "ellc".into()),
            params: CodeParams {
                payload_bits: self.b.unwrap_or(d.payload_bits),
                sections: self.l.unwrap_or(d.sections),
                section_bits: self.j.unwrap_or(d.section_bits),
                window: self.m,
                max_erasures: self.t.unwrap_or(d.max_erasures),
            },
            channel: self.channel.unwrap_or(ChannelArg::B).into(),
            pe: if self.pe.is_empty() { pe.to_vec() } else { self.pe.clone() },
            trials: self.trials.unwrap_or(trials),
            seed: self.seed.unwrap_or(1),
            codebook: match self.codebook {
                Some(CodebookArg::Fixed) => CodebookMode::Fixed,
                _ => CodebookMode::Fresh,
            },
            sic: self.sic.map(|s| s == Switch::On),
            list_cap: self.list_cap.unwrap_or(DEFAULT_LIST_CAP),
        }
    }

    /// The one population size; several are only allowed for `scale`.
    pub fn single_k(&self, default: usize) -> Result<usize, Usage> {
        match self.k[..] {
            [] => Ok(default),
            [k] => Ok(k),
            _ => Err(Usage("--K takes a single value here; use `scale` to vary it".into())),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.out.as_deref().and_then(Path::extension) {
            Some(e) if e == "json" => Format::Json,
            _ => Format::Csv,
        })
    }
}
