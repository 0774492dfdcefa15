//! Benchmark configuration: one JSON document, with command-line flags
//! taking precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use omnitrack::controllers::{MotionPattern, PatternConfig, Variant};
use omnitrack::evaluator::{ReferenceKind, RunConfig, TrackerSpec};
use omnitrack::measures::ReportParams;
use omnitrack::spherevideo::{load_manifest, SourceSequence};
use omnitrack::synthetic::SyntheticSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// A source manifest, or a directory whose `*.json` files are manifests.
    pub dataset: Option<PathBuf>,
    /// Procedural sources evaluated alongside the dataset.
    pub synthetic: Vec<SyntheticSpec>,
    pub patterns: Vec<PatternConfig>,
    pub width: u32,
    pub height: u32,
    pub run: RunConfig,
    pub tracker: Option<TrackerSpec>,
    pub output: PathBuf,
    /// Global seed; fills the run seed and every pattern seed not set
    /// explicitly.
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    pub report: ReportParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            synthetic: Vec::new(),
            patterns: Variant::ALL
                .iter()
                .map(|v| PatternConfig::variant(v.name()))
                .collect(),
            width: 640,
            height: 480,
            run: RunConfig::default(),
            tracker: None,
            output: PathBuf::from("out"),
            seed: 0,
            workers: 0,
            report: ReportParams::default(),
        }
    }
}

/// Flag overrides shared by the config-driven subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Configuration file (JSON).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Source manifest or directory of manifests.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Add the three stock synthetic sources with this many frames.
    #[arg(long, value_name = "FRAMES")]
    pub synthetic: Option<usize>,
    /// Face size of the stock synthetic sources.
    #[arg(long, default_value_t = 128, requires = "synthetic")]
    pub synthetic_face: usize,
    /// Restrict to these patterns (repeatable).
    #[arg(long = "pattern", short)]
    pub patterns: Vec<String>,
    /// Restrict to these sequence ids (repeatable).
    #[arg(long = "sequence", short)]
    pub sequences: Vec<String>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Built-in tracker: echo, static or noisy_echo:SIGMA.
    #[arg(long, conflicts_with = "tracker_command")]
    pub tracker: Option<String>,
    /// External tracker command line, speaking the protocol on stdio.
    #[arg(long, num_args = 1.., allow_hyphen_values = true, value_terminator = ";")]
    pub tracker_command: Option<Vec<String>>,
    /// Name for the external tracker (defaults to the program file name).
    #[arg(long)]
    pub tracker_name: Option<String>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Response timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub reinit_skip: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub failure_overlap: Option<f64>,
}

/// Parses `echo`, `static` or `noisy_echo:SIGMA`.
pub fn parse_reference(s: &str) -> Result<ReferenceKind> {
    Ok(match s {
        "echo" => ReferenceKind::Echo,
        "static" => ReferenceKind::Static,
        _ => match s.strip_prefix("noisy_echo:") {
            Some(sigma) => ReferenceKind::NoisyEcho {
                sigma: sigma
                    .parse()
                    .with_context(|| format!("bad sigma in {s:?}"))?,
            },
            None => bail!("unknown built-in tracker {s:?} (echo, static, noisy_echo:SIGMA)"),
        },
    })
}

/// One source to evaluate, remembering where it came from.
#[derive(Debug, Clone)]
pub struct Source {
    pub sequence: SourceSequence,
    pub origin: serde_json::Value,
}

/// Configuration with every default and seed filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: BenchConfig,
    pub patterns: Vec<MotionPattern>,
    pub sources: Vec<Source>,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Loads the config file (if any) and applies the flags.
    pub fn from_overrides(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(d) = &o.dataset {
            c.dataset = Some(d.clone());
        }
        if let Some(n) = o.synthetic {
            c.synthetic
                .extend(SyntheticSpec::stock(n, o.synthetic_face));
        }
        if !o.patterns.is_empty() {
            let mut picked = Vec::new();
            for name in &o.patterns {
                let v: Variant = name.parse()?;
                // keep overrides from the file for patterns it configures
                let existing = c
                    .patterns
                    .iter()
                    .find(|p| p.variant.parse::<Variant>().ok() == Some(v));
                picked.push(
                    existing
                        .cloned()
                        .unwrap_or_else(|| PatternConfig::variant(v.name())),
                );
            }
            c.patterns = picked;
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = o.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(width => width, height => height, output => output, seed => seed, workers => workers,
             repetitions => run.repetitions, timeout => run.timeout, reinit_skip => run.reinit_skip,
             burn_in => run.burn_in, failure_overlap => run.failure_overlap);
        if let Some(b) = o.burn_in {
            c.report.burn_in = b;
        }
        if let Some(t) = &o.tracker {
            c.tracker = Some(TrackerSpec::reference(parse_reference(t)?));
        }
        if let Some(cmd) = &o.tracker_command {
            let name = match &o.tracker_name {
                Some(n) => n.clone(),
                None => Path::new(&cmd[0])
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "tracker".into()),
            };
            c.tracker = Some(TrackerSpec::Command {
                name,
                command: cmd.clone(),
            });
        }
        c.run.seed = c.seed;
        Ok(c)
    }

    /// Validates the configuration, loads the sources and materializes
    /// all pattern parameters. `sequences` restricts the sources by id.
    pub fn resolve(mut self, sequences: &[String]) -> Result<Resolved> {
        self.run.validate()?;
        if self.width < 2 || self.height < 2 {
            bail!("viewport {}x{} too small", self.width, self.height);
        }
        if self.patterns.is_empty() {
            bail!("no patterns configured");
        }
        let mut patterns = Vec::new();
        for p in &mut self.patterns {
            if p.seed.is_none() {
                p.seed = Some(self.seed);
            }
            let m = p.resolve()?;
            *p = PatternConfig::from_pattern(&m);
            patterns.push(m);
        }
        if self.workers == 0 {
            self.workers = std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1);
        }
        if let Some(t) = &self.tracker {
            check_program(t)?;
        }

        let mut sources = Vec::new();
        if let Some(root) = &self.dataset {
            for path in manifest_paths(root)? {
                let sequence =
                    load_manifest(&path).with_context(|| format!("loading {}", path.display()))?;
                let origin = serde_json::json!({ "manifest": path });
                sources.push(Source { sequence, origin });
            }
        }
        for spec in &self.synthetic {
            let sequence = spec
                .build()
                .with_context(|| format!("building synthetic source {}", spec.id))?;
            sources.push(Source {
                sequence,
                origin: serde_json::json!({ "synthetic": spec }),
            });
        }
        if !sequences.is_empty() {
            for id in sequences {
                if !sources.iter().any(|s| s.sequence.id() == id) {
                    bail!("unknown sequence {id:?}");
                }
            }
            sources.retain(|s| sequences.iter().any(|id| id == s.sequence.id()));
        }
        if sources.is_empty() {
            bail!("no source sequences: set `dataset`, `synthetic` or --synthetic");
        }
        let mut ids: Vec<&str> = sources.iter().map(|s| s.sequence.id()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            bail!("duplicate sequence id {:?}", w[0]);
        }
        Ok(Resolved {
            config: self,
            patterns,
            sources,
        })
    }
}

/// File name of the materialized configuration written next to outputs.
pub const EFFECTIVE_CONFIG: &str = "config.json";

/// Writes `c` with all defaults spelled out.
pub fn write_effective(c: &BenchConfig, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut json = serde_json::to_string_pretty(c)?;
    json.push('\n');
    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))
}

fn manifest_paths(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.exists() {
        bail!("dataset {} does not exist", root.display());
    }
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(root).with_context(|| format!("listing {}", root.display()))? {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no manifests in {}", root.display());
    }
    Ok(out)
}

/// Fails when an external tracker's executable cannot be found.
pub fn check_program(spec: &TrackerSpec) -> Result<()> {
    let Some(prog) = spec.program() else {
        return match spec {
            TrackerSpec::Command { .. } => bail!("tracker command is empty"),
            _ => Ok(()),
        };
    };
    let found = if prog.components().count() > 1 {
        prog.is_file()
    } else {
        std::env::var_os("PATH")
            .map(|paths| std::env::split_paths(&paths).any(|d| d.join(&prog).is_file()))
            .unwrap_or(false)
    };
    if !found {
        bail!("tracker executable {} not found", prog.display());
    }
    Ok(())
}
