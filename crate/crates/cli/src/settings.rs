//! Model and run settings shared by `train` and `benchmark`: a key-value
//! config file overridden by command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use sshmc::base_learner::MaxFeatures;
use sshmc::bundle::{Method, RunManifest};
use sshmc::lcn::Policy;
use sshmc::protocol::TrainSpec;
use sshmc::ssl::Variant;
use sshmc::{Error, Result};

#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// Key-value config file (`key = value`); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed for every random component.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Example-selection policy for LCN and SSHMC-BLI.
    #[arg(long)]
    pub policy: Option<Policy>,
    /// Labeled neighbors per instance.
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimum SISI for a pseudo-label to be kept.
    #[arg(long)]
    pub thr: Option<f64>,
    /// Neighbor vote fraction for a label to enter a pseudo-label.
    #[arg(long)]
    pub t2label: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// V3: iterations between increments of k.
    #[arg(long)]
    pub k_step_iters: Option<usize>,
    /// Upper spread factor of the similitude index.
    #[arg(long)]
    pub sisi_n: Option<f64>,
    /// Overrides the variant of an `sshmc-*` method.
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    /// sqrt, log2 or all.
    #[arg(long)]
    pub max_features: Option<MaxFeatures>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    /// Tree depth limit; 0 means unlimited.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Self-training adoption confidence.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Self-training rounds per node.
    #[arg(long)]
    pub max_rounds: Option<usize>,
}

/// Config keys in their canonical dashed form.
const KEYS: &[&str] = &[
    "method",
    "seed",
    "policy",
    "k",
    "thr",
    "t2label",
    "max-iterations",
    "k-step-iters",
    "sisi-n",
    "variant",
    "n-trees",
    "max-features",
    "min-samples-split",
    "max-depth",
    "confidence",
    "max-rounds",
];

/// Accepts `max_iterations`, `sshmc.max_iterations` and `max-iterations` alike,
/// so a bundle manifest can be fed back in as a config file. Derived
/// sub-seeds such as `forest.seed` keep their prefix and are ignored.
fn canonical(key: &str) -> String {
    let short = ["sshmc.", "forest.", "self_train."]
        .iter()
        .find_map(|p| key.strip_prefix(p))
        .filter(|s| *s != "seed")
        .unwrap_or(key);
    short.replace('_', "-")
}

/// Config file values keyed canonically.
#[derive(Debug, Default)]
pub struct ConfigFile(RunManifest);

impl ConfigFile {
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let raw = RunManifest::load(path)?;
        let mut out = RunManifest::new();
        for (k, v) in raw.entries() {
            let key = canonical(k);
            if KEYS.contains(&key.as_str()) {
                out.set(key, v);
            }
        }
        Ok(ConfigFile(out))
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.0.parse_value(key)
    }
}

fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

impl ModelFlags {
    /// Resolves the training spec; `default_seed` applies when neither the
    /// flags nor the config file set one.
    pub fn resolve(&self, default_seed: u64) -> Result<(TrainSpec, ConfigFile)> {
        let file = ConfigFile::load(self.config.as_ref())?;
        let seed = pick(self.seed, &file, "seed")?.unwrap_or(default_seed);
        let mut spec = TrainSpec::from_seed(seed);
        if let Some(p) = pick(self.policy, &file, "policy")? {
            spec.policy = p;
        }
        let s = &mut spec.sshmc;
        if let Some(v) = pick(self.k, &file, "k")? {
            s.k = v;
        }
        if let Some(v) = pick(self.thr, &file, "thr")? {
            s.thr = v;
        }
        if let Some(v) = pick(self.t2label, &file, "t2label")? {
            s.t2label = v;
        }
        if let Some(v) = pick(self.max_iterations, &file, "max-iterations")? {
            s.max_iterations = v;
        }
        if let Some(v) = pick(self.k_step_iters, &file, "k-step-iters")? {
            s.k_step_iters = v;
        }
        if let Some(v) = pick(self.sisi_n, &file, "sisi-n")? {
            s.sisi_n = v;
        }
        let f = &mut spec.forest;
        if let Some(v) = pick(self.n_trees, &file, "n-trees")? {
            f.n_trees = v;
        }
        if let Some(v) = pick(self.max_features, &file, "max-features")? {
            f.max_features = v;
        }
        if let Some(v) = pick(self.min_samples_split, &file, "min-samples-split")? {
            f.min_samples_split = v;
        }
        let depth = match self.max_depth {
            Some(d) => Some(d),
            None => match file.0.get("max-depth") {
                None | Some("none") => None,
                Some(_) => file.get("max-depth")?,
            },
        };
        f.max_depth = depth.filter(|&d| d > 0);
        if let Some(v) = pick(self.confidence, &file, "confidence")? {
            spec.self_train.confidence = v;
        }
        if let Some(v) = pick(self.max_rounds, &file, "max-rounds")? {
            spec.self_train.max_rounds = v;
        }
        spec.validate()?;
        Ok((spec, file))
    }

    /// Method from the flag or the config file, with `--variant` applied.
    pub fn method(&self, flag: Option<Method>, file: &ConfigFile) -> Result<Method> {
        let method = match flag {
            Some(m) => m,
            None => file
                .get("method")?
                .ok_or_else(|| Error::Config("no method given (use --method)".into()))?,
        };
        let variant = pick(self.variant, file, "variant")?;
        match (method, variant) {
            (m, None) => Ok(m),
            (Method::Sshmc(_), Some(v)) => Ok(Method::Sshmc(v)),
            (m, Some(_)) if self.variant.is_none() => Ok(m),
            (m, Some(_)) => Err(Error::Config(format!("--variant does not apply to method {m}"))),
        }
    }
}
