//! On-disk model bundles and key-value run manifests.
//!
//! A bundle directory holds `hierarchy.txt`, `manifest.txt` and one JSON file
//! per node under `nodes/`. Node files carry the node name, so a bundle
//! stays valid when the hierarchy text renumbers nodes on reload.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::base_learner::{BinaryClassifier, RandomForest};
use crate::baselines::{SelfTrainMethod, SelfTrainedModel};
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::lcn::{post_process, predict_columns, LcnModel, Policy};
use crate::matrix::Matrix;
use crate::ssl::Variant;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

/// Training method of a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Lcn,
    Sshmc(Variant),
    Stml,
    Sthc,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Lcn,
        Method::Sshmc(Variant::V1),
        Method::Sshmc(Variant::V2),
        Method::Sshmc(Variant::V3),
        Method::Stml,
        Method::Sthc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lcn => "lcn",
            Method::Sshmc(Variant::V1) => "sshmc-v1",
            Method::Sshmc(Variant::V2) => "sshmc-v2",
            Method::Sshmc(Variant::V3) => "sshmc-v3",
            Method::Stml => "stml",
            Method::Sthc => "sthc",
        }
    }

    /// Whether predictions are capped top-down.
    pub fn post_processes(self) -> bool {
        self != Method::Stml
    }

    pub fn uses_unlabeled(self) -> bool {
        self != Method::Lcn
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Ordered key-value pairs written as `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
        self
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (String, String)>) -> &mut Self {
        for (k, v) in pairs {
            self.set(k, v);
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut m = RunManifest::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(path, i + 1, "expected `key = value`"));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(path, i + 1, "empty key"));
            }
            m.set(k, v.trim());
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Typed lookup; missing keys give `None`, malformed values an error.
    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("{key} = {v}: {e}"))),
        }
    }
}

/// A trained model of any method, with random-forest nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub method: Method,
    pub hierarchy: Arc<Hierarchy>,
    pub policy: Policy,
    pub node_models: Vec<RandomForest>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    name: String,
    model: RandomForest,
}

impl TrainedModel {
    pub fn from_lcn(method: Method, m: LcnModel<RandomForest>) -> Self {
        TrainedModel {
            method,
            hierarchy: m.hierarchy,
            policy: m.policy,
            node_models: m.node_models,
        }
    }

    pub fn from_self_trained(m: SelfTrainedModel<RandomForest>) -> Self {
        let method = match m.method {
            SelfTrainMethod::Stml => Method::Stml,
            SelfTrainMethod::Sthc => Method::Sthc,
        };
        Self::from_lcn(method, m.lcn)
    }

    pub fn n_features(&self) -> usize {
        self.node_models.first().map_or(0, |m| m.n_features())
    }

    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        predict_columns(&self.node_models, x)
    }

    /// Probabilities per node; capped top-down unless the method is STML.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let raw = self.predict_raw(x)?;
        if self.method.post_processes() {
            post_process(&self.hierarchy, &raw)
        } else {
            Ok(raw)
        }
    }

    /// Writes the bundle. Method, policy and format keys are added to `manifest`.
    pub fn save(&self, dir: &Path, manifest: &RunManifest) -> Result<()> {
        let nodes = dir.join("nodes");
        std::fs::create_dir_all(&nodes).map_err(|e| Error::io(&nodes, e))?;
        self.hierarchy.save(&dir.join("hierarchy.txt"))?;
        for (l, m) in self.node_models.iter().enumerate() {
            let path = nodes.join(node_file_name(l));
            let file = NodeFile {
                name: self.hierarchy.name(l).to_string(),
                model: m.clone(),
            };
            let json = serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))?;
            std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        }
        let mut mf = manifest.clone();
        mf.set("bundle_format_version", BUNDLE_FORMAT_VERSION)
            .set("method", self.method)
            .set("policy", self.policy)
            .set("post_process", self.method.post_processes())
            .set("n_nodes", self.node_models.len())
            .set("n_features", self.n_features());
        mf.save(&dir.join("manifest.txt"))
    }

    pub fn load(dir: &Path) -> Result<(Self, RunManifest)> {
        let manifest = RunManifest::load(&dir.join("manifest.txt"))?;
        let version: u32 = manifest
            .parse_value("bundle_format_version")?
            .ok_or_else(|| Error::Format("manifest lacks bundle_format_version".into()))?;
        if version != BUNDLE_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported bundle format version {version}")));
        }
        let method: Method = manifest
            .parse_value("method")?
            .ok_or_else(|| Error::Format("manifest lacks method".into()))?;
        let policy: Policy = manifest
            .parse_value("policy")?
            .ok_or_else(|| Error::Format("manifest lacks policy".into()))?;
        let hierarchy = Arc::new(Hierarchy::load(&dir.join("hierarchy.txt"))?);
        let mut slots: Vec<Option<RandomForest>> = vec![None; hierarchy.len()];
        for l in 0..hierarchy.len() {
            let path = dir.join("nodes").join(node_file_name(l));
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let file: NodeFile = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let id = hierarchy
                .id(&file.name)
                .ok_or_else(|| Error::Format(format!("{}: unknown node `{}`", path.display(), file.name)))?;
            let model = RandomForest::from_json(&serde_json::to_string(&file.model).expect("serializes"))?;
            slots[id] = Some(model);
        }
        let node_models = slots
            .into_iter()
            .enumerate()
            .map(|(l, m)| m.ok_or_else(|| Error::Format(format!("no model for node `{}`", hierarchy.name(l)))))
            .collect::<Result<Vec<_>>>()?;
        Ok((
            TrainedModel {
                method,
                hierarchy,
                policy,
                node_models,
            },
            manifest,
        ))
    }
}

fn node_file_name(l: usize) -> String {
    format!("node_{l:04}.json")
}
