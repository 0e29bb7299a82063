//! The seven online detectors and the contract they share.
//!
//! Distance/density/angle family: [`storm`], [`lof`], [`abod`], [`knn_cad`].
//! Model family: [`ocsvm`], [`iforest`]. Neural: [`kitnet`] (built on
//! [`autoencoder`]).
//!
//! Every detector maps its native output onto one polarity: larger scores are
//! more anomalous. Window-local detectors (LOF, ABOD, KNN-CAD, Exact-STORM)
//! refresh their reference structures on each window fit and carry only their
//! parameters forward; OCSVM, IForest-ASD and KitNET warm-start from the
//! previous model.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod abod;
pub mod autoencoder;
pub mod iforest;
pub mod kitnet;
pub mod knn_cad;
pub mod lof;
pub mod ocsvm;
pub mod storm;

pub use abod::{AbodConfig, AbodDetector};
pub use iforest::{IforestAsd, IforestConfig};
pub use kitnet::{Kitnet, KitnetConfig};
pub use knn_cad::{CadConfig, KnnCad};
pub use lof::{LofConfig, LofDetector};
pub use ocsvm::{OcsvmConfig, OcsvmDetector};
pub use storm::{ExactStorm, StormConfig};

/// Generator handed to detectors; ChaCha keeps streams reproducible across platforms.
pub type DetectorRng = ChaCha8Rng;

/// What every streaming detector implements. Inputs are bare feature slices
/// whose dimension the caller has already validated.
pub trait OnlineDetector {
    /// Builds (or warm-starts) the model from one window.
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()>;

    /// Read-only scoring; larger is more anomalous.
    fn score(&self, x: &[f64]) -> Result<f64>;

    /// Single-record update.
    fn learn_one(&mut self, x: &[f64], rng: &mut DetectorRng) -> Result<()>;

    /// Number of feature vectors the detector currently holds.
    fn buffered(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Ocsvm,
    IforestAsd,
    Lof,
    Abod,
    ExactStorm,
    Kitnet,
    KnnCad,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 7] = [
        DetectorKind::Ocsvm,
        DetectorKind::IforestAsd,
        DetectorKind::Lof,
        DetectorKind::Abod,
        DetectorKind::ExactStorm,
        DetectorKind::Kitnet,
        DetectorKind::KnnCad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Ocsvm => "ocsvm",
            DetectorKind::IforestAsd => "iforest-asd",
            DetectorKind::Lof => "lof",
            DetectorKind::Abod => "abod",
            DetectorKind::ExactStorm => "exact-storm",
            DetectorKind::Kitnet => "kitnet",
            DetectorKind::KnnCad => "knn-cad",
        }
    }

    /// Checkpoint tag byte.
    pub fn tag(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag.checked_sub(1)? as usize).copied()
    }

    /// Config keys (`section.key`) this detector reads.
    pub fn config_keys(self) -> &'static [&'static str] {
        match self {
            DetectorKind::Ocsvm => &["ocsvm.nu", "ocsvm.lr", "ocsvm.epochs"],
            DetectorKind::IforestAsd => &["iforest.trees", "iforest.psi", "iforest.threshold_u"],
            DetectorKind::Lof => &["lof.k", "lof.max_reference"],
            DetectorKind::Abod => &["abod.max_reference"],
            DetectorKind::ExactStorm => &["storm.radius", "storm.k", "storm.window", "storm.max_reference"],
            DetectorKind::Kitnet => &["kitnet.m_max", "kitnet.beta", "kitnet.lr"],
            DetectorKind::KnnCad => &["cad.k", "cad.max_reference"],
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "ocsvm" | "oc-svm" => Ok(DetectorKind::Ocsvm),
            "iforest-asd" | "iforestasd" | "iforest" => Ok(DetectorKind::IforestAsd),
            "lof" => Ok(DetectorKind::Lof),
            "abod" => Ok(DetectorKind::Abod),
            "exact-storm" | "storm" => Ok(DetectorKind::ExactStorm),
            "kitnet" => Ok(DetectorKind::Kitnet),
            // The abstract-style "KNN ASD" name refers to the same detector.
            "knn-cad" | "knn-asd" | "knncad" => Ok(DetectorKind::KnnCad),
            _ => Err(Error::UnknownDetector(s.to_string())),
        }
    }
}

/// Hyperparameters of all seven detectors. Each detector reads its own section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub ocsvm: OcsvmConfig,
    pub iforest: IforestConfig,
    pub lof: LofConfig,
    pub abod: AbodConfig,
    pub storm: StormConfig,
    pub kitnet: KitnetConfig,
    pub cad: CadConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse `{value}`")))
}

fn parse_auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.trim().eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn show_auto<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl DetectorConfig {
    /// Every recognised key, in listing order.
    pub fn keys() -> impl Iterator<Item = &'static str> {
        DetectorKind::ALL.into_iter().flat_map(|k| k.config_keys().iter().copied())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "ocsvm.nu" => self.ocsvm.nu = parse(key, value)?,
            "ocsvm.lr" => self.ocsvm.lr = parse(key, value)?,
            "ocsvm.epochs" => self.ocsvm.epochs = parse(key, value)?,
            "iforest.trees" => self.iforest.trees = parse(key, value)?,
            "iforest.psi" => self.iforest.psi = parse(key, value)?,
            "iforest.threshold_u" => self.iforest.threshold_u = parse(key, value)?,
            "lof.k" => self.lof.k = parse(key, value)?,
            "lof.max_reference" => self.lof.max_reference = parse(key, value)?,
            "abod.max_reference" => self.abod.max_reference = parse(key, value)?,
            "storm.radius" => self.storm.radius = parse_auto(key, value)?,
            "storm.k" => self.storm.k = parse(key, value)?,
            "storm.window" => self.storm.window = parse_auto(key, value)?,
            "storm.max_reference" => self.storm.max_reference = parse(key, value)?,
            "kitnet.m_max" => self.kitnet.m_max = parse(key, value)?,
            "kitnet.beta" => self.kitnet.beta = parse(key, value)?,
            "kitnet.lr" => self.kitnet.lr = parse(key, value)?,
            "cad.k" => self.cad.k = parse(key, value)?,
            "cad.max_reference" => self.cad.max_reference = parse(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "ocsvm.nu" => self.ocsvm.nu.to_string(),
            "ocsvm.lr" => self.ocsvm.lr.to_string(),
            "ocsvm.epochs" => self.ocsvm.epochs.to_string(),
            "iforest.trees" => self.iforest.trees.to_string(),
            "iforest.psi" => self.iforest.psi.to_string(),
            "iforest.threshold_u" => self.iforest.threshold_u.to_string(),
            "lof.k" => self.lof.k.to_string(),
            "lof.max_reference" => self.lof.max_reference.to_string(),
            "abod.max_reference" => self.abod.max_reference.to_string(),
            "storm.radius" => show_auto(&self.storm.radius),
            "storm.k" => self.storm.k.to_string(),
            "storm.window" => show_auto(&self.storm.window),
            "storm.max_reference" => self.storm.max_reference.to_string(),
            "kitnet.m_max" => self.kitnet.m_max.to_string(),
            "kitnet.beta" => self.kitnet.beta.to_string(),
            "kitnet.lr" => self.kitnet.lr.to_string(),
            "cad.k" => self.cad.k.to_string(),
            "cad.max_reference" => self.cad.max_reference.to_string(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let o = &self.ocsvm;
        if !(o.nu > 0.0 && o.nu <= 1.0) {
            return bad("ocsvm.nu must lie in (0, 1]");
        }
        if !(o.lr > 0.0 && o.lr.is_finite()) || o.epochs == 0 {
            return bad("ocsvm.lr must be positive and ocsvm.epochs >= 1");
        }
        let f = &self.iforest;
        if f.trees == 0 || f.psi == 0 {
            return bad("iforest.trees and iforest.psi must be >= 1");
        }
        if !(f.threshold_u > 0.0 && f.threshold_u < 1.0) {
            return bad("iforest.threshold_u must lie in (0, 1)");
        }
        if self.lof.k == 0 || self.storm.k == 0 || self.cad.k == 0 {
            return bad("lof.k, storm.k and cad.k must be >= 1");
        }
        let caps = [self.lof.max_reference, self.abod.max_reference, self.storm.max_reference, self.cad.max_reference];
        if caps.iter().any(|&c| c < 2) {
            return bad("max_reference values must be >= 2");
        }
        if let Some(r) = self.storm.radius {
            if !(r > 0.0 && r.is_finite()) {
                return bad("storm.radius must be positive");
            }
        }
        if self.storm.window == Some(0) {
            return bad("storm.window must be >= 1");
        }
        let k = &self.kitnet;
        if k.m_max == 0 || !(k.beta > 0.0 && k.beta <= 1.0) || !(k.lr >= 0.0 && k.lr.is_finite()) {
            return bad("kitnet.m_max >= 1, kitnet.beta in (0, 1], kitnet.lr >= 0 required");
        }
        Ok(())
    }
}

/// Whole window when it fits under `cap`, otherwise a seeded uniform
/// subsample of `cap` points kept in stream order.
pub fn reference_sample<'a>(window: &[&'a [f64]], cap: usize, rng: &mut DetectorRng) -> Vec<&'a [f64]> {
    if window.len() <= cap {
        return window.to_vec();
    }
    let mut picked = rand::seq::index::sample(rng, window.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| window[i]).collect()
}

/// Per-algorithm model, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "kebab-case")]
pub enum Model {
    Ocsvm(OcsvmDetector),
    IforestAsd(IforestAsd),
    Lof(LofDetector),
    Abod(AbodDetector),
    ExactStorm(ExactStorm),
    Kitnet(Kitnet),
    KnnCad(KnnCad),
}

impl Model {
    pub fn new(kind: DetectorKind, cfg: &DetectorConfig) -> Self {
        match kind {
            DetectorKind::Ocsvm => Model::Ocsvm(OcsvmDetector::new(cfg.ocsvm.clone())),
            DetectorKind::IforestAsd => Model::IforestAsd(IforestAsd::new(cfg.iforest.clone())),
            DetectorKind::Lof => Model::Lof(LofDetector::new(cfg.lof.clone())),
            DetectorKind::Abod => Model::Abod(AbodDetector::new(cfg.abod.clone())),
            DetectorKind::ExactStorm => Model::ExactStorm(ExactStorm::new(cfg.storm.clone())),
            DetectorKind::Kitnet => Model::Kitnet(Kitnet::new(cfg.kitnet.clone())),
            DetectorKind::KnnCad => Model::KnnCad(KnnCad::new(cfg.cad.clone())),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            Model::Ocsvm(_) => DetectorKind::Ocsvm,
            Model::IforestAsd(_) => DetectorKind::IforestAsd,
            Model::Lof(_) => DetectorKind::Lof,
            Model::Abod(_) => DetectorKind::Abod,
            Model::ExactStorm(_) => DetectorKind::ExactStorm,
            Model::Kitnet(_) => DetectorKind::Kitnet,
            Model::KnnCad(_) => DetectorKind::KnnCad,
        }
    }

    fn inner(&self) -> &dyn OnlineDetector {
        match self {
            Model::Ocsvm(d) => d,
            Model::IforestAsd(d) => d,
            Model::Lof(d) => d,
            Model::Abod(d) => d,
            Model::ExactStorm(d) => d,
            Model::Kitnet(d) => d,
            Model::KnnCad(d) => d,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn OnlineDetector {
        match self {
            Model::Ocsvm(d) => d,
            Model::IforestAsd(d) => d,
            Model::Lof(d) => d,
            Model::Abod(d) => d,
            Model::ExactStorm(d) => d,
            Model::Kitnet(d) => d,
            Model::KnnCad(d) => d,
        }
    }
}

impl OnlineDetector for Model {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        self.inner_mut().fit_window(window, rng)
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        self.inner().score(x)
    }

    fn learn_one(&mut self, x: &[f64], rng: &mut DetectorRng) -> Result<()> {
        self.inner_mut().learn_one(x, rng)
    }

    fn buffered(&self) -> usize {
        self.inner().buffered()
    }
}
