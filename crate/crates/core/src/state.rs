//! Versioned detector state and its checkpoint format.
//!
//! Checkpoint layout (little-endian):
//!
//! ```text
//! "ODS1" | kind tag: u8 | version: u64 | seed: u64 | config digest: [u8; 32] | payload len: u64 | payload
//! ```
//!
//! The payload is JSON holding the detector config, input dimension and model.

use std::path::Path;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detectors::{DetectorConfig, DetectorKind, DetectorRng, Model, OnlineDetector};
use crate::error::{Error, Result};
use crate::record::{AnomalyScore, Record};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ODS1";

/// A detector model plus the bookkeeping that makes incremental training
/// reproducible: version `i` is model `m_i`, and every fit draws its
/// randomness from `(seed, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    kind: DetectorKind,
    version: u64,
    seed: u64,
    config: DetectorConfig,
    dim: Option<usize>,
    learned: u64,
    model: Model,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    config: DetectorConfig,
    dim: Option<usize>,
    learned: u64,
    model: Model,
}

/// SHA-256 of the canonical JSON encoding of `cfg`.
pub fn config_digest(cfg: &DetectorConfig) -> [u8; 32] {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&json).into()
}

impl DetectorState {
    pub fn new(kind: DetectorKind, config: DetectorConfig, seed: u64) -> Self {
        let model = Model::new(kind, &config);
        Self { kind, version: 0, seed, config, dim: None, learned: 0, model }
    }

    pub fn with_defaults(kind: DetectorKind, seed: u64) -> Self {
        Self::new(kind, DetectorConfig::default(), seed)
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    /// 0 while untrained, `i` after the `i`-th window fit.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn is_trained(&self) -> bool {
        self.version > 0
    }

    /// Feature vectors currently held by the model.
    pub fn buffered(&self) -> usize {
        self.model.buffered()
    }

    fn check(&self, record: &Record) -> Result<()> {
        match self.dim {
            Some(d) => record.check_dim(d),
            None => Ok(()),
        }
    }

    /// Fits the next model on `window`, warm-starting from the current one.
    /// On error the state is left untouched.
    pub fn fit_window(&mut self, window: &[Record]) -> Result<()> {
        let first = window.first().ok_or(Error::EmptyWindow)?;
        let dim = self.dim.unwrap_or(first.dim());
        for r in window {
            r.check_dim(dim)?;
        }
        let mut rng = DetectorRng::seed_from_u64(self.seed);
        rng.set_stream(self.version + 1);
        let views: Vec<&[f64]> = window.iter().map(|r| r.features.as_slice()).collect();
        self.model.fit_window(&views, &mut rng)?;
        self.dim = Some(dim);
        self.version += 1;
        Ok(())
    }

    /// Consuming variant of [`Self::fit_window`].
    pub fn fitted(mut self, window: &[Record]) -> Result<Self> {
        self.fit_window(window)?;
        Ok(self)
    }

    pub fn score_one(&self, record: &Record) -> Result<AnomalyScore> {
        if !self.is_trained() {
            return Err(Error::Untrained);
        }
        self.check(record)?;
        let s = self.model.score(&record.features)?;
        debug_assert!(s.is_finite(), "{} produced non-finite score {s}", self.kind);
        Ok(AnomalyScore(s))
    }

    /// Single-record update; the version is unchanged.
    pub fn learn_one(&mut self, record: &Record) -> Result<()> {
        if !self.is_trained() {
            return Err(Error::Untrained);
        }
        self.check(record)?;
        let mut rng = DetectorRng::seed_from_u64(self.seed ^ 0x5851_F42D_4C95_7F2D);
        rng.set_stream(self.learned);
        self.model.learn_one(&record.features, &mut rng)?;
        self.learned += 1;
        Ok(())
    }

    pub fn config_digest(&self) -> [u8; 32] {
        config_digest(&self.config)
    }

    pub fn to_checkpoint(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(&Payload {
            config: self.config.clone(),
            dim: self.dim,
            learned: self.learned,
            model: self.model.clone(),
        })
        .expect("state serializes");
        let mut out = Vec::with_capacity(4 + 1 + 8 + 8 + 32 + 8 + payload.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(self.kind.tag());
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.config_digest());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        let take = |at: usize, n: usize| bytes.get(at..at + n).ok_or_else(|| bad("truncated"));
        if take(0, 4)? != CHECKPOINT_MAGIC {
            return Err(bad("missing ODS1 magic"));
        }
        let kind = DetectorKind::from_tag(take(4, 1)?[0]).ok_or_else(|| bad("unknown detector tag"))?;
        let u64_at = |at: usize| take(at, 8).map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")));
        let version = u64_at(5)?;
        let seed = u64_at(13)?;
        let digest: [u8; 32] = take(21, 32)?.try_into().expect("32 bytes");
        let len = usize::try_from(u64_at(53)?).map_err(|_| bad("payload length overflows"))?;
        let payload: Payload = serde_json::from_slice(take(61, len)?)?;
        if bytes.len() != 61 + len {
            return Err(bad("trailing bytes"));
        }
        if payload.model.kind() != kind {
            return Err(bad("payload kind disagrees with header tag"));
        }
        if config_digest(&payload.config) != digest {
            return Err(bad("config digest mismatch"));
        }
        Ok(Self {
            kind,
            version,
            seed,
            config: payload.config,
            dim: payload.dim,
            learned: payload.learned,
            model: payload.model,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_checkpoint())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&std::fs::read(path)?)
    }
}
