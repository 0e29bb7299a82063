//! Count-based overlapping windows and the incremental trainer that chains
//! `m_1 -> m_2 -> ...` by warm-starting each window fit from the previous model.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorConfig, DetectorKind};
use crate::error::{Error, Result};
use crate::ingest::RunningScaler;
use crate::record::Record;
use crate::state::DetectorState;

pub const DEFAULT_WINDOW: usize = 256;
pub const DEFAULT_STRIDE: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub length: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { length: DEFAULT_WINDOW, stride: DEFAULT_STRIDE }
    }
}

impl WindowConfig {
    pub fn new(length: usize, stride: usize) -> Result<Self> {
        let cfg = Self { length, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::InvalidWindow(format!("length must be >= 2, got {}", self.length)));
        }
        if self.stride == 0 || self.stride > self.length {
            return Err(Error::InvalidWindow(format!("stride must be in 1..={}, got {}", self.length, self.stride)));
        }
        Ok(())
    }

    /// Number of windows a stream of `n` records produces.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.length {
            0
        } else {
            (n - self.length) / self.stride + 1
        }
    }
}

/// One emitted window. `index` is 1-based; window `i` covers stream positions
/// `[(i-1)*stride, (i-1)*stride + length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub index: usize,
    pub records: Vec<Record>,
}

impl Window {
    pub fn start(&self, cfg: &WindowConfig) -> usize {
        (self.index - 1) * cfg.stride
    }
}

/// Holds at most `length` records and emits a window at every boundary.
#[derive(Debug, Clone)]
pub struct WindowBuffer {
    cfg: WindowConfig,
    buf: VecDeque<Record>,
    pushed: usize,
    emitted: usize,
    peak: usize,
}

impl WindowBuffer {
    pub fn new(cfg: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, buf: VecDeque::with_capacity(cfg.length), pushed: 0, emitted: 0, peak: 0 })
    }

    pub fn config(&self) -> WindowConfig {
        self.cfg
    }

    pub fn pushed(&self) -> usize {
        self.pushed
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Largest number of records ever held at once.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn contents(&self) -> impl Iterator<Item = &Record> {
        self.buf.iter()
    }

    pub fn push(&mut self, record: Record) -> Option<Window> {
        if self.buf.len() == self.cfg.length {
            self.buf.pop_front();
        }
        self.buf.push_back(record);
        self.peak = self.peak.max(self.buf.len());
        self.pushed += 1;
        let WindowConfig { length, stride } = self.cfg;
        if self.pushed >= length && (self.pushed - length).is_multiple_of(stride) {
            self.emitted += 1;
            Some(Window { index: self.emitted, records: self.buf.iter().cloned().collect() })
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub state: DetectorState,
    /// Wall time of each window fit, in order.
    pub window_times: Vec<Duration>,
    /// Set when the stream was shorter than one window and was fit whole.
    pub partial_fit: bool,
    /// Peak of records held by the window buffer plus the detector.
    pub peak_buffered: usize,
}

/// Trains `kind` over `stream` window by window. With a scaler, every record
/// updates it on arrival and each window is standardized with the scaler as
/// it stands when the window closes. Trailing records that never complete a
/// window are dropped unless no window was emitted at all, in which case the
/// whole stream gets one fit.
pub fn train_incremental<'a>(
    kind: DetectorKind,
    config: &DetectorConfig,
    windows: WindowConfig,
    stream: impl IntoIterator<Item = &'a Record>,
    seed: u64,
    mut scaler: Option<&mut RunningScaler>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut state = DetectorState::new(kind, config.clone(), seed);
    let mut buffer = WindowBuffer::new(windows)?;
    let mut window_times = Vec::new();
    let mut peak_detector = 0;
    let mut seen: Vec<Record> = Vec::new();

    let prepare = |records: Vec<Record>, scaler: &Option<&mut RunningScaler>| -> Result<Vec<Record>> {
        match scaler {
            Some(s) => records.iter().map(|r| s.transform(r)).collect(),
            None => Ok(records),
        }
    };

    for record in stream {
        if let Some(s) = scaler.as_deref_mut() {
            s.update(record)?;
        }
        if buffer.emitted() == 0 {
            // Kept only until the first window closes, for the short-stream fallback.
            seen.push(record.clone());
        }
        if let Some(window) = buffer.push(record.clone()) {
            seen = Vec::new();
            let records = prepare(window.records, &scaler)?;
            let started = Instant::now();
            state.fit_window(&records)?;
            window_times.push(started.elapsed());
            peak_detector = peak_detector.max(state.buffered());
            log::debug!("{kind}: window {} fit in {:?}", window.index, window_times.last().unwrap());
        }
    }

    let mut partial_fit = false;
    if buffer.emitted() == 0 {
        if seen.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let records = prepare(seen, &scaler)?;
        let started = Instant::now();
        state.fit_window(&records)?;
        window_times.push(started.elapsed());
        peak_detector = peak_detector.max(state.buffered());
        partial_fit = true;
    }

    Ok(TrainOutcome { state, window_times, partial_fit, peak_buffered: buffer.peak() + peak_detector })
}
