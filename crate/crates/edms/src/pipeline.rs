//! The streaming analysis engine shared by one-shot and watch-mode runs:
//! frame in, packet appended to the store, online detection on the driving
//! series, retention decisions out.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::config::RunConfig;
use crate::frame::{extract_carbons, Frame};
use crate::spectra::{make_packet, SpectraError, SpectrumRequest};
use crate::stability::{
    decide_retention, OnlineDetector, RetentionDecision, StabilityError, StableRegion, Verdict,
};
use crate::store::{SeriesHeader, SeriesWriter, StoreError, StoreMode};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug)]
pub struct AnalysisResult {
    pub frames: usize,
    pub regions: Vec<StableRegion>,
    pub decisions: Vec<RetentionDecision>,
    pub mean_latency_ms: f64,
    pub p99_latency_ms: f64,
    /// Fraction of frames dropped.
    pub reduction: f64,
}

pub struct AnalyzeEngine {
    cfg: RunConfig,
    requests: Vec<SpectrumRequest>,
    writer: SeriesWriter,
    detectors: Vec<OnlineDetector>,
    /// In-memory lambda_max series, indexed like `requests`; needed for
    /// representative selection once regions close.
    series: Vec<Vec<f64>>,
    driving_idx: usize,
    closed: Vec<Vec<StableRegion>>,
    latencies_ms: Vec<f64>,
}

impl AnalyzeEngine {
    pub fn new(cfg: &RunConfig, store_path: &Path) -> Result<Self, PipelineError> {
        let requests = cfg.requests();
        let ids: Vec<String> = requests.iter().map(|r| r.request_id.clone()).collect();
        let mode = if cfg.full5 {
            StoreMode::Full5
        } else {
            StoreMode::Minimal
        };
        let header = SeriesHeader::new(ids.clone(), cfg.precision, mode);
        let writer = SeriesWriter::create(store_path, header)?;
        let driving_idx = ids
            .iter()
            .position(|id| *id == cfg.driving)
            .expect("config validation checked the driving id");
        // In conjunction mode every series gets a detector; otherwise only
        // the driving one is tracked.
        let detectors = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| cfg.conjunction || *i == driving_idx)
            .map(|(_, id)| OnlineDetector::new(id.clone(), cfg.detector.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            series: vec![Vec::new(); requests.len()],
            closed: vec![Vec::new(); detectors.len()],
            requests,
            writer,
            detectors,
            driving_idx,
            latencies_ms: Vec::new(),
        })
    }

    pub fn frames_processed(&self) -> usize {
        self.writer.frames_written()
    }

    /// Regions of the driving series that have closed so far.
    pub fn driving_regions(&self) -> &[StableRegion] {
        let idx = if self.cfg.conjunction {
            self.driving_idx
        } else {
            0
        };
        &self.closed[idx]
    }

    pub fn driving_series(&self) -> &[f64] {
        &self.series[self.driving_idx]
    }

    /// Process one frame: compute its packet, append it, feed detection.
    /// Returns a driving-series region if this frame closed one.
    pub fn process_frame(&mut self, frame: &Frame) -> Result<Option<StableRegion>, PipelineError> {
        let started = Instant::now();
        let carbons = extract_carbons(frame);
        let packet = make_packet(
            frame.frame_index,
            &carbons,
            &self.requests,
            self.cfg.precision,
            self.cfg.full5,
        )?;
        self.latencies_ms
            .push(started.elapsed().as_secs_f64() * 1e3);
        self.writer.append(&packet)?;
        for (i, record) in packet.records.iter().enumerate() {
            self.series[i].push(record.lambda_max);
        }
        let mut driving_closed = None;
        for (d, det) in self.detectors.iter_mut().enumerate() {
            let idx = if self.cfg.conjunction { d } else { self.driving_idx };
            let value = self.series[idx][frame.frame_index];
            if let Some(region) = det.push(frame.frame_index, value)? {
                let is_driving = idx == self.driving_idx;
                self.closed[d].push(region.clone());
                if is_driving {
                    driving_closed = Some(region);
                }
            }
        }
        Ok(driving_closed)
    }

    /// Flush detectors and the store, then derive decisions and stats.
    pub fn finish(mut self) -> Result<AnalysisResult, PipelineError> {
        for (d, det) in self.detectors.iter_mut().enumerate() {
            if let Some(region) = det.finish() {
                self.closed[d].push(region);
            }
        }
        self.writer.flush()?;
        let frames = self.writer.frames_written();
        let driving_slot = if self.cfg.conjunction {
            self.driving_idx
        } else {
            0
        };
        let regions = self.closed[driving_slot].clone();
        let mut decisions = decide_retention(
            &regions,
            &self.series[self.driving_idx],
            frames.max(1),
            &self.cfg.detector,
        )?;
        decisions.truncate(frames);
        if self.cfg.conjunction && self.cfg.detector.keep_transitions && frames > 0 {
            // A frame counts as stable only when every series covers it;
            // otherwise it is treated as a transition.
            let mut covered = vec![0usize; frames];
            for series_regions in &self.closed {
                for region in series_regions {
                    for f in region.start_frame..=region.end_frame.min(frames - 1) {
                        covered[f] += 1;
                    }
                }
            }
            for d in &mut decisions {
                if d.verdict == Verdict::Drop && covered[d.frame_index] < self.closed.len() {
                    d.verdict = Verdict::PersistTransition;
                }
            }
        }
        let dropped = decisions
            .iter()
            .filter(|d| d.verdict == Verdict::Drop)
            .count();
        let mut sorted = self.latencies_ms.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = if sorted.is_empty() {
            0.0
        } else {
            sorted.iter().sum::<f64>() / sorted.len() as f64
        };
        let p99 = if sorted.is_empty() {
            0.0
        } else {
            sorted[((sorted.len() as f64 * 0.99).ceil() as usize - 1).min(sorted.len() - 1)]
        };
        Ok(AnalysisResult {
            frames,
            regions,
            decisions,
            mean_latency_ms: mean,
            p99_latency_ms: p99,
            reduction: if frames == 0 {
                0.0
            } else {
                dropped as f64 / frames as f64
            },
        })
    }
}

pub fn verdict_label(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::PersistRepresentative { .. } => "representative",
        Verdict::PersistTransition => "transition",
        Verdict::Drop => "drop",
    }
}

/// Decisions CSV: `frame,verdict,region,request_id`.
pub fn write_decisions_csv<W: Write>(
    decisions: &[RetentionDecision],
    driving: &str,
    sink: &mut W,
) -> std::io::Result<()> {
    writeln!(sink, "frame,verdict,region,request_id")?;
    for d in decisions {
        let region = match &d.verdict {
            Verdict::PersistRepresentative { region_ordinal } => region_ordinal.to_string(),
            _ => String::new(),
        };
        writeln!(
            sink,
            "{},{},{},{}",
            d.frame_index,
            verdict_label(&d.verdict),
            region,
            driving
        )?;
    }
    Ok(())
}
