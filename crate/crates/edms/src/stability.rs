//! Stable-region detection on eigenvalue series, representative selection
//! and per-frame retention decisions.
//!
//! A frame's rolling window (the `W` values ending at that frame) is
//! "stable" when its standard deviation is at most the larger of
//! `rel_threshold * |mean|` and `abs_threshold`. Maximal runs of stable
//! frames, extended back to cover their first window, become stable
//! regions when long enough. The offline scan and the online detector
//! share the same arithmetic in the same order, so their outputs are
//! bit-identical.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("series of {len} frames is shorter than the {window}-frame window")]
    SeriesTooShort { len: usize, window: usize },
    #[error("frame {got} fed out of order (expected {expected})")]
    OutOfOrderFrame { got: usize, expected: usize },
    #[error("k={k} representatives requested from a region of {len} frames")]
    KTooLarge { k: usize, len: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Rolling window length W, in frames.
    pub window: usize,
    /// Stability when rolling std <= rel_threshold * |rolling mean|.
    pub rel_threshold: f64,
    /// Absolute floor on the std criterion, in eigenvalue units.
    pub abs_threshold: f64,
    /// Minimum frames for a stable region.
    pub min_region: usize,
    /// Representatives chosen per region.
    pub reps_per_region: usize,
    /// Persist frames outside stable regions.
    pub keep_transitions: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window: 20,
            rel_threshold: 0.02,
            abs_threshold: 0.0,
            min_region: 50,
            reps_per_region: 3,
            keep_transitions: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), StabilityError> {
        if self.window < 2 {
            return Err(StabilityError::InvalidConfig("window must be >= 2".into()));
        }
        if !(self.rel_threshold > 0.0) {
            return Err(StabilityError::InvalidConfig(
                "rel_threshold must be > 0".into(),
            ));
        }
        if self.min_region < self.window {
            return Err(StabilityError::InvalidConfig(
                "min_region must be >= window".into(),
            ));
        }
        if self.reps_per_region < 1 {
            return Err(StabilityError::InvalidConfig(
                "reps_per_region must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A detected [start, end] frame interval where one series is stable.
#[derive(Debug, Clone, PartialEq)]
pub struct StableRegion {
    pub request_id: String,
    pub start_frame: usize,
    /// Inclusive.
    pub end_frame: usize,
    pub mean: f64,
    pub std: f64,
    /// 0-based position among this request's regions.
    pub cluster_ordinal: usize,
}

impl StableRegion {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    PersistRepresentative { region_ordinal: usize },
    PersistTransition,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetentionDecision {
    pub frame_index: usize,
    pub verdict: Verdict,
}

// Window statistics, always summed left to right in frame order so the
// offline and online paths produce bit-identical values.
fn run_stats(values: impl Iterator<Item = f64>, len: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for v in values {
        sum += v;
        sumsq += v * v;
    }
    let n = len as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    (mean, var.sqrt())
}

fn window_stable(cfg: &DetectorConfig, mean: f64, std: f64) -> bool {
    std <= (cfg.rel_threshold * mean.abs()).max(cfg.abs_threshold)
}

/// One-shot scan over a complete series. Frames are `0..values.len()`.
pub fn detect_stable_regions(
    request_id: &str,
    values: &[f64],
    cfg: &DetectorConfig,
) -> Result<Vec<StableRegion>, StabilityError> {
    cfg.validate()?;
    if values.len() < cfg.window {
        return Err(StabilityError::SeriesTooShort {
            len: values.len(),
            window: cfg.window,
        });
    }
    let w = cfg.window;
    let mut regions: Vec<StableRegion> = Vec::new();
    let mut run_start: Option<usize> = None; // region start frame
    let mut run_end = 0usize;
    let mut next_free = 0usize; // first frame after the last accepted region

    let close = |regions: &mut Vec<StableRegion>,
                     next_free: &mut usize,
                     start: usize,
                     end: usize| {
        if end - start + 1 >= cfg.min_region {
            let (mean, std) = run_stats(values[start..=end].iter().copied(), end - start + 1);
            regions.push(StableRegion {
                request_id: request_id.to_string(),
                start_frame: start,
                end_frame: end,
                mean,
                std,
                cluster_ordinal: regions.len(),
            });
            *next_free = end + 1;
        }
    };

    for t in (w - 1)..values.len() {
        let (mean, std) = run_stats(values[t + 1 - w..=t].iter().copied(), w);
        if window_stable(cfg, mean, std) {
            if run_start.is_none() {
                run_start = Some((t + 1 - w).max(next_free));
            }
            run_end = t;
        } else if let Some(start) = run_start.take() {
            close(&mut regions, &mut next_free, start, run_end);
        }
    }
    if let Some(start) = run_start {
        close(&mut regions, &mut next_free, start, run_end);
    }
    Ok(regions)
}

/// Streaming detector: constant memory (the rolling window plus running
/// sums), emits each region when it closes. [`finish`](Self::finish)
/// flushes a region still open at end-of-stream.
#[derive(Debug, Clone)]
pub struct OnlineDetector {
    request_id: String,
    cfg: DetectorConfig,
    window: VecDeque<f64>,
    next_frame: usize,
    next_free: usize,
    regions_emitted: usize,
    run: Option<RunState>,
}

#[derive(Debug, Clone)]
struct RunState {
    region_start: usize,
    end: usize,
    sum: f64,
    sumsq: f64,
}

impl OnlineDetector {
    pub fn new(request_id: impl Into<String>, cfg: DetectorConfig) -> Result<Self, StabilityError> {
        cfg.validate()?;
        Ok(Self {
            request_id: request_id.into(),
            cfg,
            window: VecDeque::new(),
            next_frame: 0,
            next_free: 0,
            regions_emitted: 0,
            run: None,
        })
    }

    pub fn frames_seen(&self) -> usize {
        self.next_frame
    }

    pub fn push(
        &mut self,
        frame: usize,
        value: f64,
    ) -> Result<Option<StableRegion>, StabilityError> {
        if frame != self.next_frame {
            return Err(StabilityError::OutOfOrderFrame {
                got: frame,
                expected: self.next_frame,
            });
        }
        self.next_frame += 1;
        if self.window.len() == self.cfg.window {
            self.window.pop_front();
        }
        self.window.push_back(value);
        if self.window.len() < self.cfg.window {
            return Ok(None);
        }
        let t = frame;
        let (mean, std) = run_stats(self.window.iter().copied(), self.cfg.window);
        if window_stable(&self.cfg, mean, std) {
            match self.run.as_mut() {
                Some(run) => {
                    run.end = t;
                    run.sum += value;
                    run.sumsq += value * value;
                }
                None => {
                    let region_start = (t + 1 - self.cfg.window).max(self.next_free);
                    // The region's opening frames are still in the window.
                    let skip = self.cfg.window - (t - region_start + 1);
                    let mut sum = 0.0;
                    let mut sumsq = 0.0;
                    for v in self.window.iter().skip(skip) {
                        sum += v;
                        sumsq += v * v;
                    }
                    self.run = Some(RunState {
                        region_start,
                        end: t,
                        sum,
                        sumsq,
                    });
                }
            }
            Ok(None)
        } else {
            Ok(self.close_run())
        }
    }

    /// End-of-stream flush.
    pub fn finish(&mut self) -> Option<StableRegion> {
        self.close_run()
    }

    fn close_run(&mut self) -> Option<StableRegion> {
        let run = self.run.take()?;
        let len = run.end - run.region_start + 1;
        if len < self.cfg.min_region {
            return None;
        }
        let n = len as f64;
        let mean = run.sum / n;
        let var = (run.sumsq / n - mean * mean).max(0.0);
        let region = StableRegion {
            request_id: self.request_id.clone(),
            start_frame: run.region_start,
            end_frame: run.end,
            mean,
            std: var.sqrt(),
            cluster_ordinal: self.regions_emitted,
        };
        self.next_free = run.end + 1;
        self.regions_emitted += 1;
        Some(region)
    }
}

/// The k frames of a region whose values sit nearest the region mean.
/// Ties go to the lower frame index; output is sorted by frame index.
pub fn select_representatives(
    region: &StableRegion,
    values: &[f64],
    k: usize,
) -> Result<Vec<usize>, StabilityError> {
    let len = region.len();
    if k > len {
        return Err(StabilityError::KTooLarge { k, len });
    }
    let mut by_distance: Vec<(f64, usize)> = (region.start_frame..=region.end_frame)
        .map(|f| ((values[f] - region.mean).abs(), f))
        .collect();
    by_distance.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut chosen: Vec<usize> = by_distance.into_iter().take(k).map(|(_, f)| f).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Per-frame verdicts for frames `0..total_frames` driven by one request's
/// regions: representatives persist, other in-region frames drop, frames
/// outside every region persist only when transitions are kept.
pub fn decide_retention(
    regions: &[StableRegion],
    values: &[f64],
    total_frames: usize,
    cfg: &DetectorConfig,
) -> Result<Vec<RetentionDecision>, StabilityError> {
    let mut verdicts = vec![
        if cfg.keep_transitions {
            Verdict::PersistTransition
        } else {
            Verdict::Drop
        };
        total_frames
    ];
    for region in regions {
        for f in region.start_frame..=region.end_frame.min(total_frames - 1) {
            verdicts[f] = Verdict::Drop;
        }
        let reps = select_representatives(region, values, cfg.reps_per_region)?;
        for f in reps {
            verdicts[f] = Verdict::PersistRepresentative {
                region_ordinal: region.cluster_ordinal,
            };
        }
    }
    Ok(verdicts
        .into_iter()
        .enumerate()
        .map(|(frame_index, verdict)| RetentionDecision {
            frame_index,
            verdict,
        })
        .collect())
}
