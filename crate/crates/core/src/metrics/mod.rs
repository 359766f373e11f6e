//! Frame-level SELD evaluation.
//!
//! Predictions and references are [`LabelSet`]s: per `(frame, class)` lists of
//! detections with folded azimuths in `[-90, 90]`. Within each frame and class
//! predictions are paired to references by minimum total azimuth error
//! ([`match_frame`]) and the location-aware F-score, class-dependent DOA and
//! relative distance errors and onscreen accuracy are accumulated over all
//! frames ([`score`], [`ScoreAccumulator`]).

mod accdoa;
mod bias;
mod matching;
mod report;
mod scoring;

use std::collections::BTreeMap;

pub use accdoa::{decode_multi_accdoa, encode_multi_accdoa, AccdoaFrame, AccdoaSlot, DEFAULT_ACTIVITY_THRESHOLD, MERGE_THRESHOLD_DEG, TRACKS};
pub use bias::{apply_distance_bias, class_mean_distance, ClassMeans};
pub use matching::{assignment, match_frame, AZIMUTH_TIE_RESOLUTION_DEG};
pub use report::{parse_report, rank_systems};
pub use scoring::{score, ClassScore, Counts, MetricsReport, ScoreAccumulator};

use crate::error::{Result, SeldError};
use crate::labels::{ClassId, EventRecord, MetadataSchema, NUM_CLASSES};

/// Default maximum number of simultaneous detections per class and frame.
pub const DEFAULT_MAX_POLYPHONY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Folded azimuth in `[-90, 90]`.
    pub azimuth_deg: f64,
    pub distance: f64,
    pub onscreen: Option<bool>,
    /// Source id for references, output track for decoded predictions.
    pub track: u32,
}

/// Detections keyed by `(frame, class)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    max_polyphony: usize,
    frames: BTreeMap<(u32, ClassId), Vec<Detection>>,
}

impl Default for LabelSet {
    fn default() -> Self {
        Self::new()
    }
}

impl LabelSet {
    pub fn new() -> Self {
        Self::with_max_polyphony(DEFAULT_MAX_POLYPHONY)
    }

    pub fn with_max_polyphony(max_polyphony: usize) -> Self {
        Self {
            max_polyphony,
            frames: BTreeMap::new(),
        }
    }

    pub fn max_polyphony(&self) -> usize {
        self.max_polyphony
    }

    pub fn insert(&mut self, frame: u32, class: ClassId, det: Detection) -> Result<()> {
        if !(det.azimuth_deg.is_finite() && (-90.0..=90.0).contains(&det.azimuth_deg)) {
            return Err(SeldError::Validation(format!(
                "frame {frame}, class {class}: azimuth {} outside the folded range [-90, 90]",
                det.azimuth_deg
            )));
        }
        if !(det.distance.is_finite() && det.distance >= 0.0) {
            return Err(SeldError::Validation(format!(
                "frame {frame}, class {class}: invalid distance {}",
                det.distance
            )));
        }
        let slot = self.frames.entry((frame, class)).or_default();
        if slot.len() >= self.max_polyphony {
            return Err(SeldError::Validation(format!(
                "frame {frame}, class {class}: more than {} simultaneous detections",
                self.max_polyphony
            )));
        }
        slot.push(det);
        Ok(())
    }

    /// Builds a set from stereo-schema records (folded azimuths).
    pub fn from_records(records: &[EventRecord]) -> Result<Self> {
        let mut set = Self::new();
        set.extend_records(records, 0)?;
        Ok(set)
    }

    /// Adds records with their frame index shifted by `frame_offset`.
    pub fn extend_records(&mut self, records: &[EventRecord], frame_offset: u32) -> Result<()> {
        for r in records {
            let frame = r.frame.checked_add(frame_offset).ok_or_else(|| {
                SeldError::Validation(format!("frame index overflow at frame {}", r.frame))
            })?;
            self.insert(
                frame,
                r.class,
                Detection {
                    azimuth_deg: r.azimuth_deg,
                    distance: r.distance,
                    onscreen: r.onscreen,
                    track: r.source,
                },
            )?;
        }
        Ok(())
    }

    /// Parses stereo metadata CSV text.
    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_records(&crate::labels::parse_metadata(text, MetadataSchema::Stereo)?)
    }

    pub fn to_records(&self) -> Vec<EventRecord> {
        self.iter()
            .map(|(frame, class, d)| EventRecord {
                frame,
                class,
                source: d.track,
                azimuth_deg: d.azimuth_deg,
                elevation_deg: None,
                distance: d.distance,
                onscreen: d.onscreen,
            })
            .collect()
    }

    pub fn get(&self, frame: u32, class: ClassId) -> &[Detection] {
        self.frames.get(&(frame, class)).map_or(&[], Vec::as_slice)
    }

    /// All detections in `(frame, class)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, ClassId, &Detection)> + '_ {
        self.frames
            .iter()
            .flat_map(|(&(f, c), dets)| dets.iter().map(move |d| (f, c, d)))
    }

    /// Occupied `(frame, class)` keys with their detections.
    pub fn groups(&self) -> impl Iterator<Item = (u32, ClassId, &[Detection])> + '_ {
        self.frames.iter().map(|(&(f, c), d)| (f, c, d.as_slice()))
    }

    pub(crate) fn groups_mut(&mut self) -> impl Iterator<Item = (ClassId, &mut Vec<Detection>)> + '_ {
        self.frames.iter_mut().map(|(&(_, c), d)| (c, d))
    }

    /// Number of detections.
    pub fn len(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// True when every detection carries an onscreen flag.
    pub fn has_onscreen_flags(&self) -> bool {
        self.iter().all(|(_, _, d)| d.onscreen.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub doa_threshold_deg: f64,
    pub rde_threshold: f64,
    /// Require flags everywhere and report the onscreen-gated F-score.
    pub require_onscreen_match: bool,
    pub class_count: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            doa_threshold_deg: 20.0,
            rde_threshold: 1.0,
            require_onscreen_match: false,
            class_count: NUM_CLASSES,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.doa_threshold_deg > 0.0 && self.rde_threshold > 0.0) {
            return Err(SeldError::Config(format!(
                "thresholds must be positive (doa {}, rde {})",
                self.doa_threshold_deg, self.rde_threshold
            )));
        }
        if self.class_count == 0 || self.class_count > NUM_CLASSES {
            return Err(SeldError::Config(format!(
                "class count must be in 1..={NUM_CLASSES}, got {}",
                self.class_count
            )));
        }
        Ok(())
    }
}
