//! Multi-ACCDOA output decoding: per frame, three tracks per class, each a
//! Cartesian activity-coupled `[x, y]` vector plus distance and an optional
//! onscreen score.

use super::{Detection, LabelSet};
use crate::angles::{circular_distance_deg, wrap_deg};
use crate::error::{Result, SeldError};
use crate::labels::{fold_front_back, ClassId, NUM_CLASSES};

pub const TRACKS: usize = 3;
pub const DEFAULT_ACTIVITY_THRESHOLD: f64 = 0.5;
/// Same-class tracks closer than this are treated as duplicates.
pub const MERGE_THRESHOLD_DEG: f64 = 15.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AccdoaSlot {
    pub x: f64,
    pub y: f64,
    pub distance: f64,
    pub onscreen: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AccdoaFrame {
    /// Indexed `[track][class]`.
    pub slots: [[AccdoaSlot; NUM_CLASSES]; TRACKS],
}

fn check_slot(frame: usize, track: usize, class: usize, s: &AccdoaSlot) -> Result<()> {
    let bad = |what: String| {
        Err(SeldError::Decode {
            frame,
            message: format!("track {track}, class {class}: {what}"),
        })
    };
    if !(s.x.is_finite() && s.y.is_finite()) {
        return bad(format!("non-finite vector ({}, {})", s.x, s.y));
    }
    if !(s.distance.is_finite() && s.distance >= 0.0) {
        return bad(format!("invalid distance {}", s.distance));
    }
    if let Some(o) = s.onscreen {
        if !(0.0..=1.0).contains(&o) {
            return bad(format!("onscreen score {o} outside [0, 1]"));
        }
    }
    Ok(())
}

/// Decodes frames (indexed by position) into a label set.
///
/// A slot is active when its vector norm exceeds `threshold`. Azimuths are
/// folded to the frontal half-plane. Among active same-class tracks closer
/// than [`MERGE_THRESHOLD_DEG`], only the one with the larger norm is kept.
pub fn decode_multi_accdoa(frames: &[AccdoaFrame], threshold: f64) -> Result<LabelSet> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SeldError::Config(format!("activity threshold {threshold} must be in (0, 1)")));
    }
    let mut out = LabelSet::with_max_polyphony(TRACKS);
    for (fi, frame) in frames.iter().enumerate() {
        for class in 0..NUM_CLASSES {
            let mut active: Vec<(usize, f64, f64, &AccdoaSlot)> = Vec::new();
            for track in 0..TRACKS {
                let s = &frame.slots[track][class];
                check_slot(fi, track, class, s)?;
                let norm = s.x.hypot(s.y);
                if norm > threshold {
                    let az = fold_front_back(wrap_deg(s.y.atan2(s.x).to_degrees()));
                    active.push((track, norm, az, s));
                }
            }
            active.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut kept: Vec<(usize, f64, f64, &AccdoaSlot)> = Vec::new();
            for cand in active {
                if kept.iter().all(|k| circular_distance_deg(k.2, cand.2) >= MERGE_THRESHOLD_DEG) {
                    kept.push(cand);
                }
            }
            kept.sort_by_key(|k| k.0);
            let frame_idx = u32::try_from(fi).map_err(|_| SeldError::Decode {
                frame: fi,
                message: "frame index overflow".into(),
            })?;
            for (track, _, az, s) in kept {
                out.insert(
                    frame_idx,
                    ClassId::new(class as u32)?,
                    Detection {
                        azimuth_deg: az,
                        distance: s.distance,
                        onscreen: s.onscreen.map(|o| o > 0.5),
                        track: track as u32,
                    },
                )?;
            }
        }
    }
    Ok(out)
}

/// Encodes a label set as unit vectors at the labeled azimuths, filling
/// tracks in detection order. Onscreen flags become scores 0 or 1.
pub fn encode_multi_accdoa(labels: &LabelSet, n_frames: usize) -> Result<Vec<AccdoaFrame>> {
    let mut frames = vec![AccdoaFrame::default(); n_frames];
    for (frame, class, dets) in labels.groups() {
        let f = frames.get_mut(frame as usize).ok_or_else(|| {
            SeldError::InvalidInput(format!("frame {frame} beyond {n_frames} frames"))
        })?;
        if dets.len() > TRACKS {
            return Err(SeldError::InvalidInput(format!(
                "frame {frame}, class {class}: {} detections exceed {TRACKS} tracks",
                dets.len()
            )));
        }
        for (track, d) in dets.iter().enumerate() {
            let (s, c) = d.azimuth_deg.to_radians().sin_cos();
            f.slots[track][class.index()] = AccdoaSlot {
                x: c,
                y: s,
                distance: d.distance,
                onscreen: d.onscreen.map(|o| if o { 1.0 } else { 0.0 }),
            };
        }
    }
    Ok(frames)
}
