//! Clip sampling: duration-weighted recording choice, uniform start time on
//! the label grid and uniform viewing yaw over 360°.
//!
//! The random stream is ChaCha8 seeded with [`rand::SeedableRng::seed_from_u64`];
//! every draw consumes one `u64` mapped to `[0, 1)` with 53-bit precision, so
//! clip lists are reproducible across platforms for a given seed.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SeldError};
use crate::LABEL_FRAME_S;

/// One recording available for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingEntry {
    pub recording_id: String,
    pub duration_s: f64,
    pub audio_path: PathBuf,
    pub frames_dir: PathBuf,
    pub metadata_path: PathBuf,
}

/// The set of recordings, read from `recording_id,duration_s,audio_path,frames_dir,metadata_path`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingIndex {
    pub entries: Vec<RecordingEntry>,
}

impl RecordingIndex {
    pub fn new(entries: Vec<RecordingEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.recording_id.as_str()) {
                return Err(SeldError::Config(format!(
                    "duplicate recording id '{}'",
                    e.recording_id
                )));
            }
            if !(e.duration_s.is_finite() && e.duration_s > 0.0) {
                return Err(SeldError::Config(format!(
                    "recording '{}' has invalid duration {}",
                    e.recording_id, e.duration_s
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, recording_id: &str) -> Option<&RecordingEntry> {
        self.entries.iter().find(|e| e.recording_id == recording_id)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| {
                SeldError::parse(e.position().map_or(0, |p| p.line()), e.to_string())
            })?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != 5 {
                return Err(SeldError::parse(
                    line,
                    format!("expected 5 index columns, found {}", row.len()),
                ));
            }
            let duration_s = row[1]
                .parse::<f64>()
                .map_err(|_| SeldError::parse(line, format!("bad duration '{}'", &row[1])))?;
            entries.push(RecordingEntry {
                recording_id: row[0].to_string(),
                duration_s,
                audio_path: PathBuf::from(&row[2]),
                frames_dir: PathBuf::from(&row[3]),
                metadata_path: PathBuf::from(&row[4]),
            });
        }
        Self::new(entries)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for e in &self.entries {
            // writing into a Vec cannot fail
            let _ = w.write_record([
                e.recording_id.clone(),
                format!("{}", e.duration_s),
                e.audio_path.display().to_string(),
                e.frames_dir.display().to_string(),
                e.metadata_path.display().to_string(),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

/// A sampled clip definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipSpec {
    pub clip_id: String,
    pub recording_id: String,
    pub start_s: f64,
    /// Viewing yaw in `[0, 360)`.
    pub yaw_deg: f64,
    pub clip_len_s: f64,
}

impl ClipSpec {
    /// First label frame of the clip in the source recording.
    pub fn start_frame(&self) -> u32 {
        (self.start_s / LABEL_FRAME_S).round() as u32
    }

    /// Number of label frames in the clip (50 for 5 s).
    pub fn n_label_frames(&self) -> u32 {
        (self.clip_len_s / LABEL_FRAME_S).round() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YawMode {
    /// Whole degrees 0..=359.
    #[default]
    Degree,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOptions {
    pub clip_len_s: f64,
    pub yaw_mode: YawMode,
    pub clip_id_prefix: String,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            clip_len_s: 5.0,
            yaw_mode: YawMode::Degree,
            clip_id_prefix: "clip_".into(),
        }
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `n` clips from `index`.
///
/// Recordings are chosen with probability proportional to duration. Clip
/// starts are uniform over the 100 ms grid positions that keep the clip
/// in-bounds. No filtering on event content is applied.
pub fn sample_clips(
    index: &RecordingIndex,
    n: usize,
    seed: u64,
    options: &SamplerOptions,
) -> Result<Vec<ClipSpec>> {
    let clip_len_s = options.clip_len_s;
    if !(clip_len_s.is_finite() && clip_len_s > 0.0) {
        return Err(SeldError::Config(format!("invalid clip length {clip_len_s}")));
    }
    if index.entries.is_empty() {
        return Err(SeldError::Config("recording index is empty".into()));
    }
    let short: Vec<&str> = index
        .entries
        .iter()
        .filter(|e| e.duration_s + 1e-9 < clip_len_s)
        .map(|e| e.recording_id.as_str())
        .collect();
    if !short.is_empty() {
        return Err(SeldError::Config(format!(
            "recordings shorter than {clip_len_s} s: {}",
            short.join(", ")
        )));
    }

    let mut cumulative = Vec::with_capacity(index.entries.len());
    let mut total = 0.0;
    for e in &index.entries {
        total += e.duration_s;
        cumulative.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clips = Vec::with_capacity(n);
    for i in 0..n {
        let target = unit(&mut rng) * total;
        let k = cumulative
            .partition_point(|&c| c <= target)
            .min(index.entries.len() - 1);
        let entry = &index.entries[k];

        let slack_frames = ((entry.duration_s - clip_len_s) / LABEL_FRAME_S + 1e-9).floor() as u64;
        let start_frame = ((unit(&mut rng) * (slack_frames + 1) as f64) as u64).min(slack_frames);
        // division keeps start_s equal to its shortest decimal form (e.g. 0.3)
        let start_s = start_frame as f64 / (1.0 / LABEL_FRAME_S).round();

        let u = unit(&mut rng);
        let yaw_deg = match options.yaw_mode {
            YawMode::Degree => ((u * 360.0) as u32).min(359) as f64,
            YawMode::Continuous => (u * 360.0).min(360.0 - f64::EPSILON * 360.0),
        };

        clips.push(ClipSpec {
            clip_id: format!("{}{:06}", options.clip_id_prefix, i),
            recording_id: entry.recording_id.clone(),
            start_s,
            yaw_deg,
            clip_len_s,
        });
    }
    Ok(clips)
}

/// Writes the manifest CSV `clip_id,recording_id,start_s,yaw_deg,seed`.
pub fn write_manifest(clips: &[ClipSpec], seed: u64) -> String {
    let mut out = String::new();
    for c in clips {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.clip_id, c.recording_id, c.start_s, c.yaw_deg, seed
        );
    }
    out
}

/// Reads a manifest; returns the clips and the recorded seed (if any rows).
pub fn parse_manifest(text: &str, clip_len_s: f64) -> Result<(Vec<ClipSpec>, Option<u64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut clips = Vec::new();
    let mut seed = None;
    let mut ids = HashSet::new();
    for row in reader.records() {
        let row = row
            .map_err(|e| SeldError::parse(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 5 {
            return Err(SeldError::parse(
                line,
                format!("expected 5 manifest columns, found {}", row.len()),
            ));
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|_| SeldError::parse(line, format!("bad {name} '{}'", &row[i])))
        };
        let start_s = num(2, "start_s")?;
        let yaw_deg = num(3, "yaw_deg")?;
        if start_s < 0.0 || !(0.0..360.0).contains(&yaw_deg) {
            return Err(SeldError::Validation(format!(
                "line {line}: start {start_s} or yaw {yaw_deg} out of range"
            )));
        }
        seed = Some(
            row[4]
                .parse::<u64>()
                .map_err(|_| SeldError::parse(line, format!("bad seed '{}'", &row[4])))?,
        );
        if !ids.insert(row[0].to_string()) {
            return Err(SeldError::Validation(format!(
                "line {line}: duplicate clip id '{}'",
                &row[0]
            )));
        }
        clips.push(ClipSpec {
            clip_id: row[0].to_string(),
            recording_id: row[1].to_string(),
            start_s,
            yaw_deg,
            clip_len_s,
        });
    }
    Ok((clips, seed))
}
