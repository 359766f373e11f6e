//! Batch operations behind the `seld` subcommands.
//!
//! Dataset layout read by [`index_dataset`] and written by [`synth_dataset`]:
//!
//! ```text
//! ROOT/foa/**/<id>.wav        4-channel FOA recordings
//! ROOT/metadata/**/<id>.csv   source metadata (frame,class,source,azimuth,elevation,distance)
//! ROOT/frames/<id>/%06d.png   optional equirectangular frames at the video rate
//! ```
//!
//! [`convert_clips`] writes `OUT/stereo/<clip>.wav`, `OUT/metadata/<clip>.csv`,
//! `OUT/video/<clip>/%06d.png` and `OUT/failures.csv`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::audio::{foa_to_stereo, rotate_yaw};
use crate::config::PipelineConfig;
use crate::error::{Result, SeldError};
use crate::labels::{clip_window, parse_metadata, transform_clip_labels, write_metadata, MetadataSchema};
use crate::metrics::{
    apply_distance_bias, class_mean_distance, ClassMeans, LabelSet, MetricsConfig, MetricsReport, ScoreAccumulator,
};
use crate::projection::{build_map, clip_frame_count, frame_index_at, frame_path, frame_time, project, EquirectFrame, Interpolation};
use crate::sampler::{ClipSpec, RecordingEntry, RecordingIndex};
use crate::spatializer::{random_scene, render_scene, ReverbConfig, SampleBank, SceneSpec};
use crate::wav::{self, PcmFormat};

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| SeldError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| SeldError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| SeldError::io(path, e))
}

fn walk_err(e: walkdir::Error) -> SeldError {
    let path = e.path().map(Path::to_path_buf).unwrap_or_default();
    SeldError::io(path, e.into())
}

/// Files under `dir` (recursive) with extension `ext`, keyed by file stem.
/// Two files sharing a stem are an error.
pub fn files_by_stem(dir: &Path, ext: &str) -> Result<BTreeMap<String, PathBuf>> {
    if !dir.is_dir() {
        return Err(SeldError::InvalidInput(format!("{} is not a directory", dir.display())));
    }
    let mut out = BTreeMap::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(walk_err)?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if let Some(prev) = out.insert(stem.clone(), path.to_path_buf()) {
            return Err(SeldError::Validation(format!(
                "duplicate id '{stem}': {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexOutcome {
    pub index: RecordingIndex,
    /// Recordings left out, with the reason.
    pub skipped: Vec<String>,
}

/// Builds a recording index from a dataset root.
pub fn index_dataset(root: &Path) -> Result<IndexOutcome> {
    let audio = files_by_stem(&root.join("foa"), "wav")?;
    let metadata = files_by_stem(&root.join("metadata"), "csv")?;
    let frames_root = root.join("frames");
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (id, audio_path) in audio {
        let Some(metadata_path) = metadata.get(&id) else {
            skipped.push(format!("{id}: no metadata file"));
            continue;
        };
        let info = match wav::probe(&audio_path) {
            Ok(info) => info,
            Err(e) => {
                skipped.push(format!("{id}: {e}"));
                continue;
            }
        };
        if info.channels != 4 {
            skipped.push(format!("{id}: {} channels, expected 4", info.channels));
            continue;
        }
        let frames_dir = frames_root.join(&id);
        entries.push(RecordingEntry {
            recording_id: id,
            duration_s: info.duration_s(),
            audio_path,
            frames_dir: if frames_dir.is_dir() { frames_dir } else { PathBuf::new() },
            metadata_path: metadata_path.clone(),
        });
    }
    Ok(IndexOutcome {
        index: RecordingIndex::new(entries)?,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvertOptions {
    pub video: bool,
    pub interpolation: Interpolation,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self {
            video: true,
            interpolation: Interpolation::Bilinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipOutputs {
    pub clip_id: String,
    pub stereo_path: PathBuf,
    pub metadata_path: PathBuf,
    pub video_frames: u32,
}

/// Converts one clip: rotated stereo audio, rotated/folded labels and,
/// optionally, perspective frames.
pub fn convert_clip(
    entry: &RecordingEntry,
    clip: &ClipSpec,
    cfg: &PipelineConfig,
    out_dir: &Path,
    opts: &ConvertOptions,
) -> Result<ClipOutputs> {
    let start = (clip.start_s * cfg.sample_rate as f64).round() as u32;
    let foa = wav::read_foa(&entry.audio_path, start, Some(cfg.clip_samples()))?;
    if foa.sample_rate() != cfg.sample_rate {
        return Err(SeldError::InvalidInput(format!(
            "{}: sample rate {} Hz, expected {}",
            entry.audio_path.display(),
            foa.sample_rate(),
            cfg.sample_rate
        )));
    }
    let stereo = foa_to_stereo(&rotate_yaw(&foa, clip.yaw_deg));
    let stereo_path = out_dir.join("stereo").join(format!("{}.wav", clip.clip_id));
    wav::write_stereo(&stereo_path, &stereo, cfg.sample_format)?;

    let source = parse_metadata(&read_text(&entry.metadata_path)?, MetadataSchema::Source)
        .map_err(|e| SeldError::InvalidInput(format!("{}: {e}", entry.metadata_path.display())))?;
    let window = clip_window(&source, clip.start_frame(), clip.n_label_frames());
    let labels = transform_clip_labels(&window, clip.yaw_deg, &cfg.fov())?;
    let metadata_path = out_dir.join("metadata").join(format!("{}.csv", clip.clip_id));
    write_text(&metadata_path, &write_metadata(&labels, MetadataSchema::Stereo))?;

    let video_frames = if opts.video {
        convert_frames(entry, clip, cfg, &out_dir.join("video").join(&clip.clip_id), opts.interpolation)?
    } else {
        0
    };
    Ok(ClipOutputs {
        clip_id: clip.clip_id.clone(),
        stereo_path,
        metadata_path,
        video_frames,
    })
}

fn convert_frames(
    entry: &RecordingEntry,
    clip: &ClipSpec,
    cfg: &PipelineConfig,
    dir: &Path,
    interp: Interpolation,
) -> Result<u32> {
    if entry.frames_dir.as_os_str().is_empty() {
        return Err(SeldError::InvalidInput(format!("recording '{}' has no frames", entry.recording_id)));
    }
    let n = clip_frame_count(clip.clip_len_s, cfg.fps);
    let first_src = frame_index_at(clip.start_s, cfg.fps);
    let first = EquirectFrame::load(&frame_path(&entry.frames_dir, first_src))?;
    let map = build_map(clip.yaw_deg, cfg.hfov_deg, cfg.out_width, cfg.out_height, first.width(), first.height())?;
    std::fs::create_dir_all(dir).map_err(|e| SeldError::io(dir, e))?;
    (0..n).into_par_iter().try_for_each(|i| {
        let src = frame_index_at(clip.start_s + frame_time(i, cfg.fps), cfg.fps);
        let frame = if src == first_src {
            first.clone()
        } else {
            EquirectFrame::load(&frame_path(&entry.frames_dir, src))?
        };
        let out = project(&frame, &map, interp)?;
        let path = frame_path(dir, i);
        out.save(&path).map_err(|source| SeldError::Image { path, source })
    })?;
    Ok(n)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvertReport {
    pub converted: Vec<ClipOutputs>,
    /// `(clip_id, error message)`
    pub failures: Vec<(String, String)>,
}

/// Converts every clip in parallel. Per-clip failures are collected (and
/// written to `OUT/failures.csv`) instead of stopping the batch.
pub fn convert_clips(
    index: &RecordingIndex,
    clips: &[ClipSpec],
    cfg: &PipelineConfig,
    out_dir: &Path,
    opts: &ConvertOptions,
) -> Result<ConvertReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| SeldError::io(out_dir, e))?;
    let results: Vec<std::result::Result<ClipOutputs, (String, String)>> = clips
        .par_iter()
        .map(|clip| {
            let entry = index
                .get(&clip.recording_id)
                .ok_or_else(|| SeldError::InvalidInput(format!("unknown recording '{}'", clip.recording_id)));
            entry
                .and_then(|e| convert_clip(e, clip, cfg, out_dir, opts))
                .map_err(|e| (clip.clip_id.clone(), e.to_string()))
        })
        .collect();
    let mut report = ConvertReport::default();
    for r in results {
        match r {
            Ok(o) => report.converted.push(o),
            Err(f) => report.failures.push(f),
        }
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for (id, msg) in &report.failures {
        w.write_record([id, msg])
            .map_err(|e| SeldError::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| SeldError::InvalidInput(e.to_string()))?;
    write_text(&out_dir.join("failures.csv"), &String::from_utf8_lossy(&bytes))?;
    Ok(report)
}

/// Loads every `*.csv` stereo label file under `dir`, keyed by clip id.
pub fn load_label_dir(dir: &Path) -> Result<BTreeMap<String, LabelSet>> {
    let files: Vec<(String, PathBuf)> = files_by_stem(dir, "csv")?.into_iter().collect();
    files
        .par_iter()
        .map(|(id, path)| {
            let set = LabelSet::from_csv(&read_text(path)?)
                .map_err(|e| SeldError::InvalidInput(format!("{}: {e}", path.display())))?;
            Ok((id.clone(), set))
        })
        .collect()
}

fn score_clips(
    preds: &BTreeMap<String, LabelSet>,
    refs: &BTreeMap<String, LabelSet>,
    cfg: &MetricsConfig,
    allow_missing: bool,
) -> Result<MetricsReport> {
    let unknown: Vec<&str> = preds.keys().filter(|k| !refs.contains_key(*k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(SeldError::Validation(format!(
            "predictions for clips without references: {}",
            unknown.join(", ")
        )));
    }
    let missing: Vec<&str> = refs.keys().filter(|k| !preds.contains_key(*k)).map(String::as_str).collect();
    if !missing.is_empty() && !allow_missing {
        return Err(SeldError::Validation(format!(
            "missing predictions for clips: {} (use --allow-missing to count them as misses)",
            missing.join(", ")
        )));
    }
    let empty = LabelSet::new();
    let mut acc = ScoreAccumulator::new(*cfg)?;
    for (id, r) in refs {
        let p = preds.get(id).unwrap_or(&empty);
        acc.add(p, r).map_err(|e| match e {
            SeldError::Validation(m) => SeldError::Validation(format!("clip {id}: {m}")),
            SeldError::Config(m) => SeldError::Config(format!("clip {id}: {m}")),
            other => other,
        })?;
    }
    Ok(acc.finish())
}

/// Scores a prediction directory against a reference directory (files
/// matched by clip id).
pub fn eval_dirs(pred_dir: &Path, ref_dir: &Path, cfg: &MetricsConfig, allow_missing: bool) -> Result<MetricsReport> {
    let refs = load_label_dir(ref_dir)?;
    let preds = load_label_dir(pred_dir)?;
    score_clips(&preds, &refs, cfg, allow_missing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasOutcome {
    pub means: ClassMeans,
    pub original: MetricsReport,
    pub biased: MetricsReport,
}

/// Scores predictions as-is and with every distance replaced by the mean
/// training distance of its class.
pub fn bias_baseline(
    train_dir: &Path,
    pred_dir: &Path,
    ref_dir: &Path,
    cfg: &MetricsConfig,
    allow_missing: bool,
) -> Result<BiasOutcome> {
    let train = load_label_dir(train_dir)?;
    let mut pooled = LabelSet::with_max_polyphony(usize::MAX);
    for (offset, set) in train.values().enumerate() {
        // clips are pooled, so keep their frames apart
        let shift = u32::try_from(offset).unwrap_or(u32::MAX).saturating_mul(1 << 20);
        pooled.extend_records(&set.to_records(), shift)?;
    }
    let means = class_mean_distance(&pooled);
    let refs = load_label_dir(ref_dir)?;
    let preds = load_label_dir(pred_dir)?;
    let biased: BTreeMap<String, LabelSet> = preds
        .iter()
        .map(|(id, p)| Ok((id.clone(), apply_distance_bias(p, &means)?)))
        .collect::<Result<_>>()?;
    Ok(BiasOutcome {
        means,
        original: score_clips(&preds, &refs, cfg, allow_missing)?,
        biased: score_clips(&biased, &refs, cfg, allow_missing)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub n_scenes: usize,
    pub duration_s: f64,
    pub max_events: usize,
    pub ambient_level: f64,
    pub reverb: ReverbConfig,
    pub format: PcmFormat,
    pub prefix: String,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            n_scenes: 1,
            duration_s: 60.0,
            max_events: 8,
            ambient_level: 0.0,
            reverb: ReverbConfig::default(),
            format: PcmFormat::Float32,
            prefix: "synth_".into(),
        }
    }
}

/// Renders one scene into the dataset layout under `root` as recording `id`.
/// The scene description is saved next to it under `root/scenes/`.
pub fn write_scene(spec: &SceneSpec, bank: &SampleBank, root: &Path, id: &str, format: PcmFormat) -> Result<()> {
    let (foa, labels) = render_scene(spec, bank)?;
    wav::write_foa(&root.join("foa").join(format!("{id}.wav")), &foa, format)?;
    write_text(
        &root.join("metadata").join(format!("{id}.csv")),
        &write_metadata(&labels, MetadataSchema::Source),
    )?;
    write_text(&root.join("scenes").join(format!("{id}.scene")), &spec.to_text())
}

/// Generates and renders random scenes; returns the recording ids.
pub fn synth_dataset(bank: &SampleBank, root: &Path, opts: &SynthOptions, seed: u64) -> Result<Vec<String>> {
    if opts.max_events == 0 {
        return Err(SeldError::Config("max_events must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(String, u64, usize)> = (0..opts.n_scenes)
        .map(|i| {
            (
                format!("{}{i:04}", opts.prefix),
                rng.next_u64(),
                rng.random_range(1..=opts.max_events),
            )
        })
        .collect();
    jobs.par_iter()
        .map(|(id, scene_seed, n_events)| {
            let mut spec = random_scene(bank, opts.duration_s, *n_events, *scene_seed)?;
            spec.ambient_level = opts.ambient_level;
            spec.reverb = opts.reverb;
            write_scene(&spec, bank, root, id, opts.format)?;
            Ok(id.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::ClassId;

    #[test]
    fn stems_must_be_unique() {
        let dir = tempfile::tempdir().unwrap();
        write_text(&dir.path().join("a/x.csv"), "").unwrap();
        write_text(&dir.path().join("b/y.csv"), "").unwrap();
        assert_eq!(files_by_stem(dir.path(), "csv").unwrap().len(), 2);
        write_text(&dir.path().join("b/x.csv"), "").unwrap();
        assert!(files_by_stem(dir.path(), "csv").is_err());
    }

    #[test]
    fn eval_strictness() {
        let dir = tempfile::tempdir().unwrap();
        let refs = dir.path().join("refs");
        let preds = dir.path().join("preds");
        write_text(&refs.join("c1.csv"), "0,1,0,10,2,1\n").unwrap();
        write_text(&refs.join("c2.csv"), "0,1,0,10,2,1\n3,4,0,-10,1,0\n").unwrap();
        write_text(&preds.join("c1.csv"), "0,1,0,10,2,1\n").unwrap();
        let cfg = MetricsConfig::default();
        assert!(eval_dirs(&preds, &refs, &cfg, false).is_err());
        let r = eval_dirs(&preds, &refs, &cfg, true).unwrap();
        assert_eq!(r.classes[1].counts.tp, 1);
        assert_eq!(r.classes[1].counts.fn_, 1);
        assert_eq!(r.classes[4].counts.fn_, 1);
        write_text(&preds.join("c3.csv"), "").unwrap();
        assert!(eval_dirs(&preds, &refs, &cfg, true).is_err());
    }

    #[test]
    fn synth_index_convert_round() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("data");
        let mut bank = SampleBank::new();
        bank.insert(ClassId::new(3).unwrap(), "ring", (0..24_000).map(|n| (n as f64 * 0.1).sin() * 0.3).collect())
            .unwrap();
        let opts = SynthOptions { n_scenes: 2, duration_s: 6.0, max_events: 3, ..Default::default() };
        let ids = synth_dataset(&bank, &root, &opts, 5).unwrap();
        assert_eq!(ids, ["synth_0000", "synth_0001"]);
        let outcome = index_dataset(&root).unwrap();
        assert!(outcome.skipped.is_empty());
        assert_eq!(outcome.index.entries.len(), 2);
        assert!((outcome.index.entries[0].duration_s - 6.0).abs() < 1e-9);

        let cfg = PipelineConfig::default();
        let clips = crate::sampler::sample_clips(&outcome.index, 3, 1, &cfg.sampler()).unwrap();
        let out = dir.path().join("out");
        let opts = ConvertOptions { video: false, ..Default::default() };
        let report = convert_clips(&outcome.index, &clips, &cfg, &out, &opts).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        let info = wav::probe(&report.converted[0].stereo_path).unwrap();
        assert_eq!((info.channels, info.sample_rate, info.frames), (2, 24_000, 120_000));

        // video requested but the recordings have no frames: recorded, not fatal
        let report = convert_clips(&outcome.index, &clips, &cfg, &out, &ConvertOptions::default()).unwrap();
        assert_eq!(report.failures.len(), 3);
        assert_eq!(read_text(&out.join("failures.csv")).unwrap().lines().count(), 3);
    }
}
