//! Pipeline settings and their `key = value` config file.
//!
//! ```text
//! # seld.conf
//! hfov_deg = 100
//! fps = 29.97
//! seed = 42
//! sample_format = pcm16
//! ```
//!
//! Keys accept `-` or `_` interchangeably. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use crate::error::{Result, SeldError};
use crate::labels::FovConfig;
use crate::metrics::{MetricsConfig, DEFAULT_ACTIVITY_THRESHOLD};
use crate::projection::{DEFAULT_FPS, DEFAULT_HFOV_DEG, DEFAULT_OUT_HEIGHT, DEFAULT_OUT_WIDTH};
use crate::sampler::{SamplerOptions, YawMode};
use crate::wav::PcmFormat;
use crate::{LABEL_FRAME_S, SAMPLE_RATE};

/// Every recognized key, in canonical form.
pub const KEYS: &[&str] = &[
    "sample_rate",
    "clip_len_s",
    "label_frame_s",
    "hfov_deg",
    "vfov_deg",
    "out_width",
    "out_height",
    "fps",
    "doa_threshold_deg",
    "rde_threshold",
    "activity_threshold",
    "seed",
    "yaw_mode",
    "sample_format",
    "index",
    "manifest",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sample_rate: u32,
    pub clip_len_s: f64,
    pub label_frame_s: f64,
    pub hfov_deg: f64,
    /// Optional vertical FOV for onscreen flags (off by default).
    pub vfov_deg: Option<f64>,
    pub out_width: u32,
    pub out_height: u32,
    pub fps: f64,
    pub doa_threshold_deg: f64,
    pub rde_threshold: f64,
    pub activity_threshold: f64,
    pub seed: u64,
    pub yaw_mode: YawMode,
    pub sample_format: PcmFormat,
    pub index: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sample_rate: SAMPLE_RATE,
            clip_len_s: 5.0,
            label_frame_s: LABEL_FRAME_S,
            hfov_deg: DEFAULT_HFOV_DEG,
            vfov_deg: None,
            out_width: DEFAULT_OUT_WIDTH,
            out_height: DEFAULT_OUT_HEIGHT,
            fps: DEFAULT_FPS,
            doa_threshold_deg: 20.0,
            rde_threshold: 1.0,
            activity_threshold: DEFAULT_ACTIVITY_THRESHOLD,
            seed: 0,
            yaw_mode: YawMode::Degree,
            sample_format: PcmFormat::Int16,
            index: None,
            manifest: None,
            output_dir: None,
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl PipelineConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalize_key(key);
        let value = value.trim();
        let bad = || SeldError::Config(format!("invalid value '{value}' for {key}"));
        let f = || value.parse::<f64>().map_err(|_| bad());
        let u = || value.parse::<u32>().map_err(|_| bad());
        match key.as_str() {
            "sample_rate" => self.sample_rate = u()?,
            "clip_len_s" => self.clip_len_s = f()?,
            "label_frame_s" => self.label_frame_s = f()?,
            "hfov_deg" => self.hfov_deg = f()?,
            "vfov_deg" => {
                self.vfov_deg = match value {
                    "none" | "off" | "" => None,
                    _ => Some(f()?),
                }
            }
            "out_width" => self.out_width = u()?,
            "out_height" => self.out_height = u()?,
            "fps" => self.fps = f()?,
            "doa_threshold_deg" => self.doa_threshold_deg = f()?,
            "rde_threshold" => self.rde_threshold = f()?,
            "activity_threshold" => self.activity_threshold = f()?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "yaw_mode" => {
                self.yaw_mode = match value {
                    "degree" => YawMode::Degree,
                    "continuous" => YawMode::Continuous,
                    _ => return Err(bad()),
                }
            }
            "sample_format" => self.sample_format = value.parse()?,
            "index" => self.index = Some(PathBuf::from(value)),
            "manifest" => self.manifest = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            _ => return Err(SeldError::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a config file on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                SeldError::Config(format!("line {}: expected key = value, got '{line}'", i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| SeldError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SeldError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes all non-path keys in config file form.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "sample_rate = {}\nclip_len_s = {}\nlabel_frame_s = {}\nhfov_deg = {}\nvfov_deg = {}\nout_width = {}\nout_height = {}\nfps = {}\ndoa_threshold_deg = {}\nrde_threshold = {}\nactivity_threshold = {}\nseed = {}\nyaw_mode = {}\nsample_format = {}\n",
            self.sample_rate,
            self.clip_len_s,
            self.label_frame_s,
            self.hfov_deg,
            self.vfov_deg.map_or("none".to_string(), |v| v.to_string()),
            self.out_width,
            self.out_height,
            self.fps,
            self.doa_threshold_deg,
            self.rde_threshold,
            self.activity_threshold,
            self.seed,
            match self.yaw_mode {
                YawMode::Degree => "degree",
                YawMode::Continuous => "continuous",
            },
            self.sample_format,
        );
        for (k, v) in [("index", &self.index), ("manifest", &self.manifest), ("output_dir", &self.output_dir)] {
            if let Some(p) = v {
                s.push_str(&format!("{k} = {}\n", p.display()));
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        // audio is never resampled and labels always use the 100 ms grid
        if self.sample_rate != SAMPLE_RATE {
            return Err(SeldError::Config(format!(
                "sample_rate {} unsupported; only {SAMPLE_RATE} Hz is handled",
                self.sample_rate
            )));
        }
        if (self.label_frame_s - LABEL_FRAME_S).abs() > 1e-12 {
            return Err(SeldError::Config(format!(
                "label_frame_s {} unsupported; labels use {LABEL_FRAME_S} s frames",
                self.label_frame_s
            )));
        }
        let clip_frames = self.clip_len_s / LABEL_FRAME_S;
        if !(self.clip_len_s > 0.0 && (clip_frames - clip_frames.round()).abs() < 1e-9) {
            return Err(SeldError::Config(format!(
                "clip_len_s {} must be a positive multiple of {LABEL_FRAME_S} s",
                self.clip_len_s
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(SeldError::Config(format!("fps {} must be positive", self.fps)));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(SeldError::Config(format!("hfov_deg {} outside (0, 180)", self.hfov_deg)));
        }
        if self.out_width == 0 || self.out_height == 0 {
            return Err(SeldError::Config("output video dims must be non-zero".into()));
        }
        if !(self.activity_threshold > 0.0 && self.activity_threshold < 1.0) {
            return Err(SeldError::Config(format!(
                "activity_threshold {} outside (0, 1)",
                self.activity_threshold
            )));
        }
        self.fov().validate()?;
        self.metrics(false).validate()
    }

    pub fn fov(&self) -> FovConfig {
        FovConfig {
            horizontal_fov_deg: self.hfov_deg,
            vertical_fov_deg: self.vfov_deg,
        }
    }

    pub fn metrics(&self, require_onscreen_match: bool) -> MetricsConfig {
        MetricsConfig {
            doa_threshold_deg: self.doa_threshold_deg,
            rde_threshold: self.rde_threshold,
            require_onscreen_match,
            ..MetricsConfig::default()
        }
    }

    pub fn sampler(&self) -> SamplerOptions {
        SamplerOptions {
            clip_len_s: self.clip_len_s,
            yaw_mode: self.yaw_mode,
            ..SamplerOptions::default()
        }
    }

    /// Samples per clip (120000 for 5 s at 24 kHz).
    pub fn clip_samples(&self) -> u32 {
        (self.clip_len_s * self.sample_rate as f64).round() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_dataset_format() {
        let c = PipelineConfig::default();
        assert_eq!((c.sample_rate, c.out_width, c.out_height), (24_000, 640, 360));
        assert_eq!((c.clip_len_s, c.hfov_deg, c.fps), (5.0, 100.0, 29.97));
        assert_eq!(c.clip_samples(), 120_000);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn file_overrides_and_key_normalization() {
        let mut c = PipelineConfig::default();
        c.apply_text("# comment\nhfov-deg = 90\nseed=7 # trailing\nyaw_mode = continuous\nsample-format = float32\n")
            .unwrap();
        assert_eq!(c.hfov_deg, 90.0);
        assert_eq!(c.seed, 7);
        assert_eq!(c.yaw_mode, YawMode::Continuous);
        assert_eq!(c.sample_format, PcmFormat::Float32);
    }

    #[test]
    fn text_round_trip() {
        let c = PipelineConfig {
            vfov_deg: Some(60.0),
            output_dir: Some("out".into()),
            ..Default::default()
        };
        let mut back = PipelineConfig::default();
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(KEYS.len(), 17);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut c = PipelineConfig::default();
        assert!(c.set("bogus", "1").is_err());
        assert!(c.set("fps", "fast").is_err());
        assert!(c.apply_text("hfov_deg 90\n").is_err());
        for (k, v) in [("sample_rate", "48000"), ("clip_len_s", "0.25"), ("hfov_deg", "180"), ("rde_threshold", "0")] {
            let mut c = PipelineConfig::default();
            c.set(k, v).unwrap();
            assert!(c.validate().is_err(), "{k} = {v}");
        }
    }
}
