//! Stereo sound event localization and detection (SELD) toolkit.
//!
//! Builds stereo SELD clips out of first-order Ambisonics (FOA) recordings and
//! 360° video frames, renders parametric synthetic FOA scenes, and scores
//! SELD predictions with the location-aware F-score, DOA/distance errors and
//! onscreen/offscreen accuracy.
//!
//! Module map:
//! - [`audio`]: FOA/stereo buffers, plane-wave encoding, yaw rotation, M/S downmix.
//! - [`wav`]: RIFF/WAVE reading and writing.
//! - [`labels`]: metadata CSV parsing, label rotation, front-back folding, onscreen flags.
//! - [`sampler`]: duration-weighted clip sampling.
//! - [`projection`]: equirectangular to perspective frame conversion.
//! - [`spatializer`]: synthetic scene rendering.
//! - [`metrics`]: frame-level matching and the evaluation metric suite.
//! - [`pipeline`]: batch conversion and evaluation used by the `seld` binary.

pub mod angles;
pub mod audio;
pub mod config;
pub mod error;
pub mod labels;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod sampler;
pub mod spatializer;
pub mod wav;

pub use audio::{encode_plane_wave, foa_to_stereo, rotate_yaw, FoaClip, SphericalDirection, StereoClip};
pub use config::PipelineConfig;
pub use error::{Result, SeldError};
pub use labels::{
    fold_front_back, onscreen_flag, rotate_azimuth, transform_clip_labels, ClassId, EventRecord,
    FovConfig,
};
pub use metrics::{score, LabelSet, MetricsConfig, MetricsReport};
pub use projection::{build_map, project, EquirectFrame, ProjectionMap};
pub use sampler::{sample_clips, ClipSpec, RecordingIndex};

/// Default audio sample rate in Hz.
pub const SAMPLE_RATE: u32 = 24_000;
/// Label frame hop in seconds.
pub const LABEL_FRAME_S: f64 = 0.1;
