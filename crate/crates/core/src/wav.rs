//! RIFF/WAVE I/O. Integer PCM (16/24/32-bit) and 32-bit float input are
//! normalized to `[-1, 1]`; output is 16-bit PCM by default or 32-bit float.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::audio::{FoaClip, StereoClip};
use crate::error::{Result, SeldError};

/// Output sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcmFormat {
    #[default]
    Int16,
    Float32,
}

impl std::str::FromStr for PcmFormat {
    type Err = SeldError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" | "int16" | "16" => Ok(PcmFormat::Int16),
            "float32" | "f32" | "32f" => Ok(PcmFormat::Float32),
            other => Err(SeldError::Config(format!(
                "unknown sample format '{other}' (expected pcm16 or float32)"
            ))),
        }
    }
}

impl std::fmt::Display for PcmFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PcmFormat::Int16 => "pcm16",
            PcmFormat::Float32 => "float32",
        })
    }
}

/// Header summary of a WAV file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavInfo {
    pub channels: u16,
    pub sample_rate: u32,
    pub frames: u32,
    pub bits_per_sample: u16,
    pub float: bool,
}

impl WavInfo {
    pub fn duration_s(&self) -> f64 {
        self.frames as f64 / self.sample_rate as f64
    }
}

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> SeldError + '_ {
    move |source| SeldError::Wav {
        path: path.to_path_buf(),
        source,
    }
}

fn open(path: &Path) -> Result<WavReader<std::io::BufReader<std::fs::File>>> {
    WavReader::open(path).map_err(wav_err(path))
}

pub fn probe(path: &Path) -> Result<WavInfo> {
    let reader = open(path)?;
    let spec = reader.spec();
    Ok(WavInfo {
        channels: spec.channels,
        sample_rate: spec.sample_rate,
        frames: reader.duration(),
        bits_per_sample: spec.bits_per_sample,
        float: spec.sample_format == SampleFormat::Float,
    })
}

/// Reads `frames` sample frames starting at frame `start` (or to the end when
/// `frames` is `None`), de-interleaved into channels.
pub fn read_channels(
    path: &Path,
    start: u32,
    frames: Option<u32>,
) -> Result<(Vec<Vec<f64>>, u32)> {
    let mut reader = open(path)?;
    let spec = reader.spec();
    let total = reader.duration();
    if start > total {
        return Err(SeldError::InvalidInput(format!(
            "{}: start frame {start} beyond end ({total} frames)",
            path.display()
        )));
    }
    let count = frames.unwrap_or(total - start);
    if start as u64 + count as u64 > total as u64 {
        return Err(SeldError::InvalidInput(format!(
            "{}: window [{start}, {}) exceeds {total} frames",
            path.display(),
            start as u64 + count as u64
        )));
    }
    reader.seek(start).map_err(|e| SeldError::io(path, e))?;

    let n_ch = spec.channels as usize;
    let n_samples = count as usize * n_ch;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .take(n_samples)
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .take(n_samples)
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?
        }
        (fmt, bits) => {
            return Err(SeldError::InvalidInput(format!(
                "{}: unsupported sample format {fmt:?} {bits}-bit",
                path.display()
            )))
        }
    };
    if interleaved.len() != n_samples {
        return Err(SeldError::InvalidInput(format!(
            "{}: truncated data ({} of {n_samples} samples)",
            path.display(),
            interleaved.len()
        )));
    }

    let mut channels = vec![Vec::with_capacity(count as usize); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (ch, &v) in channels.iter_mut().zip(frame) {
            ch.push(v);
        }
    }
    Ok((channels, spec.sample_rate))
}

/// Reads a 4-channel FOA window.
pub fn read_foa(path: &Path, start: u32, frames: Option<u32>) -> Result<FoaClip> {
    let (channels, sr) = read_channels(path, start, frames)?;
    if channels.len() != 4 {
        return Err(SeldError::InvalidInput(format!(
            "{}: expected 4-channel FOA, found {} channels",
            path.display(),
            channels.len()
        )));
    }
    FoaClip::from_channels(channels, sr)
}

/// Reads a whole mono file.
pub fn read_mono(path: &Path) -> Result<(Vec<f64>, u32)> {
    let (mut channels, sr) = read_channels(path, 0, None)?;
    if channels.len() != 1 {
        return Err(SeldError::InvalidInput(format!(
            "{}: expected mono, found {} channels",
            path.display(),
            channels.len()
        )));
    }
    Ok((channels.pop().unwrap_or_default(), sr))
}

fn to_i16(v: f64) -> i16 {
    (v * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Writes planar channels, interleaving them.
pub fn write_channels(
    path: &Path,
    channels: &[&[f64]],
    sample_rate: u32,
    format: PcmFormat,
) -> Result<()> {
    let n_ch = channels.len();
    if n_ch == 0 || channels.iter().any(|c| c.len() != channels[0].len()) {
        return Err(SeldError::InvalidInput(
            "write requires at least one channel and equal lengths".into(),
        ));
    }
    let spec = WavSpec {
        channels: n_ch as u16,
        sample_rate,
        bits_per_sample: match format {
            PcmFormat::Int16 => 16,
            PcmFormat::Float32 => 32,
        },
        sample_format: match format {
            PcmFormat::Int16 => SampleFormat::Int,
            PcmFormat::Float32 => SampleFormat::Float,
        },
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| SeldError::io(parent, e))?;
    }
    let mut writer = WavWriter::create(path, spec).map_err(wav_err(path))?;
    for i in 0..channels[0].len() {
        for ch in channels {
            match format {
                PcmFormat::Int16 => writer.write_sample(to_i16(ch[i])),
                PcmFormat::Float32 => writer.write_sample(ch[i] as f32),
            }
            .map_err(wav_err(path))?;
        }
    }
    writer.finalize().map_err(wav_err(path))
}

pub fn write_stereo(path: &Path, clip: &StereoClip, format: PcmFormat) -> Result<()> {
    write_channels(path, &[clip.left(), clip.right()], clip.sample_rate(), format)
}

pub fn write_foa(path: &Path, clip: &FoaClip, format: PcmFormat) -> Result<()> {
    let ch = clip.channels();
    write_channels(path, &[&ch[0], &ch[1], &ch[2], &ch[3]], clip.sample_rate(), format)
}
