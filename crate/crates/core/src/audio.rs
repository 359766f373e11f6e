//! First-order Ambisonics buffers, plane-wave encoding, yaw rotation and the
//! mid-side stereo downmix.
//!
//! FOA channels follow ACN ordering with SN3D normalization: `[W, Y, Z, X]`.
//! The stereo format emulates two coincident cardioids pointing at ±90°:
//!
//! ```text
//! L(n) = W(n) + Y(n)
//! R(n) = W(n) - Y(n)
//! ```

use crate::angles::sin_cos_deg;
use crate::error::{Result, SeldError};
use crate::SAMPLE_RATE;

/// ACN channel indices.
pub const W: usize = 0;
pub const Y: usize = 1;
pub const Z: usize = 2;
pub const X: usize = 3;

/// Direction of a plane wave in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl SphericalDirection {
    /// Azimuth must lie in `[-180, 180)`, elevation in `[-90, 90]`.
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !(-180.0..180.0).contains(&azimuth_deg) {
            return Err(SeldError::InvalidInput(format!(
                "azimuth {azimuth_deg} outside [-180, 180)"
            )));
        }
        if !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(SeldError::InvalidInput(format!(
                "elevation {elevation_deg} outside [-90, 90]"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
        })
    }

    /// Horizontal direction (zero elevation).
    pub fn horizontal(azimuth_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg, 0.0)
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    /// SN3D first-order gains in ACN order `[W, Y, Z, X]`.
    pub fn sn3d_gains(&self) -> [f64; 4] {
        let (sin_az, cos_az) = sin_cos_deg(self.azimuth_deg);
        let (sin_el, cos_el) = sin_cos_deg(self.elevation_deg);
        [1.0, sin_az * cos_el, sin_el, cos_az * cos_el]
    }
}

/// A four-channel FOA buffer (ACN/SN3D, `[W, Y, Z, X]`).
#[derive(Debug, Clone, PartialEq)]
pub struct FoaClip {
    channels: [Vec<f64>; 4],
    sample_rate: u32,
}

impl FoaClip {
    pub fn new(channels: [Vec<f64>; 4], sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(SeldError::InvalidInput("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(SeldError::InvalidInput(
                "FOA channels must have identical lengths".into(),
            ));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    /// Builds a clip from a vector of channels, checking there are exactly four.
    pub fn from_channels(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        let arr: [Vec<f64>; 4] = channels.try_into().map_err(|v: Vec<Vec<f64>>| {
            SeldError::InvalidInput(format!("expected 4 FOA channels, got {}", v.len()))
        })?;
        Self::new(arr, sample_rate)
    }

    pub fn silent(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(
            [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            sample_rate,
        )
    }

    pub fn len(&self) -> usize {
        self.channels[W].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> &[Vec<f64>; 4] {
        &self.channels
    }

    pub fn channel(&self, acn: usize) -> &[f64] {
        &self.channels[acn]
    }

    pub fn w(&self) -> &[f64] {
        &self.channels[W]
    }

    pub fn y(&self) -> &[f64] {
        &self.channels[Y]
    }

    pub fn z(&self) -> &[f64] {
        &self.channels[Z]
    }

    pub fn x(&self) -> &[f64] {
        &self.channels[X]
    }

    pub fn into_channels(self) -> [Vec<f64>; 4] {
        self.channels
    }

    /// Copies `len` samples starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<FoaClip> {
        let end = start.checked_add(len).filter(|&e| e <= self.len()).ok_or_else(|| {
            SeldError::InvalidInput(format!(
                "slice [{start}, {start}+{len}) exceeds clip length {}",
                self.len()
            ))
        })?;
        Ok(FoaClip {
            channels: std::array::from_fn(|c| self.channels[c][start..end].to_vec()),
            sample_rate: self.sample_rate,
        })
    }

    /// Adds `other` sample-wise into `self`.
    pub fn mix_in(&mut self, other: &FoaClip) -> Result<()> {
        if other.len() != self.len() || other.sample_rate != self.sample_rate {
            return Err(SeldError::InvalidInput(
                "cannot mix FOA clips of different length or sample rate".into(),
            ));
        }
        for (dst, src) in self.channels.iter_mut().zip(other.channels.iter()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        Ok(())
    }
}

/// A two-channel `[L, R]` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoClip {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl StereoClip {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(SeldError::InvalidInput(
                "stereo channels must have identical lengths".into(),
            ));
        }
        if sample_rate == 0 {
            return Err(SeldError::InvalidInput("sample rate must be positive".into()));
        }
        Ok(Self {
            left,
            right,
            sample_rate,
        })
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
}

/// Encodes a mono signal as a plane wave from `dir` with linear `gain`.
///
/// `W = g·s`, `Y = g·sin(az)cos(el)·s`, `Z = g·sin(el)·s`, `X = g·cos(az)cos(el)·s`.
pub fn encode_plane_wave(signal: &[f64], dir: SphericalDirection, gain: f64) -> Result<FoaClip> {
    encode_plane_wave_at(signal, dir, gain, SAMPLE_RATE)
}

pub fn encode_plane_wave_at(
    signal: &[f64],
    dir: SphericalDirection,
    gain: f64,
    sample_rate: u32,
) -> Result<FoaClip> {
    if signal.is_empty() {
        return Err(SeldError::InvalidInput("cannot encode an empty signal".into()));
    }
    if !gain.is_finite() {
        return Err(SeldError::InvalidInput(format!("non-finite gain {gain}")));
    }
    let coeffs = dir.sn3d_gains().map(|c| c * gain);
    let channels = std::array::from_fn(|ch| signal.iter().map(|s| coeffs[ch] * s).collect());
    FoaClip::new(channels, sample_rate)
}

/// Rotates the sound field about the vertical axis so that the direction at
/// azimuth `yaw_deg` becomes the new front.
///
/// A plane wave from azimuth `az` ends up at `az - yaw`. W and Z are untouched.
pub fn rotate_yaw(foa: &FoaClip, yaw_deg: f64) -> FoaClip {
    let (s, c) = sin_cos_deg(yaw_deg);
    let [w, y, z, x] = &foa.channels;
    let mut new_x = Vec::with_capacity(x.len());
    let mut new_y = Vec::with_capacity(y.len());
    for (&xi, &yi) in x.iter().zip(y) {
        new_x.push(c * xi + s * yi);
        new_y.push(-s * xi + c * yi);
    }
    FoaClip {
        channels: [w.clone(), new_y, z.clone(), new_x],
        sample_rate: foa.sample_rate,
    }
}

/// Full orientation request. Only yaw is supported; the stereo pipeline keeps
/// the viewing elevation at 0°.
pub fn rotate(foa: &FoaClip, yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Result<FoaClip> {
    if pitch_deg != 0.0 || roll_deg != 0.0 {
        return Err(SeldError::Unsupported(format!(
            "pitch/roll rotation (pitch {pitch_deg}, roll {roll_deg}); only yaw is supported"
        )));
    }
    Ok(rotate_yaw(foa, yaw_deg))
}

/// M/S downmix: `L = W + Y`, `R = W - Y`. Z and X are discarded.
pub fn foa_to_stereo(foa: &FoaClip) -> StereoClip {
    let (left, right) = foa
        .w()
        .iter()
        .zip(foa.y())
        .map(|(&w, &y)| (w + y, w - y))
        .unzip();
    StereoClip {
        left,
        right,
        sample_rate: foa.sample_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(az: f64) -> SphericalDirection {
        SphericalDirection::horizontal(az).unwrap()
    }

    fn first_frame(foa: &FoaClip) -> [f64; 4] {
        std::array::from_fn(|c| foa.channel(c)[0])
    }

    #[test]
    fn encode_front() {
        let foa = encode_plane_wave(&[1.0], dir(0.0), 1.0).unwrap();
        assert_eq!(first_frame(&foa), [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn encode_hard_left() {
        let foa = encode_plane_wave(&[1.0], dir(90.0), 1.0).unwrap();
        assert_eq!(first_frame(&foa), [1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn encode_thirty_degrees_matches_scalar_trig() {
        let foa = encode_plane_wave(&[1.0], dir(30.0), 1.0).unwrap();
        let rad = 30.0f64.to_radians();
        let [w, y, z, x] = first_frame(&foa);
        assert_eq!(w, 1.0);
        assert_eq!(z, 0.0);
        assert!((y - rad.sin()).abs() < 1e-15);
        assert!((x - rad.cos()).abs() < 1e-15);
        assert!((y - 0.5).abs() < 1e-15);
        assert!((x - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn encode_elevation_and_gain() {
        let d = SphericalDirection::new(0.0, 90.0).unwrap();
        let foa = encode_plane_wave(&[2.0], d, 0.5).unwrap();
        assert_eq!(first_frame(&foa), [1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn encode_rejects_empty_signal() {
        assert!(matches!(
            encode_plane_wave(&[], dir(0.0), 1.0),
            Err(SeldError::InvalidInput(_))
        ));
    }

    #[test]
    fn direction_ranges() {
        assert!(SphericalDirection::new(180.0, 0.0).is_err());
        assert!(SphericalDirection::new(-180.0, 0.0).is_ok());
        assert!(SphericalDirection::new(0.0, 90.5).is_err());
    }

    #[test]
    fn foa_invariants() {
        assert!(FoaClip::new([vec![0.0; 2], vec![0.0; 2], vec![0.0; 1], vec![0.0; 2]], 24_000).is_err());
        assert!(FoaClip::silent(4, 0).is_err());
        assert!(FoaClip::from_channels(vec![vec![0.0]; 3], 24_000).is_err());
    }

    #[test]
    fn zero_yaw_is_identity() {
        let s: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let foa = encode_plane_wave(&s, dir(-63.0), 0.8).unwrap();
        assert_eq!(rotate_yaw(&foa, 0.0), foa);
    }

    #[test]
    fn rotation_moves_source_to_front() {
        let s = [0.25, -0.5, 1.0];
        let rotated = rotate_yaw(&encode_plane_wave(&s, dir(30.0), 1.0).unwrap(), 30.0);
        let front = encode_plane_wave(&s, dir(0.0), 1.0).unwrap();
        for c in 0..4 {
            for (a, b) in rotated.channel(c).iter().zip(front.channel(c)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rotation_composes() {
        let s: Vec<f64> = (0..32).map(|i| (i as f64 * 0.11).cos()).collect();
        let foa = encode_plane_wave(&s, SphericalDirection::new(12.0, 20.0).unwrap(), 1.0).unwrap();
        let twice = rotate_yaw(&rotate_yaw(&foa, 40.0), 50.0);
        let once = rotate_yaw(&foa, 90.0);
        for c in 0..4 {
            for (a, b) in twice.channel(c).iter().zip(once.channel(c)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rotation_keeps_w_and_z() {
        let foa = FoaClip::new([vec![0.3, 0.1], vec![0.2, -0.4], vec![0.7, 0.9], vec![-0.1, 0.5]], 24_000).unwrap();
        let r = rotate_yaw(&foa, 123.4);
        assert_eq!(r.w(), foa.w());
        assert_eq!(r.z(), foa.z());
    }

    #[test]
    fn pitch_and_roll_are_rejected() {
        let foa = FoaClip::silent(1, 24_000).unwrap();
        assert!(matches!(rotate(&foa, 10.0, 5.0, 0.0), Err(SeldError::Unsupported(_))));
        assert!(matches!(rotate(&foa, 10.0, 0.0, -1.0), Err(SeldError::Unsupported(_))));
        assert!(rotate(&foa, 10.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn stereo_from_w_and_y() {
        let foa = FoaClip::new([vec![1.0], vec![0.5], vec![9.0], vec![-3.0]], 24_000).unwrap();
        let st = foa_to_stereo(&foa);
        assert_eq!(st.left(), &[1.5]);
        assert_eq!(st.right(), &[0.5]);
    }

    #[test]
    fn stereo_front_source_is_balanced() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let st = foa_to_stereo(&encode_plane_wave(&s, dir(0.0), 1.0).unwrap());
        assert_eq!(st.left(), st.right());
    }

    #[test]
    fn stereo_left_source() {
        let st = foa_to_stereo(&encode_plane_wave(&[1.0], dir(90.0), 1.0).unwrap());
        assert_eq!(st.left(), &[2.0]);
        assert_eq!(st.right(), &[0.0]);
    }

    #[test]
    fn slice_and_mix() {
        let mut a = FoaClip::new([vec![1.0, 2.0, 3.0], vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]], 24_000).unwrap();
        let b = a.slice(1, 2).unwrap();
        assert_eq!(b.w(), &[2.0, 3.0]);
        assert!(a.slice(2, 2).is_err());
        let c = a.clone();
        a.mix_in(&c).unwrap();
        assert_eq!(a.w(), &[2.0, 4.0, 6.0]);
        assert!(a.mix_in(&b).is_err());
    }
}
