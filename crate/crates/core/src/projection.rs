//! Equirectangular 360° frames to perspective (pinhole) frames.
//!
//! Longitude is left-positive like audio azimuth: equirect column 0 sits at
//! +180°, the middle column at 0°, and longitude decreases to the right.
//! Output pixel `(i, j)` is treated as the point `(i, j)` on the image plane,
//! with the principal point at `(out_w/2, out_h/2)` and focal length
//! `f = (out_w/2) / tan(hfov/2)`.

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};

use crate::angles::{sin_cos_deg, wrap_deg};
use crate::error::{Result, SeldError};

pub const DEFAULT_HFOV_DEG: f64 = 100.0;
pub const DEFAULT_OUT_WIDTH: u32 = 640;
pub const DEFAULT_OUT_HEIGHT: u32 = 360;
pub const DEFAULT_FPS: f64 = 29.97;

/// A 2:1 RGB panorama.
#[derive(Debug, Clone, PartialEq)]
pub struct EquirectFrame(RgbImage);

impl EquirectFrame {
    pub fn new(image: RgbImage) -> Result<Self> {
        let (w, h) = image.dimensions();
        if w == 0 || h == 0 || w != 2 * h {
            return Err(SeldError::InvalidInput(format!(
                "equirectangular frame must be 2:1 and non-empty, got {w}x{h}"
            )));
        }
        Ok(Self(image))
    }

    /// From packed 8-bit RGB rows.
    pub fn from_raw(width: u32, height: u32, rgb: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * 3;
        if rgb.len() != expected {
            return Err(SeldError::InvalidInput(format!(
                "{width}x{height} RGB needs {expected} bytes, got {}",
                rgb.len()
            )));
        }
        let img = RgbImage::from_raw(width, height, rgb)
            .ok_or_else(|| SeldError::InvalidInput("RGB buffer does not match dimensions".into()))?;
        Self::new(img)
    }

    pub fn width(&self) -> u32 {
        self.0.width()
    }

    pub fn height(&self) -> u32 {
        self.0.height()
    }

    pub fn image(&self) -> &RgbImage {
        &self.0
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|source| SeldError::Image {
                path: path.to_path_buf(),
                source,
            })?
            .to_rgb8();
        Self::new(img)
    }

    /// Longitude (degrees) of the continuous horizontal coordinate `x`.
    pub fn lon_of_x(&self, x: f64) -> f64 {
        180.0 - 360.0 * x / self.width() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

/// Per-output-pixel sampling coordinates into an equirect grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMap {
    yaw_deg: f64,
    hfov_deg: f64,
    out_w: u32,
    out_h: u32,
    eq_w: u32,
    eq_h: u32,
    /// Fractional `(col, row)` in pixel-index units, row-major over the output.
    coords: Vec<(f64, f64)>,
}

impl ProjectionMap {
    pub fn yaw_deg(&self) -> f64 {
        self.yaw_deg
    }

    pub fn hfov_deg(&self) -> f64 {
        self.hfov_deg
    }

    pub fn out_dims(&self) -> (u32, u32) {
        (self.out_w, self.out_h)
    }

    pub fn eq_dims(&self) -> (u32, u32) {
        (self.eq_w, self.eq_h)
    }

    pub fn focal_px(&self) -> f64 {
        focal_px(self.out_w, self.hfov_deg)
    }

    /// Vertical FOV implied by the pinhole aspect ratio.
    pub fn vertical_fov_deg(&self) -> f64 {
        vertical_fov_deg(self.hfov_deg, self.out_w, self.out_h)
    }

    /// Source `(col, row)` for output pixel `(i, j)`.
    pub fn source_coord(&self, i: u32, j: u32) -> (f64, f64) {
        self.coords[(j * self.out_w + i) as usize]
    }

    /// Viewing direction `(lon, lat)` in degrees of the image-plane point `(x, y)`.
    pub fn direction(&self, x: f64, y: f64) -> (f64, f64) {
        pixel_direction(x, y, self.yaw_deg, self.focal_px(), self.out_w, self.out_h)
    }

    /// Inverse of [`direction`](Self::direction): image-plane point of a
    /// world direction, or `None` when it lies behind the camera.
    pub fn image_point(&self, lon_deg: f64, lat_deg: f64) -> Option<(f64, f64)> {
        let f = self.focal_px();
        let (sin_dl, cos_dl) = sin_cos_deg(wrap_deg(lon_deg - self.yaw_deg));
        let (sin_lat, cos_lat) = sin_cos_deg(lat_deg);
        let forward = cos_lat * cos_dl;
        if forward <= 0.0 {
            return None;
        }
        let left = cos_lat * sin_dl;
        let x = self.out_w as f64 / 2.0 - f * left / forward;
        let y = self.out_h as f64 / 2.0 - f * sin_lat / forward;
        Some((x, y))
    }
}

pub fn focal_px(out_w: u32, hfov_deg: f64) -> f64 {
    (out_w as f64 / 2.0) / (hfov_deg / 2.0).to_radians().tan()
}

/// `2·atan(tan(hfov/2)·out_h/out_w)` in degrees.
pub fn vertical_fov_deg(hfov_deg: f64, out_w: u32, out_h: u32) -> f64 {
    2.0 * ((hfov_deg / 2.0).to_radians().tan() * out_h as f64 / out_w as f64)
        .atan()
        .to_degrees()
}

fn pixel_direction(x: f64, y: f64, yaw_deg: f64, f: f64, out_w: u32, out_h: u32) -> (f64, f64) {
    let left = -(x - out_w as f64 / 2.0);
    let up = -(y - out_h as f64 / 2.0);
    let lon = if left == 0.0 {
        yaw_deg
    } else {
        yaw_deg + left.atan2(f).to_degrees()
    };
    let lat = up.atan2(f.hypot(left)).to_degrees();
    (wrap_deg(lon), lat)
}

/// Precomputes the sampling map for a view at `yaw_deg`.
pub fn build_map(
    yaw_deg: f64,
    hfov_deg: f64,
    out_w: u32,
    out_h: u32,
    eq_w: u32,
    eq_h: u32,
) -> Result<ProjectionMap> {
    if eq_h == 0 || eq_w != 2 * eq_h {
        return Err(SeldError::Config(format!(
            "equirect dims must be 2:1 and non-empty, got {eq_w}x{eq_h}"
        )));
    }
    if out_w == 0 || out_h == 0 {
        return Err(SeldError::Config(format!("invalid output dims {out_w}x{out_h}")));
    }
    if !(hfov_deg > 0.0 && hfov_deg < 180.0) {
        return Err(SeldError::Config(format!(
            "horizontal FOV {hfov_deg} outside (0, 180)"
        )));
    }
    if !yaw_deg.is_finite() {
        return Err(SeldError::Config(format!("non-finite yaw {yaw_deg}")));
    }
    let f = focal_px(out_w, hfov_deg);
    let (ew, eh) = (eq_w as f64, eq_h as f64);
    let mut coords = Vec::with_capacity(out_w as usize * out_h as usize);
    for j in 0..out_h {
        for i in 0..out_w {
            let (lon, lat) = pixel_direction(i as f64, j as f64, yaw_deg, f, out_w, out_h);
            let col = (180.0 - lon) / 360.0 * ew - 0.5;
            let row = (90.0 - lat) / 180.0 * eh - 0.5;
            coords.push((col, row));
        }
    }
    Ok(ProjectionMap {
        yaw_deg,
        hfov_deg,
        out_w,
        out_h,
        eq_w,
        eq_h,
        coords,
    })
}

fn sample_bilinear(img: &RgbImage, col: f64, row: f64) -> Rgb<u8> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let c0 = col.floor();
    let r0 = row.floor();
    let fc = col - c0;
    let fr = row - r0;
    let c0 = c0 as i64;
    let r0 = r0 as i64;
    let wrap = |c: i64| c.rem_euclid(w) as u32;
    let clamp = |r: i64| r.clamp(0, h - 1) as u32;
    let p00 = img.get_pixel(wrap(c0), clamp(r0)).0;
    let p01 = img.get_pixel(wrap(c0 + 1), clamp(r0)).0;
    let p10 = img.get_pixel(wrap(c0), clamp(r0 + 1)).0;
    let p11 = img.get_pixel(wrap(c0 + 1), clamp(r0 + 1)).0;
    Rgb(std::array::from_fn(|k| {
        let top = p00[k] as f64 + (p01[k] as f64 - p00[k] as f64) * fc;
        let bottom = p10[k] as f64 + (p11[k] as f64 - p10[k] as f64) * fc;
        (top + (bottom - top) * fr).round().clamp(0.0, 255.0) as u8
    }))
}

fn sample_nearest(img: &RgbImage, col: f64, row: f64) -> Rgb<u8> {
    let c = (col.round() as i64).rem_euclid(img.width() as i64) as u32;
    let r = (row.round() as i64).clamp(0, img.height() as i64 - 1) as u32;
    *img.get_pixel(c, r)
}

/// Renders the perspective view described by `map`.
pub fn project(frame: &EquirectFrame, map: &ProjectionMap, interp: Interpolation) -> Result<RgbImage> {
    if (frame.width(), frame.height()) != (map.eq_w, map.eq_h) {
        return Err(SeldError::InvalidInput(format!(
            "frame is {}x{} but map expects {}x{}",
            frame.width(),
            frame.height(),
            map.eq_w,
            map.eq_h
        )));
    }
    let img = frame.image();
    let mut out = RgbImage::new(map.out_w, map.out_h);
    for (idx, px) in out.pixels_mut().enumerate() {
        let (col, row) = map.coords[idx];
        *px = match interp {
            Interpolation::Bilinear => sample_bilinear(img, col, row),
            Interpolation::Nearest => sample_nearest(img, col, row),
        };
    }
    Ok(out)
}

/// Number of video frames for a clip: `floor(len·fps) + 1` (frame 0 included).
pub fn clip_frame_count(clip_len_s: f64, fps: f64) -> u32 {
    (clip_len_s * fps + 1e-9).floor() as u32 + 1
}

/// Time in seconds of video frame `i`.
pub fn frame_time(i: u32, fps: f64) -> f64 {
    i as f64 / fps
}

/// Nearest video frame index for time `t`.
pub fn frame_index_at(t: f64, fps: f64) -> u32 {
    (t * fps).round().max(0.0) as u32
}

/// `dir/%06d.png`
pub fn frame_path(dir: &Path, index: u32) -> PathBuf {
    dir.join(format!("{index:06}.png"))
}
