//! C ABI over `seld-core`.
//!
//! Conventions:
//! - Fallible functions return a [`SeldStatus`]; on failure the message is
//!   available from [`seld_last_error`] on the same thread.
//! - Objects are opaque handles created by `*_new` / `*_from_*` functions and
//!   released with the matching `*_free`. Passing NULL to `*_free` is a no-op.
//! - Audio buffers are planar `double` arrays; FOA buffers hold `4 * len`
//!   samples in W, Y, Z, X order.
//! - Undefined metrics are reported as NaN.
//! - Panics never cross the boundary; they become [`SeldStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seld_core::audio::{encode_plane_wave, foa_to_stereo, rotate_yaw, FoaClip, SphericalDirection};
use seld_core::labels::{fold_front_back, onscreen_flag, rotate_azimuth, ClassId, FovConfig};
use seld_core::metrics::{score, Detection, LabelSet, MetricsConfig};
use seld_core::projection::{build_map, project, EquirectFrame, Interpolation, ProjectionMap};
use seld_core::{SeldError, SAMPLE_RATE};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeldStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    Validation = 4,
    Config = 5,
    Unsupported = 6,
    Decode = 7,
    Io = 8,
    Panic = 9,
}

impl From<&SeldError> for SeldStatus {
    fn from(e: &SeldError) -> Self {
        match e {
            SeldError::InvalidInput(_) => SeldStatus::InvalidInput,
            SeldError::Parse { .. } => SeldStatus::Parse,
            SeldError::Validation(_) => SeldStatus::Validation,
            SeldError::Config(_) => SeldStatus::Config,
            SeldError::Unsupported(_) => SeldStatus::Unsupported,
            SeldError::Decode { .. } => SeldStatus::Decode,
            SeldError::Io { .. } | SeldError::Wav { .. } | SeldError::Image { .. } => SeldStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SeldStatus, String);

impl From<SeldError> for Failure {
    fn from(e: SeldError) -> Self {
        Failure(SeldStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SeldStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeldStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SeldStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SeldStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn planar_foa(foa: *const f64, len: usize) -> Result<FoaClip, Failure> {
    let total = len.checked_mul(4).ok_or_else(|| Failure(SeldStatus::InvalidInput, "length overflow".into()))?;
    let data = slice(foa, total, "foa")?;
    let channels: [Vec<f64>; 4] = std::array::from_fn(|c| data[c * len..(c + 1) * len].to_vec());
    Ok(FoaClip::new(channels, SAMPLE_RATE)?)
}

fn copy_foa(clip: &FoaClip, out: &mut [f64]) {
    let len = clip.len();
    for (c, ch) in clip.channels().iter().enumerate() {
        out[c * len..(c + 1) * len].copy_from_slice(ch);
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn seld_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn seld_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Encodes `len` mono samples as a plane wave; writes `4 * len` planar
/// samples to `foa_out`.
///
/// # Safety
/// `signal` must point to `len` doubles and `foa_out` to `4 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn seld_encode_plane_wave(
    signal: *const f64,
    len: usize,
    azimuth_deg: f64,
    elevation_deg: f64,
    gain: f64,
    foa_out: *mut f64,
) -> SeldStatus {
    guard(|| {
        let signal = slice(signal, len, "signal")?;
        let out = slice_mut(foa_out, len.saturating_mul(4), "foa_out")?;
        let dir = SphericalDirection::new(azimuth_deg, elevation_deg)?;
        copy_foa(&encode_plane_wave(signal, dir, gain)?, out);
        Ok(())
    })
}

/// Rotates a planar FOA buffer about the vertical axis, in place.
///
/// # Safety
/// `foa` must point to `4 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn seld_rotate_yaw(foa: *mut f64, len: usize, yaw_deg: f64) -> SeldStatus {
    guard(|| {
        let clip = planar_foa(foa, len)?;
        let out = slice_mut(foa, len * 4, "foa")?;
        copy_foa(&rotate_yaw(&clip, yaw_deg), out);
        Ok(())
    })
}

/// Mid/side stereo downmix: `L = W + Y`, `R = W - Y`.
///
/// # Safety
/// `foa` must point to `4 * len` doubles; `left` and `right` to `len` each.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_to_stereo(foa: *const f64, len: usize, left: *mut f64, right: *mut f64) -> SeldStatus {
    guard(|| {
        let clip = planar_foa(foa, len)?;
        let stereo = foa_to_stereo(&clip);
        slice_mut(left, len, "left")?.copy_from_slice(stereo.left());
        slice_mut(right, len, "right")?.copy_from_slice(stereo.right());
        Ok(())
    })
}

/// Azimuth seen from a view at `yaw_deg`, in `[-180, 180)`.
#[no_mangle]
pub extern "C" fn seld_rotate_azimuth(azimuth_deg: f64, yaw_deg: f64) -> f64 {
    rotate_azimuth(azimuth_deg, yaw_deg)
}

/// Folds a rear azimuth into `[-90, 90]`.
#[no_mangle]
pub extern "C" fn seld_fold_front_back(azimuth_deg: f64) -> f64 {
    fold_front_back(azimuth_deg)
}

/// Onscreen test on an unfolded azimuth for a horizontal FOV.
#[no_mangle]
pub extern "C" fn seld_onscreen_flag(azimuth_deg: f64, hfov_deg: f64) -> bool {
    onscreen_flag(
        azimuth_deg,
        &FovConfig {
            horizontal_fov_deg: hfov_deg,
            vertical_fov_deg: None,
        },
    )
}

/// Opaque set of labeled or predicted detections.
pub struct SeldLabelSet(LabelSet);

#[no_mangle]
pub extern "C" fn seld_label_set_new() -> *mut SeldLabelSet {
    Box::into_raw(Box::new(SeldLabelSet(LabelSet::new())))
}

/// Parses stereo metadata CSV text into a new label set stored in `*out`.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seld_label_set_from_csv(csv: *const c_char, out: *mut *mut SeldLabelSet) -> SeldStatus {
    guard(|| {
        if csv.is_null() {
            return Err(null("csv"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(csv)
            .to_str()
            .map_err(|e| Failure(SeldStatus::InvalidInput, format!("csv is not UTF-8: {e}")))?;
        let set = LabelSet::from_csv(text)?;
        *out = Box::into_raw(Box::new(SeldLabelSet(set)));
        Ok(())
    })
}

/// Adds one detection. `onscreen` is -1 (unknown), 0 or 1.
///
/// # Safety
/// `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn seld_label_set_add(
    set: *mut SeldLabelSet,
    frame: u32,
    class_id: u32,
    azimuth_deg: f64,
    distance: f64,
    onscreen: i32,
    track: u32,
) -> SeldStatus {
    guard(|| {
        let set = set.as_mut().ok_or_else(|| null("set"))?;
        let onscreen = match onscreen {
            -1 => None,
            0 => Some(false),
            1 => Some(true),
            v => return Err(Failure(SeldStatus::InvalidInput, format!("onscreen must be -1, 0 or 1, got {v}"))),
        };
        set.0.insert(
            frame,
            ClassId::new(class_id)?,
            Detection {
                azimuth_deg,
                distance,
                onscreen,
                track,
            },
        )?;
        Ok(())
    })
}

/// Number of detections; 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seld_label_set_len(set: *const SeldLabelSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seld_label_set_free(set: *mut SeldLabelSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeldMetricsConfig {
    pub doa_threshold_deg: f64,
    pub rde_threshold: f64,
    pub require_onscreen_match: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeldMetricsReport {
    pub macro_f: f64,
    pub macro_f_onoff: f64,
    pub doae_cd_deg: f64,
    pub rde_cd: f64,
    pub onscreen_accuracy: f64,
    pub matched_pairs: u64,
}

/// 20°, 1.0, no onscreen gate.
#[no_mangle]
pub extern "C" fn seld_metrics_config_default() -> SeldMetricsConfig {
    let d = MetricsConfig::default();
    SeldMetricsConfig {
        doa_threshold_deg: d.doa_threshold_deg,
        rde_threshold: d.rde_threshold,
        require_onscreen_match: d.require_onscreen_match,
    }
}

/// Scores predictions against references. `cfg` may be NULL for defaults.
///
/// # Safety
/// `preds` and `refs` must be live handles; `cfg` NULL or valid; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn seld_score(
    preds: *const SeldLabelSet,
    refs: *const SeldLabelSet,
    cfg: *const SeldMetricsConfig,
    out: *mut SeldMetricsReport,
) -> SeldStatus {
    guard(|| {
        let preds = preds.as_ref().ok_or_else(|| null("preds"))?;
        let refs = refs.as_ref().ok_or_else(|| null("refs"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = cfg.as_ref().copied().unwrap_or_else(|| seld_metrics_config_default());
        let cfg = MetricsConfig {
            doa_threshold_deg: c.doa_threshold_deg,
            rde_threshold: c.rde_threshold,
            require_onscreen_match: c.require_onscreen_match,
            ..MetricsConfig::default()
        };
        let r = score(&preds.0, &refs.0, &cfg)?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = SeldMetricsReport {
            macro_f: nan(r.macro_f),
            macro_f_onoff: nan(r.macro_f_onoff),
            doae_cd_deg: nan(r.doae_cd_deg),
            rde_cd: nan(r.rde_cd),
            onscreen_accuracy: nan(r.onscreen_accuracy),
            matched_pairs: r.matched_pairs,
        };
        Ok(())
    })
}

/// Opaque precomputed equirectangular-to-perspective sampling map.
pub struct SeldProjectionMap(ProjectionMap);

/// Builds a map for a view at `yaw_deg` and stores it in `*out`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn seld_projection_map_new(
    yaw_deg: f64,
    hfov_deg: f64,
    out_width: u32,
    out_height: u32,
    eq_width: u32,
    eq_height: u32,
    out: *mut *mut SeldProjectionMap,
) -> SeldStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let map = build_map(yaw_deg, hfov_deg, out_width, out_height, eq_width, eq_height)?;
        *out = Box::into_raw(Box::new(SeldProjectionMap(map)));
        Ok(())
    })
}

/// Renders a perspective frame from packed 8-bit RGB panorama rows
/// (`eq_width * eq_height * 3` bytes) into `out_rgb`
/// (`out_width * out_height * 3` bytes), with bilinear sampling.
///
/// # Safety
/// `map` must be a live handle and the buffers must have the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn seld_project_rgb(
    map: *const SeldProjectionMap,
    equirect_rgb: *const u8,
    equirect_len: usize,
    out_rgb: *mut u8,
    out_len: usize,
) -> SeldStatus {
    guard(|| {
        let map = &map.as_ref().ok_or_else(|| null("map"))?.0;
        let (ew, eh) = map.eq_dims();
        let (ow, oh) = map.out_dims();
        let expected_out = ow as usize * oh as usize * 3;
        if out_len != expected_out {
            return Err(Failure(
                SeldStatus::InvalidInput,
                format!("output buffer has {out_len} bytes, expected {expected_out}"),
            ));
        }
        let input = slice(equirect_rgb, equirect_len, "equirect_rgb")?.to_vec();
        let frame = EquirectFrame::from_raw(ew, eh, input)?;
        let img = project(&frame, map, Interpolation::Bilinear)?;
        slice_mut(out_rgb, out_len, "out_rgb")?.copy_from_slice(img.as_raw());
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seld_projection_map_free(map: *mut SeldProjectionMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}
