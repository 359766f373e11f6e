//! Event metadata: parsing, label rotation, front-back folding and onscreen
//! flagging.
//!
//! Two CSV layouts are handled, both without a header row:
//!
//! - source (FOA) metadata: `frame,class,source,azimuth,elevation,distance`
//! - stereo metadata / predictions: `frame,class,source,azimuth,distance[,onscreen]`
//!
//! Frames are 100 ms label frames. Distances are passed through unchanged.

use std::fmt;
use std::fmt::Write as _;

use crate::angles::wrap_deg;
use crate::error::{Result, SeldError};

/// Number of event classes.
pub const NUM_CLASSES: usize = 13;

const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "Female speech, woman speaking",
    "Male speech, man speaking",
    "Clapping",
    "Telephone",
    "Laughter",
    "Domestic sounds",
    "Walk, footsteps",
    "Door, open or close",
    "Music",
    "Musical instrument",
    "Water tap, faucet",
    "Bell",
    "Knock",
];

/// One of the 13 target sound classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(u8);

impl ClassId {
    pub fn new(id: u32) -> Result<Self> {
        if (id as usize) < NUM_CLASSES {
            Ok(ClassId(id as u8))
        } else {
            Err(SeldError::Validation(format!(
                "class {id} outside 0..{NUM_CLASSES}"
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        CLASS_NAMES[self.index()]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        CLASS_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name.trim()))
            .map(|i| ClassId(i as u8))
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u8).map(ClassId)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which CSV layout a metadata file uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataSchema {
    /// `frame,class,source,azimuth,elevation,distance`, azimuth in `[-180, 180)`.
    Source,
    /// `frame,class,source,azimuth,distance[,onscreen]`, azimuth in `[-90, 90]`.
    Stereo,
}

/// One labeled sound-event frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub frame: u32,
    pub class: ClassId,
    pub source: u32,
    pub azimuth_deg: f64,
    /// Only present in source metadata.
    pub elevation_deg: Option<f64>,
    pub distance: f64,
    /// Only present in stereo metadata.
    pub onscreen: Option<bool>,
}

impl EventRecord {
    /// Checks the invariants of the given schema.
    pub fn validate(&self, schema: MetadataSchema) -> Result<()> {
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(SeldError::Validation(format!(
                "frame {}: distance {} must be positive",
                self.frame, self.distance
            )));
        }
        match schema {
            MetadataSchema::Source => {
                if !(-180.0..180.0).contains(&self.azimuth_deg) {
                    return Err(SeldError::Validation(format!(
                        "frame {}: azimuth {} outside [-180, 180)",
                        self.frame, self.azimuth_deg
                    )));
                }
                if let Some(el) = self.elevation_deg {
                    if !(-90.0..=90.0).contains(&el) {
                        return Err(SeldError::Validation(format!(
                            "frame {}: elevation {el} outside [-90, 90]",
                            self.frame
                        )));
                    }
                }
                if self.onscreen.is_some() {
                    return Err(SeldError::Validation(format!(
                        "frame {}: source records carry no onscreen flag",
                        self.frame
                    )));
                }
            }
            MetadataSchema::Stereo => {
                if !(-90.0..=90.0).contains(&self.azimuth_deg) {
                    return Err(SeldError::Validation(format!(
                        "frame {}: azimuth {} outside [-90, 90]",
                        self.frame, self.azimuth_deg
                    )));
                }
                if self.elevation_deg.is_some() {
                    return Err(SeldError::Validation(format!(
                        "frame {}: stereo records carry no elevation",
                        self.frame
                    )));
                }
            }
        }
        Ok(())
    }

    fn sort_key(&self) -> (u32, ClassId, u32) {
        (self.frame, self.class, self.source)
    }
}

/// Field of view used for onscreen flagging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FovConfig {
    pub horizontal_fov_deg: f64,
    /// Optional vertical test `|elevation| <= v/2`; off by default.
    pub vertical_fov_deg: Option<f64>,
}

impl Default for FovConfig {
    fn default() -> Self {
        Self {
            horizontal_fov_deg: 100.0,
            vertical_fov_deg: None,
        }
    }
}

impl FovConfig {
    pub fn new(horizontal_fov_deg: f64) -> Result<Self> {
        let cfg = Self {
            horizontal_fov_deg,
            vertical_fov_deg: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v < 360.0;
        if !ok(self.horizontal_fov_deg) || !self.vertical_fov_deg.is_none_or(ok) {
            return Err(SeldError::Config(format!(
                "field of view must lie in (0, 360): {self:?}"
            )));
        }
        Ok(())
    }
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: u64) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| SeldError::parse(line, format!("cannot parse {name} from '{}'", raw.trim())))
}

/// Integer-or-decimal frame/class/source indices (some exports write `12.0`).
fn parse_index(raw: &str, name: &str, line: u64) -> Result<u32> {
    if let Ok(v) = raw.trim().parse::<u32>() {
        return Ok(v);
    }
    let v: f64 = parse_field(raw, name, line)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(SeldError::parse(line, format!("{name} must be a non-negative integer, got '{}'", raw.trim())))
    }
}

fn parse_flag(raw: &str, line: u64) -> Result<bool> {
    match raw.trim() {
        "1" | "1.0" | "true" => Ok(true),
        "0" | "0.0" | "false" => Ok(false),
        other => Err(SeldError::parse(line, format!("onscreen flag must be 0 or 1, got '{other}'"))),
    }
}

/// Parses a metadata CSV. Records come back sorted by `(frame, class, source)`.
///
/// Source azimuths of exactly 180° are stored as -180°.
pub fn parse_metadata(text: &str, schema: MetadataSchema) -> Result<Vec<EventRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            SeldError::parse(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(|f| f.is_empty()) {
            continue;
        }
        let expected: &[usize] = match schema {
            MetadataSchema::Source => &[6],
            MetadataSchema::Stereo => &[5, 6],
        };
        if !expected.contains(&row.len()) {
            return Err(SeldError::parse(
                line,
                format!("expected {expected:?} columns, found {}", row.len()),
            ));
        }
        let class_raw = parse_index(&row[1], "class", line)?;
        let class = ClassId::new(class_raw).map_err(|_| {
            SeldError::Validation(format!("line {line}: class {class_raw} outside 0..{NUM_CLASSES}"))
        })?;
        let mut azimuth_deg: f64 = parse_field(&row[3], "azimuth", line)?;
        let record = match schema {
            MetadataSchema::Source => {
                if azimuth_deg == 180.0 {
                    azimuth_deg = -180.0;
                }
                EventRecord {
                    frame: parse_index(&row[0], "frame", line)?,
                    class,
                    source: parse_index(&row[2], "source", line)?,
                    azimuth_deg,
                    elevation_deg: Some(parse_field(&row[4], "elevation", line)?),
                    distance: parse_field(&row[5], "distance", line)?,
                    onscreen: None,
                }
            }
            MetadataSchema::Stereo => EventRecord {
                frame: parse_index(&row[0], "frame", line)?,
                class,
                source: parse_index(&row[2], "source", line)?,
                azimuth_deg,
                elevation_deg: None,
                distance: parse_field(&row[4], "distance", line)?,
                onscreen: row.get(5).map(|f| parse_flag(f, line)).transpose()?,
            },
        };
        record
            .validate(schema)
            .map_err(|e| SeldError::Validation(format!("line {line}: {e}")))?;
        records.push(record);
    }
    records.sort_by_key(EventRecord::sort_key);
    Ok(records)
}

fn fmt_num(v: f64) -> String {
    // shortest round-trip representation, integers without a trailing ".0"
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Serializes records in the given layout (no header).
pub fn write_metadata(records: &[EventRecord], schema: MetadataSchema) -> String {
    let mut out = String::new();
    for r in records {
        match schema {
            MetadataSchema::Source => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.frame,
                    r.class,
                    r.source,
                    fmt_num(r.azimuth_deg),
                    fmt_num(r.elevation_deg.unwrap_or(0.0)),
                    fmt_num(r.distance)
                );
            }
            MetadataSchema::Stereo => {
                let _ = write!(
                    out,
                    "{},{},{},{},{}",
                    r.frame,
                    r.class,
                    r.source,
                    fmt_num(r.azimuth_deg),
                    fmt_num(r.distance)
                );
                if let Some(on) = r.onscreen {
                    let _ = write!(out, ",{}", on as u8);
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Azimuth relative to a new viewing direction, wrapped to `[-180, 180)`.
pub fn rotate_azimuth(az_deg: f64, yaw_deg: f64) -> f64 {
    wrap_deg(az_deg - yaw_deg)
}

/// Reflects rear-hemisphere azimuths across the left-right axis into `[-90, 90]`.
pub fn fold_front_back(az_deg: f64) -> f64 {
    if az_deg > 90.0 {
        180.0 - az_deg
    } else if az_deg < -90.0 {
        -180.0 - az_deg
    } else {
        az_deg
    }
}

/// Onscreen iff the (unfolded) azimuth lies within `[-fov/2, fov/2]`.
pub fn onscreen_flag(az_deg: f64, fov: &FovConfig) -> bool {
    az_deg.abs() <= fov.horizontal_fov_deg / 2.0
}

/// Onscreen test including the optional vertical FOV check.
pub fn onscreen_flag_with_elevation(az_deg: f64, elevation_deg: f64, fov: &FovConfig) -> bool {
    onscreen_flag(az_deg, fov)
        && fov
            .vertical_fov_deg
            .is_none_or(|v| elevation_deg.abs() <= v / 2.0)
}

/// Converts source-schema records to stereo-schema records for a clip viewed
/// at `yaw_deg`: rotate, flag onscreen on the unfolded azimuth, fold, drop
/// elevation. Distance is kept.
pub fn transform_clip_labels(
    records: &[EventRecord],
    yaw_deg: f64,
    fov: &FovConfig,
) -> Result<Vec<EventRecord>> {
    fov.validate()?;
    records
        .iter()
        .map(|r| {
            r.validate(MetadataSchema::Source)?;
            let rotated = rotate_azimuth(r.azimuth_deg, yaw_deg);
            let elevation = r.elevation_deg.unwrap_or(0.0);
            let out = EventRecord {
                frame: r.frame,
                class: r.class,
                source: r.source,
                azimuth_deg: fold_front_back(rotated),
                elevation_deg: None,
                distance: r.distance,
                onscreen: Some(onscreen_flag_with_elevation(rotated, elevation, fov)),
            };
            out.validate(MetadataSchema::Stereo)?;
            Ok(out)
        })
        .collect()
}

/// Keeps records in `[start_frame, start_frame + n_frames)` and renumbers them
/// from zero.
pub fn clip_window(records: &[EventRecord], start_frame: u32, n_frames: u32) -> Vec<EventRecord> {
    let end = start_frame as u64 + n_frames as u64;
    records
        .iter()
        .filter(|r| r.frame >= start_frame && (r.frame as u64) < end)
        .map(|r| EventRecord {
            frame: r.frame - start_frame,
            ..r.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source(az: f64, el: f64, dist: f64) -> EventRecord {
        EventRecord {
            frame: 0,
            class: ClassId::new(0).unwrap(),
            source: 0,
            azimuth_deg: az,
            elevation_deg: Some(el),
            distance: dist,
            onscreen: None,
        }
    }

    #[test]
    fn class_table() {
        assert_eq!(ClassId::all().count(), 13);
        for c in ClassId::all() {
            assert_eq!(ClassId::from_name(c.name()), Some(c));
        }
        assert!(ClassId::new(13).is_err());
        assert_eq!(ClassId::new(3).unwrap().name(), "Telephone");
    }

    #[test]
    fn parse_stereo_row_without_onscreen() {
        let recs = parse_metadata("12,1,0,30,150\n", MetadataSchema::Stereo).unwrap();
        assert_eq!(
            recs,
            vec![EventRecord {
                frame: 12,
                class: ClassId::new(1).unwrap(),
                source: 0,
                azimuth_deg: 30.0,
                elevation_deg: None,
                distance: 150.0,
                onscreen: None,
            }]
        );
    }

    #[test]
    fn parse_empty() {
        assert!(parse_metadata("", MetadataSchema::Source).unwrap().is_empty());
        assert!(parse_metadata("\n\n", MetadataSchema::Stereo).unwrap().is_empty());
    }

    #[test]
    fn parse_rejects_class_13() {
        let err = parse_metadata("0,13,0,10,0,100\n", MetadataSchema::Source).unwrap_err();
        assert!(matches!(err, SeldError::Validation(_)), "{err}");
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "0,1,0,10,0,100\n1,1,0,abc,0,100\n";
        match parse_metadata(text, MetadataSchema::Source).unwrap_err() {
            SeldError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        match parse_metadata("0,1,0\n", MetadataSchema::Source).unwrap_err() {
            SeldError::Parse { line, .. } => assert_eq!(line, 1),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parse_validates_ranges_and_sorts() {
        assert!(parse_metadata("0,1,0,95,100\n", MetadataSchema::Stereo).is_err());
        assert!(parse_metadata("0,1,0,10,95,100\n", MetadataSchema::Source).is_err());
        assert!(parse_metadata("0,1,0,10,5,0\n", MetadataSchema::Source).is_err());
        assert!(parse_metadata("0,1,0,10,5,2\n", MetadataSchema::Stereo).is_err());
        let recs = parse_metadata("3,2,1,10,0,100\n3,1,0,180,0,100\n1,5,0,-20.5,12,80\n", MetadataSchema::Source).unwrap();
        let keys: Vec<_> = recs.iter().map(|r| (r.frame, r.class.index(), r.source)).collect();
        assert_eq!(keys, vec![(1, 5, 0), (3, 1, 0), (3, 2, 1)]);
        assert_eq!(recs[1].azimuth_deg, -180.0);
    }

    #[test]
    fn write_then_parse() {
        let recs = parse_metadata("0,1,0,-30.25,150,1\n2,4,3,45,98.5,0\n", MetadataSchema::Stereo).unwrap();
        let text = write_metadata(&recs, MetadataSchema::Stereo);
        assert_eq!(text, "0,1,0,-30.25,150,1\n2,4,3,45,98.5,0\n");
        assert_eq!(parse_metadata(&text, MetadataSchema::Stereo).unwrap(), recs);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotate_azimuth(170.0, -30.0), -160.0);
        assert_eq!(rotate_azimuth(0.0, 0.0), 0.0);
        assert_eq!(rotate_azimuth(-90.0, 90.0), -180.0);
    }

    #[test]
    fn fold_examples() {
        assert_eq!(fold_front_back(120.0), 60.0);
        assert_eq!(fold_front_back(-150.0), -30.0);
        assert_eq!(fold_front_back(45.0), 45.0);
        assert_eq!(fold_front_back(-180.0), 0.0);
        assert_eq!(fold_front_back(90.0), 90.0);
    }

    #[test]
    fn onscreen_examples() {
        let fov = FovConfig::default();
        assert!(onscreen_flag(30.0, &fov));
        assert!(!onscreen_flag(60.0, &fov));
        assert!(onscreen_flag(50.0, &fov));
        assert!(onscreen_flag(-50.0, &fov));
        // rear source that folds to 30 degrees
        assert_eq!(fold_front_back(150.0), 30.0);
        assert!(!onscreen_flag(150.0, &fov));
    }

    #[test]
    fn vertical_fov_is_optional() {
        let mut fov = FovConfig::default();
        assert!(onscreen_flag_with_elevation(10.0, 60.0, &fov));
        fov.vertical_fov_deg = Some(60.0);
        assert!(!onscreen_flag_with_elevation(10.0, 60.0, &fov));
        assert!(onscreen_flag_with_elevation(10.0, 30.0, &fov));
    }

    #[test]
    fn fov_bounds() {
        assert!(FovConfig::new(0.0).is_err());
        assert!(FovConfig::new(360.0).is_err());
        assert!(FovConfig::new(100.0).is_ok());
    }

    #[test]
    fn transform_examples() {
        let fov = FovConfig::default();
        let out = transform_clip_labels(&[source(80.0, 20.0, 200.0)], 50.0, &fov).unwrap();
        assert_eq!(out[0].azimuth_deg, 30.0);
        assert_eq!(out[0].onscreen, Some(true));
        assert_eq!(out[0].distance, 200.0);
        assert_eq!(out[0].elevation_deg, None);

        let out = transform_clip_labels(&[source(-170.0, 0.0, 1.0)], 0.0, &fov).unwrap();
        assert_eq!(out[0].azimuth_deg, -10.0);
        assert_eq!(out[0].onscreen, Some(false));

        assert!(transform_clip_labels(&[], 33.0, &fov).unwrap().is_empty());
    }

    #[test]
    fn transform_rejects_stereo_input() {
        let mut r = source(10.0, 0.0, 1.0);
        r.onscreen = Some(true);
        assert!(transform_clip_labels(&[r], 0.0, &FovConfig::default()).is_err());
    }

    #[test]
    fn window_renumbers() {
        let mut recs: Vec<_> = (0..100).map(|f| EventRecord { frame: f, ..source(0.0, 0.0, 1.0) }).collect();
        recs.retain(|r| r.frame % 7 == 0);
        let w = clip_window(&recs, 20, 50);
        assert_eq!(w.first().unwrap().frame, 1);
        assert!(w.iter().all(|r| r.frame < 50));
        assert_eq!(w.len(), (20..70).filter(|f| f % 7 == 0).count());
    }
}
