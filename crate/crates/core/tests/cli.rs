use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgb, RgbImage};
use seld_core::labels::{parse_metadata, MetadataSchema};
use seld_core::projection::frame_path;
use seld_core::wav::{self, PcmFormat};

fn seld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seld")).args(args).output().expect("running seld")
}

fn ok(args: &[&str]) -> String {
    let out = seld(args);
    assert!(
        out.status.success(),
        "seld {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a one-sample-per-class bank of short tones and returns its manifest.
fn write_bank(dir: &Path) -> PathBuf {
    let mut manifest = String::new();
    for class in [0u32, 4, 9] {
        let f = 0.01 + class as f64 * 0.003;
        let tone: Vec<f64> = (0..12_000).map(|n| 0.3 * (n as f64 * f).sin()).collect();
        let name = format!("tone{class}.wav");
        wav::write_channels(&dir.join(&name), &[&tone], 24_000, PcmFormat::Float32).unwrap();
        manifest.push_str(&format!("{class},{name}\n"));
    }
    let path = dir.join("bank.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// Equirectangular frames for every recording under `root/foa`.
fn write_frames(root: &Path, ids: &[&str], n: u32) {
    for id in ids {
        let dir = root.join("frames").join(id);
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..n {
            let img = RgbImage::from_fn(64, 32, |x, y| Rgb([(x * 4) as u8, (y * 8) as u8, i as u8]));
            img.save(frame_path(&dir, i)).unwrap();
        }
    }
}

#[test]
fn usage_and_data_errors_have_distinct_exit_codes() {
    assert_eq!(seld(&["--help"]).status.code(), Some(0));
    assert_eq!(seld(&["--version"]).status.code(), Some(0));
    assert_eq!(seld(&[]).status.code(), Some(1));
    assert_eq!(seld(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(seld(&["sample", "-n", "3"]).status.code(), Some(1), "missing --index");
    assert_eq!(seld(&["--hfov-deg", "abc", "inspect", "x.wav"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.index");
    let manifest = dir.path().join("m.manifest");
    let out = seld(&["sample", "-n", "3", "--index", s(&missing), "--manifest", s(&manifest)]);
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0,99,0,10,1\n").unwrap();
    assert_eq!(seld(&["inspect", s(&bad)]).status.code(), Some(2));
}

#[test]
fn synth_index_sample_convert_with_video() {
    let dir = tempfile::tempdir().unwrap();
    let bank = write_bank(dir.path());
    let data = dir.path().join("data");
    ok(&["synth", "--bank", s(&bank), "--scenes", "2", "--duration-s", "6", "--max-events", "4", "--seed", "3", "--output-dir", s(&data)]);
    write_frames(&data, &["synth_0000", "synth_0001"], 181);

    let index = dir.path().join("rec.index");
    let manifest = dir.path().join("clips.manifest");
    let out = dir.path().join("out");
    ok(&["index", s(&data), "--index", s(&index)]);
    ok(&["sample", "-n", "3", "--index", s(&index), "--manifest", s(&manifest), "--seed", "11"]);
    ok(&["convert", "--index", s(&index), "--manifest", s(&manifest), "--output-dir", s(&out), "--out-width", "64", "--out-height", "36"]);

    let (clips, seed) = seld_core::sampler::parse_manifest(&std::fs::read_to_string(&manifest).unwrap(), 5.0).unwrap();
    assert_eq!(seed, Some(11));
    for clip in &clips {
        let info = wav::probe(&out.join("stereo").join(format!("{}.wav", clip.clip_id))).unwrap();
        assert_eq!((info.channels, info.sample_rate, info.frames), (2, 24_000, 120_000));
        let labels = std::fs::read_to_string(out.join("metadata").join(format!("{}.csv", clip.clip_id))).unwrap();
        for r in parse_metadata(&labels, MetadataSchema::Stereo).unwrap() {
            assert!(r.frame < 50 && (-90.0..=90.0).contains(&r.azimuth_deg) && r.onscreen.is_some());
        }
        let video = out.join("video").join(&clip.clip_id);
        assert_eq!(std::fs::read_dir(&video).unwrap().count(), 150);
        let last = image::open(frame_path(&video, 149)).unwrap();
        assert_eq!((last.width(), last.height()), (64, 36));
    }
    assert_eq!(std::fs::read_to_string(out.join("failures.csv")).unwrap().trim(), "");
}

#[test]
fn empty_manifest_converts_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bank = write_bank(dir.path());
    let data = dir.path().join("data");
    ok(&["synth", "--bank", s(&bank), "--duration-s", "6", "--output-dir", s(&data)]);
    let index = dir.path().join("rec.index");
    ok(&["index", s(&data), "--index", s(&index)]);
    let manifest = dir.path().join("empty.manifest");
    std::fs::write(&manifest, "").unwrap();
    let out = dir.path().join("out");
    ok(&["convert", "--no-video", "--index", s(&index), "--manifest", s(&manifest), "--output-dir", s(&out)]);
    assert!(!out.join("stereo").exists());
}

#[test]
fn front_source_at_zero_yaw_is_onscreen_and_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let bank = write_bank(dir.path());
    let data = dir.path().join("data");
    let scene = dir.path().join("front.scene");
    std::fs::write(
        &scene,
        "duration_s = 6\nseed = 2\n\n[events]\n4,0,0.5,tone4.wav,0:20:0:2\n9,1,1.0,tone9.wav,0:150:10:3\n",
    )
    .unwrap();
    ok(&["synth", "--bank", s(&bank), "--scene", s(&scene), "--id", "front", "--output-dir", s(&data)]);
    let index = dir.path().join("rec.index");
    ok(&["index", s(&data), "--index", s(&index)]);
    let manifest = dir.path().join("m.manifest");
    std::fs::write(&manifest, "c0,front,0,0,0\n").unwrap();
    let out = dir.path().join("out");
    ok(&["convert", "--no-video", "--index", s(&index), "--manifest", s(&manifest), "--output-dir", s(&out)]);

    let labels = parse_metadata(&std::fs::read_to_string(out.join("metadata/c0.csv")).unwrap(), MetadataSchema::Stereo).unwrap();
    let front: Vec<_> = labels.iter().filter(|r| r.class.index() == 4).collect();
    let back: Vec<_> = labels.iter().filter(|r| r.class.index() == 9).collect();
    assert!(!front.is_empty() && !back.is_empty());
    assert!(front.iter().all(|r| r.onscreen == Some(true) && r.azimuth_deg == 20.0));
    assert!(back.iter().all(|r| r.onscreen == Some(false) && (r.azimuth_deg - 30.0).abs() < 1e-9));

    let refs = out.join("metadata");
    let report = dir.path().join("self.report");
    let text = ok(&["eval", "--audiovisual", "--pred", s(&refs), "--ref", s(&refs), "--report", s(&report)]);
    assert!(!text.is_empty());
    let r = seld_core::metrics::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.macro_f, Some(1.0));
    assert_eq!(r.macro_f_onoff, Some(1.0));
    assert_eq!(r.doae_cd_deg, Some(0.0));
    assert_eq!(r.rde_cd, Some(0.0));
    assert_eq!(r.onscreen_accuracy, Some(1.0));
}

#[test]
fn missing_predictions_and_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let refs = dir.path().join("refs");
    let good = dir.path().join("good");
    let half = dir.path().join("half");
    for d in [&refs, &good, &half] {
        std::fs::create_dir_all(d).unwrap();
    }
    std::fs::write(refs.join("a.csv"), "0,1,0,10,2,1\n1,1,0,12,2,1\n").unwrap();
    std::fs::write(refs.join("b.csv"), "0,2,0,-40,3,0\n").unwrap();
    std::fs::write(good.join("a.csv"), "0,1,0,10,2,1\n1,1,0,12,2,1\n").unwrap();
    std::fs::write(good.join("b.csv"), "0,2,0,-40,3,0\n").unwrap();
    std::fs::write(half.join("a.csv"), "0,1,0,10,2,1\n1,1,0,12,2,1\n").unwrap();

    assert_eq!(seld(&["eval", "--pred", s(&half), "--ref", s(&refs)]).status.code(), Some(2));
    let half_report = dir.path().join("half.report");
    ok(&["eval", "--allow-missing", "--pred", s(&half), "--ref", s(&refs), "--report", s(&half_report)]);
    let r = seld_core::metrics::parse_report(&std::fs::read_to_string(&half_report).unwrap()).unwrap();
    assert_eq!(r.classes[2].counts.fn_, 1);
    assert_eq!(r.classes[2].counts.tp, 0);
    assert_eq!(r.macro_f, Some(0.5));

    let good_report = dir.path().join("good.report");
    ok(&["eval", "--pred", s(&good), "--ref", s(&refs), "--report", s(&good_report)]);
    let ranking = ok(&["eval", "--rank", s(&half_report), s(&good_report)]);
    let lines: Vec<&str> = ranking.lines().collect();
    assert!(lines[0].contains("good.report") && lines[0].contains("100.0%"), "{ranking}");
    assert!(lines[1].contains("half.report") && lines[1].contains("50.0%"), "{ranking}");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bank = write_bank(dir.path());
    let run = |name: &str, jobs: &str| -> Vec<(PathBuf, Vec<u8>)> {
        let root = dir.path().join(name);
        let data = root.join("data");
        let index = root.join("rec.index");
        let manifest = root.join("clips.manifest");
        let out = root.join("out");
        let common = ["--jobs", jobs, "--seed", "7"];
        let with = |args: &[&str]| ok(&[args, &common[..]].concat());
        with(&["synth", "--bank", s(&bank), "--scenes", "3", "--duration-s", "8", "--ambient-level", "0.01", "--reverb", "--output-dir", s(&data)]);
        with(&["index", s(&data), "--index", s(&index)]);
        with(&["sample", "-n", "4", "--index", s(&index), "--manifest", s(&manifest)]);
        with(&["convert", "--no-video", "--index", s(&index), "--manifest", s(&manifest), "--output-dir", s(&out)]);
        let mut files: Vec<(PathBuf, Vec<u8>)> = walkdir::WalkDir::new(&root)
            .sort_by_file_name()
            .into_iter()
            .map(Result::unwrap)
            .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x != "index"))
            .map(|e| (e.path().strip_prefix(&root).unwrap().to_path_buf(), std::fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        files
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert!(a.len() > 10);
    assert_eq!(a.len(), b.len());
    for ((pa, da), (pb, db)) in a.iter().zip(&b) {
        assert_eq!(pa, pb);
        assert!(da == db, "{} differs", pa.display());
    }
}
