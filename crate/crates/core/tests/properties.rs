use proptest::prelude::*;

use seld_core::angles::wrap_deg;
use seld_core::audio::{encode_plane_wave, foa_to_stereo, rotate_yaw, FoaClip, SphericalDirection};
use seld_core::labels::{fold_front_back, rotate_azimuth, transform_clip_labels, ClassId, EventRecord, FovConfig};
use seld_core::metrics::{decode_multi_accdoa, encode_multi_accdoa, score, Detection, LabelSet, MetricsConfig};
use seld_core::projection::build_map;
use seld_core::sampler::{sample_clips, RecordingEntry, RecordingIndex, SamplerOptions};
use seld_core::spatializer::{render_scene, Keyframe, ReverbConfig, SampleBank, SceneEvent, SceneSpec};

fn foa_strategy(max_len: usize) -> impl Strategy<Value = FoaClip> {
    (1..max_len).prop_flat_map(|len| {
        prop::array::uniform4(prop::collection::vec(-1.0f64..1.0, len))
            .prop_map(|ch| FoaClip::new(ch, 24_000).unwrap())
    })
}

fn detection() -> impl Strategy<Value = Detection> {
    (-90.0f64..=90.0, 0.2f64..20.0, any::<bool>(), 0u32..4).prop_map(|(az, d, on, track)| Detection {
        azimuth_deg: az,
        distance: d,
        onscreen: Some(on),
        track,
    })
}

fn label_set() -> impl Strategy<Value = LabelSet> {
    prop::collection::vec((0u32..30, 0u32..13, prop::collection::vec(detection(), 1..=3)), 1..25).prop_map(|groups| {
        let mut set = LabelSet::new();
        for (frame, class, dets) in groups {
            let class = ClassId::new(class).unwrap();
            for d in dets {
                if set.get(frame, class).len() < 3 {
                    set.insert(frame, class, d).unwrap();
                }
            }
        }
        set
    })
}

fn map_detections(set: &LabelSet, f: impl Fn(&Detection) -> Detection) -> LabelSet {
    let mut out = LabelSet::new();
    for (frame, class, d) in set.iter() {
        out.insert(frame, class, f(d)).unwrap();
    }
    out
}

proptest! {
    #[test]
    fn downmix_energy_identity(foa in foa_strategy(200)) {
        let st = foa_to_stereo(&foa);
        for n in 0..foa.len() {
            let (w, y) = (foa.w()[n], foa.y()[n]);
            let lhs = st.left()[n].powi(2) + st.right()[n].powi(2);
            let rhs = 2.0 * (w * w + y * y);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn rotation_keeps_w_and_z(foa in foa_strategy(100), yaw in -720.0f64..720.0) {
        let r = rotate_yaw(&foa, yaw);
        prop_assert_eq!(r.w(), foa.w());
        prop_assert_eq!(r.z(), foa.z());
    }

    #[test]
    fn rotation_composes(foa in foa_strategy(100), a in -360.0f64..360.0, b in -360.0f64..360.0) {
        let two = rotate_yaw(&rotate_yaw(&foa, a), b);
        let one = rotate_yaw(&foa, a + b);
        for c in 0..4 {
            for (x, y) in two.channel(c).iter().zip(one.channel(c)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rotation_preserves_horizontal_energy(foa in foa_strategy(100), yaw in -360.0f64..360.0) {
        let r = rotate_yaw(&foa, yaw);
        for n in 0..foa.len() {
            let before = foa.x()[n].powi(2) + foa.y()[n].powi(2);
            let after = r.x()[n].powi(2) + r.y()[n].powi(2);
            prop_assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn fold_is_idempotent_and_preserves_sine(a in -180.0f64..180.0) {
        let f = fold_front_back(a);
        prop_assert!((-90.0..=90.0).contains(&f));
        prop_assert_eq!(fold_front_back(f), f);
        prop_assert!((f.to_radians().sin() - a.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn rotate_azimuth_is_a_group_action(a in -180.0f64..180.0, y1 in -400.0f64..400.0, y2 in -400.0f64..400.0) {
        prop_assert_eq!(rotate_azimuth(a, 0.0), a);
        let twice = rotate_azimuth(rotate_azimuth(a, y1), y2);
        let once = rotate_azimuth(a, y1 + y2);
        prop_assert!(wrap_deg(twice - once).abs() < 1e-9);
    }

    #[test]
    fn sampled_clips_stay_in_bounds(
        durations in prop::collection::vec(5.0f64..200.0, 1..6),
        seed in any::<u64>(),
    ) {
        let entries = durations.iter().enumerate().map(|(i, &d)| RecordingEntry {
            recording_id: format!("r{i}"),
            duration_s: d,
            audio_path: "a.wav".into(),
            frames_dir: "f".into(),
            metadata_path: "m.csv".into(),
        }).collect();
        let index = RecordingIndex::new(entries).unwrap();
        let clips = sample_clips(&index, 50, seed, &SamplerOptions::default()).unwrap();
        prop_assert_eq!(clips.len(), 50);
        for c in &clips {
            let dur = index.get(&c.recording_id).unwrap().duration_s;
            prop_assert!(c.start_s >= 0.0 && c.start_s + c.clip_len_s <= dur + 1e-9);
            prop_assert!((0.0..360.0).contains(&c.yaw_deg));
        }
    }

    #[test]
    fn projection_round_trip(yaw in -180.0f64..180.0, i in 0u32..640, j in 0u32..360) {
        let map = build_map(yaw, 100.0, 640, 360, 64, 32).unwrap();
        let (lon, lat) = map.direction(i as f64, j as f64);
        let (x, y) = map.image_point(lon, lat).unwrap();
        prop_assert!((x - i as f64).abs() < 0.5 && (y - j as f64).abs() < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn self_score_is_perfect(set in label_set()) {
        let r = score(&set, &set, &MetricsConfig { require_onscreen_match: true, ..Default::default() }).unwrap();
        prop_assert_eq!(r.macro_f, Some(1.0));
        prop_assert_eq!(r.macro_f_onoff, Some(1.0));
        prop_assert_eq!(r.doae_cd_deg, Some(0.0));
        prop_assert_eq!(r.rde_cd, Some(0.0));
        prop_assert_eq!(r.onscreen_accuracy, Some(1.0));
    }

    #[test]
    fn spurious_prediction_never_raises_f(
        preds in label_set(),
        refs in label_set(),
        extra in detection(),
        frame in 30u32..40,
        class in 0u32..13,
    ) {
        // a prediction where no reference exists can only add a false positive
        let cfg = MetricsConfig::default();
        let before = score(&preds, &refs, &cfg).unwrap();
        let mut more = preds.clone();
        more.insert(frame, ClassId::new(class).unwrap(), extra).unwrap();
        let after = score(&more, &refs, &cfg).unwrap();
        for (b, a) in before.classes.iter().zip(&after.classes) {
            if let (Some(fb), Some(fa)) = (b.f, a.f) {
                prop_assert!(fa <= fb);
            }
        }
    }

    #[test]
    fn onscreen_flags_do_not_affect_ungated_scores(preds in label_set(), refs in label_set()) {
        let cfg = MetricsConfig::default();
        let a = score(&preds, &refs, &cfg).unwrap();
        let flipped = map_detections(&preds, |d| Detection { onscreen: d.onscreen.map(|o| !o), ..*d });
        let b = score(&flipped, &refs, &cfg).unwrap();
        prop_assert_eq!(a.macro_f, b.macro_f);
        prop_assert_eq!(a.doae_cd_deg, b.doae_cd_deg);
        prop_assert_eq!(a.rde_cd, b.rde_cd);
    }

    #[test]
    fn distance_units_do_not_matter(preds in label_set(), refs in label_set(), c in 0.01f64..100.0) {
        let cfg = MetricsConfig::default();
        let a = score(&preds, &refs, &cfg).unwrap();
        let scale = |s: &LabelSet| map_detections(s, |d| Detection { distance: d.distance * c, ..*d });
        let b = score(&scale(&preds), &scale(&refs), &cfg).unwrap();
        prop_assert_eq!(a.macro_f, b.macro_f);
        match (a.rde_cd, b.rde_cd) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0)),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn accdoa_round_trip(groups in prop::collection::vec((0u32..20, 0u32..13, -90.0f64..-60.0, 0.5f64..5.0, any::<bool>()), 1..30)) {
        // up to three same-class detections spaced 60 degrees apart
        let mut set = LabelSet::new();
        for (frame, class, az, d, on) in groups {
            let class = ClassId::new(class).unwrap();
            let k = set.get(frame, class).len();
            if k < 3 {
                set.insert(frame, class, Detection { azimuth_deg: az + 60.0 * k as f64, distance: d, onscreen: Some(on), track: k as u32 }).unwrap();
            }
        }
        let back = decode_multi_accdoa(&encode_multi_accdoa(&set, 20).unwrap(), 0.5).unwrap();
        prop_assert_eq!(set.len(), back.len());
        for ((f1, c1, a), (f2, c2, b)) in set.iter().zip(back.iter()) {
            prop_assert_eq!((f1, c1, a.track), (f2, c2, b.track));
            prop_assert!((a.azimuth_deg - b.azimuth_deg).abs() < 0.01);
            prop_assert_eq!((a.distance, a.onscreen), (b.distance, b.onscreen));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stereo_level_difference_follows_label_side(az_step in 0i32..72, yaw_step in 0i32..72) {
        let (az, yaw) = (az_step as f64 * 5.0 - 180.0, yaw_step as f64 * 5.0);
        let record = EventRecord {
            frame: 0,
            class: ClassId::new(0).unwrap(),
            source: 0,
            azimuth_deg: az,
            elevation_deg: Some(0.0),
            distance: 1.0,
            onscreen: None,
        };
        let label = &transform_clip_labels(&[record], yaw, &FovConfig::default()).unwrap()[0];
        prop_assume!(label.azimuth_deg.abs() >= 5.0);
        let foa = encode_plane_wave(&[0.5, -0.25, 1.0], SphericalDirection::horizontal(az).unwrap(), 1.0).unwrap();
        let st = foa_to_stereo(&rotate_yaw(&foa, yaw));
        let energy = |ch: &[f64]| ch.iter().map(|v| v * v).sum::<f64>();
        let ild = energy(st.left()) - energy(st.right());
        prop_assert_eq!(ild > 0.0, label.azimuth_deg > 0.0);
    }

    #[test]
    fn rendering_is_superposable(
        az1 in -180.0f64..180.0,
        az2 in -180.0f64..180.0,
        d1 in 0.05f64..5.0,
        d2 in 0.05f64..5.0,
        onset in 0u32..5,
    ) {
        let mut bank = SampleBank::new();
        bank.insert(ClassId::new(1).unwrap(), "a", (0..9_000).map(|n| (n as f64 * 0.01).sin()).collect()).unwrap();
        bank.insert(ClassId::new(6).unwrap(), "b", (0..12_000).map(|n| (n as f64 * 0.003).cos()).collect()).unwrap();
        let event = |class: u32, sample: &str, az: f64, d: f64, onset_s: f64| SceneEvent {
            class: ClassId::new(class).unwrap(),
            source_id: 0,
            onset_s,
            sample: sample.into(),
            trajectory: vec![
                Keyframe { time_s: 0.0, azimuth_deg: az, elevation_deg: 10.0, distance_m: d },
                Keyframe { time_s: 1.0, azimuth_deg: -az, elevation_deg: -10.0, distance_m: d * 2.0 },
            ],
        };
        let e1 = event(1, "a", az1, d1, 0.0);
        let e2 = event(6, "b", az2, d2, onset as f64 * 0.1);
        let spec = |events| SceneSpec { duration_s: 1.0, events, ambient_level: 0.0, reverb: ReverbConfig::default(), seed: 1 };
        let (joint, _) = render_scene(&spec(vec![e1.clone(), e2.clone()]), &bank).unwrap();
        let (mut a, _) = render_scene(&spec(vec![e1]), &bank).unwrap();
        let (b, _) = render_scene(&spec(vec![e2]), &bank).unwrap();
        a.mix_in(&b).unwrap();
        prop_assert_eq!(a, joint);
    }
}
