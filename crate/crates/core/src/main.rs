use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use seld_core::config::PipelineConfig;
use seld_core::labels::{parse_metadata, MetadataSchema};
use seld_core::metrics::{parse_report, rank_systems, MetricsReport};
use seld_core::pipeline::{self, ConvertOptions, SynthOptions};
use seld_core::projection::Interpolation;
use seld_core::sampler::{parse_manifest, sample_clips, write_manifest, RecordingIndex};
use seld_core::spatializer::{ReverbConfig, SampleBank, SceneSpec};
use seld_core::wav;

/// Stereo SELD dataset construction, scene synthesis and evaluation.
#[derive(Parser, Debug)]
#[command(name = "seld", version)]
struct Cli {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(flatten)]
    settings: Settings,

    #[command(subcommand)]
    command: Command,
}

/// One flag per config key.
#[derive(Args, Debug, Default)]
struct Settings {
    /// Audio sample rate in Hz [24000]
    #[arg(long, global = true)]
    sample_rate: Option<String>,
    /// Clip length in seconds [5]
    #[arg(long, global = true)]
    clip_len_s: Option<String>,
    /// Label frame length in seconds [0.1]
    #[arg(long, global = true)]
    label_frame_s: Option<String>,
    /// Horizontal field of view in degrees [100]
    #[arg(long, global = true)]
    hfov_deg: Option<String>,
    /// Vertical field of view for the onscreen test, or `none` [none]
    #[arg(long, global = true)]
    vfov_deg: Option<String>,
    /// Perspective frame width [640]
    #[arg(long, global = true)]
    out_width: Option<String>,
    /// Perspective frame height [360]
    #[arg(long, global = true)]
    out_height: Option<String>,
    /// Video frame rate [29.97]
    #[arg(long, global = true)]
    fps: Option<String>,
    /// Azimuth gate for true positives, degrees [20]
    #[arg(long, global = true)]
    doa_threshold_deg: Option<String>,
    /// Relative distance gate for true positives [1]
    #[arg(long, global = true)]
    rde_threshold: Option<String>,
    /// Multi-ACCDOA activity threshold [0.5]
    #[arg(long, global = true)]
    activity_threshold: Option<String>,
    /// Random seed [0]
    #[arg(long, global = true)]
    seed: Option<String>,
    /// `degree` or `continuous` [degree]
    #[arg(long, global = true)]
    yaw_mode: Option<String>,
    /// Output WAV format: `int16` or `float32` [int16]
    #[arg(long, global = true)]
    sample_format: Option<String>,
    /// Recording index file
    #[arg(long, global = true)]
    index: Option<String>,
    /// Clip manifest file
    #[arg(long, global = true)]
    manifest: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    output_dir: Option<String>,
}

impl Settings {
    fn pairs(&self) -> [(&'static str, &Option<String>); 17] {
        [
            ("sample_rate", &self.sample_rate),
            ("clip_len_s", &self.clip_len_s),
            ("label_frame_s", &self.label_frame_s),
            ("hfov_deg", &self.hfov_deg),
            ("vfov_deg", &self.vfov_deg),
            ("out_width", &self.out_width),
            ("out_height", &self.out_height),
            ("fps", &self.fps),
            ("doa_threshold_deg", &self.doa_threshold_deg),
            ("rde_threshold", &self.rde_threshold),
            ("activity_threshold", &self.activity_threshold),
            ("seed", &self.seed),
            ("yaw_mode", &self.yaw_mode),
            ("sample_format", &self.sample_format),
            ("index", &self.index),
            ("manifest", &self.manifest),
            ("output_dir", &self.output_dir),
        ]
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a dataset root (foa/, metadata/, frames/) and write the recording index (--index).
    Index {
        root: PathBuf,
    },
    /// Draw clips from the index and write the manifest (--manifest).
    Sample {
        #[arg(short, long)]
        n: usize,
    },
    /// Convert manifest clips into stereo audio, stereo labels and perspective frames (--output-dir).
    Convert {
        /// Skip video frame conversion.
        #[arg(long)]
        no_video: bool,
        /// Nearest-neighbour instead of bilinear frame sampling.
        #[arg(long)]
        nearest: bool,
    },
    /// Render synthetic FOA recordings with source metadata into --output-dir.
    Synth {
        /// Sample bank manifest (`class_id,wav_path` rows).
        #[arg(long)]
        bank: PathBuf,
        /// Render this scene file instead of random scenes.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Recording id for --scene.
        #[arg(long, default_value = "scene")]
        id: String,
        #[arg(long, default_value_t = 1)]
        scenes: usize,
        #[arg(long, default_value_t = 60.0)]
        duration_s: f64,
        #[arg(long, default_value_t = 8)]
        max_events: usize,
        #[arg(long, default_value_t = 0.0)]
        ambient_level: f64,
        #[arg(long)]
        reverb: bool,
        #[arg(long, default_value_t = 0.4)]
        reverb_decay_s: f64,
        #[arg(long, default_value_t = 10.0)]
        reverb_drr_db: f64,
    },
    /// Score prediction CSVs against reference CSVs, or rank saved reports.
    Eval {
        #[arg(long, required_unless_present = "rank")]
        pred: Option<PathBuf>,
        #[arg(long = "ref", required_unless_present = "rank")]
        refs: Option<PathBuf>,
        /// Count clips without a prediction file as all misses.
        #[arg(long)]
        allow_missing: bool,
        /// Gate true positives on the onscreen flag too (audiovisual track).
        #[arg(long)]
        audiovisual: bool,
        /// Write the key-value report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Rank saved reports by macro F.
        #[arg(long, num_args = 1.., conflicts_with_all = ["pred", "refs"])]
        rank: Vec<PathBuf>,
    },
    /// Re-score predictions with distances replaced by training-set class means.
    BiasBaseline {
        /// Training reference labels used for the class means.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        refs: PathBuf,
        #[arg(long)]
        allow_missing: bool,
        #[arg(long)]
        audiovisual: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Summarize a WAV, metadata CSV, report, scene, index or manifest file.
    Inspect {
        path: PathBuf,
    },
}

// synthetic FOA exceeds full scale for sources nearer than 1 m, so the
// rendered recordings are always float; sample_format applies to convert
const SYNTH_FORMAT: wav::PcmFormat = wav::PcmFormat::Float32;

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<seld_core::SeldError> for Failure {
    fn from(e: seld_core::SeldError) -> Self {
        Failure::Data(e.into())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(Failure::Usage)?;
            let mut cfg = PipelineConfig::default();
            cfg.apply_text(&text)
                .with_context(|| format!("in {}", path.display()))
                .map_err(Failure::Usage)?;
            cfg
        }
        None => PipelineConfig::default(),
    };
    for (key, value) in cli.settings.pairs() {
        if let Some(v) = value {
            cfg.set(key, v).map_err(|e| Failure::Usage(e.into()))?;
        }
    }
    cfg.validate().map_err(|e| Failure::Usage(e.into()))?;
    Ok(cfg)
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref()
        .ok_or_else(|| usage(format!("--{flag} (or `{}` in the config file) is required", flag.replace('-', "_"))))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let cfg = build_config(&cli)?;

    match cli.command {
        Command::Index { root } => {
            let out = required(&cfg.index, "index")?;
            let outcome = pipeline::index_dataset(&root).context("indexing dataset")?;
            for s in &outcome.skipped {
                eprintln!("skipped {s}");
            }
            write(out, &outcome.index.to_csv())?;
            println!("indexed {} recordings into {}", outcome.index.entries.len(), out.display());
        }
        Command::Sample { n } => {
            let index_path = required(&cfg.index, "index")?;
            let out = required(&cfg.manifest, "manifest")?;
            let index = RecordingIndex::parse_csv(&read(index_path)?)
                .with_context(|| format!("in {}", index_path.display()))?;
            let clips = sample_clips(&index, n, cfg.seed, &cfg.sampler())?;
            write(out, &write_manifest(&clips, cfg.seed))?;
            println!("sampled {n} clips (seed {}) into {}", cfg.seed, out.display());
        }
        Command::Convert { no_video, nearest } => {
            let index_path = required(&cfg.index, "index")?;
            let manifest_path = required(&cfg.manifest, "manifest")?;
            let out_dir = required(&cfg.output_dir, "output-dir")?;
            let index = RecordingIndex::parse_csv(&read(index_path)?)
                .with_context(|| format!("in {}", index_path.display()))?;
            let (clips, _) = parse_manifest(&read(manifest_path)?, cfg.clip_len_s)
                .with_context(|| format!("in {}", manifest_path.display()))?;
            let opts = ConvertOptions {
                video: !no_video,
                interpolation: if nearest { Interpolation::Nearest } else { Interpolation::Bilinear },
            };
            let report = pipeline::convert_clips(&index, &clips, &cfg, out_dir, &opts)?;
            println!("converted {} of {} clips into {}", report.converted.len(), clips.len(), out_dir.display());
            if !report.failures.is_empty() {
                for (id, msg) in &report.failures {
                    eprintln!("failed {id}: {msg}");
                }
                return Err(Failure::Data(anyhow::anyhow!(
                    "{} clips failed; see {}",
                    report.failures.len(),
                    out_dir.join("failures.csv").display()
                )));
            }
        }
        Command::Synth {
            bank,
            scene,
            id,
            scenes,
            duration_s,
            max_events,
            ambient_level,
            reverb,
            reverb_decay_s,
            reverb_drr_db,
        } => {
            let out_dir = required(&cfg.output_dir, "output-dir")?;
            let bank = SampleBank::load_manifest(&bank).with_context(|| format!("loading bank {}", bank.display()))?;
            match scene {
                Some(scene_path) => {
                    let spec = SceneSpec::parse(&read(&scene_path)?)
                        .with_context(|| format!("in {}", scene_path.display()))?;
                    pipeline::write_scene(&spec, &bank, out_dir, &id, SYNTH_FORMAT)?;
                    println!("rendered {id} into {}", out_dir.display());
                }
                None => {
                    let opts = SynthOptions {
                        n_scenes: scenes,
                        duration_s,
                        max_events,
                        ambient_level,
                        reverb: ReverbConfig {
                            enabled: reverb,
                            decay_time_s: reverb_decay_s,
                            direct_to_reverb_db: reverb_drr_db,
                        },
                        format: SYNTH_FORMAT,
                        ..SynthOptions::default()
                    };
                    let ids = pipeline::synth_dataset(&bank, out_dir, &opts, cfg.seed)?;
                    println!("rendered {} scenes into {}", ids.len(), out_dir.display());
                }
            }
        }
        Command::Eval {
            pred,
            refs,
            allow_missing,
            audiovisual,
            report,
            rank,
        } => {
            if !rank.is_empty() {
                let systems = rank
                    .iter()
                    .map(|p| {
                        let r = parse_report(&read(p)?).with_context(|| format!("in {}", p.display()))?;
                        Ok((p.display().to_string(), r))
                    })
                    .collect::<anyhow::Result<Vec<(String, MetricsReport)>>>()?;
                for (i, (name, f)) in rank_systems(&systems, audiovisual).into_iter().enumerate() {
                    let f = f.map_or("n/a".to_string(), |v| format!("{:.1}%", v * 100.0));
                    println!("{}. {name}  {f}", i + 1);
                }
                return Ok(());
            }
            let (pred, refs) = (pred.expect("required by clap"), refs.expect("required by clap"));
            let result = pipeline::eval_dirs(&pred, &refs, &cfg.metrics(audiovisual), allow_missing)?;
            print!("{result}");
            if let Some(path) = report {
                write(&path, &result.to_kv())?;
            }
        }
        Command::BiasBaseline {
            train,
            pred,
            refs,
            allow_missing,
            audiovisual,
            report,
        } => {
            let outcome = pipeline::bias_baseline(&train, &pred, &refs, &cfg.metrics(audiovisual), allow_missing)?;
            println!("class mean distances:");
            print!("{}", outcome.means.to_csv());
            println!("\n== predicted distances ==");
            print!("{}", outcome.original);
            println!("\n== class-mean distances ==");
            print!("{}", outcome.biased);
            if let Some(path) = report {
                write(&path, &outcome.biased.to_kv())?;
            }
        }
        Command::Inspect { path } => inspect(&path, &cfg)?,
    }
    Ok(())
}

fn inspect(path: &Path, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match ext {
        "wav" => {
            let info = wav::probe(path)?;
            println!(
                "{}: {} ch, {} Hz, {} frames ({:.3} s), {}-bit {}",
                path.display(),
                info.channels,
                info.sample_rate,
                info.frames,
                info.duration_s(),
                info.bits_per_sample,
                if info.float { "float" } else { "int" }
            );
        }
        "csv" => {
            let text = read(path)?;
            let (records, schema) = match parse_metadata(&text, MetadataSchema::Stereo) {
                Ok(r) => (r, "stereo"),
                Err(_) => (parse_metadata(&text, MetadataSchema::Source).with_context(|| format!("in {}", path.display()))?, "source"),
            };
            let frames: std::collections::BTreeSet<u32> = records.iter().map(|r| r.frame).collect();
            let onscreen = records.iter().filter(|r| r.onscreen == Some(true)).count();
            println!("{}: {schema} metadata, {} records over {} frames", path.display(), records.len(), frames.len());
            if schema == "stereo" && !records.is_empty() {
                println!("onscreen fraction {:.3}", onscreen as f64 / records.len() as f64);
            }
            let mut per_class = [0usize; seld_core::labels::NUM_CLASSES];
            for r in &records {
                per_class[r.class.index()] += 1;
            }
            for class in seld_core::ClassId::all().filter(|c| per_class[c.index()] > 0) {
                println!("  {class:>2} {:<36} {}", class.name(), per_class[class.index()]);
            }
        }
        "report" => print!("{}", parse_report(&read(path)?)?),
        "scene" => {
            let spec = SceneSpec::parse(&read(path)?)?;
            println!("{}: {} s, {} events, seed {}", path.display(), spec.duration_s, spec.events.len(), spec.seed);
        }
        "index" => {
            let index = RecordingIndex::parse_csv(&read(path)?)?;
            let total: f64 = index.entries.iter().map(|e| e.duration_s).sum();
            println!("{}: {} recordings, {:.1} s total", path.display(), index.entries.len(), total);
        }
        "manifest" => {
            let (clips, seed) = parse_manifest(&read(path)?, cfg.clip_len_s)?;
            println!("{}: {} clips, seed {}", path.display(), clips.len(), seed.map_or("n/a".into(), |s| s.to_string()));
        }
        _ => bail!("don't know how to inspect '{}'", path.display()),
    }
    Ok(())
}
