use std::collections::BTreeSet;

use rayon::prelude::*;

use super::matching::match_frame;
use super::{Detection, LabelSet, MetricsConfig};
use crate::error::{Result, SeldError};
use crate::labels::ClassId;

/// True positive, false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    /// `2TP / (2TP + FP + FN)`, undefined without any activity.
    pub fn f_score(&self) -> Option<f64> {
        let denom = 2 * self.tp + self.fp + self.fn_;
        (denom > 0).then(|| 2.0 * self.tp as f64 / denom as f64)
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScore {
    pub class: ClassId,
    pub counts: Counts,
    pub f: Option<f64>,
    /// Counts with the onscreen gate, when flags were available.
    pub counts_onoff: Option<Counts>,
    pub f_onoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Macro F over classes with any activity (TP + FP + FN > 0).
    pub macro_f: Option<f64>,
    /// Same with the onscreen gate; present when every detection had a flag.
    pub macro_f_onoff: Option<f64>,
    /// Mean absolute azimuth error over class-matched pairs, degrees.
    pub doae_cd_deg: Option<f64>,
    /// Mean relative distance error over class-matched pairs.
    pub rde_cd: Option<f64>,
    /// Fraction of flagged class-matched pairs whose onscreen flags agree.
    pub onscreen_accuracy: Option<f64>,
    pub matched_pairs: u64,
    pub onscreen_pairs: u64,
    pub doa_threshold_deg: f64,
    pub rde_threshold: f64,
    pub classes: Vec<ClassScore>,
}

#[derive(Debug, Clone, Default)]
struct GroupOutcome {
    counts: Counts,
    counts_onoff: Counts,
    doa_sum: f64,
    rde_sum: f64,
    pairs: u64,
    onscreen_pairs: u64,
    onscreen_agree: u64,
}

fn score_group(preds: &[Detection], refs: &[Detection], cfg: &MetricsConfig) -> GroupOutcome {
    let p_az: Vec<f64> = preds.iter().map(|d| d.azimuth_deg).collect();
    let r_az: Vec<f64> = refs.iter().map(|d| d.azimuth_deg).collect();
    let pairs = match_frame(&p_az, &r_az);
    let mut out = GroupOutcome::default();
    for &(i, j) in &pairs {
        let (p, r) = (&preds[i], &refs[j]);
        let doa = (p.azimuth_deg - r.azimuth_deg).abs();
        let rde = (p.distance - r.distance).abs() / r.distance;
        out.doa_sum += doa;
        out.rde_sum += rde;
        out.pairs += 1;

        let spatial_ok = doa <= cfg.doa_threshold_deg && rde <= cfg.rde_threshold;
        if spatial_ok {
            out.counts.tp += 1;
        } else {
            out.counts.fp += 1;
            out.counts.fn_ += 1;
        }

        let flags_agree = match (p.onscreen, r.onscreen) {
            (Some(a), Some(b)) => {
                out.onscreen_pairs += 1;
                out.onscreen_agree += u64::from(a == b);
                a == b
            }
            _ => false,
        };
        if spatial_ok && flags_agree {
            out.counts_onoff.tp += 1;
        } else {
            out.counts_onoff.fp += 1;
            out.counts_onoff.fn_ += 1;
        }
    }
    let unmatched = Counts {
        tp: 0,
        fp: (preds.len() - pairs.len()) as u64,
        fn_: (refs.len() - pairs.len()) as u64,
    };
    out.counts.add(unmatched);
    out.counts_onoff.add(unmatched);
    out
}

/// Accumulates scores over clips; each [`add`](Self::add) call contributes
/// one independently frame-indexed pair of label sets.
#[derive(Debug, Clone)]
pub struct ScoreAccumulator {
    cfg: MetricsConfig,
    counts: Vec<Counts>,
    counts_onoff: Vec<Counts>,
    onoff_valid: bool,
    doa_sum: f64,
    rde_sum: f64,
    pairs: u64,
    onscreen_pairs: u64,
    onscreen_agree: u64,
}

impl ScoreAccumulator {
    pub fn new(cfg: MetricsConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            counts: vec![Counts::default(); cfg.class_count],
            counts_onoff: vec![Counts::default(); cfg.class_count],
            onoff_valid: true,
            doa_sum: 0.0,
            rde_sum: 0.0,
            pairs: 0,
            onscreen_pairs: 0,
            onscreen_agree: 0,
        })
    }

    pub fn config(&self) -> &MetricsConfig {
        &self.cfg
    }

    pub fn add(&mut self, preds: &LabelSet, refs: &LabelSet) -> Result<()> {
        let flagged = preds.has_onscreen_flags() && refs.has_onscreen_flags();
        if self.cfg.require_onscreen_match && !flagged {
            return Err(SeldError::Config(
                "onscreen matching requested but some detections lack an onscreen flag".into(),
            ));
        }
        for (frame, class, d) in refs.iter() {
            if d.distance <= 0.0 {
                return Err(SeldError::Validation(format!(
                    "reference at frame {frame}, class {class} has non-positive distance {}",
                    d.distance
                )));
            }
        }
        let keys: BTreeSet<(u32, ClassId)> = preds
            .groups()
            .chain(refs.groups())
            .map(|(f, c, _)| (f, c))
            .collect();
        if let Some(&(frame, class)) = keys.iter().find(|(_, c)| c.index() >= self.cfg.class_count) {
            return Err(SeldError::Validation(format!(
                "frame {frame}: class {class} outside the configured {} classes",
                self.cfg.class_count
            )));
        }

        let keys: Vec<(u32, ClassId)> = keys.into_iter().collect();
        let outcomes: Vec<GroupOutcome> = keys
            .par_iter()
            .map(|&(f, c)| score_group(preds.get(f, c), refs.get(f, c), &self.cfg))
            .collect();

        self.onoff_valid &= flagged;
        for (&(_, class), o) in keys.iter().zip(outcomes) {
            self.counts[class.index()].add(o.counts);
            self.counts_onoff[class.index()].add(o.counts_onoff);
            self.doa_sum += o.doa_sum;
            self.rde_sum += o.rde_sum;
            self.pairs += o.pairs;
            self.onscreen_pairs += o.onscreen_pairs;
            self.onscreen_agree += o.onscreen_agree;
        }
        Ok(())
    }

    pub fn finish(&self) -> MetricsReport {
        let classes: Vec<ClassScore> = self
            .counts
            .iter()
            .zip(&self.counts_onoff)
            .enumerate()
            .map(|(i, (c, o))| ClassScore {
                class: ClassId::new(i as u32).expect("class_count validated"),
                counts: *c,
                f: c.f_score(),
                counts_onoff: self.onoff_valid.then_some(*o),
                f_onoff: if self.onoff_valid { o.f_score() } else { None },
            })
            .collect();
        let macro_of = |fs: Vec<f64>| (!fs.is_empty()).then(|| fs.iter().sum::<f64>() / fs.len() as f64);
        let mean = |sum: f64, n: u64| (n > 0).then(|| sum / n as f64);
        MetricsReport {
            macro_f: macro_of(classes.iter().filter_map(|c| c.f).collect()),
            macro_f_onoff: macro_of(classes.iter().filter_map(|c| c.f_onoff).collect()),
            doae_cd_deg: mean(self.doa_sum, self.pairs),
            rde_cd: mean(self.rde_sum, self.pairs),
            onscreen_accuracy: mean(self.onscreen_agree as f64, self.onscreen_pairs),
            matched_pairs: self.pairs,
            onscreen_pairs: self.onscreen_pairs,
            doa_threshold_deg: self.cfg.doa_threshold_deg,
            rde_threshold: self.cfg.rde_threshold,
            classes,
        }
    }
}

/// Scores one frame-aligned pair of label sets.
pub fn score(preds: &LabelSet, refs: &LabelSet, cfg: &MetricsConfig) -> Result<MetricsReport> {
    let mut acc = ScoreAccumulator::new(*cfg)?;
    acc.add(preds, refs)?;
    Ok(acc.finish())
}
