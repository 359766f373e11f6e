//! Class-mean distance baseline: replaces predicted distances by the mean
//! training distance of the predicted class, to measure how much distance
//! estimation contributes to the scores.

use super::LabelSet;
use crate::error::{Result, SeldError};
use crate::labels::{ClassId, NUM_CLASSES};

/// Mean reference distance per class; `None` for classes never labeled.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMeans(pub [Option<f64>; NUM_CLASSES]);

impl ClassMeans {
    pub fn get(&self, class: ClassId) -> Option<f64> {
        self.0[class.index()]
    }

    pub fn absent(&self) -> Vec<ClassId> {
        ClassId::all().filter(|c| self.get(*c).is_none()).collect()
    }

    /// `class,mean` lines; absent classes are written as `n/a`.
    pub fn to_csv(&self) -> String {
        ClassId::all()
            .map(|c| match self.get(c) {
                Some(m) => format!("{c},{m}\n"),
                None => format!("{c},n/a\n"),
            })
            .collect()
    }
}

/// Arithmetic mean of the distance of every labeled detection, per class.
pub fn class_mean_distance(train_refs: &LabelSet) -> ClassMeans {
    let mut sums = [0.0; NUM_CLASSES];
    let mut counts = [0u64; NUM_CLASSES];
    for (_, class, d) in train_refs.iter() {
        sums[class.index()] += d.distance;
        counts[class.index()] += 1;
    }
    ClassMeans(std::array::from_fn(|i| (counts[i] > 0).then(|| sums[i] / counts[i] as f64)))
}

/// Replaces every predicted distance by its class mean.
pub fn apply_distance_bias(preds: &LabelSet, means: &ClassMeans) -> Result<LabelSet> {
    let mut missing: Vec<ClassId> = preds
        .iter()
        .filter(|(_, c, _)| means.get(*c).is_none())
        .map(|(_, c, _)| c)
        .collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(ToString::to_string).collect();
        return Err(SeldError::Validation(format!(
            "no mean distance for predicted classes {}",
            list.join(", ")
        )));
    }
    let mut out = preds.clone();
    for (class, dets) in out.groups_mut() {
        let mean = means.get(class).expect("checked above");
        for d in dets {
            d.distance = mean;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Detection;

    fn det(d: f64) -> Detection {
        Detection { azimuth_deg: 0.0, distance: d, onscreen: None, track: 0 }
    }

    #[test]
    fn means_and_absent_classes() {
        let c = ClassId::new(2).unwrap();
        let mut set = LabelSet::new();
        set.insert(0, c, det(1.0)).unwrap();
        set.insert(1, c, det(3.0)).unwrap();
        let means = class_mean_distance(&set);
        assert_eq!(means.get(c), Some(2.0));
        assert_eq!(means.get(ClassId::new(0).unwrap()), None);
        assert_eq!(means.absent().len(), NUM_CLASSES - 1);
        assert!(means.to_csv().contains("2,2\n"));
    }

    #[test]
    fn substitution() {
        let c = ClassId::new(3).unwrap();
        let mut preds = LabelSet::new();
        preds.insert(0, c, Detection { azimuth_deg: 12.0, distance: 7.0, onscreen: Some(true), track: 1 }).unwrap();
        let mut means = ClassMeans::default();
        means.0[3] = Some(2.0);
        let out = apply_distance_bias(&preds, &means).unwrap();
        assert_eq!(out.get(0, c)[0], Detection { azimuth_deg: 12.0, distance: 2.0, onscreen: Some(true), track: 1 });
        assert!(apply_distance_bias(&LabelSet::new(), &means).unwrap().is_empty());
    }

    #[test]
    fn missing_means_listed() {
        let mut preds = LabelSet::new();
        preds.insert(0, ClassId::new(4).unwrap(), det(1.0)).unwrap();
        preds.insert(0, ClassId::new(9).unwrap(), det(1.0)).unwrap();
        let err = apply_distance_bias(&preds, &ClassMeans::default()).unwrap_err().to_string();
        assert!(err.contains("4, 9"), "{err}");
    }
}
