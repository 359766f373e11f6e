//! Report serialization: a `key = value` header with the headline metrics
//! followed by a `[classes]` CSV table, plus a human-readable rendering.

use std::fmt::{self, Write as _};

use super::scoring::{ClassScore, Counts, MetricsReport};
use crate::error::{Result, SeldError};
use crate::labels::ClassId;

const NA: &str = "n/a";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| format!("{:.1}%", x * 100.0))
}

impl MetricsReport {
    /// Machine-readable form, parseable with [`parse_report`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "macro_f = {}", opt(self.macro_f));
        let _ = writeln!(s, "macro_f_onoff = {}", opt(self.macro_f_onoff));
        let _ = writeln!(s, "doae_cd_deg = {}", opt(self.doae_cd_deg));
        let _ = writeln!(s, "rde_cd = {}", opt(self.rde_cd));
        let _ = writeln!(s, "onscreen_accuracy = {}", opt(self.onscreen_accuracy));
        let _ = writeln!(s, "matched_pairs = {}", self.matched_pairs);
        let _ = writeln!(s, "onscreen_pairs = {}", self.onscreen_pairs);
        let _ = writeln!(s, "doa_threshold_deg = {}", self.doa_threshold_deg);
        let _ = writeln!(s, "rde_threshold = {}", self.rde_threshold);
        s.push_str("# macro averages skip classes with no TP, FP or FN\n");
        s.push_str("# onscreen accuracy is over class-matched pairs flagged on both sides\n");
        s.push_str("\n[classes]\n# class,tp,fp,fn,f,tp_onoff,fp_onoff,fn_onoff,f_onoff\n");
        for c in &self.classes {
            let onoff = match c.counts_onoff {
                Some(o) => format!("{},{},{}", o.tp, o.fp, o.fn_),
                None => format!("{NA},{NA},{NA}"),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                c.class,
                c.counts.tp,
                c.counts.fp,
                c.counts.fn_,
                opt(c.f),
                onoff,
                opt(c.f_onoff)
            );
        }
        s
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F (20°/{})          {}", self.rde_threshold, pct(self.macro_f))?;
        writeln!(f, "F onscreen-gated    {}", pct(self.macro_f_onoff))?;
        writeln!(
            f,
            "DOAE_CD             {}",
            self.doae_cd_deg.map_or(NA.to_string(), |v| format!("{v:.2}°"))
        )?;
        writeln!(f, "RDE_CD              {}", self.rde_cd.map_or(NA.to_string(), |v| format!("{v:.3}")))?;
        writeln!(f, "Onscreen accuracy   {}", pct(self.onscreen_accuracy))?;
        writeln!(f, "Matched pairs       {}", self.matched_pairs)?;
        writeln!(f)?;
        writeln!(f, "{:<36} {:>6} {:>6} {:>6} {:>8} {:>8}", "class", "TP", "FP", "FN", "F", "F_onoff")?;
        for c in &self.classes {
            writeln!(
                f,
                "{:<36} {:>6} {:>6} {:>6} {:>8} {:>8}",
                format!("{} {}", c.class, c.class.name()),
                c.counts.tp,
                c.counts.fp,
                c.counts.fn_,
                pct(c.f),
                pct(c.f_onoff)
            )?;
        }
        Ok(())
    }
}

fn parse_opt(v: &str, line: u64) -> Result<Option<f64>> {
    if v == NA {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|_| SeldError::parse(line, format!("bad number '{v}'")))
}

fn parse_int(v: &str, line: u64) -> Result<u64> {
    v.parse().map_err(|_| SeldError::parse(line, format!("bad count '{v}'")))
}

/// Parses a report written by [`MetricsReport::to_kv`].
pub fn parse_report(text: &str) -> Result<MetricsReport> {
    let mut r = MetricsReport {
        macro_f: None,
        macro_f_onoff: None,
        doae_cd_deg: None,
        rde_cd: None,
        onscreen_accuracy: None,
        matched_pairs: 0,
        onscreen_pairs: 0,
        doa_threshold_deg: 20.0,
        rde_threshold: 1.0,
        classes: Vec::new(),
    };
    let mut in_classes = false;
    let mut seen_macro = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[classes]" {
            in_classes = true;
            continue;
        }
        if in_classes {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 9 {
                return Err(SeldError::parse(line_no, format!("class rows need 9 fields, found {}", f.len())));
            }
            let class = ClassId::new(parse_int(f[0], line_no)? as u32)
                .map_err(|e| SeldError::parse(line_no, e.to_string()))?;
            let counts = Counts {
                tp: parse_int(f[1], line_no)?,
                fp: parse_int(f[2], line_no)?,
                fn_: parse_int(f[3], line_no)?,
            };
            let counts_onoff = if f[5] == NA {
                None
            } else {
                Some(Counts {
                    tp: parse_int(f[5], line_no)?,
                    fp: parse_int(f[6], line_no)?,
                    fn_: parse_int(f[7], line_no)?,
                })
            };
            r.classes.push(ClassScore {
                class,
                counts,
                f: parse_opt(f[4], line_no)?,
                counts_onoff,
                f_onoff: parse_opt(f[8], line_no)?,
            });
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| SeldError::parse(line_no, format!("expected key = value, got '{line}'")))?;
        let v = v.trim();
        match k.trim() {
            "macro_f" => {
                r.macro_f = parse_opt(v, line_no)?;
                seen_macro = true;
            }
            "macro_f_onoff" => r.macro_f_onoff = parse_opt(v, line_no)?,
            "doae_cd_deg" => r.doae_cd_deg = parse_opt(v, line_no)?,
            "rde_cd" => r.rde_cd = parse_opt(v, line_no)?,
            "onscreen_accuracy" => r.onscreen_accuracy = parse_opt(v, line_no)?,
            "matched_pairs" => r.matched_pairs = parse_int(v, line_no)?,
            "onscreen_pairs" => r.onscreen_pairs = parse_int(v, line_no)?,
            "doa_threshold_deg" => r.doa_threshold_deg = parse_opt(v, line_no)?.unwrap_or(20.0),
            "rde_threshold" => r.rde_threshold = parse_opt(v, line_no)?.unwrap_or(1.0),
            other => return Err(SeldError::parse(line_no, format!("unknown key '{other}'"))),
        }
    }
    if !seen_macro {
        return Err(SeldError::Validation("report lacks macro_f".into()));
    }
    Ok(r)
}

/// Orders systems by macro F (onscreen-gated F when `audiovisual`), best
/// first. Systems without a score sort last; ties keep input order.
pub fn rank_systems(systems: &[(String, MetricsReport)], audiovisual: bool) -> Vec<(&str, Option<f64>)> {
    let mut ranked: Vec<(&str, Option<f64>)> = systems
        .iter()
        .map(|(name, r)| (name.as_str(), if audiovisual { r.macro_f_onoff } else { r.macro_f }))
        .collect();
    ranked.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{score, LabelSet, MetricsConfig};

    fn sample_report() -> MetricsReport {
        let refs = LabelSet::from_csv("0,1,0,10,2,1\n1,1,0,-30,3,0\n4,6,0,70,1,0\n").unwrap();
        let preds = LabelSet::from_csv("0,1,0,12,2.5,1\n1,1,0,20,3,0\n5,2,0,0,1,1\n").unwrap();
        score(&preds, &refs, &MetricsConfig::default()).unwrap()
    }

    #[test]
    fn kv_round_trip() {
        let r = sample_report();
        assert_eq!(parse_report(&r.to_kv()).unwrap(), r);
        assert!(r.to_string().contains("Female speech"));
    }

    #[test]
    fn malformed_reports() {
        assert!(parse_report("").is_err());
        assert!(parse_report("macro_f = x\n").is_err());
        assert!(parse_report("macro_f = 0.5\n[classes]\n1,2,3\n").is_err());
        match parse_report("macro_f = 0.5\nbogus\n").unwrap_err() {
            SeldError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn ranking_uses_macro_f_only() {
        let mut a = sample_report();
        a.macro_f = Some(0.4);
        a.doae_cd_deg = Some(2.0);
        let mut b = a.clone();
        b.macro_f = Some(0.6);
        b.doae_cd_deg = Some(40.0);
        b.rde_cd = Some(3.0);
        let mut c = a.clone();
        c.macro_f = None;
        let systems = vec![("a".to_string(), a), ("c".to_string(), c), ("b".to_string(), b)];
        let ranked: Vec<&str> = rank_systems(&systems, false).into_iter().map(|x| x.0).collect();
        assert_eq!(ranked, ["b", "a", "c"]);
    }
}
