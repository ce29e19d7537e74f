//! Confusion counts and the percentage figures derived from them.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn genuine_trials(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn impostor_trials(&self) -> u64 {
        self.fp + self.tn
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Percentages; a ratio with a zero denominator is `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: f64,
    pub false_positive_rate: Option<f64>,
    pub false_negative_rate: Option<f64>,
}

fn percent(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> Result<MetricsReport> {
    if c.total() == 0 {
        return Err(Error::EmptyReport);
    }
    let sensitivity = percent(c.tp, c.tp + c.fn_);
    let specificity = percent(c.tn, c.fp + c.tn);
    Ok(MetricsReport {
        sensitivity,
        specificity,
        accuracy: 100.0 * (c.tp + c.tn) as f64 / c.total() as f64,
        false_positive_rate: specificity.map(|s| 100.0 - s),
        false_negative_rate: sensitivity.map(|s| 100.0 - s),
    })
}

/// Two decimals, halves rounded up.
pub fn format_percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", (v * 100.0 + 0.5).floor() / 100.0),
        None => "n/a".to_owned(),
    }
}

/// Machine-readable `key: value` report.
pub fn report_text(c: &ConfusionCounts, m: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tp: {}", c.tp);
    let _ = writeln!(s, "fp: {}", c.fp);
    let _ = writeln!(s, "tn: {}", c.tn);
    let _ = writeln!(s, "fn: {}", c.fn_);
    let _ = writeln!(s, "sensitivity: {}", format_percent(m.sensitivity));
    let _ = writeln!(s, "specificity: {}", format_percent(m.specificity));
    let _ = writeln!(s, "accuracy: {}", format_percent(Some(m.accuracy)));
    let _ = writeln!(s, "fpr: {}", format_percent(m.false_positive_rate));
    let _ = writeln!(s, "fnr: {}", format_percent(m.false_negative_rate));
    s
}

/// Human-readable confusion table.
pub fn metrics_table(c: &ConfusionCounts, m: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "                 actual +   actual -");
    let _ = writeln!(s, "  predicted +   TP={:<7} FP={:<7}", c.tp, c.fp);
    let _ = writeln!(s, "  predicted -   FN={:<7} TN={:<7}", c.fn_, c.tn);
    let _ = writeln!(s, "  sensitivity   {:>7} %", format_percent(m.sensitivity));
    let _ = writeln!(s, "  specificity   {:>7} %", format_percent(m.specificity));
    let _ = writeln!(s, "  accuracy      {:>7} %", format_percent(Some(m.accuracy)));
    let _ = writeln!(s, "  FPR           {:>7} %", format_percent(m.false_positive_rate));
    let _ = writeln!(s, "  FNR           {:>7} %", format_percent(m.false_negative_rate));
    s
}

/// Reads `tp`, `fp`, `tn` and `fn` from `key: value` text; other keys are ignored.
pub fn parse_counts(text: &str) -> Result<ConfusionCounts> {
    let mut found = [None; 4];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected `key: value`, got `{line}`"),
        })?;
        let slot = match key.trim() {
            "tp" => 0,
            "fp" => 1,
            "tn" => 2,
            "fn" => 3,
            _ => continue,
        };
        let v: u64 = value.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("invalid count `{}`", value.trim()),
        })?;
        found[slot] = Some(v);
    }
    match found {
        [Some(tp), Some(fp), Some(tn), Some(fn_)] => Ok(ConfusionCounts::new(tp, fp, tn, fn_)),
        _ => Err(Error::Validation("counts file must define tp, fp, tn and fn".into())),
    }
}
