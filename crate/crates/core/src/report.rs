//! Line-delimited machine reports and plain-text tables for verdicts.

use serde::{Deserialize, Serialize};

use crate::properties::PropertyReport;
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub level: usize,
    pub key: String,
}

/// One checker run. Field order is fixed; `millis` is the only field that
/// varies between identical runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub property: String,
    pub entry: String,
    pub level: Vec<usize>,
    pub guard: usize,
    pub outcome: String,
    pub witness: Option<WitnessRecord>,
    pub detail: Option<String>,
    pub notes: Vec<String>,
    pub millis: u64,
}

pub fn outcome_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Holds { .. } => "holds",
        Verdict::Fails { .. } => "fails",
        Verdict::Unstable { .. } => "unstable",
    }
}

impl ReportRecord {
    pub fn from_report(r: &PropertyReport) -> Self {
        let (witness, detail) = match &r.verdict {
            Verdict::Holds { stable_at } => (None, Some(format!("stable from level {stable_at}"))),
            Verdict::Fails { witness } => (
                Some(WitnessRecord {
                    level: witness.level,
                    key: witness.key(),
                }),
                None,
            ),
            Verdict::Unstable { diagnostic } => (None, Some(diagnostic.clone())),
        };
        ReportRecord {
            property: r.property.name().to_string(),
            entry: r.family.clone(),
            level: r.levels.clone(),
            guard: r.guard,
            outcome: outcome_name(&r.verdict).to_string(),
            witness,
            detail,
            notes: r.notes.clone(),
            millis: u64::try_from(r.millis).unwrap_or(u64::MAX),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// The record with its timing zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        ReportRecord {
            millis: 0,
            ..self.clone()
        }
    }
}

pub fn parse_line(line: &str) -> serde_json::Result<ReportRecord> {
    serde_json::from_str(line)
}

/// JSON lines for `reports`, newline-terminated.
pub fn to_lines(reports: &[PropertyReport]) -> String {
    reports
        .iter()
        .map(|r| ReportRecord::from_report(r).to_line() + "\n")
        .collect()
}

/// Rewrites every record of a JSON-lines text with `millis` set to zero.
pub fn normalize_lines(text: &str) -> serde_json::Result<String> {
    let mut out = String::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        out.push_str(&parse_line(line)?.without_timing().to_line());
        out.push('\n');
    }
    Ok(out)
}

/// Fixed-width human table, one row per report.
pub fn table(reports: &[PropertyReport]) -> String {
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            let rec = ReportRecord::from_report(r);
            let what = match (&rec.witness, &rec.detail) {
                (Some(w), _) => format!("{} (level {})", w.key, w.level),
                (None, Some(d)) => d.clone(),
                (None, None) => String::new(),
            };
            [rec.entry, rec.property, rec.outcome, what]
        })
        .collect();
    let head = ["entry", "property", "outcome", "witness / detail"];
    let mut width = head.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let fmt_row = |cells: [&str; 4]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            s.push_str(c);
            if i < 3 {
                s.push_str(&" ".repeat(width[i] - c.chars().count() + 2));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = fmt_row(head);
    for row in &rows {
        out.push_str(&fmt_row([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fig2_family;
    use crate::properties::{check, CheckConfig, Property};

    #[test]
    fn records_round_trip_and_normalize() {
        let e = fig2_family();
        let r = check(&e.family, Property::WeakOneStep, &CheckConfig::default()).unwrap();
        let rec = ReportRecord::from_report(&r);
        assert_eq!(rec.outcome, "fails");
        assert_eq!(rec.witness.as_ref().unwrap().key, "A=ℕ; x=(1,ω)");
        let line = rec.to_line();
        assert!(line.starts_with("{\"property\":\"weak-one-step\",\"entry\":\"fig2\",\"level\":[4,8,16],\"guard\":1,"));
        assert_eq!(parse_line(&line).unwrap(), rec);
        let a = normalize_lines(&to_lines(&[r.clone()])).unwrap();
        let mut slow = r;
        slow.millis += 1234;
        assert_eq!(a, normalize_lines(&to_lines(&[slow])).unwrap());
        assert!(table(&[]).starts_with("entry"));
    }
}
