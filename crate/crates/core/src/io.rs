//! File schemas: signal CSV ingestion/emission, feature-matrix CSV, and the
//! four report CSVs written by the evaluation command.
//!
//! All writers are deterministic string builders so callers can stage
//! complete outputs before touching the filesystem.

use crate::error::{Error, Result};
use crate::eval::{F1Row, SelectionRow, SignificanceRow};
use crate::signals::{
    feature_inventory, source_from_name, FeatureMatrix, SignalRecord, Source, StressLabel,
};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

pub const SIGNAL_HEADER: &str = "time,ecg,hand_eda,foot_eda,resp,label";

/// Relative jitter tolerated in the time column (0.1%).
const TIME_JITTER_TOLERANCE: f64 = 0.001;

fn schema_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse a signal CSV: header `time,ecg,hand_eda,foot_eda,resp,label`,
/// uniformly spaced ascending time in seconds, labels low/medium/high.
/// The sampling rate is inferred from the first two time stamps and
/// validated against every gap.
pub fn read_signal_csv(path: &Path) -> Result<SignalRecord> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(path, 1, "empty file"))?;
    let header = header?;
    let expected: Vec<&str> = SIGNAL_HEADER.split(',').collect();
    let actual: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    for col in &expected {
        if !actual.contains(col) {
            return Err(schema_err(path, 1, format!("missing column '{col}'")));
        }
    }
    if actual != expected {
        return Err(schema_err(
            path,
            1,
            format!("header must be exactly '{SIGNAL_HEADER}'"),
        ));
    }

    let mut times = Vec::new();
    let mut ecg = Vec::new();
    let mut hand = Vec::new();
    let mut foot = Vec::new();
    let mut resp = Vec::new();
    let mut labels = Vec::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(schema_err(
                path,
                line_no,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|_| {
                schema_err(
                    path,
                    line_no,
                    format!("'{}' is not a number in column '{}'", fields[i], expected[i]),
                )
            })
        };
        times.push(num(0)?);
        ecg.push(num(1)?);
        hand.push(num(2)?);
        foot.push(num(3)?);
        resp.push(num(4)?);
        labels.push(StressLabel::parse(fields[5]).ok_or_else(|| {
            schema_err(
                path,
                line_no,
                format!("label '{}' must be one of low, medium, high", fields[5]),
            )
        })?);
    }

    if times.len() < 2 {
        return Err(schema_err(path, 1, "need at least 2 samples"));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(schema_err(path, 3, "time column must be strictly ascending"));
    }
    for (i, pair) in times.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if ((gap - dt) / dt).abs() > TIME_JITTER_TOLERANCE {
            return Err(schema_err(
                path,
                i + 3,
                format!("non-uniform time step {gap:.9} (expected {dt:.9} within 0.1%)"),
            ));
        }
    }
    SignalRecord::new(ecg, hand, foot, resp, 1.0 / dt, labels)
}

pub fn signal_csv(record: &SignalRecord) -> String {
    let fs = record.sampling_rate_hz;
    let mut out = String::with_capacity(record.len() * 64);
    out.push_str(SIGNAL_HEADER);
    out.push('\n');
    for i in 0..record.len() {
        let _ = writeln!(
            out,
            "{:.9},{:.9},{:.9},{:.9},{:.9},{}",
            i as f64 / fs,
            record.ecg[i],
            record.hand_eda[i],
            record.foot_eda[i],
            record.resp[i],
            record.labels[i],
        );
    }
    out
}

/// Feature matrix as CSV: header `label,<feature names>`, one window per
/// row, values with 9 significant digits.
pub fn feature_matrix_csv(fm: &FeatureMatrix) -> String {
    let mut out = String::new();
    out.push_str("label");
    for name in fm.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for r in 0..fm.n_rows() {
        let _ = write!(out, "{}", fm.labels()[r].ordinal());
        for v in fm.row(r) {
            let _ = write!(out, ",{v:.8e}");
        }
        out.push('\n');
    }
    out
}

/// Read a feature-matrix CSV as written by [`feature_matrix_csv`]. Source
/// tags are recovered from the feature-name prefixes.
pub fn read_feature_matrix_csv(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(path, 1, "empty file"))?;
    let header = header?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.first() != Some(&"label") {
        return Err(schema_err(path, 1, "first column must be 'label'"));
    }
    let names: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
    if names.is_empty() {
        return Err(schema_err(path, 1, "no feature columns"));
    }
    let sources: Vec<Source> = names
        .iter()
        .map(|n| {
            source_from_name(n)
                .ok_or_else(|| schema_err(path, 1, format!("unknown source prefix in '{n}'")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(schema_err(
                path,
                line_no,
                format!("expected {} fields, found {}", names.len() + 1, fields.len()),
            ));
        }
        let ordinal: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| schema_err(path, line_no, format!("bad label '{}'", fields[0])))?;
        labels.push(StressLabel::from_ordinal(ordinal).ok_or_else(|| {
            schema_err(path, line_no, format!("label ordinal {ordinal} out of range"))
        })?);
        for f in &fields[1..] {
            values.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| schema_err(path, line_no, format!("bad value '{f}'")))?,
            );
        }
    }
    FeatureMatrix::new(values, names, sources, labels)
}

/// Format a fraction the way it was configured (shortest round-trip form).
fn fmt_fraction(f: f64) -> String {
    format!("{f}")
}

pub fn results_csv(rows: &[F1Row]) -> String {
    let mut out = String::from("method,fraction,repetition,class,f1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6}",
            r.method,
            fmt_fraction(r.fraction),
            r.repetition,
            r.class,
            r.f1
        );
    }
    out
}

pub fn selections_csv(rows: &[SelectionRow]) -> String {
    let mut out = String::from("method,fraction,repetition,feature_index,feature_name,source\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method,
            fmt_fraction(r.fraction),
            r.repetition,
            r.feature_index,
            r.feature_name,
            r.source
        );
    }
    out
}

pub fn significance_csv(rows: &[SignificanceRow]) -> String {
    let mut out = String::from("method,class,fraction,p_value,significant\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6e},{}",
            r.method,
            r.class,
            fmt_fraction(r.fraction),
            r.p_value,
            u8::from(r.significant)
        );
    }
    out
}

/// `contributions` pairs (method, fraction) slices of selections with their
/// per-source percentages.
pub fn contribution_csv(rows: &[(String, f64, [(Source, f64); 4])]) -> String {
    let mut out = String::from("method,fraction,source,percent\n");
    for (method, fraction, contrib) in rows {
        for (source, percent) in contrib {
            let _ = writeln!(
                out,
                "{},{},{},{:.6}",
                method,
                fmt_fraction(*fraction),
                source,
                percent
            );
        }
    }
    out
}

/// Canonical ordering helper for the 39-column inventory, exposed so
/// write/read cycles can assert stable schemas.
pub fn canonical_feature_names() -> Vec<String> {
    feature_inventory().0
}
