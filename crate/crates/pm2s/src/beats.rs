//! Beat annotation files: a JSON array of times in seconds, or CSV rows of
//! `beat_time_seconds,beat_index` with an optional header line.

use pm2s_core::align::{AlignError, BeatAnnotations};

#[derive(Debug, thiserror::Error)]
pub enum BeatsError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Invalid(#[from] AlignError),
}

pub fn parse_beats(text: &str) -> Result<BeatAnnotations, BeatsError> {
    if text.trim_start().starts_with('[') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

pub fn parse_json(text: &str) -> Result<BeatAnnotations, BeatsError> {
    Ok(BeatAnnotations::new(serde_json::from_str(text)?)?)
}

/// Rows are ordered by beat index when one is given.
pub fn parse_csv(text: &str) -> Result<BeatAnnotations, BeatsError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<(i64, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let Some(time) = rec.get(0).filter(|s| !s.is_empty()) else { continue };
        let time: f64 = match time.parse() {
            Ok(t) => t,
            // a non-numeric first row is a header
            Err(_) if i == 0 => continue,
            Err(_) => return Err(BeatsError::Row { line, message: format!("invalid time {time:?}") }),
        };
        let index = match rec.get(1).filter(|s| !s.is_empty()) {
            Some(s) => s.parse().map_err(|_| BeatsError::Row { line, message: format!("invalid beat index {s:?}") })?,
            None => rows.len() as i64,
        };
        rows.push((index, time));
    }
    rows.sort_by_key(|r| r.0);
    Ok(BeatAnnotations::new(rows.into_iter().map(|r| r.1).collect())?)
}
