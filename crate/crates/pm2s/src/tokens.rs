//! JSON token files: one integer array per stream plus a header naming the
//! streams in order with their vocabulary sizes.
//!
//! ```json
//! {"kind": "output",
//!  "streams": [{"name": "pitch", "vocab": 128}, ...],
//!  "tokens": {"pitch": [60, 62], ...}}
//! ```
//!
//! Input files may carry a `pad` array (1 marks a padding frame) and the
//! log-grid parameters used for timing tokens.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use pm2s_core::tokenizer::{
    InputSequence, InputStream, OutputSequence, OutputStream, TokenizeError, OUTPUT_STREAMS,
};
use pm2s_core::{InputFrame, OutputFrame, QuantGrid};

#[derive(Debug, thiserror::Error)]
pub enum TokenFileError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a {expected} token file, found {found}")]
    Kind { expected: &'static str, found: String },
    #[error("stream header does not match: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("stream {0} is missing")]
    Missing(String),
    #[error("stream {name} has {len} tokens, expected {expected}")]
    Length { name: String, len: usize, expected: usize },
    #[error("frame {frame}: {source}")]
    Token { frame: usize, source: TokenizeError },
    #[error("stream {name}: value {value} at frame {frame} is not a token")]
    Value { name: String, frame: usize, value: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamInfo {
    pub name: String,
    pub vocab: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub buckets: u16,
    pub max_value: f64,
    pub epsilon: f64,
}

impl From<&QuantGrid> for GridInfo {
    fn from(g: &QuantGrid) -> Self {
        Self { buckets: g.bucket_count, max_value: g.max_value, epsilon: g.epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenFile {
    pub kind: String,
    pub streams: Vec<StreamInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    pub tokens: BTreeMap<String, Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<Vec<u8>>,
}

fn columns<const N: usize>(names: [&str; N], rows: impl Iterator<Item = [u8; N]>) -> BTreeMap<String, Vec<i64>> {
    let mut cols: Vec<Vec<i64>> = vec![Vec::new(); N];
    for r in rows {
        for (c, t) in cols.iter_mut().zip(r) {
            c.push(t as i64);
        }
    }
    names.iter().map(|n| n.to_string()).zip(cols).collect()
}

impl TokenFile {
    pub fn from_input(seq: &InputSequence, grid: &QuantGrid) -> Self {
        let streams = InputStream::ALL
            .iter()
            .map(|s| StreamInfo {
                name: s.name().into(),
                vocab: match s {
                    InputStream::Onset | InputStream::Duration => grid.bucket_count,
                    _ => s.vocab(),
                },
            })
            .collect();
        let tokens = columns(InputStream::ALL.map(InputStream::name), seq.frames.iter().map(InputFrame::tokens));
        let pad = seq.frames.iter().any(|f| f.pad).then(|| seq.frames.iter().map(|f| f.pad as u8).collect());
        Self { kind: "input".into(), streams, grid: Some(grid.into()), tokens, pad }
    }

    pub fn from_output(seq: &OutputSequence) -> Self {
        let streams = OutputStream::ALL.iter().map(|s| StreamInfo { name: s.name().into(), vocab: s.vocab() }).collect();
        let tokens = columns(OutputStream::ALL.map(OutputStream::name), seq.frames.iter().map(OutputFrame::tokens));
        Self { kind: "output".into(), streams, grid: None, tokens, pad: None }
    }

    fn check(&self, kind: &'static str, names: &[&str]) -> Result<usize, TokenFileError> {
        if self.kind != kind {
            return Err(TokenFileError::Kind { expected: kind, found: self.kind.clone() });
        }
        let found: Vec<String> = self.streams.iter().map(|s| s.name.clone()).collect();
        if found != names {
            return Err(TokenFileError::Header { expected: names.iter().map(|s| s.to_string()).collect(), found });
        }
        let first = self.tokens.get(names[0]).ok_or_else(|| TokenFileError::Missing(names[0].into()))?;
        let n = first.len();
        for name in names {
            let col = self.tokens.get(*name).ok_or_else(|| TokenFileError::Missing(name.to_string()))?;
            if col.len() != n {
                return Err(TokenFileError::Length { name: name.to_string(), len: col.len(), expected: n });
            }
        }
        Ok(n)
    }

    fn row<const N: usize>(&self, names: [&str; N], frame: usize) -> Result<[u8; N], TokenFileError> {
        let mut out = [0u8; N];
        for (o, name) in out.iter_mut().zip(names) {
            let v = self.tokens[name][frame];
            *o = u8::try_from(v).map_err(|_| TokenFileError::Value { name: name.into(), frame, value: v })?;
        }
        Ok(out)
    }

    pub fn grid(&self) -> QuantGrid {
        self.grid.map(|g| QuantGrid { bucket_count: g.buckets, max_value: g.max_value, epsilon: g.epsilon }).unwrap_or_default()
    }

    pub fn to_input(&self) -> Result<InputSequence, TokenFileError> {
        let names = InputStream::ALL.map(InputStream::name);
        let n = self.check("input", &names)?;
        if let Some(pad) = &self.pad {
            if pad.len() != n {
                return Err(TokenFileError::Length { name: "pad".into(), len: pad.len(), expected: n });
            }
        }
        let buckets = self.grid().bucket_count;
        let mut frames = Vec::with_capacity(n);
        for i in 0..n {
            if self.pad.as_ref().is_some_and(|p| p[i] != 0) {
                frames.push(InputFrame::padding());
                continue;
            }
            let row = self.row(names, i)?;
            frames.push(InputFrame::from_tokens(row, buckets).map_err(|source| TokenFileError::Token { frame: i, source })?);
        }
        Ok(InputSequence::new(frames))
    }

    pub fn to_output(&self) -> Result<OutputSequence, TokenFileError> {
        let names: [&str; OUTPUT_STREAMS] = OutputStream::ALL.map(OutputStream::name);
        let n = self.check("output", &names)?;
        let mut frames = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.row(names, i)?;
            frames.push(OutputFrame::from_tokens(row).map_err(|source| TokenFileError::Token { frame: i, source })?);
        }
        Ok(OutputSequence::new(frames))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("token files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, TokenFileError> {
        let file: Self = serde_json::from_str(text)?;
        if file.kind != "input" && file.kind != "output" {
            return Err(TokenFileError::Kind { expected: "input or output", found: file.kind });
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pm2s_core::tokenizer::{encode_score, ML_FALSE};
    use pm2s_core::{Measure, Score, ScoreNote};

    #[test]
    fn output_roundtrip_and_ml_false() {
        let s = Score::new(vec![Measure::new(96, vec![ScoreNote::new(60, 0, 24), ScoreNote::new(64, 24, 24)])]);
        let mut seq = encode_score(&s).unwrap();
        seq.frames.push(OutputFrame::space());
        let f = TokenFile::from_output(&seq);
        assert_eq!(f.tokens["measure_length"], vec![0, ML_FALSE as i64, 0]);
        assert_eq!(f.tokens["space"], vec![0, 0, 1]);
        let back = TokenFile::from_json(&f.to_json()).unwrap().to_output().unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn input_padding_survives() {
        let frames = vec![InputFrame { pitch: 60, onset: 3, duration: 50, velocity: 4, conditioning: false, pad: false }, InputFrame::padding()];
        let seq = InputSequence::new(frames);
        let f = TokenFile::from_input(&seq, &QuantGrid::default());
        assert_eq!(f.pad, Some(vec![0, 1]));
        assert_eq!(TokenFile::from_json(&f.to_json()).unwrap().to_input().unwrap(), seq);
    }

    #[test]
    fn rejects_bad_files() {
        let f = TokenFile::from_output(&OutputSequence::new(vec![OutputFrame::space()]));
        assert!(matches!(f.to_input(), Err(TokenFileError::Kind { .. })));
        let mut g = f.clone();
        g.tokens.get_mut("voice").unwrap().push(1);
        assert!(matches!(g.to_output(), Err(TokenFileError::Length { .. })));
        let mut g = f.clone();
        g.tokens.get_mut("stem").unwrap()[0] = 7;
        assert!(matches!(g.to_output(), Err(TokenFileError::Token { frame: 0, .. })));
        let mut g = f.clone();
        g.tokens.get_mut("pitch").unwrap()[0] = -1;
        assert!(matches!(g.to_output(), Err(TokenFileError::Value { .. })));
        let mut g = f;
        g.streams.swap(0, 1);
        assert!(matches!(g.to_output(), Err(TokenFileError::Header { .. })));
    }
}
