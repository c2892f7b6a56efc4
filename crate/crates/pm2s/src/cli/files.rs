use std::fs;
use std::path::{Path, PathBuf};

use pm2s_core::{Performance, Score};

use crate::manifest::RunManifest;
use crate::midi::{parse_midi, MidiReport};
use crate::musicxml::{parse_musicxml, ParseOptions, ParseReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Midi,
    MusicXml,
}

impl InputKind {
    pub fn of(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "mid" | "midi" => Some(Self::Midi),
            "xml" | "musicxml" => Some(Self::MusicXml),
            _ => None,
        }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_performance(path: &Path) -> Result<(Performance, MidiReport)> {
    parse_midi(&read_bytes(path)?).map_err(|source| Error::Midi { path: path.into(), source })
}

pub fn read_score(path: &Path, opts: &ParseOptions) -> Result<(Score, ParseReport)> {
    parse_musicxml(&read_text(path)?, opts).map_err(|source| Error::MusicXml { path: path.into(), source })
}

/// Supported files directly inside `dir`, sorted by name.
pub fn list_inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    let mut files = Vec::new();
    for e in entries {
        let p = e.map_err(|source| Error::Io { path: dir.into(), source })?.path();
        if p.is_file() && InputKind::of(&p).is_some() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Writes the manifest to the requested path, next to `output`, or to
/// standard error.
pub fn emit_manifest(manifest: &RunManifest, requested: Option<&Path>, output: Option<&Path>) -> Result<()> {
    let path = requested.map(Path::to_path_buf).or_else(|| {
        output.map(|o| if o.is_dir() { o.join("manifest.json") } else { PathBuf::from(format!("{}.manifest.json", o.display())) })
    });
    match path {
        Some(p) => write_file(&p, manifest.to_json()),
        None => {
            eprint!("{}", manifest.to_json());
            Ok(())
        }
    }
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Internal(e.to_string()))
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
