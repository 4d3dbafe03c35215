//! Corpus files.
//!
//! Signal file `<name>.csv`:
//!
//! ```text
//! # fs=250 patient=p001
//! time_s,F7-T3,T3-T5,...
//! 0,12.5,-3.25,...
//! ```
//!
//! Annotation file `<name>.ann.csv` with header `channel,start_s,stop_s,label`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{AnnotatedRecording, Annotation, MAX_LABEL};
use crate::signal::Recording;
use crate::{Error, Result};

pub const ANNOTATION_SUFFIX: &str = ".ann.csv";

/// Loads every `<name>.csv` / `<name>.ann.csv` pair in `dir`, sorted by name.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<AnnotatedRecording>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut signals = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.ends_with(".csv") && !name.ends_with(ANNOTATION_SUFFIX) && path.is_file() {
            signals.push(path);
        }
    }
    signals.sort();
    signals.par_iter().map(|p| load_recording(p)).collect()
}

/// Loads one signal file and its sidecar annotation file.
pub fn load_recording(signal_path: &Path) -> Result<AnnotatedRecording> {
    let name = signal_path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".csv"))
        .ok_or_else(|| Error::format(signal_path, 0, "signal file name must end in .csv"))?
        .to_string();
    let recording = read_signal(signal_path)?;
    let ann_path = signal_path.with_file_name(format!("{name}{ANNOTATION_SUFFIX}"));
    let annotations = read_annotations(&ann_path, recording.n_channels())?;
    Ok(AnnotatedRecording {
        name,
        recording,
        annotations,
    })
}

fn parse_meta(path: &Path, line: &str) -> Result<(u32, String)> {
    let bad = |msg: &str| Error::format(path, 1, msg.to_string());
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| bad("expected `# fs=<int> patient=<id>` metadata line"))?;
    let mut fs = None;
    let mut patient = None;
    for token in body.split_whitespace() {
        if let Some(v) = token.strip_prefix("fs=") {
            fs = Some(v.parse::<u32>().map_err(|_| bad("fs must be a positive integer"))?);
        } else if let Some(v) = token.strip_prefix("patient=") {
            patient = Some(v.to_string());
        }
    }
    match (fs, patient) {
        (Some(fs), Some(p)) if fs > 0 && !p.is_empty() => Ok((fs, p)),
        (Some(0), _) => Err(bad("fs must be a positive integer")),
        _ => Err(bad("metadata line needs both fs= and patient=")),
    }
}

fn read_signal(path: &Path) -> Result<Recording> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (meta, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let (fs, patient) = parse_meta(path, meta.trim_end_matches('\r'))?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(path, 2, e.to_string()))?
        .clone();
    if header.get(0) != Some("time_s") || header.len() < 2 {
        return Err(Error::format(path, 2, "header must be `time_s,<channel>,...`"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut channels = vec![Vec::new(); names.len()];
    for record in reader.records() {
        // +1 for the metadata line the csv reader never saw
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() + 1);
            Error::format(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() + 1);
        if record.len() != names.len() + 1 {
            return Err(Error::format(
                path,
                line,
                format!("expected {} columns, found {}", names.len() + 1, record.len()),
            ));
        }
        for (ch, field) in channels.iter_mut().zip(record.iter().skip(1)) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(path, line, format!("bad sample value `{field}`")))?;
            ch.push(v);
        }
    }
    Recording::new(channels, fs, names, patient).map_err(|e| Error::format(path, 0, e.to_string()))
}

fn read_annotations(path: &Path, n_channels: usize) -> Result<Vec<Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(path, 1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["channel", "start_s", "stop_s", "label"] {
        return Err(Error::format(path, 1, "header must be `channel,start_s,stop_s,label`"));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default();
        let bad = |what: &str| Error::format(path, line, format!("bad {what} `{}`", record.as_slice()));
        let channel: usize = field(0).parse().map_err(|_| bad("channel"))?;
        let start_s: f64 = field(1).parse().map_err(|_| bad("start_s"))?;
        let stop_s: f64 = field(2).parse().map_err(|_| bad("stop_s"))?;
        let label: u8 = field(3).parse().map_err(|_| bad("label"))?;
        if label > MAX_LABEL {
            return Err(Error::format(path, line, format!("unknown label id {label}")));
        }
        let a = Annotation {
            channel,
            start_s,
            stop_s,
            label,
        };
        a.validate(n_channels)
            .map_err(|e| Error::format(path, line, e.to_string()))?;
        out.push(a);
    }
    Ok(out)
}

/// Writes each recording as `<name>.csv` plus `<name>.ann.csv` under `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &[AnnotatedRecording]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    corpus
        .par_iter()
        .map(|rec| {
            let signal_path = dir.join(format!("{}.csv", rec.name));
            write_file(&signal_path, &signal_text(rec))?;
            let ann_path = dir.join(format!("{}{ANNOTATION_SUFFIX}", rec.name));
            write_file(&ann_path, &annotation_text(&rec.annotations))?;
            Ok(signal_path)
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

fn signal_text(rec: &AnnotatedRecording) -> String {
    use std::fmt::Write as _;
    let r = &rec.recording;
    let mut s = String::with_capacity(r.len() * r.n_channels() * 12);
    let _ = writeln!(s, "# fs={} patient={}", r.fs(), r.patient_id());
    s.push_str("time_s");
    for name in r.channel_names() {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for i in 0..r.len() {
        let _ = write!(s, "{}", i as f64 / r.fs() as f64);
        for ch in r.channels() {
            let _ = write!(s, ",{}", ch[i]);
        }
        s.push('\n');
    }
    s
}

fn annotation_text(annotations: &[Annotation]) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("channel,start_s,stop_s,label\n");
    for a in annotations {
        let _ = writeln!(s, "{},{},{},{}", a.channel, a.start_s, a.stop_s, a.label);
    }
    s
}
