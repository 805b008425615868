//! Plain-text trace format.
//!
//! ```text
//! # emcal-trace v1
//! # kind=transmission_power
//! # p_app_w=1e-3
//! freq_hz,value
//! 5.87185e9,9.99e-1
//! ```
//!
//! Metadata lines are `# key=value`, sorted by key. Floats are written in
//! shortest round-trip form so reading a file back gives bit-identical values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Result, SynthError, Trace, TraceKind};

pub const TRACE_HEADER: &str = "# emcal-trace v1";
const COLUMNS: &str = "freq_hz,value";

pub fn write_trace<W: Write>(mut w: W, trace: &Trace) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    writeln!(w, "# kind={}", trace.kind())?;
    for (k, v) in trace.meta() {
        if k != "kind" {
            writeln!(w, "# {k}={v}")?;
        }
    }
    writeln!(w, "{COLUMNS}")?;
    for (f, v) in trace.freq_hz().iter().zip(trace.values()) {
        writeln!(w, "{f:e},{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Trace> {
    let mut lines = r.lines().enumerate();
    let parse_err = |line: usize, message: String| SynthError::Parse {
        line: line + 1,
        message,
    };

    match lines.next() {
        Some((_, Ok(l))) if l.trim_end() == TRACE_HEADER => {}
        Some((i, Ok(l))) => return Err(parse_err(i, format!("expected {TRACE_HEADER:?}, found {l:?}"))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(parse_err(0, "empty input".into())),
    }

    let mut kind = None;
    let mut meta = Vec::new();
    let mut freq = Vec::new();
    let mut values = Vec::new();
    let mut in_body = false;

    for (i, line) in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if !in_body {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| parse_err(i, format!("metadata line without '=': {line:?}")))?;
                if k == "kind" {
                    kind = Some(v.parse::<TraceKind>()?);
                } else {
                    meta.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if line != COLUMNS {
                return Err(parse_err(i, format!("expected column header {COLUMNS:?}, found {line:?}")));
            }
            in_body = true;
            continue;
        }
        let (f, v) = line
            .split_once(',')
            .ok_or_else(|| parse_err(i, format!("expected two columns: {line:?}")))?;
        freq.push(f.trim().parse::<f64>().map_err(|e| parse_err(i, format!("frequency: {e}")))?);
        values.push(v.trim().parse::<f64>().map_err(|e| parse_err(i, format!("value: {e}")))?);
    }

    if !in_body {
        return Err(parse_err(0, "missing column header".into()));
    }
    let kind = kind.ok_or_else(|| parse_err(0, "missing kind metadata".into()))?;
    let mut trace = Trace::new(kind, freq, values)?;
    for (k, v) in meta {
        trace.set_meta(k, v);
    }
    Ok(trace)
}

pub fn save_trace(path: impl AsRef<Path>, trace: &Trace) -> Result<()> {
    write_trace(BufWriter::new(File::create(path)?), trace)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace> {
    read_trace(BufReader::new(File::open(path)?))
}
