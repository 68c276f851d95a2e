//! Update-stream text format.
//!
//! ```text
//! % 3 4
//! # comment
//! 0 0 1.5
//! 2 3 -0.25
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::TurnstileUpdate;
use crate::error::{Error, Result};

/// Line-by-line reader over the stream format. Yields updates in file order.
pub struct StreamReader<R> {
    input: R,
    path: PathBuf,
    line_no: usize,
    dims: Option<(usize, usize)>,
    header_seen: bool,
    count: u64,
    buf: String,
}

impl StreamReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(StreamReader::new(BufReader::new(File::open(path)?), path))
    }
}

impl<R: BufRead> StreamReader<R> {
    /// Reader that requires a `% m n` header before the first update.
    pub fn new(input: R, path: impl Into<PathBuf>) -> Self {
        StreamReader {
            input,
            path: path.into(),
            line_no: 0,
            dims: None,
            header_seen: false,
            count: 0,
            buf: String::new(),
        }
    }

    /// Reader with known dimensions; a header, if present, must agree.
    pub fn with_dims(input: R, path: impl Into<PathBuf>, m: usize, n: usize) -> Self {
        let mut r = StreamReader::new(input, path);
        r.dims = Some((m, n));
        r
    }

    /// Dimensions, once known.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    /// Updates yielded so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Reads ahead to the header (if any), so [`dims`](Self::dims) is set.
    pub fn read_header(&mut self) -> Result<(usize, usize)> {
        if let Some(d) = self.dims {
            return Ok(d);
        }
        match self.next_line()? {
            Some(Line::Header(m, n)) => self.accept_header(m, n),
            Some(Line::Update(_)) => {
                return Err(self.err("update before `% m n` header"));
            }
            None => {}
        }
        self.dims.ok_or_else(|| self.err("missing `% m n` header"))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line_no,
            msg: msg.into(),
        }
    }

    fn accept_header(&mut self, m: usize, n: usize) {
        self.header_seen = true;
        self.dims = Some(self.dims.unwrap_or((m, n)));
    }

    fn next_line(&mut self) -> Result<Option<Line>> {
        loop {
            self.buf.clear();
            if self.input.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('%') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let parsed = match fields.as_slice() {
                    [m, n] => m.parse::<usize>().ok().zip(n.parse::<usize>().ok()),
                    _ => None,
                };
                let (m, n) = parsed.ok_or_else(|| self.err(format!("malformed header `{line}`")))?;
                return Ok(Some(Line::Header(m, n)));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, j, delta] = fields.as_slice() else {
                return Err(self.err(format!("expected `i j delta`, found `{line}`")));
            };
            let i = i
                .parse::<usize>()
                .map_err(|_| self.err(format!("bad row index `{i}`")))?;
            let j = j
                .parse::<usize>()
                .map_err(|_| self.err(format!("bad column index `{j}`")))?;
            let delta = delta
                .parse::<f64>()
                .ok()
                .filter(|d| d.is_finite())
                .ok_or_else(|| self.err(format!("bad value `{delta}`")))?;
            return Ok(Some(Line::Update(TurnstileUpdate::new(i, j, delta))));
        }
    }

    fn next_update(&mut self) -> Result<Option<TurnstileUpdate>> {
        loop {
            match self.next_line()? {
                None => return Ok(None),
                Some(Line::Header(m, n)) => {
                    if self.header_seen {
                        return Err(self.err("duplicate header"));
                    }
                    if let Some(d) = self.dims {
                        if d != (m, n) {
                            return Err(self.err(format!("header {m}x{n} disagrees with expected {}x{}", d.0, d.1)));
                        }
                    }
                    self.accept_header(m, n);
                }
                Some(Line::Update(u)) => {
                    let Some((m, n)) = self.dims else {
                        return Err(self.err("update before `% m n` header"));
                    };
                    if u.i >= m || u.j >= n {
                        return Err(self.err(format!("index ({}, {}) outside {m}x{n}", u.i, u.j)));
                    }
                    self.count += 1;
                    return Ok(Some(u));
                }
            }
        }
    }
}

enum Line {
    Header(usize, usize),
    Update(TurnstileUpdate),
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<TurnstileUpdate>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_update().transpose()
    }
}

/// Dimensions and all updates of a stream held in memory.
pub fn parse_stream(text: &str, path: impl Into<PathBuf>) -> Result<((usize, usize), Vec<TurnstileUpdate>)> {
    collect(StreamReader::new(text.as_bytes(), path))
}

/// Reads a whole stream file.
pub fn read_stream(path: impl AsRef<Path>) -> Result<((usize, usize), Vec<TurnstileUpdate>)> {
    collect(StreamReader::open(path)?)
}

fn collect<R: BufRead>(mut reader: StreamReader<R>) -> Result<((usize, usize), Vec<TurnstileUpdate>)> {
    let dims = reader.read_header()?;
    let updates = reader.by_ref().collect::<Result<Vec<_>>>()?;
    log::debug!("read {} updates", reader.count());
    Ok((dims, updates))
}

/// Writes `updates` in the stream format with a `% m n` header.
pub fn write_stream<'a, I>(path: impl AsRef<Path>, m: usize, n: usize, updates: I) -> Result<()>
where
    I: IntoIterator<Item = &'a TurnstileUpdate>,
{
    let mut w = BufWriter::new(File::create(path)?);
    write_updates(&mut w, m, n, updates)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn write_updates<'a, W: Write, I>(w: &mut W, m: usize, n: usize, updates: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = &'a TurnstileUpdate>,
{
    writeln!(w, "% {m} {n}")?;
    for u in updates {
        writeln!(w, "{} {} {:?}", u.i, u.j, u.delta)?;
    }
    Ok(())
}
