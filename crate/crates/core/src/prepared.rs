//! The prepared-corpus file: one review per line, `stars<TAB>text`.
//!
//! Text is escaped so that a record always occupies exactly one line:
//! backslash becomes `\\`, newline `\n`, tab `\t` and carriage return `\r`.
//! Files are UTF-8 with `\n` line endings.

use std::borrow::Cow;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{atomic_write, open};
use crate::star::Star;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedRow {
    pub stars: Star,
    pub text: String,
}

impl PreparedRow {
    pub fn new(stars: Star, text: impl Into<String>) -> Self {
        Self {
            stars,
            text: text.into(),
        }
    }
}

pub fn escape_text(text: &str) -> Cow<'_, str> {
    if !text.contains(['\\', '\n', '\t', '\r']) {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    Cow::Owned(out)
}

/// Inverse of [`escape_text`]; `None` on a dangling or unknown escape.
pub fn unescape_text(escaped: &str) -> Option<String> {
    let mut out = String::with_capacity(escaped.len());
    let mut chars = escaped.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

pub fn write_row(out: &mut dyn Write, stars: Star, text: &str) -> std::io::Result<()> {
    writeln!(out, "{}\t{}", stars, escape_text(text))
}

/// Parses one line (without its terminator).
pub fn parse_line(line: &str) -> std::result::Result<PreparedRow, String> {
    let (stars, text) = line
        .split_once('\t')
        .ok_or_else(|| "missing tab separator".to_string())?;
    let stars: u8 = stars
        .parse()
        .map_err(|_| format!("bad star field {stars:?}"))?;
    let stars = Star::new(stars).ok_or_else(|| format!("star rating {stars} outside 1..=5"))?;
    let text = unescape_text(text).ok_or_else(|| "invalid escape sequence".to_string())?;
    Ok(PreparedRow { stars, text })
}

/// Raw line reader that strips only the trailing `\n` (and a `\r` before it).
pub(crate) struct LineReader<R> {
    reader: R,
    buf: String,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    pub(crate) fn new(reader: R) -> Self {
        Self {
            reader,
            buf: String::new(),
            line_no: 0,
        }
    }

    /// Next line and its 1-based number.
    pub(crate) fn next_line(&mut self) -> Option<std::io::Result<(usize, &str)>> {
        self.buf.clear();
        match self.reader.read_line(&mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                let mut line = self.buf.as_str();
                line = line.strip_suffix('\n').unwrap_or(line);
                line = line.strip_suffix('\r').unwrap_or(line);
                Some(Ok((self.line_no, line)))
            }
            Err(e) => Some(Err(e)),
        }
    }
}

/// Streaming reader over a prepared-corpus file.
pub struct CorpusReader {
    path: PathBuf,
    lines: LineReader<BufReader<std::fs::File>>,
}

impl CorpusReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            lines: LineReader::new(BufReader::with_capacity(1 << 16, file)),
        })
    }
}

impl Iterator for CorpusReader {
    type Item = Result<PreparedRow>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = &self.path;
        Some(match self.lines.next_line()? {
            Err(e) => Err(Error::io(path, e)),
            Ok((n, line)) => parse_line(line).map_err(|msg| Error::format(path, n, msg)),
        })
    }
}

pub fn read_corpus(path: &Path) -> Result<Vec<PreparedRow>> {
    CorpusReader::open(path)?.collect()
}

pub fn write_corpus<'a, I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = &'a PreparedRow>,
{
    atomic_write(path, |w| {
        for row in rows {
            write_row(w, row.stars, &row.text).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    })
}
