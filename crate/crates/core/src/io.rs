//! Score dumps (JSON lines or a length-prefixed binary stream) and the triples CSV.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! "GAPCOUNTDUMPv001"                      16-byte magic
//! repeated:
//!   u64 header_len, header_len bytes      JSON record metadata (no scores)
//!   u64 payload_len, payload_len bytes    n IEEE-754 values of the header's dtype
//! ```

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Cursor, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{ContactPoint, ContactTriple, Scale};
use crate::row::{RowMeta, ScoreRow};

pub const SCHEMA_VERSION: u32 = 1;
pub const BINARY_MAGIC: &[u8; 16] = b"GAPCOUNTDUMPv001";
/// Refuse headers larger than this; a corrupt length prefix should not allocate gigabytes.
const MAX_HEADER_LEN: u64 = 1 << 20;

pub const TRIPLES_HEADER: [&str; 12] =
    ["cell_id", "layer", "head", "seq_id", "n", "query_pos", "lambda", "delta", "alpha", "C", "is_tie", "n_max"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DumpFormat {
    #[default]
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordHeader {
    schema_version: u32,
    #[serde(flatten)]
    meta: RowMeta,
    dtype: Dtype,
}

/// One dump record as it appears in the text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDumpRecord {
    pub schema_version: u32,
    #[serde(flatten)]
    pub meta: RowMeta,
    pub dtype: Dtype,
    pub scores: Vec<f64>,
}

impl RowDumpRecord {
    pub fn into_row(self) -> Result<ScoreRow> {
        let scores = match self.dtype {
            Dtype::F64 => self.scores,
            Dtype::F32 => self.scores.into_iter().map(|z| z as f32 as f64).collect(),
        };
        ScoreRow::new(scores, self.meta)
    }
}

fn check_header(schema_version: u32, meta: &RowMeta, location: impl Fn() -> String) -> Result<()> {
    if schema_version != SCHEMA_VERSION {
        return Err(Error::parse(location(), format!("unsupported schema_version {schema_version}")));
    }
    if meta.n == 0 {
        return Err(Error::parse(location(), "n must be positive"));
    }
    Ok(())
}

enum Source<R> {
    Text { reader: R, line: usize, buf: String },
    Binary { reader: R, offset: u64 },
}

/// Streaming reader over a text or binary dump. The format is detected from the
/// leading bytes.
///
/// In lenient mode malformed records are skipped and described by [`skipped`];
/// a truncated binary tail ends the stream. Otherwise the first error is yielded
/// and the stream stops.
///
/// [`skipped`]: DumpReader::skipped
pub struct DumpReader<R> {
    source: Source<R>,
    lenient: bool,
    dtype: Option<Dtype>,
    skipped: Vec<String>,
    done: bool,
}

impl DumpReader<Box<dyn BufRead>> {
    /// Opens `path`, or standard input when `path` is `-`.
    pub fn open(path: impl AsRef<Path>, lenient: bool) -> Result<Self> {
        let path = path.as_ref();
        let inner: Box<dyn Read> =
            if path == Path::new("-") { Box::new(io::stdin().lock()) } else { Box::new(File::open(path)?) };
        Self::new(inner, lenient)
    }

    pub fn new(mut inner: Box<dyn Read>, lenient: bool) -> Result<Self> {
        let mut prefix = Vec::with_capacity(BINARY_MAGIC.len());
        (&mut inner).take(BINARY_MAGIC.len() as u64).read_to_end(&mut prefix)?;
        let source = if prefix.as_slice() == BINARY_MAGIC {
            Source::Binary { reader: Box::new(BufReader::new(inner)) as Box<dyn BufRead>, offset: prefix.len() as u64 }
        } else {
            let reader: Box<dyn BufRead> = Box::new(BufReader::new(Cursor::new(prefix).chain(inner)));
            Source::Text { reader, line: 0, buf: String::new() }
        };
        Ok(Self { source, lenient, dtype: None, skipped: Vec::new(), done: false })
    }
}

/// Opens a dump for streaming; see [`DumpReader`].
pub fn read_dump(path: impl AsRef<Path>, lenient: bool) -> Result<DumpReader<Box<dyn BufRead>>> {
    DumpReader::open(path, lenient)
}

/// Reads `buf.len()` bytes; `Ok(false)` on clean EOF before the first byte.
fn read_exact_or_eof(reader: &mut impl Read, buf: &mut [u8]) -> io::Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

enum Step {
    Row(ScoreRow),
    /// A recoverable problem with one record.
    Bad(Error),
    /// An error after which the stream cannot continue.
    Fatal(Error),
    Eof,
}

impl<R: BufRead> DumpReader<R> {
    /// Descriptions of records skipped in lenient mode.
    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn format(&self) -> DumpFormat {
        match self.source {
            Source::Text { .. } => DumpFormat::Text,
            Source::Binary { .. } => DumpFormat::Binary,
        }
    }

    fn check_dtype(&mut self, dtype: Dtype, location: &str) -> Result<()> {
        match self.dtype {
            None => {
                self.dtype = Some(dtype);
                Ok(())
            }
            Some(d) if d == dtype => Ok(()),
            Some(d) => Err(Error::parse(location, format!("dtype {dtype:?} differs from the file's {d:?}"))),
        }
    }

    fn next_text(&mut self) -> Step {
        let Source::Text { reader, line, buf } = &mut self.source else { unreachable!() };
        loop {
            buf.clear();
            match reader.read_line(buf) {
                Ok(0) => return Step::Eof,
                Ok(_) => {}
                Err(e) => return Step::Fatal(e.into()),
            }
            *line += 1;
            if !buf.trim().is_empty() {
                break;
            }
        }
        let location = format!("line {line}");
        let record: RowDumpRecord = match serde_json::from_str(buf.trim_end()) {
            Ok(r) => r,
            Err(e) => return Step::Bad(Error::parse(location, e.to_string())),
        };
        if let Err(e) = check_header(record.schema_version, &record.meta, || location.clone()) {
            return Step::Bad(e);
        }
        if record.scores.len() != record.meta.n {
            let msg = format!("n = {} but {} scores", record.meta.n, record.scores.len());
            return Step::Bad(Error::parse(location, msg));
        }
        if let Err(e) = self.check_dtype(record.dtype, &location) {
            return Step::Bad(e);
        }
        match record.into_row() {
            Ok(row) => Step::Row(row),
            Err(e) => Step::Bad(Error::parse(location, e.to_string())),
        }
    }

    fn next_binary(&mut self) -> Step {
        let Source::Binary { reader, offset } = &mut self.source else { unreachable!() };
        let record_start = *offset;
        let truncated = |at: u64, what: &str| Error::parse(format!("byte offset {at}"), format!("truncated {what}"));

        let mut len = [0u8; 8];
        match read_exact_or_eof(reader, &mut len) {
            Ok(false) => return Step::Eof,
            Ok(true) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Step::Fatal(truncated(record_start, "header length")),
            Err(e) => return Step::Fatal(e.into()),
        }
        let header_len = u64::from_le_bytes(len);
        if header_len > MAX_HEADER_LEN {
            return Step::Fatal(Error::parse(format!("byte offset {record_start}"), format!("header length {header_len} is implausible")));
        }
        let mut header = vec![0u8; header_len as usize];
        if reader.read_exact(&mut header).is_err() {
            return Step::Fatal(truncated(record_start + 8, "record header"));
        }
        let payload_at = record_start + 8 + header_len;
        if reader.read_exact(&mut len).is_err() {
            return Step::Fatal(truncated(payload_at, "payload length"));
        }
        let payload_len = u64::from_le_bytes(len);
        let mut payload = Vec::new();
        match reader.by_ref().take(payload_len).read_to_end(&mut payload) {
            Ok(k) if k as u64 == payload_len => {}
            Ok(_) => return Step::Fatal(truncated(payload_at + 8, "payload")),
            Err(e) => return Step::Fatal(e.into()),
        }
        *offset = payload_at + 8 + payload_len;

        let location = format!("byte offset {record_start}");
        let header: RecordHeader = match serde_json::from_slice(&header) {
            Ok(h) => h,
            Err(e) => return Step::Bad(Error::parse(location, e.to_string())),
        };
        if let Err(e) = check_header(header.schema_version, &header.meta, || location.clone()) {
            return Step::Bad(e);
        }
        let width = header.dtype.width() as u64;
        if payload_len != header.meta.n as u64 * width {
            let msg = format!("n = {} needs {} payload bytes, record has {payload_len}", header.meta.n, header.meta.n as u64 * width);
            return Step::Bad(Error::parse(location, msg));
        }
        if let Err(e) = self.check_dtype(header.dtype, &location) {
            return Step::Bad(e);
        }
        let scores: Vec<f64> = match header.dtype {
            Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
            Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect(),
        };
        match ScoreRow::new(scores, header.meta) {
            Ok(row) => Step::Row(row),
            Err(e) => Step::Bad(Error::parse(location, e.to_string())),
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<ScoreRow>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let step = match self.source {
                Source::Text { .. } => self.next_text(),
                Source::Binary { .. } => self.next_binary(),
            };
            match step {
                Step::Row(row) => return Some(Ok(row)),
                Step::Eof => self.done = true,
                Step::Bad(e) if self.lenient => self.skipped.push(e.to_string()),
                Step::Fatal(e) if self.lenient => {
                    self.skipped.push(e.to_string());
                    self.done = true;
                }
                Step::Bad(e) | Step::Fatal(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
        None
    }
}

/// Streaming dump writer. Call [`DumpWriter::finish`] to flush.
pub struct DumpWriter<W: Write> {
    out: W,
    format: DumpFormat,
    dtype: Dtype,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(mut out: W, format: DumpFormat, dtype: Dtype) -> Result<Self> {
        if format == DumpFormat::Binary {
            out.write_all(BINARY_MAGIC)?;
        }
        Ok(Self { out, format, dtype })
    }

    pub fn write_row(&mut self, row: &ScoreRow) -> Result<()> {
        match self.format {
            DumpFormat::Text => {
                let record = RowDumpRecord {
                    schema_version: SCHEMA_VERSION,
                    meta: row.meta().clone(),
                    dtype: self.dtype,
                    scores: Vec::new(),
                };
                // scores are written by hand so f32 rows print their shortest f32 form
                let mut json = serde_json::to_string(&record)?;
                json.truncate(json.len() - "[]}".len());
                json.push('[');
                for (j, &z) in row.scores().iter().enumerate() {
                    if j > 0 {
                        json.push(',');
                    }
                    let value = match self.dtype {
                        Dtype::F64 => serde_json::to_string(&z)?,
                        Dtype::F32 => serde_json::to_string(&(z as f32))?,
                    };
                    json.push_str(&value);
                }
                json.push_str("]}\n");
                self.out.write_all(json.as_bytes())?;
            }
            DumpFormat::Binary => {
                let header = RecordHeader { schema_version: SCHEMA_VERSION, meta: row.meta().clone(), dtype: self.dtype };
                let header = serde_json::to_vec(&header)?;
                self.out.write_all(&(header.len() as u64).to_le_bytes())?;
                self.out.write_all(&header)?;
                let payload_len = (row.len() * self.dtype.width()) as u64;
                self.out.write_all(&payload_len.to_le_bytes())?;
                for &z in row.scores() {
                    match self.dtype {
                        Dtype::F64 => self.out.write_all(&z.to_le_bytes())?,
                        Dtype::F32 => self.out.write_all(&(z as f32).to_le_bytes())?,
                    }
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Opens `path` for writing, or standard output when `path` is `-`.
pub fn create_output(path: impl AsRef<Path>) -> Result<Box<dyn Write>> {
    let path = path.as_ref();
    Ok(if path == Path::new("-") {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    })
}

pub fn write_dump<'a>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = &'a ScoreRow>,
    format: DumpFormat,
    dtype: Dtype,
) -> Result<()> {
    let mut writer = DumpWriter::new(create_output(path)?, format, dtype)?;
    for row in rows {
        writer.write_row(row)?;
    }
    writer.finish()?;
    Ok(())
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streaming triples table writer. Infinite `Λ` is written as `inf`, undefined
/// fields are empty.
pub struct TriplesWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TriplesWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(TRIPLES_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, meta: &RowMeta, t: &ContactTriple) -> Result<()> {
        let lambda = match t.lambda {
            Scale::Finite(l) => fmt_float(l),
            Scale::Infinite => "inf".into(),
            Scale::Degenerate => String::new(),
        };
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        self.inner.write_record([
            meta.cell_id.clone(),
            meta.layer.to_string(),
            meta.head.to_string(),
            meta.seq_id.clone(),
            meta.n.to_string(),
            meta.query_pos.to_string(),
            lambda,
            opt(t.delta()),
            opt(t.alpha()),
            opt(t.contact_entropy()),
            t.is_tie().to_string(),
            t.n_max.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(self) -> Result<W> {
        let mut out = self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.flush()?;
        Ok(out)
    }
}

pub fn write_triples<'a, W: Write>(out: W, triples: impl IntoIterator<Item = &'a (RowMeta, ContactTriple)>) -> Result<W> {
    let mut w = TriplesWriter::new(out)?;
    for (meta, t) in triples {
        w.write(meta, t)?;
    }
    w.finish()
}

pub fn write_triples_path<'a>(path: impl AsRef<Path>, triples: impl IntoIterator<Item = &'a (RowMeta, ContactTriple)>) -> Result<()> {
    write_triples(create_output(path)?, triples)?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).unwrap_or_default();
    raw.parse()
        .map_err(|e| Error::parse(format!("line {line}, column {}", TRIPLES_HEADER[idx]), format!("{raw:?}: {e}")))
}

fn parse_opt_float(record: &csv::StringRecord, idx: usize, line: u64) -> Result<Option<f64>> {
    match record.get(idx).unwrap_or_default() {
        "" => Ok(None),
        _ => parse_field(record, idx, line).map(Some),
    }
}

/// Reads a triples table written by [`write_triples`].
pub fn read_triples<R: Read>(input: R) -> Result<Vec<(RowMeta, ContactTriple)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRIPLES_HEADER) {
        return Err(Error::parse("line 1", format!("expected header {}", TRIPLES_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let meta = RowMeta {
            cell_id: record[0].to_string(),
            layer: parse_field(&record, 1, line)?,
            head: parse_field(&record, 2, line)?,
            seq_id: record[3].to_string(),
            n: parse_field(&record, 4, line)?,
            query_pos: parse_field(&record, 5, line)?,
        };
        let lambda = match &record[6] {
            "" => Scale::Degenerate,
            "inf" => Scale::Infinite,
            _ => Scale::Finite(parse_field(&record, 6, line)?),
        };
        let delta = parse_opt_float(&record, 7, line)?;
        let alpha = parse_opt_float(&record, 8, line)?;
        let contact = match (lambda, delta, alpha) {
            (Scale::Finite(_), Some(delta), Some(alpha)) => {
                // α = log N(Δ) / log n, so the count is recovered exactly by rounding
                let count = if meta.n > 1 { (meta.n as f64).powf(alpha).round() as usize } else { 1 };
                Some(ContactPoint { delta, alpha, count })
            }
            (Scale::Finite(_), _, _) => {
                return Err(Error::parse(format!("line {line}"), "finite lambda without delta and alpha"));
            }
            _ => None,
        };
        let n_max = parse_field(&record, 11, line)?;
        out.push((meta.clone(), ContactTriple { lambda, contact, n_max, n: meta.n }));
    }
    Ok(out)
}

pub fn read_triples_path(path: impl AsRef<Path>) -> Result<Vec<(RowMeta, ContactTriple)>> {
    let path = path.as_ref();
    if path == Path::new("-") {
        read_triples(io::stdin().lock())
    } else {
        read_triples(File::open(path)?)
    }
}
