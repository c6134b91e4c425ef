use std::borrow::Borrow;
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Document, LanguagePair};
use crate::{Error, Result};

/// Only the first warnings are kept verbatim; the rest are only counted.
pub const MAX_KEPT_WARNINGS: usize = 100;

/// A corpus record that wraps a [`Document`].
pub trait JsonlRecord: DeserializeOwned {
    fn document(&self) -> &Document;
}

impl JsonlRecord for Document {
    fn document(&self) -> &Document {
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    /// When set, every document's language must belong to the pair.
    pub pair: Option<LanguagePair>,
}

impl ReadOptions {
    pub fn lenient(pair: Option<LanguagePair>) -> Self {
        ReadOptions { strict: false, pair }
    }

    pub fn strict(pair: Option<LanguagePair>) -> Self {
        ReadOptions { strict: true, pair }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadWarning {
    pub line: usize,
    pub message: String,
}

/// Streaming JSONL reader.
///
/// In lenient mode malformed records are skipped and counted; in strict mode
/// the first one is yielded as an error and iteration ends.
pub struct CorpusReader<R, T = Document> {
    input: R,
    buf: String,
    line_no: usize,
    offset: u64,
    last_offset: u64,
    opts: ReadOptions,
    seen: HashSet<String>,
    warnings: Vec<ReadWarning>,
    warning_count: usize,
    done: bool,
    _record: PhantomData<T>,
}

impl<T: JsonlRecord> CorpusReader<BufReader<File>, T> {
    pub fn open(path: impl AsRef<Path>, opts: ReadOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::with_capacity(1 << 20, file), opts))
    }
}

impl<R: BufRead, T: JsonlRecord> CorpusReader<R, T> {
    pub fn new(input: R, opts: ReadOptions) -> Self {
        CorpusReader {
            input,
            buf: String::new(),
            line_no: 0,
            offset: 0,
            last_offset: 0,
            opts,
            seen: HashSet::new(),
            warnings: Vec::new(),
            warning_count: 0,
            done: false,
            _record: PhantomData,
        }
    }

    /// Number of skipped records so far.
    pub fn warning_count(&self) -> usize {
        self.warning_count
    }

    pub fn warnings(&self) -> &[ReadWarning] {
        &self.warnings
    }

    /// Byte offset and 1-based line number of the most recently yielded record.
    pub fn position(&self) -> (u64, usize) {
        (self.last_offset, self.line_no)
    }

    fn warn(&mut self, line: usize, message: String) {
        log::warn!("line {line}: {message}");
        self.warning_count += 1;
        if self.warnings.len() < MAX_KEPT_WARNINGS {
            self.warnings.push(ReadWarning { line, message });
        }
    }

    fn parse_line(&mut self, line: &str) -> std::result::Result<T, Error> {
        let line_no = self.line_no;
        let record: T = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let doc = record.document();
        doc.validate().map_err(|message| Error::Malformed {
            line: line_no,
            message,
        })?;
        if let Some(pair) = &self.opts.pair {
            if !pair.contains(&doc.lang) {
                return Err(Error::LanguageNotInPair {
                    line: line_no,
                    lang: doc.lang.clone(),
                    pair: pair.to_string(),
                });
            }
        }
        if !self.seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                line: line_no,
                id: doc.id.clone(),
            });
        }
        Ok(record)
    }
}

impl<R: BufRead, T: JsonlRecord> Iterator for CorpusReader<R, T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            let start = self.offset;
            let n = match self.input.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(n) => n,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            };
            self.offset += n as u64;
            self.line_no += 1;
            let line = std::mem::take(&mut self.buf);
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.trim().is_empty() {
                self.buf = line;
                continue;
            }
            let parsed = self.parse_line(trimmed);
            self.buf = line;
            match parsed {
                Ok(record) => {
                    self.last_offset = start;
                    return Some(Ok(record));
                }
                Err(e) if self.opts.strict => {
                    self.done = true;
                    return Some(Err(e));
                }
                Err(e) => {
                    let line = self.line_no;
                    let message = match e {
                        Error::Malformed { message, .. } => message,
                        other => other.to_string(),
                    };
                    self.warn(line, message);
                }
            }
        }
        None
    }
}

/// Opens a corpus file as a document stream.
pub fn read_corpus(
    path: impl AsRef<Path>,
    opts: ReadOptions,
) -> Result<CorpusReader<BufReader<File>, Document>> {
    CorpusReader::open(path, opts)
}

/// Writes any serializable records as JSONL, one per line.
pub fn write_jsonl<T, I, W>(records: I, out: W) -> Result<usize>
where
    T: Serialize,
    I: IntoIterator<Item = T>,
    W: Write,
{
    let mut out = BufWriter::new(out);
    let mut count = 0;
    for record in records {
        serde_json::to_writer(&mut out, &record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        count += 1;
    }
    out.flush()?;
    Ok(count)
}

/// Writes documents with the fixed key order `id, lang, text, meta`.
pub fn write_corpus<I>(docs: I, path: impl AsRef<Path>) -> Result<usize>
where
    I: IntoIterator,
    I::Item: Borrow<Document>,
{
    let path = path.as_ref();
    let io_err = |e| Error::io(path, e);
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let mut count = 0;
    for doc in docs {
        serde_json::to_writer(&mut out, doc.borrow()).map_err(|e| io_err(e.into()))?;
        out.write_all(b"\n").map_err(io_err)?;
        count += 1;
    }
    out.flush().map_err(io_err)?;
    Ok(count)
}

/// Random access to documents by position.
pub trait DocumentSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn id(&self, idx: usize) -> &str;

    fn lang(&self, idx: usize) -> &str;

    fn load(&self, idx: usize) -> Result<Document>;
}

impl DocumentSource for [Document] {
    fn len(&self) -> usize {
        <[Document]>::len(self)
    }

    fn id(&self, idx: usize) -> &str {
        &self[idx].id
    }

    fn lang(&self, idx: usize) -> &str {
        &self[idx].lang
    }

    fn load(&self, idx: usize) -> Result<Document> {
        Ok(self[idx].clone())
    }
}

impl DocumentSource for Vec<Document> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn id(&self, idx: usize) -> &str {
        &self[idx].id
    }

    fn lang(&self, idx: usize) -> &str {
        &self[idx].lang
    }

    fn load(&self, idx: usize) -> Result<Document> {
        Ok(self[idx].clone())
    }
}

#[derive(Debug, Clone)]
struct IndexEntry {
    offset: u64,
    len: u32,
    id: String,
    lang: String,
}

/// A JSONL corpus indexed by line offsets; only ids and languages stay in
/// memory, texts are re-read on demand.
#[derive(Debug)]
pub struct IndexedCorpus {
    path: PathBuf,
    entries: Vec<IndexEntry>,
    file: File,
    warnings: Vec<ReadWarning>,
    warning_count: usize,
}

impl IndexedCorpus {
    pub fn open(path: impl AsRef<Path>, opts: ReadOptions) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut reader: CorpusReader<_, Document> = CorpusReader::open(&path, opts)?;
        let mut entries = Vec::new();
        while let Some(doc) = reader.next() {
            let doc = doc?;
            let (offset, _) = reader.position();
            let len = (reader.offset - offset) as u32;
            entries.push(IndexEntry {
                offset,
                len,
                id: doc.id,
                lang: doc.lang,
            });
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(IndexedCorpus {
            warnings: reader.warnings.clone(),
            warning_count: reader.warning_count,
            path,
            entries,
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn warnings(&self) -> &[ReadWarning] {
        &self.warnings
    }

    pub fn warning_count(&self) -> usize {
        self.warning_count
    }

    /// The document's input line as stored, without its line terminator.
    pub fn raw_line(&self, idx: usize) -> Result<Vec<u8>> {
        let entry = &self.entries[idx];
        let mut buf = vec![0u8; entry.len as usize];
        self.read_at(entry.offset, &mut buf)
            .map_err(|e| Error::io(&self.path, e))?;
        while buf.last().is_some_and(|&b| b == b'\n' || b == b'\r') {
            buf.pop();
        }
        Ok(buf)
    }

    fn read_at(&self, offset: u64, buf: &mut [u8]) -> std::io::Result<()> {
        #[cfg(unix)]
        {
            use std::os::unix::fs::FileExt;
            self.file.read_exact_at(buf, offset)
        }
        #[cfg(not(unix))]
        {
            use std::io::{Read, Seek, SeekFrom};
            let mut f = File::open(&self.path)?;
            f.seek(SeekFrom::Start(offset))?;
            f.read_exact(buf)
        }
    }
}

impl DocumentSource for IndexedCorpus {
    fn len(&self) -> usize {
        self.entries.len()
    }

    fn id(&self, idx: usize) -> &str {
        &self.entries[idx].id
    }

    fn lang(&self, idx: usize) -> &str {
        &self.entries[idx].lang
    }

    fn load(&self, idx: usize) -> Result<Document> {
        let buf = self.raw_line(idx)?;
        serde_json::from_slice(&buf).map_err(|e| Error::Document {
            doc_id: self.entries[idx].id.clone(),
            message: format!("re-read failed: {e}"),
        })
    }
}
