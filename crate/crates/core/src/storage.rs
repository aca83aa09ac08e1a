//! Key-value and append-only stream storage.
//!
//! [`FileStore`] keeps everything in one JSON-lines log: each line is a
//! `put` or `append` operation and the in-memory state is rebuilt by
//! replaying the log on open.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub trait Store: Send + Sync {
    fn get(&self, key: &str) -> Result<Option<Value>>;
    fn put(&self, key: &str, value: Value) -> Result<()>;
    fn append(&self, stream: &str, entry: Value) -> Result<()>;
    fn read_stream(&self, stream: &str) -> Result<Vec<Value>>;
    /// Keys of plain values starting with `prefix`, sorted.
    fn keys(&self, prefix: &str) -> Result<Vec<String>>;
    /// Names of streams starting with `prefix`, sorted.
    fn streams(&self, prefix: &str) -> Result<Vec<String>>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    values: RwLock<BTreeMap<String, Value>>,
    streams: RwLock<BTreeMap<String, Vec<Value>>>,
}

fn poisoned<T>(_: T) -> Error {
    Error::Storage("store lock poisoned".into())
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemoryStore {
    fn get(&self, key: &str) -> Result<Option<Value>> {
        Ok(self.values.read().map_err(poisoned)?.get(key).cloned())
    }

    fn put(&self, key: &str, value: Value) -> Result<()> {
        self.values
            .write()
            .map_err(poisoned)?
            .insert(key.to_owned(), value);
        Ok(())
    }

    fn append(&self, stream: &str, entry: Value) -> Result<()> {
        self.streams
            .write()
            .map_err(poisoned)?
            .entry(stream.to_owned())
            .or_default()
            .push(entry);
        Ok(())
    }

    fn read_stream(&self, stream: &str) -> Result<Vec<Value>> {
        Ok(self
            .streams
            .read()
            .map_err(poisoned)?
            .get(stream)
            .cloned()
            .unwrap_or_default())
    }

    fn keys(&self, prefix: &str) -> Result<Vec<String>> {
        let values = self.values.read().map_err(poisoned)?;
        Ok(values
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect())
    }

    fn streams(&self, prefix: &str) -> Result<Vec<String>> {
        let streams = self.streams.read().map_err(poisoned)?;
        Ok(streams
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum LogEntry {
    Put { key: String, value: Value },
    Append { stream: String, entry: Value },
}

/// Single-file embedded store.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    memory: MemoryStore,
    log: Mutex<BufWriter<File>>,
}

impl FileStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let memory = MemoryStore::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let mut offset = 0usize;
            let mut torn_at = None;
            let lines: Vec<&str> = text.split_inclusive('\n').collect();
            for (n, raw) in lines.iter().enumerate() {
                let start = offset;
                offset += raw.len();
                let line = raw.trim();
                if line.is_empty() {
                    continue;
                }
                match serde_json::from_str::<LogEntry>(line) {
                    Ok(LogEntry::Put { key, value }) => memory.put(&key, value)?,
                    Ok(LogEntry::Append { stream, entry }) => memory.append(&stream, entry)?,
                    // a torn final write is cut off, anything earlier is corruption
                    Err(e) if n + 1 == lines.len() && !raw.ends_with('\n') => {
                        tracing::warn!(path = %path.display(), "dropping torn final log line: {e}");
                        torn_at = Some(start);
                    }
                    Err(e) => {
                        return Err(Error::Storage(format!(
                            "{}: corrupt log line {}: {e}",
                            path.display(),
                            n + 1
                        )))
                    }
                }
            }
            if let Some(len) = torn_at {
                OpenOptions::new()
                    .write(true)
                    .open(&path)?
                    .set_len(len as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            memory,
            log: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write(&self, entry: &LogEntry) -> Result<()> {
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        let mut log = self.log.lock().map_err(poisoned)?;
        log.write_all(line.as_bytes())?;
        log.flush()?;
        Ok(())
    }
}

impl Store for FileStore {
    fn get(&self, key: &str) -> Result<Option<Value>> {
        self.memory.get(key)
    }

    fn put(&self, key: &str, value: Value) -> Result<()> {
        let entry = LogEntry::Put {
            key: key.to_owned(),
            value,
        };
        self.write(&entry)?;
        let LogEntry::Put { key, value } = entry else {
            unreachable!()
        };
        self.memory.put(&key, value)
    }

    fn append(&self, stream: &str, entry: Value) -> Result<()> {
        let log_entry = LogEntry::Append {
            stream: stream.to_owned(),
            entry,
        };
        self.write(&log_entry)?;
        let LogEntry::Append { stream, entry } = log_entry else {
            unreachable!()
        };
        self.memory.append(&stream, entry)
    }

    fn read_stream(&self, stream: &str) -> Result<Vec<Value>> {
        self.memory.read_stream(stream)
    }

    fn keys(&self, prefix: &str) -> Result<Vec<String>> {
        self.memory.keys(prefix)
    }

    fn streams(&self, prefix: &str) -> Result<Vec<String>> {
        self.memory.streams(prefix)
    }
}
