//! Append-only event log with periodic snapshots.
//!
//! Each event is one JSON line `{"seq": n, "event": {...}}` written with a
//! single `write_all` and flushed to disk before the caller is acknowledged.
//! A snapshot holds the folded state up to some sequence number and is
//! replaced atomically by rename. The log itself is never rewritten except
//! to drop a torn final line left by a crash mid-write.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::ServiceError;
use crate::state::{Event, State};

pub const LOG_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Deserialize)]
struct Record {
    seq: u64,
    event: Event,
}

#[derive(Deserialize)]
struct Snapshot {
    seq: u64,
    state: State,
}

pub struct EventLog {
    dir: PathBuf,
    file: File,
    last_seq: u64,
    snapshot_seq: u64,
    snapshot_every: u64,
}

/// What [`EventLog::open`] found on disk.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub snapshot_seq: u64,
    pub replayed: u64,
    pub torn_tail_bytes: u64,
}

fn storage(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Storage(e.to_string())
}

impl EventLog {
    /// Opens or creates the log in `dir` and rebuilds the state: snapshot
    /// first, then every later event.
    pub fn open(dir: &Path, snapshot_every: u64) -> Result<(EventLog, State, Recovery), ServiceError> {
        fs::create_dir_all(dir)?;
        let mut recovery = Recovery::default();
        let (mut state, snapshot_seq) = match fs::read(dir.join(SNAPSHOT_FILE)) {
            Ok(bytes) => {
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(storage)?;
                (snap.state, snap.seq)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (State::default(), 0),
            Err(e) => return Err(e.into()),
        };
        recovery.snapshot_seq = snapshot_seq;

        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        let mut last_seq = 0u64;
        let mut good_len = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            let mut line_no = 0;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                line_no += 1;
                if !line.ends_with('\n') {
                    recovery.torn_tail_bytes = n as u64;
                    break;
                }
                let record: Record = serde_json::from_str(&line)
                    .map_err(|e| storage(format!("{}:{line_no}: {e}", path.display())))?;
                if record.seq != last_seq + 1 {
                    return Err(storage(format!(
                        "{}:{line_no}: sequence {} follows {last_seq}",
                        path.display(),
                        record.seq
                    )));
                }
                last_seq = record.seq;
                good_len += n as u64;
                if record.seq > snapshot_seq {
                    state.apply(record.event).map_err(storage)?;
                    recovery.replayed += 1;
                }
            }
        }
        if last_seq < snapshot_seq {
            return Err(storage(format!(
                "snapshot at {snapshot_seq} is ahead of the log, which ends at {last_seq}"
            )));
        }
        if recovery.torn_tail_bytes > 0 {
            warn!(bytes = recovery.torn_tail_bytes, "dropping torn final log line");
            file.set_len(good_len)?;
            file.sync_all()?;
            file.seek(SeekFrom::End(0))?;
        }
        let log = EventLog {
            dir: dir.to_path_buf(),
            file,
            last_seq,
            snapshot_seq,
            snapshot_every,
        };
        Ok((log, state, recovery))
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Appends and syncs one event, returning its sequence number.
    pub fn append(&mut self, event: &Event) -> Result<u64, ServiceError> {
        let seq = self.last_seq + 1;
        let mut line = serde_json::to_vec(&RecordRef { seq, event }).map_err(storage)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.last_seq = seq;
        Ok(seq)
    }

    pub fn snapshot_due(&self) -> bool {
        self.snapshot_every > 0 && self.last_seq - self.snapshot_seq >= self.snapshot_every
    }

    /// Writes `state` (which must reflect every appended event) as the new
    /// snapshot.
    pub fn write_snapshot(&mut self, state: &State) -> Result<(), ServiceError> {
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            let snap = SnapshotRef {
                seq: self.last_seq,
                state,
            };
            serde_json::to_writer(&mut f, &snap).map_err(storage)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.snapshot_seq = self.last_seq;
        Ok(())
    }
}

#[derive(Serialize)]
struct RecordRef<'a> {
    seq: u64,
    event: &'a Event,
}

#[derive(Serialize)]
struct SnapshotRef<'a> {
    seq: u64,
    state: &'a State,
}
