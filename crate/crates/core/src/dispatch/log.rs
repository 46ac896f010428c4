use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::domain::Placement;

/// One admission decision: the query, where it went, and the queue lengths
/// observed at decision time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: u64,
    pub placement: Placement,
    pub acc_len: u32,
    pub cpu_len: u32,
    /// Decision time in seconds (virtual clock in simulation, uptime when
    /// serving).
    pub t: f64,
}

/// Append-only log of admission decisions, one record per submitted query.
/// Safe to append from many threads.
#[derive(Debug, Default)]
pub struct DispatchDecisionLog {
    records: Mutex<Vec<DecisionRecord>>,
}

impl DispatchDecisionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&self, record: DecisionRecord) {
        self.records.lock().expect("log poisoned").push(record);
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<DecisionRecord> {
        self.records.lock().expect("log poisoned").clone()
    }

    /// Writes the log as JSON lines:
    /// `{"id":…,"placement":"accelerator|cpu|busy","acc_len":…,"cpu_len":…,"t":…}`.
    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for record in self.records.lock().expect("log poisoned").iter() {
            serde_json::to_writer(&mut writer, record)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}
