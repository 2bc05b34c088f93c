//! Transcript of every classical message exchanged during reconciliation.
//!
//! Each message records who sent it, during which slice and pass, how many
//! payload bits it carried and a descriptor from which the exact bit
//! positions can be reconstructed (given the session seeds). The ledger
//! aggregates payload bits per slice and per direction and exposes the two
//! accounting conventions: counting both parties' disclosures, or counting
//! only Alice's on the grounds that for a binary symmetric channel Bob's
//! parities are a noisy copy of hers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "a_to_b")]
    AliceToBob,
    #[serde(rename = "b_to_a")]
    BobToAlice,
}

/// What a message's payload was; positions are reconstructible from the
/// pass shuffle seed plus the recorded range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// A full slice string (disclose-all correction).
    SliceBits,
    /// Parities of every block of a pass, in block order.
    BlockParities { blocks: u32 },
    /// Parity of the permuted index range [lo, hi) inside `block`, one step
    /// of a dichotomic search.
    RangeParity { block: u32, lo: u32, hi: u32 },
}

/// One logged message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub slice: u32,
    pub pass: u32,
    pub dir: Direction,
    pub bits: u64,
    pub descriptor: Payload,
}

/// Which disclosures count toward the leaked-bits total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountingMode {
    /// Both parties' bits count, as if their disclosures were independent.
    BothParties,
    /// Only Alice's bits count: her string is the key, and Bob's parities
    /// form a Markov chain behind hers on a BSC.
    MarkovBsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub slice: u32,
    pub alice_bits: u64,
    pub bob_bits: u64,
}

/// Payload bit totals, overall and per slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageLedger {
    pub alice_bits: u64,
    pub bob_bits: u64,
    pub per_slice: Vec<LedgerEntry>,
    pub accounting_mode: AccountingMode,
}

impl LeakageLedger {
    pub fn new(accounting_mode: AccountingMode) -> Self {
        Self {
            alice_bits: 0,
            bob_bits: 0,
            per_slice: Vec::new(),
            accounting_mode,
        }
    }

    fn record(&mut self, slice: u32, dir: Direction, bits: u64) {
        let entry = match self.per_slice.iter_mut().find(|e| e.slice == slice) {
            Some(e) => e,
            None => {
                self.per_slice.push(LedgerEntry {
                    slice,
                    alice_bits: 0,
                    bob_bits: 0,
                });
                self.per_slice.last_mut().expect("just pushed")
            }
        };
        match dir {
            Direction::AliceToBob => {
                entry.alice_bits += bits;
                self.alice_bits += bits;
            }
            Direction::BobToAlice => {
                entry.bob_bits += bits;
                self.bob_bits += bits;
            }
        }
    }

    /// Total under the ledger's own accounting mode.
    pub fn total(&self) -> u64 {
        self.total_for(self.accounting_mode)
    }

    pub fn total_for(&self, mode: AccountingMode) -> u64 {
        match mode {
            AccountingMode::BothParties => self.alice_bits + self.bob_bits,
            AccountingMode::MarkovBsc => self.alice_bits,
        }
    }

    pub fn slice_entry(&self, slice: u32) -> Option<&LedgerEntry> {
        self.per_slice.iter().find(|e| e.slice == slice)
    }
}

/// Outcome counters appended after the last message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    /// Number of raw key elements l.
    pub elements: usize,
    /// Number of slices m.
    pub slices: usize,
    /// Positions still differing per slice after correction.
    pub residual_errors: Vec<usize>,
    pub keys_equal: bool,
}

/// Ordered record of a reconciliation session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub ledger: LeakageLedger,
    pub summary: Option<SessionSummary>,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a SessionSummary,
    ledger: &'a LeakageLedger,
    both_parties_total: u64,
    markov_bsc_total: u64,
}

impl Transcript {
    pub fn new(accounting_mode: AccountingMode) -> Self {
        Self {
            messages: Vec::new(),
            ledger: LeakageLedger::new(accounting_mode),
            summary: None,
        }
    }

    /// Logs a message and charges its bits to the ledger.
    pub fn log(&mut self, slice: u32, pass: u32, dir: Direction, bits: u64, descriptor: Payload) {
        self.ledger.record(slice, dir, bits);
        self.messages.push(Message {
            slice,
            pass,
            dir,
            bits,
            descriptor,
        });
    }

    /// One JSON object per line, one line per message, then a summary line
    /// with the ledger totals in both accounting modes.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        let io_err = |e: std::io::Error| {
            crate::error::Error::InvalidParameter(format!("transcript write failed: {e}"))
        };
        for message in &self.messages {
            let line =
                serde_json::to_string(message).expect("transcript messages always serialize");
            out.write_all(line.as_bytes()).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        if let Some(summary) = &self.summary {
            let line = serde_json::to_string(&SummaryLine {
                summary,
                ledger: &self.ledger,
                both_parties_total: self.ledger.total_for(AccountingMode::BothParties),
                markov_bsc_total: self.ledger.total_for(AccountingMode::MarkovBsc),
            })
            .expect("summary always serializes");
            out.write_all(line.as_bytes()).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}
