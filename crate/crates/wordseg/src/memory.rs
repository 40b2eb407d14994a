//! Sequence memory: every sequence ever observed lives in one of 26 tries
//! rooted at the letters a-z, with hash-accelerated child lookup and the
//! per-sequence statistics counters that the probability formulas consume.

use std::io::{self, Write};

use crate::config::EngineConfig;
use crate::EngineError;

/// Number of buckets in the child-lookup hash table.
pub const HASH_BUCKETS: u32 = 12577;

/// Handle to a stored sequence. Ids are allocation numbers starting at 1;
/// the first 26 are the roots a..z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeqId(u32);

impl SeqId {
    pub fn get(self) -> u32 {
        self.0
    }

    fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

/// One stored sequence: last letter, length, predecessor, and the
/// statistics counters.
#[derive(Debug, Clone)]
pub struct SequenceRecord {
    /// Allocation number; roots a..z hold 1..26.
    pub id: u32,
    /// ASCII code of the last letter of the sequence.
    pub event: u8,
    /// Letter count of the full sequence.
    pub length: u8,
    /// Predecessor sequence (one letter shorter); `None` for roots.
    pub prev: Option<SeqId>,
    /// Global event count at the moment this record was created.
    pub create_count: u32,
    /// Observed instances in the input stream.
    pub in_count: u32,
    /// Instances that passed the frequency test (firing instances).
    pub out_count: u32,
    /// Firing instances of any same-word successor.
    pub succ_count: u32,
    /// Accumulated normalized first-level word scores.
    pub accum_scores: f32,
}

impl SequenceRecord {
    /// Frequency test for the current instance. `in_count` must already be
    /// incremented for this instance. Roots are always valid. A record
    /// created at this very event (zero denominator) is below threshold.
    pub fn passes_threshold(&self, event_count: u32, cfg: &EngineConfig) -> bool {
        if self.prev.is_none() {
            return true;
        }
        let age = event_count - self.create_count;
        if age == 0 {
            return false;
        }
        let prob = (self.in_count as f32 - cfg.bias) / age as f32;
        prob >= cfg.threshold_prob
    }

    /// accum_scores / in_count: the learned probability that an instance of
    /// this sequence is a complete word.
    pub fn average_word_score(&self) -> f32 {
        self.accum_scores / self.in_count as f32
    }
}

/// Aggregate counters reported after a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryStats {
    /// Total records created, roots included.
    pub alloc_count: u32,
    /// Non-root records whose out_count went 0 -> 1.
    pub fire_count: u32,
    /// Total letters consumed.
    pub event_count: u32,
}

/// Fold the five key bytes of a (predecessor, letter) pair with the ELF
/// hash and reduce to a bucket index. Only the low 16 bits of the
/// predecessor id take part, little-endian.
pub fn hash_index(prev: &SequenceRecord, event: u8) -> usize {
    let bytes = [
        event,
        prev.event,
        prev.length,
        (prev.id & 0xFF) as u8,
        ((prev.id >> 8) & 0xFF) as u8,
    ];
    let mut h: u32 = 0;
    for b in bytes {
        h = (h << 4).wrapping_add(b as u32);
        let g = h & 0xF000_0000;
        if g != 0 {
            h ^= g >> 24;
        }
        h &= !g;
    }
    (h % HASH_BUCKETS) as usize
}

pub struct SequenceMemory {
    records: Vec<SequenceRecord>,
    buckets: Vec<Vec<SeqId>>,
    event_count: u32,
    fire_count: u32,
}

impl Default for SequenceMemory {
    fn default() -> Self {
        Self::new()
    }
}

impl SequenceMemory {
    pub fn new() -> Self {
        let records = (0..26u32)
            .map(|i| SequenceRecord {
                id: i + 1,
                event: b'a' + i as u8,
                length: 1,
                prev: None,
                create_count: 0,
                in_count: 0,
                out_count: 0,
                succ_count: 0,
                accum_scores: 0.0,
            })
            .collect();
        SequenceMemory {
            records,
            buckets: vec![Vec::new(); HASH_BUCKETS as usize],
            event_count: 0,
            fire_count: 0,
        }
    }

    pub fn root(&self, event: u8) -> SeqId {
        debug_assert!(event.is_ascii_lowercase());
        SeqId((event - b'a') as u32 + 1)
    }

    pub fn get(&self, id: SeqId) -> &SequenceRecord {
        &self.records[id.index()]
    }

    pub(crate) fn get_mut(&mut self, id: SeqId) -> &mut SequenceRecord {
        &mut self.records[id.index()]
    }

    pub fn event_count(&self) -> u32 {
        self.event_count
    }

    pub(crate) fn bump_event_count(&mut self) {
        self.event_count += 1;
    }

    pub(crate) fn note_fire(&mut self) {
        self.fire_count += 1;
    }

    /// Find or create the sequence formed by appending `event` to `prev`.
    /// With no predecessor this is the root for `event`. Lookup never
    /// touches counters.
    pub fn next_sequence(&mut self, prev: Option<SeqId>, event: u8) -> Result<SeqId, EngineError> {
        if !event.is_ascii_lowercase() {
            return Err(EngineError::InvalidLetter(event as char));
        }
        let prev = match prev {
            None => return Ok(self.root(event)),
            Some(p) => p,
        };
        let bucket = hash_index(self.get(prev), event);
        for &id in &self.buckets[bucket] {
            let rec = self.get(id);
            if rec.prev == Some(prev) && rec.event == event {
                return Ok(id);
            }
        }
        let id = SeqId(self.records.len() as u32 + 1);
        let prev_rec = self.get(prev);
        self.records.push(SequenceRecord {
            id: id.0,
            event,
            length: prev_rec.length + 1,
            prev: Some(prev),
            create_count: self.event_count,
            in_count: 0,
            out_count: 0,
            succ_count: 0,
            accum_scores: 0.0,
        });
        self.buckets[bucket].push(id);
        Ok(id)
    }

    /// Reconstruct the letters of a sequence by walking the prev chain.
    pub fn letters(&self, id: SeqId) -> String {
        let mut rec = self.get(id);
        let mut buf = vec![rec.event];
        while let Some(p) = rec.prev {
            rec = self.get(p);
            buf.push(rec.event);
        }
        buf.reverse();
        String::from_utf8(buf).unwrap()
    }

    pub fn records(&self) -> impl Iterator<Item = &SequenceRecord> {
        self.records.iter()
    }

    pub fn stats(&self) -> MemoryStats {
        MemoryStats {
            alloc_count: self.records.len() as u32,
            fire_count: self.fire_count,
            event_count: self.event_count,
        }
    }

    /// Debug dump: one record per line, tab-separated.
    pub fn dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for rec in &self.records {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                rec.id,
                self.letters(SeqId(rec.id)),
                rec.create_count,
                rec.in_count,
                rec.out_count,
                rec.succ_count,
                rec.accum_scores,
            )?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn force_event_count(&mut self, n: u32) {
        self.event_count = n;
    }
}
