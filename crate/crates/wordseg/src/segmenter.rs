//! Session driver: the per-letter processing cycle, learning vs output
//! phases, the detachment gate, flushing, and the emission contract.

use crate::config::EngineConfig;
use crate::memory::{MemoryStats, SequenceMemory};
use crate::trellis::{ColumnView, EventWindow};
use crate::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Counters and word scores accumulate; nothing is emitted and the
    /// window never grows past one logical column.
    Learning,
    /// The window grows per letter and words detach to the output stream.
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emission {
    /// A detached word.
    Word(String),
    /// A single letter pushed out of a full window with no qualifying
    /// boundary; rendered with a leading '-'.
    ForcedChar(char),
    /// The window hit capacity and the gate was bypassed; rendered as '+'.
    Overflow,
    /// End of one detachment batch; rendered as a newline.
    BatchEnd,
}

/// One segmentation session: a sequence memory plus an event window driven
/// by a stream of letters. Sessions are single-threaded and self-contained.
pub struct Session {
    config: EngineConfig,
    memory: SequenceMemory,
    window: EventWindow,
    mode: Mode,
    /// Live minimum width; flush pins this to zero for the session's rest.
    min_columns: usize,
}

impl Session {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Session {
            window: EventWindow::new(config.window_capacity),
            min_columns: config.min_columns,
            config,
            memory: SequenceMemory::new(),
            mode: Mode::Learning,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn memory(&self) -> &SequenceMemory {
        &self.memory
    }

    pub fn stats(&self) -> MemoryStats {
        self.memory.stats()
    }

    /// Switching into output mode resets the event window; sequence memory
    /// and its counters persist. Setting the current mode is a no-op.
    pub fn set_mode(&mut self, mode: Mode) {
        if mode == self.mode {
            return;
        }
        self.mode = mode;
        if mode == Mode::Output {
            self.window.reset();
        }
    }

    /// Consume one letter. Most events emit nothing; a detachment batch
    /// arrives as words followed by a BatchEnd, possibly preceded by an
    /// overflow marker.
    pub fn process_event(&mut self, c: char) -> Result<Vec<Emission>, EngineError> {
        if !c.is_ascii_lowercase() {
            return Err(EngineError::InvalidLetter(c));
        }
        let event = c as u8;

        let first = self.window.append_column(event, &mut self.memory, &self.config);
        if first {
            return Ok(Vec::new());
        }
        self.window.score_first_level(&mut self.memory);
        if self.mode == Mode::Learning {
            return Ok(Vec::new());
        }

        self.window.grow();
        if self.window.num_columns() <= self.min_columns {
            return Ok(Vec::new());
        }

        let mut emissions = Vec::new();
        if self.min_columns > 0 {
            if self.window.num_columns() != self.window.capacity() {
                // gate: the first-level survivor just left of the head must
                // look like a completed word
                let prev = self.window.prev_index();
                let seq = self.window.cell_seq(prev, self.window.best_length(prev) - 1);
                if self.memory.get(seq).average_word_score() < self.config.gate_score {
                    return Ok(emissions);
                }
            } else {
                emissions.push(Emission::Overflow);
            }
        }
        if self.config.second_level {
            self.window.score_second_level(&self.memory);
        }
        let detached = self.window.detach_words(&self.memory, self.min_columns);
        if detached.is_empty() {
            return Ok(emissions);
        }
        emissions.extend(detached);
        emissions.push(Emission::BatchEnd);
        Ok(emissions)
    }

    /// End-of-stream: drop the minimum-width requirement for the rest of
    /// the session and push one sentinel letter through the engine so all
    /// qualifying words detach. The sentinel stays in the window and is
    /// never emitted, but it does count toward the sentinel root's
    /// statistics.
    pub fn flush(&mut self) -> Result<Vec<Emission>, EngineError> {
        if self.mode != Mode::Output {
            return Err(EngineError::NotInOutputMode);
        }
        self.min_columns = 0;
        self.process_event(self.config.flush_sentinel)
    }

    /// Snapshot of the newest column, if any; used for traces.
    pub fn head_column(&self) -> Option<ColumnView> {
        self.window.head_view()
    }

    /// Snapshots of the logical window, oldest first.
    pub fn window_columns(&self) -> Vec<ColumnView> {
        self.window.window_views()
    }

    /// Letters currently held in the logical window, oldest first.
    pub fn window_letters(&self) -> String {
        self.window_columns().iter().map(|v| v.event).collect()
    }

    /// One-line trace of the newest column.
    pub fn trace_head(&self) -> String {
        match self.head_column() {
            None => String::from("(empty)"),
            Some(v) => {
                let cells: Vec<String> = v
                    .cells
                    .iter()
                    .map(|(len, score)| format!("{len}:{score:.6}"))
                    .collect();
                format!("{} [{}]", v.event, cells.join(" "))
            }
        }
    }
}

/// Render emissions in the reference text framing: words space-separated
/// with a newline per detachment batch, '+' for a window overflow, '-' for
/// a forced-out character.
pub fn render_replica(emissions: &[Emission]) -> String {
    let mut out = String::new();
    let mut batch: Vec<String> = Vec::new();
    for e in emissions {
        match e {
            Emission::Overflow => out.push('+'),
            Emission::ForcedChar(c) => {
                out.push('-');
                batch.push(c.to_string());
            }
            Emission::Word(w) => batch.push(w.clone()),
            Emission::BatchEnd => {
                out.push_str(&batch.join(" "));
                out.push('\n');
                batch.clear();
            }
        }
    }
    debug_assert!(batch.is_empty(), "unterminated batch");
    out
}

/// The trailing statistics block from the reference output.
pub fn render_stats(stats: &MemoryStats, sample_words: usize, sample_chars: usize) -> String {
    format!(
        "\nSEQUENCES STORED = {}\nSEQUENCES FIRING = {}\nTOTAL EVENT COUNT = {}\nSAMPLE LENGTH = {} words, {} chars\n",
        stats.alloc_count, stats.fire_count, stats.event_count, sample_words, sample_chars
    )
}

/// Just the emitted letters, markers stripped: every word and forced
/// character in emission order.
pub fn emitted_words(emissions: &[Emission]) -> Vec<String> {
    emissions
        .iter()
        .filter_map(|e| match e {
            Emission::Word(w) => Some(w.clone()),
            Emission::ForcedChar(c) => Some(c.to_string()),
            _ => None,
        })
        .collect()
}
