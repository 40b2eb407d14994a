//! The event window: a ring of columns forming a sawtooth Viterbi trellis.
//! Each column holds scored references to the valid sequences that end at
//! that stream position. New letters append columns on the right; committed
//! words detach from the left.

use crate::config::EngineConfig;
use crate::memory::{SeqId, SequenceMemory};
use crate::segmenter::Emission;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub(crate) seq: SeqId,
    pub(crate) score: f32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Column {
    pub(crate) event: u8,
    pub(crate) cells: Vec<Cell>,
    pub(crate) best_length: usize,
    pub(crate) best_score: f32,
    /// Whether the last first-level pass took the normalizing branch.
    pub(crate) normalized: bool,
}

/// Read-only snapshot of one column, used for traces and tests.
#[derive(Debug, Clone)]
pub struct ColumnView {
    pub event: char,
    /// (sequence length, first-level score) per cell, shortest first.
    pub cells: Vec<(usize, f32)>,
    pub best_length: usize,
    pub best_score: f32,
    pub normalized: bool,
}

pub(crate) struct EventWindow {
    columns: Vec<Column>,
    head: usize,
    num_columns: usize,
    started: bool,
}

impl EventWindow {
    pub(crate) fn new(capacity: usize) -> Self {
        EventWindow {
            columns: vec![Column::default(); capacity],
            head: 0,
            num_columns: 0,
            started: false,
        }
    }

    pub(crate) fn capacity(&self) -> usize {
        self.columns.len()
    }

    pub(crate) fn num_columns(&self) -> usize {
        self.num_columns
    }

    pub(crate) fn grow(&mut self) {
        self.num_columns += 1;
    }

    pub(crate) fn reset(&mut self) {
        self.started = false;
        self.num_columns = 0;
    }

    fn back(&self, offset: usize) -> usize {
        let cap = self.capacity();
        (self.head + cap - offset % cap) % cap
    }

    pub(crate) fn prev_index(&self) -> usize {
        self.back(1)
    }

    pub(crate) fn best_length(&self, idx: usize) -> usize {
        self.columns[idx].best_length
    }

    pub(crate) fn cell_seq(&self, idx: usize, cell: usize) -> SeqId {
        self.columns[idx].cells[cell].seq
    }

    pub(crate) fn column_view(&self, idx: usize) -> ColumnView {
        let col = &self.columns[idx];
        ColumnView {
            event: col.event as char,
            cells: col
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1, c.score))
                .collect(),
            best_length: col.best_length,
            best_score: col.best_score,
            normalized: col.normalized,
        }
    }

    pub(crate) fn head_view(&self) -> Option<ColumnView> {
        self.started.then(|| self.column_view(self.head))
    }

    /// Views of the logical window, oldest first.
    pub(crate) fn window_views(&self) -> Vec<ColumnView> {
        (0..self.num_columns)
            .rev()
            .map(|k| self.column_view(self.back(k)))
            .collect()
    }

    /// Consume one letter: advance the ring and populate the new head
    /// column. Returns true when this was the first column after a reset,
    /// in which case no scoring is possible yet.
    pub(crate) fn append_column(
        &mut self,
        event: u8,
        mem: &mut SequenceMemory,
        cfg: &EngineConfig,
    ) -> bool {
        let first = !self.started;
        let prev = if first {
            self.started = true;
            self.head = 0;
            self.num_columns = 1;
            None
        } else {
            let prev = self.head;
            self.head = (self.head + 1) % self.capacity();
            Some(prev)
        };
        self.populate(prev, event, mem, cfg);
        first
    }

    /// Fill the head column with the valid sequences ending at this event
    /// and update every touched counter. The column is a prefix-closed
    /// suffix chain: extension stops at the first child that fails the
    /// frequency test, but every remaining candidate child still gets its
    /// in_count bumped since a few of them later turn valid.
    fn populate(
        &mut self,
        prev: Option<usize>,
        event: u8,
        mem: &mut SequenceMemory,
        cfg: &EngineConfig,
    ) {
        mem.bump_event_count();
        let root = mem.root(event);
        let r = mem.get_mut(root);
        r.in_count += 1;
        r.out_count += 1;

        let mut cells = vec![Cell {
            seq: root,
            score: 0.0,
        }];
        if let Some(prev) = prev {
            let prev_seqs: Vec<SeqId> = self.columns[prev].cells.iter().map(|c| c.seq).collect();
            let mut stopped = prev_seqs.len();
            for (ix, &in_seq) in prev_seqs.iter().enumerate() {
                let child = mem
                    .next_sequence(Some(in_seq), event)
                    .expect("letter validated upstream");
                mem.get_mut(child).in_count += 1;
                if !mem.get(child).passes_threshold(mem.event_count(), cfg) {
                    stopped = ix;
                    break;
                }
                if mem.get(child).out_count == 0 {
                    mem.note_fire();
                }
                mem.get_mut(child).out_count += 1;
                mem.get_mut(in_seq).succ_count += 1;
                cells.push(Cell {
                    seq: child,
                    score: 0.0,
                });
                assert!(
                    cells.len() < self.capacity(),
                    "event window column overflow"
                );
            }
            // the failed cell itself was already counted; skip it
            for &in_seq in prev_seqs.iter().skip(stopped + 1) {
                let child = mem
                    .next_sequence(Some(in_seq), event)
                    .expect("letter validated upstream");
                mem.get_mut(child).in_count += 1;
            }
        }
        let col = &mut self.columns[self.head];
        col.event = event;
        col.cells = cells;
        col.normalized = false;
    }

    /// First-level Viterbi pass from the previous column into the head
    /// column: same-word scores land on cells 1.., new-word candidates
    /// compete for cell 0 and only the best survives. Scores are then
    /// normalized to sum to one, and the normalized cell-0 score is
    /// credited to the survivor predecessor's accumulated word score.
    pub(crate) fn score_first_level(&mut self, mem: &mut SequenceMemory) {
        let prev_idx = self.prev_index();
        let head = self.head;
        debug_assert!(!self.columns[head].cells.is_empty());

        let frac =
            mem.get(self.columns[head].cells[0].seq).in_count as f32 / mem.event_count() as f32;
        let mut sum = 0.0f32;
        let mut cell0_score = self.columns[head].cells[0].score;
        let mut best_length = 0usize;
        let prev_n = self.columns[prev_idx].cells.len();
        let head_n = self.columns[head].cells.len();

        for ix in 0..prev_n {
            let (in_seq, score) = {
                let c = &self.columns[prev_idx].cells[ix];
                (c.seq, c.score)
            };
            let in_rec = mem.get(in_seq);
            let eow_count = (in_rec.out_count - in_rec.succ_count) as f32;
            let p_new = frac * eow_count / in_rec.out_count as f32;

            if ix + 1 < head_n {
                let out_seq = self.columns[head].cells[ix + 1].seq;
                let p_same =
                    mem.get(out_seq).out_count as f32 / in_rec.out_count as f32 - p_new;
                // negative p_same values propagate unclamped
                let s = score * p_same;
                self.columns[head].cells[ix + 1].score = s;
                sum += s;
            }
            let s = score * p_new;
            if ix == 0 || cell0_score < s {
                cell0_score = s;
                best_length = ix + 1;
            }
        }

        self.columns[head].cells[0].score = cell0_score;
        self.columns[prev_idx].best_length = best_length;
        if sum != 0.0 {
            let total = sum + cell0_score;
            for c in &mut self.columns[head].cells {
                c.score /= total;
            }
            self.columns[head].normalized = true;
        } else {
            self.columns[head].cells[0].score = 1.0;
        }

        let survivor = self.columns[prev_idx].cells[best_length - 1].seq;
        let add = self.columns[head].cells[0].score;
        mem.get_mut(survivor).accum_scores += add;
    }

    /// Second-level rescoring of every in-window column left of the head.
    pub(crate) fn score_second_level(&mut self, mem: &SequenceMemory) {
        let n = self.num_columns - 1;
        let indices: Vec<usize> = (1..=n).map(|k| self.back(self.num_columns - k)).collect();
        debug_assert!(n == 0 || self.columns[indices[0]].cells.len() == 1);

        let cols: Vec<Vec<f32>> = indices
            .iter()
            .map(|&idx| {
                self.columns[idx]
                    .cells
                    .iter()
                    .map(|c| mem.get(c.seq).average_word_score())
                    .collect()
            })
            .collect();
        for (&idx, (len, score)) in indices.iter().zip(best_segmentation(&cols)) {
            self.columns[idx].best_length = len;
            self.columns[idx].best_score = score;
        }
    }

    /// Walk the committed boundaries right to left and emit every word that
    /// ends far enough back from the head; shrink the window and realign
    /// its left edge to the new boundary. With no qualifying word and a
    /// full window, the single oldest letter is forced out instead.
    pub(crate) fn detach_words(
        &mut self,
        mem: &SequenceMemory,
        min_columns: usize,
    ) -> Vec<Emission> {
        let cap = self.capacity();
        let mut stack: Vec<SeqId> = Vec::new();
        let mut offset = 1usize;
        while offset < self.num_columns {
            let idx = self.back(offset);
            let len = self.columns[idx].best_length;
            if offset > min_columns / 2 {
                stack.push(self.columns[idx].cells[len - 1].seq);
            }
            offset += len;
        }

        let mut out = Vec::new();
        let forced = stack.is_empty();
        if forced {
            if self.num_columns != cap {
                return out;
            }
            let oldest = (self.head + 1) % cap;
            stack.push(self.columns[oldest].cells[0].seq);
        }

        for &seq in stack.iter().rev() {
            let rec = mem.get(seq);
            self.num_columns -= rec.length as usize;
            let letters = mem.letters(seq);
            if forced {
                out.push(Emission::ForcedChar(letters.chars().next().unwrap()));
            } else {
                out.push(Emission::Word(letters));
            }
        }

        // realign: cap the k-th column from the new left edge to k cells
        let mut idx = self.back(self.num_columns - 1);
        let mut len = 1usize;
        while len <= self.num_columns && self.columns[idx].cells.len() > len {
            self.columns[idx].cells.truncate(len);
            if self.columns[idx].best_length > len {
                self.columns[idx].best_length = len;
            }
            len += 1;
            idx = (idx + 1) % cap;
        }
        out
    }
}

/// Second-level dynamic program over a block of columns. `cols[c][j]` is
/// the average word score of the hypothetical word of length j+1 ending at
/// column c; a cell may not span past the left edge (j <= c). A virtual
/// boundary column with score 1.0 sits immediately left of the block.
/// Returns (best_length, best_score) per column; ties keep the shorter
/// word.
pub fn best_segmentation(cols: &[Vec<f32>]) -> Vec<(usize, f32)> {
    let mut out: Vec<(usize, f32)> = Vec::with_capacity(cols.len());
    for (c, scores) in cols.iter().enumerate() {
        let mut best_score = 0.0f32;
        let mut best_len = 0usize;
        for (j, &w) in scores.iter().enumerate() {
            assert!(j <= c, "cell spans past the left window edge");
            let base = if j == c { 1.0f32 } else { out[c - j - 1].1 };
            let score = (base as f64 * (w as f64).powi(j as i32 + 1)) as f32;
            if j == 0 || best_score < score {
                best_score = score;
                best_len = j + 1;
            }
        }
        out.push((best_len, best_score));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_cfg() -> EngineConfig {
        EngineConfig::with_threshold(0.4 / 44.0)
    }

    #[test]
    fn first_event_builds_root_column() {
        let mut mem = SequenceMemory::new();
        let mut w = EventWindow::new(32);
        let first = w.append_column(b'a', &mut mem, &toy_cfg());
        assert!(first);
        let view = w.head_view().unwrap();
        assert_eq!(view.cells.len(), 1);
        let root = mem.get(mem.root(b'a'));
        assert_eq!(root.in_count, 1);
        assert_eq!(root.out_count, 1);
        assert_eq!(mem.event_count(), 1);
    }

    #[test]
    fn column_extends_with_valid_children() {
        // previous column holds e / he; er and her are established valid
        // sequences, so the new column after 'r' is r / er / her
        let cfg = toy_cfg();
        let mut mem = SequenceMemory::new();
        let e = mem.root(b'e');
        let h = mem.root(b'h');
        let he = mem.next_sequence(Some(h), b'e').unwrap();
        let er = mem.next_sequence(Some(e), b'r').unwrap();
        let her = mem.next_sequence(Some(he), b'r').unwrap();
        mem.get_mut(er).in_count = 50;
        mem.get_mut(her).in_count = 50;
        mem.force_event_count(500);

        let mut w = EventWindow::new(32);
        w.append_column(b'e', &mut mem, &cfg);
        w.columns[0].cells = vec![
            Cell { seq: e, score: 0.5 },
            Cell { seq: he, score: 0.5 },
        ];
        w.append_column(b'r', &mut mem, &cfg);

        let lens: Vec<String> = w.columns[w.head]
            .cells
            .iter()
            .map(|c| mem.letters(c.seq))
            .collect();
        assert_eq!(lens, ["r", "er", "her"]);
        assert_eq!(mem.get(er).in_count, 51);
        assert_eq!(mem.get(er).out_count, 1);
        assert_eq!(mem.get(e).succ_count, 1);
    }

    #[test]
    fn failed_child_stops_chain_but_junk_still_counted() {
        // er fails the threshold, so the column is just r; the her
        // candidate still gets an in_count bump
        let cfg = toy_cfg();
        let mut mem = SequenceMemory::new();
        let e = mem.root(b'e');
        let h = mem.root(b'h');
        let he = mem.next_sequence(Some(h), b'e').unwrap();
        mem.force_event_count(500);

        let mut w = EventWindow::new(32);
        w.append_column(b'e', &mut mem, &cfg);
        w.columns[0].cells = vec![
            Cell { seq: e, score: 0.5 },
            Cell { seq: he, score: 0.5 },
        ];
        w.append_column(b'r', &mut mem, &cfg);

        let lens: Vec<String> = w.columns[w.head]
            .cells
            .iter()
            .map(|c| mem.letters(c.seq))
            .collect();
        assert_eq!(lens, ["r"]);
        let er = mem.next_sequence(Some(e), b'r').unwrap();
        let her = mem.next_sequence(Some(he), b'r').unwrap();
        assert_eq!(mem.get(er).in_count, 1);
        assert_eq!(mem.get(er).out_count, 0);
        assert_eq!(mem.get(her).in_count, 1);
        assert_eq!(mem.get(her).out_count, 0);
        assert_eq!(mem.get(e).succ_count, 0);
    }

    #[test]
    fn first_level_normalizes_and_accumulates() {
        let mut mem = SequenceMemory::new();
        let x = mem.root(b'a');
        {
            let r = mem.get_mut(x);
            r.in_count = 100;
            r.out_count = 100;
            r.succ_count = 60;
        }
        let xp = mem.next_sequence(Some(x), b'b').unwrap();
        {
            let r = mem.get_mut(xp);
            r.in_count = 55;
            r.out_count = 55;
        }
        let b = mem.root(b'b');
        mem.get_mut(b).in_count = 100;
        mem.force_event_count(1000); // frac = 100/1000 = 0.1

        let mut w = EventWindow::new(32);
        w.started = true;
        w.head = 1;
        w.num_columns = 2;
        w.columns[0].event = b'a';
        w.columns[0].cells = vec![Cell { seq: x, score: 1.0 }];
        w.columns[1].event = b'b';
        w.columns[1].cells = vec![
            Cell { seq: b, score: 0.0 },
            Cell { seq: xp, score: 0.0 },
        ];

        w.score_first_level(&mut mem);

        // P_new = 0.1 * 40/100 = 0.04; P_same = 55/100 - 0.04 = 0.51
        let c = &w.columns[1].cells;
        assert!((c[0].score - 0.04 / 0.55).abs() < 1e-6);
        assert!((c[1].score - 0.51 / 0.55).abs() < 1e-6);
        assert!(w.columns[1].normalized);
        assert!((c[0].score + c[1].score - 1.0).abs() < 1e-6);
        assert_eq!(w.columns[0].best_length, 1);
        assert!((mem.get(x).accum_scores - 0.04 / 0.55).abs() < 1e-6);
    }

    #[test]
    fn first_level_without_same_word_child_scores_one() {
        let mut mem = SequenceMemory::new();
        let x = mem.root(b'a');
        {
            let r = mem.get_mut(x);
            r.in_count = 100;
            r.out_count = 100;
            r.succ_count = 60;
        }
        let b = mem.root(b'b');
        mem.get_mut(b).in_count = 100;
        mem.force_event_count(1000);

        let mut w = EventWindow::new(32);
        w.started = true;
        w.head = 1;
        w.num_columns = 2;
        w.columns[0].cells = vec![Cell { seq: x, score: 1.0 }];
        w.columns[1].cells = vec![Cell { seq: b, score: 0.0 }];

        w.score_first_level(&mut mem);
        assert_eq!(w.columns[1].cells[0].score, 1.0);
        assert!(!w.columns[1].normalized);
        assert!((mem.get(x).accum_scores - 1.0).abs() < 1e-7);
    }

    #[test]
    fn second_level_power_form() {
        // one 3-letter word with average score 0.8 spanning the block
        let cols = vec![
            vec![0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0, 0.8],
        ];
        let out = best_segmentation(&cols);
        assert_eq!(out[2].0, 3);
        assert!((out[2].1 - 0.512).abs() < 1e-6);
    }

    #[test]
    fn second_level_virtual_boundary_base_case() {
        let out = best_segmentation(&[vec![0.25]]);
        assert_eq!(out, vec![(1, 0.25)]);
    }

    #[test]
    fn second_level_tie_prefers_shorter_word() {
        // 0.5 * 0.5 == 0.5^2: both splits score identically; the shorter
        // final word must win
        let cols = vec![vec![0.5], vec![0.5, 0.5]];
        let out = best_segmentation(&cols);
        assert_eq!(out[1].0, 1);
    }

    #[test]
    fn second_level_matches_brute_force_small() {
        let mut lcg = crate::streamgen::Lcg::new(42);
        for _ in 0..200 {
            let cols = random_cols(&mut lcg);
            let dp = best_segmentation(&cols);
            let (gold_lens, gold_score) = brute_force(&cols);
            let chain = chain_from(&dp);
            assert_eq!(chain, gold_lens, "cols: {cols:?}");
            let got = dp.last().unwrap().1;
            assert!((got - gold_score).abs() <= 1e-6 * gold_score.abs().max(1e-30));
        }
    }

    fn random_cols(lcg: &mut crate::streamgen::Lcg) -> Vec<Vec<f32>> {
        let n = (lcg.next() as usize % 10) + 1;
        (0..n)
            .map(|c| {
                let cells = (lcg.next() as usize % (c + 1).min(6)) + 1;
                (0..cells)
                    .map(|_| 0.1 + 0.9 * (lcg.next() as f32 / 32768.0))
                    .collect()
            })
            .collect()
    }

    /// Boundary chain read the way detachment reads it: lengths from the
    /// last column leftward, reported left to right.
    pub(super) fn chain_from(dp: &[(usize, f32)]) -> Vec<usize> {
        let mut lens = Vec::new();
        let mut pos = dp.len();
        while pos > 0 {
            let len = dp[pos - 1].0;
            lens.push(len);
            pos -= len;
        }
        lens.reverse();
        lens
    }

    /// Exhaustive segmentation argmax with the same float semantics and
    /// tie rule (shorter trailing words preferred).
    pub(super) fn brute_force(cols: &[Vec<f32>]) -> (Vec<usize>, f32) {
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        enumerate(cols, cols.len(), &mut Vec::new(), &mut candidates);
        // prefer shorter words from the end on exact ties
        candidates.sort_by(|a, b| {
            a.iter()
                .rev()
                .cmp(b.iter().rev())
        });
        let mut best: Option<(Vec<usize>, f32)> = None;
        for cand in candidates {
            let mut s = 1.0f32;
            let mut pos = 0usize;
            for &len in &cand {
                pos += len;
                let w = cols[pos - 1][len - 1];
                s = (s as f64 * (w as f64).powi(len as i32)) as f32;
            }
            match &best {
                Some((_, bs)) if s <= *bs => {}
                _ => best = Some((cand, s)),
            }
        }
        best.unwrap()
    }

    fn enumerate(
        cols: &[Vec<f32>],
        end: usize,
        suffix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if end == 0 {
            let mut seg: Vec<usize> = suffix.clone();
            seg.reverse();
            out.push(seg);
            return;
        }
        for len in 1..=cols[end - 1].len() {
            suffix.push(len);
            enumerate(cols, end - len, suffix, out);
            suffix.pop();
        }
    }
}
