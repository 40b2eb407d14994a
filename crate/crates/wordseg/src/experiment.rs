//! Experiment orchestration: learn from a generated stream, segment the
//! corpus in its original order, flush, and score the result against the
//! corpus's own segmentation.

use crate::config::EngineConfig;
use crate::eval::{self, EvalReport, Segmentation};
use crate::memory::MemoryStats;
use crate::segmenter::{self, Emission, Mode, Session};
use crate::streamgen::{Corpus, Lcg};
use crate::EngineError;

/// Everything needed to reproduce one run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub corpus: Corpus,
    /// Threshold numerator; f_T = k / corpus letter count.
    pub k: f64,
    pub learn_words: usize,
    pub seed: u32,
    pub bias: f32,
    pub window_capacity: usize,
    pub min_columns: usize,
    pub gate_score: f32,
    pub second_level: bool,
    pub trace: bool,
}

impl RunSpec {
    pub fn new(corpus: Corpus, k: f64, learn_words: usize, seed: u32) -> Self {
        let defaults = EngineConfig::default();
        RunSpec {
            corpus,
            k,
            learn_words,
            seed,
            bias: defaults.bias,
            window_capacity: defaults.window_capacity,
            min_columns: defaults.min_columns,
            gate_score: defaults.gate_score,
            second_level: true,
            trace: false,
        }
    }

    pub fn config(&self) -> EngineConfig {
        EngineConfig {
            threshold_prob: (self.k / self.corpus.letter_count() as f64) as f32,
            bias: self.bias,
            window_capacity: self.window_capacity,
            min_columns: self.min_columns,
            gate_score: self.gate_score,
            second_level: self.second_level,
            ..EngineConfig::default()
        }
    }
}

pub struct RunOutcome {
    /// The finished session, kept for post-run inspection (memory dumps).
    pub session: Session,
    pub emissions: Vec<Emission>,
    /// Emission stream in the reference text framing plus the stats block.
    pub replica_text: String,
    pub predicted: Segmentation,
    pub report: EvalReport,
    pub stats: MemoryStats,
    pub trace_lines: Vec<String>,
}

/// Learning phase over `learn_words` randomly sampled words, then one
/// output pass over the corpus in its original order, then a flush.
pub fn run(spec: &RunSpec) -> Result<RunOutcome, EngineError> {
    let mut session = Session::new(spec.config())?;
    let mut trace_lines = Vec::new();

    let mut lcg = Lcg::new(spec.seed);
    for _ in 0..spec.learn_words {
        let word: String = spec.corpus.next_word(&mut lcg).to_string();
        for c in word.chars() {
            session.process_event(c)?;
        }
    }

    session.set_mode(Mode::Output);
    let mut emissions = Vec::new();
    for word in spec.corpus.words() {
        for c in word.chars() {
            emissions.extend(session.process_event(c)?);
            if spec.trace {
                trace_lines.push(session.trace_head());
            }
        }
    }
    emissions.extend(session.flush()?);

    let stats = session.stats();
    let replica_text = segmenter::render_replica(&emissions)
        + &segmenter::render_stats(&stats, spec.corpus.word_count(), spec.corpus.letter_count());

    let predicted = Segmentation::from_words(segmenter::emitted_words(&emissions));
    let gold = Segmentation::from_words(spec.corpus.words());
    let report = eval::compare(&predicted, &gold)?;

    Ok(RunOutcome {
        session,
        emissions,
        replica_text,
        predicted,
        report,
        stats,
        trace_lines,
    })
}

/// One row per K value: run the same spec with each threshold numerator.
pub fn sweep(spec: &RunSpec, ks: &[f64]) -> Result<Vec<(f64, RunOutcome)>, EngineError> {
    ks.iter()
        .map(|&k| {
            let mut s = spec.clone();
            s.k = k;
            Ok((k, run(&s)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_run_is_deterministic() {
        let corpus =
            Corpus::from_text("the quick brown fox jumped over the lazy sleeping dog").unwrap();
        let spec = RunSpec::new(corpus, 0.4, 200, 123456);
        let a = run(&spec).unwrap();
        let b = run(&spec).unwrap();
        assert_eq!(a.replica_text, b.replica_text);
    }

    #[test]
    fn zero_letter_corpus_is_rejected_upstream() {
        assert!(Corpus::from_text("???").is_err());
    }
}
