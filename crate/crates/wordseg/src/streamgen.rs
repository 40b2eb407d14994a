//! Deterministic stochastic stream generator: words drawn uniformly from a
//! corpus with a bit-exact linear congruential generator, so training
//! streams replicate across runs and platforms.

use crate::EngineError;

/// The generator behind the golden runs: state' = state * 214013 + 2531011
/// (mod 2^32), output bits 30..16. Swapping in anything else forfeits the
/// golden replicas.
#[derive(Debug, Clone, Copy)]
pub struct Lcg {
    state: u32,
}

impl Lcg {
    pub fn new(seed: u32) -> Self {
        Lcg { state: seed }
    }

    /// Next value in [0, 32768).
    pub fn next(&mut self) -> u16 {
        self.state = self.state.wrapping_mul(214013).wrapping_add(2531011);
        ((self.state >> 16) & 0x7FFF) as u16
    }
}

/// An ordered word list (duplicates allowed) acting as the hidden
/// dictionary of the stream generator.
#[derive(Debug, Clone)]
pub struct Corpus {
    words: Vec<String>,
    letter_count: usize,
}

impl Corpus {
    /// Ingest whitespace-separated tokens; letters are lowercased, any
    /// character outside a-z is dropped, empty tokens discarded.
    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let words: Vec<String> = text
            .split_whitespace()
            .map(|tok| {
                tok.chars()
                    .filter_map(|c| {
                        let c = c.to_ascii_lowercase();
                        c.is_ascii_lowercase().then_some(c)
                    })
                    .collect::<String>()
            })
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(EngineError::EmptyCorpus);
        }
        let letter_count = words.iter().map(|w| w.len()).sum();
        Ok(Corpus {
            words,
            letter_count,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn letter_count(&self) -> usize {
        self.letter_count
    }

    /// Draw the next word uniformly at random.
    pub fn next_word<'a>(&'a self, lcg: &mut Lcg) -> &'a str {
        &self.words[lcg.next() as usize % self.words.len()]
    }
}

/// A generated letter stream together with the gold segmentation the
/// generator knows but a real stream would not reveal.
#[derive(Debug, Clone)]
pub struct GeneratedStream {
    /// Concatenated letters, no separators.
    pub letters: String,
    /// Internal word boundaries: letter offsets in (0, letters.len()).
    pub boundaries: Vec<usize>,
}

/// Concatenate `n_words` uniform draws from the corpus.
pub fn generate(corpus: &Corpus, n_words: usize, seed: u32) -> GeneratedStream {
    let mut lcg = Lcg::new(seed);
    let mut letters = String::new();
    let mut boundaries = Vec::new();
    for _ in 0..n_words {
        if !letters.is_empty() {
            boundaries.push(letters.len());
        }
        letters.push_str(corpus.next_word(&mut lcg));
    }
    GeneratedStream { letters, boundaries }
}
