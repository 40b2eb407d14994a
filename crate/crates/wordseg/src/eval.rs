//! Segmentation scoring: boundary precision/recall/F1, word accuracy, and
//! an error diff that classifies each disagreeing span as a merge, split,
//! or mixed error.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::EngineError;

/// A letter stream plus its internal word-boundary positions (offsets
/// strictly between 0 and the stream length; the ends are implicit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    letters: String,
    boundaries: BTreeSet<usize>,
}

impl Segmentation {
    pub fn new(letters: String, boundaries: impl IntoIterator<Item = usize>) -> Self {
        let len = letters.len();
        let boundaries = boundaries
            .into_iter()
            .filter(|&b| b > 0 && b < len)
            .collect();
        Segmentation { letters, boundaries }
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut letters = String::new();
        let mut boundaries = BTreeSet::new();
        for w in words {
            if !letters.is_empty() {
                boundaries.insert(letters.len());
            }
            letters.push_str(w.as_ref());
        }
        Segmentation { letters, boundaries }
    }

    pub fn letters(&self) -> &str {
        &self.letters
    }

    pub fn boundaries(&self) -> &BTreeSet<usize> {
        &self.boundaries
    }

    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut start = 0;
        for &b in &self.boundaries {
            out.push(&self.letters[start..b]);
            start = b;
        }
        out.push(&self.letters[start..]);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClass {
    /// Gold boundaries missing from the prediction.
    Merge,
    /// Predicted boundaries absent from gold.
    Split,
    /// Both kinds inside one span.
    Mixed,
}

/// One maximal disagreeing span between prediction and gold.
#[derive(Debug, Clone, Serialize)]
pub struct SpanError {
    /// Letter offsets of the span, agreed boundary to agreed boundary.
    pub start: usize,
    pub end: usize,
    pub predicted: Vec<String>,
    pub gold: Vec<String>,
    pub class: ErrorClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub boundary_precision: f64,
    pub boundary_recall: f64,
    pub boundary_f1: f64,
    /// Gold words reproduced exactly (both boundaries predicted, nothing
    /// extra inside), over all gold words.
    pub word_accuracy: f64,
    /// |pred xor gold| over internal boundary sets.
    pub boundary_errors: usize,
    pub errors: Vec<SpanError>,
}

/// Score a predicted segmentation against gold over the same letter
/// stream. An empty predicted boundary set scores precision 1.0 by
/// convention.
pub fn compare(pred: &Segmentation, gold: &Segmentation) -> Result<EvalReport, EngineError> {
    if pred.letters != gold.letters {
        return Err(EngineError::StreamMismatch);
    }
    let p = &pred.boundaries;
    let g = &gold.boundaries;
    let hits = p.intersection(g).count();

    let precision = if p.is_empty() { 1.0 } else { hits as f64 / p.len() as f64 };
    let recall = if g.is_empty() { 1.0 } else { hits as f64 / g.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    // word accuracy over gold words
    let len = pred.letters.len();
    let mut matched = 0usize;
    let mut gold_words = 0usize;
    let mut start = 0usize;
    for &end in g.iter().chain(std::iter::once(&len)) {
        if len > 0 {
            gold_words += 1;
            let ends_ok = (start == 0 || p.contains(&start)) && (end == len || p.contains(&end));
            let clean_inside = !p.range(start + 1..end).next().is_some();
            if ends_ok && clean_inside {
                matched += 1;
            }
        }
        start = end;
    }
    let word_accuracy = if gold_words == 0 {
        1.0
    } else {
        matched as f64 / gold_words as f64
    };

    // group disagreements into maximal spans between agreed boundaries
    let mut errors = Vec::new();
    let agreed: Vec<usize> = std::iter::once(0)
        .chain(p.intersection(g).copied())
        .chain(std::iter::once(len))
        .collect();
    for w in agreed.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pred_in: Vec<usize> = p.range(a + 1..b).copied().collect();
        let gold_in: Vec<usize> = g.range(a + 1..b).copied().collect();
        if pred_in.is_empty() && gold_in.is_empty() {
            continue;
        }
        let class = match (pred_in.is_empty(), gold_in.is_empty()) {
            (true, false) => ErrorClass::Merge,
            (false, true) => ErrorClass::Split,
            _ => ErrorClass::Mixed,
        };
        errors.push(SpanError {
            start: a,
            end: b,
            predicted: span_words(&pred.letters, a, b, &pred_in),
            gold: span_words(&gold.letters, a, b, &gold_in),
            class,
        });
    }

    Ok(EvalReport {
        boundary_precision: precision,
        boundary_recall: recall,
        boundary_f1: f1,
        word_accuracy,
        boundary_errors: p.symmetric_difference(g).count(),
        errors,
    })
}

fn span_words(letters: &str, start: usize, end: usize, inner: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    let mut s = start;
    for &b in inner.iter().chain(std::iter::once(&end)) {
        out.push(letters[s..b].to_string());
        s = b;
    }
    out
}

impl EvalReport {
    /// Line-oriented key:value rendering plus the error diff with the
    /// disagreeing spans spelled out.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("boundary_precision: {:.6}\n", self.boundary_precision));
        out.push_str(&format!("boundary_recall: {:.6}\n", self.boundary_recall));
        out.push_str(&format!("boundary_f1: {:.6}\n", self.boundary_f1));
        out.push_str(&format!("word_accuracy: {:.6}\n", self.word_accuracy));
        out.push_str(&format!("boundary_errors: {}\n", self.boundary_errors));
        out.push_str(&format!("error_spans: {}\n", self.errors.len()));
        for e in &self.errors {
            let class = match e.class {
                ErrorClass::Merge => "merge",
                ErrorClass::Split => "split",
                ErrorClass::Mixed => "mixed",
            };
            out.push_str(&format!(
                "  [{}-{}] {:5}  pred: {}\n",
                e.start,
                e.end,
                class,
                e.predicted.join(" ")
            ));
            out.push_str(&format!(
                "  {}  gold: {}\n",
                " ".repeat(format!("[{}-{}] {:5}", e.start, e.end, class).len()),
                e.gold.join(" ")
            ));
        }
        out
    }
}
