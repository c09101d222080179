//! Sentences, span edits and gold annotations.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A whitespace-tokenized sentence. Tokens are never empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    /// Splits `text` on any whitespace.
    pub fn from_text(text: &str) -> Self {
        Self {
            tokens: text.split_whitespace().map(String::from).collect(),
        }
    }

    /// Builds a sentence from tokens, dropping nothing. Returns `None` if a
    /// token is empty or contains whitespace.
    pub fn from_tokens<I, S>(tokens: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens
            .iter()
            .any(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return None;
        }
        Some(Self { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn to_lowercase(&self) -> Self {
        Self {
            tokens: self.tokens.iter().map(|t| t.to_lowercase()).collect(),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(tok)?;
        }
        Ok(())
    }
}

/// Replacement of the source span `start..end` by `correction`.
///
/// Equality, ordering and hashing use `(start, end, correction)`, which is
/// what edit-set membership is defined on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub correction: Vec<String>,
}

impl Edit {
    pub fn new<I, S>(start: usize, end: usize, correction: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            start,
            end,
            correction: correction.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.end > self.start && self.correction.is_empty()
    }

    pub fn is_substitution(&self) -> bool {
        self.end > self.start && !self.correction.is_empty()
    }

    /// Number of source tokens replaced.
    pub fn width(&self) -> usize {
        self.end - self.start
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, [", self.start, self.end)?;
        for (i, tok) in self.correction.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(tok)?;
        }
        f.write_str("])")
    }
}

/// Whether `second` may follow `first` in a sorted, applicable edit list.
fn compatible(first: &Edit, second: &Edit) -> bool {
    if first.end > second.start {
        return false;
    }
    if first.is_insertion() && first.start == second.start {
        // Two insertions at one index, or an insertion at a deletion's start,
        // have no unambiguous application order.
        return !(second.is_insertion() || second.is_deletion());
    }
    true
}

/// Checks bounds, degeneracy, ordering and overlap of `edits` against a
/// sentence of `len` tokens.
pub fn validate_edits(len: usize, edits: &[Edit]) -> Result<()> {
    for e in edits {
        if e.start > e.end || e.end > len {
            return Err(Error::OutOfBounds {
                edit: e.clone(),
                len,
            });
        }
        if e.is_insertion() && e.correction.is_empty() {
            return Err(Error::EmptyEdit { index: e.start });
        }
    }
    for pair in edits.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (a.start, a.end) > (b.start, b.end) {
            return Err(Error::Unsorted {
                first: a.clone(),
                second: b.clone(),
            });
        }
        if !compatible(a, b) {
            return Err(Error::Overlap {
                first: a.clone(),
                second: b.clone(),
            });
        }
    }
    Ok(())
}

/// Applies sorted, non-overlapping `edits` to `source`.
pub fn apply_edits(source: &Sentence, edits: &[Edit]) -> Result<Sentence> {
    validate_edits(source.len(), edits)?;
    let mut tokens = source.tokens.clone();
    for e in edits.iter().rev() {
        tokens.splice(e.start..e.end, e.correction.iter().cloned());
    }
    Ok(Sentence { tokens })
}

/// One annotator's gold edit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub annotator: u32,
    pub edits: Vec<Edit>,
}

impl Annotation {
    pub fn new(annotator: u32, edits: Vec<Edit>) -> Self {
        Self { annotator, edits }
    }
}

/// A source sentence with its gold annotations and the references they
/// produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceUnit {
    source: Sentence,
    gold: Vec<Annotation>,
    references: Vec<Sentence>,
}

impl SentenceUnit {
    /// Validates every annotation against `source` and derives one reference
    /// per annotation.
    pub fn new(source: Sentence, gold: Vec<Annotation>) -> Result<Self> {
        if gold.is_empty() {
            return Err(Error::Empty("sentence has no annotators"));
        }
        let references = gold
            .iter()
            .map(|a| apply_edits(&source, &a.edits))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            gold,
            references,
        })
    }

    pub fn source(&self) -> &Sentence {
        &self.source
    }

    pub fn gold(&self) -> &[Annotation] {
        &self.gold
    }

    pub fn references(&self) -> &[Sentence] {
        &self.references
    }

    pub fn to_lowercase(&self) -> Self {
        let lower = |e: &Edit| Edit {
            start: e.start,
            end: e.end,
            correction: e.correction.iter().map(|t| t.to_lowercase()).collect(),
        };
        Self {
            source: self.source.to_lowercase(),
            gold: self
                .gold
                .iter()
                .map(|a| Annotation::new(a.annotator, a.edits.iter().map(lower).collect()))
                .collect(),
            references: self.references.iter().map(Sentence::to_lowercase).collect(),
        }
    }
}
