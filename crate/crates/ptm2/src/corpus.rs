use std::path::Path;

use ptm2_core::{Sentence, SentenceUnit};

use crate::error::{Error, Result};
use crate::m2;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Lines of `text` without line terminators. A final newline does not start
/// an extra line.
pub fn lines(text: &str) -> Vec<&str> {
    text.lines().collect()
}

/// One tokenized sentence per line. Empty lines are rejected, and when
/// `expected` is given the line count must match it.
pub fn parse_sentences(text: &str, origin: &str, expected: Option<usize>) -> Result<Vec<Sentence>> {
    let lines = lines(text);
    if let Some(expected) = expected {
        if lines.len() != expected {
            return Err(Error::Usage(format!(
                "{origin}: line count {} does not match the {expected} gold sentences",
                lines.len()
            )));
        }
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let sentence = Sentence::from_text(line);
            if sentence.is_empty() {
                Err(Error::Parse {
                    origin: origin.to_string(),
                    line: i + 1,
                    message: format!("empty hypothesis at line {}", i + 1),
                })
            } else {
                Ok(sentence)
            }
        })
        .collect()
}

pub fn load_system_outputs(path: &Path, expected: usize) -> Result<Vec<Sentence>> {
    parse_sentences(&read_text(path)?, &path.display().to_string(), Some(expected))
}

/// Gold units from an M² file.
pub fn load_gold(path: &Path) -> Result<Vec<SentenceUnit>> {
    let blocks = m2::read_m2(path)?;
    if blocks.is_empty() {
        return Err(Error::Usage(format!("{}: no sentences", path.display())));
    }
    blocks
        .iter()
        .map(|b| b.to_unit().map_err(Error::from))
        .collect()
}

/// Checks a plain source file against the sources embedded in the gold file.
pub fn check_sources(path: &Path, units: &[SentenceUnit]) -> Result<()> {
    let text = read_text(path)?;
    let lines = lines(&text);
    if lines.len() != units.len() {
        return Err(Error::Usage(format!(
            "{}: line count {} does not match the {} gold sentences",
            path.display(),
            lines.len(),
            units.len()
        )));
    }
    for (i, (line, unit)) in lines.iter().zip(units).enumerate() {
        if Sentence::from_text(line) != *unit.source() {
            return Err(Error::Parse {
                origin: path.display().to_string(),
                line: i + 1,
                message: "source sentence differs from the gold file".into(),
            });
        }
    }
    Ok(())
}
