//! M² annotation files.
//!
//! ```text
//! S They play the important role .
//! A 2 3|||ArtOrDet|||an|||REQUIRED|||-NONE-|||0
//! A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1
//! ```
//!
//! Blocks are separated by blank lines. `-NONE-` is an empty correction and
//! a `-1 -1` span declares an annotator without edits. Fields after the
//! annotator id are kept verbatim for re-emission.

use std::fmt::Write as _;
use std::path::Path;

use ptm2_core::{validate_edits, Annotation, Edit, Sentence, SentenceUnit};

use crate::error::{Error, Result};

const SEP: &str = "|||";
const NONE: &str = "-NONE-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2Edit {
    pub edit: Edit,
    pub kind: String,
    pub required: String,
    pub comment: String,
    pub extra: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2Annotation {
    pub annotator: u32,
    /// Sorted by span.
    pub edits: Vec<M2Edit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2Block {
    pub source: Sentence,
    /// Sorted by annotator id.
    pub annotations: Vec<M2Annotation>,
}

impl M2Block {
    /// Core view of the block. A block without any `A` line gets one empty
    /// annotation for annotator 0.
    pub fn to_unit(&self) -> ptm2_core::Result<SentenceUnit> {
        let mut gold: Vec<Annotation> = self
            .annotations
            .iter()
            .map(|a| Annotation::new(a.annotator, a.edits.iter().map(|e| e.edit.clone()).collect()))
            .collect();
        if gold.is_empty() {
            gold.push(Annotation::new(0, Vec::new()));
        }
        SentenceUnit::new(self.source.clone(), gold)
    }
}

fn parse_edit_line(rest: &str, origin: &str, line: usize) -> Result<(Option<M2Edit>, u32)> {
    let err = |message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let fields: Vec<&str> = rest.split(SEP).collect();
    if fields.len() < 6 {
        return Err(err(format!("expected at least 6 `|||` fields, found {}", fields.len())));
    }
    let mut span = fields[0].split_whitespace();
    let (Some(start), Some(end), None) = (span.next(), span.next(), span.next()) else {
        return Err(err(format!("bad span `{}`", fields[0])));
    };
    let start: i64 = start.parse().map_err(|_| err(format!("bad start index `{start}`")))?;
    let end: i64 = end.parse().map_err(|_| err(format!("bad end index `{end}`")))?;
    let annotator: u32 = fields[5]
        .trim()
        .parse()
        .map_err(|_| err(format!("bad annotator id `{}`", fields[5])))?;
    if start == -1 && end == -1 {
        return Ok((None, annotator));
    }
    if start < 0 || end < 0 {
        return Err(err(format!("negative span {start} {end}")));
    }
    let correction: Vec<String> = if fields[2].trim() == NONE {
        Vec::new()
    } else {
        fields[2].split_whitespace().map(String::from).collect()
    };
    let edit = M2Edit {
        edit: Edit {
            start: start as usize,
            end: end as usize,
            correction,
        },
        kind: fields[1].to_string(),
        required: fields[3].to_string(),
        comment: fields[4].to_string(),
        extra: fields[6..].iter().map(|s| s.to_string()).collect(),
    };
    Ok((Some(edit), annotator))
}

fn finish_block(
    source: Sentence,
    raw: Vec<ALine>,
    origin: &str,
    block_line: usize,
) -> Result<M2Block> {
    let mut ids: Vec<u32> = raw.iter().map(|(id, _, _)| *id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut annotations = Vec::with_capacity(ids.len());
    for id in ids {
        let mut edits: Vec<(M2Edit, usize)> = raw
            .iter()
            .filter(|(a, e, _)| *a == id && e.is_some())
            .map(|(_, e, line)| (e.clone().unwrap(), *line))
            .collect();
        edits.sort_by_key(|a| (a.0.edit.start, a.0.edit.end));
        let plain: Vec<Edit> = edits.iter().map(|(e, _)| e.edit.clone()).collect();
        if let Err(err) = validate_edits(source.len(), &plain) {
            let line = offending_line(&source, &edits).unwrap_or(block_line);
            return Err(Error::Invalid {
                origin: origin.to_string(),
                line,
                source: err,
            });
        }
        annotations.push(M2Annotation {
            annotator: id,
            edits: edits.into_iter().map(|(e, _)| e).collect(),
        });
    }
    Ok(M2Block { source, annotations })
}

/// Line of the first edit that makes the prefix invalid.
fn offending_line(source: &Sentence, edits: &[(M2Edit, usize)]) -> Option<usize> {
    (1..=edits.len()).find_map(|k| {
        let prefix: Vec<Edit> = edits[..k].iter().map(|(e, _)| e.edit.clone()).collect();
        validate_edits(source.len(), &prefix).err().map(|_| edits[k - 1].1)
    })
}

/// An `A` line: annotator, edit (`None` for a noop line) and line number.
type ALine = (u32, Option<M2Edit>, usize);

/// Parses M² text. `origin` names the input in error messages.
pub fn parse_m2(text: &str, origin: &str) -> Result<Vec<M2Block>> {
    let mut blocks = Vec::new();
    let mut current: Option<(Sentence, Vec<ALine>, usize)> = None;
    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            if let Some((source, edits, at)) = current.take() {
                blocks.push(finish_block(source, edits, origin, at)?);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('S').filter(|r| r.is_empty() || r.starts_with(' ')) {
            if current.is_some() {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    line: line_no,
                    message: "`S` line inside a block (missing blank separator)".into(),
                });
            }
            current = Some((Sentence::from_text(rest), Vec::new(), line_no));
        } else if let Some(rest) = line.strip_prefix("A ") {
            let Some((_, edits, _)) = current.as_mut() else {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    line: line_no,
                    message: "`A` line before any `S` line".into(),
                });
            };
            let (edit, annotator) = parse_edit_line(rest, origin, line_no)?;
            edits.push((annotator, edit, line_no));
        } else {
            return Err(Error::Parse {
                origin: origin.to_string(),
                line: line_no,
                message: format!("unrecognised line `{line}`"),
            });
        }
    }
    if let Some((source, edits, at)) = current.take() {
        blocks.push(finish_block(source, edits, origin, at)?);
    }
    Ok(blocks)
}

pub fn read_m2(path: &Path) -> Result<Vec<M2Block>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_m2(&text, &path.display().to_string())
}

/// Emits blocks in M² format. Annotators without edits get a `noop` line.
pub fn emit_m2(blocks: &[M2Block]) -> String {
    let mut out = String::new();
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "S {}", block.source);
        for ann in &block.annotations {
            if ann.edits.is_empty() {
                let _ = writeln!(out, "A -1 -1|||noop|||{NONE}|||REQUIRED|||{NONE}|||{}", ann.annotator);
                continue;
            }
            for e in &ann.edits {
                let correction = if e.edit.correction.is_empty() {
                    NONE.to_string()
                } else {
                    e.edit.correction.join(" ")
                };
                let _ = write!(
                    out,
                    "A {} {}|||{}|||{}|||{}|||{}|||{}",
                    e.edit.start, e.edit.end, e.kind, correction, e.required, e.comment, ann.annotator
                );
                for x in &e.extra {
                    let _ = write!(out, "|||{x}");
                }
                out.push('\n');
            }
        }
    }
    out
}
