//! Levenshtein alignment and system edit extraction.
//!
//! Edits are extracted from one minimal-cost token alignment. The raw edits
//! are then biased towards the gold annotation: neighbouring edits (and up to
//! `max_unchanged` unchanged tokens between or around them) are merged when
//! the merge reproduces a gold edit exactly, and single edits that strictly
//! contain a gold edit are split around it. Neither step can lose a gold
//! match, and the result always rebuilds the hypothesis.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::edit::{apply_edits, validate_edits, Edit, Sentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Match,
    Substitution,
    Insertion,
    Deletion,
}

/// One step of a token alignment. Spans are half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlignmentOp {
    pub kind: OpKind,
    pub src: (usize, usize),
    pub hyp: (usize, usize),
}

impl AlignmentOp {
    fn new(kind: OpKind, i: usize, j: usize) -> Self {
        let (sw, hw) = match kind {
            OpKind::Match | OpKind::Substitution => (1, 1),
            OpKind::Insertion => (0, 1),
            OpKind::Deletion => (1, 0),
        };
        Self {
            kind,
            src: (i, i + sw),
            hyp: (j, j + hw),
        }
    }
}

/// Minimal-cost alignment with unit substitution, insertion and deletion
/// costs. Backtracking from the end prefers match, then substitution, then
/// deletion, then insertion.
pub fn align(source: &Sentence, hypothesis: &Sentence) -> Vec<AlignmentOp> {
    align_tokens(source.tokens(), hypothesis.tokens())
}

fn align_tokens(src: &[String], hyp: &[String]) -> Vec<AlignmentOp> {
    let (n, m) = (src.len(), hyp.len());
    let w = m + 1;
    let mut cost = alloc::vec![0u32; (n + 1) * w];
    for (j, c) in cost.iter_mut().take(w).enumerate() {
        *c = j as u32;
    }
    for i in 1..=n {
        cost[i * w] = i as u32;
        for j in 1..=m {
            let diag = cost[(i - 1) * w + j - 1] + u32::from(src[i - 1] != hyp[j - 1]);
            let up = cost[(i - 1) * w + j] + 1;
            let left = cost[i * w + j - 1] + 1;
            cost[i * w + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * w + j];
        let kind = if i > 0 && j > 0 && src[i - 1] == hyp[j - 1] && here == cost[(i - 1) * w + j - 1]
        {
            OpKind::Match
        } else if i > 0 && j > 0 && here == cost[(i - 1) * w + j - 1] + 1 {
            OpKind::Substitution
        } else if i > 0 && here == cost[(i - 1) * w + j] + 1 {
            OpKind::Deletion
        } else {
            OpKind::Insertion
        };
        match kind {
            OpKind::Match | OpKind::Substitution => {
                i -= 1;
                j -= 1;
            }
            OpKind::Deletion => i -= 1,
            OpKind::Insertion => j -= 1,
        }
        ops.push(AlignmentOp::new(kind, i, j));
    }
    ops.reverse();
    ops
}

/// A run of the alignment: either one unchanged token or one edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    src: (usize, usize),
    hyp: (usize, usize),
    changed: bool,
}

impl Segment {
    fn edit(&self, hyp: &[String]) -> Edit {
        Edit {
            start: self.src.0,
            end: self.src.1,
            correction: hyp[self.hyp.0..self.hyp.1].to_vec(),
        }
    }

    fn is(&self, hyp: &[String], e: &Edit) -> bool {
        self.changed && self.src == (e.start, e.end) && hyp[self.hyp.0..self.hyp.1] == e.correction[..]
    }
}

fn segments(ops: &[AlignmentOp]) -> Vec<Segment> {
    let mut segs: Vec<Segment> = Vec::with_capacity(ops.len());
    for op in ops {
        if op.kind == OpKind::Match {
            segs.push(Segment {
                src: op.src,
                hyp: op.hyp,
                changed: false,
            });
            continue;
        }
        match segs.last_mut() {
            Some(last) if last.changed => {
                last.src.1 = op.src.1;
                last.hyp.1 = op.hyp.1;
            }
            _ => segs.push(Segment {
                src: op.src,
                hyp: op.hyp,
                changed: true,
            }),
        }
    }
    segs
}

fn edits_of(segs: &[Segment], hyp: &[String]) -> Vec<Edit> {
    segs.iter().filter(|s| s.changed).map(|s| s.edit(hyp)).collect()
}

/// Segments for the source span `src` aligned to the hypothesis span `hyp`:
/// nothing if both are empty, unchanged tokens if they are equal, otherwise
/// one edit.
fn part(src_tokens: &[String], hyp_tokens: &[String], src: (usize, usize), hyp: (usize, usize)) -> Vec<Segment> {
    if src.0 == src.1 && hyp.0 == hyp.1 {
        return Vec::new();
    }
    if src_tokens[src.0..src.1] == hyp_tokens[hyp.0..hyp.1] {
        return (0..src.1 - src.0)
            .map(|k| Segment {
                src: (src.0 + k, src.0 + k + 1),
                hyp: (hyp.0 + k, hyp.0 + k + 1),
                changed: false,
            })
            .collect();
    }
    alloc::vec![Segment { src, hyp, changed: true }]
}

struct Extractor<'a> {
    src: &'a [String],
    hyp: &'a [String],
    gold: &'a [Edit],
    max_unchanged: usize,
    segs: Vec<Segment>,
}

impl Extractor<'_> {
    fn matched(&self, seg: &Segment) -> bool {
        seg.changed && self.gold.binary_search(&seg.edit(self.hyp)).is_ok()
    }

    fn present(&self, g: &Edit) -> bool {
        self.segs.iter().any(|s| s.is(self.hyp, g))
    }

    fn boundary(&self, b: usize) -> (usize, usize) {
        match self.segs.get(b) {
            Some(s) => (s.src.0, s.hyp.0),
            None => (self.src.len(), self.hyp.len()),
        }
    }

    fn valid(&self, segs: &[Segment]) -> bool {
        validate_edits(self.src.len(), &edits_of(segs, self.hyp)).is_ok()
    }

    fn try_merge(&mut self, g: &Edit) -> bool {
        let count = self.segs.len();
        for b1 in 0..=count {
            let (s1, h1) = self.boundary(b1);
            if s1 < g.start {
                continue;
            }
            if s1 > g.start {
                break;
            }
            for b2 in b1 + 2..=count {
                let (s2, h2) = self.boundary(b2);
                if s2 > g.end {
                    break;
                }
                if s2 < g.end || self.hyp[h1..h2] != g.correction[..] {
                    continue;
                }
                let region = &self.segs[b1..b2];
                if !region.iter().any(|s| s.changed) || region.iter().any(|s| self.matched(s)) {
                    continue;
                }
                let longest_run = region
                    .split(|s| s.changed)
                    .map(<[Segment]>::len)
                    .max()
                    .unwrap_or(0);
                if longest_run > self.max_unchanged {
                    continue;
                }
                let mut next = Vec::with_capacity(count);
                next.extend_from_slice(&self.segs[..b1]);
                next.push(Segment {
                    src: (s1, s2),
                    hyp: (h1, h2),
                    changed: true,
                });
                next.extend_from_slice(&self.segs[b2..]);
                if self.valid(&next) {
                    self.segs = next;
                    return true;
                }
            }
        }
        false
    }

    fn try_split(&mut self, g: &Edit) -> bool {
        for idx in 0..self.segs.len() {
            let seg = self.segs[idx];
            if !seg.changed || seg.src.0 > g.start || g.end > seg.src.1 || self.matched(&seg) {
                continue;
            }
            let (h0, h1) = seg.hyp;
            let width = g.correction.len();
            if width > h1 - h0 {
                continue;
            }
            for k in h0..=h1 - width {
                if self.hyp[k..k + width] != g.correction[..] {
                    continue;
                }
                let mut replacement = part(self.src, self.hyp, (seg.src.0, g.start), (h0, k));
                replacement.push(Segment {
                    src: (g.start, g.end),
                    hyp: (k, k + width),
                    changed: true,
                });
                replacement.extend(part(self.src, self.hyp, (g.end, seg.src.1), (k + width, h1)));
                let mut next = Vec::with_capacity(self.segs.len() + replacement.len());
                next.extend_from_slice(&self.segs[..idx]);
                next.extend(replacement);
                next.extend_from_slice(&self.segs[idx + 1..]);
                if self.valid(&next) {
                    self.segs = next;
                    return true;
                }
            }
        }
        false
    }
}

/// Extracts the system edit set of `hypothesis` relative to `source`,
/// choosing the segmentation that matches as many `gold` edits as possible.
///
/// `gold` may be empty. Gold edits that change nothing are ignored.
pub fn extract_edits(
    source: &Sentence,
    hypothesis: &Sentence,
    gold: &[Edit],
    max_unchanged: usize,
) -> Result<Vec<Edit>> {
    let (src, hyp) = (source.tokens(), hypothesis.tokens());
    let mut sorted_gold = gold.to_vec();
    sorted_gold.sort();
    sorted_gold.dedup();
    let mut ex = Extractor {
        src,
        hyp,
        gold: &sorted_gold,
        max_unchanged,
        segs: segments(&align_tokens(src, hyp)),
    };

    let pending: Vec<&Edit> = sorted_gold
        .iter()
        .filter(|g| g.end <= src.len() && src[g.start..g.end] != g.correction[..])
        .collect();
    for g in &pending {
        if !ex.present(g) {
            ex.try_merge(g);
        }
    }
    for g in &pending {
        if !ex.present(g) {
            ex.try_split(g);
        }
    }

    let edits = edits_of(&ex.segs, hyp);
    match apply_edits(source, &edits) {
        Ok(rebuilt) if rebuilt == *hypothesis => Ok(edits),
        _ => Err(Error::Reconstruction {
            hypothesis: hypothesis.text(),
        }),
    }
}

/// Union and intersection of two edit sets, both sorted.
pub fn edit_set_ops(system: &[Edit], gold: &[Edit]) -> (Vec<Edit>, Vec<Edit>) {
    let e: BTreeSet<&Edit> = system.iter().collect();
    let g: BTreeSet<&Edit> = gold.iter().collect();
    let union = e.union(&g).map(|x| (*x).clone()).collect();
    let inter = e.intersection(&g).map(|x| (*x).clone()).collect();
    (union, inter)
}
