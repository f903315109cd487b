//! Hypotheses over document prefixes: chunk segmentation, entity/mention
//! typing, and the coreference partition built so far.
//!
//! Hypotheses are immutable and persistent: applying a decision allocates a
//! new hypothesis holding only the chunks added by that step plus a parent
//! link, and chains are copied on extension. Successor enumeration never
//! mutates the parent, so concurrent read-only traversal is safe.

use crate::document::{AnnotatedMention, Annotation};
use crate::types::{MentionType, Span};
use std::sync::Arc;

/// Label of one chunk: not-an-entity, or a typed mention in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkLabel {
    Nae,
    Mention {
        entity_type: u8,
        subtype: Option<u8>,
        mention_type: MentionType,
        chain: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub span: Span,
    pub label: ChunkLabel,
}

/// Chain membership choice of a mention decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkChoice {
    NewChain,
    Existing(usize),
}

/// One search operator: consume `length` tokens as NAE (length 1 only) or
/// as a typed mention linked into the chain structure. All parts of the
/// decision are applied simultaneously.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MentionDecision {
    pub length: usize,
    pub kind: DecisionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Nae,
    Mention {
        entity_type: u8,
        subtype: Option<u8>,
        mention_type: MentionType,
        link: LinkChoice,
    },
}

impl MentionDecision {
    pub fn nae() -> Self {
        MentionDecision {
            length: 1,
            kind: DecisionKind::Nae,
        }
    }
}

/// A mention as recorded inside a chain, with the metadata linkage needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainMention {
    pub span: Span,
    pub entity_type: u8,
    pub subtype: Option<u8>,
    pub mention_type: MentionType,
    /// Global mention index within the hypothesis (0-based, in order).
    pub index: u32,
}

/// An ordered coreference chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub mentions: Vec<ChainMention>,
}

impl Chain {
    pub fn first(&self) -> &ChainMention {
        &self.mentions[0]
    }

    pub fn last(&self) -> &ChainMention {
        self.mentions.last().expect("chains are never empty")
    }

    pub fn len(&self) -> usize {
        self.mentions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }

    /// Entity type of the chain (its first mention's type).
    pub fn entity_type(&self) -> u8 {
        self.first().entity_type
    }

    pub fn subtype(&self) -> Option<u8> {
        self.first().subtype
    }
}

#[derive(Debug)]
pub struct Hypothesis {
    parent: Option<Arc<Hypothesis>>,
    /// Chunks appended by the last decision (a decision may also consume
    /// surrounding NAE runs in the fixed-mention search space).
    step_chunks: Vec<Chunk>,
    /// The decision that produced this hypothesis (None at the root).
    pub decision: Option<MentionDecision>,
    covered: usize,
    depth: u32,
    doc_len: usize,
    chains: Vec<Arc<Chain>>,
    mention_count: u32,
}

impl Hypothesis {
    pub fn initial(doc_len: usize) -> Arc<Hypothesis> {
        Arc::new(Hypothesis {
            parent: None,
            step_chunks: Vec::new(),
            decision: None,
            covered: 0,
            depth: 0,
            doc_len,
            chains: Vec::new(),
            mention_count: 0,
        })
    }

    /// Root hypothesis with `upto` leading tokens pre-consumed as NAE
    /// (fixed-mention decoding skips over non-mention stretches).
    pub fn initial_with_leading_nae(doc_len: usize, upto: usize) -> Arc<Hypothesis> {
        Arc::new(Hypothesis {
            parent: None,
            step_chunks: (0..upto)
                .map(|i| Chunk {
                    span: Span::new(i, i + 1),
                    label: ChunkLabel::Nae,
                })
                .collect(),
            decision: None,
            covered: upto,
            depth: 0,
            doc_len,
            chains: Vec::new(),
            mention_count: 0,
        })
    }

    pub fn covered(&self) -> usize {
        self.covered
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn doc_len(&self) -> usize {
        self.doc_len
    }

    pub fn is_goal(&self) -> bool {
        self.covered == self.doc_len
    }

    pub fn parent(&self) -> Option<&Arc<Hypothesis>> {
        self.parent.as_ref()
    }

    pub fn chains(&self) -> &[Arc<Chain>] {
        &self.chains
    }

    pub fn entity_count(&self) -> usize {
        self.chains.len()
    }

    pub fn mention_count(&self) -> u32 {
        self.mention_count
    }

    /// Applies a decision, consuming the decision span plus `trailing_nae`
    /// single-token NAE chunks after it.
    pub fn apply(self: &Arc<Self>, decision: MentionDecision, trailing_nae: usize) -> Arc<Hypothesis> {
        let start = self.covered;
        debug_assert!(decision.length >= 1);
        debug_assert!(start + decision.length + trailing_nae <= self.doc_len);
        let mut step_chunks = Vec::with_capacity(1 + trailing_nae);
        let mut chains = self.chains.clone();
        let mut mention_count = self.mention_count;
        match decision.kind {
            DecisionKind::Nae => {
                debug_assert_eq!(decision.length, 1, "NAE chunks are single tokens");
                step_chunks.push(Chunk {
                    span: Span::new(start, start + 1),
                    label: ChunkLabel::Nae,
                });
            }
            DecisionKind::Mention {
                entity_type,
                subtype,
                mention_type,
                link,
            } => {
                let span = Span::new(start, start + decision.length);
                let mention = ChainMention {
                    span,
                    entity_type,
                    subtype,
                    mention_type,
                    index: mention_count,
                };
                let chain = match link {
                    LinkChoice::NewChain => {
                        chains.push(Arc::new(Chain {
                            mentions: vec![mention],
                        }));
                        chains.len() - 1
                    }
                    LinkChoice::Existing(c) => {
                        let mut extended = (*chains[c]).clone();
                        extended.mentions.push(mention);
                        chains[c] = Arc::new(extended);
                        c
                    }
                };
                mention_count += 1;
                step_chunks.push(Chunk {
                    span,
                    label: ChunkLabel::Mention {
                        entity_type,
                        subtype,
                        mention_type,
                        chain,
                    },
                });
            }
        }
        let mut covered = start + decision.length;
        for _ in 0..trailing_nae {
            step_chunks.push(Chunk {
                span: Span::new(covered, covered + 1),
                label: ChunkLabel::Nae,
            });
            covered += 1;
        }
        Arc::new(Hypothesis {
            parent: Some(Arc::clone(self)),
            step_chunks,
            decision: Some(decision),
            covered,
            depth: self.depth + 1,
            doc_len: self.doc_len,
            chains,
            mention_count,
        })
    }

    /// All chunks in document order.
    pub fn chunks(&self) -> Vec<Chunk> {
        let mut out = Vec::new();
        let mut cur: Option<&Hypothesis> = Some(self);
        while let Some(h) = cur {
            out.extend(h.step_chunks.iter().rev().copied());
            cur = h.parent.as_deref();
        }
        out.reverse();
        out
    }

    /// Chunks of the last step only.
    pub fn step_chunks(&self) -> &[Chunk] {
        &self.step_chunks
    }

    /// Walks chunks backwards (most recent first).
    pub fn chunks_rev(&self) -> impl Iterator<Item = Chunk> + '_ {
        ChunkRevIter {
            hyp: Some(self),
            idx: self.step_chunks.len(),
        }
    }

    /// The labels of the `k` most recent chunks, most recent first.
    pub fn recent_labels(&self, k: usize) -> Vec<ChunkLabel> {
        self.chunks_rev().take(k).map(|c| c.label).collect()
    }

    /// All mentions so far in document order, with their chain index.
    pub fn mentions_in_order(&self) -> Vec<(ChainMention, usize)> {
        let mut out: Vec<(ChainMention, usize)> = Vec::with_capacity(self.mention_count as usize);
        for (ci, chain) in self.chains.iter().enumerate() {
            for m in &chain.mentions {
                out.push((*m, ci));
            }
        }
        out.sort_by_key(|(m, _)| m.index);
        out
    }

    /// The most recent mention (any chain), if one exists.
    pub fn last_mention(&self) -> Option<(ChainMention, usize)> {
        self.chains
            .iter()
            .enumerate()
            .filter_map(|(ci, c)| c.mentions.last().map(|m| (*m, ci)))
            .max_by_key(|(m, _)| m.index)
    }

    /// Complete labeling of a goal hypothesis.
    pub fn annotation(&self) -> crate::error::Result<Annotation> {
        if !self.is_goal() {
            return Err(crate::error::EdtError::Contract(
                "annotation requested from a non-goal hypothesis".into(),
            ));
        }
        let mentions = self
            .chunks()
            .into_iter()
            .filter_map(|c| match c.label {
                ChunkLabel::Nae => None,
                ChunkLabel::Mention {
                    entity_type,
                    subtype,
                    mention_type,
                    chain,
                } => Some(AnnotatedMention {
                    span: c.span,
                    entity_type,
                    subtype,
                    mention_type,
                    chain,
                }),
            })
            .collect();
        Ok(Annotation { mentions })
    }

    /// Structural equality of the labelings (chunks and chain partition).
    pub fn same_labeling(&self, other: &Hypothesis) -> bool {
        if self.covered != other.covered
            || self.mention_count != other.mention_count
            || self.chains.len() != other.chains.len()
        {
            return false;
        }
        let a = self.chunks();
        let b = other.chunks();
        a == b
    }
}

struct ChunkRevIter<'a> {
    hyp: Option<&'a Hypothesis>,
    idx: usize,
}

impl<'a> Iterator for ChunkRevIter<'a> {
    type Item = Chunk;

    fn next(&mut self) -> Option<Chunk> {
        loop {
            let h = self.hyp?;
            if self.idx > 0 {
                self.idx -= 1;
                return Some(h.step_chunks[self.idx]);
            }
            self.hyp = h.parent.as_deref();
            self.idx = self.hyp.map(|p| p.step_chunks.len()).unwrap_or(0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mention(etype: u8, mtype: MentionType, link: LinkChoice, len: usize) -> MentionDecision {
        MentionDecision {
            length: len,
            kind: DecisionKind::Mention {
                entity_type: etype,
                subtype: None,
                mention_type: mtype,
                link,
            },
        }
    }

    #[test]
    fn apply_tiles_tokens_without_gaps() {
        let h0 = Hypothesis::initial(5);
        let h1 = h0.apply(mention(0, MentionType::Name, LinkChoice::NewChain, 2), 0);
        let h2 = h1.apply(MentionDecision::nae(), 0);
        let h3 = h2.apply(mention(1, MentionType::Pronoun, LinkChoice::NewChain, 1), 1);
        assert!(h3.is_goal());
        let chunks = h3.chunks();
        assert_eq!(chunks.len(), 4);
        let mut pos = 0;
        for c in &chunks {
            assert_eq!(c.span.start, pos);
            pos = c.span.end;
        }
        assert_eq!(pos, 5);
        assert_eq!(h3.depth(), 3);
    }

    #[test]
    fn chains_are_persistent_across_successors() {
        let h0 = Hypothesis::initial(4);
        let h1 = h0.apply(mention(0, MentionType::Name, LinkChoice::NewChain, 1), 0);
        // two different continuations of h1
        let h2a = h1.apply(mention(0, MentionType::Pronoun, LinkChoice::Existing(0), 1), 0);
        let h2b = h1.apply(mention(1, MentionType::Name, LinkChoice::NewChain, 1), 0);
        assert_eq!(h1.chains().len(), 1);
        assert_eq!(h1.chains()[0].len(), 1);
        assert_eq!(h2a.chains()[0].len(), 2);
        assert_eq!(h2b.chains().len(), 2);
        // parent untouched
        assert_eq!(h1.chains()[0].len(), 1);
    }

    #[test]
    fn mention_order_and_chain_ids_are_first_mention_ordered() {
        let h0 = Hypothesis::initial(6);
        let h1 = h0.apply(mention(0, MentionType::Name, LinkChoice::NewChain, 1), 0);
        let h2 = h1.apply(mention(1, MentionType::Name, LinkChoice::NewChain, 1), 0);
        let h3 = h2.apply(mention(0, MentionType::Pronoun, LinkChoice::Existing(0), 1), 0);
        let ms = h3.mentions_in_order();
        assert_eq!(ms.len(), 3);
        assert_eq!(ms[0].1, 0);
        assert_eq!(ms[1].1, 1);
        assert_eq!(ms[2].1, 0);
        assert_eq!(h3.last_mention().unwrap().0.index, 2);
    }

    #[test]
    fn annotation_requires_goal() {
        let h0 = Hypothesis::initial(2);
        let h1 = h0.apply(MentionDecision::nae(), 0);
        assert!(h1.annotation().is_err());
        let h2 = h1.apply(MentionDecision::nae(), 0);
        let ann = h2.annotation().unwrap();
        assert!(ann.mentions.is_empty());
    }
}
