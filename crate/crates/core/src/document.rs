//! Input documents, gold annotations, and the annotation view shared by
//! the search space, the scorer and prediction output.

use crate::error::{EdtError, Result};
use crate::types::{MentionType, Span, TypeInventory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub pos: Option<String>,
    pub chunk: Option<String>,
}

/// A gold mention as loaded from an annotated corpus, with entity and
/// mention types already resolved against the configured inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldMention {
    pub span: Span,
    pub entity_type: u8,
    pub subtype: Option<u8>,
    pub mention_type: MentionType,
    pub entity_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<Token>,
    /// Indices of tokens that start a new sentence (never 0).
    pub sentence_breaks: Vec<usize>,
    /// Gold mentions sorted by start, pairwise non-overlapping.
    pub gold: Option<Vec<GoldMention>>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn form(&self, i: usize) -> &str {
        &self.tokens[i].form
    }

    /// Sentence index containing token `i`.
    pub fn sentence_of(&self, i: usize) -> usize {
        self.sentence_breaks.iter().filter(|&&b| b <= i).count()
    }

    /// Number of sentence boundaries strictly inside `(from, to)`.
    pub fn sentence_breaks_between(&self, from: usize, to: usize) -> usize {
        self.sentence_breaks
            .iter()
            .filter(|&&b| b > from && b <= to)
            .count()
    }

    /// The canonical gold annotation: entity-id strings mapped to dense
    /// chain indices in first-mention order.
    pub fn gold_annotation(&self) -> Option<Annotation> {
        let gold = self.gold.as_ref()?;
        Some(Annotation::from_mentions(
            gold.iter().map(|m| AnnotatedMention {
                span: m.span,
                entity_type: m.entity_type,
                subtype: m.subtype,
                mention_type: m.mention_type,
                chain: 0, // assigned below
            }),
            gold.iter().map(|m| m.entity_id.as_str()),
        ))
    }
}

/// A mention in a complete document labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotatedMention {
    pub span: Span,
    pub entity_type: u8,
    pub subtype: Option<u8>,
    pub mention_type: MentionType,
    /// Dense chain index, 0-based in first-mention order.
    pub chain: usize,
}

/// A complete labeling of a document: mentions (sorted by span start) and
/// their partition into coreference chains.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Annotation {
    pub mentions: Vec<AnnotatedMention>,
}

impl Annotation {
    fn from_mentions<'a>(
        mentions: impl Iterator<Item = AnnotatedMention>,
        entity_ids: impl Iterator<Item = &'a str>,
    ) -> Annotation {
        let mut out: Vec<AnnotatedMention> = mentions.collect();
        let ids: Vec<&str> = entity_ids.collect();
        let mut chain_of_id: Vec<(&str, usize)> = Vec::new();
        for (m, id) in out.iter_mut().zip(ids) {
            let chain = match chain_of_id.iter().find(|(s, _)| *s == id) {
                Some((_, c)) => *c,
                None => {
                    let c = chain_of_id.len();
                    chain_of_id.push((id, c));
                    c
                }
            };
            m.chain = chain;
        }
        Annotation { mentions: out }
    }

    pub fn chain_count(&self) -> usize {
        self.mentions.iter().map(|m| m.chain + 1).max().unwrap_or(0)
    }

    /// Chains as lists of mention indices.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let mut chains = vec![Vec::new(); self.chain_count()];
        for (i, m) in self.mentions.iter().enumerate() {
            chains[m.chain].push(i);
        }
        chains
    }

    /// Re-assigns chain indices densely in first-mention order.
    pub fn densify(&mut self) {
        let mut remap: Vec<Option<usize>> = vec![None; self.chain_count()];
        let mut next = 0;
        for m in &mut self.mentions {
            let c = match remap[m.chain] {
                Some(c) => c,
                None => {
                    let c = next;
                    remap[m.chain] = Some(c);
                    next += 1;
                    c
                }
            };
            m.chain = c;
        }
    }

    /// Partition equality irrespective of chain labels.
    pub fn same_partition(&self, other: &Annotation) -> bool {
        if self.mentions.len() != other.mentions.len() {
            return false;
        }
        for i in 0..self.mentions.len() {
            for j in (i + 1)..self.mentions.len() {
                let a = self.mentions[i].chain == self.mentions[j].chain;
                let b = other.mentions[i].chain == other.mentions[j].chain;
                if a != b {
                    return false;
                }
            }
        }
        true
    }
}

/// On-disk record: one JSON document per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentences: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentions: Vec<RawMention>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawMention {
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<String>,
    pub mention_type: String,
    pub entity_id: String,
}

impl RawDocument {
    pub fn into_document(self, inventory: &TypeInventory) -> Result<Document> {
        let doc_id = self.id.clone();
        let n = self.tokens.len();
        let err = |message: String| EdtError::corpus(&doc_id, message);

        if let Some(pos) = &self.pos {
            if pos.len() != n {
                return Err(err(format!("pos has {} entries for {} tokens", pos.len(), n)));
            }
        }
        if let Some(chunk) = &self.chunk {
            if chunk.len() != n {
                return Err(err(format!(
                    "chunk has {} entries for {} tokens",
                    chunk.len(),
                    n
                )));
            }
        }
        let mut last = 0usize;
        for &b in &self.sentences {
            if b == 0 || b >= n {
                return Err(err(format!("sentence break {b} out of bounds")));
            }
            if b <= last {
                return Err(err("sentence breaks must be strictly increasing".into()));
            }
            last = b;
        }

        let tokens: Vec<Token> = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, form)| Token {
                form: form.clone(),
                pos: self.pos.as_ref().map(|p| p[i].clone()),
                chunk: self.chunk.as_ref().map(|c| c[i].clone()),
            })
            .collect();

        let gold = if self.mentions.is_empty() {
            None
        } else {
            let mut mentions = Vec::with_capacity(self.mentions.len());
            for m in &self.mentions {
                if m.end <= m.start {
                    return Err(err(format!("mention [{}, {}) is empty", m.start, m.end)));
                }
                if m.end > n {
                    return Err(err(format!("mention [{}, {}) exceeds document length {n}", m.start, m.end)));
                }
                if m.entity_id.is_empty() {
                    return Err(err(format!("mention at {} has empty entity_id", m.start)));
                }
                let entity_type = inventory
                    .entity_type(&m.entity_type)
                    .map_err(|_| err(format!("unknown entity type `{}`", m.entity_type)))?;
                let subtype = match &m.subtype {
                    None => None,
                    Some(s) => Some(inventory.subtype(entity_type, s).ok_or_else(|| {
                        err(format!("unknown subtype `{s}` for `{}`", m.entity_type))
                    })?),
                };
                let mention_type = MentionType::parse(&m.mention_type)
                    .map_err(|_| err(format!("unknown mention type `{}`", m.mention_type)))?;
                mentions.push(GoldMention {
                    span: Span::new(m.start, m.end),
                    entity_type,
                    subtype,
                    mention_type,
                    entity_id: m.entity_id.clone(),
                });
            }
            mentions.sort_by_key(|m| m.span.start);
            for pair in mentions.windows(2) {
                if pair[1].span.start < pair[0].span.end {
                    return Err(err(format!(
                        "overlapping mentions [{}, {}) and [{}, {})",
                        pair[0].span.start, pair[0].span.end, pair[1].span.start, pair[1].span.end
                    )));
                }
            }
            Some(mentions)
        };

        Ok(Document {
            id: self.id,
            tokens,
            sentence_breaks: self.sentences,
            gold,
        })
    }

    pub fn from_document(doc: &Document, annotation: &Annotation, inventory: &TypeInventory) -> RawDocument {
        let mut ann = annotation.clone();
        ann.densify();
        RawDocument {
            id: doc.id.clone(),
            tokens: doc.tokens.iter().map(|t| t.form.clone()).collect(),
            pos: doc.tokens.first().and_then(|t| t.pos.as_ref()).map(|_| {
                doc.tokens
                    .iter()
                    .map(|t| t.pos.clone().unwrap_or_default())
                    .collect()
            }),
            chunk: doc.tokens.first().and_then(|t| t.chunk.as_ref()).map(|_| {
                doc.tokens
                    .iter()
                    .map(|t| t.chunk.clone().unwrap_or_default())
                    .collect()
            }),
            sentences: doc.sentence_breaks.clone(),
            mentions: ann
                .mentions
                .iter()
                .map(|m| RawMention {
                    start: m.span.start,
                    end: m.span.end,
                    entity_type: inventory.entity_type_name(m.entity_type).to_string(),
                    subtype: m
                        .subtype
                        .map(|s| inventory.subtype_name(m.entity_type, s).to_string()),
                    mention_type: m.mention_type.as_str().into(),
                    entity_id: format!("E{}", m.chain),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gold_annotation_densifies_chain_ids() {
        let inv = TypeInventory::ace2004();
        let raw = RawDocument {
            id: "d".into(),
            tokens: vec!["a".into(), "b".into(), "c".into()],
            pos: None,
            chunk: None,
            sentences: vec![],
            mentions: vec![
                RawMention {
                    start: 0,
                    end: 1,
                    entity_type: "PER".into(),
                    subtype: None,
                    mention_type: "NAM".into(),
                    entity_id: "zebra".into(),
                },
                RawMention {
                    start: 2,
                    end: 3,
                    entity_type: "PER".into(),
                    subtype: None,
                    mention_type: "PRO".into(),
                    entity_id: "zebra".into(),
                },
            ],
        };
        let doc = raw.into_document(&inv).unwrap();
        let ann = doc.gold_annotation().unwrap();
        assert_eq!(ann.mentions[0].chain, 0);
        assert_eq!(ann.mentions[1].chain, 0);
        assert_eq!(ann.chain_count(), 1);
    }

    #[test]
    fn overlapping_mentions_rejected() {
        let inv = TypeInventory::ace2004();
        let raw = RawDocument {
            id: "d".into(),
            tokens: vec!["a".into(), "b".into(), "c".into()],
            pos: None,
            chunk: None,
            sentences: vec![],
            mentions: vec![
                RawMention {
                    start: 0,
                    end: 2,
                    entity_type: "PER".into(),
                    subtype: None,
                    mention_type: "NAM".into(),
                    entity_id: "x".into(),
                },
                RawMention {
                    start: 1,
                    end: 3,
                    entity_type: "PER".into(),
                    subtype: None,
                    mention_type: "NAM".into(),
                    entity_id: "y".into(),
                },
            ],
        };
        assert!(raw.into_document(&inv).is_err());
    }

    #[test]
    fn partition_comparison_is_label_invariant() {
        let m = |chain: usize| AnnotatedMention {
            span: Span::new(chain * 2, chain * 2 + 1),
            entity_type: 0,
            subtype: None,
            mention_type: MentionType::Name,
            chain,
        };
        let a = Annotation {
            mentions: vec![m(0), m(1), m(0)],
        };
        let b = Annotation {
            mentions: vec![m(1), m(0), m(1)],
        };
        assert!(a.same_partition(&b));
        let c = Annotation {
            mentions: vec![m(0), m(0), m(1)],
        };
        assert!(!a.same_partition(&c));
    }
}
