//! Base and decision feature extraction.
//!
//! Base features are extracted in three groups: detection features of the
//! current chunk ([`detect`]), pairwise features between the current chunk
//! and an antecedent mention ([`pair`]), and count features of the
//! hypothesis state ([`count`]). Decision features describe the candidate
//! decision itself. The model's features are the cross products
//! base × decision built through the registry.
//!
//! Every extractor is a pure function of the document, the hypothesis
//! prefix and the loaded resources, and reads no token beyond the covered
//! prefix except the fixed ±3 boundary window.

pub mod count;
pub mod detect;
pub mod pair;
pub mod strings;

use crate::document::Document;
use crate::hypothesis::{Chain, ChainMention, ChunkLabel, Hypothesis};
use crate::linkage::{select_link_targets, Aggregation, LinkageType};
use crate::registry::{
    BaseFeatures, DecFeatures, DecKey, DecLabel, FeatureClass, FeatureRegistry, WordTable,
};
use crate::resources::{is_pronoun, ResourceBundle};
use crate::sparse::WeightVector;
use crate::types::{MentionType, MentionTypeCode, Span, TypeInventory};

pub use count::decayed_density;

/// Document view with per-token derived data precomputed once per search.
#[derive(Debug)]
pub struct PreparedDoc<'d> {
    pub doc: &'d Document,
    /// Lowercased token forms.
    pub lower: Vec<String>,
    /// Interned word ids (None for forms unseen by the model).
    pub word_ids: Vec<Option<u32>>,
    pub is_pro: Vec<bool>,
    pub has_pos: bool,
    pub has_chunk: bool,
}

impl<'d> PreparedDoc<'d> {
    /// Preparation during training setup: token forms are interned.
    pub fn build_interning(doc: &'d Document, words: &mut WordTable) -> Self {
        let lower: Vec<String> = doc.tokens.iter().map(|t| t.form.to_lowercase()).collect();
        let word_ids = lower.iter().map(|w| Some(words.intern(w))).collect();
        PreparedDoc::finish(doc, lower, word_ids)
    }

    /// Preparation against a frozen word table (decode time).
    pub fn build(doc: &'d Document, words: &WordTable) -> Self {
        let lower: Vec<String> = doc.tokens.iter().map(|t| t.form.to_lowercase()).collect();
        let word_ids = lower.iter().map(|w| words.get(w)).collect();
        PreparedDoc::finish(doc, lower, word_ids)
    }

    fn finish(doc: &'d Document, lower: Vec<String>, word_ids: Vec<Option<u32>>) -> Self {
        let is_pro = lower.iter().map(|w| is_pronoun(w)).collect();
        PreparedDoc {
            has_pos: doc.tokens.iter().all(|t| t.pos.is_some()) && !doc.tokens.is_empty(),
            has_chunk: doc.tokens.iter().all(|t| t.chunk.is_some()) && !doc.tokens.is_empty(),
            doc,
            lower,
            word_ids,
            is_pro,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Head word of a span (its final token, lowercased).
    pub fn head(&self, span: Span) -> &str {
        &self.lower[span.end - 1]
    }

    /// Lowercased forms joined by single spaces.
    pub fn joined(&self, span: Span) -> String {
        self.lower[span.start..span.end].join(" ")
    }

    pub fn orig_words(&self, span: Span) -> Vec<&str> {
        (span.start..span.end).map(|i| self.doc.form(i)).collect()
    }

    pub fn pos(&self, i: usize) -> Option<&str> {
        self.doc.tokens[i].pos.as_deref()
    }

    pub fn chunk_tag(&self, i: usize) -> Option<&str> {
        self.doc.tokens[i].chunk.as_deref()
    }

    /// Is the span a single pronoun token.
    pub fn span_is_pronoun(&self, span: Span) -> bool {
        span.len() == 1 && self.is_pro[span.start]
    }
}

/// Sink for base features; implementations intern, look up, or collect
/// rendered names.
pub trait BaseSink {
    fn emit(&mut self, class: FeatureClass, name: std::fmt::Arguments<'_>, value: f64);
}

/// Interning sink used by the counting pass.
pub struct BuildingBaseSink<'r> {
    pub registry: &'r mut FeatureRegistry,
    pub out: BaseFeatures,
    scratch: String,
}

impl<'r> BuildingBaseSink<'r> {
    pub fn new(registry: &'r mut FeatureRegistry) -> Self {
        BuildingBaseSink {
            registry,
            out: BaseFeatures::default(),
            scratch: String::with_capacity(64),
        }
    }
}

impl BaseSink for BuildingBaseSink<'_> {
    fn emit(&mut self, class: FeatureClass, name: std::fmt::Arguments<'_>, value: f64) {
        use std::fmt::Write;
        self.scratch.clear();
        self.scratch.write_fmt(name).expect("formatting into a String");
        let id = self.registry.intern_base(class, &self.scratch);
        self.out.items.push((id, value));
    }
}

/// Read-only sink used at search time; unseen names are skipped.
pub struct FrozenBaseSink<'r> {
    pub registry: &'r FeatureRegistry,
    pub out: BaseFeatures,
    scratch: String,
}

impl<'r> FrozenBaseSink<'r> {
    pub fn new(registry: &'r FeatureRegistry) -> Self {
        FrozenBaseSink {
            registry,
            out: BaseFeatures::default(),
            scratch: String::with_capacity(64),
        }
    }

    pub fn reset(&mut self) {
        self.out.items.clear();
    }
}

impl BaseSink for FrozenBaseSink<'_> {
    fn emit(&mut self, class: FeatureClass, name: std::fmt::Arguments<'_>, value: f64) {
        use std::fmt::Write;
        self.scratch.clear();
        self.scratch.write_fmt(name).expect("formatting into a String");
        if let Some(id) = self.registry.lookup_base(class, &self.scratch) {
            self.out.items.push((id, value));
        }
    }
}

/// Collecting sink for tests and debugging.
#[derive(Default)]
pub struct NamedBaseSink {
    pub out: Vec<(FeatureClass, String, f64)>,
}

impl BaseSink for NamedBaseSink {
    fn emit(&mut self, class: FeatureClass, name: std::fmt::Arguments<'_>, value: f64) {
        self.out.push((class, name.to_string(), value));
    }
}

/// Sink for decision features (structured keys, no string building).
pub trait DecSink {
    fn emit(&mut self, key: DecKey, value: f64);
}

pub struct BuildingDecSink<'r> {
    pub registry: &'r mut FeatureRegistry,
    pub out: DecFeatures,
}

impl<'r> BuildingDecSink<'r> {
    pub fn new(registry: &'r mut FeatureRegistry) -> Self {
        BuildingDecSink {
            registry,
            out: DecFeatures::default(),
        }
    }
}

impl DecSink for BuildingDecSink<'_> {
    fn emit(&mut self, key: DecKey, value: f64) {
        let id = self.registry.intern_dec(key);
        self.out.items.push((id, value));
    }
}

pub struct FrozenDecSink<'r> {
    pub registry: &'r FeatureRegistry,
    pub out: DecFeatures,
}

impl<'r> FrozenDecSink<'r> {
    pub fn new(registry: &'r FeatureRegistry) -> Self {
        FrozenDecSink {
            registry,
            out: DecFeatures::default(),
        }
    }

    pub fn reset(&mut self) {
        self.out.items.clear();
    }
}

impl DecSink for FrozenDecSink<'_> {
    fn emit(&mut self, key: DecKey, value: f64) {
        if let Some(id) = self.registry.lookup_dec(&key) {
            self.out.items.push((id, value));
        }
    }
}

#[derive(Default)]
pub struct NamedDecSink {
    pub out: Vec<(DecKey, f64)>,
}

impl DecSink for NamedDecSink {
    fn emit(&mut self, key: DecKey, value: f64) {
        self.out.push((key, value));
    }
}

/// Mode-derived extraction switches.
#[derive(Debug, Clone, Copy)]
pub struct ModeSwitches {
    /// The search makes segmentation/typing decisions (joint or
    /// detection-only): history features and boundary decision features on.
    pub detection_decisions: bool,
    /// The search makes chain decisions (joint or coreference-only):
    /// pair features, count features, coreference decision features on.
    pub chain_decisions: bool,
    /// Observed mention type of pronouns is hidden (gold-mention
    /// coreference protocol).
    pub hide_pronoun_mtype: bool,
}

impl ModeSwitches {
    pub fn joint() -> Self {
        ModeSwitches {
            detection_decisions: true,
            chain_decisions: true,
            hide_pronoun_mtype: false,
        }
    }

    pub fn detect_only() -> Self {
        ModeSwitches {
            detection_decisions: true,
            chain_decisions: false,
            hide_pronoun_mtype: false,
        }
    }

    pub fn link_only(hide_pronoun_mtype: bool) -> Self {
        ModeSwitches {
            detection_decisions: false,
            chain_decisions: true,
            hide_pronoun_mtype,
        }
    }
}

/// Everything the extractors need apart from the registry sinks.
pub struct ExtractEnv<'a> {
    pub classes: crate::registry::ClassSet,
    pub linkage: LinkageType,
    pub switches: ModeSwitches,
    pub inventory: &'a TypeInventory,
    pub resources: &'a ResourceBundle,
    /// Boundary/context window in tokens (fixed at 3).
    pub window: usize,
}

impl<'a> ExtractEnv<'a> {
    pub fn new(
        classes: crate::registry::ClassSet,
        linkage: LinkageType,
        switches: ModeSwitches,
        inventory: &'a TypeInventory,
        resources: &'a ResourceBundle,
    ) -> Self {
        ExtractEnv {
            classes,
            linkage,
            switches,
            inventory,
            resources,
            window: 3,
        }
    }

    pub fn on(&self, class: FeatureClass) -> bool {
        self.classes.contains(class)
    }

    /// Observed mention type under the current protocol.
    pub fn observed(&self, m: MentionType) -> MentionTypeCode {
        if self.switches.hide_pronoun_mtype && m == MentionType::Pronoun {
            MentionTypeCode::Unk
        } else {
            m.code()
        }
    }

    /// Mention type used to dispatch the intelligent link. When the true
    /// type is hidden, pronouns are still recognizable from their closed-
    /// class surface form.
    pub fn dispatch_mtype(&self, m: MentionType, prep: &PreparedDoc, span: Span) -> MentionType {
        if self.switches.hide_pronoun_mtype && m == MentionType::Pronoun && !prep.span_is_pronoun(span)
        {
            // hidden and not surface-recognizable: treat as nominal
            MentionType::Nominal
        } else {
            m
        }
    }

    fn observed_label(&self, label: ChunkLabel) -> DecLabel {
        match label {
            ChunkLabel::Nae => DecLabel::Nae,
            ChunkLabel::Mention {
                entity_type,
                mention_type,
                ..
            } => DecLabel::Mention {
                etype: entity_type,
                mtype: self.observed(mention_type),
            },
        }
    }

    /// Decision features for one candidate decision.
    pub fn decision_features(
        &self,
        prep: &PreparedDoc,
        hyp: &Hypothesis,
        view: &DecisionView,
        sink: &mut impl DecSink,
    ) {
        match view.label {
            DecLabel::Nae => {
                // an NAE decision carries only the negative simple feature
                sink.emit(DecKey::IsEntity(false), 1.0);
            }
            DecLabel::Mention { etype, mtype } => {
                sink.emit(DecKey::IsEntity(true), 1.0);
                sink.emit(DecKey::EntityType(etype), 1.0);
                sink.emit(DecKey::MentionKind(mtype), 1.0);
                sink.emit(DecKey::TypeMention { etype, mtype }, 1.0);
                if let Some(subtype) = view.subtype {
                    sink.emit(DecKey::EntitySubtype { etype, subtype }, 1.0);
                }
                if self.switches.chain_decisions {
                    if let Some(link) = &view.link {
                        sink.emit(DecKey::ChainStart(link.start), 1.0);
                        sink.emit(DecKey::ChainEntityType(link.chain_etype), 1.0);
                        if let Some(subtype) = link.chain_subtype {
                            sink.emit(
                                DecKey::ChainSubtype {
                                    etype: link.chain_etype,
                                    subtype,
                                },
                                1.0,
                            );
                        }
                        match link.antecedent_mtype {
                            None => sink.emit(DecKey::StartMention(mtype), 1.0),
                            Some(ante) => sink.emit(
                                DecKey::ContinuePair {
                                    current: mtype,
                                    antecedent: ante,
                                },
                                1.0,
                            ),
                        }
                    }
                }
                if self.switches.detection_decisions {
                    self.boundary_features(prep, hyp, view.span, view.label, sink);
                }
            }
        }
    }

    fn boundary_features(
        &self,
        prep: &PreparedDoc,
        hyp: &Hypothesis,
        span: Span,
        cur: DecLabel,
        sink: &mut impl DecSink,
    ) {
        let recent = hyp.recent_labels(2);
        if let Some(&prev) = recent.first() {
            let prev = self.observed_label(prev);
            sink.emit(DecKey::Markov2 { prev, cur }, 1.0);
            if let Some(&prev2) = recent.get(1) {
                sink.emit(
                    DecKey::Markov3 {
                        prev2: self.observed_label(prev2),
                        prev,
                        cur,
                    },
                    1.0,
                );
            }
        }
        for off in 1..=self.window as isize {
            let before = span.start as isize - off;
            if before >= 0 {
                if let Some(word) = prep.word_ids[before as usize] {
                    sink.emit(
                        DecKey::WindowWord {
                            offset: -(off as i8),
                            word,
                            cur,
                        },
                        1.0,
                    );
                }
            }
            let after = span.end - 1 + off as usize;
            if after < prep.len() {
                if let Some(word) = prep.word_ids[after] {
                    sink.emit(
                        DecKey::WindowWord {
                            offset: off as i8,
                            word,
                            cur,
                        },
                        1.0,
                    );
                }
            }
        }
        if let Some((last, _)) = hyp.last_mention() {
            if let Some(word) = prep.word_ids[last.span.end - 1] {
                sink.emit(
                    DecKey::PrevMentionWord {
                        word,
                        label: DecLabel::Mention {
                            etype: last.entity_type,
                            mtype: self.observed(last.mention_type),
                        },
                        cur,
                    },
                    1.0,
                );
            }
        }
    }

    /// Base features of a link decision: pairwise features against the
    /// selected chain targets, combined per the linkage rule. Max/min link
    /// picks the antecedent whose pairwise features score extremally
    /// against the decision's coreference features under the current model.
    pub fn link_base(
        &self,
        prep: &PreparedDoc,
        span: Span,
        current_obs: MentionTypeCode,
        dispatch: MentionType,
        chain: &Chain,
        scorer: Option<&PairScorer<'_>>,
        sink: &mut impl BaseSink,
    ) {
        let (targets, agg) = select_link_targets(dispatch, chain, self.linkage);
        match agg {
            Aggregation::Sum => {
                for &t in &targets {
                    pair::pair_base(self, prep, span, current_obs, &chain.mentions[t], 1.0, sink);
                }
            }
            Aggregation::Mean => {
                let scale = 1.0 / targets.len() as f64;
                for &t in &targets {
                    pair::pair_base(self, prep, span, current_obs, &chain.mentions[t], scale, sink);
                }
            }
            Aggregation::MaxScore | Aggregation::MinScore => {
                let mut best: Option<(usize, f64)> = None;
                for &t in &targets {
                    let score = match scorer {
                        Some(s) => {
                            let mut probe = FrozenBaseSink::new(s.registry);
                            pair::pair_base(
                                self,
                                prep,
                                span,
                                current_obs,
                                &chain.mentions[t],
                                1.0,
                                &mut probe,
                            );
                            s.score(&probe.out)
                        }
                        None => 0.0,
                    };
                    let better = match best {
                        None => true,
                        Some((_, b)) => match agg {
                            Aggregation::MaxScore => score > b,
                            _ => score < b,
                        },
                    };
                    if better {
                        best = Some((t, score));
                    }
                }
                if let Some((t, _)) = best {
                    pair::pair_base(self, prep, span, current_obs, &chain.mentions[t], 1.0, sink);
                }
            }
        }
    }
}

/// Scores a pairwise base feature set against the coreference-class
/// decision features of the pending link decision.
pub struct PairScorer<'a> {
    pub registry: &'a FeatureRegistry,
    pub weights: &'a WeightVector,
    pub coref_dec: &'a DecFeatures,
}

impl PairScorer<'_> {
    pub fn score(&self, base: &BaseFeatures) -> f64 {
        let mut sum = 0.0;
        for &(b, vb) in &base.items {
            for &(d, vd) in &self.coref_dec.items {
                if let Some(m) = self.registry.meta(b, d) {
                    sum += vb * vd * self.weights.get(m);
                }
            }
        }
        sum
    }
}

/// What decision features need to know about a candidate decision.
#[derive(Debug, Clone, Copy)]
pub struct DecisionView {
    pub span: Span,
    pub label: DecLabel,
    pub subtype: Option<u8>,
    pub link: Option<LinkView>,
}

#[derive(Debug, Clone, Copy)]
pub struct LinkView {
    pub start: bool,
    pub chain_etype: u8,
    pub chain_subtype: Option<u8>,
    /// Observed mention type of the most recent antecedent (None = start).
    pub antecedent_mtype: Option<MentionTypeCode>,
}

impl DecisionView {
    pub fn nae(span: Span) -> Self {
        DecisionView {
            span,
            label: DecLabel::Nae,
            subtype: None,
            link: None,
        }
    }
}

/// Named extraction helpers for tests and debugging dumps.
pub mod named {
    use super::*;

    pub fn detect(
        env: &ExtractEnv,
        prep: &PreparedDoc,
        hyp: &Hypothesis,
        span: Span,
    ) -> Vec<(FeatureClass, String, f64)> {
        let mut sink = NamedBaseSink::default();
        detect::detect_base(env, prep, hyp, span, &mut sink);
        sink.out
    }

    pub fn pair(
        env: &ExtractEnv,
        prep: &PreparedDoc,
        span: Span,
        current_obs: MentionTypeCode,
        target: &ChainMention,
    ) -> Vec<(FeatureClass, String, f64)> {
        let mut sink = NamedBaseSink::default();
        pair::pair_base(env, prep, span, current_obs, target, 1.0, &mut sink);
        sink.out
    }

    pub fn counts(
        env: &ExtractEnv,
        prep: &PreparedDoc,
        hyp: &Hypothesis,
        span: Span,
        joined_chain: Option<&Chain>,
    ) -> Vec<(FeatureClass, String, f64)> {
        let mut sink = NamedBaseSink::default();
        count::count_base(env, prep, hyp, span, joined_chain, &mut sink);
        sink.out
    }

    pub fn decision(
        env: &ExtractEnv,
        prep: &PreparedDoc,
        hyp: &Hypothesis,
        view: &DecisionView,
    ) -> Vec<(DecKey, f64)> {
        let mut sink = NamedDecSink::default();
        env.decision_features(prep, hyp, view, &mut sink);
        sink.out
    }

    pub fn link(
        env: &ExtractEnv,
        prep: &PreparedDoc,
        span: Span,
        current_obs: MentionTypeCode,
        dispatch: MentionType,
        chain: &Chain,
        scorer: Option<&PairScorer<'_>>,
    ) -> Vec<(FeatureClass, String, f64)> {
        let mut sink = NamedBaseSink::default();
        env.link_base(prep, span, current_obs, dispatch, chain, scorer, &mut sink);
        sink.out
    }
}

/// Clamp a count for indicator bucketing.
pub(crate) fn cap(n: usize, max: usize) -> usize {
    n.min(max)
}

/// Decile bucket of a value in [0, 1].
pub(crate) fn decile(v: f64) -> usize {
    ((v * 10.0).floor() as isize).clamp(0, 9) as usize
}
