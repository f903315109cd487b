//! The left-to-right EDT search space: operator enumeration over (length ×
//! entity type × mention type × link), gold decision paths, y-goodness,
//! and the three decoding regimes (joint, detection-only, link-only).

use crate::document::Document;
use crate::error::{EdtError, Result};
use crate::features::{
    count, detect, BaseSink, DecSink, DecisionView, ExtractEnv, FrozenBaseSink, FrozenDecSink,
    LinkView, PairScorer, PreparedDoc,
};
use crate::hypothesis::{Chain, DecisionKind, Hypothesis, LinkChoice, MentionDecision};
use crate::laso::{ScoredSuccessor, SearchNode, SearchProblem};
use crate::registry::{DecFeatures, DecKey, DecLabel, DecScoreAccumulator, FeatureRegistry};
use crate::sparse::{SparseVector, WeightVector};
use crate::types::{MentionType, Span};
use std::sync::Arc;

/// A mention whose span and types are fixed by the protocol (gold mentions
/// for stand-alone coreference, or detected mentions in a pipeline).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedMention {
    pub span: Span,
    pub entity_type: u8,
    pub subtype: Option<u8>,
    pub mention_type: MentionType,
}

/// Which decisions the search makes.
#[derive(Debug, Clone)]
pub enum ModeSpace {
    /// Segmentation, typing and chain decisions together.
    Joint { l_max: usize },
    /// Segmentation and typing only; every mention is its own chain.
    DetectOnly { l_max: usize },
    /// Chain decisions over fixed mentions.
    LinkOnly { mentions: Arc<Vec<FixedMention>> },
}

impl ModeSpace {
    pub fn link_only_from_gold(doc: &Document) -> ModeSpace {
        let mentions = doc
            .gold
            .as_ref()
            .map(|gold| {
                gold.iter()
                    .map(|m| FixedMention {
                        span: m.span,
                        entity_type: m.entity_type,
                        subtype: m.subtype,
                        mention_type: m.mention_type,
                    })
                    .collect()
            })
            .unwrap_or_default();
        ModeSpace::LinkOnly {
            mentions: Arc::new(mentions),
        }
    }
}

/// Precomputed gold decision sequence and the structures y-goodness needs.
#[derive(Debug, Clone)]
pub struct GoldPath {
    pub decisions: Vec<MentionDecision>,
    /// Trailing NAE tokens consumed together with each decision (always 0
    /// in the joint and detection spaces).
    pub trailing: Vec<usize>,
    /// Canonical gold chunk sequence (NAE runs as single-token chunks).
    pub chunks: Vec<crate::hypothesis::Chunk>,
    /// boundary[i] = position i is a gold segmentation boundary.
    pub boundary: Vec<bool>,
    /// Gold chain id per mention span (detection space: one id per span).
    pub chain_of_span: Vec<(Span, usize)>,
}

impl GoldPath {
    pub fn is_boundary(&self, pos: usize) -> bool {
        self.boundary.get(pos).copied().unwrap_or(false)
    }

    fn gold_chain(&self, span: Span) -> Option<usize> {
        self.chain_of_span
            .iter()
            .find(|(s, _)| *s == span)
            .map(|(_, c)| *c)
    }
}

/// Builds the gold decision path for a document under a search mode.
/// Fails when the gold annotation is not representable (a mention longer
/// than `l_max` in the segmentation spaces).
pub fn gold_path(doc: &Document, mode: &ModeSpace) -> Result<GoldPath> {
    let gold = doc.gold.as_deref().unwrap_or(&[]);
    let ann = doc.gold_annotation().unwrap_or_default();
    let n = doc.len();

    let mut chunks = Vec::new();
    let mut decisions = Vec::new();
    let mut trailing = Vec::new();
    let mut chain_of_span = Vec::new();

    match mode {
        ModeSpace::Joint { l_max } | ModeSpace::DetectOnly { l_max } => {
            let detect_only = matches!(mode, ModeSpace::DetectOnly { .. });
            let mut pos = 0usize;
            let mut mention_idx = 0usize;
            while pos < n {
                if mention_idx < gold.len() && gold[mention_idx].span.start == pos {
                    let m = &gold[mention_idx];
                    if m.span.len() > *l_max {
                        return Err(EdtError::GoldUnreachable {
                            doc_id: doc.id.clone(),
                            message: format!(
                                "gold mention [{}, {}) longer than l_max = {l_max}",
                                m.span.start, m.span.end
                            ),
                        });
                    }
                    let chain = if detect_only {
                        mention_idx
                    } else {
                        ann.mentions[mention_idx].chain
                    };
                    let link = if detect_only {
                        LinkChoice::NewChain
                    } else if ann.mentions[..mention_idx].iter().any(|pm| pm.chain == chain) {
                        LinkChoice::Existing(chain)
                    } else {
                        LinkChoice::NewChain
                    };
                    decisions.push(MentionDecision {
                        length: m.span.len(),
                        kind: DecisionKind::Mention {
                            entity_type: m.entity_type,
                            subtype: m.subtype,
                            mention_type: m.mention_type,
                            link,
                        },
                    });
                    trailing.push(0);
                    chunks.push(crate::hypothesis::Chunk {
                        span: m.span,
                        label: crate::hypothesis::ChunkLabel::Mention {
                            entity_type: m.entity_type,
                            subtype: m.subtype,
                            mention_type: m.mention_type,
                            chain,
                        },
                    });
                    chain_of_span.push((m.span, chain));
                    pos = m.span.end;
                    mention_idx += 1;
                } else {
                    decisions.push(MentionDecision::nae());
                    trailing.push(0);
                    chunks.push(crate::hypothesis::Chunk {
                        span: Span::new(pos, pos + 1),
                        label: crate::hypothesis::ChunkLabel::Nae,
                    });
                    pos += 1;
                }
            }
        }
        ModeSpace::LinkOnly { mentions } => {
            debug_assert_eq!(mentions.len(), gold.len());
            let mut pos = 0usize;
            for (i, m) in gold.iter().enumerate() {
                for p in pos..m.span.start {
                    chunks.push(crate::hypothesis::Chunk {
                        span: Span::new(p, p + 1),
                        label: crate::hypothesis::ChunkLabel::Nae,
                    });
                }
                let chain = ann.mentions[i].chain;
                let link = if ann.mentions[..i].iter().any(|pm| pm.chain == chain) {
                    LinkChoice::Existing(chain)
                } else {
                    LinkChoice::NewChain
                };
                decisions.push(MentionDecision {
                    length: m.span.len(),
                    kind: DecisionKind::Mention {
                        entity_type: m.entity_type,
                        subtype: m.subtype,
                        mention_type: m.mention_type,
                        link,
                    },
                });
                let next_start = gold.get(i + 1).map(|g| g.span.start).unwrap_or(n);
                trailing.push(next_start - m.span.end);
                chunks.push(crate::hypothesis::Chunk {
                    span: m.span,
                    label: crate::hypothesis::ChunkLabel::Mention {
                        entity_type: m.entity_type,
                        subtype: m.subtype,
                        mention_type: m.mention_type,
                        chain,
                    },
                });
                chain_of_span.push((m.span, chain));
                for p in m.span.end..next_start {
                    chunks.push(crate::hypothesis::Chunk {
                        span: Span::new(p, p + 1),
                        label: crate::hypothesis::ChunkLabel::Nae,
                    });
                }
                pos = next_start;
            }
            for p in pos..n {
                chunks.push(crate::hypothesis::Chunk {
                    span: Span::new(p, p + 1),
                    label: crate::hypothesis::ChunkLabel::Nae,
                });
            }
        }
    }

    let mut boundary = vec![false; n + 1];
    boundary[0] = true;
    for c in &chunks {
        boundary[c.span.end] = true;
    }
    Ok(GoldPath {
        decisions,
        trailing,
        chunks,
        boundary,
        chain_of_span,
    })
}

/// Full y-goodness predicate: the hypothesis prefix can still be extended
/// into the gold labeling. Requires (a) a gold segmentation boundary at the
/// covered position, (b) chunk/type equality with the gold prefix, and
/// (c) partition equality over the prefix mentions (label-invariant).
pub fn is_y_good(hyp: &Hypothesis, gold: &GoldPath) -> bool {
    let covered = hyp.covered();
    if covered < hyp.doc_len() && !gold.is_boundary(covered) {
        return false;
    }
    let hyp_chunks = hyp.chunks();
    if hyp_chunks.len() > gold.chunks.len() {
        return false;
    }
    for (hc, gc) in hyp_chunks.iter().zip(&gold.chunks) {
        if hc.span != gc.span {
            return false;
        }
        use crate::hypothesis::ChunkLabel::*;
        match (hc.label, gc.label) {
            (Nae, Nae) => {}
            (
                Mention {
                    entity_type: e1,
                    subtype: s1,
                    mention_type: m1,
                    ..
                },
                Mention {
                    entity_type: e2,
                    subtype: s2,
                    mention_type: m2,
                    ..
                },
            ) => {
                if e1 != e2 || s1 != s2 || m1 != m2 {
                    return false;
                }
            }
            _ => return false,
        }
    }
    // partition restriction: every hypothesis chain maps onto exactly one
    // gold chain, and no two hypothesis chains share a gold chain
    let mut used: Vec<usize> = Vec::new();
    for chain in hyp.chains() {
        let mut gold_id: Option<usize> = None;
        for m in &chain.mentions {
            match gold.gold_chain(m.span) {
                None => return false,
                Some(g) => match gold_id {
                    None => gold_id = Some(g),
                    Some(prev) if prev != g => return false,
                    _ => {}
                },
            }
        }
        let g = gold_id.expect("chains are never empty");
        if used.contains(&g) {
            return false;
        }
        used.push(g);
    }
    true
}

/// The unique y-good successor of a y-good non-goal hypothesis.
pub fn gold_successor(
    hyp: &Arc<Hypothesis>,
    gold: &GoldPath,
) -> Result<Arc<Hypothesis>> {
    if hyp.is_goal() {
        return Err(EdtError::Contract("goal hypothesis has no successor".into()));
    }
    if !is_y_good(hyp, gold) {
        return Err(EdtError::Contract(
            "gold successor requested from a non-y-good hypothesis".into(),
        ));
    }
    let idx = hyp.depth() as usize;
    Ok(hyp.apply(gold.decisions[idx], gold.trailing[idx]))
}

/// All legal decisions at a hypothesis, in canonical enumeration order:
/// NAE first, then lengths ascending, entity types, subtypes, mention
/// types (NAM, NOM, PRO), and the link (new chain, then existing chains by
/// index). Returns (decision, trailing NAE) pairs.
pub fn successor_decisions(
    hyp: &Hypothesis,
    mode: &ModeSpace,
    inventory: &crate::types::TypeInventory,
) -> Vec<(MentionDecision, usize)> {
    let mut out = Vec::new();
    if hyp.is_goal() {
        return out;
    }
    match mode {
        ModeSpace::Joint { l_max } | ModeSpace::DetectOnly { l_max } => {
            let detect_only = matches!(mode, ModeSpace::DetectOnly { .. });
            let start = hyp.covered();
            let remaining = hyp.doc_len() - start;
            out.push((MentionDecision::nae(), 0));
            let links: Vec<LinkChoice> = if detect_only {
                vec![LinkChoice::NewChain]
            } else {
                std::iter::once(LinkChoice::NewChain)
                    .chain((0..hyp.chains().len()).map(LinkChoice::Existing))
                    .collect()
            };
            for length in 1..=remaining.min(*l_max) {
                for etype in inventory.entity_type_ids() {
                    let subs = subtype_options(inventory, etype);
                    for subtype in subs {
                        for mention_type in MentionType::ALL {
                            for &link in &links {
                                out.push((
                                    MentionDecision {
                                        length,
                                        kind: DecisionKind::Mention {
                                            entity_type: etype,
                                            subtype,
                                            mention_type,
                                            link,
                                        },
                                    },
                                    0,
                                ));
                            }
                        }
                    }
                }
            }
        }
        ModeSpace::LinkOnly { mentions } => {
            let idx = hyp.depth() as usize;
            if idx >= mentions.len() {
                return out;
            }
            let fm = &mentions[idx];
            debug_assert_eq!(hyp.covered(), fm.span.start);
            let next_start = mentions
                .get(idx + 1)
                .map(|m| m.span.start)
                .unwrap_or(hyp.doc_len());
            let trailing = next_start - fm.span.end;
            for link in std::iter::once(LinkChoice::NewChain)
                .chain((0..hyp.chains().len()).map(LinkChoice::Existing))
            {
                out.push((
                    MentionDecision {
                        length: fm.span.len(),
                        kind: DecisionKind::Mention {
                            entity_type: fm.entity_type,
                            subtype: fm.subtype,
                            mention_type: fm.mention_type,
                            link,
                        },
                    },
                    trailing,
                ));
            }
        }
    }
    out
}

fn subtype_options(inventory: &crate::types::TypeInventory, etype: u8) -> Vec<Option<u8>> {
    let k = inventory.subtype_count(etype);
    if k == 0 {
        vec![None]
    } else {
        (0..k as u8).map(Some).collect()
    }
}

/// How one decision looks to the coreference decision features.
pub fn link_view_of(
    env: &ExtractEnv,
    hyp: &Hypothesis,
    etype: u8,
    subtype: Option<u8>,
    link: LinkChoice,
) -> LinkView {
    match link {
        LinkChoice::NewChain => LinkView {
            start: true,
            chain_etype: etype,
            chain_subtype: subtype,
            antecedent_mtype: None,
        },
        LinkChoice::Existing(c) => {
            let chain = &hyp.chains()[c];
            LinkView {
                start: false,
                chain_etype: chain.entity_type(),
                chain_subtype: chain.subtype(),
                antecedent_mtype: Some(env.observed(chain.last().mention_type)),
            }
        }
    }
}

/// Emits the base and decision features of one decision applied at
/// `parent`, into arbitrary sinks. This is the single source of truth for
/// step feature assembly; the counting pass runs it with interning sinks
/// and search-time materialization runs it with frozen sinks.
pub fn assemble_decision<BS: BaseSink, DS: DecSink>(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    parent: &Hypothesis,
    decision: &MentionDecision,
    scorer: Option<&PairScorer<'_>>,
    base_sink: &mut BS,
    dec_sink: &mut DS,
) {
    let start = parent.covered();
    let span = Span::new(start, start + decision.length);
    detect::detect_base(env, prep, parent, span, base_sink);
    match decision.kind {
        DecisionKind::Nae => {
            env.decision_features(prep, parent, &DecisionView::nae(span), dec_sink);
        }
        DecisionKind::Mention {
            entity_type,
            subtype,
            mention_type,
            link,
        } => {
            let view = link_view_of(env, parent, entity_type, subtype, link);
            let joined: Option<&Chain> = match link {
                LinkChoice::NewChain => None,
                LinkChoice::Existing(c) => Some(parent.chains()[c].as_ref()),
            };
            count::count_base(env, prep, parent, span, joined, base_sink);
            if let Some(chain) = joined {
                let obs = env.observed(mention_type);
                let dispatch = env.dispatch_mtype(mention_type, prep, span);
                env.link_base(prep, span, obs, dispatch, chain, scorer, base_sink);
            }
            let dview = DecisionView {
                span,
                label: DecLabel::Mention {
                    etype: entity_type,
                    mtype: env.observed(mention_type),
                },
                subtype,
                link: if env.switches.chain_decisions {
                    Some(view)
                } else {
                    None
                },
            };
            env.decision_features(prep, parent, &dview, dec_sink);
        }
    }
}

/// The joint EDT search problem over one prepared document.
pub struct EdtProblem<'a> {
    pub prep: &'a PreparedDoc<'a>,
    pub env: &'a ExtractEnv<'a>,
    pub registry: &'a FeatureRegistry,
    pub mode: &'a ModeSpace,
    pub gold: Option<&'a GoldPath>,
    /// Cross-check incremental goodness flags against the full predicate.
    pub audit: bool,
}

impl<'a> EdtProblem<'a> {
    pub fn new(
        prep: &'a PreparedDoc<'a>,
        env: &'a ExtractEnv<'a>,
        registry: &'a FeatureRegistry,
        mode: &'a ModeSpace,
        gold: Option<&'a GoldPath>,
    ) -> Self {
        EdtProblem {
            prep,
            env,
            registry,
            mode,
            gold,
            audit: false,
        }
    }

    fn initial_hyp(&self) -> Arc<Hypothesis> {
        match self.mode {
            ModeSpace::Joint { .. } | ModeSpace::DetectOnly { .. } => {
                Hypothesis::initial(self.prep.len())
            }
            ModeSpace::LinkOnly { mentions } => {
                let upto = mentions.first().map(|m| m.span.start).unwrap_or(self.prep.len());
                Hypothesis::initial_with_leading_nae(self.prep.len(), upto)
            }
        }
    }

    fn gold_next(&self, hyp: &Hypothesis, parent_good: bool) -> Option<MentionDecision> {
        if !parent_good {
            return None;
        }
        self.gold
            .and_then(|g| g.decisions.get(hyp.depth() as usize))
            .copied()
    }

    /// Coreference-class decision features of a link decision, used as the
    /// scoring context for max/min link antecedent selection.
    fn coref_dec(&self, view: &LinkView, mtype: crate::types::MentionTypeCode) -> DecFeatures {
        let mut sink = FrozenDecSink::new(self.registry);
        use crate::features::DecSink;
        sink.emit(DecKey::ChainStart(view.start), 1.0);
        sink.emit(DecKey::ChainEntityType(view.chain_etype), 1.0);
        if let Some(subtype) = view.chain_subtype {
            sink.emit(
                DecKey::ChainSubtype {
                    etype: view.chain_etype,
                    subtype,
                },
                1.0,
            );
        }
        match view.antecedent_mtype {
            None => sink.emit(DecKey::StartMention(mtype), 1.0),
            Some(ante) => sink.emit(
                DecKey::ContinuePair {
                    current: mtype,
                    antecedent: ante,
                },
                1.0,
            ),
        }
        sink.out
    }

    fn link_view(&self, hyp: &Hypothesis, etype: u8, subtype: Option<u8>, link: LinkChoice) -> LinkView {
        link_view_of(self.env, hyp, etype, subtype, link)
    }

    /// Base features of the count + pair group of one (span, mention type,
    /// link) combination.
    fn group_base(
        &self,
        hyp: &Hypothesis,
        span: Span,
        mention_type: MentionType,
        link: LinkChoice,
        view: &LinkView,
        weights: &WeightVector,
        sink: &mut FrozenBaseSink<'_>,
    ) {
        let joined: Option<&Chain> = match link {
            LinkChoice::NewChain => None,
            LinkChoice::Existing(c) => Some(hyp.chains()[c].as_ref()),
        };
        count::count_base(self.env, self.prep, hyp, span, joined, sink);
        if let Some(chain) = joined {
            let obs = self.env.observed(mention_type);
            let dispatch = self.env.dispatch_mtype(mention_type, self.prep, span);
            let coref_dec = self.coref_dec(view, obs);
            let scorer = PairScorer {
                registry: self.registry,
                weights,
                coref_dec: &coref_dec,
            };
            self.env
                .link_base(self.prep, span, obs, dispatch, chain, Some(&scorer), sink);
        }
    }

    /// Materializes the full step feature vector of one decision applied at
    /// `parent`, exactly as `expand` scores it.
    fn assemble_step(&self, parent: &Hypothesis, decision: &MentionDecision, weights: &WeightVector) -> SparseVector {
        let mut base = FrozenBaseSink::new(self.registry);
        let mut dec = FrozenDecSink::new(self.registry);
        // the pair scorer context mirrors what expand used for this decision
        let scorer_dec = match decision.kind {
            DecisionKind::Mention {
                entity_type,
                subtype,
                mention_type,
                link: link @ LinkChoice::Existing(_),
            } => {
                let view = self.link_view(parent, entity_type, subtype, link);
                Some(self.coref_dec(&view, self.env.observed(mention_type)))
            }
            _ => None,
        };
        let scorer = scorer_dec.as_ref().map(|coref_dec| PairScorer {
            registry: self.registry,
            weights,
            coref_dec,
        });
        assemble_decision(
            self.env,
            self.prep,
            parent,
            decision,
            scorer.as_ref(),
            &mut base,
            &mut dec,
        );
        self.registry.cross(&base.out, &dec.out)
    }

    fn audit_flag(&self, state: &Arc<Hypothesis>, flag: bool) {
        if self.audit {
            if let Some(gold) = self.gold {
                let full = is_y_good(state, gold);
                assert_eq!(
                    full, flag,
                    "incremental y-good flag diverged from the full predicate at depth {}",
                    state.depth()
                );
            }
        }
    }
}

impl SearchProblem for EdtProblem<'_> {
    type State = Arc<Hypothesis>;

    fn initial_state(&self) -> Arc<Hypothesis> {
        self.initial_hyp()
    }

    fn is_goal(&self, state: &Arc<Hypothesis>) -> bool {
        state.is_goal()
    }

    fn is_good(&self, state: &Arc<Hypothesis>) -> bool {
        match self.gold {
            Some(gold) => is_y_good(state, gold),
            None => false,
        }
    }

    fn expand(
        &self,
        node: &SearchNode<Arc<Hypothesis>>,
        weights: &WeightVector,
    ) -> Vec<ScoredSuccessor<Arc<Hypothesis>>> {
        let hyp = &node.state;
        if hyp.is_goal() {
            return Vec::new();
        }
        let gold_next = self.gold_next(hyp, node.good);
        let dec_space = self.registry.dec_len();
        let mut out = Vec::new();

        match self.mode {
            ModeSpace::Joint { l_max } | ModeSpace::DetectOnly { l_max } => {
                let detect_only = matches!(self.mode, ModeSpace::DetectOnly { .. });
                let start = hyp.covered();
                let remaining = hyp.doc_len() - start;
                let max_l = remaining.min(*l_max);

                // shared detection accumulators per candidate length
                let mut detect_accs: Vec<DecScoreAccumulator> = Vec::with_capacity(max_l);
                for l in 1..=max_l {
                    let span = Span::new(start, start + l);
                    let mut sink = FrozenBaseSink::new(self.registry);
                    detect::detect_base(self.env, self.prep, hyp, span, &mut sink);
                    let mut acc = DecScoreAccumulator::new();
                    acc.clear(dec_space);
                    acc.accumulate(&sink.out, self.registry, weights);
                    detect_accs.push(acc);
                }

                // NAE successor
                {
                    let decision = MentionDecision::nae();
                    let span = Span::new(start, start + 1);
                    let mut dec = FrozenDecSink::new(self.registry);
                    self.env
                        .decision_features(self.prep, hyp, &DecisionView::nae(span), &mut dec);
                    let delta = detect_accs[0].score(&dec.out);
                    let state = hyp.apply(decision, 0);
                    let good = gold_next == Some(decision);
                    self.audit_flag(&state, good);
                    out.push(ScoredSuccessor {
                        state,
                        score_delta: delta,
                        good,
                    });
                }

                let links: Vec<LinkChoice> = if detect_only {
                    vec![LinkChoice::NewChain]
                } else {
                    std::iter::once(LinkChoice::NewChain)
                        .chain((0..hyp.chains().len()).map(LinkChoice::Existing))
                        .collect()
                };

                for l in 1..=max_l {
                    let span = Span::new(start, start + l);
                    // (link, mention type) group accumulators; the chain
                    // view needed for pair features is independent of the
                    // candidate entity type
                    let mut group_accs: Vec<DecScoreAccumulator> =
                        Vec::with_capacity(links.len() * MentionType::ALL.len());
                    for &link in &links {
                        for mention_type in MentionType::ALL {
                            // entity type affects only the new-chain view's
                            // chain type, which is not a base feature
                            let view = self.link_view(hyp, 0, None, link);
                            let mut sink = FrozenBaseSink::new(self.registry);
                            self.group_base(hyp, span, mention_type, link, &view, weights, &mut sink);
                            let mut acc = DecScoreAccumulator::new();
                            acc.clear(dec_space);
                            acc.accumulate(&sink.out, self.registry, weights);
                            group_accs.push(acc);
                        }
                    }
                    for etype in self.env.inventory.entity_type_ids() {
                        for subtype in subtype_options(self.env.inventory, etype) {
                            for (mi, mention_type) in MentionType::ALL.into_iter().enumerate() {
                                for (li, &link) in links.iter().enumerate() {
                                    let decision = MentionDecision {
                                        length: l,
                                        kind: DecisionKind::Mention {
                                            entity_type: etype,
                                            subtype,
                                            mention_type,
                                            link,
                                        },
                                    };
                                    let view = self.link_view(hyp, etype, subtype, link);
                                    let dview = DecisionView {
                                        span,
                                        label: DecLabel::Mention {
                                            etype,
                                            mtype: self.env.observed(mention_type),
                                        },
                                        subtype,
                                        link: if detect_only { None } else { Some(view) },
                                    };
                                    let mut dec = FrozenDecSink::new(self.registry);
                                    self.env.decision_features(self.prep, hyp, &dview, &mut dec);
                                    let delta = detect_accs[l - 1].score(&dec.out)
                                        + group_accs[li * MentionType::ALL.len() + mi].score(&dec.out);
                                    let state = hyp.apply(decision, 0);
                                    let good = gold_next == Some(decision);
                                    self.audit_flag(&state, good);
                                    out.push(ScoredSuccessor {
                                        state,
                                        score_delta: delta,
                                        good,
                                    });
                                }
                            }
                        }
                    }
                }
            }
            ModeSpace::LinkOnly { mentions } => {
                let idx = hyp.depth() as usize;
                if idx >= mentions.len() {
                    return out;
                }
                let fm = &mentions[idx];
                let span = fm.span;
                let next_start = mentions
                    .get(idx + 1)
                    .map(|m| m.span.start)
                    .unwrap_or(hyp.doc_len());
                let trailing = next_start - span.end;

                let mut detect_acc = DecScoreAccumulator::new();
                detect_acc.clear(dec_space);
                {
                    let mut sink = FrozenBaseSink::new(self.registry);
                    detect::detect_base(self.env, self.prep, hyp, span, &mut sink);
                    detect_acc.accumulate(&sink.out, self.registry, weights);
                }
                for link in std::iter::once(LinkChoice::NewChain)
                    .chain((0..hyp.chains().len()).map(LinkChoice::Existing))
                {
                    let decision = MentionDecision {
                        length: span.len(),
                        kind: DecisionKind::Mention {
                            entity_type: fm.entity_type,
                            subtype: fm.subtype,
                            mention_type: fm.mention_type,
                            link,
                        },
                    };
                    let view = self.link_view(hyp, fm.entity_type, fm.subtype, link);
                    let mut group = FrozenBaseSink::new(self.registry);
                    self.group_base(hyp, span, fm.mention_type, link, &view, weights, &mut group);
                    let mut group_acc = DecScoreAccumulator::new();
                    group_acc.clear(dec_space);
                    group_acc.accumulate(&group.out, self.registry, weights);

                    let dview = DecisionView {
                        span,
                        label: DecLabel::Mention {
                            etype: fm.entity_type,
                            mtype: self.env.observed(fm.mention_type),
                        },
                        subtype: fm.subtype,
                        link: Some(view),
                    };
                    let mut dec = FrozenDecSink::new(self.registry);
                    self.env.decision_features(self.prep, hyp, &dview, &mut dec);
                    let delta = detect_acc.score(&dec.out) + group_acc.score(&dec.out);
                    let state = hyp.apply(decision, trailing);
                    let good = gold_next == Some(decision);
                    self.audit_flag(&state, good);
                    out.push(ScoredSuccessor {
                        state,
                        score_delta: delta,
                        good,
                    });
                }
            }
        }
        out
    }

    fn good_successors(
        &self,
        node: &SearchNode<Arc<Hypothesis>>,
        weights: &WeightVector,
    ) -> Vec<ScoredSuccessor<Arc<Hypothesis>>> {
        let gold = match self.gold {
            Some(g) => g,
            None => return Vec::new(),
        };
        let hyp = &node.state;
        let idx = hyp.depth() as usize;
        let decision = match gold.decisions.get(idx) {
            Some(d) => *d,
            None => return Vec::new(),
        };
        let state = hyp.apply(decision, gold.trailing[idx]);
        let features = self.assemble_step(hyp, &decision, weights);
        let score_delta = weights.dot(&features);
        vec![ScoredSuccessor {
            state,
            score_delta,
            good: true,
        }]
    }

    fn step_features(&self, state: &Arc<Hypothesis>, weights: &WeightVector) -> SparseVector {
        let decision = match state.decision {
            Some(d) => d,
            None => return SparseVector::new(),
        };
        let parent = state.parent().expect("non-root hypothesis has a parent");
        self.assemble_step(parent, &decision, weights)
    }

    fn states_equal(&self, a: &Arc<Hypothesis>, b: &Arc<Hypothesis>) -> bool {
        a.same_labeling(b)
    }
}
