//! Training protocols (joint with compensation, pipelined detection,
//! stand-alone coreference) and decoding entry points.
//!
//! Training runs a gold-path counting pass to populate the feature
//! registry, applies the frequency cutoff, then makes online passes with
//! the search/learning kernel. Joint training defaults to the gated
//! coreference update: steps whose error node misidentifies a mention
//! leave coreference-decision weights untouched.

use crate::config::{Compensation, RunConfig, TrainMode};
use crate::document::{Annotation, Document};
use crate::error::{EdtError, Result};
use crate::features::{BuildingBaseSink, ExtractEnv, ModeSwitches, PreparedDoc};
use crate::hypothesis::Hypothesis;
use crate::laso::{decode, learn_one_example, Beam, LearnerState, UpdateGating};
use crate::model::Model;
use crate::registry::{FeatureRegistry, WordTable};
use crate::resources::ResourceBundle;
use crate::search_space::{
    assemble_decision, gold_path, is_y_good, EdtProblem, FixedMention, GoldPath, ModeSpace,
};
use crate::types::TypeInventory;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub passes_run: usize,
    pub updates_per_pass: Vec<u32>,
    pub gated_updates: u32,
    pub active_features: usize,
    /// The pass after which training errors reached zero, if any.
    pub converged_at: Option<usize>,
}

fn mode_space(mode: TrainMode, l_max: usize, doc: &Document) -> ModeSpace {
    match mode {
        TrainMode::Joint => ModeSpace::Joint { l_max },
        TrainMode::PipelineDetect => ModeSpace::DetectOnly { l_max },
        TrainMode::PipelineCoref | TrainMode::CorefGoldMentions => {
            ModeSpace::link_only_from_gold(doc)
        }
    }
}

/// Detection prefix correctness: the boundary and chunk/type conditions of
/// y-goodness, ignoring the chain partition. Used by the gated update.
pub fn is_detection_good(hyp: &Hypothesis, gold: &GoldPath) -> bool {
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
    true
}

/// Online LaSO training over a gold-annotated corpus.
pub fn train(
    config: &RunConfig,
    docs: &[Document],
    resources: &ResourceBundle,
) -> Result<(Model, TrainReport)> {
    config.validate()?;
    let inventory = config.inventory()?;
    let switches = config.mode.switches();
    let mut words = WordTable::new();

    let preps: Vec<PreparedDoc> = docs
        .iter()
        .map(|d| PreparedDoc::build_interning(d, &mut words))
        .collect();

    // gold paths (validates reachability before any search)
    let modes: Vec<ModeSpace> = docs
        .iter()
        .map(|d| mode_space(config.mode, config.l_max, d))
        .collect();
    let golds: Vec<GoldPath> = docs
        .iter()
        .zip(&modes)
        .map(|(d, m)| gold_path(d, m))
        .collect::<Result<_>>()?;

    // counting pass along the gold decision paths
    let mut registry = FeatureRegistry::new();
    {
        let env = ExtractEnv::new(config.class_set(), config.linkage, switches, &inventory, resources);
        for (prep, gold) in preps.iter().zip(&golds) {
            count_gold_path(&env, prep, gold, &mut registry);
        }
        // the head-start pass extracts under detection-only switches; count
        // its gold paths too so its features survive the cutoff
        if config.mode == TrainMode::Joint && config.compensation == Compensation::HeadStart {
            let detect_env = ExtractEnv::new(
                config.class_set(),
                config.linkage,
                ModeSwitches::detect_only(),
                &inventory,
                resources,
            );
            for (doc, prep) in docs.iter().zip(&preps) {
                let dmode = ModeSpace::DetectOnly { l_max: config.l_max };
                let dgold = gold_path(doc, &dmode)?;
                count_gold_path(&detect_env, prep, &dgold, &mut registry);
            }
        }
    }
    registry.freeze(config.feature_cutoff);

    let mut learner = LearnerState::new(registry.active_len(), config.c, config.beam);
    let coref_mask = registry.coref_decision_mask();
    let gating_enabled =
        config.mode == TrainMode::Joint && config.compensation == Compensation::GatedCorefUpdate;
    let head_start =
        config.mode == TrainMode::Joint && config.compensation == Compensation::HeadStart;

    let mut report = TrainReport {
        active_features: registry.active_len(),
        ..Default::default()
    };

    let env = ExtractEnv::new(config.class_set(), config.linkage, switches, &inventory, resources);
    let detect_env = ExtractEnv::new(
        config.class_set(),
        config.linkage,
        ModeSwitches::detect_only(),
        &inventory,
        resources,
    );

    for pass in 0..config.passes {
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(pass as u64));
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let head_start_pass = head_start && pass == 0;
        let mut pass_updates = 0u32;
        for &i in &order {
            let outcome = if head_start_pass {
                let dmode = ModeSpace::DetectOnly { l_max: config.l_max };
                let dgold = gold_path(&docs[i], &dmode)?;
                let problem = EdtProblem::new(&preps[i], &detect_env, &registry, &dmode, Some(&dgold));
                learn_one_example(&problem, &mut learner, None)?
            } else {
                let problem = EdtProblem::new(&preps[i], &env, &registry, &modes[i], Some(&golds[i]));
                if gating_enabled {
                    let gold = &golds[i];
                    let detection_ok =
                        move |hyp: &std::sync::Arc<Hypothesis>| is_detection_good(hyp, gold);
                    let gating = UpdateGating {
                        frozen_mask: &coref_mask,
                        detection_ok: &detection_ok,
                    };
                    learn_one_example(&problem, &mut learner, Some(&gating))?
                } else {
                    learn_one_example(&problem, &mut learner, None)?
                }
            };
            pass_updates += outcome.updates;
            report.gated_updates += outcome.gated_updates;
        }
        report.updates_per_pass.push(pass_updates);
        report.passes_run = pass + 1;
        if pass_updates == 0 && !head_start_pass {
            report.converged_at = Some(pass);
            break;
        }
    }

    let model = Model {
        config: config.clone(),
        inventory,
        words,
        registry,
        weights: learner.weights,
    };
    Ok((model, report))
}

fn count_gold_path(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    gold: &GoldPath,
    registry: &mut FeatureRegistry,
) {
    // link-only paths start past the leading non-mention stretch
    let mut hyp = if env.switches.detection_decisions {
        Hypothesis::initial(prep.len())
    } else {
        let upto = gold
            .chain_of_span
            .first()
            .map(|(s, _)| s.start)
            .unwrap_or(prep.len());
        Hypothesis::initial_with_leading_nae(prep.len(), upto)
    };
    for (decision, trailing) in gold.decisions.iter().zip(&gold.trailing) {
        // base interning borrows the registry, so decision keys are
        // collected first and interned afterwards
        let mut keys = crate::features::NamedDecSink::default();
        let base_out = {
            let mut base = BuildingBaseSink::new(registry);
            assemble_decision(env, prep, &hyp, decision, None, &mut base, &mut keys);
            base.out
        };
        let mut dec_items = crate::registry::DecFeatures::default();
        for (key, value) in keys.out {
            let id = registry.intern_dec(key);
            dec_items.items.push((id, value));
        }
        registry.count_step(&base_out, &dec_items);
        hyp = hyp.apply(*decision, *trailing);
    }
}

/// Exact-labeling comparison: same mentions (spans and types) and the same
/// partition.
pub fn exact_match(system: &Annotation, gold: &Annotation) -> bool {
    if system.mentions.len() != gold.mentions.len() {
        return false;
    }
    for (s, g) in system.mentions.iter().zip(&gold.mentions) {
        if s.span != g.span
            || s.entity_type != g.entity_type
            || s.subtype != g.subtype
            || s.mention_type != g.mention_type
        {
            return false;
        }
    }
    system.same_partition(gold)
}

/// Decodes one document under a trained model. Link-only models take their
/// fixed mentions from the document's gold annotation.
pub fn decode_document(
    model: &Model,
    resources: &ResourceBundle,
    doc: &Document,
    beam: Beam,
) -> Result<Annotation> {
    let prep = PreparedDoc::build(doc, &model.words);
    let mode = mode_space(model.config.mode, model.config.l_max, doc);
    decode_prepared(model, resources, &prep, &mode, beam)
}

fn decode_prepared(
    model: &Model,
    resources: &ResourceBundle,
    prep: &PreparedDoc,
    mode: &ModeSpace,
    beam: Beam,
) -> Result<Annotation> {
    let env = ExtractEnv::new(
        model.config.class_set(),
        model.config.linkage,
        model.config.mode.switches(),
        &model.inventory,
        resources,
    );
    let problem = EdtProblem::new(prep, &env, &model.registry, mode, None);
    let outcome = decode(&problem, &model.weights, beam)?;
    outcome.node.state.annotation()
}

/// Decodes a corpus in parallel (the model and resources are read-only).
pub fn decode_corpus(
    model: &Model,
    resources: &ResourceBundle,
    docs: &[Document],
    beam: Beam,
) -> Result<Vec<Annotation>> {
    docs.par_iter()
        .map(|doc| decode_document(model, resources, doc, beam))
        .collect()
}

/// Pipelined decoding: run the detection model, then link its detected
/// mentions with the coreference model.
pub fn decode_pipeline(
    detect_model: &Model,
    coref_model: &Model,
    resources: &ResourceBundle,
    doc: &Document,
    beam: Beam,
) -> Result<Annotation> {
    let detected = decode_document(detect_model, resources, doc, beam)?;
    let fixed: Vec<FixedMention> = detected
        .mentions
        .iter()
        .map(|m| FixedMention {
            span: m.span,
            entity_type: m.entity_type,
            subtype: m.subtype,
            mention_type: m.mention_type,
        })
        .collect();
    let prep = PreparedDoc::build(doc, &coref_model.words);
    let mode = ModeSpace::LinkOnly {
        mentions: std::sync::Arc::new(fixed),
    };
    decode_prepared(coref_model, resources, &prep, &mode, beam)
}

/// Training-set decode accuracy (exact labeling match), used to check
/// convergence on separable corpora.
pub fn training_accuracy(
    model: &Model,
    resources: &ResourceBundle,
    docs: &[Document],
    beam: Beam,
) -> Result<f64> {
    let annotations = decode_corpus(model, resources, docs, beam)?;
    let mut hits = 0usize;
    for (doc, ann) in docs.iter().zip(&annotations) {
        let gold = doc.gold_annotation().unwrap_or_default();
        if exact_match(ann, &gold) {
            hits += 1;
        }
    }
    Ok(hits as f64 / docs.len().max(1) as f64)
}

/// Validates that every gold document admits a complete y-good decision
/// sequence in the configured space.
pub fn validate_gold_reachable(
    config: &RunConfig,
    docs: &[Document],
) -> Result<()> {
    for doc in docs {
        let mode = mode_space(config.mode, config.l_max, doc);
        let gold = gold_path(doc, &mode)?;
        // sanity: the replayed path is y-good at every step
        let mut hyp = match &mode {
            ModeSpace::LinkOnly { mentions } => Hypothesis::initial_with_leading_nae(
                doc.len(),
                mentions.first().map(|m| m.span.start).unwrap_or(doc.len()),
            ),
            _ => Hypothesis::initial(doc.len()),
        };
        for (d, t) in gold.decisions.iter().zip(&gold.trailing) {
            hyp = hyp.apply(*d, *t);
            if !is_y_good(&hyp, &gold) {
                return Err(EdtError::GoldUnreachable {
                    doc_id: doc.id.clone(),
                    message: "gold path self-check failed".into(),
                });
            }
        }
        if !hyp.is_goal() {
            return Err(EdtError::GoldUnreachable {
                doc_id: doc.id.clone(),
                message: "gold path does not reach the end of the document".into(),
            });
        }
    }
    Ok(())
}

/// Splits documents into train/held-out by seeded shuffle (used by the
/// experiment drivers).
pub fn split_heldout(docs: &[Document], seed: u64, heldout_fraction: f64) -> (Vec<Document>, Vec<Document>) {
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(1));
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let heldout_n = ((docs.len() as f64 * heldout_fraction).round() as usize)
        .max(1)
        .min(docs.len().saturating_sub(1));
    let (held, train) = order.split_at(heldout_n);
    let mut train: Vec<Document> = train.iter().map(|&i| docs[i].clone()).collect();
    let mut held: Vec<Document> = held.iter().map(|&i| docs[i].clone()).collect();
    train.sort_by(|a, b| a.id.cmp(&b.id));
    held.sort_by(|a, b| a.id.cmp(&b.id));
    (train, held)
}

/// The inventory a set of documents was loaded against must match the
/// model's; mismatches give confusing decode behavior otherwise.
pub fn check_inventory(model: &Model, inventory: &TypeInventory) -> Result<()> {
    if model.inventory != *inventory {
        return Err(EdtError::Config(
            "document inventory does not match the model's entity types".into(),
        ));
    }
    Ok(())
}
