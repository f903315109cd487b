//! Pairwise base features between the current chunk and one antecedent
//! mention: lexical pairs, mined intervening patterns, semantic relations,
//! knowledge pairs, list pairs, inference agreement and string matching.

use super::strings::{
    acronym_match, jaro, nationality_match, normalized_edit_distance, vowel_discounted_edit_distance,
};
use super::{cap, decile, BaseSink, ExtractEnv, PreparedDoc};
use crate::hypothesis::ChainMention;
use crate::registry::FeatureClass;
use crate::resources::pronoun_info;
use crate::types::{MentionTypeCode, Span};

/// Emits all enabled pair features between `span` (the proposed mention)
/// and `target` (an antecedent), scaled by `scale`.
pub fn pair_base(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    current_obs: MentionTypeCode,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    if env.on(FeatureClass::Lexical) {
        lexical_pair(prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::Pattern) {
        intervening_patterns(env, prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::Semantic) && !env.resources.hypernyms.is_empty() {
        semantic_pair(env, prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::Knowledge) && !env.resources.knowledge_pairs.is_empty() {
        knowledge_pair(env, prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::List) {
        list_pair(env, prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::Inference) {
        inference_pair(env, prep, span, target, scale, sink);
    }
    if env.on(FeatureClass::StringMatch) {
        string_match(env, prep, span, current_obs, target, scale, sink);
    }
}

fn lexical_pair(
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::Lexical;
    let cur_head = prep.head(span);
    let tgt_head = prep.head(target.span);
    sink.emit(c, format_args!("pair-head={cur_head}&{tgt_head}"), scale);
    if cur_head == tgt_head {
        sink.emit(c, format_args!("pair-head-eq"), scale);
    }
    sink.emit(
        c,
        format_args!("pair-len={}&{}", cap(span.len(), 5), cap(target.span.len(), 5)),
        scale,
    );
}

fn intervening_patterns(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::Pattern;
    let gap_start = target.span.end;
    let gap_end = span.start;
    if gap_end < gap_start {
        return;
    }
    let gap = gap_end - gap_start;
    if gap == 0 {
        sink.emit(c, format_args!("iv-adjacent"), scale);
        return;
    }
    if gap > 4 {
        return;
    }
    let words: Vec<&str> = (gap_start..gap_end).map(|i| prep.lower[i].as_str()).collect();
    for (pat, coreferent) in &env.resources.coref_patterns {
        if pat.matches_exact(&words) {
            sink.emit(
                c,
                format_args!(
                    "iv={}~{}",
                    pat.source.replace(' ', "_"),
                    if *coreferent { "+" } else { "-" }
                ),
                scale,
            );
        }
    }
}

fn semantic_pair(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::Semantic;
    let cur_head = prep.head(span);
    let tgt_head = prep.head(target.span);
    let a = (cur_head.to_string(), tgt_head.to_string());
    let b = (tgt_head.to_string(), cur_head.to_string());
    if env.resources.part_of.contains(&a) || env.resources.part_of.contains(&b) {
        sink.emit(c, format_args!("partof"), scale);
    }
    let cur_syn = env.resources.hypernyms.get(cur_head).map(|e| e.synsets.as_slice());
    let tgt_syn = env.resources.hypernyms.get(tgt_head).map(|e| e.synsets.as_slice());
    if let (Some(cs), Some(ts)) = (cur_syn, tgt_syn) {
        if let Some(d) = env.resources.synset_distance(cs, ts, 8) {
            sink.emit(c, format_args!("syndist={}", cap(d, 8)), scale);
        }
    }
}

fn knowledge_pair(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::Knowledge;
    let cur_full = prep.joined(span);
    let tgt_full = prep.joined(target.span);
    let cur_head = prep.head(span);
    let tgt_head = prep.head(target.span);
    // matched on full name and nominal head, in both orders
    let hit = env.resources.knowledge_pairs.contains(&(cur_full.clone(), tgt_head.to_string()))
        || env.resources.knowledge_pairs.contains(&(tgt_full.clone(), cur_head.to_string()))
        || env.resources.knowledge_pairs.contains(&(cur_full.clone(), tgt_full.clone()))
        || env.resources.knowledge_pairs.contains(&(tgt_full, cur_full));
    if hit {
        sink.emit(c, format_args!("kpair"), scale);
    }
}

fn list_pair(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::List;
    let cur = prep.joined(span);
    let tgt = prep.joined(target.span);
    for g in &env.resources.gazetteers {
        let cur_on = g.entries.contains(&cur);
        let tgt_on = g.entries.contains(&tgt);
        // same list but not identical hints at distinct entities
        if cur_on && tgt_on && cur != tgt {
            sink.emit(c, format_args!("same-list={}", g.name), scale);
        }
        // one side is on the list whose name is the other side's head word
        if (tgt_on && prep.head(span) == g.name) || (cur_on && prep.head(target.span) == g.name) {
            sink.emit(c, format_args!("head-of-list={}", g.name), scale);
        }
    }
}

fn gender_number_of(env: &ExtractEnv, head: &str) -> (Option<crate::resources::Gender>, Option<crate::resources::SemNumber>) {
    match pronoun_info(head) {
        Some(p) => (p.gender, p.number),
        None => match env.resources.gender_number.get(head) {
            Some(gn) => (gn.gender, gn.number),
            None => (None, None),
        },
    }
}

fn inference_pair(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::Inference;
    let (cg, cn) = gender_number_of(env, prep.head(span));
    let (tg, tn) = gender_number_of(env, prep.head(target.span));
    if let (Some(a), Some(b)) = (cg, tg) {
        sink.emit(
            c,
            format_args!("gender-{}", if a == b { "match" } else { "mismatch" }),
            scale,
        );
    }
    if let (Some(a), Some(b)) = (cn, tn) {
        sink.emit(
            c,
            format_args!("num-{}", if a == b { "match" } else { "mismatch" }),
            scale,
        );
    }
}

fn string_match(
    _env: &ExtractEnv,
    prep: &PreparedDoc,
    span: Span,
    current_obs: MentionTypeCode,
    target: &ChainMention,
    scale: f64,
    sink: &mut impl BaseSink,
) {
    let c = FeatureClass::StringMatch;
    let cur = prep.joined(span);
    let tgt = prep.joined(target.span);
    if cur == tgt {
        sink.emit(c, format_args!("exact"), scale);
    } else if cur.contains(&tgt) || tgt.contains(&cur) {
        sink.emit(c, format_args!("substr"), scale);
    }
    let cur_toks: Vec<&str> = cur.split(' ').collect();
    let tgt_toks: Vec<&str> = tgt.split(' ').collect();
    let overlap = cur_toks.iter().filter(|t| tgt_toks.contains(t)).count();
    if overlap > 0 {
        sink.emit(c, format_args!("overlap"), scale);
        let ratio = overlap as f64 / cur_toks.len().max(tgt_toks.len()) as f64;
        sink.emit(c, format_args!("overlap-r"), scale * ratio);
    }
    let cur_is_pro = prep.span_is_pronoun(span) || current_obs == MentionTypeCode::Pro;
    let tgt_is_pro =
        prep.span_is_pronoun(target.span) || target.mention_type == crate::types::MentionType::Pronoun;
    if cur_is_pro && tgt_is_pro {
        sink.emit(
            c,
            format_args!("pro-{}", if cur == tgt { "eq" } else { "ne" }),
            scale,
        );
    }
    let ned = normalized_edit_distance(&cur, &tgt);
    sink.emit(c, format_args!("ned"), scale * ned);
    sink.emit(c, format_args!("ned~b{}", decile(ned)), scale);
    let ved = vowel_discounted_edit_distance(&cur, &tgt);
    sink.emit(c, format_args!("ved"), scale * ved);
    sink.emit(c, format_args!("ved~b{}", decile(ved)), scale);
    let j = jaro(&cur, &tgt);
    sink.emit(c, format_args!("jaro"), scale * j);
    sink.emit(c, format_args!("jaro~b{}", decile(j)), scale);
    if nationality_match(prep.head(span), prep.head(target.span)) {
        sink.emit(c, format_args!("natl"), scale);
    }
    let cur_orig = prep.orig_words(span);
    let tgt_orig = prep.orig_words(target.span);
    if acronym_match(&cur_orig, &tgt) || acronym_match(&tgt_orig, &cur) {
        sink.emit(c, format_args!("acro"), scale);
    }
}
