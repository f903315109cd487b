//! Detection-side base features of the current chunk: lexical, syntactic,
//! pattern, semantic, class, list, inference and history classes, plus the
//! always-on bias.

use super::strings::{case_class, shape, stem};
use super::{cap, BaseSink, ExtractEnv, PreparedDoc};
use crate::hypothesis::{ChunkLabel, Hypothesis};
use crate::registry::FeatureClass;
use crate::resources::pronoun_info;
use crate::types::Span;

static MISSING_TAGS_WARNED: std::sync::Once = std::sync::Once::new();

pub fn detect_base(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    hyp: &Hypothesis,
    span: Span,
    sink: &mut impl BaseSink,
) {
    sink.emit(FeatureClass::Bias, format_args!("on"), 1.0);
    if env.on(FeatureClass::Lexical) {
        lexical(prep, span, sink);
    }
    if env.on(FeatureClass::Syntactic) {
        syntactic(prep, span, sink);
    }
    if env.on(FeatureClass::Pattern) {
        pattern_detect(env, prep, span, sink);
    }
    if env.on(FeatureClass::Semantic) && !env.resources.hypernyms.is_empty() {
        semantic_detect(env, prep, span, sink);
    }
    if env.on(FeatureClass::WordClass) {
        word_class(env, prep, span, sink);
    }
    if env.on(FeatureClass::List) {
        list_detect(env, prep, span, sink);
    }
    if env.on(FeatureClass::Inference) {
        inference_detect(env, prep, span, sink);
    }
    if env.on(FeatureClass::History) && env.switches.detection_decisions {
        history(env, prep, hyp, span, sink);
    }
}

fn lexical(prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::Lexical;
    sink.emit(c, format_args!("len"), span.len() as f64);
    sink.emit(c, format_args!("len={}", cap(span.len(), 10)), 1.0);
    for i in span.start..span.end {
        let w = &prep.lower[i];
        sink.emit(c, format_args!("w={w}"), 1.0);
        let chars: Vec<char> = w.chars().collect();
        if chars.len() >= 2 {
            let pre: String = chars[..2].iter().collect();
            let suf: String = chars[chars.len() - 2..].iter().collect();
            sink.emit(c, format_args!("pre={pre}"), 1.0);
            sink.emit(c, format_args!("suf={suf}"), 1.0);
        }
        let st = stem(w);
        if st != *w {
            sink.emit(c, format_args!("stem={st}"), 1.0);
        }
        sink.emit(c, format_args!("case={}", case_class(prep.doc.form(i))), 1.0);
        if w.ends_with('s') && !w.ends_with("ss") {
            sink.emit(c, format_args!("morph=pl"), 1.0);
        }
        if w.ends_with("ed") {
            sink.emit(c, format_args!("morph=past"), 1.0);
        }
        if w.ends_with("ing") {
            sink.emit(c, format_args!("morph=prog"), 1.0);
        }
    }
    for i in span.start..span.end.saturating_sub(1) {
        sink.emit(c, format_args!("bg={}_{}", prep.lower[i], prep.lower[i + 1]), 1.0);
    }
    let shapes: Vec<String> = (span.start..span.end)
        .map(|i| shape(prep.doc.form(i)))
        .collect();
    sink.emit(c, format_args!("shape={}", shapes.join("_")), 1.0);
}

fn syntactic(prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::Syntactic;
    if !prep.has_pos && !prep.has_chunk {
        MISSING_TAGS_WARNED.call_once(|| {
            log::warn!("syntactic features inactive: input carries no POS/chunk tags");
        });
        return;
    }
    if prep.has_pos {
        for i in span.start..span.end {
            if let Some(p) = prep.pos(i) {
                sink.emit(c, format_args!("pos={p}"), 1.0);
            }
        }
        for i in span.start..span.end.saturating_sub(1) {
            if let (Some(a), Some(b)) = (prep.pos(i), prep.pos(i + 1)) {
                sink.emit(c, format_args!("posbg={a}_{b}"), 1.0);
            }
        }
    }
    if prep.has_chunk {
        for i in span.start..span.end {
            if let Some(t) = prep.chunk_tag(i) {
                sink.emit(c, format_args!("chk={t}"), 1.0);
            }
        }
    }
}

fn is_content_verb(prep: &PreparedDoc, i: usize) -> bool {
    const AUX: [&str; 13] = [
        "be", "is", "are", "was", "were", "been", "being", "has", "have", "had", "do", "does", "did",
    ];
    match prep.pos(i) {
        Some(p) if p.starts_with('V') => !AUX.contains(&prep.lower[i].as_str()),
        _ => false,
    }
}

fn is_nounish(prep: &PreparedDoc, i: usize) -> bool {
    match prep.pos(i) {
        Some(p) => p.starts_with('N'),
        None => !prep.is_pro[i],
    }
}

fn pattern_detect(env: &ExtractEnv, prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::Pattern;
    // pleonastic it/that templates, anchored at the pronoun
    if span.len() == 1 && matches!(prep.lower[span.start].as_str(), "it" | "that") {
        for pat in &env.resources.pleonastic_patterns {
            if pat.matches_at(&prep.lower, span.start) {
                sink.emit(c, format_args!("pleo={}", pat.source.replace(' ', "_")), 1.0);
            }
        }
    }
    // pluralization of the nearest head noun on either side
    let w = env.window;
    if let Some(i) = (1..=w)
        .filter_map(|k| span.start.checked_sub(k))
        .find(|&i| is_nounish(prep, i))
    {
        let plural = prep.lower[i].ends_with('s') && !prep.lower[i].ends_with("ss");
        sink.emit(c, format_args!("prev-n-{}", if plural { "pl" } else { "sg" }), 1.0);
    }
    if let Some(i) = (0..w).map(|k| span.end + k).find(|&i| i < prep.len() && is_nounish(prep, i)) {
        let plural = prep.lower[i].ends_with('s') && !prep.lower[i].ends_with("ss");
        sink.emit(c, format_args!("next-n-{}", if plural { "pl" } else { "sg" }), 1.0);
    }
    // previous and next content verb within the window
    if let Some(i) = (1..=w)
        .filter_map(|k| span.start.checked_sub(k))
        .find(|&i| is_content_verb(prep, i))
    {
        sink.emit(c, format_args!("prev-v={}", prep.lower[i]), 1.0);
    }
    if let Some(i) = (0..w)
        .map(|k| span.end + k)
        .find(|&i| i < prep.len() && is_content_verb(prep, i))
    {
        sink.emit(c, format_args!("next-v={}", prep.lower[i]), 1.0);
    }
    // simple possessive constructions on both sides
    if span.start >= 2 && prep.lower[span.start - 1] == "'s" {
        sink.emit(c, format_args!("possessor={}", prep.lower[span.start - 2]), 1.0);
    }
    if span.end + 1 < prep.len() && prep.lower[span.end] == "'s" {
        sink.emit(c, format_args!("possessee={}", prep.lower[span.end + 1]), 1.0);
    }
}

fn semantic_detect(env: &ExtractEnv, prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::Semantic;
    for i in span.start..span.end {
        if let Some(entry) = env.resources.hypernyms.get(&prep.lower[i]) {
            for s in &entry.synsets {
                sink.emit(c, format_args!("syn={s}"), 1.0);
            }
            for h in &entry.hypernyms {
                sink.emit(c, format_args!("hyp={h}"), 1.0);
            }
        }
    }
    // synsets of neighboring verbs, a weak subcategorization signal
    let w = env.window;
    let mut verb_syn = |i: usize| {
        if is_content_verb(prep, i) {
            if let Some(entry) = env.resources.hypernyms.get(&prep.lower[i]) {
                for s in &entry.synsets {
                    sink.emit(c, format_args!("vsyn={s}"), 1.0);
                }
            }
            true
        } else {
            false
        }
    };
    let _ = (1..=w)
        .filter_map(|k| span.start.checked_sub(k))
        .find(|&i| verb_syn(i));
    let _ = (0..w)
        .map(|k| span.end + k)
        .find(|&i| i < prep.len() && verb_syn(i));
}

fn word_class(env: &ExtractEnv, prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::WordClass;
    let mut any_mwe = false;
    for i in span.start..span.end {
        if let Some(cluster) = env.resources.word_clusters.get(&prep.lower[i]) {
            sink.emit(c, format_args!("cluster={cluster}"), 1.0);
        }
        any_mwe |= env.resources.collocation_words.contains(&prep.lower[i]);
    }
    if any_mwe {
        sink.emit(c, format_args!("mwe"), 1.0);
    }
    // adjacent bigrams (inside the chunk and across its edges) that are
    // known collocations
    let lo = span.start.saturating_sub(1);
    let hi = (span.end + 1).min(prep.len());
    for i in lo..hi.saturating_sub(1) {
        let pair = (prep.lower[i].clone(), prep.lower[i + 1].clone());
        if env.resources.collocations.contains(&pair) {
            sink.emit(c, format_args!("mwe-bg"), 1.0);
        }
    }
}

fn list_detect(env: &ExtractEnv, prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::List;
    let joined = prep.joined(span);
    for g in env.resources.gazetteers_containing(&joined) {
        sink.emit(c, format_args!("on={}", g.name), 1.0);
    }
    if span.len() > 1 {
        let head = prep.head(span);
        for g in env.resources.gazetteers_containing(head) {
            sink.emit(c, format_args!("head-on={}", g.name), 1.0);
        }
    }
}

fn inference_detect(env: &ExtractEnv, prep: &PreparedDoc, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::Inference;
    let head = prep.head(span);
    let (gender, number) = match pronoun_info(head) {
        Some(p) => (p.gender, p.number),
        None => match env.resources.gender_number.get(head) {
            Some(gn) => (gn.gender, gn.number),
            None => (None, None),
        },
    };
    if let Some(g) = gender {
        sink.emit(c, format_args!("gender={}", g.as_str()), 1.0);
    }
    if let Some(n) = number {
        sink.emit(c, format_args!("num={}", n.as_str()), 1.0);
    }
}

fn history(env: &ExtractEnv, prep: &PreparedDoc, hyp: &Hypothesis, span: Span, sink: &mut impl BaseSink) {
    let c = FeatureClass::History;
    let mut seen: Vec<(u8, crate::types::MentionType)> = Vec::new();
    for chunk in hyp.chunks_rev() {
        if let ChunkLabel::Mention {
            entity_type,
            mention_type,
            ..
        } = chunk.label
        {
            let matches_form = (chunk.span.start..chunk.span.end).any(|i| {
                (span.start..span.end).any(|j| prep.lower[i] == prep.lower[j])
            });
            if matches_form && !seen.contains(&(entity_type, mention_type)) {
                seen.push((entity_type, mention_type));
            }
        }
    }
    for (etype, mtype) in seen {
        sink.emit(
            c,
            format_args!(
                "prev-label={}:{}",
                env.inventory.entity_type_name(etype),
                mtype.as_str()
            ),
            1.0,
        );
    }
}
