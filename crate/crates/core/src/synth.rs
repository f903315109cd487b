//! Deterministic synthetic corpora with planted lexical cues, for
//! desk-scale verification: a name lexicon per entity type, nominal aliases
//! recorded as knowledge pairs, and pronouns agreeing with a gender
//! lexicon. The planted labeling is learnable from the generated resources.

use crate::document::{Document, GoldMention, Token};
use crate::resources::{Gazetteer, Gender, GenderNumber, ResourceBundle, SemNumber};
use crate::types::{MentionType, Span};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub entity_types: Vec<String>,
    pub names_per_type: usize,
    /// Name token counts are drawn from 1..=name_len_max.
    pub name_len_max: usize,
    /// Probability that a token slot starts a mention.
    pub entity_rate: f64,
    /// Probability that a non-first mention refers to an existing chain.
    pub chain_reuse: f64,
    /// Among reuse mentions: P(pronoun), then P(nominal alias); the rest
    /// repeat the name.
    pub pronoun_rate: f64,
    pub nominal_rate: f64,
    pub sentences: (usize, usize),
    pub sentence_len: (usize, usize),
    pub filler_vocab: usize,
    /// Leading names of type 0 that also belong to type 1's lexicon; their
    /// true type is only revealed by a later coreferent pronoun.
    pub ambiguous_names: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            entity_types: vec!["PER".into(), "ORG".into(), "GPE".into()],
            names_per_type: 12,
            name_len_max: 2,
            entity_rate: 0.25,
            chain_reuse: 0.5,
            pronoun_rate: 0.45,
            nominal_rate: 0.35,
            sentences: (1, 2),
            sentence_len: (5, 9),
            filler_vocab: 40,
            ambiguous_names: 0,
        }
    }
}

/// The planted lexicons, kept so tests can write resource files or build
/// the in-memory bundle.
#[derive(Debug, Clone)]
pub struct SynthLexicon {
    /// names[type][i] = tokens of the i-th name (capitalized).
    pub names: Vec<Vec<Vec<String>>>,
    /// aliases[type][i] = single lowercase nominal for the i-th name.
    pub aliases: Vec<Vec<String>>,
    /// gender[type][i] of the i-th name's referent.
    pub gender: Vec<Vec<Gender>>,
    pub fillers: Vec<String>,
}

const CONSONANTS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(CONSONANTS[rng.random_range(0..CONSONANTS.len())]);
        w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
    }
    w
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

pub fn build_lexicon(seed: u64, params: &SynthParams) -> SynthLexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: FxHashSet<String> = FxHashSet::default();
    let mut fresh = |rng: &mut ChaCha8Rng, syll: usize| -> String {
        loop {
            let w = pseudo_word(rng, syll);
            if used.insert(w.clone()) {
                return w;
            }
        }
    };
    let t = params.entity_types.len();
    let mut names: Vec<Vec<Vec<String>>> = vec![Vec::new(); t];
    let mut aliases: Vec<Vec<String>> = vec![Vec::new(); t];
    let mut gender: Vec<Vec<Gender>> = vec![Vec::new(); t];
    for ty in 0..t {
        for i in 0..params.names_per_type {
            if ty == 1 && i < params.ambiguous_names && !names[0].is_empty() {
                // shared surface form with type 0
                let shared = names[0][i].clone();
                names[1].push(shared);
            } else {
                let len = 1 + (i % params.name_len_max.max(1));
                let toks: Vec<String> = (0..len).map(|_| capitalize(&fresh(&mut rng, 2))).collect();
                names[ty].push(toks);
            }
            aliases[ty].push(fresh(&mut rng, 3));
            let g = if ty == 0 {
                if i % 2 == 0 {
                    Gender::Male
                } else {
                    Gender::Female
                }
            } else {
                Gender::Neuter
            };
            gender[ty].push(g);
        }
    }
    let fillers: Vec<String> = (0..params.filler_vocab).map(|_| fresh(&mut rng, 2)).collect();
    SynthLexicon {
        names,
        aliases,
        gender,
        fillers,
    }
}

impl SynthLexicon {
    /// In-memory resource bundle with the planted cues.
    pub fn bundle(&self, params: &SynthParams) -> ResourceBundle {
        let mut bundle = ResourceBundle::default();
        for (ty, tname) in params.entity_types.iter().enumerate() {
            let entries: FxHashSet<String> = self.names[ty]
                .iter()
                .map(|toks| toks.join(" ").to_lowercase())
                .collect();
            bundle.gazetteers.push(Gazetteer {
                name: format!("{}_names", tname.to_lowercase()),
                entries,
            });
            let noms: FxHashSet<String> = self.aliases[ty].iter().cloned().collect();
            bundle.gazetteers.push(Gazetteer {
                name: format!("{}_noms", tname.to_lowercase()),
                entries: noms,
            });
            for (i, toks) in self.names[ty].iter().enumerate() {
                bundle
                    .knowledge_pairs
                    .insert((toks.join(" ").to_lowercase(), self.aliases[ty][i].clone()));
                // ambiguous names carry no gender entry; the pronoun itself
                // is the only type cue
                let ambiguous = i < params.ambiguous_names && ty < 2 && params.ambiguous_names > 0;
                if !ambiguous {
                    let head = toks.last().expect("names are non-empty").to_lowercase();
                    bundle.gender_number.insert(
                        head,
                        GenderNumber {
                            gender: Some(self.gender[ty][i]),
                            number: Some(SemNumber::Singular),
                        },
                    );
                }
                bundle.gender_number.insert(
                    self.aliases[ty][i].clone(),
                    GenderNumber {
                        gender: Some(self.gender[ty][i]),
                        number: Some(SemNumber::Singular),
                    },
                );
            }
        }
        bundle
    }

    /// Writes the lexicons as resource files under `dir`.
    pub fn write_files(&self, params: &SynthParams, dir: &std::path::Path) -> crate::error::Result<crate::resources::ResourcePaths> {
        use std::io::Write;
        let gaz_dir = dir.join("gazetteers");
        std::fs::create_dir_all(&gaz_dir)?;
        for (ty, tname) in params.entity_types.iter().enumerate() {
            let mut f = std::fs::File::create(gaz_dir.join(format!("{}_names.txt", tname.to_lowercase())))?;
            let mut entries: Vec<String> = self.names[ty]
                .iter()
                .map(|t| t.join(" ").to_lowercase())
                .collect();
            entries.sort();
            entries.dedup();
            for e in entries {
                writeln!(f, "{e}")?;
            }
            let mut f = std::fs::File::create(gaz_dir.join(format!("{}_noms.txt", tname.to_lowercase())))?;
            let mut noms: Vec<String> = self.aliases[ty].clone();
            noms.sort();
            for e in noms {
                writeln!(f, "{e}")?;
            }
        }
        let kp_path = dir.join("knowledge_pairs.tsv");
        {
            let mut f = std::fs::File::create(&kp_path)?;
            let mut lines: Vec<String> = Vec::new();
            for ty in 0..params.entity_types.len() {
                for (i, toks) in self.names[ty].iter().enumerate() {
                    lines.push(format!("{}\t{}", toks.join(" ").to_lowercase(), self.aliases[ty][i]));
                }
            }
            lines.sort();
            lines.dedup();
            for l in lines {
                writeln!(f, "{l}")?;
            }
        }
        let gn_path = dir.join("gender_number.tsv");
        {
            let bundle = self.bundle(params);
            let mut lines: Vec<String> = bundle
                .gender_number
                .iter()
                .map(|(w, gn)| {
                    format!(
                        "{w}\t{}\t{}",
                        gn.gender.map(|g| g.as_str()).unwrap_or("-"),
                        gn.number.map(|n| n.as_str()).unwrap_or("-")
                    )
                })
                .collect();
            lines.sort();
            let mut f = std::fs::File::create(&gn_path)?;
            for l in lines {
                writeln!(f, "{l}")?;
            }
        }
        Ok(crate::resources::ResourcePaths {
            gazetteer_dir: Some(gaz_dir),
            knowledge_pairs: Some(kp_path),
            gender_number: Some(gn_path),
            ..Default::default()
        })
    }
}

struct ActiveChain {
    entity_id: usize,
    etype: usize,
    name_idx: usize,
    last_mention_order: usize,
}

/// Generates documents `range` (e.g. 0..500 for training, 500..600 for a
/// fresh held-out set) with the lexicon derived from the same seed.
pub fn generate_docs(seed: u64, params: &SynthParams, range: std::ops::Range<usize>) -> Vec<Document> {
    let lexicon = build_lexicon(seed, params);
    range
        .map(|i| generate_doc(seed, params, &lexicon, i))
        .collect()
}

fn pronoun_for(g: Gender, rng: &mut ChaCha8Rng) -> &'static str {
    match g {
        Gender::Male => ["he", "him", "his"][rng.random_range(0..3)],
        Gender::Female => ["she", "her", "hers"][rng.random_range(0..3)],
        Gender::Neuter => ["it", "its", "itself"][rng.random_range(0..3)],
    }
}

fn generate_doc(seed: u64, params: &SynthParams, lexicon: &SynthLexicon, index: usize) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let t = params.entity_types.len();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_breaks: Vec<usize> = Vec::new();
    let mut mentions: Vec<GoldMention> = Vec::new();
    let mut active: Vec<ActiveChain> = Vec::new();
    let mut used_names: FxHashSet<(usize, usize)> = FxHashSet::default();
    let mut next_entity = 0usize;
    let mut mention_order = 0usize;
    let mut forced_pronoun: Option<usize> = None;

    let n_sentences = rng.random_range(params.sentences.0..=params.sentences.1);
    for s in 0..n_sentences {
        if s > 0 {
            sentence_breaks.push(tokens.len());
        }
        let target = rng.random_range(params.sentence_len.0..=params.sentence_len.1);
        let sentence_end = tokens.len() + target;
        while tokens.len() < sentence_end {
            let remaining = sentence_end - tokens.len();
            let want_mention = rng.random::<f64>() < params.entity_rate;
            if want_mention {
                if let Some(chain_idx) = forced_pronoun.take() {
                    emit_pronoun(params, lexicon, &mut rng, &mut tokens, &mut mentions, &mut active, chain_idx, &mut mention_order);
                    continue;
                }
                let reuse = !active.is_empty() && rng.random::<f64>() < params.chain_reuse;
                if reuse {
                    let r = rng.random::<f64>();
                    if r < params.pronoun_rate {
                        // pronouns refer to the most recently mentioned chain
                        let chain_idx = active
                            .iter()
                            .enumerate()
                            .max_by_key(|(_, c)| c.last_mention_order)
                            .map(|(i, _)| i)
                            .expect("active is non-empty");
                        emit_pronoun(params, lexicon, &mut rng, &mut tokens, &mut mentions, &mut active, chain_idx, &mut mention_order);
                        continue;
                    }
                    let chain_idx = rng.random_range(0..active.len());
                    let (etype, name_idx, entity_id) = {
                        let c = &active[chain_idx];
                        (c.etype, c.name_idx, c.entity_id)
                    };
                    if r < params.pronoun_rate + params.nominal_rate {
                        let alias = &lexicon.aliases[etype][name_idx];
                        let start = tokens.len();
                        push_token(&mut tokens, alias, "NN", "B-NP");
                        mentions.push(gold_mention(start, start + 1, etype, MentionType::Nominal, entity_id, params));
                        active[chain_idx].last_mention_order = mention_order;
                        mention_order += 1;
                    } else {
                        let name = &lexicon.names[etype][name_idx];
                        if name.len() > remaining {
                            push_filler(lexicon, &mut rng, &mut tokens);
                            continue;
                        }
                        let start = tokens.len();
                        for (k, w) in name.iter().enumerate() {
                            push_token(&mut tokens, w, "NNP", if k == 0 { "B-NP" } else { "I-NP" });
                        }
                        mentions.push(gold_mention(start, start + name.len(), etype, MentionType::Name, entity_id, params));
                        active[chain_idx].last_mention_order = mention_order;
                        mention_order += 1;
                    }
                } else {
                    // a new entity with an unused name that fits
                    let etype = rng.random_range(0..t);
                    let candidates: Vec<usize> = (0..params.names_per_type)
                        .filter(|&i| {
                            !used_names.contains(&(etype, i))
                                && lexicon.names[etype][i].len() <= remaining
                                && !(etype == 1 && i < params.ambiguous_names && used_names.contains(&(0, i)))
                                && !(etype == 0 && i < params.ambiguous_names && used_names.contains(&(1, i)))
                        })
                        .collect();
                    if candidates.is_empty() {
                        push_filler(lexicon, &mut rng, &mut tokens);
                        continue;
                    }
                    let name_idx = candidates[rng.random_range(0..candidates.len())];
                    used_names.insert((etype, name_idx));
                    let name = &lexicon.names[etype][name_idx];
                    let start = tokens.len();
                    for (k, w) in name.iter().enumerate() {
                        push_token(&mut tokens, w, "NNP", if k == 0 { "B-NP" } else { "I-NP" });
                    }
                    mentions.push(gold_mention(start, start + name.len(), etype, MentionType::Name, next_entity, params));
                    active.push(ActiveChain {
                        entity_id: next_entity,
                        etype,
                        name_idx,
                        last_mention_order: mention_order,
                    });
                    // an ambiguous name must be disambiguated by a pronoun
                    if etype < 2 && name_idx < params.ambiguous_names {
                        forced_pronoun = Some(active.len() - 1);
                    }
                    next_entity += 1;
                    mention_order += 1;
                }
            } else {
                push_filler(lexicon, &mut rng, &mut tokens);
            }
        }
    }
    // flush a pending disambiguation pronoun
    if let Some(chain_idx) = forced_pronoun.take() {
        emit_pronoun(params, lexicon, &mut rng, &mut tokens, &mut mentions, &mut active, chain_idx, &mut mention_order);
        push_filler(lexicon, &mut rng, &mut tokens);
    }

    Document {
        id: format!("synth-{index}"),
        tokens,
        sentence_breaks,
        gold: if mentions.is_empty() { None } else { Some(mentions) },
    }
}

#[allow(clippy::too_many_arguments)]
fn emit_pronoun(
    params: &SynthParams,
    lexicon: &SynthLexicon,
    rng: &mut ChaCha8Rng,
    tokens: &mut Vec<Token>,
    mentions: &mut Vec<GoldMention>,
    active: &mut [ActiveChain],
    chain_idx: usize,
    mention_order: &mut usize,
) {
    let c = &active[chain_idx];
    let g = lexicon.gender[c.etype][c.name_idx];
    let form = pronoun_for(g, rng);
    let start = tokens.len();
    push_token(tokens, form, "PRP", "B-NP");
    mentions.push(gold_mention(start, start + 1, c.etype, MentionType::Pronoun, c.entity_id, params));
    active[chain_idx].last_mention_order = *mention_order;
    *mention_order += 1;
}

fn push_token(tokens: &mut Vec<Token>, form: &str, pos: &str, chunk: &str) {
    tokens.push(Token {
        form: form.to_string(),
        pos: Some(pos.to_string()),
        chunk: Some(chunk.to_string()),
    });
}

fn push_filler(lexicon: &SynthLexicon, rng: &mut ChaCha8Rng, tokens: &mut Vec<Token>) {
    let idx = rng.random_range(0..lexicon.fillers.len());
    let pos = ["NN", "VBD", "DT", "IN", "JJ"][idx % 5];
    let form = &lexicon.fillers[idx];
    tokens.push(Token {
        form: form.clone(),
        pos: Some(pos.to_string()),
        chunk: Some("O".to_string()),
    });
}

fn gold_mention(
    start: usize,
    end: usize,
    etype: usize,
    mtype: MentionType,
    entity: usize,
    _params: &SynthParams,
) -> GoldMention {
    GoldMention {
        span: Span::new(start, end),
        entity_type: etype as u8,
        subtype: None,
        mention_type: mtype,
        entity_id: format!("e{entity}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let params = SynthParams::default();
        let a = generate_docs(7, &params, 0..20);
        let b = generate_docs(7, &params, 0..20);
        assert_eq!(a, b);
        let c = generate_docs(8, &params, 0..20);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_entity_rate_means_no_mentions() {
        let params = SynthParams {
            entity_rate: 0.0,
            ..Default::default()
        };
        for doc in generate_docs(3, &params, 0..30) {
            assert!(doc.gold.is_none());
        }
    }

    #[test]
    fn statistics_track_requested_rates() {
        let params = SynthParams {
            entity_rate: 0.3,
            chain_reuse: 0.5,
            sentences: (2, 3),
            sentence_len: (6, 10),
            ..Default::default()
        };
        let docs = generate_docs(11, &params, 0..1000);
        let mut mention_count = 0usize;
        let mut slots = 0usize;
        let mut non_first = 0usize;
        let mut reused = 0usize;
        for doc in &docs {
            let gold = doc.gold.as_deref().unwrap_or(&[]);
            mention_count += gold.len();
            // one decision slot per chunk
            let mention_tokens: usize = gold.iter().map(|m| m.span.len()).sum();
            slots += doc.len() - mention_tokens + gold.len();
            let mut seen = std::collections::HashSet::new();
            for m in gold {
                if !seen.insert(m.entity_id.clone()) {
                    reused += 1;
                }
            }
            if !gold.is_empty() {
                non_first += gold.len() - 1;
            }
        }
        let rate = mention_count as f64 / slots as f64;
        assert!(
            (rate - 0.3).abs() / 0.3 < 0.05,
            "mention rate {rate} not within 5% of 0.3"
        );
        // chain reuse applies to non-first mentions; forced pronouns and
        // pronoun-slot reuse keep this close to the requested rate
        let reuse_rate = reused as f64 / non_first as f64;
        assert!(
            (reuse_rate - 0.5).abs() / 0.5 < 0.12,
            "reuse rate {reuse_rate} not near 0.5"
        );
    }

    #[test]
    fn ambiguous_names_get_disambiguating_pronouns() {
        let params = SynthParams {
            ambiguous_names: 4,
            entity_rate: 0.35,
            ..Default::default()
        };
        let lexicon = build_lexicon(21, &params);
        assert_eq!(lexicon.names[0][0], lexicon.names[1][0]);
        let docs = generate_docs(21, &params, 0..200);
        let shared: Vec<String> = (0..4).map(|i| lexicon.names[0][i].join(" ").to_lowercase()).collect();
        let mut ambiguous_seen = 0;
        for doc in &docs {
            let gold = doc.gold.as_deref().unwrap_or(&[]);
            let mut first_of: std::collections::HashMap<&str, &GoldMention> = Default::default();
            for m in gold {
                first_of.entry(m.entity_id.as_str()).or_insert(m);
            }
            for m in first_of.values() {
                if m.mention_type != MentionType::Name {
                    continue;
                }
                let text = (m.span.start..m.span.end)
                    .map(|i| doc.form(i).to_lowercase())
                    .collect::<Vec<_>>()
                    .join(" ");
                if shared.contains(&text) {
                    ambiguous_seen += 1;
                    // a disambiguating pronoun of the same entity follows
                    let has_pronoun = gold.iter().any(|p| {
                        p.entity_id == m.entity_id
                            && p.mention_type == MentionType::Pronoun
                            && p.span.start > m.span.start
                    });
                    assert!(has_pronoun, "ambiguous first mention without pronoun in {}", doc.id);
                }
            }
        }
        assert!(ambiguous_seen > 10, "ambiguous names should occur");
    }

    #[test]
    fn gold_is_loadable_and_chains_are_consistent() {
        let params = SynthParams::default();
        let docs = generate_docs(5, &params, 0..50);
        let mut with_chains = 0;
        for doc in &docs {
            if let Some(ann) = doc.gold_annotation() {
                if ann.chain_count() < ann.mentions.len() {
                    with_chains += 1;
                }
            }
        }
        assert!(with_chains > 5, "some documents should have non-trivial chains");
    }
}
