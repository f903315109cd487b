//! Count-based features over the hypothesis state: entity/mention counts
//! and ratios, chain size, intervening material, an approximate Hobbs
//! distance over noun chunks, and the decayed density of the hypothesized
//! entity. These apply to chain decisions only.

use super::{cap, decile, BaseSink, ExtractEnv, PreparedDoc};
use crate::hypothesis::{Chain, Hypothesis};
use crate::registry::FeatureClass;
use crate::types::Span;

/// Decayed density of a chain among all prior mentions:
/// `Σ_{m ∈ chain} 0.5^d(m) / Σ_m 0.5^d(m)` where `m` ranges over all
/// mentions before the current position and `d(m)` is the mention distance
/// (the most recent prior mention has `d = 1`). `None` when there are no
/// prior mentions.
pub fn decayed_density(chain: &Chain, prior_mentions_total: u32) -> Option<f64> {
    if prior_mentions_total == 0 {
        return None;
    }
    let d_of = |index: u32| (prior_mentions_total - index) as f64;
    let numerator: f64 = chain
        .mentions
        .iter()
        .map(|m| 0.5_f64.powf(d_of(m.index)))
        .sum();
    let denominator: f64 = (0..prior_mentions_total)
        .map(|i| 0.5_f64.powf(d_of(i)))
        .sum();
    Some(numerator / denominator)
}

/// Approximate Hobbs distance: the number of noun-chunk units between the
/// antecedent and the anaphor, scanning leftward over the input chunk tags
/// (`B-NP` starts a unit). `None` when the input carries no chunk tags.
pub fn hobbs_distance(prep: &PreparedDoc, antecedent_end: usize, anaphor_start: usize) -> Option<usize> {
    if !prep.has_chunk || anaphor_start < antecedent_end {
        return None;
    }
    let mut units = 0usize;
    for i in antecedent_end..anaphor_start {
        if let Some(tag) = prep.chunk_tag(i) {
            if tag.eq_ignore_ascii_case("b-np") {
                units += 1;
            }
        }
    }
    Some(units)
}

/// Count features for one chain decision. `joined_chain` is the chain the
/// current mention is being linked into (None = a new chain is started).
pub fn count_base(
    env: &ExtractEnv,
    prep: &PreparedDoc,
    hyp: &Hypothesis,
    span: Span,
    joined_chain: Option<&Chain>,
    sink: &mut impl BaseSink,
) {
    if !env.on(FeatureClass::Count) || !env.switches.chain_decisions {
        return;
    }
    let c = FeatureClass::Count;
    let entities = hyp.entity_count() + joined_chain.is_none() as usize;
    let mentions = hyp.mention_count() as usize + 1;
    let words = span.end;
    sink.emit(c, format_args!("entities"), entities as f64);
    sink.emit(c, format_args!("entities={}", cap(entities, 10)), 1.0);
    sink.emit(c, format_args!("mentions"), mentions as f64);
    sink.emit(c, format_args!("mentions={}", cap(mentions, 10)), 1.0);
    let em_ratio = entities as f64 / mentions as f64;
    sink.emit(c, format_args!("e/m"), em_ratio);
    sink.emit(c, format_args!("e/m~b{}", decile(em_ratio)), 1.0);
    let ew_ratio = entities as f64 / words as f64;
    sink.emit(c, format_args!("e/w"), ew_ratio);
    sink.emit(c, format_args!("e/w~b{}", decile(ew_ratio)), 1.0);
    let mw_ratio = mentions as f64 / words as f64;
    sink.emit(c, format_args!("m/w"), mw_ratio);
    sink.emit(c, format_args!("m/w~b{}", decile(mw_ratio)), 1.0);

    let chain_size = joined_chain.map(|ch| ch.len() + 1).unwrap_or(1);
    sink.emit(c, format_args!("chain-size"), chain_size as f64);
    sink.emit(c, format_args!("chain-size={}", cap(chain_size, 10)), 1.0);
    let chain_ratio = chain_size as f64 / mentions as f64;
    sink.emit(c, format_args!("chain/m"), chain_ratio);
    sink.emit(c, format_args!("chain/m~b{}", decile(chain_ratio)), 1.0);

    match joined_chain {
        Some(chain) => {
            let last = chain.last();
            let intervening = hyp.mention_count().saturating_sub(last.index + 1) as usize;
            sink.emit(c, format_args!("iv-m"), intervening as f64);
            sink.emit(c, format_args!("iv-m={}", cap(intervening, 10)), 1.0);
            let same_type = hyp
                .mentions_in_order()
                .iter()
                .filter(|(m, _)| m.index > last.index && m.entity_type == last.entity_type)
                .count();
            sink.emit(c, format_args!("iv-m-type={}", cap(same_type, 10)), 1.0);
            let breaks = prep
                .doc
                .sentence_breaks_between(last.span.end.saturating_sub(1), span.start);
            sink.emit(c, format_args!("iv-s={}", cap(breaks, 5)), 1.0);
            if let Some(h) = hobbs_distance(prep, last.span.end, span.start) {
                sink.emit(c, format_args!("hobbs"), h as f64);
                sink.emit(c, format_args!("hobbs={}", cap(h, 10)), 1.0);
            }
            if let Some(density) = decayed_density(chain, hyp.mention_count()) {
                sink.emit(c, format_args!("density"), density);
                sink.emit(c, format_args!("density~b{}", decile(density)), 1.0);
            }
        }
        None => {
            // a fresh chain has density 0 among the prior mentions
            if hyp.mention_count() > 0 {
                sink.emit(c, format_args!("density~b0"), 1.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::ChainMention;
    use crate::types::{MentionType, Span};

    fn chain_with_indices(indices: &[u32]) -> Chain {
        Chain {
            mentions: indices
                .iter()
                .map(|&i| ChainMention {
                    span: Span::new(i as usize * 2, i as usize * 2 + 1),
                    entity_type: 0,
                    subtype: None,
                    mention_type: MentionType::Name,
                    index: i,
                })
                .collect(),
        }
    }

    #[test]
    fn density_all_prior_in_chain_is_one() {
        let chain = chain_with_indices(&[0, 1, 2]);
        let d = decayed_density(&chain, 3).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_hand_computed_example() {
        // three prior mentions at d = 1, 2, 3; the chain holds d=1 and d=3
        let chain = chain_with_indices(&[0, 2]);
        let d = decayed_density(&chain, 3).unwrap();
        assert!((d - 5.0 / 7.0).abs() < 1e-9, "got {d}");
    }

    #[test]
    fn density_none_without_prior_mentions() {
        let chain = chain_with_indices(&[0]);
        assert!(decayed_density(&chain, 0).is_none());
    }

    #[test]
    fn density_partitions_to_one_across_chains() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let mentions = rng.random_range(1..=12u32);
            let chains_n = rng.random_range(1..=mentions.min(5));
            let mut members: Vec<Vec<u32>> = vec![Vec::new(); chains_n as usize];
            for m in 0..mentions {
                members[rng.random_range(0..chains_n) as usize].push(m);
            }
            let total: f64 = members
                .iter()
                .filter(|ms| !ms.is_empty())
                .map(|ms| decayed_density(&chain_with_indices(ms), mentions).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "sum {total}");
        }
    }
}
