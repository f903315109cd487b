//! Alignment-based evaluation: mention detection P/R/F and an ACE-style
//! 0-100 entity score.
//!
//! The score is a documented approximation of the ACE metric, not official
//! scorer parity: system mentions are matched one-to-one with reference
//! mentions (maximum cardinality, then maximum token overlap, requiring at
//! least one shared token), matched mentions induce a maximum-weight
//! matching between system and reference entities, and costs accrue for
//! misses, false alarms, type errors, and mentions whose entities fail to
//! align. See `docs/scoring.md` for the exact formula.

use crate::document::{AnnotatedMention, Annotation};
use crate::error::{EdtError, Result};
use crate::matching::max_weight_assignment;
use crate::types::MentionType;
use serde::{Deserialize, Serialize};

/// Cost weights and per-type scaling factors. All weights must be >= 0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CostModel {
    pub miss: f64,
    pub false_alarm: f64,
    pub type_error: f64,
    /// Scale per entity type id (missing entries = 1.0).
    #[serde(default)]
    pub entity_type_scale: Vec<f64>,
    /// Scale per mention type (NAM, NOM, PRO order; missing = 1.0).
    #[serde(default)]
    pub mention_type_scale: Vec<f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            miss: 1.0,
            false_alarm: 0.75,
            type_error: 0.5,
            entity_type_scale: Vec::new(),
            mention_type_scale: Vec::new(),
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let all_ok = self.miss >= 0.0
            && self.false_alarm >= 0.0
            && self.type_error >= 0.0
            && self.entity_type_scale.iter().all(|&s| s >= 0.0)
            && self.mention_type_scale.iter().all(|&s| s >= 0.0);
        if all_ok {
            Ok(())
        } else {
            Err(EdtError::Config("cost weights must be non-negative".into()))
        }
    }

    fn scale(&self, m: &AnnotatedMention) -> f64 {
        let e = self
            .entity_type_scale
            .get(m.entity_type as usize)
            .copied()
            .unwrap_or(1.0);
        let mt = self
            .mention_type_scale
            .get(match m.mention_type {
                MentionType::Name => 0,
                MentionType::Nominal => 1,
                MentionType::Pronoun => 2,
            })
            .copied()
            .unwrap_or(1.0);
        e * mt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// Detection and coreference errors both count.
    Full,
    /// Each mention is treated as its own entity on both sides.
    DetectionOnly,
    /// Type errors are ignored; only chain placement matters.
    CorefOnly,
}

/// One-to-one mention matching: maximum cardinality first, then maximum
/// total token overlap, edges requiring at least one shared token.
/// Returns (system index, reference index) pairs.
pub fn align_mentions(
    system: &[AnnotatedMention],
    reference: &[AnnotatedMention],
) -> Vec<(usize, usize)> {
    // cardinality dominates overlap through a large per-edge bonus
    let bonus = 1.0
        + system
            .iter()
            .map(|m| m.span.len() as f64)
            .sum::<f64>()
            .max(1.0)
            * 2.0;
    let weights: Vec<Vec<f64>> = system
        .iter()
        .map(|s| {
            reference
                .iter()
                .map(|r| {
                    let o = s.span.overlap(&r.span);
                    if o > 0 {
                        bonus + o as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    max_weight_assignment(&weights)
        .into_iter()
        .enumerate()
        .filter_map(|(s, r)| r.map(|r| (s, r)))
        .collect()
}

/// Maximum-weight matching between system and reference entities, weight =
/// number of mention pairs shared under `mention_matching`. Returns
/// (system chain, reference chain) pairs.
pub fn align_entities(
    system: &Annotation,
    reference: &Annotation,
    mention_matching: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    let sys_chains = system.chain_count();
    let ref_chains = reference.chain_count();
    if sys_chains == 0 || ref_chains == 0 {
        return Vec::new();
    }
    let mut weights = vec![vec![0.0_f64; ref_chains]; sys_chains];
    for &(s, r) in mention_matching {
        weights[system.mentions[s].chain][reference.mentions[r].chain] += 1.0;
    }
    max_weight_assignment(&weights)
        .into_iter()
        .enumerate()
        .filter_map(|(s, r)| r.map(|r| (s, r)))
        .collect()
}

/// Per-document alignment outcome, kept as the report's trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocTrace {
    pub doc_id: String,
    /// (system index, reference index) matched mention pairs.
    pub matched: Vec<(usize, usize)>,
    pub missed_refs: Vec<usize>,
    pub false_alarms: Vec<usize>,
    /// Matched pairs with entity-type disagreement.
    pub type_errors: Vec<(usize, usize)>,
    /// Matched pairs whose entities failed to align.
    pub wrong_entity: Vec<(usize, usize)>,
    pub cost: f64,
    pub max_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeBreakdown {
    pub entity_type: u8,
    pub system_count: usize,
    pub reference_count: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub mode: ScoringMode,
    pub mention_precision: f64,
    pub mention_recall: f64,
    pub mention_f1: f64,
    /// 0..=100, 100 iff zero total cost.
    pub ace_like: f64,
    pub total_cost: f64,
    pub max_cost: f64,
    pub per_type: Vec<TypeBreakdown>,
    pub traces: Vec<DocTrace>,
}

fn singletonize(ann: &Annotation) -> Annotation {
    Annotation {
        mentions: ann
            .mentions
            .iter()
            .enumerate()
            .map(|(i, m)| AnnotatedMention { chain: i, ..*m })
            .collect(),
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Scores aligned (system, reference) annotation pairs. Pairs must come in
/// matching document order with matching ids.
pub fn ace_like_score(
    pairs: &[(String, Annotation, Annotation)],
    costs: &CostModel,
    mode: ScoringMode,
) -> Result<ScoreReport> {
    costs.validate()?;
    let mut total_cost = 0.0;
    let mut max_cost = 0.0;
    let mut matched_total = 0usize;
    let mut sys_total = 0usize;
    let mut ref_total = 0usize;
    let mut traces = Vec::with_capacity(pairs.len());
    let mut per_type: std::collections::BTreeMap<u8, (usize, usize, usize)> =
        std::collections::BTreeMap::new();

    for (doc_id, system_in, reference_in) in pairs {
        let (system, reference) = match mode {
            ScoringMode::DetectionOnly => (singletonize(system_in), singletonize(reference_in)),
            _ => (system_in.clone(), reference_in.clone()),
        };
        let matching = align_mentions(&system.mentions, &reference.mentions);
        let entity_matching = align_entities(&system, &reference, &matching);
        let entity_aligned = |s: usize, r: usize| {
            entity_matching
                .iter()
                .any(|&(sc, rc)| sc == system.mentions[s].chain && rc == reference.mentions[r].chain)
        };

        let mut trace = DocTrace {
            doc_id: doc_id.clone(),
            matched: matching.clone(),
            missed_refs: Vec::new(),
            false_alarms: Vec::new(),
            type_errors: Vec::new(),
            wrong_entity: Vec::new(),
            cost: 0.0,
            max_cost: 0.0,
        };

        let matched_ref: std::collections::HashSet<usize> =
            matching.iter().map(|&(_, r)| r).collect();
        let matched_sys: std::collections::HashSet<usize> =
            matching.iter().map(|&(s, _)| s).collect();

        for (r, m) in reference.mentions.iter().enumerate() {
            trace.max_cost += costs.miss * costs.scale(m);
            if !matched_ref.contains(&r) {
                trace.cost += costs.miss * costs.scale(m);
                trace.missed_refs.push(r);
            }
        }
        for (s, m) in system.mentions.iter().enumerate() {
            if !matched_sys.contains(&s) {
                trace.cost += costs.false_alarm * costs.scale(m);
                trace.false_alarms.push(s);
            }
        }
        for &(s, r) in &matching {
            let rm = &reference.mentions[r];
            let scale = costs.scale(rm);
            if mode != ScoringMode::CorefOnly
                && system.mentions[s].entity_type != rm.entity_type
            {
                trace.cost += costs.type_error * scale;
                trace.type_errors.push((s, r));
            }
            if !entity_aligned(s, r) {
                // the mention is detected but placed in an entity that does
                // not correspond to its reference entity
                trace.cost += costs.miss * scale;
                trace.wrong_entity.push((s, r));
            }
        }

        matched_total += matching.len();
        sys_total += system.mentions.len();
        ref_total += reference.mentions.len();
        for (s, r) in &matching {
            let sm = &system.mentions[*s];
            let rm = &reference.mentions[*r];
            if sm.entity_type == rm.entity_type {
                per_type.entry(rm.entity_type).or_default().2 += 1;
            }
        }
        for m in &system.mentions {
            per_type.entry(m.entity_type).or_default().0 += 1;
        }
        for m in &reference.mentions {
            per_type.entry(m.entity_type).or_default().1 += 1;
        }

        total_cost += trace.cost;
        max_cost += trace.max_cost;
        traces.push(trace);
    }

    let precision = if sys_total > 0 {
        matched_total as f64 / sys_total as f64
    } else if ref_total == 0 {
        1.0
    } else {
        0.0
    };
    let recall = if ref_total > 0 {
        matched_total as f64 / ref_total as f64
    } else {
        1.0
    };
    let ace_like = if max_cost > 0.0 {
        (100.0 * (1.0 - total_cost / max_cost)).max(0.0)
    } else if total_cost > 0.0 {
        0.0
    } else {
        100.0
    };

    Ok(ScoreReport {
        mode,
        mention_precision: precision,
        mention_recall: recall,
        mention_f1: f1(precision, recall),
        ace_like,
        total_cost,
        max_cost,
        per_type: per_type
            .into_iter()
            .map(|(etype, (sys, refc, correct))| {
                let p = if sys > 0 { correct as f64 / sys as f64 } else { 0.0 };
                let r = if refc > 0 { correct as f64 / refc as f64 } else { 0.0 };
                TypeBreakdown {
                    entity_type: etype,
                    system_count: sys,
                    reference_count: refc,
                    correct,
                    precision: p,
                    recall: r,
                    f1: f1(p, r),
                }
            })
            .collect(),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Span;

    fn m(start: usize, end: usize, etype: u8, chain: usize) -> AnnotatedMention {
        AnnotatedMention {
            span: Span::new(start, end),
            entity_type: etype,
            subtype: None,
            mention_type: MentionType::Name,
            chain,
        }
    }

    fn ann(mentions: Vec<AnnotatedMention>) -> Annotation {
        Annotation { mentions }
    }

    #[test]
    fn identical_sets_align_identically() {
        let a = vec![m(0, 2, 0, 0), m(3, 4, 1, 1)];
        let matching = align_mentions(&a, &a);
        assert_eq!(matching, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn disjoint_spans_do_not_match() {
        let a = vec![m(0, 1, 0, 0)];
        let b = vec![m(5, 6, 0, 0)];
        assert!(align_mentions(&a, &b).is_empty());
    }

    #[test]
    fn off_by_one_still_matches_via_overlap() {
        let sys = vec![m(0, 2, 0, 0)];
        let reference = vec![m(1, 3, 0, 0)];
        assert_eq!(align_mentions(&sys, &reference), vec![(0, 0)]);
    }

    #[test]
    fn alignment_is_bruteforce_optimal_small() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let gen = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<AnnotatedMention> {
                let n = rng.random_range(0..=5);
                (0..n)
                    .map(|_| {
                        let start = rng.random_range(0..8);
                        let len = rng.random_range(1..=3);
                        m(start, start + len, 0, 0)
                    })
                    .collect()
            };
            let sys = gen(&mut rng);
            let reference = gen(&mut rng);
            let matching = align_mentions(&sys, &reference);
            // brute force: maximize (cardinality, overlap)
            fn rec(
                sys: &[AnnotatedMention],
                reference: &[AnnotatedMention],
                s: usize,
                used: &mut Vec<bool>,
            ) -> (usize, usize) {
                if s == sys.len() {
                    return (0, 0);
                }
                let mut best = rec(sys, reference, s + 1, used);
                for r in 0..reference.len() {
                    let o = sys[s].span.overlap(&reference[r].span);
                    if o > 0 && !used[r] {
                        used[r] = true;
                        let (c, ov) = rec(sys, reference, s + 1, used);
                        used[r] = false;
                        let cand = (c + 1, ov + o);
                        if cand > best {
                            best = cand;
                        }
                    }
                }
                best
            }
            let best = rec(&sys, &reference, 0, &mut vec![false; reference.len()]);
            let got_card = matching.len();
            let got_overlap: usize = matching
                .iter()
                .map(|&(s, r)| sys[s].span.overlap(&reference[r].span))
                .sum();
            assert_eq!((got_card, got_overlap), best);
        }
    }

    #[test]
    fn perfect_output_scores_100() {
        let reference = ann(vec![m(0, 2, 0, 0), m(3, 4, 0, 0), m(5, 6, 1, 1)]);
        let report = ace_like_score(
            &[("d".into(), reference.clone(), reference)],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        assert_eq!(report.ace_like, 100.0);
        assert_eq!(report.mention_f1, 1.0);
    }

    #[test]
    fn empty_output_scores_zero_with_default_misses() {
        let reference = ann(vec![m(0, 2, 0, 0), m(3, 4, 0, 0), m(5, 6, 1, 1)]);
        let report = ace_like_score(
            &[("d".into(), ann(vec![]), reference)],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        assert_eq!(report.mention_recall, 0.0);
        // all cost is miss cost: score = 100 * (1 - miss fraction) = 0
        assert_eq!(report.ace_like, 0.0);
    }

    #[test]
    fn merging_reference_chains_costs_wrong_entity() {
        // reference: {0,1} in chain A, {2} in chain B; system merges all
        let reference = ann(vec![m(0, 1, 0, 0), m(2, 3, 0, 0), m(4, 5, 0, 1)]);
        let system = ann(vec![m(0, 1, 0, 0), m(2, 3, 0, 0), m(4, 5, 0, 0)]);
        let report = ace_like_score(
            &[("d".into(), system, reference)],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        assert_eq!(report.traces[0].wrong_entity.len(), 1);
        assert!(report.ace_like < 100.0);
        assert!((report.ace_like - 100.0 * (1.0 - 1.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn detection_only_ignores_chain_structure() {
        let reference = ann(vec![m(0, 1, 0, 0), m(2, 3, 0, 0)]);
        let system = ann(vec![m(0, 1, 0, 0), m(2, 3, 0, 1)]);
        let full = ace_like_score(
            &[("d".into(), system.clone(), reference.clone())],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        let det = ace_like_score(
            &[("d".into(), system, reference)],
            &CostModel::default(),
            ScoringMode::DetectionOnly,
        )
        .unwrap();
        assert!(full.ace_like < 100.0);
        assert_eq!(det.ace_like, 100.0);
    }

    #[test]
    fn label_permutation_is_irrelevant() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let chains = rng.random_range(1..=n);
            let mentions: Vec<AnnotatedMention> = (0..n)
                .map(|i| m(i * 2, i * 2 + 1, rng.random_range(0..3), rng.random_range(0..chains)))
                .collect();
            let sys_mentions: Vec<AnnotatedMention> = (0..n)
                .map(|i| m(i * 2, i * 2 + 1, rng.random_range(0..3), rng.random_range(0..chains)))
                .collect();
            let reference = ann(mentions);
            let system = ann(sys_mentions.clone());
            // permute system chain labels
            let perm: Vec<usize> = {
                let mut p: Vec<usize> = (0..chains).collect();
                for i in (1..p.len()).rev() {
                    let j = rng.random_range(0..=i);
                    p.swap(i, j);
                }
                p
            };
            let permuted = ann(sys_mentions
                .into_iter()
                .map(|mut mm| {
                    mm.chain = perm[mm.chain];
                    mm
                })
                .collect());
            let a = ace_like_score(
                &[("d".into(), system, reference.clone())],
                &CostModel::default(),
                ScoringMode::Full,
            )
            .unwrap();
            let b = ace_like_score(
                &[("d".into(), permuted, reference)],
                &CostModel::default(),
                ScoringMode::Full,
            )
            .unwrap();
            assert!((a.ace_like - b.ace_like).abs() < 1e-9);
        }
    }

    #[test]
    fn extra_false_alarm_never_helps() {
        let reference = ann(vec![m(0, 2, 0, 0), m(4, 5, 1, 1)]);
        let system = ann(vec![m(0, 2, 0, 0), m(4, 5, 1, 1)]);
        let base = ace_like_score(
            &[("d".into(), system.clone(), reference.clone())],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        let mut with_fa = system.clone();
        with_fa.mentions.push(m(7, 8, 0, 2));
        with_fa.mentions.sort_by_key(|m| m.span.start);
        let worse = ace_like_score(
            &[("d".into(), with_fa, reference)],
            &CostModel::default(),
            ScoringMode::Full,
        )
        .unwrap();
        assert!(worse.ace_like < base.ace_like);
    }
}
