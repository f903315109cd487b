//! Linkage strategies: how pairwise features between a proposed mention and
//! an antecedent chain are targeted and aggregated.

use crate::hypothesis::Chain;
use crate::types::MentionType;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkageType {
    AllPairs,
    Average,
    Max,
    Min,
    First,
    Last,
    Intelligent,
}

impl LinkageType {
    pub const ALL: [LinkageType; 7] = [
        LinkageType::AllPairs,
        LinkageType::Average,
        LinkageType::Max,
        LinkageType::Min,
        LinkageType::First,
        LinkageType::Last,
        LinkageType::Intelligent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkageType::AllPairs => "all-pairs",
            LinkageType::Average => "average",
            LinkageType::Max => "max",
            LinkageType::Min => "min",
            LinkageType::First => "first",
            LinkageType::Last => "last",
            LinkageType::Intelligent => "intelligent",
        }
    }
}

/// How the selected pairs' features are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Sum of the pairwise feature vectors.
    Sum,
    /// Mean of the pairwise feature vectors.
    Mean,
    /// Features of the single maximum-scoring pair.
    MaxScore,
    /// Features of the single minimum-scoring pair.
    MinScore,
}

/// Selects the antecedent mentions to pair the current mention against,
/// and the aggregation rule. `current` is the mention type of the proposed
/// mention (the dispatch key of the intelligent link).
///
/// Intelligent linkage: a NAM matches the first NAM in the chain, else the
/// last NOM, else falls back to max link over everything; a NOM matches the
/// max-scoring NOM, else the last NAM, else max link; a PRO averages over
/// all PROs and NAMs, else max link.
pub fn select_link_targets(
    current: MentionType,
    chain: &Chain,
    mode: LinkageType,
) -> (Vec<usize>, Aggregation) {
    assert!(!chain.is_empty(), "linkage over an empty chain");
    let all: Vec<usize> = (0..chain.len()).collect();
    match mode {
        LinkageType::AllPairs => (all, Aggregation::Sum),
        LinkageType::Average => (all, Aggregation::Mean),
        LinkageType::Max => (all, Aggregation::MaxScore),
        LinkageType::Min => (all, Aggregation::MinScore),
        LinkageType::First => (vec![0], Aggregation::Sum),
        LinkageType::Last => (vec![chain.len() - 1], Aggregation::Sum),
        LinkageType::Intelligent => match current {
            MentionType::Name => {
                if let Some(i) = position_first(chain, MentionType::Name) {
                    (vec![i], Aggregation::Sum)
                } else if let Some(i) = position_last(chain, MentionType::Nominal) {
                    (vec![i], Aggregation::Sum)
                } else {
                    (all, Aggregation::MaxScore)
                }
            }
            MentionType::Nominal => {
                let noms: Vec<usize> = positions(chain, MentionType::Nominal);
                if !noms.is_empty() {
                    (noms, Aggregation::MaxScore)
                } else if let Some(i) = position_last(chain, MentionType::Name) {
                    (vec![i], Aggregation::Sum)
                } else {
                    (all, Aggregation::MaxScore)
                }
            }
            MentionType::Pronoun => {
                let pro_nam: Vec<usize> = chain
                    .mentions
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| {
                        m.mention_type == MentionType::Pronoun || m.mention_type == MentionType::Name
                    })
                    .map(|(i, _)| i)
                    .collect();
                if !pro_nam.is_empty() {
                    (pro_nam, Aggregation::Mean)
                } else {
                    (all, Aggregation::MaxScore)
                }
            }
        },
    }
}

fn positions(chain: &Chain, t: MentionType) -> Vec<usize> {
    chain
        .mentions
        .iter()
        .enumerate()
        .filter(|(_, m)| m.mention_type == t)
        .map(|(i, _)| i)
        .collect()
}

fn position_first(chain: &Chain, t: MentionType) -> Option<usize> {
    chain.mentions.iter().position(|m| m.mention_type == t)
}

fn position_last(chain: &Chain, t: MentionType) -> Option<usize> {
    chain.mentions.iter().rposition(|m| m.mention_type == t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::ChainMention;
    use crate::types::Span;

    fn chain(types: &[MentionType]) -> Chain {
        Chain {
            mentions: types
                .iter()
                .enumerate()
                .map(|(i, &t)| ChainMention {
                    span: Span::new(i * 2, i * 2 + 1),
                    entity_type: 0,
                    subtype: None,
                    mention_type: t,
                    index: i as u32,
                })
                .collect(),
        }
    }

    use MentionType::{Name, Nominal, Pronoun};

    #[test]
    fn standard_modes() {
        let c = chain(&[Name, Nominal, Pronoun]);
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::AllPairs),
            (vec![0, 1, 2], Aggregation::Sum)
        );
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Average),
            (vec![0, 1, 2], Aggregation::Mean)
        );
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Max),
            (vec![0, 1, 2], Aggregation::MaxScore)
        );
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Min),
            (vec![0, 1, 2], Aggregation::MinScore)
        );
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::First),
            (vec![0], Aggregation::Sum)
        );
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Last),
            (vec![2], Aggregation::Sum)
        );
    }

    #[test]
    fn intelligent_pro_averages_over_pro_and_nam() {
        // chain <NAM "Bill Clinton", NOM "The President", PRO "his">
        let c = chain(&[Name, Nominal, Pronoun]);
        let (targets, agg) = select_link_targets(Pronoun, &c, LinkageType::Intelligent);
        assert_eq!(targets, vec![0, 2]);
        assert_eq!(agg, Aggregation::Mean);
    }

    #[test]
    fn intelligent_nam_prefers_first_nam_then_last_nom() {
        let c = chain(&[Nominal, Name, Name]);
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Intelligent),
            (vec![1], Aggregation::Sum)
        );
        let c = chain(&[Nominal, Pronoun, Nominal]);
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Intelligent),
            (vec![2], Aggregation::Sum)
        );
        let c = chain(&[Pronoun, Pronoun]);
        assert_eq!(
            select_link_targets(Name, &c, LinkageType::Intelligent),
            (vec![0, 1], Aggregation::MaxScore)
        );
    }

    #[test]
    fn intelligent_nom_rules() {
        let c = chain(&[Name, Nominal, Nominal]);
        assert_eq!(
            select_link_targets(Nominal, &c, LinkageType::Intelligent),
            (vec![1, 2], Aggregation::MaxScore)
        );
        let c = chain(&[Name, Pronoun, Name]);
        assert_eq!(
            select_link_targets(Nominal, &c, LinkageType::Intelligent),
            (vec![2], Aggregation::Sum)
        );
        let c = chain(&[Pronoun]);
        assert_eq!(
            select_link_targets(Nominal, &c, LinkageType::Intelligent),
            (vec![0], Aggregation::MaxScore)
        );
    }

    #[test]
    fn intelligent_pro_fallback_is_max() {
        let c = chain(&[Nominal, Nominal]);
        assert_eq!(
            select_link_targets(Pronoun, &c, LinkageType::Intelligent),
            (vec![0, 1], Aggregation::MaxScore)
        );
    }
}
