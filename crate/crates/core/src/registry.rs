//! Feature interning and the base × decision meta-feature space.
//!
//! Every feature actually used by the model is a meta-feature: the cross of
//! a base feature (a function of the input and hypothesis) with a decision
//! feature (a function of the current decision). Base features are interned
//! from canonical `class|key` strings; decision features are interned from
//! structured keys so the hot scoring path never builds strings.
//!
//! The registry has two phases. While counting, a pass over the gold
//! decision paths interns names and counts meta-feature occurrences. After
//! `freeze`, meta-features seen at least `cutoff` times get dense ids, the
//! tables become read-only and lookups of anything unseen simply miss.

use crate::sparse::{FeatureId, SparseVector};
use crate::types::{MentionTypeCode, TypeInventory};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

/// The eleven base feature classes plus the always-on bias pseudo-class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureClass {
    Bias,
    Lexical,
    Syntactic,
    Pattern,
    Count,
    Semantic,
    Knowledge,
    WordClass,
    List,
    Inference,
    StringMatch,
    History,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 12] = [
        FeatureClass::Bias,
        FeatureClass::Lexical,
        FeatureClass::Syntactic,
        FeatureClass::Pattern,
        FeatureClass::Count,
        FeatureClass::Semantic,
        FeatureClass::Knowledge,
        FeatureClass::WordClass,
        FeatureClass::List,
        FeatureClass::Inference,
        FeatureClass::StringMatch,
        FeatureClass::History,
    ];

    /// The ten classes eligible for ablation (bias is structural, history
    /// plays no role in chain decisions).
    pub const ABLATABLE: [FeatureClass; 10] = [
        FeatureClass::Lexical,
        FeatureClass::Syntactic,
        FeatureClass::Pattern,
        FeatureClass::Count,
        FeatureClass::Semantic,
        FeatureClass::Knowledge,
        FeatureClass::WordClass,
        FeatureClass::List,
        FeatureClass::Inference,
        FeatureClass::StringMatch,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            FeatureClass::Bias => "bias",
            FeatureClass::Lexical => "lexical",
            FeatureClass::Syntactic => "syntactic",
            FeatureClass::Pattern => "pattern",
            FeatureClass::Count => "count",
            FeatureClass::Semantic => "semantic",
            FeatureClass::Knowledge => "knowledge",
            FeatureClass::WordClass => "class",
            FeatureClass::List => "list",
            FeatureClass::Inference => "inference",
            FeatureClass::StringMatch => "strmatch",
            FeatureClass::History => "history",
        }
    }

    pub fn from_prefix(s: &str) -> Option<FeatureClass> {
        FeatureClass::ALL.iter().copied().find(|c| c.prefix() == s)
    }
}

/// Enabled-class set, cheap to copy and query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet(u16);

impl ClassSet {
    pub fn empty() -> Self {
        ClassSet(0)
    }

    pub fn all() -> Self {
        let mut s = ClassSet(0);
        for c in FeatureClass::ALL {
            s.insert(c);
        }
        s
    }

    pub fn from_classes(classes: &[FeatureClass]) -> Self {
        let mut s = ClassSet(0);
        s.insert(FeatureClass::Bias);
        for &c in classes {
            s.insert(c);
        }
        s
    }

    pub fn insert(&mut self, c: FeatureClass) {
        self.0 |= 1 << c as u16;
    }

    pub fn remove(&mut self, c: FeatureClass) {
        self.0 &= !(1 << c as u16);
    }

    pub fn without(mut self, c: FeatureClass) -> Self {
        self.remove(c);
        self
    }

    pub fn contains(self, c: FeatureClass) -> bool {
        self.0 & (1 << c as u16) != 0
    }

    pub fn classes(self) -> Vec<FeatureClass> {
        FeatureClass::ALL
            .iter()
            .copied()
            .filter(|c| self.contains(*c))
            .collect()
    }
}

/// Decision feature classes of the meta-feature's decision side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecisionClass {
    Simple,
    Coref,
    Boundary,
}

impl DecisionClass {
    pub fn prefix(self) -> &'static str {
        match self {
            DecisionClass::Simple => "simple",
            DecisionClass::Coref => "coref",
            DecisionClass::Boundary => "boundary",
        }
    }
}

/// Compact label of a chunk decision as seen by decision features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecLabel {
    Nae,
    Mention { etype: u8, mtype: MentionTypeCode },
}

/// Structured decision-feature key. Interning on these avoids building
/// name strings per successor in the scoring loop; the string form is only
/// materialized for model dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecKey {
    // simple
    IsEntity(bool),
    EntityType(u8),
    EntitySubtype { etype: u8, subtype: u8 },
    MentionKind(MentionTypeCode),
    TypeMention { etype: u8, mtype: MentionTypeCode },
    // coreference
    ChainStart(bool),
    ChainEntityType(u8),
    ChainSubtype { etype: u8, subtype: u8 },
    StartMention(MentionTypeCode),
    ContinuePair {
        current: MentionTypeCode,
        antecedent: MentionTypeCode,
    },
    // boundary
    Markov2 {
        prev: DecLabel,
        cur: DecLabel,
    },
    Markov3 {
        prev2: DecLabel,
        prev: DecLabel,
        cur: DecLabel,
    },
    WindowWord {
        offset: i8,
        word: u32,
        cur: DecLabel,
    },
    PrevMentionWord {
        word: u32,
        label: DecLabel,
        cur: DecLabel,
    },
}

impl DecKey {
    pub fn class(&self) -> DecisionClass {
        match self {
            DecKey::IsEntity(_)
            | DecKey::EntityType(_)
            | DecKey::EntitySubtype { .. }
            | DecKey::MentionKind(_)
            | DecKey::TypeMention { .. } => DecisionClass::Simple,
            DecKey::ChainStart(_)
            | DecKey::ChainEntityType(_)
            | DecKey::ChainSubtype { .. }
            | DecKey::StartMention(_)
            | DecKey::ContinuePair { .. } => DecisionClass::Coref,
            DecKey::Markov2 { .. }
            | DecKey::Markov3 { .. }
            | DecKey::WindowWord { .. }
            | DecKey::PrevMentionWord { .. } => DecisionClass::Boundary,
        }
    }

    pub fn render(&self, inv: &TypeInventory, words: &WordTable) -> String {
        let label = |l: &DecLabel| match l {
            DecLabel::Nae => "NAE".to_string(),
            DecLabel::Mention { etype, mtype } => {
                format!("{}:{}", inv.entity_type_name(*etype), mtype.as_str())
            }
        };
        let body = match self {
            DecKey::IsEntity(b) => format!("entity={}", if *b { "yes" } else { "no" }),
            DecKey::EntityType(t) => format!("etype={}", inv.entity_type_name(*t)),
            DecKey::EntitySubtype { etype, subtype } => {
                format!("esub={}.{}", inv.entity_type_name(*etype), inv.subtype_name(*etype, *subtype))
            }
            DecKey::MentionKind(m) => format!("mtype={}", m.as_str()),
            DecKey::TypeMention { etype, mtype } => {
                format!("pair={}+{}", inv.entity_type_name(*etype), mtype.as_str())
            }
            DecKey::ChainStart(b) => format!("chain={}", if *b { "start" } else { "continue" }),
            DecKey::ChainEntityType(t) => format!("chain-etype={}", inv.entity_type_name(*t)),
            DecKey::ChainSubtype { etype, subtype } => {
                format!("chain-esub={}.{}", inv.entity_type_name(*etype), inv.subtype_name(*etype, *subtype))
            }
            DecKey::StartMention(m) => format!("start-mtype={}", m.as_str()),
            DecKey::ContinuePair { current, antecedent } => {
                format!("cont-pair={}>{}", antecedent.as_str(), current.as_str())
            }
            DecKey::Markov2 { prev, cur } => format!("m2={}>{}", label(prev), label(cur)),
            DecKey::Markov3 { prev2, prev, cur } => {
                format!("m3={}>{}>{}", label(prev2), label(prev), label(cur))
            }
            DecKey::WindowWord { offset, word, cur } => {
                format!("w[{}]={}&{}", offset, words.name(*word), label(cur))
            }
            DecKey::PrevMentionWord { word, label: l, cur } => {
                format!("pm={}@{}&{}", words.name(*word), label(l), label(cur))
            }
        };
        format!("{}:{}", self.class().prefix(), body)
    }
}

/// Interned token forms; shared by documents and decision keys.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WordTable {
    #[serde(skip)]
    map: FxHashMap<String, u32>,
    table: Vec<String>,
}

impl WordTable {
    pub fn new() -> Self {
        WordTable::default()
    }

    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.map.get(word) {
            return id;
        }
        let id = self.table.len() as u32;
        self.map.insert(word.to_string(), id);
        self.table.push(word.to_string());
        id
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.map.get(word).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        self.table.get(id as usize).map(|s| s.as_str()).unwrap_or("?")
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Rebuilds the lookup map after deserialization.
    pub fn rebuild_index(&mut self) {
        self.map = self
            .table
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
    }
}

/// Dense id of an interned base feature.
pub type BaseId = u32;
/// Dense id of an interned decision feature.
pub type DecId = u32;

/// Base feature list produced by one extraction group.
#[derive(Debug, Clone, Default)]
pub struct BaseFeatures {
    pub items: Vec<(BaseId, f64)>,
}

/// Decision feature list for one candidate decision.
#[derive(Debug, Clone, Default)]
pub struct DecFeatures {
    pub items: Vec<(DecId, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRegistry {
    /// One name → id map per feature class so lookups take a plain `&str`.
    #[serde(skip)]
    base_maps: Vec<FxHashMap<String, BaseId>>,
    base_table: Vec<(FeatureClass, String)>,
    #[serde(skip)]
    dec_map: FxHashMap<DecKey, DecId>,
    dec_table: Vec<DecKey>,
    #[serde(skip)]
    meta_counts: FxHashMap<(BaseId, DecId), u32>,
    #[serde(skip)]
    meta_map: FxHashMap<(BaseId, DecId), FeatureId>,
    meta_table: Vec<(BaseId, DecId)>,
    /// Per base id, the (decision, meta) partners that survived the cutoff,
    /// sorted by decision id.
    #[serde(skip)]
    partners: Vec<Vec<(DecId, FeatureId)>>,
    frozen: bool,
    cutoff: u32,
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        FeatureRegistry::new()
    }
}

impl FeatureRegistry {
    pub fn new() -> Self {
        FeatureRegistry {
            base_maps: vec![FxHashMap::default(); FeatureClass::ALL.len()],
            base_table: Vec::new(),
            dec_map: FxHashMap::default(),
            dec_table: Vec::new(),
            meta_counts: FxHashMap::default(),
            meta_map: FxHashMap::default(),
            meta_table: Vec::new(),
            partners: Vec::new(),
            frozen: false,
            cutoff: 0,
        }
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Interns a base feature name; stable across repeated calls.
    pub fn intern_base(&mut self, class: FeatureClass, name: &str) -> BaseId {
        debug_assert!(!self.frozen, "interning into a frozen registry");
        debug_assert!(!name.is_empty());
        if let Some(&id) = self.base_maps[class as usize].get(name) {
            return id;
        }
        let id = self.base_table.len() as BaseId;
        self.base_maps[class as usize].insert(name.to_string(), id);
        self.base_table.push((class, name.to_string()));
        id
    }

    pub fn lookup_base(&self, class: FeatureClass, name: &str) -> Option<BaseId> {
        self.base_maps[class as usize].get(name).copied()
    }

    pub fn base_class(&self, id: BaseId) -> FeatureClass {
        self.base_table[id as usize].0
    }

    pub fn base_name(&self, id: BaseId) -> &str {
        &self.base_table[id as usize].1
    }

    pub fn base_len(&self) -> usize {
        self.base_table.len()
    }

    pub fn intern_dec(&mut self, key: DecKey) -> DecId {
        debug_assert!(!self.frozen, "interning into a frozen registry");
        if let Some(&id) = self.dec_map.get(&key) {
            return id;
        }
        let id = self.dec_table.len() as DecId;
        self.dec_map.insert(key, id);
        self.dec_table.push(key);
        id
    }

    pub fn lookup_dec(&self, key: &DecKey) -> Option<DecId> {
        self.dec_map.get(key).copied()
    }

    pub fn dec_key(&self, id: DecId) -> &DecKey {
        &self.dec_table[id as usize]
    }

    pub fn dec_len(&self) -> usize {
        self.dec_table.len()
    }

    /// Counting-pass hook: record one occurrence of every (base, decision)
    /// pair in this step.
    pub fn count_step(&mut self, base: &BaseFeatures, dec: &DecFeatures) {
        debug_assert!(!self.frozen);
        for &(b, _) in &base.items {
            for &(d, _) in &dec.items {
                *self.meta_counts.entry((b, d)).or_insert(0) += 1;
            }
        }
    }

    pub fn meta_count(&self, b: BaseId, d: DecId) -> u32 {
        self.meta_counts.get(&(b, d)).copied().unwrap_or(0)
    }

    /// Applies the frequency cutoff and freezes the registry: meta-features
    /// with count >= threshold get dense ids, everything else stays
    /// inactive forever.
    pub fn freeze(&mut self, threshold: u32) {
        assert!(!self.frozen, "registry already frozen");
        let mut survivors: Vec<(BaseId, DecId)> = self
            .meta_counts
            .iter()
            .filter(|(_, &c)| c >= threshold)
            .map(|(&k, _)| k)
            .collect();
        survivors.sort_unstable();
        self.meta_table = survivors;
        self.meta_map = self
            .meta_table
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, FeatureId(i as u32)))
            .collect();
        self.partners = vec![Vec::new(); self.base_table.len()];
        for (i, &(b, d)) in self.meta_table.iter().enumerate() {
            self.partners[b as usize].push((d, FeatureId(i as u32)));
        }
        self.cutoff = threshold;
        self.frozen = true;
        self.meta_counts = FxHashMap::default();
    }

    /// Number of active meta-features (the model dimension).
    pub fn active_len(&self) -> usize {
        self.meta_table.len()
    }

    #[inline]
    pub fn meta(&self, b: BaseId, d: DecId) -> Option<FeatureId> {
        self.meta_map.get(&(b, d)).copied()
    }

    pub fn meta_pair(&self, id: FeatureId) -> (BaseId, DecId) {
        self.meta_table[id.index()]
    }

    pub fn partners_of(&self, b: BaseId) -> &[(DecId, FeatureId)] {
        &self.partners[b as usize]
    }

    /// Cross product of base and decision features over the active metas.
    pub fn cross(&self, base: &BaseFeatures, dec: &DecFeatures) -> SparseVector {
        let mut pairs = Vec::with_capacity(base.items.len() * dec.items.len() / 4 + 4);
        for &(b, vb) in &base.items {
            for &(d, vd) in &dec.items {
                if let Some(id) = self.meta(b, d) {
                    pairs.push((id, vb * vd));
                }
            }
        }
        SparseVector::from_pairs(pairs)
    }

    /// Canonical `class|base-key|dec-class:dec-key` name of an active meta.
    pub fn render_meta(&self, id: FeatureId, inv: &TypeInventory, words: &WordTable) -> String {
        let (b, d) = self.meta_table[id.index()];
        let (class, name) = &self.base_table[b as usize];
        format!(
            "{}|{}|{}",
            class.prefix(),
            name,
            self.dec_table[d as usize].render(inv, words)
        )
    }

    /// Mask of active metas whose decision side is coreference-class.
    pub fn coref_decision_mask(&self) -> Vec<bool> {
        self.meta_table
            .iter()
            .map(|&(_, d)| self.dec_table[d as usize].class() == DecisionClass::Coref)
            .collect()
    }

    pub fn meta_base_class(&self, id: FeatureId) -> FeatureClass {
        let (b, _) = self.meta_table[id.index()];
        self.base_table[b as usize].0
    }

    /// Rebuilds hash indices after deserialization.
    pub fn rebuild_index(&mut self) {
        self.base_maps = vec![FxHashMap::default(); FeatureClass::ALL.len()];
        for (i, (c, n)) in self.base_table.iter().enumerate() {
            self.base_maps[*c as usize].insert(n.clone(), i as BaseId);
        }
        self.dec_map = self
            .dec_table
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, i as DecId))
            .collect();
        self.meta_map = self
            .meta_table
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, FeatureId(i as u32)))
            .collect();
        self.partners = vec![Vec::new(); self.base_table.len()];
        for (i, &(b, d)) in self.meta_table.iter().enumerate() {
            self.partners[b as usize].push((d, FeatureId(i as u32)));
        }
    }
}

/// Reusable buffer that accumulates, per decision id, the weighted score
/// contribution of a fixed base feature set. Scoring a candidate decision
/// is then a handful of array reads instead of a hash probe per meta.
#[derive(Debug, Default)]
pub struct DecScoreAccumulator {
    values: Vec<f64>,
    touched: Vec<DecId>,
}

impl DecScoreAccumulator {
    pub fn new() -> Self {
        DecScoreAccumulator::default()
    }

    pub fn clear(&mut self, dec_space: usize) {
        if self.values.len() < dec_space {
            self.values.resize(dec_space, 0.0);
        }
        for &d in &self.touched {
            self.values[d as usize] = 0.0;
        }
        self.touched.clear();
    }

    pub fn accumulate(
        &mut self,
        base: &BaseFeatures,
        registry: &FeatureRegistry,
        weights: &crate::sparse::WeightVector,
    ) {
        for &(b, vb) in &base.items {
            for &(d, m) in registry.partners_of(b) {
                let idx = d as usize;
                if self.values[idx] == 0.0 {
                    self.touched.push(d);
                }
                self.values[idx] += vb * weights.get(m);
            }
        }
    }

    #[inline]
    pub fn score(&self, dec: &DecFeatures) -> f64 {
        dec.items
            .iter()
            .map(|&(d, vd)| vd * self.values[d as usize])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::WeightVector;

    #[test]
    fn intern_is_idempotent_and_injective() {
        let mut reg = FeatureRegistry::new();
        let a = reg.intern_base(FeatureClass::Lexical, "w=clinton");
        let b = reg.intern_base(FeatureClass::Lexical, "w=clinton");
        let c = reg.intern_base(FeatureClass::Lexical, "w=senate");
        assert_eq!(a, b);
        assert_ne!(a, c);
        // same name under a different class is a different feature
        let d = reg.intern_base(FeatureClass::List, "w=clinton");
        assert_ne!(a, d);
    }

    #[test]
    fn intern_many_distinct_names_no_collision() {
        let mut reg = FeatureRegistry::new();
        let n = 1_000_000;
        for i in 0..n {
            let id = reg.intern_base(FeatureClass::Lexical, &format!("w=tok{i}"));
            assert_eq!(id, i as BaseId);
        }
        assert_eq!(reg.base_len(), n);
    }

    #[test]
    fn cutoff_keeps_only_frequent_metas() {
        let mut reg = FeatureRegistry::new();
        let a = reg.intern_base(FeatureClass::Lexical, "a");
        let b = reg.intern_base(FeatureClass::Lexical, "b");
        let d = reg.intern_dec(DecKey::IsEntity(true));
        let base_a = BaseFeatures { items: vec![(a, 1.0)] };
        let base_b = BaseFeatures { items: vec![(b, 1.0)] };
        let dec = DecFeatures { items: vec![(d, 1.0)] };
        for _ in 0..7 {
            reg.count_step(&base_a, &dec);
        }
        for _ in 0..4 {
            reg.count_step(&base_b, &dec);
        }
        reg.freeze(5);
        assert_eq!(reg.active_len(), 1);
        assert!(reg.meta(a, d).is_some());
        assert!(reg.meta(b, d).is_none());
    }

    #[test]
    fn threshold_one_keeps_everything_seen() {
        let mut reg = FeatureRegistry::new();
        let a = reg.intern_base(FeatureClass::Lexical, "a");
        let d0 = reg.intern_dec(DecKey::IsEntity(true));
        let d1 = reg.intern_dec(DecKey::IsEntity(false));
        let base = BaseFeatures { items: vec![(a, 1.0)] };
        let dec = DecFeatures {
            items: vec![(d0, 1.0), (d1, 1.0)],
        };
        reg.count_step(&base, &dec);
        reg.freeze(1);
        assert_eq!(reg.active_len(), 2);
    }

    #[test]
    fn cross_cardinality_and_values() {
        let mut reg = FeatureRegistry::new();
        let bases: Vec<_> = (0..3)
            .map(|i| reg.intern_base(FeatureClass::Lexical, &format!("b{i}")))
            .collect();
        let decs = vec![
            reg.intern_dec(DecKey::IsEntity(true)),
            reg.intern_dec(DecKey::ChainStart(true)),
        ];
        let base = BaseFeatures {
            items: bases.iter().map(|&b| (b, 1.0)).collect(),
        };
        let dec = DecFeatures {
            items: decs.iter().map(|&d| (d, 1.0)).collect(),
        };
        reg.count_step(&base, &dec);
        reg.freeze(1);
        assert_eq!(reg.active_len(), 6);
        let crossed = reg.cross(&base, &dec);
        assert_eq!(crossed.len(), 6);

        // empty decision side annihilates
        let empty = reg.cross(&base, &DecFeatures::default());
        assert!(empty.is_empty());
    }

    #[test]
    fn cross_multiplies_values() {
        let mut reg = FeatureRegistry::new();
        let a = reg.intern_base(FeatureClass::Count, "density");
        let d = reg.intern_dec(DecKey::ChainStart(false));
        let base = BaseFeatures { items: vec![(a, 2.0)] };
        let dec = DecFeatures { items: vec![(d, 3.0)] };
        reg.count_step(&base, &dec);
        reg.freeze(1);
        let crossed = reg.cross(&base, &dec);
        let id = reg.meta(a, d).unwrap();
        assert_eq!(crossed.get(id), 6.0);
    }

    #[test]
    fn cross_is_bilinear_in_base_scaling() {
        let mut reg = FeatureRegistry::new();
        let a = reg.intern_base(FeatureClass::Count, "x");
        let b = reg.intern_base(FeatureClass::Count, "y");
        let d = reg.intern_dec(DecKey::IsEntity(true));
        let base = BaseFeatures {
            items: vec![(a, 1.5), (b, -2.0)],
        };
        let dec = DecFeatures { items: vec![(d, 1.0)] };
        reg.count_step(&base, &dec);
        reg.freeze(1);
        let alpha = 3.25;
        let scaled = BaseFeatures {
            items: base.items.iter().map(|&(i, v)| (i, alpha * v)).collect(),
        };
        let lhs = reg.cross(&scaled, &dec);
        let rhs = reg.cross(&base, &dec).scale(alpha);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn accumulator_matches_direct_cross_scoring() {
        let mut reg = FeatureRegistry::new();
        let bases: Vec<_> = (0..5)
            .map(|i| reg.intern_base(FeatureClass::Lexical, &format!("b{i}")))
            .collect();
        let decs: Vec<_> = (0..4)
            .map(|i| reg.intern_dec(DecKey::EntityType(i)))
            .collect();
        let base = BaseFeatures {
            items: bases.iter().enumerate().map(|(i, &b)| (b, 1.0 + i as f64)).collect(),
        };
        let dec = DecFeatures {
            items: decs.iter().enumerate().map(|(i, &d)| (d, 0.5 * (i + 1) as f64)).collect(),
        };
        reg.count_step(&base, &dec);
        reg.freeze(1);
        let mut w = WeightVector::zeros(reg.active_len());
        for i in 0..reg.active_len() {
            w.add_scaled(
                &SparseVector::from_pairs(vec![(FeatureId(i as u32), ((i * 7) % 5) as f64 - 2.0)]),
                1.0,
            );
        }
        let direct = w.dot(&reg.cross(&base, &dec));
        let mut acc = DecScoreAccumulator::new();
        acc.clear(reg.dec_len());
        acc.accumulate(&base, &reg, &w);
        assert!((acc.score(&dec) - direct).abs() < 1e-9);
    }
}
