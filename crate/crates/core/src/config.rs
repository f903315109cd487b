//! Run configuration: corpus and resource paths, search and learning
//! parameters, and the experiment protocol knobs. The full configuration is
//! embedded in every model file for reproducibility.

use crate::error::{EdtError, Result};
use crate::features::ModeSwitches;
use crate::linkage::LinkageType;
use crate::registry::{ClassSet, FeatureClass};
use crate::resources::ResourcePaths;
use crate::types::TypeInventory;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// One search over segmentation, types and chains simultaneously.
    Joint,
    /// Mention detection only; every mention is its own chain.
    PipelineDetect,
    /// Chain decisions over given correct mentions and types.
    PipelineCoref,
    /// Like pipeline-coref, but pronoun mention types are hidden.
    CorefGoldMentions,
}

impl TrainMode {
    pub fn switches(self) -> ModeSwitches {
        match self {
            TrainMode::Joint => ModeSwitches::joint(),
            TrainMode::PipelineDetect => ModeSwitches::detect_only(),
            TrainMode::PipelineCoref => ModeSwitches::link_only(false),
            TrainMode::CorefGoldMentions => ModeSwitches::link_only(true),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Joint => "joint",
            TrainMode::PipelineDetect => "pipeline-detect",
            TrainMode::PipelineCoref => "pipeline-coref",
            TrainMode::CorefGoldMentions => "coref-gold-mentions",
        }
    }
}

/// Compensation for noisy early coreference updates in joint training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compensation {
    /// Update coreference weights only when the mention decisions of the
    /// error node were correct (the default).
    GatedCorefUpdate,
    /// Run the first pass detection-only, then train jointly.
    HeadStart,
    None,
}

fn default_beam() -> usize {
    16
}
fn default_cutoff() -> u32 {
    5
}
fn default_c() -> f64 {
    1.0
}
fn default_l_max() -> usize {
    10
}
fn default_linkage() -> LinkageType {
    LinkageType::Intelligent
}
fn default_mode() -> TrainMode {
    TrainMode::Joint
}
fn default_passes() -> usize {
    5
}
fn default_compensation() -> Compensation {
    Compensation::GatedCorefUpdate
}
fn default_classes() -> Vec<FeatureClass> {
    FeatureClass::ALL
        .iter()
        .copied()
        .filter(|c| *c != FeatureClass::Bias)
        .collect()
}
fn default_entity_types() -> Vec<String> {
    ["PER", "ORG", "GPE", "LOC", "FAC", "VEH", "WEA"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub heldout: Option<PathBuf>,
    #[serde(default)]
    pub resources: ResourcePaths,
    /// Beam width for training and test.
    #[serde(default = "default_beam")]
    pub beam: usize,
    /// Meta-features occurring fewer times than this are ignored.
    #[serde(default = "default_cutoff")]
    pub feature_cutoff: u32,
    /// Step-size constant of the large-margin update.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Maximum mention length in tokens.
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_linkage")]
    pub linkage: LinkageType,
    #[serde(default = "default_classes")]
    pub feature_classes: Vec<FeatureClass>,
    #[serde(default = "default_mode")]
    pub mode: TrainMode,
    #[serde(default = "default_passes")]
    pub passes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_compensation")]
    pub compensation: Compensation,
    #[serde(default = "default_entity_types")]
    pub entity_types: Vec<String>,
    #[serde(default)]
    pub subtypes: BTreeMap<String, Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            heldout: None,
            resources: ResourcePaths::default(),
            beam: default_beam(),
            feature_cutoff: default_cutoff(),
            c: default_c(),
            l_max: default_l_max(),
            linkage: default_linkage(),
            feature_classes: default_classes(),
            mode: default_mode(),
            passes: default_passes(),
            seed: 0,
            compensation: default_compensation(),
            entity_types: default_entity_types(),
            subtypes: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam < 1 {
            return Err(EdtError::Config("beam must be at least 1".into()));
        }
        if self.c <= 0.0 {
            return Err(EdtError::Config("C must be positive".into()));
        }
        if self.l_max < 1 {
            return Err(EdtError::Config("l_max must be at least 1".into()));
        }
        if self.entity_types.is_empty() {
            return Err(EdtError::Config("entity type inventory is empty".into()));
        }
        Ok(())
    }

    pub fn inventory(&self) -> Result<TypeInventory> {
        let mut inv = TypeInventory::from_names(self.entity_types.clone())?;
        for (etype, subs) in &self.subtypes {
            let refs: Vec<&str> = subs.iter().map(|s| s.as_str()).collect();
            inv = inv.with_subtypes(etype, &refs)?;
        }
        Ok(inv)
    }

    pub fn class_set(&self) -> ClassSet {
        ClassSet::from_classes(&self.feature_classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.beam, 16);
        assert_eq!(cfg.feature_cutoff, 5);
        assert_eq!(cfg.linkage, LinkageType::Intelligent);
        assert_eq!(cfg.mode, TrainMode::Joint);
        assert_eq!(cfg.compensation, Compensation::GatedCorefUpdate);
        assert_eq!(cfg.entity_types.len(), 7);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_roundtrips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_json_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }
}
