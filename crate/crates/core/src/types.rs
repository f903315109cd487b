//! Entity/mention type inventory and span primitives.

use crate::error::{EdtError, Result};
use serde::{Deserialize, Serialize};

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(end > start);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlap(&self, other: &Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// Mention type: name, nominal or pronoun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MentionType {
    #[serde(rename = "NAM")]
    Name,
    #[serde(rename = "NOM")]
    Nominal,
    #[serde(rename = "PRO")]
    Pronoun,
}

impl MentionType {
    pub const ALL: [MentionType; 3] = [MentionType::Name, MentionType::Nominal, MentionType::Pronoun];

    pub fn as_str(self) -> &'static str {
        match self {
            MentionType::Name => "NAM",
            MentionType::Nominal => "NOM",
            MentionType::Pronoun => "PRO",
        }
    }

    pub fn parse(s: &str) -> Result<MentionType> {
        match s {
            "NAM" => Ok(MentionType::Name),
            "NOM" => Ok(MentionType::Nominal),
            "PRO" => Ok(MentionType::Pronoun),
            other => Err(EdtError::Config(format!("unknown mention type `{other}`"))),
        }
    }

    pub fn code(self) -> MentionTypeCode {
        match self {
            MentionType::Name => MentionTypeCode::Nam,
            MentionType::Nominal => MentionTypeCode::Nom,
            MentionType::Pronoun => MentionTypeCode::Pro,
        }
    }
}

/// Mention type as observed by feature extraction. `Unk` stands for a
/// mention whose type is deliberately hidden (pronouns under the
/// gold-mention coreference protocol).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MentionTypeCode {
    Nam,
    Nom,
    Pro,
    Unk,
}

impl MentionTypeCode {
    pub fn as_str(self) -> &'static str {
        match self {
            MentionTypeCode::Nam => "NAM",
            MentionTypeCode::Nom => "NOM",
            MentionTypeCode::Pro => "PRO",
            MentionTypeCode::Unk => "UNK",
        }
    }
}

/// Configured entity type inventory with optional per-type subtypes.
/// Entity types are referenced by dense `u8` indices everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeInventory {
    entity_types: Vec<String>,
    subtypes: Vec<Vec<String>>,
}

impl TypeInventory {
    /// ACE 2004 entity types.
    pub fn ace2004() -> Self {
        TypeInventory::new(&["PER", "ORG", "GPE", "LOC", "FAC", "VEH", "WEA"]).unwrap()
    }

    pub fn new(names: &[&str]) -> Result<Self> {
        if names.is_empty() || names.len() > 64 {
            return Err(EdtError::Config(
                "entity type inventory must have 1..=64 entries".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for n in names {
            if !seen.insert(*n) {
                return Err(EdtError::Config(format!("duplicate entity type `{n}`")));
            }
        }
        Ok(TypeInventory {
            entity_types: names.iter().map(|s| s.to_string()).collect(),
            subtypes: vec![Vec::new(); names.len()],
        })
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        TypeInventory::new(&refs)
    }

    pub fn with_subtypes(mut self, etype: &str, subs: &[&str]) -> Result<Self> {
        let id = self.entity_type(etype)?;
        self.subtypes[id as usize] = subs.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entity_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_types.is_empty()
    }

    pub fn entity_type_ids(&self) -> impl Iterator<Item = u8> {
        (0..self.entity_types.len() as u8).into_iter()
    }

    pub fn entity_type(&self, name: &str) -> Result<u8> {
        self.entity_types
            .iter()
            .position(|t| t == name)
            .map(|i| i as u8)
            .ok_or_else(|| EdtError::Config(format!("unknown entity type `{name}`")))
    }

    pub fn entity_type_name(&self, id: u8) -> &str {
        self.entity_types
            .get(id as usize)
            .map(|s| s.as_str())
            .unwrap_or("?")
    }

    pub fn subtype(&self, etype: u8, name: &str) -> Option<u8> {
        self.subtypes
            .get(etype as usize)?
            .iter()
            .position(|s| s == name)
            .map(|i| i as u8)
    }

    pub fn subtype_count(&self, etype: u8) -> usize {
        self.subtypes.get(etype as usize).map(|v| v.len()).unwrap_or(0)
    }

    pub fn subtype_name(&self, etype: u8, sub: u8) -> &str {
        self.subtypes
            .get(etype as usize)
            .and_then(|v| v.get(sub as usize))
            .map(|s| s.as_str())
            .unwrap_or("?")
    }

    pub fn entity_type_names(&self) -> &[String] {
        &self.entity_types
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_overlap() {
        let a = Span::new(0, 3);
        let b = Span::new(2, 5);
        let c = Span::new(3, 4);
        assert_eq!(a.overlap(&b), 1);
        assert_eq!(a.overlap(&c), 0);
        assert_eq!(a.overlap(&a), 3);
    }

    #[test]
    fn inventory_roundtrip() {
        let inv = TypeInventory::ace2004();
        assert_eq!(inv.len(), 7);
        assert_eq!(inv.entity_type("GPE").unwrap(), 2);
        assert_eq!(inv.entity_type_name(0), "PER");
        assert!(inv.entity_type("XYZ").is_err());
    }

    #[test]
    fn duplicate_types_rejected() {
        assert!(TypeInventory::new(&["PER", "PER"]).is_err());
    }
}
