//! Pluggable external resources: gazetteers, name/nominal knowledge pairs,
//! word clusters, collocations, gender/number lexicon, coreference and
//! pleonastic patterns, and a hypernym lexicon.
//!
//! All lookups are total: a missing entry or an unloaded resource makes the
//! corresponding features inactive, never an error. File formats are plain
//! UTF-8: gazetteers one entry per line, lexicons tab-separated, pattern
//! files one template per line with `#` comments.

use crate::error::{EdtError, Result};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Neuter,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "m",
            Gender::Female => "f",
            Gender::Neuter => "n",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "m" | "male" => Some(Gender::Male),
            "f" | "female" => Some(Gender::Female),
            "n" | "neuter" => Some(Gender::Neuter),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemNumber {
    Singular,
    Plural,
}

impl SemNumber {
    pub fn as_str(self) -> &'static str {
        match self {
            SemNumber::Singular => "sg",
            SemNumber::Plural => "pl",
        }
    }

    pub fn parse(s: &str) -> Option<SemNumber> {
        match s {
            "sg" | "singular" => Some(SemNumber::Singular),
            "pl" | "plural" => Some(SemNumber::Plural),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenderNumber {
    pub gender: Option<Gender>,
    pub number: Option<SemNumber>,
}

/// Closed-class pronoun information (surface-form based).
#[derive(Debug, Clone, Copy)]
pub struct PronounInfo {
    pub gender: Option<Gender>,
    pub number: Option<SemNumber>,
}

pub fn pronoun_info(form_lower: &str) -> Option<PronounInfo> {
    use Gender::*;
    use SemNumber::*;
    let (g, n): (Option<Gender>, Option<SemNumber>) = match form_lower {
        "he" | "him" | "his" | "himself" => (Some(Male), Some(Singular)),
        "she" | "her" | "hers" | "herself" => (Some(Female), Some(Singular)),
        "it" | "its" | "itself" => (Some(Neuter), Some(Singular)),
        "they" | "them" | "their" | "theirs" | "themselves" => (None, Some(Plural)),
        "i" | "me" | "my" | "mine" | "myself" => (None, Some(Singular)),
        "we" | "us" | "our" | "ours" | "ourselves" => (None, Some(Plural)),
        "you" | "your" | "yours" | "yourself" | "yourselves" => (None, None),
        _ => return None,
    };
    Some(PronounInfo { gender: g, number: n })
}

pub fn is_pronoun(form_lower: &str) -> bool {
    pronoun_info(form_lower).is_some()
}

/// One token of a pattern template: a literal alternation or a wildcard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatToken {
    Any,
    Words(Vec<String>),
}

/// A token-level pattern, e.g. `it is|was * that`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPattern {
    pub tokens: Vec<PatToken>,
    pub source: String,
}

impl TokenPattern {
    pub fn parse(line: &str) -> Option<TokenPattern> {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        let tokens = trimmed
            .split_whitespace()
            .map(|t| {
                if t == "*" {
                    PatToken::Any
                } else {
                    PatToken::Words(t.split('|').map(|w| w.to_lowercase()).collect())
                }
            })
            .collect();
        Some(TokenPattern {
            tokens,
            source: trimmed.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Matches the pattern against exactly `self.len()` tokens starting at
    /// `words[at]` (lowercased forms).
    pub fn matches_at(&self, words: &[String], at: usize) -> bool {
        if at + self.tokens.len() > words.len() {
            return false;
        }
        self.tokens.iter().enumerate().all(|(i, t)| match t {
            PatToken::Any => true,
            PatToken::Words(ws) => ws.iter().any(|w| w == &words[at + i]),
        })
    }

    /// Matches the pattern against an exact token sequence.
    pub fn matches_exact(&self, words: &[&str]) -> bool {
        if words.len() != self.tokens.len() {
            return false;
        }
        self.tokens.iter().zip(words).all(|(t, w)| match t {
            PatToken::Any => true,
            PatToken::Words(ws) => ws.iter().any(|p| p == w),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    pub name: String,
    pub entries: FxHashSet<String>,
}

#[derive(Debug, Clone, Default)]
pub struct HypernymEntry {
    /// The (up to two) most common synsets of the word.
    pub synsets: Vec<String>,
    /// All hypernym synsets of those.
    pub hypernyms: Vec<String>,
}

/// Paths to resource files; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ResourcePaths {
    /// Directory of `<name>.txt` gazetteer files.
    #[serde(default)]
    pub gazetteer_dir: Option<PathBuf>,
    #[serde(default)]
    pub knowledge_pairs: Option<PathBuf>,
    #[serde(default)]
    pub word_clusters: Option<PathBuf>,
    #[serde(default)]
    pub collocations: Option<PathBuf>,
    #[serde(default)]
    pub gender_number: Option<PathBuf>,
    #[serde(default)]
    pub coref_patterns: Option<PathBuf>,
    #[serde(default)]
    pub pleonastic_patterns: Option<PathBuf>,
    #[serde(default)]
    pub hypernyms: Option<PathBuf>,
    #[serde(default)]
    pub hypernym_edges: Option<PathBuf>,
    #[serde(default)]
    pub part_of: Option<PathBuf>,
}

impl ResourcePaths {
    /// Resolves relative paths against a root directory.
    pub fn resolve_against(&mut self, root: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = root.join(&path);
                }
            }
        };
        fix(&mut self.gazetteer_dir);
        fix(&mut self.knowledge_pairs);
        fix(&mut self.word_clusters);
        fix(&mut self.collocations);
        fix(&mut self.gender_number);
        fix(&mut self.coref_patterns);
        fix(&mut self.pleonastic_patterns);
        fix(&mut self.hypernyms);
        fix(&mut self.hypernym_edges);
        fix(&mut self.part_of);
    }
}

/// All loaded resources; immutable after load.
#[derive(Debug, Clone, Default)]
pub struct ResourceBundle {
    pub gazetteers: Vec<Gazetteer>,
    /// Lowercased (name, nominal) pairs.
    pub knowledge_pairs: FxHashSet<(String, String)>,
    pub word_clusters: FxHashMap<String, String>,
    pub collocations: FxHashSet<(String, String)>,
    /// Words appearing in any collocation.
    pub collocation_words: FxHashSet<String>,
    pub gender_number: FxHashMap<String, GenderNumber>,
    /// (pattern, coreferent-indicative) pairs.
    pub coref_patterns: Vec<(TokenPattern, bool)>,
    pub pleonastic_patterns: Vec<TokenPattern>,
    pub hypernyms: FxHashMap<String, HypernymEntry>,
    /// synset -> parent synsets.
    pub hypernym_edges: FxHashMap<String, Vec<String>>,
    /// (part, whole) pairs over head words.
    pub part_of: FxHashSet<(String, String)>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EdtError::resource(path.display().to_string(), e.to_string()))?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

fn data_lines(path: &Path) -> Result<impl Iterator<Item = String>> {
    Ok(read_lines(path)?
        .into_iter()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')))
}

impl ResourceBundle {
    pub fn load(paths: &ResourcePaths) -> Result<ResourceBundle> {
        let mut bundle = ResourceBundle::default();

        if let Some(dir) = &paths.gazetteer_dir {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| EdtError::resource(dir.display().to_string(), e.to_string()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().map(|x| x == "txt").unwrap_or(false))
                .collect();
            files.sort();
            for file in files {
                let name = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_default();
                let entries = data_lines(&file)?
                    .map(|l| l.trim().to_lowercase())
                    .collect();
                bundle.gazetteers.push(Gazetteer { name, entries });
            }
        }

        if let Some(path) = &paths.knowledge_pairs {
            for line in data_lines(path)? {
                let mut cols = line.split('\t');
                if let (Some(a), Some(b)) = (cols.next(), cols.next()) {
                    bundle
                        .knowledge_pairs
                        .insert((a.trim().to_lowercase(), b.trim().to_lowercase()));
                }
            }
        }

        if let Some(path) = &paths.word_clusters {
            for line in data_lines(path)? {
                let mut cols = line.split('\t');
                if let (Some(w), Some(c)) = (cols.next(), cols.next()) {
                    bundle
                        .word_clusters
                        .insert(w.trim().to_lowercase(), c.trim().to_string());
                }
            }
        }

        if let Some(path) = &paths.collocations {
            for line in data_lines(path)? {
                let mut cols = line.split('\t');
                if let (Some(a), Some(b)) = (cols.next(), cols.next()) {
                    let a = a.trim().to_lowercase();
                    let b = b.trim().to_lowercase();
                    bundle.collocation_words.insert(a.clone());
                    bundle.collocation_words.insert(b.clone());
                    bundle.collocations.insert((a, b));
                }
            }
        }

        if let Some(path) = &paths.gender_number {
            for line in data_lines(path)? {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() >= 3 {
                    bundle.gender_number.insert(
                        cols[0].trim().to_lowercase(),
                        GenderNumber {
                            gender: Gender::parse(cols[1].trim()),
                            number: SemNumber::parse(cols[2].trim()),
                        },
                    );
                }
            }
        }

        if let Some(path) = &paths.coref_patterns {
            for line in read_lines(path)? {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let (polarity, rest) = match trimmed.as_bytes()[0] {
                    b'+' => (true, &trimmed[1..]),
                    b'-' => (false, &trimmed[1..]),
                    _ => (true, trimmed),
                };
                if let Some(p) = TokenPattern::parse(rest) {
                    bundle.coref_patterns.push((p, polarity));
                }
            }
        }

        if let Some(path) = &paths.pleonastic_patterns {
            for line in read_lines(path)? {
                if let Some(p) = TokenPattern::parse(&line) {
                    bundle.pleonastic_patterns.push(p);
                }
            }
        }

        if let Some(path) = &paths.hypernyms {
            for line in data_lines(path)? {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() >= 2 {
                    let synsets: Vec<String> = cols[1]
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .take(2)
                        .map(|s| s.trim().to_string())
                        .collect();
                    let hypernyms: Vec<String> = cols
                        .get(2)
                        .map(|c| {
                            c.split(',')
                                .filter(|s| !s.is_empty())
                                .map(|s| s.trim().to_string())
                                .collect()
                        })
                        .unwrap_or_default();
                    bundle.hypernyms.insert(
                        cols[0].trim().to_lowercase(),
                        HypernymEntry { synsets, hypernyms },
                    );
                }
            }
        }

        if let Some(path) = &paths.hypernym_edges {
            for line in data_lines(path)? {
                let mut cols = line.split('\t');
                if let (Some(c), Some(p)) = (cols.next(), cols.next()) {
                    bundle
                        .hypernym_edges
                        .entry(c.trim().to_string())
                        .or_default()
                        .push(p.trim().to_string());
                }
            }
        }

        if let Some(path) = &paths.part_of {
            for line in data_lines(path)? {
                let mut cols = line.split('\t');
                if let (Some(a), Some(b)) = (cols.next(), cols.next()) {
                    bundle
                        .part_of
                        .insert((a.trim().to_lowercase(), b.trim().to_lowercase()));
                }
            }
        }

        Ok(bundle)
    }

    pub fn gazetteers_containing<'a>(
        &'a self,
        entry_lower: &'a str,
    ) -> impl Iterator<Item = &'a Gazetteer> + 'a {
        self.gazetteers
            .iter()
            .filter(move |g| g.entries.contains(entry_lower))
    }

    /// Undirected BFS distance between two synset sets over the hypernym
    /// edges, capped at `max_depth`.
    pub fn synset_distance(&self, from: &[String], to: &[String], max_depth: usize) -> Option<usize> {
        if from.is_empty() || to.is_empty() || self.hypernym_edges.is_empty() {
            return None;
        }
        use std::collections::VecDeque;
        let targets: FxHashSet<&str> = to.iter().map(|s| s.as_str()).collect();
        let mut seen: FxHashSet<&str> = FxHashSet::default();
        let mut queue: VecDeque<(&str, usize)> = VecDeque::new();
        for s in from {
            if targets.contains(s.as_str()) {
                return Some(0);
            }
            seen.insert(s);
            queue.push_back((s, 0));
        }
        // undirected over child->parent edges: build reverse adjacency lazily
        let mut reverse: FxHashMap<&str, Vec<&str>> = FxHashMap::default();
        for (c, ps) in &self.hypernym_edges {
            for p in ps {
                reverse.entry(p.as_str()).or_default().push(c.as_str());
            }
        }
        while let Some((node, d)) = queue.pop_front() {
            if d >= max_depth {
                continue;
            }
            let ups = self.hypernym_edges.get(node).map(|v| v.as_slice()).unwrap_or(&[]);
            let downs = reverse.get(node).map(|v| v.as_slice()).unwrap_or(&[]);
            for next in ups.iter().map(|s| s.as_str()).chain(downs.iter().copied()) {
                if seen.insert(next) {
                    if targets.contains(next) {
                        return Some(d + 1);
                    }
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_parsing_and_matching() {
        let p = TokenPattern::parse("it is|was * that").unwrap();
        assert_eq!(p.len(), 4);
        let words: Vec<String> = ["it", "was", "said", "that", "x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert!(p.matches_at(&words, 0));
        let words2: Vec<String> = ["it", "can", "be", "that"].iter().map(|s| s.to_string()).collect();
        assert!(!p.matches_at(&words2, 0));
        assert!(TokenPattern::parse("# comment").is_none());
        assert!(TokenPattern::parse("   ").is_none());
    }

    #[test]
    fn pronoun_table_sanity() {
        assert_eq!(pronoun_info("she").unwrap().gender, Some(Gender::Female));
        assert_eq!(pronoun_info("they").unwrap().number, Some(SemNumber::Plural));
        assert!(pronoun_info("senate").is_none());
    }

    #[test]
    fn synset_distance_bfs() {
        let mut bundle = ResourceBundle::default();
        bundle.hypernym_edges.insert("dog.n".into(), vec!["canine.n".into()]);
        bundle.hypernym_edges.insert("canine.n".into(), vec!["animal.n".into()]);
        bundle.hypernym_edges.insert("cat.n".into(), vec!["feline.n".into()]);
        bundle.hypernym_edges.insert("feline.n".into(), vec!["animal.n".into()]);
        let d = bundle.synset_distance(&["dog.n".into()], &["cat.n".into()], 8);
        assert_eq!(d, Some(4));
        let d0 = bundle.synset_distance(&["dog.n".into()], &["dog.n".into()], 8);
        assert_eq!(d0, Some(0));
        assert_eq!(bundle.synset_distance(&["dog.n".into()], &["rock.n".into()], 8), None);
    }
}
