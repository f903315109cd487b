//! Annotated-corpus reading and prediction writing (one JSON document per
//! line; see `docs/corpus-format.md`).

use crate::document::{Annotation, Document, RawDocument};
use crate::error::{EdtError, Result};
use crate::types::TypeInventory;
use std::io::{BufRead, Write};
use std::path::Path;

pub fn read_corpus(path: &Path, inventory: &TypeInventory) -> Result<Vec<Document>> {
    let file = std::fs::File::open(path).map_err(|e| {
        EdtError::resource(path.display().to_string(), format!("cannot open corpus: {e}"))
    })?;
    read_corpus_from(std::io::BufReader::new(file), inventory)
}

pub fn read_corpus_from(reader: impl BufRead, inventory: &TypeInventory) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = serde_json::from_str(&line).map_err(|e| {
            EdtError::corpus(format!("line {}", lineno + 1), format!("malformed record: {e}"))
        })?;
        docs.push(raw.into_document(inventory)?);
    }
    Ok(docs)
}

pub fn write_corpus(
    path: &Path,
    docs: &[Document],
    annotations: &[Annotation],
    inventory: &TypeInventory,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (doc, ann) in docs.iter().zip(annotations) {
        let raw = RawDocument::from_document(doc, ann, inventory);
        serde_json::to_writer(&mut out, &raw)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Serializes one prediction using the same schema as gold corpora, with
/// chain indices re-densified into `E0, E1, ...` entity ids.
pub fn prediction_record(
    doc: &Document,
    annotation: &Annotation,
    inventory: &TypeInventory,
) -> RawDocument {
    RawDocument::from_document(doc, annotation, inventory)
}

/// Writes gold-annotated documents as a corpus file.
pub fn write_gold_corpus(path: &Path, docs: &[Document], inventory: &TypeInventory) -> Result<()> {
    let anns: Vec<Annotation> = docs
        .iter()
        .map(|d| d.gold_annotation().unwrap_or_default())
        .collect();
    write_corpus(path, docs, &anns, inventory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MentionType;
    use std::io::Cursor;

    /// Two-sentence example with five mentions and two entities.
    pub(crate) const INTRO_FIXTURE: &str = r#"{"id":"intro","tokens":["Bill","Clinton","gave","a","speech","today","to","the","Senate",".","The","President","outlined","his","plan","for","budget","reform","to","them","."],"pos":["NNP","NNP","VBD","DT","NN","NN","TO","DT","NNP",".","DT","NNP","VBD","PRP$","NN","IN","NN","NN","TO","PRP","."],"sentences":[10],"mentions":[{"start":0,"end":2,"entity_type":"PER","mention_type":"NAM","entity_id":"per-1"},{"start":7,"end":9,"entity_type":"ORG","mention_type":"NAM","entity_id":"org-2"},{"start":10,"end":12,"entity_type":"PER","mention_type":"NOM","entity_id":"per-1"},{"start":13,"end":14,"entity_type":"PER","mention_type":"PRO","entity_id":"per-1"},{"start":19,"end":20,"entity_type":"ORG","mention_type":"PRO","entity_id":"org-2"}]}"#;

    #[test]
    fn empty_file_gives_empty_corpus() {
        let inv = TypeInventory::ace2004();
        let docs = read_corpus_from(Cursor::new(""), &inv).unwrap();
        assert!(docs.is_empty());
    }

    #[test]
    fn intro_fixture_roundtrips_with_five_mentions_two_entities() {
        let inv = TypeInventory::ace2004();
        let docs = read_corpus_from(Cursor::new(INTRO_FIXTURE), &inv).unwrap();
        assert_eq!(docs.len(), 1);
        let doc = &docs[0];
        assert_eq!(doc.len(), 21);
        let ann = doc.gold_annotation().unwrap();
        assert_eq!(ann.mentions.len(), 5);
        assert_eq!(ann.chain_count(), 2);
        assert_eq!(ann.mentions[0].mention_type, MentionType::Name);
        // "his" and "Bill Clinton" share a chain; "them" and "the Senate" share the other
        assert_eq!(ann.mentions[0].chain, ann.mentions[3].chain);
        assert_eq!(ann.mentions[1].chain, ann.mentions[4].chain);

        // roundtrip through the writer
        let raw = RawDocument::from_document(doc, &ann, &inv);
        let line = serde_json::to_string(&raw).unwrap();
        let docs2 = read_corpus_from(Cursor::new(line), &inv).unwrap();
        assert_eq!(docs2[0].tokens, doc.tokens);
        let ann2 = docs2[0].gold_annotation().unwrap();
        assert_eq!(ann2.mentions, ann.mentions);
    }

    #[test]
    fn unknown_entity_type_is_schema_error() {
        let inv = TypeInventory::ace2004();
        let line = r#"{"id":"x","tokens":["a"],"mentions":[{"start":0,"end":1,"entity_type":"ALIEN","mention_type":"NAM","entity_id":"e"}]}"#;
        let err = read_corpus_from(Cursor::new(line), &inv).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ALIEN"), "unexpected error: {msg}");
        assert!(msg.contains("x"), "error should name the document: {msg}");
    }

    #[test]
    fn all_nae_prediction_has_zero_mentions() {
        let inv = TypeInventory::ace2004();
        let docs = read_corpus_from(Cursor::new(INTRO_FIXTURE), &inv).unwrap();
        let raw = RawDocument::from_document(&docs[0], &Annotation::default(), &inv);
        assert!(raw.mentions.is_empty());
        let line = serde_json::to_string(&raw).unwrap();
        let docs2 = read_corpus_from(Cursor::new(line), &inv).unwrap();
        assert!(docs2[0].gold.is_none());
    }
}
