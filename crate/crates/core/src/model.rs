//! Versioned binary model files and the human-readable weight dump.

use crate::config::RunConfig;
use crate::error::{EdtError, Result};
use crate::registry::FeatureRegistry;
use crate::sparse::{FeatureId, WeightVector};
use crate::registry::WordTable;
use crate::types::TypeInventory;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MODEL_MAGIC: &[u8; 4] = b"EDTM";
const MODEL_VERSION: u32 = 1;

/// A trained model: frozen feature space, weights, and the full run
/// configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    pub config: RunConfig,
    pub inventory: TypeInventory,
    pub words: WordTable,
    pub registry: FeatureRegistry,
    pub weights: WeightVector,
}

impl Model {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(MODEL_MAGIC)?;
        out.write_all(&MODEL_VERSION.to_le_bytes())?;
        bincode::serialize_into(&mut out, self)
            .map_err(|e| EdtError::Model(format!("serialization failed: {e}")))?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(EdtError::Model(format!(
                "{} is not a model file (bad magic)",
                path.display()
            )));
        }
        let mut version = [0u8; 4];
        input.read_exact(&mut version)?;
        let version = u32::from_le_bytes(version);
        if version != MODEL_VERSION {
            return Err(EdtError::Model(format!(
                "unsupported model version {version} (expected {MODEL_VERSION})"
            )));
        }
        let mut model: Model = bincode::deserialize_from(&mut input)
            .map_err(|e| EdtError::Model(format!("deserialization failed: {e}")))?;
        model.registry.rebuild_index();
        model.words.rebuild_index();
        Ok(model)
    }

    /// Text dump: one `feature-name TAB weight` line per non-zero weight,
    /// in feature id order.
    pub fn dump_text(&self, mut out: impl Write) -> Result<()> {
        for i in 0..self.registry.active_len() {
            let w = self.weights.get(FeatureId(i as u32));
            if w != 0.0 {
                writeln!(
                    out,
                    "{}\t{}",
                    self.registry.render_meta(FeatureId(i as u32), &self.inventory, &self.words),
                    w
                )?;
            }
        }
        Ok(())
    }

    pub fn dump_to_string(&self) -> String {
        let mut buf = Vec::new();
        self.dump_text(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("dump is valid utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{BaseFeatures, DecFeatures, DecKey, FeatureClass};
    use crate::sparse::SparseVector;

    #[test]
    fn model_roundtrips_through_file() {
        let mut registry = FeatureRegistry::new();
        let b = registry.intern_base(FeatureClass::Lexical, "w=clinton");
        let d = registry.intern_dec(DecKey::EntityType(0));
        registry.count_step(
            &BaseFeatures { items: vec![(b, 1.0)] },
            &DecFeatures { items: vec![(d, 1.0)] },
        );
        registry.freeze(1);
        let mut weights = WeightVector::zeros(registry.active_len());
        weights.add_scaled(
            &SparseVector::from_pairs(vec![(FeatureId(0), 0.25)]),
            1.0,
        );
        let mut words = WordTable::new();
        words.intern("clinton");
        let model = Model {
            config: RunConfig::default(),
            inventory: TypeInventory::ace2004(),
            words,
            registry,
            weights,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        model.save(&path).unwrap();
        let loaded = Model::load(&path).unwrap();
        assert_eq!(loaded.weights, model.weights);
        assert_eq!(loaded.config, model.config);
        assert_eq!(loaded.registry.active_len(), 1);
        assert_eq!(
            loaded.registry.lookup_base(FeatureClass::Lexical, "w=clinton"),
            Some(0)
        );
        let dump = loaded.dump_to_string();
        assert!(dump.contains("lexical|w=clinton|simple:etype=PER\t0.25"), "{dump}");
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOPE....").unwrap();
        assert!(Model::load(&path).is_err());
    }
}
