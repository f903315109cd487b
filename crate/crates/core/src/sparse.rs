//! Sparse feature vectors and the dense weight vector of the linear model.
//!
//! Feature ids are dense `u32`s handed out by the registry, so weights live
//! in a flat `Vec<f64>` and sparse vectors are id-sorted entry lists.

use serde::{Deserialize, Serialize};

/// Dense identifier for an interned (meta-)feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId(pub u32);

impl FeatureId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sparse real-valued vector over feature ids, sorted by id with no
/// duplicate ids and no explicit zero entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(FeatureId, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector::default()
    }

    /// Builds a vector from arbitrary (id, value) pairs, summing duplicates
    /// and dropping exact zeros.
    pub fn from_pairs(mut pairs: Vec<(FeatureId, f64)>) -> Self {
        pairs.sort_unstable_by_key(|(id, _)| *id);
        let mut entries: Vec<(FeatureId, f64)> = Vec::with_capacity(pairs.len());
        for (id, v) in pairs {
            match entries.last_mut() {
                Some((last, acc)) if *last == id => *acc += v,
                _ => entries.push((id, v)),
            }
        }
        entries.retain(|(_, v)| *v != 0.0);
        SparseVector { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        match self.entries.binary_search_by_key(&id, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> SparseVector {
        if factor == 0.0 {
            return SparseVector::new();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(id, v)| (id, v * factor)).collect(),
        }
    }

    /// Merge-add of two sorted vectors.
    pub fn add(&self, other: &SparseVector) -> SparseVector {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SparseVector, sign: f64) -> SparseVector {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    entries.push((ia, va));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    entries.push((ib, sign * vb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let v = va + sign * vb;
                    if v != 0.0 {
                        entries.push((ia, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        entries.extend_from_slice(&self.entries[i..]);
        entries.extend(other.entries[j..].iter().map(|&(id, v)| (id, sign * v)));
        SparseVector { entries }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[j];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += va * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Projects into the unit sphere: vectors with norm > 1 are rescaled to
    /// norm 1, everything else (including the zero vector) passes unchanged.
    pub fn project_unit(&self) -> SparseVector {
        let norm = self.l2_norm();
        if norm <= 1.0 {
            self.clone()
        } else {
            self.scale(1.0 / norm)
        }
    }

    /// Drops entries whose id is flagged in `frozen`.
    pub fn without_ids(&self, frozen: &[bool]) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|(id, _)| !frozen.get(id.index()).copied().unwrap_or(false))
                .copied()
                .collect(),
        }
    }
}

/// The linear model parameters, dense over the frozen feature id space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn zeros(dimension: usize) -> Self {
        WeightVector {
            values: vec![0.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, id: FeatureId) -> f64 {
        self.values.get(id.index()).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn get_raw(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear score of a sparse feature vector. Ids beyond the weight
    /// dimension (never handed out by a frozen registry) contribute zero.
    pub fn dot(&self, features: &SparseVector) -> f64 {
        features
            .iter()
            .map(|(id, v)| self.get(id) * v)
            .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn add_scaled(&mut self, delta: &SparseVector, factor: f64) {
        for (id, v) in delta.iter() {
            if id.index() >= self.values.len() {
                self.values.resize(id.index() + 1, 0.0);
            }
            self.values[id.index()] += factor * v;
        }
    }

    /// In-place projection into the unit sphere.
    pub fn project_unit(&mut self) {
        let norm = self.l2_norm();
        if norm > 1.0 {
            let inv = 1.0 / norm;
            for v in &mut self.values {
                *v *= inv;
            }
        }
    }

    /// Projection that leaves coordinates flagged in `frozen` untouched:
    /// when the norm exceeds 1, only the unfrozen coordinates are rescaled
    /// so that the total norm lands on 1.
    pub fn project_unit_frozen(&mut self, frozen: &[bool]) {
        let total_sq: f64 = self.values.iter().map(|v| v * v).sum();
        if total_sq <= 1.0 {
            return;
        }
        let frozen_sq: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| frozen.get(*i).copied().unwrap_or(false))
            .map(|(_, v)| v * v)
            .sum();
        let free_sq = total_sq - frozen_sq;
        if free_sq <= 0.0 {
            return;
        }
        // frozen part alone never exceeds the sphere (it was inside before
        // this update and has not been touched), so the target is reachable
        let target = (1.0 - frozen_sq).max(0.0);
        let factor = (target / free_sq).sqrt();
        for (i, v) in self.values.iter_mut().enumerate() {
            if !frozen.get(i).copied().unwrap_or(false) {
                *v *= factor;
            }
        }
    }

    /// Sparse view of the non-zero weights.
    pub fn to_sparse(&self) -> SparseVector {
        SparseVector::from_pairs(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (FeatureId(i as u32), *v))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.iter().map(|&(i, v)| (FeatureId(i), v)).collect())
    }

    #[test]
    fn project_inside_sphere_unchanged() {
        let v = sv(&[(0, 0.3), (1, 0.4)]);
        assert_eq!(v.project_unit(), v);
        assert!((v.l2_norm() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn project_rescales_to_unit_norm() {
        let v = sv(&[(0, 3.0), (1, 4.0)]);
        let p = v.project_unit();
        assert!((p.get(FeatureId(0)) - 0.6).abs() < 1e-9);
        assert!((p.get(FeatureId(1)) - 0.8).abs() < 1e-9);
        assert!((p.l2_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn project_zero_vector_is_zero() {
        let v = SparseVector::new();
        assert_eq!(v.project_unit(), v);
        assert_eq!(v.l2_norm(), 0.0);
    }

    #[test]
    fn from_pairs_sums_duplicates_and_drops_zeros() {
        let v = sv(&[(2, 1.0), (1, 2.0), (2, -1.0), (0, 0.0)]);
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(FeatureId(1)), 2.0);
    }

    #[test]
    fn add_sub_roundtrip() {
        let a = sv(&[(0, 1.0), (2, 3.0)]);
        let b = sv(&[(1, 2.0), (2, -3.0)]);
        let sum = a.add(&b);
        assert_eq!(sum.get(FeatureId(2)), 0.0);
        assert_eq!(sum.len(), 2);
        assert_eq!(sum.sub(&b), a);
    }

    #[test]
    fn sparse_dot_matches_dense_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut dense_a = vec![0.0f64; 100];
            let mut dense_b = vec![0.0f64; 100];
            let mut pa = vec![];
            let mut pb = vec![];
            for i in 0..100 {
                if rng.random::<f64>() < 0.3 {
                    let v = rng.random::<f64>() - 0.5;
                    dense_a[i] = v;
                    pa.push((i as u32, v));
                }
                if rng.random::<f64>() < 0.3 {
                    let v = rng.random::<f64>() - 0.5;
                    dense_b[i] = v;
                    pb.push((i as u32, v));
                }
            }
            let expected: f64 = dense_a.iter().zip(&dense_b).map(|(a, b)| a * b).sum();
            assert!((sv(&pa).dot(&sv(&pb)) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn weight_dot_ignores_out_of_range_ids() {
        let mut w = WeightVector::zeros(2);
        w.add_scaled(&sv(&[(0, 1.0)]), 0.5);
        let phi = sv(&[(0, 2.0), (9, 100.0)]);
        assert!((w.dot(&phi) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn frozen_projection_keeps_frozen_coordinates() {
        let mut w = WeightVector::zeros(3);
        w.add_scaled(&sv(&[(0, 0.6), (1, 0.6), (2, 1.2)]), 1.0);
        let frozen = vec![true, false, false];
        w.project_unit_frozen(&frozen);
        assert!((w.get(FeatureId(0)) - 0.6).abs() < 1e-12);
        assert!((w.l2_norm() - 1.0).abs() < 1e-9);
    }
}
