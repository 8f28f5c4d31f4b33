//! Axis-tagged containers and the three index operations.
//!
//! A [`TypedVec`] lives on an axis, an [`IndexArray`] points from every
//! observation of a dataset into an axis, and an [`AxisMap`] records the
//! parent of every level of a child axis. [`gather`], [`lift`] and
//! [`reindex`] are the only ways to move between them, and each refuses to
//! combine containers whose tags disagree.
//!
//! All containers validate on construction and are immutable afterwards.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernels;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AxisError {
    #[error("axis `{0}` must have at least one level")]
    EmptyAxis(String),
    #[error("dataset `{0}` must have at least one observation")]
    EmptyDataset(String),
    #[error("{what}: expected {expected} entries, found {found}")]
    Length {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what}: entry {position} is {value}, outside 0..{bound}")]
    OutOfBounds {
        what: String,
        position: usize,
        value: usize,
        bound: usize,
    },
    #[error("{what}: value {position} is not finite ({value})")]
    NonFinite {
        what: String,
        position: usize,
        value: f64,
    },
    #[error("axis mismatch: expected `{expected}`, found `{found}`")]
    AxisMismatch { expected: AxisTag, found: AxisTag },
    #[error("dataset mismatch: expected `{expected}`, found `{found}`")]
    DatasetMismatch {
        expected: DatasetTag,
        found: DatasetTag,
    },
    #[error("sigma must be positive and finite, got {0}")]
    Domain(f64),
}

pub type Result<T, E = AxisError> = std::result::Result<T, E>;

/// A named model level with a fixed number of distinct levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxisTag {
    name: Arc<str>,
    size: usize,
}

impl AxisTag {
    pub fn new(name: impl Into<Arc<str>>, size: usize) -> Result<Self> {
        let name = name.into();
        if size == 0 {
            return Err(AxisError::EmptyAxis(name.to_string()));
        }
        Ok(Self { name, size })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

impl fmt::Display for AxisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.size)
    }
}

/// A dataset: a named collection of observation rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DatasetTag {
    name: Arc<str>,
    obs_count: usize,
}

impl DatasetTag {
    pub fn new(name: impl Into<Arc<str>>, obs_count: usize) -> Result<Self> {
        let name = name.into();
        if obs_count == 0 {
            return Err(AxisError::EmptyDataset(name.to_string()));
        }
        Ok(Self { name, obs_count })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn obs_count(&self) -> usize {
        self.obs_count
    }
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.obs_count)
    }
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(AxisError::Length {
            what: what.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(position) => Err(AxisError::NonFinite {
            what: what.to_string(),
            position,
            value: values[position],
        }),
        None => Ok(()),
    }
}

fn check_bounds(what: &str, entries: &[usize], bound: usize) -> Result<()> {
    match entries.iter().position(|&e| e >= bound) {
        Some(position) => Err(AxisError::OutOfBounds {
            what: what.to_string(),
            position,
            value: entries[position],
            bound,
        }),
        None => Ok(()),
    }
}

/// Parameter vector over an axis, one value per level.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedVec {
    axis: AxisTag,
    values: Vec<f64>,
}

impl TypedVec {
    pub fn new(axis: AxisTag, values: Vec<f64>) -> Result<Self> {
        let what = format!("Vec[{}]", axis.name());
        check_len(&what, axis.size(), values.len())?;
        check_finite(&what, &values)?;
        Ok(Self { axis, values })
    }

    pub fn axis(&self) -> &AxisTag {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Element-wise combination with a vector on the same axis.
    pub fn zip_with(&self, other: &TypedVec, f: impl Fn(f64, f64) -> f64) -> Result<TypedVec> {
        if self.axis != other.axis {
            return Err(AxisError::AxisMismatch {
                expected: self.axis.clone(),
                found: other.axis.clone(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        TypedVec::new(self.axis.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TypedVec> {
        TypedVec::new(
            self.axis.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Per-observation indices into an axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexArray {
    source_axis: AxisTag,
    dataset: DatasetTag,
    indices: Vec<usize>,
}

impl IndexArray {
    pub fn new(source_axis: AxisTag, dataset: DatasetTag, indices: Vec<usize>) -> Result<Self> {
        let what = format!("Idx[{}, {}]", source_axis.name(), dataset.name());
        check_len(&what, dataset.obs_count(), indices.len())?;
        check_bounds(&what, &indices, source_axis.size())?;
        Ok(Self {
            source_axis,
            dataset,
            indices,
        })
    }

    pub fn source_axis(&self) -> &AxisTag {
        &self.source_axis
    }

    pub fn dataset(&self) -> &DatasetTag {
        &self.dataset
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Dense child-to-parent array: `entries[l]` is the parent level of child
/// level `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisMap {
    parent_axis: AxisTag,
    child_axis: AxisTag,
    dataset: DatasetTag,
    entries: Vec<usize>,
}

impl AxisMap {
    pub fn new(
        parent_axis: AxisTag,
        child_axis: AxisTag,
        dataset: DatasetTag,
        entries: Vec<usize>,
    ) -> Result<Self> {
        let what = format!(
            "Map[{}, {}, {}]",
            parent_axis.name(),
            child_axis.name(),
            dataset.name()
        );
        check_len(&what, child_axis.size(), entries.len())?;
        check_bounds(&what, &entries, parent_axis.size())?;
        Ok(Self {
            parent_axis,
            child_axis,
            dataset,
            entries,
        })
    }

    pub fn parent_axis(&self) -> &AxisTag {
        &self.parent_axis
    }

    pub fn child_axis(&self) -> &AxisTag {
        &self.child_axis
    }

    pub fn dataset(&self) -> &DatasetTag {
        &self.dataset
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Composes `self: K -> L` with `next: L -> M` into a single `K -> M` map.
    pub fn then(&self, next: &AxisMap) -> Result<AxisMap> {
        if next.parent_axis != self.child_axis {
            return Err(AxisError::AxisMismatch {
                expected: self.child_axis.clone(),
                found: next.parent_axis.clone(),
            });
        }
        if next.dataset != self.dataset {
            return Err(AxisError::DatasetMismatch {
                expected: self.dataset.clone(),
                found: next.dataset.clone(),
            });
        }
        Ok(AxisMap {
            parent_axis: self.parent_axis.clone(),
            child_axis: next.child_axis.clone(),
            dataset: self.dataset.clone(),
            entries: kernels::compose(&self.entries, &next.entries),
        })
    }
}

/// Observation-level array. No axis survives a gather, only the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsArray {
    dataset: DatasetTag,
    values: Vec<f64>,
}

impl ObsArray {
    pub fn new(dataset: DatasetTag, values: Vec<f64>) -> Result<Self> {
        let what = format!("Obs[{}]", dataset.name());
        check_len(&what, dataset.obs_count(), values.len())?;
        check_finite(&what, &values)?;
        Ok(Self { dataset, values })
    }

    pub fn dataset(&self) -> &DatasetTag {
        &self.dataset
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn zip_with(&self, other: &ObsArray, f: impl Fn(f64, f64) -> f64) -> Result<ObsArray> {
        if self.dataset != other.dataset {
            return Err(AxisError::DatasetMismatch {
                expected: self.dataset.clone(),
                found: other.dataset.clone(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ObsArray::new(self.dataset.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ObsArray> {
        ObsArray::new(
            self.dataset.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Broadcasts a parameter vector to the observations of `idx.dataset()`.
pub fn gather(vec: &TypedVec, idx: &IndexArray) -> Result<ObsArray> {
    if vec.axis != idx.source_axis {
        return Err(AxisError::AxisMismatch {
            expected: idx.source_axis.clone(),
            found: vec.axis.clone(),
        });
    }
    Ok(ObsArray {
        dataset: idx.dataset.clone(),
        values: kernels::gather(&vec.values, &idx.indices),
    })
}

/// Moves a parameter vector from the map's parent axis to its child axis.
pub fn lift(map: &AxisMap, vec: &TypedVec) -> Result<TypedVec> {
    if vec.axis != map.parent_axis {
        return Err(AxisError::AxisMismatch {
            expected: map.parent_axis.clone(),
            found: vec.axis.clone(),
        });
    }
    Ok(TypedVec {
        axis: map.child_axis.clone(),
        values: kernels::gather(&vec.values, &map.entries),
    })
}

/// Turns indices into the map's child axis into indices into its parent.
pub fn reindex(map: &AxisMap, idx: &IndexArray) -> Result<IndexArray> {
    if idx.source_axis != map.child_axis {
        return Err(AxisError::AxisMismatch {
            expected: map.child_axis.clone(),
            found: idx.source_axis.clone(),
        });
    }
    if idx.dataset != map.dataset {
        return Err(AxisError::DatasetMismatch {
            expected: map.dataset.clone(),
            found: idx.dataset.clone(),
        });
    }
    Ok(IndexArray {
        source_axis: map.parent_axis.clone(),
        dataset: idx.dataset.clone(),
        indices: kernels::compose(&map.entries, &idx.indices),
    })
}

/// Normal log-likelihood of `obs` around `mu` with a shared `sigma`.
pub fn gaussian_loglik(obs: &ObsArray, mu: &ObsArray, sigma: f64) -> Result<f64> {
    if obs.dataset != mu.dataset {
        return Err(AxisError::DatasetMismatch {
            expected: obs.dataset.clone(),
            found: mu.dataset.clone(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(AxisError::Domain(sigma));
    }
    Ok(kernels::normal_loglik(&obs.values, &mu.values, sigma))
}

/// Same as [`gaussian_loglik`] for a parameter-level observation.
pub fn gaussian_loglik_vec(obs: &TypedVec, mu: &TypedVec, sigma: f64) -> Result<f64> {
    if obs.axis != mu.axis {
        return Err(AxisError::AxisMismatch {
            expected: obs.axis.clone(),
            found: mu.axis.clone(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(AxisError::Domain(sigma));
    }
    Ok(kernels::normal_loglik(&obs.values, &mu.values, sigma))
}

pub fn make_identity_map(axis: &AxisTag, dataset: &DatasetTag) -> AxisMap {
    AxisMap {
        parent_axis: axis.clone(),
        child_axis: axis.clone(),
        dataset: dataset.clone(),
        entries: (0..axis.size()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(name: &str, size: usize) -> AxisTag {
        AxisTag::new(name, size).unwrap()
    }

    fn data(n: usize) -> DatasetTag {
        DatasetTag::new("Data", n).unwrap()
    }

    #[test]
    fn gather_by_county() {
        let county = axis("County", 3);
        let v = TypedVec::new(county.clone(), vec![10.0, 20.0, 30.0]).unwrap();
        let i = IndexArray::new(county, data(5), vec![0, 0, 1, 2, 2]).unwrap();
        let out = gather(&v, &i).unwrap();
        assert_eq!(out.values(), &[10.0, 10.0, 20.0, 30.0, 30.0]);
        assert_eq!(out.dataset().name(), "Data");
    }

    #[test]
    fn gather_full_pooling() {
        let k = axis("K", 1);
        let v = TypedVec::new(k.clone(), vec![7.0]).unwrap();
        let i = IndexArray::new(k, data(3), vec![0, 0, 0]).unwrap();
        assert_eq!(gather(&v, &i).unwrap().values(), &[7.0, 7.0, 7.0]);
    }

    #[test]
    fn gather_rejects_foreign_axis() {
        let v = TypedVec::new(axis("County", 3), vec![1.0, 2.0, 3.0]).unwrap();
        let i = IndexArray::new(axis("Home", 3), data(3), vec![0, 1, 2]).unwrap();
        assert!(matches!(
            gather(&v, &i),
            Err(AxisError::AxisMismatch { .. })
        ));
    }

    #[test]
    fn lift_state_to_county() {
        let state = axis("State", 2);
        let county = axis("County", 3);
        let m = AxisMap::new(state.clone(), county.clone(), data(5), vec![0, 0, 1]).unwrap();
        let v = TypedVec::new(state, vec![5.0, 7.0]).unwrap();
        let out = lift(&m, &v).unwrap();
        assert_eq!(out.axis(), &county);
        assert_eq!(out.values(), &[5.0, 5.0, 7.0]);
        assert!(matches!(
            lift(&m, &out),
            Err(AxisError::AxisMismatch { .. })
        ));
    }

    #[test]
    fn reindex_county_to_state() {
        let state = axis("State", 2);
        let county = axis("County", 3);
        let m = AxisMap::new(state.clone(), county.clone(), data(5), vec![0, 0, 1]).unwrap();
        let i = IndexArray::new(county, data(5), vec![0, 1, 1, 2, 2]).unwrap();
        let out = reindex(&m, &i).unwrap();
        assert_eq!(out.source_axis(), &state);
        assert_eq!(out.indices(), &[0, 0, 0, 1, 1]);
    }

    #[test]
    fn reindex_rejects_other_dataset() {
        let state = axis("State", 2);
        let county = axis("County", 3);
        let other = DatasetTag::new("Other", 5).unwrap();
        let m = AxisMap::new(state, county.clone(), data(5), vec![0, 0, 1]).unwrap();
        let i = IndexArray::new(county, other, vec![0, 1, 1, 2, 2]).unwrap();
        assert!(matches!(
            reindex(&m, &i),
            Err(AxisError::DatasetMismatch { .. })
        ));
    }

    #[test]
    fn identity_laws() {
        let k = axis("K", 3);
        let id = make_identity_map(&k, &data(4));
        assert_eq!(id.entries(), &[0, 1, 2]);
        let v = TypedVec::new(k.clone(), vec![1.5, -2.0, 3.25]).unwrap();
        assert_eq!(lift(&id, &v).unwrap(), v);
        let i = IndexArray::new(k, data(4), vec![2, 0, 1, 1]).unwrap();
        assert_eq!(reindex(&id, &i).unwrap(), i);
    }

    #[test]
    fn construction_rejects_bad_data() {
        assert!(AxisTag::new("K", 0).is_err());
        assert!(DatasetTag::new("D", 0).is_err());
        let k = axis("K", 2);
        assert!(matches!(
            TypedVec::new(k.clone(), vec![1.0]),
            Err(AxisError::Length {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            TypedVec::new(k.clone(), vec![1.0, f64::NAN]),
            Err(AxisError::NonFinite { position: 1, .. })
        ));
        assert!(matches!(
            IndexArray::new(k.clone(), data(3), vec![0, 2, 1]),
            Err(AxisError::OutOfBounds {
                position: 1,
                value: 2,
                bound: 2,
                ..
            })
        ));
        assert!(matches!(
            AxisMap::new(k.clone(), axis("L", 3), data(3), vec![0, 1]),
            Err(AxisError::Length {
                expected: 3,
                found: 2,
                ..
            })
        ));
        assert!(ObsArray::new(data(2), vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn loglik_errors() {
        let d = data(1);
        let o = ObsArray::new(d.clone(), vec![0.0]).unwrap();
        assert_eq!(gaussian_loglik(&o, &o, 0.0), Err(AxisError::Domain(0.0)));
        assert!(gaussian_loglik(&o, &o, -1.0).is_err());
        let other = ObsArray::new(DatasetTag::new("E", 1).unwrap(), vec![0.0]).unwrap();
        assert!(matches!(
            gaussian_loglik(&o, &other, 1.0),
            Err(AxisError::DatasetMismatch { .. })
        ));
    }

    #[test]
    fn loglik_residual_free() {
        let d = data(4);
        let o = ObsArray::new(d, vec![1.0, -3.0, 2.5, 0.0]).unwrap();
        let ll = gaussian_loglik(&o, &o, 1.0).unwrap();
        assert!((ll - 4.0 * -0.918_938_533_204_673).abs() < 1e-12);
    }

    #[test]
    fn map_composition() {
        let s = axis("S", 2);
        let c = axis("C", 3);
        let h = axis("H", 4);
        let sc = AxisMap::new(s, c.clone(), data(4), vec![0, 1, 1]).unwrap();
        let ch = AxisMap::new(c, h, data(4), vec![2, 0, 1, 2]).unwrap();
        assert_eq!(sc.then(&ch).unwrap().entries(), &[1, 0, 1, 1]);
        assert!(ch.then(&sc).is_err());
    }
}
