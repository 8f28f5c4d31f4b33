//! Compile-time axis checking.
//!
//! The containers here wrap the runtime containers of [`crate::axis`] with
//! zero-sized marker types, so the Rust compiler itself rejects a gather
//! through the wrong index or a lift through the wrong map:
//!
//! ```
//! use geist_core::typed::{Index, Map, Vector};
//! use geist_core::{axes, datasets};
//!
//! axes!(State, County);
//! datasets!(Data);
//!
//! let gamma_0 = Vector::<State>::new(vec![5.0, 7.0]).unwrap();
//! let state_of_county = Map::<State, County, Data>::new(vec![0, 0, 1], 2).unwrap();
//! let county_idx = Index::<County, Data>::new(vec![0, 1, 2, 2], 3).unwrap();
//!
//! let per_county = gamma_0.lift(&state_of_county);
//! let per_home = per_county.gather(&county_idx);
//! assert_eq!(per_home.values(), &[5.0, 5.0, 7.0, 7.0]);
//! ```
//!
//! Gathering county effects through a home-level index does not compile:
//!
//! ```compile_fail
//! use geist_core::typed::{Index, Vector};
//! use geist_core::{axes, datasets};
//!
//! axes!(County, Home);
//! datasets!(Data);
//!
//! let a = Vector::<County>::new(vec![1.0, 2.0]).unwrap();
//! let home_idx = Index::<Home, Data>::new(vec![0, 1], 2).unwrap();
//! a.gather(&home_idx);
//! ```
//!
//! Axis sizes are runtime values. Mixing two containers that name the same
//! axis type with different sizes is a programming error and panics.

use std::fmt;
use std::marker::PhantomData;

use crate::axis::{self, AxisMap, AxisTag, DatasetTag, IndexArray, ObsArray, Result, TypedVec};

pub trait Axis: 'static {
    const NAME: &'static str;
}

pub trait Dataset: 'static {
    const NAME: &'static str;
}

/// Declares unit structs implementing [`Axis`].
#[macro_export]
macro_rules! axes {
    ($($(#[$meta:meta])* $vis:vis $name:ident),+ $(,)?) => {
        $(
            $(#[$meta])*
            #[derive(Debug, Clone, Copy, PartialEq, Eq)]
            $vis struct $name;
            impl $crate::typed::Axis for $name {
                const NAME: &'static str = stringify!($name);
            }
        )+
    };
}

/// Declares unit structs implementing [`Dataset`].
#[macro_export]
macro_rules! datasets {
    ($($(#[$meta:meta])* $vis:vis $name:ident),+ $(,)?) => {
        $(
            $(#[$meta])*
            #[derive(Debug, Clone, Copy, PartialEq, Eq)]
            $vis struct $name;
            impl $crate::typed::Dataset for $name {
                const NAME: &'static str = stringify!($name);
            }
        )+
    };
}

fn axis_tag<K: Axis>(size: usize) -> Result<AxisTag> {
    AxisTag::new(K::NAME, size)
}

fn dataset_tag<D: Dataset>(obs: usize) -> Result<DatasetTag> {
    DatasetTag::new(D::NAME, obs)
}

fn unwrap_consistent<T>(op: &str, r: Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => panic!("inconsistent sizes in typed {op}: {e}"),
    }
}

/// Zero-sized axis and dataset marker.
type Tag<T> = PhantomData<fn() -> T>;

/// `Vec(K)`: parameters over axis `K`.
pub struct Vector<K> {
    inner: TypedVec,
    _axis: Tag<K>,
}

/// `Idx(K, D)`: indices from axis `K` into the observations of `D`.
pub struct Index<K, D> {
    inner: IndexArray,
    _tags: Tag<(K, D)>,
}

/// `Map(K, L, D)`: child-to-parent map from axis `L` back to axis `K`.
pub struct Map<K, L, D> {
    inner: AxisMap,
    _tags: Tag<(K, L, D)>,
}

/// Gather output. Only the dataset survives.
pub struct Observed<D> {
    inner: ObsArray,
    _dataset: Tag<D>,
}

impl<K: Axis> Vector<K> {
    /// The axis size is taken from `values.len()`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let tag = axis_tag::<K>(values.len())?;
        Ok(Self::wrap(TypedVec::new(tag, values)?))
    }

    fn wrap(inner: TypedVec) -> Self {
        Self {
            inner,
            _axis: PhantomData,
        }
    }

    pub fn values(&self) -> &[f64] {
        self.inner.values()
    }

    pub fn untyped(&self) -> &TypedVec {
        &self.inner
    }

    pub fn gather<D: Dataset>(&self, idx: &Index<K, D>) -> Observed<D> {
        Observed::wrap(unwrap_consistent(
            "gather",
            axis::gather(&self.inner, &idx.inner),
        ))
    }

    pub fn lift<L: Axis, D: Dataset>(&self, map: &Map<K, L, D>) -> Vector<L> {
        Vector::wrap(unwrap_consistent(
            "lift",
            axis::lift(&map.inner, &self.inner),
        ))
    }

    /// Element-wise sum. Fails only if the result overflows.
    pub fn plus(&self, other: &Vector<K>) -> Result<Vector<K>> {
        Ok(Vector::wrap(
            self.inner.zip_with(&other.inner, |a, b| a + b)?,
        ))
    }

    pub fn scale(&self, factor: f64) -> Result<Vector<K>> {
        Ok(Vector::wrap(self.inner.map(|v| factor * v)?))
    }
}

impl<K: Axis, D: Dataset> Index<K, D> {
    /// `axis_size` is `|K|`; the observation count is `indices.len()`.
    pub fn new(indices: Vec<usize>, axis_size: usize) -> Result<Self> {
        let inner = IndexArray::new(
            axis_tag::<K>(axis_size)?,
            dataset_tag::<D>(indices.len())?,
            indices,
        )?;
        Ok(Self::wrap(inner))
    }

    fn wrap(inner: IndexArray) -> Self {
        Self {
            inner,
            _tags: PhantomData,
        }
    }

    pub fn indices(&self) -> &[usize] {
        self.inner.indices()
    }

    pub fn untyped(&self) -> &IndexArray {
        &self.inner
    }
}

impl<K: Axis, L: Axis, D: Dataset> Map<K, L, D> {
    /// `parent_size` is `|K|`; `|L|` is `entries.len()`. The dataset's
    /// observation count is not known to a map, so it is recorded as 1 and
    /// only the dataset name takes part in comparisons made here.
    pub fn new(entries: Vec<usize>, parent_size: usize) -> Result<Self> {
        let inner = AxisMap::new(
            axis_tag::<K>(parent_size)?,
            axis_tag::<L>(entries.len())?,
            dataset_tag::<D>(1)?,
            entries,
        )?;
        Ok(Self {
            inner,
            _tags: PhantomData,
        })
    }

    pub fn entries(&self) -> &[usize] {
        self.inner.entries()
    }

    pub fn untyped(&self) -> &AxisMap {
        &self.inner
    }

    pub fn reindex(&self, idx: &Index<L, D>) -> Index<K, D> {
        let parent = self.inner.parent_axis().clone();
        let rebased = AxisMap::new(
            parent,
            idx.inner.source_axis().clone(),
            idx.inner.dataset().clone(),
            self.inner.entries().to_vec(),
        );
        let rebased = unwrap_consistent("reindex", rebased);
        Index::wrap(unwrap_consistent(
            "reindex",
            axis::reindex(&rebased, &idx.inner),
        ))
    }
}

impl<D: Dataset> Observed<D> {
    fn wrap(inner: ObsArray) -> Self {
        Self {
            inner,
            _dataset: PhantomData,
        }
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        let tag = dataset_tag::<D>(values.len())?;
        Ok(Self::wrap(ObsArray::new(tag, values)?))
    }

    pub fn values(&self) -> &[f64] {
        self.inner.values()
    }

    pub fn untyped(&self) -> &ObsArray {
        &self.inner
    }

    pub fn plus(&self, other: &Observed<D>) -> Result<Observed<D>> {
        Ok(Observed::wrap(
            self.inner.zip_with(&other.inner, |a, b| a + b)?,
        ))
    }

    pub fn scale(&self, factor: f64) -> Result<Observed<D>> {
        Ok(Observed::wrap(self.inner.map(|v| factor * v)?))
    }

    pub fn loglik(&self, mu: &Observed<D>, sigma: f64) -> Result<f64> {
        axis::gaussian_loglik(&self.inner, &mu.inner, sigma)
    }
}

impl<K: Axis> fmt::Debug for Vector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vec[{}]{:?}", K::NAME, self.values())
    }
}

impl<K: Axis, D: Dataset> fmt::Debug for Index<K, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Idx[{}, {}]{:?}", K::NAME, D::NAME, self.indices())
    }
}

impl<K: Axis, L: Axis, D: Dataset> fmt::Debug for Map<K, L, D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Map[{}, {}, {}]{:?}",
            K::NAME,
            L::NAME,
            D::NAME,
            self.entries()
        )
    }
}

impl<D: Dataset> fmt::Debug for Observed<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Obs[{}]{:?}", D::NAME, self.values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels;

    crate::axes!(State, County, Home);
    crate::datasets!(Data);

    #[test]
    fn radon_chain() {
        let gamma_0 = Vector::<State>::new(vec![5.0, 7.0]).unwrap();
        let soc = Map::<State, County, Data>::new(vec![0, 0, 1], 2).unwrap();
        let county_idx = Index::<County, Data>::new(vec![0, 1, 1, 2, 2], 3).unwrap();
        let state_idx = soc.reindex(&county_idx);
        assert_eq!(state_idx.indices(), &[0, 0, 0, 1, 1]);

        let via_lift = gamma_0.lift(&soc).gather(&county_idx);
        let via_reindex = gamma_0.gather(&state_idx);
        assert_eq!(via_lift.values(), via_reindex.values());
    }

    #[test]
    fn typed_gather_is_the_raw_kernel() {
        let v = Vector::<County>::new(vec![0.1, -2.5, 3.75]).unwrap();
        let i = Index::<County, Data>::new(vec![2, 2, 0, 1], 3).unwrap();
        let typed = v.gather(&i);
        let raw = kernels::gather(&[0.1f64, -2.5, 3.75], &[2, 2, 0, 1]);
        let typed_bits: Vec<u64> = typed.values().iter().map(|v| v.to_bits()).collect();
        let raw_bits: Vec<u64> = raw.iter().map(|v| v.to_bits()).collect();
        assert_eq!(typed_bits, raw_bits);
    }

    #[test]
    fn arithmetic_on_same_axis() {
        let a = Vector::<County>::new(vec![1.0, 2.0]).unwrap();
        let b = a.scale(0.5).unwrap().plus(&a).unwrap();
        assert_eq!(b.values(), &[1.5, 3.0]);
        assert!(a.scale(f64::MAX / 4.0).unwrap().scale(10.0).is_err());
    }

    #[test]
    #[should_panic(expected = "inconsistent sizes")]
    fn size_disagreement_panics() {
        let a = Vector::<Home>::new(vec![1.0, 2.0]).unwrap();
        let i = Index::<Home, Data>::new(vec![0, 2], 3).unwrap();
        a.gather(&i);
    }
}
