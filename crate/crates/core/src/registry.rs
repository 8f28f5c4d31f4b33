//! Per-dataset registry of permitted axis relations.
//!
//! Every registered relation is a directed edge `parent -> child` and the
//! edges of one dataset always form a DAG. Lifts are legal only along
//! registered edges; a multi-hop lift must follow the one and only directed
//! path between its endpoints.
//!
//! [`Registry`] is generic over what it stores per edge so the static
//! checker can reuse the graph logic without any index data. The concrete
//! form holding [`AxisMap`]s is [`MapRegistry`].

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::axis::{self, AxisError, AxisMap, AxisTag, DatasetTag, TypedVec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("a map from `{parent}` to `{child}` is already registered")]
    Duplicate { parent: String, child: String },
    #[error("registering `{parent}` -> `{child}` would create the cycle {}", cycle.join(" -> "))]
    Cycle {
        parent: String,
        child: String,
        cycle: Vec<String>,
    },
    #[error("axis `{name}` is registered with size {registered}, not {given}")]
    AxisConflict {
        name: String,
        registered: usize,
        given: usize,
    },
    #[error(transparent)]
    Bounds(#[from] AxisError),
    #[error("no registered path from `{from}` to `{to}`")]
    NoPath { from: String, to: String },
    #[error("{count} registered paths lead from `{from}` to `{to}`")]
    AmbiguousPath {
        from: String,
        to: String,
        count: usize,
    },
    #[error("no map from `{parent}` to `{child}` is registered")]
    NotRegistered { parent: String, child: String },
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;

/// Directed acyclic graph of axis relations within one dataset.
#[derive(Debug, Clone)]
pub struct Registry<M> {
    dataset: DatasetTag,
    axes: BTreeMap<String, AxisTag>,
    edges: BTreeMap<(String, String), M>,
    children: BTreeMap<String, Vec<String>>,
}

pub type MapRegistry = Registry<AxisMap>;

/// Chain of relations leading from one axis to another. Empty when both
/// ends are the same axis.
#[derive(Debug, Clone)]
pub struct LiftPath<'a, M> {
    from: String,
    to: String,
    steps: Vec<&'a M>,
}

impl<'a, M> LiftPath<'a, M> {
    pub fn steps(&self) -> &[&'a M] {
        &self.steps
    }

    pub fn from_axis(&self) -> &str {
        &self.from
    }

    pub fn to_axis(&self) -> &str {
        &self.to
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }
}

impl LiftPath<'_, AxisMap> {
    /// Collapses the chain into a single map. `None` for the identity path.
    pub fn compose(&self) -> Option<AxisMap> {
        let (first, rest) = self.steps.split_first()?;
        let mut acc = (*first).clone();
        for step in rest {
            acc = acc
                .then(step)
                .expect("registered paths are chains within one dataset");
        }
        Some(acc)
    }
}

impl<M> Registry<M> {
    pub fn new(dataset: DatasetTag) -> Self {
        Self {
            dataset,
            axes: BTreeMap::new(),
            edges: BTreeMap::new(),
            children: BTreeMap::new(),
        }
    }

    pub fn dataset(&self) -> &DatasetTag {
        &self.dataset
    }

    pub fn contains_axis(&self, name: &str) -> bool {
        self.axes.contains_key(name)
    }

    pub fn axes(&self) -> impl Iterator<Item = &AxisTag> {
        self.axes.values()
    }

    pub fn relation_count(&self) -> usize {
        self.edges.len()
    }

    /// Registered `(parent, child)` pairs in sorted order.
    pub fn relations(&self) -> impl Iterator<Item = (&str, &str, &M)> {
        self.edges
            .iter()
            .map(|((p, c), m)| (p.as_str(), c.as_str(), m))
    }

    pub fn freeze(self) -> Arc<Self> {
        Arc::new(self)
    }

    /// Adds the edge `parent -> child` carrying `payload`.
    ///
    /// Fails without modifying the registry if the pair is already present,
    /// if the edge closes a cycle, or if either axis was registered earlier
    /// with a different size.
    pub fn insert(&mut self, parent: &AxisTag, child: &AxisTag, payload: M) -> Result<()> {
        for tag in [parent, child] {
            if let Some(known) = self.axes.get(tag.name()) {
                if known.size() != tag.size() {
                    return Err(RegistryError::AxisConflict {
                        name: tag.name().to_string(),
                        registered: known.size(),
                        given: tag.size(),
                    });
                }
            }
        }
        let key = (parent.name().to_string(), child.name().to_string());
        if self.edges.contains_key(&key) {
            return Err(RegistryError::Duplicate {
                parent: key.0,
                child: key.1,
            });
        }
        if let Some(mut back) = self.find_any_path(child.name(), parent.name()) {
            back.push(child.name().to_string());
            return Err(RegistryError::Cycle {
                parent: key.0,
                child: key.1,
                cycle: back,
            });
        }
        for tag in [parent, child] {
            self.axes
                .entry(tag.name().to_string())
                .or_insert_with(|| tag.clone());
        }
        self.children
            .entry(key.0.clone())
            .or_default()
            .push(key.1.clone());
        self.edges.insert(key, payload);
        Ok(())
    }

    pub fn lookup(&self, parent: &str, child: &str) -> Result<&M> {
        self.edges
            .get(&(parent.to_string(), child.to_string()))
            .ok_or_else(|| RegistryError::NotRegistered {
                parent: parent.to_string(),
                child: child.to_string(),
            })
    }

    fn successors(&self, node: &str) -> &[String] {
        self.children.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Some directed path `from -> ... -> to`, as a list of axis names.
    fn find_any_path(&self, from: &str, to: &str) -> Option<Vec<String>> {
        if from == to {
            return Some(vec![from.to_string()]);
        }
        let mut stack = vec![(from.to_string(), 0usize)];
        let mut seen = std::collections::BTreeSet::from([from.to_string()]);
        while let Some((node, next)) = stack.last().cloned() {
            let succ = self.successors(&node);
            if next >= succ.len() {
                stack.pop();
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let child = &succ[next];
            if child == to {
                let mut path: Vec<String> = stack.into_iter().map(|(n, _)| n).collect();
                path.push(child.clone());
                return Some(path);
            }
            if seen.insert(child.clone()) {
                stack.push((child.clone(), 0));
            }
        }
        None
    }

    /// Number of distinct directed paths `from -> to`, saturating at `cap`.
    pub fn count_paths(&self, from: &str, to: &str, cap: usize) -> usize {
        let mut memo = BTreeMap::new();
        self.count_paths_memo(from, to, cap, &mut memo)
    }

    fn count_paths_memo(
        &self,
        node: &str,
        to: &str,
        cap: usize,
        memo: &mut BTreeMap<String, usize>,
    ) -> usize {
        if node == to {
            return 1;
        }
        if let Some(&n) = memo.get(node) {
            return n;
        }
        let mut total = 0usize;
        for child in self.successors(node) {
            total = (total + self.count_paths_memo(child, to, cap, memo)).min(cap);
        }
        memo.insert(node.to_string(), total);
        total
    }

    /// The unique directed path from `from` to `to`.
    pub fn resolve_lift_path(&self, from: &str, to: &str) -> Result<LiftPath<'_, M>> {
        let mut path = LiftPath {
            from: from.to_string(),
            to: to.to_string(),
            steps: Vec::new(),
        };
        if from == to {
            return Ok(path);
        }
        let no_path = || RegistryError::NoPath {
            from: from.to_string(),
            to: to.to_string(),
        };
        if !self.contains_axis(from) || !self.contains_axis(to) {
            return Err(no_path());
        }
        let mut memo = BTreeMap::new();
        match self.count_paths_memo(from, to, 2, &mut memo) {
            0 => return Err(no_path()),
            1 => {}
            count => {
                return Err(RegistryError::AmbiguousPath {
                    from: from.to_string(),
                    to: to.to_string(),
                    count,
                })
            }
        }
        let mut node = from.to_string();
        while node != to {
            let next = self
                .successors(&node)
                .iter()
                .find(|c| c.as_str() == to || memo.get(c.as_str()).copied().unwrap_or(0) > 0)
                .expect("a unique path was counted")
                .clone();
            path.steps.push(&self.edges[&(node, next.clone())]);
            node = next;
        }
        Ok(path)
    }

    /// Axes reachable from `from` by at least one registered edge.
    pub fn reachable_from(&self, from: &str) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![from.to_string()];
        while let Some(n) = stack.pop() {
            for c in self.successors(&n) {
                if seen.insert(c.clone()) {
                    stack.push(c.clone());
                }
            }
        }
        seen.into_iter().collect()
    }
}

impl MapRegistry {
    /// Validates `entries` as a `parent -> child` map in this registry's
    /// dataset and registers it.
    pub fn register_map(
        &mut self,
        parent: &AxisTag,
        child: &AxisTag,
        entries: Vec<usize>,
    ) -> Result<()> {
        let map = AxisMap::new(parent.clone(), child.clone(), self.dataset.clone(), entries)?;
        self.insert(parent, child, map)
    }

    pub fn lookup_map(&self, parent: &AxisTag, child: &AxisTag) -> Result<&AxisMap> {
        self.lookup(parent.name(), child.name())
    }

    /// Lifts `vec` to `to_axis` along the unique registered path.
    pub fn auto_lift(&self, vec: &TypedVec, to_axis: &AxisTag) -> Result<TypedVec> {
        let path = self.resolve_lift_path(vec.axis().name(), to_axis.name())?;
        let mut out = vec.clone();
        for step in path.steps() {
            out = axis::lift(step, &out)?;
        }
        if out.axis() != to_axis {
            return Err(AxisError::AxisMismatch {
                expected: to_axis.clone(),
                found: out.axis().clone(),
            }
            .into());
        }
        Ok(out)
    }
}
