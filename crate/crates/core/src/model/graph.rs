use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BugId, Day};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("dependency {blocker} -> {blocked} would close the cycle {path:?}")]
    Cycle { blocker: BugId, blocked: BugId, path: Vec<BugId> },
    #[error("unknown bug {0}")]
    UnknownBug(BugId),
    #[error("a bug cannot block itself ({0})")]
    SelfLoop(BugId),
}

/// Directed acyclic "blocks" graph. An arc `(p, i)` means `p` blocks `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    nodes: BTreeSet<BugId>,
    children: BTreeMap<BugId, BTreeSet<BugId>>,
    parents: BTreeMap<BugId, BTreeSet<BugId>>,
    last_update: Option<Day>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, bug: BugId) {
        self.nodes.insert(bug);
    }

    /// Removes `bug` and every arc touching it. Returns the dropped arcs.
    pub fn remove_node(&mut self, bug: BugId) -> Vec<(BugId, BugId)> {
        let mut dropped = Vec::new();
        if !self.nodes.remove(&bug) {
            return dropped;
        }
        for c in self.children.remove(&bug).unwrap_or_default() {
            if let Some(ps) = self.parents.get_mut(&c) {
                ps.remove(&bug);
            }
            dropped.push((bug, c));
        }
        for p in self.parents.remove(&bug).unwrap_or_default() {
            if let Some(cs) = self.children.get_mut(&p) {
                cs.remove(&bug);
            }
            dropped.push((p, bug));
        }
        dropped
    }

    pub fn contains(&self, bug: BugId) -> bool {
        self.nodes.contains(&bug)
    }

    pub fn contains_arc(&self, blocker: BugId, blocked: BugId) -> bool {
        self.children.get(&blocker).is_some_and(|c| c.contains(&blocked))
    }

    /// Inserts the arc `blocker -> blocked`. Returns `Ok(true)` when the arc
    /// is new and `Ok(false)` when it was already present. An arc that would
    /// close a directed cycle is rejected with the offending path.
    pub fn add_dependency(&mut self, blocker: BugId, blocked: BugId, day: Day) -> Result<bool, GraphError> {
        for b in [blocker, blocked] {
            if !self.nodes.contains(&b) {
                return Err(GraphError::UnknownBug(b));
            }
        }
        if blocker == blocked {
            return Err(GraphError::SelfLoop(blocker));
        }
        if self.contains_arc(blocker, blocked) {
            return Ok(false);
        }
        if let Some(mut path) = self.path(blocked, blocker) {
            path.insert(0, blocker);
            return Err(GraphError::Cycle { blocker, blocked, path });
        }
        self.children.entry(blocker).or_default().insert(blocked);
        self.parents.entry(blocked).or_default().insert(blocker);
        self.last_update = Some(day);
        Ok(true)
    }

    /// Removes an arc if present.
    pub fn remove_dependency(&mut self, blocker: BugId, blocked: BugId, day: Day) -> bool {
        let removed = self.children.get_mut(&blocker).is_some_and(|c| c.remove(&blocked));
        if removed {
            if let Some(ps) = self.parents.get_mut(&blocked) {
                ps.remove(&blocker);
            }
            self.last_update = Some(day);
        }
        removed
    }

    /// Shortest directed path `from -> ... -> to`, both ends included.
    fn path(&self, from: BugId, to: BugId) -> Option<Vec<BugId>> {
        let mut prev: BTreeMap<BugId, BugId> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(&p) = prev.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &v in self.children.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    prev.insert(v, u);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    pub fn parents(&self, bug: BugId) -> impl Iterator<Item = BugId> + '_ {
        self.parents.get(&bug).into_iter().flatten().copied()
    }

    pub fn children(&self, bug: BugId) -> impl Iterator<Item = BugId> + '_ {
        self.children.get(&bug).into_iter().flatten().copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = BugId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.children.values().map(BTreeSet::len).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (BugId, BugId)> + '_ {
        self.children.iter().flat_map(|(&p, cs)| cs.iter().map(move |&c| (p, c)))
    }

    pub fn last_update(&self) -> Option<Day> {
        self.last_update
    }

    /// Arcs per node; 0 for an empty graph.
    pub fn mean_degree(&self) -> f64 {
        if self.nodes.is_empty() {
            0.0
        } else {
            self.arc_count() as f64 / self.nodes.len() as f64
        }
    }

    /// Depth of each node: arc count of the longest directed path starting
    /// at it.
    pub fn depths(&self) -> BTreeMap<BugId, usize> {
        let mut depth: BTreeMap<BugId, usize> = BTreeMap::new();
        // reverse topological order: process a node once all children are done
        let mut pending: BTreeMap<BugId, usize> =
            self.nodes.iter().map(|&n| (n, self.children.get(&n).map_or(0, BTreeSet::len))).collect();
        let mut ready: Vec<BugId> = pending.iter().filter(|(_, &k)| k == 0).map(|(&n, _)| n).collect();
        while let Some(n) = ready.pop() {
            let d = self.children(n).map(|c| depth[&c] + 1).max().unwrap_or(0);
            depth.insert(n, d);
            for p in self.parents(n) {
                let k = pending.get_mut(&p).expect("parent is a node");
                *k -= 1;
                if *k == 0 {
                    ready.push(p);
                }
            }
        }
        debug_assert_eq!(depth.len(), self.nodes.len(), "graph must be acyclic");
        depth
    }

    pub fn mean_depth(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        self.depths().values().sum::<usize>() as f64 / self.nodes.len() as f64
    }

    /// Kahn-style acyclicity check, independent of the insertion guard.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: BTreeMap<BugId, usize> = self.nodes.iter().map(|&n| (n, 0)).collect();
        for (_, c) in self.arcs() {
            *indeg.entry(c).or_default() += 1;
        }
        let mut stack: Vec<BugId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
        let mut seen = 0;
        while let Some(n) = stack.pop() {
            seen += 1;
            for c in self.children(n) {
                let d = indeg.get_mut(&c).unwrap();
                *d -= 1;
                if *d == 0 {
                    stack.push(c);
                }
            }
        }
        seen == indeg.len()
    }
}
