//! Construction of the state graph.
//!
//! Pass 1 explores breadth first from the root line, one level at a time:
//! the candidate lists of a whole level are computed in parallel against a
//! snapshot of the states known at the start of the level, then merged in
//! frontier order so identifiers do not depend on scheduling. Pass 2, when
//! enabled, recomputes every list against the complete state set.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::legality::allowed_moves_with;
use crate::options::Features;
use crate::simplify::{allowance, candidate_children, SimplifyError};
use crate::state::{canonicalize, AllowanceClass, Move, StateId, StateKey, Walk, MAX_PACKED_STEPS};

pub const MIN_K: u32 = 4;
pub const MAX_K: u32 = 40;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("k must be even and within {MIN_K}..={MAX_K}, got {0}")]
    BadK(u32),
    #[error("state {state} move {mv:?}: {source}")]
    Simplify {
        state: StateId,
        mv: Move,
        #[source]
        source: SimplifyError,
    },
    #[error("state {state} move {mv:?}: candidate {candidate} is not a discovered state")]
    NotClosed {
        state: StateId,
        mv: Move,
        candidate: String,
    },
    #[error("state count exceeds the identifier range")]
    TooManyStates,
    #[error("state {0} is longer than {MAX_PACKED_STEPS} steps")]
    TooLong(String),
}

pub fn check_k(k: u32) -> Result<(), BuildError> {
    if k % 2 == 1 || !(MIN_K..=MAX_K).contains(&k) {
        return Err(BuildError::BadK(k));
    }
    Ok(())
}

/// The root state: a straight line of `k/2` steps, whose size-loop is `k`.
pub fn root_walk(k: u32) -> Walk {
    canonicalize(&Walk::line(k as usize / 2)).walk
}

/// Children of one state: for each move, the ids of its candidate list;
/// empty when the move is not allowed.
pub type ChildLists = [Vec<StateId>; 3];

/// The automaton: canonical states and their per-move children lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGraph {
    pub k: u32,
    pub features: Features,
    keys: Vec<StateKey>,
    allowances: Vec<AllowanceClass>,
    index: FxHashMap<StateKey, StateId>,
    children: Vec<ChildLists>,
}

impl StateGraph {
    pub const ROOT: StateId = 0;

    /// Assembles a graph from parts, validating ids.
    pub fn from_parts(
        k: u32,
        features: Features,
        keys: Vec<StateKey>,
        allowances: Vec<AllowanceClass>,
        children: Vec<ChildLists>,
    ) -> Option<Self> {
        let n = keys.len();
        if allowances.len() != n || children.len() != n || n == 0 || n > StateId::MAX as usize {
            return None;
        }
        if children
            .iter()
            .flatten()
            .flatten()
            .any(|&c| c as usize >= n)
        {
            return None;
        }
        let mut index = FxHashMap::default();
        for (id, key) in keys.iter().enumerate() {
            if index.insert(*key, id as StateId).is_some() {
                return None;
            }
        }
        Some(StateGraph {
            k,
            features,
            keys,
            allowances,
            index,
            children,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, id: StateId) -> StateKey {
        self.keys[id as usize]
    }

    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn walk(&self, id: StateId) -> Walk {
        self.keys[id as usize].walk()
    }

    pub fn allowance(&self, id: StateId) -> AllowanceClass {
        self.allowances[id as usize]
    }

    pub fn id_of(&self, key: &StateKey) -> Option<StateId> {
        self.index.get(key).copied()
    }

    pub fn index(&self) -> &FxHashMap<StateKey, StateId> {
        &self.index
    }

    pub fn children(&self, id: StateId, m: Move) -> &[StateId] {
        &self.children[id as usize][m.index()]
    }

    pub fn child_lists(&self, id: StateId) -> &ChildLists {
        &self.children[id as usize]
    }

    /// Total number of list entries over all states and moves.
    pub fn transitions(&self) -> usize {
        self.children.iter().flatten().map(Vec::len).sum()
    }
}

type Lists = [Option<Vec<(StateKey, Walk)>>; 3];

fn expand(
    walk: &Walk,
    id: StateId,
    k: u32,
    features: &Features,
    known: &FxHashMap<StateKey, StateId>,
) -> Result<Lists, BuildError> {
    let allowed = allowed_moves_with(walk, features);
    let mut lists: Lists = [None, None, None];
    for m in allowed.iter() {
        let cands = candidate_children(walk, m, k, known, features).map_err(|source| {
            BuildError::Simplify {
                state: id,
                mv: m,
                source,
            }
        })?;
        lists[m.index()] = Some(cands.into_iter().map(|c| (c.key, c.walk)).collect());
    }
    Ok(lists)
}

type Discovery = (Vec<StateKey>, FxHashMap<StateKey, StateId>, Vec<ChildLists>);

/// Pass 1. Returns the states in discovery order, with the children lists
/// computed against the set known at expansion time.
fn discover_with_lists(k: u32, features: &Features) -> Result<Discovery, BuildError> {
    check_k(k)?;
    let root = canonicalize(&root_walk(k));
    let mut keys = vec![root.key];
    let mut index = FxHashMap::default();
    index.insert(root.key, 0);
    let mut children: Vec<ChildLists> = vec![Default::default()];
    let mut frontier: Vec<StateId> = vec![0];

    while !frontier.is_empty() {
        let results: Vec<Lists> = frontier
            .par_iter()
            .map(|&id| expand(&keys[id as usize].walk(), id, k, features, &index))
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for (&id, lists) in frontier.iter().zip(results) {
            for (mi, list) in lists.into_iter().enumerate() {
                let Some(list) = list else { continue };
                let mut ids = Vec::with_capacity(list.len());
                for (key, walk) in list {
                    let child = match index.get(&key) {
                        Some(&c) => c,
                        None => {
                            if walk.steps() > MAX_PACKED_STEPS {
                                return Err(BuildError::TooLong(walk.to_string()));
                            }
                            let c = StateId::try_from(keys.len())
                                .map_err(|_| BuildError::TooManyStates)?;
                            keys.push(key);
                            index.insert(key, c);
                            children.push(Default::default());
                            next.push(c);
                            c
                        }
                    };
                    ids.push(child);
                }
                children[id as usize][mi] = ids;
            }
        }
        frontier = next;
    }
    Ok((keys, index, children))
}

/// Pass 1: the breadth-first closure of the root under the candidate lists.
pub fn discover(k: u32, features: &Features) -> Result<Vec<StateKey>, BuildError> {
    Ok(discover_with_lists(k, features)?.0)
}

/// Pass 2: recomputes every children list against the complete set.
pub fn link(
    k: u32,
    features: &Features,
    keys: &[StateKey],
    index: &FxHashMap<StateKey, StateId>,
) -> Result<Vec<ChildLists>, BuildError> {
    (0..keys.len())
        .into_par_iter()
        .map(|i| {
            let id = i as StateId;
            let lists = expand(&keys[i].walk(), id, k, features, index)?;
            let mut out: ChildLists = Default::default();
            for (mi, list) in lists.into_iter().enumerate() {
                let Some(list) = list else { continue };
                out[mi] = list
                    .into_iter()
                    .map(|(key, walk)| {
                        index
                            .get(&key)
                            .copied()
                            .ok_or_else(|| BuildError::NotClosed {
                                state: id,
                                mv: Move::ALL[mi],
                                candidate: walk.to_string(),
                            })
                    })
                    .collect::<Result<_, _>>()?;
            }
            Ok(out)
        })
        .collect()
}

/// Builds the automaton for cutoff `k`.
pub fn build(k: u32, features: &Features) -> Result<StateGraph, BuildError> {
    let (keys, index, mut children) = discover_with_lists(k, features)?;
    if features.two_pass {
        children = link(k, features, &keys, &index)?;
    }
    let allowances = keys
        .par_iter()
        .map(|key| allowance(&key.walk(), k, features))
        .collect();
    Ok(StateGraph {
        k,
        features: *features,
        keys,
        allowances,
        index,
        children,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplify::fits;

    #[test]
    fn rejects_bad_k() {
        assert!(matches!(
            build(5, &Features::all_on()),
            Err(BuildError::BadK(5))
        ));
        assert!(matches!(
            build(2, &Features::all_on()),
            Err(BuildError::BadK(2))
        ));
        assert!(matches!(
            build(42, &Features::all_on()),
            Err(BuildError::BadK(42))
        ));
    }

    #[test]
    fn root_is_the_half_line() {
        let r = root_walk(10);
        assert_eq!(r.steps(), 5);
        assert_eq!(r.size_loop(), 10);
    }

    #[test]
    fn k4_erasure_only_has_three_states() {
        let g = build(4, &Features::erasure_only()).unwrap();
        assert_eq!(g.len(), 3);
        for id in 0..g.len() as StateId {
            for m in Move::ALL {
                assert!(g.children(id, m).len() <= 1);
            }
        }
    }

    #[test]
    fn lists_are_valid_and_states_fit() {
        for f in [
            Features::all_on(),
            Features::baseline(),
            Features::erasure_only(),
        ] {
            let g = build(8, &f).unwrap();
            for id in 0..g.len() as StateId {
                let w = g.walk(id);
                assert!(id == StateGraph::ROOT || fits(&w, 8, &f), "{w}");
                let allowed = allowed_moves_with(&w, &f);
                for m in Move::ALL {
                    assert_eq!(allowed.contains(m), !g.children(id, m).is_empty());
                }
            }
        }
    }

    #[test]
    fn every_state_is_reachable() {
        let g = build(10, &Features::all_on()).unwrap();
        let mut seen = vec![false; g.len()];
        let mut stack = vec![StateGraph::ROOT];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for list in g.child_lists(s) {
                for &c in list {
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        stack.push(c);
                    }
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| build(10, &Features::all_on())).unwrap();
        let b = four.install(|| build(10, &Features::all_on())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_parts_validates_ids() {
        let g = build(6, &Features::all_on()).unwrap();
        let keys = g.keys().to_vec();
        let allowances: Vec<_> = (0..g.len() as StateId).map(|i| g.allowance(i)).collect();
        let children: Vec<_> = (0..g.len() as StateId)
            .map(|i| g.child_lists(i).clone())
            .collect();
        assert_eq!(
            StateGraph::from_parts(
                6,
                g.features,
                keys.clone(),
                allowances.clone(),
                children.clone()
            ),
            Some(g.clone())
        );
        let mut bad = children;
        bad[0][1] = vec![g.len() as StateId];
        assert_eq!(
            StateGraph::from_parts(6, g.features, keys, allowances, bad),
            None
        );
    }
}
