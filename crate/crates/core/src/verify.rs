//! Exhaustive checks that the automaton never loses a walk.

use std::collections::HashSet;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::automaton::StateGraph;
use crate::geometry::{l1_distance, Direction, Point, Transform};
use crate::legality::{a_escapes, allowed_moves_with, b_escapes, MoveSet};
use crate::oracle::count_loop_free_after_line;
use crate::simplify::{candidate_children, Candidate};
use crate::spectral::{first_choice, unroll};
use crate::state::{canonicalize, step, Move, StateId, StateKey, Walk};

/// A continuation the candidate forbids although it can still reach
/// infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessViolation {
    pub state: StateId,
    pub mv: Move,
    pub candidate: String,
    /// Continuation from `A`, in the frame of the stepped walk.
    pub path: Vec<Point>,
}

/// Searches continuations from the head of `w` of at most `depth` steps
/// that avoid `w`, end on a vertex of `targets` and can still escape.
pub fn blocked_continuation(w: &Walk, targets: &[Point], depth: usize) -> Option<Vec<Point>> {
    fn go(cur: &Walk, targets: &[Point], left: usize, out: &mut Vec<Point>) -> bool {
        let a = cur.a();
        if !out.is_empty() && targets.contains(&a) {
            return a_escapes(cur);
        }
        if left == 0 || targets.iter().all(|&t| l1_distance(a, t) as usize > left) {
            return false;
        }
        for d in Direction::ALL {
            let Ok(next) = cur.extended(a.step(d)) else {
                continue;
            };
            out.push(next.a());
            if go(&next, targets, left - 1, out) {
                return true;
            }
            out.pop();
        }
        false
    }
    let mut path = Vec::new();
    go(w, targets, depth, &mut path).then_some(path)
}

/// Checks one candidate list: every vertex a candidate adds to the stepped
/// walk must be unreachable by continuations that still reach infinity.
pub fn check_candidates(
    w: &Walk,
    cands: &[Candidate],
    depth: usize,
) -> Option<(usize, Vec<Point>)> {
    for (i, c) in cands.iter().enumerate() {
        let extra: Vec<Point> = c
            .walk
            .vertices()
            .iter()
            .copied()
            .filter(|&p| !w.contains(p))
            .collect();
        if extra.is_empty() {
            continue;
        }
        if let Some(path) = blocked_continuation(w, &extra, depth) {
            return Some((i, path));
        }
    }
    None
}

/// Runs [`check_candidates`] over every state and allowed move of `g`, with
/// continuations of up to `k` steps.
pub fn soundness_violations(g: &StateGraph) -> Vec<SoundnessViolation> {
    let depth = g.k as usize;
    (0..g.len() as StateId)
        .into_par_iter()
        .flat_map_iter(|s| {
            let walk = g.walk(s);
            let mut found = Vec::new();
            for m in allowed_moves_with(&walk, &g.features).iter() {
                let w = step(&walk, m).expect("allowed moves are unoccupied");
                let cands = candidate_children(&walk, m, g.k, g.index(), &g.features)
                    .expect("lists were built");
                if let Some((i, path)) = check_candidates(&w, &cands, depth) {
                    found.push(SoundnessViolation {
                        state: s,
                        mv: m,
                        candidate: cands[i].walk.to_string(),
                        path,
                    });
                }
            }
            found
        })
        .collect()
}

/// A real walk the automaton fails to follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// Directions after the root line.
    pub walk: String,
    pub state: StateId,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// The step points backwards in the state frame.
    Backwards,
    /// The move is excluded in the state.
    Disallowed(Move),
    /// The stored child is not among the recomputed candidates.
    UnknownChild(Move, StateId),
}

type Branch = (StateId, Transform);

/// Memoized per-state data for the walk against the automaton.
struct Tracker<'a> {
    g: &'a StateGraph,
    allowed: FxHashMap<StateId, MoveSet>,
    lists: FxHashMap<(StateId, usize), Vec<(StateKey, Transform)>>,
}

impl<'a> Tracker<'a> {
    fn new(g: &'a StateGraph) -> Self {
        Tracker {
            g,
            allowed: FxHashMap::default(),
            lists: FxHashMap::default(),
        }
    }

    fn allowed(&mut self, s: StateId) -> MoveSet {
        let g = self.g;
        *self
            .allowed
            .entry(s)
            .or_insert_with(|| allowed_moves_with(&g.walk(s), &g.features))
    }

    fn candidates(&mut self, s: StateId, m: Move) -> &[(StateKey, Transform)] {
        let g = self.g;
        self.lists.entry((s, m.index())).or_insert_with(|| {
            candidate_children(&g.walk(s), m, g.k, g.index(), &g.features)
                .expect("lists were built")
                .into_iter()
                .map(|c| {
                    let canon = canonicalize(&c.walk);
                    (canon.key, canon.transform)
                })
                .collect()
        })
    }

    /// Advances every branch by the real direction `d`.
    fn advance(
        &mut self,
        branches: &[Branch],
        d: Direction,
    ) -> Result<Vec<Branch>, (StateId, RejectReason)> {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for &(s, t) in branches {
            let Some(m) = Move::from_direction(Direction::Right, t.apply_dir(d)) else {
                return Err((s, RejectReason::Backwards));
            };
            if !self.allowed(s).contains(m) {
                return Err((s, RejectReason::Disallowed(m)));
            }
            let g = self.g;
            let cands = self.candidates(s, m).to_vec();
            for &child in g.children(s, m) {
                let key = g.key(child);
                let Some(&(_, tc)) = cands.iter().find(|(k, _)| *k == key) else {
                    return Err((s, RejectReason::UnknownChild(m, child)));
                };
                let branch = (child, t.then(tc));
                if seen.insert(branch) {
                    next.push(branch);
                }
            }
        }
        Ok(next)
    }
}

/// Follows every self-avoiding continuation of `n` steps after the root
/// line that can still be extended at both ends, through every branch of
/// the children lists. Returns the first failure found.
pub fn never_undercount(g: &StateGraph, n: usize) -> Result<u64, Reject> {
    fn go(
        tr: &mut Tracker<'_>,
        real: &Walk,
        dirs: &mut Vec<Direction>,
        branches: &[Branch],
        left: usize,
    ) -> Result<u64, Reject> {
        if left == 0 {
            return Ok(1);
        }
        let mut total = 0;
        for d in Direction::ALL {
            let Ok(next) = real.extended(real.a().step(d)) else {
                continue;
            };
            if !a_escapes(&next) || !b_escapes(&next, None) {
                continue;
            }
            dirs.push(d);
            match tr.advance(branches, d) {
                Ok(nb) => total += go(tr, &next, dirs, &nb, left - 1)?,
                Err((state, reason)) => {
                    return Err(Reject {
                        walk: dirs.iter().map(|d| d.to_char()).collect(),
                        state,
                        reason,
                    })
                }
            }
            dirs.pop();
        }
        Ok(total)
    }
    let root_line = Walk::line(g.k as usize / 2);
    let t = canonicalize(&root_line).transform;
    let mut tracker = Tracker::new(g);
    go(
        &mut tracker,
        &root_line,
        &mut Vec::new(),
        &[(StateGraph::ROOT, t)],
        n,
    )
}

/// For an erasure-only graph, compares the number of accepted words of each
/// length up to `n` with the brute-force count of walks free of short
/// loops. Returns the first mismatch as `(length, automaton, oracle)`.
pub fn erasure_exactness(g: &StateGraph, n: usize) -> Result<(), (usize, u128, u128)> {
    let choice = first_choice(g);
    for len in 0..=n {
        let got = unroll(&choice, StateGraph::ROOT, len);
        let want = u128::from(count_loop_free_after_line(len, g.k).expect("valid range"));
        if got != want {
            return Err((len, got, want));
        }
    }
    Ok(())
}
