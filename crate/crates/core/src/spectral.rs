//! Spectral radius bounds for a choice of one child per `(state, move)`.
//!
//! For a nonnegative matrix `M` and a vector `v` the Collatz–Wielandt ratios
//! `(Mv)_i / v_i` bracket the spectral radius. Power iteration from the
//! all-ones vector only ever zeroes coordinates of states from which every
//! path dies out, so the maximum ratio over the positive coordinates stays a
//! valid upper bound at every iteration.

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::automaton::StateGraph;
use crate::state::{Move, StateId};

/// One chosen child (or none, for a blocked move) per state and move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Choice(pub Vec<[Option<StateId>; 3]>);

impl Choice {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: StateId, m: Move) -> Option<StateId> {
        self.0[s as usize][m.index()]
    }
}

/// The head of every non-empty list.
pub fn first_choice(g: &StateGraph) -> Choice {
    Choice(
        (0..g.len() as StateId)
            .map(|s| Move::ALL.map(|m| g.children(s, m).first().copied()))
            .collect(),
    )
}

/// Per `(state, move)`, the list element with the smallest coordinate in
/// `v`; ties go to the earliest element of the list.
pub fn reselect(g: &StateGraph, v: &[f64]) -> Choice {
    Choice(
        (0..g.len() as StateId)
            .into_par_iter()
            .map(|s| {
                Move::ALL.map(|m| {
                    let mut best: Option<StateId> = None;
                    for &c in g.children(s, m) {
                        if best.is_none_or(|b| v[c as usize] < v[b as usize]) {
                            best = Some(c);
                        }
                    }
                    best
                })
            })
            .collect(),
    )
}

/// Sparse row-major matrix of move multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceMatrix {
    offsets: Vec<usize>,
    entries: Vec<(u32, u32)>,
}

impl ChoiceMatrix {
    pub fn from_choice(choice: &Choice) -> Self {
        let mut offsets = Vec::with_capacity(choice.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for row in &choice.0 {
            let mut cols: Vec<u32> = row.iter().flatten().copied().collect();
            cols.sort_unstable();
            let start = entries.len();
            for c in cols {
                match entries[start..].last_mut() {
                    Some((last, n)) if *last == c => *n += 1,
                    _ => entries.push((c, 1)),
                }
            }
            offsets.push(entries.len());
        }
        ChoiceMatrix { offsets, entries }
    }

    /// Rows given as dense vectors, for small matrices and tests.
    pub fn from_dense(rows: &[Vec<u32>]) -> Self {
        let mut offsets = vec![0];
        let mut entries = Vec::new();
        for row in rows {
            entries.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, &n)| n > 0)
                    .map(|(c, &n)| (c as u32, n)),
            );
            offsets.push(entries.len());
        }
        ChoiceMatrix { offsets, entries }
    }

    pub fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        (0..self.dim())
            .map(|i| {
                let mut row = vec![0; self.dim()];
                for &(c, n) in self.row(i) {
                    row[c as usize] = n;
                }
                row
            })
            .collect()
    }

    pub fn multiply(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut()
            .enumerate()
            .with_min_len(1024)
            .for_each(|(i, o)| {
                *o = self
                    .row(i)
                    .iter()
                    .map(|&(c, n)| f64::from(n) * v[c as usize])
                    .sum();
            });
    }

    /// Strongly connected components that contain a cycle.
    pub fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let mut graph = DiGraph::<(), ()>::with_capacity(self.dim(), self.entries.len());
        for _ in 0..self.dim() {
            graph.add_node(());
        }
        for i in 0..self.dim() {
            for &(c, _) in self.row(i) {
                graph.add_edge((i as u32).into(), c.into(), ());
            }
        }
        kosaraju_scc(&graph)
            .into_iter()
            .filter(|comp| {
                comp.len() > 1
                    || self
                        .row(comp[0].index())
                        .iter()
                        .any(|&(c, _)| c as usize == comp[0].index())
            })
            .map(|comp| {
                let mut ids: Vec<usize> = comp.into_iter().map(|n| n.index()).collect();
                ids.sort_unstable();
                ids
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Max-normalized iterate.
    pub vector: Vec<f64>,
    /// Lower bound from the cyclic components.
    pub lambda_lo: f64,
    /// Certified upper bound on the spectral radius.
    pub lambda_hi: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest ratio over the positive coordinates of `v`.
fn upper_ratio(v: &[f64], mv: &[f64]) -> f64 {
    v.iter()
        .zip(mv)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &y)| y / x)
        .fold(0.0, f64::max)
}

/// Best lower bound over the cyclic components: the radius of a principal
/// submatrix is at least its smallest ratio taken inside the submatrix.
fn component_lower(m: &ChoiceMatrix, v: &[f64], components: &[Vec<usize>], member: &[u32]) -> f64 {
    let mut best = 0.0f64;
    for (ci, comp) in components.iter().enumerate() {
        if comp.iter().any(|&i| v[i] <= 0.0) {
            continue;
        }
        let lo = comp
            .iter()
            .map(|&i| {
                let inside: f64 = m
                    .row(i)
                    .iter()
                    .filter(|&&(c, _)| member[c as usize] == ci as u32)
                    .map(|&(c, n)| f64::from(n) * v[c as usize])
                    .sum();
                inside / v[i]
            })
            .fold(f64::INFINITY, f64::min);
        best = best.max(lo);
    }
    best
}

/// Power iteration with max-normalization, from `start` or the all-ones
/// vector. Stops once the bracket is narrower than `tol`.
pub fn power_iterate(
    m: &ChoiceMatrix,
    params: PowerParams,
    start: Option<&[f64]>,
) -> SpectralResult {
    let n = m.dim();
    let components = m.cyclic_components();
    let mut member = vec![u32::MAX; n];
    for (ci, comp) in components.iter().enumerate() {
        for &i in comp {
            member[i] = ci as u32;
        }
    }
    let mut v: Vec<f64> = match start {
        Some(s) => {
            let top = s.iter().copied().fold(0.0, f64::max);
            s.iter()
                .map(|&x| if top > 0.0 { x / top + 1e-9 } else { 1.0 })
                .collect()
        }
        None => vec![1.0; n],
    };
    let mut mv = vec![0.0; n];
    let mut iterations = 0;
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut converged = false;
    while iterations < params.max_iter {
        m.multiply(&v, &mut mv);
        iterations += 1;
        hi = upper_ratio(&v, &mv);
        lo = component_lower(m, &v, &components, &member).min(hi);
        if hi - lo < params.tol {
            converged = true;
            break;
        }
        let top = mv.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            // Nilpotent: every path dies out.
            converged = true;
            hi = 0.0;
            lo = 0.0;
            break;
        }
        for (x, &y) in v.iter_mut().zip(&mv) {
            *x = y / top;
        }
    }
    SpectralResult {
        vector: v,
        lambda_lo: lo,
        lambda_hi: hi,
        iterations,
        converged,
    }
}

/// Result of the reselection loop.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub best: SpectralResult,
    pub choice: Choice,
    /// Certified bound of each round, in order.
    pub history: Vec<f64>,
    pub fixed_point: bool,
}

/// Alternates power iteration and reselection for up to `rounds` rounds,
/// stopping early when the choice no longer changes. Keeps the smallest
/// certified bound seen.
pub fn optimize(g: &StateGraph, params: PowerParams, rounds: usize) -> Optimized {
    let mut choice = first_choice(g);
    let mut result = power_iterate(&ChoiceMatrix::from_choice(&choice), params, None);
    let mut history = vec![result.lambda_hi];
    let mut best = (result.clone(), choice.clone());
    let mut fixed_point = false;
    for _ in 1..rounds.max(1) {
        let next = reselect(g, &result.vector);
        if next == choice {
            fixed_point = true;
            break;
        }
        choice = next;
        result = power_iterate(
            &ChoiceMatrix::from_choice(&choice),
            params,
            Some(&result.vector),
        );
        history.push(result.lambda_hi);
        if result.lambda_hi < best.0.lambda_hi {
            best = (result.clone(), choice.clone());
        }
    }
    if !fixed_point && reselect(g, &result.vector) == choice {
        fixed_point = true;
    }
    Optimized {
        best: best.0,
        choice: best.1,
        history,
        fixed_point,
    }
}

/// Number of length-`n` move sequences from `root` under `choice`.
pub fn unroll(choice: &Choice, root: StateId, n: usize) -> u128 {
    let mut mass = vec![0u128; choice.len()];
    mass[root as usize] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; choice.len()];
        for (s, &x) in mass.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for c in choice.0[s].iter().flatten() {
                next[*c as usize] += x;
            }
        }
        mass = next;
    }
    mass.iter().sum()
}
