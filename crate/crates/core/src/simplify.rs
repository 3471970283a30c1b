//! Shortening oversized walks.
//!
//! When a step produces a walk whose size-loop exceeds what it is allowed,
//! the walk is replaced by a list of shorter candidates. Every candidate
//! only keeps constraints the oversized walk already imposed on any
//! continuation that can still reach infinity:
//!
//! * erasing the oldest vertices keeps a subset of the vertices;
//! * a small bridge (width-1 U) collapses to a single edge, again a subset;
//! * a large bridge (width-2 U) is straightened through its mouth `×`,
//!   which is a dead end for any continuation;
//! * a straight side of a small loop is pushed one unit into the loop,
//!   whose interior can never be left once entered.

use std::collections::{HashMap, HashSet};
use std::hash::BuildHasher;

use thiserror::Error;

use crate::geometry::{l1_distance, linf_distance, turn_sign, Direction, Point};
use crate::legality::{b_escapes, corner_sum};
use crate::options::Features;
use crate::state::{canonical_key, step, AllowanceClass, Move, StateId, StateKey, StepError, Walk};

/// Recursive re-simplification never needs more than a handful of levels:
/// each level shortens the size-loop by at least 2.
pub const MAX_RESIMPLIFY_DEPTH: usize = 8;

/// Minimum index distance between the two ends of a small loop.
pub const SMALL_LOOP_MIN_GAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplifyError {
    #[error(transparent)]
    Blocked(#[from] StepError),
    #[error("erasure reduced the walk below two vertices")]
    Exhausted,
    #[error("re-simplification deeper than {MAX_RESIMPLIFY_DEPTH} levels on {0}")]
    TooDeep(String),
}

/// Membership test against the set of already discovered states.
pub trait Discovered {
    fn contains_key(&self, key: &StateKey) -> bool;
}

impl<S: BuildHasher> Discovered for HashMap<StateKey, StateId, S> {
    fn contains_key(&self, key: &StateKey) -> bool {
        HashMap::contains_key(self, key)
    }
}

impl<S: BuildHasher> Discovered for HashSet<StateKey, S> {
    fn contains_key(&self, key: &StateKey) -> bool {
        self.contains(key)
    }
}

/// The empty set of discovered states.
#[derive(Debug, Clone, Copy, Default)]
pub struct NothingDiscovered;

impl Discovered for NothingDiscovered {
    fn contains_key(&self, _: &StateKey) -> bool {
        false
    }
}

/// How a candidate was obtained from the stepped walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// The stepped walk itself, within its allowance.
    Step,
    Erasure,
    SmallBridge,
    LargeBridge,
    SmallLoop,
}

/// A replacement for a stepped walk, kept in the frame of that walk so the
/// two can be compared vertex for vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub walk: Walk,
    pub key: StateKey,
    pub origin: Origin,
}

/// Shortest number of leading steps inspected by the line test.
fn line_prefix(k: u32) -> usize {
    k.div_ceil(2) as usize
}

/// Allowance granted to walks whose start looks like a straight line: the
/// first `ceil(k/2)` steps from `B` turn at most once. The extra `+2` on top
/// applies while `A` stays at `L1` distance three or more from `B`.
pub fn line_like(w: &Walk, k: u32) -> AllowanceClass {
    let prefix = line_prefix(k).min(w.steps());
    let turns = (1..prefix).filter(|&i| w.dir(i) != w.dir(i - 1)).count();
    if turns > 1 {
        AllowanceClass::Normal
    } else if l1_distance(w.a(), w.b()) >= 3 {
        AllowanceClass::DoubleExtended
    } else {
        AllowanceClass::Extended
    }
}

/// Whether some shortest monotone lattice path from `A` to `B` avoids every
/// interior vertex of the walk.
pub fn direct_path_exists(w: &Walk) -> bool {
    let (a, b) = (w.a(), w.b());
    let sx: i16 = if b.x >= a.x { 1 } else { -1 };
    let sy: i16 = if b.y >= a.y { 1 } else { -1 };
    let nx = (b.x - a.x).unsigned_abs() as usize + 1;
    let ny = (b.y - a.y).unsigned_abs() as usize + 1;
    let interior = &w.vertices()[1..w.len() - 1];
    let mut reach = vec![false; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let p = Point::new(a.x + sx * i as i16, a.y + sy * j as i16);
            if interior.contains(&p) {
                continue;
            }
            reach[i * ny + j] = (i == 0 && j == 0)
                || (i > 0 && reach[(i - 1) * ny + j])
                || (j > 0 && reach[i * ny + j - 1]);
        }
    }
    reach[nx * ny - 1]
}

/// The lacking-simplification test: nothing to simplify in the half of the
/// walk next to `B`, no small loop, and a direct return path from `A` to `B`.
pub fn lacks_simplifications_with(w: &Walk, features: &Features) -> bool {
    let half = w.len().div_ceil(2);
    if features.small_bridges && small_bridge_sites(w).into_iter().any(|i| i + 3 < half) {
        return false;
    }
    if features.large_bridges && large_bridge_sites(w).into_iter().any(|i| i + 4 < half) {
        return false;
    }
    if features.small_loops && !small_loops(w).is_empty() {
        return false;
    }
    direct_path_exists(w)
}

/// [`lacks_simplifications_with`] with every simplification family enabled.
pub fn lacks_simplifications(w: &Walk, _k: u32) -> bool {
    lacks_simplifications_with(w, &Features::all_on())
}

/// Largest allowance the walk is entitled to under `features`.
pub fn allowance(w: &Walk, k: u32, features: &Features) -> AllowanceClass {
    let mut class = AllowanceClass::Normal;
    if features.line_like {
        class = line_like(w, k);
    }
    if class == AllowanceClass::Normal
        && features.lacking_simpl
        && lacks_simplifications_with(w, features)
    {
        class = AllowanceClass::Extended;
    }
    class
}

/// Whether the walk's size-loop is within its allowance. Only evaluates the
/// allowance rules when the walk exceeds `k`.
pub fn fits(w: &Walk, k: u32, features: &Features) -> bool {
    let size = w.size_loop();
    if size <= k {
        return true;
    }
    if size > AllowanceClass::DoubleExtended.limit(k) {
        return false;
    }
    size <= allowance(w, k, features).limit(k)
}

/// Drops oldest vertices one at a time until the size-loop is at most
/// `limit`, stopping early at the first intermediate walk that is already a
/// discovered state.
pub fn erase_oldest(
    w: &Walk,
    limit: u32,
    discovered: &dyn Discovered,
) -> Result<Walk, SimplifyError> {
    let mut current = w.clone();
    loop {
        if current.size_loop() <= limit {
            return Ok(current);
        }
        current = current.without_oldest().ok_or(SimplifyError::Exhausted)?;
        if discovered.contains_key(&canonical_key(&current)) {
            return Ok(current);
        }
    }
}

/// Start indices `i` of width-1 U-turns `i, i+1, i+2, i+3`.
pub fn small_bridge_sites(w: &Walk) -> Vec<usize> {
    (0..w.len().saturating_sub(3))
        .filter(|&i| {
            let (d0, d1, d2) = (w.dir(i), w.dir(i + 1), w.dir(i + 2));
            d1 != d0 && d1 != d0.reverse() && d2 == d0.reverse()
        })
        .collect()
}

/// One candidate per small bridge, with its two middle vertices removed.
pub fn small_bridges(w: &Walk) -> Vec<Walk> {
    small_bridge_sites(w)
        .into_iter()
        .map(|i| {
            let v = w.vertices();
            let mut out = Vec::with_capacity(v.len() - 2);
            out.extend_from_slice(&v[..=i]);
            out.extend_from_slice(&v[i + 3..]);
            Walk::from_vertices_unchecked(out)
        })
        .collect()
}

/// Start indices `i` of width-2 U-turns `i..=i+4` whose ends are neither
/// `B` nor `A` and whose mouth is unoccupied.
pub fn large_bridge_sites(w: &Walk) -> Vec<usize> {
    let n = w.len();
    if n < 7 {
        return Vec::new();
    }
    (1..n - 5)
        .filter(|&i| {
            let (d0, d1) = (w.dir(i), w.dir(i + 1));
            d1 != d0
                && d1 != d0.reverse()
                && w.dir(i + 2) == d1
                && w.dir(i + 3) == d0.reverse()
                && !w.contains(w.vertices()[i].step(d1))
        })
        .collect()
}

/// One candidate per large bridge, straightened through its mouth.
pub fn large_bridges(w: &Walk) -> Vec<Walk> {
    large_bridge_sites(w)
        .into_iter()
        .map(|i| {
            let v = w.vertices();
            let mouth = v[i].step(w.dir(i + 1));
            let mut out = Vec::with_capacity(v.len() - 2);
            out.extend_from_slice(&v[..=i]);
            out.push(mouth);
            out.extend_from_slice(&v[i + 4..]);
            Walk::from_vertices_unchecked(out)
        })
        .collect()
}

/// Twice the signed area test: positive when `p` is left of `a -> b`.
fn is_left(a: Point, b: Point, p: Point) -> i64 {
    let (ax, ay) = (i64::from(a.x), i64::from(a.y));
    let (bx, by) = (i64::from(b.x), i64::from(b.y));
    let (px, py) = (i64::from(p.x), i64::from(p.y));
    (bx - ax) * (py - ay) - (px - ax) * (by - ay)
}

/// Winding number of the closed polygon `poly` (implicitly closed) around
/// `p`. Points on the boundary give an unspecified value.
pub fn winding_number(poly: &[Point], p: Point) -> i32 {
    let mut wn = 0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if a.y <= p.y {
            if b.y > p.y && is_left(a, b, p) > 0 {
                wn += 1;
            }
        } else if b.y <= p.y && is_left(a, b, p) < 0 {
            wn -= 1;
        }
    }
    wn
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    is_left(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Number of the four axis-parallel rays from `A` that meet no vertex.
pub fn free_rays_from_a(w: &Walk) -> usize {
    let a = w.a();
    let body = &w.vertices()[..w.len() - 1];
    let mut blocked = [false; 4];
    for p in body {
        if p.x == a.x {
            blocked[if p.y > a.y { 0 } else { 2 }] = true;
        } else if p.y == a.y {
            blocked[if p.x > a.x { 1 } else { 3 }] = true;
        }
    }
    blocked.iter().filter(|&&b| !b).count()
}

/// A straight side of a small loop that can be pushed into the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopSite {
    /// Index of the end of the loop nearer to `B`.
    pub lo: usize,
    /// Index of the end nearer to `A`.
    pub hi: usize,
    /// Corner vertices bounding the straight run.
    pub run: (usize, usize),
    /// Direction of the unit shift towards the loop interior.
    pub shift: Direction,
}

/// Pairs of vertices at least [`SMALL_LOOP_MIN_GAP`] apart along the walk and
/// within `L∞` distance 2 (neither being `A` at distance 2), together with
/// every straight run of three or more edges between two corners turning
/// with the loop.
pub fn small_loop_sites(w: &Walk) -> Vec<LoopSite> {
    let n = w.len();
    let mut sites = Vec::new();
    if n <= SMALL_LOOP_MIN_GAP || free_rays_from_a(w) < 2 {
        return sites;
    }
    let v = w.vertices();
    let turns: Vec<i32> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0
            } else {
                turn_sign(w.dir(i - 1), w.dir(i)).expect("walks never reverse")
            }
        })
        .collect();
    for lo in 0..n - SMALL_LOOP_MIN_GAP {
        for hi in lo + SMALL_LOOP_MIN_GAP..n {
            let dist = linf_distance(v[lo], v[hi]);
            if dist > 2 || (dist == 2 && hi == n - 1) {
                continue;
            }
            let orientation = corner_sum(w, lo, hi).signum();
            if orientation == 0 {
                continue;
            }
            let corners: Vec<usize> = (lo + 1..hi).filter(|&i| turns[i] != 0).collect();
            for pair in corners.windows(2) {
                let (i, j) = (pair[0], pair[1]);
                if j - i < 3 || turns[i] != orientation || turns[j] != orientation {
                    continue;
                }
                let run = w.dir(i);
                let shift = if orientation > 0 {
                    run.rotate_cw()
                } else {
                    run.rotate_ccw()
                };
                sites.push(LoopSite {
                    lo,
                    hi,
                    run: (i, j),
                    shift,
                });
            }
        }
    }
    sites
}

/// Applies a loop site, or `None` when the pushed side would collide with
/// the walk or leave the loop interior, or the loop would swallow `B`.
pub fn apply_loop_site(w: &Walk, site: &LoopSite) -> Option<Walk> {
    let v = w.vertices();
    let (i, j) = site.run;
    let moved: Vec<Point> = (i + 1..j).map(|t| v[t].step(site.shift)).collect();
    if moved.iter().any(|&p| w.contains(p)) {
        return None;
    }
    let poly = &v[site.lo..=site.hi];
    let (c, d) = (v[site.hi], v[site.lo]);
    if moved
        .iter()
        .any(|&p| on_segment(c, d, p) || winding_number(poly, p) == 0)
    {
        return None;
    }
    if site.lo > 0 && !on_segment(c, d, w.b()) && winding_number(poly, w.b()) != 0 {
        return None;
    }
    let mut out = Vec::with_capacity(v.len() - 2);
    out.extend_from_slice(&v[..i]);
    out.extend_from_slice(&moved);
    out.extend_from_slice(&v[j + 1..]);
    let walk = Walk::from_vertices_unchecked(out);
    b_escapes(&walk, None).then_some(walk)
}

/// One candidate per distinct pushed-in side of a small loop.
pub fn small_loops(w: &Walk) -> Vec<Walk> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for site in small_loop_sites(w) {
        if !seen.insert(site.run) {
            continue;
        }
        if let Some(walk) = apply_loop_site(w, &site) {
            out.push(walk);
        }
    }
    out
}

/// Builds candidate lists for one `(k, features, discovered)` setting.
struct Simplifier<'a> {
    k: u32,
    features: Features,
    discovered: &'a dyn Discovered,
    out: Vec<Candidate>,
    seen: HashSet<StateKey>,
}

impl Simplifier<'_> {
    fn push(&mut self, walk: Walk, key: StateKey, origin: Origin) {
        if self.seen.insert(key) {
            self.out.push(Candidate { walk, key, origin });
        }
    }

    /// Accepts the candidate if known or within its allowance, otherwise
    /// replaces it by its own simplifications.
    fn resolve(&mut self, walk: Walk, origin: Origin, depth: usize) -> Result<(), SimplifyError> {
        let key = canonical_key(&walk);
        if self.seen.contains(&key) {
            return Ok(());
        }
        if self.discovered.contains_key(&key) || fits(&walk, self.k, &self.features) {
            self.push(walk, key, origin);
            return Ok(());
        }
        self.simplify(&walk, depth + 1)
    }

    fn simplify(&mut self, w: &Walk, depth: usize) -> Result<(), SimplifyError> {
        if depth > MAX_RESIMPLIFY_DEPTH {
            return Err(SimplifyError::TooDeep(w.to_string()));
        }
        let limit = allowance(w, self.k, &self.features).limit(self.k);
        let erased = erase_oldest(w, limit, self.discovered)?;
        self.resolve(erased, Origin::Erasure, depth)?;
        if self.features.small_bridges {
            for c in small_bridges(w) {
                self.resolve(c, Origin::SmallBridge, depth)?;
            }
        }
        if self.features.large_bridges {
            for c in large_bridges(w) {
                self.resolve(c, Origin::LargeBridge, depth)?;
            }
        }
        if self.features.small_loops {
            for c in small_loops(w) {
                self.resolve(c, Origin::SmallLoop, depth)?;
            }
        }
        Ok(())
    }

    fn children_of(&mut self, w: Walk) -> Result<(), SimplifyError> {
        let key = canonical_key(&w);
        if self.discovered.contains_key(&key) || fits(&w, self.k, &self.features) {
            self.push(w, key, Origin::Step);
            Ok(())
        } else {
            self.simplify(&w, 0)
        }
    }
}

/// Candidate children of the walk `s` for the move `m`: the stepped walk
/// itself when it fits, otherwise its erasure fallback followed by the
/// bridge and loop simplifications, each re-simplified until it fits.
pub fn candidate_children(
    s: &Walk,
    m: Move,
    k: u32,
    discovered: &dyn Discovered,
    features: &Features,
) -> Result<Vec<Candidate>, SimplifyError> {
    let w = step(s, m)?;
    let mut simplifier = Simplifier {
        k,
        features: *features,
        discovered,
        out: Vec::new(),
        seen: HashSet::new(),
    };
    if features.staged_children && (features.line_like || features.lacking_simpl) {
        simplifier.features = features.without_allowances();
        simplifier.children_of(w.clone())?;
        simplifier.features = *features;
    }
    simplifier.children_of(w)?;
    Ok(simplifier.out)
}
