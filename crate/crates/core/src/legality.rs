//! Which of the three moves from a state are permitted: occupancy plus the
//! planar pruning rules around `A` and `B`.

use std::fmt;

use crate::geometry::{turn_sign, Point};
use crate::options::Features;
use crate::state::{Move, Walk};

/// Subset of `{Up, Right, Down}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MoveSet(u8);

impl MoveSet {
    pub const EMPTY: MoveSet = MoveSet(0);
    pub const ALL: MoveSet = MoveSet(0b111);

    pub fn of(moves: &[Move]) -> Self {
        moves.iter().fold(MoveSet::EMPTY, |s, &m| s.with(m))
    }

    #[inline]
    pub fn contains(self, m: Move) -> bool {
        self.0 >> m.index() & 1 == 1
    }

    #[inline]
    pub fn with(self, m: Move) -> Self {
        MoveSet(self.0 | 1 << m.index())
    }

    #[inline]
    pub fn without(self, m: Move) -> Self {
        MoveSet(self.0 & !(1 << m.index()))
    }

    pub fn union(self, other: MoveSet) -> Self {
        MoveSet(self.0 | other.0)
    }

    pub fn minus(self, other: MoveSet) -> Self {
        MoveSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: MoveSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Move> {
        Move::ALL.into_iter().filter(move |&m| self.contains(m))
    }
}

impl fmt::Debug for MoveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for m in self.iter() {
            write!(f, "{}", m.to_char())?;
        }
        write!(f, "}}")
    }
}

/// Algebraic number of corners along the walk from vertex `from` to vertex
/// `to`: +1 per right turn, -1 per left turn, counting only the turns made
/// at vertices strictly between the two.
pub fn corner_sum(w: &Walk, from: usize, to: usize) -> i32 {
    debug_assert!(from < to && to < w.len());
    (from + 1..to)
        .map(|i| turn_sign(w.dir(i - 1), w.dir(i)).expect("walks never reverse"))
        .sum()
}

/// Moves ruled out because the walk closes a region around `A` and the
/// move would enter it.
pub fn planar_a_exclusions(w: &Walk) -> MoveSet {
    let a = w.a();
    let last = w.len() - 1;
    let heading = w.heading();
    let up = Move::Up.direction(heading);
    let down = Move::Down.direction(heading);
    let ahead = a.step(heading);
    let mut excluded = MoveSet::EMPTY;

    if let Some(c) = w.index_of(ahead) {
        // The loop through C and A separates the two sides of A; the
        // positive (clockwise) orientation puts the interior below.
        excluded = excluded.with(if corner_sum(w, c, last) > 0 {
            Move::Down
        } else {
            Move::Up
        });
    }
    if let Some(c) = w.index_of(ahead.step(up)) {
        let sum = corner_sum(w, c, last);
        if sum > 0 {
            excluded = excluded.union(MoveSet::of(&[Move::Right, Move::Down]));
        } else if sum < 0 {
            excluded = excluded.with(Move::Up);
        }
    }
    if let Some(c) = w.index_of(ahead.step(down)) {
        let sum = corner_sum(w, c, last);
        if sum < 0 {
            excluded = excluded.union(MoveSet::of(&[Move::Right, Move::Up]));
        } else if sum > 0 {
            excluded = excluded.with(Move::Down);
        }
    }
    excluded
}

/// Flood fill from the free neighbours of `start`, avoiding the walk (and
/// `extra`), looking for a route out of the walk's bounding box.
fn escapes_from(w: &Walk, start: Point, extra: Option<Point>) -> bool {
    let (mut lo, mut hi) = w.bounds();
    if let Some(p) = extra {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    // Inflate by one: the outer ring is free and connects to infinity.
    let (x0, y0) = (i32::from(lo.x) - 1, i32::from(lo.y) - 1);
    let width = i32::from(hi.x - lo.x) + 3;
    let height = i32::from(hi.y - lo.y) + 3;
    let idx = |p: Point| ((i32::from(p.x) - x0) * height + (i32::from(p.y) - y0)) as usize;
    let on_ring = |p: Point| {
        let (x, y) = (i32::from(p.x) - x0, i32::from(p.y) - y0);
        x == 0 || y == 0 || x == width - 1 || y == height - 1
    };

    let mut blocked = vec![false; (width * height) as usize];
    for &p in w.vertices() {
        blocked[idx(p)] = true;
    }
    if let Some(p) = extra {
        blocked[idx(p)] = true;
    }
    let mut stack = Vec::with_capacity(32);
    for n in start.neighbors() {
        if !blocked[idx(n)] {
            blocked[idx(n)] = true;
            stack.push(n);
        }
    }
    while let Some(p) = stack.pop() {
        if on_ring(p) {
            return true;
        }
        for n in p.neighbors() {
            let i = idx(n);
            if !blocked[i] {
                blocked[i] = true;
                stack.push(n);
            }
        }
    }
    false
}

/// Whether an infinite path can leave `B` without touching the walk (nor
/// `candidate`, the vertex about to be added).
pub fn b_escapes(w: &Walk, candidate: Option<Point>) -> bool {
    escapes_from(w, w.b(), candidate)
}

/// Whether `A` can still reach infinity avoiding the walk.
pub fn a_escapes(w: &Walk) -> bool {
    escapes_from(w, w.a(), None)
}

/// Moves from the walk that are unoccupied and survive the enabled planar
/// rules.
pub fn allowed_moves_with(w: &Walk, features: &Features) -> MoveSet {
    let heading = w.heading();
    let a = w.a();
    let mut set = MoveSet::EMPTY;
    for m in Move::ALL {
        if !w.contains(a.step(m.direction(heading))) {
            set = set.with(m);
        }
    }
    if features.planar_a && !set.is_empty() {
        set = set.minus(planar_a_exclusions(w));
    }
    if features.planar_b {
        for m in set.iter() {
            if !b_escapes(w, Some(a.step(m.direction(heading)))) {
                set = set.without(m);
            }
        }
    }
    set
}

/// [`allowed_moves_with`] under the default (all rules on) configuration.
pub fn allowed_moves(w: &Walk) -> MoveSet {
    allowed_moves_with(w, &Features::all_on())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i16, i16)]) -> Walk {
        Walk::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    /// Walk that wraps clockwise back to the vertex right of `A`.
    fn right_neighbour_example() -> Walk {
        pts(&[
            (4, 2),
            (4, 1),
            (4, 0),
            (4, -1),
            (4, -2),
            (3, -2),
            (2, -2),
            (1, -2),
            (1, -1),
            (1, 0),
            (2, 0),
            (3, 0),
        ])
    }

    fn mirrored(w: &Walk) -> Walk {
        Walk::new(w.vertices().iter().map(|p| Point::new(p.x, -p.y)).collect()).unwrap()
    }

    #[test]
    fn corner_sums() {
        let line = Walk::line(5);
        assert_eq!(corner_sum(&line, 0, 5), 0);
        let w = right_neighbour_example();
        let c = w.index_of(Point::new(4, 0)).unwrap();
        assert_eq!(c, 2);
        assert_eq!(corner_sum(&w, c, w.len() - 1), 3);
    }

    #[test]
    fn right_neighbour_rule() {
        let w = right_neighbour_example();
        // The up-ahead diagonal is on the loop as well, which also rules
        // out the (occupied) move Right.
        assert_eq!(
            planar_a_exclusions(&w),
            MoveSet::of(&[Move::Right, Move::Down])
        );
        assert_eq!(allowed_moves(&w), MoveSet::of(&[Move::Up]));
        // The mirror image turns the other way.
        let m = mirrored(&right_neighbour_example());
        assert_eq!(
            planar_a_exclusions(&m),
            MoveSet::of(&[Move::Right, Move::Up])
        );
        assert_eq!(allowed_moves(&m), MoveSet::of(&[Move::Down]));
    }

    #[test]
    fn diagonal_rules() {
        // Clockwise wrap ending just above-right of A.
        let cw = pts(&[
            (4, 2),
            (4, 1),
            (5, 1),
            (5, 0),
            (5, -1),
            (5, -2),
            (4, -2),
            (3, -2),
            (2, -2),
            (1, -2),
            (1, -1),
            (1, 0),
            (2, 0),
            (3, 0),
        ]);
        assert_eq!(
            planar_a_exclusions(&cw),
            MoveSet::of(&[Move::Right, Move::Down])
        );
        // Counter-clockwise pocket above A.
        let ccw = pts(&[
            (6, 1),
            (5, 1),
            (4, 1),
            (4, 2),
            (3, 2),
            (2, 2),
            (1, 2),
            (1, 1),
            (1, 0),
            (1, -1),
            (2, -1),
            (2, 0),
            (3, 0),
        ]);
        assert_eq!(planar_a_exclusions(&ccw), MoveSet::of(&[Move::Up]));
        assert_eq!(
            planar_a_exclusions(&mirrored(&ccw)),
            MoveSet::of(&[Move::Down])
        );
        assert_eq!(
            planar_a_exclusions(&mirrored(&cw)),
            MoveSet::of(&[Move::Right, Move::Up])
        );
    }

    #[test]
    fn straight_line_is_unconstrained() {
        let line = Walk::line(6);
        assert_eq!(planar_a_exclusions(&line), MoveSet::EMPTY);
        assert!(b_escapes(&line, None));
        assert_eq!(allowed_moves(&line), MoveSet::ALL);
        assert_eq!(allowed_moves(&Walk::line(2)), MoveSet::ALL);
    }

    #[test]
    fn surrounded_b() {
        let w = pts(&[
            (1, 2),
            (2, 2),
            (2, 1),
            (2, 0),
            (1, 0),
            (0, 0),
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 3),
        ]);
        assert_eq!(w.b(), Point::new(1, 2));
        assert!(!b_escapes(&w, None));
    }

    #[test]
    fn small_loop_example_b_escapes() {
        let w = pts(&[
            (3, 0),
            (3, -1),
            (3, -2),
            (2, -2),
            (1, -2),
            (0, -2),
            (0, -3),
            (0, -4),
            (0, -5),
            (1, -5),
            (2, -5),
            (3, -5),
            (4, -5),
            (4, -4),
            (4, -3),
            (5, -3),
            (6, -3),
        ]);
        assert!(b_escapes(&w, None));
    }

    /// Depth-first search over walks from `B` at the origin.
    fn search(max_steps: usize, found: &mut dyn FnMut(&Walk) -> bool) -> bool {
        fn go(w: &Walk, max_steps: usize, found: &mut dyn FnMut(&Walk) -> bool) -> bool {
            if found(w) {
                return true;
            }
            if w.steps() == max_steps {
                return false;
            }
            for d in crate::geometry::Direction::ALL {
                if let Ok(next) = w.extended(w.a().step(d)) {
                    if go(&next, max_steps, found) {
                        return true;
                    }
                }
            }
            false
        }
        go(&Walk::from_dir_str("R").unwrap(), max_steps, found)
    }

    #[test]
    fn some_walk_loses_a_move_to_the_b_rule() {
        let hit = search(10, &mut |w| {
            let occupancy_only = allowed_moves_with(
                w,
                &Features {
                    planar_a: false,
                    planar_b: false,
                    ..Features::all_on()
                },
            );
            b_escapes(w, None)
                && allowed_moves_with(
                    w,
                    &Features {
                        planar_a: false,
                        ..Features::all_on()
                    },
                ) != occupancy_only
        });
        assert!(hit);
    }

    #[test]
    fn dead_end_pocket_has_no_moves() {
        let mut witness = None;
        search(12, &mut |w| {
            if allowed_moves(w).is_empty() {
                witness = Some(w.clone());
                true
            } else {
                false
            }
        });
        let w = witness.expect("a walk with an empty move set exists");
        assert!(allowed_moves(&w).is_empty());
    }
}
