//! Walk suffixes, their canonical frame, and the packed keys used to intern
//! them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{l1_distance, Direction, Point, Transform};

/// Longest walk (in steps) whose packed key fits in a `u128`.
pub const MAX_PACKED_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("a walk needs at least two vertices, got {0}")]
    TooShort(usize),
    #[error("vertices {index} and {next} are not lattice neighbours", next = index + 1)]
    NotAdjacent { index: usize },
    #[error("vertex {point} is visited twice")]
    SelfIntersecting { point: Point },
    #[error("invalid direction character {0:?}")]
    BadDirection(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("target vertex {0} is already occupied")]
    Blocked(Point),
}

/// Ordered vertices of a self-avoiding walk, from the oldest vertex `B` to
/// the newest vertex `A`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    vertices: Vec<Point>,
}

impl Walk {
    pub fn new(vertices: Vec<Point>) -> Result<Self, WalkError> {
        if vertices.len() < 2 {
            return Err(WalkError::TooShort(vertices.len()));
        }
        for (index, pair) in vertices.windows(2).enumerate() {
            if pair[0].direction_to(pair[1]).is_none() {
                return Err(WalkError::NotAdjacent { index });
            }
        }
        let mut sorted = vertices.clone();
        sorted.sort_unstable();
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(WalkError::SelfIntersecting { point: pair[0] });
        }
        Ok(Walk { vertices })
    }

    /// Builds a walk by following `dirs` from `start`.
    pub fn from_directions(start: Point, dirs: &[Direction]) -> Result<Self, WalkError> {
        let mut vertices = Vec::with_capacity(dirs.len() + 1);
        vertices.push(start);
        let mut p = start;
        for &d in dirs {
            p = p.step(d);
            vertices.push(p);
        }
        Walk::new(vertices)
    }

    /// Walk spelled as a direction string from `B`, with `B` at the origin.
    pub fn from_dir_str(s: &str) -> Result<Self, WalkError> {
        let dirs = s
            .chars()
            .map(|c| Direction::from_char(c).ok_or(WalkError::BadDirection(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Walk::from_directions(Point::ORIGIN, &dirs)
    }

    /// Straight line of `steps` Right steps ending at the origin.
    pub fn line(steps: usize) -> Self {
        let vertices = (0..=steps)
            .map(|i| Point::new(i as i16 - steps as i16, 0))
            .collect();
        Walk { vertices }
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        debug_assert!(
            Walk::new(vertices.clone()).is_ok(),
            "invalid walk {vertices:?}"
        );
        Walk { vertices }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Newest vertex.
    #[inline]
    pub fn a(&self) -> Point {
        self.vertices[self.vertices.len() - 1]
    }

    /// Oldest vertex.
    #[inline]
    pub fn b(&self) -> Point {
        self.vertices[0]
    }

    /// Direction of the step from vertex `i` to vertex `i + 1`.
    #[inline]
    pub fn dir(&self, i: usize) -> Direction {
        self.vertices[i]
            .direction_to(self.vertices[i + 1])
            .expect("consecutive walk vertices are adjacent")
    }

    pub fn directions(&self) -> Vec<Direction> {
        (0..self.steps()).map(|i| self.dir(i)).collect()
    }

    /// Direction of the final step into `A`.
    pub fn heading(&self) -> Direction {
        self.dir(self.steps() - 1)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.vertices.contains(&p)
    }

    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.vertices.iter().position(|&q| q == p)
    }

    /// Vertex count plus `L1(A, B)` minus one: the length of the shortest
    /// closed loop through every vertex and a direct return from `A` to `B`.
    pub fn size_loop(&self) -> u32 {
        self.vertices.len() as u32 + l1_distance(self.a(), self.b()) - 1
    }

    /// Appends `p` (must be adjacent to `A` and unoccupied).
    pub fn extended(&self, p: Point) -> Result<Walk, StepError> {
        if self.contains(p) {
            return Err(StepError::Blocked(p));
        }
        debug_assert!(self.a().direction_to(p).is_some());
        let mut vertices = Vec::with_capacity(self.vertices.len() + 1);
        vertices.extend_from_slice(&self.vertices);
        vertices.push(p);
        Ok(Walk { vertices })
    }

    /// Drops the oldest vertex. Returns `None` when only an edge is left.
    pub fn without_oldest(&self) -> Option<Walk> {
        (self.vertices.len() > 2).then(|| Walk {
            vertices: self.vertices[1..].to_vec(),
        })
    }

    pub fn transformed(&self, t: Transform) -> Walk {
        Walk {
            vertices: self.vertices.iter().map(|&p| t.apply(p)).collect(),
        }
    }

    pub fn translated(&self, dx: i16, dy: i16) -> Walk {
        Walk {
            vertices: self.vertices.iter().map(|p| p.offset(dx, dy)).collect(),
        }
    }

    /// Bounding box `(min, max)` of the vertices.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for p in &self.vertices[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

impl fmt::Debug for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Walk[{} from {}]", self, self.b())
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.steps() {
            write!(f, "{}", self.dir(i).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Walk {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Walk::from_dir_str(s)
    }
}

/// The three moves available from a state, relative to the heading of its
/// last step (which is Right in the canonical frame).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Up,
    Right,
    Down,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Up, Move::Right, Move::Down];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Absolute direction of this move for a walk whose last step is `heading`.
    #[inline]
    pub fn direction(self, heading: Direction) -> Direction {
        match self {
            Move::Up => heading.rotate_ccw(),
            Move::Right => heading,
            Move::Down => heading.rotate_cw(),
        }
    }

    /// Inverse of [`Move::direction`]; `None` for a backward step.
    pub fn from_direction(heading: Direction, d: Direction) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.direction(heading) == d)
    }

    pub fn mirrored(self) -> Move {
        match self {
            Move::Up => Move::Down,
            Move::Right => Move::Right,
            Move::Down => Move::Up,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Move::Up => 'U',
            Move::Right => 'R',
            Move::Down => 'D',
        }
    }
}

/// Size-loop ceiling granted to a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum AllowanceClass {
    /// size-loop <= k
    Normal = 0,
    /// size-loop <= k + 2
    Extended = 1,
    /// size-loop <= k + 4
    DoubleExtended = 2,
}

impl AllowanceClass {
    #[inline]
    pub fn limit(self, k: u32) -> u32 {
        k + 2 * self as u32
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AllowanceClass::Normal),
            1 => Some(AllowanceClass::Extended),
            2 => Some(AllowanceClass::DoubleExtended),
            _ => None,
        }
    }
}

/// Dense state identifier.
pub type StateId = u32;

/// Packed direction sequence of a canonical walk: 2 bits per step from `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    steps: u8,
    bits: u128,
}

impl StateKey {
    pub fn from_directions(dirs: impl IntoIterator<Item = Direction>) -> Self {
        let mut bits = 0u128;
        let mut steps = 0usize;
        for d in dirs {
            assert!(steps < MAX_PACKED_STEPS, "walk too long to pack");
            bits |= u128::from(d.code()) << (2 * steps);
            steps += 1;
        }
        StateKey {
            steps: steps as u8,
            bits,
        }
    }

    pub fn steps(&self) -> usize {
        usize::from(self.steps)
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        (0..self.steps()).map(|i| Direction::from_code((self.bits >> (2 * i)) as u8 & 3))
    }

    /// Rebuilds the canonical walk, with `A` at the origin.
    pub fn walk(&self) -> Walk {
        let dirs: Vec<Direction> = self.directions().collect();
        let (mut x, mut y) = (0i16, 0i16);
        for d in &dirs {
            let (dx, dy) = d.delta();
            x -= dx;
            y -= dy;
        }
        let mut vertices = Vec::with_capacity(dirs.len() + 1);
        let mut p = Point::new(x, y);
        vertices.push(p);
        for d in dirs {
            p = p.step(d);
            vertices.push(p);
        }
        Walk { vertices }
    }
}

/// Rank of a direction in the tie-break order used to pick between a walk
/// and its mirror image.
fn reflection_rank(d: Direction) -> u8 {
    match d {
        Direction::Down => 0,
        Direction::Right => 1,
        Direction::Up => 2,
        Direction::Left => 3,
    }
}

/// A walk brought to the canonical frame, together with the linear part of
/// the rigid motion that was applied. The translation is implied: `A` lands
/// on the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub walk: Walk,
    pub transform: Transform,
    pub key: StateKey,
}

/// Rotates the walk so its last step points Right, picks the mirror image
/// whose first vertical step (from `B`) is Down, and moves `A` to the origin.
pub fn canonicalize(w: &Walk) -> Canonical {
    let rotation = (5 - w.heading().code()) % 4;
    let rotated = Transform::new(rotation, false);
    let dirs: Vec<Direction> = (0..w.steps())
        .map(|i| rotated.apply_dir(w.dir(i)))
        .collect();
    let reflect = dirs
        .iter()
        .find(|d| matches!(d, Direction::Up | Direction::Down))
        .is_some_and(|&d| reflection_rank(d.reflect()) < reflection_rank(d));
    let transform = Transform::new(rotation, reflect);
    let key =
        StateKey::from_directions(dirs.iter().map(|&d| if reflect { d.reflect() } else { d }));
    Canonical {
        walk: key.walk(),
        transform,
        key,
    }
}

/// Packed key of the canonical form of `w`, without materialising the walk.
pub fn canonical_key(w: &Walk) -> StateKey {
    let rotation = (5 - w.heading().code()) % 4;
    let mut reflect = None;
    let mut bits = 0u128;
    for i in 0..w.steps() {
        let mut d = Direction::from_code(w.dir(i).code() + rotation);
        if reflect.is_none() && matches!(d, Direction::Up | Direction::Down) {
            reflect = Some(d == Direction::Up);
        }
        if reflect == Some(true) {
            d = d.reflect();
        }
        bits |= u128::from(d.code()) << (2 * i);
    }
    assert!(w.steps() <= MAX_PACKED_STEPS, "walk too long to pack");
    StateKey {
        steps: w.steps() as u8,
        bits,
    }
}

/// A canonical walk suffix together with its allowance class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub walk: Walk,
    pub allowance: AllowanceClass,
}

impl State {
    pub fn new(walk: Walk, allowance: AllowanceClass) -> Self {
        State { walk, allowance }
    }

    pub fn key(&self) -> StateKey {
        canonical_key(&self.walk)
    }

    pub fn size_loop(&self) -> u32 {
        self.walk.size_loop()
    }
}

/// Appends the vertex reached by `m` from `A`.
pub fn step(w: &Walk, m: Move) -> Result<Walk, StepError> {
    let target = w.a().step(m.direction(w.heading()));
    w.extended(target)
}

pub fn occupied(s: &State, p: Point) -> bool {
    s.walk.contains(p)
}

/// Square bit grid centred on the origin, used as an occupancy index.
#[derive(Debug, Clone)]
pub struct Occupancy {
    radius: i32,
    side: i32,
    bits: Vec<u64>,
}

impl Occupancy {
    pub fn with_radius(radius: i32) -> Self {
        let side = 2 * radius + 1;
        let cells = (side * side) as usize;
        Occupancy {
            radius,
            side,
            bits: vec![0; cells.div_ceil(64)],
        }
    }

    pub fn of_walk(w: &Walk) -> Self {
        let r = w
            .vertices()
            .iter()
            .map(|p| i32::from(p.x.abs().max(p.y.abs())))
            .max()
            .unwrap_or(0);
        let mut occ = Occupancy::with_radius(r + 2);
        for &p in w.vertices() {
            occ.insert(p);
        }
        occ
    }

    #[inline]
    fn slot(&self, p: Point) -> Option<usize> {
        let x = i32::from(p.x) + self.radius;
        let y = i32::from(p.y) + self.radius;
        (x >= 0 && y >= 0 && x < self.side && y < self.side).then(|| (x * self.side + y) as usize)
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.slot(p)
            .is_some_and(|i| self.bits[i / 64] >> (i % 64) & 1 == 1)
    }

    #[inline]
    pub fn insert(&mut self, p: Point) {
        let i = self.slot(p).expect("point outside occupancy grid");
        self.bits[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, p: Point) {
        if let Some(i) = self.slot(p) {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    fn pts(v: &[(i16, i16)]) -> Walk {
        Walk::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn walk_validation() {
        assert_eq!(Walk::new(vec![Point::ORIGIN]), Err(WalkError::TooShort(1)));
        assert!(matches!(
            Walk::new(vec![Point::new(0, 0), Point::new(2, 0)]),
            Err(WalkError::NotAdjacent { index: 0 })
        ));
        assert!(matches!(
            Walk::from_dir_str("RUL D"),
            Err(WalkError::BadDirection(' '))
        ));
        assert!(matches!(
            Walk::from_dir_str("RULD"),
            Err(WalkError::SelfIntersecting { .. })
        ));
    }

    #[test]
    fn canonicalize_vertical_line() {
        let w = pts(&[(0, 0), (0, 1), (0, 2)]);
        let c = canonicalize(&w);
        assert_eq!(c.walk.to_string(), "RR");
        assert_eq!(c.walk.a(), Point::ORIGIN);
        assert_eq!(c.walk.vertices()[1], Point::new(-1, 0));
    }

    #[test]
    fn mirror_images_share_a_canonical_form() {
        let up = Walk::from_dir_str("RU").unwrap();
        let down = Walk::from_dir_str("RD").unwrap();
        assert_eq!(canonicalize(&up).key, canonicalize(&down).key);
        assert_eq!(canonicalize(&up).walk.to_string(), "DR");
    }

    #[test]
    fn canonicalize_is_idempotent_and_matches_key() {
        for s in ["RRRRR", "RRRRRU", "DDLLUUR", "ULDLLUU", "RDRURDRU"] {
            let w = Walk::from_dir_str(s).unwrap();
            let c = canonicalize(&w);
            assert_eq!(canonical_key(&w), c.key);
            let again = canonicalize(&c.walk);
            assert_eq!(again.walk, c.walk);
            assert_eq!(again.transform, Transform::IDENTITY);
            assert_eq!(c.key.walk(), c.walk);
        }
    }

    #[test]
    fn canonical_transform_maps_walk_onto_canonical_form() {
        let w = Walk::from_dir_str("ULDLLUU").unwrap();
        let c = canonicalize(&w);
        let moved = w.transformed(c.transform);
        let a = moved.a();
        assert_eq!(moved.translated(-a.x, -a.y), c.walk);
    }

    #[test]
    fn size_loop_examples() {
        assert_eq!(Walk::from_dir_str("R").unwrap().size_loop(), 2);
        assert_eq!(Walk::from_dir_str("RRRRR").unwrap().size_loop(), 10);
        let state2 = Walk::from_dir_str("RRRRRU").unwrap();
        assert_eq!(state2.len(), 7);
        assert_eq!(state2.a(), Point::new(5, 1));
        assert_eq!(state2.size_loop(), 12);
    }

    #[test]
    fn stepping_from_the_single_edge() {
        let edge = Walk::from_dir_str("R").unwrap();
        let right = step(&edge, Move::Right).unwrap();
        assert_eq!(right.to_string(), "RR");
        let up = step(&edge, Move::Up).unwrap();
        assert_eq!(up.to_string(), "RU");
        let state2 = canonicalize(&Walk::from_dir_str("UR").unwrap());
        assert_eq!(canonicalize(&up).key, state2.key);
    }

    #[test]
    fn blocked_step() {
        let u = Walk::from_dir_str("LUR").unwrap();
        assert!(matches!(step(&u, Move::Down), Err(StepError::Blocked(_))));
    }

    #[test]
    fn occupancy_queries() {
        let s = State::new(Walk::line(1), AllowanceClass::Normal);
        assert!(occupied(&s, s.walk.a()));
        assert!(!occupied(&s, s.walk.a().offset(0, 2)));
        let small_loop_s1 = pts(&[
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
        let s1 = State::new(small_loop_s1.clone(), AllowanceClass::Normal);
        assert!(!occupied(&s1, Point::new(1, -3)));
        let occ = Occupancy::of_walk(&small_loop_s1);
        for &p in small_loop_s1.vertices() {
            assert!(occ.contains(p));
        }
        assert!(!occ.contains(Point::new(1, -3)));
        assert!(!occ.contains(Point::new(100, 100)));
    }

    #[test]
    fn key_roundtrip() {
        let dirs = [Down, Right, Up, Right, Right, Down];
        let key = StateKey::from_directions(dirs);
        assert_eq!(key.directions().collect::<Vec<_>>(), dirs);
        assert_eq!(key.walk().a(), Point::ORIGIN);
    }
}
