//! Integer lattice primitives on the square lattice.
//!
//! Coordinates use the usual convention of `y` increasing upward, so a
//! "right turn" is a clockwise turn.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("walk cannot reverse from {incoming:?} to {outgoing:?}")]
    Backtrack {
        incoming: Direction,
        outgoing: Direction,
    },
}

/// A vertex of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point {
    pub x: i16,
    pub y: i16,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i16, y: i16) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn step(self, d: Direction) -> Point {
        let (dx, dy) = d.delta();
        Point::new(self.x + dx, self.y + dy)
    }

    #[inline]
    pub fn offset(self, dx: i16, dy: i16) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors(self) -> [Point; 4] {
        Direction::ALL.map(|d| self.step(d))
    }

    /// Direction of the unit step from `self` to `other`, if they are adjacent.
    pub fn direction_to(self, other: Point) -> Option<Direction> {
        match (other.x - self.x, other.y - self.y) {
            (0, 1) => Some(Direction::Up),
            (1, 0) => Some(Direction::Right),
            (0, -1) => Some(Direction::Down),
            (-1, 0) => Some(Direction::Left),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[inline]
pub fn l1_distance(p: Point, q: Point) -> u32 {
    (i32::from(p.x) - i32::from(q.x)).unsigned_abs()
        + (i32::from(p.y) - i32::from(q.y)).unsigned_abs()
}

#[inline]
pub fn linf_distance(p: Point, q: Point) -> u32 {
    let dx = (i32::from(p.x) - i32::from(q.x)).unsigned_abs();
    let dy = (i32::from(p.y) - i32::from(q.y)).unsigned_abs();
    dx.max(dy)
}

/// One of the four unit steps. The discriminants double as the 2-bit
/// codes of the packed encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Direction {
    Up = 0,
    Right = 1,
    Down = 2,
    Left = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Right,
        Direction::Down,
        Direction::Left,
    ];

    #[inline]
    pub fn delta(self) -> (i16, i16) {
        match self {
            Direction::Up => (0, 1),
            Direction::Right => (1, 0),
            Direction::Down => (0, -1),
            Direction::Left => (-1, 0),
        }
    }

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn from_code(code: u8) -> Direction {
        Direction::ALL[usize::from(code & 3)]
    }

    /// Quarter turn clockwise (a right turn).
    #[inline]
    pub fn rotate_cw(self) -> Direction {
        Direction::from_code(self.code() + 1)
    }

    /// Quarter turn counter-clockwise (a left turn).
    #[inline]
    pub fn rotate_ccw(self) -> Direction {
        Direction::from_code(self.code() + 3)
    }

    #[inline]
    pub fn reverse(self) -> Direction {
        Direction::from_code(self.code() + 2)
    }

    /// Mirror image across the horizontal axis.
    #[inline]
    pub fn reflect(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            d => d,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Direction::Up => 'U',
            Direction::Right => 'R',
            Direction::Down => 'D',
            Direction::Left => 'L',
        }
    }

    pub fn from_char(c: char) -> Option<Direction> {
        match c {
            'U' | 'u' => Some(Direction::Up),
            'R' | 'r' => Some(Direction::Right),
            'D' | 'd' => Some(Direction::Down),
            'L' | 'l' => Some(Direction::Left),
            _ => None,
        }
    }
}

/// +1 for a right (clockwise) turn, -1 for a left turn, 0 going straight.
pub fn turn_sign(incoming: Direction, outgoing: Direction) -> Result<i32, GeometryError> {
    if outgoing == incoming.reverse() {
        return Err(GeometryError::Backtrack { incoming, outgoing });
    }
    Ok(if outgoing == incoming {
        0
    } else if outgoing == incoming.rotate_cw() {
        1
    } else {
        -1
    })
}

/// Element of the symmetry group of the square lattice fixing the origin:
/// `rotation` clockwise quarter-turns followed by an optional reflection
/// `y -> -y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Transform {
    pub rotation: u8,
    pub reflect: bool,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        rotation: 0,
        reflect: false,
    };

    pub fn new(rotation: u8, reflect: bool) -> Self {
        Transform {
            rotation: rotation % 4,
            reflect,
        }
    }

    /// All eight lattice symmetries.
    pub fn all() -> impl Iterator<Item = Transform> {
        (0..8u8).map(|i| Transform::new(i % 4, i >= 4))
    }

    pub fn apply(self, p: Point) -> Point {
        let (mut x, mut y) = (p.x, p.y);
        for _ in 0..self.rotation {
            (x, y) = (y, -x);
        }
        if self.reflect {
            y = -y;
        }
        Point::new(x, y)
    }

    pub fn apply_dir(self, d: Direction) -> Direction {
        let r = Direction::from_code(d.code() + self.rotation);
        if self.reflect {
            r.reflect()
        } else {
            r
        }
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(self, other: Transform) -> Transform {
        // Moving a rotation past the reflection inverts it: R F = F R^-1.
        let rotation = if self.reflect {
            (4 + self.rotation - other.rotation % 4) % 4
        } else {
            (self.rotation + other.rotation) % 4
        };
        Transform {
            rotation,
            reflect: self.reflect ^ other.reflect,
        }
    }

    pub fn inverse(self) -> Transform {
        if self.reflect {
            // (F R^r)^-1 = R^-r F = F R^r
            self
        } else {
            Transform::new((4 - self.rotation) % 4, false)
        }
    }
}
