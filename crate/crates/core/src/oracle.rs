//! Brute-force counts used to cross-check the automaton.

use thiserror::Error;

use crate::geometry::{Direction, Point};

pub const MAX_SAW_LENGTH: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("walk length {0} outside 1..={MAX_SAW_LENGTH}")]
    Length(usize),
    #[error("loop cutoff {0} must be even and positive")]
    Cutoff(u32),
}

fn check_length(n: usize) -> Result<(), OracleError> {
    if n == 0 || n > MAX_SAW_LENGTH {
        return Err(OracleError::Length(n));
    }
    Ok(())
}

/// Square grid centred on the origin holding, per vertex, the index of its
/// latest visit.
struct Grid {
    radius: i32,
    side: usize,
    cells: Vec<u32>,
}

const UNSEEN: u32 = u32::MAX;

impl Grid {
    fn new(radius: usize) -> Self {
        let side = 2 * radius + 1;
        Grid {
            radius: radius as i32,
            side,
            cells: vec![UNSEEN; side * side],
        }
    }

    fn idx(&self, p: Point) -> usize {
        (i32::from(p.x) + self.radius) as usize * self.side
            + (i32::from(p.y) + self.radius) as usize
    }

    fn get(&self, p: Point) -> u32 {
        self.cells[self.idx(p)]
    }

    fn set(&mut self, p: Point, v: u32) -> u32 {
        let i = self.idx(p);
        std::mem::replace(&mut self.cells[i], v)
    }
}

/// Number of self-avoiding walks of `n` steps from the origin, by recursive
/// depth-first search over an occupancy grid.
pub fn count_saw(n: usize) -> Result<u64, OracleError> {
    check_length(n)?;
    fn go(grid: &mut Grid, p: Point, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        for d in Direction::ALL {
            let q = p.step(d);
            if grid.get(q) == UNSEEN {
                grid.set(q, 0);
                total += go(grid, q, left - 1);
                grid.set(q, UNSEEN);
            }
        }
        total
    }
    let mut grid = Grid::new(n + 1);
    grid.set(Point::ORIGIN, 0);
    Ok(go(&mut grid, Point::ORIGIN, n))
}

/// Same count as [`count_saw`], by an iterative search with an explicit
/// stack and a sorted vector of visited vertices.
pub fn count_saw_iterative(n: usize) -> Result<u64, OracleError> {
    check_length(n)?;
    let mut path = vec![Point::ORIGIN];
    let mut visited = vec![Point::ORIGIN];
    // Next direction to try at each depth.
    let mut next = vec![0usize];
    let mut total = 0;
    while let Some(top) = next.last_mut() {
        if path.len() == n + 1 {
            total += 1;
        }
        if path.len() == n + 1 || *top == 4 {
            next.pop();
            let p = path.pop().unwrap();
            let at = visited.binary_search(&p).unwrap();
            visited.remove(at);
            continue;
        }
        let d = Direction::ALL[*top];
        *top += 1;
        let q = path.last().unwrap().step(d);
        if let Err(at) = visited.binary_search(&q) {
            visited.insert(at, q);
            path.push(q);
            next.push(0);
        }
    }
    Ok(total)
}

/// Self-avoiding walks whose first step is Right and whose first vertical
/// step, if any, is Down.
pub fn count_canonical(n: usize) -> Result<u64, OracleError> {
    check_length(n)?;
    fn go(grid: &mut Grid, p: Point, left: usize, vertical_seen: bool) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        for d in Direction::ALL {
            if !vertical_seen && d == Direction::Up {
                continue;
            }
            let q = p.step(d);
            if grid.get(q) == UNSEEN {
                grid.set(q, 0);
                total += go(grid, q, left - 1, vertical_seen || d == Direction::Down);
                grid.set(q, UNSEEN);
            }
        }
        total
    }
    let mut grid = Grid::new(n + 1);
    grid.set(Point::ORIGIN, 0);
    let first = Point::ORIGIN.step(Direction::Right);
    grid.set(first, 0);
    Ok(go(&mut grid, first, n - 1, false))
}

/// Walks along `prefix` then `n` free steps in which any vertex revisit
/// closes a cycle of more than `k` steps.
fn count_loop_free_from(prefix: &[Point], n: usize, k: u32, canonical: bool) -> u64 {
    fn go(grid: &mut Grid, p: Point, index: u32, left: usize, k: u32, vertical_seen: bool) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut total = 0;
        for d in Direction::ALL {
            if !vertical_seen && d == Direction::Up {
                continue;
            }
            let q = p.step(d);
            let last = grid.get(q);
            if last != UNSEEN && index + 1 - last <= k {
                continue;
            }
            let saved = grid.set(q, index + 1);
            total += go(
                grid,
                q,
                index + 1,
                left - 1,
                k,
                vertical_seen || d == Direction::Down,
            );
            grid.set(q, saved);
        }
        total
    }
    let reach = prefix
        .iter()
        .map(|p| p.x.unsigned_abs().max(p.y.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0);
    let mut grid = Grid::new(reach + n + 1);
    for (i, &p) in prefix.iter().enumerate() {
        grid.set(p, i as u32);
    }
    let last = *prefix.last().unwrap();
    go(&mut grid, last, prefix.len() as u32 - 1, n, k, !canonical)
}

/// Canonical `n`-step walks (first step Right, first vertical step Down)
/// containing no closed subwalk of `k` steps or fewer.
pub fn count_loop_free(n: usize, k: u32) -> Result<u64, OracleError> {
    check_length(n)?;
    if k == 0 || k % 2 == 1 {
        return Err(OracleError::Cutoff(k));
    }
    let prefix = [Point::ORIGIN, Point::new(1, 0)];
    Ok(count_loop_free_from(&prefix, n - 1, k, true))
}

/// Walks made of a straight run of `k/2` Right steps followed by `n` free
/// steps, without closed subwalks of `k` steps or fewer.
pub fn count_loop_free_after_line(n: usize, k: u32) -> Result<u64, OracleError> {
    if n > MAX_SAW_LENGTH {
        return Err(OracleError::Length(n));
    }
    if k == 0 || k % 2 == 1 {
        return Err(OracleError::Cutoff(k));
    }
    let prefix: Vec<Point> = (0..=k as i16 / 2).map(|x| Point::new(x, 0)).collect();
    Ok(count_loop_free_from(&prefix, n, k, false))
}
