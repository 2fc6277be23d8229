use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::grid::{OccupancyGrid, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no path: {0}")]
    NoPath(String),
}

/// A polyline path with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Path {
    pub fn new(points: Vec<Point>) -> Self {
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                acc += points[i - 1].dist(*p);
            }
            cumulative.push(acc);
        }
        Self { points, cumulative }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn goal(&self) -> Point {
        *self.points.last().expect("paths are never empty")
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Point {
        if self.points.len() == 1 || s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return self.goal();
        }
        let i = self.cumulative.partition_point(|&c| c <= s).max(1);
        let seg = self.cumulative[i] - self.cumulative[i - 1];
        let t = if seg > 0.0 { (s - self.cumulative[i - 1]) / seg } else { 0.0 };
        self.points[i - 1].lerp(self.points[i], t)
    }

    /// Arc length of the point of the path closest to `p`.
    pub fn project(&self, p: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..self.points.len() {
            let (a, b) = (self.points[i - 1], self.points[i]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let d = a.lerp(b, t).dist(p);
            if d < best.0 {
                best = (d, self.cumulative[i - 1] + t * len2.sqrt());
            }
        }
        best.1
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Node {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on f, then on index for determinism
        o.f.total_cmp(&self.f).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Grid path planner keeping a clearance of at least `inflation` (meters)
/// between path cells and occupied cells.
#[derive(Debug, Clone, Copy)]
pub struct PathPlanner {
    pub inflation: f64,
    /// When set, cells near the start may have less clearance (down to the
    /// start cell's own), so a robot that is already inside the inflated
    /// zone can still leave it.
    pub start_relief: bool,
}

impl PathPlanner {
    pub fn new(inflation: f64) -> Self {
        Self {
            inflation,
            start_relief: false,
        }
    }

    pub fn with_start_relief(mut self) -> Self {
        self.start_relief = true;
        self
    }

    /// Shortest 8-connected grid path from `start` to `goal`, shortcut into
    /// a polyline by line-of-sight checks.
    pub fn plan(&self, grid: &OccupancyGrid, start: Point, goal: Point) -> Result<Path, PlanError> {
        let cells = self.grid_path(grid, start, goal)?;
        let required = self.requirement(grid, start);
        let mut pts: Vec<Point> = Vec::with_capacity(cells.len());
        pts.push(start);
        pts.extend(cells[1..cells.len() - 1].iter().map(|&(x, y)| grid.center(x, y)));
        pts.push(goal);
        Ok(Path::new(shortcut(grid, &pts, &required)))
    }

    fn requirement(&self, grid: &OccupancyGrid, start: Point) -> impl Fn(Point) -> f64 {
        let inflation = self.inflation;
        let relief = if self.start_relief {
            Some((start, grid.clearance_at(start).min(inflation), inflation + 0.3))
        } else {
            None
        };
        move |p: Point| match relief {
            Some((s, c, radius)) if p.dist(s) <= radius => c,
            _ => inflation,
        }
    }

    /// Grid cells of the optimal 8-connected path, start and goal included.
    pub fn grid_path(&self, grid: &OccupancyGrid, start: Point, goal: Point) -> Result<Vec<(usize, usize)>, PlanError> {
        let required = self.requirement(grid, start);
        let free = |ix: usize, iy: usize| {
            !grid.is_occupied(ix, iy) && grid.clearance(ix, iy) + 1e-9 >= required(grid.center(ix, iy))
        };
        let s = grid
            .cell_of(start)
            .ok_or_else(|| PlanError::NoPath(format!("start {start} outside the map")))?;
        let g = grid
            .cell_of(goal)
            .ok_or_else(|| PlanError::NoPath(format!("goal {goal} outside the map")))?;
        if !free(s.0, s.1) {
            return Err(PlanError::NoPath(format!("start {start} lacks clearance")));
        }
        if !free(g.0, g.1) {
            return Err(PlanError::NoPath(format!("goal {goal} lacks clearance")));
        }
        let w = grid.width();
        let idx = |(x, y): (usize, usize)| y * w + x;
        let n = w * grid.height();
        let mut best = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let h = |i: usize| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let (dx, dy) = ((x - g.0 as f64).abs(), (y - g.1 as f64).abs());
            dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
        };
        let mut open = BinaryHeap::new();
        let si = idx(s);
        best[si] = 0.0;
        open.push(Node { f: h(si), g: 0.0, idx: si });
        let gi = idx(g);
        while let Some(Node { g: cost, idx: i, .. }) = open.pop() {
            if closed[i] {
                continue;
            }
            closed[i] = true;
            if i == gi {
                break;
            }
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if !grid.in_bounds(nx, ny) || !free(nx as usize, ny as usize) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && (grid.is_occupied((x + dx) as usize, y as usize) || grid.is_occupied(x as usize, (y + dy) as usize)) {
                    continue;
                }
                let ni = ny as usize * w + nx as usize;
                let step = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
                let ng = cost + step;
                if ng < best[ni] - 1e-12 {
                    best[ni] = ng;
                    parent[ni] = i;
                    open.push(Node { f: ng + h(ni), g: ng, idx: ni });
                }
            }
        }
        if !closed[gi] {
            return Err(PlanError::NoPath(format!(
                "no corridor with {} m clearance from {start} to {goal}",
                self.inflation
            )));
        }
        let mut out = vec![];
        let mut i = gi;
        while i != usize::MAX {
            out.push((i % w, i / w));
            i = parent[i];
        }
        out.reverse();
        Ok(out)
    }
}

fn visible(grid: &OccupancyGrid, a: Point, b: Point, required: &impl Fn(Point) -> f64) -> bool {
    let steps = (a.dist(b) / (grid.resolution() * 0.25)).ceil().max(1.0) as usize;
    (0..=steps).all(|k| {
        let p = a.lerp(b, k as f64 / steps as f64);
        match grid.cell_of(p) {
            Some((ix, iy)) => !grid.is_occupied(ix, iy) && grid.clearance(ix, iy) + 1e-9 >= required(p),
            None => false,
        }
    })
}

/// Greedy line-of-sight shortcut: from each anchor, jump to the farthest
/// later point still visible.
fn shortcut(grid: &OccupancyGrid, pts: &[Point], required: &impl Fn(Point) -> f64) -> Vec<Point> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut out = vec![pts[0]];
    let mut i = 0;
    while i < pts.len() - 1 {
        let mut j = i + 1;
        for k in (i + 2..pts.len()).rev() {
            if visible(grid, pts[i], pts[k], required) {
                j = k;
                break;
            }
        }
        out.push(pts[j]);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BinaryHeap as Heap;

    fn walled(gap: bool) -> OccupancyGrid {
        // 5 m × 5 m, wall at x ≈ 2.5 with an optional one-cell gap at y ≈ 2.5
        let mut g = OccupancyGrid::new(50, 50, 0.1, Point::new(0.0, 0.0));
        for iy in 0..50 {
            if !(gap && iy == 25) {
                g.set_occupied_raw(25, iy, true);
            }
        }
        g.refresh_clearance();
        g
    }

    /// Uniform-cost search over free cells with octile step costs, written
    /// independently of the planner (no heuristic, no clearance shortcuts).
    fn oracle_distance(g: &OccupancyGrid, s: (usize, usize), t: (usize, usize)) -> Option<f64> {
        let w = g.width();
        let mut dist = vec![f64::INFINITY; w * g.height()];
        let mut heap = Heap::new();
        dist[s.1 * w + s.0] = 0.0;
        heap.push((std::cmp::Reverse((0.0f64 * 1e6) as i64), s));
        while let Some((std::cmp::Reverse(dk), (x, y))) = heap.pop() {
            let d = dk as f64 / 1e6;
            if d > dist[y * w + x] + 1e-9 {
                continue;
            }
            if (x, y) == t {
                return Some(d * g.resolution());
            }
            for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if !g.in_bounds(nx, ny) || g.is_occupied(nx as usize, ny as usize) {
                        continue;
                    }
                    if dx != 0 && dy != 0 && (g.is_occupied(nx as usize, y) || g.is_occupied(x, ny as usize)) {
                        continue;
                    }
                    let nd = d + if dx != 0 && dy != 0 { 2f64.sqrt() } else { 1.0 };
                    let ni = ny as usize * w + nx as usize;
                    if nd < dist[ni] - 1e-9 {
                        dist[ni] = nd;
                        heap.push((std::cmp::Reverse((nd * 1e6) as i64), (nx as usize, ny as usize)));
                    }
                }
            }
        }
        None
    }

    #[test]
    fn free_space_straight_segment() {
        let g = OccupancyGrid::new(40, 40, 0.1, Point::new(-2.0, -2.0));
        let p = PathPlanner::new(0.5).plan(&g, Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert_eq!(p.points().len(), 2);
        assert!((p.length() - 1.0).abs() <= 0.1);
    }

    #[test]
    fn narrow_gap_blocked_by_inflation() {
        // gap is one 0.1 m cell; with 0.5 m clearance every cell within 0.5 m
        // of a wall cell is excluded, and the gap cell is 0.1 m from its
        // neighbours in the wall
        let g = walled(true);
        let err = PathPlanner::new(0.5)
            .plan(&g, Point::new(1.0, 2.55), Point::new(4.0, 2.55))
            .unwrap_err();
        assert!(matches!(err, PlanError::NoPath(_)));
    }

    #[test]
    fn gap_passable_without_inflation() {
        let g = walled(true);
        let (s, t) = (Point::new(1.05, 1.05), Point::new(4.05, 4.05));
        let planner = PathPlanner::new(0.0);
        let cells = planner.grid_path(&g, s, t).unwrap();
        let grid_len: f64 = cells
            .windows(2)
            .map(|w| g.center(w[0].0, w[0].1).dist(g.center(w[1].0, w[1].1)))
            .sum();
        let oracle = oracle_distance(&g, g.cell_of(s).unwrap(), g.cell_of(t).unwrap()).unwrap();
        assert!((grid_len - oracle).abs() <= 0.1 * 2f64.sqrt() + 1e-9, "{grid_len} vs {oracle}");
        assert!(cells.contains(&(25, 25)), "path must use the gap");
        let path = planner.plan(&g, s, t).unwrap();
        assert!(path.length() <= grid_len + 1e-9);
    }

    #[test]
    fn path_keeps_clearance() {
        let mut g = OccupancyGrid::new(60, 40, 0.1, Point::new(0.0, 0.0));
        g.fill_disc(Point::new(3.0, 2.0), 0.3);
        let p = PathPlanner::new(0.65).plan(&g, Point::new(0.5, 2.0), Point::new(5.5, 2.0)).unwrap();
        let mut s = 0.0;
        while s <= p.length() {
            assert!(g.clearance_at(p.point_at(s)) >= 0.65 - 1e-9);
            s += 0.02;
        }
    }

    #[test]
    fn start_relief_escapes_inflated_zone() {
        let mut g = OccupancyGrid::new(60, 40, 0.1, Point::new(0.0, 0.0));
        g.fill_disc(Point::new(1.0, 2.0), 0.3);
        let start = Point::new(1.65, 2.05);
        assert!(PathPlanner::new(0.8).plan(&g, start, Point::new(5.0, 2.0)).is_err());
        assert!(PathPlanner::new(0.8)
            .with_start_relief()
            .plan(&g, start, Point::new(5.0, 2.0))
            .is_ok());
    }

    #[test]
    fn deterministic() {
        let mut g = OccupancyGrid::new(60, 60, 0.1, Point::new(0.0, 0.0));
        g.fill_rect(Point::new(2.0, 1.0), Point::new(3.0, 5.0));
        let a = PathPlanner::new(0.5).plan(&g, Point::new(0.5, 0.5), Point::new(5.5, 5.5)).unwrap();
        let b = PathPlanner::new(0.5).plan(&g, Point::new(0.5, 0.5), Point::new(5.5, 5.5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn path_geometry() {
        let p = Path::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 2.0)]);
        assert_eq!(p.length(), 3.0);
        assert_eq!(p.point_at(2.0), Point::new(1.0, 1.0));
        assert_eq!(p.point_at(10.0), Point::new(1.0, 2.0));
        assert!((p.project(Point::new(1.5, 1.5)) - 2.5).abs() < 1e-12);
    }
}
