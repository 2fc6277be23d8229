use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid header must be `width height resolution origin_x origin_y`")]
    BadHeader,
    #[error("grid has {found} rows, header says {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} cells, header says {expected}")]
    RowWidth { row: usize, expected: usize, found: usize },
    #[error("row {row}: unexpected character `{ch}` (use `#` or `.`)")]
    BadCell { row: usize, ch: char },
}

/// Occupancy grid with a cached Euclidean clearance map.
///
/// Cell `(ix, iy)` covers `[origin + i·res, origin + (i+1)·res)` on each
/// axis; `iy = 0` is the bottom row. The clearance of a cell is the distance
/// from its center to the nearest occupied cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point,
    occupied: Vec<bool>,
    clearance: Vec<f64>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point) -> Self {
        let mut g = Self {
            width,
            height,
            resolution,
            origin,
            occupied: vec![false; width * height],
            clearance: vec![],
        };
        g.refresh_clearance();
        g
    }

    /// Parses the plain-text grid format. Rows are listed top (highest y)
    /// to bottom.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or(GridError::BadHeader)?.split_whitespace().collect();
        if header.len() != 5 {
            return Err(GridError::BadHeader);
        }
        let width: usize = header[0].parse().map_err(|_| GridError::BadHeader)?;
        let height: usize = header[1].parse().map_err(|_| GridError::BadHeader)?;
        let nums: Vec<f64> = header[2..]
            .iter()
            .map(|s| s.parse().map_err(|_| GridError::BadHeader))
            .collect::<Result<_, _>>()?;
        if nums[0] <= 0.0 {
            return Err(GridError::BadHeader);
        }
        let rows: Vec<&str> = lines.map(str::trim_end).collect();
        if rows.len() != height {
            return Err(GridError::RowCount {
                expected: height,
                found: rows.len(),
            });
        }
        let mut occupied = vec![false; width * height];
        for (r, row) in rows.iter().enumerate() {
            let n = row.chars().count();
            if n != width {
                return Err(GridError::RowWidth {
                    row: r + 1,
                    expected: width,
                    found: n,
                });
            }
            let iy = height - 1 - r;
            for (ix, ch) in row.chars().enumerate() {
                occupied[iy * width + ix] = match ch {
                    '#' => true,
                    '.' => false,
                    ch => return Err(GridError::BadCell { row: r + 1, ch }),
                };
            }
        }
        let mut g = Self {
            width,
            height,
            resolution: nums[0],
            origin: Point::new(nums[1], nums[2]),
            occupied,
            clearance: vec![],
        };
        g.refresh_clearance();
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {} {} {} {}\n",
            self.width, self.height, self.resolution, self.origin.x, self.origin.y
        );
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                s.push(if self.occupied[iy * self.width + ix] { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let ix = ((p.x - self.origin.x) / self.resolution).floor() as i64;
        let iy = ((p.y - self.origin.y) / self.resolution).floor() as i64;
        self.in_bounds(ix, iy).then_some((ix as usize, iy as usize))
    }

    pub fn center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupied[iy * self.width + ix]
    }

    /// Occupancy at a world point; outside the map counts as occupied.
    pub fn occupied_at(&self, p: Point) -> bool {
        self.cell_of(p).is_none_or(|(ix, iy)| self.is_occupied(ix, iy))
    }

    pub fn clearance(&self, ix: usize, iy: usize) -> f64 {
        self.clearance[iy * self.width + ix]
    }

    /// Clearance of the cell containing `p`; 0 outside the map.
    pub fn clearance_at(&self, p: Point) -> f64 {
        self.cell_of(p).map_or(0.0, |(ix, iy)| self.clearance(ix, iy))
    }

    /// Marks cells occupied without refreshing the clearance map.
    pub fn set_occupied_raw(&mut self, ix: usize, iy: usize, occ: bool) {
        self.occupied[iy * self.width + ix] = occ;
    }

    pub fn set_occupied(&mut self, ix: usize, iy: usize, occ: bool) {
        self.set_occupied_raw(ix, iy, occ);
        self.refresh_clearance();
    }

    /// Marks every cell whose center lies within `radius` of `center`.
    /// Returns the number of newly occupied cells.
    pub fn fill_disc(&mut self, center: Point, radius: f64) -> usize {
        let res = self.resolution;
        let lo_x = ((center.x - radius - self.origin.x) / res).floor() as i64;
        let hi_x = ((center.x + radius - self.origin.x) / res).ceil() as i64;
        let lo_y = ((center.y - radius - self.origin.y) / res).floor() as i64;
        let hi_y = ((center.y + radius - self.origin.y) / res).ceil() as i64;
        let mut n = 0;
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                if !self.in_bounds(ix, iy) {
                    continue;
                }
                let (ux, uy) = (ix as usize, iy as usize);
                if self.center(ux, uy).dist(center) <= radius && !self.is_occupied(ux, uy) {
                    self.set_occupied_raw(ux, uy, true);
                    n += 1;
                }
            }
        }
        if n > 0 {
            self.refresh_clearance();
        }
        n
    }

    pub fn fill_rect(&mut self, min: Point, max: Point) {
        for iy in 0..self.height {
            for ix in 0..self.width {
                let c = self.center(ix, iy);
                if c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y {
                    self.set_occupied_raw(ix, iy, true);
                }
            }
        }
        self.refresh_clearance();
    }

    /// Recomputes the clearance map with an exact two-pass Euclidean
    /// distance transform.
    pub fn refresh_clearance(&mut self) {
        let (w, h) = (self.width, self.height);
        const INF: f64 = 1e20;
        let mut d2 = vec![INF; w * h];
        for (i, &occ) in self.occupied.iter().enumerate() {
            if occ {
                d2[i] = 0.0;
            }
        }
        let mut f = vec![0.0; w.max(h)];
        let mut out = vec![0.0; w.max(h)];
        for ix in 0..w {
            for iy in 0..h {
                f[iy] = d2[iy * w + ix];
            }
            edt_1d(&f[..h], &mut out[..h]);
            for iy in 0..h {
                d2[iy * w + ix] = out[iy];
            }
        }
        for iy in 0..h {
            f[..w].copy_from_slice(&d2[iy * w..iy * w + w]);
            edt_1d(&f[..w], &mut out[..w]);
            d2[iy * w..iy * w + w].copy_from_slice(&out[..w]);
        }
        let res = self.resolution;
        self.clearance = d2
            .into_iter()
            .map(|v| if v >= INF / 2.0 { f64::INFINITY } else { v.sqrt() * res })
            .collect();
    }
}

/// Squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let finite = |x: f64| x < 1e19;
    // skip leading cells with infinite value
    let Some(first) = (0..n).find(|&q| finite(f[q])) else {
        d.iter_mut().for_each(|x| *x = 1e20);
        return;
    };
    v[0] = first;
    for q in first + 1..n {
        if !finite(f[q]) {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_print() {
        let text = "4 3 0.5 -1 -1\n#...\n....\n..##\n";
        let g = OccupancyGrid::parse(text).unwrap();
        assert!(g.is_occupied(0, 2));
        assert!(g.is_occupied(2, 0) && g.is_occupied(3, 0));
        assert!(!g.is_occupied(0, 0));
        assert_eq!(g.to_text(), text);
        assert_eq!(g.cell_of(Point::new(-0.9, -0.9)), Some((0, 0)));
        assert_eq!(g.cell_of(Point::new(-1.1, 0.0)), None);
        assert_eq!(g.center(1, 1), Point::new(-0.25, -0.25));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(OccupancyGrid::parse("3 1 0.1\n...").unwrap_err(), GridError::BadHeader);
        assert!(matches!(
            OccupancyGrid::parse("3 2 0.1 0 0\n...").unwrap_err(),
            GridError::RowCount { .. }
        ));
        assert!(matches!(
            OccupancyGrid::parse("3 1 0.1 0 0\n..").unwrap_err(),
            GridError::RowWidth { .. }
        ));
        assert!(matches!(
            OccupancyGrid::parse("3 1 0.1 0 0\n.x.").unwrap_err(),
            GridError::BadCell { ch: 'x', .. }
        ));
    }

    fn brute_clearance(g: &OccupancyGrid, ix: usize, iy: usize) -> f64 {
        let mut best = f64::INFINITY;
        for y in 0..g.height() {
            for x in 0..g.width() {
                if g.is_occupied(x, y) {
                    best = best.min(g.center(ix, iy).dist(g.center(x, y)));
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn edt_matches_brute_force(cells in proptest::collection::vec((0usize..12, 0usize..9), 0..10)) {
            let mut g = OccupancyGrid::new(12, 9, 0.1, Point::new(0.0, 0.0));
            for (x, y) in cells {
                g.set_occupied_raw(x, y, true);
            }
            g.refresh_clearance();
            for iy in 0..9 {
                for ix in 0..12 {
                    let b = brute_clearance(&g, ix, iy);
                    let c = g.clearance(ix, iy);
                    prop_assert!((b.is_infinite() && c.is_infinite()) || (b - c).abs() < 1e-9, "{ix},{iy}: {b} vs {c}");
                }
            }
        }
    }

    #[test]
    fn disc_fill() {
        let mut g = OccupancyGrid::new(20, 20, 0.1, Point::new(0.0, 0.0));
        let n = g.fill_disc(Point::new(1.0, 1.0), 0.3);
        assert!(n > 20);
        assert!(g.occupied_at(Point::new(1.0, 1.0)));
        assert!(!g.occupied_at(Point::new(1.5, 1.0)));
        assert_eq!(g.fill_disc(Point::new(1.0, 1.0), 0.3), 0);
    }
}
