use super::PlanarPoint;
use crate::error::{Error, Result};

type Cell = (i64, i64);

/// Uniform-grid bucket index over a fixed set of planar points.
///
/// Occupied cells are kept sorted row-major with their point ids stored
/// contiguously, so a query visits candidates in a fixed order (float sums
/// are reproducible) and each row of cells costs one binary search.
/// Immutable once built, so it can be shared freely across worker threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<PlanarPoint>,
    cell_size: f64,
    /// Occupied cells, sorted ascending.
    keys: Vec<Cell>,
    /// Ids of cell `k` are `ids[starts[k]..starts[k + 1]]`, ascending.
    starts: Vec<usize>,
    ids: Vec<usize>,
    min_cell: Cell,
    max_cell: Cell,
}

impl SpatialIndex {
    pub fn new(points: Vec<PlanarPoint>, cell_size: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidConfig(format!("cell size {cell_size} must be > 0")));
        }
        if let Some(p) = points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidCoordinate(format!("non-finite planar point {p:?}")));
        }
        let mut order: Vec<(Cell, usize)> =
            points.iter().enumerate().map(|(i, p)| (cell_of(p, cell_size), i)).collect();
        order.sort_unstable();
        let mut keys = Vec::new();
        let mut starts = Vec::new();
        for (k, (c, _)) in order.iter().enumerate() {
            if keys.last() != Some(c) {
                keys.push(*c);
                starts.push(k);
            }
        }
        starts.push(order.len());
        let ids = order.iter().map(|(_, i)| *i).collect();
        let min_cell = keys.iter().fold((i64::MAX, i64::MAX), |m, c| (m.0.min(c.0), m.1.min(c.1)));
        let max_cell = keys.iter().fold((i64::MIN, i64::MIN), |m, c| (m.0.max(c.0), m.1.max(c.1)));
        Ok(Self { points, cell_size, keys, starts, ids, min_cell, max_cell })
    }

    /// Builds an index whose cell size is the typical point spacing,
    /// `sqrt(bounding-box area / n)`.
    pub fn with_auto_cell_size(points: Vec<PlanarPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let cell = typical_spacing(&points);
        Self::new(points, cell)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn points(&self) -> &[PlanarPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Result<&PlanarPoint> {
        self.points.get(i).ok_or(Error::IdOutOfRange { id: i, n: self.points.len() })
    }

    /// Ids of all points within planar distance `r` of point `i`, itself
    /// included, sorted ascending.
    pub fn radius_query(&self, i: usize, r: f64) -> Result<Vec<usize>> {
        let p = *self.point(i)?;
        self.within(&p, r)
    }

    /// Ids of all points within distance `r` of an arbitrary location,
    /// sorted ascending.
    pub fn within(&self, p: &PlanarPoint, r: f64) -> Result<Vec<usize>> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidRadius(r));
        }
        let r_sq = r * r;
        let mut out = Vec::new();
        self.for_each_candidate(p, r, |j| {
            if self.points[j].dist_sq(p) <= r_sq {
                out.push(j);
            }
        });
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f(j, dist_sq)` for every point within `r` of `p`, in a
    /// deterministic but unspecified order. Does not allocate.
    pub fn visit_within(&self, p: &PlanarPoint, r: f64, mut f: impl FnMut(usize, f64)) {
        let r_sq = r * r;
        self.for_each_candidate(p, r, |j| {
            let d = self.points[j].dist_sq(p);
            if d <= r_sq {
                f(j, d);
            }
        });
    }

    fn for_each_candidate(&self, p: &PlanarPoint, r: f64, mut f: impl FnMut(usize)) {
        if self.points.is_empty() {
            return;
        }
        let lo = cell_of(&PlanarPoint::new(p.x - r, p.y - r), self.cell_size);
        let hi = cell_of(&PlanarPoint::new(p.x + r, p.y + r), self.cell_size);
        let lo = (lo.0.max(self.min_cell.0), lo.1.max(self.min_cell.1));
        let hi = (hi.0.min(self.max_cell.0), hi.1.min(self.max_cell.1));
        if lo.0 > hi.0 || lo.1 > hi.1 {
            return;
        }
        if (hi.0 - lo.0 + 1) as u128 > self.keys.len() as u128 {
            // More rows than occupied cells: a linear scan is cheaper.
            for (k, c) in self.keys.iter().enumerate() {
                if (lo.0..=hi.0).contains(&c.0) && (lo.1..=hi.1).contains(&c.1) {
                    self.cell_ids(k).iter().for_each(|&j| f(j));
                }
            }
            return;
        }
        for cx in lo.0..=hi.0 {
            let mut k = self.keys.partition_point(|c| *c < (cx, lo.1));
            while k < self.keys.len() && self.keys[k].0 == cx && self.keys[k].1 <= hi.1 {
                self.cell_ids(k).iter().for_each(|&j| f(j));
                k += 1;
            }
        }
    }

    fn cell_ids(&self, k: usize) -> &[usize] {
        &self.ids[self.starts[k]..self.starts[k + 1]]
    }

    fn lookup(&self, c: Cell) -> &[usize] {
        match self.keys.binary_search(&c) {
            Ok(k) => self.cell_ids(k),
            Err(_) => &[],
        }
    }

    /// Distance from every point to its nearest other point.
    ///
    /// Coincident points report 0.
    pub fn nearest_neighbor_distances(&self) -> Result<Vec<f64>> {
        let n = self.points.len();
        if n < 2 {
            return Err(Error::InsufficientPoints { got: n, need: 2 });
        }
        let max_ring = (self.max_cell.0 - self.min_cell.0).max(self.max_cell.1 - self.min_cell.1);
        let out = (0..n)
            .map(|i| {
                let p = &self.points[i];
                let c = cell_of(p, self.cell_size);
                let mut best = f64::INFINITY;
                let mut ring = 0i64;
                loop {
                    self.visit_ring(c, ring, |j| {
                        if j != i {
                            best = best.min(self.points[j].dist_sq(p));
                        }
                    });
                    // Rings 0..=k cover every point within k cells of p.
                    let covered = ring as f64 * self.cell_size;
                    if best.is_finite() && best <= covered * covered {
                        break;
                    }
                    if ring > max_ring {
                        break;
                    }
                    ring += 1;
                }
                best.sqrt()
            })
            .collect();
        Ok(out)
    }

    fn visit_ring(&self, c: Cell, ring: i64, mut f: impl FnMut(usize)) {
        let mut visit = |cx: i64, cy: i64| self.lookup((cx, cy)).iter().for_each(|&j| f(j));
        if ring == 0 {
            visit(c.0, c.1);
            return;
        }
        for dx in -ring..=ring {
            visit(c.0 + dx, c.1 - ring);
            visit(c.0 + dx, c.1 + ring);
        }
        for dy in (-ring + 1)..ring {
            visit(c.0 - ring, c.1 + dy);
            visit(c.0 + ring, c.1 + dy);
        }
    }
}

fn cell_of(p: &PlanarPoint, cell_size: f64) -> Cell {
    ((p.x / cell_size).floor() as i64, (p.y / cell_size).floor() as i64)
}

pub(crate) fn typical_spacing(points: &[PlanarPoint]) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let n = points.len() as f64;
    let s = if w > 0.0 && h > 0.0 { (w * h / n).sqrt() } else { w.max(h) / n };
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}
