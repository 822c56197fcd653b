use crate::geo::PlanarPoint;

/// Buffer applied to components that span fewer than three non-collinear locations.
pub const DEGENERATE_BUFFER_M: f64 = 10.0;
const ARC_SEGMENTS: usize = 16;

/// Convex hull as an open counter-clockwise ring.
///
/// Point-like and segment-like inputs are buffered by
/// [`DEGENERATE_BUFFER_M`] so the result is always a proper polygon.
pub fn hull_polygon(points: &[PlanarPoint]) -> Vec<PlanarPoint> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => Vec::new(),
        1 => circle(hull[0], DEGENERATE_BUFFER_M),
        2 => capsule(hull[0], hull[1], DEGENERATE_BUFFER_M),
        _ => hull,
    }
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[PlanarPoint]) -> Vec<PlanarPoint> {
    let mut pts: Vec<PlanarPoint> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross =
        |o: &PlanarPoint, a: &PlanarPoint, b: &PlanarPoint| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<PlanarPoint> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<PlanarPoint> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn circle(c: PlanarPoint, r: f64) -> Vec<PlanarPoint> {
    (0..ARC_SEGMENTS)
        .map(|k| {
            let t = k as f64 * std::f64::consts::TAU / ARC_SEGMENTS as f64;
            PlanarPoint::new(c.x + r * t.cos(), c.y + r * t.sin())
        })
        .collect()
}

fn capsule(a: PlanarPoint, b: PlanarPoint, r: f64) -> Vec<PlanarPoint> {
    let heading = (b.y - a.y).atan2(b.x - a.x);
    let half = ARC_SEGMENTS / 2;
    let arc = |c: PlanarPoint, from: f64| {
        (0..=half).map(move |k| {
            let t = from + k as f64 * std::f64::consts::PI / half as f64;
            PlanarPoint::new(c.x + r * t.cos(), c.y + r * t.sin())
        })
    };
    // Cap around b from heading-90° to heading+90°, then around a.
    let mut ring: Vec<PlanarPoint> = arc(b, heading - std::f64::consts::FRAC_PI_2).collect();
    ring.extend(arc(a, heading + std::f64::consts::FRAC_PI_2));
    ring
}

/// Whether `p` lies inside or on the boundary (within `tol` meters) of a
/// convex counter-clockwise ring.
pub fn contains(ring: &[PlanarPoint], p: &PlanarPoint, tol: f64) -> bool {
    if ring.len() < 3 {
        return false;
    }
    (0..ring.len()).all(|k| {
        let a = ring[k];
        let b = ring[(k + 1) % ring.len()];
        let len = a.dist(&b);
        if len == 0.0 {
            return true;
        }
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross / len >= -tol
    })
}

/// Shoelace area of a ring (positive when counter-clockwise).
pub fn signed_area(ring: &[PlanarPoint]) -> f64 {
    (0..ring.len())
        .map(|k| {
            let a = ring[k];
            let b = ring[(k + 1) % ring.len()];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}
