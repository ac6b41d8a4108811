//! Convex hulls and outer common tangents for footprint geometry.
//!
//! Coordinates follow the image convention used across the crate: `x` is the
//! column, `y` the row, and the anterior axis points along +y.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("hulls overlap or touch; common tangents need disjoint hulls")]
    OverlappingHulls,
    #[error("hull needs at least one point")]
    EmptyHull,
}

pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain convex hull. Returns the hull counterclockwise (in the
/// x-right, y-up sense of the coordinate values) with collinear points
/// dropped. One or two distinct input points return themselves.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }

    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    // Lower chain.
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // Upper chain.
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    // Fully collinear input collapses to the two extremes.
    if hull.len() == 2 && hull[0].x == hull[1].x && hull[0].y == hull[1].y {
        hull.pop();
    }
    hull
}

fn project(points: &[Point], axis: (f64, f64)) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let v = p.x * axis.0 + p.y * axis.1;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Separating-axis test over both polygons' edge normals and directions;
/// touching counts as overlap. Works for degenerate (point or segment) hulls.
pub fn hulls_overlap(a: &[Point], b: &[Point]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let mut axes: Vec<(f64, f64)> = Vec::new();
    for poly in [a, b] {
        let n = poly.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let len = (dx * dx + dy * dy).sqrt();
            if len > 0.0 {
                axes.push((-dy / len, dx / len));
                axes.push((dx / len, dy / len));
            }
        }
    }
    if axes.is_empty() {
        // Two single points.
        return a[0].x == b[0].x && a[0].y == b[0].y;
    }
    for axis in axes {
        let (alo, ahi) = project(a, axis);
        let (blo, bhi) = project(b, axis);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}

/// A line's angle relative to the anterior axis (+y), in degrees, normalized
/// to (-90, 90].
pub fn line_angle_deg(from: Point, to: Point) -> f64 {
    let (mut dx, mut dy) = (to.x - from.x, to.y - from.y);
    if dy < 0.0 || (dy == 0.0 && dx < 0.0) {
        dx = -dx;
        dy = -dy;
    }
    dx.atan2(dy).to_degrees()
}

/// The two outer common tangents of two disjoint convex hulls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonTangents {
    /// Tangent on the +x side of the line joining the hull centroids
    /// (the medial side under the left-foot convention).
    pub medial_deg: f64,
    /// Tangent on the -x side.
    pub lateral_deg: f64,
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Finds the outer common tangents by building the hull of the union: the
/// two edges that bridge from one input hull to the other are exactly the
/// outer tangents.
pub fn common_tangents(
    rear_hull: &[Point],
    fore_hull: &[Point],
) -> Result<CommonTangents, GeometryError> {
    if rear_hull.is_empty() || fore_hull.is_empty() {
        return Err(GeometryError::EmptyHull);
    }
    if hulls_overlap(rear_hull, fore_hull) {
        return Err(GeometryError::OverlappingHulls);
    }

    let mut tagged: Vec<(Point, bool)> = Vec::with_capacity(rear_hull.len() + fore_hull.len());
    tagged.extend(rear_hull.iter().map(|&p| (p, false)));
    tagged.extend(fore_hull.iter().map(|&p| (p, true)));
    let union: Vec<Point> = tagged.iter().map(|&(p, _)| p).collect();
    let merged = convex_hull(&union);

    let tag_of = |p: Point| -> bool {
        tagged
            .iter()
            .find(|&&(q, _)| q.x == p.x && q.y == p.y)
            .map(|&(_, t)| t)
            .expect("merged hull vertex comes from an input hull")
    };

    let mut bridges: Vec<(Point, Point)> = Vec::new();
    let n = merged.len();
    if n == 1 {
        return Err(GeometryError::EmptyHull);
    }
    if n == 2 {
        // Both hulls degenerate to points (or collinear segments): the single
        // connecting line is the tangent on both sides.
        let angle = line_angle_deg(merged[0], merged[1]);
        return Ok(CommonTangents { medial_deg: angle, lateral_deg: angle });
    }
    for i in 0..n {
        let a = merged[i];
        let b = merged[(i + 1) % n];
        if tag_of(a) != tag_of(b) {
            bridges.push((a, b));
        }
    }
    // Disjoint convex hulls always leave exactly two bridge edges.
    debug_assert_eq!(bridges.len(), 2, "disjoint hulls must yield two bridges");
    if bridges.len() != 2 {
        return Err(GeometryError::OverlappingHulls);
    }

    let rear_centroid = centroid(rear_hull);
    let fore_centroid = centroid(fore_hull);
    let axis = Point::new(fore_centroid.x - rear_centroid.x, fore_centroid.y - rear_centroid.y);
    let side_of = |(a, b): (Point, Point)| {
        let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        axis.x * (mid.y - rear_centroid.y) - axis.y * (mid.x - rear_centroid.x)
    };
    let (s0, s1) = (side_of(bridges[0]), side_of(bridges[1]));
    let (medial, lateral) = if s0 < s1 {
        (bridges[0], bridges[1])
    } else {
        (bridges[1], bridges[0])
    };
    Ok(CommonTangents {
        medial_deg: line_angle_deg(medial.0, medial.1),
        lateral_deg: line_angle_deg(lateral.0, lateral.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn triangle_is_its_own_hull() {
        let hull = convex_hull(&pts(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)]));
        assert_eq!(hull.len(), 3);
    }

    #[test]
    fn square_with_interior_points_keeps_corners() {
        let hull = convex_hull(&pts(&[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 4.0),
            (0.0, 4.0),
            (2.0, 2.0),
            (1.0, 3.0),
            (2.0, 0.0), // collinear edge point, dropped
        ]));
        assert_eq!(hull.len(), 4);
        for corner in pts(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]) {
            assert!(hull.iter().any(|p| *p == corner));
        }
    }

    #[test]
    fn collinear_points_collapse_to_extremes() {
        let hull = convex_hull(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]));
        assert_eq!(hull, pts(&[(0.0, 0.0), (3.0, 3.0)]));
    }

    #[test]
    fn hull_is_counterclockwise() {
        let hull = convex_hull(&pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]));
        let n = hull.len();
        for i in 0..n {
            let turn = cross(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]);
            assert!(turn > 0.0, "expected strict left turns, got {turn}");
        }
    }

    #[test]
    fn anterior_offset_squares_have_zero_angle_tangents() {
        let rear = convex_hull(&pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]));
        let fore = convex_hull(&pts(&[(0.0, 6.0), (2.0, 6.0), (2.0, 8.0), (0.0, 8.0)]));
        let t = common_tangents(&rear, &fore).unwrap();
        assert!(t.medial_deg.abs() < 1e-9);
        assert!(t.lateral_deg.abs() < 1e-9);
    }

    #[test]
    fn rotated_squares_report_the_rotation() {
        let theta = 15f64.to_radians();
        let rot = |p: Point| {
            Point::new(
                p.x * theta.cos() + p.y * theta.sin(),
                -p.x * theta.sin() + p.y * theta.cos(),
            )
        };
        // Rotating points by R(-theta) turns the measured line angle by +theta.
        let rear: Vec<Point> = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)])
            .into_iter()
            .map(rot)
            .collect();
        let fore: Vec<Point> = pts(&[(0.0, 6.0), (2.0, 6.0), (2.0, 8.0), (0.0, 8.0)])
            .into_iter()
            .map(rot)
            .collect();
        let t = common_tangents(&convex_hull(&rear), &convex_hull(&fore)).unwrap();
        assert!((t.medial_deg - 15.0).abs() < 0.5, "medial {}", t.medial_deg);
        assert!((t.lateral_deg - 15.0).abs() < 0.5, "lateral {}", t.lateral_deg);
    }

    #[test]
    fn overlapping_hulls_are_rejected() {
        let a = convex_hull(&pts(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]));
        let b = convex_hull(&pts(&[(2.0, 2.0), (6.0, 2.0), (6.0, 6.0), (2.0, 6.0)]));
        assert_eq!(common_tangents(&a, &b), Err(GeometryError::OverlappingHulls));
    }

    #[test]
    fn medial_lateral_classification_uses_the_centroid_axis() {
        // A smaller fore hull makes the tangents pinch inward: the +x-side
        // (medial) tangent leans toward -x and the -x-side one toward +x.
        let rear = convex_hull(&pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]));
        let fore = convex_hull(&pts(&[(0.5, 6.0), (1.5, 6.0), (1.5, 7.0), (0.5, 7.0)]));
        let t = common_tangents(&rear, &fore).unwrap();
        assert!(t.medial_deg < 0.0, "medial {}", t.medial_deg);
        assert!(t.lateral_deg > 0.0, "lateral {}", t.lateral_deg);
        assert!((t.medial_deg + t.lateral_deg).abs() < 1e-9, "symmetric pinch");
    }

    #[test]
    fn single_point_hulls_share_one_tangent_line() {
        let t = common_tangents(&pts(&[(1.0, 1.0)]), &pts(&[(1.0, 5.0)])).unwrap();
        assert_eq!(t.medial_deg, 0.0);
        assert_eq!(t.lateral_deg, 0.0);
    }
}
