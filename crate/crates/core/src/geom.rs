//! Rectangles, polylines and the curve bookkeeping shared by the
//! index, brick and witness-extraction code.

use crate::cover::StripPoint;
use crate::error::{Error, Result};

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        (self.width().powi(2) + self.height().powi(2)).sqrt()
    }

    pub fn center(&self) -> StripPoint {
        StripPoint::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, p: StripPoint) -> bool {
        p.theta >= self.x0 && p.theta <= self.x1 && p.r >= self.y0 && p.r <= self.y1
    }

    pub fn contains_interior(&self, p: StripPoint, slack: f64) -> bool {
        p.theta > self.x0 + slack
            && p.theta < self.x1 - slack
            && p.r > self.y0 + slack
            && p.r < self.y1 - slack
    }

    /// Euclidean distance from a point to the (closed) rectangle.
    pub fn dist_to_point(&self, p: StripPoint) -> f64 {
        let dx = (self.x0 - p.theta).max(0.0).max(p.theta - self.x1);
        let dy = (self.y0 - p.r).max(0.0).max(p.r - self.y1);
        (dx * dx + dy * dy).sqrt()
    }

    /// Closed-set intersection test (shared edges count).
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect::new(self.x0 - by, self.x1 + by, self.y0 - by, self.y1 + by)
    }

    pub fn translated(&self, dx: f64) -> Rect {
        Rect::new(self.x0 + dx, self.x1 + dx, self.y0, self.y1)
    }

    pub fn quadrisect(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

/// What a traced or extracted curve is claimed to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Simple closed curve (stored without the repeated endpoint).
    Jordan,
    /// Properly embedded line joining the two strip ends.
    Line,
    /// Simple arc joining the two boundary circles.
    CrossingArc,
}

/// An oriented polyline in strip coordinates.
///
/// Jordan curves close up implicitly; crossing arcs run from the lower
/// to the upper boundary circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve {
    pub vertices: Vec<StripPoint>,
    pub kind: CurveKind,
}

impl PolyCurve {
    pub fn new(vertices: Vec<StripPoint>, kind: CurveKind) -> Result<Self> {
        let curve = Self { vertices, kind };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::CertificateFailure("curve with fewer than 2 vertices".into()));
        }
        match self.kind {
            CurveKind::CrossingArc => {
                let first = self.vertices.first().unwrap();
                let last = self.vertices.last().unwrap();
                if !((first.r + 1.0).abs() < 1e-9 && (last.r - 1.0).abs() < 1e-9) {
                    return Err(Error::CertificateFailure(format!(
                        "crossing arc endpoints r={}, r={} are not on opposite boundary circles",
                        first.r, last.r
                    )));
                }
                for v in &self.vertices[1..self.vertices.len() - 1] {
                    if v.r.abs() > 1.0 + 1e-12 {
                        return Err(Error::CertificateFailure("arc leaves the strip".into()));
                    }
                }
            }
            CurveKind::Jordan | CurveKind::Line => {
                for v in &self.vertices {
                    if v.r.abs() > 1.0 + 1e-12 {
                        return Err(Error::CertificateFailure("curve leaves the strip".into()));
                    }
                }
            }
        }
        if self.has_self_intersection() {
            return Err(Error::CertificateFailure("curve is not simple".into()));
        }
        Ok(())
    }

    pub fn segments(&self) -> Vec<(StripPoint, StripPoint)> {
        let mut segs: Vec<(StripPoint, StripPoint)> = self
            .vertices
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect();
        if self.kind == CurveKind::Jordan {
            segs.push((*self.vertices.last().unwrap(), self.vertices[0]));
        }
        segs
    }

    pub fn length(&self) -> f64 {
        self.segments().iter().map(|(a, b)| a.dist(*b)).sum()
    }

    /// Pairwise segment test; adjacent segments may share their endpoint.
    pub fn has_self_intersection(&self) -> bool {
        let segs = self.segments();
        let n = segs.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (self.kind == CurveKind::Jordan && i == 0 && j == n - 1);
                let (a, b) = segs[i];
                let (c, d) = segs[j];
                if let Some(p) = seg_seg_intersection(a, b, c, d) {
                    if adjacent {
                        let shared = if j == i + 1 { b } else { a };
                        if p.dist(shared) < 1e-12 {
                            continue;
                        }
                    }
                    // Collinear overlaps of zero length are tolerated.
                    return true;
                }
            }
        }
        false
    }

    /// Insert midpoints until no segment is longer than `max_len`.
    pub fn densified(&self, max_len: f64) -> PolyCurve {
        let mut out = Vec::with_capacity(self.vertices.len() * 2);
        let segs = self.segments();
        for (a, b) in &segs {
            out.push(*a);
            let len = a.dist(*b);
            let pieces = (len / max_len).ceil() as usize;
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                out.push(StripPoint::new(
                    a.theta + t * (b.theta - a.theta),
                    a.r + t * (b.r - a.r),
                ));
            }
        }
        if self.kind != CurveKind::Jordan {
            out.push(*self.vertices.last().unwrap());
        }
        PolyCurve {
            vertices: out,
            kind: self.kind,
        }
    }

    pub fn translated(&self, dx: f64) -> PolyCurve {
        PolyCurve {
            vertices: self
                .vertices
                .iter()
                .map(|v| StripPoint::new(v.theta + dx, v.r))
                .collect(),
            kind: self.kind,
        }
    }

    pub fn reversed(&self) -> PolyCurve {
        let mut v = self.vertices.clone();
        v.reverse();
        PolyCurve {
            vertices: v,
            kind: self.kind,
        }
    }

    pub fn theta_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            lo = lo.min(v.theta);
            hi = hi.max(v.theta);
        }
        (lo, hi)
    }

    pub fn min_dist_to_point(&self, p: StripPoint) -> f64 {
        self.segments()
            .iter()
            .map(|(a, b)| point_seg_dist(p, *a, *b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Net winding in θ, in periods (±1 for an essential Jordan curve).
    pub fn theta_winding(&self) -> f64 {
        let segs = self.segments();
        segs.iter().map(|(a, b)| b.theta - a.theta).sum()
    }
}

pub fn point_seg_dist(p: StripPoint, a: StripPoint, b: StripPoint) -> f64 {
    let vx = b.theta - a.theta;
    let vy = b.r - a.r;
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.theta - a.theta) * vx + (p.r - a.r) * vy) / len2).clamp(0.0, 1.0);
    p.dist(StripPoint::new(a.theta + t * vx, a.r + t * vy))
}

/// Proper or touching intersection of two closed segments.
///
/// Returns an intersection point when the segments meet; collinear
/// overlapping segments report one point of the overlap.
pub fn seg_seg_intersection(
    a: StripPoint,
    b: StripPoint,
    c: StripPoint,
    d: StripPoint,
) -> Option<StripPoint> {
    let r = (b.theta - a.theta, b.r - a.r);
    let s = (d.theta - c.theta, d.r - c.r);
    let denom = r.0 * s.1 - r.1 * s.0;
    let qp = (c.theta - a.theta, c.r - a.r);
    let qp_cross_r = qp.0 * r.1 - qp.1 * r.0;
    let eps = 1e-14;
    if denom.abs() < eps {
        if qp_cross_r.abs() > 1e-12 {
            return None; // parallel, disjoint lines
        }
        // Collinear: check interval overlap along the longer direction.
        let dot = |p: StripPoint, q: StripPoint, dir: (f64, f64)| {
            (q.theta - p.theta) * dir.0 + (q.r - p.r) * dir.1
        };
        let dir = if r.0.abs().max(r.1.abs()) >= s.0.abs().max(s.1.abs()) {
            r
        } else {
            s
        };
        let ta = 0.0;
        let tb = dot(a, b, dir);
        let tc = dot(a, c, dir);
        let td = dot(a, d, dir);
        let (lo1, hi1) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        let (lo2, hi2) = if tc <= td { (tc, td) } else { (td, tc) };
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        if lo <= hi + eps {
            let norm2 = dir.0 * dir.0 + dir.1 * dir.1;
            let t = 0.5 * (lo + hi) / norm2;
            return Some(StripPoint::new(a.theta + t * dir.0, a.r + t * dir.1));
        }
        return None;
    }
    let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
    let u = qp_cross_r / denom;
    if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
        Some(StripPoint::new(
            a.theta + t * r.0,
            a.r + t * r.1,
        ))
    } else {
        None
    }
}

/// All intersection points between two polylines (as raw segment lists).
pub fn polyline_intersections(a: &PolyCurve, b: &PolyCurve) -> Vec<StripPoint> {
    let mut out = Vec::new();
    for (p, q) in a.segments() {
        for (u, v) in b.segments() {
            if let Some(x) = seg_seg_intersection(p, q, u, v) {
                if !out.iter().any(|y: &StripPoint| y.dist(x) < 1e-10) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Minimum distance between two polylines.
pub fn polyline_min_dist(a: &PolyCurve, b: &PolyCurve) -> f64 {
    let mut best = f64::INFINITY;
    let sa = a.segments();
    let sb = b.segments();
    for (p, q) in &sa {
        for (u, v) in &sb {
            if seg_seg_intersection(*p, *q, *u, *v).is_some() {
                return 0.0;
            }
            best = best
                .min(point_seg_dist(*p, *u, *v))
                .min(point_seg_dist(*q, *u, *v))
                .min(point_seg_dist(*u, *p, *q))
                .min(point_seg_dist(*v, *p, *q));
        }
    }
    best
}

/// Crossing-parity side of `p` with respect to a strip-crossing arc.
///
/// Counts crossings of the leftward horizontal ray from `p`; an even
/// count places `p` in the right domain for an upward-oriented arc.
/// Heights are perturbed deterministically when a vertex lies on the ray.
pub fn left_ray_crossings(p: StripPoint, arc: &PolyCurve) -> usize {
    let mut y = p.r;
    // Nudge off vertex heights.
    'outer: loop {
        for v in &arc.vertices {
            if (v.r - y).abs() < 1e-13 {
                y += 3.5e-13;
                continue 'outer;
            }
        }
        break;
    }
    let mut count = 0;
    for (a, b) in arc.segments() {
        let (lo, hi) = if a.r < b.r { (a.r, b.r) } else { (b.r, a.r) };
        if y <= lo || y > hi {
            continue;
        }
        let t = (y - a.r) / (b.r - a.r);
        let x = a.theta + t * (b.theta - a.theta);
        if x < p.theta {
            count += 1;
        }
    }
    count
}

/// Signed area of the closed polygon (counterclockwise positive).
pub fn shoelace(points: &[StripPoint]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a.theta * b.r - b.theta * a.r;
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> StripPoint {
        StripPoint::new(x, y)
    }

    #[test]
    fn rect_distance_and_intersection() {
        let r = Rect::new(0.0, 1.0, 0.0, 1.0);
        assert_eq!(r.dist_to_point(pt(0.5, 0.5)), 0.0);
        assert!((r.dist_to_point(pt(2.0, 0.5)) - 1.0).abs() < 1e-15);
        assert!((r.dist_to_point(pt(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
        // Shared edges count as intersection.
        assert!(r.intersects(&Rect::new(1.0, 2.0, 0.0, 1.0)));
        assert!(!r.intersects(&Rect::new(1.1, 2.0, 0.0, 1.0)));
    }

    #[test]
    fn segment_intersection_cases() {
        let x = seg_seg_intersection(pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(1.0, 0.0));
        assert!(x.unwrap().dist(pt(0.5, 0.5)) < 1e-12);
        assert!(seg_seg_intersection(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 0.1), pt(1.0, 0.1)).is_none());
        // Touching endpoints.
        let x = seg_seg_intersection(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0));
        assert!(x.unwrap().dist(pt(1.0, 0.0)) < 1e-12);
        // Collinear overlap.
        assert!(seg_seg_intersection(pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, 0.0), pt(3.0, 0.0)).is_some());
        assert!(seg_seg_intersection(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.5, 0.0), pt(3.0, 0.0)).is_none());
    }

    #[test]
    fn simplicity_check_catches_a_bowtie() {
        let good = PolyCurve::new(
            vec![pt(0.0, -1.0), pt(0.0, 0.0), pt(0.2, 0.5), pt(0.2, 1.0)],
            CurveKind::CrossingArc,
        );
        assert!(good.is_ok());
        let bad = PolyCurve::new(
            vec![pt(0.0, -1.0), pt(1.0, 0.0), pt(0.0, 0.5), pt(1.0, -0.5), pt(1.0, 1.0)],
            CurveKind::CrossingArc,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn parity_sidedness_against_a_vertical_arc() {
        let arc = PolyCurve::new(
            vec![pt(0.5, -1.0), pt(0.5, 1.0)],
            CurveKind::CrossingArc,
        )
        .unwrap();
        assert_eq!(left_ray_crossings(pt(1.0, 0.0), &arc) % 2, 1);
        assert_eq!(left_ray_crossings(pt(0.0, 0.0), &arc) % 2, 0);
    }

    #[test]
    fn shoelace_of_unit_square() {
        let sq = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        assert!((shoelace(&sq) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn densify_preserves_endpoints_and_length() {
        let arc = PolyCurve::new(vec![pt(0.0, -1.0), pt(0.3, 0.0), pt(0.3, 1.0)], CurveKind::CrossingArc).unwrap();
        let fine = arc.densified(0.01);
        assert_eq!(fine.vertices.first().unwrap(), arc.vertices.first().unwrap());
        assert_eq!(fine.vertices.last().unwrap(), arc.vertices.last().unwrap());
        assert!((fine.length() - arc.length()).abs() < 1e-12);
        assert!(fine.vertices.len() > 100);
    }
}
