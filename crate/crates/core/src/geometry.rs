//! Planar helpers shared by the correlation builders, generators and renderer.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub fn midpoint(self, other: Point) -> Point {
        self.lerp(other, 0.5)
    }
}

/// Straight segment between two points. A degenerate segment (`a == b`) is a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Point {
        self.a.midpoint(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a.lerp(self.b, t)
    }

    /// Euclidean distance from `p` to the closest point of the segment.
    pub fn distance_to_point(&self, p: Point) -> f64 {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let len_sq = dx * dx + dy * dy;
        if len_sq == 0.0 {
            return self.a.distance(p);
        }
        let t = (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len_sq).clamp(0.0, 1.0);
        self.point_at(t).distance(p)
    }

    /// Lower bound on the distance between any two points of the segments,
    /// from their axis-aligned bounding boxes.
    pub fn bbox_gap(&self, other: &Segment) -> f64 {
        let gap = |lo1: f64, hi1: f64, lo2: f64, hi2: f64| (lo2 - hi1).max(lo1 - hi2).max(0.0);
        let gx = gap(
            self.a.x.min(self.b.x),
            self.a.x.max(self.b.x),
            other.a.x.min(other.b.x),
            other.a.x.max(other.b.x),
        );
        let gy = gap(
            self.a.y.min(self.b.y),
            self.a.y.max(self.b.y),
            other.a.y.min(other.b.y),
            other.a.y.max(other.b.y),
        );
        gx.hypot(gy)
    }

    /// True when the two segments cross at a point interior to both.
    /// Shared endpoints and collinear touching do not count.
    pub fn properly_intersects(&self, other: &Segment) -> bool {
        fn orient(p: Point, q: Point, r: Point) -> f64 {
            (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
        }
        let d1 = orient(other.a, other.b, self.a);
        let d2 = orient(other.a, other.b, self.b);
        let d3 = orient(self.a, self.b, other.a);
        let d4 = orient(self.a, self.b, other.b);
        ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    }
}

/// Expected squared distance between a point drawn uniformly from `s` and an
/// independent point drawn uniformly from `t`.
///
/// For `X = a + u (b - a)` with `u ~ U[0, 1]`, the mean is the midpoint and the
/// trace of the covariance is `|b - a|^2 / 12`, so the expectation splits into
/// the squared midpoint distance plus both variance traces.
pub fn expected_sq_distance(s: &Segment, t: &Segment) -> f64 {
    let ls = s.a.distance_sq(s.b);
    let lt = t.a.distance_sq(t.b);
    s.midpoint().distance_sq(t.midpoint()) + (ls + lt) / 12.0
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    s.parse().unwrap_or(x)
}
