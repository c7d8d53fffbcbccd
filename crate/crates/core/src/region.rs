//! Serializable region predicates used to build piecewise parameter fields.

use serde::{Deserialize, Serialize};

use crate::Point;

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Self {
        Self { x, y }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x[0] && p.x <= self.x[1] && p.y >= self.y[0] && p.y <= self.y[1]
    }

    /// Containment with an absolute slack on every side.
    pub fn contains_with_slack(&self, p: Point, slack: f64) -> bool {
        p.x >= self.x[0] - slack
            && p.x <= self.x[1] + slack
            && p.y >= self.y[0] - slack
            && p.y <= self.y[1] + slack
    }

    pub fn width(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn height(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]))
    }

    pub fn is_valid(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
            && self.x[1] > self.x[0]
            && self.y[1] > self.y[0]
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x[0], self.y[0]),
            Point::new(self.x[1], self.y[0]),
            Point::new(self.x[1], self.y[1]),
            Point::new(self.x[0], self.y[1]),
        ]
    }

    /// Smallest rectangle containing all `points`.
    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new([first.x, first.x], [first.y, first.y]);
        for p in it {
            r.x[0] = r.x[0].min(p.x);
            r.x[1] = r.x[1].max(p.x);
            r.y[0] = r.y[0].min(p.y);
            r.y[1] = r.y[1].max(p.y);
        }
        Some(r)
    }
}

/// Region predicate. Every variant is a closed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Region {
    All,
    Rect {
        x: [f64; 2],
        y: [f64; 2],
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    /// Polar angles are measured counter-clockwise from +x in `[0, 2π)`.
    AnnularSector {
        center: [f64; 2],
        inner: f64,
        outer: f64,
        theta: [f64; 2],
    },
    /// `{p : normal · p <= offset}`.
    HalfPlane {
        normal: [f64; 2],
        offset: f64,
    },
}

fn polar(center: [f64; 2], p: Point) -> (f64, f64) {
    let dx = p.x - center[0];
    let dy = p.y - center[1];
    let mut theta = dy.atan2(dx);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    (dx.hypot(dy), theta)
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::All => true,
            Region::Rect { x, y } => Rect::new(x, y).contains(p),
            Region::Disk { center, radius } => polar(center, p).0 <= radius,
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = polar(center, p).0;
                r >= inner && r <= outer
            }
            Region::AnnularSector {
                center,
                inner,
                outer,
                theta,
            } => {
                let (r, t) = polar(center, p);
                r >= inner && r <= outer && t >= theta[0] && t <= theta[1]
            }
            Region::HalfPlane { normal, offset } => normal[0] * p.x + normal[1] * p.y <= offset,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::Validation(m.to_string()));
        match *self {
            Region::All => Ok(()),
            Region::Rect { x, y } => {
                if Rect::new(x, y).is_valid() {
                    Ok(())
                } else {
                    bad("rect ranges must be finite and nonempty")
                }
            }
            Region::Disk { radius, .. } => {
                if radius.is_finite() && radius >= 0.0 {
                    Ok(())
                } else {
                    bad("disk radius must be finite and >= 0")
                }
            }
            Region::Annulus { inner, outer, .. } | Region::AnnularSector { inner, outer, .. } => {
                if inner.is_finite() && outer.is_finite() && 0.0 <= inner && inner <= outer {
                    Ok(())
                } else {
                    bad("annulus radii must satisfy 0 <= inner <= outer")
                }
            }
            Region::HalfPlane { normal, offset } => {
                if normal[0].hypot(normal[1]) > 0.0 && offset.is_finite() {
                    Ok(())
                } else {
                    bad("half-plane normal must be nonzero")
                }
            }
        }
    }
}
