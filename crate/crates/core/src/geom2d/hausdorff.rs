use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::region::{Constraint2, RiskRegion2D};
use super::vec2::{point_segment_dist, Vec2, TOL};
use crate::error::{Error, Result};

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate window {x0},{y0},{x1},{y1}")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// Square `[-h, h]²`.
    pub fn centered(h: f64) -> Self {
        Self { x0: -h, y0: -h, x1: h, y1: h }
    }

    fn corners(&self) -> Vec<Vec2> {
        vec![
            Vec2::new(self.x0, self.y0),
            Vec2::new(self.x1, self.y0),
            Vec2::new(self.x1, self.y1),
            Vec2::new(self.x0, self.y1),
        ]
    }
}

impl FromStr for Window {
    type Err = Error;

    /// Parses `x0,y0,x1,y1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("window `{s}`: {e}")))?;
        match parts[..] {
            [x0, y0, x1, y1] => Window::new(x0, y0, x1, y1),
            _ => Err(Error::InvalidInput(format!("window `{s}` needs four numbers"))),
        }
    }
}

/// Sutherland–Hodgman clip of the window against `⟨n, x⟩ ≥ c` constraints.
pub(crate) fn clip_halfspaces(hs: &[Constraint2], window: &Window) -> Result<Vec<Vec2>> {
    let mut poly = window.corners();
    for &(n, c) in hs {
        if poly.is_empty() {
            break;
        }
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let fa = n.dot(a) - c;
            let fb = n.dot(b) - c;
            if fa >= 0.0 {
                out.push(a);
            }
            if (fa >= 0.0) != (fb >= 0.0) {
                let t = fa / (fa - fb);
                out.push(a + (b - a) * t);
            }
        }
        poly = out;
    }
    poly.dedup_by(|a, b| a.approx_eq(*b, 1e-15));
    if poly.is_empty() {
        Err(Error::EmptyClip)
    } else {
        Ok(poly)
    }
}

/// Distance from `p` to a counterclockwise convex polygon (zero inside).
pub fn dist_to_convex_polygon(p: Vec2, poly: &[Vec2]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => p.dist(poly[0]),
        2 => point_segment_dist(p, poly[0], poly[1]),
        m => {
            let inside = (0..m).all(|i| (poly[(i + 1) % m] - poly[i]).cross(p - poly[i]) >= -TOL);
            if inside {
                0.0
            } else {
                (0..m)
                    .map(|i| point_segment_dist(p, poly[i], poly[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Hausdorff distance between two convex polygons.
pub fn hausdorff_polygons(p: &[Vec2], q: &[Vec2]) -> f64 {
    let d_pq = p.iter().map(|v| dist_to_convex_polygon(*v, q)).fold(0.0, f64::max);
    let d_qp = q.iter().map(|v| dist_to_convex_polygon(*v, p)).fold(0.0, f64::max);
    d_pq.max(d_qp)
}

/// Hausdorff distance between `r1 ∩ window` and `r2 ∩ window`.
pub fn hausdorff_on_window(r1: &RiskRegion2D, r2: &RiskRegion2D, window: &Window) -> Result<f64> {
    let p = r1.clip(window)?;
    let q = r2.clip(window)?;
    Ok(hausdorff_polygons(&p, &q))
}
