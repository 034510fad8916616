//! File outputs: bundle JSON and boundary polylines.

use std::fs;
use std::path::Path;

use serde::Serialize;

use selrisk_core::{round_sig, ConvexCone2D, Error, Result, RiskRegion2D, Vec2, Window};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Lower-left boundary of a region as an open polyline: a far point on the
/// first recession ray, the vertices, a far point on the last ray.
pub fn boundary_polyline(r: &RiskRegion2D, window: Option<&Window>) -> Vec<Vec2> {
    let v = r.vertices();
    let reach = match window {
        Some(w) => Vec2::new(w.x1 - w.x0, w.y1 - w.y0).norm(),
        None => 10.0 * (1.0 + v.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max)),
    };
    let (first, last) = (v[0], v[v.len() - 1]);
    let (start, end) = match *r.recession() {
        ConvexCone2D::Sector { start, end } => (start, end),
        ConvexCone2D::HalfPlane { normal } => (normal.rot_cw(), normal.rot_ccw()),
        _ => (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
    };
    let mut out = vec![first + start * reach];
    out.extend_from_slice(v);
    out.push(last + end * reach);
    out
}

pub fn boundary_csv(r: &RiskRegion2D, window: Option<&Window>) -> String {
    let mut s = String::from("x,y\n");
    for p in boundary_polyline(r, window) {
        s.push_str(&format!("{},{}\n", round_sig(p.x, 12), round_sig(p.y, 12)));
    }
    s
}
