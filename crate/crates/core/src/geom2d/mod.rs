//! Planar convex geometry for unbounded upper sets.
//!
//! Regions are stored as a vertex chain plus a recession cone, so cone
//! arithmetic is exact; a [`Window`] is only needed for clipping and
//! distances.

mod cone;
mod halfspace;
mod hausdorff;
mod region;
mod vec2;

pub use cone::ConvexCone2D;
pub use halfspace::{HalfSpace, HalfSpaceSet};
pub use hausdorff::{dist_to_convex_polygon, hausdorff_on_window, hausdorff_polygons, Window};
pub use region::{Constraint2, RiskRegion2D};
pub use vec2::{point_segment_dist, Vec2, TOL};
