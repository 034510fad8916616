use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cone::ConvexCone2D;
use super::hausdorff::{clip_halfspaces, Window};
use super::vec2::{Vec2, TOL};
use crate::error::{Error, Result};
use crate::round_sig;

/// An unbounded convex upper set `conv(vertices) + recession` in the plane.
///
/// Canonical form: vertices are the extreme points of the lower-left
/// boundary ordered by decreasing first coordinate, and the recession cone
/// contains the nonnegative quadrant. For a `Sector` recession the first
/// vertex carries the `start` ray and the last vertex the `end` ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRegion2D {
    vertices: Vec<Vec2>,
    recession: ConvexCone2D,
}

/// A constraint `⟨normal, x⟩ ≥ offset` with unit normal.
pub type Constraint2 = (Vec2, f64);

impl RiskRegion2D {
    /// `{p} + R₊²`.
    pub fn orthant_at(p: Vec2) -> Self {
        Self { vertices: vec![p], recession: ConvexCone2D::orthant() }
    }

    /// Canonical hull of `points + rec`. The recession cone is enlarged by
    /// the nonnegative quadrant so the result is always an upper set.
    pub fn from_points_plus_cone(points: &[Vec2], rec: &ConvexCone2D) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPoints);
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite point {p:?}")));
        }
        let rec = rec.hull(&ConvexCone2D::orthant());
        match rec {
            ConvexCone2D::Plane => Err(Error::WholePlane("recession cone is the whole plane".into())),
            ConvexCone2D::Zero => unreachable!("hull with the quadrant is never trivial"),
            ConvexCone2D::HalfPlane { normal } => {
                let best = points
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        normal
                            .dot(*a)
                            .total_cmp(&normal.dot(*b))
                            .then(b.x.total_cmp(&a.x))
                            .then(a.y.total_cmp(&b.y))
                    })
                    .expect("nonempty");
                Ok(Self { vertices: vec![best], recession: rec })
            }
            ConvexCone2D::Sector { start, end } => Ok(Self {
                vertices: lower_chain(points, start, end),
                recession: rec,
            }),
        }
    }

    /// Canonical region `∩ {x : ⟨u, x⟩ ≥ c}` for directions `u` in the
    /// nonnegative quadrant.
    pub fn from_halfspaces(constraints: &[Constraint2]) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::EmptyConstraints);
        }
        let mut lines: Vec<(f64, Vec2, f64)> = Vec::with_capacity(constraints.len());
        for &(u, c) in constraints {
            if !(u.is_finite() && c.is_finite()) || u.norm() == 0.0 {
                return Err(Error::InvalidInput(format!("bad constraint {u:?} ≥ {c}")));
            }
            if u.x < -TOL || u.y < -TOL {
                return Err(Error::DirectionOutsideOrthant(vec![u.x, u.y]));
            }
            let n = u.norm();
            let un = Vec2::new(u.x.max(0.0), u.y.max(0.0)) * (1.0 / n);
            lines.push((un.angle(), un, c / n));
        }
        lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.2.total_cmp(&a.2)));
        // equal directions: keep the tightest offset (first after the sort)
        lines.dedup_by(|later, earlier| earlier.1.cross(later.1).abs() <= 1e-12);

        let first = lines[0].1;
        let last = lines[lines.len() - 1].1;
        if lines.len() == 1 {
            return Ok(Self {
                vertices: vec![first * lines[0].2],
                recession: ConvexCone2D::HalfPlane { normal: first },
            });
        }
        let mut stack: Vec<(Vec2, f64)> = Vec::with_capacity(lines.len());
        for &(_, u, c) in &lines {
            while stack.len() >= 2 {
                let (ua, ca) = stack[stack.len() - 2];
                let (ut, ct) = stack[stack.len() - 1];
                let p = intersect(ua, ca, u, c);
                if ut.dot(p) >= ct - TOL {
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push((u, c));
        }
        let vertices: Vec<Vec2> = stack
            .windows(2)
            .map(|w| intersect(w[0].0, w[0].1, w[1].0, w[1].1))
            .collect();
        let rec = ConvexCone2D::Sector { start: last.rot_cw(), end: first.rot_ccw() };
        Self::from_points_plus_cone(&vertices, &rec)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn recession(&self) -> &ConvexCone2D {
        &self.recession
    }

    /// Supporting constraints whose intersection is the region.
    pub fn supporting_halfspaces(&self) -> Vec<Constraint2> {
        match self.recession {
            ConvexCone2D::HalfPlane { normal } => vec![(normal, normal.dot(self.vertices[0]))],
            ConvexCone2D::Sector { start, end } => {
                let v = &self.vertices;
                let mut out = Vec::with_capacity(v.len() + 1);
                let n0 = start.rot_ccw();
                out.push((n0, n0.dot(v[0])));
                for w in v.windows(2) {
                    let n = (w[1] - w[0]).rot_cw().normalized();
                    out.push((n, n.dot(w[0])));
                }
                let nl = end.rot_cw();
                out.push((nl, nl.dot(v[v.len() - 1])));
                out
            }
            _ => unreachable!("canonical regions have a sector or half-plane recession"),
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.contains_tol(x, TOL)
    }

    pub fn contains_tol(&self, x: Vec2, tol: f64) -> bool {
        self.supporting_halfspaces().iter().all(|(n, c)| n.dot(x) >= c - tol)
    }

    /// Whether `other ⊆ self` (vertices and recession directions).
    pub fn contains_region(&self, other: &RiskRegion2D, tol: f64) -> bool {
        let hs = self.supporting_halfspaces();
        other
            .vertices
            .iter()
            .all(|v| hs.iter().all(|(n, c)| n.dot(*v) >= c - tol))
            && other
                .recession
                .generators()
                .iter()
                .all(|g| self.recession.contains_tol(*g, tol))
    }

    /// `inf {⟨u, x⟩ : x in the region}`, or `-∞` when `u` leaves the dual of
    /// the recession cone.
    pub fn scalarize(&self, u: Vec2) -> f64 {
        let tol = TOL * u.norm().max(1.0);
        let bounded = match self.recession {
            ConvexCone2D::HalfPlane { normal } => u.cross(normal).abs() <= tol && u.dot(normal) >= 0.0,
            ref rec => rec.generators().iter().all(|g| g.dot(u) >= -tol),
        };
        if !bounded {
            return f64::NEG_INFINITY;
        }
        self.vertices.iter().map(|v| u.dot(*v)).fold(f64::INFINITY, f64::min)
    }

    /// `self + c` in canonical form.
    pub fn minkowski_cone(&self, c: &ConvexCone2D) -> Result<Self> {
        Self::from_points_plus_cone(&self.vertices, &self.recession.hull(c))
    }

    pub fn translate(&self, d: Vec2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| *v + d).collect(),
            recession: self.recession,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        assert!(s > 0.0, "scale factor must be positive");
        Self {
            vertices: self.vertices.iter().map(|v| *v * s).collect(),
            recession: self.recession,
        }
    }

    /// Region ∩ window as a counterclockwise convex polygon.
    pub fn clip(&self, window: &Window) -> Result<Vec<Vec2>> {
        clip_halfspaces(&self.supporting_halfspaces(), window)
    }

    /// Same region with every coordinate rounded to `digits` significant
    /// digits, as written to disk.
    pub fn rounded(&self, digits: usize) -> Self {
        let r = |v: Vec2| Vec2::new(round_sig(v.x, digits), round_sig(v.y, digits));
        let recession = match self.recession {
            ConvexCone2D::Sector { start, end } => ConvexCone2D::Sector { start: r(start), end: r(end) },
            ConvexCone2D::HalfPlane { normal } => ConvexCone2D::HalfPlane { normal: r(normal) },
            other => other,
        };
        Self { vertices: self.vertices.iter().map(|v| r(*v)).collect(), recession }
    }
}

fn intersect(ua: Vec2, ca: f64, ub: Vec2, cb: f64) -> Vec2 {
    let det = ua.cross(ub);
    Vec2::new((ca * ub.y - cb * ua.y) / det, (ua.x * cb - ub.x * ca) / det)
}

/// Extreme points of `conv(points) + cone(start, end)` ordered by decreasing
/// first coordinate.
fn lower_chain(points: &[Vec2], start: Vec2, end: Vec2) -> Vec<Vec2> {
    let det = start.cross(end);
    // p = a·start + b·end
    let mut skew: Vec<(f64, f64, Vec2)> = points
        .iter()
        .map(|p| (p.cross(end) / det, start.cross(*p) / det, *p))
        .collect();
    skew.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut stair: Vec<(f64, f64, Vec2)> = Vec::with_capacity(skew.len());
    for s in skew {
        if let Some(last) = stair.last() {
            if s.1 >= last.1 - TOL {
                continue;
            }
        }
        stair.push(s);
    }

    let mut hull: Vec<(f64, f64, Vec2)> = Vec::with_capacity(stair.len());
    for s in stair {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let turn = (b.0 - a.0) * (s.1 - a.1) - (b.1 - a.1) * (s.0 - a.0);
            if turn <= TOL {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(s);
    }
    hull.into_iter().rev().map(|s| s.2).collect()
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    vertices: Vec<Vec2>,
    recession: Vec<Vec2>,
}

impl Serialize for RiskRegion2D {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = self.rounded(12);
        let (a, b) = r.recession.boundary_rays().expect("canonical recession has two rays");
        let round = |v: Vec2| Vec2::new(round_sig(v.x, 12), round_sig(v.y, 12));
        RegionRepr { vertices: r.vertices, recession: vec![round(a), round(b)] }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RiskRegion2D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RegionRepr::deserialize(d)?;
        if r.recession.len() != 2 {
            return Err(D::Error::custom("recession must list exactly two rays"));
        }
        let rec = ConvexCone2D::from_boundary(r.recession[0], r.recession[1]);
        RiskRegion2D::from_points_plus_cone(&r.vertices, &rec).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn ks5() -> ConvexCone2D {
        ConvexCone2D::from_generators(&[v(-1.0, 5.0), v(5.0, -1.0)])
    }

    #[test]
    fn halfspaces_orthant() {
        let r = RiskRegion2D::from_halfspaces(&[(Vec2::E1, 0.0), (Vec2::E2, 0.0)]).unwrap();
        assert_eq!(r.vertices(), &[Vec2::ZERO]);
        assert!(r.recession().approx_eq(&ConvexCone2D::orthant(), 1e-15));
    }

    #[test]
    fn halfspaces_two_binding_lines() {
        let s = 26f64.sqrt();
        let r = RiskRegion2D::from_halfspaces(&[
            (v(5.0, 1.0) * (1.0 / s), -2.0 / s),
            (v(1.0, 5.0) * (1.0 / s), -2.0 / s),
        ])
        .unwrap();
        assert_eq!(r.vertices().len(), 1);
        assert!(r.vertices()[0].approx_eq(v(-1.0 / 3.0, -1.0 / 3.0), 1e-12));
        assert!(r.recession().approx_eq(&ks5(), 1e-12));
    }

    #[test]
    fn halfspaces_single_direction_is_half_plane() {
        let r = RiskRegion2D::from_halfspaces(&[(v(2.0, 1.0), 0.0)]).unwrap();
        assert!(r.recession().approx_eq(&ConvexCone2D::half_plane(v(2.0, 1.0)), 1e-15));
        assert!(r.contains(v(-1.0, 2.0)));
        assert!(!r.contains(v(-1.0, 1.9)));
    }

    #[test]
    fn halfspaces_drop_redundant() {
        let r = RiskRegion2D::from_halfspaces(&[
            (Vec2::E1, 0.0),
            (v(1.0, 1.0).normalized(), -10.0),
            (Vec2::E2, 0.0),
            (Vec2::E2, -3.0),
        ])
        .unwrap();
        assert_eq!(r.vertices(), &[Vec2::ZERO]);
        assert!(RiskRegion2D::from_halfspaces(&[]).is_err());
        assert!(RiskRegion2D::from_halfspaces(&[(v(-1.0, 1.0), 0.0)]).is_err());
    }

    #[test]
    fn points_plus_cone_examples() {
        let r = RiskRegion2D::from_points_plus_cone(&[Vec2::ZERO], &ConvexCone2D::orthant()).unwrap();
        assert_eq!(r.vertices(), &[Vec2::ZERO]);
        let r = RiskRegion2D::from_points_plus_cone(&[v(-0.8, 2.0), v(2.0, -0.8), Vec2::ZERO], &ks5()).unwrap();
        assert_eq!(r.vertices(), &[v(2.0, -0.8), Vec2::ZERO, v(-0.8, 2.0)]);
        let r = RiskRegion2D::from_points_plus_cone(&[Vec2::ZERO, v(1.0, 1.0)], &ConvexCone2D::orthant()).unwrap();
        assert_eq!(r.vertices(), &[Vec2::ZERO]);
        assert_eq!(
            RiskRegion2D::from_points_plus_cone(&[], &ConvexCone2D::orthant()),
            Err(Error::EmptyPoints)
        );
    }

    #[test]
    fn membership_examples() {
        let r = RiskRegion2D::from_points_plus_cone(&[v(-0.8, 2.0), v(2.0, -0.8)], &ConvexCone2D::orthant()).unwrap();
        assert!(r.contains(v(2.0, -0.8)));
        assert!(r.contains(v(1.0, 0.2)));
        assert!(!r.contains(v(1.0, -0.3)));
        let o = RiskRegion2D::orthant_at(Vec2::ZERO);
        assert!(!o.contains(v(-1.0, -1.0)));
    }

    #[test]
    fn scalarize_examples() {
        let o = RiskRegion2D::orthant_at(Vec2::ZERO);
        assert_eq!(o.scalarize(v(1.0, 1.0)), 0.0);
        let r = RiskRegion2D::from_points_plus_cone(&[v(-1.0 / 3.0, -1.0 / 3.0)], &ks5()).unwrap();
        let s = 26f64.sqrt();
        assert!((r.scalarize(v(5.0, 1.0) * (1.0 / s)) + 2.0 / s).abs() < 1e-12);
        assert_eq!(r.scalarize(v(1.0, -1.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn minkowski_examples() {
        let o = RiskRegion2D::orthant_at(Vec2::ZERO);
        assert_eq!(o.minkowski_cone(&ConvexCone2D::orthant()).unwrap(), o);
        let m = o.minkowski_cone(&ks5()).unwrap();
        assert_eq!(m.vertices(), &[Vec2::ZERO]);
        assert!(m.recession().approx_eq(&ks5(), 1e-12));
        let two = RiskRegion2D::from_points_plus_cone(&[v(0.0, 1.0), v(1.0, -1.0)], &ConvexCone2D::orthant()).unwrap();
        let h = two.minkowski_cone(&ConvexCone2D::half_plane(v(1.0, 1.0))).unwrap();
        assert_eq!(h.vertices(), &[v(1.0, -1.0)]);
    }

    #[test]
    fn json_round_trip() {
        let r = RiskRegion2D::from_points_plus_cone(&[v(-0.8, 2.0), v(2.0, -0.8), Vec2::ZERO], &ks5()).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with("{\"vertices\":[[2.0,-0.8],[0.0,0.0],[-0.8,2.0]],\"recession\":"));
        let back: RiskRegion2D = serde_json::from_str(&s).unwrap();
        assert_eq!(back.vertices(), r.vertices());
        let h = RiskRegion2D::from_halfspaces(&[(v(2.0, 1.0), 0.0)]).unwrap();
        let back: RiskRegion2D = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert!(back.recession().approx_eq(h.recession(), 1e-11));
    }

    fn region() -> impl Strategy<Value = RiskRegion2D> {
        (
            prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12),
            0.0f64..0.7,
            0.0f64..0.7,
        )
            .prop_map(|(pts, a, b)| {
                let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| v(x, y)).collect();
                let rec = ConvexCone2D::from_generators(&[
                    Vec2::from_angle(-a),
                    Vec2::from_angle(std::f64::consts::FRAC_PI_2 + b),
                ]);
                RiskRegion2D::from_points_plus_cone(&pts, &rec).unwrap()
            })
    }

    proptest! {
        #[test]
        fn halfspace_round_trip(r in region()) {
            let back = RiskRegion2D::from_halfspaces(&r.supporting_halfspaces()).unwrap();
            prop_assert_eq!(back.vertices().len(), r.vertices().len());
            for (a, b) in back.vertices().iter().zip(r.vertices()) {
                prop_assert!(a.approx_eq(*b, 1e-7));
            }
            prop_assert!(back.recession().approx_eq(r.recession(), 1e-9));
        }

        #[test]
        fn scalarize_is_min_over_points(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12),
            th in 0.0f64..std::f64::consts::FRAC_PI_2,
        ) {
            let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| v(x, y)).collect();
            let r = RiskRegion2D::from_points_plus_cone(&pts, &ConvexCone2D::orthant()).unwrap();
            let u = Vec2::from_angle(th);
            let direct = pts.iter().map(|p| u.dot(*p)).fold(f64::INFINITY, f64::min);
            prop_assert!((r.scalarize(u) - direct).abs() < 1e-12);
        }

        #[test]
        fn membership_is_monotone(r in region(), x in -6.0f64..6.0, y in -6.0f64..6.0, dx in 0.0f64..3.0, dy in 0.0f64..3.0) {
            if r.contains(v(x, y)) {
                prop_assert!(r.contains(v(x + dx, y + dy)));
            }
        }

        #[test]
        fn input_points_are_inside(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12),
            a in 0.0f64..0.7,
        ) {
            let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| v(x, y)).collect();
            let rec = ConvexCone2D::from_generators(&[Vec2::from_angle(-a), Vec2::from_angle(1.6 + a)]);
            let r = RiskRegion2D::from_points_plus_cone(&pts, &rec).unwrap();
            for p in &pts {
                prop_assert!(r.contains(*p));
            }
            for w in r.vertices().windows(2) {
                prop_assert!(w[0].x > w[1].x);
            }
        }

        #[test]
        fn minkowski_never_shrinks(r in region(), a in 0.0f64..0.7, probes in prop::collection::vec((-6.0f64..6.0, -6.0f64..6.0), 100)) {
            let c = ConvexCone2D::from_generators(&[Vec2::from_angle(-a), Vec2::E2]);
            let m = r.minkowski_cone(&c).unwrap();
            for (x, y) in probes {
                if r.contains(v(x, y)) {
                    prop_assert!(m.contains(v(x, y)));
                }
            }
        }
    }
}
