use serde::{Deserialize, Serialize};

use super::vec2::{Vec2, TOL};

/// Angular slack when classifying gaps between generator directions.
const ANGLE_TOL: f64 = 1e-9;

/// A closed convex cone in the plane.
///
/// `Sector` spans the directions swept counterclockwise from `start` to
/// `end`; both are unit vectors and the opening angle lies in `[0, π)`.
/// `HalfPlane` is `{x : ⟨normal, x⟩ ≥ 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ConvexCone2D {
    Zero,
    Sector { start: Vec2, end: Vec2 },
    HalfPlane { normal: Vec2 },
    Plane,
}

impl ConvexCone2D {
    /// The nonnegative quadrant.
    pub fn orthant() -> Self {
        ConvexCone2D::Sector { start: Vec2::E1, end: Vec2::E2 }
    }

    /// The nonpositive quadrant.
    pub fn neg_orthant() -> Self {
        ConvexCone2D::Sector { start: -Vec2::E1, end: -Vec2::E2 }
    }

    pub fn ray(d: Vec2) -> Self {
        let d = d.normalized();
        ConvexCone2D::Sector { start: d, end: d }
    }

    pub fn half_plane(normal: Vec2) -> Self {
        ConvexCone2D::HalfPlane { normal: normal.normalized() }
    }

    /// Smallest convex cone containing every generator.
    ///
    /// Zero and non-finite generators are ignored. The cone is read off the
    /// largest angular gap between consecutive directions.
    pub fn from_generators(gens: &[Vec2]) -> Self {
        let mut dirs: Vec<(f64, Vec2)> = gens
            .iter()
            .filter(|g| g.is_finite() && g.norm() > 0.0)
            .map(|g| {
                let u = g.normalized();
                (u.angle(), u)
            })
            .collect();
        if dirs.is_empty() {
            return ConvexCone2D::Zero;
        }
        dirs.sort_by(|a, b| a.0.total_cmp(&b.0));
        dirs.dedup_by(|b, a| b.0 - a.0 <= ANGLE_TOL);
        if dirs.len() > 1 && dirs[0].0 + 2.0 * std::f64::consts::PI - dirs[dirs.len() - 1].0 <= ANGLE_TOL {
            dirs.pop();
        }
        let m = dirs.len();
        if m == 1 {
            return ConvexCone2D::Sector { start: dirs[0].1, end: dirs[0].1 };
        }
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..m {
            let gap = if i + 1 < m {
                dirs[i + 1].0 - dirs[i].0
            } else {
                dirs[0].0 + 2.0 * std::f64::consts::PI - dirs[i].0
            };
            if gap > best.1 {
                best = (i, gap);
            }
        }
        let (i, gap) = best;
        let before = dirs[i].1;
        let after = dirs[(i + 1) % m].1;
        let pi = std::f64::consts::PI;
        if gap > pi + ANGLE_TOL {
            ConvexCone2D::Sector { start: after, end: before }
        } else if gap >= pi - ANGLE_TOL {
            ConvexCone2D::HalfPlane { normal: (after.rot_ccw() + before.rot_cw()).normalized() }
        } else {
            ConvexCone2D::Plane
        }
    }

    /// Cone bounded by two rays taken counterclockwise from `start` to
    /// `end`; antiparallel rays give the half-plane to their left.
    pub fn from_boundary(start: Vec2, end: Vec2) -> Self {
        let (s, e) = (start.normalized(), end.normalized());
        if s.cross(e).abs() <= TOL && s.dot(e) < 0.0 {
            ConvexCone2D::HalfPlane { normal: s.rot_ccw() }
        } else {
            Self::from_generators(&[s, e])
        }
    }

    /// A finite generating set (unit vectors).
    pub fn generators(&self) -> Vec<Vec2> {
        match *self {
            ConvexCone2D::Zero => vec![],
            ConvexCone2D::Sector { start, end } => vec![start, end],
            ConvexCone2D::HalfPlane { normal } => vec![normal.rot_cw(), normal, normal.rot_ccw()],
            ConvexCone2D::Plane => vec![Vec2::E1, Vec2::E2, -Vec2::E1, -Vec2::E2],
        }
    }

    /// The two boundary rays in counterclockwise order, if the cone has them.
    pub fn boundary_rays(&self) -> Option<(Vec2, Vec2)> {
        match *self {
            ConvexCone2D::Sector { start, end } => Some((start, end)),
            ConvexCone2D::HalfPlane { normal } => Some((normal.rot_cw(), normal.rot_ccw())),
            _ => None,
        }
    }

    fn is_ray(start: Vec2, end: Vec2) -> bool {
        start.cross(end).abs() <= TOL && start.dot(end) > 0.0
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.contains_tol(x, TOL)
    }

    pub fn contains_tol(&self, x: Vec2, tol: f64) -> bool {
        match *self {
            ConvexCone2D::Zero => x.norm() <= tol,
            ConvexCone2D::Sector { start, end } => {
                start.cross(x) >= -tol && x.cross(end) >= -tol && x.dot(start + end) >= -tol
            }
            ConvexCone2D::HalfPlane { normal } => normal.dot(x) >= -tol,
            ConvexCone2D::Plane => true,
        }
    }

    /// Whether `other ⊆ self`.
    pub fn contains_cone(&self, other: &ConvexCone2D) -> bool {
        match (self, other) {
            (_, ConvexCone2D::Zero) | (ConvexCone2D::Plane, _) => true,
            (_, ConvexCone2D::Plane) => false,
            (ConvexCone2D::HalfPlane { normal: a }, ConvexCone2D::HalfPlane { normal: b }) => {
                a.approx_eq(*b, TOL)
            }
            (_, ConvexCone2D::HalfPlane { .. }) => false,
            (_, ConvexCone2D::Sector { start, end }) => self.contains(*start) && self.contains(*end),
        }
    }

    /// `{y : ⟨y, x⟩ ≤ 0 for all x in the cone}`.
    pub fn polar(&self) -> Self {
        match *self {
            ConvexCone2D::Zero => ConvexCone2D::Plane,
            ConvexCone2D::Plane => ConvexCone2D::Zero,
            ConvexCone2D::HalfPlane { normal } => ConvexCone2D::ray(-normal),
            ConvexCone2D::Sector { start, end } => {
                if Self::is_ray(start, end) {
                    ConvexCone2D::HalfPlane { normal: -start }
                } else {
                    ConvexCone2D::Sector { start: end.rot_ccw(), end: start.rot_cw() }
                }
            }
        }
    }

    /// `{y : ⟨y, x⟩ ≥ 0 for all x in the cone}`, the negated polar.
    pub fn dual(&self) -> Self {
        self.polar().neg()
    }

    pub fn neg(&self) -> Self {
        match *self {
            ConvexCone2D::Sector { start, end } => ConvexCone2D::Sector { start: -start, end: -end },
            ConvexCone2D::HalfPlane { normal } => ConvexCone2D::HalfPlane { normal: -normal },
            other => other,
        }
    }

    /// Smallest convex cone containing both.
    pub fn hull(&self, other: &ConvexCone2D) -> Self {
        if matches!(self, ConvexCone2D::Plane) || matches!(other, ConvexCone2D::Plane) {
            return ConvexCone2D::Plane;
        }
        let mut g = self.generators();
        g.extend(other.generators());
        Self::from_generators(&g)
    }

    pub fn approx_eq(&self, other: &ConvexCone2D, tol: f64) -> bool {
        match (self, other) {
            (ConvexCone2D::Zero, ConvexCone2D::Zero) | (ConvexCone2D::Plane, ConvexCone2D::Plane) => true,
            (ConvexCone2D::HalfPlane { normal: a }, ConvexCone2D::HalfPlane { normal: b }) => a.approx_eq(*b, tol),
            (ConvexCone2D::Sector { start: s1, end: e1 }, ConvexCone2D::Sector { start: s2, end: e2 }) => {
                s1.approx_eq(*s2, tol) && e1.approx_eq(*e2, tol)
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn orthant_polar_is_negative_orthant() {
        assert!(ConvexCone2D::orthant().polar().approx_eq(&ConvexCone2D::neg_orthant(), 1e-15));
        assert!(ConvexCone2D::orthant().dual().approx_eq(&ConvexCone2D::orthant(), 1e-15));
    }

    #[test]
    fn generators_classification() {
        let k = ConvexCone2D::from_generators(&[v(1.0, -5.0), v(-5.0, 1.0), v(-1.0, -1.0)]);
        match k {
            ConvexCone2D::Sector { start, end } => {
                assert!(start.approx_eq(v(-5.0, 1.0).normalized(), 1e-15));
                assert!(end.approx_eq(v(1.0, -5.0).normalized(), 1e-15));
            }
            other => panic!("{other:?}"),
        }
        let h = ConvexCone2D::from_generators(&[v(1.0, -2.0), v(-0.5, 1.0), v(-1.0, -1.0)]);
        assert!(h.approx_eq(&ConvexCone2D::half_plane(v(-2.0, -1.0)), 1e-12), "{h:?}");
        let p = ConvexCone2D::from_generators(&[v(1.0, 0.0), v(-1.0, 1.0), v(-1.0, -1.0)]);
        assert_eq!(p, ConvexCone2D::Plane);
        assert_eq!(ConvexCone2D::from_generators(&[]), ConvexCone2D::Zero);
    }

    #[test]
    fn half_plane_polar_is_normal_ray() {
        let n = v(2.0, 1.0);
        let h = ConvexCone2D::half_plane(n);
        assert!(h.dual().approx_eq(&ConvexCone2D::ray(n), 1e-15));
        assert!(ConvexCone2D::ray(n).dual().approx_eq(&h, 1e-15));
    }

    #[test]
    fn membership() {
        let k = ConvexCone2D::from_generators(&[v(1.0, -5.0), v(-5.0, 1.0)]);
        assert!(k.contains(Vec2::ZERO));
        assert!(k.contains(v(1.0, -5.0)));
        assert!(!k.contains(v(1.0, 1.0)));
        assert!(ConvexCone2D::ray(v(1.0, 1.0)).contains(v(2.0, 2.0)));
        assert!(!ConvexCone2D::ray(v(1.0, 1.0)).contains(v(-2.0, -2.0)));
    }

    #[test]
    fn hull_of_orthant_and_solvency_cone() {
        let ks = ConvexCone2D::from_generators(&[v(-1.0, 5.0), v(5.0, -1.0)]);
        let h = ConvexCone2D::orthant().hull(&ks);
        assert!(h.approx_eq(&ks, 1e-15));
        assert!(ConvexCone2D::orthant().hull(&ConvexCone2D::half_plane(v(1.0, 1.0))).approx_eq(
            &ConvexCone2D::half_plane(v(1.0, 1.0)),
            1e-12
        ));
    }

    #[test]
    fn boundary_round_trip() {
        let h = ConvexCone2D::half_plane(v(3.0, 1.0));
        let (s, e) = h.boundary_rays().unwrap();
        assert!(ConvexCone2D::from_boundary(s, e).approx_eq(&h, 1e-12));
        let k = ConvexCone2D::from_generators(&[v(-1.0, 5.0), v(5.0, -1.0)]);
        let (s, e) = k.boundary_rays().unwrap();
        assert!(ConvexCone2D::from_boundary(s, e).approx_eq(&k, 1e-15));
    }

    proptest! {
        #[test]
        fn bipolar(a in 0.0f64..6.0, w in 0.01f64..3.1) {
            let c = ConvexCone2D::from_generators(&[Vec2::from_angle(a), Vec2::from_angle(a + w)]);
            prop_assert!(c.polar().polar().approx_eq(&c, 1e-9));
        }

        #[test]
        fn polar_pairs_are_nonpositive(a in 0.0f64..6.0, w in 0.0f64..3.1, t in 0.0f64..1.0) {
            let c = ConvexCone2D::from_generators(&[Vec2::from_angle(a), Vec2::from_angle(a + w)]);
            let p = c.polar();
            let x = Vec2::from_angle(a + t * w);
            for g in p.generators() {
                prop_assert!(g.dot(x) <= 1e-12);
            }
        }

        #[test]
        fn hull_contains_both(a in 0.0f64..6.0, w in 0.0f64..1.5, b in 0.0f64..6.0, z in 0.0f64..1.5) {
            let c1 = ConvexCone2D::from_generators(&[Vec2::from_angle(a), Vec2::from_angle(a + w)]);
            let c2 = ConvexCone2D::from_generators(&[Vec2::from_angle(b), Vec2::from_angle(b + z)]);
            let h = c1.hull(&c2);
                        for g in c1.generators().into_iter().chain(c2.generators()) {
                prop_assert!(h.contains_tol(g, 1e-9));
            }
        }
    }
}
