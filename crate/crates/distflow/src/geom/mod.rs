//! Hypersurface representations and curvature.
//!
//! A hypersurface of dimension `n` lives in ambient dimension `D = n + 1`.
//! Analytic kinds (hyperplane, sphere, cylinder product, surface of
//! revolution over a minimal profile) carry exact curvature; discrete kinds
//! (triangle meshes in `D = 3`, polylines in `D = 2`) get curvature from a
//! local quadric fit and Laplacians from cotangent or arclength weights.
//!
//! Sign convention: principal curvatures are reported with respect to an
//! explicitly chosen unit normal, with the sign fixed so that a round sphere
//! has curvature `-1/R` toward its outward normal. Under this convention the
//! mean curvature vector is `H nu` for either choice of `nu`, and mean
//! curvature flow is `dx/dt = H nu`.

pub mod catenoid;
pub mod mesh;
pub mod off;
pub mod quadric;

use serde::Serialize;
use thiserror::Error;

use crate::{Scalar, Vector};
pub use catenoid::CatenoidProfile;
pub use mesh::MeshData;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point is off the surface: distance {dist:.3e} exceeds tolerance {tol:.3e}")]
    OffSurface { dist: f64, tol: f64 },
    #[error("orientation request is tangent to the surface; cannot align normal")]
    AmbiguousOrientation,
    #[error("degenerate cell {0}: area or length below tolerance")]
    DegenerateCell(usize),
    #[error("mesh is not manifold: {0}")]
    NonManifold(String),
    #[error("mesh cells are not consistently oriented (edge {0}-{1})")]
    InconsistentOrientation(usize, usize),
    #[error("mesh has no cells")]
    EmptyMesh,
    #[error("cell references vertex {0} out of range")]
    BadIndex(usize),
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error("profile integration step underflow at s = {0}")]
    IntegrationStepUnderflow(f64),
    #[error("neighborhood of vertex {0} is degenerate; quadric fit failed")]
    DegenerateNeighborhood(usize),
    #[error("operation unsupported in ambient dimension {0}")]
    UnsupportedDimension(usize),
    #[error("profile requires surface dimension >= 2, got {0}")]
    ProfileDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("OFF parse error at line {line}: {msg}")]
    OffParse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Principal curvature data at a surface point, relative to `normal`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRecord<const D: usize> {
    pub point: Vector<D>,
    pub normal: Vector<D>,
    /// Principal curvatures in ascending order; length `D - 1`.
    pub principal: Vec<Scalar>,
    /// Orthonormal principal directions matching `principal`; tangent.
    pub directions: Vec<Vector<D>>,
    /// Sum of principal curvatures.
    pub mean: Scalar,
    /// Squared norm of the second fundamental form.
    pub second_fundamental_sq: Scalar,
}

impl<const D: usize> CurvatureRecord<D> {
    fn assemble(point: Vector<D>, normal: Vector<D>, mut pairs: Vec<(Scalar, Vector<D>)>) -> Self {
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let principal: Vec<Scalar> = pairs.iter().map(|p| p.0).collect();
        let directions: Vec<Vector<D>> = pairs.iter().map(|p| p.1).collect();
        let mean = principal.iter().sum();
        let second_fundamental_sq = principal.iter().map(|k| k * k).sum();
        Self { point, normal, principal, directions, mean, second_fundamental_sq }
    }

    /// The same record relative to the opposite normal.
    pub fn flipped(&self) -> Self {
        let pairs = self
            .principal
            .iter()
            .zip(&self.directions)
            .map(|(k, d)| (-k, *d))
            .collect();
        Self::assemble(self.point, -self.normal, pairs)
    }
}

/// A hyperplane `{ x . normal = offset }` with unit `normal`.
#[derive(Debug, Clone)]
pub struct Hyperplane<const D: usize> {
    pub normal: Vector<D>,
    pub offset: Scalar,
}

/// A round sphere.
#[derive(Debug, Clone)]
pub struct Sphere<const D: usize> {
    pub center: Vector<D>,
    pub radius: Scalar,
}

/// Product of a round `k`-sphere with a flat factor:
/// `{ |y - center_radial| = radius }` where `y` is the first `factor`
/// coordinates (`factor = k + 1 >= 2`) and the remaining `D - factor`
/// coordinates are free.
#[derive(Debug, Clone)]
pub struct Cylinder<const D: usize> {
    pub center: Vector<D>,
    pub factor: usize,
    pub radius: Scalar,
}

/// Surface of revolution over a minimal profile, axis along the last
/// coordinate through `center`.
#[derive(Debug, Clone)]
pub struct Catenoid<const D: usize> {
    pub center: Vector<D>,
    pub profile: CatenoidProfile,
}

/// A hypersurface of dimension `D - 1` in ambient `R^D`.
#[derive(Debug, Clone)]
pub enum Hypersurface<const D: usize> {
    Hyperplane(Hyperplane<D>),
    Sphere(Sphere<D>),
    Cylinder(Cylinder<D>),
    Catenoid(Catenoid<D>),
    Mesh(MeshData<D>),
    /// Disjoint union of components (e.g. a pair of parallel planes).
    Union(Vec<Hypersurface<D>>),
}

impl<const D: usize> Hypersurface<D> {
    pub fn hyperplane(normal: Vector<D>, offset: Scalar) -> Result<Self, GeomError> {
        let n = normal.norm();
        if n < 1e-12 {
            return Err(GeomError::InvalidParameter("hyperplane normal is zero".into()));
        }
        Ok(Self::Hyperplane(Hyperplane { normal: normal / n, offset: offset / n }))
    }

    pub fn sphere(center: Vector<D>, radius: Scalar) -> Result<Self, GeomError> {
        if radius <= 0.0 {
            return Err(GeomError::InvalidParameter(format!("sphere radius {radius} <= 0")));
        }
        Ok(Self::Sphere(Sphere { center, radius }))
    }

    pub fn cylinder(center: Vector<D>, factor: usize, radius: Scalar) -> Result<Self, GeomError> {
        if radius <= 0.0 {
            return Err(GeomError::InvalidParameter(format!("cylinder radius {radius} <= 0")));
        }
        if factor < 2 || factor >= D {
            return Err(GeomError::InvalidParameter(format!(
                "cylinder sphere factor needs 2 <= factor < {D}, got {factor}"
            )));
        }
        Ok(Self::Cylinder(Cylinder { center, factor, radius }))
    }

    pub fn catenoid(center: Vector<D>, profile: CatenoidProfile) -> Result<Self, GeomError> {
        if profile.n + 1 != D {
            return Err(GeomError::InvalidParameter(format!(
                "profile of dimension {} cannot embed in R^{D}",
                profile.n
            )));
        }
        Ok(Self::Catenoid(Catenoid { center, profile }))
    }

    /// A characteristic length used to make tolerances scale-free.
    pub fn scale(&self) -> Scalar {
        match self {
            Self::Hyperplane(h) => 1.0 + h.offset.abs(),
            Self::Sphere(s) => s.radius,
            Self::Cylinder(c) => c.radius,
            Self::Catenoid(c) => c.profile.waist,
            Self::Mesh(m) => m.bbox_diagonal().max(1e-12),
            Self::Union(parts) => parts.iter().map(|p| p.scale()).fold(1e-12, Scalar::max),
        }
    }

    /// Signed or unsigned closeness of `q` to the surface, used only for
    /// on-surface validation (full distance queries live in `dist`).
    pub fn surface_deviation(&self, q: &Vector<D>) -> Scalar {
        match self {
            Self::Hyperplane(h) => (q.dot(&h.normal) - h.offset).abs(),
            Self::Sphere(s) => ((q - s.center).norm() - s.radius).abs(),
            Self::Cylinder(c) => (radial_part(q, &c.center, c.factor).norm() - c.radius).abs(),
            Self::Catenoid(c) => {
                let (rho, z) = revolution_coords(q, &c.center);
                c.profile.half_plane_distance(rho, z)
            }
            Self::Mesh(m) => m
                .vertices
                .iter()
                .map(|v| (v - q).norm())
                .fold(Scalar::INFINITY, Scalar::min),
            Self::Union(parts) => parts
                .iter()
                .map(|p| p.surface_deviation(q))
                .fold(Scalar::INFINITY, Scalar::min),
        }
    }

    /// Some unit normal at an on-surface point (orientation unspecified).
    pub fn normal_at(&self, q: &Vector<D>) -> Result<Vector<D>, GeomError> {
        Ok(match self {
            Self::Hyperplane(h) => h.normal,
            Self::Sphere(s) => (q - s.center).normalize(),
            Self::Cylinder(c) => radial_part(q, &c.center, c.factor).normalize(),
            Self::Catenoid(c) => {
                let (rho, z) = revolution_coords(q, &c.center);
                let (_, phi) = c.profile.r_phi_at(z)?;
                let mut omega = q - c.center;
                omega[D - 1] = 0.0;
                let mut normal = omega * (phi.cos() / rho);
                normal[D - 1] = -phi.sin();
                normal
            }
            Self::Mesh(m) => m.vertex_normal(m.nearest_vertex(q)),
            Self::Union(parts) => {
                let best = parts
                    .iter()
                    .min_by(|a, b| {
                        a.surface_deviation(q)
                            .partial_cmp(&b.surface_deviation(q))
                            .unwrap()
                    })
                    .ok_or(GeomError::EmptyMesh)?;
                best.normal_at(q)?
            }
        })
    }

    /// The surface translated by `v`.
    pub fn translated(&self, v: &Vector<D>) -> Self {
        match self {
            Self::Hyperplane(h) => Self::Hyperplane(Hyperplane {
                normal: h.normal,
                offset: h.offset + h.normal.dot(v),
            }),
            Self::Sphere(s) => Self::Sphere(Sphere { center: s.center + v, radius: s.radius }),
            Self::Cylinder(c) => Self::Cylinder(Cylinder {
                center: c.center + v,
                factor: c.factor,
                radius: c.radius,
            }),
            Self::Catenoid(c) => Self::Catenoid(Catenoid {
                center: c.center + v,
                profile: c.profile.clone(),
            }),
            Self::Mesh(m) => Self::Mesh(m.translated(v)),
            Self::Union(parts) => Self::Union(parts.iter().map(|p| p.translated(v)).collect()),
        }
    }

    /// Principal curvatures at a surface point `q`, with the normal aligned
    /// to have positive inner product with `toward`.
    ///
    /// `q` must lie on the surface within `1e-9 * scale`. For meshes the
    /// record is the quadric fit at the nearest vertex.
    pub fn curvature_at(
        &self,
        q: &Vector<D>,
        toward: &Vector<D>,
    ) -> Result<CurvatureRecord<D>, GeomError> {
        let tol = 1e-9 * self.scale();
        let dev = self.surface_deviation(q);
        if dev > tol && !matches!(self, Self::Mesh(_)) {
            return Err(GeomError::OffSurface { dist: dev, tol });
        }
        let record = match self {
            Self::Hyperplane(h) => {
                let pairs = orthonormal_complement(&h.normal)
                    .into_iter()
                    .map(|d| (0.0, d))
                    .collect();
                CurvatureRecord::assemble(*q, h.normal, pairs)
            }
            Self::Sphere(s) => {
                let u = (q - s.center).normalize();
                let pairs = orthonormal_complement(&u)
                    .into_iter()
                    .map(|d| (-1.0 / s.radius, d))
                    .collect();
                CurvatureRecord::assemble(*q, u, pairs)
            }
            Self::Cylinder(c) => {
                let y = radial_part(q, &c.center, c.factor);
                let u = y.normalize();
                let mut pairs: Vec<(Scalar, Vector<D>)> = Vec::with_capacity(D - 1);
                // Curved directions: complement of u inside the sphere factor.
                for d in factor_complement(&u, c.factor) {
                    pairs.push((-1.0 / c.radius, d));
                }
                // Flat directions: the remaining axes.
                for i in c.factor..D {
                    let mut e = Vector::<D>::zeros();
                    e[i] = 1.0;
                    pairs.push((0.0, e));
                }
                CurvatureRecord::assemble(*q, u, pairs)
            }
            Self::Catenoid(c) => {
                let rel = q - c.center;
                let (rho, z) = revolution_coords(q, &c.center);
                if rho < tol {
                    return Err(GeomError::OffSurface { dist: rho, tol });
                }
                let (r, phi) = c.profile.r_phi_at(z)?;
                let n = D - 1;
                // omega: radial direction in the first D-1 coordinates.
                let mut omega = rel;
                omega[D - 1] = 0.0;
                let omega = omega / rho;
                let mut normal = omega * phi.cos();
                normal[D - 1] = -phi.sin();
                let mut meridian = omega * phi.sin();
                meridian[D - 1] = phi.cos();
                let mut pairs: Vec<(Scalar, Vector<D>)> = Vec::with_capacity(D - 1);
                pairs.push(((n as Scalar - 1.0) * phi.cos() / r, meridian));
                for d in factor_complement(&omega, D - 1) {
                    pairs.push((-phi.cos() / r, d));
                }
                CurvatureRecord::assemble(*q, normal, pairs)
            }
            Self::Mesh(m) => {
                let i = m.nearest_vertex(q);
                return quadric::vertex_curvature(m, i, toward);
            }
            Self::Union(parts) => {
                let best = parts
                    .iter()
                    .min_by(|a, b| {
                        a.surface_deviation(q)
                            .partial_cmp(&b.surface_deviation(q))
                            .unwrap()
                    })
                    .ok_or(GeomError::EmptyMesh)?;
                return best.curvature_at(q, toward);
            }
        };
        orient_toward(record, toward)
    }
}

/// Aligns a curvature record's normal with `toward` (flipping if needed).
pub(crate) fn orient_toward<const D: usize>(
    record: CurvatureRecord<D>,
    toward: &Vector<D>,
) -> Result<CurvatureRecord<D>, GeomError> {
    let dot = record.normal.dot(toward);
    if dot.abs() < 1e-9 * toward.norm() {
        return Err(GeomError::AmbiguousOrientation);
    }
    Ok(if dot >= 0.0 { record } else { record.flipped() })
}

/// Radial component of `q - center` in the leading `factor` coordinates.
fn radial_part<const D: usize>(q: &Vector<D>, center: &Vector<D>, factor: usize) -> Vector<D> {
    let mut y = q - center;
    for i in factor..D {
        y[i] = 0.0;
    }
    y
}

/// `(rho, z)` of `q` relative to a revolution axis along the last coordinate.
pub(crate) fn revolution_coords<const D: usize>(
    q: &Vector<D>,
    center: &Vector<D>,
) -> (Scalar, Scalar) {
    let rel = q - center;
    let z = rel[D - 1];
    let mut rho_sq = 0.0;
    for i in 0..D - 1 {
        rho_sq += rel[i] * rel[i];
    }
    (rho_sq.sqrt(), z)
}

/// Deterministic orthonormal basis of the complement of unit vector `u`.
pub fn orthonormal_complement<const D: usize>(u: &Vector<D>) -> Vec<Vector<D>> {
    // Start from the standard basis, least-aligned axes first, and run
    // Gram-Schmidt against u and the accepted vectors.
    let mut axes: Vec<usize> = (0..D).collect();
    axes.sort_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap());
    let mut basis: Vec<Vector<D>> = Vec::with_capacity(D - 1);
    for &a in &axes {
        if basis.len() == D - 1 {
            break;
        }
        let mut v = Vector::<D>::zeros();
        v[a] = 1.0;
        v -= u * u[a];
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
    }
    debug_assert_eq!(basis.len(), D - 1);
    basis
}

/// Orthonormal complement of `u` restricted to the leading `factor`
/// coordinates (u itself must live there).
fn factor_complement<const D: usize>(u: &Vector<D>, factor: usize) -> Vec<Vector<D>> {
    let mut axes: Vec<usize> = (0..factor).collect();
    axes.sort_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap());
    let mut basis: Vec<Vector<D>> = Vec::with_capacity(factor - 1);
    for &a in &axes {
        if basis.len() == factor - 1 {
            break;
        }
        let mut v = Vector::<D>::zeros();
        v[a] = 1.0;
        v -= u * u[a];
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
    }
    basis
}

/// The quarter-space barrier `f(x) = |x - p_prime|^2 - (n/(n-1)) |z|^2`,
/// where `z` collects the first `n - 1` coordinates of `x` and `n = D - 1`
/// is the surface dimension. Subharmonic along any minimal hypersurface.
pub fn quarter_barrier_f<const D: usize>(x: &Vector<D>, p_prime: &Vector<D>) -> Result<Scalar, GeomError> {
    let n = D - 1;
    if n < 2 {
        return Err(GeomError::ProfileDimension(n));
    }
    let mut z_sq = 0.0;
    for i in 0..n - 1 {
        z_sq += x[i] * x[i];
    }
    Ok((x - p_prime).norm_squared() - n as Scalar / (n as Scalar - 1.0) * z_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::vector;

    #[test]
    fn sphere_curvature_signs() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 2.0).unwrap();
        let q = vector![2.0, 0.0, 0.0];
        // Outward alignment: both curvatures -1/R.
        let rec = s.curvature_at(&q, &vector![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rec.principal.len(), 2);
        for k in &rec.principal {
            assert!((k + 0.5).abs() < 1e-14);
        }
        assert!((rec.mean + 1.0).abs() < 1e-14);
        assert!((rec.second_fundamental_sq - 0.5).abs() < 1e-14);
        // Inward alignment flips signs.
        let rec_in = s.curvature_at(&q, &vector![-1.0, 0.0, 0.0]).unwrap();
        for k in &rec_in.principal {
            assert!((k - 0.5).abs() < 1e-14);
        }
        // Directions orthonormal and tangent.
        for d in &rec.directions {
            assert!(d.dot(&rec.normal).abs() < 1e-12);
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        assert!(rec.directions[0].dot(&rec.directions[1]).abs() < 1e-12);
    }

    #[test]
    fn plane_curvature_zero() {
        let p = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 2.0], 1.0).unwrap();
        // Normalized: {z = 0.5}.
        let rec = p
            .curvature_at(&vector![3.0, -1.0, 0.5], &vector![0.0, 0.0, 1.0])
            .unwrap();
        assert!(rec.principal.iter().all(|k| *k == 0.0));
        assert!((rec.normal - vector![0.0, 0.0, 1.0]).norm() < 1e-14);
    }

    #[test]
    fn cylinder_curvature_split() {
        // S^1_r x R in R^3, radius 0.5.
        let c = Hypersurface::<3>::cylinder(Vector::<3>::zeros(), 2, 0.5).unwrap();
        let q = vector![0.5, 0.0, 3.0];
        let rec = c.curvature_at(&q, &vector![1.0, 0.0, 0.0]).unwrap();
        assert!((rec.principal[0] + 2.0).abs() < 1e-14);
        assert!(rec.principal[1].abs() < 1e-14);
        assert!((rec.mean + 2.0).abs() < 1e-14);
    }

    #[test]
    fn off_surface_point_rejected() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let err = s
            .curvature_at(&vector![1.5, 0.0, 0.0], &vector![1.0, 0.0, 0.0])
            .unwrap_err();
        assert!(matches!(err, GeomError::OffSurface { .. }));
    }

    #[test]
    fn tangent_orientation_rejected() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let err = s
            .curvature_at(&vector![1.0, 0.0, 0.0], &vector![0.0, 1.0, 0.0])
            .unwrap_err();
        assert!(matches!(err, GeomError::AmbiguousOrientation));
    }

    #[test]
    fn orthonormal_complement_is_orthonormal() {
        let u = vector![1.0, 2.0, -0.5, 0.3].normalize();
        let basis = orthonormal_complement(&u);
        assert_eq!(basis.len(), 3);
        for (i, a) in basis.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-12);
            assert!(a.dot(&u).abs() < 1e-12);
            for b in basis.iter().skip(i + 1) {
                assert!(a.dot(b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quarter_barrier_hand_value() {
        // n = 3, s = 1: f at (1,0,0,0) with p' = (0,0,1,1) is 3 - 1.5 = 1.5.
        let x = vector![1.0, 0.0, 0.0, 0.0];
        let p_prime = vector![0.0, 0.0, 1.0, 1.0];
        let f = quarter_barrier_f(&x, &p_prime).unwrap();
        assert!((f - 1.5).abs() < 1e-14);
    }

    #[test]
    fn translation_moves_kinds_consistently() {
        let v = vector![0.5, -1.0, 2.0];
        let s = Hypersurface::<3>::sphere(vector![1.0, 0.0, 0.0], 1.0).unwrap();
        if let Hypersurface::Sphere(sp) = s.translated(&v) {
            assert!((sp.center - vector![1.5, -1.0, 2.0]).norm() < 1e-14);
        } else {
            panic!("kind changed under translation");
        }
        let h = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        if let Hypersurface::Hyperplane(hp) = h.translated(&v) {
            assert!((hp.offset - 2.0).abs() < 1e-14);
        } else {
            panic!("kind changed under translation");
        }
    }
}
