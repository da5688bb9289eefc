//! Distance queries and the closed-form distance jet.
//!
//! For a query `x` off a hypersurface `Sigma` with nearest point `p`, the
//! distance function `d = dist(., Sigma)` has gradient `(x - p)/d` and, on
//! the set where the foot is unique and pre-focal, the Hessian
//!
//! ```text
//! Hess d = sum_i  lambda_i / (1 + d lambda_i)  e_i e_i^T,
//! ```
//!
//! where `lambda_i`, `e_i` are the principal curvatures and directions of
//! `Sigma` at `p` taken with respect to the normal that points from `p`
//! away from `x`. The remaining eigenvalue, along the foot direction, is
//! zero. Every use of this formula in the tests is checked against central
//! finite differences of the raw distance.
//!
//! Restricted to a second hypersurface `Gamma` through `x`, the tangential
//! gradient and Laplacian follow from the ambient jet and the curvature of
//! `Gamma`:
//!
//! ```text
//! |grad_G d|^2 = 1 - <n, nu>^2,
//! lap_G d  = tr Hess d - Hess d(nu, nu) + H <n, nu>,
//! ```
//!
//! with `nu` a unit normal of `Gamma` and `H` its mean curvature with
//! respect to `nu` (the product is orientation-free).

use thiserror::Error;

use crate::geom::{CurvatureRecord, GeomError, Hypersurface, MeshData};
use crate::{Matrix, Scalar, Vector};

#[derive(Debug, Error)]
pub enum DistError {
    #[error("query lies on the surface (distance {0:.3e}); the jet is undefined there")]
    OnSurface(f64),
    #[error("query has {0} nearest points; the distance is not differentiable")]
    CutLocus(usize),
    #[error("query at or past the focal radius (1 + alpha = {0:.3e})")]
    Focal(f64),
    #[error("nearest point lands on the truncation rim of the profile table")]
    ProfileRim,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Nearest-point data for one query against one hypersurface.
#[derive(Debug, Clone)]
pub struct FootPoint<const D: usize> {
    pub query: Vector<D>,
    pub foot: Vector<D>,
    pub dist: Scalar,
    /// Unit vector from foot to query; equals `grad d` wherever `d` is
    /// differentiable.
    pub n: Vector<D>,
    /// Curvature of the surface at the foot, normal pointing away from the
    /// query (so `alpha_i = dist * lambda_i` and `1 + alpha_i > 0` marks the
    /// pre-focal regime).
    pub curvature: CurvatureRecord<D>,
    pub alphas: Vec<Scalar>,
    /// Number of essentially distinct nearest points; `usize::MAX` encodes
    /// a continuum (e.g. the center of a sphere).
    pub multiplicity: usize,
}

impl<const D: usize> FootPoint<D> {
    /// The open set where the distance is smooth and the Hessian formula
    /// applies: a unique foot strictly before the focal radius.
    pub fn in_regular_domain(&self) -> bool {
        self.multiplicity == 1
            && self
                .alphas
                .iter()
                .all(|a| 1.0 + a > 1e-6)
    }
}

/// Ambient first and second derivatives of the distance at one query.
#[derive(Debug, Clone)]
pub struct DistanceJet<const D: usize> {
    pub foot: FootPoint<D>,
    pub gradient: Vector<D>,
    pub hessian: Matrix<D>,
}

/// Tangential derivatives of `dist(., Sigma)` along a second surface.
#[derive(Debug, Clone)]
pub struct TangentialData<const D: usize> {
    /// Projection of the ambient gradient onto the tangent space of `Gamma`.
    pub grad_gamma: Vector<D>,
    /// `b^2 = |grad_G d|^2 = 1 - cos^2(theta)`.
    pub grad_sq: Scalar,
    /// `cos(theta) = <n, nu_Gamma>`.
    pub cos_theta: Scalar,
    /// `lap_G d`.
    pub laplacian: Scalar,
}

enum Candidates<const D: usize> {
    /// A positive-dimensional family of nearest points at this distance;
    /// `foot` is one representative.
    Continuum { foot: Vector<D>, dist: Scalar },
    Feet(Vec<(Vector<D>, Scalar)>),
}

/// Raw distance without curvature assembly (cheap, always defined).
pub fn distance<const D: usize>(surface: &Hypersurface<D>, q: &Vector<D>) -> Result<Scalar, DistError> {
    Ok(match gather(surface, q)? {
        Candidates::Continuum { dist, .. } => dist,
        Candidates::Feet(feet) => feet
            .iter()
            .map(|f| f.1)
            .fold(Scalar::INFINITY, Scalar::min),
    })
}

/// Nearest point, multiplicity and foot curvature for `q` against the
/// surface. Fails only on-surface or at a profile-table rim.
pub fn closest_point<const D: usize>(
    surface: &Hypersurface<D>,
    q: &Vector<D>,
) -> Result<FootPoint<D>, DistError> {
    let scale = surface.scale();
    let (foot, dist, multiplicity) = match gather(surface, q)? {
        Candidates::Continuum { foot, dist } => (foot, dist, usize::MAX),
        Candidates::Feet(mut feet) => {
            feet.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let best = feet[0].1;
            // Cluster near-minimal feet: two candidates are the same foot if
            // they coincide to working precision.
            let keep: Vec<&(Vector<D>, Scalar)> = feet
                .iter()
                .take_while(|f| f.1 <= best * (1.0 + 1e-7) + 1e-12 * scale)
                .collect();
            let mut reps: Vec<Vector<D>> = Vec::new();
            for f in keep {
                if !reps.iter().any(|r| (r - f.0).norm() < 1e-6 * scale) {
                    reps.push(f.0);
                }
            }
            (feet[0].0, best, reps.len())
        }
    };
    if dist < 1e-12 * scale {
        return Err(DistError::OnSurface(dist));
    }
    let n = (q - foot) / dist;
    // Curvature with the normal pointing away from the query.
    let toward_query = q - foot;
    let curvature = surface.curvature_at(&foot, &toward_query)?.flipped();
    let alphas: Vec<Scalar> = curvature.principal.iter().map(|l| dist * l).collect();
    Ok(FootPoint { query: *q, foot, dist, n, curvature, alphas, multiplicity })
}

/// Closed-form gradient and Hessian of the distance at `q`.
pub fn distance_jet<const D: usize>(
    surface: &Hypersurface<D>,
    q: &Vector<D>,
) -> Result<DistanceJet<D>, DistError> {
    let foot = closest_point(surface, q)?;
    if foot.multiplicity != 1 {
        return Err(DistError::CutLocus(foot.multiplicity));
    }
    let mut hessian = Matrix::<D>::zeros();
    for (lambda, dir) in foot.curvature.principal.iter().zip(&foot.curvature.directions) {
        let denom = 1.0 + foot.dist * lambda;
        // Same margin as FootPoint::in_regular_domain.
        if denom <= 1e-6 {
            return Err(DistError::Focal(denom));
        }
        hessian += dir * dir.transpose() * (lambda / denom);
    }
    Ok(DistanceJet { gradient: foot.n, hessian, foot })
}

/// Tangential derivatives of the distance along `Gamma` at the jet's query
/// point. `gamma` is the curvature record of `Gamma` there (either normal
/// orientation gives the same result).
pub fn tangential_data<const D: usize>(
    jet: &DistanceJet<D>,
    gamma: &CurvatureRecord<D>,
) -> TangentialData<D> {
    let nu = gamma.normal;
    let cos_theta = jet.gradient.dot(&nu);
    let grad_gamma = jet.gradient - nu * cos_theta;
    let grad_sq = (1.0 - cos_theta * cos_theta).max(0.0);
    let hess_nu_nu = (nu.transpose() * jet.hessian * nu)[(0, 0)];
    let laplacian = jet.hessian.trace() - hess_nu_nu + gamma.mean * cos_theta;
    TangentialData { grad_gamma, grad_sq, cos_theta, laplacian }
}

/// Foot point of the same query against the surface translated toward the
/// query by `eps`: every surface point moves by `eps * (query - foot)/d`.
/// The translated distance is exactly `d - eps`, the translated foot is the
/// old foot shifted, and the query sits in the regular domain of the
/// translated surface for every `eps` in `(0, d)`. This is the barrier that
/// stands in for the distance at points where `d` itself is not smooth.
pub fn translated_distance<const D: usize>(
    surface: &Hypersurface<D>,
    fp: &FootPoint<D>,
    eps: Scalar,
) -> Result<(Hypersurface<D>, FootPoint<D>), DistError> {
    if !(eps > 0.0 && eps < fp.dist) {
        return Err(DistError::Geom(GeomError::InvalidParameter(format!(
            "translation eps = {eps} outside (0, d = {})",
            fp.dist
        ))));
    }
    let shifted = surface.translated(&(fp.n * eps));
    let foot = closest_point(&shifted, &fp.query)?;
    Ok((shifted, foot))
}

fn gather<const D: usize>(
    surface: &Hypersurface<D>,
    q: &Vector<D>,
) -> Result<Candidates<D>, DistError> {
    let scale = surface.scale();
    Ok(match surface {
        Hypersurface::Hyperplane(h) => {
            let offset = q.dot(&h.normal) - h.offset;
            Candidates::Feet(vec![(q - h.normal * offset, offset.abs())])
        }
        Hypersurface::Sphere(s) => {
            let rel = q - s.center;
            let rho = rel.norm();
            if rho < 1e-12 * scale {
                let mut foot = s.center;
                foot[0] += s.radius;
                Candidates::Continuum { foot, dist: s.radius }
            } else {
                let foot = s.center + rel * (s.radius / rho);
                Candidates::Feet(vec![(foot, (rho - s.radius).abs())])
            }
        }
        Hypersurface::Cylinder(c) => {
            let mut y = q - c.center;
            for i in c.factor..D {
                y[i] = 0.0;
            }
            let rho = y.norm();
            if rho < 1e-12 * scale {
                let mut foot = *q;
                foot[0] = c.center[0] + c.radius;
                for i in 1..c.factor {
                    foot[i] = c.center[i];
                }
                Candidates::Continuum { foot, dist: c.radius }
            } else {
                let foot = q - y + y * (c.radius / rho);
                Candidates::Feet(vec![(foot, (rho - c.radius).abs())])
            }
        }
        Hypersurface::Catenoid(c) => {
            let rel = q - c.center;
            let z = rel[D - 1];
            let mut omega = rel;
            omega[D - 1] = 0.0;
            let rho = omega.norm();
            let feet = c.profile.closest_on_profile(rho, z, 1e-7);
            if feet.is_empty() {
                return Err(DistError::ProfileRim);
            }
            let best = feet[0].dist;
            if feet
                .iter()
                .any(|f| f.at_rim && f.dist <= best * (1.0 + 1e-6))
            {
                return Err(DistError::ProfileRim);
            }
            if rho < 1e-12 * scale {
                // On the axis every direction lifts the same profile foot.
                let f = feet[0];
                let mut foot = c.center;
                foot[0] += f.r;
                foot[D - 1] += f.z;
                Candidates::Continuum { foot, dist: f.dist }
            } else {
                let omega = omega / rho;
                Candidates::Feet(
                    feet.iter()
                        .map(|f| {
                            let mut foot = c.center + omega * f.r;
                            foot[D - 1] += f.z;
                            (foot, f.dist)
                        })
                        .collect(),
                )
            }
        }
        Hypersurface::Mesh(m) => Candidates::Feet(mesh_feet(m, q)),
        Hypersurface::Union(parts) => {
            let mut feet: Vec<(Vector<D>, Scalar)> = Vec::new();
            let mut continuum: Option<(Vector<D>, Scalar)> = None;
            for part in parts {
                match gather(part, q)? {
                    Candidates::Feet(mut f) => feet.append(&mut f),
                    Candidates::Continuum { foot, dist } => {
                        if continuum.map_or(true, |(_, d)| dist < d) {
                            continuum = Some((foot, dist));
                        }
                    }
                }
            }
            let discrete_min = feet
                .iter()
                .map(|f| f.1)
                .fold(Scalar::INFINITY, Scalar::min);
            match continuum {
                Some((foot, dist)) if dist <= discrete_min * (1.0 + 1e-7) => {
                    Candidates::Continuum { foot, dist }
                }
                _ => Candidates::Feet(feet),
            }
        }
    })
}

/// Per-cell nearest points, filtered to the near-minimal set.
fn mesh_feet<const D: usize>(m: &MeshData<D>, q: &Vector<D>) -> Vec<(Vector<D>, Scalar)> {
    let mut best = Scalar::INFINITY;
    let mut feet: Vec<(Vector<D>, Scalar)> = Vec::new();
    for cell in &m.cells {
        let p = if D == 3 {
            closest_on_triangle(
                q,
                &m.vertices[cell[0]],
                &m.vertices[cell[1]],
                &m.vertices[cell[2]],
            )
        } else {
            closest_on_segment(q, &m.vertices[cell[0]], &m.vertices[cell[1]])
        };
        let d = (q - p).norm();
        if d < best {
            best = d;
        }
        // Keep a small margin; closest_point re-filters against the true
        // minimum afterwards.
        if d <= best * (1.0 + 1e-6) {
            feet.push((p, d));
        }
    }
    feet.retain(|f| f.1 <= best * (1.0 + 1e-6));
    feet
}

fn closest_on_segment<const D: usize>(
    q: &Vector<D>,
    a: &Vector<D>,
    b: &Vector<D>,
) -> Vector<D> {
    let ab = b - a;
    let t = ((q - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point on a triangle by barycentric region classification.
fn closest_on_triangle<const D: usize>(
    q: &Vector<D>,
    a: &Vector<D>,
    b: &Vector<D>,
    c: &Vector<D>,
) -> Vector<D> {
    let ab = b - a;
    let ac = c - a;
    let aq = q - a;
    let d1 = ab.dot(&aq);
    let d2 = ac.dot(&aq);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bq = q - b;
    let d3 = ab.dot(&bq);
    let d4 = ac.dot(&bq);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cq = q - c;
    let d5 = ab.dot(&cq);
    let d6 = ac.dot(&cq);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::icosphere;
    use crate::geom::CatenoidProfile;
    use nalgebra::vector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn fd_gradient<const D: usize>(
        surface: &Hypersurface<D>,
        q: &Vector<D>,
        h: Scalar,
    ) -> Vector<D> {
        let mut g = Vector::<D>::zeros();
        for i in 0..D {
            let mut plus = *q;
            let mut minus = *q;
            plus[i] += h;
            minus[i] -= h;
            g[i] = (distance(surface, &plus).unwrap() - distance(surface, &minus).unwrap())
                / (2.0 * h);
        }
        g
    }

    fn fd_hessian<const D: usize>(
        surface: &Hypersurface<D>,
        q: &Vector<D>,
        h: Scalar,
    ) -> Matrix<D> {
        let d0 = distance(surface, q).unwrap();
        let mut hess = Matrix::<D>::zeros();
        for i in 0..D {
            for j in 0..D {
                if i == j {
                    let mut p = *q;
                    let mut m = *q;
                    p[i] += h;
                    m[i] -= h;
                    let dp = distance(surface, &p).unwrap();
                    let dm = distance(surface, &m).unwrap();
                    hess[(i, i)] = (dp + dm - 2.0 * d0) / (h * h);
                } else {
                    let mut pp = *q;
                    let mut pm = *q;
                    let mut mp = *q;
                    let mut mm = *q;
                    pp[i] += h;
                    pp[j] += h;
                    pm[i] += h;
                    pm[j] -= h;
                    mp[i] -= h;
                    mp[j] += h;
                    mm[i] -= h;
                    mm[j] -= h;
                    hess[(i, j)] = (distance(surface, &pp).unwrap()
                        - distance(surface, &pm).unwrap()
                        - distance(surface, &mp).unwrap()
                        + distance(surface, &mm).unwrap())
                        / (4.0 * h * h);
                }
            }
        }
        hess
    }

    #[test]
    fn sphere_jet_closed_forms() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 2.0).unwrap();
        // Outside at radius 3: d = 1, Hessian (I - qq^T/9)/3.
        let q = vector![3.0, 0.0, 0.0];
        let jet = distance_jet(&s, &q).unwrap();
        assert!((jet.foot.dist - 1.0).abs() < 1e-14);
        assert!((jet.gradient - vector![1.0, 0.0, 0.0]).norm() < 1e-14);
        // Away-normal here is inward, so alpha = d/R > 0.
        for a in &jet.foot.alphas {
            assert!((a - 0.5).abs() < 1e-14);
        }
        let expect = Matrix::<3>::from_diagonal(&vector![0.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert!((jet.hessian - expect).norm() < 1e-13);
        // Inside at radius 0.5: d = 1.5, tangential eigenvalues -1/rho = -2.
        let q_in = vector![0.0, 0.5, 0.0];
        let jet_in = distance_jet(&s, &q_in).unwrap();
        assert!((jet_in.foot.dist - 1.5).abs() < 1e-14);
        assert!((jet_in.gradient - vector![0.0, -1.0, 0.0]).norm() < 1e-14);
        let expect_in = Matrix::<3>::from_diagonal(&vector![-2.0, 0.0, -2.0]);
        assert!((jet_in.hessian - expect_in).norm() < 1e-13);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let sphere = Hypersurface::<3>::sphere(vector![0.2, -0.4, 1.0], 1.3).unwrap();
        let plane = Hypersurface::<3>::hyperplane(vector![1.0, 2.0, -1.0], 0.7).unwrap();
        let cases3: Vec<(Hypersurface<3>, Vector<3>)> = vec![
            (sphere.clone(), vector![2.0, 0.5, 1.2]),
            (sphere, vector![0.5, -0.2, 1.3]),
            (plane, vector![0.3, 0.9, 2.0]),
        ];
        for (surface, q) in cases3 {
            let jet = distance_jet(&surface, &q).unwrap();
            let fd = fd_hessian(&surface, &q, 1e-4);
            assert!(
                (jet.hessian - fd).norm() < 2e-6,
                "Hessian mismatch {:.3e}",
                (jet.hessian - fd).norm()
            );
            let g = fd_gradient(&surface, &q, 1e-6);
            assert!((jet.gradient - g).norm() < 1e-8);
        }
        // Catenoid in R^3 and R^4.
        let cat3 = Hypersurface::<3>::catenoid(
            vector![0.1, 0.0, -0.2],
            CatenoidProfile::solve(2, 1.0, 8.0).unwrap(),
        )
        .unwrap();
        let q3 = vector![1.6, 0.4, 0.3];
        let jet3 = distance_jet(&cat3, &q3).unwrap();
        let fd3 = fd_hessian(&cat3, &q3, 1e-4);
        assert!(
            (jet3.hessian - fd3).norm() < 1e-4,
            "catenoid Hessian mismatch {:.3e}",
            (jet3.hessian - fd3).norm()
        );
        let cat4 = Hypersurface::<4>::catenoid(
            Vector::<4>::zeros(),
            CatenoidProfile::solve(3, 0.8, 6.0).unwrap(),
        )
        .unwrap();
        let q4 = vector![1.5, 0.3, -0.2, 0.4];
        let jet4 = distance_jet(&cat4, &q4).unwrap();
        let fd4 = fd_hessian(&cat4, &q4, 1e-4);
        assert!((jet4.hessian - fd4).norm() < 1e-4);
        // Cylinder S^1 x R^2 in R^4.
        let cyl = Hypersurface::<4>::cylinder(Vector::<4>::zeros(), 2, 0.9).unwrap();
        let qc = vector![1.4, 0.6, 0.5, -1.0];
        let jetc = distance_jet(&cyl, &qc).unwrap();
        let fdc = fd_hessian(&cyl, &qc, 1e-4);
        assert!((jetc.hessian - fdc).norm() < 2e-6);
    }

    #[test]
    fn union_distance_and_multiplicity() {
        let planes = Hypersurface::<3>::Union(vec![
            Hypersurface::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap(),
            Hypersurface::hyperplane(vector![0.0, 0.0, 1.0], 2.0).unwrap(),
        ]);
        let mid = closest_point(&planes, &vector![5.0, -3.0, 1.0]).unwrap();
        assert_eq!(mid.multiplicity, 2);
        assert!((mid.dist - 1.0).abs() < 1e-14);
        assert!(!mid.in_regular_domain());
        let off = closest_point(&planes, &vector![5.0, -3.0, 0.7]).unwrap();
        assert_eq!(off.multiplicity, 1);
        assert!((off.dist - 0.7).abs() < 1e-14);
        assert!(off.in_regular_domain());
        // The jet refuses the midline.
        assert!(matches!(
            distance_jet(&planes, &vector![0.0, 0.0, 1.0]),
            Err(DistError::CutLocus(2))
        ));
    }

    #[test]
    fn continuum_feet_detected() {
        let s = Hypersurface::<3>::sphere(vector![1.0, 1.0, 1.0], 2.0).unwrap();
        let center = closest_point(&s, &vector![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(center.multiplicity, usize::MAX);
        assert!((center.dist - 2.0).abs() < 1e-14);
        assert!(!center.in_regular_domain());
        let cyl = Hypersurface::<3>::cylinder(Vector::<3>::zeros(), 2, 0.5).unwrap();
        let axis = closest_point(&cyl, &vector![0.0, 0.0, 7.0]).unwrap();
        assert_eq!(axis.multiplicity, usize::MAX);
        let cat = Hypersurface::<3>::catenoid(
            Vector::<3>::zeros(),
            CatenoidProfile::solve(2, 1.0, 6.0).unwrap(),
        )
        .unwrap();
        let on_axis = closest_point(&cat, &vector![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(on_axis.multiplicity, usize::MAX);
        assert!((on_axis.dist - 1.0).abs() < 1e-9);
    }

    #[test]
    fn focal_and_regular_domain() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        // Inside, essentially at the center: 1 + alpha below the margin.
        let q = vector![1e-8, 0.0, 0.0];
        let fp = closest_point(&s, &q).unwrap();
        assert!(!fp.in_regular_domain());
        assert!(matches!(distance_jet(&s, &q), Err(DistError::Focal(_))));
        // Close to the center but still regular: the Hessian is large and
        // must still match the exact -1/rho.
        let near = vector![1e-3, 0.0, 0.0];
        let fp2 = closest_point(&s, &near).unwrap();
        assert!(fp2.in_regular_domain());
        let jet = distance_jet(&s, &near).unwrap();
        assert!((jet.hessian[(1, 1)] + 1e3).abs() < 1e-6 * 1e3);
    }

    #[test]
    fn on_surface_query_rejected() {
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        assert!(matches!(
            closest_point(&s, &vector![1.0, 0.0, 0.0]),
            Err(DistError::OnSurface(_))
        ));
    }

    #[test]
    fn concentric_spheres_tangential_data() {
        // Gamma = sphere of radius 1, Sigma = sphere of radius 3, same
        // center: d is constant on Gamma.
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 3.0).unwrap();
        let gamma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let x = vector![0.6, 0.8, 0.0];
        let jet = distance_jet(&sigma, &x).unwrap();
        let gamma_rec = gamma.curvature_at(&x, &x).unwrap();
        let td = tangential_data(&jet, &gamma_rec);
        assert!(td.grad_sq < 1e-13);
        assert!(td.laplacian.abs() < 1e-12, "lap_G d = {}", td.laplacian);
        assert!((td.cos_theta + 1.0).abs() < 1e-13);
        // Orientation of Gamma's normal must not matter.
        let td_flip = tangential_data(&jet, &gamma_rec.flipped());
        assert!((td.laplacian - td_flip.laplacian).abs() < 1e-13);
        assert!((td.grad_sq - td_flip.grad_sq).abs() < 1e-15);
    }

    #[test]
    fn tilted_planes_tangential_gradient() {
        // Gamma = {z = 0}; Sigma tilted by theta = 30 degrees. On Gamma the
        // distance to Sigma has |grad_G d|^2 = sin^2(theta).
        let th = 30f64.to_radians();
        let sigma =
            Hypersurface::<3>::hyperplane(vector![th.sin(), 0.0, th.cos()], -1.0).unwrap();
        let gamma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        let x = vector![0.4, -0.3, 0.0];
        let jet = distance_jet(&sigma, &x).unwrap();
        let rec = gamma.curvature_at(&x, &vector![0.0, 0.0, 1.0]).unwrap();
        let td = tangential_data(&jet, &rec);
        assert!((td.grad_sq - th.sin().powi(2)).abs() < 1e-14);
        assert!(td.laplacian.abs() < 1e-14);
        // FD oracle along Gamma: second difference of d along e1.
        let h = 1e-5;
        let d = |p: Vector<3>| distance(&sigma, &p).unwrap();
        let lap_fd = (d(x + vector![h, 0.0, 0.0]) + d(x - vector![h, 0.0, 0.0])
            + d(x + vector![0.0, h, 0.0])
            + d(x - vector![0.0, h, 0.0])
            - 4.0 * d(x))
            / (h * h);
        assert!(lap_fd.abs() < 1e-5);
    }

    #[test]
    fn mesh_sphere_matches_analytic() {
        let center = vector![0.5, 0.0, -0.5];
        let mesh = Hypersurface::Mesh(icosphere(center, 1.0, 3));
        let exact = Hypersurface::<3>::sphere(center, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dir = Vector::<3>::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let radius = rng.gen_range(0.3..2.5);
            let q = center + dir * radius;
            if (radius - 1.0f64).abs() < 0.05 {
                continue;
            }
            let dm = distance(&mesh, &q).unwrap();
            let de = distance(&exact, &q).unwrap();
            // Chordal mesh lies inside the sphere; the gap is the sagitta.
            assert!(
                (dm - de).abs() < 8e-3,
                "mesh {dm} vs exact {de} at radius {radius}"
            );
            let fp = closest_point(&mesh, &q).unwrap();
            assert_eq!(fp.multiplicity, 1);
            // Quadric curvature at the foot vertex: principal near -1/R
            // seen from outside (away-normal is inward, lambda = +1).
            if radius > 1.1 {
                for l in &fp.curvature.principal {
                    assert!((l - 1.0).abs() < 0.05, "principal {l}");
                }
            }
        }
    }

    #[test]
    fn catenoid_foot_is_stationary() {
        let cat = Hypersurface::<3>::catenoid(
            Vector::<3>::zeros(),
            CatenoidProfile::solve(2, 1.0, 8.0).unwrap(),
        )
        .unwrap();
        let q = vector![2.0, 1.0, 0.8];
        let fp = closest_point(&cat, &q).unwrap();
        assert!(cat.surface_deviation(&fp.foot) < 1e-9);
        // Optimality: the foot direction is normal to the surface.
        for dir in &fp.curvature.directions {
            assert!(fp.n.dot(dir).abs() < 1e-7, "tangential leak {}", fp.n.dot(dir));
        }
        // And the gradient matches finite differences.
        let g = fd_gradient(&cat, &q, 1e-6);
        assert!((fp.n - g).norm() < 1e-7);
    }

    #[test]
    fn catenoid_symmetry_plane_multiplicity() {
        // On the z = 0 plane outside the waist the two mirrored feet merge
        // into one (the waist circle itself); past the focal ring they
        // split. A point straight above the waist at z = 0 has its foot on
        // the waist: multiplicity 1.
        let cat = Hypersurface::<3>::catenoid(
            Vector::<3>::zeros(),
            CatenoidProfile::solve(2, 1.0, 8.0).unwrap(),
        )
        .unwrap();
        let fp = closest_point(&cat, &vector![1.4, 0.0, 0.0]).unwrap();
        assert_eq!(fp.multiplicity, 1);
        assert!((fp.foot - vector![1.0, 0.0, 0.0]).norm() < 1e-8);
    }

    #[test]
    fn translated_distance_peels_off_eps() {
        // Sphere of radius 2, query at |p| = 1.5 inside: d = 0.5. Pulling
        // the surface a quarter unit toward the query leaves d_eps = 0.25,
        // and the translated sphere (radius 2 centered at (0.25, 0, 0))
        // curves with lambda = -1/2 seen from inside, so alpha_1 =
        // d_eps * lambda = -1/8.
        let s = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 2.0).unwrap();
        let q = vector![1.5, 0.0, 0.0];
        let fp = closest_point(&s, &q).unwrap();
        assert!((fp.dist - 0.5).abs() < 1e-12);
        let (_, tfp) = translated_distance(&s, &fp, 0.25).unwrap();
        assert!((tfp.dist - 0.25).abs() < 1e-12);
        assert!((tfp.alphas[0] + 0.125).abs() < 1e-12);
        assert!(tfp.in_regular_domain());

        // Tiny eps: the translated distance is d - eps to roundoff.
        let (_, tiny) = translated_distance(&s, &fp, 1e-8).unwrap();
        assert!((tiny.dist - (fp.dist - 1e-8)).abs() < 1e-12);

        // eps outside (0, d) is rejected.
        assert!(translated_distance(&s, &fp, 0.0).is_err());
        assert!(translated_distance(&s, &fp, 0.6).is_err());
    }

    #[test]
    fn translated_distance_resolves_the_midplane() {
        // Equidistant between two parallel planes the distance has two feet;
        // after translating toward either one the tie is broken.
        let pair = Hypersurface::Union(vec![
            Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap(),
            Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 2.0).unwrap(),
        ]);
        let q = vector![0.3, -0.1, 1.0];
        let fp = closest_point(&pair, &q).unwrap();
        assert_eq!(fp.multiplicity, 2);
        let (_, tfp) = translated_distance(&pair, &fp, 0.5).unwrap();
        assert_eq!(tfp.multiplicity, 1);
        assert!((tfp.dist - 0.5).abs() < 1e-12);
        assert!(tfp.in_regular_domain());
    }

    proptest! {
        /// 1-Lipschitz: |d(x) - d(y)| <= |x - y| across kinds.
        #[test]
        fn distance_is_lipschitz(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            bx in -2.0f64..2.0, by in -2.0f64..2.0, bz in -2.0f64..2.0,
            kind in 0usize..3,
        ) {
            let surface = match kind {
                0 => Hypersurface::<3>::sphere(vector![0.1, 0.2, -0.1], 0.8).unwrap(),
                1 => Hypersurface::<3>::hyperplane(vector![1.0, 1.0, 1.0], 0.3).unwrap(),
                _ => Hypersurface::<3>::cylinder(Vector::<3>::zeros(), 2, 0.6).unwrap(),
            };
            let a = vector![ax, ay, az];
            let b = vector![bx, by, bz];
            let da = distance(&surface, &a).unwrap();
            let db = distance(&surface, &b).unwrap();
            prop_assert!((da - db).abs() <= (a - b).norm() + 1e-12);
        }

        /// Translating the surface by v changes the distance by at most |v|.
        #[test]
        fn translation_inequality(
            qx in -2.0f64..2.0, qy in -2.0f64..2.0, qz in -2.0f64..2.0,
            vx in -0.5f64..0.5, vy in -0.5f64..0.5, vz in -0.5f64..0.5,
        ) {
            let s = Hypersurface::<3>::sphere(vector![0.0, 0.0, 1.5], 1.0).unwrap();
            let q = vector![qx, qy, qz];
            let v = vector![vx, vy, vz];
            let d = distance(&s, &q).unwrap();
            let dv = distance(&s.translated(&v), &q).unwrap();
            prop_assert!(dv >= d - v.norm() - 1e-12);
            prop_assert!(dv <= d + v.norm() + 1e-12);
        }

        /// The translated surface is a lower barrier everywhere:
        /// d(x) <= d_eps(x) + eps at every x, with equality at the query.
        #[test]
        fn translated_distance_is_a_barrier(
            qz in 0.3f64..1.0,
            xx in -2.0f64..2.0, xy in -2.0f64..2.0, xz in -2.0f64..2.0,
            frac in 0.05f64..0.95,
        ) {
            let s = Hypersurface::<3>::sphere(vector![0.0, 0.0, 1.5], 1.0).unwrap();
            let q = vector![0.0, 0.0, qz * 0.45];
            let fp = closest_point(&s, &q).unwrap();
            let eps = frac * fp.dist;
            let (shifted, tfp) = translated_distance(&s, &fp, eps).unwrap();
            prop_assert!((tfp.dist - (fp.dist - eps)).abs() < 1e-12);
            let x = vector![xx, xy, xz];
            let dx = distance(&s, &x).unwrap();
            let dex = distance(&shifted, &x).unwrap();
            prop_assert!(dx <= dex + eps + 1e-12);
        }

        /// The ambient gradient is a unit vector off the cut locus.
        #[test]
        fn gradient_is_unit(
            qx in -2.0f64..2.0, qy in -2.0f64..2.0, qz in 0.2f64..2.0,
        ) {
            let s = Hypersurface::<3>::sphere(vector![0.0, 0.0, -1.0], 0.7).unwrap();
            let q = vector![qx, qy, qz];
            if let Ok(jet) = distance_jet(&s, &q) {
                prop_assert!((jet.gradient.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
