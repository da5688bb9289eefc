//! Curvature of discrete surfaces by local quadric fitting.
//!
//! At a mesh vertex we build a tangent frame from the incident-cell normal,
//! express the two-ring as a height field over the tangent plane, fit a full
//! quadric by least squares, and read the shape operator off the fitted jet.
//! The first-order terms of the fit absorb the error in the estimated
//! normal, so the curvatures converge at second order in the mesh size.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};

use super::{orient_toward, orthonormal_complement, CurvatureRecord, GeomError, MeshData};
use crate::{Scalar, Vector};

/// Principal curvature record at mesh vertex `v`, normal aligned with
/// `toward` (an ambient direction, typically `query - foot`).
pub fn vertex_curvature<const D: usize>(
    mesh: &MeshData<D>,
    v: usize,
    toward: &Vector<D>,
) -> Result<CurvatureRecord<D>, GeomError> {
    if v >= mesh.vertex_count() {
        return Err(GeomError::BadVertex(v));
    }
    let nu = mesh.vertex_normal(v);
    if nu.norm() == 0.0 {
        return Err(GeomError::DegenerateNeighborhood(v));
    }
    let record = if D == 3 {
        fit_surface(mesh, v, &nu)?
    } else {
        fit_curve(mesh, v, &nu)?
    };
    orient_toward(record, toward)
}

/// `h(u, w) = A u^2 / 2 + B u w + C w^2 / 2 + p u + q w` over the tangent
/// plane, then the graph shape operator at the fitted gradient.
fn fit_surface<const D: usize>(
    mesh: &MeshData<D>,
    v: usize,
    nu: &Vector<D>,
) -> Result<CurvatureRecord<D>, GeomError> {
    let ring = mesh.two_ring(v);
    if ring.len() < 5 {
        return Err(GeomError::DegenerateNeighborhood(v));
    }
    let frame = orthonormal_complement(nu);
    let (e1, e2) = (frame[0], frame[1]);
    let origin = mesh.vertices[v];
    let mut a = DMatrix::<Scalar>::zeros(ring.len(), 5);
    let mut b = DVector::<Scalar>::zeros(ring.len());
    for (row, &j) in ring.iter().enumerate() {
        let rel = mesh.vertices[j] - origin;
        let (u, w, h) = (rel.dot(&e1), rel.dot(&e2), rel.dot(nu));
        a[(row, 0)] = 0.5 * u * u;
        a[(row, 1)] = u * w;
        a[(row, 2)] = 0.5 * w * w;
        a[(row, 3)] = u;
        a[(row, 4)] = w;
        b[row] = h;
    }
    let scale = a.amax().max(1e-300);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12 * scale)
        .map_err(|_| GeomError::DegenerateNeighborhood(v))?;
    let hess = Matrix2::new(coef[0], coef[1], coef[1], coef[2]);
    let grad = Vector2::new(coef[3], coef[4]);
    // Shape operator of a graph: S = P^{-1} Hess / s with P = I + g g^T and
    // s = sqrt(1 + |g|^2). Symmetrize as M = P^{-1/2} Hess P^{-1/2} / s.
    let g_sq = grad.norm_squared();
    let s = (1.0 + g_sq).sqrt();
    let p_inv_half = if g_sq > 0.0 {
        let ghat = grad / g_sq.sqrt();
        Matrix2::identity() - ghat * ghat.transpose() * (1.0 - 1.0 / s)
    } else {
        Matrix2::identity()
    };
    let m = p_inv_half * hess * p_inv_half / s;
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(Scalar, Vector<D>)> = Vec::with_capacity(2);
    for k in 0..2 {
        let y = eig.eigenvectors.column(k);
        let x = p_inv_half * Vector2::new(y[0], y[1]);
        let dir = (e1 * x[0] + e2 * x[1]).normalize();
        pairs.push((eig.eigenvalues[k], dir));
    }
    Ok(CurvatureRecord::assemble(origin, *nu, pairs))
}

/// Parabola fit `h(u) = A u^2 / 2 + B u` along a polyline, curvature
/// `A / (1 + B^2)^{3/2}`.
fn fit_curve<const D: usize>(
    mesh: &MeshData<D>,
    v: usize,
    nu: &Vector<D>,
) -> Result<CurvatureRecord<D>, GeomError> {
    let ring = mesh.two_ring(v);
    if ring.len() < 2 {
        return Err(GeomError::DegenerateNeighborhood(v));
    }
    // Tangent: nu rotated a quarter turn (only the leading two coordinates
    // matter in D = 2).
    let mut tangent = Vector::<D>::zeros();
    tangent[0] = -nu[1];
    tangent[1] = nu[0];
    let origin = mesh.vertices[v];
    let mut a = DMatrix::<Scalar>::zeros(ring.len(), 2);
    let mut b = DVector::<Scalar>::zeros(ring.len());
    for (row, &j) in ring.iter().enumerate() {
        let rel = mesh.vertices[j] - origin;
        let u = rel.dot(&tangent);
        a[(row, 0)] = 0.5 * u * u;
        a[(row, 1)] = u;
        b[row] = rel.dot(nu);
    }
    let scale = a.amax().max(1e-300);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12 * scale)
        .map_err(|_| GeomError::DegenerateNeighborhood(v))?;
    let kappa = coef[0] / (1.0 + coef[1] * coef[1]).powf(1.5);
    Ok(CurvatureRecord::assemble(origin, *nu, vec![(kappa, tangent)]))
}
