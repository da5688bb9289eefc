//! Discrete hypersurfaces: triangle meshes in `R^3`, polylines in `R^2`.
//!
//! Cells are index arrays of length `D`: segments for `D = 2`, triangles for
//! `D = 3`. Topology (rings, boundary flags) is built once at construction
//! and survives vertex motion, which is how the flow layer updates meshes.
//!
//! Discrete operators: cotangent Laplacian with barycentric dual areas for
//! triangle meshes, arclength second differences for polylines. Applied to
//! the position field these produce the mean curvature vector, which the
//! tests validate against round spheres and circles.

use std::collections::HashMap;

use super::{CatenoidProfile, GeomError};
use crate::{Scalar, Vector};

#[derive(Debug, Clone)]
struct Topology {
    neighbors: Vec<Vec<usize>>,
    vertex_cells: Vec<Vec<usize>>,
    boundary: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct MeshData<const D: usize> {
    pub vertices: Vec<Vector<D>>,
    pub cells: Vec<[usize; D]>,
    topo: Topology,
}

impl<const D: usize> MeshData<D> {
    pub fn new(vertices: Vec<Vector<D>>, cells: Vec<[usize; D]>) -> Result<Self, GeomError> {
        if D != 2 && D != 3 {
            return Err(GeomError::UnsupportedDimension(D));
        }
        if cells.is_empty() {
            return Err(GeomError::EmptyMesh);
        }
        for cell in &cells {
            for &v in cell.iter() {
                if v >= vertices.len() {
                    return Err(GeomError::BadIndex(v));
                }
            }
        }
        let scale = bbox_diagonal(&vertices).max(1e-300);
        // Degeneracy: area for triangles, length for segments.
        for (ci, cell) in cells.iter().enumerate() {
            let measure = cell_measure(&vertices, cell);
            let floor = if D == 3 { 1e-14 * scale * scale } else { 1e-14 * scale };
            if measure < floor {
                return Err(GeomError::DegenerateCell(ci));
            }
        }
        let topo = build_topology(&vertices, &cells)?;
        Ok(Self { vertices, cells, topo })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.topo.boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.topo.boundary[v])
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.topo.neighbors[v]
    }

    /// Unique vertices within two rings of `v`, excluding `v` itself.
    pub fn two_ring(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &a in &self.topo.neighbors[v] {
            if !out.contains(&a) {
                out.push(a);
            }
            for &b in &self.topo.neighbors[a] {
                if b != v && !out.contains(&b) {
                    out.push(b);
                }
            }
        }
        out
    }

    pub fn bbox_diagonal(&self) -> Scalar {
        bbox_diagonal(&self.vertices)
    }

    pub fn nearest_vertex(&self, q: &Vector<D>) -> usize {
        let mut best = 0usize;
        let mut best_d = Scalar::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (v - q).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn translated(&self, t: &Vector<D>) -> Self {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v += t;
        }
        m
    }

    /// Applies a rigid (or at least orientation-preserving) map to vertices.
    pub fn transformed(&self, f: impl Fn(&Vector<D>) -> Vector<D>) -> Self {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v = f(v);
        }
        m
    }

    /// Replaces vertex positions, keeping topology (for flow stepping).
    pub fn set_vertices(&mut self, vertices: Vec<Vector<D>>) {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        self.vertices = vertices;
    }

    /// Dual cell measures. Triangle meshes use mixed Voronoi areas (the
    /// circumcentric cell, clamped inside obtuse triangles), which pair with
    /// cotangent weights to give a consistent Laplacian even at irregular
    /// valences. Polylines use half the incident segment lengths. Either way
    /// the dual measures partition the total measure exactly.
    pub fn vertex_areas(&self) -> Vec<Scalar> {
        let mut areas = vec![0.0; self.vertices.len()];
        if D == 2 {
            for cell in &self.cells {
                let m = cell_measure(&self.vertices, cell) / 2.0;
                areas[cell[0]] += m;
                areas[cell[1]] += m;
            }
            return areas;
        }
        for cell in &self.cells {
            let p = [
                self.vertices[cell[0]],
                self.vertices[cell[1]],
                self.vertices[cell[2]],
            ];
            let area = cell_measure(&self.vertices, cell);
            // cots[c]: cotangent of the interior angle at corner c.
            let mut cots = [0.0; 3];
            let mut obtuse = usize::MAX;
            for c in 0..3 {
                let u = p[(c + 1) % 3] - p[c];
                let v = p[(c + 2) % 3] - p[c];
                let cross = cross_norm(&u, &v);
                let dot = u.dot(&v);
                cots[c] = if cross > 0.0 { dot / cross } else { 0.0 };
                if dot < 0.0 {
                    obtuse = c;
                }
            }
            if obtuse == usize::MAX {
                for c in 0..3 {
                    let lj = (p[(c + 2) % 3] - p[c]).norm_squared();
                    let lk = (p[(c + 1) % 3] - p[c]).norm_squared();
                    areas[cell[c]] += 0.125 * (lj * cots[(c + 1) % 3] + lk * cots[(c + 2) % 3]);
                }
            } else {
                for c in 0..3 {
                    areas[cell[c]] += if c == obtuse { area / 2.0 } else { area / 4.0 };
                }
            }
        }
        areas
    }

    pub fn total_measure(&self) -> Scalar {
        self.cells.iter().map(|c| cell_measure(&self.vertices, c)).sum()
    }

    /// Outward vertex normals (area-weighted cell normals; winding decides
    /// what "outward" means).
    pub fn vertex_normals(&self) -> Vec<Vector<D>> {
        let mut normals = vec![Vector::<D>::zeros(); self.vertices.len()];
        for cell in &self.cells {
            let n = cell_normal(&self.vertices, cell);
            for &v in cell.iter() {
                normals[v] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Normal at one vertex from its incident cells only (measure-weighted).
    pub fn vertex_normal(&self, v: usize) -> Vector<D> {
        let mut n = Vector::<D>::zeros();
        for &ci in &self.topo.vertex_cells[v] {
            n += cell_normal(&self.vertices, &self.cells[ci]);
        }
        let len = n.norm();
        if len > 0.0 {
            n /= len;
        }
        n
    }

    /// Discrete Laplace-Beltrami of a vertex field. Entries at boundary
    /// vertices are zero; callers are expected to skip them.
    pub fn laplacian(&self, values: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(values.len(), self.vertices.len());
        let areas = self.vertex_areas();
        let mut lap = vec![0.0; self.vertices.len()];
        if D == 3 {
            for cell in &self.cells {
                // For each corner, the cotangent weights the opposite edge.
                for c in 0..3 {
                    let (i, j, k) = (cell[c], cell[(c + 1) % 3], cell[(c + 2) % 3]);
                    let u = self.vertices[j] - self.vertices[i];
                    let v = self.vertices[k] - self.vertices[i];
                    let cross = cross_norm(&u, &v);
                    if cross <= 0.0 {
                        continue;
                    }
                    let cot = u.dot(&v) / cross;
                    let w = 0.5 * cot;
                    lap[j] += w * (values[k] - values[j]);
                    lap[k] += w * (values[j] - values[k]);
                }
            }
        } else {
            for i in 0..self.vertices.len() {
                if self.topo.boundary[i] || self.topo.neighbors[i].len() != 2 {
                    continue;
                }
                let (a, b) = (self.topo.neighbors[i][0], self.topo.neighbors[i][1]);
                let la = (self.vertices[a] - self.vertices[i]).norm();
                let lb = (self.vertices[b] - self.vertices[i]).norm();
                lap[i] = 2.0 / (la + lb)
                    * ((values[a] - values[i]) / la + (values[b] - values[i]) / lb);
            }
            // Polyline entries are final (already divided by the dual
            // measure); zero the boundary and return.
            for (i, l) in lap.iter_mut().enumerate() {
                if self.topo.boundary[i] {
                    *l = 0.0;
                }
            }
            return lap;
        }
        for i in 0..lap.len() {
            if self.topo.boundary[i] || areas[i] <= 0.0 {
                lap[i] = 0.0;
            } else {
                lap[i] /= areas[i];
            }
        }
        lap
    }

    /// Laplacian applied to positions: the discrete mean curvature vector.
    pub fn mean_curvature_vectors(&self) -> Vec<Vector<D>> {
        let mut comps: Vec<Vec<Scalar>> = Vec::with_capacity(D);
        for d in 0..D {
            let field: Vec<Scalar> = self.vertices.iter().map(|v| v[d]).collect();
            comps.push(self.laplacian(&field));
        }
        (0..self.vertices.len())
            .map(|i| {
                let mut v = Vector::<D>::zeros();
                for d in 0..D {
                    v[d] = comps[d][i];
                }
                v
            })
            .collect()
    }

    /// Tangential gradient of a vertex field: the gradient of the linear
    /// interpolant on each cell, averaged to vertices with cell-measure
    /// weights. Exact for fields that are affine over a flat mesh.
    pub fn vertex_gradients(&self, values: &[Scalar]) -> Vec<Vector<D>> {
        assert_eq!(values.len(), self.vertices.len());
        let mut acc = vec![Vector::<D>::zeros(); self.vertices.len()];
        let mut weight = vec![0.0; self.vertices.len()];
        for cell in &self.cells {
            let measure = cell_measure(&self.vertices, cell);
            let grad = if D == 2 {
                let e = self.vertices[cell[1]] - self.vertices[cell[0]];
                e * ((values[cell[1]] - values[cell[0]]) / e.norm_squared())
            } else {
                // grad u = sum_i u_i (n x e_i) / 2A with e_i the edge
                // opposite corner i, counterclockwise.
                let (p0, p1, p2) =
                    (self.vertices[cell[0]], self.vertices[cell[1]], self.vertices[cell[2]]);
                // cell_normal carries the triangle area as its magnitude.
                let nrm = cell_normal(&self.vertices, cell);
                let two_a = 2.0 * nrm.norm();
                let nh = nrm.normalize();
                (cross(&nh, &(p2 - p1)) * values[cell[0]]
                    + cross(&nh, &(p0 - p2)) * values[cell[1]]
                    + cross(&nh, &(p1 - p0)) * values[cell[2]])
                    / two_a
            };
            for &v in cell.iter() {
                acc[v] += grad * measure;
                weight[v] += measure;
            }
        }
        for (g, w) in acc.iter_mut().zip(&weight) {
            *g /= *w;
        }
        acc
    }

    pub fn min_edge_length(&self) -> Scalar {
        let mut best = Scalar::INFINITY;
        for cell in &self.cells {
            for a in 0..D {
                for b in a + 1..D {
                    best = best.min((self.vertices[cell[a]] - self.vertices[cell[b]]).norm());
                }
            }
        }
        best
    }

    /// Smallest interior angle over all triangles, in degrees (`D = 3`).
    pub fn min_angle_deg(&self) -> Scalar {
        if D != 3 {
            return 180.0;
        }
        let mut best: Scalar = 180.0;
        for cell in &self.cells {
            for c in 0..3 {
                let (i, j, k) = (cell[c], cell[(c + 1) % 3], cell[(c + 2) % 3]);
                let u = (self.vertices[j] - self.vertices[i]).normalize();
                let v = (self.vertices[k] - self.vertices[i]).normalize();
                best = best.min(u.dot(&v).clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        best
    }
}

fn bbox_diagonal<const D: usize>(vertices: &[Vector<D>]) -> Scalar {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        for d in 0..D {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    (hi - lo).norm()
}

fn cell_measure<const D: usize>(vertices: &[Vector<D>], cell: &[usize; D]) -> Scalar {
    if D == 2 {
        (vertices[cell[1]] - vertices[cell[0]]).norm()
    } else {
        let u = vertices[cell[1]] - vertices[cell[0]];
        let v = vertices[cell[2]] - vertices[cell[0]];
        0.5 * cross_norm(&u, &v)
    }
}

/// Norm of the cross product of two `D = 3` vectors (generic signature so
/// the mesh code compiles for both ambient dimensions).
fn cross_norm<const D: usize>(u: &Vector<D>, v: &Vector<D>) -> Scalar {
    debug_assert!(D == 3);
    let x = u[1] * v[2] - u[2] * v[1];
    let y = u[2] * v[0] - u[0] * v[2];
    let z = u[0] * v[1] - u[1] * v[0];
    (x * x + y * y + z * z).sqrt()
}

/// Cross product of two `D = 3` vectors (generic signature, same reason).
fn cross<const D: usize>(u: &Vector<D>, v: &Vector<D>) -> Vector<D> {
    debug_assert!(D == 3);
    let mut w = Vector::<D>::zeros();
    w[0] = u[1] * v[2] - u[2] * v[1];
    w[1] = u[2] * v[0] - u[0] * v[2];
    w[2] = u[0] * v[1] - u[1] * v[0];
    w
}

/// Cell normal: triangle cross product, or the 90-degree rotation of a
/// segment tangent (outward for counterclockwise winding), length-weighted.
fn cell_normal<const D: usize>(vertices: &[Vector<D>], cell: &[usize; D]) -> Vector<D> {
    let mut n = Vector::<D>::zeros();
    if D == 3 {
        let u = vertices[cell[1]] - vertices[cell[0]];
        let v = vertices[cell[2]] - vertices[cell[0]];
        n[0] = u[1] * v[2] - u[2] * v[1];
        n[1] = u[2] * v[0] - u[0] * v[2];
        n[2] = u[0] * v[1] - u[1] * v[0];
        n *= 0.5;
    } else {
        let t = vertices[cell[1]] - vertices[cell[0]];
        n[0] = t[1];
        n[1] = -t[0];
    }
    n
}

fn build_topology<const D: usize>(
    vertices: &[Vector<D>],
    cells: &[[usize; D]],
) -> Result<Topology, GeomError> {
    let nv = vertices.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut vertex_cells: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut boundary = vec![false; nv];
    let push_nb = |neighbors: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        if !neighbors[a].contains(&b) {
            neighbors[a].push(b);
        }
    };
    if D == 3 {
        // Directed-edge census: a manifold oriented mesh sees every interior
        // undirected edge once per direction.
        let mut edges: HashMap<(usize, usize), (usize, i32, i32)> = HashMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            vertex_cells[cell[0]].push(ci);
            vertex_cells[cell[1]].push(ci);
            vertex_cells[cell[2]].push(ci);
            for e in 0..3 {
                let (a, b) = (cell[e], cell[(e + 1) % 3]);
                push_nb(&mut neighbors, a, b);
                push_nb(&mut neighbors, b, a);
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_insert((0, 0, 0));
                entry.0 += 1;
                if a < b {
                    entry.1 += 1;
                } else {
                    entry.2 += 1;
                }
            }
        }
        for (&(a, b), &(count, fwd, bwd)) in &edges {
            if count > 2 {
                return Err(GeomError::NonManifold(format!(
                    "edge {a}-{b} bounds {count} faces"
                )));
            }
            if count == 2 && (fwd != 1 || bwd != 1) {
                return Err(GeomError::InconsistentOrientation(a, b));
            }
            if count == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
    } else {
        for (ci, cell) in cells.iter().enumerate() {
            vertex_cells[cell[0]].push(ci);
            vertex_cells[cell[1]].push(ci);
            push_nb(&mut neighbors, cell[0], cell[1]);
            push_nb(&mut neighbors, cell[1], cell[0]);
        }
        for v in 0..nv {
            match vertex_cells[v].len() {
                0 => {
                    return Err(GeomError::NonManifold(format!("isolated vertex {v}")));
                }
                1 => boundary[v] = true,
                2 => {}
                k => {
                    return Err(GeomError::NonManifold(format!(
                        "vertex {v} bounds {k} segments"
                    )));
                }
            }
        }
        return Ok(Topology { neighbors, vertex_cells, boundary });
    }
    for v in 0..nv {
        if vertex_cells[v].is_empty() {
            return Err(GeomError::NonManifold(format!("isolated vertex {v}")));
        }
    }
    Ok(Topology { neighbors, vertex_cells, boundary })
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Icosphere: subdivided icosahedron projected onto the sphere.
/// `10 * 4^subdivisions + 2` vertices, outward winding.
pub fn icosphere(center: Vector<3>, radius: Scalar, subdivisions: usize) -> MeshData<3> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<Vector<3>> = raw
        .iter()
        .map(|p| Vector::<3>::new(p[0], p[1], p[2]).normalize())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next: Vec<[usize; 3]> = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector<3>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = (verts[a] + verts[b]).normalize();
                verts.push(m);
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    // Enforce outward winding, then place.
    for f in &mut faces {
        let n = cell_normal(&verts, f);
        let centroid = (verts[f[0]] + verts[f[1]] + verts[f[2]]) / 3.0;
        if n.dot(&centroid) < 0.0 {
            f.swap(1, 2);
        }
    }
    for v in &mut verts {
        *v = center + *v * radius;
    }
    MeshData::new(verts, faces).expect("icosphere construction is valid")
}

/// Flat triangulated disk in the plane `z = height`, winding so normals
/// point along `+z`. `rings` concentric rings of `wedges` vertices.
pub fn disk(center_xy: [Scalar; 2], height: Scalar, radius: Scalar, rings: usize, wedges: usize) -> MeshData<3> {
    assert!(rings >= 1 && wedges >= 3);
    let mut verts: Vec<Vector<3>> = vec![Vector::<3>::new(center_xy[0], center_xy[1], height)];
    for ring in 1..=rings {
        let r = radius * ring as Scalar / rings as Scalar;
        for w in 0..wedges {
            let th = 2.0 * std::f64::consts::PI * w as Scalar / wedges as Scalar;
            verts.push(Vector::<3>::new(
                center_xy[0] + r * th.cos(),
                center_xy[1] + r * th.sin(),
                height,
            ));
        }
    }
    let idx = |ring: usize, w: usize| -> usize {
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * wedges + (w % wedges)
        }
    };
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for w in 0..wedges {
        faces.push([0, idx(1, w), idx(1, w + 1)]);
    }
    for ring in 1..rings {
        for w in 0..wedges {
            let (a, b) = (idx(ring, w), idx(ring, w + 1));
            let (c, d) = (idx(ring + 1, w), idx(ring + 1, w + 1));
            faces.push([a, c, d]);
            faces.push([a, d, b]);
        }
    }
    MeshData::new(verts, faces).expect("disk construction is valid")
}

/// Closed counterclockwise circle polyline (outward normals).
pub fn circle_polyline(center: Vector<2>, radius: Scalar, segments: usize) -> MeshData<2> {
    assert!(segments >= 3);
    let verts: Vec<Vector<2>> = (0..segments)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as Scalar / segments as Scalar;
            center + Vector::<2>::new(radius * th.cos(), radius * th.sin())
        })
        .collect();
    let cells: Vec<[usize; 2]> = (0..segments).map(|i| [i, (i + 1) % segments]).collect();
    MeshData::new(verts, cells).expect("circle construction is valid")
}

/// Open straight polyline from `a` to `b` with `count` vertices.
pub fn segment_polyline(a: Vector<2>, b: Vector<2>, count: usize) -> MeshData<2> {
    assert!(count >= 3);
    let verts: Vec<Vector<2>> = (0..count)
        .map(|i| a + (b - a) * (i as Scalar / (count - 1) as Scalar))
        .collect();
    let cells: Vec<[usize; 2]> = (0..count - 1).map(|i| [i, i + 1]).collect();
    MeshData::new(verts, cells).expect("segment construction is valid")
}

/// Surface of revolution over a profile slice `z in [z_lo, z_hi]`, axis
/// along the last coordinate through `center`. Outward winding.
pub fn revolve_profile(
    profile: &CatenoidProfile,
    center: Vector<3>,
    z_lo: Scalar,
    z_hi: Scalar,
    rings: usize,
    wedges: usize,
) -> Result<MeshData<3>, GeomError> {
    if profile.n != 2 {
        return Err(GeomError::InvalidParameter(
            "revolve_profile builds 2-surfaces; profile.n must be 2".into(),
        ));
    }
    if !(z_lo < z_hi) || z_lo.abs() > profile.z_max || z_hi.abs() > profile.z_max {
        return Err(GeomError::InvalidParameter(format!(
            "revolution slice [{z_lo}, {z_hi}] outside profile table"
        )));
    }
    assert!(rings >= 2 && wedges >= 3);
    let s_of = |z: Scalar| -> Scalar {
        // Arclength of the signed height via lookup on the half-branch.
        let (r, _) = profile.r_phi_at(z).expect("z validated above");
        profile
            .locate_s(r, z)
            .expect("on-profile point must locate")
    };
    let (s_lo, s_hi) = (s_of(z_lo), s_of(z_hi));
    let mut verts: Vec<Vector<3>> = Vec::with_capacity(rings * wedges);
    for i in 0..rings {
        let s = s_lo + (s_hi - s_lo) * i as Scalar / (rings - 1) as Scalar;
        let (z, r, _) = profile.eval_signed(s);
        for w in 0..wedges {
            let th = 2.0 * std::f64::consts::PI * w as Scalar / wedges as Scalar;
            verts.push(center + Vector::<3>::new(r * th.cos(), r * th.sin(), z));
        }
    }
    let idx = |ring: usize, w: usize| ring * wedges + (w % wedges);
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for ring in 0..rings - 1 {
        for w in 0..wedges {
            let (a, b) = (idx(ring, w), idx(ring, w + 1));
            let (c, d) = (idx(ring + 1, w), idx(ring + 1, w + 1));
            faces.push([a, c, d]);
            faces.push([a, d, b]);
        }
    }
    // Fix winding so normals point away from the axis.
    for f in &mut faces {
        let n = cell_normal(&verts, f);
        let centroid = (verts[f[0]] + verts[f[1]] + verts[f[2]]) / 3.0;
        let radial = Vector::<3>::new(centroid[0] - center[0], centroid[1] - center[1], 0.0);
        if n.dot(&radial) < 0.0 {
            f.swap(1, 2);
        }
    }
    MeshData::new(verts, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::vector;

    #[test]
    fn icosphere_counts_and_radius() {
        for (k, expect) in [(0usize, 12usize), (1, 42), (2, 162), (4, 2562)] {
            let m = icosphere(Vector::<3>::zeros(), 1.0, k);
            assert_eq!(m.vertex_count(), expect);
            for v in &m.vertices {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
            assert!(m.interior_vertices().count() == m.vertex_count());
        }
    }

    /// The discrete mean curvature vector of a round sphere points inward
    /// with magnitude 2/R (within mesh tolerance).
    #[test]
    fn sphere_mean_curvature_vector() {
        let m = icosphere(Vector::<3>::zeros(), 1.0, 3);
        let h = m.mean_curvature_vectors();
        for (i, v) in m.vertices.iter().enumerate() {
            let expect = -v * 2.0;
            let err = (h[i] - expect).norm() / 2.0;
            assert!(err < 0.02, "vertex {i}: H = {:?}, relative error {err}", h[i]);
        }
        // Scales like 1/R.
        let m2 = icosphere(vector![1.0, 2.0, 3.0], 2.0, 3);
        let h2 = m2.mean_curvature_vectors();
        for (i, v) in m2.vertices.iter().enumerate() {
            let expect = -(v - vector![1.0, 2.0, 3.0]) / 2.0 * 2.0 / 2.0;
            assert!((h2[i] - expect).norm() / expect.norm() < 0.02);
        }
    }

    /// Circle polyline: curvature vector magnitude 1/r inward, within 1%.
    #[test]
    fn circle_curvature_vector() {
        let m = circle_polyline(Vector::<2>::zeros(), 2.0, 256);
        let h = m.mean_curvature_vectors();
        for (i, v) in m.vertices.iter().enumerate() {
            let expect = -v / v.norm_squared();
            let err = (h[i] - expect).norm() * 2.0;
            assert!(err < 0.01, "vertex {i}: error {err}");
        }
    }

    /// Cotangent Laplacian of an ambient-linear field vanishes on any mesh
    /// patch interior (linear reproduction).
    #[test]
    fn laplacian_kills_linear_fields() {
        let m = disk([0.0, 0.0], 0.0, 1.0, 8, 24);
        let f: Vec<f64> = m.vertices.iter().map(|v| 3.0 * v[0] - 2.0 * v[1] + 0.5).collect();
        let lap = m.laplacian(&f);
        for i in m.interior_vertices() {
            assert!(lap[i].abs() < 1e-10, "interior vertex {i}: {}", lap[i]);
        }
    }

    /// Laplacian of |x|^2 on a flat disk is 4 (twice the intrinsic
    /// dimension) away from the boundary.
    #[test]
    fn laplacian_quadratic_field() {
        let m = disk([0.0, 0.0], 0.0, 1.0, 16, 48);
        let f: Vec<f64> = m.vertices.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
        let lap = m.laplacian(&f);
        for i in m.interior_vertices() {
            assert!((lap[i] - 4.0).abs() < 0.05, "vertex {i}: {}", lap[i]);
        }
    }

    #[test]
    fn disk_boundary_detection() {
        let m = disk([0.0, 0.0], 0.5, 2.0, 4, 12);
        let nb = (0..m.vertex_count()).filter(|&v| m.is_boundary(v)).count();
        assert_eq!(nb, 12, "outer ring only");
        // The triangulation fills the inscribed 12-gon exactly:
        // area = (N/2) R^2 sin(2 pi / N) = 6 * 4 * 0.5 = 12.
        assert!((m.total_measure() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_areas_partition_measure() {
        let m = icosphere(Vector::<3>::zeros(), 1.0, 2);
        let total: f64 = m.vertex_areas().iter().sum();
        assert!((total - m.total_measure()).abs() < 1e-12);
        // Flat faces undershoot 4 pi by about 3/4^k; at subdivision 3 the
        // deficit is near 0.047.
        let fine = icosphere(Vector::<3>::zeros(), 1.0, 3);
        let deficit = 4.0 * std::f64::consts::PI - fine.total_measure();
        assert!(deficit > 0.0 && deficit < 0.08, "deficit {deficit}");
    }

    #[test]
    fn manifold_violations_rejected() {
        // Three triangles sharing one edge.
        let verts = vec![
            vector![0.0, 0.0, 0.0],
            vector![1.0, 0.0, 0.0],
            vector![0.0, 1.0, 0.0],
            vector![0.0, 0.0, 1.0],
            vector![0.5, -1.0, 0.0],
        ];
        let cells = vec![[0usize, 1, 2], [1, 0, 3], [0, 1, 4]];
        assert!(matches!(
            MeshData::new(verts, cells),
            Err(GeomError::NonManifold(_))
        ));
    }

    #[test]
    fn inconsistent_winding_rejected() {
        let verts = vec![
            vector![0.0, 0.0, 0.0],
            vector![1.0, 0.0, 0.0],
            vector![0.0, 1.0, 0.0],
            vector![1.0, 1.0, 0.5],
        ];
        // Second triangle repeats edge (0,1) in the same direction.
        let cells = vec![[0usize, 1, 2], [0, 1, 3]];
        assert!(matches!(
            MeshData::new(verts, cells),
            Err(GeomError::InconsistentOrientation(0, 1))
        ));
    }

    #[test]
    fn degenerate_cell_rejected() {
        let verts = vec![
            vector![0.0, 0.0, 0.0],
            vector![1.0, 0.0, 0.0],
            vector![2.0, 0.0, 0.0],
            vector![0.0, 1.0, 0.0],
        ];
        let cells = vec![[0usize, 1, 3], [0, 1, 2]];
        assert!(matches!(
            MeshData::new(verts, cells),
            Err(GeomError::DegenerateCell(1))
        ));
    }

    #[test]
    fn revolve_catenoid_is_near_minimal() {
        let p = CatenoidProfile::solve(2, 1.0, 4.0).unwrap();
        let m = revolve_profile(&p, Vector::<3>::zeros(), -1.2, 1.2, 40, 48).unwrap();
        let h = m.mean_curvature_vectors();
        let mut worst: f64 = 0.0;
        for i in m.interior_vertices() {
            worst = worst.max(h[i].norm());
        }
        // Discrete mean curvature of a minimal surface tends to zero with
        // refinement; this resolution lands comfortably under 0.05/waist.
        assert!(worst < 0.05, "worst discrete |H| = {worst}");
    }

    #[test]
    fn polyline_boundary_and_laplacian() {
        let m = segment_polyline(vector![0.0, 0.0], vector![4.0, 0.0], 33);
        assert!(m.is_boundary(0) && m.is_boundary(32));
        assert_eq!(m.interior_vertices().count(), 31);
        // Second difference of x^2 along the line is 2.
        let f: Vec<f64> = m.vertices.iter().map(|v| v[0] * v[0]).collect();
        let lap = m.laplacian(&f);
        for i in m.interior_vertices() {
            assert!((lap[i] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn vertex_gradients_reproduce_affine_fields() {
        let m = disk([0.0, 0.0], 0.0, 2.0, 6, 24);
        let f: Vec<f64> = m.vertices.iter().map(|v| 0.3 * v[0] - 1.1 * v[1] + 4.0).collect();
        let g = m.vertex_gradients(&f);
        for gi in &g {
            assert!((gi - vector![0.3, -1.1, 0.0]).norm() < 1e-12, "got {gi:?}");
        }

        let line = segment_polyline(vector![0.0, 1.0], vector![3.0, 1.0], 16);
        let f: Vec<f64> = line.vertices.iter().map(|v| 2.0 * v[0]).collect();
        let g = line.vertex_gradients(&f);
        for gi in &g {
            assert!((gi - vector![2.0, 0.0]).norm() < 1e-12);
        }
    }

    #[test]
    fn vertex_gradients_track_smooth_fields_on_a_sphere() {
        let m = icosphere(Vector::<3>::zeros(), 1.0, 3);
        // grad_Gamma x0 on the unit sphere is e0 - x0 x.
        let f: Vec<f64> = m.vertices.iter().map(|v| v[0]).collect();
        let g = m.vertex_gradients(&f);
        for (v, gi) in m.vertices.iter().zip(&g) {
            let exact = vector![1.0, 0.0, 0.0] - v * v[0];
            assert!((gi - exact).norm() < 0.02, "err {}", (gi - exact).norm());
        }
    }
}
