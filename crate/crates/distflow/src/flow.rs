//! Surface evolution and the heat operator along a flowing surface.
//!
//! Analytic kinds evolve in closed form: spheres and round cylinders obey
//! the exact radius law `r(t)^2 = r0^2 - 2k t` (with `k` the dimension of
//! the shrinking factor), minimal kinds stand still, and a drifting surface
//! translates rigidly. Meshes evolve by explicit Euler steps of the
//! discrete mean curvature vector under a CFL-limited step.
//!
//! The operator under study is
//!
//! ```text
//! box u = (d/dt - lap_Gamma) u,
//! ```
//!
//! where `d/dt` follows material points of the flowing surface `Gamma`. It
//! is evaluated two independent ways:
//!
//! - the jet route: fields expose exact value/gradient/Hessian/time jets,
//!   and the surface contributes its curvature record, so `box u` comes out
//!   in closed form (the mean curvature terms of the material derivative
//!   and of the tangential Laplacian cancel);
//! - the numeric route: geodesic finite differences for the tangential
//!   Laplacian plus a centered difference along the material trajectory.
//!
//! Tests pin both routes against each other and against identities that
//! hold exactly, e.g. `box (|x - x0|^2 + 2nt) = 0` on any mean curvature
//! flow of an `n`-surface.

use thiserror::Error;

use crate::dist::{closest_point, distance, distance_jet, DistError};
use crate::geom::{CurvatureRecord, GeomError, Hypersurface, MeshData};
use crate::{Matrix, Scalar, Vector};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("surface is extinct at t = {0}")]
    Extinct(f64),
    #[error("closed-form evolution unavailable: {0}")]
    UnsupportedEvolution(String),
    #[error("field requires a positive base, got {0:.3e}")]
    NonPositiveBase(f64),
    #[error("mesh quality collapsed: minimum angle {0:.2} degrees")]
    MeshQuality(f64),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// How a surface moves in time.
#[derive(Debug, Clone)]
pub enum MotionLaw<const D: usize> {
    Static,
    MeanCurvature,
    /// Rigid translation at constant velocity (not a mean curvature flow;
    /// used as a control that is meant to violate flow-only estimates).
    Drift(Vector<D>),
}

/// The surface at absolute time `t`, where `initial` is the state at
/// `t = 0`. Exact for analytic kinds; meshes need [`MeshFlow`].
pub fn evolve_exact<const D: usize>(
    initial: &Hypersurface<D>,
    law: &MotionLaw<D>,
    t: Scalar,
) -> Result<Hypersurface<D>, FlowError> {
    match law {
        MotionLaw::Static => Ok(initial.clone()),
        MotionLaw::Drift(v) => Ok(initial.translated(&(v * t))),
        MotionLaw::MeanCurvature => match initial {
            Hypersurface::Hyperplane(_) | Hypersurface::Catenoid(_) => Ok(initial.clone()),
            Hypersurface::Sphere(s) => {
                let k = (D - 1) as Scalar;
                let r_sq = s.radius * s.radius - 2.0 * k * t;
                if r_sq <= 0.0 {
                    return Err(FlowError::Extinct(t));
                }
                Ok(Hypersurface::sphere(s.center, r_sq.sqrt())?)
            }
            Hypersurface::Cylinder(c) => {
                let k = (c.factor - 1) as Scalar;
                let r_sq = c.radius * c.radius - 2.0 * k * t;
                if r_sq <= 0.0 {
                    return Err(FlowError::Extinct(t));
                }
                Ok(Hypersurface::cylinder(c.center, c.factor, r_sq.sqrt())?)
            }
            Hypersurface::Mesh(_) => Err(FlowError::UnsupportedEvolution(
                "meshes evolve by explicit stepping".into(),
            )),
            Hypersurface::Union(parts) => Ok(Hypersurface::Union(
                parts
                    .iter()
                    .map(|p| evolve_exact(p, law, t))
                    .collect::<Result<_, _>>()?,
            )),
        },
    }
}

/// Position at time `t2` of the surface material point that sits at `x`
/// (on the surface) at time `t1`.
pub fn material_position<const D: usize>(
    initial: &Hypersurface<D>,
    law: &MotionLaw<D>,
    x: &Vector<D>,
    t1: Scalar,
    t2: Scalar,
) -> Result<Vector<D>, FlowError> {
    match law {
        MotionLaw::Static => Ok(*x),
        MotionLaw::Drift(v) => Ok(x + v * (t2 - t1)),
        MotionLaw::MeanCurvature => match initial {
            Hypersurface::Hyperplane(_) | Hypersurface::Catenoid(_) => Ok(*x),
            Hypersurface::Sphere(s) => {
                let (r1, r2) = (radius_of(initial, law, t1)?, radius_of(initial, law, t2)?);
                Ok(s.center + (x - s.center) * (r2 / r1))
            }
            Hypersurface::Cylinder(c) => {
                let (r1, r2) = (radius_of(initial, law, t1)?, radius_of(initial, law, t2)?);
                let mut out = *x;
                for i in 0..c.factor {
                    out[i] = c.center[i] + (x[i] - c.center[i]) * (r2 / r1);
                }
                Ok(out)
            }
            _ => Err(FlowError::UnsupportedEvolution(
                "material trajectories exist in closed form only for round kinds".into(),
            )),
        },
    }
}

fn radius_of<const D: usize>(
    initial: &Hypersurface<D>,
    law: &MotionLaw<D>,
    t: Scalar,
) -> Result<Scalar, FlowError> {
    match evolve_exact(initial, law, t)? {
        Hypersurface::Sphere(s) => Ok(s.radius),
        Hypersurface::Cylinder(c) => Ok(c.radius),
        _ => Err(FlowError::UnsupportedEvolution("no radius".into())),
    }
}

/// Velocity of the surface point carrying the given curvature record.
pub fn law_velocity<const D: usize>(
    record: &CurvatureRecord<D>,
    law: &MotionLaw<D>,
) -> Vector<D> {
    match law {
        MotionLaw::Static => Vector::<D>::zeros(),
        MotionLaw::Drift(v) => *v,
        // The mean curvature vector H nu is orientation-free.
        MotionLaw::MeanCurvature => record.normal * record.mean,
    }
}

// ---------------------------------------------------------------------------
// Ambient space-time fields with exact jets
// ---------------------------------------------------------------------------

/// A scalar field on space-time with an exact first/second-order jet.
pub trait AmbientField<const D: usize> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError>;
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError>;
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError>;
    /// Eulerian time derivative at fixed `x`.
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError>;
}

impl<const D: usize, F: AmbientField<D> + ?Sized> AmbientField<D> for &F {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        (**self).value(x, t)
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        (**self).gradient(x, t)
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        (**self).hessian(x, t)
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        (**self).dt(x, t)
    }
}

/// `dist(x, Sigma_t)` for a surface evolving in closed form.
pub struct DistanceField<'a, const D: usize> {
    pub surface: &'a Hypersurface<D>,
    pub law: MotionLaw<D>,
}

impl<const D: usize> DistanceField<'_, D> {
    fn at(&self, t: Scalar) -> Result<Hypersurface<D>, FlowError> {
        evolve_exact(self.surface, &self.law, t)
    }
}

impl<const D: usize> AmbientField<D> for DistanceField<'_, D> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(distance(&self.at(t)?, x)?)
    }

    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        let fp = closest_point(&self.at(t)?, x)?;
        if fp.multiplicity != 1 {
            return Err(DistError::CutLocus(fp.multiplicity).into());
        }
        Ok(fp.n)
    }

    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        Ok(distance_jet(&self.at(t)?, x)?.hessian)
    }

    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        match &self.law {
            MotionLaw::Static => Ok(0.0),
            law => {
                let fp = closest_point(&self.at(t)?, x)?;
                if fp.multiplicity != 1 {
                    return Err(DistError::CutLocus(fp.multiplicity).into());
                }
                Ok(match law {
                    // d/dt d = -<velocity at foot, n>; under mean curvature
                    // flow the foot velocity is H nu, and with the record's
                    // away-from-query normal this is just the record mean.
                    MotionLaw::MeanCurvature => fp.curvature.mean,
                    MotionLaw::Drift(v) => -v.dot(&fp.n),
                    MotionLaw::Static => unreachable!(),
                })
            }
        }
    }
}

/// `|x - x0|^2 + c t`.
pub struct SpaceTimeQuadratic<const D: usize> {
    pub x0: Vector<D>,
    pub t_coef: Scalar,
}

impl<const D: usize> AmbientField<D> for SpaceTimeQuadratic<D> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok((x - self.x0).norm_squared() + self.t_coef * t)
    }
    fn gradient(&self, x: &Vector<D>, _t: Scalar) -> Result<Vector<D>, FlowError> {
        Ok((x - self.x0) * 2.0)
    }
    fn hessian(&self, _x: &Vector<D>, _t: Scalar) -> Result<Matrix<D>, FlowError> {
        Ok(Matrix::<D>::identity() * 2.0)
    }
    fn dt(&self, _x: &Vector<D>, _t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.t_coef)
    }
}

/// `add + mul * f`.
pub struct AffineOf<F> {
    pub inner: F,
    pub add: Scalar,
    pub mul: Scalar,
}

impl<const D: usize, F: AmbientField<D>> AmbientField<D> for AffineOf<F> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.add + self.mul * self.inner.value(x, t)?)
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        Ok(self.inner.gradient(x, t)? * self.mul)
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        Ok(self.inner.hessian(x, t)? * self.mul)
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.mul * self.inner.dt(x, t)?)
    }
}

/// `f^p` on the set where `f > 0`.
pub struct PowerOf<F> {
    pub inner: F,
    pub p: Scalar,
}

impl<const D: usize, F: AmbientField<D>> AmbientField<D> for PowerOf<F> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(f.powf(self.p))
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(self.inner.gradient(x, t)? * (self.p * f.powf(self.p - 1.0)))
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        let g = self.inner.gradient(x, t)?;
        let h = self.inner.hessian(x, t)?;
        Ok(h * (self.p * f.powf(self.p - 1.0))
            + g * g.transpose() * (self.p * (self.p - 1.0) * f.powf(self.p - 2.0)))
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(self.p * f.powf(self.p - 1.0) * self.inner.dt(x, t)?)
    }
}

/// `ln f` on the set where `f > 0`.
pub struct LogOf<F> {
    pub inner: F,
}

impl<const D: usize, F: AmbientField<D>> AmbientField<D> for LogOf<F> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(f.ln())
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(self.inner.gradient(x, t)? / f)
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        let g = self.inner.gradient(x, t)?;
        Ok(self.inner.hessian(x, t)? / f - g * g.transpose() / (f * f))
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        let f = self.inner.value(x, t)?;
        if f <= 0.0 {
            return Err(FlowError::NonPositiveBase(f));
        }
        Ok(self.inner.dt(x, t)? / f)
    }
}

/// `exp(f)`.
pub struct ExpOf<F> {
    pub inner: F,
}

impl<const D: usize, F: AmbientField<D>> AmbientField<D> for ExpOf<F> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.inner.value(x, t)?.exp())
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        Ok(self.inner.gradient(x, t)? * self.value(x, t)?)
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        let v = self.value(x, t)?;
        let g = self.inner.gradient(x, t)?;
        Ok((self.inner.hessian(x, t)? + g * g.transpose()) * v)
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.value(x, t)? * self.inner.dt(x, t)?)
    }
}

/// `f * g`.
pub struct ProductOf<F, G> {
    pub left: F,
    pub right: G,
}

impl<const D: usize, F: AmbientField<D>, G: AmbientField<D>> AmbientField<D> for ProductOf<F, G> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.left.value(x, t)? * self.right.value(x, t)?)
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        Ok(self.left.gradient(x, t)? * self.right.value(x, t)?
            + self.right.gradient(x, t)? * self.left.value(x, t)?)
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        let (f, g) = (self.left.value(x, t)?, self.right.value(x, t)?);
        let (gf, gg) = (self.left.gradient(x, t)?, self.right.gradient(x, t)?);
        Ok(self.left.hessian(x, t)? * g
            + self.right.hessian(x, t)? * f
            + gf * gg.transpose()
            + gg * gf.transpose())
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.left.dt(x, t)? * self.right.value(x, t)?
            + self.right.dt(x, t)? * self.left.value(x, t)?)
    }
}

/// Positive part `max(f, 0)`; the jet is the inner jet on the support and
/// zero outside (callers must stay off the crease).
pub struct PositivePart<F> {
    pub inner: F,
}

impl<const D: usize, F: AmbientField<D>> AmbientField<D> for PositivePart<F> {
    fn value(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        Ok(self.inner.value(x, t)?.max(0.0))
    }
    fn gradient(&self, x: &Vector<D>, t: Scalar) -> Result<Vector<D>, FlowError> {
        if self.inner.value(x, t)? > 0.0 {
            self.inner.gradient(x, t)
        } else {
            Ok(Vector::<D>::zeros())
        }
    }
    fn hessian(&self, x: &Vector<D>, t: Scalar) -> Result<Matrix<D>, FlowError> {
        if self.inner.value(x, t)? > 0.0 {
            self.inner.hessian(x, t)
        } else {
            Ok(Matrix::<D>::zeros())
        }
    }
    fn dt(&self, x: &Vector<D>, t: Scalar) -> Result<Scalar, FlowError> {
        if self.inner.value(x, t)? > 0.0 {
            self.inner.dt(x, t)
        } else {
            Ok(0.0)
        }
    }
}

// ---------------------------------------------------------------------------
// The box operator
// ---------------------------------------------------------------------------

/// Everything the jet route produces at one surface point.
#[derive(Debug, Clone)]
pub struct BoxData<const D: usize> {
    pub value: Scalar,
    /// Tangential gradient along the carrying surface.
    pub grad_gamma: Vector<D>,
    pub grad_gamma_sq: Scalar,
    /// Tangential Laplacian.
    pub laplacian: Scalar,
    /// Material time derivative along the surface motion.
    pub material_dt: Scalar,
    /// `material_dt - laplacian`.
    pub box_value: Scalar,
}

/// Exact `box` of a field at a point of the carrying surface, given the
/// surface's curvature record there and the motion law.
pub fn box_on_gamma<const D: usize, F: AmbientField<D>>(
    field: &F,
    gamma: &CurvatureRecord<D>,
    law: &MotionLaw<D>,
    t: Scalar,
) -> Result<BoxData<D>, FlowError> {
    let x = gamma.point;
    let value = field.value(&x, t)?;
    let grad = field.gradient(&x, t)?;
    let hess = field.hessian(&x, t)?;
    let nu = gamma.normal;
    let cos = grad.dot(&nu);
    let grad_gamma = grad - nu * cos;
    let hess_nu_nu = (nu.transpose() * hess * nu)[(0, 0)];
    let laplacian = hess.trace() - hess_nu_nu + gamma.mean * cos;
    let velocity = law_velocity(gamma, law);
    let material_dt = field.dt(&x, t)? + grad.dot(&velocity);
    Ok(BoxData {
        value,
        grad_gamma,
        grad_gamma_sq: grad_gamma.norm_squared(),
        laplacian,
        material_dt,
        box_value: material_dt - laplacian,
    })
}

// ---------------------------------------------------------------------------
// Numeric oracle route
// ---------------------------------------------------------------------------

/// Geodesic exponential map for kinds with closed-form geodesics.
pub fn exp_map<const D: usize>(
    surface: &Hypersurface<D>,
    x: &Vector<D>,
    v: &Vector<D>,
    h: Scalar,
) -> Result<Vector<D>, FlowError> {
    match surface {
        Hypersurface::Hyperplane(_) => Ok(x + v * h),
        Hypersurface::Sphere(s) => {
            let rel = x - s.center;
            let r = rel.norm();
            let theta = h / r;
            Ok(s.center + rel * theta.cos() + v * (r * theta.sin()))
        }
        Hypersurface::Cylinder(c) => {
            // Split the unit tangent into the circle factor and the axis.
            let mut v_c = *v;
            for i in c.factor..D {
                v_c[i] = 0.0;
            }
            let v_a = v - v_c;
            let mut rel = x - c.center;
            for i in c.factor..D {
                rel[i] = 0.0;
            }
            let speed_c = v_c.norm();
            let mut out = x + v_a * h;
            if speed_c > 0.0 {
                let theta = h * speed_c / c.radius;
                let arc = rel * theta.cos() + v_c * (c.radius * theta.sin() / speed_c) - rel;
                out += arc;
            }
            Ok(out)
        }
        _ => Err(FlowError::UnsupportedEvolution(
            "geodesics in closed form exist for planes, spheres and cylinders".into(),
        )),
    }
}

/// Second-order geodesic finite-difference tangential Laplacian.
pub fn geodesic_laplacian<const D: usize>(
    surface: &Hypersurface<D>,
    x: &Vector<D>,
    u: &dyn Fn(&Vector<D>) -> Result<Scalar, FlowError>,
    h: Scalar,
) -> Result<Scalar, FlowError> {
    let nu = surface.normal_at(x)?;
    let frame = crate::geom::orthonormal_complement(&nu);
    let center = u(x)?;
    let mut lap = 0.0;
    for dir in &frame {
        let plus = u(&exp_map(surface, x, dir, h)?)?;
        let minus = u(&exp_map(surface, x, &-dir, h)?)?;
        lap += (plus + minus - 2.0 * center) / (h * h);
    }
    Ok(lap)
}

/// Numeric `box` along the flow: centered material difference minus the
/// geodesic Laplacian, entirely independent of the jet route.
pub fn numeric_box_on_gamma<const D: usize>(
    u: &dyn Fn(&Vector<D>, Scalar) -> Result<Scalar, FlowError>,
    gamma0: &Hypersurface<D>,
    law: &MotionLaw<D>,
    x: &Vector<D>,
    t: Scalar,
    h_space: Scalar,
    h_time: Scalar,
) -> Result<Scalar, FlowError> {
    let gamma_t = evolve_exact(gamma0, law, t)?;
    let x_plus = material_position(gamma0, law, x, t, t + h_time)?;
    let x_minus = material_position(gamma0, law, x, t, t - h_time)?;
    let mat = (u(&x_plus, t + h_time)? - u(&x_minus, t - h_time)?) / (2.0 * h_time);
    let lap = geodesic_laplacian(&gamma_t, x, &|p| u(p, t), h_space)?;
    Ok(mat - lap)
}

// ---------------------------------------------------------------------------
// Mesh flow
// ---------------------------------------------------------------------------

/// Explicit mean curvature flow of a mesh with a short history window for
/// material time differences.
pub struct MeshFlow<const D: usize> {
    pub mesh: MeshData<D>,
    pub t: Scalar,
    pub dt: Scalar,
    /// Abort threshold for the smallest triangle angle, degrees.
    pub min_angle_floor: Scalar,
    history: Vec<(Scalar, Vec<Vector<D>>)>,
}

impl<const D: usize> MeshFlow<D> {
    /// CFL-limited step: `dt = cfl * h_min^2` (0.2 is a safe default for
    /// the cotangent Laplacian).
    pub fn new(mesh: MeshData<D>, cfl: Scalar) -> Self {
        let h = mesh.min_edge_length();
        Self {
            mesh,
            t: 0.0,
            dt: cfl * h * h,
            min_angle_floor: 10.0,
            history: Vec::new(),
        }
    }

    pub fn step(&mut self) -> Result<(), FlowError> {
        self.history.push((self.t, self.mesh.vertices.clone()));
        if self.history.len() > 2 {
            self.history.remove(0);
        }
        let h = self.mesh.mean_curvature_vectors();
        let next: Vec<Vector<D>> = self
            .mesh
            .vertices
            .iter()
            .zip(&h)
            .map(|(x, v)| x + v * self.dt)
            .collect();
        self.mesh.set_vertices(next);
        self.t += self.dt;
        let angle = self.mesh.min_angle_deg();
        if angle < self.min_angle_floor {
            return Err(FlowError::MeshQuality(angle));
        }
        Ok(())
    }

    /// `(t, vertices)` snapshots: up to two past states, oldest first.
    pub fn history(&self) -> &[(Scalar, Vec<Vector<D>>)] {
        &self.history
    }

    /// Centered material box at a vertex: time difference along the vertex
    /// trajectory (previous state, via history, and one trial step forward)
    /// minus the cotangent Laplacian now. The trial step does not disturb
    /// the flow state.
    pub fn material_box_at_vertices(
        &self,
        u: &dyn Fn(&Vector<D>, Scalar) -> Result<Scalar, FlowError>,
    ) -> Result<Vec<Scalar>, FlowError> {
        let (t_prev, prev) = self
            .history
            .last()
            .ok_or_else(|| FlowError::UnsupportedEvolution("need at least one step".into()))?;
        let h_vec = self.mesh.mean_curvature_vectors();
        let t_next = self.t + self.dt;
        let nv = self.mesh.vertex_count();
        let mut values_now = Vec::with_capacity(nv);
        for x in &self.mesh.vertices {
            values_now.push(u(x, self.t)?);
        }
        let lap = self.mesh.laplacian(&values_now);
        let mut out = Vec::with_capacity(nv);
        for i in 0..nv {
            let forward = self.mesh.vertices[i] + h_vec[i] * self.dt;
            let u_next = u(&forward, t_next)?;
            let u_prev = u(&prev[i], *t_prev)?;
            let mat = (u_next - u_prev) / (t_next - t_prev);
            out.push(mat - lap[i]);
        }
        Ok(out)
    }
}
