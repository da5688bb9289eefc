//! Residual checks. Every inequality in the battery becomes a signed slack
//! (positive means satisfied with margin) carrying its own tolerance,
//! location tag and enough intermediate scalars to audit the computation.
//! Reports aggregate the rows per theorem tag; expected-violation checks
//! are first-class and fail the run when the violation does not occur.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::{
    closest_point, distance, distance_jet, tangential_data, translated_distance, DistError,
    DistanceJet, TangentialData,
};
use crate::flow::{
    box_on_gamma, evolve_exact, numeric_box_on_gamma, AffineOf, DistanceField, ExpOf, FlowError,
    LogOf, MotionLaw, PowerOf, ProductOf, SpaceTimeQuadratic,
};
use crate::geom::mesh::MeshData;
use crate::geom::{
    orthonormal_complement, quarter_barrier_f, CurvatureRecord, GeomError, Hypersurface,
};
use crate::scalar::{epsilon_n, kappa_n, power_box_identity, ScalarError};
use crate::{Scalar, Vector};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("sigma is not minimal here: |H| = {0:.3e} at a sampled foot")]
    NotMinimal(f64),
    #[error("a foot point leaves the open half-space: height {0:.3e}")]
    OutsideHalfSpace(f64),
    #[error("cutoff is nonzero at boundary vertex {0}")]
    CutoffSupport(usize),
    #[error("weight has empty support at the baseline time")]
    EmptySupport,
    #[error("check needs {0}")]
    Unsupported(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

// ---------------------------------------------------------------------------
// Samples, reports, CSV
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Outside the regular domain of the distance (or otherwise excluded);
    /// never graded.
    Skipped,
}

impl Status {
    pub fn csv_label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped_not_D0",
        }
    }
}

/// One evaluated inequality at one space-time location. Payload scalars
/// that do not apply are `NaN` and render as empty CSV cells.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub scenario: String,
    pub theorem: String,
    pub t: Scalar,
    pub location: String,
    pub d: Scalar,
    pub grad_sq: Scalar,
    pub lap: Scalar,
    pub dt_material: Scalar,
    pub residual: Scalar,
    pub tolerance: Scalar,
    pub status: Status,
}

impl ResidualSample {
    /// Grade a residual row: failing means dipping below `-tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn graded(
        scenario: &str,
        theorem: &str,
        t: Scalar,
        location: String,
        d: Scalar,
        grad_sq: Scalar,
        lap: Scalar,
        dt_material: Scalar,
        residual: Scalar,
        tolerance: Scalar,
    ) -> Self {
        let status = if residual < -tolerance { Status::Fail } else { Status::Pass };
        ResidualSample {
            scenario: scenario.into(),
            theorem: theorem.into(),
            t,
            location,
            d,
            grad_sq,
            lap,
            dt_material,
            residual,
            tolerance,
            status,
        }
    }

    /// An ungraded row for a sample outside the regular domain.
    pub fn skipped(scenario: &str, theorem: &str, t: Scalar, location: String, d: Scalar) -> Self {
        ResidualSample {
            scenario: scenario.into(),
            theorem: theorem.into(),
            t,
            location,
            d,
            grad_sq: Scalar::NAN,
            lap: Scalar::NAN,
            dt_material: Scalar::NAN,
            residual: Scalar::NAN,
            tolerance: Scalar::NAN,
            status: Status::Skipped,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn row(
    scenario: &str,
    theorem: &str,
    t: Scalar,
    location: String,
    d: Scalar,
    grad_sq: Scalar,
    lap: Scalar,
    dt_material: Scalar,
    residual: Scalar,
    tolerance: Scalar,
) -> ResidualSample {
    ResidualSample::graded(scenario, theorem, t, location, d, grad_sq, lap, dt_material, residual, tolerance)
}

fn skip_row(scenario: &str, theorem: &str, t: Scalar, location: String, d: Scalar) -> ResidualSample {
    ResidualSample::skipped(scenario, theorem, t, location, d)
}

pub const CSV_HEADER: &str =
    "scenario,theorem,t,location,d,grad_sq,lap,dt_material,residual,tolerance,status";

fn csv_cell(v: Scalar) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Render rows to CSV, header included. `NaN` payload cells are empty.
pub fn csv_lines<'a>(samples: impl IntoIterator<Item = &'a ResidualSample>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.scenario,
            s.theorem,
            csv_cell(s.t),
            s.location,
            csv_cell(s.d),
            csv_cell(s.grad_sq),
            csv_cell(s.lap),
            csv_cell(s.dt_material),
            csv_cell(s.residual),
            csv_cell(s.tolerance),
            s.status.csv_label(),
        ));
    }
    out
}

/// What a theorem's rows are supposed to do. `Violate` marks sharpness
/// demonstrations: the run is wrong if too few rows fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Hold,
    Violate { min_fail_fraction: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSummary {
    pub theorem: String,
    pub expectation: Expectation,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Smallest graded residual; `NaN` when nothing was graded.
    pub worst_residual: Scalar,
    /// True when the outcome contradicts the expectation.
    pub unexpected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub t_min: Scalar,
    pub t_max: Scalar,
    pub total_samples: usize,
    /// Fraction of skipped rows among non-probe rows.
    pub skipped_fraction: f64,
    pub theorems: Vec<TheoremSummary>,
    pub aborted: Option<String>,
}

impl VerificationReport {
    pub fn from_samples(
        scenario: &str,
        samples: &[ResidualSample],
        expectations: &BTreeMap<String, Expectation>,
    ) -> Self {
        let mut per: BTreeMap<&str, (usize, usize, usize, Scalar)> = BTreeMap::new();
        let (mut t_min, mut t_max) = (Scalar::INFINITY, Scalar::NEG_INFINITY);
        let (mut counted, mut skipped_counted) = (0usize, 0usize);
        for s in samples {
            if s.t.is_finite() {
                t_min = t_min.min(s.t);
                t_max = t_max.max(s.t);
            }
            let e = per.entry(&s.theorem).or_insert((0, 0, 0, Scalar::NAN));
            match s.status {
                Status::Pass => e.0 += 1,
                Status::Fail => e.1 += 1,
                Status::Skipped => e.2 += 1,
            }
            if s.status != Status::Skipped && (s.residual < e.3 || e.3.is_nan()) {
                e.3 = s.residual;
            }
            // Probe rows are deliberately skipped; they would distort the
            // regular-domain accounting.
            if !s.theorem.ends_with("-probe") {
                counted += 1;
                if s.status == Status::Skipped {
                    skipped_counted += 1;
                }
            }
        }
        let theorems = per
            .into_iter()
            .map(|(name, (pass, fail, skipped, worst))| {
                let expectation =
                    expectations.get(name).copied().unwrap_or(Expectation::Hold);
                let unexpected = match expectation {
                    Expectation::Hold => fail > 0,
                    Expectation::Violate { min_fail_fraction } => {
                        let graded = pass + fail;
                        graded == 0
                            || (fail as f64) < min_fail_fraction * graded as f64
                    }
                };
                TheoremSummary {
                    theorem: name.into(),
                    expectation,
                    pass,
                    fail,
                    skipped,
                    worst_residual: worst,
                    unexpected,
                }
            })
            .collect();
        if t_min > t_max {
            t_min = 0.0;
            t_max = 0.0;
        }
        VerificationReport {
            scenario: scenario.into(),
            t_min,
            t_max,
            total_samples: samples.len(),
            skipped_fraction: if counted == 0 {
                0.0
            } else {
                skipped_counted as f64 / counted as f64
            },
            theorems,
            aborted: None,
        }
    }

    pub fn unexpected(&self) -> impl Iterator<Item = &TheoremSummary> {
        self.theorems.iter().filter(|t| t.unexpected)
    }

    pub fn is_clean(&self) -> bool {
        self.aborted.is_none() && self.unexpected().next().is_none()
    }
}

// ---------------------------------------------------------------------------
// Sampling plumbing
// ---------------------------------------------------------------------------

/// One sampling location on the carrying surface, with curvature data.
#[derive(Debug, Clone)]
pub struct GammaSample<const D: usize> {
    pub location: String,
    pub record: CurvatureRecord<D>,
}

/// Curvature record of an unspecified surface through `point` with unit
/// normal `nu` and zero shape operator. Box-operator evaluations along a
/// mean curvature flow do not see the missing curvature: the advection and
/// Laplacian mean-curvature terms cancel exactly, so only the tangent
/// plane matters.
pub fn tangent_plane_record<const D: usize>(
    point: Vector<D>,
    nu: Vector<D>,
) -> CurvatureRecord<D> {
    let normal = nu.normalize();
    let directions = orthonormal_complement(&normal);
    CurvatureRecord {
        point,
        normal,
        principal: vec![0.0; D - 1],
        directions,
        mean: 0.0,
        second_fundamental_sq: 0.0,
    }
}

fn dist_is_skip(e: &DistError) -> bool {
    matches!(
        e,
        DistError::CutLocus(_) | DistError::Focal(_) | DistError::ProfileRim
    )
}

fn flow_is_skip(e: &FlowError) -> bool {
    matches!(e, FlowError::Dist(d) if dist_is_skip(d))
}

/// Offsets for the translated-barrier probe, as fractions of the distance.
const PROBE_EPS: [Scalar; 3] = [1e-2, 1e-3, 1e-4];

/// At a sample off the regular domain, translate the surface toward the
/// query by a vanishing sequence of offsets; each translated distance is
/// smooth at the query, so the residual of interest can be evaluated there
/// and its trend in the offset recorded. The rows are never graded.
fn elliptic_probe_rows<const D: usize>(
    scenario: &str,
    theorem: &str,
    sigma: &Hypersurface<D>,
    sample: &GammaSample<D>,
    t: Scalar,
    residual_of: &dyn Fn(&DistanceJet<D>, &TangentialData<D>) -> Scalar,
) -> Vec<ResidualSample> {
    let probe_theorem = format!("{theorem}-probe");
    let Ok(fp) = closest_point(sigma, &sample.record.point) else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for frac in PROBE_EPS {
        let eps = frac * fp.dist;
        let Ok((shifted, _)) = translated_distance(sigma, &fp, eps) else {
            continue;
        };
        let Ok(jet) = distance_jet(&shifted, &sample.record.point) else {
            continue;
        };
        let td = tangential_data(&jet, &sample.record);
        let mut r = skip_row(
            scenario,
            &probe_theorem,
            t,
            format!("{}|eps={frac:e}*d", sample.location),
            jet.foot.dist,
        );
        r.grad_sq = td.grad_sq;
        r.lap = td.laplacian;
        r.residual = residual_of(&jet, &td);
        rows.push(r);
    }
    rows
}

pub(crate) fn sample_unit_vector<const D: usize>(rng: &mut impl Rng) -> Vector<D> {
    loop {
        let mut v = Vector::<D>::zeros();
        for i in 0..D {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            v[i] = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

pub(crate) fn trim_p(p: Scalar) -> String {
    let s = format!("{p:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

// ---------------------------------------------------------------------------
// Static-side checks (minimal Sigma, elliptic)
// ---------------------------------------------------------------------------

/// The distance to a minimal surface is a supersolution along any other
/// hypersurface: with `b^2 = |grad_G d|^2` and the bracket
/// `d lap_G d + d H_G <n, n_G>`,
///
/// ```text
/// bracket <= (2n-1)/(2n) b^4 - kappa_n |A|^2 d^2    (sharp form)
/// bracket <= (n-1)/n b^4                            (weak form)
/// ```
///
/// evaluated at the unique closest point of each sample.
pub fn check_minimal_supersolution<const D: usize>(
    scenario: &str,
    sigma: &Hypersurface<D>,
    samples: &[GammaSample<D>],
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let n = (D - 1) as Scalar;
    let kappa: Scalar = kappa_n(D - 1)?;
    let sharp_coef = (2.0 * n - 1.0) / (2.0 * n);
    let weak_coef = (n - 1.0) / n;
    let mut rows = Vec::new();
    for s in samples {
        match distance_jet(sigma, &s.record.point) {
            Ok(jet) => {
                let mean = jet.foot.curvature.mean;
                if mean.abs() > 1e-3 {
                    return Err(VerifyError::NotMinimal(mean.abs()));
                }
                let td = tangential_data(&jet, &s.record);
                let d = jet.foot.dist;
                let b2 = td.grad_sq;
                let bracket = d * (td.laplacian - s.record.mean * td.cos_theta);
                let a2 = jet.foot.curvature.second_fundamental_sq;
                rows.push(row(
                    scenario,
                    "minimal-supersolution",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    td.laplacian,
                    Scalar::NAN,
                    sharp_coef * b2 * b2 - kappa * a2 * d * d - bracket,
                    tol,
                ));
                rows.push(row(
                    scenario,
                    "minimal-supersolution-weak",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    td.laplacian,
                    Scalar::NAN,
                    weak_coef * b2 * b2 - bracket,
                    tol,
                ));
            }
            Err(e) if dist_is_skip(&e) => {
                let d = distance(sigma, &s.record.point)?;
                rows.push(skip_row(scenario, "minimal-supersolution", t, s.location.clone(), d));
                rows.push(skip_row(
                    scenario,
                    "minimal-supersolution-weak",
                    t,
                    s.location.clone(),
                    d,
                ));
                rows.extend(elliptic_probe_rows(
                    scenario,
                    "minimal-supersolution-weak",
                    sigma,
                    s,
                    t,
                    &|jet, td| {
                        let d = jet.foot.dist;
                        weak_coef * td.grad_sq * td.grad_sq
                            - d * (td.laplacian - s.record.mean * td.cos_theta)
                    },
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// A minimal surface confined to an open half-space keeps the tangential
/// gradient of its distance below `1 - epsilon_n` along the boundary
/// hyperplane, and `d^p` is superharmonic there for the matching power
/// `p = (1 + (n-1) epsilon_n)/n`. Samples live on the boundary hyperplane
/// `{x_D = gamma_height}`; which side the surface occupies is read off the
/// first foot, and every later foot must agree.
pub fn check_gradient_bound<const D: usize>(
    scenario: &str,
    sigma: &Hypersurface<D>,
    samples: &[GammaSample<D>],
    gamma_height: Scalar,
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let n = D - 1;
    let eps: Scalar = epsilon_n(n)?;
    let p = (1.0 + (n as Scalar - 1.0) * eps) / n as Scalar;
    let mut side = 0.0;
    let mut rows = Vec::new();
    for s in samples {
        match distance_jet(sigma, &s.record.point) {
            Ok(jet) => {
                let mean = jet.foot.curvature.mean;
                if mean.abs() > 1e-3 {
                    return Err(VerifyError::NotMinimal(mean.abs()));
                }
                let height = jet.foot.foot[D - 1] - gamma_height;
                if side == 0.0 {
                    side = height.signum();
                }
                let height = side * height;
                if height <= 0.0 {
                    return Err(VerifyError::OutsideHalfSpace(height));
                }
                let td = tangential_data(&jet, &s.record);
                let d = jet.foot.dist;
                let b2 = td.grad_sq;
                rows.push(row(
                    scenario,
                    "gradient-bound",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    td.laplacian,
                    Scalar::NAN,
                    (1.0 - eps) - b2,
                    tol,
                ));
                // -lap(d^p) * d^(2-p) / p, the dimensionless superharmonicity
                // defect of the sharp power.
                rows.push(row(
                    scenario,
                    "gradient-bound-power",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    td.laplacian,
                    Scalar::NAN,
                    -(d * td.laplacian + (p - 1.0) * b2),
                    tol,
                ));
            }
            Err(e) if dist_is_skip(&e) => {
                let d = distance(sigma, &s.record.point)?;
                rows.push(skip_row(scenario, "gradient-bound", t, s.location.clone(), d));
                rows.push(skip_row(scenario, "gradient-bound-power", t, s.location.clone(), d));
                rows.extend(elliptic_probe_rows(
                    scenario,
                    "gradient-bound",
                    sigma,
                    s,
                    t,
                    &|_, td| (1.0 - eps) - td.grad_sq,
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Parabolic checks along the flow
// ---------------------------------------------------------------------------

/// Powers of the distance to a minimal surface are supersolutions of the
/// heat equation along a mean curvature flow for `p` up to `1/n`. The
/// reported residual is `box(d^p) d^(2-p) / p`, dimensionless; a finite
/// difference route over geodesics and material time steps cross-checks
/// the closed-form jets whenever the carrying surface is analytic.
#[allow(clippy::too_many_arguments)]
pub fn check_power_heat<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    sigma_law: &MotionLaw<D>,
    gamma0: Option<&Hypersurface<D>>,
    gamma_law: &MotionLaw<D>,
    samples: &[GammaSample<D>],
    p: Scalar,
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let field = DistanceField { surface: sigma0, law: sigma_law.clone() };
    let tag = format!("power-heat-p{}", trim_p(p));
    let fd_tag = format!("{tag}-fd");
    let mut rows = Vec::new();
    for s in samples {
        match box_on_gamma(&field, &s.record, gamma_law, t) {
            Ok(bx) => {
                let d = bx.value;
                let norm = d.powf(2.0 - p) / p;
                let raw = power_box_identity(p, d, bx.box_value, bx.grad_gamma_sq)?;
                rows.push(row(
                    scenario,
                    &tag,
                    t,
                    s.location.clone(),
                    d,
                    bx.grad_gamma_sq,
                    bx.laplacian,
                    bx.material_dt,
                    raw * norm,
                    tol,
                ));
                if let Some(g0) = gamma0 {
                    let u = |x: &Vector<D>, tau: Scalar| -> Result<Scalar, FlowError> {
                        let st = evolve_exact(sigma0, sigma_law, tau)?;
                        Ok(distance(&st, x)?.powf(p))
                    };
                    let num = numeric_box_on_gamma(
                        &u,
                        g0,
                        gamma_law,
                        &s.record.point,
                        t,
                        1e-3 * d,
                        1e-3 * d * d,
                    )?;
                    let tol_chain = 1e-2 * (raw * norm).abs().max(1.0);
                    rows.push(row(
                        scenario,
                        &fd_tag,
                        t,
                        s.location.clone(),
                        d,
                        bx.grad_gamma_sq,
                        Scalar::NAN,
                        Scalar::NAN,
                        -((num - raw) * norm).abs(),
                        tol_chain,
                    ));
                }
            }
            Err(e) if flow_is_skip(&e) => {
                let sigma_t = evolve_exact(sigma0, sigma_law, t)?;
                let d = distance(&sigma_t, &s.record.point)?;
                rows.push(skip_row(scenario, &tag, t, s.location.clone(), d));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// When both hypersurfaces move by mean curvature, the distance between
/// them obeys `d box d >= -b^4` with `b^2 = |grad_G d|^2`, and
/// consequently `log d` is a supersolution. Both residuals are recorded
/// in dimensionless form (`d box d + b^4` and `d^2 box log d`).
#[allow(clippy::too_many_arguments)]
pub fn check_two_flow<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    sigma_law: &MotionLaw<D>,
    gamma0: Option<&Hypersurface<D>>,
    gamma_law: &MotionLaw<D>,
    samples: &[GammaSample<D>],
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let field = DistanceField { surface: sigma0, law: sigma_law.clone() };
    let mut rows = Vec::new();
    for s in samples {
        match box_on_gamma(&field, &s.record, gamma_law, t) {
            Ok(bx) => {
                let d = bx.value;
                let b2 = bx.grad_gamma_sq;
                rows.push(row(
                    scenario,
                    "two-flow",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    bx.laplacian,
                    bx.material_dt,
                    d * bx.box_value + b2 * b2,
                    tol,
                ));
                let lg = LogOf { inner: &field };
                let bl = box_on_gamma(&lg, &s.record, gamma_law, t)?;
                rows.push(row(
                    scenario,
                    "two-flow-log",
                    t,
                    s.location.clone(),
                    d,
                    b2,
                    bl.laplacian,
                    bl.material_dt,
                    d * d * bl.box_value,
                    tol,
                ));
                if let Some(g0) = gamma0 {
                    let u = |x: &Vector<D>, tau: Scalar| -> Result<Scalar, FlowError> {
                        let st = evolve_exact(sigma0, sigma_law, tau)?;
                        Ok(distance(&st, x)?)
                    };
                    let num = numeric_box_on_gamma(
                        &u,
                        g0,
                        gamma_law,
                        &s.record.point,
                        t,
                        1e-3 * d,
                        1e-3 * d * d,
                    )?;
                    rows.push(row(
                        scenario,
                        "two-flow-fd",
                        t,
                        s.location.clone(),
                        d,
                        b2,
                        Scalar::NAN,
                        Scalar::NAN,
                        -(d * (num - bx.box_value)).abs(),
                        1e-3 * (d * bx.box_value).abs().max(1.0),
                    ));
                }
            }
            Err(e) if flow_is_skip(&e) => {
                let sigma_t = evolve_exact(sigma0, sigma_law, t)?;
                let d = distance(&sigma_t, &s.record.point)?;
                rows.push(skip_row(scenario, "two-flow", t, s.location.clone(), d));
                rows.push(skip_row(scenario, "two-flow-log", t, s.location.clone(), d));
                rows.extend(parabolic_probe_rows(
                    scenario,
                    "two-flow",
                    &sigma_t,
                    sigma_law,
                    gamma_law,
                    s,
                    t,
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// Translated-barrier probe for the two-flow inequality at a point where
/// the distance is not smooth: pulling the evolved surface toward the
/// query restores smoothness (translation preserves mean curvature flow),
/// and the residual trend in the offset is recorded without grading.
fn parabolic_probe_rows<const D: usize>(
    scenario: &str,
    theorem: &str,
    sigma_t: &Hypersurface<D>,
    sigma_law: &MotionLaw<D>,
    gamma_law: &MotionLaw<D>,
    sample: &GammaSample<D>,
    t: Scalar,
) -> Vec<ResidualSample> {
    let probe_theorem = format!("{theorem}-probe");
    let Ok(fp) = closest_point(sigma_t, &sample.record.point) else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for frac in PROBE_EPS {
        let eps = frac * fp.dist;
        let Ok((shifted, _)) = translated_distance(sigma_t, &fp, eps) else {
            continue;
        };
        // Re-base the flow at the current instant: `shifted` is the state
        // at local time zero.
        let field = DistanceField { surface: &shifted, law: sigma_law.clone() };
        let Ok(bx) = box_on_gamma(&field, &sample.record, gamma_law, 0.0) else {
            continue;
        };
        let b2 = bx.grad_gamma_sq;
        let mut r = skip_row(
            scenario,
            &probe_theorem,
            t,
            format!("{}|eps={frac:e}*d", sample.location),
            bx.value,
        );
        r.grad_sq = b2;
        r.lap = bx.laplacian;
        r.dt_material = bx.material_dt;
        r.residual = bx.value * bx.box_value + b2 * b2;
        rows.push(r);
    }
    rows
}

/// The weighted reciprocal distance `e^f / d` with the caloric weight
/// `f = c1 + c2 (|x - x0|^2 + 2 n t)` is a subsolution along the flow.
/// The reported residual is `-d^2 box(u)/u`, which equals
/// `d^2 (box log d + |grad_G (f - log d)|^2)` up to sign conventions and
/// is nonnegative when the two-flow estimate holds.
#[allow(clippy::too_many_arguments)]
pub fn check_exp_weight<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    sigma_law: &MotionLaw<D>,
    gamma_law: &MotionLaw<D>,
    samples: &[GammaSample<D>],
    c1: Scalar,
    c2: Scalar,
    x0: &Vector<D>,
    skip_below: Scalar,
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let n = (D - 1) as Scalar;
    let field = DistanceField { surface: sigma0, law: sigma_law.clone() };
    let u = ProductOf {
        left: ExpOf {
            inner: AffineOf {
                inner: SpaceTimeQuadratic { x0: *x0, t_coef: 2.0 * n },
                add: c1,
                mul: c2,
            },
        },
        right: PowerOf { inner: &field, p: -1.0 },
    };
    let mut rows = Vec::new();
    for s in samples {
        match box_on_gamma(&field, &s.record, gamma_law, t) {
            Ok(bd) => {
                let d = bd.value;
                if d < skip_below {
                    rows.push(skip_row(scenario, "exp-weight", t, s.location.clone(), d));
                    continue;
                }
                let bu = box_on_gamma(&u, &s.record, gamma_law, t)?;
                rows.push(row(
                    scenario,
                    "exp-weight",
                    t,
                    s.location.clone(),
                    d,
                    bd.grad_gamma_sq,
                    bu.laplacian,
                    bu.material_dt,
                    -(bu.box_value / bu.value) * d * d,
                    tol,
                ));
            }
            Err(e) if flow_is_skip(&e) => {
                let sigma_t = evolve_exact(sigma0, sigma_law, t)?;
                let d = distance(&sigma_t, &s.record.point)?;
                rows.push(skip_row(scenario, "exp-weight", t, s.location.clone(), d));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Weighted lower bounds over a run (Harnack-type and local avoidance)
// ---------------------------------------------------------------------------

/// Space-time weight entering a lower-bound comparison.
#[derive(Debug, Clone)]
pub enum SpaceTimeWeight<const D: usize> {
    /// `(radius^2 - |x - x0|^2 - 2 n t)_+ ^ power`. Power zero degrades to
    /// the indicator of the support, the unweighted control variant.
    PolyCutoff { x0: Vector<D>, radius: Scalar, power: Scalar },
    /// `exp(-kappa (|x - x0|^2 + 2 n t))`, positive everywhere.
    ExpCutoff { x0: Vector<D>, kappa: Scalar },
}

impl<const D: usize> SpaceTimeWeight<D> {
    pub fn value(&self, x: &Vector<D>, t: Scalar) -> Scalar {
        let n = (D - 1) as Scalar;
        match self {
            SpaceTimeWeight::PolyCutoff { x0, radius, power } => {
                let phi = radius * radius - (x - x0).norm_squared() - 2.0 * n * t;
                if phi <= 0.0 {
                    0.0
                } else if *power == 0.0 {
                    1.0
                } else {
                    phi.powf(*power)
                }
            }
            SpaceTimeWeight::ExpCutoff { x0, kappa } => {
                (-kappa * ((x - x0).norm_squared() + 2.0 * n * t)).exp()
            }
        }
    }
}

/// Verifies `d(x, t) >= w(x, t) * m0` for `t` past a baseline time, where
/// `m0` is the infimum of `d / w` over the support at the baseline. The
/// first observation fixes the baseline; later ones grade the bound.
#[derive(Debug, Clone)]
pub struct WeightedLowerBound<const D: usize> {
    pub theorem: String,
    weight: SpaceTimeWeight<D>,
    baseline: Option<(Scalar, Scalar)>,
}

impl<const D: usize> WeightedLowerBound<D> {
    pub fn new(theorem: impl Into<String>, weight: SpaceTimeWeight<D>) -> Self {
        Self { theorem: theorem.into(), weight, baseline: None }
    }

    /// Feed the current positions and distances (location, point, d).
    pub fn observe(
        &mut self,
        scenario: &str,
        points: &[(String, Vector<D>, Scalar)],
        t: Scalar,
        tol: Scalar,
    ) -> Result<Vec<ResidualSample>, VerifyError> {
        if self.baseline.is_none() {
            let m0 = points
                .iter()
                .filter_map(|(_, x, d)| {
                    let w = self.weight.value(x, t);
                    (w > 0.0).then(|| d / w)
                })
                .fold(Scalar::INFINITY, Scalar::min);
            if !m0.is_finite() {
                return Err(VerifyError::EmptySupport);
            }
            self.baseline = Some((t, m0));
        }
        let (_, m0) = self.baseline.expect("baseline was just set");
        let mut rows = Vec::new();
        for (loc, x, d) in points {
            let w = self.weight.value(x, t);
            if w <= 0.0 {
                continue;
            }
            rows.push(row(
                scenario,
                &self.theorem,
                t,
                loc.clone(),
                *d,
                Scalar::NAN,
                Scalar::NAN,
                Scalar::NAN,
                d - w * m0,
                tol,
            ));
        }
        Ok(rows)
    }
}

/// The minimum distance between the two evolving surfaces never decreases;
/// each step is compared against the previous one.
#[derive(Debug, Clone, Default)]
pub struct MonotoneMin {
    prev: Option<Scalar>,
}

impl MonotoneMin {
    pub fn observe(
        &mut self,
        scenario: &str,
        t: Scalar,
        min_d: Scalar,
        tol: Scalar,
    ) -> Option<ResidualSample> {
        let out = self.prev.map(|prev| {
            row(
                scenario,
                "min-distance-monotone",
                t,
                "min-over-surface".into(),
                min_d,
                Scalar::NAN,
                Scalar::NAN,
                Scalar::NAN,
                min_d - prev,
                tol,
            )
        });
        self.prev = Some(min_d);
        out
    }
}

// ---------------------------------------------------------------------------
// Integral cutoff estimate
// ---------------------------------------------------------------------------

/// Discrete form of the cutoff energy estimate on a minimal mesh under a
/// minimal surface: for every compactly supported vertex field `phi`,
///
/// ```text
/// sum_v w_v phi_v^2 (|grad_G log d|^2_v + 4 n kappa_n |A|^2_v)
///     <= 16 n^2 sum_v w_v |grad_G phi|^2_v
/// ```
///
/// with vertex area weights and cell-averaged tangential gradients.
pub fn check_cutoff_integral<const D: usize>(
    scenario: &str,
    sigma: &Hypersurface<D>,
    gamma: &MeshData<D>,
    cutoffs: &[(String, Vec<Scalar>)],
    t: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let n = (D - 1) as Scalar;
    let kappa: Scalar = kappa_n(D - 1)?;
    let nv = gamma.vertex_count();
    let mut d = Vec::with_capacity(nv);
    let mut a2 = Vec::with_capacity(nv);
    for v in &gamma.vertices {
        let fp = closest_point(sigma, v)?;
        if fp.curvature.mean.abs() > 1e-3 {
            return Err(VerifyError::NotMinimal(fp.curvature.mean.abs()));
        }
        d.push(fp.dist);
        a2.push(fp.curvature.second_fundamental_sq);
    }
    let log_d: Vec<Scalar> = d.iter().map(|x| x.ln()).collect();
    let grad_log = gamma.vertex_gradients(&log_d);
    let areas = gamma.vertex_areas();
    let mut rows = Vec::new();
    for (name, phi) in cutoffs {
        if phi.len() != nv {
            return Err(VerifyError::Unsupported(format!(
                "cutoff {name} has {} entries for {nv} vertices",
                phi.len()
            )));
        }
        for b in 0..nv {
            if gamma.is_boundary(b) && phi[b] != 0.0 {
                return Err(VerifyError::CutoffSupport(b));
            }
        }
        let grad_phi = gamma.vertex_gradients(phi);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for v in 0..nv {
            lhs += areas[v]
                * phi[v]
                * phi[v]
                * (grad_log[v].norm_squared() + 4.0 * n * kappa * a2[v]);
            rhs += areas[v] * grad_phi[v].norm_squared();
        }
        rhs *= 16.0 * n * n;
        rows.push(row(
            scenario,
            "cutoff-integral",
            t,
            name.clone(),
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            rhs - lhs,
            tol * rhs.abs().max(lhs.abs()).max(1e-12),
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Evolving sphere: closed-form box of the distance
// ---------------------------------------------------------------------------

/// The box of the distance to a shrinking round sphere, at a point with
/// radial coordinate `rho`, along any mean curvature flow whose tangent
/// plane leaves `b^2` of the gradient tangential:
///
/// ```text
/// inside:  (n d / (d + rho) - b^2) / rho
/// outside: (n d / (rho - d) + b^2) / rho
/// ```
pub fn sphere_box_closed_form(n: Scalar, rho: Scalar, radius: Scalar, b2: Scalar) -> Scalar {
    if rho < radius {
        let d = radius - rho;
        (n * d / (d + rho) - b2) / rho
    } else {
        let d = rho - radius;
        (n * d / (rho - d) + b2) / rho
    }
}

/// A probe location for the sphere formula: a point and the unit normal of
/// the (otherwise irrelevant) carrying surface there.
#[derive(Debug, Clone)]
pub struct SphereProbe<const D: usize> {
    pub location: String,
    pub x: Vector<D>,
    pub nu: Vector<D>,
}

/// Compares the jet-route box of the distance to an evolving sphere with
/// the closed form, and optionally with a finite-difference route over a
/// static tangent hyperplane.
pub fn check_sphere_formula<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    probes: &[SphereProbe<D>],
    t: Scalar,
    tol_rel: Scalar,
    with_fd: bool,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let sigma_t = evolve_exact(sigma0, &MotionLaw::MeanCurvature, t)?;
    let Hypersurface::Sphere(sph) = &sigma_t else {
        return Err(VerifyError::Unsupported("a round sphere".into()));
    };
    let n = (D - 1) as Scalar;
    let field = DistanceField { surface: sigma0, law: MotionLaw::MeanCurvature };
    let mut rows = Vec::new();
    for p in probes {
        let nu = p.nu.normalize();
        let rel = p.x - sph.center;
        let rho = rel.norm();
        let inside = rho < sph.radius;
        let grad = rel / rho * if inside { -1.0 } else { 1.0 };
        let cos = grad.dot(&nu);
        let b2 = (1.0 - cos * cos).max(0.0);
        let closed = sphere_box_closed_form(n, rho, sph.radius, b2);
        let rec = tangent_plane_record(p.x, nu);
        let bx = box_on_gamma(&field, &rec, &MotionLaw::MeanCurvature, t)?;
        let scale = closed.abs().max(1.0 / rho);
        rows.push(row(
            scenario,
            "sphere-box",
            t,
            p.location.clone(),
            bx.value,
            b2,
            bx.laplacian,
            bx.material_dt,
            -(bx.box_value - closed).abs(),
            tol_rel * scale,
        ));
        if with_fd {
            let plane = Hypersurface::hyperplane(nu, nu.dot(&p.x))?;
            let u = |x: &Vector<D>, tau: Scalar| -> Result<Scalar, FlowError> {
                let st = evolve_exact(sigma0, &MotionLaw::MeanCurvature, tau)?;
                Ok(distance(&st, x)?)
            };
            let d = bx.value;
            let num = numeric_box_on_gamma(
                &u,
                &plane,
                &MotionLaw::Static,
                &p.x,
                t,
                1e-4 * d.min(rho),
                1e-4 * d * d,
            )?;
            rows.push(row(
                scenario,
                "sphere-box-fd",
                t,
                p.location.clone(),
                d,
                b2,
                Scalar::NAN,
                Scalar::NAN,
                -(num - closed).abs(),
                1e-4 * scale,
            ));
        }
    }
    Ok(rows)
}

/// Beyond the radial threshold `(n-1)/n * radius`, a tangentially aligned
/// probe inside the sphere sees `box d < 0`: the distance itself is not a
/// supersolution. Every row here is expected to fail.
pub fn check_sphere_negativity<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    probes: &[SphereProbe<D>],
    t: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let field = DistanceField { surface: sigma0, law: MotionLaw::MeanCurvature };
    let mut rows = Vec::new();
    for p in probes {
        let rec = tangent_plane_record(p.x, p.nu);
        let bx = box_on_gamma(&field, &rec, &MotionLaw::MeanCurvature, t)?;
        rows.push(row(
            scenario,
            "sphere-box-negativity",
            t,
            p.location.clone(),
            bx.value,
            bx.grad_gamma_sq,
            bx.laplacian,
            bx.material_dt,
            bx.box_value,
            0.0,
        ));
    }
    Ok(rows)
}

/// Locates the sign change of the jet-route `box d` along a radius (with
/// the probe fully tangential, `b^2 = 1`) by bisection and compares it to
/// `(n-1)/n * radius`.
pub fn check_sphere_threshold<const D: usize>(
    scenario: &str,
    sigma0: &Hypersurface<D>,
    t: Scalar,
    tol_factor: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let sigma_t = evolve_exact(sigma0, &MotionLaw::MeanCurvature, t)?;
    let Hypersurface::Sphere(sph) = &sigma_t else {
        return Err(VerifyError::Unsupported("a round sphere".into()));
    };
    let n = (D - 1) as Scalar;
    let field = DistanceField { surface: sigma0, law: MotionLaw::MeanCurvature };
    let mut e1 = Vector::<D>::zeros();
    e1[0] = 1.0;
    let mut e2 = Vector::<D>::zeros();
    e2[1] = 1.0;
    let box_at = |rho: Scalar| -> Result<Scalar, VerifyError> {
        let rec = tangent_plane_record(sph.center + e1 * rho, e2);
        Ok(box_on_gamma(&field, &rec, &MotionLaw::MeanCurvature, t)?.box_value)
    };
    let (mut lo, mut hi) = (0.05 * sph.radius, 0.95 * sph.radius);
    let (f_lo, f_hi) = (box_at(lo)?, box_at(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(VerifyError::Unsupported(format!(
            "a bracketing interval (got {f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if box_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let expected = (n - 1.0) / n * sph.radius;
    Ok(vec![row(
        scenario,
        "sphere-box-threshold",
        t,
        "bisection".into(),
        sph.radius - root,
        1.0,
        Scalar::NAN,
        Scalar::NAN,
        -(root - expected).abs(),
        tol_factor * sph.radius,
    )])
}

/// Fully discrete route for the sphere formula: a static planar patch
/// (minimal, hence a mean curvature flow) is carried by `MeshFlow`, the
/// box comes from the cotangent Laplacian plus material time differences,
/// and each interior vertex is compared to the closed form with its own
/// tangential share. The grid is uniform so the discrete Laplacian is a
/// five-point stencil with second-order consistency.
pub fn check_sphere_formula_mesh(
    scenario: &str,
    sigma0: &Hypersurface<3>,
    probe_center: Vector<3>,
    half_extent: Scalar,
    steps: usize,
    tol_rel: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let Hypersurface::Sphere(sph) = sigma0 else {
        return Err(VerifyError::Unsupported("a round sphere".into()));
    };
    let rel = probe_center - sph.center;
    let radial = rel.normalize();
    let frame = orthonormal_complement(&radial);
    let (in_plane, normal) = (frame[0], frame[1]);
    let mesh = planar_grid_mesh(&probe_center, &radial, &in_plane, half_extent, steps);
    let mut flow = crate::flow::MeshFlow::new(mesh, 0.2);
    flow.step()?;
    let u = |x: &Vector<3>, tau: Scalar| -> Result<Scalar, FlowError> {
        let st = evolve_exact(sigma0, &MotionLaw::MeanCurvature, tau)?;
        Ok(distance(&st, x)?)
    };
    let boxes = flow.material_box_at_vertices(&u)?;
    let t_now = flow.t;
    let Hypersurface::Sphere(sph_now) = evolve_exact(sigma0, &MotionLaw::MeanCurvature, t_now)?
    else {
        unreachable!("spheres stay spheres");
    };
    let mut rows = Vec::new();
    for v in flow.mesh.interior_vertices() {
        let x = flow.mesh.vertices[v];
        let rel_v = x - sph_now.center;
        let rho = rel_v.norm();
        let inside = rho < sph_now.radius;
        let grad = rel_v / rho * if inside { -1.0 } else { 1.0 };
        let cos = grad.dot(&normal);
        let b2 = (1.0 - cos * cos).max(0.0);
        let closed = sphere_box_closed_form(2.0, rho, sph_now.radius, b2);
        let d = (rho - sph_now.radius).abs();
        rows.push(row(
            scenario,
            "sphere-box-mesh",
            t_now,
            format!("v{v}"),
            d,
            b2,
            Scalar::NAN,
            boxes[v],
            -(boxes[v] - closed).abs(),
            tol_rel * closed.abs().max(1.0 / rho),
        ));
    }
    Ok(rows)
}

/// Uniform triangulated square patch centered at `origin`, spanned by the
/// orthonormal pair `(e1, e2)`. Interior vertices all carry the same
/// stencil, which keeps the cotangent Laplacian second-order pointwise.
fn planar_grid_mesh(
    origin: &Vector<3>,
    e1: &Vector<3>,
    e2: &Vector<3>,
    half_extent: Scalar,
    steps: usize,
) -> MeshData<3> {
    assert!(steps >= 2);
    let h = 2.0 * half_extent / steps as Scalar;
    let mut verts = Vec::with_capacity((steps + 1) * (steps + 1));
    for i in 0..=steps {
        for j in 0..=steps {
            let a = i as Scalar * h - half_extent;
            let b = j as Scalar * h - half_extent;
            verts.push(origin + e1 * a + e2 * b);
        }
    }
    let idx = |i: usize, j: usize| i * (steps + 1) + j;
    let mut cells = Vec::with_capacity(2 * steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            cells.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    MeshData::new(verts, cells).expect("uniform grid patch is valid")
}

// ---------------------------------------------------------------------------
// Shrinking cylinder identities
// ---------------------------------------------------------------------------

/// The displayed identities for the distance to a shrinking cylinder of
/// radius `r`, probed from radial coordinate `s` inside it with the probe
/// tangent to the radial plane. The displayed `box d = -1/r - 1/s` is
/// cross-checked algebraically against the power chain rule; the jet and
/// finite-difference routes carry the geometric value `-1/r + 1/s`, whose
/// sign on the second term differs from the display.
pub fn check_cylinder_identities(
    scenario: &str,
    r: Scalar,
    s: Scalar,
    p: Scalar,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    if !(0.0 < s && s < r) {
        return Err(VerifyError::Unsupported(format!(
            "radii with 0 < s < r (got r = {r}, s = {s})"
        )));
    }
    let loc = format!("r={r},s={s},p={p}");
    let d = r - s;
    let displayed_box = -1.0 / r - 1.0 / s;
    let third = 1.0 - p - (r - s) * (1.0 / r + 1.0 / s);
    let mut rows = Vec::new();

    let raw = power_box_identity(p, d, displayed_box, 1.0)?;
    rows.push(row(
        scenario,
        "cylinder-display",
        0.0,
        loc.clone(),
        d,
        1.0,
        Scalar::NAN,
        Scalar::NAN,
        -(raw * d.powf(2.0 - p) / p - third).abs(),
        1e-12 * third.abs().max(1.0),
    ));

    let s_lim = r - 1e-9;
    let third_lim = 1.0 - p - (r - s_lim) * (1.0 / r + 1.0 / s_lim);
    rows.push(row(
        scenario,
        "cylinder-display-limit",
        0.0,
        loc.clone(),
        r - s_lim,
        1.0,
        Scalar::NAN,
        Scalar::NAN,
        -(third_lim - (1.0 - p)).abs(),
        1e-6,
    ));

    let cyl = Hypersurface::<3>::cylinder(Vector::<3>::zeros(), 2, r)?;
    let field = DistanceField { surface: &cyl, law: MotionLaw::MeanCurvature };
    let mut x = Vector::<3>::zeros();
    x[0] = s;
    let mut axis = Vector::<3>::zeros();
    axis[2] = 1.0;
    let rec = tangent_plane_record(x, axis);
    let bx = box_on_gamma(&field, &rec, &MotionLaw::MeanCurvature, 0.0)?;
    let geometric = -1.0 / r + 1.0 / s;
    rows.push(row(
        scenario,
        "cylinder-geometric",
        0.0,
        loc.clone(),
        d,
        bx.grad_gamma_sq,
        bx.laplacian,
        bx.material_dt,
        -(bx.box_value - geometric).abs(),
        tol * geometric.abs().max(1.0 / r),
    ));

    let plane = Hypersurface::<3>::hyperplane(axis, 0.0)?;
    let u = |y: &Vector<3>, tau: Scalar| -> Result<Scalar, FlowError> {
        let st = evolve_exact(&cyl, &MotionLaw::MeanCurvature, tau)?;
        Ok(distance(&st, y)?)
    };
    let num = numeric_box_on_gamma(
        &u,
        &plane,
        &MotionLaw::Static,
        &x,
        0.0,
        1e-4 * d.min(s),
        1e-4 * d * d,
    )?;
    rows.push(row(
        scenario,
        "cylinder-geometric-fd",
        0.0,
        loc,
        d,
        1.0,
        Scalar::NAN,
        Scalar::NAN,
        -(num - geometric).abs(),
        1e-4 * (1.0 / r + 1.0 / s),
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Translation bound
// ---------------------------------------------------------------------------

/// Translating the surface by `-z` cannot reduce the distance by more than
/// `|z|`; when `z` points from the query straight at its foot, equality
/// holds and the translated foot's normal is parallel to `z`.
pub fn check_translation_lemma<const D: usize>(
    scenario: &str,
    sigma: &Hypersurface<D>,
    queries: &[Vector<D>],
    seed: u64,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        let fp = closest_point(sigma, q)?;
        let r = fp.dist;
        let dir = sample_unit_vector::<D>(&mut rng);
        let mag = rng.gen_range(0.0..0.98) * r;
        let z = dir * mag;
        let dv = distance(&sigma.translated(&(-z)), q)?;
        rows.push(row(
            scenario,
            "translation-bound",
            0.0,
            format!("q{i}"),
            r,
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            dv - (r - mag),
            tol,
        ));
        // Equality construction: pull the surface toward the query by half
        // the distance; the drop is exactly eps and the new foot's normal
        // points along the translation.
        let eps = 0.5 * r;
        let (_, tfp) = translated_distance(sigma, &fp, eps)?;
        rows.push(row(
            scenario,
            "translation-equality",
            0.0,
            format!("q{i}"),
            r,
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            -(tfp.dist - (r - eps)).abs(),
            tol,
        ));
        let align = tfp.n.dot(&fp.n).abs().min(1.0).acos();
        rows.push(row(
            scenario,
            "translation-normal",
            0.0,
            format!("q{i}"),
            r,
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            -align,
            1e-4,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Quarter-space barrier
// ---------------------------------------------------------------------------

/// Discrete subharmonicity of the quarter-space barrier on a minimal mesh:
/// the cotangent Laplacian of `f` must be nonnegative at interior vertices
/// up to a discretization allowance of `tol_factor * h^2`.
pub fn check_quarter_barrier_mesh(
    scenario: &str,
    sigma: &MeshData<3>,
    p_prime: &Vector<3>,
    tol_factor: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let f: Vec<Scalar> = sigma
        .vertices
        .iter()
        .map(|v| quarter_barrier_f(v, p_prime))
        .collect::<Result<_, _>>()?;
    let lap = sigma.laplacian(&f);
    let mut h_max: Scalar = 0.0;
    for cell in &sigma.cells {
        for i in 0..3 {
            for j in (i + 1)..3 {
                h_max = h_max.max((sigma.vertices[cell[i]] - sigma.vertices[cell[j]]).norm());
            }
        }
    }
    let tol = tol_factor * h_max * h_max;
    let mut rows = Vec::new();
    for v in sigma.interior_vertices() {
        rows.push(row(
            scenario,
            "quarter-barrier-subharmonic",
            0.0,
            format!("v{v}"),
            Scalar::NAN,
            Scalar::NAN,
            lap[v],
            Scalar::NAN,
            lap[v],
            tol,
        ));
    }
    Ok(rows)
}

/// Boundary bound for the quarter-space barrier: on the sphere of radius
/// `s` intersected with the quarter space (last two coordinates
/// nonnegative), `f` stays below `(2 - 1/(n-1)) s^2`.
pub fn check_quarter_barrier_boundary<const D: usize>(
    scenario: &str,
    s: Scalar,
    count: usize,
    seed: u64,
    tol: Scalar,
) -> Result<Vec<ResidualSample>, VerifyError> {
    let n = D - 1;
    let bound = (2.0 - 1.0 / (n as Scalar - 1.0)) * s * s;
    let mut p_prime = Vector::<D>::zeros();
    p_prime[D - 2] = s;
    p_prime[D - 1] = s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for i in 0..count {
        let mut x = sample_unit_vector::<D>(&mut rng) * s;
        x[D - 2] = x[D - 2].abs();
        x[D - 1] = x[D - 1].abs();
        let f = quarter_barrier_f(&x, &p_prime)?;
        rows.push(row(
            scenario,
            "quarter-barrier-boundary",
            0.0,
            format!("b{i}"),
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            Scalar::NAN,
            bound - f,
            tol,
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::disk;
    use nalgebra::vector;

    fn plane_sample<const D: usize>(
        gamma: &Hypersurface<D>,
        x: Vector<D>,
        loc: &str,
    ) -> GammaSample<D> {
        let normal = gamma.normal_at(&x).unwrap();
        GammaSample {
            location: loc.into(),
            record: gamma.curvature_at(&x, &normal).unwrap(),
        }
    }

    #[test]
    fn parallel_planes_sit_at_exact_equality() {
        let sigma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        let gamma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 1.0).unwrap();
        let samples: Vec<_> = (0..5)
            .map(|i| {
                plane_sample(&gamma, vector![i as f64 * 0.3, -0.2 * i as f64, 1.0], &format!("g{i}"))
            })
            .collect();
        let rows =
            check_minimal_supersolution("unit", &sigma, &samples, 0.0, 1e-12).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert_eq!(r.status, Status::Pass);
            assert!(r.residual.abs() < 1e-12, "{} residual {}", r.theorem, r.residual);
        }
    }

    #[test]
    fn tilted_plane_weak_residual_is_sin_fourth_over_two() {
        // Sigma tilted by 30 degrees, far enough that every foot is unique.
        // Flat surfaces kill the bracket and |A|^2, so the weak residual is
        // ((n-1)/n) sin^4(30) = (1/2)(1/16) = 1/32 and the sharp one is
        // (3/4) sin^4(30) = 3/64.
        let th: f64 = 30f64.to_radians();
        let sigma =
            Hypersurface::<3>::hyperplane(vector![th.sin(), 0.0, th.cos()], -10.0).unwrap();
        let gamma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        let samples = vec![plane_sample(&gamma, vector![0.4, -0.7, 0.0], "g0")];
        let rows =
            check_minimal_supersolution("unit", &sigma, &samples, 0.0, 1e-12).unwrap();
        let weak = rows.iter().find(|r| r.theorem == "minimal-supersolution-weak").unwrap();
        assert!((weak.residual - 1.0 / 32.0).abs() < 1e-12, "got {}", weak.residual);
        let sharp = rows.iter().find(|r| r.theorem == "minimal-supersolution").unwrap();
        assert!((sharp.residual - 3.0 / 64.0).abs() < 1e-12, "got {}", sharp.residual);
        assert!((weak.grad_sq - 0.25).abs() < 1e-12);
    }

    #[test]
    fn concentric_spheres_two_flow_value() {
        // Gamma of radius a inside Sigma of radius R, both shrinking:
        // b = 0 and box d = n/a - n/R > 0; the dimensionless residual is
        // d * box d.
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let gamma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 0.4).unwrap();
        let x = vector![0.4, 0.0, 0.0];
        let samples = vec![plane_sample(&gamma, x, "g0")];
        let rows = check_two_flow(
            "unit",
            &sigma,
            &MotionLaw::MeanCurvature,
            Some(&gamma),
            &MotionLaw::MeanCurvature,
            &samples,
            0.0,
            1e-9,
        )
        .unwrap();
        let main = rows.iter().find(|r| r.theorem == "two-flow").unwrap();
        let expected = 0.6 * (2.0 / 0.4 - 2.0 / 1.0);
        assert!((main.residual - expected).abs() < 1e-10, "got {}", main.residual);
        assert!(main.grad_sq.abs() < 1e-12);
        let log = rows.iter().find(|r| r.theorem == "two-flow-log").unwrap();
        assert!(log.residual > 0.0);
        let fd = rows.iter().find(|r| r.theorem == "two-flow-fd").unwrap();
        assert_eq!(fd.status, Status::Pass, "fd mismatch {}", fd.residual);
    }

    #[test]
    fn static_parallel_planes_two_flow_is_zero() {
        let sigma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        let gamma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 1.0).unwrap();
        let samples = vec![plane_sample(&gamma, vector![0.3, 0.1, 1.0], "g0")];
        let rows = check_two_flow(
            "unit",
            &sigma,
            &MotionLaw::MeanCurvature,
            Some(&gamma),
            &MotionLaw::MeanCurvature,
            &samples,
            0.1,
            1e-12,
        )
        .unwrap();
        for r in rows.iter().filter(|r| r.theorem != "two-flow-fd") {
            assert!(r.residual.abs() < 1e-12, "{}: {}", r.theorem, r.residual);
        }
    }

    #[test]
    fn linear_distance_is_caloric_and_p_beyond_one_fails() {
        // Sigma the x-axis, Gamma the y-axis: along Gamma the distance is
        // |y|, linear, so box(d^1) = 0 exactly while p = 1.5 is a strict
        // subsolution with normalized residual -(p-1) b^2 = -1/2.
        let sigma = Hypersurface::<2>::hyperplane(vector![0.0, 1.0], 0.0).unwrap();
        let gamma = Hypersurface::<2>::hyperplane(vector![1.0, 0.0], 0.0).unwrap();
        let samples: Vec<_> = (1..6)
            .map(|i| plane_sample(&gamma, vector![0.0, i as f64 * 0.5], &format!("g{i}")))
            .collect();
        let ok = check_power_heat(
            "unit",
            &sigma,
            &MotionLaw::Static,
            Some(&gamma),
            &MotionLaw::Static,
            &samples,
            1.0,
            0.0,
            1e-8,
        )
        .unwrap();
        for r in ok.iter().filter(|r| r.theorem == "power-heat-p1") {
            assert!(r.residual.abs() < 1e-10, "got {}", r.residual);
        }
        for r in ok.iter().filter(|r| r.theorem == "power-heat-p1-fd") {
            assert_eq!(r.status, Status::Pass);
        }
        let beyond = check_power_heat(
            "unit",
            &sigma,
            &MotionLaw::Static,
            None,
            &MotionLaw::Static,
            &samples,
            1.5,
            0.0,
            1e-8,
        )
        .unwrap();
        for r in &beyond {
            assert_eq!(r.status, Status::Fail);
            assert!((r.residual + 0.5).abs() < 1e-10, "got {}", r.residual);
        }
    }

    #[test]
    fn exp_weight_on_static_planes_is_flat() {
        let sigma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 0.0).unwrap();
        let gamma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 1.0).unwrap();
        let samples = vec![plane_sample(&gamma, vector![0.2, 0.4, 1.0], "g0")];
        // c2 = 0 makes the weight constant; box(1/d) = 0 on static planes.
        let rows = check_exp_weight(
            "unit",
            &sigma,
            &MotionLaw::MeanCurvature,
            &MotionLaw::MeanCurvature,
            &samples,
            0.7,
            0.0,
            &Vector::<3>::zeros(),
            0.0,
            0.0,
            1e-12,
        )
        .unwrap();
        assert_eq!(rows[0].status, Status::Pass);
        assert!(rows[0].residual.abs() < 1e-12);
    }

    #[test]
    fn exp_weight_concentric_is_nonnegative() {
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let gamma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 0.4).unwrap();
        let samples: Vec<_> = (0..4)
            .map(|i| {
                let th = i as f64;
                let x = vector![0.4 * th.cos(), 0.4 * th.sin(), 0.0];
                plane_sample(&gamma, x, &format!("g{i}"))
            })
            .collect();
        let rows = check_exp_weight(
            "unit",
            &sigma,
            &MotionLaw::MeanCurvature,
            &MotionLaw::MeanCurvature,
            &samples,
            0.0,
            1.0,
            &vector![0.0, 0.0, 0.0],
            0.0,
            0.02,
            1e-3,
        )
        .unwrap();
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "residual {}", r.residual);
        }
    }

    #[test]
    fn weighted_bound_holds_on_static_planes_and_baselines_at_zero() {
        let mut check = WeightedLowerBound::new(
            "harnack",
            SpaceTimeWeight::PolyCutoff {
                x0: vector![0.0, 0.0, 1.0],
                radius: 2.0,
                power: 2.0,
            },
        );
        let points: Vec<(String, Vector<3>, Scalar)> = (0..6)
            .map(|i| (format!("g{i}"), vector![0.3 * i as f64, 0.0, 1.0], 1.0))
            .collect();
        let rows0 = check.observe("unit", &points, 0.0, 1e-9).unwrap();
        assert!(rows0.iter().any(|r| r.residual.abs() < 1e-12));
        let rows1 = check.observe("unit", &points, 0.05, 1e-9).unwrap();
        for r in rows0.iter().chain(&rows1) {
            assert_eq!(r.status, Status::Pass, "residual {}", r.residual);
        }
    }

    #[test]
    fn monotone_min_flags_decreases_only() {
        let mut m = MonotoneMin::default();
        assert!(m.observe("unit", 0.0, 0.5, 1e-4).is_none());
        let up = m.observe("unit", 0.1, 0.6, 1e-4).unwrap();
        assert_eq!(up.status, Status::Pass);
        let down = m.observe("unit", 0.2, 0.4, 1e-4).unwrap();
        assert_eq!(down.status, Status::Fail);
    }

    #[test]
    fn cutoff_integral_is_slack_under_a_tilted_plane() {
        let th: f64 = 25f64.to_radians();
        let sigma =
            Hypersurface::<3>::hyperplane(vector![th.sin(), 0.0, th.cos()], 3.0).unwrap();
        let gamma = disk([0.0, 0.0], 0.0, 1.0, 6, 24);
        // A hat at the center vertex.
        let mut phi = vec![0.0; gamma.vertex_count()];
        phi[0] = 1.0;
        let rows = check_cutoff_integral(
            "unit",
            &sigma,
            &gamma,
            &[("hat0".into(), phi)],
            0.0,
            5e-2,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, Status::Pass);
        assert!(rows[0].residual > 0.0);
    }

    #[test]
    fn cutoff_support_violation_is_an_error() {
        let sigma = Hypersurface::<3>::hyperplane(vector![0.0, 0.0, 1.0], 2.0).unwrap();
        let gamma = disk([0.0, 0.0], 0.0, 1.0, 3, 12);
        let phi = vec![1.0; gamma.vertex_count()];
        let err = check_cutoff_integral("unit", &sigma, &gamma, &[("bad".into(), phi)], 0.0, 5e-2)
            .unwrap_err();
        assert!(matches!(err, VerifyError::CutoffSupport(_)));
    }

    #[test]
    fn sphere_formula_matches_hand_arithmetic() {
        // n = 2, r = 1, probe at rho = 0.9 fully tangential: the closed
        // form gives (2*0.1/1 - 1)/0.9 = -8/9.
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let probes = vec![SphereProbe {
            location: "tangential".into(),
            x: vector![0.9, 0.0, 0.0],
            nu: vector![0.0, 1.0, 0.0],
        }];
        let rows = check_sphere_formula("unit", &sigma, &probes, 0.0, 1e-4, true).unwrap();
        let jet = rows.iter().find(|r| r.theorem == "sphere-box").unwrap();
        assert_eq!(jet.status, Status::Pass, "jet vs closed: {}", jet.residual);
        let closed = sphere_box_closed_form(2.0, 0.9, 1.0, 1.0);
        assert!((closed - (-8.0 / 9.0)).abs() < 1e-12);
        let fd = rows.iter().find(|r| r.theorem == "sphere-box-fd").unwrap();
        assert_eq!(fd.status, Status::Pass, "fd vs closed: {}", fd.residual);
    }

    #[test]
    fn sphere_negativity_fires_past_the_threshold() {
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let probes: Vec<_> = (0..5)
            .map(|i| {
                let rho = 0.52 + 0.08 * i as f64;
                SphereProbe {
                    location: format!("rho={rho}"),
                    x: vector![rho, 0.0, 0.0],
                    nu: vector![0.0, 1.0, 0.0],
                }
            })
            .collect();
        let rows = check_sphere_negativity("unit", &sigma, &probes, 0.0).unwrap();
        assert!(rows.iter().all(|r| r.status == Status::Fail));
    }

    #[test]
    fn sphere_threshold_sits_at_half_radius_in_the_plane_case() {
        let sigma = Hypersurface::<3>::sphere(vector![0.2, -0.1, 0.4], 0.8).unwrap();
        let rows = check_sphere_threshold("unit", &sigma, 0.0, 1e-3).unwrap();
        assert_eq!(rows[0].status, Status::Pass, "offset {}", rows[0].residual);
    }

    #[test]
    fn sphere_mesh_route_tracks_the_closed_form() {
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 1.0).unwrap();
        let rows = check_sphere_formula_mesh(
            "unit",
            &sigma,
            vector![0.9, 0.0, 0.0],
            0.05,
            10,
            5e-2,
        )
        .unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "{}: {} vs tol {}", r.location, r.residual, r.tolerance);
        }
    }

    #[test]
    fn cylinder_rows_all_pass() {
        let rows = check_cylinder_identities("unit", 1.0, 0.5, 1.0, 1e-9).unwrap();
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "{}: {}", r.theorem, r.residual);
        }
        // The displayed third quantity at r=1, s=0.5, p=1 is -1.5.
        let third: f64 = 1.0 - 1.0 - (1.0 - 0.5) * (1.0 / 1.0 + 1.0 / 0.5);
        assert!((third + 1.5).abs() < 1e-15);
        let geo = rows.iter().find(|r| r.theorem == "cylinder-geometric").unwrap();
        assert!((geo.grad_sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn translation_rows_hold_on_spheres() {
        let sigma = Hypersurface::<3>::sphere(Vector::<3>::zeros(), 2.0).unwrap();
        let queries = vec![vector![0.5, 0.3, -0.2], vector![3.1, 0.0, 0.4]];
        let rows = check_translation_lemma("unit", &sigma, &queries, 7, 1e-9).unwrap();
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "{}: {}", r.theorem, r.residual);
        }
    }

    #[test]
    fn quarter_barrier_boundary_bound_is_tight() {
        let rows =
            check_quarter_barrier_boundary::<4>("unit", 1.3, 400, 11, 1e-9).unwrap();
        let mut min_res = Scalar::INFINITY;
        for r in &rows {
            assert_eq!(r.status, Status::Pass, "residual {}", r.residual);
            min_res = min_res.min(r.residual);
        }
        // Equality is attained where the last two coordinates vanish; the
        // folded samples come close.
        assert!(min_res < 0.5, "bound far from tight: {min_res}");
    }

    #[test]
    fn report_counts_and_expectations() {
        let samples = vec![
            row("s", "alpha", 0.0, "a".into(), 1.0, 0.0, 0.0, 0.0, 0.5, 1e-3),
            row("s", "alpha", 0.1, "b".into(), 1.0, 0.0, 0.0, 0.0, -0.5, 1e-3),
            skip_row("s", "alpha", 0.2, "c".into(), 1.0),
            row("s", "beta", 0.0, "a".into(), 1.0, 0.0, 0.0, 0.0, -1.0, 0.0),
        ];
        let mut exp = BTreeMap::new();
        exp.insert("beta".into(), Expectation::Violate { min_fail_fraction: 1.0 });
        let report = VerificationReport::from_samples("s", &samples, &exp);
        assert_eq!(report.total_samples, 4);
        let alpha = report.theorems.iter().find(|t| t.theorem == "alpha").unwrap();
        assert_eq!((alpha.pass, alpha.fail, alpha.skipped), (1, 1, 1));
        assert!(alpha.unexpected);
        assert!((alpha.worst_residual + 0.5).abs() < 1e-15);
        let beta = report.theorems.iter().find(|t| t.theorem == "beta").unwrap();
        assert!(!beta.unexpected);
        assert!((report.skipped_fraction - 0.25).abs() < 1e-15);
        assert!(!report.is_clean());
    }

    #[test]
    fn csv_renders_nan_as_empty() {
        let samples = vec![skip_row("s", "alpha", 0.5, "x".into(), 2.0)];
        let text = csv_lines(&samples);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "s,alpha,0.5,x,2,,,,,,skipped_not_D0");
    }
}
