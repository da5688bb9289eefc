//! Minimal profiles of revolution.
//!
//! A hypersurface of revolution in `R^{n+1}` with profile `r(z)` is minimal
//! exactly when `r'' = (n-1)(1+r'^2)/r`. The `z`-parametrized form blows up
//! (`r' -> infinity`) at the slab boundary for `n >= 3`, so the integration
//! runs in arclength variables
//!
//! ```text
//! z' = cos(phi),  r' = sin(phi),  phi' = (n-1) cos(phi) / r,
//! ```
//!
//! which stay smooth through the steep region. The conservation law
//! `r^{n-1} cos(phi) = waist^{n-1}` holds along exact solutions and serves
//! as an independent oracle in the tests.

use super::GeomError;
use crate::Scalar;

/// One emitted profile sample on the `z >= 0` branch.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSample {
    /// Arclength from the waist.
    pub s: Scalar,
    pub z: Scalar,
    pub r: Scalar,
    /// Tangent angle: `tan(phi) = dr/dz`.
    pub phi: Scalar,
}

/// Tabulated minimal profile `r(z)`, even in `z`, with `r(0) = waist`.
#[derive(Debug, Clone)]
pub struct CatenoidProfile {
    /// Surface dimension (ambient is `n + 1`).
    pub n: usize,
    pub waist: Scalar,
    /// Largest `|z|` covered by the table.
    pub z_max: Scalar,
    /// Largest radius covered by the table.
    pub r_max: Scalar,
    /// Half-width of the slab the surface is confined to, detected when
    /// `dr/dz` exceeds `1e8` (present for `n >= 3`, absent for `n = 2`).
    pub z_slab: Option<Scalar>,
    samples: Vec<ProfileSample>,
}

/// A candidate foot point of a half-plane query against the profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileFoot {
    pub s: Scalar,
    pub z: Scalar,
    pub r: Scalar,
    pub phi: Scalar,
    pub dist: Scalar,
    /// True when the minimizer sits on the truncation rim of the table.
    pub at_rim: bool,
}

#[derive(Debug, Clone, Copy)]
struct State {
    z: Scalar,
    r: Scalar,
    phi: Scalar,
}

impl State {
    fn rhs(&self, n: usize) -> State {
        let c = self.phi.cos();
        State { z: c, r: self.phi.sin(), phi: (n as Scalar - 1.0) * c / self.r }
    }

    fn axpy(&self, h: Scalar, d: &State) -> State {
        State { z: self.z + h * d.z, r: self.r + h * d.r, phi: self.phi + h * d.phi }
    }
}

fn rk4_step(y: &State, h: Scalar, n: usize) -> State {
    let k1 = y.rhs(n);
    let k2 = y.axpy(0.5 * h, &k1).rhs(n);
    let k3 = y.axpy(0.5 * h, &k2).rhs(n);
    let k4 = y.axpy(h, &k3).rhs(n);
    State {
        z: y.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        r: y.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
        phi: y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
    }
}

impl CatenoidProfile {
    /// Integrates the profile from the waist out to radius `r_limit`.
    ///
    /// The table is emitted densely enough that finite differences of the
    /// samples reproduce zero mean curvature to `1e-4 / waist`. For
    /// `n >= 3` the integration continues past `r_limit` (without emitting)
    /// until `dr/dz > 1e8` to report the slab half-width.
    pub fn solve(n: usize, waist: Scalar, r_limit: Scalar) -> Result<Self, GeomError> {
        if n < 2 {
            return Err(GeomError::ProfileDimension(n));
        }
        if waist <= 0.0 || !waist.is_finite() {
            return Err(GeomError::InvalidParameter(format!("waist {waist} <= 0")));
        }
        if r_limit <= waist {
            return Err(GeomError::InvalidParameter(format!(
                "r_limit {r_limit} must exceed waist {waist}"
            )));
        }
        let tol = 1e-12 * waist.max(1.0);
        let mut y = State { z: 0.0, r: waist, phi: 0.0 };
        let mut s = 0.0;
        let mut h = 1e-3 * waist;
        let mut samples = vec![ProfileSample { s, z: 0.0, r: waist, phi: 0.0 }];
        let mut s_last = 0.0;
        let out_step = |r: Scalar| (0.005 * waist * (r / waist).powi(2)).clamp(0.005 * waist, 0.25 * waist);
        // Phase 1: table out to r_limit.
        while y.r < r_limit {
            let (ny, ns, nh) = adaptive_step(&y, s, h, n, tol)?;
            y = ny;
            s = ns;
            h = nh;
            if s - s_last >= out_step(y.r) || y.r >= r_limit {
                samples.push(ProfileSample { s, z: y.z, r: y.r, phi: y.phi });
                s_last = s;
            }
        }
        let z_max = y.z;
        let r_max = y.r;
        // Phase 2: slab detection. tan(phi) > 1e8 is the stop event; for
        // n = 2 the decay cos(phi) = waist/r never gets there at reachable
        // radii, and the profile is entire, so the search is skipped.
        let z_slab = if n >= 3 {
            let mut guard = 0usize;
            while y.phi.tan() <= 1e8 {
                let (ny, ns, nh) = adaptive_step(&y, s, h, n, tol)?;
                y = ny;
                s = ns;
                h = nh;
                guard += 1;
                if guard > 50_000_000 {
                    return Err(GeomError::IntegrationStepUnderflow(s));
                }
            }
            Some(y.z)
        } else {
            None
        };
        Ok(Self { n, waist, z_max, r_max, z_slab, samples })
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    /// Profile value and tangent angle at signed height `z`.
    ///
    /// Near the slab boundary the inversion `z -> s` is refined against the
    /// radius as well, so on-surface queries stay well conditioned.
    pub fn r_phi_at(&self, z: Scalar) -> Result<(Scalar, Scalar), GeomError> {
        let az = z.abs();
        if az > self.z_max * (1.0 + 1e-9) + 1e-12 {
            return Err(GeomError::InvalidParameter(format!(
                "z = {z} outside profile table (z_max = {})",
                self.z_max
            )));
        }
        let k = self.segment_by_z(az);
        let (a, b) = (self.samples[k], self.samples[k + 1]);
        // Newton with bisection fallback on the Hermite interpolant of z(s).
        let mut lo = a.s;
        let mut hi = b.s;
        let mut sm = 0.5 * (lo + hi);
        for _ in 0..60 {
            let (zm, _, phim) = hermite_eval(&a, &b, sm);
            let err = zm - az;
            if err.abs() < 1e-14 * self.waist.max(1.0) {
                break;
            }
            if err > 0.0 {
                hi = sm;
            } else {
                lo = sm;
            }
            let dz = phim.cos();
            let newton = sm - err / dz.max(1e-12);
            sm = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        let (_, r, phi) = hermite_eval(&a, &b, sm);
        Ok((r, if z >= 0.0 { phi } else { -phi }))
    }

    /// Unsigned distance from a half-plane point `(rho, z)` to the profile
    /// curve (both branches, rim included).
    pub fn half_plane_distance(&self, rho: Scalar, z: Scalar) -> Scalar {
        self.closest_on_profile(rho, z, 1e-7)
            .first()
            .map(|f| f.dist)
            .unwrap_or(Scalar::INFINITY)
    }

    /// All local minimizers of the distance from `(rho, z)` to the profile,
    /// sorted by distance. Candidates within relative `tol` of the minimum
    /// are kept; the caller decides multiplicity.
    pub fn closest_on_profile(&self, rho: Scalar, z: Scalar, tol: Scalar) -> Vec<ProfileFoot> {
        // The profile is even: work with |z| and mirror the result. A query
        // at z = 0 sees both mirrored feet; evaluating on the signed domain
        // keeps that case exact.
        let m = self.samples.len();
        if m < 2 {
            return Vec::new();
        }
        // Signed arclength domain [-S, S]; segment j spans signed samples.
        let seg_count = 2 * (m - 1);
        let seg = |j: usize| -> (ProfileSample, ProfileSample) {
            if j < m - 1 {
                // Mirror branch, descending: signed s in [-S, 0].
                let a = self.samples[m - 1 - j];
                let b = self.samples[m - 2 - j];
                (mirror(&a), mirror(&b))
            } else {
                let k = j - (m - 1);
                (self.samples[k], self.samples[k + 1])
            }
        };
        let mut dists = Vec::with_capacity(seg_count);
        for j in 0..seg_count {
            let (a, b) = seg(j);
            dists.push(segment_distance(rho, z, &a, &b));
        }
        // Local minima over the segment chain, plus the two rim endpoints.
        let mut brackets: Vec<usize> = Vec::new();
        for j in 0..seg_count {
            let left = if j == 0 { Scalar::INFINITY } else { dists[j - 1] };
            let right = if j + 1 == seg_count { Scalar::INFINITY } else { dists[j + 1] };
            if dists[j] <= left && dists[j] <= right {
                brackets.push(j);
            }
        }
        let mut feet: Vec<ProfileFoot> = Vec::new();
        for j in brackets {
            let (a, b) = seg(j);
            // Golden-section on the Hermite curve over the bracket, extended
            // one segment each way so minima at segment joints refine fine.
            let lo = if j == 0 { a.s } else { seg(j - 1).0.s };
            let hi = if j + 1 == seg_count { b.s } else { seg(j + 1).1.s };
            let g = |s: Scalar| {
                let (zz, rr, _) = self.eval_signed(s);
                (rho - rr) * (rho - rr) + (z - zz) * (z - zz)
            };
            let s_best = golden_min(g, lo, hi, 1e-13 * self.waist.max(1.0));
            let (zf, rf, phif) = self.eval_signed(s_best);
            let dist = ((rho - rf).powi(2) + (z - zf).powi(2)).sqrt();
            let at_rim = (s_best - self.samples[m - 1].s).abs() < 1e-9
                || (s_best + self.samples[m - 1].s).abs() < 1e-9;
            feet.push(ProfileFoot { s: s_best, z: zf, r: rf, phi: phif, dist, at_rim });
        }
        feet.sort_by(|x, y| x.dist.partial_cmp(&y.dist).unwrap());
        // Drop near-duplicates (same minimizer found from adjacent brackets)
        // and anything far above the minimum.
        let mut out: Vec<ProfileFoot> = Vec::new();
        if let Some(best) = feet.first().map(|f| f.dist) {
            for f in feet {
                if f.dist > best * (1.0 + tol) + tol * self.waist {
                    continue;
                }
                if out
                    .iter()
                    .all(|o| ((o.z - f.z).powi(2) + (o.r - f.r).powi(2)).sqrt() > 10.0 * tol * self.waist.max(best))
                {
                    out.push(f);
                }
            }
        }
        out
    }

    /// Locates arclength from an on-surface half-plane point.
    pub fn locate_s(&self, rho: Scalar, z: Scalar) -> Option<Scalar> {
        self.closest_on_profile(rho, z, 1e-7).first().map(|f| f.s)
    }

    /// Curve point at signed arclength (`z` and `phi` odd, `r` even).
    pub fn eval_signed(&self, s: Scalar) -> (Scalar, Scalar, Scalar) {
        let sa = s.abs();
        let k = self.segment_by_s(sa);
        let (a, b) = (self.samples[k], self.samples[k + 1]);
        let (z, r, phi) = hermite_eval(&a, &b, sa.min(b.s));
        if s >= 0.0 {
            (z, r, phi)
        } else {
            (-z, r, -phi)
        }
    }

    fn segment_by_z(&self, z: Scalar) -> usize {
        let mut lo = 0usize;
        let mut hi = self.samples.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.samples[mid].z <= z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn segment_by_s(&self, s: Scalar) -> usize {
        let mut lo = 0usize;
        let mut hi = self.samples.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.samples[mid].s <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn mirror(p: &ProfileSample) -> ProfileSample {
    ProfileSample { s: -p.s, z: -p.z, r: p.r, phi: -p.phi }
}

/// One accepted adaptive RK4 step (step doubling error control).
fn adaptive_step(
    y: &State,
    s: Scalar,
    h_try: Scalar,
    n: usize,
    tol: Scalar,
) -> Result<(State, Scalar, Scalar), GeomError> {
    let mut h = h_try;
    loop {
        if h < 1e-13 {
            return Err(GeomError::IntegrationStepUnderflow(s));
        }
        let full = rk4_step(y, h, n);
        let half = rk4_step(&rk4_step(y, 0.5 * h, n), 0.5 * h, n);
        let err = ((full.z - half.z).powi(2) + (full.r - half.r).powi(2) + (full.phi - half.phi).powi(2))
            .sqrt()
            / 15.0;
        let cap = tol * (1.0 + y.r.abs());
        if err <= cap {
            let grow = if err > 0.0 { 0.9 * (cap / err).powf(0.2) } else { 5.0 };
            return Ok((half, s + h, h * grow.clamp(0.2, 5.0)));
        }
        h *= 0.9 * (cap / err).powf(0.25).clamp(0.1, 0.9);
    }
}

/// Cubic Hermite interpolation of `(z, r, phi)` between two samples, using
/// the exact arclength derivatives `z' = cos(phi)`, `r' = sin(phi)`.
fn hermite_eval(a: &ProfileSample, b: &ProfileSample, s: Scalar) -> (Scalar, Scalar, Scalar) {
    let w = b.s - a.s;
    if w <= 0.0 {
        return (a.z, a.r, a.phi);
    }
    let t = ((s - a.s) / w).clamp(0.0, 1.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let interp = |va: Scalar, da: Scalar, vb: Scalar, db: Scalar| {
        h00 * va + h10 * w * da + h01 * vb + h11 * w * db
    };
    let z = interp(a.z, a.phi.cos(), b.z, b.phi.cos());
    let r = interp(a.r, a.phi.sin(), b.r, b.phi.sin());
    // Tangent angle of the interpolated curve itself, so that normals and
    // feet computed from the same table agree to roundoff. The Hermite
    // basis derivatives (per unit t) divided by w give dz/ds, dr/ds.
    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = -d00;
    let d11 = 3.0 * t2 - 2.0 * t;
    let deriv = |va: Scalar, da: Scalar, vb: Scalar, db: Scalar| {
        (d00 * va + d01 * vb) / w + d10 * da + d11 * db
    };
    let dz = deriv(a.z, a.phi.cos(), b.z, b.phi.cos());
    let dr = deriv(a.r, a.phi.sin(), b.r, b.phi.sin());
    let phi = dr.atan2(dz);
    (z, r, phi)
}

/// Distance from `(rho, z)` to the straight chord of one profile segment.
fn segment_distance(rho: Scalar, z: Scalar, a: &ProfileSample, b: &ProfileSample) -> Scalar {
    let (ax, ay) = (a.r, a.z);
    let (bx, by) = (b.r, b.z);
    let (dx, dy) = (bx - ax, by - ay);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((rho - ax) * dx + (z - ay) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (ax + t * dx, ay + t * dy);
    ((rho - px).powi(2) + (z - py).powi(2)).sqrt()
}

fn golden_min(g: impl Fn(Scalar) -> Scalar, mut a: Scalar, mut b: Scalar, tol: Scalar) -> Scalar {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while b - a > tol {
        if f1 > f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
    }
    0.5 * (a + b)
}
