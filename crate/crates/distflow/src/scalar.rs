//! Closed-form scalar machinery behind the differential inequalities.
//!
//! Everything here is a statement about real numbers: the rational function
//! `F` whose supremum controls the distance Laplacian, the constrained
//! minimum of `sum x_i^2/(1+x_i)`, the dimensional constants, and the chain
//! rule for powers of a caloric quantity. Each closed form is validated in
//! the tests against a brute-force oracle (grid search, random restarts, or
//! finite differences) that knows nothing about the formula.

use serde::Serialize;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ScalarError {
    #[error("b must lie in [0, 1], got {0}")]
    BOutOfRange(f64),
    #[error("beta must be >= 2, got {0}")]
    BetaOutOfRange(f64),
    #[error("s must lie in [0, 1), got {0}")]
    SOutOfDomain(f64),
    #[error("dimension must be >= {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("L must be positive, got {0}")]
    NonPositiveL(f64),
    #[error("d must be positive, got {0}")]
    NonPositiveD(f64),
}

/// Parameters of the rational function
/// `F(s) = b^2 s/(1-s) - s^2/(1-s) - s^2/(beta-1+s)` on `[0, 1)`.
///
/// `b` plays the role of a tangential gradient magnitude (so `b <= 1` by the
/// Lipschitz bound) and `beta >= 2` is a dimensional weight. `c` caches
/// `sqrt(1-b^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FParams<R: Real> {
    pub b: R,
    pub beta: R,
    pub c: R,
}

impl<R: Real> FParams<R> {
    pub fn new(b: R, beta: R) -> Result<Self, ScalarError> {
        if !(b >= R::zero() && b <= R::one()) {
            return Err(ScalarError::BOutOfRange(b.to_f64().unwrap_or(f64::NAN)));
        }
        if !(beta >= R::of(2.0)) {
            return Err(ScalarError::BetaOutOfRange(
                beta.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let c = (R::one() - b * b).max(R::zero()).sqrt();
        Ok(Self { b, beta, c })
    }

    /// Evaluates `F(s)` on its domain `0 <= s < 1`.
    pub fn f_eval(&self, s: R) -> Result<R, ScalarError> {
        if !(s >= R::zero() && s < R::one()) {
            return Err(ScalarError::SOutOfDomain(s.to_f64().unwrap_or(f64::NAN)));
        }
        let one = R::one();
        let b2 = self.b * self.b;
        let s2 = s * s;
        Ok(b2 * s / (one - s) - s2 / (one - s) - s2 / (self.beta - one + s))
    }

    /// Supremum of `F` over `[0, 1)` together with its maximizer.
    ///
    /// The supremum is `((beta-1)/beta) (1-c)^2`, attained at
    /// `s0 = (beta-1)(1-c)/(beta-1+c)`. For `b = 1` the maximizer degenerates
    /// to the boundary `s0 = 1` and the supremum is approached but not
    /// attained. The value is always `<= ((beta-1)/beta) b^4`.
    pub fn f_sup(&self) -> (R, R) {
        let one = R::one();
        let bm1 = self.beta - one;
        let sup = bm1 / self.beta * (one - self.c) * (one - self.c);
        let s0 = bm1 * (one - self.c) / (bm1 + self.c);
        (sup, s0)
    }

    /// The weaker closed-form cap `((beta-1)/beta) b^4` on the supremum.
    pub fn f_sup_weak_bound(&self) -> R {
        let one = R::one();
        let b2 = self.b * self.b;
        (self.beta - one) / self.beta * b2 * b2
    }
}

/// Minimum of `sum_{i=2..n} x_i^2/(1+x_i)` over `x_i > -1` with
/// `sum x_i = L > 0`, for `n >= 2` (so `n-1` variables).
///
/// Returns the minimal value `L^2/(n-1+L)` and the minimizer, which puts
/// every coordinate at `L/(n-1)`.
pub fn constrained_min<R: Real>(n: usize, l: R) -> Result<(R, Vec<R>), ScalarError> {
    if n < 2 {
        return Err(ScalarError::DimensionTooSmall { min: 2, got: n });
    }
    if !(l > R::zero()) {
        return Err(ScalarError::NonPositiveL(l.to_f64().unwrap_or(f64::NAN)));
    }
    let m = R::of((n - 1) as f64);
    let value = l * l / (m + l);
    let argmin = vec![l / m; n - 1];
    Ok((value, argmin))
}

/// Lower bound for the one-sided limit `beta -> infinity`:
/// `s^2/(1-s) - b^2 s/(1-s) >= -(1-c)^2 >= -b^4` on `[0, 1)`.
///
/// Returns `-(1-c)^2` with `c = sqrt(1-b^2)`.
pub fn baby_bound<R: Real>(b: R) -> Result<R, ScalarError> {
    if !(b >= R::zero() && b <= R::one()) {
        return Err(ScalarError::BOutOfRange(b.to_f64().unwrap_or(f64::NAN)));
    }
    let c = (R::one() - b * b).max(R::zero()).sqrt();
    let omc = R::one() - c;
    Ok(-(omc * omc))
}

/// Gradient deficit constant for a minimal hypersurface over a hyperplane:
/// `epsilon_n = (4(n-1))^{-4}` for `n >= 2`.
pub fn epsilon_n<R: Real>(n: usize) -> Result<R, ScalarError> {
    if n < 2 {
        return Err(ScalarError::DimensionTooSmall { min: 2, got: n });
    }
    let q = R::of((4 * (n - 1)) as f64);
    Ok((q * q * q * q).recip())
}

/// Curvature weight in the strengthened supersolution inequality:
/// `1/(2n)` for `n = 1` and `1/(2 n^2 (n-1))` for `n >= 2`.
///
/// The `n >= 2` value comes from pairing the proof's slack `s^2/(2n)`
/// (with `s = |alpha_1|`) against the sharp trace-zero eigenvalue bound
/// `|A|^2 <= n(n-1) lambda_1^2`, which the tests validate by random
/// sampling.
pub fn kappa_n<R: Real>(n: usize) -> Result<R, ScalarError> {
    if n < 1 {
        return Err(ScalarError::DimensionTooSmall { min: 1, got: n });
    }
    if n == 1 {
        Ok(R::of(0.5))
    } else {
        Ok(R::of((2 * n * n * (n - 1)) as f64).recip())
    }
}

/// Chain rule for powers of a caloric quantity: with `box = d/dt - Laplace`,
/// `box(d^p) = p d^{p-1} box(d) - p(p-1) d^{p-2} |grad d|^2`.
///
/// `grad_sq` is the squared gradient of `d` in whatever ambient the
/// Laplacian of `box_d` was taken; the identity is purely algebraic.
pub fn power_box_identity<R: Real>(
    p: R,
    d: R,
    box_d: R,
    grad_sq: R,
) -> Result<R, ScalarError> {
    if !(d > R::zero()) {
        return Err(ScalarError::NonPositiveD(d.to_f64().unwrap_or(f64::NAN)));
    }
    let one = R::one();
    Ok(p * d.powf(p - one) * box_d - p * (p - one) * d.powf(p - R::of(2.0)) * grad_sq)
}
