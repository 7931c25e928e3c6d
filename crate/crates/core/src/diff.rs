//! Central finite differences with one level of Richardson extrapolation.

use nalgebra::{DVector, SVector};

use crate::error::{Error, Result};
use crate::linalg::{re, C64};

/// Values that can be differenced: a real vector space with a norm.
pub trait FdValue: Clone {
    /// `a * self + b * other`
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self;
    fn magnitude(&self) -> f64;
}

impl FdValue for f64 {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl<const D: usize> FdValue for SVector<C64, D> {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self * re(a) + other * re(b)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl FdValue for DVector<C64> {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self * re(a) + other * re(b)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepPolicy {
    pub initial: f64,
    pub floor: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl StepPolicy {
    /// `h = 1e-5 max(1, |x|)`, giving up below `1e-9 max(1, |x|)`.
    pub fn at(x: f64) -> Self {
        let scale = x.abs().max(1.0);
        Self {
            initial: 1e-5 * scale,
            floor: 1e-9 * scale,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
        }
    }
}

/// Derivative of `f` at `x`. Two Richardson estimates at successive step
/// sizes must agree before one is accepted; otherwise the step is halved.
pub fn derivative<T, F>(mut f: F, x: f64, policy: StepPolicy) -> Result<T>
where
    T: FdValue,
    F: FnMut(f64) -> Result<T>,
{
    let mut central = |h: f64| -> Result<T> {
        let plus = f(x + h)?;
        let minus = f(x - h)?;
        Ok(plus.lincomb(0.5 / h, &minus, -0.5 / h))
    };
    let extrapolate = |coarse: &T, fine: &T| fine.lincomb(4.0 / 3.0, coarse, -1.0 / 3.0);

    let mut h = policy.initial;
    let mut c_h = central(h)?;
    let mut c_h2 = central(h / 2.0)?;
    loop {
        let c_h4 = central(h / 4.0)?;
        let coarse = extrapolate(&c_h, &c_h2);
        let fine = extrapolate(&c_h2, &c_h4);
        let gap = fine.lincomb(1.0, &coarse, -1.0).magnitude();
        if gap <= policy.rel_tol * fine.magnitude() + policy.abs_tol {
            return Ok(fine);
        }
        h /= 2.0;
        if h / 4.0 < policy.floor {
            return Err(Error::StepUnderflow { floor: policy.floor });
        }
        c_h = c_h2;
        c_h2 = c_h4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_smooth_function() {
        let d = derivative(|x: f64| Ok(x.sin() * x.exp()), 0.7, StepPolicy::at(0.7)).unwrap();
        let exact = 0.7f64.exp() * (0.7f64.sin() + 0.7f64.cos());
        assert!((d - exact).abs() < 1e-9);
    }

    #[test]
    fn rough_function_underflows() {
        // Oscillation far below the step floor never lets the estimates agree.
        let f = |x: f64| Ok((x * 1e12).sin());
        let err = derivative(f, 0.3, StepPolicy::at(0.3)).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
    }

    #[test]
    fn propagates_evaluation_errors() {
        let f = |_x: f64| -> Result<f64> { Err(Error::ZeroNorm(0.0)) };
        assert!(derivative(f, 0.0, StepPolicy::at(0.0)).is_err());
    }
}
