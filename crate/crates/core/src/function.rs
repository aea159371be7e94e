use std::fmt;
use std::sync::Arc;

/// A real function of one variable, shareable across threads.
///
/// Coefficients, loads, and manufactured solutions are all represented this
/// way and sampled directly at quadrature points. A function built with
/// [`ScalarFn::constant`] remembers its value so callers can recognise
/// constant coefficients.
#[derive(Clone)]
pub struct ScalarFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    constant: Option<f64>,
}

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            constant: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            constant: Some(c),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant {
            Some(c) => write!(f, "ScalarFn::constant({c})"),
            None => f.write_str("ScalarFn(<closure>)"),
        }
    }
}

impl From<f64> for ScalarFn {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

/// `|t|^(s-1) sign(t)`, i.e. the derivative of `|t|^s / s`; zero at `t = 0`.
#[inline]
pub fn signed_pow(t: f64, s: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(s - 1.0)
    }
}

/// `|t|^s` with the convention `0^s = 0` for `s > 0`.
#[inline]
pub fn abs_pow(t: f64, s: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(s)
    }
}
