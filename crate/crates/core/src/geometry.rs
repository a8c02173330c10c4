//! Closed-form geometric kernels of a uniformly charged ball.
//!
//! Lengths and times share units (c = 1). Kernels are evaluated in units of
//! the radius, `xi = s / R`, and rescaled by powers of `R` on the way out.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Heaviside step with the right-continuous convention `theta(0) = 1`.
#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// A rigid ball of radius `R` carrying a uniform charge density `rho_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereBody {
    radius: f64,
    charge_density: f64,
    volume: f64,
}

impl SphereBody {
    pub fn new(radius: f64, charge_density: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(domain(format!("radius must be finite and positive, got {radius}")));
        }
        if !charge_density.is_finite() {
            return Err(domain(format!("charge density must be finite, got {charge_density}")));
        }
        Ok(Self {
            radius,
            charge_density,
            volume: 4.0 / 3.0 * PI * radius * radius * radius,
        })
    }

    /// Unit radius, unit charge density.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0).expect("unit body is valid")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn charge_density(&self) -> f64 {
        self.charge_density
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn total_charge(&self) -> f64 {
        self.charge_density * self.volume
    }

    /// `rho_c^2 V^2`, the prefactor shared by every force expression.
    pub fn force_scale(&self) -> f64 {
        let q = self.total_charge();
        q * q
    }

    /// Classic electrostatic self-energy of the uniform ball, `3 Q^2 / (5 R)`.
    pub fn electrostatic_self_energy(&self) -> f64 {
        3.0 * self.force_scale() / (5.0 * self.radius)
    }
}

/// A kernel value together with whether its argument lies in the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub in_support: bool,
}

impl KernelValue {
    pub const ZERO: KernelValue = KernelValue {
        value: 0.0,
        in_support: false,
    };
}

/// `I` at `xi = s / R` for `R = 1`: `(3/4)(2 - xi)(2 - 2 xi - xi^2)` on `[0, 2]`.
///
/// At `xi = 0` this returns the one-sided limit 3.
#[inline]
pub fn eval_i_normalized(xi: f64) -> f64 {
    if (0.0..=2.0).contains(&xi) {
        0.75 * (2.0 - xi) * (2.0 - 2.0 * xi - xi * xi)
    } else {
        0.0
    }
}

/// Normalized double-volume integral of `delta'(s - r) / r` over two copies of
/// the ball. Units `1 / length^3`; support `[0, 2R]`.
pub fn eval_i(s: f64, body: &SphereBody) -> KernelValue {
    let r = body.radius();
    let xi = s / r;
    if (0.0..=2.0).contains(&xi) {
        KernelValue {
            value: eval_i_normalized(xi) / (r * r * r),
            in_support: true,
        }
    } else {
        KernelValue::ZERO
    }
}

/// Radial kernel left after the angular and one radial integration:
///
/// `K(zeta2, xi) = theta(xi)/zeta2 * [(zeta2 + xi) theta(1 - zeta2 - xi)
///                                  + (zeta2 - xi) theta(1 + zeta2 - xi)]`
pub fn eval_k(zeta2: f64, xi: f64) -> Result<f64> {
    if !(zeta2 > 0.0 && zeta2 < 1.0) {
        return Err(domain(format!("zeta2 must lie in (0, 1), got {zeta2}")));
    }
    let near = (zeta2 + xi) * heaviside(1.0 - zeta2 - xi);
    let far = (zeta2 - xi) * heaviside(1.0 + zeta2 - xi);
    Ok(heaviside(xi) * (near + far) / zeta2)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rational prefactor `9 * 2^(n+2) / ((n+5)(n+3)(n+2))`, reduced in integers
/// before the single rounding to `f64`.
pub fn pair_moment_ratio(n: u32) -> f64 {
    let den = u128::from((n + 5) * (n + 3) * (n + 2));
    if n <= 100 {
        let num = 9u128 << (n + 2);
        let g = gcd(num, den);
        // num / g is a power of two times an odd factor <= 9, so both
        // conversions are exact and the division is the only rounding
        return (num / g) as f64 / (den / g) as f64;
    }
    9.0 * 2f64.powi(n as i32 + 2) / den as f64
}

/// `integral over ball x ball of r^(n-1)`, which equals
/// `9 V^2 2^(n+2) R^(n-1) / ((n+5)(n+3)(n+2))`.
pub fn pair_moment(n: i32, body: &SphereBody) -> Result<f64> {
    if n < 0 {
        return Err(Error::Domain(format!("moment order must be non-negative, got {n}")));
    }
    let v = body.volume();
    Ok(pair_moment_ratio(n as u32) * (v * v) * body.radius().powi(n - 1))
}
