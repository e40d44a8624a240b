//! Forward-mode dual numbers: one derivative variable, exact chain rule.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub val: f64,
    pub der: f64,
}

impl Dual {
    pub fn constant(val: f64) -> Self {
        Self { val, der: 0.0 }
    }

    /// Seeds the differentiation variable with derivative 1.
    pub fn variable(val: f64) -> Self {
        Self { val, der: 1.0 }
    }

    pub fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        Self {
            val: s,
            der: self.der / (2.0 * s),
        }
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        Self {
            val: e,
            der: self.der * e,
        }
    }

    pub fn ln(self) -> Self {
        Self {
            val: self.val.ln(),
            der: self.der / self.val,
        }
    }

    pub fn sin(self) -> Self {
        Self {
            val: self.val.sin(),
            der: self.der * self.val.cos(),
        }
    }

    pub fn cos(self) -> Self {
        Self {
            val: self.val.cos(),
            der: -self.der * self.val.sin(),
        }
    }

    pub fn tan(self) -> Self {
        let c = self.val.cos();
        Self {
            val: self.val.tan(),
            der: self.der / (c * c),
        }
    }

    pub fn tanh(self) -> Self {
        let t = self.val.tanh();
        Self {
            val: t,
            der: self.der * (1.0 - t * t),
        }
    }

    /// |x|; caller must reject val == 0 when the derivative is needed.
    pub fn abs(self) -> Self {
        Self {
            val: self.val.abs(),
            der: self.der * self.val.signum(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            val: self.val + rhs.val,
            der: self.der + rhs.der,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            val: self.val - rhs.val,
            der: self.der - rhs.der,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual {
            val: self.val * rhs.val,
            der: self.der * rhs.val + self.val * rhs.der,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual {
            val: self.val / rhs.val,
            der: (self.der * rhs.val - self.val * rhs.der) / (rhs.val * rhs.val),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            val: -self.val,
            der: -self.der,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn chain_rule_per_function() {
        // (f o g)' with g(x) = x^2 + 1 at a handful of points
        let funcs: Vec<(fn(Dual) -> Dual, fn(f64) -> f64, &str)> = vec![
            (Dual::sqrt, f64::sqrt, "sqrt"),
            (Dual::exp, f64::exp, "exp"),
            (Dual::ln, f64::ln, "log"),
            (Dual::sin, f64::sin, "sin"),
            (Dual::cos, f64::cos, "cos"),
            (Dual::tan, f64::tan, "tan"),
            (Dual::tanh, f64::tanh, "tanh"),
        ];
        for (df, rf, name) in funcs {
            for &x in &[0.3, 0.9, 1.7] {
                let g = |u: f64| u * u + 1.0;
                let inner = Dual::variable(x) * Dual::variable(x) + Dual::constant(1.0);
                let d = df(inner);
                let expected = fd(|u| rf(g(u)), x);
                assert!(
                    (d.der - expected).abs() < 1e-6 * expected.abs().max(1.0),
                    "{name} at {x}: {} vs {expected}",
                    d.der
                );
            }
        }
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::variable(2.0);
        let q = x / (x * x + Dual::constant(1.0));
        // d/dx x/(x^2+1) = (1 - x^2)/(x^2+1)^2 = -3/25
        assert!((q.der + 3.0 / 25.0).abs() < 1e-14);
    }
}
