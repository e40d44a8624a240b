//! Composite-Simpson quadrature with panel doubling.

use crate::error::{Error, Result};

/// Maximum number of panels before giving up.
pub const MAX_PANELS: usize = 1 << 20;

/// Default absolute tolerance.
pub const ABS_TOL: f64 = 1e-10;
/// Default relative tolerance.
pub const REL_TOL: f64 = 1e-10;

/// Integrates `f` over `[a, b]` by composite Simpson rule, doubling the panel
/// count until two successive estimates agree to `max(abs_tol, rel_tol*|I|)`
/// or `MAX_PANELS` is reached.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let mut panels = 8usize;
    let mut prev = simpson(&f, a, b, panels);
    loop {
        panels *= 2;
        let cur = simpson(&f, a, b, panels);
        let tol = abs_tol.max(rel_tol * cur.abs());
        if (cur - prev).abs() <= tol {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return Err(Error::QuadratureNonconvergence {
                tol,
                panels,
                estimate: cur,
            });
        }
        prev = cur;
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for j in 1..panels {
        let x = a + j as f64 * h;
        sum += if j % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}
