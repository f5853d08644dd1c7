//! The equalized Chernoff rate `q(x)`, the upper-bound constant `x̄(t)` and
//! the Bollobás–Winkler lower bound.
//!
//! For a scaled chain length `x` and dimension `t`, `q(x; a, b)` is the
//! largest of three rates:
//!
//! * `ρ(a) = min_{u∈(0,1)} Γ(1-u)^t e^{-a u}`, decreasing from 1 to 0 on `a > γ t`,
//! * `(1 + b) e^{-b}`, decreasing from 1 to 0 on `b > 0`,
//! * `exp(-e^{-a} / (x^t (1 + b)^t))`, increasing in both `a` and `b`.
//!
//! The minimum over `(a, b)` is reached where all three coincide. For fixed
//! `a` the last two are equalized by [`b_root`]; [`a_root`] then equalizes
//! `ρ(a)` with the common value. `x̄(t)` is the first `x` in
//! `[e^{-γ}, e]` at which the growth factor `(e/x)^t q(x)` drops below 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{digamma, inv_digamma_unit, log_gamma, EULER_GAMMA};

/// `ζ(2) = π²/6`, the curvature of `ln Γ(1 - u)` at `u = 0`.
const ZETA_2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Below this inner stationary point `ρ` switches to its quadratic expansion.
const RHO_EDGE_U: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Absolute residual every root finder must reach.
    pub root_tol: f64,
    /// Iteration cap for bisections and for bracket expansion.
    pub max_iter: usize,
    /// Number of equally spaced points in the `x̄` scan over `[e^{-γ}, e]`.
    pub x_grid_points: usize,
    /// Expansion factor applied to an upper bracket until the sign flips.
    pub bracket_growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-10,
            max_iter: 200,
            x_grid_points: 4096,
            bracket_growth: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.root_tol.is_finite() && self.root_tol > 0.0) {
            return Err(Error::Argument(format!(
                "root_tol must be positive, got {}",
                self.root_tol
            )));
        }
        if self.max_iter < 50 {
            return Err(Error::Argument(format!(
                "max_iter must be at least 50, got {}",
                self.max_iter
            )));
        }
        if self.x_grid_points < 64 {
            return Err(Error::Argument(format!(
                "x_grid_points must be at least 64, got {}",
                self.x_grid_points
            )));
        }
        if !(self.bracket_growth.is_finite() && self.bracket_growth > 1.0) {
            return Err(Error::Argument(format!(
                "bracket_growth must exceed 1, got {}",
                self.bracket_growth
            )));
        }
        Ok(())
    }
}

/// Value of `ρ(a)` together with the minimizing `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho {
    pub value: f64,
    pub u_star: f64,
}

/// The equalized point `(a(x), b(x))` with its rate and growth factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEvaluation {
    pub x: f64,
    pub t: u32,
    pub a: f64,
    pub b: f64,
    pub u: f64,
    pub q: f64,
    /// `(e/x)^t q`.
    pub growth: f64,
}

impl QEvaluation {
    /// The three rates of `q(x; a, b)` at the stored point.
    pub fn terms(&self) -> Result<[f64; 3]> {
        q_terms(self.x, self.t, self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub t: u32,
    pub bw_lower: f64,
    pub bar_x: f64,
    /// `q` evaluated at `x = bar_x`.
    pub certificate: QEvaluation,
    /// Largest absolute defect of the two equalization equations at the certificate.
    pub residuals: f64,
    /// Number of grid cells in which the growth factor crosses 1.
    pub crossings: usize,
    /// Growth was already below 1 at `x = e^{-γ}`; `bar_x` sits on the domain edge.
    pub edge_attained: bool,
}

impl BoundReport {
    pub fn multiple_crossings(&self) -> bool {
        self.crossings > 1
    }
}

pub fn x_domain() -> (f64, f64) {
    ((-EULER_GAMMA).exp(), std::f64::consts::E)
}

fn check_dim(t: u32) -> Result<()> {
    if t < 2 {
        return Err(Error::Domain(format!(
            "dimension must be at least 2, got {t}"
        )));
    }
    Ok(())
}

fn check_x_domain(x: f64) -> Result<()> {
    let (lo, hi) = x_domain();
    if !(x >= lo && x <= hi) {
        return Err(Error::Domain(format!(
            "x = {x} outside [e^-gamma, e] = [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `ρ(a) = min_{u∈(0,1)} Γ(1-u)^t e^{-a u}` and its minimizer, for `a > γ t`.
///
/// The minimizer solves `t ψ(1 - u) + a = 0`.
pub fn rho(a: f64, t: u32) -> Result<Rho> {
    check_dim(t)?;
    let tf = f64::from(t);
    let edge = EULER_GAMMA * tf;
    if !(a.is_finite() && a > edge) {
        return Err(Error::Domain(format!(
            "rho requires a > gamma*t = {edge}, got {a}"
        )));
    }
    let v = inv_digamma_unit(-a / tf)?;
    let u = 1.0 - v;
    if u < RHO_EDGE_U {
        // t ln Γ(1-u) - a u ≈ -(a - γt) u + t ζ(2) u² / 2
        let excess = a - edge;
        let u_star = excess / (tf * ZETA_2);
        let value = (-excess * excess / (2.0 * tf * ZETA_2)).exp();
        return Ok(Rho { value, u_star });
    }
    let value = (tf * log_gamma(v)? - a * u).exp();
    Ok(Rho { value, u_star: u })
}

/// `ln(1+b) - b + e^{-a} / (x^t (1+b)^t)`; zero exactly at the `b` equalizing the
/// second and third rates, strictly decreasing in `b`.
pub fn h_residual(x: f64, a: f64, t: u32, b: f64) -> f64 {
    let tf = f64::from(t);
    let log_c = -a - tf * x.ln();
    b.ln_1p() - b + (log_c - tf * b.ln_1p()).exp()
}

/// Bisect a decreasing function with `f(lo) > 0 ≥ f(hi)` down to adjacent floats.
/// Returns the endpoint with the smaller `|f|` and that residual.
fn bisect_decreasing<F>(mut lo: f64, mut hi: f64, max_iter: usize, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_hi = f(hi)?;
    let mut f_lo: Option<f64> = None;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm > 0.0 {
            lo = mid;
            f_lo = Some(fm);
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    match f_lo {
        Some(fl) if fl.abs() < f_hi.abs() => Ok((lo, fl)),
        _ => Ok((hi, f_hi)),
    }
}

/// Unique `b > 0` with `(1+b) e^{-b} = exp(-e^{-a} / (x^t (1+b)^t))`.
pub fn b_root(x: f64, a: f64, t: u32, cfg: &SolverConfig) -> Result<f64> {
    check_dim(t)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("b_root requires x > 0, got {x}")));
    }
    if !a.is_finite() {
        return Err(Error::Domain(format!("b_root requires finite a, got {a}")));
    }
    let tf = f64::from(t);
    let log_c = -a - tf * x.ln();
    let h_fast = |b: f64| {
        let l = b.ln_1p();
        l - b + (log_c - tf * l).exp()
    };
    let h = |b: f64| -> Result<f64> { Ok(h_fast(b)) };
    let mut upper = 1.0;
    let mut expansions = 0;
    while h_fast(upper) > 0.0 {
        expansions += 1;
        if expansions > cfg.max_iter || !upper.is_finite() {
            return Err(Error::Numerical(format!(
                "b_root: no bracket for x = {x}, a = {a}, t = {t}"
            )));
        }
        upper *= cfg.bracket_growth;
    }
    let (b, res) = bisect_decreasing(0.0, upper, cfg.max_iter, h)?;
    if res.abs() > cfg.root_tol {
        return Err(Error::Numerical(format!(
            "b_root: residual {res:e} above tolerance at x = {x}, a = {a}, t = {t}"
        )));
    }
    Ok(b)
}

/// `ρ(a) - (1 + b(a,x)) e^{-b(a,x)}`, decreasing in `a`.
fn a_equation(x: f64, a: f64, t: u32, cfg: &SolverConfig) -> Result<f64> {
    let b = b_root(x, a, t, cfg)?;
    Ok(rho(a, t)?.value - second_rate(b))
}

fn second_rate(b: f64) -> f64 {
    (b.ln_1p() - b).exp()
}

fn third_rate(x: f64, t: u32, a: f64, b: f64) -> f64 {
    let tf = f64::from(t);
    (-(-a - tf * x.ln() - tf * b.ln_1p()).exp()).exp()
}

/// Unique `a > γ t` with `ρ(a) = (1 + b(a,x)) e^{-b(a,x)}`, for any `x > 0`.
///
/// The search runs over the minimizing `u ∈ (0, 1)` of `ρ`, which fixes
/// `a = -t ψ(1-u)` strictly increasing in `u`, so each step costs one digamma
/// instead of an inner inversion.
fn a_root_unchecked(x: f64, t: u32, cfg: &SolverConfig) -> Result<f64> {
    let tf = f64::from(t);
    let edge = EULER_GAMMA * tf;
    let a_of = |u: f64| -> Result<f64> { Ok(-tf * digamma(1.0 - u)?) };
    let f = |u: f64| -> Result<f64> {
        let a = a_of(u)?;
        let b = b_root(x, a, t, cfg)?;
        Ok((tf * log_gamma(1.0 - u)? - a * u).exp() - second_rate(b))
    };
    let mut hi = 0.5;
    let mut expansions = 0;
    while f(hi)? > 0.0 {
        expansions += 1;
        hi = 1.0 - (1.0 - hi) / cfg.bracket_growth;
        if expansions > cfg.max_iter || hi >= 1.0 {
            return Err(Error::Numerical(format!(
                "a_root: no sign change for x = {x}, t = {t}"
            )));
        }
    }
    // f(0+) = 1 - (1+b)e^{-b} > 0; u = 0 itself is never evaluated.
    let (u, _) = bisect_decreasing(0.0, hi, cfg.max_iter, f)?;
    let a = a_of(u)?;
    let res = if a > edge {
        a_equation(x, a, t, cfg)?
    } else {
        f64::INFINITY
    };
    if res.abs() > cfg.root_tol {
        return Err(Error::Numerical(format!(
            "a_root: residual {res:e} above tolerance at x = {x}, t = {t}"
        )));
    }
    Ok(a)
}

/// Unique `a > γ t` with `ρ(a) = (1 + b(a,x)) e^{-b(a,x)}` for `x ∈ [e^{-γ}, e]`.
pub fn a_root(x: f64, t: u32, cfg: &SolverConfig) -> Result<f64> {
    check_dim(t)?;
    check_x_domain(x)?;
    a_root_unchecked(x, t, cfg)
}

/// The three rates `[ρ(a), (1+b)e^{-b}, exp(-e^{-a}/(x^t(1+b)^t))]`.
pub fn q_terms(x: f64, t: u32, a: f64, b: f64) -> Result<[f64; 3]> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("q_terms requires b > 0, got {b}")));
    }
    Ok([rho(a, t)?.value, second_rate(b), third_rate(x, t, a, b)])
}

/// `q(x; a, b)`: the largest of the three rates.
pub fn q_function(x: f64, t: u32, a: f64, b: f64) -> Result<f64> {
    let [r, s, w] = q_terms(x, t, a, b)?;
    Ok(r.max(s).max(w))
}

/// Equalized point and growth factor for any `x > 0`.
///
/// [`q_of_x`] restricts `x` to `[e^{-γ}, e]`; this variant is for probing the
/// growth factor just outside that interval.
pub fn evaluate_q(x: f64, t: u32, cfg: &SolverConfig) -> Result<QEvaluation> {
    check_dim(t)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let a = a_root_unchecked(x, t, cfg)?;
    let b = b_root(x, a, t, cfg)?;
    let r = rho(a, t)?;
    let q = r.value;
    let growth = (f64::from(t) * (1.0 - x.ln()) + q.ln()).exp();
    Ok(QEvaluation {
        x,
        t,
        a,
        b,
        u: r.u_star,
        q,
        growth,
    })
}

/// `q(x) = min_{a,b} q(x; a, b)` with its minimizer, for `x ∈ [e^{-γ}, e]`.
pub fn q_of_x(x: f64, t: u32, cfg: &SolverConfig) -> Result<QEvaluation> {
    check_dim(t)?;
    check_x_domain(x)?;
    evaluate_q(x, t, cfg)
}

/// `(e/x)^t q(x)` for any `x > 0`.
pub fn growth(x: f64, t: u32, cfg: &SolverConfig) -> Result<f64> {
    evaluate_q(x, t, cfg).map(|e| e.growth)
}

/// Largest defect of the two equalization equations at `eval`.
pub fn certificate_residual(eval: &QEvaluation) -> Result<f64> {
    let h = h_residual(eval.x, eval.a, eval.t, eval.b).abs();
    let f = (rho(eval.a, eval.t)?.value - second_rate(eval.b)).abs();
    Ok(h.max(f))
}

/// `x̄(t) = inf { x ∈ [e^{-γ}, e] : (e/x)^t q(x) < 1 }`.
///
/// The growth factor is scanned on `x_grid_points` equally spaced points and
/// the first cell where it falls below 1 is refined by bisection. No
/// monotonicity in `x` is assumed; every crossing seen on the grid is counted.
pub fn bar_x(t: u32, cfg: &SolverConfig) -> Result<BoundReport> {
    check_dim(t)?;
    cfg.validate()?;
    let (lo, hi) = x_domain();
    let n = cfg.x_grid_points;
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect();
    let growths = xs
        .par_iter()
        .map(|&x| growth(x, t, cfg))
        .collect::<Result<Vec<f64>>>()?;

    let last = growths[n - 1];
    if last >= 1.0 {
        return Err(Error::Contradiction(format!(
            "growth factor {last} >= 1 at x = e for t = {t}"
        )));
    }
    let crossings = growths
        .windows(2)
        .filter(|w| (w[0] < 1.0) != (w[1] < 1.0))
        .count();
    let first_below = growths
        .iter()
        .position(|&g| g < 1.0)
        .expect("growth at x = e is below 1");

    let (x_bar, edge_attained) = if first_below == 0 {
        (lo, true)
    } else {
        let (left, right) = (xs[first_below - 1], xs[first_below]);
        let (x, res) =
            bisect_decreasing(left, right, cfg.max_iter, |x| Ok(growth(x, t, cfg)? - 1.0))?;
        if res.abs() > cfg.root_tol {
            return Err(Error::Numerical(format!(
                "bar_x: growth residual {res:e} above tolerance for t = {t}"
            )));
        }
        (x, false)
    };

    let certificate = evaluate_q(x_bar, t, cfg)?;
    let residuals = certificate_residual(&certificate)?;
    let bw = bw_lower(t)?;
    if !edge_attained && !(x_bar > lo && x_bar < hi) {
        return Err(Error::Contradiction(format!(
            "bar_x = {x_bar} outside ({lo}, {hi})"
        )));
    }
    Ok(BoundReport {
        t,
        bw_lower: bw,
        bar_x: x_bar,
        certificate,
        residuals,
        crossings,
        edge_attained,
    })
}

/// Bollobás–Winkler lower bound `t² / (t!^{1/t} Γ(1/t))`.
pub fn bw_lower(t: u32) -> Result<f64> {
    check_dim(t)?;
    let tf = f64::from(t);
    let log_fact = log_gamma(tf + 1.0)?;
    Ok(tf * tf / ((log_fact / tf).exp() * log_gamma(1.0 / tf)?.exp()))
}
