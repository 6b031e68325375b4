//! Continuous-side reference operators and the discrete-vs-continuous
//! convergence harness.
//!
//! The continuous object is the one-sided Marchaud derivative
//!
//!   (D±)^α f(x) = (1/Γ(−α)) ∫_0^∞ (f(x ± t) − f(x)) t^{−1−α} dt,
//!
//! evaluated by adaptive quadrature with the two regions that break naive
//! integration treated analytically: the algebraic singularity at 0, and
//! the infinite ray, which is finished from the declared ray behavior of
//! the test function. Its discrete counterpart is the Grünwald–Letnikov
//! sum, which is nothing but the one-sided kernel operator applied to
//! pointwise samples of f. The rest of the module measures how fast the
//! two meet as h → 0 and fits observed orders.

pub mod registry;

pub use registry::{lookup, restrict, RayBehavior, SmoothFunction};

use std::sync::Arc;

use serde::Serialize;

use crate::coefficients::{lambda_coeffs, CoeffTable, FracOrder};
use crate::error::{FracError, Result, Side};
use crate::fractional_ops::{check_positive_table, frac_right, FracOpResult};
use crate::grid::{Grid, GridFunction, TailFn, TailModel};
use crate::quadrature::adaptive_abs;
use crate::special::{gamma, hurwitz_zeta};

/// Where the near-singularity treatment of the Marchaud integral hands
/// over to plain adaptive quadrature.
const EPS_SPLIT: f64 = 0.5;

/// Physical reach (in x, not index count) of the kernel tables used when a
/// sum is compared against the continuous operator. Keeping M·h fixed
/// across a sweep makes the discarded kernel mass the same for every h, so
/// truncation cannot masquerade as a convergence order.
const COMPARE_REACH: f64 = 4000.0;

/// Quadrature tolerance for continuous references inside comparisons.
const COMPARE_QUAD_TOL: f64 = 1e-6;

/// Window for [`derivative_variant_check`].
const VARIANT_WINDOW: (f64, f64) = (-0.5, 0.5);

/// One-sided Marchaud fractional derivative at x:
///
///   (1/Γ(−α)) ∫_0^∞ (f(x ± t) − f(x)) t^{−1−α} dt
///
/// (+ for `Side::Right`, − for `Side::Left`). `tol` is an absolute target
/// for the result; each of the integral's error sources gets an equal
/// share of tol·|Γ(−α)|.
///
/// The singular end (0, ε] never meets raw floating-point differences: for
/// C¹ entries the first-order part integrates in closed form and only the
/// O(t²) remainder is quadratured, while for merely Hölder entries the
/// substitution t = ε·s^{1/(β−α)} flattens the integrand to a bounded one.
/// Past a fixed split the ray takes over: decaying rays are extended until
/// their analytic remainder bound clears the budget, eventually-constant
/// rays finish in closed form, and periodic rays collapse to a single
/// period weighted by a Hurwitz zeta. Unbounded rays are rejected.
pub fn marchaud(
    f: &SmoothFunction,
    x: f64,
    order: FracOrder,
    side: Side,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    if !x.is_finite() {
        return Err(FracError::InvalidParameter { name: "x", value: x });
    }
    let alpha = order.value();
    let gamma_neg = gamma(-alpha);
    // four error sources: three quadratures and one analytic ray remainder
    let budget = tol * gamma_neg.abs() / 4.0;
    let sgn = side.sign();
    let fx = f.eval(x);

    let inner = inner_piece(f, x, fx, alpha, sgn, budget)?;
    // a periodic ray wants the far split at or past one period so the
    // one-period collapse in the outer piece applies from the start
    let far = match f.ray(side) {
        RayBehavior::Periodic { period, .. } => period.max(2.0),
        _ => 2.0,
    };
    let middle = adaptive_abs(
        &mut |t| f.increment(x, sgn * t) * t.powf(-1.0 - alpha),
        EPS_SPLIT,
        far,
        budget,
    )?
    .value;
    let outer = outer_piece(f, x, fx, alpha, side, far, budget)?;
    Ok((inner + middle + outer) / gamma_neg)
}

/// ∫_0^ε (f(x ± t) − f(x)) t^{−1−α} dt with the singularity defused.
fn inner_piece(
    f: &SmoothFunction,
    x: f64,
    fx: f64,
    alpha: f64,
    sgn: f64,
    budget: f64,
) -> Result<f64> {
    if f.holder_k() >= 1 {
        // f(x ± t) − f(x) = ±f′(x)t + R(t) with R = O(t²): the linear term
        // in closed form, the remainder a tame quadrature
        let (c, g) = f.derivative()?;
        let slope = c * g.eval(x);
        let linear = sgn * slope * EPS_SPLIT.powf(1.0 - alpha) / (1.0 - alpha);
        let rest = adaptive_abs(
            &mut |t| {
                if t == 0.0 {
                    return 0.0;
                }
                (f.increment(x, sgn * t) - sgn * slope * t) * t.powf(-1.0 - alpha)
            },
            0.0,
            EPS_SPLIT,
            budget,
        )?
        .value;
        return Ok(linear + rest);
    }
    let beta = f.holder_beta();
    if alpha >= beta {
        return Err(FracError::OrderExceedsSmoothness { alpha, beta });
    }
    // naive increments bottom out at the rounding of f(x); refuse budgets
    // below that floor instead of spinning the quadrature on noise
    if !f.has_closed_increment() && fx != 0.0 {
        let local_slope = (f.eval(x + 1e-6) - fx).abs() * 1e6;
        if local_slope > 0.0 {
            let t0 = f64::EPSILON * fx.abs() / local_slope;
            let floor = local_slope * t0.powf(1.0 - alpha) / (1.0 - alpha);
            if floor > budget {
                return Err(FracError::QuadratureNonConvergence {
                    tol: budget,
                    best: floor,
                });
            }
        }
    }
    // t = ε·s^p with p = 1/(β−α) turns |f(x±t) − f(x)| t^{−1−α} dt into a
    // bounded integrand on (0, 1]
    let p = 1.0 / (beta - alpha);
    let quad = adaptive_abs(
        &mut |s| {
            let t = EPS_SPLIT * s.powf(p);
            if t == 0.0 {
                return 0.0;
            }
            let diff = f.increment(x, sgn * t);
            if diff == 0.0 {
                return 0.0;
            }
            let factor = p * EPS_SPLIT.powf(-alpha) * s.powf(-p * alpha - 1.0);
            if !factor.is_finite() {
                // only reachable for s so small that the true contribution
                // (bounded by the Hölder envelope) is below any budget
                return 0.0;
            }
            factor * diff
        },
        0.0,
        1.0,
        budget,
    )?;
    Ok(quad.value)
}

/// ∫_far^∞ (f(x ± t) − f(x)) t^{−1−α} dt, finished analytically from the
/// declared ray behavior.
fn outer_piece(
    f: &SmoothFunction,
    x: f64,
    fx: f64,
    alpha: f64,
    side: Side,
    far: f64,
    budget: f64,
) -> Result<f64> {
    let sgn = side.sign();
    match f.ray(side) {
        RayBehavior::Unbounded => Err(FracError::UnboundedTail { side }),
        RayBehavior::Decaying => {
            // |f| decreasing on the ray: past `edge` the f part stays under
            // |f(x ± edge)|·edge^{−α}/α and the f(x) part is exact
            let mut edge = far;
            loop {
                edge *= 2.0;
                let rem = f.eval(x + sgn * edge).abs() * edge.powf(-alpha) / alpha;
                if rem <= budget {
                    break;
                }
                if edge > 1e15 {
                    return Err(FracError::QuadratureNonConvergence {
                        tol: budget,
                        best: rem,
                    });
                }
            }
            let body = adaptive_abs(
                &mut |t| (f.eval(x + sgn * t) - fx) * t.powf(-1.0 - alpha),
                far,
                edge,
                budget,
            )?
            .value;
            Ok(body - fx * edge.powf(-alpha) / alpha)
        }
        RayBehavior::EventuallyConstant { from, value } => {
            let reach = match side {
                Side::Right => (from - x).max(far) + 1.0,
                Side::Left => (x - from).max(far) + 1.0,
            };
            let body = adaptive_abs(
                &mut |t| (f.eval(x + sgn * t) - fx) * t.powf(-1.0 - alpha),
                far,
                reach,
                budget,
            )?
            .value;
            Ok(body + (value - fx) * reach.powf(-alpha) / alpha)
        }
        RayBehavior::Periodic { period, .. } => {
            // Σ_{k≥0} ∫_0^P g(far + kP + s)(far + kP + s)^{−1−α} ds with
            // g = f(x ± ·) − f(x) collapses to one period against
            // ζ(1+α, (far+s)/P)
            let scale = period.powf(-1.0 - alpha);
            let quad = adaptive_abs(
                &mut |s| {
                    (f.eval(x + sgn * (far + s)) - fx)
                        * scale
                        * hurwitz_zeta(1.0 + alpha, (far + s) / period)
                },
                0.0,
                period,
                budget,
            )?;
            Ok(quad.value)
        }
    }
}

/// One-sided Grünwald–Letnikov sum at x:
///
///   h^{−α} Σ_{j=0}^{M} Λ^α(j) f(x ± jh),
///
/// with M the table's truncation. Since the full kernel sums to zero, the
/// sum is taken about a centering constant chosen per ray (the asymptotic
/// value, the period mean, or 0 for a decaying ray): the infinite sum is
/// unchanged, and what the truncation discards becomes oscillation around
/// zero instead of the ray's mean times the kernel tail mass. The recorded
/// bound covers the discarded mass and summation rounding.
pub fn grunwald_letnikov(
    f: &SmoothFunction,
    x: f64,
    h: f64,
    side: Side,
    table: &CoeffTable,
) -> Result<FracOpResult> {
    check_positive_table(table)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(FracError::InvalidStep(h));
    }
    if !x.is_finite() {
        return Err(FracError::InvalidParameter { name: "x", value: x });
    }
    let alpha = table.order().value();
    let m = table.truncation();
    let sgn = side.sign();
    // first sample the truncation discards
    let edge = x + sgn * (m as f64 + 1.0) * h;
    let tail_mass = table.tail_mass().expect("positive table has a tail mass");

    let (center, slack_sup) = match f.ray(side) {
        RayBehavior::Unbounded => return Err(FracError::UnboundedTail { side }),
        RayBehavior::Decaying => (0.0, f.eval(edge).abs()),
        RayBehavior::Periodic { period, bound } => {
            let c = periodic_mean(f, period)?;
            (c, bound + c.abs())
        }
        RayBehavior::EventuallyConstant { from, value } => {
            let past = match side {
                Side::Right => edge >= from,
                Side::Left => edge <= from,
            };
            if past {
                (value, 0.0)
            } else {
                (value, f.ray_sup(side, edge).expect("bounded ray") + value.abs())
            }
        }
    };

    // small kernel weights first, as in the grid-side operator
    let mut acc = 0.0f64;
    let mut abs_acc = 0.0f64;
    for j in (0..=m).rev() {
        let term = table.value(j) * (f.eval(x + sgn * j as f64 * h) - center);
        acc += term;
        abs_acc += term.abs();
    }
    let rounding = f64::EPSILON * (m as f64).sqrt().max(8.0) * abs_acc;
    let scale = h.powf(-alpha);
    Ok(FracOpResult {
        value: scale * acc,
        truncation_bound: scale * (tail_mass * slack_sup + rounding),
        m_used: m,
    })
}

/// Mean of f along a ray, in the sense the centered truncation needs: the
/// asymptotic value, the period average, or 0 for a decaying ray.
fn ray_mean(f: &SmoothFunction, side: Side) -> Result<f64> {
    match f.ray(side) {
        RayBehavior::Decaying => Ok(0.0),
        RayBehavior::EventuallyConstant { value, .. } => Ok(value),
        RayBehavior::Periodic { period, .. } => periodic_mean(f, period),
        RayBehavior::Unbounded => Err(FracError::UnboundedTail { side }),
    }
}

fn periodic_mean(f: &SmoothFunction, period: f64) -> Result<f64> {
    Ok(adaptive_abs(&mut |t| f.eval(t), 0.0, period, 1e-12)?.value / period)
}

/// Restriction of f − c to the window, tails included, so the grid-side
/// operators see the centered function everywhere they reach.
fn shifted_restriction(f: &SmoothFunction, grid: Grid, c: f64) -> GridFunction {
    if c == 0.0 {
        return restrict(f, grid);
    }
    let g = *f;
    let shifted = |side: Side| {
        let edge = match side {
            Side::Left => grid.x(grid.n_lo() - 1),
            Side::Right => grid.x(grid.n_hi() + 1),
        };
        match f.tail_model(side, edge) {
            TailModel::Zero => TailModel::Constant(-c),
            TailModel::Constant(v) => TailModel::Constant(v - c),
            TailModel::Callback(t) => TailModel::Callback(TailFn::new(
                None,
                t.bound().map(|b| b + c.abs()),
                false,
                Arc::new(move |x| g.eval(x) - c),
            )),
        }
    };
    let (left, right) = (shifted(Side::Left), shifted(Side::Right));
    GridFunction::sample(grid, |x| g.eval(x) - c, left, right)
}

fn window_grid(h: f64, window: (f64, f64)) -> Result<Grid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FracError::InvalidStep(h));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(FracError::InvalidParameter {
            name: "window width",
            value: hi - lo,
        });
    }
    Grid::new(h, (lo / h).ceil() as i64, (hi / h).floor() as i64)
}

/// Sup over the mesh points of `window` of the distance between the two
/// routes to the same number: the grid-side operator on the restriction of
/// f, versus the Marchaud derivative at the same points (right-sided, as
/// in the estimate this validates).
///
/// The sup is over a finite window by construction; what f does past the
/// kernel table's reach is controlled by its declared ray behavior, not by
/// the window.
pub fn compare_discrete_continuous(
    f: &SmoothFunction,
    order: FracOrder,
    h: f64,
    window: (f64, f64),
) -> Result<f64> {
    let alpha = order.value();
    let beta = effective_beta(f);
    if alpha >= beta {
        return Err(FracError::OrderExceedsSmoothness { alpha, beta });
    }
    let grid = window_grid(h, window)?;
    let m = (COMPARE_REACH / h).ceil() as usize;
    let table = lambda_coeffs(order, m)?;
    let c = ray_mean(f, Side::Right)?;
    let u = shifted_restriction(f, grid, c).materialize(0, m)?;
    let mut sup = 0.0f64;
    for n in grid.n_lo()..=grid.n_hi() {
        let disc = frac_right(&u, &table, n)?.value;
        let cont = marchaud(f, grid.x(n), order, Side::Right, COMPARE_QUAD_TOL)?;
        sup = sup.max((disc - cont).abs());
    }
    Ok(sup)
}

/// Pointwise order measurement: |marchaud − grunwald_letnikov| at one x
/// per step in `h_list` (right-sided), fitted to a power of h.
pub fn gl_vs_marchaud(
    f: &SmoothFunction,
    x: f64,
    order: FracOrder,
    h_list: &[f64],
) -> Result<ConvergenceReport> {
    let alpha = order.value();
    let beta = effective_beta(f);
    if alpha >= beta {
        return Err(FracError::OrderExceedsSmoothness { alpha, beta });
    }
    let reference = marchaud(f, x, order, Side::Right, 1e-10)?;
    let mut errs = Vec::with_capacity(h_list.len());
    for &h in h_list {
        if !(h > 0.0 && h.is_finite()) {
            return Err(FracError::InvalidStep(h));
        }
        let table = lambda_coeffs(order, (COMPARE_REACH / h).ceil() as usize)?;
        let gl = grunwald_letnikov(f, x, h, Side::Right, &table)?.value;
        errs.push((reference - gl).abs());
    }
    ConvergenceReport::new(alpha, beta, h_list.to_vec(), errs)
}

/// Order check for the mixed variant: −δ_right applied after the grid-side
/// α-operator on the restriction, against the Marchaud derivative of f′ at
/// the same points (the continuous operators commute with d/dx). Errors
/// are sups over a fixed window around 0.
pub fn derivative_variant_check(
    f: &SmoothFunction,
    order: FracOrder,
    h_list: &[f64],
) -> Result<ConvergenceReport> {
    let (cd, fp) = f.derivative()?;
    let alpha = order.value();
    let c = ray_mean(f, Side::Right)?;
    let mut errs = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let base = window_grid(h, VARIANT_WINDOW)?;
        // one extra site on the right: the outer difference looks ahead
        let grid = Grid::new(base.h(), base.n_lo(), base.n_hi() + 1)?;
        let m = (COMPARE_REACH / h).ceil() as usize;
        let table = lambda_coeffs(order, m)?;
        let u = shifted_restriction(f, grid, c).materialize(0, m)?;
        let v: Vec<f64> = (grid.n_lo()..=grid.n_hi())
            .map(|n| frac_right(&u, &table, n).map(|r| r.value))
            .collect::<Result<_>>()?;
        let mut sup = 0.0f64;
        for (i, n) in (base.n_lo()..=base.n_hi()).enumerate() {
            let disc = (v[i + 1] - v[i]) / h;
            let cont = cd * marchaud(fp, grid.x(n), order, Side::Right, COMPARE_QUAD_TOL)?;
            sup = sup.max((disc - cont).abs());
        }
        errs.push(sup);
    }
    ConvergenceReport::new(alpha, effective_beta(f), h_list.to_vec(), errs)
}

/// Hölder exponent at which the convergence estimates see f: once f is C¹
/// the exponent saturates at 1.
pub fn effective_beta(f: &SmoothFunction) -> f64 {
    if f.holder_k() >= 1 {
        1.0
    } else {
        f.holder_beta()
    }
}

/// One measured h-sweep: errors per step and the fitted order.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub beta: f64,
    pub h_list: Vec<f64>,
    pub err_list: Vec<f64>,
    pub slope: f64,
    pub r2: f64,
}

impl ConvergenceReport {
    pub fn new(alpha: f64, beta: f64, h_list: Vec<f64>, err_list: Vec<f64>) -> Result<Self> {
        for w in h_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(FracError::DegenerateFit(format!(
                    "h values must decrease strictly: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let (slope, r2) = fit_order(&h_list, &err_list)?;
        Ok(ConvergenceReport {
            alpha,
            beta,
            h_list,
            err_list,
            slope,
            r2,
        })
    }
}

/// Least-squares slope of log err against log h, with its r².
///
/// Zero errors are refused rather than fitted: a sweep that bottoms out at
/// exactly 0 carries no order information on a log scale.
pub fn fit_order(h_list: &[f64], err_list: &[f64]) -> Result<(f64, f64)> {
    if h_list.len() != err_list.len() || h_list.len() < 4 {
        return Err(FracError::DegenerateFit(format!(
            "need at least 4 matched points, got {} and {}",
            h_list.len(),
            err_list.len()
        )));
    }
    if let Some(&h) = h_list.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(FracError::DegenerateFit(format!("unusable step {h}")));
    }
    if let Some(&e) = err_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(FracError::DegenerateFit(format!(
            "error {e} cannot be log-fitted"
        )));
    }
    let xs: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = err_list.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(FracError::DegenerateFit("all steps equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((slope, r2))
}
