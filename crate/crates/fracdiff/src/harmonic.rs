//! Maximal functions, square functions, and kernel size checks for the heat
//! and Poisson semigroups, evaluated along finite grids of times.
//!
//! A maximal function here is the pointwise supremum of |T_t u| over a
//! [`TGrid`]. For point-mass inputs the heat profile t ↦ G_t(n) peaks at the
//! integer time t = n exactly, so [`TGrid::with_integers`] turns those
//! suprema into exact evaluations instead of nearby samples. Inputs with
//! small support and zero tails are routed through per-time kernel tables;
//! everything else pays for the full convolutions in [`crate::semigroups`].

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coefficients::{heat_weights, FracOrder, HeatWeights};
use crate::error::{FracError, Result, Side};
use crate::grid::{Grid, GridFunction, TailFn, TailModel};
use crate::quadrature::adaptive_abs;
use crate::semigroups::poisson::PoissonKernel;
use crate::semigroups::{heat_apply, heat_point, poisson_apply, poisson_kernel_len, poisson_point};

/// Default time range; wide enough that every size or growth check below
/// finds its supremum in the interior.
pub const T_RANGE: (f64, f64) = (1e-3, 1e3);

/// Fixed truncation budget for every semigroup evaluation in this module.
/// The maximal functions fold plain maxima of those evaluations, so on the
/// dense route they dominate a re-application at the same tolerance with no
/// slack at all.
pub const SEMIGROUP_TOL: f64 = 1e-10;

/// Inputs with zero tails and at most this many nonzero entries go through
/// per-time kernel tables in O(support) per point.
const SPARSE_SUPPORT_MAX: usize = 16;

const MIN_TIMES: usize = 32;

/// Strictly increasing evaluation times.
#[derive(Clone, Debug)]
pub struct TGrid {
    values: Vec<f64>,
}

impl TGrid {
    /// k log-spaced times over [t_min, t_max]. Needs 0 < t_min < t_max and
    /// k ≥ 32.
    pub fn log_spaced(t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        Self::build(t_min, t_max, k, false)
    }

    /// Log-spaced times plus every integer in [t_min, t_max], for suprema
    /// that sit at integer times (the heat profile over a point mass).
    pub fn with_integers(t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        if t_max > 1e7 {
            return Err(FracError::InvalidParameter {
                name: "t_max",
                value: t_max,
            });
        }
        Self::build(t_min, t_max, k, true)
    }

    fn build(t_min: f64, t_max: f64, k: usize, integers: bool) -> Result<Self> {
        if !(t_min.is_finite() && t_min > 0.0) {
            return Err(FracError::InvalidParameter {
                name: "t_min",
                value: t_min,
            });
        }
        if !(t_max.is_finite() && t_max > t_min) {
            return Err(FracError::InvalidParameter {
                name: "t_max",
                value: t_max,
            });
        }
        if k < MIN_TIMES {
            return Err(FracError::InvalidParameter {
                name: "k",
                value: k as f64,
            });
        }
        let step = (t_max / t_min).ln() / (k - 1) as f64;
        let mut values: Vec<f64> = (0..k)
            .map(|i| (t_min.ln() + step * i as f64).exp())
            .collect();
        values[0] = t_min;
        values[k - 1] = t_max;
        if integers {
            let mut n = t_min.ceil().max(1.0);
            while n <= t_max {
                values.push(n);
                n += 1.0;
            }
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *b);
        Ok(TGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.values[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

#[derive(Clone, Copy)]
enum Action {
    Heat,
    Poisson(FracOrder),
}

enum Table {
    Heat(HeatWeights),
    Poisson(PoissonKernel),
}

impl Table {
    fn values(&self) -> &[f64] {
        match self {
            Table::Heat(w) => w.values(),
            Table::Poisson(w) => w.values(),
        }
    }
}

/// Nonzero window entries, provided both tails are zero and there are few
/// enough of them for the table route to win.
fn sparse_support(u: &GridFunction) -> Option<Vec<(i64, f64)>> {
    if !matches!(u.tail(Side::Left), TailModel::Zero)
        || !matches!(u.tail(Side::Right), TailModel::Zero)
    {
        return None;
    }
    let mut support = Vec::new();
    for n in u.grid().indices() {
        let v = u.value(n);
        if v != 0.0 {
            if support.len() == SPARSE_SUPPORT_MAX {
                return None;
            }
            support.push((n, v));
        }
    }
    Some(support)
}

/// Window values of the semigroup at every grid time, visited in time order.
/// Sparse inputs read per-time kernel tables (the tables never depend on u,
/// so scaling the input scales these slices exactly); dense inputs go
/// through the adaptive convolutions.
fn for_each_slice(
    u: &GridFunction,
    action: Action,
    tgrid: &TGrid,
    side: Side,
    visit: &mut dyn FnMut(usize, &[f64]),
) -> Result<()> {
    let g = u.grid();
    if let Some(mut support) = sparse_support(u) {
        // ascending kernel offset = ascending m on the right ray, descending
        // on the left; keeping that order makes the sparse sums reproduce the
        // dense ones term for term
        support.sort_by_key(|&(m, _)| m);
        if matches!(side, Side::Left) {
            support.reverse();
        }
        let sgn = side.sign() as i64;
        let span: i64 = support
            .iter()
            .map(|&(m, _)| match side {
                Side::Right => m - g.n_lo(),
                Side::Left => g.n_hi() - m,
            })
            .max()
            .unwrap_or(-1);
        let mut row = vec![0.0f64; g.len()];
        for (idx, &t) in tgrid.values().iter().enumerate() {
            if span >= 0 {
                let table = match action {
                    Action::Heat => Table::Heat(heat_weights(t, SEMIGROUP_TOL)?),
                    Action::Poisson(gamma) => {
                        Table::Poisson(poisson_kernel_len(gamma, t, span as usize + 1)?)
                    }
                };
                let wv = table.values();
                for (i, r) in row.iter_mut().enumerate() {
                    let n = g.n_lo() + i as i64;
                    let mut acc = 0.0f64;
                    for &(m, uv) in &support {
                        let j = sgn * (m - n);
                        if j >= 0 && (j as usize) < wv.len() {
                            acc += wv[j as usize] * uv;
                        }
                    }
                    *r = acc;
                }
            }
            visit(idx, &row);
        }
    } else {
        for (idx, &t) in tgrid.values().iter().enumerate() {
            let v = match action {
                Action::Heat => heat_apply(u, t, side, SEMIGROUP_TOL)?,
                Action::Poisson(gamma) => poisson_apply(u, gamma, t, side, SEMIGROUP_TOL)?,
            };
            visit(idx, v.values());
        }
    }
    Ok(())
}

fn maximal(u: &GridFunction, action: Action, tgrid: &TGrid, side: Side) -> Result<GridFunction> {
    let g = u.grid();
    let mut out = vec![0.0f64; g.len()];
    for_each_slice(u, action, tgrid, side, &mut |_, row| {
        for (o, &v) in out.iter_mut().zip(row) {
            *o = o.max(v.abs());
        }
    })?;
    // the convolutions never exceed the global sup of |u|, hence neither
    // does their maximum
    let bound = match (u.tail(Side::Left).bound(), u.tail(Side::Right).bound()) {
        (Some(a), Some(b)) => Some(a.max(b).max(u.window_sup())),
        _ => None,
    };
    let h = g.h();
    let uc = u.clone();
    let times: Vec<f64> = tgrid.values().to_vec();
    let point = move |x: f64| -> f64 {
        let n = (x / h).round() as i64;
        let mut best = 0.0f64;
        for &t in &times {
            let v = match action {
                Action::Heat => heat_point(&uc, t, n, side, SEMIGROUP_TOL),
                Action::Poisson(gamma) => poisson_point(&uc, gamma, t, n, side, SEMIGROUP_TOL),
            };
            match v {
                Ok(v) => best = best.max(v.abs()),
                Err(_) => return f64::NAN,
            }
        }
        best
    };
    let tail = TailModel::Callback(TailFn::new(None, bound, false, Arc::new(point)));
    GridFunction::from_values(g, out, tail.clone(), tail)
}

/// Pointwise max of |T_{t,±} u| over the time grid. Scaling u scales the
/// result exactly on the sparse route; through the dense convolutions the
/// truncation budget rescales with the input and homogeneity holds to the
/// same 1e−10 budget.
pub fn heat_maximal(u: &GridFunction, tgrid: &TGrid, side: Side) -> Result<GridFunction> {
    maximal(u, Action::Heat, tgrid, side)
}

/// Pointwise max of |P^γ_{t,±} u| over the time grid.
pub fn poisson_maximal(
    u: &GridFunction,
    gamma: FracOrder,
    tgrid: &TGrid,
    side: Side,
) -> Result<GridFunction> {
    maximal(u, Action::Poisson(gamma), tgrid, side)
}

/// Square function of the subordinated semigroup along the time grid:
///
///   g(n)² = ∫ |t ∂_t (P^γ_t u)(n)|² dt/t,
///
/// with t ∂_t replaced by a centered difference in ln t and the integral by
/// the trapezoid rule between the interior grid times. The first and last
/// times serve only as difference stencils, so the covered range is
/// [t_1, t_{K−2}]; widen the grid to probe truncation.
pub fn poisson_g_function(
    u: &GridFunction,
    gamma: FracOrder,
    tgrid: &TGrid,
    side: Side,
) -> Result<GridFunction> {
    let g = u.grid();
    let width = g.len();
    let lnt: Vec<f64> = tgrid.values().iter().map(|t| t.ln()).collect();
    let mut vm2: Vec<f64> = Vec::new();
    let mut vm1: Vec<f64> = Vec::new();
    let mut w_prev: Vec<f64> = Vec::new();
    let mut acc = vec![0.0f64; width];
    for_each_slice(u, Action::Poisson(gamma), tgrid, side, &mut |i, row| {
        if i >= 2 {
            let dl = lnt[i] - lnt[i - 2];
            let w: Vec<f64> = row
                .iter()
                .zip(&vm2)
                .map(|(a, b)| (a - b) / dl)
                .collect();
            if !w_prev.is_empty() {
                let dt = lnt[i - 1] - lnt[i - 2];
                for ((a, x), y) in acc.iter_mut().zip(&w_prev).zip(&w) {
                    *a += 0.5 * (x * x + y * y) * dt;
                }
            }
            w_prev = w;
        }
        vm2 = std::mem::take(&mut vm1);
        vm1 = row.to_vec();
    })?;
    let values: Vec<f64> = acc.iter().map(|a| a.sqrt()).collect();

    let h = g.h();
    let uc = u.clone();
    let times: Vec<f64> = tgrid.values().to_vec();
    let lns = lnt.clone();
    let point = move |x: f64| -> f64 {
        let n = (x / h).round() as i64;
        let mut vals = Vec::with_capacity(times.len());
        for &t in &times {
            match poisson_point(&uc, gamma, t, n, side, SEMIGROUP_TOL) {
                Ok(v) => vals.push(v),
                Err(_) => return f64::NAN,
            }
        }
        let mut acc = 0.0f64;
        let mut w_prev = f64::NAN;
        for i in 2..vals.len() {
            let w = (vals[i] - vals[i - 2]) / (lns[i] - lns[i - 2]);
            if i > 2 {
                acc += 0.5 * (w_prev * w_prev + w * w) * (lns[i - 1] - lns[i - 2]);
            }
            w_prev = w;
        }
        acc.sqrt()
    };
    let tail = TailModel::Callback(TailFn::new(None, None, false, Arc::new(point)));
    GridFunction::from_values(g, values, tail.clone(), tail)
}

/// Fourier-side g-function norm: either a finite value or a flag that the
/// integral grows like a power of the cutoff.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GNorm {
    Finite(f64),
    Divergent { exponent: f64 },
}

/// (1/4π) ∫ |f̂(θ)|² / (1 − cos θ) dθ over [ε, 2π − ε] for shrinking ε.
/// Multipliers with f̂(0) ≠ 0 blow up like 1/ε and come back flagged with
/// the measured growth exponent instead of a number.
pub fn heat_g_norm_fourier(f_hat: &dyn Fn(f64) -> Complex64) -> Result<GNorm> {
    use std::f64::consts::{PI, TAU};
    const LEVELS: usize = 8;
    let mut cuts = [0.0f64; LEVELS];
    let mut vals = [0.0f64; LEVELS];
    let mut scale = 1.0f64;
    for k in 0..LEVELS {
        let eps = 0.3 / 4.0f64.powi(k as i32);
        // 1 − cos θ = 2 sin²(θ/2), computed in the stable form
        let mut integrand = |theta: f64| {
            let s = (0.5 * theta).sin();
            f_hat(theta).norm_sqr() / (2.0 * s * s)
        };
        let q = adaptive_abs(&mut integrand, eps, TAU - eps, 1e-12 * scale)?;
        cuts[k] = eps;
        vals[k] = q.value / (4.0 * PI);
        scale = scale.max(vals[k].abs());
    }
    let (last, prev) = (vals[LEVELS - 1], vals[LEVELS - 2]);
    if (last - prev).abs() <= 1e-8 * last.abs().max(1.0) {
        return Ok(GNorm::Finite(last));
    }
    let tail = &vals[LEVELS - 4..];
    if tail.iter().any(|&v| !(v > 0.0)) {
        return Ok(GNorm::Finite(last));
    }
    let xs: Vec<f64> = cuts[LEVELS - 4..].iter().map(|&e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|&v| v.ln()).collect();
    let (exponent, _) = fit_line(&xs, &ys)?;
    Ok(GNorm::Divergent { exponent })
}

/// Empirical Calderón–Zygmund size data for the Poisson kernel: per probe
/// offset j, the sup over the time grid of the kernel value and of its
/// discrete smoothness increment, with log-log decay exponents fitted.
#[derive(Clone, Debug, Serialize)]
pub struct KernelSizeReport {
    pub gamma: f64,
    pub j: Vec<usize>,
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    pub s_exponent: f64,
    pub d_exponent: f64,
    pub j_times_s_max: f64,
}

/// s(j) = sup_t P^γ_t(j) and d(j) = sup_t |P^γ_t(j) − P^γ_t(j+1)| on a
/// geometric ladder of offsets in [j_lo, j_hi] ⊂ [8, 4096]. The size
/// condition wants s ≍ 1/j (exponent near −1, j·s bounded), the smoothness
/// condition d ≍ 1/j² (exponent near −2).
pub fn cz_kernel_size_check(
    gamma: FracOrder,
    tgrid: &TGrid,
    j_lo: usize,
    j_hi: usize,
) -> Result<KernelSizeReport> {
    if j_lo < 8 {
        return Err(FracError::InvalidParameter {
            name: "j_lo",
            value: j_lo as f64,
        });
    }
    if j_hi <= j_lo || j_hi > 4096 {
        return Err(FracError::InvalidParameter {
            name: "j_hi",
            value: j_hi as f64,
        });
    }
    let count = 16usize;
    let mut probes: Vec<usize> = (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            ((j_lo as f64) * (j_hi as f64 / j_lo as f64).powf(f)).round() as usize
        })
        .collect();
    probes.dedup();
    let mut s = vec![0.0f64; probes.len()];
    let mut d = vec![0.0f64; probes.len()];
    for &t in tgrid.values() {
        let w = poisson_kernel_len(gamma, t, j_hi + 2)?;
        let wv = w.values();
        for (k, &j) in probes.iter().enumerate() {
            s[k] = s[k].max(wv[j]);
            d[k] = d[k].max((wv[j] - wv[j + 1]).abs());
        }
    }
    if s.iter().chain(d.iter()).any(|&v| !(v > 0.0)) {
        return Err(FracError::DegenerateFit(
            "kernel probes vanished; widen the time grid".into(),
        ));
    }
    let lx: Vec<f64> = probes.iter().map(|&j| (j as f64).ln()).collect();
    let ls: Vec<f64> = s.iter().map(|&v| v.ln()).collect();
    let ld: Vec<f64> = d.iter().map(|&v| v.ln()).collect();
    let (s_exponent, _) = fit_line(&lx, &ls)?;
    let (d_exponent, _) = fit_line(&lx, &ld)?;
    let j_times_s_max = probes
        .iter()
        .zip(&s)
        .map(|(&j, &v)| j as f64 * v)
        .fold(0.0f64, f64::max);
    Ok(KernelSizeReport {
        gamma: gamma.value(),
        j: probes,
        s,
        d,
        s_exponent,
        d_exponent,
        j_times_s_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaximalOp {
    HeatMax,
    PoissonMax(FracOrder),
    PoissonG(FracOrder),
}

impl MaximalOp {
    pub fn id(self) -> &'static str {
        match self {
            MaximalOp::HeatMax => "heat_max",
            MaximalOp::PoissonMax(_) => "poisson_max",
            MaximalOp::PoissonG(_) => "poisson_g",
        }
    }

    fn gamma(self) -> Option<f64> {
        match self {
            MaximalOp::HeatMax => None,
            MaximalOp::PoissonMax(g) | MaximalOp::PoissonG(g) => Some(g.value()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFamily {
    /// A single point mass; trial 0 sits at the window edge the action
    /// sweeps across, later trials at random sites.
    Indicator,
    /// ±1 at the powers of two inside the window.
    LacunaryComb,
    /// Independent ±1 at every window point. Dense, so expensive at large
    /// sizes; meant for small-window adversarial probing.
    RandomSigns,
}

impl InputFamily {
    pub fn id(self) -> &'static str {
        match self {
            InputFamily::Indicator => "indicator",
            InputFamily::LacunaryComb => "lacunary_comb",
            InputFamily::RandomSigns => "random_signs",
        }
    }
}

/// Operator-norm growth data across window sizes.
#[derive(Clone, Debug, Serialize)]
pub struct NormGrowthReport {
    pub op: String,
    pub gamma: Option<f64>,
    pub family: String,
    pub p: f64,
    pub sizes: Vec<usize>,
    /// Per size, the sup over trials of ‖Op u‖_p / ‖u‖_p on the window.
    pub norms: Vec<f64>,
    /// Least-squares slope of ‖·‖² against ln(size): ≈ 1/2π for the heat
    /// maximal mass of a point input, ≈ 0 for the bounded Poisson operators.
    pub squared_norm_slope: f64,
    /// max/min of the norm column; near 1 means the sweep has stabilized.
    pub norm_ratio: f64,
}

fn family_input(
    family: InputFamily,
    trial: usize,
    grid: Grid,
    rng: &mut ChaCha8Rng,
) -> Result<GridFunction> {
    let len = grid.len();
    let mut vals = vec![0.0f64; len];
    match family {
        InputFamily::Indicator => {
            let site = if trial == 0 { 0 } else { rng.gen_range(0..len) };
            vals[site] = 1.0;
        }
        InputFamily::LacunaryComb => {
            let mut k = 1usize;
            while k < len {
                vals[k] = if trial == 0 || rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                };
                k *= 2;
            }
        }
        InputFamily::RandomSigns => {
            for v in vals.iter_mut() {
                *v = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
        }
    }
    GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero)
}

/// Norm-growth sweep: windows [0, N−1] for each size N, adversarial inputs
/// from `family`, and the worst ℓp ratio per size. Sizes must be at least
/// two strictly increasing powers of two; the same seed reproduces the same
/// report byte for byte.
pub fn empirical_lp_growth(
    op: MaximalOp,
    family: InputFamily,
    p: f64,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<NormGrowthReport> {
    if !(p >= 1.0) {
        return Err(FracError::InvalidParameter { name: "p", value: p });
    }
    if sizes.len() < 2 {
        return Err(FracError::InvalidParameter {
            name: "sizes",
            value: sizes.len() as f64,
        });
    }
    for w in sizes.windows(2) {
        if w[1] <= w[0] {
            return Err(FracError::InvalidParameter {
                name: "sizes",
                value: w[1] as f64,
            });
        }
    }
    for &n in sizes {
        if !n.is_power_of_two() || n < 4 {
            return Err(FracError::InvalidParameter {
                name: "size",
                value: n as f64,
            });
        }
    }
    if trials == 0 {
        return Err(FracError::InvalidParameter {
            name: "trials",
            value: 0.0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut norms = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid::new(1.0, 0, n as i64 - 1)?;
        let tgrid = match (op, family) {
            (MaximalOp::HeatMax, InputFamily::RandomSigns) => {
                TGrid::log_spaced(T_RANGE.0, (n as f64).max(8.0), 96)?
            }
            (MaximalOp::HeatMax, _) => TGrid::with_integers(T_RANGE.0, n as f64, 48)?,
            _ => TGrid::log_spaced(T_RANGE.0, T_RANGE.1.max(4.0 * (n as f64).sqrt()), 200)?,
        };
        let mut best = 0.0f64;
        for trial in 0..trials {
            let u = family_input(family, trial, grid, &mut rng)?;
            let v = match op {
                MaximalOp::HeatMax => heat_maximal(&u, &tgrid, Side::Left)?,
                MaximalOp::PoissonMax(gm) => poisson_maximal(&u, gm, &tgrid, Side::Left)?,
                MaximalOp::PoissonG(gm) => poisson_g_function(&u, gm, &tgrid, Side::Left)?,
            };
            best = best.max(lp_norm(v.values(), p) / lp_norm(u.values(), p));
        }
        norms.push(best);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|&r| r * r).collect();
    let (squared_norm_slope, _) = fit_line(&xs, &ys)?;
    let hi = norms.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lo = norms.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(NormGrowthReport {
        op: op.id().into(),
        gamma: op.gamma(),
        family: family.id().into(),
        p,
        sizes: sizes.to_vec(),
        norms,
        squared_norm_slope,
        norm_ratio: hi / lo,
    })
}

/// (λ, #{n in the window : |v(n)| > λ}) per threshold; the raw material for
/// weak-type inspection. No claim is attached to the counts.
pub fn distribution_function(v: &GridFunction, thresholds: &[f64]) -> Result<Vec<(f64, usize)>> {
    if thresholds.is_empty() {
        return Err(FracError::InvalidParameter {
            name: "thresholds",
            value: 0.0,
        });
    }
    for &l in thresholds {
        if !l.is_finite() || !(l > 0.0) {
            return Err(FracError::InvalidParameter {
                name: "threshold",
                value: l,
            });
        }
    }
    Ok(thresholds
        .iter()
        .map(|&l| (l, v.values().iter().filter(|x| x.abs() > l).count()))
        .collect())
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    }
    v.iter()
        .map(|&x| x.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Least-squares line through (x, y): (slope, r²). r² is 1 by convention
/// when y is constant.
fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(FracError::DegenerateFit(
            "line fit needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(FracError::DegenerateFit("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn point_mass(n_lo: i64, n_hi: i64, site: i64) -> GridFunction {
        let grid = Grid::new(1.0, n_lo, n_hi).unwrap();
        let mut vals = vec![0.0f64; grid.len()];
        vals[(site - n_lo) as usize] = 1.0;
        GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero).unwrap()
    }

    fn comb(n_lo: i64, n_hi: i64, sites: &[(i64, f64)]) -> GridFunction {
        let grid = Grid::new(1.0, n_lo, n_hi).unwrap();
        let mut vals = vec![0.0f64; grid.len()];
        for &(m, v) in sites {
            vals[(m - n_lo) as usize] = v;
        }
        GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero).unwrap()
    }

    fn dense_noise(n_lo: i64, n_hi: i64, seed: u64) -> GridFunction {
        let grid = Grid::new(1.0, n_lo, n_hi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero).unwrap()
    }

    #[test]
    fn time_grids_are_log_spaced_and_integer_augmented() {
        let g = TGrid::log_spaced(1e-3, 1e3, 32).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.t_min(), 1e-3);
        assert_eq!(g.t_max(), 1e3);
        assert!(g.values().windows(2).all(|w| w[1] > w[0]));

        let a = TGrid::with_integers(0.5, 10.0, 32).unwrap();
        for n in 1..=10 {
            assert!(a.values().contains(&(n as f64)), "missing t = {n}");
        }
        assert!(a.values().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn tgrid_rejections() {
        assert!(matches!(
            TGrid::log_spaced(0.0, 1.0, 32),
            Err(FracError::InvalidParameter { name: "t_min", .. })
        ));
        assert!(matches!(
            TGrid::log_spaced(1.0, 1.0, 32),
            Err(FracError::InvalidParameter { name: "t_max", .. })
        ));
        assert!(matches!(
            TGrid::log_spaced(1e-3, 1e3, 31),
            Err(FracError::InvalidParameter { name: "k", .. })
        ));
        assert!(matches!(
            TGrid::with_integers(1e-3, 2e7, 32),
            Err(FracError::InvalidParameter { name: "t_max", .. })
        ));
    }

    #[test]
    fn heat_maximal_peaks_on_the_point_mass_profile() {
        // sup_t e^{−t} t^n / n! sits at t = n, which the augmented grid hits
        // exactly; at n = 4 that is 256 / (24 e⁴)
        let u = point_mass(0, 4096, 0);
        let tg = TGrid::with_integers(1e-3, 4096.0, 48).unwrap();
        let m = heat_maximal(&u, &tg, Side::Left).unwrap();

        let exact4 = 256.0 / (24.0 * 4.0f64.exp());
        assert!((m.value(4) - exact4).abs() <= 1e-12 * exact4);

        // Stirling: G_n(n)·√(2πn) = 1 − 1/(12n) + O(n⁻²)
        for n in 16..=4096i64 {
            let scaled = m.value(n) * (2.0 * PI * n as f64).sqrt();
            assert!(
                (scaled - 1.0).abs() <= 1.0 / (8.0 * n as f64),
                "n = {n}: {scaled}"
            );
        }
    }

    #[test]
    fn maximal_dominates_every_sampled_time() {
        // dense inputs fold the very values heat_apply/poisson_apply return,
        // so domination has no slack at all
        let u = dense_noise(-10, 30, 0x11);
        let tg = TGrid::log_spaced(1e-2, 1e2, 32).unwrap();
        for side in [Side::Left, Side::Right] {
            let mh = heat_maximal(&u, &tg, side).unwrap();
            let mp = poisson_maximal(&u, order(0.5), &tg, side).unwrap();
            for &t in &[tg.values()[0], tg.values()[13], tg.values()[31]] {
                let vh = heat_apply(&u, t, side, SEMIGROUP_TOL).unwrap();
                let vp = poisson_apply(&u, order(0.5), t, side, SEMIGROUP_TOL).unwrap();
                for n in u.grid().indices() {
                    assert!(mh.value(n) >= vh.value(n).abs());
                    assert!(mp.value(n) >= vp.value(n).abs());
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_routes_agree() {
        // the table route drops only mass below the fixed budget
        let u = comb(0, 63, &[(0, 1.0), (7, 0.5), (23, -1.0)]);
        let tg = TGrid::log_spaced(1e-2, 64.0, 40).unwrap();
        let mh = heat_maximal(&u, &tg, Side::Left).unwrap();
        let mp = poisson_maximal(&u, order(0.4), &tg, Side::Left).unwrap();
        let mut fold_h = vec![0.0f64; 64];
        let mut fold_p = vec![0.0f64; 64];
        for &t in tg.values() {
            let vh = heat_apply(&u, t, Side::Left, SEMIGROUP_TOL).unwrap();
            let vp = poisson_apply(&u, order(0.4), t, Side::Left, SEMIGROUP_TOL).unwrap();
            for (i, n) in u.grid().indices().enumerate() {
                fold_h[i] = fold_h[i].max(vh.value(n).abs());
                fold_p[i] = fold_p[i].max(vp.value(n).abs());
            }
        }
        for (i, n) in u.grid().indices().enumerate() {
            assert!((mh.value(n) - fold_h[i]).abs() <= 1e-9);
            assert!((mp.value(n) - fold_p[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn maximal_functions_are_positively_homogeneous() {
        // power-of-two scalings commute with every rounding step on the
        // sparse route, so Op(−8u) = 8·Op(u) holds bit for bit
        let u = comb(0, 31, &[(0, 1.0), (3, -2.0), (9, 0.5)]);
        let grid = u.grid();
        let scaled_vals: Vec<f64> = u.values().iter().map(|&v| -8.0 * v).collect();
        let us =
            GridFunction::from_values(grid, scaled_vals, TailModel::Zero, TailModel::Zero).unwrap();
        let tg = TGrid::with_integers(1e-2, 32.0, 32).unwrap();

        let pairs = [
            (
                heat_maximal(&u, &tg, Side::Left).unwrap(),
                heat_maximal(&us, &tg, Side::Left).unwrap(),
            ),
            (
                poisson_maximal(&u, order(0.7), &tg, Side::Left).unwrap(),
                poisson_maximal(&us, order(0.7), &tg, Side::Left).unwrap(),
            ),
            (
                poisson_g_function(&u, order(0.7), &tg, Side::Left).unwrap(),
                poisson_g_function(&us, order(0.7), &tg, Side::Left).unwrap(),
            ),
        ];
        for (base, scaled) in &pairs {
            for n in grid.indices() {
                assert_eq!(scaled.value(n), 8.0 * base.value(n));
            }
        }

        // on the dense route the truncation budget rescales with the input,
        // so homogeneity holds to that budget rather than exactly
        let d = dense_noise(0, 40, 0x2f);
        let ds = GridFunction::from_values(
            d.grid(),
            d.values().iter().map(|&v| 3.0 * v).collect(),
            TailModel::Zero,
            TailModel::Zero,
        )
        .unwrap();
        let tgd = TGrid::log_spaced(1e-2, 40.0, 32).unwrap();
        let b = heat_maximal(&d, &tgd, Side::Right).unwrap();
        let s = heat_maximal(&ds, &tgd, Side::Right).unwrap();
        for n in d.grid().indices() {
            assert!((s.value(n) - 3.0 * b.value(n)).abs() <= 1e-8);
        }
    }

    #[test]
    fn g_function_of_a_constant_is_exactly_zero() {
        let grid = Grid::new(1.0, -5, 20).unwrap();
        let u = GridFunction::from_values(
            grid,
            vec![1.0; grid.len()],
            TailModel::Constant(1.0),
            TailModel::Constant(1.0),
        )
        .unwrap();
        let tg = TGrid::log_spaced(1e-2, 1e2, 48).unwrap();
        let g = poisson_g_function(&u, order(0.3), &tg, Side::Right).unwrap();
        for n in grid.indices() {
            assert_eq!(g.value(n), 0.0);
        }
    }

    #[test]
    fn g_function_matches_the_closed_form_at_the_origin() {
        // γ = 1/2 collapses to P_t(0) = e^{−t}, so t ∂_t P_t(0) = −t e^{−t}
        // and g(0)² = ∫ t e^{−2t} dt = 1/4 [DERIVED]
        let u = point_mass(0, 8, 0);
        let tg = TGrid::log_spaced(1e-3, 1e3, 200).unwrap();
        let g = poisson_g_function(&u, order(0.5), &tg, Side::Left).unwrap();
        assert!((g.value(0) - 0.5).abs() <= 2e-3, "g(0) = {}", g.value(0));

        // widening the range isolates truncation: nothing measurable is lost
        let wide = TGrid::log_spaced(1e-5, 1e4, 300).unwrap();
        let gw = poisson_g_function(&u, order(0.5), &wide, Side::Left).unwrap();
        assert!((gw.value(0) - g.value(0)).abs() <= 1e-4);
    }

    #[test]
    fn g_norm_flags_the_divergent_multiplier() {
        let flat = |_: f64| Complex64::new(1.0, 0.0);
        match heat_g_norm_fourier(&flat).unwrap() {
            GNorm::Divergent { exponent } => {
                assert!((exponent - 1.0).abs() <= 0.1, "exponent = {exponent}")
            }
            GNorm::Finite(v) => panic!("expected divergence, got {v}"),
        }

        // |1 − cos θ|² / (1 − cos θ) integrates to 2π, so the norm is 1/2
        let symbol = |theta: f64| Complex64::new(1.0 - theta.cos(), 0.0);
        match heat_g_norm_fourier(&symbol).unwrap() {
            GNorm::Finite(v) => assert!((v - 0.5).abs() <= 1e-6, "norm = {v}"),
            GNorm::Divergent { exponent } => panic!("spurious divergence, exponent {exponent}"),
        }

        let zero = |_: f64| Complex64::new(0.0, 0.0);
        match heat_g_norm_fourier(&zero).unwrap() {
            GNorm::Finite(v) => assert_eq!(v, 0.0),
            GNorm::Divergent { .. } => panic!("zero multiplier flagged divergent"),
        }
    }

    #[test]
    fn kernel_size_and_smoothness_decay_like_inverse_powers() {
        let tg = TGrid::log_spaced(1e-3, 1e3, 96).unwrap();
        let r = cz_kernel_size_check(order(0.5), &tg, 8, 1024).unwrap();
        assert!(
            (r.s_exponent + 1.0).abs() <= 0.15,
            "size exponent {}",
            r.s_exponent
        );
        assert!(
            (r.d_exponent + 2.0).abs() <= 0.25,
            "smoothness exponent {}",
            r.d_exponent
        );
        assert!(r.j_times_s_max.is_finite() && r.j_times_s_max > 0.0);
        assert!(r.j_times_s_max <= 2.0, "j·s = {}", r.j_times_s_max);
        assert!(r.j.len() >= 12 && r.j[0] == 8 && *r.j.last().unwrap() == 1024);
    }

    #[test]
    fn point_mass_l2_growth_tracks_log_n() {
        let r = empirical_lp_growth(
            MaximalOp::HeatMax,
            InputFamily::Indicator,
            2.0,
            &[64, 128, 256, 512],
            1,
            7,
        )
        .unwrap();
        let expected = 1.0 / (2.0 * PI);
        assert!(
            (r.squared_norm_slope - expected).abs() <= 0.25 * expected,
            "slope {}",
            r.squared_norm_slope
        );
        assert_eq!(r.op, "heat_max");
        assert_eq!(r.family, "indicator");
        assert!(r.gamma.is_none());
        assert!(r.norm_ratio > 1.0);
    }

    #[test]
    fn growth_reports_are_deterministic() {
        let run = || {
            empirical_lp_growth(
                MaximalOp::PoissonMax(order(0.5)),
                InputFamily::RandomSigns,
                2.0,
                &[32, 64],
                2,
                9,
            )
            .unwrap()
        };
        let a = serde_json::to_string(&run()).unwrap();
        let b = serde_json::to_string(&run()).unwrap();
        assert_eq!(a, b);
        let r = run();
        assert_eq!(r.gamma, Some(0.5));
        assert!(r.norms.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn distribution_function_counts_exceedances() {
        let grid = Grid::new(1.0, 0, 4).unwrap();
        let v = GridFunction::from_values(
            grid,
            vec![0.1, -0.5, 2.0, 0.5, -3.0],
            TailModel::Zero,
            TailModel::Zero,
        )
        .unwrap();
        let d = distribution_function(&v, &[0.25, 0.5, 1.0, 10.0]).unwrap();
        assert_eq!(d, vec![(0.25, 4), (0.5, 2), (1.0, 2), (10.0, 0)]);
    }

    #[test]
    fn harmonic_rejections() {
        let tg = TGrid::log_spaced(1e-2, 1e2, 32).unwrap();
        assert!(matches!(
            cz_kernel_size_check(order(0.5), &tg, 4, 64),
            Err(FracError::InvalidParameter { name: "j_lo", .. })
        ));
        assert!(matches!(
            cz_kernel_size_check(order(0.5), &tg, 8, 8192),
            Err(FracError::InvalidParameter { name: "j_hi", .. })
        ));
        assert!(matches!(
            empirical_lp_growth(MaximalOp::HeatMax, InputFamily::Indicator, 0.5, &[64, 128], 1, 0),
            Err(FracError::InvalidParameter { name: "p", .. })
        ));
        assert!(matches!(
            empirical_lp_growth(MaximalOp::HeatMax, InputFamily::Indicator, 2.0, &[64], 1, 0),
            Err(FracError::InvalidParameter { name: "sizes", .. })
        ));
        assert!(matches!(
            empirical_lp_growth(MaximalOp::HeatMax, InputFamily::Indicator, 2.0, &[64, 96], 1, 0),
            Err(FracError::InvalidParameter { name: "size", .. })
        ));
        assert!(matches!(
            empirical_lp_growth(MaximalOp::HeatMax, InputFamily::Indicator, 2.0, &[64, 128], 0, 0),
            Err(FracError::InvalidParameter { name: "trials", .. })
        ));

        // an undeclared tail bound stops the dense route before any sums run
        let grid = Grid::new(1.0, 0, 20).unwrap();
        let u = GridFunction::from_values(
            grid,
            vec![1.0; grid.len()],
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x: f64| x))),
            TailModel::Zero,
        )
        .unwrap();
        assert!(matches!(
            heat_maximal(&u, &tg, Side::Left),
            Err(FracError::UnboundedTail { .. })
        ));
    }
}
