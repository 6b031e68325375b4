//! Subordinated (Poisson) kernel P_t^γ(j) and its convolution action.
//!
//! P_t^γ(j) = t^{j+γ} / (2^{j+γ−1} Γ(γ) j!) · K_{j−γ}(t) is a probability
//! distribution on j ≥ 0 with a heavy tail P_t^γ(j) ≍ j^{−1−γ}. The Bessel
//! recurrence K_{ν+1} = (2ν/t)K_ν + K_{ν−1} turns into a three-term
//! recurrence on the weights themselves,
//!
//!   P(j+1) = ((j−γ)/(j+1)) P(j) + (t²/(4j(j+1))) P(j−1),
//!
//! which stays in [0, 1] throughout: the factorially growing K values and the
//! factorially shrinking prefactors never appear separately. Two seeds from
//! quadrature are enough; upward is the stable direction here since the
//! weights grow toward the bulk of the distribution.

use std::sync::Arc;

use crate::coefficients::FracOrder;
use crate::error::{FracError, Result, Side};
use crate::grid::{GridFunction, TailFn, TailModel};
use crate::quadrature::adaptive_rel;
use crate::semigroups::bessel::bessel_k;
use crate::special::{gamma as gamma_fn, ln_factorial, ln_gamma};

/// Hard cap on kernel length; the tail law J^{−γ} makes tolerances below
/// roughly cap^{−γ} unreachable and the constructor reports that honestly.
pub const POISSON_MAX_TERMS: usize = 4_000_000;

/// Above this t the j = 0, 1 weights fall out of the normal f64 range and
/// seeding moves to log-space quadrature at the first representable index.
const DIRECT_SEED_MAX_T: f64 = 600.0;

/// ln(≈1e−270): seeds below this are too close to the subnormal range to
/// anchor the recurrence.
const LN_SEED_FLOOR: f64 = -621.0;

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || !(t > 0.0) {
        return Err(FracError::InvalidParameter { name: "t", value: t });
    }
    Ok(())
}

/// ln P_t^γ(j) by Laplace-centered quadrature of the subordination integral
/// in x = ln s; exact up to quadrature tolerance for any (t, j).
fn ln_value(gamma: f64, t: f64, j: usize) -> Result<f64> {
    let a = j as f64 - gamma;
    let q = 0.25 * t * t;
    let g = |x: f64| -x.exp() - q * (-x).exp() + a * x;
    // stationary point of g: e^x = (a + √(a² + t²))/2
    let xs = (0.5 * (a + (a * a + t * t).sqrt())).ln();
    let m = g(xs);
    let mut w = 1.0;
    while g(xs - w) - m > -46.0 || g(xs + w) - m > -46.0 {
        w += 1.0;
    }
    let r = adaptive_rel(&mut |x: f64| (g(x) - m).exp(), xs - w, xs + w, 1e-12)?;
    Ok(2.0 * gamma * t.ln() - gamma * 4.0f64.ln() - ln_gamma(gamma) - ln_factorial(j as u64)
        + m
        + r.value.ln())
}

/// Emits P_t^γ(0), P_t^γ(1), ... one value per call.
struct KernelSeq {
    gamma: f64,
    t: f64,
    j0: usize,
    seed0: f64,
    seed1: f64,
    j: usize,
    prev: f64,
    curr: f64,
}

impl KernelSeq {
    fn new(gamma: f64, t: f64) -> Result<Self> {
        let (j0, seed0, seed1) = if t <= DIRECT_SEED_MAX_T {
            let c = t.powf(gamma) * (1.0 - gamma).exp2() / gamma_fn(gamma);
            (
                0,
                c * bessel_k(gamma, t)?,
                c * (0.5 * t) * bessel_k(1.0 - gamma, t)?,
            )
        } else {
            // indices below j0 hold true weights under ~1e−270; they are
            // recorded as zero and the recurrence starts from the first
            // representable pair
            let j0 = if ln_value(gamma, t, 0)? >= LN_SEED_FLOOR {
                0
            } else {
                let (mut lo, mut hi) = (0usize, 1usize);
                while ln_value(gamma, t, hi)? < LN_SEED_FLOOR {
                    lo = hi;
                    hi *= 2;
                    if hi > 100_000_000 {
                        return Err(FracError::InvalidParameter { name: "t", value: t });
                    }
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if ln_value(gamma, t, mid)? < LN_SEED_FLOOR {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            };
            (
                j0,
                ln_value(gamma, t, j0)?.exp(),
                ln_value(gamma, t, j0 + 1)?.exp(),
            )
        };
        Ok(KernelSeq {
            gamma,
            t,
            j0,
            seed0,
            seed1,
            j: 0,
            prev: 0.0,
            curr: 0.0,
        })
    }

    fn next_value(&mut self) -> f64 {
        let v = if self.j < self.j0 {
            0.0
        } else if self.j == self.j0 {
            self.seed0
        } else if self.j == self.j0 + 1 {
            self.seed1
        } else {
            // advance from index j−1: valid for j−1 ≥ 1, guaranteed by j0 ≥ 0
            let jm = (self.j - 1) as f64;
            ((jm - self.gamma) / (jm + 1.0)) * self.curr
                + (self.t * self.t / (4.0 * jm * (jm + 1.0))) * self.prev
        };
        self.prev = self.curr;
        self.curr = v;
        self.j += 1;
        v
    }
}

/// Subordination weights for one (γ, t); immutable once built.
#[derive(Clone, Debug)]
pub struct PoissonKernel {
    gamma: FracOrder,
    t: f64,
    values: Vec<f64>,
    mass_deficit: f64,
}

impl PoissonKernel {
    pub fn gamma(&self) -> FracOrder {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        if j < self.values.len() {
            self.values[j]
        } else {
            0.0
        }
    }

    /// 1 − Σ stored values ≥ 0.
    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }
}

/// Kernel long enough that the discarded mass is at most `tolerance`.
pub fn poisson_kernel(gamma: FracOrder, t: f64, tolerance: f64) -> Result<PoissonKernel> {
    check_t(t)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let mut seq = KernelSeq::new(gamma.value(), t)?;
    let mut values = Vec::new();
    let mut sum = 0.0f64;
    loop {
        let v = seq.next_value();
        values.push(v);
        sum += v;
        if 1.0 - sum <= tolerance {
            break;
        }
        if values.len() >= POISSON_MAX_TERMS {
            return Err(FracError::MassDeficitUnreachable {
                deficit: 1.0 - sum,
                tol: tolerance,
            });
        }
    }
    Ok(PoissonKernel {
        gamma,
        t,
        values,
        mass_deficit: (1.0 - sum).max(0.0),
    })
}

/// Exactly `len` kernel values, whatever mass they carry. For pointwise uses
/// (maximal functions, kernel size estimates) where a deficit target would be
/// unreachable or wasteful.
pub fn poisson_kernel_len(gamma: FracOrder, t: f64, len: usize) -> Result<PoissonKernel> {
    check_t(t)?;
    if len == 0 {
        return Err(FracError::InvalidParameter {
            name: "len",
            value: 0.0,
        });
    }
    let mut seq = KernelSeq::new(gamma.value(), t)?;
    let mut values = Vec::with_capacity(len);
    let mut sum = 0.0f64;
    for _ in 0..len {
        let v = seq.next_value();
        values.push(v);
        sum += v;
    }
    Ok(PoissonKernel {
        gamma,
        t,
        values,
        mass_deficit: (1.0 - sum).max(0.0),
    })
}

/// Σ_j P_t^γ(j) r^j = (2/Γ(γ)) (t√(1−r)/2)^γ K_γ(t√(1−r)) for 0 ≤ r < 1;
/// at γ = 1/2 this collapses to e^{−t√(1−r)}.
pub fn poisson_eigenvalue(gamma: FracOrder, t: f64, r: f64) -> Result<f64> {
    check_t(t)?;
    if !(0.0..1.0).contains(&r) {
        return Err(FracError::InvalidParameter { name: "r", value: r });
    }
    let g = gamma.value();
    let x = t * (1.0 - r).sqrt();
    Ok(2.0 / gamma_fn(g) * (0.5 * x).powf(g) * bessel_k(g, x)?)
}

/// Sup of |u − c| on the ray of needed-but-unsummed values. With a constant
/// (or zero) tail on the action side the centered remainder vanishes once the
/// ray clears the window, making the truncation exact there.
fn shifted_ray_sup(
    u: &GridFunction,
    first: i64,
    side: Side,
    center: f64,
    constant_tail: bool,
) -> Option<f64> {
    if !constant_tail {
        return u.ray_sup_from(first, side);
    }
    let g = u.grid();
    let (lo, hi) = match side {
        Side::Right => (first, g.n_hi()),
        Side::Left => (g.n_lo(), first),
    };
    let mut s = 0.0f64;
    let mut n = lo;
    while n <= hi {
        s = s.max((u.value(n) - center).abs());
        n += 1;
    }
    Some(s)
}

/// Shared core: accumulate Σ_j w_j u(n ± j) over the whole window, extending
/// the kernel until deficit · sup|u − c| on the unclaimed ray is within
/// tolerance, then close with c · (1 − Σ w_j).
fn apply_adaptive(
    u: &GridFunction,
    gamma: f64,
    t: f64,
    side: Side,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let g = u.grid();
    let (center, constant_tail) = match u.tail(side) {
        TailModel::Zero => (0.0, true),
        TailModel::Constant(c) => (*c, true),
        TailModel::Callback(_) => (0.0, false),
    };
    let first_of = |len: i64| match side {
        Side::Right => g.n_lo() + len,
        Side::Left => g.n_hi() - len,
    };
    let sgn = side.sign() as i64;
    let mut s = shifted_ray_sup(u, first_of(1), side, center, constant_tail)
        .ok_or(FracError::UnboundedTail { side })?;
    let mut seq = KernelSeq::new(gamma, t)?;
    let width = g.len();
    let mut acc = vec![0.0f64; width];
    let mut mass = 0.0f64;
    let mut len = 0i64;
    let mut next_recompute = 16i64;
    loop {
        let w = seq.next_value();
        for (i, a) in acc.iter_mut().enumerate() {
            *a += w * u.value(g.n_lo() + i as i64 + sgn * len);
        }
        mass += w;
        len += 1;
        let deficit = (1.0 - mass).max(0.0);
        if constant_tail {
            let cleared = match side {
                Side::Right => first_of(len) > g.n_hi(),
                Side::Left => first_of(len) < g.n_lo(),
            };
            if cleared {
                break;
            }
        } else if len >= next_recompute {
            s = shifted_ray_sup(u, first_of(len), side, center, constant_tail)
                .ok_or(FracError::UnboundedTail { side })?;
            next_recompute *= 2;
        }
        if deficit * s <= tolerance {
            break;
        }
        if len as usize >= POISSON_MAX_TERMS {
            return Err(FracError::MassDeficitUnreachable {
                deficit: deficit * s,
                tol: tolerance,
            });
        }
    }
    // 1 − mass is exact near 1 (Sterbenz), and adding c · deficit keeps the
    // window values nonnegative in floating point whenever u ≥ 0 and c ≥ 0
    let deficit = (1.0 - mass).max(0.0);
    if center != 0.0 {
        for a in acc.iter_mut() {
            *a += center * deficit;
        }
    }
    Ok(acc)
}

/// One value of the subordinated semigroup: (P^γ_{t,±} u)(n).
pub fn poisson_point(
    u: &GridFunction,
    gamma: FracOrder,
    t: f64,
    n: i64,
    side: Side,
    tolerance: f64,
) -> Result<f64> {
    check_t(t)?;
    let g = u.grid();
    let sgn = side.sign() as i64;
    let (center, constant_tail) = match u.tail(side) {
        TailModel::Zero => (0.0, true),
        TailModel::Constant(c) => (*c, true),
        TailModel::Callback(_) => (0.0, false),
    };
    let mut s = shifted_ray_sup(u, n + sgn, side, center, constant_tail)
        .ok_or(FracError::UnboundedTail { side })?;
    let mut seq = KernelSeq::new(gamma.value(), t)?;
    let mut acc = 0.0f64;
    let mut mass = 0.0f64;
    let mut len = 0i64;
    let mut next_recompute = 16i64;
    loop {
        let w = seq.next_value();
        acc += w * u.value(n + sgn * len);
        mass += w;
        len += 1;
        let deficit = (1.0 - mass).max(0.0);
        if constant_tail {
            let cleared = match side {
                Side::Right => n + len > g.n_hi(),
                Side::Left => n - len < g.n_lo(),
            };
            if cleared {
                break;
            }
        } else if len >= next_recompute {
            s = shifted_ray_sup(u, n + sgn * len, side, center, constant_tail)
                .ok_or(FracError::UnboundedTail { side })?;
            next_recompute *= 2;
        }
        if deficit * s <= tolerance {
            break;
        }
        if len as usize >= POISSON_MAX_TERMS {
            return Err(FracError::MassDeficitUnreachable {
                deficit: deficit * s,
                tol: tolerance,
            });
        }
    }
    Ok(acc + center * (1.0 - mass).max(0.0))
}

/// P^γ_{t,±} u on u's window. The result keeps callback tails that evaluate
/// the same convolution on demand; their declared bounds come from sups of u,
/// so downstream truncation logic stays rigorous even where evaluation would
/// be expensive.
pub fn poisson_apply(
    u: &GridFunction,
    gamma: FracOrder,
    t: f64,
    side: Side,
    tolerance: f64,
) -> Result<GridFunction> {
    check_t(t)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let values = apply_adaptive(u, gamma.value(), t, side, tolerance)?;
    let g = u.grid();
    let h = g.h();

    // |result| on a ray never exceeds the sup of |u| over everything the
    // convolution can reach from there
    let action_bound = match side {
        Side::Right => u.ray_sup_from(g.n_hi() + 1, Side::Right),
        Side::Left => u.ray_sup_from(g.n_lo() - 1, Side::Left),
    };
    let global_bound = match (u.tail(Side::Left).bound(), u.tail(Side::Right).bound()) {
        (Some(a), Some(b)) => Some(a.max(b).max(u.window_sup())),
        _ => None,
    };
    let (right_bound, left_bound) = match side {
        Side::Right => (action_bound, global_bound),
        Side::Left => (global_bound, action_bound),
    };

    let mk_tail = |bound: Option<f64>| {
        let uc = u.clone();
        TailModel::Callback(TailFn::new(
            None,
            bound,
            false,
            Arc::new(move |x: f64| {
                let n = (x / h).round() as i64;
                poisson_point(&uc, gamma, t, n, side, tolerance).unwrap_or(f64::NAN)
            }),
        ))
    };
    GridFunction::from_values(g, values, mk_tail(left_bound), mk_tail(right_bound))
}
