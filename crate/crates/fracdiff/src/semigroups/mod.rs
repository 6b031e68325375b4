//! Shift semigroups on the lattice: the heat family T_{t,±} with Poisson
//! weights, its subordinated (fractional Poisson) relatives, and the
//! extension-problem machinery built on top of them.
//!
//! Everything here acts on index space: the grid spacing of the argument is
//! carried through untouched, and the identities that mix semigroups with
//! difference operators are stated (and validated) on unit-spacing grids.

use std::sync::Arc;

use num_complex::Complex64;

use crate::coefficients::{heat_weights, HeatWeights};
use crate::error::{FracError, Result, Side};
use crate::grid::{GridFunction, TailFn, TailModel};

pub mod bessel;
pub mod extension;
pub mod poisson;

pub use bessel::{bessel_k, bessel_k_scaled, bessel_k_signed};
pub use extension::{
    extension_residual, extension_sample, neumann_limit, ExtensionSample, NeumannComparison,
};
pub use poisson::{
    poisson_apply, poisson_eigenvalue, poisson_kernel, poisson_kernel_len, poisson_point,
    PoissonKernel,
};

fn action_center(u: &GridFunction, side: Side) -> (f64, bool) {
    match u.tail(side) {
        TailModel::Zero => (0.0, true),
        TailModel::Constant(c) => (*c, true),
        TailModel::Callback(_) => (0.0, false),
    }
}

/// Σ_j G_t(j) u(n ± j) against a prebuilt weight table. With a constant (or
/// zero) tail on the action side the sum is cut at the window edge and closed
/// with c · (1 − partial mass): the centered remainder past the edge is
/// exactly zero, so the table's own deficit never enters there.
fn heat_point_sum(
    u: &GridFunction,
    w: &HeatWeights,
    n: i64,
    side: Side,
    center: f64,
    constant_tail: bool,
) -> f64 {
    let g = u.grid();
    let sgn = side.sign() as i64;
    let cut = if constant_tail {
        let clear = match side {
            Side::Right => g.n_hi() - n,
            Side::Left => n - g.n_lo(),
        };
        if clear < 0 {
            0
        } else {
            (clear as usize + 1).min(w.len())
        }
    } else {
        w.len()
    };
    let mut acc = 0.0f64;
    let mut mass = 0.0f64;
    for j in 0..cut {
        let wt = w.value(j);
        acc += wt * u.value(n + sgn * j as i64);
        mass += wt;
    }
    // 1 − mass is exact near 1; the correction keeps nonnegative inputs
    // nonnegative in floating point when center ≥ 0
    acc + center * (1.0 - mass).max(0.0)
}

/// Sup of |u − c| over everything the action can still reach; the weight
/// table's mass budget is tolerance / (1 + this).
fn action_sup(u: &GridFunction, side: Side, center: f64, constant_tail: bool) -> Result<f64> {
    let g = u.grid();
    if constant_tail {
        Ok(g.indices()
            .map(|n| (u.value(n) - center).abs())
            .fold(0.0f64, f64::max))
    } else {
        let edge = match side {
            Side::Right => g.n_lo(),
            Side::Left => g.n_hi(),
        };
        u.ray_sup_from(edge, side)
            .ok_or(FracError::UnboundedTail { side })
    }
}

/// One value of the heat action: (T_{t,±} u)(n).
pub fn heat_point(u: &GridFunction, t: f64, n: i64, side: Side, tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let (center, constant_tail) = action_center(u, side);
    let s0 = action_sup(u, side, center, constant_tail)?;
    let w = heat_weights(t, tolerance / (1.0 + s0))?;
    Ok(heat_point_sum(u, &w, n, side, center, constant_tail))
}

/// T_{t,±} u on u's window. Truncation is tuned so the discarded mass times
/// the reachable sup of |u| (or of |u − c| for a constant tail) stays within
/// `tolerance`. Result tails are callbacks evaluating the same sum on demand.
pub fn heat_apply(u: &GridFunction, t: f64, side: Side, tolerance: f64) -> Result<GridFunction> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let g = u.grid();
    let (center, constant_tail) = action_center(u, side);
    let s0 = action_sup(u, side, center, constant_tail)?;
    let w = Arc::new(heat_weights(t, tolerance / (1.0 + s0))?);

    let values: Vec<f64> = g
        .indices()
        .map(|n| heat_point_sum(u, &w, n, side, center, constant_tail))
        .collect();

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

    let h = g.h();
    let mk_tail = |bound: Option<f64>| {
        let uc = u.clone();
        let wc = Arc::clone(&w);
        TailModel::Callback(TailFn::new(
            None,
            bound,
            false,
            Arc::new(move |x: f64| {
                heat_point_sum(&uc, &wc, (x / h).round() as i64, side, center, constant_tail)
            }),
        ))
    };
    GridFunction::from_values(g, values, mk_tail(left_bound), mk_tail(right_bound))
}

/// Fourier multiplier of T_{t,+}: e^{−t(1−e^{iθ})}.
pub fn heat_symbol(theta: f64, t: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    ((z - 1.0) * t).exp()
}

/// Residuals |(T_t u(n) − u(n))/t + δ_right u(n)| along a sequence of t's;
/// linear decay in t is the generator identity at work.
pub fn generator_limit_check(u: &GridFunction, n: i64, ts: &[f64]) -> Result<Vec<f64>> {
    if u.grid().h() != 1.0 {
        return Err(FracError::InvalidStep(u.grid().h()));
    }
    let (center, constant_tail) = action_center(u, Side::Right);
    if !constant_tail {
        u.ray_sup_from(u.grid().n_lo(), Side::Right)
            .ok_or(FracError::UnboundedTail { side: Side::Right })?;
    }
    let d = u.delta_right(n);
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        if !t.is_finite() || !(t > 0.0) {
            return Err(FracError::InvalidParameter { name: "t", value: t });
        }
        let w = heat_weights(t, 1e-14)?;
        let tu = heat_point_sum(u, &w, n, Side::Right, center, constant_tail);
        out.push(((tu - u.value(n)) / t + d).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::heat_weight;
    use crate::grid::Grid;
    use crate::quadrature::adaptive_abs;
    use crate::special::gamma as gamma_fn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_gf(rng: &mut ChaCha8Rng, lo: i64, hi: i64, c: f64) -> GridFunction {
        let grid = Grid::new(1.0, lo, hi).unwrap();
        let vals = (0..grid.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        GridFunction::from_values(grid, vals, TailModel::Constant(c), TailModel::Constant(c))
            .unwrap()
    }

    #[test]
    fn constants_are_fixed_points() {
        let grid = Grid::new(1.0, -4, 4).unwrap();
        let u = GridFunction::sample(grid, |_| 1.0, TailModel::Constant(1.0), TailModel::Constant(1.0));
        for side in [Side::Right, Side::Left] {
            let v = heat_apply(&u, 0.7, side, 1e-12).unwrap();
            for n in grid.indices() {
                assert!((v.value(n) - 1.0).abs() <= 4.0 * f64::EPSILON);
            }
        }
        // t = 0 is the identity
        let w = heat_apply(&u, 0.0, Side::Right, 1e-12).unwrap();
        for n in grid.indices() {
            assert_eq!(w.value(n), 1.0);
        }
    }

    #[test]
    fn left_action_on_the_origin_indicator_is_the_weight_table() {
        // T_{t,−} δ_0 (n) = e^{−t} t^n / n! for n ≥ 0
        let grid = Grid::new(1.0, -12, 12).unwrap();
        let u = GridFunction::delta_at(grid, 0).unwrap();
        let t = 1.3;
        let v = heat_apply(&u, t, Side::Left, 1e-13).unwrap();
        for n in 0..=12u64 {
            let want = heat_weight(t, n);
            let got = v.value(n as i64);
            assert!(((got - want) / want).abs() < 1e-12, "n={n}: {got} vs {want}");
        }
        assert_eq!(v.value(-3), 0.0);
    }

    #[test]
    fn geometric_decay_is_an_eigenfunction() {
        let r = 0.4f64;
        let grid = Grid::new(1.0, 0, 40).unwrap();
        let right = TailModel::Callback(TailFn::new(
            Some("geo"),
            Some(r.powi(41)),
            true,
            Arc::new(move |x: f64| r.powf(x)),
        ));
        let left =
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(move |x: f64| r.powf(x))));
        let u = GridFunction::sample(grid, |x| r.powf(x), left, right);
        let t = 1.7;
        let v = heat_apply(&u, t, Side::Right, 1e-13).unwrap();
        let lam = (-t * (1.0 - r)).exp();
        for n in [0i64, 10, 33] {
            let want = lam * r.powi(n as i32);
            assert!(((v.value(n) - want) / want).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn semigroup_law_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..25 {
            let c = rng.gen_range(-1.0..1.0);
            let u = rand_gf(&mut rng, -6, 6, c);
            for (t, s) in [(0.5, 0.5), (1.0, 2.0)] {
                let two_step =
                    heat_apply(&heat_apply(&u, t, Side::Right, 1e-12).unwrap(), s, Side::Right, 1e-12)
                        .unwrap();
                let one_step = heat_apply(&u, t + s, Side::Right, 1e-12).unwrap();
                for n in u.grid().indices() {
                    assert!(
                        (two_step.value(n) - one_step.value(n)).abs() < 1e-9,
                        "t={t} s={s} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn contraction_in_p_norms_on_finite_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let grid = Grid::new(1.0, -4, 4).unwrap();
            let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let u = GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero).unwrap();
            // T_{t,+} pushes mass left; a 60-site left margin holds all but
            // ~1e−49 of it at t = 2
            let ext = u.materialize(60, 0).unwrap();
            let v = heat_apply(&ext, 2.0, Side::Right, 1e-13).unwrap();
            let vz = GridFunction::from_values(
                ext.grid(),
                v.values().to_vec(),
                TailModel::Zero,
                TailModel::Zero,
            )
            .unwrap();
            for p in [1.0, 2.0, f64::INFINITY] {
                let before = u.lp_norm(p).unwrap();
                let after = vz.lp_norm(p).unwrap();
                assert!(after <= before + 1e-10, "p={p}: {after} > {before}");
            }
        }
    }

    #[test]
    fn nonnegativity_is_preserved_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let grid = Grid::new(1.0, -5, 5).unwrap();
        for c in [0.0, 0.2] {
            for _ in 0..10 {
                let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..3.0)).collect();
                let tail = if c == 0.0 {
                    TailModel::Zero
                } else {
                    TailModel::Constant(c)
                };
                let u = GridFunction::from_values(grid, vals, tail.clone(), tail).unwrap();
                let v = heat_apply(&u, 1.1, Side::Right, 1e-10).unwrap();
                for n in grid.indices() {
                    assert!(v.value(n) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn left_and_right_actions_are_adjoint() {
        let gu = Grid::new(1.0, -3, 3).unwrap();
        let gv = Grid::new(1.0, -2, 5).unwrap();
        let u = GridFunction::sample(gu, |x| x * x - 2.0, TailModel::Zero, TailModel::Zero);
        let v = GridFunction::sample(gv, |x| (x * 0.8).sin(), TailModel::Zero, TailModel::Zero);
        let t = 0.9;
        let w = heat_weights(t, 1e-15).unwrap();
        // ⟨T_+ u, v⟩ needs T_+ u only where v lives, and vice versa
        let lhs: f64 = gv
            .indices()
            .map(|n| heat_point_sum(&u, &w, n, Side::Right, 0.0, true) * v.value(n))
            .sum();
        let rhs: f64 = gu
            .indices()
            .map(|n| u.value(n) * heat_point_sum(&v, &w, n, Side::Left, 0.0, true))
            .sum();
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn generator_limit_is_linear_in_t() {
        let grid = Grid::new(1.0, -3, 3).unwrap();
        // constants sit in the kernel of the generator
        let c = GridFunction::sample(grid, |_| 5.0, TailModel::Constant(5.0), TailModel::Constant(5.0));
        for r in generator_limit_check(&c, 0, &[1.0, 0.1, 0.01]).unwrap() {
            assert_eq!(r, 0.0);
        }
        // indicator of {1}: residual |e^{−t} − 1| ≈ t
        let u = GridFunction::delta_at(grid, 1).unwrap();
        let r = generator_limit_check(&u, 0, &[1e-3]).unwrap();
        assert!(r[0] <= 1e-2, "{}", r[0]);

        // halving t halves the residual when the quadratic term is present
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut kept = 0;
        for _ in 0..20 {
            let vals: Vec<f64> = (0..grid.len())
                .map(|_| rng.gen_range(-3..=3) as f64)
                .collect();
            let dd = vals[3] - 2.0 * vals[4] + vals[5];
            if dd == 0.0 {
                continue;
            }
            let u = GridFunction::from_values(grid, vals, TailModel::Zero, TailModel::Zero).unwrap();
            let r = generator_limit_check(&u, 0, &[1e-2, 5e-3]).unwrap();
            let ratio = r[1] / r[0];
            assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
            kept += 1;
        }
        assert!(kept >= 10, "only {kept} draws had a second-order term");
    }

    #[test]
    fn symbol_values_and_modulus() {
        let s0 = heat_symbol(0.0, 3.0);
        assert_eq!(s0.re, 1.0);
        assert_eq!(s0.im, 0.0);
        let spi = heat_symbol(std::f64::consts::PI, 1.0);
        assert!((spi.re - (-2.0f64).exp()).abs() < 1e-15);
        assert!(spi.im.abs() < 1e-15);
        // |e^{−t(1−e^{iθ})}| = e^{−t(1−cos θ)}
        let m = heat_symbol(std::f64::consts::FRAC_PI_2, 2.0).norm();
        assert!((m - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn symbol_matches_the_weight_transform() {
        let (t, theta) = (1.0, 0.7);
        let w = heat_weights(t, 1e-14).unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, wt) in w.values().iter().enumerate() {
            sum += wt * Complex64::from_polar(1.0, theta * j as f64);
        }
        let sym = heat_symbol(theta, t);
        assert!((sum - sym).norm() < 1e-12, "{sum} vs {sym}");
    }

    #[test]
    fn gamma_formula_recovers_the_kernel() {
        // (1/Γ(−α)) ∫ (T_t u − u) t^{−1−α} dt term-by-term on an indicator
        // reproduces the fractional kernel: both sides equal Λ(2) at n = −2
        let alpha = 0.6;
        let grid = Grid::new(1.0, -8, 8).unwrap();
        let u = GridFunction::delta_at(grid, 0).unwrap();
        let n = -2i64;
        let mut integrand = |t: f64| {
            let w = heat_weights(t, 1e-13).unwrap();
            (heat_point_sum(&u, &w, n, Side::Right, 0.0, true) - u.value(n)) * t.powf(-1.0 - alpha)
        };
        let integral = adaptive_abs(&mut integrand, 0.0, 40.0, 1e-10).unwrap().value;
        let lhs = integral / gamma_fn(-alpha);
        let table =
            crate::coefficients::lambda_coeffs(crate::coefficients::FracOrder::new(alpha).unwrap(), 100)
                .unwrap();
        let rhs = crate::fractional_ops::frac_right(&u, &table, n).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn unbounded_tails_are_rejected() {
        let grid = Grid::new(1.0, 0, 3).unwrap();
        let u = GridFunction::sample(
            grid,
            |x| x,
            TailModel::Zero,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x: f64| x))),
        );
        assert!(matches!(
            heat_apply(&u, 1.0, Side::Right, 1e-10),
            Err(FracError::UnboundedTail { side: Side::Right })
        ));
        assert!(heat_apply(&u, 1.0, Side::Left, 1e-10).is_ok());
    }
}
