//! Uniform grids h·Z and functions on them.
//!
//! A [`GridFunction`] stores values on a finite index window and carries an
//! explicit model for each infinite ray beyond it. The operators in this
//! crate sum over whole rays, so silently zero-padding outside the window
//! would corrupt every convergence experiment; the tail model keeps the
//! choice visible and lets each operator account for what it truncated.
//!
//! All public APIs address the physical index n (the point n·h), never
//! array offsets.

use crate::error::{FracError, Result, Side};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

/// Uniform mesh {n·h : n_lo ≤ n ≤ n_hi}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    h: f64,
    n_lo: i64,
    n_hi: i64,
}

impl Grid {
    /// Single-point windows are legal: a Dirichlet problem can have one
    /// unknown, and every operator resolves neighbors through the tails.
    pub const MIN_POINTS: usize = 1;

    pub fn new(h: f64, n_lo: i64, n_hi: i64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(FracError::InvalidStep(h));
        }
        if n_hi < n_lo + Self::MIN_POINTS as i64 - 1 {
            return Err(FracError::InvalidWindow {
                n_lo,
                n_hi,
                min: Self::MIN_POINTS,
            });
        }
        Ok(Grid { h, n_lo, n_hi })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, n: i64) -> f64 {
        n as f64 * self.h
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_lo..=self.n_hi).contains(&n)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }
}

/// Evaluable description of a function on a ray, with the metadata the
/// operators need to bound what they cannot sum.
#[derive(Clone)]
pub struct TailFn {
    name: Option<String>,
    bound: Option<f64>,
    decays: bool,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TailFn {
    pub fn new(
        name: Option<&str>,
        bound: Option<f64>,
        decays: bool,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        TailFn {
            name: name.map(str::to_owned),
            bound,
            decays,
            f,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Declared sup of |f| on the ray, if any.
    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    /// Whether |f| → 0 along the ray.
    pub fn decays(&self) -> bool {
        self.decays
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for TailFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TailFn")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("decays", &self.decays)
            .finish_non_exhaustive()
    }
}

/// What a grid function does beyond its stored window.
#[derive(Clone, Debug)]
pub enum TailModel {
    /// Identically zero beyond the window.
    Zero,
    /// Identically this value beyond the window.
    Constant(f64),
    /// Evaluated on demand at physical coordinates.
    Callback(TailFn),
}

impl TailModel {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TailModel::Zero => 0.0,
            TailModel::Constant(c) => *c,
            TailModel::Callback(t) => t.eval(x),
        }
    }

    /// Sup of |values| on the ray, when one is known.
    pub fn bound(&self) -> Option<f64> {
        match self {
            TailModel::Zero => Some(0.0),
            TailModel::Constant(c) => Some(c.abs()),
            TailModel::Callback(t) => t.bound(),
        }
    }

    pub fn decays(&self) -> bool {
        match self {
            TailModel::Zero => true,
            TailModel::Constant(c) => *c == 0.0,
            TailModel::Callback(t) => t.decays(),
        }
    }

    pub fn vanishes(&self) -> bool {
        matches!(self, TailModel::Zero) || matches!(self, TailModel::Constant(c) if *c == 0.0)
    }
}

/// Serialized form of a tail model; callbacks keep only their registry name.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TailSpec {
    Zero,
    Constant(f64),
    Callback(String),
}

impl TailSpec {
    fn of(model: &TailModel) -> Result<Self> {
        match model {
            TailModel::Zero => Ok(TailSpec::Zero),
            TailModel::Constant(c) => Ok(TailSpec::Constant(*c)),
            TailModel::Callback(t) => t
                .name()
                .map(|n| TailSpec::Callback(n.to_owned()))
                .ok_or(FracError::UnserializableTail),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GridMeta {
    h: f64,
    n_lo: i64,
    n_hi: i64,
    tail_right: TailSpec,
    tail_left: TailSpec,
}

/// Function on a uniform grid: stored window plus a total model of each ray.
/// Immutable after construction; callback tails must be side-effect-free,
/// they may be evaluated concurrently.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    tail_left: TailModel,
    tail_right: TailModel,
}

impl GridFunction {
    pub fn from_values(
        grid: Grid,
        values: Vec<f64>,
        tail_left: TailModel,
        tail_right: TailModel,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::InvalidWindow {
                n_lo: grid.n_lo,
                n_hi: grid.n_lo + values.len() as i64 - 1,
                min: grid.len(),
            });
        }
        Ok(GridFunction {
            grid,
            values,
            tail_left,
            tail_right,
        })
    }

    /// Fill the window with f(n·h).
    pub fn sample(
        grid: Grid,
        f: impl Fn(f64) -> f64,
        tail_left: TailModel,
        tail_right: TailModel,
    ) -> Self {
        let values = grid.indices().map(|n| f(grid.x(n))).collect();
        GridFunction {
            grid,
            values,
            tail_left,
            tail_right,
        }
    }

    /// Indicator of the single site n = at (zero tails).
    pub fn delta_at(grid: Grid, at: i64) -> Result<Self> {
        if !grid.contains(at) {
            return Err(FracError::InvalidWindow {
                n_lo: at,
                n_hi: at,
                min: 1,
            });
        }
        let mut values = vec![0.0; grid.len()];
        values[(at - grid.n_lo) as usize] = 1.0;
        GridFunction::from_values(grid, values, TailModel::Zero, TailModel::Zero)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self, side: Side) -> &TailModel {
        match side {
            Side::Left => &self.tail_left,
            Side::Right => &self.tail_right,
        }
    }

    /// u(n·h), resolved through the window or the matching tail model.
    /// Total: every tail model evaluates everywhere on its ray.
    pub fn value(&self, n: i64) -> f64 {
        if n < self.grid.n_lo {
            self.tail_left.eval(self.grid.x(n))
        } else if n > self.grid.n_hi {
            self.tail_right.eval(self.grid.x(n))
        } else {
            self.values[(n - self.grid.n_lo) as usize]
        }
    }

    /// (u(nh) − u((n+1)h))/h.
    pub fn delta_right(&self, n: i64) -> f64 {
        (self.value(n) - self.value(n + 1)) / self.grid.h
    }

    /// (u(nh) − u((n−1)h))/h.
    pub fn delta_left(&self, n: i64) -> f64 {
        (self.value(n) - self.value(n - 1)) / self.grid.h
    }

    /// Mixed difference (δ_right)^l (δ_left)^s u at n; the stencil spans
    /// indices n−s ..= n+l.
    pub fn mixed_difference(&self, l: u32, s: u32, n: i64) -> f64 {
        let lo = n - s as i64;
        let hi = n + l as i64;
        let mut buf: Vec<f64> = (lo..=hi).map(|m| self.value(m)).collect();
        // each right pass shrinks the buffer from the back, each left pass
        // from the front; what remains at [s] is the value at n
        for _ in 0..l {
            for i in 0..buf.len() - 1 {
                buf[i] = (buf[i] - buf[i + 1]) / self.grid.h;
            }
            buf.pop();
        }
        for _ in 0..s {
            for i in (1..buf.len()).rev() {
                buf[i] = (buf[i] - buf[i - 1]) / self.grid.h;
            }
            buf.remove(0);
        }
        buf[0]
    }

    /// Sup of |u| over the stored window.
    pub fn window_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// Sup of |u| over the ray n ≥ first (Right) or n ≤ first (Left), when
    /// finite. Decaying callback tails are read as monotone envelopes, so
    /// their sup on a ray is the value at its nearest point; that is the
    /// registry's contract for decaying entries.
    pub fn ray_sup_from(&self, first: i64, side: Side) -> Option<f64> {
        let (n_lo, n_hi) = (self.grid.n_lo, self.grid.n_hi);
        // sup of a tail model over the sub-ray starting at index `at` and
        // running toward that tail's infinity
        let tail_sup = |tail: &TailModel, at: i64| -> Option<f64> {
            match tail {
                TailModel::Zero => Some(0.0),
                TailModel::Constant(c) => Some(c.abs()),
                TailModel::Callback(t) if t.decays() => Some(t.eval(self.grid.x(at)).abs()),
                TailModel::Callback(t) => t.bound(),
            }
        };
        let mut sup = 0.0f64;
        match side {
            Side::Right => {
                for n in first.max(n_lo)..=n_hi {
                    sup = sup.max(self.values[(n - n_lo) as usize].abs());
                }
                if first < n_lo {
                    // the ray crosses the left-tail segment [first, n_lo);
                    // a decaying left tail peaks at the window edge
                    sup = sup.max(tail_sup(&self.tail_left, n_lo - 1)?);
                }
                sup = sup.max(tail_sup(&self.tail_right, first.max(n_hi + 1))?);
            }
            Side::Left => {
                for n in n_lo..=first.min(n_hi) {
                    sup = sup.max(self.values[(n - n_lo) as usize].abs());
                }
                if first > n_hi {
                    sup = sup.max(tail_sup(&self.tail_right, n_hi + 1)?);
                }
                sup = sup.max(tail_sup(&self.tail_left, first.min(n_lo - 1))?);
            }
        }
        Some(sup)
    }

    /// ℓ^p counting norm (no mesh factor). Finite p needs tails that vanish
    /// beyond the window; the sup norm needs a declared bound on each ray
    /// (the bound validates finiteness, the value is taken over the window
    /// and any constant rays).
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            let mut sup = self.window_sup();
            for side in [Side::Left, Side::Right] {
                let tail = self.tail(side);
                match tail {
                    TailModel::Callback(t) if t.bound().is_none() => {
                        return Err(FracError::UnboundedTail { side });
                    }
                    _ => sup = sup.max(tail.bound().unwrap_or(0.0).min(f64::INFINITY)),
                }
            }
            return Ok(sup);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(FracError::InvalidParameter { name: "p", value: p });
        }
        for side in [Side::Left, Side::Right] {
            if !self.tail(side).vanishes() {
                return Err(FracError::NonSummableTail { side, p });
            }
        }
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok(sum.powf(1.0 / p))
    }

    /// Hölder seminorm sup_{m≠j} |u(jh) − u(mh)| / (h^β |j−m|^β), scanned
    /// over window pairs only.
    pub fn holder_seminorm(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(FracError::InvalidParameter {
                name: "beta",
                value: beta,
            });
        }
        let w = self.values.len();
        if w < 2 {
            return Err(FracError::InvalidWindow {
                n_lo: self.grid.n_lo,
                n_hi: self.grid.n_hi,
                min: 2,
            });
        }
        // precomputed gap weights keep the scan at one fused multiply per pair
        let inv_pow: Vec<f64> = (0..w)
            .map(|d| (self.grid.h * d as f64).powf(-beta))
            .collect();
        let mut sup = 0.0f64;
        for j in 0..w {
            for m in j + 1..w {
                sup = sup.max((self.values[j] - self.values[m]).abs() * inv_pow[m - j]);
            }
        }
        Ok(sup)
    }

    /// Copy with the window extended by `extra_left`/`extra_right` cells,
    /// the new cells filled from the tail models. Lets a caller pay for
    /// callback evaluations once instead of per operator application.
    pub fn materialize(&self, extra_left: usize, extra_right: usize) -> Result<Self> {
        let grid = Grid::new(
            self.grid.h,
            self.grid.n_lo - extra_left as i64,
            self.grid.n_hi + extra_right as i64,
        )?;
        let values = grid.indices().map(|n| self.value(n)).collect();
        GridFunction::from_values(grid, values, self.tail_left.clone(), self.tail_right.clone())
    }

    /// CSV rows `n,value` (17 significant digits) plus `<path>.meta.json`
    /// holding {h, n_lo, n_hi, tail_right, tail_left}. Callback tails must
    /// carry a registry name to be representable.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let meta = GridMeta {
            h: self.grid.h,
            n_lo: self.grid.n_lo,
            n_hi: self.grid.n_hi,
            tail_right: TailSpec::of(&self.tail_right)?,
            tail_left: TailSpec::of(&self.tail_left)?,
        };
        let mut body = String::from("n,value\n");
        for (n, v) in self.grid.indices().zip(&self.values) {
            body.push_str(&format!("{n},{v:.16e}\n"));
        }
        crate::write_atomic(path, body.as_bytes())?;
        crate::write_atomic(
            &crate::sidecar_path(path),
            serde_json::to_string_pretty(&meta)
                .expect("grid metadata serializes")
                .as_bytes(),
        )?;
        Ok(())
    }

    /// Read back what [`write_csv`](Self::write_csv) produced. Callback tails
    /// are restored through `resolve`, which maps a registry name to its
    /// evaluable form.
    pub fn read_csv(
        path: &Path,
        resolve: &dyn Fn(&str) -> Option<TailFn>,
    ) -> Result<Self> {
        let sidecar = crate::sidecar_path(path);
        let meta: GridMeta = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)
            .map_err(|e| FracError::MalformedGridFile(format!("sidecar: {e}")))?;
        let restore = |spec: &TailSpec| -> Result<TailModel> {
            Ok(match spec {
                TailSpec::Zero => TailModel::Zero,
                TailSpec::Constant(c) => TailModel::Constant(*c),
                TailSpec::Callback(name) => TailModel::Callback(resolve(name).ok_or_else(
                    || FracError::MalformedGridFile(format!("unknown tail function {name:?}")),
                )?),
            })
        };
        let grid = Grid::new(meta.h, meta.n_lo, meta.n_hi)?;
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some("n,value") => {}
            other => {
                return Err(FracError::MalformedGridFile(format!(
                    "expected header \"n,value\", got {other:?}"
                )))
            }
        }
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines.enumerate() {
            let bad = || FracError::MalformedGridFile(format!("row {}: {line:?}", i + 2));
            let (n_str, v_str) = line.split_once(',').ok_or_else(bad)?;
            let n: i64 = n_str.trim().parse().map_err(|_| bad())?;
            if n != grid.n_lo + i as i64 {
                return Err(FracError::MalformedGridFile(format!(
                    "row {}: expected index {}, got {n}",
                    i + 2,
                    grid.n_lo + i as i64
                )));
            }
            values.push(v_str.trim().parse().map_err(|_| bad())?);
        }
        GridFunction::from_values(grid, values, restore(&meta.tail_left)?, restore(&meta.tail_right)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_tailed(h: f64, n_lo: i64, values: Vec<f64>) -> GridFunction {
        let grid = Grid::new(h, n_lo, n_lo + values.len() as i64 - 1).unwrap();
        GridFunction::from_values(grid, values, TailModel::Zero, TailModel::Zero).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 0, 10).is_err());
        assert!(Grid::new(-0.5, 0, 10).is_err());
        assert!(Grid::new(f64::NAN, 0, 10).is_err());
        assert!(Grid::new(1.0, 5, 4).is_err());
        assert_eq!(Grid::new(1.0, 5, 5).unwrap().len(), 1);
        let g = Grid::new(0.5, -3, 4).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.x(-2), -1.0);
        assert!(g.contains(4) && !g.contains(5));
    }

    #[test]
    fn value_resolution_through_tails() {
        let grid = Grid::new(1.0, 0, 3).unwrap();
        let u = GridFunction::from_values(
            grid,
            vec![9.0, 8.0, 7.0, 6.0],
            TailModel::Constant(2.5),
            TailModel::Callback(TailFn::new(
                Some("exp_neg"),
                Some(1.0),
                true,
                Arc::new(|x: f64| (-x).exp()),
            )),
        )
        .unwrap();
        assert_eq!(u.value(0), 9.0);
        assert_eq!(u.value(3), 6.0);
        assert_eq!(u.value(-1), 2.5);
        assert_eq!(u.value(-100), 2.5);
        assert_eq!(u.value(4), (-4.0f64).exp());
        assert_eq!(u.value(10), (-10.0f64).exp());
    }

    #[test]
    fn first_differences_on_line_and_indicator() {
        let grid = Grid::new(0.5, -4, 4).unwrap();
        let lin = GridFunction::sample(
            grid,
            |x| x,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x))),
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x))),
        );
        for n in -4..=4 {
            assert_eq!(lin.delta_right(n), -1.0);
            assert_eq!(lin.delta_left(n), 1.0);
        }
        let con = GridFunction::sample(grid, |_| 3.25, TailModel::Constant(3.25), TailModel::Constant(3.25));
        assert_eq!(con.delta_right(0), 0.0);
        assert_eq!(con.delta_left(-4), 0.0);

        let ind = GridFunction::delta_at(Grid::new(1.0, -5, 5).unwrap(), 0).unwrap();
        assert_eq!(ind.delta_right(0), 1.0);
        assert_eq!(ind.delta_right(-1), -1.0);
        assert_eq!(ind.delta_left(0), 1.0);
        assert_eq!(ind.delta_left(1), -1.0);
    }

    #[test]
    fn mixed_difference_stencils() {
        // quadratic in x: both pure second differences give exactly 2
        let grid = Grid::new(0.25, -8, 8).unwrap();
        let sq = GridFunction::sample(
            grid,
            |x| x * x,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x * x))),
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x * x))),
        );
        for n in -3..=3 {
            assert_eq!(sq.mixed_difference(2, 0, n), 2.0, "right² at {n}");
            assert_eq!(sq.mixed_difference(0, 2, n), 2.0, "left² at {n}");
            // δ_right δ_left is minus the 3-point second difference
            assert_eq!(sq.mixed_difference(1, 1, n), -2.0, "mixed at {n}");
        }
        // l = s = 0 is the identity
        assert_eq!(sq.mixed_difference(0, 0, 2), sq.value(2));
        // single passes agree with the dedicated operators
        assert_eq!(sq.mixed_difference(1, 0, 1), sq.delta_right(1));
        assert_eq!(sq.mixed_difference(0, 1, 1), sq.delta_left(1));
    }

    proptest! {
        #[test]
        fn difference_antisymmetry(
            values in proptest::collection::vec(-100.0f64..100.0, 4..40),
            h in 0.01f64..10.0,
            shift in -20i64..20,
        ) {
            let u = zero_tailed(h, shift, values);
            // δ_right u(n) and −δ_left u(n+1) are the same float expression
            for n in shift - 2..=u.grid().n_hi() + 2 {
                prop_assert_eq!(u.delta_right(n), -u.delta_left(n + 1));
            }
        }

        #[test]
        fn holder_seminorm_dyadic_scale_covariance(
            values in proptest::collection::vec(-8.0f64..8.0, 2..24),
            e in -6i32..6,
        ) {
            // scaling by a power of two is exact in floats, so covariance
            // must hold with equality, not within a tolerance
            let c = (2.0f64).powi(e);
            let u = zero_tailed(1.0, 0, values.clone());
            let v = zero_tailed(1.0, 0, values.iter().map(|&x| c * x).collect());
            let (su, sv) = (u.holder_seminorm(0.7).unwrap(), v.holder_seminorm(0.7).unwrap());
            prop_assert_eq!(sv, c * su);
        }
    }

    #[test]
    fn lp_norm_cases() {
        let ind = GridFunction::delta_at(Grid::new(1.0, -2, 2).unwrap(), 0).unwrap();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(ind.lp_norm(p).unwrap(), 1.0);
        }
        let u = zero_tailed(1.0, 0, vec![3.0, 4.0]);
        assert_eq!(u.lp_norm(2.0).unwrap(), 5.0);
        // Σ_{j=0}^{60} 2^{−j} rounds to 2 exactly
        let geo = zero_tailed(1.0, 0, (0..=60).map(|j| (2.0f64).powi(-j)).collect());
        assert_eq!(geo.lp_norm(1.0).unwrap(), 2.0);

        let grid = Grid::new(1.0, 0, 3).unwrap();
        let con = GridFunction::from_values(
            grid,
            vec![0.5, -0.25, 0.0, 0.125],
            TailModel::Constant(2.0),
            TailModel::Zero,
        )
        .unwrap();
        // constant ray dominates the window sup
        assert_eq!(con.lp_norm(f64::INFINITY).unwrap(), 2.0);
        assert!(matches!(
            con.lp_norm(2.0),
            Err(FracError::NonSummableTail { side: Side::Left, .. })
        ));

        let unbounded = GridFunction::from_values(
            grid,
            vec![0.0; 4],
            TailModel::Zero,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x))),
        )
        .unwrap();
        assert!(matches!(
            unbounded.lp_norm(f64::INFINITY),
            Err(FracError::UnboundedTail { side: Side::Right })
        ));
        assert!(unbounded.lp_norm(2.0).is_err());
        assert!(ind.lp_norm(0.5).is_err());
        assert!(ind.lp_norm(f64::NAN).is_err());
    }

    #[test]
    fn holder_seminorm_cases() {
        let grid = Grid::new(0.5, 0, 9).unwrap();
        let con = GridFunction::sample(grid, |_| 4.0, TailModel::Constant(4.0), TailModel::Constant(4.0));
        assert_eq!(con.holder_seminorm(0.5).unwrap(), 0.0);
        // linear with dyadic h: every pair ratio is exactly 1 at β = 1
        let lin = GridFunction::sample(grid, |x| x, TailModel::Zero, TailModel::Zero);
        assert_eq!(lin.holder_seminorm(1.0).unwrap(), 1.0);
        let ind = GridFunction::delta_at(Grid::new(1.0, -3, 3).unwrap(), 0).unwrap();
        assert_eq!(ind.holder_seminorm(0.5).unwrap(), 1.0);
        assert!(ind.holder_seminorm(0.0).is_err());
        assert!(ind.holder_seminorm(1.5).is_err());
    }

    #[test]
    fn ray_sup_from_partitions() {
        let grid = Grid::new(1.0, 0, 4).unwrap();
        let u = GridFunction::from_values(
            grid,
            vec![1.0, -6.0, 2.0, 0.5, 3.0],
            TailModel::Constant(-4.0),
            TailModel::Callback(TailFn::new(None, Some(9.9), true, Arc::new(|x: f64| (-x).exp()))),
        )
        .unwrap();
        assert_eq!(u.ray_sup_from(2, Side::Right), Some(3.0f64.max((-5.0f64).exp())));
        assert_eq!(u.ray_sup_from(0, Side::Right), Some(6.0));
        // crossing the left tail picks up the constant
        assert_eq!(u.ray_sup_from(-3, Side::Right), Some(6.0));
        assert_eq!(u.ray_sup_from(5, Side::Right), Some((-5.0f64).exp()));
        assert_eq!(u.ray_sup_from(9, Side::Right), Some((-9.0f64).exp()));
        assert_eq!(u.ray_sup_from(1, Side::Left), Some(6.0));
        assert_eq!(u.ray_sup_from(-1, Side::Left), Some(4.0));
        // a non-decaying callback without a bound has no finite ray sup
        let v = GridFunction::from_values(
            grid,
            vec![0.0; 5],
            TailModel::Zero,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x))),
        )
        .unwrap();
        assert_eq!(v.ray_sup_from(0, Side::Right), None);
        assert_eq!(v.ray_sup_from(0, Side::Left), Some(0.0));
    }

    #[test]
    fn materialize_extends_window() {
        let grid = Grid::new(0.5, 0, 3).unwrap();
        let u = GridFunction::sample(
            grid,
            |x| x + 1.0,
            TailModel::Constant(-7.0),
            TailModel::Callback(TailFn::new(Some("exp_neg"), Some(1.0), true, Arc::new(|x: f64| (-x).exp()))),
        );
        let m = u.materialize(2, 3).unwrap();
        assert_eq!(m.grid().n_lo(), -2);
        assert_eq!(m.grid().n_hi(), 6);
        for n in -4..=8 {
            assert_eq!(m.value(n), u.value(n), "n = {n}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let grid = Grid::new(0.1, -4, 17).unwrap();
        let u = GridFunction::sample(
            grid,
            |x| (x * 1.7).sin() / 3.0 + 1e-17,
            TailModel::Constant(0.25),
            TailModel::Callback(TailFn::new(Some("exp_neg"), Some(1.0), true, Arc::new(|x: f64| (-x).exp()))),
        );
        u.write_csv(&path).unwrap();
        assert!(dir.path().join("u.csv.meta.json").exists());
        let resolve = |name: &str| {
            (name == "exp_neg").then(|| {
                TailFn::new(Some("exp_neg"), Some(1.0), true, Arc::new(|x: f64| (-x).exp()))
            })
        };
        let back = GridFunction::read_csv(&path, &resolve).unwrap();
        assert_eq!(back.grid(), u.grid());
        assert_eq!(back.values(), u.values());
        assert!(matches!(back.tail(Side::Left), TailModel::Constant(c) if *c == 0.25));
        assert_eq!(back.value(100), u.value(100));

        let anon = GridFunction::sample(
            grid,
            |x| x,
            TailModel::Zero,
            TailModel::Callback(TailFn::new(None, None, false, Arc::new(|x| x))),
        );
        assert!(matches!(
            anon.write_csv(&dir.path().join("anon.csv")),
            Err(FracError::UnserializableTail)
        ));

        std::fs::write(&path, "m,value\n0,1.0\n").unwrap();
        assert!(matches!(
            GridFunction::read_csv(&path, &resolve),
            Err(FracError::MalformedGridFile(_))
        ));
    }
}
