//! Fixed registry of continuous test functions.
//!
//! Each entry declares, next to its evaluator, everything the operators
//! need to treat it honestly: its Hölder class (k, β), how it behaves on
//! each ray toward infinity, and its derivative when it has one (expressed
//! as a multiple of another entry, so derived quantities stay inside the
//! registry). The declared classes are sharp, not just valid: |sin x|^β
//! really is no better than C^{0,β}, which is what makes the order
//! measurements meaningful.

use crate::error::{FracError, Result, Side};
use crate::grid::{Grid, GridFunction, TailFn, TailModel};
use std::sync::Arc;

/// How a function behaves along one ray toward infinity.
#[derive(Clone, Copy, Debug)]
pub enum RayBehavior {
    /// |f| decreases monotonically to 0 along the ray.
    Decaying,
    /// f repeats with this period; |f| ≤ bound on the whole ray.
    Periodic { period: f64, bound: f64 },
    /// f equals `value` from `from` onward (toward the ray's infinity),
    /// and |f| is monotone on the stretch before that.
    EventuallyConstant { from: f64, value: f64 },
    /// |f| grows without bound.
    Unbounded,
}

#[derive(Clone, Copy)]
pub struct SmoothFunction {
    id: &'static str,
    eval: fn(f64) -> f64,
    holder_k: u32,
    holder_beta: f64,
    /// f′ = coefficient × (another registry entry), when f is C¹.
    derivative: Option<(f64, &'static str)>,
    /// f(x+t) − f(x) in a form with full relative accuracy in t, where the
    /// entry has one; the naive difference loses every bit once t drops
    /// below the rounding of f(x).
    increment: Option<fn(f64, f64) -> f64>,
    left: RayBehavior,
    right: RayBehavior,
}

impl SmoothFunction {
    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Largest k with f ∈ C^{k,β}.
    pub fn holder_k(&self) -> u32 {
        self.holder_k
    }

    /// Sharp Hölder exponent of the k-th derivative.
    pub fn holder_beta(&self) -> f64 {
        self.holder_beta
    }

    pub fn ray(&self, side: Side) -> RayBehavior {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    /// f(x + t) − f(x), through the closed-form increment when the entry
    /// has one, else the naive difference.
    pub fn increment(&self, x: f64, t: f64) -> f64 {
        match self.increment {
            Some(d) => d(x, t),
            None => self.eval(x + t) - self.eval(x),
        }
    }

    /// Whether [`Self::increment`] stays accurate for arbitrarily small t.
    pub fn has_closed_increment(&self) -> bool {
        self.increment.is_some()
    }

    /// The derivative as a registry entry, scaled: f′ = c·g.
    pub fn derivative(&self) -> Result<(f64, &'static SmoothFunction)> {
        let (c, id) = self
            .derivative
            .ok_or_else(|| FracError::MissingDerivative(self.id.to_owned()))?;
        Ok((c, lookup(id)?))
    }

    /// Sup of |f| on the ray past `edge` (x ≥ edge for the right side,
    /// x ≤ edge for the left), when finite.
    pub fn ray_sup(&self, side: Side, edge: f64) -> Option<f64> {
        match self.ray(side) {
            RayBehavior::Decaying => Some(self.eval(edge).abs()),
            RayBehavior::Periodic { bound, .. } => Some(bound),
            RayBehavior::EventuallyConstant { from, value } => {
                let past = match side {
                    Side::Right => edge >= from,
                    Side::Left => edge <= from,
                };
                if past {
                    Some(value.abs())
                } else {
                    Some(self.eval(edge).abs().max(value.abs()))
                }
            }
            RayBehavior::Unbounded => None,
        }
    }

    /// Tail model for the ray past `edge`: exactly constant where the entry
    /// is declared constant, otherwise a named callback carrying the ray
    /// bound and decay flag.
    pub fn tail_model(&self, side: Side, edge: f64) -> TailModel {
        if let RayBehavior::EventuallyConstant { from, value } = self.ray(side) {
            let past = match side {
                Side::Right => edge >= from,
                Side::Left => edge <= from,
            };
            if past {
                return TailModel::Constant(value);
            }
        }
        let eval = self.eval;
        TailModel::Callback(TailFn::new(
            Some(self.id),
            self.ray_sup(side, edge),
            matches!(self.ray(side), RayBehavior::Decaying),
            Arc::new(eval),
        ))
    }

    /// Named callback for the whole line (no edge refinement); used when
    /// restoring serialized grid functions.
    pub fn tail_fn(&self) -> TailFn {
        let bound = match (self.ray(Side::Left), self.ray(Side::Right)) {
            (RayBehavior::Unbounded, _) | (_, RayBehavior::Unbounded) => None,
            (l, r) => {
                let per = |b: RayBehavior| match b {
                    RayBehavior::Periodic { bound, .. } => bound,
                    RayBehavior::EventuallyConstant { value, .. } => value.abs(),
                    // decaying rays peak where they start; 0 is every entry's
                    // reference point
                    _ => self.eval(0.0).abs(),
                };
                Some(per(l).max(per(r)).max(self.eval(0.0).abs()))
            }
        };
        let decays = matches!(self.ray(Side::Left), RayBehavior::Decaying)
            && matches!(self.ray(Side::Right), RayBehavior::Decaying);
        TailFn::new(Some(self.id), bound, decays, Arc::new(self.eval))
    }
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("id", &self.id)
            .field("holder_k", &self.holder_k)
            .field("holder_beta", &self.holder_beta)
            .finish_non_exhaustive()
    }
}

/// Sample f on the grid window; both tails become the function itself.
pub fn restrict(f: &SmoothFunction, grid: Grid) -> GridFunction {
    let left = f.tail_model(Side::Left, grid.x(grid.n_lo() - 1));
    let right = f.tail_model(Side::Right, grid.x(grid.n_hi() + 1));
    GridFunction::sample(grid, |x| f.eval(x), left, right)
}

const CLAMP_AT: f64 = 8.0;

fn abs_sin_pow(x: f64, b: f64) -> f64 {
    x.sin().abs().powf(b)
}

static REGISTRY: [SmoothFunction; 8] = [
    SmoothFunction {
        id: "const_one",
        eval: |_| 1.0,
        holder_k: 1,
        holder_beta: 1.0,
        derivative: Some((0.0, "const_one")),
        increment: Some(|_, _| 0.0),
        left: RayBehavior::EventuallyConstant { from: 0.0, value: 1.0 },
        right: RayBehavior::EventuallyConstant { from: 0.0, value: 1.0 },
    },
    SmoothFunction {
        id: "linear_clamp",
        // x clamped to [−8, 8]: Lipschitz with kinks, the model C^{0,1} entry
        eval: |x| x.clamp(-CLAMP_AT, CLAMP_AT),
        holder_k: 0,
        holder_beta: 1.0,
        derivative: None,
        // the in-window increment is t itself, with no rounding at all
        increment: Some(|x, t| {
            if x.abs() <= CLAMP_AT && (x + t).abs() <= CLAMP_AT {
                t
            } else {
                (x + t).clamp(-CLAMP_AT, CLAMP_AT) - x.clamp(-CLAMP_AT, CLAMP_AT)
            }
        }),
        left: RayBehavior::EventuallyConstant { from: -CLAMP_AT, value: -CLAMP_AT },
        right: RayBehavior::EventuallyConstant { from: CLAMP_AT, value: CLAMP_AT },
    },
    SmoothFunction {
        id: "exp_neg",
        eval: |x| (-x).exp(),
        holder_k: 1,
        holder_beta: 1.0,
        derivative: Some((-1.0, "exp_neg")),
        increment: Some(|x, t| (-x).exp() * (-t).exp_m1()),
        left: RayBehavior::Unbounded,
        right: RayBehavior::Decaying,
    },
    SmoothFunction {
        id: "exp_pos",
        eval: f64::exp,
        holder_k: 1,
        holder_beta: 1.0,
        derivative: Some((1.0, "exp_pos")),
        increment: Some(|x, t| x.exp() * t.exp_m1()),
        left: RayBehavior::Decaying,
        right: RayBehavior::Unbounded,
    },
    SmoothFunction {
        id: "cos",
        eval: f64::cos,
        holder_k: 1,
        holder_beta: 1.0,
        derivative: Some((-1.0, "sin")),
        increment: Some(|x, t| -2.0 * (x + 0.5 * t).sin() * (0.5 * t).sin()),
        left: RayBehavior::Periodic { period: std::f64::consts::TAU, bound: 1.0 },
        right: RayBehavior::Periodic { period: std::f64::consts::TAU, bound: 1.0 },
    },
    SmoothFunction {
        id: "sin",
        eval: f64::sin,
        holder_k: 1,
        holder_beta: 1.0,
        derivative: Some((1.0, "cos")),
        increment: Some(|x, t| 2.0 * (x + 0.5 * t).cos() * (0.5 * t).sin()),
        left: RayBehavior::Periodic { period: std::f64::consts::TAU, bound: 1.0 },
        right: RayBehavior::Periodic { period: std::f64::consts::TAU, bound: 1.0 },
    },
    SmoothFunction {
        id: "abs_sin_05",
        eval: |x| abs_sin_pow(x, 0.5),
        holder_k: 0,
        holder_beta: 0.5,
        derivative: None,
        increment: None,
        left: RayBehavior::Periodic { period: std::f64::consts::PI, bound: 1.0 },
        right: RayBehavior::Periodic { period: std::f64::consts::PI, bound: 1.0 },
    },
    SmoothFunction {
        id: "abs_sin_08",
        eval: |x| abs_sin_pow(x, 0.8),
        holder_k: 0,
        holder_beta: 0.8,
        derivative: None,
        increment: None,
        left: RayBehavior::Periodic { period: std::f64::consts::PI, bound: 1.0 },
        right: RayBehavior::Periodic { period: std::f64::consts::PI, bound: 1.0 },
    },
];

pub fn all() -> &'static [SmoothFunction] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static SmoothFunction> {
    REGISTRY
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| FracError::UnknownFunction(id.to_owned()))
}

/// Resolver for deserializing grid functions whose tails were saved by name.
pub fn resolve_tail(name: &str) -> Option<TailFn> {
    lookup(name).ok().map(|f| f.tail_fn())
}
