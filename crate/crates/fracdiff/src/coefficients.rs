//! Kernel coefficients for the one-sided fractional differences.
//!
//! The weight of lag m at order α is
//!     Λ^α(m) = (−1)^m · C(α, m) = C(m − α − 1, m),
//! computed by the ratio recurrence Λ(0) = 1, Λ(m) = Λ(m−1)·(m−1−α)/m,
//! which is products of exactly representable small factors and therefore
//! keeps full relative accuracy out to arbitrary lags. The inverse-power
//! weights Λ^{−α}(j) = Γ(j+α)/(Γ(α)·j!) follow the mirrored recurrence.
//!
//! # Facts the tests lean on
//! * Σ_{m≥0} Λ^α(m) = 0 and Σ_{m≥1} Λ^α(m) = −1, so every truncated table
//!   has a positive partial sum equal to the mass left in the tail.
//! * Λ^α(m) < 0 for m ≥ 1 (the operator is a jump generator).
//! * Λ^α(m) = m^{−1−α}/Γ(−α) · (1 + O(1/m)); integrating that tail gives
//!   the closed-form estimate M^{−α}/Γ(1−α) used for truncation bounds.
//! * Σ_m Λ^α(m) r^m = (1−r)^α and Σ_j Λ^{−α}(j) r^j = (1−r)^{−α} for |r| < 1.

use crate::error::{FracError, Result};
use crate::special::{gamma, ln_factorial};
use serde::{Deserialize, Serialize};

/// Smallest truncation length a table will accept.
pub const MIN_TRUNCATION: usize = 4;

/// Default table length: long enough that the tail mass M^{−α}/Γ(1−α) is
/// below ~3e-3 even at α = 0.1 when paired with the recorded bounds.
pub const DEFAULT_TRUNCATION: usize = 100_000;

/// Fractional order, strictly inside (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(FracError::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerKind {
    /// Λ^α: summable, total mass zero.
    Positive,
    /// Λ^{−α}: nonnegative, non-summable (grows into a j^{α−1} envelope).
    Negative,
}

/// Truncated coefficient table, indices 0..=truncation.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    order: FracOrder,
    kind: PowerKind,
    values: Vec<f64>,
    partial_sum: f64,
    tail: f64,
}

impl CoeffTable {
    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn kind(&self) -> PowerKind {
        self.kind
    }

    /// Truncation lag M; the table holds M + 1 values.
    pub fn truncation(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, m: usize) -> f64 {
        self.values[m]
    }

    /// Σ of all stored values. For a positive-power table this equals the
    /// (positive) mass missing from the truncated tail.
    pub fn partial_sum(&self) -> f64 {
        self.partial_sum
    }

    /// Discarded kernel mass Σ_{m>M} |Λ^α(m)|; `None` for inverse-power
    /// tables. This is exact (up to summation rounding), not an estimate:
    /// the full kernel sums to zero, so the discarded mass equals the
    /// stored partial sum.
    pub fn tail_mass(&self) -> Option<f64> {
        match self.kind {
            PowerKind::Positive => Some(self.tail),
            PowerKind::Negative => None,
        }
    }

    /// Growth exponent α − 1 of the inverse-power envelope; `None` otherwise.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self.kind {
            PowerKind::Positive => None,
            PowerKind::Negative => Some(self.tail),
        }
    }
}

fn validate_truncation(truncation: usize) -> Result<()> {
    if truncation < MIN_TRUNCATION {
        Err(FracError::TruncationTooShort {
            min: MIN_TRUNCATION,
            got: truncation,
        })
    } else {
        Ok(())
    }
}

/// Λ^α(0..=truncation).
pub fn lambda_coeffs(order: FracOrder, truncation: usize) -> Result<CoeffTable> {
    validate_truncation(truncation)?;
    let alpha = order.value();
    let mut values = Vec::with_capacity(truncation + 1);
    let mut lam = 1.0f64;
    values.push(lam);
    let mut sum = lam;
    for m in 1..=truncation {
        lam *= (m as f64 - 1.0 - alpha) / m as f64;
        values.push(lam);
        sum += lam;
    }
    Ok(CoeffTable {
        order,
        kind: PowerKind::Positive,
        values,
        partial_sum: sum,
        // Σ_{m≥0} Λ = 0, so what the truncation discards is exactly what
        // the table keeps
        tail: sum,
    })
}

/// Λ^{−α}(0..=truncation) = Γ(j+α)/(Γ(α)·j!).
pub fn lambda_neg_coeffs(order: FracOrder, truncation: usize) -> Result<CoeffTable> {
    validate_truncation(truncation)?;
    let alpha = order.value();
    let mut values = Vec::with_capacity(truncation + 1);
    let mut lam = 1.0f64;
    values.push(lam);
    let mut sum = lam;
    for j in 1..=truncation {
        lam *= (j as f64 - 1.0 + alpha) / j as f64;
        values.push(lam);
        sum += lam;
    }
    Ok(CoeffTable {
        order,
        kind: PowerKind::Negative,
        values,
        partial_sum: sum,
        tail: alpha - 1.0,
    })
}

/// Closed-form estimate of the truncated-tail mass Σ_{m>M} |Λ^α(m)|,
/// obtained by integrating the m^{−1−α}/|Γ(−α)| envelope: M^{−α}/Γ(1−α).
pub fn tail_mass_estimate(order: FracOrder, truncation: usize) -> f64 {
    let alpha = order.value();
    (truncation as f64).powf(-alpha) / gamma(1.0 - alpha)
}

/// Jump distribution of the generator: p(m) = −Λ^α(m) for m ≥ 1.
/// Sums to 1 minus the truncated tail mass.
pub fn jump_distribution(table: &CoeffTable) -> Result<Vec<f64>> {
    if table.kind != PowerKind::Positive {
        return Err(FracError::InvalidParameter {
            name: "jump_distribution needs a positive-power table; got order",
            value: -table.order.value(),
        });
    }
    Ok(table.values[1..].iter().map(|&v| -v).collect())
}

/// Poisson weights G_t(j) = e^{−t} t^j / j!, truncated once the mass deficit
/// drops below `tolerance`.
#[derive(Clone, Debug)]
pub struct HeatWeights {
    t: f64,
    values: Vec<f64>,
    mass_deficit: f64,
}

impl HeatWeights {
    pub fn t(&self) -> f64 {
        self.t
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

    pub fn value(&self, j: usize) -> f64 {
        if j < self.values.len() {
            self.values[j]
        } else {
            0.0
        }
    }

    /// 1 − Σ_j values[j] ≥ 0.
    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }
}

/// Single weight G_t(j) evaluated in log space; safe for any t ≥ 0 and j
/// where the forward recurrence would underflow at the start.
pub fn heat_weight(t: f64, j: u64) -> f64 {
    if t == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (-t + j as f64 * t.ln() - ln_factorial(j)).exp()
}

pub fn heat_weights(t: f64, tolerance: f64) -> Result<HeatWeights> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(FracError::InvalidParameter { name: "t", value: t });
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(FracError::InvalidParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    if t == 0.0 {
        return Ok(HeatWeights {
            t,
            values: vec![1.0],
            mass_deficit: 0.0,
        });
    }

    // e^{−t} underflows near t ≈ 745; switch the seed to log space well before.
    let direct = t < 600.0;
    let cap = (t + 50.0 * (t + 1.0).sqrt() + 500.0) as usize;
    let mut values = Vec::with_capacity(cap.min(1 << 20));
    let mut sum = 0.0f64;
    let mut g = if direct { (-t).exp() } else { heat_weight(t, 0) };
    let mut j = 0usize;
    loop {
        values.push(g);
        sum += g;
        if 1.0 - sum <= tolerance && j as f64 >= t {
            break;
        }
        if j >= cap {
            return Err(FracError::MassDeficitUnreachable {
                deficit: 1.0 - sum,
                tol: tolerance,
            });
        }
        j += 1;
        // the ratio step only preserves relative accuracy once g is well
        // clear of the subnormal range; below that, re-seed from log space
        g = if direct || g > 1e-280 {
            g * t / j as f64
        } else {
            heat_weight(t, j as u64)
        };
    }
    Ok(HeatWeights {
        t,
        values,
        mass_deficit: (1.0 - sum).max(0.0),
    })
}
