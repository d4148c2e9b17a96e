//! Grid audit of the injective, symmetry and linearity conditions on `u0` / `v`.
//!
//! A `Holds` verdict is certified on the recorded grid only.

use std::fmt;

use rayon::prelude::*;

use crate::error::AuditError;
use crate::model::{attribute_evaluation, normalized_utility, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditGrid {
    lo: f64,
    hi: f64,
    count: usize,
    tolerance: f64,
}

impl AuditGrid {
    pub fn new(lo: f64, hi: f64, count: usize, tolerance: f64) -> Result<Self, AuditError> {
        if !(lo.is_finite() && lo > 0.0) {
            return Err(AuditError::InvalidGrid(format!("lo must be > 0, got {lo}")));
        }
        if !(hi.is_finite() && hi > lo) {
            return Err(AuditError::InvalidGrid(format!("hi must exceed lo, got {hi}")));
        }
        if count < 2 {
            return Err(AuditError::InvalidGrid(format!("count must be >= 2, got {count}")));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(AuditError::InvalidGrid(format!(
                "tolerance must be > 0, got {tolerance}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            count,
            tolerance,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Absolute-plus-relative tolerance band around `scale`.
    fn band(&self, scale: f64) -> f64 {
        self.tolerance * scale.abs().max(1.0)
    }
}

impl Default for AuditGrid {
    fn default() -> Self {
        Self {
            lo: 0.01,
            hi: 10.0,
            count: 1000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Holds,
    /// A grid witness `(t, s)`; `s` is unused by the symmetry check and reported as `-t`.
    Violated { t: f64, s: f64 },
    Indeterminate,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated { .. } => "violated",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Violated { t, s } => write!(f, "violated(t={t:.6},s={s:.6})"),
            other => f.write_str(other.label()),
        }
    }
}

fn u0_values(model: &ModelSpec, points: &[f64]) -> Result<Vec<f64>, AuditError> {
    points
        .iter()
        .map(|&t| normalized_utility(model, t).map_err(AuditError::from))
        .collect()
}

/// Injective: no two grid points farther apart than one spacing share a `u0` value.
/// `Holds` additionally requires `u0` to be strictly increasing along the grid.
pub fn check_injective(model: &ModelSpec, grid: &AuditGrid) -> Result<Verdict, AuditError> {
    let points = grid.points();
    let values = u0_values(model, &points)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Ok(Verdict::Indeterminate);
    }
    let spacing = grid.spacing();
    // For each s, the first t > s that collides with it. Pairs are scanned in parallel and
    // the smallest (s, t) index pair is reported so the witness does not depend on scheduling.
    let witness = (0..points.len())
        .into_par_iter()
        .filter_map(|j| {
            let (s, us) = (points[j], values[j]);
            (j + 1..points.len()).find_map(|i| {
                let (t, ut) = (points[i], values[i]);
                let collides = (ut - us).abs() <= grid.band(ut.abs().max(us.abs()));
                (collides && t - s > spacing * (1.0 + 1e-9)).then_some((j, i))
            })
        })
        .min();
    if let Some((j, i)) = witness {
        return Ok(Verdict::Violated {
            t: points[i],
            s: points[j],
        });
    }
    if values.windows(2).all(|w| w[1] > w[0]) {
        Ok(Verdict::Holds)
    } else {
        Ok(Verdict::Indeterminate)
    }
}

/// Symmetry: `u0(t) = -u0(-t)` on every grid point.
pub fn check_symmetry(model: &ModelSpec, grid: &AuditGrid) -> Result<Verdict, AuditError> {
    for t in grid.points() {
        let pos = normalized_utility(model, t)?;
        let neg = normalized_utility(model, -t)?;
        if !(pos.is_finite() && neg.is_finite()) {
            return Ok(Verdict::Indeterminate);
        }
        if (pos + neg).abs() > grid.band(pos) {
            return Ok(Verdict::Violated { t, s: -t });
        }
    }
    Ok(Verdict::Holds)
}

/// Residual of the linearity identity `v0(t - s) - (v(t, s) - v(s, t))` and its scale.
pub fn linearity_residual(model: &ModelSpec, t: f64, s: f64) -> Result<(f64, f64), AuditError> {
    let lhs = normalized_utility(model, t - s)?;
    let rhs = attribute_evaluation(model, t, s)? - attribute_evaluation(model, s, t)?;
    Ok((lhs - rhs, lhs.abs().max(rhs.abs())))
}

/// Linearity: `v0(t - s) = v(t, s) - v(s, t)` for every grid pair `t > s`.
pub fn check_linearity(model: &ModelSpec, grid: &AuditGrid) -> Result<Verdict, AuditError> {
    let points = grid.points();
    let scanned: Result<Vec<Option<(usize, usize, bool)>>, AuditError> = (0..points.len())
        .into_par_iter()
        .map(|j| {
            for i in j + 1..points.len() {
                let (residual, scale) = linearity_residual(model, points[i], points[j])?;
                if !residual.is_finite() {
                    return Ok(Some((j, i, false)));
                }
                if residual.abs() > grid.band(scale) {
                    return Ok(Some((j, i, true)));
                }
            }
            Ok(None)
        })
        .collect();
    match scanned?.into_iter().flatten().next() {
        Some((j, i, true)) => Ok(Verdict::Violated {
            t: points[i],
            s: points[j],
        }),
        Some((_, _, false)) => Ok(Verdict::Indeterminate),
        None => Ok(Verdict::Holds),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub injective: Verdict,
    pub symmetry: Verdict,
    pub linearity: Verdict,
    pub grid: AuditGrid,
}

/// Which price lists elicit quality accurately, as implied by the audited conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccuracyRow {
    pub m_mpl: bool,
    pub p_ignore_or_separate: bool,
    pub p_combine: bool,
}

impl AuditReport {
    /// m-MPL needs injective; p-MPL ignore/separate needs injective and symmetry;
    /// p-MPL combine needs injective and linearity.
    pub fn accuracy(&self) -> AccuracyRow {
        let inj = self.injective.holds();
        AccuracyRow {
            m_mpl: inj,
            p_ignore_or_separate: inj && self.symmetry.holds(),
            p_combine: inj && self.linearity.holds(),
        }
    }
}

pub fn audit(model: &ModelSpec, grid: &AuditGrid) -> Result<AuditReport, AuditError> {
    Ok(AuditReport {
        injective: check_injective(model, grid)?,
        symmetry: check_symmetry(model, grid)?,
        linearity: check_linearity(model, grid)?,
        grid: *grid,
    })
}
