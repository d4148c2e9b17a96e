//! Predicted choices among a high-quality product, a low-quality product and the outside
//! option over a grid of prices.
//!
//! The menu is `{h = (hq, -hp), l = (lq, -lp), o = (0, 0)}` evaluated with the three-option
//! range weight.

use std::fmt;

use rayon::prelude::*;

use crate::error::RegionError;
use crate::model::{evaluate_member, Alternative, Menu, ModelSpec};

/// Relative tolerance for flagging ties between the best two values.
pub const TIE_RTOL: f64 = 1e-12;
/// Bisection stops once the bracket is this narrow (dollars) ...
pub const BOUNDARY_TOL: f64 = 1e-4;
/// ... and the value difference at the midpoint is this small.
pub const BOUNDARY_VALUE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, RegionError> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(RegionError::InvalidSpec("grid bounds must be finite".into()));
        }
        if min < 0.0 {
            return Err(RegionError::InvalidSpec(format!("grid min {min} is negative")));
        }
        if max < min {
            return Err(RegionError::InvalidSpec(format!("grid max {max} below min {min}")));
        }
        if step <= 0.0 {
            return Err(RegionError::InvalidSpec(format!("grid step {step} must be positive")));
        }
        let spans = (max - min) / step;
        if (spans - spans.round()).abs() > 1e-9 * spans.max(1.0) {
            return Err(RegionError::InvalidSpec(format!(
                "range {min}..{max} is not a multiple of step {step}"
            )));
        }
        Ok(Self {
            min,
            max,
            step,
            count: spans.round() as usize + 1,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step
        }
    }
}

impl Default for GridAxis {
    fn default() -> Self {
        Self::new(0.0, 25.0, 0.25).expect("valid default axis")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub lq: f64,
    pub hq: f64,
    pub model: ModelSpec,
    pub lp_axis: GridAxis,
    pub hp_axis: GridAxis,
}

impl RegionSpec {
    pub fn new(lq: f64, hq: f64, model: ModelSpec) -> Result<Self, RegionError> {
        Self::with_axes(lq, hq, model, GridAxis::default(), GridAxis::default())
    }

    pub fn with_axes(
        lq: f64,
        hq: f64,
        model: ModelSpec,
        lp_axis: GridAxis,
        hp_axis: GridAxis,
    ) -> Result<Self, RegionError> {
        if !(lq.is_finite() && lq > 0.0) {
            return Err(RegionError::InvalidSpec(format!("lq must be > 0, got {lq}")));
        }
        if !(hq.is_finite() && hq > lq) {
            return Err(RegionError::InvalidSpec(format!("hq must exceed lq, got {hq}")));
        }
        if !model.is_range_normalized() {
            return Err(RegionError::Model(crate::ModelError::ThreeOptionUnsupported));
        }
        Ok(Self {
            lq,
            hq,
            model,
            lp_axis,
            hp_axis,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    High,
    Low,
    Outside,
}

impl Choice {
    pub fn label(&self) -> &'static str {
        match self {
            Choice::High => "h",
            Choice::Low => "l",
            Choice::Outside => "o",
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPrediction {
    pub lp: f64,
    pub hp: f64,
    pub v_h: f64,
    pub v_l: f64,
    pub v_o: f64,
    /// Argmax; among tied alternatives the order h, l, o decides.
    pub choice: Choice,
    /// The best value is tied with another alternative.
    pub tie: bool,
    /// Some attribute column has zero range, so its weight is set to 0.
    pub degenerate: bool,
}

impl CellPrediction {
    pub fn value(&self, c: Choice) -> f64 {
        match c {
            Choice::High => self.v_h,
            Choice::Low => self.v_l,
            Choice::Outside => self.v_o,
        }
    }
}

fn menu(spec: &RegionSpec, lp: f64, hp: f64) -> Result<Menu, RegionError> {
    let alt = |v: Vec<f64>| Alternative::new(v).map_err(RegionError::from);
    Ok(Menu::ternary(
        alt(vec![spec.hq, -hp])?,
        alt(vec![spec.lq, -lp])?,
        alt(vec![0.0, 0.0])?,
    )?)
}

/// `(V(h), V(l), V(o))` at prices `(lp, hp)`.
pub fn menu_values(spec: &RegionSpec, lp: f64, hp: f64) -> Result<[f64; 3], RegionError> {
    if !(lp >= 0.0 && hp >= 0.0) {
        return Err(RegionError::NegativePrice { lp, hp });
    }
    let m = menu(spec, lp, hp)?;
    Ok([
        evaluate_member(&spec.model, &m, 0)?,
        evaluate_member(&spec.model, &m, 1)?,
        evaluate_member(&spec.model, &m, 2)?,
    ])
}

pub fn predict_choice(spec: &RegionSpec, lp: f64, hp: f64) -> Result<CellPrediction, RegionError> {
    let values = menu_values(spec, lp, hp)?;
    let choices = [Choice::High, Choice::Low, Choice::Outside];
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let near: Vec<usize> = (0..3)
        .filter(|&i| best - values[i] <= TIE_RTOL * scale)
        .collect();
    Ok(CellPrediction {
        lp,
        hp,
        v_h: values[0],
        v_l: values[1],
        v_o: values[2],
        choice: choices[near[0]],
        tie: near.len() > 1,
        degenerate: lp == 0.0 && hp == 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub spec: RegionSpec,
    /// `lp`-major, `hp`-minor order.
    pub cells: Vec<CellPrediction>,
}

impl RegionGrid {
    pub fn cell(&self, i: usize, j: usize) -> &CellPrediction {
        &self.cells[i * self.spec.hp_axis.count() + j]
    }

    pub fn count(&self, c: Choice) -> usize {
        self.cells.iter().filter(|cell| cell.choice == c).count()
    }
}

pub fn region_grid(spec: &RegionSpec) -> Result<RegionGrid, RegionError> {
    let (nl, nh) = (spec.lp_axis.count(), spec.hp_axis.count());
    let cells = (0..nl * nh)
        .into_par_iter()
        .map(|k| predict_choice(spec, spec.lp_axis.value(k / nh), spec.hp_axis.value(k % nh)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegionGrid { spec: *spec, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPair {
    HighLow,
    LowOutside,
    HighOutside,
}

impl BoundaryPair {
    pub fn choices(&self) -> (Choice, Choice) {
        match self {
            BoundaryPair::HighLow => (Choice::High, Choice::Low),
            BoundaryPair::LowOutside => (Choice::Low, Choice::Outside),
            BoundaryPair::HighOutside => (Choice::High, Choice::Outside),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BoundaryPair::HighLow => "h-l",
            BoundaryPair::LowOutside => "l-o",
            BoundaryPair::HighOutside => "h-o",
        }
    }

    pub fn all() -> [BoundaryPair; 3] {
        [BoundaryPair::HighLow, BoundaryPair::LowOutside, BoundaryPair::HighOutside]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub lp: f64,
    pub hp: f64,
    /// `V(a) - V(b)` at the point.
    pub value_gap: f64,
}

fn gap(spec: &RegionSpec, a: Choice, b: Choice, lp: f64, hp: f64) -> Result<f64, RegionError> {
    let v = menu_values(spec, lp, hp)?;
    let pick = |c: Choice| match c {
        Choice::High => v[0],
        Choice::Low => v[1],
        Choice::Outside => v[2],
    };
    Ok(pick(a) - pick(b))
}

/// Bisects `V(a) - V(b)` along the segment from an `a` cell to a `b` cell.
fn refine(
    spec: &RegionSpec,
    a: Choice,
    b: Choice,
    from: (f64, f64),
    to: (f64, f64),
) -> Result<Option<BoundaryPoint>, RegionError> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let len = ((to.0 - from.0).powi(2) + (to.1 - from.1).powi(2)).sqrt();
    let at = |t: f64| (from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (lp, hp) = at(mid);
        let g = gap(spec, a, b, lp, hp)?;
        if (hi - lo) * len <= BOUNDARY_TOL && g.abs() <= BOUNDARY_VALUE_TOL {
            return Ok(Some(BoundaryPoint { lp, hp, value_gap: g }));
        }
        if g >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON {
            break;
        }
    }
    Ok(None)
}

/// Indifference points between the regions of `pair`, refined between every pair of
/// horizontally or vertically adjacent cells labeled with its two choices, sorted by `(lp, hp)`.
pub fn boundary_trace(grid: &RegionGrid, pair: BoundaryPair) -> Result<Vec<BoundaryPoint>, RegionError> {
    let (a, b) = pair.choices();
    let (nl, nh) = (grid.spec.lp_axis.count(), grid.spec.hp_axis.count());
    let mut edges = Vec::new();
    for i in 0..nl {
        for j in 0..nh {
            let here = grid.cell(i, j);
            for (di, dj) in [(1, 0), (0, 1)] {
                if i + di >= nl || j + dj >= nh {
                    continue;
                }
                let there = grid.cell(i + di, j + dj);
                if here.choice == a && there.choice == b {
                    edges.push(((here.lp, here.hp), (there.lp, there.hp)));
                } else if here.choice == b && there.choice == a {
                    edges.push(((there.lp, there.hp), (here.lp, here.hp)));
                }
            }
        }
    }
    if edges.is_empty() {
        return Err(RegionError::NoBoundary);
    }
    let refined = edges
        .par_iter()
        .map(|&(from, to)| refine(&grid.spec, a, b, from, to))
        .collect::<Result<Vec<_>, _>>()?;
    let mut points: Vec<BoundaryPoint> = refined.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(RegionError::NoBoundary);
    }
    points.sort_by(|p, q| p.lp.total_cmp(&q.lp).then(p.hp.total_cmp(&q.hp)));
    Ok(points)
}
