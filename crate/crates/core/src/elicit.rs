//! m-MPL and p-MPL decision problems, switch-point search and closed-form inversion.

use std::fmt;

use crate::error::ElicitError;
use crate::model::{preference_margin, Alternative, Margin, Menu, ModelSpec, UtilitySpec, WeightSpec};

/// A price list: rows from `min_value` to `max_value` in steps of `increment`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MplSpec {
    min_value: f64,
    max_value: f64,
    increment: f64,
    rows: usize,
    /// `1 / increment` when it is an integer; row values are then computed by division,
    /// which yields the double nearest to the decimal row label.
    per_unit: Option<f64>,
}

impl MplSpec {
    pub fn new(min_value: f64, max_value: f64, increment: f64) -> Result<Self, ElicitError> {
        let finite = min_value.is_finite() && max_value.is_finite() && increment.is_finite();
        if !finite || min_value <= 0.0 {
            return Err(ElicitError::InvalidMpl(format!("min_value must be > 0, got {min_value}")));
        }
        if max_value <= min_value {
            return Err(ElicitError::InvalidMpl(format!(
                "max_value {max_value} must exceed min_value {min_value}"
            )));
        }
        if increment <= 0.0 {
            return Err(ElicitError::InvalidMpl(format!("increment must be > 0, got {increment}")));
        }
        let steps = (max_value - min_value) / increment;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(ElicitError::InvalidMpl(format!(
                "range {min_value}..{max_value} is not a multiple of {increment}"
            )));
        }
        let inv = 1.0 / increment;
        let per_unit = ((inv - inv.round()).abs() < 1e-9).then(|| inv.round());
        Ok(Self {
            min_value,
            max_value,
            increment,
            rows: steps.round() as usize + 1,
            per_unit,
        })
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }
    pub fn max_value(&self) -> f64 {
        self.max_value
    }
    pub fn increment(&self) -> f64 {
        self.increment
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row_value(&self, i: usize) -> f64 {
        if i + 1 == self.rows {
            return self.max_value;
        }
        match self.per_unit {
            Some(per_unit) => ((self.min_value * per_unit).round() + i as f64) / per_unit,
            None => self.min_value + i as f64 * self.increment,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        let slack = 1e-9 * self.increment;
        value >= self.min_value - slack && value <= self.max_value + slack
    }
}

impl Default for MplSpec {
    fn default() -> Self {
        Self::new(0.01, 10.0, 0.01).expect("default price list is valid")
    }
}

/// How the p-MPL endowment enters the subject's representation, or the m-MPL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    MMoney,
    PIgnore,
    PSeparate { endowment: f64 },
    PCombine { endowment: f64 },
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::MMoney => "m",
            ScenarioKind::PIgnore => "p-ignore",
            ScenarioKind::PSeparate { .. } => "p-separate",
            ScenarioKind::PCombine { .. } => "p-combine",
        }
    }

    pub fn endowment(&self) -> Option<f64> {
        match *self {
            ScenarioKind::PSeparate { endowment } | ScenarioKind::PCombine { endowment } => {
                Some(endowment)
            }
            _ => None,
        }
    }
}

/// A scenario plus constant attributes appended to both alternatives (e.g. a show-up fee).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub extras: Vec<f64>,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            extras: Vec::new(),
        }
    }

    pub fn m_money() -> Self {
        Self::new(ScenarioKind::MMoney)
    }

    pub fn p_ignore() -> Self {
        Self::new(ScenarioKind::PIgnore)
    }

    pub fn p_separate(endowment: f64) -> Self {
        Self::new(ScenarioKind::PSeparate { endowment })
    }

    pub fn p_combine(endowment: f64) -> Self {
        Self::new(ScenarioKind::PCombine { endowment })
    }

    pub fn with_extras(mut self, extras: Vec<f64>) -> Self {
        self.extras = extras;
        self
    }

    fn validate(&self) -> Result<(), ElicitError> {
        if let Some(e) = self.kind.endowment() {
            if !(e.is_finite() && e > 0.0) {
                return Err(ElicitError::InvalidScenario(format!("endowment must be > 0, got {e}")));
            }
        }
        if let Some(bad) = self.extras.iter().find(|v| !v.is_finite()) {
            return Err(ElicitError::InvalidScenario(format!("constant attribute {bad} is not finite")));
        }
        Ok(())
    }

    /// Checks that earnings stay nonnegative on every row of `mpl`.
    pub fn validate_for(&self, mpl: &MplSpec) -> Result<(), ElicitError> {
        self.validate()?;
        if let Some(e) = self.kind.endowment() {
            if e < mpl.max_value() {
                return Err(ElicitError::InvalidScenario(format!(
                    "endowment {e} is below the maximum price {}",
                    mpl.max_value()
                )));
            }
        }
        Ok(())
    }

    fn encode(&self, q: f64, row_value: f64) -> (Vec<f64>, Vec<f64>) {
        let (mut x, mut y) = match self.kind {
            ScenarioKind::MMoney => (vec![q, 0.0], vec![0.0, row_value]),
            ScenarioKind::PIgnore => (vec![q, -row_value], vec![0.0, 0.0]),
            ScenarioKind::PSeparate { endowment } => {
                (vec![q, -row_value, endowment], vec![0.0, 0.0, endowment])
            }
            ScenarioKind::PCombine { endowment } => {
                (vec![q, endowment - row_value], vec![0.0, endowment])
            }
        };
        x.extend_from_slice(&self.extras);
        y.extend_from_slice(&self.extras);
        (x, y)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.label())?;
        if let Some(e) = self.kind.endowment() {
            write!(f, "(E={e})")?;
        }
        Ok(())
    }
}

fn check_quality(q: f64) -> Result<(), ElicitError> {
    if q.is_finite() && q >= 0.0 {
        Ok(())
    } else {
        Err(ElicitError::InvalidQuality(q))
    }
}

/// The binary menu `{x, y}` for one row; `x` is the product side.
pub fn encode_row(scenario: &Scenario, q: f64, row_value: f64) -> Result<Menu, ElicitError> {
    scenario.validate()?;
    check_quality(q)?;
    if !(row_value.is_finite() && row_value > 0.0) {
        return Err(ElicitError::RowOutOfRange(row_value));
    }
    if let Some(e) = scenario.kind.endowment() {
        if row_value > e {
            return Err(ElicitError::InvalidScenario(format!(
                "price {row_value} exceeds endowment {e}"
            )));
        }
    }
    let (x, y) = scenario.encode(q, row_value);
    Ok(Menu::binary(Alternative::new(x)?, Alternative::new(y)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clamp {
    No,
    AtMin,
    AtMax,
}

impl Clamp {
    pub fn label(&self) -> &'static str {
        match self {
            Clamp::No => "no",
            Clamp::AtMin => "at-min",
            Clamp::AtMax => "at-max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    RowScan,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElicitationResult {
    /// First row at which the money/no-buy side is weakly preferred. `None` if never.
    pub switch_point: Option<f64>,
    /// Number of choice changes between consecutive rows.
    pub crossing_count: usize,
    pub clamped: Clamp,
    pub method: Method,
    /// Two or more consecutive rows are exact indifferences.
    pub plateau: bool,
}

impl ElicitationResult {
    pub fn multi_crossing(&self) -> bool {
        self.crossing_count > 1
    }

    /// A clean single crossing inside the list.
    pub fn is_regular(&self) -> bool {
        self.crossing_count == 1 && self.clamped == Clamp::No && !self.plateau
    }
}

struct Scan {
    margins: Vec<Margin>,
}

impl Scan {
    fn run<F>(model: &ModelSpec, mpl: &MplSpec, mut encode: F) -> Result<Self, ElicitError>
    where
        F: FnMut(f64) -> (Vec<f64>, Vec<f64>),
    {
        let margins = (0..mpl.rows())
            .map(|i| {
                let (x, y) = encode(mpl.row_value(i));
                preference_margin(model, &x, &y).map_err(ElicitError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { margins })
    }

    fn first_switch(&self) -> Option<usize> {
        self.margins.iter().position(|m| !m.prefers_x())
    }

    fn crossing_count(&self) -> usize {
        self.margins
            .windows(2)
            .filter(|w| w[0].prefers_x() != w[1].prefers_x())
            .count()
    }

    fn plateau(&self) -> bool {
        self.margins.windows(2).any(|w| w[0].is_tie() && w[1].is_tie())
    }

    fn result(&self, mpl: &MplSpec) -> ElicitationResult {
        let (switch_point, clamped) = match self.first_switch() {
            None => (None, Clamp::AtMax),
            Some(0) => (Some(mpl.min_value()), Clamp::AtMin),
            Some(i) => (Some(mpl.row_value(i)), Clamp::No),
        };
        ElicitationResult {
            switch_point,
            crossing_count: self.crossing_count(),
            clamped,
            method: Method::RowScan,
            plateau: self.plateau(),
        }
    }
}

/// Discrete switch point: the first row where `V(y) >= V(x)`.
pub fn elicit_rowscan(
    model: &ModelSpec,
    scenario: &Scenario,
    q: f64,
    mpl: &MplSpec,
) -> Result<ElicitationResult, ElicitError> {
    scenario.validate_for(mpl)?;
    check_quality(q)?;
    let scan = Scan::run(model, mpl, |v| scenario.encode(q, v))?;
    Ok(scan.result(mpl))
}

/// Continuous indifference value, refined by bisection inside the bracketing rows of a row scan.
pub fn elicit_bisect(
    model: &ModelSpec,
    scenario: &Scenario,
    q: f64,
    mpl: &MplSpec,
    tol: f64,
) -> Result<ElicitationResult, ElicitError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(ElicitError::InvalidTolerance(tol));
    }
    scenario.validate_for(mpl)?;
    check_quality(q)?;
    let scan = Scan::run(model, mpl, |v| scenario.encode(q, v))?;
    let coarse = scan.result(mpl);
    let margin_at = |v: f64| -> Result<Margin, ElicitError> {
        let (x, y) = scenario.encode(q, v);
        Ok(preference_margin(model, &x, &y)?)
    };

    let switch = match scan.first_switch() {
        None => return Err(ElicitError::NoCrossing),
        Some(0) => {
            // Exact indifference at the first row, followed by a strict preference for y.
            let m = &scan.margins;
            if m[0].is_tie() && m.len() > 1 && !m[1].is_tie() && !m[1].prefers_x() {
                mpl.min_value()
            } else {
                return Err(ElicitError::NoCrossing);
            }
        }
        Some(k) if scan.margins[k].is_tie() => mpl.row_value(k),
        Some(k) => {
            let mut lo = mpl.row_value(k - 1);
            let mut hi = mpl.row_value(k);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let m = margin_at(mid)?;
                if m.is_tie() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if m.prefers_x() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(ElicitationResult {
        switch_point: Some(switch),
        method: Method::Bisection,
        ..coarse
    })
}

/// Model-implied true quality for an observed switch point, where a closed form is cataloged.
///
/// Accurate (model, scenario) pairs return the switch point unchanged. `Ok(None)` means no
/// closed form is known for the pair.
pub fn implied_quality(
    model: &ModelSpec,
    scenario: &Scenario,
    switch_point: f64,
) -> Result<Option<f64>, ElicitError> {
    if !(switch_point.is_finite() && switch_point > 0.0) {
        return Err(ElicitError::OutOfDomain(switch_point));
    }
    let p = switch_point;
    let combine_e = match scenario.kind {
        ScenarioKind::PCombine { endowment } => {
            if p > endowment {
                return Err(ElicitError::OutOfDomain(p));
            }
            Some(endowment)
        }
        _ => None,
    };
    let ignore_like = matches!(
        scenario.kind,
        ScenarioKind::PIgnore | ScenarioKind::PSeparate { .. }
    );

    use UtilitySpec as U;
    use WeightSpec as W;
    let q = match (model.utility(), model.weight()) {
        (_, W::PairwiseNorm) => None,
        (U::CcConcavity { .. }, _) => Some(p),
        (U::Linear, W::Constant | W::RangeNorm { .. }) => Some(p),
        (U::Kinked { lambda }, W::Constant | W::RangeNorm { .. }) => {
            Some(if ignore_like { lambda * p } else { p })
        }
        (U::Power { alpha }, W::Constant | W::RangeNorm { .. }) => match combine_e {
            Some(e) => Some((e.powf(alpha) - (e - p).powf(alpha)).powf(1.0 / alpha)),
            None => Some(p),
        },
        (U::Linear, W::GenPairwiseNorm { sigma }) => match combine_e {
            Some(e) => Some(sigma * p / (sigma + 2.0 * e - 2.0 * p)),
            None => Some(p),
        },
        (_, W::GenPairwiseNormPower { .. }) => match combine_e {
            Some(_) => None,
            None => Some(p),
        },
        _ => None,
    };
    Ok(q)
}

/// Upgrading method: the bonus `d` that makes `(base.., d)` as good as `(upgraded.., 0)`.
pub fn elicit_marginal_attribute(
    model: &ModelSpec,
    base: &Alternative,
    upgraded: &Alternative,
    attribute_index: usize,
    mpl: &MplSpec,
) -> Result<ElicitationResult, ElicitError> {
    if base.len() != upgraded.len() {
        return Err(ElicitError::NotSingleUpgrade(format!(
            "lengths {} and {} differ",
            base.len(),
            upgraded.len()
        )));
    }
    if attribute_index >= base.len() {
        return Err(ElicitError::NotSingleUpgrade(format!(
            "attribute index {attribute_index} out of range"
        )));
    }
    let differing: Vec<usize> = base
        .values()
        .iter()
        .zip(upgraded.values())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(n, _)| n)
        .collect();
    if differing != [attribute_index] {
        return Err(ElicitError::NotSingleUpgrade(format!(
            "differing attributes {differing:?}, expected only {attribute_index}"
        )));
    }
    if upgraded.values()[attribute_index] <= base.values()[attribute_index] {
        return Err(ElicitError::NotSingleUpgrade(
            "upgraded attribute must be strictly larger".into(),
        ));
    }
    let x: Vec<f64> = upgraded.values().iter().copied().chain([0.0]).collect();
    let scan = Scan::run(model, mpl, |d| {
        let y: Vec<f64> = base.values().iter().copied().chain([d]).collect();
        (x.clone(), y)
    })?;
    Ok(scan.result(mpl))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> MplSpec {
        MplSpec::default()
    }

    #[test]
    fn encode_rows() {
        let m = encode_row(&Scenario::m_money(), 5.0, 3.0).unwrap();
        assert_eq!(m.alternatives()[0].values(), &[5.0, 0.0]);
        assert_eq!(m.alternatives()[1].values(), &[0.0, 3.0]);
        let c = encode_row(&Scenario::p_combine(10.0), 5.0, 3.0).unwrap();
        assert_eq!(c.alternatives()[0].values(), &[5.0, 7.0]);
        assert_eq!(c.alternatives()[1].values(), &[0.0, 10.0]);
        let s = encode_row(&Scenario::p_separate(10.0).with_extras(vec![5.0]), 5.0, 3.0).unwrap();
        assert_eq!(s.alternatives()[0].values(), &[5.0, -3.0, 10.0, 5.0]);
        assert_eq!(s.alternatives()[1].values(), &[0.0, 0.0, 10.0, 5.0]);
        assert!(encode_row(&Scenario::p_combine(2.0), 5.0, 3.0).is_err());
        assert!(encode_row(&Scenario::m_money(), -1.0, 3.0).is_err());
    }

    #[test]
    fn mpl_grid() {
        let g = grid();
        assert_eq!(g.rows(), 1000);
        assert_eq!(g.row_value(0), 0.01);
        assert_eq!(g.row_value(499), 5.0);
        assert_eq!(g.row_value(999), 10.0);
        assert!(MplSpec::new(0.01, 10.0, 0.02).is_err());
        assert!(MplSpec::new(0.0, 10.0, 0.01).is_err());
        assert!(MplSpec::new(1.0, 0.5, 0.01).is_err());
    }

    #[test]
    fn kinked_ignore_halves_quality() {
        let m = ModelSpec::rn_kinked(0.0, 2.0).unwrap();
        let r = elicit_rowscan(&m, &Scenario::p_ignore(), 10.0, &grid()).unwrap();
        assert_eq!(r.switch_point, Some(5.0));
        assert_eq!(r.crossing_count, 1);
        assert_eq!(r.clamped, Clamp::No);
    }

    #[test]
    fn linear_money_is_accurate() {
        let m = ModelSpec::rn_linear(0.0).unwrap();
        let r = elicit_rowscan(&m, &Scenario::m_money(), 5.0, &grid()).unwrap();
        assert_eq!(r.switch_point, Some(5.0));
    }

    #[test]
    fn gpn_combine_switch_at_seven() {
        let m = ModelSpec::gpn(1.0).unwrap();
        let r = elicit_rowscan(&m, &Scenario::p_combine(10.0), 1.0, &grid()).unwrap();
        assert_eq!(r.switch_point, Some(7.0));
    }

    #[test]
    fn bisect_power_combine() {
        let m = ModelSpec::rn_power(0.0, 0.5).unwrap();
        let r = elicit_bisect(&m, &Scenario::p_combine(10.0), 4.0, &grid(), 1e-6).unwrap();
        let expected = 10.0 - (10f64.sqrt() - 2.0).powi(2);
        assert!((r.switch_point.unwrap() - expected).abs() < 1e-6);
        assert_eq!(r.method, Method::Bisection);
    }

    #[test]
    fn pn_money_is_degenerate() {
        let r = elicit_rowscan(&ModelSpec::pn(), &Scenario::m_money(), 5.0, &grid()).unwrap();
        assert_eq!(r.crossing_count, 0);
        assert!(r.plateau);
        assert_eq!(r.clamped, Clamp::AtMin);
        assert_eq!(
            elicit_bisect(&ModelSpec::pn(), &Scenario::m_money(), 5.0, &grid(), 1e-6).unwrap_err(),
            ElicitError::NoCrossing
        );
    }

    #[test]
    fn out_of_range_quality_clamps() {
        let m = ModelSpec::rn_linear(0.0).unwrap();
        let r = elicit_rowscan(&m, &Scenario::m_money(), 12.0, &grid()).unwrap();
        assert_eq!(r.switch_point, None);
        assert_eq!(r.clamped, Clamp::AtMax);
        assert_eq!(r.crossing_count, 0);
        let zero = elicit_rowscan(&m, &Scenario::p_ignore(), 0.0, &grid()).unwrap();
        assert_eq!(zero.switch_point, Some(0.01));
        assert_eq!(zero.clamped, Clamp::AtMin);
    }

    #[test]
    fn implied_quality_forms() {
        let kinked = ModelSpec::rn_kinked(-0.3, 2.0).unwrap();
        assert_eq!(implied_quality(&kinked, &Scenario::p_ignore(), 5.0).unwrap(), Some(10.0));
        assert_eq!(implied_quality(&kinked, &Scenario::p_combine(10.0), 5.0).unwrap(), Some(5.0));
        let linear = ModelSpec::rn_linear(0.2).unwrap();
        assert_eq!(implied_quality(&linear, &Scenario::p_separate(10.0), 3.33).unwrap(), Some(3.33));
        let gpn = ModelSpec::gpn(1.0).unwrap();
        let q = implied_quality(&gpn, &Scenario::p_combine(10.0), 7.0).unwrap().unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        assert_eq!(implied_quality(&ModelSpec::pn(), &Scenario::m_money(), 5.0).unwrap(), None);
        assert!(implied_quality(&gpn, &Scenario::p_combine(10.0), 11.0).is_err());
    }

    #[test]
    fn marginal_attribute_examples() {
        let alt = |v: &[f64]| Alternative::new(v.to_vec()).unwrap();
        let lin = ModelSpec::rn_linear(-0.2).unwrap();
        let r = elicit_marginal_attribute(&lin, &alt(&[8.0, 5.0, 5.0, 5.0]), &alt(&[10.0, 5.0, 5.0, 5.0]), 0, &grid())
            .unwrap();
        assert_eq!(r.switch_point, Some(2.0));
        let cc = ModelSpec::cc(0.5).unwrap();
        let r = elicit_marginal_attribute(&cc, &alt(&[4.0, 3.0]), &alt(&[9.0, 3.0]), 0, &grid()).unwrap();
        assert_eq!(r.switch_point, Some(5.0));
        assert!(elicit_marginal_attribute(&cc, &alt(&[4.0, 3.0]), &alt(&[4.0, 3.0]), 0, &grid()).is_err());
        assert!(elicit_marginal_attribute(&cc, &alt(&[4.0, 3.0]), &alt(&[9.0, 4.0]), 0, &grid()).is_err());
    }

    #[test]
    fn endowment_below_max_price_rejected() {
        let m = ModelSpec::rn_linear(0.0).unwrap();
        assert!(elicit_rowscan(&m, &Scenario::p_combine(5.0), 1.0, &grid()).is_err());
    }
}
