//! Alternatives, menus and the catalog of (weighted) separable attribute models.
//!
//! Every model is evaluated through a single attribute-evaluation function
//! `v(t, s)`: the value of attribute value `t` when `s` is the comparable value
//! in the same attribute. Weighted models are the special case
//! `v(t, s) = u(t) * w(t, s)`; the contextual concavity models supply `v`
//! directly.

use std::fmt;

use crate::error::ModelError;

/// An attribute-value vector, in dollars.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative(Vec<f64>);

impl Alternative {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::EmptyAlternative);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite(bad));
        }
        Ok(Self(values))
    }

    /// The all-zero alternative with `n` attributes.
    pub fn zeros(n: usize) -> Result<Self, ModelError> {
        Self::new(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns a copy with `extra` appended.
    pub fn extended(&self, extra: &[f64]) -> Result<Self, ModelError> {
        let mut values = self.0.clone();
        values.extend_from_slice(extra);
        Self::new(values)
    }
}

impl From<Alternative> for Vec<f64> {
    fn from(a: Alternative) -> Self {
        a.0
    }
}

/// A decision problem of two or three alternatives with a common number of attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Menu {
    alternatives: Vec<Alternative>,
}

impl Menu {
    /// A binary menu. Attribute values in the same attribute must not have opposite signs.
    pub fn binary(x: Alternative, y: Alternative) -> Result<Self, ModelError> {
        if x.len() != y.len() {
            return Err(ModelError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        for (n, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
            if a * b < 0.0 {
                return Err(ModelError::SignConflict { attribute: n });
            }
        }
        Ok(Self {
            alternatives: vec![x, y],
        })
    }

    /// A three-alternative menu, used by the prediction-region path only.
    pub fn ternary(a: Alternative, b: Alternative, c: Alternative) -> Result<Self, ModelError> {
        for other in [&b, &c] {
            if other.len() != a.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: a.len(),
                    found: other.len(),
                });
            }
        }
        Ok(Self {
            alternatives: vec![a, b, c],
        })
    }

    pub fn from_alternatives(alternatives: Vec<Alternative>) -> Result<Self, ModelError> {
        let mut it = alternatives.into_iter();
        match (it.next(), it.next(), it.next(), it.next()) {
            (Some(x), Some(y), None, None) => Self::binary(x, y),
            (Some(a), Some(b), Some(c), None) => Self::ternary(a, b, c),
            (a, b, c, d) => {
                let count = [a.is_some(), b.is_some(), c.is_some(), d.is_some()]
                    .iter()
                    .filter(|&&p| p)
                    .count()
                    + it.count();
                Err(ModelError::MenuSize(count))
            }
        }
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.alternatives[0].len()
    }

    pub fn position(&self, target: &Alternative) -> Option<usize> {
        self.alternatives.iter().position(|a| a == target)
    }
}

/// Utility family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilitySpec {
    Linear,
    /// Gain-loss utility: `t` for gains, `lambda * t` for losses.
    Kinked { lambda: f64 },
    /// `sign(t) * |t|^alpha`.
    Power { alpha: f64 },
    /// Menu-dependent concave utility of the contextual concavity models.
    CcConcavity { theta: f64 },
}

/// Weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Constant,
    RangeNorm { gamma: f64 },
    PairwiseNorm,
    GenPairwiseNorm { sigma: f64 },
    GenPairwiseNormPower { sigma: f64, alpha: f64 },
    NccRange { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    WeightedSeparable,
    SeparableGeneral,
}

/// A fully parameterized, validated choice model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    utility: UtilitySpec,
    weight: WeightSpec,
    kind: ModelKind,
}

fn check(name: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<(), ModelError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            expected,
        })
    }
}

impl ModelSpec {
    /// Validates the parameter ranges and the utility/weight pairing.
    pub fn new(utility: UtilitySpec, weight: WeightSpec) -> Result<Self, ModelError> {
        match utility {
            UtilitySpec::Linear => {}
            UtilitySpec::Kinked { lambda } => check("lambda", lambda, lambda > 1.0, "lambda > 1")?,
            UtilitySpec::Power { alpha } => {
                check("alpha", alpha, alpha > 0.0 && alpha != 1.0, "alpha > 0, alpha != 1")?
            }
            UtilitySpec::CcConcavity { theta } => {
                check("theta", theta, theta > 0.0 && theta < 1.0, "0 < theta < 1")?
            }
        }
        match weight {
            WeightSpec::Constant | WeightSpec::PairwiseNorm => {}
            WeightSpec::RangeNorm { gamma } => check("gamma", gamma, gamma > -1.0, "gamma > -1")?,
            WeightSpec::GenPairwiseNorm { sigma } => check("sigma", sigma, sigma > 0.0, "sigma > 0")?,
            WeightSpec::GenPairwiseNormPower { sigma, alpha } => {
                check("sigma", sigma, sigma > 0.0, "sigma > 0")?;
                check("alpha", alpha, alpha > 0.0, "alpha > 0")?;
            }
            WeightSpec::NccRange { theta } => {
                check("theta", theta, theta > 0.0 && theta < 1.0, "0 < theta < 1")?
            }
        }

        use UtilitySpec as U;
        use WeightSpec as W;
        let kind = match (utility, weight) {
            (U::CcConcavity { .. }, W::Constant) => ModelKind::SeparableGeneral,
            (U::CcConcavity { theta: a }, W::NccRange { theta: b }) => {
                if a != b {
                    return Err(ModelError::InvalidCombination(format!(
                        "NCC weight theta {b} differs from utility theta {a}"
                    )));
                }
                ModelKind::SeparableGeneral
            }
            (U::CcConcavity { .. }, w) => {
                return Err(ModelError::InvalidCombination(format!(
                    "contextual concavity utility cannot be paired with {w:?}"
                )))
            }
            (u, W::NccRange { .. }) => {
                return Err(ModelError::InvalidCombination(format!(
                    "NCC weight requires contextual concavity utility, got {u:?}"
                )))
            }
            (U::Linear, W::PairwiseNorm | W::GenPairwiseNorm { .. }) => ModelKind::WeightedSeparable,
            (u, W::PairwiseNorm | W::GenPairwiseNorm { .. }) => {
                return Err(ModelError::InvalidCombination(format!(
                    "pairwise normalization requires linear utility, got {u:?}"
                )))
            }
            (U::Power { alpha: a }, W::GenPairwiseNormPower { alpha: b, .. }) if a == b => {
                ModelKind::WeightedSeparable
            }
            (U::Linear, W::GenPairwiseNormPower { alpha, .. }) if alpha == 1.0 => {
                ModelKind::WeightedSeparable
            }
            (u, W::GenPairwiseNormPower { alpha, .. }) => {
                return Err(ModelError::InvalidCombination(format!(
                    "power pairwise normalization with alpha {alpha} requires power utility with the same alpha, got {u:?}"
                )))
            }
            (_, W::Constant | W::RangeNorm { .. }) => ModelKind::WeightedSeparable,
        };
        Ok(Self {
            utility,
            weight,
            kind,
        })
    }

    pub fn rn_linear(gamma: f64) -> Result<Self, ModelError> {
        Self::new(UtilitySpec::Linear, WeightSpec::RangeNorm { gamma })
    }

    pub fn rn_kinked(gamma: f64, lambda: f64) -> Result<Self, ModelError> {
        Self::new(UtilitySpec::Kinked { lambda }, WeightSpec::RangeNorm { gamma })
    }

    pub fn rn_power(gamma: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::new(UtilitySpec::Power { alpha }, WeightSpec::RangeNorm { gamma })
    }

    pub fn pn() -> Self {
        Self {
            utility: UtilitySpec::Linear,
            weight: WeightSpec::PairwiseNorm,
            kind: ModelKind::WeightedSeparable,
        }
    }

    pub fn gpn(sigma: f64) -> Result<Self, ModelError> {
        Self::new(UtilitySpec::Linear, WeightSpec::GenPairwiseNorm { sigma })
    }

    pub fn gpn_power(sigma: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::new(
            UtilitySpec::Power { alpha },
            WeightSpec::GenPairwiseNormPower { sigma, alpha },
        )
    }

    pub fn cc(theta: f64) -> Result<Self, ModelError> {
        Self::new(UtilitySpec::CcConcavity { theta }, WeightSpec::Constant)
    }

    pub fn ncc(theta: f64) -> Result<Self, ModelError> {
        Self::new(
            UtilitySpec::CcConcavity { theta },
            WeightSpec::NccRange { theta },
        )
    }

    pub fn utility(&self) -> UtilitySpec {
        self.utility
    }

    pub fn weight(&self) -> WeightSpec {
        self.weight
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Short catalog name, e.g. `rn-kinked` or `gpn-power`.
    pub fn family_name(&self) -> &'static str {
        use UtilitySpec as U;
        use WeightSpec as W;
        match (self.utility, self.weight) {
            (U::Linear, W::RangeNorm { .. }) => "rn-linear",
            (U::Kinked { .. }, W::RangeNorm { .. }) => "rn-kinked",
            (U::Power { .. }, W::RangeNorm { .. }) => "rn-power",
            (U::Linear, W::Constant) => "linear",
            (U::Kinked { .. }, W::Constant) => "kinked",
            (U::Power { .. }, W::Constant) => "power",
            (_, W::PairwiseNorm) => "pn",
            (_, W::GenPairwiseNorm { .. }) => "gpn",
            (_, W::GenPairwiseNormPower { .. }) => "gpn-power",
            (U::CcConcavity { .. }, W::Constant) => "cc",
            (_, W::NccRange { .. }) => "ncc",
            (U::CcConcavity { .. }, W::RangeNorm { .. }) => "invalid",
        }
    }

    /// True for the range normalization family, the only one defined on 3-option menus.
    pub fn is_range_normalized(&self) -> bool {
        matches!(self.weight, WeightSpec::RangeNorm { .. })
    }

    /// `u(t)` for weighted models. Contextual concavity has no menu-free utility.
    pub fn utility_value(&self, t: f64) -> Option<f64> {
        match self.utility {
            UtilitySpec::Linear => Some(t),
            UtilitySpec::Kinked { lambda } => Some(if t >= 0.0 { t } else { lambda * t }),
            UtilitySpec::Power { alpha } => Some(signed_pow(t, alpha)),
            UtilitySpec::CcConcavity { .. } => None,
        }
    }

    /// `w(t, s)` for weighted models; `None` for separable-general models.
    pub fn weight_value(&self, t: f64, s: f64) -> Option<f64> {
        if self.kind != ModelKind::WeightedSeparable {
            return None;
        }
        let w = match self.weight {
            WeightSpec::Constant => 1.0,
            WeightSpec::RangeNorm { gamma } => {
                // Utility exists for every weighted model.
                let ut = self.utility_value(t)?;
                let us = self.utility_value(s)?;
                range_weight(ut, us, gamma)
            }
            WeightSpec::PairwiseNorm => {
                let denom = t.abs() + s.abs();
                if denom == 0.0 {
                    0.0
                } else {
                    1.0 / denom
                }
            }
            WeightSpec::GenPairwiseNorm { sigma } => 1.0 / (sigma + t.abs() + s.abs()),
            WeightSpec::GenPairwiseNormPower { sigma, alpha } => {
                1.0 / (sigma.powf(alpha) + t.abs().powf(alpha) + s.abs().powf(alpha))
            }
            WeightSpec::NccRange { .. } => return None,
        };
        Some(w)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family_name())?;
        let mut params = Vec::new();
        match self.utility {
            UtilitySpec::Kinked { lambda } => params.push(format!("lambda={lambda}")),
            UtilitySpec::Power { alpha } => params.push(format!("alpha={alpha}")),
            UtilitySpec::CcConcavity { theta } => params.push(format!("theta={theta}")),
            UtilitySpec::Linear => {}
        }
        match self.weight {
            WeightSpec::RangeNorm { gamma } => params.push(format!("gamma={gamma}")),
            WeightSpec::GenPairwiseNorm { sigma } | WeightSpec::GenPairwiseNormPower { sigma, .. } => {
                params.push(format!("sigma={sigma}"))
            }
            _ => {}
        }
        if !params.is_empty() {
            write!(f, "({})", params.join(","))?;
        }
        Ok(())
    }
}

fn signed_pow(t: f64, alpha: f64) -> f64 {
    if t >= 0.0 {
        t.powf(alpha)
    } else {
        -(-t).powf(alpha)
    }
}

/// `|a - b|^gamma`, and exactly 0 when `a == b`.
fn range_weight(a: f64, b: f64, gamma: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs().powf(gamma)
    }
}

fn cc_utility(theta: f64, t: f64, s: f64) -> Result<f64, ModelError> {
    if t >= 0.0 && s >= 0.0 {
        Ok((t - t.min(s)).powf(theta))
    } else if t <= 0.0 && s <= 0.0 {
        let (at, as_) = (t.abs(), s.abs());
        Ok(-(at - at.min(as_)).powf(theta))
    } else {
        Err(ModelError::MixedSign { t, s })
    }
}

/// `v(t, s)`: evaluation of attribute value `t` against comparable value `s`.
pub fn attribute_evaluation(model: &ModelSpec, t: f64, s: f64) -> Result<f64, ModelError> {
    match (model.utility, model.weight) {
        (UtilitySpec::CcConcavity { theta }, WeightSpec::Constant) => cc_utility(theta, t, s),
        (UtilitySpec::CcConcavity { theta }, WeightSpec::NccRange { .. }) => {
            Ok(cc_utility(theta, t, s)? * (t - s).abs().powf(1.0 - theta))
        }
        _ => {
            let u = model.utility_value(t).expect("weighted model has a utility");
            let w = model.weight_value(t, s).expect("weighted model has a weight");
            // 0 * w stays 0 even if the weight is huge.
            Ok(if u == 0.0 { 0.0 } else { u * w })
        }
    }
}

/// `u0(t) = v(t, 0)`, the normalized (weighted) utility.
pub fn normalized_utility(model: &ModelSpec, t: f64) -> Result<f64, ModelError> {
    attribute_evaluation(model, t, 0.0)
}

/// Range weight over every alternative in one attribute: `|max u - min u|^gamma`, 0 at zero range.
fn menu_range_weight(model: &ModelSpec, gamma: f64, column: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &value in column {
        let u = model.utility_value(value).expect("range normalization has a utility");
        lo = lo.min(u);
        hi = hi.max(u);
    }
    range_weight(hi, lo, gamma)
}

/// `V(target | menu)`.
pub fn evaluate(model: &ModelSpec, target: &Alternative, menu: &Menu) -> Result<f64, ModelError> {
    if target.len() != menu.attribute_count() {
        return Err(ModelError::DimensionMismatch {
            expected: menu.attribute_count(),
            found: target.len(),
        });
    }
    let index = menu.position(target).ok_or(ModelError::TargetNotInMenu)?;
    evaluate_member(model, menu, index)
}

/// `V` of the `index`-th alternative of `menu`.
pub fn evaluate_member(model: &ModelSpec, menu: &Menu, index: usize) -> Result<f64, ModelError> {
    let alts = menu.alternatives();
    let target = alts.get(index).ok_or(ModelError::TargetNotInMenu)?;
    match alts.len() {
        2 => {
            let other = &alts[1 - index];
            target
                .values()
                .iter()
                .zip(other.values())
                .try_fold(0.0, |acc, (&t, &s)| Ok(acc + attribute_evaluation(model, t, s)?))
        }
        3 => {
            let WeightSpec::RangeNorm { gamma } = model.weight else {
                return Err(ModelError::ThreeOptionUnsupported);
            };
            let mut total = 0.0;
            let mut column = [0.0; 3];
            for n in 0..target.len() {
                for (slot, alt) in column.iter_mut().zip(alts) {
                    *slot = alt.values()[n];
                }
                let u = model.utility_value(target.values()[n]).expect("weighted");
                if u != 0.0 {
                    total += u * menu_range_weight(model, gamma, &column);
                }
            }
            Ok(total)
        }
        n => Err(ModelError::MenuSize(n)),
    }
}

/// `V(x) - V(y)` on a binary menu, accumulated attribute by attribute.
///
/// Attributes where `x` and `y` coincide contribute exactly zero and are skipped,
/// so appending common constants never changes the result bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    /// Largest per-attribute magnitude among differing attributes; used for tie tolerance.
    pub scale: f64,
}

impl Margin {
    /// Relative tolerance below which the two alternatives are treated as indifferent.
    pub const TIE_RTOL: f64 = 1e-12;

    pub fn is_tie(&self) -> bool {
        self.value.abs() <= Self::TIE_RTOL * self.scale.max(1.0)
    }

    /// `x` strictly preferred, beyond the tie tolerance.
    pub fn prefers_x(&self) -> bool {
        self.value > 0.0 && !self.is_tie()
    }
}

pub fn preference_margin(model: &ModelSpec, x: &[f64], y: &[f64]) -> Result<Margin, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let mut value = 0.0;
    let mut scale: f64 = 0.0;
    for (n, (&a, &b)) in x.iter().zip(y).enumerate() {
        if a == b {
            continue;
        }
        if a * b < 0.0 {
            return Err(ModelError::SignConflict { attribute: n });
        }
        let va = attribute_evaluation(model, a, b)?;
        let vb = attribute_evaluation(model, b, a)?;
        value += va - vb;
        scale = scale.max(va.abs() + vb.abs());
    }
    Ok(Margin { value, scale })
}

/// The eight reference models used by the assumption matrix, with their labels.
pub fn catalog() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("rn-linear", ModelSpec::rn_linear(-0.5).expect("valid")),
        ("rn-kinked", ModelSpec::rn_kinked(-0.5, 2.0).expect("valid")),
        ("rn-power", ModelSpec::rn_power(-0.5, 0.5).expect("valid")),
        ("pn", ModelSpec::pn()),
        ("gpn", ModelSpec::gpn(1.0).expect("valid")),
        ("gpn-power", ModelSpec::gpn_power(1.0, 0.5).expect("valid")),
        ("cc", ModelSpec::cc(0.5).expect("valid")),
        ("ncc", ModelSpec::ncc(0.5).expect("valid")),
    ]
}
