//! `Switch ~ Block + Price + Block x Price` with optional subject and product fixed effects
//! and subject-clustered (CR1) standard errors.
//!
//! Block is coded 1 for the p-block. Subject effects are absorbed by within-subject demeaning
//! with the grand mean added back, so the constant is the observation-weighted mean of the
//! subject intercepts. Product effects enter as explicit dummies (first product dropped),
//! transformed the same way; they absorb Price.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::cohort::{Block, Dataset};
use crate::error::StatsError;
use crate::stats::summary::NONPOSITIVE_CUTOFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedEffects {
    None,
    Subject,
    SubjectProduct,
}

impl FixedEffects {
    pub fn label(&self) -> &'static str {
        match self {
            FixedEffects::None => "none",
            FixedEffects::Subject => "subject",
            FixedEffects::SubjectProduct => "subject+product",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "subject" => Some(Self::Subject),
            "subject+product" => Some(Self::SubjectProduct),
            _ => None,
        }
    }

    pub fn subject(&self) -> bool {
        !matches!(self, FixedEffects::None)
    }

    pub fn product(&self) -> bool {
        matches!(self, FixedEffects::SubjectProduct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub coef: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub fixed_effects: FixedEffects,
    pub block: Estimate,
    /// `None` when product effects absorb it.
    pub price: Option<Estimate>,
    pub block_price: Estimate,
    pub constant: Estimate,
    pub n_observations: usize,
    pub n_clusters: usize,
}

/// Records of products that are not nonpositive-value for their subject (both blocks at the
/// list minimum).
pub fn positive_value_records(dataset: &Dataset) -> Dataset {
    let mut low: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for r in &dataset.records {
        if r.switch_point <= NONPOSITIVE_CUTOFF + 1e-9 {
            *low.entry((r.subject_id, r.product_id)).or_default() += 1;
        }
    }
    let records = dataset
        .records
        .iter()
        .filter(|r| low.get(&(r.subject_id, r.product_id)).copied().unwrap_or(0) < 2)
        .cloned()
        .collect();
    Dataset::from_records(records)
}

/// Ordinary least squares with a rank check; returns `(beta, (X'X)^-1)`.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), StatsError> {
    if x.nrows() <= x.ncols() {
        return Err(StatsError::RankDeficient);
    }
    let sv = x.singular_values();
    let max = sv.max();
    if !(max > 0.0) || sv.min() <= max * 1e-10 * (x.nrows().max(x.ncols()) as f64) {
        return Err(StatsError::RankDeficient);
    }
    let xtx = x.transpose() * x;
    let chol = xtx.cholesky().ok_or(StatsError::RankDeficient)?;
    let inv = chol.inverse();
    let beta = &inv * (x.transpose() * y);
    Ok((beta, inv))
}

pub fn fe_ols(dataset: &Dataset, fixed_effects: FixedEffects) -> Result<RegressionResult, StatsError> {
    let records = &dataset.records;
    if records.is_empty() {
        return Err(StatsError::Empty);
    }
    if records
        .iter()
        .any(|r| !(r.switch_point.is_finite() && r.market_price.is_finite()))
    {
        return Err(StatsError::NonFinite);
    }
    let subjects: Vec<u32> = dataset.subject_ids();
    let n_clusters = subjects.len();
    if n_clusters < 2 {
        return Err(StatsError::TooFewClusters(n_clusters));
    }
    let cluster_of: BTreeMap<u32, usize> = subjects.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut products: Vec<u32> = records.iter().map(|r| r.product_id).collect();
    products.sort_unstable();
    products.dedup();
    let product_col: BTreeMap<u32, usize> = products.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    // Columns: block, [price], block*price, [product dummies 2..], constant.
    let with_price = !fixed_effects.product();
    let n_dummies = if fixed_effects.product() { products.len() - 1 } else { 0 };
    let k = 2 + with_price as usize + n_dummies + 1;
    let n = records.len();
    let mut x = DMatrix::<f64>::zeros(n, k);
    let mut y = DVector::<f64>::zeros(n);
    for (i, r) in records.iter().enumerate() {
        let b = if r.block == Block::P { 1.0 } else { 0.0 };
        let mut c = 0;
        x[(i, c)] = b;
        c += 1;
        if with_price {
            x[(i, c)] = r.market_price;
            c += 1;
        }
        x[(i, c)] = b * r.market_price;
        c += 1;
        if n_dummies > 0 {
            let j = product_col[&r.product_id];
            if j > 0 {
                x[(i, c + j - 1)] = 1.0;
            }
        }
        y[i] = r.switch_point;
    }

    if fixed_effects.subject() {
        let mut sums = vec![(0usize, vec![0.0; k - 1], 0.0); n_clusters];
        for (i, r) in records.iter().enumerate() {
            let g = &mut sums[cluster_of[&r.subject_id]];
            g.0 += 1;
            for c in 0..k - 1 {
                g.1[c] += x[(i, c)];
            }
            g.2 += y[i];
        }
        let grand_x: Vec<f64> = (0..k - 1).map(|c| x.column(c).mean()).collect();
        let grand_y = y.mean();
        for (i, r) in records.iter().enumerate() {
            let g = &sums[cluster_of[&r.subject_id]];
            let ng = g.0 as f64;
            for c in 0..k - 1 {
                x[(i, c)] = x[(i, c)] - g.1[c] / ng + grand_x[c];
            }
            y[i] = y[i] - g.2 / ng + grand_y;
        }
    }
    x.column_mut(k - 1).fill(1.0);

    let (beta, inv) = ols(&x, &y)?;
    let resid = &y - &x * &beta;
    let mut meat = DMatrix::<f64>::zeros(k, k);
    let mut scores = vec![DVector::<f64>::zeros(k); n_clusters];
    for (i, r) in records.iter().enumerate() {
        let s = &mut scores[cluster_of[&r.subject_id]];
        for c in 0..k {
            s[c] += x[(i, c)] * resid[i];
        }
    }
    for s in &scores {
        meat += s * s.transpose();
    }
    let (g, nf, kf) = (n_clusters as f64, n as f64, k as f64);
    let scale = g / (g - 1.0) * (nf - 1.0) / (nf - kf);
    let vcov = (&inv * meat * &inv) * scale;
    let est = |c: usize| Estimate {
        coef: beta[c],
        std_error: vcov[(c, c)].max(0.0).sqrt(),
    };
    let (price, bp) = if with_price { (Some(est(1)), est(2)) } else { (None, est(1)) };
    Ok(RegressionResult {
        fixed_effects,
        block: est(0),
        price,
        block_price: bp,
        constant: est(k - 1),
        n_observations: n,
        n_clusters,
    })
}
