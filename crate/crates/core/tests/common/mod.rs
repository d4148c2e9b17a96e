//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiprice::cohort::{Block, Dataset, SubjectRecord, Treatment};
use multiprice::stats::FixedEffects;

/// Row `n` of Pascal's triangle in u128 (exact for n <= 127).
pub fn pascal_row(n: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// `sum_{j >= k} C(n, j)` from the triangle.
pub fn pascal_tail(n: usize, k: usize) -> u128 {
    pascal_row(n)[k..].iter().sum()
}

/// Coefficients `(block, price, block_x_price, constant)` from explicit dummy-variable
/// regression solved through the normal equations. Subject dummies are all included (no
/// intercept); the reported constant is their observation-weighted mean.
pub fn dummy_ols(dataset: &Dataset, fe: FixedEffects) -> (f64, Option<f64>, f64, f64) {
    let recs = &dataset.records;
    let subjects: Vec<u32> = dataset.subject_ids();
    let sidx: BTreeMap<u32, usize> = subjects.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut products: Vec<u32> = recs.iter().map(|r| r.product_id).collect();
    products.sort_unstable();
    products.dedup();
    let pidx: BTreeMap<u32, usize> = products.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    let with_price = fe != FixedEffects::SubjectProduct;
    let n_subj = if fe == FixedEffects::None { 0 } else { subjects.len() };
    let n_prod = if fe == FixedEffects::SubjectProduct { products.len() - 1 } else { 0 };
    let slopes = 2 + with_price as usize;
    let k = slopes + if fe == FixedEffects::None { 1 } else { n_subj } + n_prod;
    let mut x = DMatrix::<f64>::zeros(recs.len(), k);
    let mut y = DVector::<f64>::zeros(recs.len());
    for (i, r) in recs.iter().enumerate() {
        let b = (r.block == Block::P) as u8 as f64;
        x[(i, 0)] = b;
        let mut c = 1;
        if with_price {
            x[(i, c)] = r.market_price;
            c += 1;
        }
        x[(i, c)] = b * r.market_price;
        c += 1;
        if fe == FixedEffects::None {
            x[(i, c)] = 1.0;
        } else {
            x[(i, c + sidx[&r.subject_id])] = 1.0;
            let j = pidx[&r.product_id];
            if n_prod > 0 && j > 0 {
                x[(i, c + n_subj + j - 1)] = 1.0;
            }
        }
        y[i] = r.switch_point;
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let beta = xtx.lu().solve(&xty).expect("full rank fixture");
    let bxp = beta[slopes - 1];
    let price = with_price.then(|| beta[1]);
    let constant = if fe == FixedEffects::None {
        beta[slopes]
    } else {
        let mut counts = vec![0usize; n_subj];
        for r in recs {
            counts[sidx[&r.subject_id]] += 1;
        }
        (0..n_subj).map(|g| counts[g] as f64 * beta[slopes + g]).sum::<f64>() / recs.len() as f64
    };
    (beta[0], price, bxp, constant)
}

/// Random panel on the cent grid: `subjects x products x {m, p}`.
pub fn random_panel(seed: u64, subjects: u32, products: u32) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prices: Vec<f64> = (0..products).map(|_| rng.random_range(50..600) as f64 / 100.0).collect();
    let mut recs = Vec::new();
    for s in 1..=subjects {
        let treatment = if s % 2 == 1 { Treatment::Mp } else { Treatment::Pm };
        for j in 1..=products {
            for block in [Block::M, Block::P] {
                recs.push(SubjectRecord {
                    subject_id: s,
                    product_id: j,
                    treatment,
                    block,
                    switch_point: rng.random_range(1..=1000) as f64 / 100.0,
                    market_price: prices[j as usize - 1],
                });
            }
        }
    }
    Dataset::from_records(recs)
}

/// Panel where every p-block value is the m-block value minus one.
pub fn unit_shift_panel(seed: u64, subjects: u32, products: u32) -> Dataset {
    let mut d = random_panel(seed, subjects, products);
    let m: BTreeMap<(u32, u32), f64> = d
        .records
        .iter()
        .filter(|r| r.block == Block::M)
        .map(|r| ((r.subject_id, r.product_id), 1.0 + (r.switch_point * 0.9 * 100.0).round() / 100.0))
        .collect();
    for r in &mut d.records {
        let base = m[&(r.subject_id, r.product_id)];
        r.switch_point = match r.block {
            Block::M => base,
            Block::P => ((base - 1.0) * 100.0).round() / 100.0,
        };
    }
    d
}
