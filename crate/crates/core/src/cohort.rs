//! Synthetic experiment cohorts: per-product switch points in both blocks.
//!
//! Seeds: subject `i` (0-based position in the profile list) draws from a ChaCha8 stream
//! seeded with `splitmix64(master_seed + (i + 1) * 0x9E3779B97F4A7C15)`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::elicit::{elicit_rowscan, Clamp, MplSpec, Scenario, ScenarioKind};
use crate::error::SimulationError;
use crate::model::ModelSpec;

/// Endowment in the p-block.
pub const P_BLOCK_ENDOWMENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    M,
    P,
}

impl Block {
    pub fn label(&self) -> &'static str {
        match self {
            Block::M => "m",
            Block::P => "p",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "m" => Some(Block::M),
            "p" => Some(Block::P),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Treatment {
    Mp,
    Pm,
}

impl Treatment {
    pub fn label(&self) -> &'static str {
        match self {
            Treatment::Mp => "mp",
            Treatment::Pm => "pm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mp" => Some(Treatment::Mp),
            "pm" => Some(Treatment::Pm),
            _ => None,
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub id: u32,
    pub name: String,
    pub market_price: f64,
}

/// Thirty snack products with illustrative retail prices in dollars.
pub fn default_catalog() -> Vec<Product> {
    const SNACKS: [(&str, f64); 30] = [
        ("Bare Fuji & Reds Apple Chips (3.4 oz)", 4.99),
        ("Cheetos Crunchy (8.5 oz)", 4.29),
        ("Cheez-It Original (12.4 oz)", 4.99),
        ("Chips Ahoy Original (13 oz)", 4.49),
        ("Coke (12 fl oz)", 1.25),
        ("Coke Zero Sugar (12 fl oz)", 1.25),
        ("Doritos Nacho Cheese (9.25 oz)", 4.79),
        ("Flipz Milk Chocolate Pretzels (7.5 oz)", 3.99),
        ("Goldfish Cheddar (6.6 oz)", 2.99),
        ("Haribo Gummi Candy (8 oz)", 2.49),
        ("Hershey's Milk Chocolate (1.55 oz)", 1.49),
        ("Ice Breakers Ice Cubes Peppermint (3.24 oz)", 3.49),
        ("KIND Caramel Almond & Sea Salt (1.4 oz)", 1.99),
        ("KIND Dark Chocolate Nuts & Sea Salt (1.4 oz)", 1.99),
        ("Lay's Classic (8 oz)", 4.29),
        ("Lotus Biscoff Cookies (8.8 oz)", 3.79),
        ("Milano Double Dark Chocolate (7.5 oz)", 4.49),
        ("Milano Milk Chocolate (6 oz)", 4.49),
        ("M&M's Milk Chocolate (3.14 oz)", 1.89),
        ("OREO Chocolate Sandwich Cookies (14.3 oz)", 4.59),
        ("Pocky Chocolate Cream (2.47 oz)", 1.79),
        ("Pocky Strawberry Cream (2.47 oz)", 1.79),
        ("Pop-Tarts Frosted Cookies & Creme (13.5 oz)", 3.49),
        ("Pop-Tarts Frosted S'mores (13.5 oz)", 3.49),
        ("Pringles Original (5.2 oz)", 2.29),
        ("Pringles Sour Cream & Onion (5.5 oz)", 2.29),
        ("Skittles Original (2.17 oz)", 1.49),
        ("Snickers (1.86 oz)", 1.49),
        ("Sprite (12 fl oz)", 1.25),
        ("Twix (1.79 oz)", 1.49),
    ];
    SNACKS
        .iter()
        .enumerate()
        .map(|(i, &(name, price))| Product {
            id: i as u32 + 1,
            name: name.to_string(),
            market_price: price,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: u32,
    pub model: ModelSpec,
    /// One of the p-MPL scenarios.
    pub p_scenario: Scenario,
    pub true_qualities: BTreeMap<u32, f64>,
    pub noise_sd: f64,
    pub treatment: Treatment,
}

impl SubjectProfile {
    fn validate(&self, catalog: &[Product]) -> Result<(), SimulationError> {
        let invalid = |reason: String| SimulationError::InvalidProfile {
            subject_id: self.subject_id,
            reason,
        };
        if matches!(self.p_scenario.kind, ScenarioKind::MMoney) {
            return Err(invalid("p-block scenario must be a p-MPL scenario".into()));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(invalid(format!("noise_sd must be >= 0, got {}", self.noise_sd)));
        }
        for product in catalog {
            match self.true_qualities.get(&product.id) {
                Some(q) if q.is_finite() && *q >= 0.0 => {}
                Some(q) => return Err(invalid(format!("quality {q} for product {}", product.id))),
                None => return Err(invalid(format!("missing quality for product {}", product.id))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: u32,
    pub product_id: u32,
    pub treatment: Treatment,
    pub block: Block,
    pub switch_point: f64,
    pub market_price: f64,
}

impl SubjectRecord {
    pub fn key(&self) -> (u32, u32, Block) {
        (self.subject_id, self.product_id, self.block)
    }
}

/// Elicitation irregularity attached to one simulated record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDiagnostic {
    pub subject_id: u32,
    pub product_id: u32,
    pub block: Block,
    pub clamped: Clamp,
    pub crossing_count: usize,
    pub plateau: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<SubjectRecord>,
    pub diagnostics: Vec<RecordDiagnostic>,
}

impl Dataset {
    pub fn from_records(mut records: Vec<SubjectRecord>) -> Self {
        records.sort_by_key(|r| r.key());
        Self {
            records,
            diagnostics: Vec::new(),
        }
    }

    /// Checks that every (subject, product) has exactly one record per block,
    /// and that switch points lie on the cent grid in `[0.01, 10.00]`.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.key()) {
                return Err(format!(
                    "duplicate record for subject {} product {} block {}",
                    r.subject_id,
                    r.product_id,
                    r.block.label()
                ));
            }
            if !is_cent_value(r.switch_point) || r.switch_point < 0.01 || r.switch_point > 10.0 {
                return Err(format!("switch point {} off the cent grid [0.01, 10.00]", r.switch_point));
            }
        }
        for r in &self.records {
            let other = match r.block {
                Block::M => Block::P,
                Block::P => Block::M,
            };
            if !seen.contains(&(r.subject_id, r.product_id, other)) {
                return Err(format!(
                    "subject {} product {} lacks a {}-block record",
                    r.subject_id,
                    r.product_id,
                    other.label()
                ));
            }
        }
        Ok(())
    }

    pub fn subject_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.records.iter().map(|r| r.subject_id).collect();
        ids.dedup();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

pub fn is_cent_value(v: f64) -> bool {
    v.is_finite() && ((v * 100.0).round() - v * 100.0).abs() < 1e-6
}

/// Round half away from zero to cents.
pub fn round_to_cents(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the subject at position `index` of the cohort.
pub fn subject_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubjectSimulation {
    pub records: Vec<SubjectRecord>,
    pub diagnostics: Vec<RecordDiagnostic>,
}

pub fn simulate_subject(
    profile: &SubjectProfile,
    catalog: &[Product],
    mpl: &MplSpec,
    rng_seed: u64,
) -> Result<SubjectSimulation, SimulationError> {
    profile.validate(catalog)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let noise = if profile.noise_sd > 0.0 {
        Some(Normal::new(0.0, profile.noise_sd).expect("sd validated"))
    } else {
        None
    };
    let m_scenario = Scenario::m_money();
    let mut out = SubjectSimulation::default();
    for product in catalog {
        let q = profile.true_qualities[&product.id];
        for (block, scenario) in [(Block::M, &m_scenario), (Block::P, &profile.p_scenario)] {
            let result = elicit_rowscan(&profile.model, scenario, q, mpl)?;
            let base = result.switch_point.unwrap_or(mpl.max_value());
            let noisy = match &noise {
                Some(dist) => base + dist.sample(&mut rng),
                None => base,
            };
            let switch_point = round_to_cents(noisy).clamp(0.01, 10.0);
            if !result.is_regular() {
                out.diagnostics.push(RecordDiagnostic {
                    subject_id: profile.subject_id,
                    product_id: product.id,
                    block,
                    clamped: result.clamped,
                    crossing_count: result.crossing_count,
                    plateau: result.plateau,
                });
            }
            out.records.push(SubjectRecord {
                subject_id: profile.subject_id,
                product_id: product.id,
                treatment: profile.treatment,
                block,
                switch_point,
                market_price: product.market_price,
            });
        }
    }
    Ok(out)
}

pub fn simulate_cohort(
    profiles: &[SubjectProfile],
    catalog: &[Product],
    mpl: &MplSpec,
    master_seed: u64,
) -> Result<Dataset, SimulationError> {
    if profiles.is_empty() {
        return Err(SimulationError::EmptyCohort);
    }
    let mut ids = HashSet::new();
    for p in profiles {
        if !ids.insert(p.subject_id) {
            return Err(SimulationError::DuplicateSubject(p.subject_id));
        }
    }
    let sims = profiles
        .par_iter()
        .enumerate()
        .map(|(i, p)| simulate_subject(p, catalog, mpl, subject_seed(master_seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dataset = Dataset::default();
    for sim in sims {
        dataset.records.extend(sim.records);
        dataset.diagnostics.extend(sim.diagnostics);
    }
    dataset.records.sort_by_key(|r| r.key());
    dataset
        .diagnostics
        .sort_by_key(|d| (d.subject_id, d.product_id, d.block));
    Ok(dataset)
}

/// How true qualities are assigned when building a cohort.
#[derive(Debug, Clone, PartialEq)]
pub enum QualityDraw {
    /// The same list for every subject, in catalog order.
    Fixed(Vec<f64>),
    /// Independent uniform draws on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

/// Settings for building a homogeneous cohort of profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub subjects: usize,
    pub model: ModelSpec,
    pub p_scenario: Scenario,
    pub qualities: QualityDraw,
    pub noise_sd: f64,
    /// Number of subjects assigned to the mp treatment; the rest are pm.
    pub mp_subjects: usize,
}

/// Builds profiles with ids `1..=subjects`. Uniform qualities are drawn from a stream seeded
/// with `splitmix64(master_seed ^ 0x51A1_17E5)`, independent of the noise streams.
pub fn build_profiles(
    config: &CohortConfig,
    catalog: &[Product],
    master_seed: u64,
) -> Result<Vec<SubjectProfile>, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ 0x51A1_17E5));
    (0..config.subjects)
        .map(|i| {
            let subject_id = i as u32 + 1;
            let true_qualities = match &config.qualities {
                QualityDraw::Fixed(list) => {
                    if list.len() != catalog.len() {
                        return Err(SimulationError::InvalidProfile {
                            subject_id,
                            reason: format!(
                                "{} fixed qualities for {} products",
                                list.len(),
                                catalog.len()
                            ),
                        });
                    }
                    catalog.iter().map(|p| p.id).zip(list.iter().copied()).collect()
                }
                QualityDraw::Uniform { lo, hi } => catalog
                    .iter()
                    .map(|p| (p.id, rng.random_range(*lo..=*hi)))
                    .collect(),
            };
            Ok(SubjectProfile {
                subject_id,
                model: config.model,
                p_scenario: config.p_scenario.clone(),
                true_qualities,
                noise_sd: config.noise_sd,
                treatment: if i < config.mp_subjects {
                    Treatment::Mp
                } else {
                    Treatment::Pm
                },
            })
        })
        .collect()
}
