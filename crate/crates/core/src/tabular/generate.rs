//! Synthetic population generation from a Gaussian-mixture specification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::schema::{CellValue, ColumnKind, Row, TableSchema};
use super::{Result, TabularError};

const WEIGHT_TOL: f64 = 1e-9;

/// One mixture component: a Gaussian per numerical column and a categorical
/// distribution per categorical column, both in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub numerical_means: Vec<f64>,
    pub numerical_stds: Vec<f64>,
    pub categorical_probs: Vec<Vec<f64>>,
}

/// Population generator specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub schema: TableSchema,
    pub n_rows: usize,
    pub components: Vec<MixtureComponent>,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        if self.components.is_empty() {
            return Err(TabularError::InvalidMixture("no components".into()));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(TabularError::InvalidMixture(format!(
                "component weights sum to {total}, expected 1"
            )));
        }
        let n_num = self
            .schema
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Numerical)
            .count();
        let cat_sizes: Vec<usize> = self
            .schema
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.categories.len())
            .collect();
        for (i, comp) in self.components.iter().enumerate() {
            if comp.weight < 0.0 {
                return Err(TabularError::InvalidMixture(format!(
                    "component {i} has negative weight"
                )));
            }
            if comp.numerical_means.len() != n_num || comp.numerical_stds.len() != n_num {
                return Err(TabularError::InvalidMixture(format!(
                    "component {i}: expected {n_num} numerical mean/std pairs"
                )));
            }
            if comp.numerical_stds.iter().any(|&s| s < 0.0) {
                return Err(TabularError::InvalidMixture(format!(
                    "component {i}: negative std"
                )));
            }
            if comp.categorical_probs.len() != cat_sizes.len() {
                return Err(TabularError::InvalidMixture(format!(
                    "component {i}: expected {} categorical distributions",
                    cat_sizes.len()
                )));
            }
            for (probs, &size) in comp.categorical_probs.iter().zip(&cat_sizes) {
                if probs.len() != size {
                    return Err(TabularError::InvalidMixture(format!(
                        "component {i}: categorical distribution width {} != {size}",
                        probs.len()
                    )));
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > WEIGHT_TOL || probs.iter().any(|&p| p < 0.0) {
                    return Err(TabularError::InvalidMixture(format!(
                        "component {i}: category probabilities sum to {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draws `n_rows` rows, reproducibly for a fixed seed.
///
/// Per row the draw order is: component index, then one value per column in
/// schema order.
pub fn generate_synthetic_population(config: &GeneratorConfig, seed: u64) -> Result<Vec<Row>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(config.n_rows);
    for _ in 0..config.n_rows {
        let comp = &config.components[pick_weighted(
            &mut rng,
            config.components.iter().map(|c| c.weight),
        )];
        let mut row = Vec::with_capacity(config.schema.columns.len());
        let mut num_idx = 0;
        let mut cat_idx = 0;
        for col in &config.schema.columns {
            match col.kind {
                ColumnKind::Numerical => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    row.push(CellValue::Number(
                        comp.numerical_means[num_idx] + comp.numerical_stds[num_idx] * z,
                    ));
                    num_idx += 1;
                }
                ColumnKind::Categorical => {
                    let k = pick_weighted(
                        &mut rng,
                        comp.categorical_probs[cat_idx].iter().copied(),
                    );
                    row.push(CellValue::Category(col.categories[k].clone()));
                    cat_idx += 1;
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Samples an index proportionally to the given weights via a cumulative scan.
fn pick_weighted<R: Rng>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let total: f64 = weights.clone().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
