//! Row encoding: standardized numericals, one-hot categoricals.

use serde::{Deserialize, Serialize};

use super::schema::{CellValue, ColumnKind, Row, TableSchema};
use super::{Result, RowId, TabularError};

/// Fitted mean/std for one numerical column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalStats {
    pub column: String,
    pub mean: f64,
    pub std: f64,
}

/// Standardization statistics, fitted on a designated split.
///
/// Standard deviations use the population convention (divide by N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderStats {
    pub numerical: Vec<NumericalStats>,
}

/// A row encoded as a fixed-length real vector. Slots follow schema column
/// order: one standardized slot per numerical column, a one-hot block per
/// categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedRecord {
    pub vector: Vec<f64>,
    pub source_row_id: RowId,
}

/// Fits per-column standardization statistics.
pub fn fit_encoder(schema: &TableSchema, rows: &[Row]) -> Result<EncoderStats> {
    if rows.len() < 2 {
        return Err(TabularError::TooFewRows(format!(
            "fit_encoder needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    for row in rows {
        schema.check_row(row)?;
    }
    let n = rows.len() as f64;
    let mut numerical = Vec::new();
    for (idx, col) in schema.columns.iter().enumerate() {
        if col.kind != ColumnKind::Numerical {
            continue;
        }
        let values = rows.iter().map(|r| match &r[idx] {
            CellValue::Number(v) => *v,
            CellValue::Category(_) => unreachable!("rows checked against schema"),
        });
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std <= 0.0 {
            return Err(TabularError::ZeroVariance {
                column: col.name.clone(),
            });
        }
        numerical.push(NumericalStats {
            column: col.name.clone(),
            mean,
            std,
        });
    }
    Ok(EncoderStats { numerical })
}

/// Encodes a schema-valid row into its vector form.
pub fn encode(
    schema: &TableSchema,
    stats: &EncoderStats,
    row: &Row,
    source_row_id: RowId,
) -> Result<EncodedRecord> {
    schema.check_row(row)?;
    let mut vector = Vec::with_capacity(schema.encoded_dim());
    let mut num_idx = 0;
    for (col, cell) in schema.columns.iter().zip(row) {
        match (col.kind, cell) {
            (ColumnKind::Numerical, CellValue::Number(v)) => {
                let s = &stats.numerical[num_idx];
                debug_assert_eq!(s.column, col.name, "stats fitted on a different schema");
                vector.push((v - s.mean) / s.std);
                num_idx += 1;
            }
            (ColumnKind::Categorical, CellValue::Category(value)) => {
                let hot = col
                    .category_index(value)
                    .expect("row checked against schema");
                for k in 0..col.categories.len() {
                    vector.push(if k == hot { 1.0 } else { 0.0 });
                }
            }
            _ => unreachable!("row checked against schema"),
        }
    }
    Ok(EncodedRecord {
        vector,
        source_row_id,
    })
}

/// Inverts [`encode`]: de-standardizes numericals and snaps each one-hot
/// block to its argmax, ties broken by the lowest category index.
pub fn decode(schema: &TableSchema, stats: &EncoderStats, vector: &[f64]) -> Result<Row> {
    if vector.len() != schema.encoded_dim() {
        return Err(TabularError::VectorLength {
            expected: schema.encoded_dim(),
            got: vector.len(),
        });
    }
    let mut row = Vec::with_capacity(schema.columns.len());
    let mut cursor = 0;
    let mut num_idx = 0;
    for col in &schema.columns {
        match col.kind {
            ColumnKind::Numerical => {
                let s = &stats.numerical[num_idx];
                row.push(CellValue::Number(s.mean + s.std * vector[cursor]));
                cursor += 1;
                num_idx += 1;
            }
            ColumnKind::Categorical => {
                let block = &vector[cursor..cursor + col.categories.len()];
                let mut best = 0;
                for (k, &v) in block.iter().enumerate() {
                    if v > block[best] {
                        best = k;
                    }
                }
                row.push(CellValue::Category(col.categories[best].clone()));
                cursor += col.categories.len();
            }
        }
    }
    Ok(row)
}
