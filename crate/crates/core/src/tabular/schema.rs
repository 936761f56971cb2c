//! Table schemas and row values.

use serde::{Deserialize, Serialize};

use super::{Result, TabularError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numerical,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSpec {
    pub fn numerical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numerical,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: categories.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Index of a category name, if present.
    pub fn category_index(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }
}

/// Ordered column specification for one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<ColumnSpec>,
}

impl TableSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Self { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(TabularError::Schema("schema has no columns".into()));
        }
        for (i, col) in self.columns.iter().enumerate() {
            if self.columns[..i].iter().any(|c| c.name == col.name) {
                return Err(TabularError::Schema(format!(
                    "duplicate column name '{}'",
                    col.name
                )));
            }
            match col.kind {
                ColumnKind::Numerical => {
                    if !col.categories.is_empty() {
                        return Err(TabularError::Schema(format!(
                            "numerical column '{}' lists categories",
                            col.name
                        )));
                    }
                }
                ColumnKind::Categorical => {
                    if col.categories.len() < 2 {
                        return Err(TabularError::Schema(format!(
                            "categorical column '{}' needs at least 2 categories",
                            col.name
                        )));
                    }
                    for (j, c) in col.categories.iter().enumerate() {
                        if col.categories[..j].contains(c) {
                            return Err(TabularError::Schema(format!(
                                "column '{}': duplicate category '{c}'",
                                col.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Encoded dimension: one slot per numerical column plus a one-hot block
    /// per categorical column, in schema order.
    pub fn encoded_dim(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Numerical => 1,
                ColumnKind::Categorical => c.categories.len(),
            })
            .sum()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Checks that a row matches this schema (width, kinds, known categories,
    /// finite numbers).
    pub fn check_row(&self, row: &Row) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(TabularError::RowLength {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        for (col, cell) in self.columns.iter().zip(row) {
            match (col.kind, cell) {
                (ColumnKind::Numerical, CellValue::Number(v)) => {
                    if !v.is_finite() {
                        return Err(TabularError::NonFinite {
                            column: col.name.clone(),
                        });
                    }
                }
                (ColumnKind::Categorical, CellValue::Category(value)) => {
                    if col.category_index(value).is_none() {
                        return Err(TabularError::UnknownCategory {
                            column: col.name.clone(),
                            value: value.clone(),
                        });
                    }
                }
                (ColumnKind::Numerical, CellValue::Category(_)) => {
                    return Err(TabularError::Schema(format!(
                        "column '{}': expected a number",
                        col.name
                    )))
                }
                (ColumnKind::Categorical, CellValue::Number(_)) => {
                    return Err(TabularError::Schema(format!(
                        "column '{}': expected a category",
                        col.name
                    )))
                }
            }
        }
        Ok(())
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Number(f64),
    Category(String),
}

/// One table row, in schema column order.
pub type Row = Vec<CellValue>;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn demo_schema() -> TableSchema {
        TableSchema::new(vec![
            ColumnSpec::numerical("age"),
            ColumnSpec::categorical("color", &["a", "b", "c"]),
            ColumnSpec::numerical("height"),
        ])
        .unwrap()
    }

    #[test]
    fn encoded_dim_counts_one_hot_blocks() {
        assert_eq!(demo_schema().encoded_dim(), 1 + 3 + 1);
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = TableSchema::new(vec![
            ColumnSpec::numerical("x"),
            ColumnSpec::numerical("x"),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("duplicate column name"));
    }

    #[test]
    fn single_category_rejected() {
        let err = TableSchema::new(vec![ColumnSpec::categorical("k", &["only"])]).unwrap_err();
        assert!(err.to_string().contains("at least 2"));
    }

    #[test]
    fn check_row_flags_unknown_category() {
        let schema = demo_schema();
        let row = vec![
            CellValue::Number(1.0),
            CellValue::Category("zzz".into()),
            CellValue::Number(2.0),
        ];
        assert!(matches!(
            schema.check_row(&row),
            Err(TabularError::UnknownCategory { .. })
        ));
    }
}
