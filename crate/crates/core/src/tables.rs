//! The reference tables: the law of `V_N` for geometric offspring with mean
//! 13, Poisson offspring with mean 13, and 1-or-14 offspring with
//! `p = 0.93`, each for several `N`, rounded to two decimals.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dist::{pmf_closed_form, PmfTable};
use crate::error::{Error, Result};
use crate::offspring::{LawSpec, OffspringLaw};

/// Rounds half away from zero to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0 + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableId {
    Geometric = 1,
    Poisson = 2,
    OneOrFourteen = 3,
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::Geometric, TableId::Poisson, TableId::OneOrFourteen];

    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(TableId::Geometric),
            2 => Ok(TableId::Poisson),
            3 => Ok(TableId::OneOrFourteen),
            _ => Err(Error::ParamOutOfRange(format!("no table {k}; expected 1, 2 or 3"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn law(self) -> OffspringLaw {
        let spec = match self {
            TableId::Geometric => LawSpec::Geometric { p: 13.0 / 14.0 },
            TableId::Poisson => LawSpec::Poisson { m: 13.0 },
            TableId::OneOrFourteen => LawSpec::OneOrMany { p: 0.93, r: 14 },
        };
        OffspringLaw::new(spec).expect("reference laws are valid")
    }

    pub fn arities(self) -> std::ops::RangeInclusive<usize> {
        match self {
            TableId::Geometric => 1..=5,
            _ => 2..=5,
        }
    }

    /// Number of single-value columns `P(V_N = j)`.
    pub fn value_columns(self) -> usize {
        match self {
            TableId::OneOrFourteen => 8,
            _ => 10,
        }
    }

    /// Whether a `P(V_N >= value_columns)` column is printed.
    pub fn has_tail_column(self) -> bool {
        !matches!(self, TableId::OneOrFourteen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub arity: usize,
    pub pmf: PmfTable,
}

impl TableRow {
    /// Printed cells: the rounded probabilities, the tail column if any and
    /// the rounded mean.
    ///
    /// The tail cell is one minus the sum of the rounded probabilities so
    /// that each printed row adds up to one.
    pub fn cells(&self, id: TableId) -> Vec<f64> {
        let cols = id.value_columns();
        let mut cells: Vec<f64> = (0..cols).map(|j| round2(self.pmf.prob(j))).collect();
        if id.has_tail_column() {
            let shown: f64 = cells.iter().sum();
            cells.push(round2(1.0 - shown));
        }
        cells.push(round2(self.pmf.mean));
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceTable {
    pub id: TableId,
    pub rows: Vec<TableRow>,
}

impl ReferenceTable {
    pub fn header(&self) -> Vec<String> {
        let cols = self.id.value_columns();
        let mut h = vec!["N".to_string()];
        h.extend((0..cols).map(|j| j.to_string()));
        if self.id.has_tail_column() {
            h.push(format!(">={cols}"));
        }
        h.push("E".to_string());
        h
    }

    pub fn row(&self, arity: usize) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.arity == arity)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            write!(out, "{}", row.arity).unwrap();
            for c in row.cells(self.id) {
                write!(out, ",{c:.2}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn reproduce_table(id: TableId) -> Result<ReferenceTable> {
    let law = id.law();
    let rows = id
        .arities()
        .map(|arity| Ok(TableRow { arity, pmf: pmf_closed_form(&law, arity)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReferenceTable { id, rows })
}
