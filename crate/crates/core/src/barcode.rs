//! Graded barcodes and their text format.
//!
//! A barcode is kept as a sorted list of bars with multiplicity expanded, so that a bar's
//! position in the list is its index in morphism matrices.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::endpoint::{Endpoint, Rational};
use crate::interval::{Interval, IntervalError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bar {
    pub degree: i32,
    pub interval: Interval,
}

impl Bar {
    pub fn new(degree: i32, interval: Interval) -> Self {
        Bar { degree, interval }
    }

    pub fn lo(&self) -> &Endpoint {
        self.interval.lo()
    }

    pub fn hi(&self) -> &Endpoint {
        self.interval.hi()
    }
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.degree, self.interval)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BarcodeParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

fn line_err(line: usize, message: impl Into<String>) -> BarcodeParseError {
    BarcodeParseError::Line {
        line,
        message: message.into(),
    }
}

/// Finite multiset of bars in canonical `(degree, lo, hi)` order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Barcode {
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn empty() -> Self {
        Barcode::default()
    }

    pub fn from_bars(mut bars: Vec<Bar>) -> Self {
        bars.sort();
        Barcode { bars }
    }

    /// All bars in one degree.
    pub fn from_intervals(degree: i32, intervals: impl IntoIterator<Item = Interval>) -> Self {
        Barcode::from_bars(intervals.into_iter().map(|i| Bar::new(degree, i)).collect())
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn bar(&self, index: usize) -> &Bar {
        &self.bars[index]
    }

    pub fn interval(&self, index: usize) -> &Interval {
        &self.bars[index].interval
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn degrees(&self) -> BTreeSet<i32> {
        self.bars.iter().map(|b| b.degree).collect()
    }

    /// The single degree of a nonempty degree-pure barcode.
    pub fn pure_degree(&self) -> Option<i32> {
        let degrees = self.degrees();
        if degrees.len() == 1 {
            degrees.into_iter().next()
        } else {
            None
        }
    }

    pub fn is_degree_pure(&self) -> bool {
        self.degrees().len() <= 1
    }

    pub fn in_degree(&self, degree: i32) -> Barcode {
        Barcode {
            bars: self.bars.iter().filter(|b| b.degree == degree).cloned().collect(),
        }
    }

    /// Bars at the given indices, re-sorted.
    pub fn select(&self, indices: &[usize]) -> Barcode {
        Barcode::from_bars(indices.iter().map(|&i| self.bars[i].clone()).collect())
    }

    pub fn union(&self, other: &Barcode) -> Barcode {
        Barcode::from_bars(self.bars.iter().chain(other.bars.iter()).cloned().collect())
    }

    /// Translate every bar by `c`; infinite endpoints stay put.
    pub fn shift(&self, c: &Rational) -> Barcode {
        // translation preserves the canonical order
        Barcode {
            bars: self
                .bars
                .iter()
                .map(|b| Bar::new(b.degree, b.interval.shifted(c)))
                .collect(),
        }
    }

    /// Distinct bars with their multiplicities, in canonical order.
    pub fn grouped(&self) -> Vec<(Bar, usize)> {
        let mut out: Vec<(Bar, usize)> = Vec::new();
        for bar in &self.bars {
            match out.last_mut() {
                Some((last, count)) if last == bar => *count += 1,
                _ => out.push((bar.clone(), 1)),
            }
        }
        out
    }

    /// Every finite endpoint, sorted and deduplicated.
    pub fn finite_endpoints(&self) -> Vec<Rational> {
        let set: BTreeSet<Rational> = self
            .bars
            .iter()
            .flat_map(|b| [b.lo(), b.hi()])
            .filter_map(|e| e.finite().cloned())
            .collect();
        set.into_iter().collect()
    }

    /// The text format: one `<degree> <lo> <hi> [multiplicity]` line per distinct bar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (bar, count) in self.grouped() {
            out.push_str(&format!("{} {} {}", bar.degree, bar.lo(), bar.hi()));
            if count > 1 {
                out.push_str(&format!(" {count}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Barcode, BarcodeParseError> {
        let mut bars = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(line_err(
                    line,
                    format!("expected `<degree> <lo> <hi> [multiplicity]`, got `{content}`"),
                ));
            }
            let degree: i32 = fields[0]
                .parse()
                .map_err(|_| line_err(line, format!("unknown token `{}` for degree", fields[0])))?;
            let lo: Endpoint = fields[1]
                .parse()
                .map_err(|e| line_err(line, format!("{e}")))?;
            let hi: Endpoint = fields[2]
                .parse()
                .map_err(|e| line_err(line, format!("{e}")))?;
            let interval = Interval::new(lo, hi).map_err(|e| match e {
                IntervalError::Empty { .. } => line_err(line, "empty interval"),
                other => line_err(line, other.to_string()),
            })?;
            let count: usize = match fields.get(3) {
                Some(tok) => tok
                    .parse()
                    .ok()
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| line_err(line, format!("bad multiplicity `{tok}`")))?,
                None => 1,
            };
            for _ in 0..count {
                bars.push(Bar::new(degree, interval.clone()));
            }
        }
        Ok(Barcode::from_bars(bars))
    }
}

impl FromStr for Barcode {
    type Err = BarcodeParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Barcode::parse_text(s)
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, bar) in self.bars.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{bar}")?;
        }
        f.write_str("}")
    }
}

/// Largest bar length: `0` for the empty barcode and `+inf` as soon as one bar is unbounded.
pub fn gamma_to_zero(barcode: &Barcode) -> Endpoint {
    barcode
        .bars()
        .iter()
        .map(|b| b.interval.length())
        .max()
        .unwrap_or_else(Endpoint::zero)
}
