//! Morphisms between barcodes as Hom-constrained matrices over GF(p).
//!
//! Entry `(j, i)` is the coefficient of the canonical generator from source bar `i` to target
//! bar `j`. It may be nonzero only when the degrees agree and the Hom between the two intervals
//! sits in degree 0; everything else is forced to zero.

use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::barcode::Barcode;
use crate::endpoint::{format_rational, parse_rational, Rational};
use crate::field::{Matrix, PrimeField};
use crate::interval::is_deg0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("entry ({row}, {col}) out of range for a {rows}x{cols} morphism")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("cannot compose: target of the first map differs from source of the second")]
    MismatchedMiddle,
    #[error("morphisms live over different fields (GF({0}) vs GF({1}))")]
    FieldMismatch(u32, u32),
    #[error("negative shift {0}")]
    NegativeShift(String),
    #[error("target is not the {0}-shift of the source")]
    NotAShift(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphism {
    source: Barcode,
    target: Barcode,
    field: PrimeField,
    matrix: Matrix,
}

/// Whether entry `(row, col)` can carry a nonzero coefficient.
pub fn allowed(source: &Barcode, target: &Barcode, row: usize, col: usize) -> bool {
    let s = source.bar(col);
    let t = target.bar(row);
    s.degree == t.degree && is_deg0(&s.interval, &t.interval)
}

impl Morphism {
    pub fn zero(source: Barcode, target: Barcode, field: PrimeField) -> Self {
        let matrix = Matrix::zeros(target.len(), source.len());
        Morphism {
            source,
            target,
            field,
            matrix,
        }
    }

    pub fn identity(barcode: &Barcode, field: PrimeField) -> Self {
        let n = barcode.len();
        Morphism {
            source: barcode.clone(),
            target: barcode.clone(),
            field,
            matrix: Matrix::identity(n),
        }
    }

    /// Wrap a matrix, zeroing entries that violate the Hom constraint.
    pub fn from_matrix(source: Barcode, target: Barcode, field: PrimeField, mut matrix: Matrix) -> Self {
        assert_eq!(matrix.rows, target.len(), "row count must match target");
        assert_eq!(matrix.cols, source.len(), "column count must match source");
        let nonzero: Vec<(usize, usize)> = matrix.nonzero_entries().map(|(r, c, _)| (r, c)).collect();
        for (r, c) in nonzero {
            if !allowed(&source, &target, r, c) {
                matrix.set(r, c, 0);
            }
        }
        Morphism {
            source,
            target,
            field,
            matrix,
        }
    }

    pub fn source(&self) -> &Barcode {
        &self.source
    }

    pub fn target(&self) -> &Barcode {
        &self.target
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.matrix.get(row, col)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// `T_c` applied to the morphism: same matrix between shifted barcodes.
    pub fn shifted(&self, c: &Rational) -> Morphism {
        Morphism {
            source: self.source.shift(c),
            target: self.target.shift(c),
            field: self.field,
            matrix: self.matrix.clone(),
        }
    }

    /// Restrict to the given source bars (columns), in increasing index order.
    pub fn restrict_source(&self, cols: &[usize]) -> Morphism {
        Morphism {
            source: self.source.select(cols),
            target: self.target.clone(),
            field: self.field,
            matrix: self.matrix.select_cols(cols),
        }
    }

    /// Compose with the projection onto the given target bars (rows), in increasing index order.
    pub fn restrict_target(&self, rows: &[usize]) -> Morphism {
        Morphism {
            source: self.source.clone(),
            target: self.target.select(rows),
            field: self.field,
            matrix: self.matrix.select_rows(rows),
        }
    }

    /// Same matrix, reinterpreted against a new target (re-masked).
    pub fn retarget(&self, target: Barcode) -> Morphism {
        Morphism::from_matrix(self.source.clone(), target, self.field, self.matrix.clone())
    }

    /// Same matrix, reinterpreted against a new source (re-masked).
    pub fn resource(&self, source: Barcode) -> Morphism {
        Morphism::from_matrix(source, self.target.clone(), self.field, self.matrix.clone())
    }

    /// The injection read off a diagonal morphism: for every source bar the unique target row
    /// holding a `1`, provided no other entries are nonzero. `None` if the shape is not diagonal.
    pub fn diagonal_matching(&self) -> Option<Vec<Option<usize>>> {
        let mut seen_rows = vec![false; self.target.len()];
        let mut out = vec![None; self.source.len()];
        for (r, c, v) in self.matrix.nonzero_entries() {
            if v != 1 || seen_rows[r] || out[c].is_some() {
                return None;
            }
            seen_rows[r] = true;
            out[c] = Some(r);
        }
        Some(out)
    }

    /// Inverse of an automorphism, if it exists.
    pub fn inverse(&self) -> Option<Morphism> {
        if self.source != self.target {
            return None;
        }
        let inv = self.matrix.inverse(&self.field)?;
        // Allowed supports form an incidence algebra, so the inverse needs no masking; we
        // still pass through from_matrix for the invariant.
        Some(Morphism::from_matrix(
            self.target.clone(),
            self.source.clone(),
            self.field,
            inv,
        ))
    }

    /// Emit the morphism text format with the given header values.
    pub fn to_text(&self, source_path: &str, target_path: &str, shift: &Rational) -> String {
        let mut out = format!(
            "source: {source_path}\ntarget: {target_path}\nshift: {}\n",
            format_rational(shift)
        );
        for (r, c, v) in self.matrix.nonzero_entries() {
            out.push_str(&format!("{r} {c} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} -> {} over GF({})", self.source, self.target, self.field.characteristic())?;
        for (r, c, v) in self.matrix.nonzero_entries() {
            writeln!(f, "  {} -> {} : {}", self.source.bar(c), self.target.bar(r), v)?;
        }
        Ok(())
    }
}

/// Build a morphism from `(target_index, source_index, scalar)` triples.
///
/// Entries violating the Hom constraint are zeroed and reported back.
pub fn make_morphism(
    source: &Barcode,
    target: &Barcode,
    entries: &[(usize, usize, i64)],
    field: PrimeField,
) -> Result<(Morphism, Vec<(usize, usize)>), MorphismError> {
    let mut matrix = Matrix::zeros(target.len(), source.len());
    let mut zeroed = Vec::new();
    for &(row, col, value) in entries {
        if row >= target.len() || col >= source.len() {
            return Err(MorphismError::IndexOutOfRange {
                row,
                col,
                rows: target.len(),
                cols: source.len(),
            });
        }
        let v = field.reduce(value);
        if v == 0 {
            continue;
        }
        if allowed(source, target, row, col) {
            matrix.set(row, col, v);
        } else {
            zeroed.push((row, col));
        }
    }
    let m = Morphism {
        source: source.clone(),
        target: target.clone(),
        field,
        matrix,
    };
    Ok((m, zeroed))
}

/// `g . f`: first `f: A -> B`, then `g: B -> C`.
///
/// An entry survives only if the outer generator from `A_i` to `C_k` is itself nonzero.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism, MorphismError> {
    if f.field != g.field {
        return Err(MorphismError::FieldMismatch(
            f.field.characteristic(),
            g.field.characteristic(),
        ));
    }
    if f.target != g.source {
        return Err(MorphismError::MismatchedMiddle);
    }
    let product = g.matrix.mul(&f.matrix, &f.field);
    Ok(Morphism::from_matrix(
        f.source.clone(),
        g.target.clone(),
        f.field,
        product,
    ))
}

/// The Tamarkin morphism `B -> T_c B`: identity on bars longer than `c`, zero elsewhere.
pub fn tau(barcode: &Barcode, c: &Rational, field: PrimeField) -> Result<Morphism, MorphismError> {
    if c.is_negative() {
        return Err(MorphismError::NegativeShift(format_rational(c)));
    }
    let target = barcode.shift(c);
    let mut matrix = Matrix::zeros(barcode.len(), barcode.len());
    for (i, bar) in barcode.bars().iter().enumerate() {
        if is_deg0(&bar.interval, target.interval(i)) {
            matrix.set(i, i, 1);
        }
    }
    Ok(Morphism {
        source: barcode.clone(),
        target,
        field,
        matrix,
    })
}

/// Whether `f` is exactly the Tamarkin morphism by `c` on its source.
pub fn equals_tau(f: &Morphism, c: &Rational) -> Result<bool, MorphismError> {
    if f.target != f.source.shift(c) {
        return Err(MorphismError::NotAShift(format_rational(c)));
    }
    let t = tau(&f.source, c, f.field)?;
    Ok(t.matrix == f.matrix)
}

/// Parsed contents of a morphism file; barcodes are resolved by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismSpec {
    pub source_path: String,
    pub target_path: String,
    pub shift: Rational,
    pub entries: Vec<(usize, usize, i64)>,
}

impl MorphismSpec {
    pub fn parse(text: &str) -> Result<MorphismSpec, MorphismError> {
        let err = |line: usize, message: String| MorphismError::Parse { line, message };
        let mut source_path = None;
        let mut target_path = None;
        let mut shift = None;
        let mut entries = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some((key, value)) = content.split_once(':') {
                let value = value.trim().to_string();
                match key.trim() {
                    "source" => source_path = Some(value),
                    "target" => target_path = Some(value),
                    "shift" => {
                        shift = Some(parse_rational(&value).map_err(|e| err(line, e.to_string()))?)
                    }
                    other => return Err(err(line, format!("unknown header `{other}`"))),
                }
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(line, format!("expected `<tgt> <src> <scalar>`, got `{content}`")));
            }
            let row = fields[0]
                .parse()
                .map_err(|_| err(line, format!("bad index `{}`", fields[0])))?;
            let col = fields[1]
                .parse()
                .map_err(|_| err(line, format!("bad index `{}`", fields[1])))?;
            let value = fields[2]
                .parse()
                .map_err(|_| err(line, format!("bad scalar `{}`", fields[2])))?;
            entries.push((row, col, value));
        }
        Ok(MorphismSpec {
            source_path: source_path.ok_or_else(|| err(0, "missing `source:` header".into()))?,
            target_path: target_path.ok_or_else(|| err(0, "missing `target:` header".into()))?,
            shift: shift.unwrap_or_default(),
            entries,
        })
    }

    /// Build the morphism `source -> shift(target, c)`.
    pub fn resolve(
        &self,
        source: &Barcode,
        target: &Barcode,
        field: PrimeField,
    ) -> Result<(Morphism, Vec<(usize, usize)>), MorphismError> {
        make_morphism(source, &target.shift(&self.shift), &self.entries, field)
    }
}
