//! Mapping cones of barcode morphisms.
//!
//! For a morphism `u: F -> G` between sums of interval sheaves the cone splits as the cokernel
//! (in the degree of the bars) plus the kernel shifted up by one degree. [`cone_diagonal`]
//! reads this off a diagonal morphism interval by interval; [`cone_barcode`] handles an
//! arbitrary morphism through stalk ranks on the common refinement of all endpoints.

use thiserror::Error;

use crate::barcode::{gamma_to_zero, Bar, Barcode};
use crate::endpoint::Endpoint;
use crate::field::{Matrix, PrimeField};
use crate::interval::Interval;
use crate::morphism::Morphism;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("morphism is not diagonal: column {col} or row {row} carries more than one entry")]
    NotDiagonal { row: usize, col: usize },
}

/// Cone of a morphism that is a direct sum of canonical generators and zero rows/columns.
pub fn cone_diagonal(m: &Morphism) -> Result<Barcode, ConeError> {
    let src = m.source();
    let tgt = m.target();
    let mut row_used = vec![false; tgt.len()];
    let mut col_match = vec![None; src.len()];
    for (r, c, _) in m.matrix().nonzero_entries() {
        if row_used[r] || col_match[c].is_some() {
            return Err(ConeError::NotDiagonal { row: r, col: c });
        }
        row_used[r] = true;
        col_match[c] = Some(r);
    }
    let mut bars = Vec::new();
    for (c, matched) in col_match.iter().enumerate() {
        let s = src.bar(c);
        match matched {
            Some(r) => {
                let t = tgt.bar(*r);
                // a <= c < b <= d is guaranteed by the Hom mask
                if s.hi() < t.hi() {
                    bars.push(Bar::new(s.degree, interval(s.hi(), t.hi())));
                }
                if s.lo() < t.lo() {
                    bars.push(Bar::new(s.degree + 1, interval(s.lo(), t.lo())));
                }
            }
            None => bars.push(Bar::new(s.degree + 1, s.interval.clone())),
        }
    }
    for (r, used) in row_used.iter().enumerate() {
        if !used {
            bars.push(tgt.bar(r).clone());
        }
    }
    Ok(Barcode::from_bars(bars))
}

fn interval(lo: &Endpoint, hi: &Endpoint) -> Interval {
    Interval::new(lo.clone(), hi.clone()).expect("cone pieces are nonempty")
}

/// Cone of an arbitrary morphism: cokernel bars in degree `d`, kernel bars in degree `d + 1`.
pub fn cone_barcode(m: &Morphism) -> Barcode {
    let field = m.field();
    let mut bars = Vec::new();
    let degrees: std::collections::BTreeSet<i32> =
        m.source().degrees().union(&m.target().degrees()).copied().collect();
    for d in degrees {
        let src_idx: Vec<usize> = indices_in_degree(m.source(), d);
        let tgt_idx: Vec<usize> = indices_in_degree(m.target(), d);
        let block = m.matrix().select_rows(&tgt_idx).select_cols(&src_idx);
        let src = m.source().select(&src_idx);
        let tgt = m.target().select(&tgt_idx);
        let grid = Grid::new(&src, &tgt);
        for interval in grid.kernel_bars(&src, &tgt, &block, &field) {
            bars.push(Bar::new(d + 1, interval));
        }
        for interval in grid.cokernel_bars(&src, &tgt, &block, &field) {
            bars.push(Bar::new(d, interval));
        }
    }
    Barcode::from_bars(bars)
}

/// `gamma(0, C(m))`: the longest bar of the cone.
pub fn cone_gamma(m: &Morphism) -> Endpoint {
    gamma_to_zero(&cone_barcode(m))
}

fn indices_in_degree(b: &Barcode, d: i32) -> Vec<usize> {
    b.bars()
        .iter()
        .enumerate()
        .filter(|(_, bar)| bar.degree == d)
        .map(|(i, _)| i)
        .collect()
}

/// Sample points `-inf < t_0 < ... < t_{m-1}`, one per cell of the common refinement.
struct Grid {
    points: Vec<Endpoint>,
}

impl Grid {
    fn new(src: &Barcode, tgt: &Barcode) -> Self {
        let mut points = vec![Endpoint::NegInf];
        points.extend(src.union(tgt).finite_endpoints().into_iter().map(Endpoint::Finite));
        Grid { points }
    }

    fn alive(b: &Barcode, t: &Endpoint) -> Vec<usize> {
        (0..b.len()).filter(|&i| b.interval(i).contains(t)).collect()
    }

    /// Stalk of the morphism at a sample point, as a matrix between live bars.
    fn stalk(block: &Matrix, src_alive: &[usize], tgt_alive: &[usize]) -> Matrix {
        block.select_rows(tgt_alive).select_cols(src_alive)
    }

    /// Bars from ranks of the structure maps `P_j -> P_i` (`i <= j`).
    fn decode(&self, rank: impl Fn(usize, usize) -> usize) -> Vec<Interval> {
        let n = self.points.len();
        let r = |i: isize, j: usize| -> isize {
            if i < 0 || j >= n {
                0
            } else {
                rank(i as usize, j) as isize
            }
        };
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mult = r(i as isize, j) - r(i as isize - 1, j) - r(i as isize, j + 1)
                    + r(i as isize - 1, j + 1);
                debug_assert!(mult >= 0, "negative multiplicity in rank decoding");
                let hi = self.points.get(j + 1).cloned().unwrap_or(Endpoint::PosInf);
                for _ in 0..mult.max(0) {
                    out.push(interval(&self.points[i], &hi));
                }
            }
        }
        out
    }

    fn kernel_bars(&self, src: &Barcode, tgt: &Barcode, block: &Matrix, field: &PrimeField) -> Vec<Interval> {
        let kernels: Vec<(Vec<usize>, Vec<Vec<u32>>)> = self
            .points
            .iter()
            .map(|t| {
                let sa = Self::alive(src, t);
                let ta = Self::alive(tgt, t);
                (sa.clone(), Self::stalk(block, &sa, &ta).nullspace(field))
            })
            .collect();
        self.decode(|i, j| {
            let (alive_j, basis_j) = &kernels[j];
            let (alive_i, _) = &kernels[i];
            if basis_j.is_empty() || alive_i.is_empty() {
                return 0;
            }
            // restrict kernel vectors at j to bars still alive at i
            let pos: Vec<Option<usize>> = alive_i.iter().map(|b| alive_j.iter().position(|x| x == b)).collect();
            let rows: Vec<Vec<u32>> = basis_j
                .iter()
                .map(|v| pos.iter().map(|p| p.map_or(0, |k| v[k])).collect())
                .collect();
            Matrix::from_rows(&rows, alive_i.len()).rank(field)
        })
    }

    fn cokernel_bars(&self, src: &Barcode, tgt: &Barcode, block: &Matrix, field: &PrimeField) -> Vec<Interval> {
        // per sample: live target bars and a row basis of the image inside them
        let images: Vec<(Vec<usize>, Vec<Vec<u32>>)> = self
            .points
            .iter()
            .map(|t| {
                let sa = Self::alive(src, t);
                let ta = Self::alive(tgt, t);
                let stalk = Self::stalk(block, &sa, &ta);
                let cols: Vec<Vec<u32>> = stalk.transpose().row_iter_owned();
                (ta, cols)
            })
            .collect();
        self.decode(|i, j| {
            let (alive_i, image_i) = &images[i];
            let (alive_j, _) = &images[j];
            let width = alive_i.len();
            if width == 0 {
                return 0;
            }
            let mut rows: Vec<Vec<u32>> = image_i.clone();
            let base = Matrix::from_rows(&rows, width).rank(field);
            for b in alive_j {
                if let Some(k) = alive_i.iter().position(|x| x == b) {
                    let mut e = vec![0; width];
                    e[k] = 1;
                    rows.push(e);
                }
            }
            Matrix::from_rows(&rows, width).rank(field) - base
        })
    }
}

trait RowsOwned {
    fn row_iter_owned(&self) -> Vec<Vec<u32>>;
}

impl RowsOwned for Matrix {
    fn row_iter_owned(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}
