//! Diagonalizing a half-interleaved morphism by an automorphism of its target.
//!
//! Given `u: G -> G'` and `v: G' -> T_eps G` with `v . u = tau`, every bar of `G` (all longer
//! than `eps`) gets matched to a bar of `G'` above it, and an automorphism `phi` of `G'` turns
//! the rows of the matched bars into unit vectors. Target rows that can be cleared are cleared;
//! the few that can be neither matched nor cleared are reported as residual.

use num_traits::Signed;
use thiserror::Error;

use crate::barcode::Barcode;
use crate::endpoint::{format_rational, Rational};
use crate::field::{Matrix, PrimeField};
use crate::interval::{is_deg0, leq, Interval};
use crate::morphism::{compose, equals_tau, Morphism, MorphismError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("negative slack {0}")]
    NegativeSlack(String),
    #[error("source and target mix degrees")]
    MixedDegrees,
    #[error("source bar {index} {bar} is not longer than {eps}")]
    ShortBar { index: usize, bar: String, eps: String },
    #[error("the reverse map does not go from the target of u to the shifted source")]
    MismatchedReverse,
    #[error("v . u differs from the Tamarkin map at ({row}, {col})")]
    TauEquation { row: usize, col: usize },
    #[error("no target bar can absorb source bar {column} {bar}")]
    NoPivot { column: usize, bar: String },
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    /// Automorphism of the target.
    pub phi: Morphism,
    /// `sigma[i]` is the target bar receiving source bar `i`.
    pub sigma: Vec<usize>,
    /// `phi . u`.
    pub diagonalized: Morphism,
    /// Target rows outside the image of `sigma` that stay nonzero in `diagonalized`.
    pub residual: Vec<usize>,
}

impl CanonicalForm {
    pub fn is_fully_diagonal(&self) -> bool {
        self.residual.is_empty()
    }

    /// Whether every matched target bar sits between its source bar and that bar shifted by
    /// `eps`.
    pub fn within_drift(&self, u: &Morphism, eps: &Rational) -> bool {
        self.sigma
            .iter()
            .enumerate()
            .all(|(i, &k)| within_window(u.source().interval(i), u.target().interval(k), eps))
    }

    /// Check the shape claims against `u`.
    pub fn verify(&self, u: &Morphism) -> Result<(), String> {
        let source = u.source();
        let target = u.target();
        if self.phi.matrix().inverse(&self.phi.field()).is_none() {
            return Err("phi is not invertible".into());
        }
        let expected = compose(u, &self.phi).map_err(|e| e.to_string())?;
        if expected != self.diagonalized {
            return Err("diagonalized differs from phi . u".into());
        }
        let mut hit = vec![false; target.len()];
        for (i, &k) in self.sigma.iter().enumerate() {
            if std::mem::replace(&mut hit[k], true) {
                return Err(format!("sigma is not injective at target bar {k}"));
            }
            let (from, to) = (source.interval(i), target.interval(k));
            if !leq(from, to) {
                return Err(format!("bar {from} is sent down to {to}"));
            }
            for c in 0..source.len() {
                let want = u32::from(c == i);
                if self.diagonalized.entry(k, c) != want {
                    return Err(format!("row {k} is not the unit vector at column {i}"));
                }
            }
        }
        for k in 0..target.len() {
            let nonzero = (0..source.len()).any(|c| self.diagonalized.entry(k, c) != 0);
            if !hit[k] && nonzero != self.residual.contains(&k) {
                return Err(format!("row {k} misreported as residual"));
            }
        }
        Ok(())
    }
}

/// Target rows grouped by interval, in canonical order.
fn group_rows(target: &Barcode) -> Vec<(Interval, Vec<usize>)> {
    let mut out: Vec<(Interval, Vec<usize>)> = Vec::new();
    for (k, bar) in target.bars().iter().enumerate() {
        match out.last_mut() {
            Some((interval, rows)) if interval == &bar.interval => rows.push(k),
            _ => out.push((bar.interval.clone(), vec![k])),
        }
    }
    out
}

fn within_window(from: &Interval, to: &Interval, eps: &Rational) -> bool {
    leq(from, to) && leq(to, &from.shifted(eps))
}

/// Columns as vectors over the rows `rows`: a matrix whose column `x` is `vectors[x]`.
fn column_matrix(vectors: &[Vec<u32>], rows: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, vectors.len());
    for (x, v) in vectors.iter().enumerate() {
        for (r, &value) in v.iter().enumerate() {
            m.set(r, x, value);
        }
    }
    m
}

fn unit(len: usize, at: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    v[at] = 1;
    v
}

/// Target bars sharing one interval; they are eliminated together.
struct Class {
    rows: Vec<usize>,
    /// Source columns reaching this interval.
    support: Vec<usize>,
    /// Target rows strictly below.
    lower: Vec<usize>,
    /// Restricted rows of the class followed by those of `lower`, as column vectors.
    vectors: Vec<Vec<u32>>,
    below_rank: usize,
}

impl Class {
    fn below(&self) -> &[Vec<u32>] {
        &self.vectors[self.rows.len()..]
    }

    /// `e_column` is reachable from this class but not from the rows below alone.
    fn candidate(&self, column: usize, field: &PrimeField) -> bool {
        let Some(pos) = self.support.iter().position(|&c| c == column) else {
            return false;
        };
        let e = unit(self.support.len(), pos);
        let dim = self.support.len();
        column_matrix(self.below(), dim).solve(&e, field).is_none()
            && column_matrix(&self.vectors, dim).solve(&e, field).is_some()
    }

    /// Whether the unit vectors of `chosen` stay independent modulo the rows below.
    fn independent(&self, chosen: &[usize], field: &PrimeField) -> bool {
        let dim = self.support.len();
        let mut vectors = self.below().to_vec();
        for &c in chosen {
            let pos = self.support.iter().position(|&s| s == c).expect("candidate in support");
            vectors.push(unit(dim, pos));
        }
        column_matrix(&vectors, dim).rank(field) == self.below_rank + chosen.len()
    }
}

/// Adds `v` to `basis` if it is independent of it.
fn extend_independent(basis: &mut Vec<Vec<u32>>, v: Vec<u32>, field: &PrimeField) -> bool {
    let len = v.len();
    basis.push(v);
    if column_matrix(basis, len).rank(field) == basis.len() {
        true
    } else {
        basis.pop();
        false
    }
}

const SEARCH_NODES: u64 = 1 << 20;

/// Depth-first assignment of source columns to classes, first option first.
fn assign(
    column: usize,
    options: &[Vec<usize>],
    classes: &[Class],
    field: &PrimeField,
    chosen: &mut [Vec<usize>],
    out: &mut Vec<usize>,
    nodes: &mut u64,
) -> bool {
    if column == options.len() {
        return true;
    }
    for &k in &options[column] {
        if *nodes == 0 {
            return false;
        }
        *nodes -= 1;
        if chosen[k].len() == classes[k].rows.len() {
            continue;
        }
        chosen[k].push(column);
        if classes[k].independent(&chosen[k], field) {
            out.push(k);
            if assign(column + 1, options, classes, field, chosen, out, nodes) {
                return true;
            }
            out.pop();
        }
        chosen[k].pop();
    }
    false
}

pub fn canonical_form(u: &Morphism, v: &Morphism, eps: &Rational) -> Result<CanonicalForm, CanonicalError> {
    if eps.is_negative() {
        return Err(CanonicalError::NegativeSlack(format_rational(eps)));
    }
    let source = u.source();
    let target = u.target();
    let field = u.field();
    if !source.union(target).is_degree_pure() {
        return Err(CanonicalError::MixedDegrees);
    }
    for (index, bar) in source.bars().iter().enumerate() {
        if !bar.interval.longer_than(eps) {
            return Err(CanonicalError::ShortBar {
                index,
                bar: bar.interval.to_string(),
                eps: format_rational(eps),
            });
        }
    }
    if v.source() != target || v.target() != &source.shift(eps) {
        return Err(CanonicalError::MismatchedReverse);
    }
    let vu = compose(u, v)?;
    if !equals_tau(&vu, eps)? {
        let t = crate::morphism::tau(source, eps, field)?;
        let (row, col) = (0..source.len())
            .flat_map(|r| (0..source.len()).map(move |c| (r, c)))
            .find(|&(r, c)| vu.entry(r, c) != t.entry(r, c))
            .unwrap_or((0, 0));
        return Err(CanonicalError::TauEquation { row, col });
    }

    let n = target.len();
    let a = u.matrix();
    let restricted = |j: usize, support: &[usize]| -> Vec<u32> { support.iter().map(|&c| a.get(j, c)).collect() };

    let mut classes: Vec<Class> = Vec::new();
    for (interval, group) in group_rows(target) {
        let support: Vec<usize> = (0..source.len())
            .filter(|&c| is_deg0(source.interval(c), &interval))
            .collect();
        let lower: Vec<usize> = (0..n)
            .filter(|&j| target.interval(j) != &interval && leq(target.interval(j), &interval))
            .collect();
        let vectors: Vec<Vec<u32>> = group
            .iter()
            .chain(&lower)
            .map(|&j| restricted(j, &support))
            .collect();
        let below_rank = column_matrix(&vectors[group.len()..], support.len()).rank(&field);
        classes.push(Class {
            rows: group,
            support,
            lower,
            vectors,
            below_rank,
        });
    }

    let mut windowed: Vec<Vec<usize>> = vec![Vec::new(); source.len()];
    let mut everywhere: Vec<Vec<usize>> = vec![Vec::new(); source.len()];
    for i in 0..source.len() {
        let mut outside = Vec::new();
        for (k, class) in classes.iter().enumerate() {
            if class.candidate(i, &field) {
                if within_window(source.interval(i), target.interval(class.rows[0]), eps) {
                    windowed[i].push(k);
                } else {
                    outside.push(k);
                }
            }
        }
        everywhere[i] = windowed[i].iter().chain(&outside).copied().collect();
    }
    let mut placement = None;
    for options in [&windowed, &everywhere] {
        let mut chosen = vec![Vec::new(); classes.len()];
        let mut out = Vec::new();
        let mut nodes = SEARCH_NODES;
        if assign(0, options, &classes, &field, &mut chosen, &mut out, &mut nodes) {
            placement = Some(chosen);
            break;
        }
    }
    let Some(chosen) = placement else {
        let column = (0..source.len()).find(|&i| everywhere[i].is_empty()).unwrap_or(0);
        return Err(CanonicalError::NoPivot {
            column,
            bar: source.interval(column).to_string(),
        });
    };

    // Per class: pivot rows become unit vectors, kernel rows become zero, the rest stay put.
    let mut phi = Matrix::zeros(n, n);
    let mut sigma = vec![0; source.len()];
    let mut owned = vec![false; n];
    for (class, pivots) in classes.iter().zip(&chosen) {
        let size = class.rows.len();
        let dim = class.support.len();
        let all = column_matrix(&class.vectors, dim);
        let mut combos: Vec<Vec<u32>> = Vec::with_capacity(size);
        let mut lambdas: Vec<Vec<u32>> = Vec::with_capacity(size);
        for &i in pivots {
            let pos = class.support.iter().position(|&c| c == i).expect("candidate in support");
            let x = all.solve(&unit(dim, pos), &field).expect("candidate is reachable");
            lambdas.push(x[..size].to_vec());
            combos.push(x);
        }
        for x in all.nullspace(&field) {
            if lambdas.len() == size {
                break;
            }
            if extend_independent(&mut lambdas, x[..size].to_vec(), &field) {
                combos.push(x);
            }
        }
        for m in 0..size {
            if lambdas.len() == size {
                break;
            }
            let mut x = vec![0; class.vectors.len()];
            x[m] = 1;
            if extend_independent(&mut lambdas, x[..size].to_vec(), &field) {
                combos.push(x);
            }
        }
        for (slot, x) in combos.iter().enumerate() {
            let k = class.rows[slot];
            for (&j, &c) in class.rows.iter().chain(&class.lower).zip(x) {
                phi.set(k, j, c);
            }
            if let Some(&i) = pivots.get(slot) {
                sigma[i] = k;
                owned[k] = true;
            }
        }
    }
    let phi = Morphism::from_matrix(target.clone(), target.clone(), field, phi);
    let diagonalized = compose(u, &phi)?;
    let residual = (0..n)
        .filter(|&k| !owned[k] && (0..source.len()).any(|c| diagonalized.entry(k, c) != 0))
        .collect();
    let form = CanonicalForm {
        phi,
        sigma,
        diagonalized,
        residual,
    };
    form.verify(u).map_err(CanonicalError::Postcondition)?;
    Ok(form)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stage {stage}: {source}")]
pub struct StageError {
    pub stage: usize,
    #[source]
    pub source: CanonicalError,
}

/// A tower after every map has been put in diagonal form on its long bars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSystem {
    /// `phi_{n+1} . f_n . phi_n^{-1}`, with `phi_0 = id`.
    pub maps: Vec<Morphism>,
    /// `phi_n` for every stage, including the last.
    pub automorphisms: Vec<Morphism>,
    /// Indices of the bars of `F_n` longer than `2 eps_n`.
    pub survivors: Vec<Vec<usize>>,
    /// `(bar of F_n, bar of F_{n+1})` for every survivor.
    pub chains: Vec<Vec<(usize, usize)>>,
    pub residual: Vec<Vec<usize>>,
}

/// Diagonalize `f_n: F_n -> F_{n+1}` stage by stage, given reverse maps
/// `g_n: F_{n+1} -> T_{eps_n} F_n` with `g_n . f_n = tau`.
pub fn diagonalize_system(
    maps: &[Morphism],
    reverses: &[Morphism],
    slacks: &[Rational],
) -> Result<DiagonalSystem, StageError> {
    assert_eq!(maps.len(), reverses.len());
    assert_eq!(maps.len(), slacks.len());
    let wrap = |stage: usize| move |source: CanonicalError| StageError { stage, source };
    let wrap_m = |stage: usize| move |e: MorphismError| StageError {
        stage,
        source: e.into(),
    };
    let mut out = DiagonalSystem {
        maps: Vec::new(),
        automorphisms: Vec::new(),
        survivors: Vec::new(),
        chains: Vec::new(),
        residual: Vec::new(),
    };
    let Some(first) = maps.first() else {
        return Ok(out);
    };
    let mut phi = Morphism::identity(first.source(), first.field());
    for (n, ((f, g), eps)) in maps.iter().zip(reverses).zip(slacks).enumerate() {
        if eps.is_negative() {
            return Err(wrap(n)(CanonicalError::NegativeSlack(format_rational(eps))));
        }
        let phi_inv = phi.inverse().ok_or_else(|| {
            wrap(n)(CanonicalError::Postcondition("automorphism not invertible".into()))
        })?;
        let f1 = compose(&phi_inv, f).map_err(wrap_m(n))?;
        let g1 = compose(g, &phi.shifted(eps)).map_err(wrap_m(n))?;
        let two_eps = eps * Rational::from_integer(2.into());
        let j: Vec<usize> = (0..f.source().len())
            .filter(|&i| f.source().interval(i).longer_than(&two_eps))
            .collect();
        let u = f1.restrict_source(&j);
        let v = g1.restrict_target(&j);
        let form = canonical_form(&u, &v, eps).map_err(wrap(n))?;
        let hat = compose(&f1, &form.phi).map_err(wrap_m(n))?;
        out.chains.push(j.iter().zip(&form.sigma).map(|(&a, &b)| (a, b)).collect());
        out.survivors.push(j);
        out.residual.push(form.residual.clone());
        out.maps.push(hat);
        out.automorphisms.push(phi);
        phi = form.phi;
    }
    out.automorphisms.push(phi);
    Ok(out)
}

/// Identity on a barcode, as a canonical-form input helper over `field`.
pub fn identity_form(b: &Barcode, field: PrimeField) -> CanonicalForm {
    let id = Morphism::identity(b, field);
    CanonicalForm {
        phi: id.clone(),
        sigma: (0..b.len()).collect(),
        diagonalized: id,
        residual: Vec::new(),
    }
}
