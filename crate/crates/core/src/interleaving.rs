//! The interleaving pseudo-distance `gamma` and its certificates.
//!
//! An `(a, b)`-interleaving of `(F, G)` is a pair `u: F -> T_a G`, `v: G -> T_b F` whose two
//! composites are the Tamarkin maps by `a + b`. Translating `G` by `s = (a - b) / 2` turns it
//! into a symmetric `delta`-interleaving with `delta = (a + b) / 2`, and for barcodes those are
//! decided exactly by bipartite matching. The default strategy uses that; an exhaustive search
//! over GF(p) assignments is kept for cross-checking on small inputs.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::barcode::{gamma_to_zero, Barcode};
use crate::endpoint::{format_rational, int, parse_rational, rat, Endpoint, Rational};
use crate::interval::Interval;
use crate::field::{Matrix, PrimeField};
use crate::matching::covering_matching;
use crate::morphism::{allowed, compose, equals_tau, tau, Morphism, MorphismError, MorphismSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterleavingError {
    #[error("negative shift {0}")]
    NegativeShift(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// Shifts `(a, b)` and maps `u: F -> T_a G`, `v: G -> T_b F`, checked on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleavingCertificate {
    a: Rational,
    b: Rational,
    u: Morphism,
    v: Morphism,
}

impl InterleavingCertificate {
    pub fn new(a: Rational, b: Rational, u: Morphism, v: Morphism) -> Result<Self, InterleavingError> {
        if a.is_negative() || b.is_negative() {
            let bad = if a.is_negative() { &a } else { &b };
            return Err(InterleavingError::NegativeShift(format_rational(bad)));
        }
        let f = u.source();
        let g = v.source();
        if u.target() != &g.shift(&a) {
            return Err(InterleavingError::InvalidCertificate("u does not land in T_a G".into()));
        }
        if v.target() != &f.shift(&b) {
            return Err(InterleavingError::InvalidCertificate("v does not land in T_b F".into()));
        }
        let c = &a + &b;
        if !equals_tau(&compose(&u, &v.shifted(&a))?, &c)? {
            return Err(InterleavingError::InvalidCertificate(format!(
                "T_a v . u is not the Tamarkin map by {}",
                format_rational(&c)
            )));
        }
        if !equals_tau(&compose(&v, &u.shifted(&b))?, &c)? {
            return Err(InterleavingError::InvalidCertificate(format!(
                "T_b u . v is not the Tamarkin map by {}",
                format_rational(&c)
            )));
        }
        Ok(InterleavingCertificate { a, b, u, v })
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn u(&self) -> &Morphism {
        &self.u
    }

    pub fn v(&self) -> &Morphism {
        &self.v
    }

    /// `a + b`, the bound on `gamma` this certificate proves.
    pub fn total(&self) -> Rational {
        &self.a + &self.b
    }

    /// The same data read as a certificate for `(G, F)`.
    pub fn swapped(&self) -> InterleavingCertificate {
        InterleavingCertificate {
            a: self.b.clone(),
            b: self.a.clone(),
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }
}

impl InterleavingCertificate {
    /// Text form: `a:` and `b:` headers, then a `[u]` and a `[v]` section in the morphism
    /// format, `u` with source `f_path` and target `g_path`.
    pub fn to_text(&self, f_path: &str, g_path: &str) -> String {
        format!(
            "a: {}\nb: {}\n[u]\n{}[v]\n{}",
            format_rational(&self.a),
            format_rational(&self.b),
            self.u.to_text(f_path, g_path, &self.a),
            self.v.to_text(g_path, f_path, &self.b),
        )
    }
}

/// Parsed certificate file; the barcodes are resolved by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateSpec {
    pub a: Rational,
    pub b: Rational,
    pub u: MorphismSpec,
    pub v: MorphismSpec,
}

impl CertificateSpec {
    pub fn parse(text: &str) -> Result<CertificateSpec, InterleavingError> {
        let err = |line: usize, message: String| InterleavingError::Morphism(MorphismError::Parse { line, message });
        let mut a = None;
        let mut b = None;
        let mut section: Option<char> = None;
        let (mut u_text, mut v_text) = (String::new(), String::new());
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            match (content, section) {
                ("", _) => {}
                ("[u]", _) => section = Some('u'),
                ("[v]", _) => section = Some('v'),
                (_, Some(which)) => {
                    let target = if which == 'u' { &mut u_text } else { &mut v_text };
                    target.push_str(content);
                    target.push('\n');
                }
                (_, None) => {
                    let (key, value) = content
                        .split_once(':')
                        .ok_or_else(|| err(line, format!("expected `a:` or `b:`, got `{content}`")))?;
                    let value = parse_rational(value.trim()).map_err(|e| err(line, e.to_string()))?;
                    match key.trim() {
                        "a" => a = Some(value),
                        "b" => b = Some(value),
                        other => return Err(err(line, format!("unknown header `{other}`"))),
                    }
                }
            }
        }
        let a = a.ok_or_else(|| err(0, "missing `a:` header".into()))?;
        let b = b.ok_or_else(|| err(0, "missing `b:` header".into()))?;
        let u = MorphismSpec::parse(&u_text)?;
        let v = MorphismSpec::parse(&v_text)?;
        if u.shift != a || v.shift != b {
            return Err(err(0, "section shifts differ from the `a:`/`b:` headers".into()));
        }
        Ok(CertificateSpec { a, b, u, v })
    }

    /// Build and verify the certificate for `(f, g)`. Entries outside the allowed support
    /// make the certificate invalid rather than being dropped.
    pub fn resolve(&self, f: &Barcode, g: &Barcode, field: PrimeField) -> Result<InterleavingCertificate, InterleavingError> {
        let (u, dropped_u) = self.u.resolve(f, g, field)?;
        let (v, dropped_v) = self.v.resolve(g, f, field)?;
        if !dropped_u.is_empty() || !dropped_v.is_empty() {
            return Err(InterleavingError::InvalidCertificate(
                "entries outside the allowed support".into(),
            ));
        }
        InterleavingCertificate::new(self.a.clone(), self.b.clone(), u, v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Bracket { lower: Endpoint, upper: Endpoint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceReport {
    pub value: Endpoint,
    pub exactness: Exactness,
    pub certificate: Option<InterleavingCertificate>,
}

impl DistanceReport {
    fn exact(value: Endpoint, certificate: Option<InterleavingCertificate>) -> Self {
        DistanceReport {
            value,
            exactness: Exactness::Exact,
            certificate,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    /// Lower end of what is known: the value itself when exact.
    pub fn lower(&self) -> &Endpoint {
        match &self.exactness {
            Exactness::Exact => &self.value,
            Exactness::Bracket { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> &Endpoint {
        match &self.exactness {
            Exactness::Exact => &self.value,
            Exactness::Bracket { upper, .. } => upper,
        }
    }
}

impl fmt::Display for DistanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exactness {
            Exactness::Exact => write!(f, "{}", self.value),
            Exactness::Bracket { lower, upper } => write!(f, "[{lower}, {upper}]"),
        }
    }
}

/// Outcome of deciding whether an `(a, b)`-interleaving exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Found(InterleavingCertificate),
    Infeasible,
    /// The exhaustive search ran out of budget.
    Unknown,
}

impl Decision {
    pub fn certificate(&self) -> Option<&InterleavingCertificate> {
        match self {
            Decision::Found(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Exact decision through shifted bottleneck matchings.
    Matching,
    /// Enumerate one map over GF(p), solve linearly for the other; at most `budget` assignments
    /// per decision.
    Exhaustive { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub field: PrimeField,
    pub strategy: SearchStrategy,
}

pub const DEFAULT_BUDGET: u64 = 1 << 20;

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            field: PrimeField::gf2(),
            strategy: SearchStrategy::Matching,
        }
    }
}

pub fn check_interleaving(
    f: &Barcode,
    g: &Barcode,
    a: &Rational,
    b: &Rational,
    options: &SearchOptions,
) -> Result<Decision, InterleavingError> {
    for c in [a, b] {
        if c.is_negative() {
            return Err(InterleavingError::NegativeShift(format_rational(c)));
        }
    }
    match options.strategy {
        SearchStrategy::Matching => {
            let problem = MatchingProblem::new(f, g);
            let two = int(2);
            let s = (a - b) / &two;
            let delta = (a + b) / &two;
            Ok(match problem.matching_at(&s, &delta) {
                Some(m) => match problem.certificate(&s, &delta, &m, options.field) {
                    Some(cert) => Decision::Found(cert),
                    None => Decision::Unknown,
                },
                None => Decision::Infeasible,
            })
        }
        SearchStrategy::Exhaustive { budget } => exhaustive(f, g, a, b, options.field, budget),
    }
}

/// Given `u: F -> T_a G`, look for `v: G -> T_b F` completing it to a certificate.
pub fn complete_interleaving(
    u: &Morphism,
    g: &Barcode,
    a: &Rational,
    b: &Rational,
) -> Result<Option<InterleavingCertificate>, InterleavingError> {
    let f = u.source();
    let field = u.field();
    let c = a + b;
    let v_target = f.shift(b);
    let unknowns = support(g, &v_target);
    let mut system = LinearSystem::new(unknowns.len());
    let index_of = |row: usize, col: usize| unknowns.iter().position(|&p| p == (row, col));

    // T_a v . u = tau on F: entry (k, i) is sum_j v[k, j] u[j, i]
    let outer_f = f.shift(&c);
    let tau_f = tau(f, &c, field)?;
    for k in 0..f.len() {
        for i in 0..f.len() {
            if !allowed(f, &outer_f, k, i) {
                continue;
            }
            let mut coeffs = vec![0; unknowns.len()];
            for j in 0..g.len() {
                let uji = u.entry(j, i);
                if uji != 0 {
                    if let Some(x) = index_of(k, j) {
                        coeffs[x] = field.add(coeffs[x], uji);
                    }
                }
            }
            system.push(coeffs, tau_f.entry(k, i));
        }
    }
    // T_b u . v = tau on G: entry (l, j) is sum_i u[l, i] v[i, j]
    let outer_g = g.shift(&c);
    let tau_g = tau(g, &c, field)?;
    for l in 0..g.len() {
        for j in 0..g.len() {
            if !allowed(g, &outer_g, l, j) {
                continue;
            }
            let mut coeffs = vec![0; unknowns.len()];
            for i in 0..f.len() {
                let uli = u.entry(l, i);
                if uli != 0 {
                    if let Some(x) = index_of(i, j) {
                        coeffs[x] = field.add(coeffs[x], uli);
                    }
                }
            }
            system.push(coeffs, tau_g.entry(l, j));
        }
    }
    let Some(solution) = system.solve(field) else {
        return Ok(None);
    };
    let mut matrix = Matrix::zeros(f.len(), g.len());
    for (x, &(r, col)) in unknowns.iter().enumerate() {
        matrix.set(r, col, solution[x]);
    }
    let v = Morphism::from_matrix(g.clone(), v_target, field, matrix);
    Ok(InterleavingCertificate::new(a.clone(), b.clone(), u.clone(), v).ok())
}

/// A reverse map `g: B -> T_eps A` with `g . f` equal to the Tamarkin map by `eps`, if any.
pub fn solve_reverse(f: &Morphism, eps: &Rational) -> Result<Option<Morphism>, InterleavingError> {
    if eps.is_negative() {
        return Err(InterleavingError::NegativeShift(format_rational(eps)));
    }
    let source = f.source();
    let middle = f.target();
    let field = f.field();
    let target = source.shift(eps);
    let unknowns = support(middle, &target);
    let tau_a = tau(source, eps, field)?;
    let mut system = LinearSystem::new(unknowns.len());
    for k in 0..source.len() {
        for i in 0..source.len() {
            if !allowed(source, &target, k, i) {
                continue;
            }
            let mut coeffs = vec![0; unknowns.len()];
            for (x, &(r, j)) in unknowns.iter().enumerate() {
                if r == k {
                    coeffs[x] = f.entry(j, i);
                }
            }
            system.push(coeffs, tau_a.entry(k, i));
        }
    }
    let Some(solution) = system.solve(field) else {
        return Ok(None);
    };
    let mut matrix = Matrix::zeros(target.len(), middle.len());
    for (x, &(r, c)) in unknowns.iter().enumerate() {
        matrix.set(r, c, solution[x]);
    }
    Ok(Some(Morphism::from_matrix(middle.clone(), target, field, matrix)))
}

/// `gamma(F, G)`, the infimum of `a + b` over interleavings; graded inputs take the maximum
/// over degrees.
pub fn gamma(f: &Barcode, g: &Barcode, options: &SearchOptions) -> DistanceReport {
    graded(f, g, options, false)
}

/// The symmetric variant, with `a = b` forced.
pub fn gamma_symmetric(f: &Barcode, g: &Barcode, options: &SearchOptions) -> DistanceReport {
    graded(f, g, options, true)
}

/// A certificate at `a = b = delta` read off a `delta`-matching of the bars, if one exists.
pub fn matching_witness(
    f: &Barcode,
    g: &Barcode,
    delta: &Rational,
    field: PrimeField,
) -> Option<InterleavingCertificate> {
    if delta.is_negative() {
        return None;
    }
    let problem = MatchingProblem::new(f, g);
    let s = Rational::zero();
    let m = problem.covering(&s, delta)?;
    problem.certificate(&s, delta, &m, field)
}

fn graded(f: &Barcode, g: &Barcode, options: &SearchOptions, symmetric: bool) -> DistanceReport {
    let degrees: BTreeSet<i32> = f.degrees().union(&g.degrees()).copied().collect();
    if degrees.len() <= 1 {
        return pure(f, g, options, symmetric);
    }
    let reports: Vec<DistanceReport> = degrees
        .iter()
        .map(|&d| pure(&f.in_degree(d), &g.in_degree(d), options, symmetric))
        .collect();
    let value = reports.iter().map(|r| r.value.clone()).max().unwrap_or_else(Endpoint::zero);
    let all_exact = reports.iter().all(|r| r.is_exact());
    let lower = reports.iter().map(|r| r.lower().clone()).max().unwrap_or_else(Endpoint::zero);
    let upper = reports.iter().map(|r| r.upper().clone()).max().unwrap_or_else(Endpoint::zero);
    // A certificate for the whole barcode needs one common pair of shifts; try the one that
    // realises the maximum.
    let certificate = reports
        .iter()
        .filter(|r| r.upper() == &upper)
        .filter_map(|r| r.certificate.as_ref())
        .find_map(|c| {
            let options = SearchOptions {
                strategy: SearchStrategy::Matching,
                ..*options
            };
            check_interleaving(f, g, c.a(), c.b(), &options)
                .ok()
                .and_then(|d| d.certificate().cloned())
        });
    DistanceReport {
        value: if all_exact { value } else { upper.clone() },
        exactness: if all_exact {
            Exactness::Exact
        } else {
            Exactness::Bracket { lower, upper }
        },
        certificate,
    }
}

fn pure(f: &Barcode, g: &Barcode, options: &SearchOptions, symmetric: bool) -> DistanceReport {
    let problem = MatchingProblem::new(f, g);
    if !problem.types_compatible() {
        return DistanceReport::exact(Endpoint::PosInf, None);
    }
    let candidates = problem.candidates(symmetric);
    match options.strategy {
        SearchStrategy::Matching => {
            let feasible = |c: &Rational| problem.feasible(&(c / int(2)), symmetric);
            // feasibility is monotone in the total shift and the largest candidate is feasible
            let k = candidates.partition_point(|c| feasible(c).is_none());
            let c = &candidates[k.min(candidates.len() - 1)];
            let (s, m) = feasible(c).expect("largest candidate total shift is feasible");
            let delta = c / int(2);
            let cert = problem.certificate(&s, &delta, &m, options.field);
            DistanceReport::exact(Endpoint::Finite(c.clone()), cert)
        }
        SearchStrategy::Exhaustive { budget } => {
            exhaustive_gamma(f, g, &problem, &candidates, options.field, budget, symmetric)
        }
    }
}

fn exhaustive_gamma(
    f: &Barcode,
    g: &Barcode,
    problem: &MatchingProblem,
    candidates: &[Rational],
    field: PrimeField,
    budget: u64,
    symmetric: bool,
) -> DistanceReport {
    let two = int(2);
    let mut first_unresolved: Option<Rational> = None;
    for c in candidates {
        let delta = c / &two;
        let shifts = if symmetric {
            vec![Rational::zero()]
        } else {
            problem.shift_candidates(&delta)
        };
        let mut unresolved = false;
        for s in shifts {
            let a = &delta + &s;
            let b = &delta - &s;
            match exhaustive(f, g, &a, &b, field, budget) {
                Ok(Decision::Found(cert)) => {
                    let value = Endpoint::Finite(c.clone());
                    return match first_unresolved {
                        None => DistanceReport::exact(value, Some(cert)),
                        Some(lower) => DistanceReport {
                            value: value.clone(),
                            exactness: Exactness::Bracket {
                                lower: Endpoint::Finite(lower),
                                upper: value,
                            },
                            certificate: Some(cert),
                        },
                    };
                }
                Ok(Decision::Unknown) => unresolved = true,
                _ => {}
            }
        }
        if unresolved && first_unresolved.is_none() {
            first_unresolved = Some(c.clone());
        }
    }
    // Nothing found within budget: fall back to a symmetric matching bound.
    let symmetric_bound = pure(f, g, &SearchOptions { field, strategy: SearchStrategy::Matching }, true);
    let lower = first_unresolved.map(Endpoint::Finite).unwrap_or_else(Endpoint::zero);
    DistanceReport {
        value: symmetric_bound.value.clone(),
        exactness: Exactness::Bracket {
            lower,
            upper: symmetric_bound.value,
        },
        certificate: symmetric_bound.certificate,
    }
}

/// Positions `(row, col)` where a map `source -> target` may be nonzero.
fn support(source: &Barcode, target: &Barcode) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..target.len() {
        for c in 0..source.len() {
            if allowed(source, target, r, c) {
                out.push((r, c));
            }
        }
    }
    out
}

fn exhaustive(
    f: &Barcode,
    g: &Barcode,
    a: &Rational,
    b: &Rational,
    field: PrimeField,
    budget: u64,
) -> Result<Decision, InterleavingError> {
    for c in [a, b] {
        if c.is_negative() {
            return Err(InterleavingError::NegativeShift(format_rational(c)));
        }
    }
    let u_support = support(f, &g.shift(a));
    let v_support = support(g, &f.shift(b));
    // enumerate the smaller side and solve for the other
    if v_support.len() < u_support.len() {
        return Ok(match exhaustive(g, f, b, a, field, budget)? {
            Decision::Found(c) => Decision::Found(c.swapped()),
            other => other,
        });
    }
    let p = field.characteristic() as u64;
    let total = (0..u_support.len()).try_fold(1u64, |acc, _| acc.checked_mul(p));
    let limit = total.map_or(budget, |t| t.min(budget));
    let target = g.shift(a);
    for index in 0..limit {
        let mut matrix = Matrix::zeros(target.len(), f.len());
        let mut rest = index;
        for &(r, c) in &u_support {
            matrix.set(r, c, (rest % p) as u32);
            rest /= p;
        }
        let u = Morphism::from_matrix(f.clone(), target.clone(), field, matrix);
        if let Some(cert) = complete_interleaving(&u, g, a, b)? {
            return Ok(Decision::Found(cert));
        }
    }
    Ok(if total.is_some_and(|t| t <= budget) {
        Decision::Infeasible
    } else {
        Decision::Unknown
    })
}

struct LinearSystem {
    unknowns: usize,
    rows: Vec<Vec<u32>>,
    rhs: Vec<u32>,
}

impl LinearSystem {
    fn new(unknowns: usize) -> Self {
        LinearSystem {
            unknowns,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn push(&mut self, coeffs: Vec<u32>, rhs: u32) {
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    fn solve(&self, field: PrimeField) -> Option<Vec<u32>> {
        if self.rows.is_empty() {
            return Some(vec![0; self.unknowns]);
        }
        Matrix::from_rows(&self.rows, self.unknowns).solve(&self.rhs, &field)
    }
}

/// Differences between endpoints of bars that could be matched to one another.
#[derive(Debug, Clone)]
struct PairOffsets {
    lo: Option<Rational>,
    hi: Option<Rational>,
}

/// Bars of `F` against bars of `G`, for the translated matching decision.
struct MatchingProblem<'a> {
    f: &'a Barcode,
    g: &'a Barcode,
    /// `offsets[i][j]` when bar `i` of `F` may be matched with bar `j` of `G` at all.
    offsets: Vec<Vec<Option<PairOffsets>>>,
}

fn side_kind(e: &Endpoint) -> u8 {
    match e {
        Endpoint::NegInf => 0,
        Endpoint::Finite(_) => 1,
        Endpoint::PosInf => 2,
    }
}

fn finite_diff(x: &Endpoint, y: &Endpoint) -> Option<Rational> {
    Some(x.finite()? - y.finite()?)
}

impl<'a> MatchingProblem<'a> {
    fn new(f: &'a Barcode, g: &'a Barcode) -> Self {
        let offsets = f
            .bars()
            .iter()
            .map(|x| {
                g.bars()
                    .iter()
                    .map(|y| {
                        let same_kind = x.degree == y.degree
                            && side_kind(x.lo()) == side_kind(y.lo())
                            && side_kind(x.hi()) == side_kind(y.hi());
                        same_kind.then(|| PairOffsets {
                            lo: finite_diff(x.lo(), y.lo()),
                            hi: finite_diff(x.hi(), y.hi()),
                        })
                    })
                    .collect()
            })
            .collect();
        MatchingProblem { f, g, offsets }
    }

    /// Unbounded bars can only be matched to bars of the same shape; counts must agree.
    fn types_compatible(&self) -> bool {
        let census = |b: &Barcode| {
            let mut v: Vec<(i32, u8, u8)> = b
                .bars()
                .iter()
                .filter(|bar| !bar.interval.is_bounded())
                .map(|bar| (bar.degree, side_kind(bar.lo()), side_kind(bar.hi())))
                .collect();
            v.sort();
            v
        };
        census(self.f) == census(self.g)
    }

    fn differences(&self) -> BTreeSet<Rational> {
        let mut out = BTreeSet::new();
        for row in &self.offsets {
            for o in row.iter().flatten() {
                out.extend(o.lo.iter().cloned());
                out.extend(o.hi.iter().cloned());
            }
        }
        out
    }

    /// Total shifts `a + b` where the optimum can sit, sorted; never empty.
    fn candidates(&self, symmetric: bool) -> Vec<Rational> {
        let mut diffs = self.differences();
        let mut out: BTreeSet<Rational> = BTreeSet::new();
        out.insert(Rational::zero());
        for bar in self.f.bars().iter().chain(self.g.bars()) {
            if let Endpoint::Finite(l) = bar.interval.length() {
                out.insert(l);
            }
        }
        if symmetric {
            for x in &diffs {
                out.insert(x.abs() * int(2));
            }
        } else {
            diffs.insert(Rational::zero());
            let diffs: Vec<Rational> = diffs.into_iter().collect();
            for (k, x) in diffs.iter().enumerate() {
                for y in &diffs[k + 1..] {
                    out.insert((x - y).abs());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Translations of `G` worth trying at half-shift `delta`: the left ends of the windows
    /// where some pair is admissible, plus `-delta`.
    fn shift_candidates(&self, delta: &Rational) -> Vec<Rational> {
        let lowest = -delta.clone();
        let mut out: BTreeSet<Rational> = BTreeSet::new();
        out.insert(lowest.clone());
        for x in self.differences() {
            let s = x - delta;
            if s >= lowest && &s <= delta {
                out.insert(s);
            }
        }
        out.into_iter().collect()
    }

    fn admissible(&self, i: usize, j: usize, s: &Rational, delta: &Rational) -> bool {
        let Some(o) = &self.offsets[i][j] else {
            return false;
        };
        [&o.lo, &o.hi]
            .into_iter()
            .flatten()
            .all(|x| &(x - s).abs() <= delta)
    }

    /// A `delta`-matching between `F` and `T_s G`: matched bars have endpoints within `delta`,
    /// unmatched bars have length at most `2 delta`.
    fn covering(&self, s: &Rational, delta: &Rational) -> Option<Vec<Option<usize>>> {
        let two_delta = delta * int(2);
        let adj: Vec<Vec<usize>> = (0..self.f.len())
            .map(|i| (0..self.g.len()).filter(|&j| self.admissible(i, j, s, delta)).collect())
            .collect();
        let must_f: Vec<bool> = self.f.bars().iter().map(|b| b.interval.longer_than(&two_delta)).collect();
        let must_g: Vec<bool> = self.g.bars().iter().map(|b| b.interval.longer_than(&two_delta)).collect();
        covering_matching(&adj, &must_f, &must_g)
    }

    fn matching_at(&self, s: &Rational, delta: &Rational) -> Option<Vec<Option<usize>>> {
        if &s.abs() > delta {
            return None;
        }
        self.covering(s, delta)
    }

    /// Some translation `s` with `|s| <= delta` admitting a matching, if any.
    fn feasible(&self, delta: &Rational, symmetric: bool) -> Option<(Rational, Vec<Option<usize>>)> {
        if symmetric {
            let s = Rational::zero();
            return self.covering(&s, delta).map(|m| (s, m));
        }
        self.shift_candidates(delta)
            .into_par_iter()
            .find_map_first(|s| self.covering(&s, delta).map(|m| (s, m)))
    }

    fn certificate(
        &self,
        s: &Rational,
        delta: &Rational,
        matching: &[Option<usize>],
        field: PrimeField,
    ) -> Option<InterleavingCertificate> {
        let a = delta + s;
        let b = delta - s;
        let g_target = self.g.shift(&a);
        let f_target = self.f.shift(&b);
        let mut u = Matrix::zeros(self.g.len(), self.f.len());
        let mut v = Matrix::zeros(self.f.len(), self.g.len());
        for (i, partner) in matching.iter().enumerate() {
            let Some(j) = *partner else { continue };
            if allowed(self.f, &g_target, j, i) {
                u.set(j, i, 1);
            }
            if allowed(self.g, &f_target, i, j) {
                v.set(i, j, 1);
            }
        }
        let u = Morphism::from_matrix(self.f.clone(), g_target, field, u);
        let v = Morphism::from_matrix(self.g.clone(), f_target, field, v);
        InterleavingCertificate::new(a, b, u, v).ok()
    }
}

/// `gamma(0, B)` through the matching decision; agrees with [`gamma_to_zero`].
pub fn gamma_from_zero(b: &Barcode) -> Endpoint {
    let report = gamma(&Barcode::empty(), b, &SearchOptions::default());
    debug_assert_eq!(report.value, gamma_to_zero(b));
    report.value
}

/// Finite truncation of the sum of `k_[x, inf)` over the rationals: `F` has a bar `[x, inf)` for
/// every fraction in `[0, 1]` with denominator at most `denom_max`, and `G` moves each bar to
/// the next fraction (the last one to `1 + 1/denom_max`). The two barcodes differ, while the
/// gaps, hence `gamma`, are at most `1/denom_max`.
pub fn rational_truncation(denom_max: u32) -> (Barcode, Barcode) {
    assert!(denom_max >= 1);
    let q = i64::from(denom_max);
    let points: BTreeSet<Rational> = (1..=q)
        .flat_map(|d| (0..=d).map(move |n| rat(n, d)))
        .collect();
    let points: Vec<Rational> = points.into_iter().collect();
    let mut next: Vec<Rational> = points[1..].to_vec();
    next.push(int(1) + rat(1, q));
    let bars = |xs: &[Rational]| {
        Barcode::from_intervals(
            0,
            xs.iter()
                .map(|x| Interval::new(Endpoint::Finite(x.clone()), Endpoint::PosInf).expect("finite < inf")),
        )
    };
    (bars(&points), bars(&next))
}

#[cfg(test)]
mod tests {
    #[test]
    fn rational_truncations_are_close_but_distinct() {
        for m in 2..6 {
            let (f, g) = rational_truncation(m);
            assert_ne!(f, g);
            let r = gamma(&f, &g, &SearchOptions::default());
            assert!(r.is_exact());
            assert!(r.value <= Endpoint::ratio(1, i64::from(m)));
            assert!(r.certificate.unwrap().total() <= crate::endpoint::rat(1, i64::from(m)));
        }
    }

    #[test]
    fn certificate_text_round_trip() {
        let f: Barcode = "0 0 10\n0 2 3\n".parse().unwrap();
        let g: Barcode = "0 1 10\n".parse().unwrap();
        let report = gamma(&f, &g, &SearchOptions::default());
        let cert = report.certificate.expect("exact with certificate");
        let text = cert.to_text("F.bc", "G.bc");
        let spec = CertificateSpec::parse(&text).unwrap();
        assert_eq!(spec.u.source_path, "F.bc");
        assert_eq!(spec.resolve(&f, &g, PrimeField::gf2()).unwrap(), cert);
        assert!(spec.resolve(&g, &f, PrimeField::gf2()).is_err());
        assert!(CertificateSpec::parse("a: 1\n[u]\nsource: F\ntarget: G\n").is_err());
    }

    use super::*;
    use crate::endpoint::rat;
    use proptest::prelude::*;

    fn bc(text: &str) -> Barcode {
        text.parse().unwrap()
    }

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    fn exhaustive_opts() -> SearchOptions {
        SearchOptions {
            field: PrimeField::gf2(),
            strategy: SearchStrategy::Exhaustive { budget: DEFAULT_BUDGET },
        }
    }

    #[test]
    fn identity_certificate_at_zero() {
        let b = bc("0 0 3\n0 1 2\n");
        for o in [opts(), exhaustive_opts()] {
            let d = check_interleaving(&b, &b, &int(0), &int(0), &o).unwrap();
            let cert = d.certificate().unwrap();
            assert_eq!(cert.total(), int(0));
        }
    }

    #[test]
    fn one_sided_shift_examples() {
        let f = bc("0 0 10");
        let g = bc("0 1 10");
        for o in [opts(), exhaustive_opts()] {
            assert!(matches!(
                check_interleaving(&f, &g, &int(0), &int(1), &o).unwrap(),
                Decision::Found(_)
            ));
            assert_eq!(
                check_interleaving(&f, &g, &int(0), &rat(1, 2), &o).unwrap(),
                Decision::Infeasible
            );
        }
    }

    #[test]
    fn negative_shift_is_an_error() {
        let b = bc("0 0 1");
        assert!(check_interleaving(&b, &b, &int(-1), &int(0), &opts()).is_err());
    }

    #[test]
    fn gamma_examples() {
        let b = bc("0 0 3\n0 1 5\n");
        assert_eq!(gamma(&b, &b, &opts()).value, Endpoint::zero());
        assert_eq!(gamma(&Barcode::empty(), &bc("0 0 2"), &opts()).value, Endpoint::int(2));
        let r = gamma(&bc("0 0 10"), &bc("0 1 10"), &opts());
        assert_eq!(r.value, Endpoint::int(1));
        assert!(r.is_exact());
        assert_eq!(r.certificate.unwrap().total(), int(1));
    }

    #[test]
    fn symmetric_examples() {
        let b = bc("0 0 3");
        assert_eq!(gamma_symmetric(&b, &b, &opts()).value, Endpoint::zero());
        let r = gamma_symmetric(&bc("0 0 10"), &bc("0 1 10"), &opts());
        assert_eq!(r.value, Endpoint::int(2));
        let cert = r.certificate.unwrap();
        assert_eq!((cert.a(), cert.b()), (&int(1), &int(1)));
    }

    #[test]
    fn infinite_bar_mismatch_is_infinite() {
        assert_eq!(gamma(&bc("0 0 inf"), &bc("0 -inf 0"), &opts()).value, Endpoint::PosInf);
        assert_eq!(gamma(&bc("0 0 inf"), &Barcode::empty(), &opts()).value, Endpoint::PosInf);
        assert_eq!(gamma(&bc("0 0 inf"), &bc("0 3 inf"), &opts()).value, Endpoint::int(3));
    }

    #[test]
    fn matching_witness_examples() {
        let b = bc("0 0 2\n0 1 7\n");
        assert_eq!(matching_witness(&b, &b, &int(0), PrimeField::gf2()).unwrap().total(), int(0));
        let cert = matching_witness(&bc("0 0 10"), &bc("0 1 11"), &int(1), PrimeField::gf2()).unwrap();
        assert_eq!(cert.total(), int(2));
        assert!(matching_witness(&bc("0 0 10"), &Barcode::empty(), &int(1), PrimeField::gf2()).is_none());
    }

    #[test]
    fn graded_takes_the_worst_degree() {
        let f = bc("0 0 4\n1 0 4\n");
        let g = bc("0 0 4\n1 1 4\n");
        assert_eq!(gamma(&f, &g, &opts()).value, Endpoint::int(1));
    }

    #[test]
    fn solve_reverse_finds_the_inverse_direction() {
        let (f, _) = crate::morphism::make_morphism(&bc("0 0 10"), &bc("0 1 10"), &[(0, 0, 1)], PrimeField::gf2())
            .unwrap();
        let g = solve_reverse(&f, &int(1)).unwrap().unwrap();
        assert!(equals_tau(&compose(&f, &g).unwrap(), &int(1)).unwrap());
        assert!(solve_reverse(&f, &rat(1, 2)).unwrap().is_none());
    }

    #[test]
    fn exhaustive_over_gf3_agrees() {
        let o = SearchOptions {
            field: PrimeField::new(3).unwrap(),
            strategy: SearchStrategy::Exhaustive { budget: DEFAULT_BUDGET },
        };
        let f = bc("0 0 4\n0 1 3\n");
        let g = bc("0 0 3\n0 2 4\n");
        assert_eq!(gamma(&f, &g, &o).value, gamma(&f, &g, &opts()).value);
    }

    #[test]
    fn tiny_budget_reports_a_bracket() {
        let f = bc("0 0 4\n0 1 5\n0 2 6\n");
        let g = bc("0 1 4\n0 0 5\n0 3 6\n");
        let o = SearchOptions {
            field: PrimeField::gf2(),
            strategy: SearchStrategy::Exhaustive { budget: 1 },
        };
        let r = gamma(&f, &g, &o);
        let exact = gamma(&f, &g, &opts()).value;
        assert!(r.lower() <= &exact && &exact <= r.upper());
    }

    fn arb_barcode(max: usize) -> impl Strategy<Value = Barcode> {
        proptest::collection::vec((0i64..8, 1i64..6, 0u8..8), 0..max).prop_map(|v| {
            Barcode::from_bars(
                v.into_iter()
                    .map(|(lo, len, kind)| {
                        let hi = if kind == 0 { Endpoint::PosInf } else { Endpoint::int(lo + len) };
                        crate::barcode::Bar::new(0, crate::interval::Interval::new(Endpoint::int(lo), hi).unwrap())
                    })
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn symmetric_and_shift_invariant(f in arb_barcode(4), g in arb_barcode(4), t in -5i64..5) {
            let d = gamma(&f, &g, &opts()).value;
            prop_assert_eq!(&gamma(&g, &f, &opts()).value, &d);
            let t = int(t);
            prop_assert_eq!(gamma(&f.shift(&t), &g.shift(&t), &opts()).value, d);
        }

        #[test]
        fn triangle(f in arb_barcode(3), g in arb_barcode(3), h in arb_barcode(3)) {
            let fg = gamma(&f, &g, &opts()).value;
            let gh = gamma(&g, &h, &opts()).value;
            let fh = gamma(&f, &h, &opts()).value;
            prop_assert!(fh <= &fg + &gh);
        }

        #[test]
        fn distance_to_zero(f in arb_barcode(5)) {
            prop_assert_eq!(gamma(&Barcode::empty(), &f, &opts()).value, gamma_to_zero(&f));
        }

        #[test]
        fn symmetric_within_factor_two(f in arb_barcode(4), g in arb_barcode(4)) {
            let d = gamma(&f, &g, &opts()).value;
            let s = gamma_symmetric(&f, &g, &opts()).value;
            prop_assert!(d <= s);
            prop_assert!(s <= &d + &d);
        }

        #[test]
        fn certificates_achieve_the_value(f in arb_barcode(4), g in arb_barcode(4)) {
            let r = gamma(&f, &g, &opts());
            if let Endpoint::Finite(v) = &r.value {
                prop_assert_eq!(&r.certificate.unwrap().total(), v);
            }
        }

        #[test]
        fn matching_agrees_with_exhaustive(f in arb_barcode(3), g in arb_barcode(3)) {
            let m = gamma(&f, &g, &opts());
            let e = gamma(&f, &g, &exhaustive_opts());
            prop_assert!(e.is_exact());
            prop_assert_eq!(m.value, e.value);
        }
    }
}
