//! Towers of barcodes: homotopy colimits, completion of Cauchy sequences, and the cone defect
//! of the comparison maps.

use std::path::{Path, PathBuf};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::barcode::{Bar, Barcode, BarcodeParseError};
use crate::canonical::{diagonalize_system, DiagonalSystem, StageError};
use crate::cone::cone_gamma;
use crate::endpoint::{format_rational, int, parse_rational, pow2_neg, Endpoint, Rational};
use crate::field::PrimeField;
use crate::interleaving::{gamma, solve_reverse, InterleavingError, SearchOptions};
use crate::interval::Interval;
use crate::morphism::{compose, equals_tau, tau, Morphism, MorphismError, MorphismSpec};

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("empty tower")]
    Empty,
    #[error("map {stage} does not go from stage {stage} to stage {next}", next = .stage + 1)]
    NotComposable { stage: usize },
    #[error("reverse map {stage}: g . f is not the Tamarkin map by {slack}")]
    ReverseFails { stage: usize, slack: String },
    #[error("reverse map {stage}: no map with g . f = tau at slack {slack}")]
    NoReverse { stage: usize, slack: String },
    #[error("stage {stage}: negative slack {slack}")]
    NegativeSlack { stage: usize, slack: String },
    #[error("{0}")]
    Diagonalize(#[from] StageError),
    #[error("the sequence is not Cauchy at the required rate: the longest admissible subsequence stops at index {last} of {len}")]
    NotCauchy { last: usize, len: usize },
    #[error("no certificate for step {step} of the subsequence")]
    MissingCertificate { step: usize },
    #[error("limit is {distance} away from the last term, above the tolerance {tol}")]
    Tolerance { distance: String, tol: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Interleaving(#[from] InterleavingError),
}

/// `F_0 -> F_1 -> ...` with slacks `eps_n` and reverse maps `g_n: F_{n+1} -> T_{eps_n} F_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductiveSystem {
    stages: Vec<Barcode>,
    maps: Vec<Morphism>,
    slacks: Vec<Rational>,
    reverses: Vec<Option<Morphism>>,
}

impl InductiveSystem {
    pub fn new(
        maps: Vec<Morphism>,
        slacks: Vec<Rational>,
        reverses: Vec<Option<Morphism>>,
    ) -> Result<Self, LimitError> {
        let first = maps.first().ok_or(LimitError::Empty)?;
        assert_eq!(maps.len(), slacks.len());
        assert_eq!(maps.len(), reverses.len());
        let mut stages = vec![first.source().clone()];
        for (n, f) in maps.iter().enumerate() {
            if f.source() != &stages[n] {
                return Err(LimitError::NotComposable { stage: n });
            }
            stages.push(f.target().clone());
        }
        for (n, (g, eps)) in reverses.iter().zip(&slacks).enumerate() {
            if eps.is_negative() {
                return Err(LimitError::NegativeSlack {
                    stage: n,
                    slack: format_rational(eps),
                });
            }
            if let Some(g) = g {
                let ok = compose(&maps[n], g)
                    .ok()
                    .and_then(|gf| equals_tau(&gf, eps).ok())
                    .unwrap_or(false);
                if !ok {
                    return Err(LimitError::ReverseFails {
                        stage: n,
                        slack: format_rational(eps),
                    });
                }
            }
        }
        Ok(InductiveSystem {
            stages,
            maps,
            slacks,
            reverses,
        })
    }

    /// Identity maps on `b`, `len` of them, with zero slack.
    pub fn constant(b: &Barcode, len: usize, field: PrimeField) -> Self {
        let id = Morphism::identity(b, field);
        InductiveSystem::new(
            vec![id.clone(); len],
            vec![Rational::zero(); len],
            vec![Some(id); len],
        )
        .expect("identity tower is valid")
    }

    pub fn stages(&self) -> &[Barcode] {
        &self.stages
    }

    pub fn maps(&self) -> &[Morphism] {
        &self.maps
    }

    pub fn slacks(&self) -> &[Rational] {
        &self.slacks
    }

    pub fn reverses(&self) -> &[Option<Morphism>] {
        &self.reverses
    }

    /// Index of the last stage.
    pub fn last_index(&self) -> usize {
        self.maps.len()
    }

    /// Fill in missing reverse maps by solving `g . f = tau` at the recorded slack.
    pub fn with_reverses(&self) -> Result<InductiveSystem, LimitError> {
        let mut out = self.clone();
        for (n, g) in out.reverses.iter_mut().enumerate() {
            if g.is_none() {
                let slack = &self.slacks[n];
                *g = Some(solve_reverse(&self.maps[n], slack)?.ok_or_else(|| LimitError::NoReverse {
                    stage: n,
                    slack: format_rational(slack),
                })?);
            }
        }
        Ok(out)
    }

    /// `f_{m-1} . ... . f_n: F_n -> F_m`.
    pub fn composite(&self, n: usize, m: usize) -> Result<Morphism, MorphismError> {
        let field = self.maps[0].field();
        let mut out = Morphism::identity(&self.stages[n], field);
        for f in &self.maps[n..m] {
            out = compose(&out, f)?;
        }
        Ok(out)
    }

    /// Every `stride`-th stage, with composite maps and summed slacks.
    pub fn subsample(&self, stride: usize) -> Result<InductiveSystem, LimitError> {
        assert!(stride >= 1);
        let mut maps = Vec::new();
        let mut slacks = Vec::new();
        let mut n = 0;
        while n + stride <= self.last_index() {
            maps.push(self.composite(n, n + stride)?);
            let total = self.slacks[n..n + stride]
                .iter()
                .fold(Rational::zero(), |acc, e| acc + e);
            slacks.push(total);
            n += stride;
        }
        let reverses = vec![None; maps.len()];
        InductiveSystem::new(maps, slacks, reverses)?.with_reverses()
    }

    /// Read `F0.bc, F1.bc, ...`, `f0.mor, ...`, optional `g*.mor` and `slacks.txt`.
    ///
    /// Slacks come from `slacks.txt`, else from the shift header of `g_n`, else the smallest
    /// slack at which a reverse map exists.
    pub fn load_dir(dir: &Path, field: PrimeField) -> Result<InductiveSystem, LimitError> {
        let read = |name: String| -> Result<Option<String>, LimitError> {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(text) => Ok(Some(text)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(LimitError::Io { path, source }),
            }
        };
        let parse_err = |name: &str, message: String| LimitError::Parse {
            path: dir.join(name),
            message,
        };
        let mut stages = Vec::new();
        while let Some(text) = read(format!("F{}.bc", stages.len()))? {
            let name = format!("F{}.bc", stages.len());
            stages.push(Barcode::parse_text(&text).map_err(|e: BarcodeParseError| parse_err(&name, e.to_string()))?);
        }
        if stages.is_empty() {
            return Err(LimitError::Io {
                path: dir.join("F0.bc"),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no stages"),
            });
        }
        let slack_file = match read("slacks.txt".into())? {
            Some(text) => Some(
                text.lines()
                    .map(|l| l.split('#').next().unwrap_or("").trim())
                    .filter(|l| !l.is_empty())
                    .map(|l| parse_rational(l).map_err(|e| parse_err("slacks.txt", e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let mut maps = Vec::new();
        let mut slacks = Vec::new();
        let mut reverses = Vec::new();
        for n in 0..stages.len() - 1 {
            let name = format!("f{n}.mor");
            let text = read(name.clone())?.ok_or_else(|| LimitError::Io {
                path: dir.join(&name),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing map"),
            })?;
            let spec = MorphismSpec::parse(&text).map_err(|e| parse_err(&name, e.to_string()))?;
            if !spec.shift.is_zero() {
                return Err(parse_err(&name, "maps of the tower must have shift 0".into()));
            }
            let (f, _) = spec.resolve(&stages[n], &stages[n + 1], field)?;
            let g_name = format!("g{n}.mor");
            let g_spec = match read(g_name.clone())? {
                Some(t) => Some(MorphismSpec::parse(&t).map_err(|e| parse_err(&g_name, e.to_string()))?),
                None => None,
            };
            let slack = match (&slack_file, &g_spec) {
                (Some(s), _) => s
                    .get(n)
                    .cloned()
                    .ok_or_else(|| parse_err("slacks.txt", format!("no slack for stage {n}")))?,
                (None, Some(g)) => g.shift.clone(),
                (None, None) => minimal_slack(&f)?,
            };
            let g = match g_spec {
                Some(g) => {
                    let mut g = g;
                    g.shift = slack.clone();
                    Some(g.resolve(&stages[n + 1], &stages[n], field)?.0)
                }
                None => None,
            };
            maps.push(f);
            slacks.push(slack);
            reverses.push(g);
        }
        if maps.is_empty() {
            return Err(parse_err("F0.bc", "a tower needs at least two stages".into()));
        }
        InductiveSystem::new(maps, slacks, reverses)?.with_reverses()
    }
}

/// The least candidate slack at which `f` admits a reverse map.
fn minimal_slack(f: &Morphism) -> Result<Rational, LimitError> {
    let mut candidates: Vec<Rational> = vec![Rational::zero()];
    let src = f.source().finite_endpoints();
    let tgt = f.target().finite_endpoints();
    for x in src.iter().chain(&tgt) {
        for y in src.iter().chain(&tgt) {
            if x > y {
                candidates.push(x - y);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    // existence is monotone in the slack: post-compose with a further Tamarkin map
    let k = candidates.partition_point(|c| matches!(solve_reverse(f, c), Ok(None)));
    candidates
        .get(k)
        .cloned()
        .ok_or_else(|| LimitError::NoReverse {
            stage: 0,
            slack: "any".into(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// Bars of the last stage as they are.
    Truncated,
    /// Endpoints whose chains have stopped moving, or move geometrically, are replaced by
    /// their limits.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limit {
    pub barcode: Barcode,
    /// Bound on the distance between the truncated output and the true limit.
    pub error_bound: Endpoint,
    /// Per output bar: whether both endpoints are exact limits.
    pub exact: Vec<bool>,
    pub diagonal: DiagonalSystem,
}

impl Limit {
    pub fn is_exact(&self) -> bool {
        self.exact.iter().all(|&e| e)
    }
}

/// The homotopy colimit of the tower, read at its last stage.
pub fn hocolim(system: &InductiveSystem, mode: LimitMode) -> Result<Limit, LimitError> {
    let system = system.with_reverses()?;
    let reverses: Vec<Morphism> = system.reverses.iter().map(|g| g.clone().expect("filled")).collect();
    let diagonal = diagonalize_system(&system.maps, &reverses, &system.slacks)?;
    let last = system.last_index();
    let final_stage = &system.stages[last];
    let tail = cone_gamma(&system.maps[last - 1]);
    let error_bound = &tail + &tail;

    let mut bars = Vec::with_capacity(final_stage.len());
    let mut exact = Vec::with_capacity(final_stage.len());
    for (k, bar) in final_stage.bars().iter().enumerate() {
        match mode {
            LimitMode::Truncated => {
                bars.push(bar.clone());
                exact.push(false);
            }
            LimitMode::Exact => {
                let chain = chain_ending_at(&system, &diagonal, k);
                let lo = extrapolate(chain.iter().map(|b| b.lo()).collect());
                let hi = extrapolate(chain.iter().map(|b| b.hi()).collect());
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo < hi => {
                        bars.push(Bar::new(bar.degree, Interval::new(lo, hi).expect("lo < hi")));
                        exact.push(true);
                    }
                    _ => {
                        bars.push(bar.clone());
                        exact.push(false);
                    }
                }
            }
        }
    }
    // keep `exact` aligned with the sorted barcode
    let mut paired: Vec<(Bar, bool)> = bars.into_iter().zip(exact).collect();
    paired.sort();
    let (bars, exact): (Vec<Bar>, Vec<bool>) = paired.into_iter().unzip();
    Ok(Limit {
        barcode: Barcode::from_bars(bars),
        error_bound,
        exact,
        diagonal,
    })
}

/// Bars along the chain arriving at bar `k` of the last stage, oldest first.
fn chain_ending_at(system: &InductiveSystem, diagonal: &DiagonalSystem, k: usize) -> Vec<Bar> {
    let mut out = vec![system.stages[system.last_index()].bar(k).clone()];
    let mut current = k;
    for n in (0..diagonal.chains.len()).rev() {
        match diagonal.chains[n].iter().find(|&&(_, to)| to == current) {
            Some(&(from, _)) => {
                out.push(system.stages[n].bar(from).clone());
                current = from;
            }
            None => break,
        }
    }
    out.reverse();
    out
}

/// Limit of an endpoint sequence when it is eventually constant (last two steps zero) or
/// eventually geometric (last three steps in a constant ratio in `(0, 1)`).
fn extrapolate(xs: Vec<&Endpoint>) -> Option<Endpoint> {
    let last = *xs.last()?;
    if !last.is_finite() {
        return xs.iter().all(|x| x == &last).then(|| last.clone());
    }
    let values: Vec<&Rational> = xs.iter().map(|x| x.finite()).collect::<Option<_>>()?;
    let steps: Vec<Rational> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let m = steps.len();
    if m >= 2 && steps[m - 1].is_zero() && steps[m - 2].is_zero() {
        return Some(last.clone());
    }
    if m >= 3 && steps[m - 3..].iter().all(|s| !s.is_zero()) {
        let r = &steps[m - 1] / &steps[m - 2];
        let r_prev = &steps[m - 2] / &steps[m - 3];
        if r == r_prev && r.is_positive() && r < Rational::one() {
            let tail = &steps[m - 1] * &r / (Rational::one() - &r);
            return Some(Endpoint::Finite(values[m] + tail));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectReport {
    pub lhs: Endpoint,
    pub rhs: Endpoint,
}

impl DefectReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Cone size of the comparison map `F_n -> limit` against twice the summed cone sizes of the
/// maps after `n`.
pub fn defect_check(system: &InductiveSystem, n: usize) -> Result<DefectReport, LimitError> {
    let last = system.last_index();
    assert!(n <= last, "stage {n} beyond the tower");
    let comparison = system.composite(n, last)?;
    let lhs = cone_gamma(&comparison);
    let sum = system.maps[n..last]
        .iter()
        .map(cone_gamma)
        .fold(Endpoint::zero(), |acc, c| &acc + &c);
    Ok(DefectReport {
        lhs,
        rhs: &sum + &sum,
    })
}

/// How to pick the Cauchy subsequence when several are equally long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Subsample {
    /// Earliest admissible predecessor.
    #[default]
    Earliest,
    /// Predecessor chosen by a seeded generator.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub limit: Limit,
    /// Indices of the input terms kept.
    pub subsequence: Vec<usize>,
    pub system: InductiveSystem,
    /// `gamma(limit, last kept term)`.
    pub distance_to_last: Endpoint,
}

/// Complete a Cauchy sequence of barcodes: keep a subsequence with steps at most `2^-k`, shift
/// the terms into an honest tower and take its limit.
pub fn complete_cauchy(
    seq: &[Barcode],
    tol: &Rational,
    options: &SearchOptions,
    subsample: Subsample,
) -> Result<Completion, LimitError> {
    if seq.is_empty() {
        return Err(LimitError::Empty);
    }
    let len = seq.len();
    let mut dist = vec![vec![Endpoint::zero(); len]; len];
    for i in 0..len {
        for j in i + 1..len {
            dist[i][j] = gamma(&seq[i], &seq[j], options).value;
        }
    }
    let kept = cauchy_subsequence(&dist, subsample);
    if *kept.last().expect("nonempty") != len - 1 {
        return Err(LimitError::NotCauchy {
            last: *kept.last().unwrap(),
            len,
        });
    }
    let field = options.field;
    if kept.len() == 1 {
        let b = seq[len - 1].clone();
        let system = InductiveSystem::constant(&b, 1, field);
        let limit = hocolim(&system, LimitMode::Exact)?;
        return Ok(Completion {
            limit,
            subsequence: kept,
            system,
            distance_to_last: Endpoint::zero(),
        });
    }

    let mut maps = Vec::new();
    let mut slacks = Vec::new();
    let mut reverses = Vec::new();
    for k in 0..kept.len() - 1 {
        let (h, h_next) = (&seq[kept[k]], &seq[kept[k + 1]]);
        let cert = gamma(h, h_next, options)
            .certificate
            .ok_or(LimitError::MissingCertificate { step: k })?;
        let step = pow2_neg(k as u32);
        let eps = pow2_neg(k as u32) * int(2);
        let eps_next = &eps - &step;
        // f_k = tau . T_{-eps_k} u_k, landing in T_{-eps_{k+1}} H_{k+1}
        let u = cert.u().shifted(&-eps.clone());
        let pad = tau(u.target(), &(&step - cert.a()), field)?;
        let f = compose(&u, &pad)?;
        let g = cert.v().shifted(&-eps_next.clone());
        maps.push(f);
        slacks.push(&step + cert.b());
        reverses.push(Some(g));
    }
    let system = InductiveSystem::new(maps, slacks, reverses)?;
    let last = &seq[len - 1];
    let mut failure = None;
    for mode in [LimitMode::Exact, LimitMode::Truncated] {
        let limit = hocolim(&system, mode)?;
        let d = gamma(&limit.barcode, last, options).value;
        if d <= Endpoint::Finite(tol.clone()) {
            return Ok(Completion {
                limit,
                subsequence: kept,
                system,
                distance_to_last: d,
            });
        }
        failure.get_or_insert(d);
    }
    Err(LimitError::Tolerance {
        distance: failure.expect("two attempts").to_string(),
        tol: format_rational(tol),
    })
}

/// Longest index sequence `i_0 < i_1 < ...` with `d(i_k, i_{k+1}) <= 2^-k`, preferring one that
/// ends at the last index.
fn cauchy_subsequence(dist: &[Vec<Endpoint>], subsample: Subsample) -> Vec<usize> {
    let len = dist.len();
    // reach[j][k]: some admissible sequence has i_k = j
    let mut reach = vec![vec![false; len]; len];
    for row in reach.iter_mut() {
        row[0] = true;
    }
    for k in 1..len {
        let bound = Endpoint::Finite(pow2_neg(k as u32 - 1));
        for j in 0..len {
            reach[j][k] = (0..j).any(|i| reach[i][k - 1] && dist[i][j] <= bound);
        }
    }
    let depth = |j: usize| (0..len).rev().find(|&k| reach[j][k]).unwrap_or(0);
    let end = if depth(len - 1) > 0 || (0..len).all(|j| depth(j) == 0) {
        len - 1
    } else {
        (0..len).max_by_key(|&j| (depth(j), j)).unwrap_or(len - 1)
    };
    let mut rng = match subsample {
        Subsample::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Subsample::Earliest => None,
    };
    let mut out = vec![end];
    let mut k = depth(end);
    let mut j = end;
    while k > 0 {
        let bound = Endpoint::Finite(pow2_neg(k as u32 - 1));
        let preds: Vec<usize> = (0..j).filter(|&i| reach[i][k - 1] && dist[i][j] <= bound).collect();
        let i = match rng.as_mut() {
            Some(r) => *preds.choose(r).expect("reachable"),
            None => preds[0],
        };
        out.push(i);
        j = i;
        k -= 1;
    }
    out.reverse();
    out
}
