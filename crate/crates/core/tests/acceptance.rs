//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sheafbar::canonical::canonical_form;
use sheafbar::cone::{cone_diagonal, cone_gamma};
use sheafbar::endpoint::{int, pow2_neg, rat};
use sheafbar::geometry::{angle, cantor_cubes, cone_coisotropy_test, displacement_bound, ConeParams, PointCloud, Verdict};
use sheafbar::interleaving::{
    check_interleaving, complete_interleaving, gamma, gamma_symmetric, rational_truncation, solve_reverse, Decision,
    SearchOptions,
};
use sheafbar::interval::hom;
use sheafbar::limits::{complete_cauchy, defect_check, InductiveSystem, Subsample};
use sheafbar::morphism::{compose, equals_tau, tau};
use sheafbar::spectral::{spectral_invariants, sublevel_barcode, Convention, Domain, PlFunction};
use sheafbar::{Bar, Barcode, Endpoint, HomType, Interval, Matrix, Morphism, PrimeField, Rational};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eaf_ba12 ^ salt)
}

/// A rational in `[lo, hi]` with denominator at most 4.
fn rand_rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let den = rng.gen_range(1..=4);
    rat(rng.gen_range(lo * den..=hi * den), den)
}

fn finite(lo: Rational, hi: Rational) -> Interval {
    Interval::new(Endpoint::Finite(lo), Endpoint::Finite(hi)).expect("lo < hi")
}

fn rand_interval(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Interval {
    loop {
        let (x, y) = (rand_rat(rng, lo, hi), rand_rat(rng, lo, hi));
        if x != y {
            return finite(x.clone().min(y.clone()), x.max(y));
        }
    }
}

fn rand_barcode(rng: &mut ChaCha8Rng, max_bars: usize) -> Barcode {
    let n = rng.gen_range(0..=max_bars);
    Barcode::from_intervals(0, (0..n).map(|_| rand_interval(rng, 0, 10)))
}

fn double(e: &Endpoint) -> Endpoint {
    e + e
}

fn rand_field(rng: &mut ChaCha8Rng) -> PrimeField {
    PrimeField::new(*[2u32, 3, 5].choose(rng).unwrap()).unwrap()
}

/// Random invertible map of `b` to itself: unit diagonal plus masked random entries, or the
/// identity when the masked matrix happens to be singular.
fn rand_automorphism(rng: &mut ChaCha8Rng, b: &Barcode, field: PrimeField) -> Morphism {
    let n = b.len();
    let mut m = Matrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            if r != c && rng.gen_bool(0.3) {
                m.set(r, c, rng.gen_range(1..field.characteristic()));
            }
        }
    }
    let psi = Morphism::from_matrix(b.clone(), b.clone(), field, m);
    if psi.inverse().is_some() {
        psi
    } else {
        Morphism::identity(b, field)
    }
}

// --- 1. Hom table ---------------------------------------------------------------------------

/// Vertices of the stratification of the line by the points 0..=6: `Point(x)` and the open
/// edge to the right of `x` (`Edge(-1)` is the left ray, `Edge(6)` the right ray).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Point(i64),
    Edge(i64),
}

/// `None` encodes the infinite end on the respective side.
#[derive(Clone, Copy)]
struct Span {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl Span {
    fn stalk(&self, cell: Cell) -> bool {
        let above_lo = |x: i64| self.lo.map_or(true, |a| a <= x);
        let below_hi = |x: i64| self.hi.map_or(true, |b| x <= b);
        match cell {
            Cell::Point(x) => above_lo(x) && self.hi.map_or(true, |b| x < b),
            Cell::Edge(-1) => self.lo.is_none() && below_hi(0),
            Cell::Edge(6) => above_lo(6) && self.hi.is_none(),
            Cell::Edge(x) => above_lo(x) && below_hi(x + 1),
        }
    }

    fn interval(&self) -> Interval {
        let lo = self.lo.map_or(Endpoint::NegInf, Endpoint::int);
        let hi = self.hi.map_or(Endpoint::PosInf, Endpoint::int);
        Interval::new(lo, hi).unwrap()
    }
}

fn cells() -> Vec<Cell> {
    (0..=6).map(Cell::Point).chain((-1..=6).map(Cell::Edge)).collect()
}

/// Each point restricts to the two edges next to it.
fn arrows() -> Vec<(Cell, Cell)> {
    (0..=6).flat_map(|x| [(Cell::Point(x), Cell::Edge(x - 1)), (Cell::Point(x), Cell::Edge(x))]).collect()
}

/// `(dim Hom, dim Ext^1)` between the two rank-one representations, from the commutation
/// equations and the Euler form.
fn hom_ext(m: &Span, n: &Span) -> (i64, i64) {
    let cells = cells();
    let idx = |c: Cell| cells.iter().position(|&d| d == c).unwrap();
    // a variable per cell where both stalks are nonzero; equations are x = y or x = 0
    let var: Vec<bool> = cells.iter().map(|&c| m.stalk(c) && n.stalk(c)).collect();
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    let mut zero = vec![false; cells.len()];
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(s, t) in &arrows() {
        let (s, t) = (idx(s), idx(t));
        // f_t . rho_m = rho_n . f_s
        let left = var[t] && m.stalk(cells[s]);
        let right = var[s] && n.stalk(cells[t]);
        match (left, right) {
            (true, true) => {
                let (a, b) = (find(&mut parent, s), find(&mut parent, t));
                parent[a] = b;
            }
            (true, false) => zero[t] = true,
            (false, true) => zero[s] = true,
            (false, false) => {}
        }
    }
    for x in 0..cells.len() {
        if zero[x] {
            let r = find(&mut parent, x);
            zero[r] = true;
        }
    }
    let mut roots: Vec<usize> = (0..cells.len()).filter(|&x| var[x]).map(|x| find(&mut parent, x)).collect();
    roots.sort_unstable();
    roots.dedup();
    let hom = roots.iter().filter(|&&r| !zero[r]).count() as i64;
    let d = |s: &Span, c: Cell| i64::from(s.stalk(c));
    let euler: i64 = cells.iter().map(|&c| d(m, c) * d(n, c)).sum::<i64>()
        - arrows().iter().map(|&(s, t)| d(m, s) * d(n, t)).sum::<i64>();
    (hom, hom - euler)
}

fn hom_table() -> Outcome {
    let los: Vec<Option<i64>> = std::iter::once(None).chain((0..=6).map(Some)).collect();
    let his: Vec<Option<i64>> = (0..=6).map(Some).chain(std::iter::once(None)).collect();
    let mut spans = Vec::new();
    for &lo in &los {
        for &hi in &his {
            if matches!((lo, hi), (Some(a), Some(b)) if a >= b) {
                continue;
            }
            spans.push(Span { lo, hi });
        }
    }
    let mut counts = [0usize; 3];
    for m in &spans {
        for n in &spans {
            let expected = match hom_ext(m, n) {
                (0, 0) => HomType::Zero,
                (1, 0) => HomType::Deg0,
                (0, 1) => HomType::Deg1,
                other => return Err(format!("oracle found dims {other:?} for {} -> {}", m.interval(), n.interval())),
            };
            let got = hom(&m.interval(), &n.interval());
            ensure(got == expected, || {
                format!("hom({}, {}) = {got:?}, oracle says {expected:?}", m.interval(), n.interval())
            })?;
            counts[expected as usize] += 1;
        }
    }
    Ok(format!(
        "{} pairs: {} zero, {} deg0, {} deg1",
        spans.len() * spans.len(),
        counts[0],
        counts[1],
        counts[2]
    ))
}

// --- 2. pseudo-metric -------------------------------------------------------------------------

fn max_length(b: &Barcode) -> Endpoint {
    b.bars().iter().map(|bar| bar.interval.length()).max().unwrap_or_else(Endpoint::zero)
}

fn pseudo_metric() -> Outcome {
    let mut rng = rng(2);
    let opts = SearchOptions::default();
    let codes: Vec<Barcode> = (0..200).map(|_| rand_barcode(&mut rng, 6)).collect();
    let n = codes.len();
    for i in 0..n {
        let (f, g, h) = (&codes[i], &codes[(i + 1) % n], &codes[(i + 2) % n]);
        let fg = gamma(f, g, &opts);
        let gf = gamma(g, f, &opts);
        ensure(fg.value == gf.value, || format!("asymmetric: {} vs {} on #{i}", fg.value, gf.value))?;
        let c = rand_rat(&mut rng, -5, 5);
        let shifted = gamma(&f.shift(&c), &g.shift(&c), &opts);
        ensure(shifted.value == fg.value, || format!("shift by {c} changes {} to {}", fg.value, shifted.value))?;
        let fh = gamma(f, h, &opts);
        let gh = gamma(g, h, &opts);
        ensure(fh.lower() <= &(fg.upper() + gh.upper()), || format!("triangle fails on #{i}"))?;
        let from_zero = gamma(&Barcode::empty(), f, &opts);
        ensure(from_zero.value == max_length(f), || {
            format!("gamma(0, F) = {} but the longest bar is {}", from_zero.value, max_length(f))
        })?;
    }
    Ok(format!("{n} triples"))
}

// --- 3. bracket -------------------------------------------------------------------------------

fn bracket() -> Outcome {
    let mut rng = rng(3);
    let opts = SearchOptions::default();
    for i in 0..100 {
        let f = rand_barcode(&mut rng, 6);
        let g = rand_barcode(&mut rng, 6);
        let asym = gamma(&f, &g, &opts);
        let sym = gamma_symmetric(&f, &g, &opts);
        ensure(asym.is_exact() && sym.is_exact(), || format!("pair {i} not exact"))?;
        ensure(asym.value <= sym.value && sym.value <= double(&asym.value), || {
            format!("pair {i}: gamma {} gamma' {}", asym.value, sym.value)
        })?;
    }
    Ok("100 pairs".into())
}

// --- 4. canonical form ------------------------------------------------------------------------

fn canonical() -> Outcome {
    let mut rng = rng(4);
    let mut mixed = 0;
    for case in 0..100 {
        let field = rand_field(&mut rng);
        let eps = rand_rat(&mut rng, 0, 2).max(rat(1, 4));
        let pairs = rng.gen_range(1..=3);
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for _ in 0..pairs {
            let a = rand_rat(&mut rng, 0, 6);
            let b = &a + &eps + rand_rat(&mut rng, 0, 3).max(rat(1, 4));
            let da = rand_rat(&mut rng, 0, 2).min(eps.clone());
            let db = rand_rat(&mut rng, 0, 2).min(eps.clone());
            src.push(finite(a.clone(), b.clone()));
            tgt.push(finite(a + da, b + db));
        }
        for _ in 0..rng.gen_range(0..=8 - 2 * pairs) {
            tgt.push(rand_interval(&mut rng, 0, 10));
        }
        // D pairs each source bar with its drifted copy
        let g = Barcode::from_intervals(0, src.clone());
        let g2 = Barcode::from_intervals(0, tgt.clone());
        let mut d = Matrix::zeros(g2.len(), g.len());
        let mut dt = Matrix::zeros(g.len(), g2.len());
        let mut used_rows = vec![false; g2.len()];
        let mut used_cols = vec![false; g.len()];
        for (s, t) in src.iter().zip(&tgt) {
            let c = (0..g.len()).find(|&c| !used_cols[c] && g.interval(c) == s).unwrap();
            let r = (0..g2.len()).find(|&r| !used_rows[r] && g2.interval(r) == t).unwrap();
            used_cols[c] = true;
            used_rows[r] = true;
            d.set(r, c, 1);
            dt.set(c, r, 1);
        }
        let d = Morphism::from_matrix(g.clone(), g2.clone(), field, d);
        let psi = rand_automorphism(&mut rng, &g2, field);
        let psi_inv = psi.inverse().unwrap();
        if psi != Morphism::identity(&g2, field) {
            mixed += 1;
        }
        let u = compose(&d, &psi_inv).unwrap();
        let v0 = Morphism::from_matrix(g2.clone(), g.shift(&eps), field, dt);
        let v = compose(&psi, &v0).unwrap();
        ensure(equals_tau(&compose(&u, &v).unwrap(), &eps).unwrap(), || format!("case {case}: bad instance"))?;

        let form = canonical_form(&u, &v, &eps).map_err(|e| format!("case {case}: {e}"))?;
        form.verify(&u).map_err(|e| format!("case {case}: {e}"))?;
        ensure(form.is_fully_diagonal(), || format!("case {case}: residual rows {:?}", form.residual))?;
        ensure(form.within_drift(&u, &eps), || format!("case {case}: drift check fails"))?;
        for (i, &k) in form.sigma.iter().enumerate() {
            let (s, t) = (g.interval(i), g2.interval(k));
            let ok = s.lo() <= t.lo()
                && t.lo() <= &s.lo().shifted(&eps)
                && s.hi() <= t.hi()
                && t.hi() <= &s.hi().shifted(&eps);
            ensure(ok, || format!("case {case}: {s} sent to {t} with eps {eps}"))?;
        }
    }
    Ok(format!("100 instances, {mixed} with a nontrivial change of basis"))
}

// --- 5. cone comparison -----------------------------------------------------------------------

fn cone_comparison() -> Outcome {
    let mut rng = rng(5);
    let opts = SearchOptions::default();
    let mut certified = 0;
    while certified < 100 {
        let f = rand_barcode(&mut rng, 5);
        let g = rand_barcode(&mut rng, 5);
        let Some(total) = gamma_symmetric(&f, &g, &opts).value.finite().cloned() else {
            continue;
        };
        let eps = total / int(2) + rat(rng.gen_range(0..3), 4);
        let Decision::Found(cert) = check_interleaving(&f, &g, &eps, &eps, &opts).map_err(|e| e.to_string())? else {
            return Err(format!("no ({eps}, {eps}) interleaving although gamma' fits"));
        };
        let bound = Endpoint::Finite(&eps + &eps);
        let c = cone_gamma(cert.u());
        ensure(c <= bound, || format!("cone gamma {c} exceeds {bound}"))?;
        if let Ok(cone) = cone_diagonal(cert.u()) {
            let d = max_length(&cone);
            ensure(d <= bound, || format!("diagonal cone gamma {d} exceeds {bound}"))?;
        }
        certified += 1;
    }

    let mut converse = 0;
    for case in 0..100 {
        let field = rand_field(&mut rng);
        let f = rand_barcode(&mut rng, 5);
        // G: every bar of F pushed right a little, or dropped, plus a few new bars
        let mut bars = Vec::new();
        let mut pairs = Vec::new();
        for (i, bar) in f.bars().iter().enumerate() {
            if rng.gen_bool(0.2) {
                continue;
            }
            let (a, b) = (bar.lo().finite().unwrap().clone(), bar.hi().finite().unwrap().clone());
            let da = rat(rng.gen_range(0..=2), 4);
            let db = rat(rng.gen_range(0..=2), 4);
            if &a + &da < b {
                pairs.push(i);
                bars.push(finite(a + da, b + db));
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            bars.push(rand_interval(&mut rng, 0, 10));
        }
        let g = Barcode::from_intervals(0, bars.clone());
        let mut m = Matrix::zeros(g.len(), f.len());
        let mut used = vec![false; g.len()];
        for (&i, want) in pairs.iter().zip(&bars) {
            let r = (0..g.len()).find(|&r| !used[r] && g.interval(r) == want).unwrap();
            used[r] = true;
            m.set(r, i, 1);
        }
        let d = Morphism::from_matrix(f.clone(), g.clone(), field, m);
        let u = compose(&d, &rand_automorphism(&mut rng, &g, field)).unwrap();
        let Some(c) = cone_gamma(&u).finite().cloned() else {
            return Err(format!("case {case}: infinite cone for finite bars"));
        };
        let eps = c + rat(rng.gen_range(1..=4), 4);
        let two = &eps + &eps;
        let lifted = compose(&u, &tau(&g, &two, field).unwrap()).unwrap();
        let found = complete_interleaving(&lifted, &g, &two, &two).map_err(|e| e.to_string())?;
        ensure(found.is_some(), || format!("case {case}: no ({two}, {two}) certificate"))?;
        converse += 1;
    }
    Ok(format!("{certified} interleavings bounded, {converse} morphisms completed"))
}

// --- 6. defect --------------------------------------------------------------------------------

/// `F_{n+1}` moves endpoints right by at most `eps_n`, bars not longer than `eps_n` die, and
/// the maps are mixed by random automorphisms.
fn random_tower(rng: &mut ChaCha8Rng, len: usize, field: PrimeField) -> Result<InductiveSystem, String> {
    let mut stage = Barcode::from_intervals(0, (0..rng.gen_range(1..=5)).map(|_| rand_interval(rng, 0, 10)));
    let mut maps = Vec::new();
    let mut slacks = Vec::new();
    let mut reverses = Vec::new();
    for n in 0..len {
        let eps = pow2_neg(n as u32);
        let step = |rng: &mut ChaCha8Rng| &eps * rat(rng.gen_range(0..=4), 4);
        let mut next = Vec::new();
        let mut rows = Vec::new();
        for (i, bar) in stage.bars().iter().enumerate() {
            if !bar.interval.longer_than(&eps) {
                continue;
            }
            let (a, b) = (bar.lo().finite().unwrap().clone(), bar.hi().finite().unwrap().clone());
            next.push(finite(a + step(rng), b + step(rng)));
            rows.push(i);
        }
        let target = Barcode::from_intervals(0, next.clone());
        let mut m = Matrix::zeros(target.len(), stage.len());
        let mut used = vec![false; target.len()];
        for (&i, want) in rows.iter().zip(&next) {
            let r = (0..target.len()).find(|&r| !used[r] && target.interval(r) == want).unwrap();
            used[r] = true;
            m.set(r, i, 1);
        }
        let d = Morphism::from_matrix(stage.clone(), target.clone(), field, m);
        let f = compose(&d, &rand_automorphism(rng, &target, field)).unwrap();
        let g = solve_reverse(&f, &eps)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("stage {n}: no reverse map at slack {eps}"))?;
        maps.push(f);
        slacks.push(eps);
        reverses.push(Some(g));
        stage = target;
    }
    InductiveSystem::new(maps, slacks, reverses).map_err(|e| e.to_string())
}

fn defect() -> Outcome {
    let mut rng = rng(6);
    let mut checks = 0;
    for t in 0..50 {
        let field = rand_field(&mut rng);
        let sys = random_tower(&mut rng, 6, field)?;
        for n in 0..=sys.last_index() {
            let report = defect_check(&sys, n).map_err(|e| e.to_string())?;
            ensure(report.holds(), || format!("tower {t}, stage {n}: {} > {}", report.lhs, report.rhs))?;
            checks += 1;
        }
    }
    Ok(format!("50 towers, {checks} stages"))
}

// --- 7. completion ----------------------------------------------------------------------------

fn completion() -> Outcome {
    let opts = SearchOptions::default();
    let last = 8u32;
    let seq: Vec<Barcode> = (1..=last).map(|n| Barcode::from_intervals(0, [finite(pow2_neg(n), int(1))])).collect();
    let c = complete_cauchy(&seq, &pow2_neg(last - 2), &opts, Subsample::Earliest).map_err(|e| e.to_string())?;
    let want = Barcode::from_intervals(0, [finite(int(0), int(1))]);
    ensure(c.limit.barcode == want, || format!("limit is {:?}", c.limit.barcode.to_text()))?;

    let mut rng = rng(7);
    let big_n = 6u32;
    let tol = pow2_neg(big_n) * int(4);
    for t in 0..50 {
        let mut stage: Vec<(Rational, Rational)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let a = rand_rat(&mut rng, 0, 6);
                let b = &a + int(1) + rand_rat(&mut rng, 0, 3);
                (a, b)
            })
            .collect();
        let mut seq = Vec::new();
        for n in 0..=big_n {
            seq.push(Barcode::from_intervals(0, stage.iter().map(|(a, b)| finite(a.clone(), b.clone()))));
            let unit = pow2_neg(n + 2);
            let wiggle = |rng: &mut ChaCha8Rng| &unit * rat(rng.gen_range(-4..=4), 4);
            stage = stage.into_iter().map(|(a, b)| (a + wiggle(&mut rng), b + wiggle(&mut rng))).collect();
        }
        let c = complete_cauchy(&seq, &tol, &opts, Subsample::Earliest).map_err(|e| format!("tower {t}: {e}"))?;
        let d = gamma(&c.limit.barcode, &seq[big_n as usize], &opts).value;
        ensure(d <= Endpoint::Finite(tol.clone()), || format!("tower {t}: distance {d} above {tol}"))?;
    }
    Ok(format!("[2^-n, 1) -> [0, 1); 50 towers within {tol}"))
}

// --- 8. uniqueness ----------------------------------------------------------------------------

fn multiset(b: &Barcode) -> Vec<(i32, String, String)> {
    let mut v: Vec<_> = b.bars().iter().map(|x| (x.degree, x.lo().to_string(), x.hi().to_string())).collect();
    v.sort();
    v
}

fn uniqueness() -> Outcome {
    let mut rng = rng(8);
    let opts = SearchOptions::default();
    let mut equal = 0;
    for i in 0..50 {
        let f = rand_barcode(&mut rng, 5);
        let mut bars: Vec<Bar> = f.bars().to_vec();
        match i % 3 {
            0 => bars.shuffle(&mut rng),
            1 if !bars.is_empty() => {
                let k = rng.gen_range(0..bars.len());
                let iv = &bars[k].interval;
                let hi = iv.hi().finite().unwrap() + rat(1, 4);
                bars[k] = Bar::new(0, Interval::new(iv.lo().clone(), Endpoint::Finite(hi)).unwrap());
            }
            _ => bars.push(Bar::new(0, rand_interval(&mut rng, 0, 10))),
        }
        let g = Barcode::from_bars(bars);
        let zero = gamma(&f, &g, &opts).value == Endpoint::zero();
        let same = multiset(&f) == multiset(&g);
        ensure(zero == same, || format!("pair {i}: gamma zero {zero}, equal multisets {same}"))?;
        equal += usize::from(same);
    }
    Ok(format!("50 pairs, {equal} equal"))
}

// --- 9. degeneracy ----------------------------------------------------------------------------

fn degeneracy() -> Outcome {
    let opts = SearchOptions::default();
    let mut previous: Option<Endpoint> = None;
    for n in 2..=10i64 {
        let (f, g) = rational_truncation(n as u32);
        ensure(multiset(&f) != multiset(&g), || format!("N={n}: barcodes coincide"))?;
        let report = gamma(&f, &g, &opts);
        let cert = report.certificate.ok_or_else(|| format!("N={n}: no certificate"))?;
        ensure(cert.total() <= rat(1, n), || format!("N={n}: certificate total {}", cert.total()))?;
        ensure(report.value > Endpoint::zero(), || format!("N={n}: distance zero"))?;
        if let Some(p) = &previous {
            ensure(&report.value <= p, || format!("N={n}: {} after {p}", report.value))?;
        }
        previous = Some(report.value);
    }
    Ok(format!("N=2..10, last gamma {}", previous.unwrap()))
}

// --- 10. spectral -----------------------------------------------------------------------------

fn spectral() -> Outcome {
    let mut rng = rng(10);
    for i in 0..200 {
        let len = rng.gen_range(2..=12);
        let values: Vec<Rational> = (0..len).map(|_| rand_rat(&mut rng, -5, 5)).collect();
        let f = PlFunction::sampled(Domain::Circle, values.clone()).map_err(|e| e.to_string())?;
        let lo = values.iter().min().unwrap().clone();
        let hi = values.iter().max().unwrap().clone();
        let report = spectral_invariants(&sublevel_barcode(&f), Convention::Sublevel, 1).map_err(|e| format!("#{i}: {e}"))?;
        ensure(report.c_minus == lo && report.c_plus == hi && report.gamma == &hi - &lo, || {
            format!("#{i}: got ({}, {}, {}) for min {lo} max {hi}", report.c_minus, report.c_plus, report.gamma)
        })?;
    }
    Ok("200 functions".into())
}

// --- 11. Cantor -------------------------------------------------------------------------------

fn cantor() -> Outcome {
    let table: Vec<Rational> = (1..=3).map(|k| displacement_bound(&rat(1, 8), k, 1).unwrap()).collect();
    ensure(table == vec![rat(1, 2), rat(1, 4), rat(1, 8)], || format!("a=1/8, n=1 table {table:?}"))?;
    let grid: Vec<(Rational, u32)> = [
        (1, 32), (1, 16), (1, 8), (3, 16), (1, 4), (1, 3), (3, 8), (1, 2), (3, 4), (7, 8),
    ]
    .iter()
    .map(|&(p, q)| (rat(p, q), 1))
    .chain([(1, 128), (1, 64), (1, 32), (3, 64), (1, 16), (1, 12), (1, 8), (1, 4), (1, 2), (3, 4)].iter().map(|&(p, q)| (rat(p, q), 2)))
    .collect();
    for (a, n) in &grid {
        let ratio = a * rat(1i64 << (2 * n), 1);
        let bounds: Vec<Rational> = (1..=5).map(|k| displacement_bound(a, k, *n).unwrap()).collect();
        for (k, b) in bounds.iter().enumerate() {
            let mut power = int(1);
            for _ in 0..=k {
                power = &power * &ratio;
            }
            ensure(b == &power, || format!("a={a} n={n} k={}: {b} vs {power}", k + 1))?;
        }
        let trend = |w: &[Rational]| w[1].cmp(&w[0]);
        let want = int(1).cmp(&ratio).reverse();
        ensure(bounds.windows(2).all(|w| trend(w) == want), || format!("a={a} n={n}: {bounds:?}"))?;
    }
    let cloud = cantor_cubes(&rat(1, 8), 3, 1).and_then(|c| c.vertex_cloud()).map_err(|e| e.to_string())?;
    let report = cone_coisotropy_test(&cloud, &[0.0, 0.0], &ConeParams::default()).map_err(|e| e.to_string())?;
    ensure(report.verdict == Verdict::CoisotropicVacuous, || format!("corner verdict {}", report.verdict))?;
    Ok(format!("{} grid points; corner of K_1/8 level 3 ({} samples) vacuous", grid.len(), cloud.len()))
}

// --- 12. cone verdicts ------------------------------------------------------------------------

fn coordinate_cloud(dim: usize, axes: &[usize], steps: i32) -> PointCloud {
    let mut points = vec![vec![0.0; dim]];
    for &axis in axes {
        points = points
            .iter()
            .flat_map(|p| {
                (-steps..=steps).map(move |t| {
                    let mut p = p.clone();
                    p[axis] = f64::from(t) * 0.1;
                    p
                })
            })
            .collect();
    }
    PointCloud::new(dim, points).unwrap()
}

fn cone_verdicts() -> Outcome {
    let params = ConeParams::default();
    let run = |cloud: &PointCloud| cone_coisotropy_test(cloud, &vec![0.0; cloud.dimension()], &params);
    let lagrangian = run(&coordinate_cloud(2, &[0], 20)).map_err(|e| e.to_string())?;
    ensure(lagrangian.verdict == Verdict::Coisotropic, || format!("line in R^2: {}", lagrangian.verdict))?;
    let axis = run(&coordinate_cloud(4, &[0], 20)).map_err(|e| e.to_string())?;
    let Verdict::NotCoisotropic(h) = &axis.verdict else {
        return Err(format!("q1-axis: {}", axis.verdict));
    };
    let tolerance = 10f64.to_radians();
    let off = [1usize, 3]
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            let a = angle(&h.normal, &e);
            a.min(std::f64::consts::PI - a)
        })
        .fold(f64::INFINITY, f64::min);
    ensure(off <= tolerance, || format!("witness {:?} is {:.1} deg off", h.normal, off.to_degrees()))?;
    let hyperplane = run(&coordinate_cloud(4, &[0, 1, 3], 3)).map_err(|e| e.to_string())?;
    ensure(hyperplane.verdict == Verdict::Coisotropic, || format!("p1=0: {}", hyperplane.verdict))?;
    Ok(format!("witness {:.1} deg from dq2/dp2", off.to_degrees()))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "hom table", limit: secs(1), run: hom_table },
        Criterion { name: "pseudo-metric", limit: secs(60), run: pseudo_metric },
        Criterion { name: "symmetric bracket", limit: secs(120), run: bracket },
        Criterion { name: "canonical form", limit: secs(30), run: canonical },
        Criterion { name: "cone comparison", limit: secs(60), run: cone_comparison },
        Criterion { name: "hocolim defect", limit: secs(120), run: defect },
        Criterion { name: "completion", limit: secs(60), run: completion },
        Criterion { name: "uniqueness", limit: secs(60), run: uniqueness },
        Criterion { name: "rational degeneracy", limit: secs(30), run: degeneracy },
        Criterion { name: "spectral", limit: secs(30), run: spectral },
        Criterion { name: "cantor dichotomy", limit: secs(30), run: cantor },
        Criterion { name: "cone verdicts", limit: secs(30), run: cone_verdicts },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took longer than {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} ({:.2?}): {detail}", i + 1, c.name, elapsed),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {} ({:.2?}): {why}", i + 1, c.name, elapsed);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
