//! Spectral invariants read off essential bars, and sublevel-set barcodes of piecewise linear
//! functions on an interval or a circle.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::barcode::{Bar, Barcode};
use crate::endpoint::{format_rational, int, parse_rational, Endpoint, Rational};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("no essential bar in degree {0}")]
    MissingEssential(i32),
    #[error("{count} essential bars in degree {degree}, expected one")]
    DuplicateEssential { degree: i32, count: usize },
    #[error("essential bar in degree {0} is infinite at both ends")]
    Unbounded(i32),
}

/// Which end of the essential bars is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Essential bars `[-inf, b)`; the invariants are the right ends, in degrees `-1` and
    /// `dim - 1`.
    LeftInfinite,
    /// Essential bars `[a, +inf)`; the invariants are the left ends, in degrees `0` and `dim`.
    Sublevel,
}

impl FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left-infinite" | "left" => Ok(Convention::LeftInfinite),
            "sublevel" => Ok(Convention::Sublevel),
            other => Err(format!("unknown convention `{other}` (expected left-infinite or sublevel)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralReport {
    /// Every essential bar as `(degree, finite endpoint)`.
    pub invariants: Vec<(i32, Endpoint)>,
    pub c_minus: Rational,
    pub c_plus: Rational,
    pub gamma: Rational,
}

fn essential(bar: &Bar, convention: Convention) -> bool {
    match convention {
        Convention::LeftInfinite => bar.lo() == &Endpoint::NegInf,
        Convention::Sublevel => bar.hi() == &Endpoint::PosInf,
    }
}

fn invariant(bar: &Bar, convention: Convention) -> &Endpoint {
    match convention {
        Convention::LeftInfinite => bar.hi(),
        Convention::Sublevel => bar.lo(),
    }
}

pub fn spectral_invariants(
    b: &Barcode,
    convention: Convention,
    dim: i32,
) -> Result<SpectralReport, SpectralError> {
    let invariants: Vec<(i32, Endpoint)> = b
        .bars()
        .iter()
        .filter(|bar| essential(bar, convention))
        .map(|bar| (bar.degree, invariant(bar, convention).clone()))
        .collect();
    let (low_degree, high_degree) = match convention {
        Convention::LeftInfinite => (-1, dim - 1),
        Convention::Sublevel => (0, dim),
    };
    let pick = |degree: i32| -> Result<Rational, SpectralError> {
        let found: Vec<&Endpoint> = invariants.iter().filter(|(d, _)| *d == degree).map(|(_, e)| e).collect();
        match found.as_slice() {
            [] => Err(SpectralError::MissingEssential(degree)),
            [e] => e.finite().cloned().ok_or(SpectralError::Unbounded(degree)),
            many => Err(SpectralError::DuplicateEssential {
                degree,
                count: many.len(),
            }),
        }
    };
    let x = pick(low_degree)?;
    let y = pick(high_degree)?;
    let (c_minus, c_plus) = if x <= y { (x, y) } else { (y, x) };
    let gamma = &c_plus - &c_minus;
    Ok(SpectralReport {
        invariants,
        c_minus,
        c_plus,
        gamma,
    })
}

/// Orientation reversal `t -> -t` taking sublevel barcodes to left-infinite ones: degree drops
/// by one and intervals are reflected, so `c_-` and `c_+` swap and change sign.
pub fn sublevel_to_left_infinite(b: &Barcode) -> Barcode {
    Barcode::from_bars(
        b.bars()
            .iter()
            .map(|bar| Bar::new(bar.degree - 1, bar.interval.reflected()))
            .collect(),
    )
}

pub fn left_infinite_to_sublevel(b: &Barcode) -> Barcode {
    Barcode::from_bars(
        b.bars()
            .iter()
            .map(|bar| Bar::new(bar.degree + 1, bar.interval.reflected()))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Interval,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlError {
    #[error("need at least two breakpoints, got {0}")]
    TooFewPoints(usize),
    #[error("breakpoints must increase strictly (at index {0})")]
    NotIncreasing(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A piecewise linear function sampled at exact breakpoints; on the circle the last breakpoint
/// is joined back to the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlFunction {
    domain: Domain,
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl PlFunction {
    pub fn new(domain: Domain, breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self, PlError> {
        assert_eq!(breakpoints.len(), values.len());
        if breakpoints.len() < 2 {
            return Err(PlError::TooFewPoints(breakpoints.len()));
        }
        if let Some(k) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(PlError::NotIncreasing(k + 1));
        }
        Ok(PlFunction {
            domain,
            breakpoints,
            values,
        })
    }

    /// Breakpoints `0, 1, 2, ...` with the given values.
    pub fn sampled(domain: Domain, values: Vec<Rational>) -> Result<Self, PlError> {
        let breakpoints = (0..values.len() as i64).map(int).collect();
        PlFunction::new(domain, breakpoints, values)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn min(&self) -> &Rational {
        self.values.iter().min().expect("nonempty")
    }

    pub fn max(&self) -> &Rational {
        self.values.iter().max().expect("nonempty")
    }

    /// Header `domain: circle|interval`, then `<breakpoint> <value>` lines.
    pub fn parse(text: &str) -> Result<Self, PlError> {
        let err = |line: usize, message: String| PlError::Parse { line, message };
        let mut domain = None;
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some((key, value)) = content.split_once(':') {
                if key.trim() != "domain" {
                    return Err(err(line, format!("unknown header `{}`", key.trim())));
                }
                domain = Some(match value.trim() {
                    "circle" => Domain::Circle,
                    "interval" => Domain::Interval,
                    other => return Err(err(line, format!("unknown domain `{other}`"))),
                });
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err(line, format!("expected `<breakpoint> <value>`, got `{content}`")));
            }
            breakpoints.push(parse_rational(fields[0]).map_err(|e| err(line, e.to_string()))?);
            values.push(parse_rational(fields[1]).map_err(|e| err(line, e.to_string()))?);
        }
        let domain = domain.ok_or_else(|| err(0, "missing `domain:` header".into()))?;
        PlFunction::new(domain, breakpoints, values)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "domain: {}\n",
            match self.domain {
                Domain::Circle => "circle",
                Domain::Interval => "interval",
            }
        );
        for (x, y) in self.breakpoints.iter().zip(&self.values) {
            out.push_str(&format!("{} {}\n", format_rational(x), format_rational(y)));
        }
        out
    }
}

impl fmt::Display for PlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

struct UnionFind {
    parent: Vec<usize>,
    /// Birth value of the oldest vertex in each root's component.
    birth: Vec<(Rational, usize)>,
}

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }
}

/// Sublevel-set persistence: finite degree-0 bars by the elder rule, `[min, inf)` in degree 0,
/// and on the circle `[max, inf)` in degree 1.
pub fn sublevel_barcode(f: &PlFunction) -> Barcode {
    let n = f.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (&f.values[a], a).cmp(&(&f.values[b], b)));
    let mut uf = UnionFind {
        parent: (0..n).collect(),
        birth: (0..n).map(|v| (f.values[v].clone(), v)).collect(),
    };
    let mut active = vec![false; n];
    let mut bars = Vec::new();
    for &v in &order {
        active[v] = true;
        let value = &f.values[v];
        let mut neighbours = Vec::with_capacity(2);
        if v > 0 {
            neighbours.push(v - 1);
        } else if f.domain == Domain::Circle {
            neighbours.push(n - 1);
        }
        if v + 1 < n {
            neighbours.push(v + 1);
        } else if f.domain == Domain::Circle {
            neighbours.push(0);
        }
        for w in neighbours {
            if !active[w] {
                continue;
            }
            let (ra, rb) = (uf.find(v), uf.find(w));
            if ra == rb {
                continue;
            }
            let (elder, younger) = if uf.birth[ra] <= uf.birth[rb] { (ra, rb) } else { (rb, ra) };
            let born = uf.birth[younger].0.clone();
            if &born < value {
                bars.push(Bar::new(
                    0,
                    Interval::new(Endpoint::Finite(born), Endpoint::Finite(value.clone())).expect("born < value"),
                ));
            }
            uf.parent[younger] = elder;
        }
    }
    bars.push(Bar::new(
        0,
        Interval::new(Endpoint::Finite(f.min().clone()), Endpoint::PosInf).expect("finite < inf"),
    ));
    if f.domain == Domain::Circle {
        bars.push(Bar::new(
            1,
            Interval::new(Endpoint::Finite(f.max().clone()), Endpoint::PosInf).expect("finite < inf"),
        ));
    }
    Barcode::from_bars(bars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endpoint::rat;
    use crate::interleaving::{gamma, SearchOptions};
    use num_traits::Signed;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn bc(text: &str) -> Barcode {
        text.parse().unwrap()
    }

    #[test]
    fn left_infinite_example() {
        let b = bc("-1 -inf 7/10\n0 -inf 13/10\n");
        let r = spectral_invariants(&b, Convention::LeftInfinite, 1).unwrap();
        assert_eq!((r.c_minus.clone(), r.c_plus.clone(), r.gamma), (rat(7, 10), rat(13, 10), rat(3, 5)));
        assert_eq!(r.invariants.len(), 2);
    }

    #[test]
    fn missing_and_duplicate_bars_are_errors() {
        let b = bc("0 -inf 1");
        assert_eq!(
            spectral_invariants(&b, Convention::LeftInfinite, 1),
            Err(SpectralError::MissingEssential(-1))
        );
        let b = bc("-1 -inf 1 2\n0 -inf 2\n");
        assert!(matches!(
            spectral_invariants(&b, Convention::LeftInfinite, 1),
            Err(SpectralError::DuplicateEssential { degree: -1, count: 2 })
        ));
    }

    #[test]
    fn sublevel_examples() {
        let f = PlFunction::sampled(Domain::Interval, ints(&[0, 0, 0])).unwrap();
        assert_eq!(sublevel_barcode(&f), bc("0 0 inf"));
        let f = PlFunction::sampled(Domain::Interval, ints(&[0, 2, 1, 3])).unwrap();
        assert_eq!(sublevel_barcode(&f), bc("0 0 inf\n0 1 2\n"));
        let f = PlFunction::sampled(Domain::Circle, ints(&[0, 2, 1, 3])).unwrap();
        assert_eq!(sublevel_barcode(&f), bc("0 0 inf\n0 1 2\n1 3 inf\n"));
    }

    #[test]
    fn constant_circle_has_zero_spread() {
        let f = PlFunction::sampled(Domain::Circle, ints(&[0, 0, 0, 0])).unwrap();
        let r = spectral_invariants(&sublevel_barcode(&f), Convention::Sublevel, 1).unwrap();
        assert_eq!((r.c_minus, r.c_plus, r.gamma), (int(0), int(0), int(0)));
    }

    #[test]
    fn circle_min_and_max() {
        let f = PlFunction::sampled(Domain::Circle, ints(&[1, 3, 0, 2])).unwrap();
        let r = spectral_invariants(&sublevel_barcode(&f), Convention::Sublevel, 1).unwrap();
        assert_eq!((r.c_minus, r.c_plus, r.gamma), (int(0), int(3), int(3)));
    }

    #[test]
    fn converter_swaps_and_negates() {
        let f = PlFunction::sampled(Domain::Circle, ints(&[1, 3, 0, 2])).unwrap();
        let b = sublevel_barcode(&f);
        let left = sublevel_to_left_infinite(&b);
        let r = spectral_invariants(&left, Convention::LeftInfinite, 1).unwrap();
        assert_eq!((r.c_minus, r.c_plus), (int(-3), int(0)));
        assert_eq!(left_infinite_to_sublevel(&left), b);
    }

    #[test]
    fn pl_file_round_trip() {
        let text = "domain: circle\n0 1\n1/2 -3/4\n2 5\n";
        let f = PlFunction::parse(text).unwrap();
        assert_eq!(f.to_text(), text);
        assert!(PlFunction::parse("0 1\n1 2\n").is_err());
        assert!(matches!(PlFunction::parse("domain: interval\n1 0\n0 1\n"), Err(PlError::NotIncreasing(1))));
    }

    fn arb_values(max: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec((-20i64..20, 1i64..4), 2..max)
            .prop_map(|v| v.into_iter().map(|(n, d)| rat(n, d)).collect())
    }

    proptest! {
        #[test]
        fn circle_invariants_are_min_and_max(values in arb_values(13)) {
            let f = PlFunction::sampled(Domain::Circle, values).unwrap();
            let r = spectral_invariants(&sublevel_barcode(&f), Convention::Sublevel, 1).unwrap();
            prop_assert_eq!(&r.c_minus, f.min());
            prop_assert_eq!(&r.c_plus, f.max());
            prop_assert_eq!(r.gamma, f.max() - f.min());
        }

        #[test]
        fn shift_equivariant(values in arb_values(8), c in -5i64..5) {
            let f = PlFunction::sampled(Domain::Circle, values).unwrap();
            let b = sublevel_barcode(&f);
            let c = int(c);
            let r = spectral_invariants(&b, Convention::Sublevel, 1).unwrap();
            let s = spectral_invariants(&b.shift(&c), Convention::Sublevel, 1).unwrap();
            prop_assert_eq!(s.c_minus, &r.c_minus + &c);
            prop_assert_eq!(s.c_plus, &r.c_plus + &c);
            prop_assert_eq!(s.gamma, r.gamma);
        }

        #[test]
        fn stable_under_perturbation(values in arb_values(7), noise in proptest::collection::vec(-4i64..4, 7)) {
            let f = PlFunction::sampled(Domain::Interval, values.clone()).unwrap();
            let moved: Vec<Rational> = values.iter().zip(&noise).map(|(v, e)| v + rat(*e, 2)).collect();
            let sup = values.iter().zip(&moved).map(|(a, b)| (a - b).abs()).max().unwrap();
            let g = PlFunction::sampled(Domain::Interval, moved).unwrap();
            let d = gamma(&sublevel_barcode(&f), &sublevel_barcode(&g), &SearchOptions::default()).value;
            prop_assert!(d <= Endpoint::Finite(&sup + &sup));
        }
    }
}
