//! Gate-level circuit IR, the line-oriented text format, and Heisenberg
//! tracking of position quadratures.
//!
//! ```text
//! # Fourier on mode 2, then SUM 2 -> 1
//! modes 2
//! F 2
//! SUM 2 1
//! MEASURE 1
//! ```
//!
//! Modes are 1-based everywhere in the IR. Gate parameters other than `rad`
//! angles are stored as exact rationals (decimal literals are exact), and
//! tracking carries each mode's coefficient pair exactly as a
//! [`SurdSum`] alongside the float value.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::AngleSpec;
use crate::numtheory::{squarefree_split, Rational, SurdSum};
use crate::symplectic::SymplecticTransform;

/// An exact real gate parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    exact: Rational,
}

impl Param {
    pub fn exact(r: Rational) -> Self {
        Param { exact: r }
    }

    /// The decimal number that prints as `x` (shortest round-trip form).
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        Rational::parse(&format!("{x:e}")).map(Param::exact)
    }

    pub fn parse(s: &str) -> Option<Self> {
        Rational::parse(s).map(Param::exact)
    }

    pub fn value(&self) -> f64 {
        self.exact.to_f64()
    }

    pub fn as_rational(&self) -> &Rational {
        &self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match terminating_decimal(&self.exact) {
            Some(s) => f.write_str(&s),
            None => write!(f, "{}", self.exact),
        }
    }
}

// "-12.375" for fractions whose denominator is 2^a 5^b
fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0usize;
    let mut fives = 0usize;
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return None;
    }
    let k = twos.max(fives);
    if k == 0 {
        return Some(r.numer().to_string());
    }
    let scaled = r.numer() * num_traits::pow(BigInt::from(10), k) / r.denom();
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = k + 1);
    let (int, frac) = digits.split_at(digits.len() - k);
    let sign = if scaled.is_negative() { "-" } else { "" };
    Some(format!("{sign}{int}.{frac}"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Rotation { mode: usize, angle: AngleSpec },
    Fourier { mode: usize },
    Squeeze { mode: usize, s: Param },
    /// `p -> p + sigma q`
    Shear { mode: usize, sigma: Param },
    Sum { control: usize, target: usize },
    DisplaceQ { mode: usize, c: Param },
    DisplaceP { mode: usize, c: Param },
}

impl Gate {
    fn modes(&self) -> [usize; 2] {
        match self {
            Gate::Rotation { mode, .. }
            | Gate::Fourier { mode }
            | Gate::Squeeze { mode, .. }
            | Gate::Shear { mode, .. }
            | Gate::DisplaceQ { mode, .. }
            | Gate::DisplaceP { mode, .. } => [*mode, *mode],
            Gate::Sum { control, target } => [*control, *target],
        }
    }

    fn check(&self, n: usize) -> Result<(), CircuitError> {
        for m in self.modes() {
            if m == 0 || m > n {
                return Err(CircuitError::ModeOutOfRange { mode: m, n });
            }
        }
        match self {
            Gate::Squeeze { s, .. } if s.is_zero() => Err(CircuitError::ZeroSqueeze),
            Gate::Sum { control, target } if control == target => Err(CircuitError::SumSelf(*control)),
            Gate::Rotation { angle: AngleSpec::Radians(x), .. } if !x.is_finite() => {
                Err(CircuitError::NonFinite)
            }
            _ => Ok(()),
        }
    }

    /// `(cos, sin)` of a rotation angle, exact for `pi k`.
    fn cos_sin(angle: &AngleSpec) -> (f64, f64) {
        match angle {
            AngleSpec::CotRational(r) => {
                // theta in (0, pi): sin > 0
                let x = r.to_f64();
                if x.abs() > 1e150 {
                    (x.signum(), 1.0 / x.abs())
                } else {
                    let h = x.hypot(1.0);
                    (x / h, 1.0 / h)
                }
            }
            AngleSpec::PiMultiple(k) => (if k.is_even() { 1.0 } else { -1.0 }, 0.0),
            AngleSpec::Radians(t) => (t.cos(), t.sin()),
        }
    }

    /// Left-multiplies `(m, rbar)` by this gate, i.e. appends the gate to a
    /// transform built so far.
    pub fn apply_left(&self, n: usize, m: &mut DMatrix<f64>, rbar: &mut DVector<f64>) {
        let q = |j: usize| j - 1;
        let p = |j: usize| n + j - 1;
        // rows of the gate matrix act on rows of (m | rbar)
        let mix = |m: &mut DMatrix<f64>, rbar: &mut DVector<f64>, r1: usize, r2: usize, g: [[f64; 2]; 2]| {
            for col in 0..2 * n {
                let (x, y) = (m[(r1, col)], m[(r2, col)]);
                m[(r1, col)] = g[0][0] * x + g[0][1] * y;
                m[(r2, col)] = g[1][0] * x + g[1][1] * y;
            }
            let (x, y) = (rbar[r1], rbar[r2]);
            rbar[r1] = g[0][0] * x + g[0][1] * y;
            rbar[r2] = g[1][0] * x + g[1][1] * y;
        };
        match self {
            Gate::Rotation { mode, angle } => {
                let (c, s) = Self::cos_sin(angle);
                mix(m, rbar, q(*mode), p(*mode), [[c, -s], [s, c]]);
            }
            Gate::Fourier { mode } => mix(m, rbar, q(*mode), p(*mode), [[0.0, -1.0], [1.0, 0.0]]),
            Gate::Squeeze { mode, s } => {
                let s = s.value();
                mix(m, rbar, q(*mode), p(*mode), [[s, 0.0], [0.0, 1.0 / s]]);
            }
            Gate::Shear { mode, sigma } => {
                mix(m, rbar, q(*mode), p(*mode), [[1.0, 0.0], [sigma.value(), 1.0]]);
            }
            Gate::Sum { control, target } => {
                // q_t += q_c, p_c -= p_t
                let (qc, qt, pc, pt) = (q(*control), q(*target), p(*control), p(*target));
                for col in 0..2 * n {
                    m[(qt, col)] += m[(qc, col)];
                    m[(pc, col)] -= m[(pt, col)];
                }
                rbar[qt] += rbar[qc];
                rbar[pc] -= rbar[pt];
            }
            Gate::DisplaceQ { mode, c } => rbar[q(*mode)] += c.value(),
            Gate::DisplaceP { mode, c } => rbar[p(*mode)] += c.value(),
        }
    }

    /// The gate alone as an `n`-mode transform.
    pub fn transform(&self, n: usize) -> SymplecticTransform {
        let mut m = DMatrix::identity(2 * n, 2 * n);
        let mut r = DVector::zeros(2 * n);
        self.apply_left(n, &mut m, &mut r);
        SymplecticTransform::new(m, r).expect("square by construction")
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rotation { mode, angle } => match angle {
                AngleSpec::CotRational(r) => write!(f, "R {mode} cot {r}"),
                AngleSpec::PiMultiple(k) => write!(f, "R {mode} pi {k}"),
                AngleSpec::Radians(x) => write!(f, "R {mode} rad {x:?}"),
            },
            Gate::Fourier { mode } => write!(f, "F {mode}"),
            Gate::Squeeze { mode, s } => write!(f, "S {mode} {s}"),
            Gate::Shear { mode, sigma } => write!(f, "P {mode} {sigma}"),
            Gate::Sum { control, target } => write!(f, "SUM {control} {target}"),
            Gate::DisplaceQ { mode, c } => write!(f, "DQ {mode} {c}"),
            Gate::DisplaceP { mode, c } => write!(f, "DP {mode} {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("mode {mode} out of range 1..={n}")]
    ModeOutOfRange { mode: usize, n: usize },
    #[error("zero squeeze")]
    ZeroSqueeze,
    #[error("SUM control and target are both mode {0}")]
    SumSelf(usize),
    #[error("non-finite parameter")]
    NonFinite,
    #[error("no measured modes")]
    NoMeasurement,
    #[error("mode {0} measured twice")]
    DuplicateMeasurement(usize),
    #[error("mode {0} is not measured")]
    NotMeasured(usize),
    #[error("a circuit needs at least one mode")]
    NoModes,
    #[error("form has {form} modes, gate needs {need}")]
    FormTooShort { form: usize, need: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, measured: Vec<usize>) -> Result<Self, CircuitError> {
        if n == 0 {
            return Err(CircuitError::NoModes);
        }
        for g in &gates {
            g.check(n)?;
        }
        if measured.is_empty() {
            return Err(CircuitError::NoMeasurement);
        }
        for (i, &j) in measured.iter().enumerate() {
            if j == 0 || j > n {
                return Err(CircuitError::ModeOutOfRange { mode: j, n });
            }
            if measured[..i].contains(&j) {
                return Err(CircuitError::DuplicateMeasurement(j));
            }
        }
        Ok(Circuit { n, gates, measured })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn with_measured(&self, measured: Vec<usize>) -> Result<Self, CircuitError> {
        Circuit::new(self.n, self.gates.clone(), measured)
    }

    /// The inverse of [`parse_circuit`].
    pub fn render(&self) -> String {
        let mut out = format!("modes {}\n", self.n);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out.push_str("MEASURE");
        for j in &self.measured {
            out.push_str(&format!(" {j}"));
        }
        out.push('\n');
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected `modes <n>` first")]
    MissingModes,
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unexpected `{0}`")]
    Trailing(String),
    #[error("malformed fraction `{0}`")]
    MalformedFraction(String),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("MEASURE must be the last line")]
    AfterMeasure,
    #[error("missing MEASURE line")]
    MissingMeasure,
    #[error(transparent)]
    Invalid(#[from] CircuitError),
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: line[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

/// Parses the circuit text format.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    let mut measured: Option<Vec<usize>> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        if toks.is_empty() {
            continue;
        }
        let err = |col: usize, kind: ParseErrorKind| ParseError { line: line_no, column: col, kind };
        let head = &toks[0];
        if measured.is_some() {
            return Err(err(head.col, ParseErrorKind::AfterMeasure));
        }
        let Some(nm) = n else {
            if head.text != "modes" {
                return Err(err(head.col, ParseErrorKind::MissingModes));
            }
            let t = toks.get(1).ok_or_else(|| err(head.col + head.text.len(), ParseErrorKind::Expected("mode count")))?;
            let v: usize = t.text.parse().map_err(|_| err(t.col, ParseErrorKind::Expected("mode count")))?;
            if v == 0 {
                return Err(err(t.col, CircuitError::NoModes.into()));
            }
            if let Some(extra) = toks.get(2) {
                return Err(err(extra.col, ParseErrorKind::Trailing(extra.text.into())));
            }
            n = Some(v);
            continue;
        };

        let end_col = body.trim_end().chars().count() + 1;
        let mut pos = 1;
        let mut next = |what: &'static str| -> Result<&Tok, ParseError> {
            let t = toks.get(pos).ok_or_else(|| err(end_col, ParseErrorKind::Expected(what)))?;
            pos += 1;
            Ok(t)
        };
        let mode_tok = |t: &Tok| -> Result<usize, ParseError> {
            let m: usize = t.text.parse().map_err(|_| err(t.col, ParseErrorKind::Expected("mode index")))?;
            if m == 0 || m > nm {
                return Err(err(t.col, CircuitError::ModeOutOfRange { mode: m, n: nm }.into()));
            }
            Ok(m)
        };
        let param_tok = |t: &Tok| -> Result<Param, ParseError> {
            Param::parse(t.text).ok_or_else(|| err(t.col, ParseErrorKind::MalformedNumber(t.text.into())))
        };

        let gate = match head.text {
            "MEASURE" => {
                let mut ms: Vec<usize> = Vec::new();
                for t in &toks[1..] {
                    let m = mode_tok(t)?;
                    if ms.contains(&m) {
                        return Err(err(t.col, CircuitError::DuplicateMeasurement(m).into()));
                    }
                    ms.push(m);
                }
                if ms.is_empty() {
                    return Err(err(end_col, ParseErrorKind::Expected("measured mode")));
                }
                measured = Some(ms);
                continue;
            }
            "R" => {
                let mode = mode_tok(next("mode index")?)?;
                let kind = next("`cot`, `pi` or `rad`")?;
                let val = next("angle value")?;
                let angle = match kind.text {
                    "cot" => {
                        let (p, q) = val
                            .text
                            .split_once('/')
                            .ok_or_else(|| err(val.col, ParseErrorKind::MalformedFraction(val.text.into())))?;
                        let bad = || err(val.col, ParseErrorKind::MalformedFraction(val.text.into()));
                        let p: BigInt = p.parse().map_err(|_| bad())?;
                        let q: BigInt = q.parse().map_err(|_| bad())?;
                        AngleSpec::CotRational(Rational::new(p, q).map_err(|_| bad())?)
                    }
                    "pi" => AngleSpec::PiMultiple(
                        val.text.parse().map_err(|_| err(val.col, ParseErrorKind::Expected("integer multiple of pi")))?,
                    ),
                    "rad" => {
                        let x: f64 = val
                            .text
                            .parse()
                            .map_err(|_| err(val.col, ParseErrorKind::MalformedNumber(val.text.into())))?;
                        if !x.is_finite() {
                            return Err(err(val.col, CircuitError::NonFinite.into()));
                        }
                        AngleSpec::Radians(x)
                    }
                    _ => return Err(err(kind.col, ParseErrorKind::Expected("`cot`, `pi` or `rad`"))),
                };
                Gate::Rotation { mode, angle }
            }
            "F" => Gate::Fourier { mode: mode_tok(next("mode index")?)? },
            "S" => {
                let mode = mode_tok(next("mode index")?)?;
                let t = next("squeeze factor")?;
                let s = param_tok(t)?;
                if s.is_zero() {
                    return Err(err(t.col, CircuitError::ZeroSqueeze.into()));
                }
                Gate::Squeeze { mode, s }
            }
            "P" => {
                let mode = mode_tok(next("mode index")?)?;
                Gate::Shear { mode, sigma: param_tok(next("shear value")?)? }
            }
            "SUM" => {
                let control = mode_tok(next("control mode")?)?;
                let t = next("target mode")?;
                let target = mode_tok(t)?;
                if control == target {
                    return Err(err(t.col, CircuitError::SumSelf(control).into()));
                }
                Gate::Sum { control, target }
            }
            "DQ" => {
                let mode = mode_tok(next("mode index")?)?;
                Gate::DisplaceQ { mode, c: param_tok(next("displacement")?)? }
            }
            "DP" => {
                let mode = mode_tok(next("mode index")?)?;
                Gate::DisplaceP { mode, c: param_tok(next("displacement")?)? }
            }
            "modes" => return Err(err(head.col, ParseErrorKind::Trailing("modes".into()))),
            other => return Err(err(head.col, ParseErrorKind::UnknownGate(other.into()))),
        };
        if let Some(extra) = toks.get(pos) {
            return Err(err(extra.col, ParseErrorKind::Trailing(extra.text.into())));
        }
        gates.push(gate);
    }
    let at_end = |kind| ParseError { line: last_line.max(1), column: 1, kind };
    let n = n.ok_or_else(|| at_end(ParseErrorKind::MissingModes))?;
    let measured = measured.ok_or_else(|| at_end(ParseErrorKind::MissingMeasure))?;
    Circuit::new(n, gates, measured).map_err(|e| at_end(e.into()))
}

/// Exact value of one mode's coefficient pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPair {
    pub a: SurdSum,
    pub b: SurdSum,
}

/// What the exact pair `(a, b)` says about `cot theta = -a/b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeWitness {
    Cot(Rational),
    /// `b = 0`, `a != 0`: theta is a multiple of pi.
    PositionOnly,
    Zero,
    /// `-a/b` is provably irrational.
    Irrational,
}

// SurdSums with this many terms are dropped rather than carried along
const MAX_SURD_TERMS: usize = 64;

impl ExactPair {
    pub fn witness(&self) -> ModeWitness {
        if self.b.is_zero() {
            return if self.a.is_zero() { ModeWitness::Zero } else { ModeWitness::PositionOnly };
        }
        match self.a.ratio(&self.b) {
            Some(r) => ModeWitness::Cot(Rational::from_big(-r)),
            None => ModeWitness::Irrational,
        }
    }

    fn bounded(self) -> Option<Self> {
        (self.a.num_terms() <= MAX_SURD_TERMS && self.b.num_terms() <= MAX_SURD_TERMS).then_some(self)
    }
}

/// `sum_i a_i q_i + b_i p_i + c`, a Heisenberg-evolved position operator.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearQuadratureForm {
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    exact: Vec<Option<ExactPair>>,
}

impl LinearQuadratureForm {
    /// A form given by its coefficients. Finite values are taken as exact
    /// binary fractions.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Self {
        assert_eq!(a.len(), b.len(), "coefficient vectors differ in length");
        let exact = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| {
                let ex = BigRational::from_float(x)?;
                let ey = BigRational::from_float(y)?;
                Some(ExactPair { a: SurdSum::rational(ex), b: SurdSum::rational(ey) })
            })
            .collect();
        LinearQuadratureForm { a, b, c, exact }
    }

    /// `q_j` on `n` modes, 1-based.
    pub fn position(n: usize, j: usize) -> Self {
        let mut a = vec![0.0; n];
        a[j - 1] = 1.0;
        Self::new(a, vec![0.0; n], 0.0)
    }

    /// Forgets all exact information, as if every coefficient were rounded.
    pub fn without_exact(mut self) -> Self {
        self.exact.iter_mut().for_each(|e| *e = None);
        self
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn exact(&self, i: usize) -> Option<&ExactPair> {
        self.exact[i].as_ref()
    }

    /// Per-mode exact witness, `None` where exactness was lost.
    pub fn witness(&self, i: usize) -> Option<ModeWitness> {
        self.exact[i].as_ref().map(ExactPair::witness)
    }

    pub fn witnesses(&self) -> Vec<Option<ModeWitness>> {
        (0..self.n()).map(|i| self.witness(i)).collect()
    }

    /// Every `Cot(u/v)` witness agrees with the float coefficients:
    /// `|a v + b u| <= tol * max(|a v|, |b u|)`.
    pub fn witnesses_consistent(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| match self.witness(i) {
            Some(ModeWitness::Cot(r)) => {
                let (u, v) = (r.numer_f64(), r.denom_f64());
                let (av, bu) = (self.a[i] * v, self.b[i] * u);
                (av + bu).abs() <= tol * av.abs().max(bu.abs()).max(f64::MIN_POSITIVE)
            }
            Some(ModeWitness::PositionOnly) => self.b[i] == 0.0,
            Some(ModeWitness::Zero) => self.a[i] == 0.0 && self.b[i] == 0.0,
            _ => true,
        })
    }
}

impl Rational {
    fn numer_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self.numer()).unwrap_or(f64::NAN)
    }

    fn denom_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self.denom()).unwrap_or(f64::NAN)
    }
}

fn rot_exact(pair: &ExactPair, angle: &AngleSpec) -> Option<ExactPair> {
    match angle {
        AngleSpec::CotRational(r) => {
            let (u, v) = (r.numer(), r.denom());
            let norm: BigInt = u * u + v * v;
            let (k, m) = squarefree_split(&norm)?;
            // 1/sqrt(N) = sqrt(m) / (k m)
            let inv = BigRational::new(BigInt::one(), k * &m);
            let ur = BigRational::from_integer(u.clone());
            let vr = BigRational::from_integer(v.clone());
            let a = pair.a.scale(&ur).add(&pair.b.scale(&vr)).mul_sqrt(&m).scale(&inv);
            let b = pair.b.scale(&ur).sub(&pair.a.scale(&vr)).mul_sqrt(&m).scale(&inv);
            ExactPair { a, b }.bounded()
        }
        AngleSpec::PiMultiple(k) => Some(if k.is_even() {
            pair.clone()
        } else {
            ExactPair { a: pair.a.neg(), b: pair.b.neg() }
        }),
        AngleSpec::Radians(x) => {
            (*x == 0.0 || (pair.a.is_zero() && pair.b.is_zero())).then(|| pair.clone())
        }
    }
}

/// Substitutes the Heisenberg action of `g` into `form`.
///
/// To obtain `U^dag q_j U` for `U = g_k ... g_1` the gates are substituted
/// last-first; [`track_measurement_operator`] does that.
pub fn apply_gate_adjoint(
    form: &LinearQuadratureForm,
    g: &Gate,
) -> Result<LinearQuadratureForm, CircuitError> {
    let n = form.n();
    g.check(n).map_err(|e| match e {
        CircuitError::ModeOutOfRange { mode, .. } => CircuitError::FormTooShort { form: n, need: mode },
        other => other,
    })?;
    let mut f = form.clone();
    match g {
        Gate::Rotation { mode, angle } => {
            let i = mode - 1;
            let (c, s) = Gate::cos_sin(angle);
            let (a, b) = (f.a[i], f.b[i]);
            f.a[i] = a * c + b * s;
            f.b[i] = -a * s + b * c;
            f.exact[i] = f.exact[i].as_ref().and_then(|p| rot_exact(p, angle));
        }
        Gate::Fourier { mode } => {
            let i = mode - 1;
            let (a, b) = (f.a[i], f.b[i]);
            f.a[i] = b;
            f.b[i] = -a;
            if let Some(p) = &mut f.exact[i] {
                *p = ExactPair { a: p.b.clone(), b: p.a.neg() };
            }
        }
        Gate::Squeeze { mode, s } => {
            let i = mode - 1;
            f.a[i] *= s.value();
            f.b[i] /= s.value();
            if let Some(p) = &mut f.exact[i] {
                let sr = s.as_rational().as_big();
                *p = ExactPair { a: p.a.scale(sr), b: p.b.scale(&sr.recip()) };
            }
        }
        Gate::Shear { mode, sigma } => {
            let i = mode - 1;
            f.a[i] += sigma.value() * f.b[i];
            if let Some(p) = &mut f.exact[i] {
                p.a = p.a.add(&p.b.scale(sigma.as_rational().as_big()));
            }
        }
        Gate::Sum { control, target } => {
            let (j, k) = (control - 1, target - 1);
            f.a[j] += f.a[k];
            f.b[k] -= f.b[j];
            if let (Some(pj), Some(pk)) = (f.exact[j].take(), f.exact[k].take()) {
                let nj = ExactPair { a: pj.a.add(&pk.a), b: pj.b.clone() };
                let nk = ExactPair { a: pk.a, b: pk.b.sub(&pj.b) };
                f.exact[j] = nj.bounded();
                f.exact[k] = nk.bounded();
            }
        }
        Gate::DisplaceQ { mode, c } => f.c += f.a[mode - 1] * c.value(),
        Gate::DisplaceP { mode, c } => f.c += f.b[mode - 1] * c.value(),
    }
    Ok(f)
}

/// `U^dag q_j U` for a measured mode `j` (1-based).
pub fn track_measurement_operator(circ: &Circuit, j: usize) -> Result<LinearQuadratureForm, CircuitError> {
    if !circ.measured.contains(&j) {
        return Err(CircuitError::NotMeasured(j));
    }
    track_position(circ, j)
}

/// `U^dag q_j U` for any mode `j` (1-based).
pub fn track_position(circ: &Circuit, j: usize) -> Result<LinearQuadratureForm, CircuitError> {
    if j == 0 || j > circ.n {
        return Err(CircuitError::ModeOutOfRange { mode: j, n: circ.n });
    }
    let mut f = LinearQuadratureForm::position(circ.n, j);
    for g in circ.gates.iter().rev() {
        f = apply_gate_adjoint(&f, g)?;
    }
    Ok(f)
}

/// The whole circuit as `(M, rbar)`.
pub fn circuit_to_symplectic(circ: &Circuit) -> SymplecticTransform {
    let n = circ.n;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    let mut r = DVector::zeros(2 * n);
    for g in &circ.gates {
        g.apply_left(n, &mut m, &mut r);
    }
    SymplecticTransform::new(m, r).expect("square by construction")
}

/// A random circuit of `len` gates drawn from every gate kind, measuring
/// mode 1. Deterministic in `seed`.
pub fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..len).map(|_| random_gate(&mut rng, n)).collect();
    Circuit::new(n, gates, vec![1]).expect("valid by construction")
}

fn random_param(rng: &mut impl Rng, lo: f64, hi: f64) -> Param {
    // three decimals keeps rendered circuits readable
    let x = (rng.random_range(lo..hi) * 1000.0).round() / 1000.0;
    Param::from_f64(x).expect("finite")
}

fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let mode = rng.random_range(1..=n);
    let kind = rng.random_range(0..if n > 1 { 8 } else { 7 });
    match kind {
        0 => {
            let u: i64 = rng.random_range(-9..=9);
            let v: i64 = rng.random_range(1..=9);
            Gate::Rotation { mode, angle: AngleSpec::CotRational(Rational::new(u, v).expect("v > 0")) }
        }
        1 => Gate::Rotation { mode, angle: AngleSpec::Radians(rng.random_range(-3.2..3.2)) },
        2 => Gate::Fourier { mode },
        3 => {
            // log-uniform on [1/2, 2], so squeezing does not drift upward
            let x = (rng.random_range(-std::f64::consts::LN_2..std::f64::consts::LN_2).exp() * 1000.0).round() / 1000.0;
            let mut s = Param::from_f64(x).expect("finite");
            if rng.random_bool(0.2) {
                s = Param::exact(-s.as_rational().clone());
            }
            Gate::Squeeze { mode, s }
        }
        4 => Gate::Shear { mode, sigma: random_param(rng, -2.0, 2.0) },
        5 => Gate::DisplaceQ { mode, c: random_param(rng, -3.0, 3.0) },
        6 => Gate::DisplaceP { mode, c: random_param(rng, -3.0, 3.0) },
        _ => {
            let control = mode;
            let mut target = rng.random_range(1..n);
            if target >= control {
                target += 1;
            }
            Gate::Sum { control, target }
        }
    }
}
