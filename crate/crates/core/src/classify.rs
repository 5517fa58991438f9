//! Angle classification, comb peak spacings and the two membership checks.
//!
//! The angle set contains every `theta` whose cotangent is a rational with
//! odd reduced denominator, plus the multiples of pi. Membership is decided
//! on exact data whenever the caller has it: cotangent witnesses carried
//! through circuit tracking, or the exact binary values of a hand-written
//! form or matrix. Plain float angles go through rational reconstruction
//! only when [`ReconstructionPolicy::allow_inexact`] is set.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    circuit_to_symplectic, track_position, Circuit, ExactPair, Gate, LinearQuadratureForm, ModeWitness, Param,
};
use crate::numtheory::{simplest_in_interval, Rational, SurdSum};
use crate::symplectic::{dsp_decompose, DspDecomposition, DspError, DspMode, DspRejection, SymplecticTransform};
use crate::SQRT_PI;

/// A rotation angle.
#[derive(Clone, Debug, PartialEq)]
pub enum AngleSpec {
    /// `theta` in `(0, pi)` with this cotangent.
    CotRational(Rational),
    /// `theta = k pi`.
    PiMultiple(i64),
    Radians(f64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotInThetaReason {
    EvenDenominator(Rational),
    /// The cotangent is a ratio of real algebraic numbers that is not rational.
    Irrational,
    /// A float angle with reconstruction disabled.
    InexactAngle,
    /// No rational with a small enough denominator lies within tolerance.
    NoReconstruction,
}

impl fmt::Display for NotInThetaReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotInThetaReason::EvenDenominator(r) => write!(f, "even denominator (cot theta = {r})"),
            NotInThetaReason::Irrational => write!(f, "irrational cotangent"),
            NotInThetaReason::InexactAngle => {
                write!(f, "inexact angle (float reconstruction is disabled)")
            }
            NotInThetaReason::NoReconstruction => write!(f, "no rational reconstruction of cot theta"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThetaClass {
    /// `cot theta = u/v`, `v` odd and positive.
    Case1 { u: BigInt, v: BigInt },
    /// `theta` a multiple of pi.
    Case2,
    NotInTheta(NotInThetaReason),
}

impl ThetaClass {
    pub fn is_member(&self) -> bool {
        !matches!(self, ThetaClass::NotInTheta(_))
    }
}

impl fmt::Display for ThetaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaClass::Case1 { u, v } => write!(f, "case1({u}/{v})"),
            ThetaClass::Case2 => write!(f, "case2"),
            ThetaClass::NotInTheta(r) => write!(f, "rejected: {r}"),
        }
    }
}

/// How float angles are turned into rationals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionPolicy {
    pub max_den: u64,
    pub tol: f64,
    /// Accept float angles at all. Off by default: membership from floats is
    /// a judgement call and has to be asked for.
    pub allow_inexact: bool,
}

impl Default for ReconstructionPolicy {
    fn default() -> Self {
        ReconstructionPolicy { max_den: 1_000_000, tol: 1e-9, allow_inexact: false }
    }
}

impl ReconstructionPolicy {
    pub fn permissive() -> Self {
        ReconstructionPolicy { allow_inexact: true, ..Self::default() }
    }
}

fn classify_cot(r: &Rational) -> ThetaClass {
    if r.has_odd_denominator() {
        ThetaClass::Case1 { u: r.numer().clone(), v: r.denom().clone() }
    } else {
        ThetaClass::NotInTheta(NotInThetaReason::EvenDenominator(r.clone()))
    }
}

/// Rational `u/v` with `|cot - u/v| <= tol` and the smallest denominator.
pub fn reconstruct_cot(cot: f64, recon: &ReconstructionPolicy) -> Option<Rational> {
    let c = BigRational::from_float(cot)?;
    let t = BigRational::from_float(recon.tol)?;
    let r = simplest_in_interval(&(&c - &t), &(&c + &t));
    (r.denom() <= &BigInt::from(recon.max_den)).then(|| Rational::from_big(r))
}

pub fn classify_angle(a: &AngleSpec, recon: &ReconstructionPolicy) -> ThetaClass {
    match a {
        AngleSpec::CotRational(r) => classify_cot(r),
        AngleSpec::PiMultiple(_) => ThetaClass::Case2,
        AngleSpec::Radians(x) => {
            if *x == 0.0 {
                return ThetaClass::Case2;
            }
            if !recon.allow_inexact || !x.is_finite() {
                return ThetaClass::NotInTheta(NotInThetaReason::InexactAngle);
            }
            let k = (x / std::f64::consts::PI).round();
            if (x - k * std::f64::consts::PI).abs() <= recon.tol {
                return ThetaClass::Case2;
            }
            match reconstruct_cot(1.0 / x.tan(), recon) {
                Some(r) => classify_cot(&r),
                None => ThetaClass::NotInTheta(NotInThetaReason::NoReconstruction),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("angle class has no peak spacing: {0}")]
pub struct NotClassified(pub ThetaClass);

/// Peak spacing of the rotated comb: `1/sqrt(u^2 + v^2)` or 2.
pub fn peak_spacing(cls: &ThetaClass) -> Result<f64, NotClassified> {
    match cls {
        ThetaClass::Case1 { u, v } => {
            let (u, v) = (u.to_f64().unwrap_or(f64::INFINITY), v.to_f64().unwrap_or(f64::INFINITY));
            Ok(1.0 / u.hypot(v))
        }
        ThetaClass::Case2 => Ok(2.0),
        other => Err(NotClassified(other.clone())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeClass {
    Theta(ThetaClass),
    /// `a_i = b_i = 0`: the mode drops out of the measured quadrature.
    ZeroCoefficient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeVerdict {
    /// 1-based.
    pub mode: usize,
    pub class: ModeClass,
    /// Comb step contributed by this mode, in position units; 0 for zero or
    /// rejected modes.
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub accepted: bool,
    pub per_mode: Vec<ModeVerdict>,
    pub reason: Option<String>,
}

fn comb_step(cls: &ThetaClass, a: f64, b: f64) -> f64 {
    match cls {
        ThetaClass::Case1 { v, .. } => b.abs() * SQRT_PI / v.to_f64().unwrap_or(f64::INFINITY),
        ThetaClass::Case2 => 2.0 * a.abs() * SQRT_PI,
        ThetaClass::NotInTheta(_) => 0.0,
    }
}

/// Class-A check on a tracked single-mode measurement operator.
pub fn rsp_check(form: &LinearQuadratureForm, recon: &ReconstructionPolicy) -> MembershipVerdict {
    let mut per_mode = Vec::with_capacity(form.n());
    let mut reason = None;
    for i in 0..form.n() {
        let (a, b) = (form.a()[i], form.b()[i]);
        let class = match form.witness(i) {
            Some(ModeWitness::Zero) => ModeClass::ZeroCoefficient,
            Some(ModeWitness::PositionOnly) => ModeClass::Theta(ThetaClass::Case2),
            Some(ModeWitness::Cot(r)) => ModeClass::Theta(classify_cot(&r)),
            Some(ModeWitness::Irrational) => ModeClass::Theta(ThetaClass::NotInTheta(NotInThetaReason::Irrational)),
            None => {
                if a == 0.0 && b == 0.0 {
                    ModeClass::ZeroCoefficient
                } else if b == 0.0 {
                    ModeClass::Theta(ThetaClass::Case2)
                } else if a == 0.0 {
                    ModeClass::Theta(classify_cot(&Rational::zero()))
                } else {
                    // a = s cos, b = -s sin
                    ModeClass::Theta(classify_angle(&AngleSpec::Radians((-b).atan2(a)), recon))
                }
            }
        };
        let spacing = match &class {
            ModeClass::Theta(t) => comb_step(t, a, b),
            ModeClass::ZeroCoefficient => 0.0,
        };
        if let ModeClass::Theta(ThetaClass::NotInTheta(r)) = &class {
            reason.get_or_insert_with(|| format!("mode {}: {r}", i + 1));
        }
        per_mode.push(ModeVerdict { mode: i + 1, class, spacing });
    }
    MembershipVerdict { accepted: reason.is_none(), per_mode, reason }
}

/// Exact knowledge about one column's angle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnHint {
    Cot(Rational),
    PiMultiple,
    Irrational,
    /// Rows disagree on the angle.
    Inconsistent,
}

/// Combines exact `(A_ji, B_ji)` pairs down column `i`.
pub fn column_hint<'a>(pairs: impl IntoIterator<Item = &'a ExactPair>) -> Option<ColumnHint> {
    let mut seen: Option<ColumnHint> = None;
    let mut any_b = false;
    let mut any_a = false;
    for p in pairs {
        match p.witness() {
            ModeWitness::Zero => continue,
            ModeWitness::PositionOnly => any_a = true,
            ModeWitness::Irrational => return Some(ColumnHint::Irrational),
            ModeWitness::Cot(r) => {
                any_b = true;
                match &seen {
                    None => seen = Some(ColumnHint::Cot(r)),
                    Some(ColumnHint::Cot(prev)) if *prev == r => {}
                    _ => return Some(ColumnHint::Inconsistent),
                }
            }
        }
    }
    match (any_a, any_b) {
        (_, false) if any_a => Some(ColumnHint::PiMultiple),
        (true, true) => Some(ColumnHint::Inconsistent),
        (false, false) => None,
        _ => seen,
    }
}

/// Hints from the exact binary values of the entries of `t`.
pub fn face_value_hints(t: &SymplecticTransform) -> Vec<Option<ColumnHint>> {
    let n = t.n();
    let m = t.matrix();
    (0..n)
        .map(|i| {
            let pairs: Option<Vec<ExactPair>> = (0..n)
                .map(|j| {
                    Some(ExactPair {
                        a: SurdSum::rational(BigRational::from_float(m[(j, i)])?),
                        b: SurdSum::rational(BigRational::from_float(m[(j, n + i)])?),
                    })
                })
                .collect();
            column_hint(pairs?.iter())
        })
        .collect()
}

/// Hints from exact tracking of every position row of the circuit.
pub fn circuit_hints(circ: &Circuit) -> Vec<Option<ColumnHint>> {
    let rows: Vec<LinearQuadratureForm> =
        (1..=circ.n()).map(|j| track_position(circ, j).expect("mode in range")).collect();
    (0..circ.n())
        .map(|i| {
            let pairs: Option<Vec<&ExactPair>> = rows.iter().map(|f| f.exact(i)).collect();
            column_hint(pairs?)
        })
        .collect()
}

/// A class-B decomposition whose angles are all classified.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassBResult {
    pub decomposition: DspDecomposition,
    pub classes: Vec<ThetaClass>,
}

/// Relative tolerance for reading angles off a transform.
pub const DSP_TOL: f64 = 1e-9;

/// Class-B check of a bare transform.
///
/// Entries are read as exact binary fractions, unless the policy allows
/// inexact angles, in which case they are treated as approximations and
/// the angles are reconstructed.
pub fn class_b_check(
    t: &SymplecticTransform,
    mode: DspMode,
    recon: &ReconstructionPolicy,
) -> Result<ClassBResult, DspError> {
    if recon.allow_inexact {
        class_b_check_with_hints(t, mode, recon, &[])
    } else {
        class_b_check_with_hints(t, mode, recon, &face_value_hints(t))
    }
}

/// Class-B check of a whole circuit, with exact angle hints from tracking.
pub fn class_b_check_circuit(
    circ: &Circuit,
    mode: DspMode,
    recon: &ReconstructionPolicy,
) -> Result<ClassBResult, DspError> {
    class_b_check_with_hints(&circuit_to_symplectic(circ), mode, recon, &circuit_hints(circ))
}

pub fn class_b_check_with_hints(
    t: &SymplecticTransform,
    mode: DspMode,
    recon: &ReconstructionPolicy,
    hints: &[Option<ColumnHint>],
) -> Result<ClassBResult, DspError> {
    for (i, h) in hints.iter().enumerate() {
        if h == &Some(ColumnHint::Inconsistent) {
            return Err(DspRejection::InconsistentColumnRatios { column: i }.into());
        }
    }
    let mut dec = dsp_decompose(t, mode, DSP_TOL)?;
    let mut classes = Vec::with_capacity(t.n());
    for i in 0..t.n() {
        let (c, s) = (dec.cos[i], dec.sin[i]);
        match hints.get(i).cloned().flatten() {
            Some(ColumnHint::Cot(r)) => {
                let x = r.to_f64();
                if (c - x * s).abs() > 1e-8 * (1.0 + x.abs()) {
                    return Err(DspRejection::InconsistentColumnRatios { column: i }.into());
                }
                dec.thetas[i] = AngleSpec::CotRational(r);
            }
            Some(ColumnHint::PiMultiple) => {
                if s.abs() > 1e-8 {
                    return Err(DspRejection::InconsistentColumnRatios { column: i }.into());
                }
                dec.thetas[i] = AngleSpec::PiMultiple(if c > 0.0 { 0 } else { 1 });
            }
            Some(ColumnHint::Irrational) => {
                return Err(DspRejection::ThetaNotInTheta {
                    mode: i + 1,
                    reason: NotInThetaReason::Irrational.to_string(),
                }
                .into())
            }
            Some(ColumnHint::Inconsistent) | None => {}
        }
        let cls = classify_angle(&dec.thetas[i], recon);
        if let ThetaClass::NotInTheta(r) = &cls {
            return Err(DspRejection::ThetaNotInTheta { mode: i + 1, reason: r.to_string() }.into());
        }
        classes.push(cls);
    }
    Ok(ClassBResult { decomposition: dec, classes })
}

/// Limits for [`gen_random_class_b`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassBBounds {
    /// `|u| <= max_u` in `cot theta = u/v`.
    pub max_u: u32,
    /// `v <= max_v`, odd.
    pub max_v: u32,
    /// Chance that a mode's angle is a multiple of pi instead.
    pub pi_prob: f64,
    /// SUM gates per mode in the mixing network.
    pub sums_per_mode: usize,
}

impl Default for ClassBBounds {
    fn default() -> Self {
        ClassBBounds { max_u: 9, max_v: 9, pi_prob: 0.15, sums_per_mode: 2 }
    }
}

/// A random class-B circuit: per-mode rotations with angles in the set,
/// rational squeezes, a SUM network, single-mode shears, displacements.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomClassB {
    n: usize,
    rotations: Vec<AngleSpec>,
    body: Vec<Gate>,
    measured: Vec<usize>,
}

impl RandomClassB {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rotations(&self) -> &[AngleSpec] {
        &self.rotations
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn circuit(&self) -> Circuit {
        let mut gates: Vec<Gate> = self
            .rotations
            .iter()
            .enumerate()
            .map(|(i, a)| Gate::Rotation { mode: i + 1, angle: a.clone() })
            .collect();
        gates.extend(self.body.iter().cloned());
        Circuit::new(self.n, gates, self.measured.clone()).expect("valid by construction")
    }

    pub fn transform(&self) -> SymplecticTransform {
        circuit_to_symplectic(&self.circuit())
    }

    /// Replaces the rotation on `mode` (1-based).
    pub fn with_rotation(&self, mode: usize, angle: AngleSpec) -> Self {
        let mut out = self.clone();
        out.rotations[mode - 1] = angle;
        out
    }
}

pub fn gen_random_class_b(n: usize, seed: u64, bounds: &ClassBBounds) -> RandomClassB {
    assert!(n >= 1, "need at least one mode");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotations = (0..n)
        .map(|_| {
            if rng.random_bool(bounds.pi_prob) {
                AngleSpec::PiMultiple(rng.random_range(0..2))
            } else {
                let u = rng.random_range(-(bounds.max_u as i64)..=bounds.max_u as i64);
                let v = 2 * rng.random_range(0..=(bounds.max_v.max(1) as i64 - 1) / 2) + 1;
                AngleSpec::CotRational(Rational::new(u, v).expect("v odd"))
            }
        })
        .collect();
    let mut body = Vec::new();
    for mode in 1..=n {
        let p: i64 = rng.random_range(1..=4);
        let q: i64 = rng.random_range(1..=4);
        let sign = if rng.random_bool(0.2) { -1 } else { 1 };
        body.push(Gate::Squeeze { mode, s: Param::exact(Rational::new(sign * p, q).expect("q > 0")) });
    }
    if n > 1 {
        for _ in 0..n * bounds.sums_per_mode {
            let control = rng.random_range(1..=n);
            let mut target = rng.random_range(1..n);
            if target >= control {
                target += 1;
            }
            body.push(Gate::Sum { control, target });
        }
    }
    for mode in 1..=n {
        if rng.random_bool(0.5) {
            let sigma = Rational::new(rng.random_range(-8..=8i64), 4).expect("nonzero");
            body.push(Gate::Shear { mode, sigma: Param::exact(sigma) });
        }
        if rng.random_bool(0.5) {
            let c = Rational::new(rng.random_range(-20..=20i64), 10).expect("nonzero");
            body.push(Gate::DisplaceQ { mode, c: Param::exact(c) });
        }
        if rng.random_bool(0.3) {
            let c = Rational::new(rng.random_range(-20..=20i64), 10).expect("nonzero");
            body.push(Gate::DisplaceP { mode, c: Param::exact(c) });
        }
    }
    let mut modes: Vec<usize> = (1..=n).collect();
    modes.shuffle(&mut rng);
    let k = rng.random_range(1..=n);
    let mut measured = modes[..k].to_vec();
    measured.sort_unstable();
    RandomClassB { n, rotations, body, measured }
}

/// `cot` of a Case1 class as an exact rational, for display.
pub fn case1_cot(cls: &ThetaClass) -> Option<Rational> {
    match cls {
        ThetaClass::Case1 { u, v } => Rational::new(u.clone(), v.clone()).ok(),
        _ => None,
    }
}
