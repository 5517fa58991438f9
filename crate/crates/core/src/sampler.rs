//! Dirac-comb outcome distributions and sampling.
//!
//! A comb is an affine integer lattice `{ G m + c : m in Z^n }`. The ideal
//! GKP distribution is uniform over it and therefore improper; sampling
//! draws each `m_i` uniformly from `[-M, M]` instead.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`. Batches are cut into chunks of [`CHUNK`] draws and
//! chunk `k` uses stream `k` of that seed, so a batch is identical whether it
//! runs sequentially or in parallel.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::circuit::LinearQuadratureForm;
use crate::classify::{peak_spacing, ClassBResult, MembershipVerdict, ModeClass, ModeVerdict, ThetaClass};
use crate::json::{num, num_array};
use crate::par::Exec;
use crate::symplectic::SymplecticTransform;
use crate::SQRT_PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("not simulatable: {0}")]
    NotSimulatable(String),
    #[error("measured mode {0} out of range")]
    BadMode(usize),
    #[error("offsets have length {got}, expected {expected}")]
    OffsetLength { got: usize, expected: usize },
}

/// Single measured mode: `x = sum_i m_i g_i + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombPdf1d {
    pub spacings: Vec<f64>,
    pub offset: f64,
    pub cases: Vec<ModeVerdict>,
}

/// Several measured modes: `x = G m + c`, with `G` of shape `k x n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombPdfNd {
    pub matrix: DMatrix<f64>,
    pub offsets: Vec<f64>,
    pub measured: Vec<usize>,
    pub classes: Vec<ThetaClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    /// `M`: every `m_i` is uniform on `[-M, M]`.
    pub integer_bound: u64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { integer_bound: 100, seed: 0 }
    }
}

/// Draws per chunk of a batch; chunk `k` uses RNG stream `k`.
pub const CHUNK: usize = 1024;

/// Anything with an affine lattice as support.
pub trait CombSupport {
    /// Generator matrix, one column per integer coordinate.
    fn generators(&self) -> DMatrix<f64>;
    fn shift(&self) -> Vec<f64>;
}

impl CombSupport for CombPdf1d {
    fn generators(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, self.spacings.len(), &self.spacings)
    }

    fn shift(&self) -> Vec<f64> {
        vec![self.offset]
    }
}

impl CombSupport for CombPdfNd {
    fn generators(&self) -> DMatrix<f64> {
        self.matrix.clone()
    }

    fn shift(&self) -> Vec<f64> {
        self.offsets.clone()
    }
}

/// `G m + c`, summed in column order. Sampling and membership both go
/// through here, so a sampled point is reproduced bit for bit.
pub fn lattice_point(g: &DMatrix<f64>, c: &[f64], m: &[i64]) -> Vec<f64> {
    (0..g.nrows())
        .map(|j| {
            let mut acc = 0.0;
            for (i, &mi) in m.iter().enumerate() {
                acc += g[(j, i)] * mi as f64;
            }
            acc + c[j]
        })
        .collect()
}

pub fn build_single_pdf(form: &LinearQuadratureForm, verdict: &MembershipVerdict) -> Result<CombPdf1d, SamplerError> {
    if !verdict.accepted {
        return Err(SamplerError::NotSimulatable(verdict.reason.clone().unwrap_or_default()));
    }
    let spacings = verdict.per_mode.iter().map(|m| m.spacing).collect();
    Ok(CombPdf1d { spacings, offset: form.c(), cases: verdict.per_mode.clone() })
}

/// `G_ji = At_ji sqrt(pi) Delta_i` over the measured rows `j` (1-based).
pub fn build_multi_pdf(res: &ClassBResult, measured: &[usize], offsets: Vec<f64>) -> Result<CombPdfNd, SamplerError> {
    if offsets.len() != measured.len() {
        return Err(SamplerError::OffsetLength { got: offsets.len(), expected: measured.len() });
    }
    let at = &res.decomposition.atilde;
    let n = at.ncols();
    let deltas = res
        .classes
        .iter()
        .map(|c| peak_spacing(c).map_err(|e| SamplerError::NotSimulatable(e.to_string())))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut g = DMatrix::zeros(measured.len(), n);
    for (r, &j) in measured.iter().enumerate() {
        if j == 0 || j > n {
            return Err(SamplerError::BadMode(j));
        }
        for i in 0..n {
            g[(r, i)] = at[(j - 1, i)] * SQRT_PI * deltas[i];
        }
    }
    Ok(CombPdfNd { matrix: g, offsets, measured: measured.to_vec(), classes: res.classes.clone() })
}

/// Position entries of `rbar` for the measured modes.
pub fn position_offsets(t: &SymplecticTransform, measured: &[usize]) -> Vec<f64> {
    measured.iter().map(|&j| t.rbar()[j - 1]).collect()
}

fn draw(rng: &mut ChaCha8Rng, n: usize, bound: u64) -> Vec<i64> {
    let b = bound.min(i64::MAX as u64) as i64;
    (0..n).map(|_| rng.random_range(-b..=b)).collect()
}

fn batch<T: Send>(count: usize, cfg: &SampleConfig, exec: Exec, one: impl Fn(&mut ChaCha8Rng) -> T + Sync + Send) -> Vec<T> {
    let chunks = count.div_ceil(CHUNK);
    let parts = exec.map_range(chunks, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let len = CHUNK.min(count - k * CHUNK);
        (0..len).map(|_| one(&mut rng)).collect::<Vec<T>>()
    });
    parts.into_iter().flatten().collect()
}

/// One draw; equal to the first element of any batch with the same config.
pub fn sample_single(pdf: &CombPdf1d, cfg: &SampleConfig) -> f64 {
    sample_single_batch_with(pdf, cfg, 1, Exec::Sequential)[0]
}

pub fn sample_single_batch(pdf: &CombPdf1d, cfg: &SampleConfig, count: usize) -> Vec<f64> {
    sample_single_batch_with(pdf, cfg, count, Exec::default())
}

pub fn sample_single_batch_with(pdf: &CombPdf1d, cfg: &SampleConfig, count: usize, exec: Exec) -> Vec<f64> {
    let g = pdf.generators();
    let c = pdf.shift();
    batch(count, cfg, exec, |rng| {
        let m = draw(rng, pdf.spacings.len(), cfg.integer_bound);
        lattice_point(&g, &c, &m)[0]
    })
}

pub fn sample_multi(pdf: &CombPdfNd, cfg: &SampleConfig) -> Vec<f64> {
    sample_multi_batch_with(pdf, cfg, 1, Exec::Sequential).swap_remove(0)
}

pub fn sample_multi_batch(pdf: &CombPdfNd, cfg: &SampleConfig, count: usize) -> Vec<Vec<f64>> {
    sample_multi_batch_with(pdf, cfg, count, Exec::default())
}

pub fn sample_multi_batch_with(pdf: &CombPdfNd, cfg: &SampleConfig, count: usize, exec: Exec) -> Vec<Vec<f64>> {
    let n = pdf.matrix.ncols();
    batch(count, cfg, exec, |rng| {
        let m = draw(rng, n, cfg.integer_bound);
        lattice_point(&pdf.matrix, &pdf.offsets, &m)
    })
}

/// Whether some `m` in `[-bound, bound]^n` has `max |x - (G m + c)| <= tol`.
///
/// Zero columns are dropped. The rest are split into pivot and free columns
/// by full-pivot elimination; free coordinates are enumerated and the pivot
/// coordinates solved for and rounded. The search is exponential in the
/// number of free columns, which is fine at desk scale.
pub fn support_contains(pdf: &impl CombSupport, x: &[f64], tol: f64, bound: u64) -> bool {
    support_contains_with(pdf, x, tol, bound, Exec::default())
}

pub fn support_contains_with(pdf: &impl CombSupport, x: &[f64], tol: f64, bound: u64, exec: Exec) -> bool {
    let g_full = pdf.generators();
    let c = pdf.shift();
    if x.len() != g_full.nrows() {
        return false;
    }
    let b = bound.min(1 << 31) as i64;
    let cols: Vec<usize> = (0..g_full.ncols()).filter(|&i| g_full.column(i).amax() > 0.0).collect();
    let n = g_full.ncols();
    let (prow, pcol) = pivots(&g_full, &cols);
    let free: Vec<usize> = cols.iter().copied().filter(|i| !pcol.contains(i)).collect();
    let sub = DMatrix::from_fn(prow.len(), pcol.len(), |r, k| g_full[(prow[r], pcol[k])]);
    let lu = sub.lu();

    let try_free = |mf: &[i64]| -> bool {
        let mut m = vec![0i64; n];
        for (&i, &v) in free.iter().zip(mf) {
            m[i] = v;
        }
        if !pcol.is_empty() {
            let base = lattice_point(&g_full, &c, &m);
            let rhs = DVector::from_fn(prow.len(), |r, _| x[prow[r]] - base[prow[r]]);
            let Some(sol) = lu.solve(&rhs) else { return false };
            for (k, &i) in pcol.iter().enumerate() {
                let v = sol[k].round();
                if !v.is_finite() || v.abs() > b as f64 {
                    return false;
                }
                m[i] = v as i64;
            }
        }
        let y = lattice_point(&g_full, &c, &m);
        y.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol)
    };

    if free.is_empty() {
        return try_free(&[]);
    }
    let width = (2 * b + 1) as usize;
    exec.any_range(width, |first| {
        let mut mf = vec![-b; free.len()];
        mf[0] = first as i64 - b;
        loop {
            if try_free(&mf) {
                return true;
            }
            // odometer over the remaining free coordinates
            let mut k = 1;
            loop {
                if k == mf.len() {
                    return false;
                }
                if mf[k] < b {
                    mf[k] += 1;
                    break;
                }
                mf[k] = -b;
                k += 1;
            }
        }
    })
}

// (pivot rows, pivot columns) of g restricted to `cols`, by full pivoting
fn pivots(g: &DMatrix<f64>, cols: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut w = g.clone();
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let mut rows_left: Vec<usize> = (0..g.nrows()).collect();
    let mut cols_left: Vec<usize> = cols.to_vec();
    let (mut prow, mut pcol) = (Vec::new(), Vec::new());
    loop {
        let mut best = (0.0, 0, 0);
        for &r in &rows_left {
            for &c in &cols_left {
                if w[(r, c)].abs() > best.0 {
                    best = (w[(r, c)].abs(), r, c);
                }
            }
        }
        if best.0 <= 1e-12 * scale {
            break;
        }
        let (_, pr, pc) = best;
        for &r in &rows_left {
            if r != pr {
                let f = w[(r, pc)] / w[(pr, pc)];
                for &c in &cols_left {
                    let v = w[(pr, c)];
                    w[(r, c)] -= f * v;
                }
            }
        }
        rows_left.retain(|&r| r != pr);
        cols_left.retain(|&c| c != pc);
        prow.push(pr);
        pcol.push(pc);
    }
    (prow, pcol)
}

/// One entry of a class-A verdict as JSON.
pub fn mode_verdict_json(v: &ModeVerdict) -> Value {
    match &v.class {
        ModeClass::ZeroCoefficient => json!({"mode": v.mode, "case": "zero", "spacing": num(0.0)}),
        ModeClass::Theta(t) => class_json(v.mode, t, Some(v.spacing)),
    }
}

/// Per-mode angle class as JSON.
pub fn class_json(mode: usize, t: &ThetaClass, spacing: Option<f64>) -> Value {
    let mut o = match t {
        ThetaClass::Case1 { u, v } => json!({
            "mode": mode,
            "case": "case1",
            "u": u.to_string().parse::<serde_json::Number>().map(Value::Number).unwrap_or(Value::Null),
            "v": v.to_string().parse::<serde_json::Number>().map(Value::Number).unwrap_or(Value::Null),
        }),
        ThetaClass::Case2 => json!({"mode": mode, "case": "case2"}),
        ThetaClass::NotInTheta(r) => json!({"mode": mode, "case": "rejected", "reason": r.to_string()}),
    };
    if let Ok(d) = peak_spacing(t) {
        o["delta"] = num(d);
    }
    if let Some(s) = spacing {
        o["spacing"] = num(s);
    }
    o
}

impl CombPdf1d {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "comb1d",
            "spacings": num_array(&self.spacings),
            "offset": num(self.offset),
            "cases": self.cases.iter().map(mode_verdict_json).collect::<Vec<_>>(),
        })
    }
}

impl CombPdfNd {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.matrix.nrows())
            .map(|r| num_array(&self.matrix.row(r).iter().copied().collect::<Vec<_>>()))
            .collect();
        json!({
            "kind": "combNd",
            "matrix": rows,
            "offsets": num_array(&self.offsets),
            "measured": self.measured,
            "cases": self.classes.iter().enumerate().map(|(i, c)| class_json(i + 1, c, None)).collect::<Vec<_>>(),
        })
    }
}
