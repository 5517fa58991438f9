//! Symplectic matrices paired with displacements, and the structural
//! decomposition `M = [[At, 0], [Ct, At^-T]] * R(theta)` behind class B.
//!
//! Quadratures are ordered `(q_1..q_n, p_1..p_n)` and the Heisenberg action
//! of a transform is `r -> M r + rbar`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::classify::AngleSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("mode count mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),
    #[error("expected a {expected}x{expected} matrix and a {expected}-vector")]
    BadShape { expected: usize },
    #[error("matrix is not symplectic (defect {0:.3e})")]
    NotSymplectic(f64),
    #[error("matrix is singular")]
    Singular,
}

/// Default symplectic tolerance, scaled by the square of the largest entry.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    n: usize,
    m: DMatrix<f64>,
    rbar: DVector<f64>,
}

/// The four `n x n` blocks of a `2n x 2n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockView {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

/// `[[0, -I], [I, 0]]`.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = -1.0;
        o[(n + i, i)] = 1.0;
    }
    o
}

impl SymplecticTransform {
    pub fn new(m: DMatrix<f64>, rbar: DVector<f64>) -> Result<Self, SymplecticError> {
        let dim = m.nrows();
        if !dim.is_multiple_of(2) || m.ncols() != dim || rbar.len() != dim {
            return Err(SymplecticError::BadShape { expected: dim.max(rbar.len()) });
        }
        Ok(SymplecticTransform { n: dim / 2, m, rbar })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticTransform {
            n,
            m: DMatrix::identity(2 * n, 2 * n),
            rbar: DVector::zeros(2 * n),
        }
    }

    /// `[[At, 0], [0, At^-T]]`, the linear mode-mixing transform.
    pub fn linear(at: &DMatrix<f64>) -> Result<Self, SymplecticError> {
        let n = at.nrows();
        if at.ncols() != n {
            return Err(SymplecticError::BadShape { expected: n });
        }
        let inv_t = at.clone().try_inverse().ok_or(SymplecticError::Singular)?.transpose();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(at);
        m.view_mut((n, n), (n, n)).copy_from(&inv_t);
        Ok(SymplecticTransform { n, m, rbar: DVector::zeros(2 * n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn rbar(&self) -> &DVector<f64> {
        &self.rbar
    }

    pub fn blocks(&self) -> BlockView {
        let n = self.n;
        BlockView {
            a: self.m.view((0, 0), (n, n)).into_owned(),
            b: self.m.view((0, n), (n, n)).into_owned(),
            c: self.m.view((n, 0), (n, n)).into_owned(),
            d: self.m.view((n, n), (n, n)).into_owned(),
        }
    }

    /// `max |M^T Omega M - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let o = omega(self.n);
        (self.m.transpose() * &o * &self.m - o).amax()
    }

    /// Symplectic within [`SYMPLECTIC_TOL`] relative to the entry scale.
    pub fn is_symplectic(&self) -> bool {
        let scale = self.m.amax().max(1.0);
        self.symplectic_defect() < SYMPLECTIC_TOL * scale * scale
    }
}

/// Applying `first` and then `second`.
///
/// In the Heisenberg picture `r -> M1 r + r1` is substituted into the
/// second transform, so the product is `M2 M1` with displacement
/// `M2 r1 + r2`.
pub fn compose(
    first: &SymplecticTransform,
    second: &SymplecticTransform,
) -> Result<SymplecticTransform, SymplecticError> {
    if first.n != second.n {
        return Err(SymplecticError::ModeMismatch(first.n, second.n));
    }
    Ok(SymplecticTransform {
        n: first.n,
        m: &second.m * &first.m,
        rbar: &second.m * &first.rbar + &second.rbar,
    })
}

/// `max |M^T Omega M - Omega| < tol`, absolute.
pub fn validate(t: &SymplecticTransform, tol: f64) -> bool {
    t.symplectic_defect() < tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum DspMode {
    /// Also require `At` to be symmetric after choosing column signs.
    Strict,
    /// Only require `At` to be nonsingular.
    #[default]
    Permissive,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DspRejection {
    #[error("inconsistent column ratios in column {column}")]
    InconsistentColumnRatios { column: usize },
    #[error("singular Atilde")]
    SingularAtilde,
    #[error("asymmetric Atilde (strict mode)")]
    AsymmetricAtilde,
    #[error("theta of mode {mode} is not in Theta: {reason}")]
    ThetaNotInTheta { mode: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DspError {
    #[error(transparent)]
    Invalid(#[from] SymplecticError),
    #[error("rejected: {0}")]
    Rejected(#[from] DspRejection),
}

impl DspError {
    pub fn rejection(&self) -> Option<&DspRejection> {
        match self {
            DspError::Rejected(r) => Some(r),
            DspError::Invalid(_) => None,
        }
    }
}

/// `M = [[At, 0], [Ct, Dt]] * R(theta)`, with `R` the parallel single-mode
/// rotations `q -> q cos - p sin`, `p -> q sin + p cos`.
///
/// So `A = At diag(cos)` and `B = -At diag(sin)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DspDecomposition {
    pub atilde: DMatrix<f64>,
    pub ctilde: DMatrix<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub thetas: Vec<AngleSpec>,
}

impl DspDecomposition {
    /// The `(A, B)` blocks implied by the factors.
    pub fn reconstruct(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let c = DMatrix::from_diagonal(&DVector::from_column_slice(&self.cos));
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.sin));
        (&self.atilde * c, -(&self.atilde * s))
    }

    /// `max |Ct^T At - (Ct^T At)^T|`.
    pub fn ct_a_asymmetry(&self) -> f64 {
        let p = self.ctilde.transpose() * &self.atilde;
        (&p - p.transpose()).amax()
    }
}

/// Splits off per-column rotation angles.
///
/// Each column's angle is read from the row where `(A_ji, B_ji)` is largest
/// and must agree with every other row to within `tol` (scaled by the
/// largest entry). Angles are normalised to `[0, pi)`. Strict mode then
/// looks for column sign flips (angle shifts by pi) that make `At`
/// symmetric.
pub fn dsp_decompose(
    t: &SymplecticTransform,
    mode: DspMode,
    tol: f64,
) -> Result<DspDecomposition, DspError> {
    if !t.is_symplectic() {
        return Err(SymplecticError::NotSymplectic(t.symplectic_defect()).into());
    }
    let n = t.n();
    let BlockView { a, b, c, d } = t.blocks();
    let scale = t.matrix().amax().max(1.0);
    let eps = tol * scale;

    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    for i in 0..n {
        let (jmax, h) = (0..n)
            .map(|j| (j, a[(j, i)].hypot(b[(j, i)])))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if h <= eps {
            return Err(DspRejection::SingularAtilde.into());
        }
        let (mut cc, mut ss) = (a[(jmax, i)] / h, -b[(jmax, i)] / h);
        if ss < 0.0 || (ss == 0.0 && cc < 0.0) {
            cc = -cc;
            ss = -ss;
        }
        for j in 0..n {
            if (a[(j, i)] * ss + b[(j, i)] * cc).abs() > eps {
                return Err(DspRejection::InconsistentColumnRatios { column: i }.into());
            }
        }
        cos[i] = cc;
        sin[i] = ss;
    }

    let mut at = DMatrix::zeros(n, n);
    let mut ct = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            at[(j, i)] = a[(j, i)] * cos[i] - b[(j, i)] * sin[i];
            ct[(j, i)] = c[(j, i)] * cos[i] - d[(j, i)] * sin[i];
        }
    }

    let sv = at.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if sv.min() <= tol * smax.max(1.0) {
        return Err(DspRejection::SingularAtilde.into());
    }

    if mode == DspMode::Strict {
        let signs = symmetrizing_signs(&at, eps).ok_or(DspRejection::AsymmetricAtilde)?;
        for (i, &sg) in signs.iter().enumerate() {
            if sg < 0.0 {
                at.column_mut(i).neg_mut();
                ct.column_mut(i).neg_mut();
                cos[i] = -cos[i];
                sin[i] = -sin[i];
            }
        }
    }

    let thetas = cos
        .iter()
        .zip(&sin)
        .map(|(&c, &s)| AngleSpec::Radians(s.atan2(c)))
        .collect();
    Ok(DspDecomposition { atilde: at, ctilde: ct, cos, sin, thetas })
}

/// Column signs making `at * diag(signs)` symmetric, if any exist.
///
/// Every off-diagonal pair either vanishes or fixes the relative sign of
/// its two columns, so this is a 2-colouring of the graph of nonzero pairs.
fn symmetrizing_signs(at: &DMatrix<f64>, eps: f64) -> Option<Vec<f64>> {
    let n = at.nrows();
    let mut sign = vec![0.0f64; n];
    for root in 0..n {
        if sign[root] != 0.0 {
            continue;
        }
        sign[root] = 1.0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // need at[j,i] sign_i == at[i,j] sign_j
                let (x, y) = (at[(j, i)], at[(i, j)]);
                if x.abs() <= eps && y.abs() <= eps {
                    continue;
                }
                if (x.abs() - y.abs()).abs() > eps || x.abs() <= eps || y.abs() <= eps {
                    return None;
                }
                let want = sign[i] * (x * y).signum();
                if sign[j] == 0.0 {
                    sign[j] = want;
                    stack.push(j);
                } else if sign[j] != want {
                    return None;
                }
            }
        }
    }
    Some(sign)
}
