//! Small dense real matrices.
//!
//! Everything here is sized for state dimensions up to roughly eight: the
//! Lyapunov solver vectorizes into an `n² × n²` system and the eigenvalue and
//! singular-value routines are plain iterative kernels without blocking.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest number of entries any product or Kronecker result may hold.
pub const MAX_ENTRIES: usize = 1_000_000;

/// Below this `σ_min` a matrix is reported as infinitely ill-conditioned.
pub const SIGMA_MIN_FLOOR: f64 = 1e-300;

const EIGEN_MAX_ITERATIONS: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl Mat {
    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::Dimension {
                op: "Mat::new",
                detail: format!("{rows}x{cols} needs {} entries, got {}", rows * cols, data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Mat::new"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension {
                    op: "Mat::from_rows",
                    detail: format!("ragged rows: expected {cols} columns, found {}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn scalar(v: f64) -> Self {
        Self::from_raw(1, 1, vec![v])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Self {
        Self::from_raw(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn scale(&self, k: f64) -> Mat {
        Mat::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * k).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Scaled to avoid overflow for entries beyond `1e154`.
    pub fn frobenius_norm(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        scale * self.data.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when `|m_ij − m_ji| ≤ tol · (1 + max|m|)` for every pair.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let bound = tol * (1.0 + self.max_abs());
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= bound))
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> Mat {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn try_add(&self, rhs: &Mat) -> Result<Mat> {
        self.same_shape("add", rhs)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn try_sub(&self, rhs: &Mat) -> Result<Mat> {
        self.same_shape("sub", rhs)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    pub fn try_mul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                op: "mul",
                detail: format!("{}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            });
        }
        guard_size("mul", self.rows, rhs.cols)?;
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self · inner · selfᵀ`.
    pub fn congruence(&self, inner: &Mat) -> Result<Mat> {
        self.try_mul(inner)?.try_mul(&self.transpose())
    }

    fn same_shape(&self, op: &'static str, rhs: &Mat) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension {
                op,
                detail: format!("{}x{} vs {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            });
        }
        Ok(())
    }

    fn zip_with(&self, rhs: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect();
        Mat::from_raw(self.rows, self.cols, data)
    }

    fn require_square(&self, op: &'static str) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::Dimension {
                op,
                detail: format!("expected a square matrix, got {}x{}", self.rows, self.cols),
            });
        }
        Ok(self.rows)
    }
}

fn guard_size(op: &'static str, rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_ENTRIES => Ok(()),
        _ => Err(Error::Dimension {
            op,
            detail: format!("result {rows}x{cols} exceeds {MAX_ENTRIES} entries"),
        }),
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

// The operator forms panic on shape mismatch; use the `try_*` methods on
// untrusted shapes.
impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.try_add(rhs).expect("matrix shapes must agree for +")
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.try_sub(rhs).expect("matrix shapes must agree for -")
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.try_mul(rhs).expect("inner dimensions must agree for *")
    }
}

/// A complex eigenvalue as `(re, im)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Eigenvalues of a square matrix, unordered.
///
/// 1×1 and 2×2 are closed form. Larger matrices go through elimination to
/// Hessenberg form and the Francis double-shift QR iteration.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Eigenvalue>> {
    let n = m.require_square("eigenvalues")?;
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalues"));
    }
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![Eigenvalue { re: m[(0, 0)], im: 0.0 }]),
        2 => Ok(eigen_2x2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec()),
        _ => hessenberg_qr(m),
    }
}

fn eigen_2x2(a: f64, b: f64, c: f64, d: f64) -> [Eigenvalue; 2] {
    let half_tr = 0.5 * (a + d);
    // (a-d)²/4 + bc avoids the cancellation in tr²/4 − det.
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Larger-magnitude root first, the other from the determinant.
        let big = if half_tr >= 0.0 { half_tr + root } else { half_tr - root };
        let det = a * d - b * c;
        let small = if big != 0.0 { det / big } else { half_tr - root };
        [Eigenvalue { re: big, im: 0.0 }, Eigenvalue { re: small, im: 0.0 }]
    } else {
        let im = (-disc).sqrt();
        [Eigenvalue { re: half_tr, im }, Eigenvalue { re: half_tr, im: -im }]
    }
}

fn hessenberg_qr(m: &Mat) -> Result<Vec<Eigenvalue>> {
    let n = m.rows();
    // One-based working copy keeps the classic index arithmetic readable.
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    reduce_to_hessenberg(&mut a, n);
    for i in 3..=n {
        for j in 1..i - 1 {
            a[i][j] = 0.0;
        }
    }

    let mut wr = vec![0.0f64; n + 1];
    let mut wi = vec![0.0f64; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }

    let mut total_iterations = 0usize;
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if total_iterations >= EIGEN_MAX_ITERATIONS {
                        return Err(Error::NoConvergence {
                            what: "Hessenberg QR eigenvalue iteration",
                            iterations: total_iterations,
                        });
                    }
                    if its == 10 || its == 20 {
                        // Exceptional shift.
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    total_iterations += 1;
                    let mut mm = nn - 2;
                    loop {
                        z = a[mm][mm];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[mm + 1][mm] + a[mm][mm + 1];
                        q = a[mm + 1][mm + 1] - z - r - s0;
                        r = a[mm + 2][mm + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if mm == l {
                            break;
                        }
                        let u = a[mm][mm - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[mm - 1][mm - 1].abs() + z.abs() + a[mm + 1][mm + 1].abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        mm -= 1;
                    }
                    for i in mm + 2..=nn {
                        a[i][i - 2] = 0.0;
                        if i != mm + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = mm;
                    while k < nn {
                        if k != mm {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == mm {
                                if l != mm {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = nn.min(k + 3);
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Eigenvalue { re: wr[i], im: wi[i] }).collect())
}

/// Gaussian elimination with pivoting to upper Hessenberg form (one-based).
fn reduce_to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in m - 1..=n {
                let tmp = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().skip(1).take(n) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
}

/// `max |λ_i|` over the eigenvalues of a square matrix.
pub fn spectral_radius(m: &Mat) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |acc, e| acc.max(e.modulus())))
}

/// Singular values in descending order, via one-sided Jacobi rotations
/// (implicitly diagonalizing `mᵀm`).
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("singular_values"));
    }
    // Work on the orientation with at least as many rows as columns.
    let work = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let (rows, cols) = work.shape();
    let mut a = work;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = 1.0f64.copysign(zeta) / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, q)] = s * ap + c * aq;
                }
            }
        }
        if !rotated {
            let mut sv: Vec<f64> = (0..cols)
                .map(|j| (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
                .collect();
            sv.sort_by(|x, y| y.total_cmp(x));
            return Ok(sv);
        }
    }
    Err(Error::NoConvergence { what: "one-sided Jacobi SVD", iterations: JACOBI_MAX_SWEEPS })
}

/// `σ_max(m)`, the induced 2-norm.
pub fn operator_two_norm(m: &Mat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// 2-norm condition number of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditioning {
    Finite(f64),
    /// `σ_min` fell below [`SIGMA_MIN_FLOOR`].
    Infinite,
    /// The zero matrix: no meaningful ratio exists.
    Undefined,
}

impl Conditioning {
    /// Finite value, `+∞`, or NaN for the undefined case.
    pub fn value(&self) -> f64 {
        match *self {
            Conditioning::Finite(v) => v,
            Conditioning::Infinite => f64::INFINITY,
            Conditioning::Undefined => f64::NAN,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Conditioning::Finite(v) => Some(v),
            _ => None,
        }
    }
}

pub fn condition_number(m: &Mat) -> Result<Conditioning> {
    m.require_square("condition_number")?;
    let sv = singular_values(m)?;
    let (max, min) = match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) => (max, min),
        _ => return Ok(Conditioning::Undefined),
    };
    Ok(if max == 0.0 {
        Conditioning::Undefined
    } else if min < SIGMA_MIN_FLOOR {
        Conditioning::Infinite
    } else {
        Conditioning::Finite((max / min).max(1.0))
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    let n = m.require_square("symmetric_eigenvalues")?;
    let mut a = m.symmetrize();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * a.frobenius_norm().powi(2) || off == 0.0 {
            let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = 1.0f64.copysign(theta) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence { what: "symmetric Jacobi eigenvalues", iterations: JACOBI_MAX_SWEEPS })
}

/// Symmetric within `1e-12` and no eigenvalue below `-tol · (1 + ‖m‖_F)`.
pub fn is_psd(m: &Mat, tol: f64) -> Result<bool> {
    if !m.is_symmetric(1e-12) {
        return Ok(false);
    }
    let floor = -tol * (1.0 + m.frobenius_norm());
    Ok(symmetric_eigenvalues(m)?.iter().all(|&l| l >= floor))
}

pub fn kronecker(a: &Mat, b: &Mat) -> Result<Mat> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => {
            return Err(Error::Dimension { op: "kronecker", detail: "dimension overflow".into() })
        }
    };
    guard_size("kronecker", rows, cols)?;
    let mut out = Mat::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + k, j * b.cols() + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Solves `a · x = b` by LU with partial pivoting.
pub fn solve_linear(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.require_square("solve_linear")?;
    if b.rows() != n {
        return Err(Error::Dimension {
            op: "solve_linear",
            detail: format!("a is {n}x{n} but b has {} rows", b.rows()),
        });
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= f64::EPSILON * scale * n as f64 || piv_abs == 0.0 {
            return Err(Error::Singular { pivot: piv_abs });
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv_row, j)];
                lu[(piv_row, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv_row, j)];
                x[(piv_row, j)] = tmp;
            }
        }
        let pivot = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= f * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / pivot;
        }
    }
    Ok(x)
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    let n = a.require_square("inverse")?;
    solve_linear(a, &Mat::identity(n))
}

/// `I − Φ⊗Φ`, the matrix of the vectorized Stein operator.
pub fn stein_operator(phi: &Mat) -> Result<Mat> {
    let n = phi.require_square("stein_operator")?;
    let kron = kronecker(phi, phi)?;
    Ok(&Mat::identity(n * n) - &kron)
}

/// Solves `P = Φ P Φᵀ + Σ` through `vec(P) = (I − Φ⊗Φ)⁻¹ vec(Σ)`.
///
/// Requires `ρ(Φ) < 1` and a symmetric `Σ`; the result is symmetrized.
pub fn solve_discrete_lyapunov(phi: &Mat, sigma: &Mat) -> Result<Mat> {
    let n = phi.require_square("solve_discrete_lyapunov")?;
    if sigma.shape() != (n, n) {
        return Err(Error::Dimension {
            op: "solve_discrete_lyapunov",
            detail: format!("phi is {n}x{n} but sigma is {}x{}", sigma.rows(), sigma.cols()),
        });
    }
    if !sigma.is_symmetric(1e-12) {
        return Err(Error::Validation("sigma must be symmetric".into()));
    }
    let rho = spectral_radius(phi)?;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    // Row-major vec: (ΦPΦᵀ)_ij = Σ_kl Φ_ik Φ_jl P_kl, i.e. (Φ⊗Φ) acting on vec(P).
    let lhs = stein_operator(phi)?;
    let rhs = Mat::column(sigma.as_slice());
    let v = solve_linear(&lhs, &rhs)?;
    Ok(Mat::from_raw(n, n, v.data).symmetrize())
}
