//! Small dense linear algebra: 2×2 complex transfer matrices and a cyclic
//! Jacobi eigensolver for real symmetric matrices of order ≤ 16.

#![allow(clippy::needless_range_loop)]

use std::ops::Mul;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Largest matrix order accepted by [`eig_sym`].
pub const MAX_SYM_ORDER: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_TOLERANCE: f64 = 1e-14;
/// Relative gap below which two eigenvalues are treated as one cluster.
const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// A 2×2 complex matrix acting on (forward, backward) field amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex2x2 {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl Complex2x2 {
    pub const IDENTITY: Self = Self {
        m11: C64::new(1.0, 0.0),
        m12: C64::new(0.0, 0.0),
        m21: C64::new(0.0, 0.0),
        m22: C64::new(1.0, 0.0),
    };

    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Self::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }
}

pub fn mat2_mul(a: &Complex2x2, b: &Complex2x2) -> Complex2x2 {
    Complex2x2 {
        m11: a.m11 * b.m11 + a.m12 * b.m21,
        m12: a.m11 * b.m12 + a.m12 * b.m22,
        m21: a.m21 * b.m11 + a.m22 * b.m21,
        m22: a.m21 * b.m12 + a.m22 * b.m22,
    }
}

impl Mul for Complex2x2 {
    type Output = Complex2x2;

    fn mul(self, rhs: Complex2x2) -> Complex2x2 {
        mat2_mul(&self, &rhs)
    }
}

/// A matrix stored as `exp(log_scale) · mantissa`, used for long products
/// whose entries grow exponentially.
///
/// The mantissa is rescaled by powers of two only, so renormalisation never
/// perturbs its significand bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMatrix {
    pub mantissa: Complex2x2,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub const IDENTITY: Self = Self {
        mantissa: Complex2x2::IDENTITY,
        log_scale: 0.0,
    };

    pub fn new(m: Complex2x2) -> Self {
        Self {
            mantissa: m,
            log_scale: 0.0,
        }
        .renormalized()
    }

    fn renormalized(self) -> Self {
        let largest = self.mantissa.max_abs();
        if !(largest.is_finite() && largest > 0.0) {
            return self;
        }
        let exponent = largest.log2().floor() as i32;
        if exponent == 0 {
            return self;
        }
        Self {
            mantissa: self.mantissa.scale(2f64.powi(-exponent)),
            log_scale: self.log_scale + f64::from(exponent) * std::f64::consts::LN_2,
        }
    }

    pub fn mul(&self, rhs: &ScaledMatrix) -> ScaledMatrix {
        ScaledMatrix {
            mantissa: mat2_mul(&self.mantissa, &rhs.mantissa),
            log_scale: self.log_scale + rhs.log_scale,
        }
        .renormalized()
    }

    /// `m^n` by binary powering, renormalising after every product.
    pub fn power(m: &Complex2x2, n: u64) -> ScaledMatrix {
        let mut acc = ScaledMatrix::IDENTITY;
        let mut base = ScaledMatrix::new(*m);
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Real symmetric `N × N` matrix. Every write goes to both triangles, so the
/// stored entries are symmetric by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix<const N: usize> {
    a: [[f64; N]; N],
}

impl<const N: usize> Default for SymMatrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> SymMatrix<N> {
    pub const fn zeros() -> Self {
        Self { a: [[0.0; N]; N] }
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_upper(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in i..N {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diagonal(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.a[i][i] = v;
        }
        m
    }

    pub const fn dim(&self) -> usize {
        N
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn rows(&self) -> &[[f64; N]; N] {
        &self.a
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64; N]) -> [f64; N] {
        let mut y = [0.0; N];
        for (yi, row) in y.iter_mut().zip(&self.a) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// `⟨x|M|y⟩`
    pub fn bilinear(&self, x: &[f64; N], y: &[f64; N]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|x| x.is_finite())
    }
}

pub fn dot<const N: usize>(x: &[f64; N], y: &[f64; N]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Eigen-decomposition with ascending energies and gauge-fixed eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem<const N: usize> {
    energies: [f64; N],
    /// `vectors[k]` is the eigenvector belonging to `energies[k]`.
    vectors: [[f64; N]; N],
    /// `true` where the sign was fixed against a reference system rather than
    /// by the largest-entry rule.
    continuity_gauge: [bool; N],
}

impl<const N: usize> EigenSystem<N> {
    pub fn energies(&self) -> &[f64; N] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    pub fn vectors(&self) -> &[[f64; N]; N] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[f64; N] {
        &self.vectors[k]
    }

    pub fn continuity_gauge(&self) -> &[bool; N] {
        &self.continuity_gauge
    }

    /// Index of the eigenvector with the largest `|⟨v|x⟩|`.
    pub fn best_overlap(&self, x: &[f64; N]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, v) in self.vectors.iter().enumerate() {
            let o = dot(v, x).abs();
            if o > best.1 {
                best = (k, o);
            }
        }
        best
    }

    /// `V · diag(e) · Vᵀ`
    pub fn reconstruct(&self) -> SymMatrix<N> {
        SymMatrix::from_upper(|i, j| {
            (0..N)
                .map(|k| self.vectors[k][i] * self.energies[k] * self.vectors[k][j])
                .sum()
        })
    }
}

/// Diagonalises `h` with the largest-entry sign convention.
pub fn eig_sym<const N: usize>(h: &SymMatrix<N>) -> Result<EigenSystem<N>, EigenError> {
    eig_sym_with_gauge(h, None)
}

/// Diagonalises `h`; when `reference` is given, eigenvectors inside each
/// degenerate cluster are matched to the reference by maximal overlap and
/// every sign is chosen so that `⟨v_ref, v⟩ ≥ 0`.
pub fn eig_sym_with_gauge<const N: usize>(
    h: &SymMatrix<N>,
    reference: Option<&EigenSystem<N>>,
) -> Result<EigenSystem<N>, EigenError> {
    const { assert!(N >= 1 && N <= MAX_SYM_ORDER) };
    if !h.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let norm = h.frobenius_norm();
    let (diag, vecs) = jacobi(h, norm)?;

    let mut order: [usize; N] = std::array::from_fn(|k| k);
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));

    let mut energies = [0.0; N];
    let mut vectors = [[0.0; N]; N];
    for (slot, &k) in order.iter().enumerate() {
        energies[slot] = diag[k];
        for i in 0..N {
            vectors[slot][i] = vecs[i][k];
        }
    }

    let mut sys = EigenSystem {
        energies,
        vectors,
        continuity_gauge: [false; N],
    };
    match reference {
        Some(r) => continuity_gauge(&mut sys, r, norm),
        None => {
            for v in sys.vectors.iter_mut() {
                largest_entry_gauge(v);
            }
        }
    }
    Ok(sys)
}

/// Cyclic Jacobi sweeps. Returns the diagonal and the accumulated rotation
/// (columns are eigenvectors).
fn jacobi<const N: usize>(
    h: &SymMatrix<N>,
    norm: f64,
) -> Result<([f64; N], [[f64; N]; N]), EigenError> {
    let mut a = h.a;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let threshold = JACOBI_TOLERANCE * norm;

    let off_norm = |a: &[[f64; N]; N]| -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in (i + 1)..N {
                s += 2.0 * a[i][j] * a[i][j];
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..N {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a[k][p] = nkp;
                    a[p][k] = nkp;
                    a[k][q] = nkq;
                    a[q][k] = nkq;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(EigenError::NoConvergence {
            sweeps,
            off_norm: off_norm(&a),
        });
    }
    Ok((std::array::from_fn(|i| a[i][i]), v))
}

/// Makes the largest-magnitude entry positive; among entries tied within
/// 1e-12 relative, the first one decides.
fn largest_entry_gauge<const N: usize>(v: &mut [f64; N]) {
    let largest = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().find(|x| x.abs() >= largest * (1.0 - 1e-12)) {
        if *lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn continuity_gauge<const N: usize>(sys: &mut EigenSystem<N>, reference: &EigenSystem<N>, norm: f64) {
    let gap = DEGENERACY_TOLERANCE * norm.max(f64::MIN_POSITIVE);

    let mut start = 0;
    while start < N {
        let mut end = start + 1;
        while end < N && sys.energies[end] - sys.energies[end - 1] < gap {
            end += 1;
        }
        if end - start > 1 {
            assign_cluster(sys, reference, start, end);
        }
        start = end;
    }

    for k in 0..N {
        let o = dot(&sys.vectors[k], &reference.vectors[k]);
        if o < 0.0 {
            sys.vectors[k].iter_mut().for_each(|x| *x = -*x);
        }
        if o == 0.0 {
            largest_entry_gauge(&mut sys.vectors[k]);
        } else {
            sys.continuity_gauge[k] = true;
        }
    }
}

/// Greedy maximal-overlap permutation of the eigenvectors in `start..end`.
fn assign_cluster<const N: usize>(
    sys: &mut EigenSystem<N>,
    reference: &EigenSystem<N>,
    start: usize,
    end: usize,
) {
    let mut pairs = Vec::with_capacity((end - start) * (end - start));
    for r in start..end {
        for c in start..end {
            pairs.push((dot(&reference.vectors[r], &sys.vectors[c]).abs(), r, c));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_ref = [false; N];
    let mut used_cur = [false; N];
    let mut assigned = sys.vectors;
    for (_, r, c) in pairs {
        if used_ref[r] || used_cur[c] {
            continue;
        }
        used_ref[r] = true;
        used_cur[c] = true;
        assigned[r] = sys.vectors[c];
    }
    sys.vectors[start..end].copy_from_slice(&assigned[start..end]);
}
