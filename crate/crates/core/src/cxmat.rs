//! Dense complex linear algebra for small Hermitian systems.
//!
//! Everything operating on channel vectors and covariance-like matrices in
//! this crate funnels through here: Hermitian solves (Cholesky), Hermitian
//! eigendecomposition (cyclic complex Jacobi rotations), rank-one inverse
//! updates (Sherman-Morrison) and the usual vector/matrix products. The
//! matrices involved are tiny (at most ~16x16), so the implementations favor
//! accuracy and clarity over asymptotic speed.

use num_complex::Complex64;

use crate::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

/// Relative positive-definiteness threshold: a Cholesky pivot must exceed
/// `PD_REL_TOL * trace / n`. Scale-relative so watt/dBW unit choices do not
/// flip the verdict.
pub const PD_REL_TOL: f64 = 1e-12;

/// Complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(pub Vec<Cx>);

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    data: Vec<Cx>,
    rows: usize,
    cols: usize,
}

impl CVec {
    pub fn zeros(n: usize) -> Self {
        CVec(vec![Cx::new(0.0, 0.0); n])
    }

    pub fn from_real(v: &[f64]) -> Self {
        CVec(v.iter().map(|&x| Cx::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Cx::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjugated inner product `self^H other`.
    pub fn dot_h(&self, other: &CVec) -> Cx {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Unconjugated inner product `self^T other`.
    pub fn dot_t(&self, other: &CVec) -> Cx {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: Cx) -> CVec {
        CVec(self.0.iter().map(|a| a * s).collect())
    }

    /// `self / ||self||`; error on a numerically zero vector.
    pub fn normalized(&self) -> Result<CVec> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::ZeroChannel);
        }
        Ok(self.scale(Cx::new(1.0 / n, 0.0)))
    }

    pub fn conj(&self) -> CVec {
        CVec(self.0.iter().map(|a| a.conj()).collect())
    }

    pub fn copy_from(&mut self, other: &CVec) {
        debug_assert_eq!(self.len(), other.len());
        self.0.copy_from_slice(&other.0);
    }

    /// First `n` entries.
    pub fn head(&self, n: usize) -> CVec {
        CVec(self.0[..n].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl std::ops::Index<usize> for CVec {
    type Output = Cx;
    fn index(&self, i: usize) -> &Cx {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut Cx {
        &mut self.0[i]
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            data: vec![Cx::new(0.0, 0.0); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Cx::new(x, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// `M v`.
    pub fn matvec(&self, v: &CVec) -> CVec {
        debug_assert_eq!(self.cols, v.len());
        let mut out = CVec::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Cx::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `M^H v`.
    pub fn adjoint_matvec(&self, v: &CVec) -> CVec {
        debug_assert_eq!(self.rows, v.len());
        let mut out = CVec::zeros(self.cols);
        for j in 0..self.cols {
            let mut acc = Cx::new(0.0, 0.0);
            for i in 0..self.rows {
                acc += self[(i, j)].conj() * v[i];
            }
            out[j] = acc;
        }
        out
    }

    /// `M N`.
    pub fn matmul(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Cx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Outer product `v v^H` (Hermitian PSD).
    pub fn outer_h(v: &CVec) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Outer product `v^* v^T` (Hermitian PSD); this is the Gram matrix of the
    /// unconjugated form `|v^T w|^2 = w^H (v^* v^T) w`.
    pub fn conj_outer_t(v: &CVec) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| v[i].conj() * v[j])
    }

    /// `self += alpha * other` (element-wise, real scale).
    pub fn add_scaled(&mut self, alpha: f64, other: &CMat) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// `self += alpha * v v^H`.
    pub fn add_scaled_outer_h(&mut self, alpha: f64, v: &CVec) {
        debug_assert_eq!(self.rows, v.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                self[(i, j)] += alpha * v[i] * v[j].conj();
            }
        }
    }

    pub fn scale(&self, s: f64) -> CMat {
        CMat {
            data: self.data.iter().map(|a| a * s).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn copy_from(&mut self, other: &CMat) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data.copy_from_slice(&other.data);
    }

    pub fn trace(&self) -> Cx {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `M - M^H`, for Hermitian validation.
    pub fn hermitian_asymmetry(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_asymmetry() <= rel_tol * self.max_abs().max(1e-300)
    }

    /// Replace by `(M + M^H) / 2`, scrubbing roundoff asymmetry.
    pub fn hermitize(&mut self) {
        debug_assert!(self.is_square());
        for i in 0..self.rows {
            self[(i, i)] = Cx::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn data(&self) -> &[Cx] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Cx;
    fn index(&self, (i, j): (usize, usize)) -> &Cx {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx {
        &mut self.data[i * self.cols + j]
    }
}

/// Cholesky factor `L` (lower triangular, real positive diagonal) of a
/// Hermitian positive definite matrix, `M = L L^H`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    l: CMat,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solve `M x = b` given `M = L L^H`.
    pub fn solve(&self, b: &CVec) -> Result<CVec> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// In-place variant of [`CholeskyFactor::solve`] for hot loops.
    pub fn solve_in_place(&self, x: &mut CVec) {
        let n = self.dim();
        // forward: L y = b
        for i in 0..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= self.l[(i, k)] * x[k];
            }
            x[i] = acc / self.l[(i, i)].re;
        }
        // backward: L^H x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..n {
                acc -= self.l[(k, i)].conj() * x[k];
            }
            x[i] = acc / self.l[(i, i)].re;
        }
    }

    /// `M^{-1}`, Hermitized.
    pub fn inverse(&self) -> CMat {
        let n = self.dim();
        let mut inv = CMat::zeros(n, n);
        for k in 0..n {
            let mut col = CVec::basis(n, k);
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, k)] = col[i];
            }
        }
        inv.hermitize();
        inv
    }
}

/// Cholesky-factor a Hermitian positive definite matrix.
///
/// Positive definiteness is judged against the scale-relative pivot threshold
/// [`PD_REL_TOL`] `* trace / n`.
pub fn cholesky(m: &CMat) -> Result<CholeskyFactor> {
    let mut factor = CholeskyFactor {
        l: CMat::zeros(m.rows(), m.rows()),
    };
    refactor(m, &mut factor)?;
    Ok(factor)
}

/// Re-run the Cholesky factorization into existing storage (hot loops).
pub fn refactor(m: &CMat, factor: &mut CholeskyFactor) -> Result<()> {
    if !m.is_square() || factor.l.rows() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: if m.is_square() { factor.l.rows() } else { m.cols() },
        });
    }
    let n = m.rows();
    let threshold = PD_REL_TOL * m.trace().re.max(0.0) / n as f64;
    let l = &mut factor.l;
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= threshold || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: d,
                index: j,
                threshold,
            });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Cx::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(())
}

/// Solve `M x = b` for Hermitian positive definite `M`.
pub fn hermitian_solve(m: &CMat, b: &CVec) -> Result<CVec> {
    if m.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: b.len(),
        });
    }
    cholesky(m)?.solve(b)
}

/// `M^{-1}` for Hermitian positive definite `M`.
pub fn inverse_hermitian(m: &CMat) -> Result<CMat> {
    Ok(cholesky(m)?.inverse())
}

/// Apply `(B + u u^H)^{-1}` to `x` given `B^{-1}`, via the Sherman-Morrison
/// identity `(B + u u^H)^{-1} x = B^{-1} x - B^{-1} u (u^H B^{-1} x) / (1 + u^H B^{-1} u)`.
pub fn sherman_morrison_inverse_apply(binv: &CMat, u: &CVec, x: &CVec) -> Result<CVec> {
    if binv.rows() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: binv.rows(),
            got: u.len(),
        });
    }
    if binv.rows() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: binv.rows(),
            got: x.len(),
        });
    }
    let bx = binv.matvec(x);
    let bu = binv.matvec(u);
    let denom = Cx::new(1.0, 0.0) + u.dot_h(&bu);
    if denom.norm() < 1e-14 {
        return Err(Error::SingularUpdate {
            denominator: denom.norm(),
        });
    }
    let coeff = u.dot_h(&bx) / denom;
    let mut out = bx;
    for i in 0..out.len() {
        out[i] -= bu[i] * coeff;
    }
    Ok(out)
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in descending order with unit-norm, mutually orthogonal
/// eigenvectors. Each eigenvector's global phase is fixed so that its first
/// nonzero entry is real positive, making vector comparisons deterministic.
pub fn eig_hermitian(m: &CMat) -> Result<(Vec<f64>, Vec<CVec>)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let scale = m.max_abs().max(1e-300);
    let asym = m.hermitian_asymmetry();
    if asym > 1e-8 * scale {
        return Err(Error::NotHermitian {
            asymmetry: asym / scale,
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    a.hermitize();
    let mut v = CMat::identity(n);

    if n > 1 {
        const MAX_SWEEPS: usize = 100;
        let stop = 1e-14 * a.frobenius_norm().max(1e-300);
        let mut converged = false;
        for sweep in 0..MAX_SWEEPS {
            let mut off_sq = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_sq += a[(p, q)].norm_sqr();
                }
            }
            let off = off_sq.sqrt();
            if off <= stop {
                converged = true;
                break;
            }
            // Skip tiny pivots on early sweeps (Numerical Recipes style schedule).
            let thresh = if sweep < 3 {
                0.2 * off / (n * n) as f64
            } else {
                0.0
            };
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= thresh || r < 1e-300 {
                        continue;
                    }
                    // Unitary rotation in the (p, q) plane annihilating a_pq:
                    // columns mix as col_p' = c col_p + s col_q,
                    // col_q' = -conj(s) col_p + c col_q, with s = t c conj(a_pq)/|a_pq|.
                    let phase_conj = apq.conj() / r;
                    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                    let t = if theta >= 0.0 {
                        -1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = phase_conj * (t * c);

                    // A <- R^H A R, columns then rows.
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp + s * akq;
                        a[(k, q)] = -s.conj() * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk + s.conj() * aqk;
                        a[(q, k)] = -s * apk + c * aqk;
                    }
                    a[(p, q)] = Cx::new(0.0, 0.0);
                    a[(q, p)] = Cx::new(0.0, 0.0);
                    a[(p, p)] = Cx::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = Cx::new(a[(q, q)].re, 0.0);

                    // V <- V R.
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp + s * vkq;
                        v[(k, q)] = -s.conj() * vkp + c * vkq;
                    }
                }
            }
            if sweep + 1 == MAX_SWEEPS {
                let mut off_sq = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        off_sq += a[(p, q)].norm_sqr();
                    }
                }
                if off_sq.sqrt() > stop {
                    return Err(Error::NoConvergence {
                        sweeps: MAX_SWEEPS,
                        off_diagonal: off_sq.sqrt(),
                        dim: n,
                    });
                }
                converged = true;
            }
        }
        debug_assert!(converged);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors: Vec<CVec> = order
        .iter()
        .map(|&col| {
            let mut vec = CVec(Vec::with_capacity(n));
            for i in 0..n {
                vec.0.push(v[(i, col)]);
            }
            fix_phase(&mut vec);
            vec
        })
        .collect();
    Ok((values, vectors))
}

/// Copy of `v` with its global phase rotated so the first nonzero entry is
/// real positive (the convention eigenvectors follow).
pub fn phase_fixed(v: &CVec) -> CVec {
    let mut c = v.clone();
    fix_phase(&mut c);
    c
}

/// Rotate the global phase so the first nonzero entry is real positive.
fn fix_phase(v: &mut CVec) {
    let max = v.0.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if max <= 0.0 {
        return;
    }
    let lead = v.0.iter().find(|a| a.norm() > 1e-12 * max);
    if let Some(&lead) = lead {
        let rot = lead.conj() / lead.norm();
        for a in v.0.iter_mut() {
            *a *= rot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_vec(r: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec((0..n).map(|_| cx(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5)).collect())
    }

    /// Random Hermitian positive definite matrix G G^H + I.
    fn random_hpd(r: &mut ChaCha8Rng, n: usize) -> CMat {
        let g = CMat::from_fn(n, n, |_, _| cx(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
        let mut m = g.matmul(&g.adjoint());
        for i in 0..n {
            m[(i, i)] += cx(1.0, 0.0);
        }
        m.hermitize();
        m
    }

    /// Test-only reference solve: complex Gauss-Jordan with partial pivoting,
    /// independent of the Cholesky path it checks.
    fn gauss_solve(m: &CMat, b: &CVec) -> CVec {
        let n = m.rows();
        let mut aug = CMat::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = m[(i, j)];
            }
            aug[(i, n)] = b[i];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| aug[(i, col)].norm().partial_cmp(&aug[(j, col)].norm()).unwrap())
                .unwrap();
            if piv != col {
                for j in 0..=n {
                    let tmp = aug[(col, j)];
                    aug[(col, j)] = aug[(piv, j)];
                    aug[(piv, j)] = tmp;
                }
            }
            let d = aug[(col, col)];
            for j in col..=n {
                aug[(col, j)] /= d;
            }
            for i in 0..n {
                if i != col {
                    let f = aug[(i, col)];
                    if f.norm() > 0.0 {
                        for j in col..=n {
                            let sub = f * aug[(col, j)];
                            aug[(i, j)] -= sub;
                        }
                    }
                }
            }
        }
        CVec((0..n).map(|i| aug[(i, n)]).collect())
    }

    fn gauss_inverse(m: &CMat) -> CMat {
        let n = m.rows();
        let mut inv = CMat::zeros(n, n);
        for k in 0..n {
            let col = gauss_solve(m, &CVec::basis(n, k));
            for i in 0..n {
                inv[(i, k)] = col[i];
            }
        }
        inv
    }

    /// Determinant by cofactor expansion (test oracle, n <= 4).
    fn det_cofactor(m: &CMat) -> Cx {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = cx(0.0, 0.0);
        for j in 0..n {
            let minor = CMat::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * m[(0, j)] * det_cofactor(&minor);
        }
        acc
    }

    #[test]
    fn solve_identity() {
        let m = CMat::identity(3);
        let b = CVec(vec![cx(1.0, 0.0), cx(0.0, 1.0), cx(-2.0, 0.0)]);
        let x = hermitian_solve(&m, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - b[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn solve_scalar_matrix() {
        let m = CMat::identity(2).scale(2.0);
        let b = CVec::from_real(&[4.0, 0.0]);
        let x = hermitian_solve(&m, &b).unwrap();
        assert!((x[0] - cx(2.0, 0.0)).norm() < 1e-14);
        assert!(x[1].norm() < 1e-14);
    }

    #[test]
    fn solve_random_hpd_residual_and_reference() {
        let mut r = rng(7);
        for _ in 0..50 {
            let m = random_hpd(&mut r, 4);
            let b = random_vec(&mut r, 4);
            let x = hermitian_solve(&m, &b).unwrap();
            let mut resid = m.matvec(&x);
            for i in 0..4 {
                resid[i] -= b[i];
            }
            assert!(resid.norm() <= 1e-10 * b.norm().max(1e-300));
            let xref = gauss_solve(&m, &b);
            let mut diff = 0.0;
            for i in 0..4 {
                diff += (x[i] - xref[i]).norm_sqr();
            }
            assert!(diff.sqrt() <= 1e-10 * xref.norm().max(1e-300));
        }
    }

    #[test]
    fn solve_rejects_indefinite() {
        let m = CMat::diag_real(&[1.0, -1.0]);
        let b = CVec::from_real(&[1.0, 1.0]);
        match hermitian_solve(&m, &b) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_dimension_mismatch() {
        let m = CMat::identity(3);
        let b = CVec::from_real(&[1.0, 2.0]);
        assert!(matches!(
            hermitian_solve(&m, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eig_diagonal() {
        let m = CMat::diag_real(&[3.0, 1.0]);
        let (vals, vecs) = eig_hermitian(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vecs[0][0] - cx(1.0, 0.0)).norm() < 1e-12);
        assert!((vecs[1][1] - cx(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eig_rank_one() {
        // w = (1, i)/sqrt(2): eigenvalues (1, 0), top eigenvector = w up to phase.
        let w = CVec(vec![cx(1.0, 0.0), cx(0.0, 1.0)]).scale(cx(1.0 / 2.0f64.sqrt(), 0.0));
        let m = CMat::outer_h(&w);
        let (vals, vecs) = eig_hermitian(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!(vals[1].abs() < 1e-12);
        // |<v1, w>| = 1 up to phase
        let overlap = vecs[0].dot_h(&w).norm();
        assert!((overlap - 1.0).abs() < 1e-10);
        // phase convention: first entry real positive
        assert!(vecs[0][0].im.abs() < 1e-12 && vecs[0][0].re > 0.0);
    }

    #[test]
    fn eig_reconstruction_trace_det_orthogonality() {
        let mut r = rng(11);
        for _ in 0..40 {
            let m = random_hpd(&mut r, 4);
            let (vals, vecs) = eig_hermitian(&m).unwrap();
            let max_l = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);

            // descending order
            for k in 1..4 {
                assert!(vals[k - 1] >= vals[k] - 1e-12 * max_l);
            }
            // residuals ||M v - lambda v||
            for k in 0..4 {
                let mut resid = m.matvec(&vecs[k]);
                for i in 0..4 {
                    resid[i] -= vals[k] * vecs[k][i];
                }
                assert!(resid.norm() <= 1e-9 * max_l);
            }
            // orthonormality
            for a in 0..4 {
                for b in 0..4 {
                    let d = vecs[a].dot_h(&vecs[b]);
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((d - cx(want, 0.0)).norm() <= 1e-9);
                }
            }
            // reconstruction sum lambda_k v_k v_k^H = M
            let mut rec = CMat::zeros(4, 4);
            for k in 0..4 {
                rec.add_scaled_outer_h(vals[k], &vecs[k]);
            }
            rec.add_scaled(-1.0, &m);
            assert!(rec.frobenius_norm() <= 1e-9 * m.frobenius_norm());
            // sum(lambda) = trace, prod(lambda) = det
            let sum: f64 = vals.iter().sum();
            assert!((sum - m.trace().re).abs() <= 1e-9 * m.trace().re.abs().max(1.0));
            let prod: f64 = vals.iter().product();
            let det = det_cofactor(&m);
            assert!(det.im.abs() <= 1e-8 * det.norm().max(1e-300));
            assert!((prod - det.re).abs() <= 1e-8 * det.re.abs().max(1e-300));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = CMat::identity(2);
        m[(0, 1)] = cx(1.0, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sherman_morrison_zero_update() {
        let mut r = rng(3);
        let b = random_hpd(&mut r, 3);
        let binv = inverse_hermitian(&b).unwrap();
        let u = CVec::zeros(3);
        let x = random_vec(&mut r, 3);
        let got = sherman_morrison_inverse_apply(&binv, &u, &x).unwrap();
        let want = binv.matvec(&x);
        for i in 0..3 {
            assert!((got[i] - want[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn sherman_morrison_hand_case() {
        // B = I2, u = e1, x = e1: (I + e1 e1^H)^{-1} e1 = e1 / 2.
        let binv = CMat::identity(2);
        let u = CVec::basis(2, 0);
        let x = CVec::basis(2, 0);
        let got = sherman_morrison_inverse_apply(&binv, &u, &x).unwrap();
        assert!((got[0] - cx(0.5, 0.0)).norm() < 1e-15);
        assert!(got[1].norm() < 1e-15);
    }

    #[test]
    fn sherman_morrison_matches_direct_inverse() {
        // Invariant: agreement with direct inversion of (B + u u^H) across
        // 1000 random PD instances, n in {2, 3, 4, 8}.
        let mut r = rng(5);
        let dims = [2usize, 3, 4, 8];
        for trial in 0..1000 {
            let n = dims[trial % dims.len()];
            let b = random_hpd(&mut r, n);
            let u = random_vec(&mut r, n);
            let x = random_vec(&mut r, n);
            let binv = inverse_hermitian(&b).unwrap();
            let got = sherman_morrison_inverse_apply(&binv, &u, &x).unwrap();

            let mut updated = b.clone();
            updated.add_scaled_outer_h(1.0, &u);
            let want = gauss_solve(&updated, &x);
            let mut diff = 0.0;
            for i in 0..n {
                diff += (got[i] - want[i]).norm_sqr();
            }
            assert!(
                diff.sqrt() <= 1e-10 * want.norm().max(1e-300),
                "trial {trial} n {n}: rel err {}",
                diff.sqrt() / want.norm()
            );
        }
    }

    #[test]
    fn sherman_morrison_singular_update() {
        // B^{-1} = -I (not a true inverse of a PD matrix, but exercises the guard):
        // 1 + u^H B^{-1} u = 1 - ||u||^2 = 0 for unit u.
        let binv = CMat::identity(2).scale(-1.0);
        let u = CVec::basis(2, 0);
        let x = CVec::basis(2, 0);
        assert!(matches!(
            sherman_morrison_inverse_apply(&binv, &u, &x),
            Err(Error::SingularUpdate { .. })
        ));
    }

    #[test]
    fn inverse_matches_reference() {
        let mut r = rng(13);
        for _ in 0..20 {
            let m = random_hpd(&mut r, 5);
            let inv = inverse_hermitian(&m).unwrap();
            let want = gauss_inverse(&m);
            let mut diff = inv.clone();
            diff.add_scaled(-1.0, &want);
            assert!(diff.frobenius_norm() <= 1e-10 * want.frobenius_norm());
        }
    }
}
