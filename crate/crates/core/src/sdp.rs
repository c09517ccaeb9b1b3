//! Small dense semidefinite programming over the Hermitian PSD cone.
//!
//! Solves `min tr(C X)` subject to `tr(A_i X) <= / >= b_i` and `X >= 0`
//! (Hermitian positive semidefinite), for problem sizes up to a few dozen.
//! Complex Hermitian data is mapped onto real symmetric matrices through the
//! standard embedding `T(M) = [[Re M, -Im M], [Im M, Re M]]` (with
//! `tr(T(A) T(X)) = 2 tr(A X)`), and one real solver serves all cases: an
//! infeasible-start primal-dual path-following method with fixed centering
//! (sigma = 0.5). Feasibility is certified by a phase-I program minimizing a
//! uniform constraint shift `t`; a strictly feasible point exists iff its
//! optimum is negative.

use crate::cxmat::{self, CMat, CVec, Cx};
use crate::{Error, Result};

/// Constraint direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// One linear trace constraint `tr(matrix * X) (<=|>=) bound`.
#[derive(Clone, Debug)]
pub struct SdpConstraint {
    pub matrix: CMat,
    pub sense: Sense,
    pub bound: f64,
}

/// `min tr(objective * X)` subject to the listed constraints and `X >= 0`.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub n: usize,
    pub objective: CMat,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Solver output. `x` is meaningful only when `status == Optimal`.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: CMat,
    pub objective: f64,
    pub iterations: usize,
    /// Largest relative violation of an original constraint by `x`.
    pub max_constraint_violation: f64,
}

/// Outcome of the phase-I feasibility check.
#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(CMat),
    Infeasible,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("sdp dimension must be >= 1".into()));
        }
        let check = |m: &CMat| -> Result<()> {
            if m.rows() != self.n || m.cols() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: m.rows(),
                });
            }
            if !m.is_hermitian(1e-12) {
                return Err(Error::NotHermitian {
                    asymmetry: m.hermitian_asymmetry() / m.max_abs().max(1e-300),
                });
            }
            Ok(())
        };
        check(&self.objective)?;
        for c in &self.constraints {
            check(&c.matrix)?;
            if !c.bound.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "constraint bound must be finite (got {})",
                    c.bound
                )));
            }
        }
        Ok(())
    }

    /// Relative violation of every original constraint by the Hermitian `x`.
    pub fn max_violation(&self, x: &CMat) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let v = trace_product(&c.matrix, x);
            let gap = match c.sense {
                Sense::Le => v - c.bound,
                Sense::Ge => c.bound - v,
            };
            worst = worst.max(gap / (1.0 + c.bound.abs()));
        }
        worst
    }
}

/// `tr(A X)` for Hermitian `A`, `X` (real by symmetry).
pub fn trace_product(a: &CMat, x: &CMat) -> f64 {
    debug_assert_eq!(a.rows(), x.rows());
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * x[(j, i)]).re;
        }
    }
    acc
}

/// Solve the program to relative tolerance `tol` (clamped to `[1e-10, 1e-4]`).
pub fn solve(prob: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    prob.validate()?;
    let tol = tol.clamp(1e-10, 1e-4);
    let canon = match canonicalize(prob) {
        Canonical::TriviallyInfeasible => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                x: CMat::zeros(prob.n, prob.n),
                objective: 0.0,
                iterations: 0,
                max_constraint_violation: f64::INFINITY,
            })
        }
        Canonical::Rows(rows) => rows,
    };

    if canon.a.is_empty() {
        // Unconstrained over the PSD cone: X = 0 optimal iff the objective
        // has no negative eigendirection.
        let (vals, _) = cxmat::eig_hermitian(&prob.objective)?;
        let min = vals.last().copied().unwrap_or(0.0);
        let status = if min >= -1e-10 * prob.objective.frobenius_norm().max(1.0) {
            SdpStatus::Optimal
        } else {
            SdpStatus::NumericalFailure
        };
        return Ok(SdpSolution {
            status,
            x: CMat::zeros(prob.n, prob.n),
            objective: 0.0,
            iterations: 0,
            max_constraint_violation: 0.0,
        });
    }

    let mut iterations = 0;
    let x0 = match realipm::phase1(&canon, tol, &mut iterations) {
        realipm::Phase1::Feasible(x) => x,
        realipm::Phase1::Infeasible => {
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                x: CMat::zeros(prob.n, prob.n),
                objective: 0.0,
                iterations,
                max_constraint_violation: f64::INFINITY,
            })
        }
        realipm::Phase1::Stalled => {
            return Ok(SdpSolution {
                status: SdpStatus::NumericalFailure,
                x: CMat::zeros(prob.n, prob.n),
                objective: 0.0,
                iterations,
                max_constraint_violation: f64::INFINITY,
            })
        }
    };

    match realipm::phase2(&canon, &x0, tol, &mut iterations) {
        Some(xr) => {
            let x = unembed(&xr, prob.n);
            let objective = trace_product(&prob.objective, &x);
            let max_constraint_violation = prob.max_violation(&x);
            Ok(SdpSolution {
                status: SdpStatus::Optimal,
                x,
                objective,
                iterations,
                max_constraint_violation,
            })
        }
        None => Ok(SdpSolution {
            status: SdpStatus::NumericalFailure,
            x: unembed(&x0, prob.n),
            objective: 0.0,
            iterations,
            max_constraint_violation: f64::INFINITY,
        }),
    }
}

/// Phase-I only: find a strictly feasible point or certify that none exists
/// within numeric tolerance.
pub fn feasibility(prob: &SdpProblem) -> Result<Feasibility> {
    prob.validate()?;
    let canon = match canonicalize(prob) {
        Canonical::TriviallyInfeasible => return Ok(Feasibility::Infeasible),
        Canonical::Rows(rows) => rows,
    };
    if canon.a.is_empty() {
        return Ok(Feasibility::Feasible(CMat::zeros(prob.n, prob.n)));
    }
    let mut iterations = 0;
    match realipm::phase1(&canon, 1e-8, &mut iterations) {
        realipm::Phase1::Feasible(xr) => Ok(Feasibility::Feasible(unembed(&xr, prob.n))),
        _ => Ok(Feasibility::Infeasible),
    }
}

/// Plain-text dump of a problem (row-major matrices, "re,im" entries).
pub fn write_problem(prob: &SdpProblem, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "sdp-problem n={} constraints={}", prob.n, prob.constraints.len())?;
    writeln!(out, "objective")?;
    write_cmat(&prob.objective, out)?;
    for c in &prob.constraints {
        let sense = match c.sense {
            Sense::Le => "le",
            Sense::Ge => "ge",
        };
        writeln!(out, "constraint sense={} bound={}", sense, c.bound)?;
        write_cmat(&c.matrix, out)?;
    }
    writeln!(out, "end")
}

/// Plain-text dump of a solution in the same matrix format.
pub fn write_solution(sol: &SdpSolution, out: &mut impl std::io::Write) -> std::io::Result<()> {
    let status = match sol.status {
        SdpStatus::Optimal => "optimal",
        SdpStatus::Infeasible => "infeasible",
        SdpStatus::NumericalFailure => "numerical-failure",
    };
    writeln!(
        out,
        "sdp-solution status={} objective={} iterations={} max-violation={}",
        status, sol.objective, sol.iterations, sol.max_constraint_violation
    )?;
    writeln!(out, "X")?;
    write_cmat(&sol.x, out)?;
    writeln!(out, "end")
}

fn write_cmat(m: &CMat, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Complex -> canonical real embedding
// ---------------------------------------------------------------------------

/// Canonical real problem: min <C,X> s.t. <A_i,X> + s_i = b_i, X >= 0, s >= 0,
/// all senses folded into `<=` and every row scaled to unit magnitude.
struct CanonicalRows {
    nr: usize,
    c: RMat,
    a: Vec<RMat>,
    b: Vec<f64>,
}

enum Canonical {
    Rows(CanonicalRows),
    TriviallyInfeasible,
}

/// `T(M) = [[Re M, -Im M], [Im M, Re M]]`.
fn embed(m: &CMat) -> RMat {
    let n = m.rows();
    let mut r = RMat::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            r[(i, j)] = v.re;
            r[(i, j + n)] = -v.im;
            r[(i + n, j)] = v.im;
            r[(i + n, j + n)] = v.re;
        }
    }
    r
}

/// Inverse of [`embed`] for J-structured symmetric matrices, Hermitized.
fn unembed(r: &RMat, n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (r[(i, j)] + r[(i + n, j + n)]);
            let im = 0.5 * (r[(i + n, j)] - r[(i, j + n)]);
            m[(i, j)] = Cx::new(re, im);
        }
    }
    m.hermitize();
    m
}

fn canonicalize(prob: &SdpProblem) -> Canonical {
    let scale_ref = prob
        .constraints
        .iter()
        .map(|c| c.matrix.frobenius_norm())
        .fold(prob.objective.frobenius_norm(), f64::max)
        .max(1.0);

    let mut a = Vec::new();
    let mut b = Vec::new();
    for c in &prob.constraints {
        let (mat, bound) = match c.sense {
            Sense::Le => (c.matrix.clone(), c.bound),
            Sense::Ge => (c.matrix.scale(-1.0), -c.bound),
        };
        if mat.frobenius_norm() <= 1e-14 * scale_ref {
            // Vacuous row: satisfied for every X, or unsatisfiable for any.
            if bound >= -1e-12 * (1.0 + bound.abs()) {
                continue;
            }
            return Canonical::TriviallyInfeasible;
        }
        // Real embedding doubles traces: <T(A), T(X)> = 2 <A, X>.
        let ar = embed(&mat);
        let br = 2.0 * bound;
        let row_scale = ar.frobenius_norm().max(br.abs()).max(1e-12);
        a.push(ar.scale(1.0 / row_scale));
        b.push(br / row_scale);
    }

    let c_embedded = embed(&prob.objective);
    let c_scale = c_embedded.frobenius_norm().max(1e-12);
    Canonical::Rows(CanonicalRows {
        nr: 2 * prob.n,
        c: c_embedded.scale(1.0 / c_scale),
        a,
        b,
    })
}

// ---------------------------------------------------------------------------
// Real symmetric matrices
// ---------------------------------------------------------------------------

/// Dense real square matrix, row-major.
#[derive(Clone, Debug)]
struct RMat {
    d: Vec<f64>,
    n: usize,
}

impl RMat {
    fn zeros(n: usize) -> Self {
        RMat { d: vec![0.0; n * n], n }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    fn scale(&self, s: f64) -> RMat {
        RMat {
            d: self.d.iter().map(|x| x * s).collect(),
            n: self.n,
        }
    }

    fn add_scaled(&mut self, alpha: f64, other: &RMat) {
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a += alpha * b;
        }
    }

    fn inner(&self, other: &RMat) -> f64 {
        self.d.iter().zip(&other.d).map(|(a, b)| a * b).sum()
    }

    fn frobenius_norm(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn matmul(&self, other: &RMat) -> RMat {
        let n = self.n;
        let mut out = RMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Project onto the J-commuting subspace of the complex embedding:
    /// `(M + J M J^T) / 2` with `J = [[0, -I], [I, 0]]`.
    fn jsymmetrize(&mut self) {
        let h = self.n / 2;
        debug_assert_eq!(2 * h, self.n);
        for i in 0..h {
            for j in 0..h {
                let a = self[(i, j)];
                let d = self[(i + h, j + h)];
                let bq = self[(i, j + h)];
                let cq = self[(i + h, j)];
                let diag = 0.5 * (a + d);
                let off = 0.5 * (bq - cq);
                self[(i, j)] = diag;
                self[(i + h, j + h)] = diag;
                self[(i, j + h)] = off;
                self[(i + h, j)] = -off;
            }
        }
    }

    /// Cholesky test/factor; `None` when not positive definite.
    fn cholesky(&self) -> Option<RChol> {
        let n = self.n;
        let mut l = self.clone();
        for j in 0..n {
            let mut d = l[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let root = d.sqrt();
            l[(j, j)] = root;
            for i in (j + 1)..n {
                let mut v = l[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / root;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                l[(i, j)] = 0.0;
            }
        }
        Some(RChol { l })
    }
}

impl std::ops::Index<(usize, usize)> for RMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.d[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.d[i * self.n + j]
    }
}

struct RChol {
    l: RMat,
}

impl RChol {
    fn inverse(&self) -> RMat {
        let n = self.l.n;
        let mut inv = RMat::zeros(n);
        for col in 0..n {
            let mut x = vec![0.0; n];
            x[col] = 1.0;
            for i in 0..n {
                let mut acc = x[i];
                for k in 0..i {
                    acc -= self.l[(i, k)] * x[k];
                }
                x[i] = acc / self.l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut acc = x[i];
                for k in (i + 1)..n {
                    acc -= self.l[(k, i)] * x[k];
                }
                x[i] = acc / self.l[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        inv.symmetrize();
        inv
    }
}

/// Dense LU solve with partial pivoting for the small Schur systems.
fn lu_solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m.iter().cloned().collect();
    let mut x: Vec<f64> = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for i in (col + 1)..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[col][j];
                }
                x[i] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Infeasible-start primal-dual path following (HKM direction, sigma = 0.5)
// ---------------------------------------------------------------------------

mod realipm {
    use super::{lu_solve, CanonicalRows, RMat};

    pub const MAX_ITER: usize = 200;
    const SIGMA: f64 = 0.5;
    const STEP_FRACTION: f64 = 0.98;
    const STALL_STEP: f64 = 1e-12;
    const DIVERGENCE: f64 = 1e8;

    pub enum Phase1 {
        Feasible(RMat),
        Infeasible,
        Stalled,
    }

    /// State of the path-following iteration. The scalar block `(u, wu)` is
    /// the phase-I shift variable and is absent in phase II.
    struct State {
        x: RMat,
        s: Vec<f64>,
        y: Vec<f64>,
        z: RMat,
        u: f64,
        wu: f64,
        has_u: bool,
    }

    struct Step {
        dx: RMat,
        ds: Vec<f64>,
        dy: Vec<f64>,
        dz: RMat,
        du: f64,
        dwu: f64,
    }

    /// Problem data viewed by the iteration: rows `<A_i, X> + d_i u + s_i = b_i`.
    struct Data<'p> {
        nr: usize,
        c: Option<&'p RMat>,
        cu: f64,
        a: &'p [RMat],
        b: Vec<f64>,
        d: Vec<f64>,
    }

    fn mu(st: &State, nr: usize, m: usize) -> f64 {
        let mut g = st.x.inner(&st.z) + st.u * st.wu * (st.has_u as usize as f64);
        for i in 0..m {
            g += st.s[i] * (-st.y[i]);
        }
        let dof = nr + m + st.has_u as usize;
        g / dof as f64
    }

    fn residuals(data: &Data, st: &State) -> (Vec<f64>, RMat, f64) {
        let m = data.a.len();
        let mut rp = vec![0.0; m];
        for i in 0..m {
            rp[i] = data.b[i] - data.a[i].inner(&st.x) - data.d[i] * st.u - st.s[i];
        }
        let mut rd = match data.c {
            Some(c) => c.clone(),
            None => RMat::zeros(data.nr),
        };
        for i in 0..m {
            rd.add_scaled(-st.y[i], &data.a[i]);
        }
        rd.add_scaled(-1.0, &st.z);
        let rdu = if st.has_u {
            data.cu - data.d.iter().zip(&st.y).map(|(d, y)| d * y).sum::<f64>() - st.wu
        } else {
            0.0
        };
        (rp, rd, rdu)
    }

    /// One HKM Newton step toward the sigma-centered point.
    fn newton_step(data: &Data, st: &State) -> Option<Step> {
        let m = data.a.len();
        let nr = data.nr;
        let (rp, rd, rdu) = residuals(data, st);
        let mu = mu(st, nr, m);
        let target = SIGMA * mu;

        let zinv = st.z.cholesky()?.inverse();
        // G = target Z^{-1} - X - Z^{-1} Rd X
        let mut g = zinv.scale(target);
        g.add_scaled(-1.0, &st.x);
        let zrd = zinv.matmul(&rd);
        let zrdx = zrd.matmul(&st.x);
        g.add_scaled(-1.0, &zrdx);

        // Schur complement M dy = rhs
        let mut msys = vec![vec![0.0; m]; m];
        let zax: Vec<RMat> = data
            .a
            .iter()
            .map(|ai| zinv.matmul(ai).matmul(&st.x))
            .collect();
        for i in 0..m {
            for j in 0..m {
                let mut v = data.a[i].inner(&zax[j]);
                if st.has_u {
                    v += data.d[i] * data.d[j] * st.u / st.wu;
                }
                if i == j {
                    v += st.s[i] / (-st.y[i]);
                }
                msys[i][j] = v;
            }
        }
        // tiny Tikhonov guard against near-singular Schur systems
        let diag_max = (0..m).map(|i| msys[i][i].abs()).fold(0.0f64, f64::max);
        for (i, row) in msys.iter_mut().enumerate() {
            row[i] += 1e-13 * diag_max.max(1.0);
            let _ = i;
        }

        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let mut v = rp[i] - data.a[i].inner(&g);
            if st.has_u {
                v -= data.d[i] * (target / st.wu - st.u - st.u / st.wu * rdu);
            }
            let ws = -st.y[i];
            v -= target / ws - st.s[i];
            rhs[i] = v;
        }
        let dy = lu_solve(&msys, &rhs)?;

        // dZ = Rd - sum dy_i A_i
        let mut dz = rd;
        for i in 0..m {
            dz.add_scaled(-dy[i], &data.a[i]);
        }
        dz.symmetrize();

        // dX = target Z^{-1} - X - Z^{-1} dZ X, symmetrized
        let mut dx = zinv.scale(target);
        dx.add_scaled(-1.0, &st.x);
        let zdzx = zinv.matmul(&dz).matmul(&st.x);
        dx.add_scaled(-1.0, &zdzx);
        dx.symmetrize();

        let (du, dwu) = if st.has_u {
            let dwu = rdu - data.d.iter().zip(&dy).map(|(d, dy)| d * dy).sum::<f64>();
            let du = target / st.wu - st.u - st.u / st.wu * dwu;
            (du, dwu)
        } else {
            (0.0, 0.0)
        };

        let mut ds = vec![0.0; m];
        for i in 0..m {
            let ws = -st.y[i];
            ds[i] = target / ws - st.s[i] + st.s[i] / ws * dy[i];
        }

        Some(Step { dx, ds, dy, dz, du, dwu })
    }

    /// Largest step in (0, 1] keeping `x + alpha dx` positive definite,
    /// found by bisection on Cholesky success.
    fn max_step_psd(x: &RMat, dx: &RMat) -> f64 {
        let probe = |alpha: f64| {
            let mut t = x.clone();
            t.add_scaled(alpha, dx);
            t.cholesky().is_some()
        };
        if probe(1.0) {
            return 1.0;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if probe(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn max_step_positive(v: f64, dv: f64) -> f64 {
        if dv >= 0.0 {
            1.0
        } else {
            (-v / dv).min(1.0)
        }
    }

    fn apply_step(st: &mut State, step: &Step, complex_embedded: bool) -> (f64, f64) {
        let m = st.s.len();
        let mut ap = max_step_psd(&st.x, &step.dx);
        for i in 0..m {
            ap = ap.min(max_step_positive(st.s[i], step.ds[i]));
        }
        if st.has_u {
            ap = ap.min(max_step_positive(st.u, step.du));
        }
        ap = (STEP_FRACTION * ap).min(1.0);

        let mut ad = max_step_psd(&st.z, &step.dz);
        for i in 0..m {
            // ws = -y must stay positive: ws step is -dy
            ad = ad.min(max_step_positive(-st.y[i], -step.dy[i]));
        }
        if st.has_u {
            ad = ad.min(max_step_positive(st.wu, step.dwu));
        }
        ad = (STEP_FRACTION * ad).min(1.0);

        st.x.add_scaled(ap, &step.dx);
        for i in 0..m {
            st.s[i] += ap * step.ds[i];
        }
        if st.has_u {
            st.u += ap * step.du;
            st.wu += ad * step.dwu;
        }
        for i in 0..m {
            st.y[i] += ad * step.dy[i];
        }
        st.z.add_scaled(ad, &step.dz);
        st.x.symmetrize();
        st.z.symmetrize();
        if complex_embedded {
            st.x.jsymmetrize();
            st.z.jsymmetrize();
        }
        (ap, ad)
    }

    /// Phase I: minimize `t` in `<A_i, X> <= b_i + t`, encoded with the shifted
    /// nonnegative variable `u = t + 1`. Strictly feasible iff optimum t < 0.
    pub fn phase1(canon: &CanonicalRows, tol: f64, iterations: &mut usize) -> Phase1 {
        let m = canon.a.len();
        let nr = canon.nr;
        let b_shift: Vec<f64> = canon.b.iter().map(|b| b - 1.0).collect();
        let data = Data {
            nr,
            c: None,
            cu: 1.0,
            a: &canon.a,
            b: b_shift,
            d: vec![-1.0; m],
        };

        let x0 = RMat::identity(nr);
        let worst = (0..m)
            .map(|i| canon.a[i].inner(&x0) - data.b[i])
            .fold(0.0f64, f64::max);
        let u0 = 2.0 * worst.max(1.0);
        let s0: Vec<f64> = (0..m)
            .map(|i| data.b[i] - canon.a[i].inner(&x0) + u0)
            .collect();
        let mut st = State {
            x: x0,
            s: s0,
            y: vec![-1.0; m],
            z: RMat::identity(nr),
            u: u0,
            wu: 1.0,
            has_u: true,
        };

        let feas_tol = tol.max(1e-9);
        for _ in 0..MAX_ITER {
            *iterations += 1;
            // strict-margin exit: the current X alone already satisfies all rows
            let margin = (0..m)
                .map(|i| canon.b[i] - canon.a[i].inner(&st.x))
                .fold(f64::INFINITY, f64::min);
            if margin > 1e-7 {
                return Phase1::Feasible(st.x);
            }
            // certified-infeasible exit: dual objective bounds t* from below
            let (rp, rd, rdu) = residuals(&data, &st);
            let dinf = rd.frobenius_norm() / (1.0 + 1.0) + rdu.abs();
            let dual_obj: f64 = data.b.iter().zip(&st.y).map(|(b, y)| b * y).sum();
            if dinf < 1e-7 && dual_obj > 1.0 + 1e-7 {
                return Phase1::Infeasible;
            }
            let pinf = rp.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
            let gap = mu(&st, nr, m) * (nr + m + 1) as f64;
            if pinf < feas_tol && dinf < feas_tol && gap < feas_tol * (1.0 + st.u.abs()) {
                // converged: classify by the sign of t = u - 1
                return if st.u - 1.0 < -1e-7 {
                    Phase1::Feasible(st.x)
                } else {
                    Phase1::Infeasible
                };
            }
            let step = match newton_step(&data, &st) {
                Some(s) => s,
                None => return Phase1::Stalled,
            };
            let (ap, ad) = apply_step(&mut st, &step, true);
            if ap < STALL_STEP && ad < STALL_STEP {
                return Phase1::Stalled;
            }
            if st.x.frobenius_norm() > DIVERGENCE || st.u > DIVERGENCE {
                return Phase1::Infeasible;
            }
        }
        // iteration cap: settle by the sign of the best certified value
        if st.u - 1.0 < -1e-7 {
            let margin = (0..m)
                .map(|i| canon.b[i] - canon.a[i].inner(&st.x))
                .fold(f64::INFINITY, f64::min);
            if margin > 0.0 {
                return Phase1::Feasible(st.x);
            }
        }
        Phase1::Stalled
    }

    /// Phase II from a strictly feasible primal start.
    pub fn phase2(
        canon: &CanonicalRows,
        x0: &RMat,
        tol: f64,
        iterations: &mut usize,
    ) -> Option<RMat> {
        let m = canon.a.len();
        let nr = canon.nr;
        let data = Data {
            nr,
            c: Some(&canon.c),
            cu: 0.0,
            a: &canon.a,
            b: canon.b.clone(),
            d: vec![0.0; m],
        };
        let s0: Vec<f64> = (0..m)
            .map(|i| (canon.b[i] - canon.a[i].inner(x0)).max(1e-12))
            .collect();
        let mut st = State {
            x: x0.clone(),
            s: s0,
            y: vec![-1.0; m],
            z: RMat::identity(nr),
            u: 0.0,
            wu: 0.0,
            has_u: false,
        };

        for _ in 0..MAX_ITER {
            *iterations += 1;
            let (rp, rd, _) = residuals(&data, &st);
            let pinf = rp
                .iter()
                .zip(&canon.b)
                .fold(0.0f64, |acc, (r, b)| acc.max(r.abs() / (1.0 + b.abs())));
            let dinf = rd.frobenius_norm() / (1.0 + canon.c.frobenius_norm());
            let obj_p = canon.c.inner(&st.x);
            let obj_d: f64 = canon.b.iter().zip(&st.y).map(|(b, y)| b * y).sum();
            let gap = mu(&st, nr, m) * (nr + m) as f64;
            let rel_gap = gap / (1.0 + obj_p.abs() + obj_d.abs());
            if pinf < tol && dinf < tol && rel_gap < tol {
                return Some(st.x);
            }
            let step = newton_step(&data, &st)?;
            let (ap, ad) = apply_step(&mut st, &step, true);
            if ap < STALL_STEP && ad < STALL_STEP {
                return None;
            }
            if st.x.frobenius_norm() > DIVERGENCE {
                return None;
            }
        }
        None
    }
}
