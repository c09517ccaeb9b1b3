//! Brute-force verification oracle for two-transmit-antenna instances.
//!
//! Exhaustively grids the transmit beamformer over the angle
//! parameterization of unit 2-vectors (global phase is irrelevant to every
//! SINR expression), the BS power over `[0, ps_max]` and the relay power
//! over `[0, i_th / (beta_rp |h_rp^T wt|^2)]`, keeping the feasible point
//! with the highest near rate. The receive beamformer is not gridded: the
//! closed form `A^{-1} h2` is exactly optimal for any fixed transmit choice,
//! so using it keeps the oracle exact while cutting two dimensions.
//!
//! The oracle shares nothing with the relaxation-based optimizer beyond the
//! SINR formula layer: its inner loop evaluates the same closed forms on
//! scalars, and the winning point is rebuilt and re-validated through the
//! `sinr` functions before it is returned.

use rayon::prelude::*;

use crate::cxmat::{self, CMat, CVec, Cx};
use crate::model::{ChannelRealization, SystemParams};
use crate::optimizer::{Diagnostics, Scheme, SolutionPoint};
use crate::sinr::{self, Beamformers, PowerAllocation};
use crate::{Error, Result};

/// Unit 2-vector `(cos theta, sin theta e^{i phi})`; over
/// `theta in [0, pi/2], phi in [0, 2 pi)` this covers all unit vectors up to
/// global phase.
pub fn unit_vector_from_angles(theta: f64, phi: f64) -> CVec {
    CVec(vec![
        Cx::new(theta.cos(), 0.0),
        Cx::from_polar(theta.sin(), phi),
    ])
}

/// Default grid: 64 x 64 beamformer angles, 60 x 60 power points.
pub const DEFAULT_GRID: (usize, usize, usize, usize) = (64, 64, 60, 60);

struct Candidate {
    gamma_1: f64,
    index: (usize, usize, usize, usize),
    wt: CVec,
    ps: f64,
    pr: f64,
}

/// Exhaustive search over (wt, Ps, Pr); requires `nt == 2`.
///
/// Grids are inclusive of both endpoints (the phi grid is periodic and
/// excludes `2 pi`). Results are deterministic for fixed inputs regardless
/// of the thread schedule: slices reduce in angle order with ties broken by
/// lexicographic grid index.
pub fn grid_search(
    p: &SystemParams,
    ch: &ChannelRealization,
    rbar: f64,
    n_theta: usize,
    n_phi: usize,
    n_ps: usize,
    n_pr: usize,
) -> Result<SolutionPoint> {
    if p.nt != 2 {
        return Err(Error::InvalidParams(format!(
            "oracle grid search requires nt = 2 (got {})",
            p.nt
        )));
    }
    if n_theta < 2 || n_phi < 1 || n_ps < 2 || n_pr < 2 {
        return Err(Error::InvalidParams(
            "oracle grid needs at least 2 points per non-periodic axis".into(),
        ));
    }
    let r_tilde = sinr::rate_to_snr(rbar);
    if r_tilde >= p.a2 / p.a1 {
        return Ok(SolutionPoint::infeasible(
            Scheme::Oracle,
            rbar,
            p.nt,
            p.nr,
            Diagnostics::default(),
        ));
    }
    let hbp_sq = ch.h_bp.norm_sqr();
    if p.beta_bp * hbp_sq < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "oracle ps_max denominator",
            value: p.beta_bp * hbp_sq,
        });
    }
    let ps_max = p.i_th / (p.beta_bp * hbp_sq);

    let h1_sq = ch.h1.norm_sqr();
    let e_mat = sinr::build_e(p, ch);

    let best = (0..n_theta)
        .into_par_iter()
        .map(|it| -> Result<Option<Candidate>> {
            let theta = std::f64::consts::FRAC_PI_2 * it as f64 / (n_theta - 1) as f64;
            let mut slice_best: Option<Candidate> = None;
            // per-slice scratch, reused across the whole scan
            let mut a_scratch = CMat::zeros(p.nr, p.nr);
            let mut factor = cxmat::cholesky(&CMat::identity(p.nr))?;
            let mut x = CVec::zeros(p.nr);
            let mut b_ps = CMat::zeros(p.nr, p.nr);

            for ip in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
                let wt = unit_vector_from_angles(theta, phi);
                let f1_wt = ch.f1.dot_t(&wt).norm_sqr();
                let f2_wt = ch.f2.dot_t(&wt).norm_sqr();
                let hrp_wt = ch.h_rp.dot_t(&wt).norm_sqr();
                let u = ch.h_rr.matvec(&wt);
                let pr_cap = {
                    let den = p.beta_rp * hrp_wt;
                    if den < 1e-300 {
                        1e12
                    } else {
                        (p.i_th / den).min(1e12)
                    }
                };
                // Exact relay power tightening the far user's own hop; the
                // near rate strictly decreases in pr while every other
                // constraint only caps it from above, so this is the best
                // pr for any (wt, ps). Appended to the grid as one more
                // candidate (index n_pr) to kill the pr discretization.
                let pr_anchor = if r_tilde > 0.0 && p.beta_f2 * f2_wt >= 1e-300 {
                    let v = r_tilde * p.sigma2_2 / (p.beta_f2 * f2_wt);
                    (v <= pr_cap * (1.0 + 1e-12)).then_some(v)
                } else {
                    None
                };

                for ips in 0..n_ps {
                    let ps = ps_max * ips as f64 / (n_ps - 1) as f64;
                    // B(ps) = E + beta_h2 ps a1 h2 h2^H, shared across pr
                    b_ps.copy_from(&e_mat);
                    b_ps.add_scaled_outer_h(p.beta_h2 * ps * p.a1, &ch.h2);
                    let num_12 = p.beta_h1 * ps * p.a2 * h1_sq;
                    let num_1 = p.beta_h1 * ps * p.a1 * h1_sq;
                    let bs_if = p.beta_bp * ps * hbp_sq;

                    for ipr in 0..=n_pr {
                        let pr = if ipr < n_pr {
                            pr_cap * ipr as f64 / (n_pr - 1) as f64
                        } else {
                            match pr_anchor {
                                Some(v) => v,
                                None => continue,
                            }
                        };
                        let relay_if = p.beta_f1 * pr * f1_wt;
                        // candidate near-user SINR; skip unless it improves
                        let gamma_1 = num_1 / (relay_if + p.sigma2_1);
                        if let Some(b) = &slice_best {
                            if gamma_1 <= b.gamma_1 {
                                continue;
                            }
                        }
                        // cheap constraints first
                        if bs_if + p.beta_rp * pr * hrp_wt > p.i_th * (1.0 + 1e-12) {
                            continue;
                        }
                        if p.beta_f2 * pr * f2_wt < r_tilde * p.sigma2_2 * (1.0 - 1e-12) {
                            continue;
                        }
                        let den_12 = num_1 + relay_if + p.sigma2_1;
                        if num_12 < r_tilde * den_12 * (1.0 - 1e-12) {
                            continue;
                        }
                        // relay SINR under the optimal receive beamformer:
                        // gamma_R = beta_h2 ps a2 h2^H A^{-1} h2
                        a_scratch.copy_from(&b_ps);
                        a_scratch.add_scaled_outer_h(pr, &u);
                        cxmat::refactor(&a_scratch, &mut factor)?;
                        x.copy_from(&ch.h2);
                        factor.solve_in_place(&mut x);
                        let g = ch.h2.dot_h(&x).re;
                        if p.beta_h2 * ps * p.a2 * g < r_tilde * (1.0 - 1e-12) {
                            continue;
                        }
                        slice_best = Some(Candidate {
                            gamma_1,
                            index: (it, ip, ips, ipr),
                            wt: wt.clone(),
                            ps,
                            pr,
                        });
                    }
                }
            }
            Ok(slice_best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .fold(None::<Candidate>, |acc, c| match acc {
            None => Some(c),
            Some(a) => {
                if c.gamma_1 > a.gamma_1 || (c.gamma_1 == a.gamma_1 && c.index < a.index) {
                    Some(c)
                } else {
                    Some(a)
                }
            }
        });

    let Some(win) = best else {
        return Ok(SolutionPoint::infeasible(
            Scheme::Oracle,
            rbar,
            p.nt,
            p.nr,
            Diagnostics::default(),
        ));
    };

    // Rebuild the winner through the sinr layer and re-validate.
    let pa = PowerAllocation::new(win.ps, win.pr);
    let wt_bar = win.wt.scale(Cx::new(win.pr.sqrt(), 0.0));
    let a = sinr::build_a(p, ch, &wt_bar, win.ps);
    let wr = cxmat::hermitian_solve(&a, &ch.h2)?.normalized()?;
    let near_rate = sinr::rate_near(p, ch, &win.wt, pa);
    let far_rate = sinr::rate_far(p, ch, &win.wt, &wr, pa);
    let interference = sinr::primary_interference(p, ch, &win.wt, pa);
    let feasible = far_rate >= rbar - 1e-9 * (1.0 + rbar)
        && interference <= p.i_th * (1.0 + 1e-9);
    Ok(SolutionPoint {
        scheme: Scheme::Oracle,
        rbar,
        feasible,
        pa,
        bf: Beamformers {
            wt: win.wt,
            wr,
        },
        near_rate,
        far_rate,
        diag: Diagnostics::default(),
    })
}
