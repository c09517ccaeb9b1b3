//! Fixed-beamformer power allocation and the half-duplex baseline.
//!
//! With MRT toward the far user and MRC on the BS-relay link the power
//! allocation collapses to closed form: the relay transmits exactly enough to
//! hit the far-rate threshold on its own hop, the BS takes whatever
//! interference budget remains, and the point is feasible when that BS power
//! clears the decoding bounds `vtilde(Pr)`. Both binding constraints are
//! tight by construction, which the tests pin to 1e-10.
//!
//! The half-duplex baseline splits the frame into a listen phase and a
//! forward phase. Under the RF-chain-preserved convention the relay combines
//! all `nr + nt` antennas in each phase; each transmitter runs at its solo
//! interference cap. Residual self-interference never enters, so HD results
//! are bitwise independent of `sigma2_rr`.

use crate::cxmat::CVec;
use crate::model::{ChannelRealization, SystemParams};
use crate::optimizer::{Diagnostics, Scheme, SolutionPoint};
use crate::sinr::{self, Beamformers, PowerAllocation};
use crate::{Error, Result};

/// Maximum-ratio transmit/combine beamformers: `wt = f2^* / ||f2||`
/// (maximizing `|f2^T wt|`), `wr = h2 / ||h2||`.
pub fn mrt_mrc(ch: &ChannelRealization) -> Result<Beamformers> {
    let wt = ch.f2.conj().normalized().map_err(|_| Error::ZeroChannel)?;
    let wr = ch.h2.normalized().map_err(|_| Error::ZeroChannel)?;
    Ok(Beamformers { wt, wr })
}

/// Lower bound on the BS power needed at relay power `pr`: the larger of the
/// near-user NOMA bound and the relay-decoding bound, both scaled by
/// `a2 / r_tilde - a1`.
pub fn vtilde(
    p: &SystemParams,
    ch: &ChannelRealization,
    bf: &Beamformers,
    pr: f64,
    r_tilde: f64,
) -> Result<f64> {
    let ratio = p.a2 / p.a1;
    if r_tilde >= ratio {
        return Err(Error::InfeasibleRate { r_tilde, ratio });
    }
    if r_tilde <= 0.0 {
        return Ok(0.0);
    }
    let margin = p.a2 / r_tilde - p.a1;
    let f1wt = ch.f1.dot_t(&bf.wt).norm_sqr();
    let den1 = p.beta_h1 * ch.h1.norm_sqr() * margin;
    if den1 < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "vtilde near-user bound",
            value: den1,
        });
    }
    let near_bound = (pr * p.beta_f1 * f1wt + p.sigma2_1) / den1;

    let mu1 = p.beta_pr * p.p_u * bf.wr.dot_h(&ch.h_pr).norm_sqr() + p.sigma2_r;
    let si = bf.wr.dot_h(&ch.h_rr.matvec(&bf.wt)).norm_sqr();
    let den2 = p.beta_h2 * bf.wr.dot_h(&ch.h2).norm_sqr() * margin;
    if den2 < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "vtilde relay bound",
            value: den2,
        });
    }
    let relay_bound = (pr * si + mu1) / den2;
    Ok(near_bound.max(relay_bound))
}

/// Closed-form power allocation for fixed beamformers.
///
/// `Pr = sigma2_2 r_tilde / (beta_f2 |f2^T wt|^2)` makes the far user's own
/// hop exactly meet the threshold; `Ps` then exhausts the interference cap.
/// Infeasibility (relay cap exceeded, `vtilde` above the BS budget, or an
/// unreachable target) is a flagged result, not an error.
pub fn fixed_power_allocation(
    p: &SystemParams,
    ch: &ChannelRealization,
    bf: &Beamformers,
    rbar: f64,
) -> Result<SolutionPoint> {
    let r_tilde = sinr::rate_to_snr(rbar);
    let diag = Diagnostics::default();
    if r_tilde >= p.a2 / p.a1 {
        return Ok(SolutionPoint::infeasible(
            Scheme::FixedFd,
            rbar,
            p.nt,
            p.nr,
            diag,
        ));
    }

    let hbp_sq = ch.h_bp.norm_sqr();
    if p.beta_bp * hbp_sq < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "fixed allocation ps denominator",
            value: p.beta_bp * hbp_sq,
        });
    }

    let pr = if r_tilde <= 0.0 {
        0.0
    } else {
        let f2wt = ch.f2.dot_t(&bf.wt).norm_sqr();
        if p.beta_f2 * f2wt < 1e-300 {
            return Ok(SolutionPoint::infeasible(
                Scheme::FixedFd,
                rbar,
                p.nt,
                p.nr,
                diag,
            ));
        }
        p.sigma2_2 * r_tilde / (p.beta_f2 * f2wt)
    };

    let hrp_wt = ch.h_rp.dot_t(&bf.wt).norm_sqr();
    let ps = (p.i_th - pr * p.beta_rp * hrp_wt) / (p.beta_bp * hbp_sq);
    // ps >= 0 is exactly the relay-power cap pr <= i_th / (beta_rp |h_rp^T wt|^2)
    let feasible = ps >= 0.0 && vtilde(p, ch, bf, pr, r_tilde)? <= ps;
    if !feasible {
        return Ok(SolutionPoint::infeasible(
            Scheme::FixedFd,
            rbar,
            p.nt,
            p.nr,
            diag,
        ));
    }

    let pa = PowerAllocation::new(ps, pr);
    Ok(SolutionPoint {
        scheme: Scheme::FixedFd,
        rbar,
        feasible: true,
        pa,
        bf: bf.clone(),
        near_rate: sinr::rate_near(p, ch, &bf.wt, pa),
        far_rate: sinr::rate_far(p, ch, &bf.wt, &bf.wr, pa),
        diag,
    })
}

/// Two-phase half-duplex baseline.
///
/// Phase 1: the BS transmits the NOMA superposition at its solo cap
/// `i_th / (beta_bp |h_bp|^2)`; the relay listens (MRC) and the near user
/// sees no relay interference. Phase 2: the relay forwards with MRT at its
/// solo cap `i_th / (beta_rp |h_rp^T wt|^2)`; the BS is silent unless
/// `hd.bs_active_phase2` is set, in which case both split the phase-2
/// interference budget evenly and the BS sends near-user-only traffic.
/// Rates carry the half pre-log. Self-interference never appears.
pub fn hd_baseline(p: &SystemParams, ch: &ChannelRealization, rbar: f64) -> Result<SolutionPoint> {
    let ext = p.hd.rf_chain_preserved;
    let h2 = if ext { &ch.ext_h2 } else { &ch.h2 };
    let f1 = if ext { &ch.ext_f1 } else { &ch.f1 };
    let f2 = if ext { &ch.ext_f2 } else { &ch.f2 };
    let h_rp = if ext { &ch.ext_h_rp } else { &ch.h_rp };
    let h_pr = if ext { &ch.ext_h_pr } else { &ch.h_pr };

    let hbp_sq = ch.h_bp.norm_sqr();
    if p.beta_bp * hbp_sq < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "hd bs power denominator",
            value: p.beta_bp * hbp_sq,
        });
    }
    let ps = p.i_th / (p.beta_bp * hbp_sq);

    let wt = f2.conj().normalized()?;
    let wr = h2.normalized()?;
    let hrp_wt = h_rp.dot_t(&wt).norm_sqr();
    if p.beta_rp * hrp_wt < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context: "hd relay power denominator",
            value: p.beta_rp * hrp_wt,
        });
    }
    let (ps2, pr) = if p.hd.bs_active_phase2 {
        (
            0.5 * p.i_th / (p.beta_bp * hbp_sq),
            0.5 * p.i_th / (p.beta_rp * hrp_wt),
        )
    } else {
        (0.0, p.i_th / (p.beta_rp * hrp_wt))
    };

    let h1_sq = ch.h1.norm_sqr();
    // phase 1: direct NOMA link, relay listening, no self-interference
    let gamma_1 = p.beta_h1 * ps * p.a1 * h1_sq / p.sigma2_1;
    let gamma_12 =
        p.beta_h1 * ps * p.a2 * h1_sq / (p.beta_h1 * ps * p.a1 * h1_sq + p.sigma2_1);
    let wh2 = wr.dot_h(h2).norm_sqr();
    let gamma_r = p.beta_h2 * ps * p.a2 * wh2
        / (p.beta_h2 * ps * p.a1 * wh2 + p.beta_pr * p.p_u * wr.dot_h(h_pr).norm_sqr() + p.sigma2_r);
    // phase 2: relay forwards to the far user
    let gamma_r2 = p.beta_f2 * pr * f2.dot_t(&wt).norm_sqr() / p.sigma2_2;

    let mut near_rate = 0.5 * (1.0 + gamma_1).log2();
    if p.hd.bs_active_phase2 {
        let relay_if = p.beta_f1 * pr * f1.dot_t(&wt).norm_sqr();
        let gamma_1_p2 = p.beta_h1 * ps2 * h1_sq / (relay_if + p.sigma2_1);
        near_rate += 0.5 * (1.0 + gamma_1_p2).log2();
    }
    let far_rate = 0.5 * (1.0 + gamma_12.min(gamma_r).min(gamma_r2)).log2();

    Ok(SolutionPoint {
        scheme: Scheme::HalfDuplex,
        rbar,
        feasible: far_rate >= rbar,
        pa: PowerAllocation::new(ps, pr),
        bf: Beamformers { wt, wr },
        near_rate,
        far_rate,
        diag: Diagnostics::default(),
    })
}
