//! Closed-form SINR, rate and constraint expressions of the scenario.
//!
//! Everything here works in linear watts; decibel conversion happens only at
//! the I/O boundary. The module also builds the covariance-like matrices that
//! the receive-beamformer optimum and the semidefinite relaxation are phrased
//! in, and the `q` thresholds with the feasibility interval for the BS power.

use crate::cxmat::{self, CMat, CVec};
use crate::model::{ChannelRealization, SystemParams};
use crate::{Error, Result};

/// Transmit powers of the base station and the relay, watts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerAllocation {
    pub ps: f64,
    pub pr: f64,
}

impl PowerAllocation {
    pub fn new(ps: f64, pr: f64) -> Self {
        debug_assert!(ps >= 0.0 && pr >= 0.0);
        PowerAllocation { ps, pr }
    }

    pub const ZERO: PowerAllocation = PowerAllocation { ps: 0.0, pr: 0.0 };
}

/// Unit-norm transmit/receive beamformers at the relay.
#[derive(Clone, Debug, PartialEq)]
pub struct Beamformers {
    pub wt: CVec,
    pub wr: CVec,
}

impl Beamformers {
    /// Requires both vectors unit-norm to 1e-10.
    pub fn new(wt: CVec, wr: CVec) -> Result<Self> {
        for (name, v) in [("wt", &wt), ("wr", &wr)] {
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be unit norm (got {})",
                    v.norm()
                )));
            }
        }
        Ok(Beamformers { wt, wr })
    }
}

/// Thresholds of the reduced transmit-side problem at a fixed BS power,
/// plus the feasibility interval `[v, ps_max]` for that power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QBounds {
    /// Cap on the relay-to-near-user interference power (`+inf` when the far
    /// target is zero and the constraint is vacuous).
    pub q1: f64,
    /// Slack of the relay-decoding constraint under the optimal receive
    /// beamformer.
    pub q2: f64,
    /// Required relay power in the far user's direction.
    pub q3: f64,
    /// Interference budget left for the relay at the primary receiver.
    pub q4: f64,
    /// Lower end of the feasible BS-power interval.
    pub v: f64,
    /// Upper end: `i_th / (beta_bp |h_bp|^2)`.
    pub ps_max: f64,
}

fn guarded_div(num: f64, den: f64, context: &'static str) -> Result<f64> {
    if den.abs() < 1e-300 {
        return Err(Error::DegenerateDenominator {
            context,
            value: den,
        });
    }
    Ok(num / den)
}

/// `2^rbar - 1`, the SINR threshold equivalent to a far-rate target.
pub fn rate_to_snr(rbar: f64) -> f64 {
    2f64.powf(rbar) - 1.0
}

/// SINR of the far user's symbol as observed at the near user (pre-SIC).
pub fn gamma_12(p: &SystemParams, ch: &ChannelRealization, wt: &CVec, pa: PowerAllocation) -> f64 {
    let h1_sq = ch.h1.norm_sqr();
    let relay_if = p.beta_f1 * pa.pr * ch.f1.dot_t(wt).norm_sqr();
    let num = p.beta_h1 * pa.ps * p.a2 * h1_sq;
    let den = p.beta_h1 * pa.ps * p.a1 * h1_sq + relay_if + p.sigma2_1;
    num / den
}

/// SINR of the near user's own symbol after cancelling the far user's.
pub fn gamma_1(p: &SystemParams, ch: &ChannelRealization, wt: &CVec, pa: PowerAllocation) -> f64 {
    let relay_if = p.beta_f1 * pa.pr * ch.f1.dot_t(wt).norm_sqr();
    p.beta_h1 * pa.ps * p.a1 * ch.h1.norm_sqr() / (relay_if + p.sigma2_1)
}

/// SINR of the far user's symbol at the relay, which treats the near user's
/// symbol, the residual self-interference and the primary signal as noise.
pub fn gamma_r(
    p: &SystemParams,
    ch: &ChannelRealization,
    wt: &CVec,
    wr: &CVec,
    pa: PowerAllocation,
) -> f64 {
    let wh2 = wr.dot_h(&ch.h2).norm_sqr();
    let si = pa.pr * wr.dot_h(&ch.h_rr.matvec(wt)).norm_sqr();
    let primary = p.beta_pr * p.p_u * wr.dot_h(&ch.h_pr).norm_sqr();
    let num = p.beta_h2 * pa.ps * p.a2 * wh2;
    let den = p.beta_h2 * pa.ps * p.a1 * wh2 + si + primary + p.sigma2_r;
    num / den
}

/// SNR of the relayed symbol at the far user.
pub fn gamma_r2(p: &SystemParams, ch: &ChannelRealization, wt: &CVec, pa: PowerAllocation) -> f64 {
    p.beta_f2 * pa.pr * ch.f2.dot_t(wt).norm_sqr() / p.sigma2_2
}

/// Total interference power inflicted on the primary receiver; the caller
/// compares it against `i_th`.
pub fn primary_interference(
    p: &SystemParams,
    ch: &ChannelRealization,
    wt: &CVec,
    pa: PowerAllocation,
) -> f64 {
    p.beta_bp * pa.ps * ch.h_bp.norm_sqr() + p.beta_rp * pa.pr * ch.h_rp.dot_t(wt).norm_sqr()
}

/// Near user's achievable rate, bits/s/Hz.
pub fn rate_near(p: &SystemParams, ch: &ChannelRealization, wt: &CVec, pa: PowerAllocation) -> f64 {
    (1.0 + gamma_1(p, ch, wt, pa)).log2()
}

/// Far user's achievable rate: decode-and-forward end-to-end bottleneck over
/// the near user's SIC stage, the relay and the relay-to-far-user hop.
pub fn rate_far(
    p: &SystemParams,
    ch: &ChannelRealization,
    wt: &CVec,
    wr: &CVec,
    pa: PowerAllocation,
) -> f64 {
    let g = gamma_12(p, ch, wt, pa)
        .min(gamma_r(p, ch, wt, wr, pa))
        .min(gamma_r2(p, ch, wt, pa));
    (1.0 + g).log2()
}

/// `E = beta_pr P_U h_pr h_pr^H + sigma2_r I`. Hermitian PD.
pub fn build_e(p: &SystemParams, ch: &ChannelRealization) -> CMat {
    let mut e = CMat::identity(p.nr).scale(p.sigma2_r);
    e.add_scaled_outer_h(p.beta_pr * p.p_u, &ch.h_pr);
    e.hermitize();
    e
}

/// `B = E + beta_h2 Ps a1 h2 h2^H`. Hermitian PD.
pub fn build_b(p: &SystemParams, ch: &ChannelRealization, ps: f64) -> CMat {
    let mut b = build_e(p, ch);
    b.add_scaled_outer_h(p.beta_h2 * ps * p.a1, &ch.h2);
    b.hermitize();
    b
}

/// `A = B + (H_rr w_bar)(H_rr w_bar)^H`, with the relay power absorbed into
/// `w_bar = sqrt(Pr) wt`. Hermitian PD.
pub fn build_a(p: &SystemParams, ch: &ChannelRealization, wt_bar: &CVec, ps: f64) -> CMat {
    let mut a = build_b(p, ch, ps);
    let si = ch.h_rr.matvec(wt_bar);
    a.add_scaled_outer_h(1.0, &si);
    a.hermitize();
    a
}

/// `h2^H E^{-1} h2` (real, positive for PD `E`).
pub fn h2_einv_h2(p: &SystemParams, ch: &ChannelRealization) -> Result<f64> {
    let e = build_e(p, ch);
    let x = cxmat::hermitian_solve(&e, &ch.h2)?;
    Ok(ch.h2.dot_h(&x).re)
}

/// `u = h2^H B^{-1} h2` evaluated through the rank-one-update closed form
/// `u = e / (1 + beta_h2 Ps a1 e)` with `e = h2^H E^{-1} h2`; the direct
/// solve against `B` is the independent route the tests compare it with.
pub fn u_value(p: &SystemParams, ch: &ChannelRealization, ps: f64) -> Result<f64> {
    let e = h2_einv_h2(p, ch)?;
    Ok(e / (1.0 + p.beta_h2 * ps * p.a1 * e))
}

/// The `q` thresholds and the feasibility interval for a given BS power and
/// far-rate threshold `r_tilde = 2^rbar - 1`.
///
/// Errors with [`Error::InfeasibleRate`] when `r_tilde >= a2/a1` (the NOMA
/// split cannot support the target no matter the powers). `r_tilde = 0` uses
/// the vacuous-constraint conventions `q1 = +inf`, `q3 = 0`, `v = 0`.
pub fn q_bounds(
    p: &SystemParams,
    ch: &ChannelRealization,
    ps: f64,
    r_tilde: f64,
) -> Result<QBounds> {
    let ratio = p.a2 / p.a1;
    if r_tilde >= ratio {
        return Err(Error::InfeasibleRate { r_tilde, ratio });
    }
    let h1_sq = ch.h1.norm_sqr();
    let hbp_sq = ch.h_bp.norm_sqr();
    let ps_max = guarded_div(p.i_th, p.beta_bp * hbp_sq, "ps_max = i_th / (beta_bp |h_bp|^2)")?;
    let q4 = guarded_div(p.i_th - p.beta_bp * ps * hbp_sq, p.beta_rp, "q4 / beta_rp")?;

    if r_tilde <= 0.0 {
        let b = build_b(p, ch, ps);
        let x = cxmat::hermitian_solve(&b, &ch.h2)?;
        let q2 = ch.h2.dot_h(&x).re;
        return Ok(QBounds {
            q1: f64::INFINITY,
            q2,
            q3: 0.0,
            q4,
            v: 0.0,
            ps_max,
        });
    }

    let q1 = guarded_div(
        p.beta_h1 * ps * p.a2 * h1_sq - r_tilde * p.beta_h1 * ps * p.a1 * h1_sq
            - r_tilde * p.sigma2_1,
        r_tilde * p.beta_f1,
        "q1 / (r_tilde beta_f1)",
    )?;
    let b = build_b(p, ch, ps);
    let x = cxmat::hermitian_solve(&b, &ch.h2)?;
    let q2 = ch.h2.dot_h(&x).re - guarded_div(r_tilde, p.beta_h2 * ps * p.a2, "q2 threshold")?;
    let q3 = guarded_div(p.sigma2_2 * r_tilde, p.beta_f2, "q3 / beta_f2")?;

    let margin = p.a2 - r_tilde * p.a1; // > 0 since r_tilde < a2/a1
    let e = h2_einv_h2(p, ch)?;
    let v_relay = guarded_div(r_tilde, margin * p.beta_h2 * e, "v relay bound")?;
    let v_direct = guarded_div(
        r_tilde * p.sigma2_1,
        p.beta_h1 * margin * h1_sq,
        "v direct bound",
    )?;
    Ok(QBounds {
        q1,
        q2,
        q3,
        q4,
        v: v_relay.max(v_direct),
        ps_max,
    })
}
