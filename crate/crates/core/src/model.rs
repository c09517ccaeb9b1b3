//! Scenario parameters, unit conversion and seeded channel generation.
//!
//! Path loss is deliberately kept out of the channel draws: every vector is
//! drawn with its nominal per-entry variance (unit for most links, `k1` for
//! the inter-user channel, `sigma2_rr` for the residual self-interference)
//! and the beta factors are applied explicitly inside the SINR formulas.
//! Channels for the half-duplex baseline are drawn once as extended
//! `(nr + nt)`-dimensional vectors whose leading sub-blocks are shared with
//! the full-duplex vectors, so FD and HD see the same fading on the antennas
//! they have in common.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cxmat::{CMat, CVec, Cx};
use crate::{Error, Result};

/// `10^(x/10)`: decibel-watts to watts.
pub fn dbw_to_watt(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// `10 log10(x)`: watts to decibel-watts.
pub fn watt_to_dbw(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Half-duplex baseline protocol choices that the reference description
/// leaves open. Defaults follow the RF-chain-preserved convention with the
/// base station silent while the relay transmits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdProtocol {
    /// When true the BS keeps transmitting in the relay's transmit phase,
    /// sharing that phase's interference budget with the relay.
    pub bs_active_phase2: bool,
    /// When true the relay uses all `nr + nt` antennas in each phase
    /// (extended channels); when false it keeps the FD antenna split.
    pub rf_chain_preserved: bool,
}

impl Default for HdProtocol {
    fn default() -> Self {
        HdProtocol {
            bs_active_phase2: false,
            rf_chain_preserved: true,
        }
    }
}

/// All scalars of the scenario. Powers and noise variances are linear watts;
/// beta factors are dimensionless path-loss power gains.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    /// Relay transmit antennas.
    pub nt: usize,
    /// Relay receive antennas.
    pub nr: usize,
    /// NOMA power coefficient of the near user (weaker allocation).
    pub a1: f64,
    /// NOMA power coefficient of the far user.
    pub a2: f64,
    pub beta_bp: f64,
    pub beta_rp: f64,
    pub beta_h1: f64,
    pub beta_h2: f64,
    pub beta_f1: f64,
    pub beta_f2: f64,
    pub beta_pr: f64,
    /// Noise power at the near user.
    pub sigma2_1: f64,
    /// Noise power at the relay.
    pub sigma2_r: f64,
    /// Noise power at the far user.
    pub sigma2_2: f64,
    /// Primary transmitter power.
    pub p_u: f64,
    /// Interference cap at the primary receiver.
    pub i_th: f64,
    /// Residual self-interference variance per entry of the SI channel.
    pub sigma2_rr: f64,
    /// Inter-user interference channel variance (0 = perfect cancellation).
    pub k1: f64,
    pub hd: HdProtocol,
}

impl SystemParams {
    /// Default profile: noise 1 dBW, primary power 10 dBW, `a1/a2 = 0.05/0.95`,
    /// cross-link path losses 0.5, direct BS-near-user loss 1, `k1 = 0.01`,
    /// interference cap 15 dBW, residual SI -30 dBW, 2x2 relay.
    pub fn defaults() -> Self {
        SystemParams {
            nt: 2,
            nr: 2,
            a1: 0.05,
            a2: 0.95,
            beta_bp: 0.5,
            beta_rp: 0.5,
            beta_h1: 1.0,
            beta_h2: 0.5,
            beta_f1: 1.0,
            beta_f2: 0.5,
            beta_pr: 0.5,
            sigma2_1: dbw_to_watt(1.0),
            sigma2_r: dbw_to_watt(1.0),
            sigma2_2: dbw_to_watt(1.0),
            p_u: dbw_to_watt(10.0),
            i_th: dbw_to_watt(15.0),
            sigma2_rr: dbw_to_watt(-30.0),
            k1: 0.01,
            hd: HdProtocol::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt < 1 || self.nr < 1 {
            return Err(Error::InvalidParams(format!(
                "antenna counts must be >= 1 (nt={}, nr={})",
                self.nt, self.nr
            )));
        }
        if (self.a1 + self.a2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "a1 + a2 must equal 1 (got {})",
                self.a1 + self.a2
            )));
        }
        if !(self.a1 > 0.0 && self.a1 < self.a2) {
            return Err(Error::InvalidParams(format!(
                "require 0 < a1 < a2 (a1={}, a2={})",
                self.a1, self.a2
            )));
        }
        let nonneg = [
            ("beta_bp", self.beta_bp),
            ("beta_rp", self.beta_rp),
            ("beta_h1", self.beta_h1),
            ("beta_h2", self.beta_h2),
            ("beta_f1", self.beta_f1),
            ("beta_f2", self.beta_f2),
            ("beta_pr", self.beta_pr),
            ("sigma2_1", self.sigma2_1),
            ("sigma2_r", self.sigma2_r),
            ("sigma2_2", self.sigma2_2),
            ("p_u", self.p_u),
            ("i_th", self.i_th),
            ("sigma2_rr", self.sigma2_rr),
            ("k1", self.k1),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0 (got {v})"
                )));
            }
        }
        for (name, v) in [
            ("sigma2_1", self.sigma2_1),
            ("sigma2_r", self.sigma2_r),
            ("sigma2_2", self.sigma2_2),
        ] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive (got {v})"
                )));
            }
        }
        Ok(())
    }
}

/// One draw of every channel in the scenario.
///
/// The `ext_*` vectors are the `(nr + nt)`-antenna variants used by the
/// half-duplex baseline; their leading block (first `nr` entries for
/// receive-side channels, first `nt` for transmit-side) is shared bit-exact
/// with the corresponding FD vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// BS to near user.
    pub h1: Cx,
    /// BS to relay, length `nr`.
    pub h2: CVec,
    /// Relay to near user (inter-user interference), length `nt`, variance `k1`.
    pub f1: CVec,
    /// Relay to far user, length `nt`.
    pub f2: CVec,
    /// Residual self-interference channel, `nr x nt`, variance `sigma2_rr`.
    pub h_rr: CMat,
    /// BS to primary receiver.
    pub h_bp: Cx,
    /// Relay to primary receiver, length `nt`.
    pub h_rp: CVec,
    /// Primary transmitter to relay, length `nr`.
    pub h_pr: CVec,
    pub ext_h2: CVec,
    pub ext_f1: CVec,
    pub ext_f2: CVec,
    pub ext_h_rp: CVec,
    pub ext_h_pr: CVec,
}

/// Independent per-trial random stream: one seed, one stream index per trial,
/// so Monte Carlo results do not depend on how trials are scheduled.
pub fn substream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One circularly-symmetric complex Gaussian scalar with total variance
/// `var` (each part carries `var / 2`). Draws two normals even when
/// `var == 0`, so stream alignment never depends on parameter values.
fn draw_cn(rng: &mut ChaCha8Rng, var: f64) -> Cx {
    let s = (var / 2.0).sqrt();
    let re: f64 = standard_normal(rng);
    let im: f64 = standard_normal(rng);
    Cx::new(s * re, s * im)
}

/// Box-Muller standard normal; two uniforms per sample keeps the stream
/// layout simple and platform-independent.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > 0.0 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

fn draw_cvec(rng: &mut ChaCha8Rng, n: usize, var: f64) -> CVec {
    CVec((0..n).map(|_| draw_cn(rng, var)).collect())
}

/// Draw every channel of one trial. Fixed draw order (h1, h_bp, ext_h2,
/// ext_f1, ext_f2, ext_h_rp, ext_h_pr, h_rr row-major) and draw-then-scale
/// variance handling make realizations bitwise reproducible for a given
/// stream, including across changes of `k1` / `sigma2_rr`.
pub fn sample_channels(p: &SystemParams, rng: &mut ChaCha8Rng) -> ChannelRealization {
    let next = p.nr + p.nt;
    let h1 = draw_cn(rng, 1.0);
    let h_bp = draw_cn(rng, 1.0);
    let ext_h2 = draw_cvec(rng, next, 1.0);
    let ext_f1 = draw_cvec(rng, next, p.k1);
    let ext_f2 = draw_cvec(rng, next, 1.0);
    let ext_h_rp = draw_cvec(rng, next, 1.0);
    let ext_h_pr = draw_cvec(rng, next, 1.0);
    let h_rr = CMat::from_fn(p.nr, p.nt, |_, _| draw_cn(rng, p.sigma2_rr));

    ChannelRealization {
        h1,
        h2: ext_h2.head(p.nr),
        f1: ext_f1.head(p.nt),
        f2: ext_f2.head(p.nt),
        h_rr,
        h_bp,
        h_rp: ext_h_rp.head(p.nt),
        h_pr: ext_h_pr.head(p.nr),
        ext_h2,
        ext_f1,
        ext_f2,
        ext_h_rp,
        ext_h_pr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbw_conversions() {
        assert_eq!(dbw_to_watt(0.0), 1.0);
        assert!((dbw_to_watt(10.0) - 10.0).abs() < 1e-12);
        // the default interference cap
        assert!((dbw_to_watt(15.0) - 31.6228).abs() < 1e-3);
        assert!((watt_to_dbw(dbw_to_watt(7.3)) - 7.3).abs() < 1e-12);
    }

    #[test]
    fn defaults_validate() {
        let p = SystemParams::defaults();
        p.validate().unwrap();
        assert!((p.sigma2_rr - 1e-3).abs() < 1e-15);
        assert!((p.p_u - 10.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_split() {
        let mut p = SystemParams::defaults();
        p.a1 = 0.6;
        p.a2 = 0.4;
        assert!(p.validate().is_err());
        p.a1 = 0.3;
        p.a2 = 0.6;
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_variance_draws_are_exactly_zero() {
        let mut p = SystemParams::defaults();
        p.k1 = 0.0;
        p.sigma2_rr = 0.0;
        let ch = sample_channels(&p, &mut substream(1, 0));
        assert!(ch.f1.0.iter().all(|c| c.re == 0.0 && c.im == 0.0));
        assert!(ch.h_rr.data().iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn variance_changes_do_not_shift_other_draws() {
        let mut p = SystemParams::defaults();
        let a = sample_channels(&p, &mut substream(9, 4));
        p.sigma2_rr = 1.0;
        p.k1 = 0.0;
        let b = sample_channels(&p, &mut substream(9, 4));
        assert_eq!(a.h1, b.h1);
        assert_eq!(a.h2, b.h2);
        assert_eq!(a.f2, b.f2);
        assert_eq!(a.h_bp, b.h_bp);
        assert_eq!(a.h_rp, b.h_rp);
        assert_eq!(a.h_pr, b.h_pr);
        assert_eq!(a.ext_f2, b.ext_f2);
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let p = SystemParams::defaults();
        let a = sample_channels(&p, &mut substream(42, 17));
        let b = sample_channels(&p, &mut substream(42, 17));
        assert_eq!(a, b);
        let c = sample_channels(&p, &mut substream(42, 18));
        assert_ne!(a, c);
    }

    #[test]
    fn fd_blocks_are_shared_with_extended() {
        let p = SystemParams::defaults();
        let ch = sample_channels(&p, &mut substream(3, 0));
        for i in 0..p.nr {
            assert_eq!(ch.h2[i], ch.ext_h2[i]);
            assert_eq!(ch.h_pr[i], ch.ext_h_pr[i]);
        }
        for i in 0..p.nt {
            assert_eq!(ch.f1[i], ch.ext_f1[i]);
            assert_eq!(ch.f2[i], ch.ext_f2[i]);
            assert_eq!(ch.h_rp[i], ch.ext_h_rp[i]);
        }
    }

    #[test]
    fn sample_moments_match_the_law() {
        // 1e5 scalar draws: mean |entry|^2 within 1.5% of the variance, and
        // each part's variance within 2% of var/2.
        let p = SystemParams::defaults();
        let mut rng = substream(123, 0);
        let n = 100_000;
        let mut pow_unit = 0.0;
        let mut pow_rr = 0.0;
        let mut re_var = 0.0;
        let mut im_var = 0.0;
        for _ in 0..n {
            let ch = draw_cn(&mut rng, 1.0);
            pow_unit += ch.norm_sqr();
            re_var += ch.re * ch.re;
            im_var += ch.im * ch.im;
            let si = draw_cn(&mut rng, p.sigma2_rr);
            pow_rr += si.norm_sqr();
        }
        let nf = n as f64;
        assert!((pow_unit / nf - 1.0).abs() < 0.015);
        assert!((pow_rr / nf / p.sigma2_rr - 1.0).abs() < 0.015);
        assert!((re_var / nf / 0.5 - 1.0).abs() < 0.02);
        assert!((im_var / nf / 0.5 - 1.0).abs() < 0.02);
    }
}
