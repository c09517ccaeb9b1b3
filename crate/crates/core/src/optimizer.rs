//! Joint beamforming and power allocation: the optimum scheme.
//!
//! For a fixed BS power the transmit side reduces to a four-constraint
//! semidefinite relaxation in `W = w w^H` (relay power absorbed into `w`),
//! while the receive beamformer has the closed-form optimum `A^{-1} h2`
//! normalized. The joint problem is then a one-dimensional line search over
//! the BS power, descending from the interference-limited maximum; the scan
//! keeps the best validated point and terminates once an interference-free
//! upper envelope shows no lower power can improve on it. The rank-one
//! transmit solution is recovered from the top eigenpair and re-validated
//! against every constraint of the original problem before a point is
//! declared feasible.

use crate::cxmat::{self, CMat, CVec};
use crate::model::{ChannelRealization, SystemParams};
use crate::sdp::{self, SdpConstraint, SdpProblem, SdpStatus, Sense};
use crate::sinr::{self, Beamformers, PowerAllocation, QBounds};
use crate::{Error, Result};

/// Which scheme produced a solution point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    OptimumFd,
    FixedFd,
    HalfDuplex,
    Oracle,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::OptimumFd => "optimum-fd",
            Scheme::FixedFd => "fixed-fd",
            Scheme::HalfDuplex => "half-duplex",
            Scheme::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimum-fd" => Ok(Scheme::OptimumFd),
            "fixed-fd" => Ok(Scheme::FixedFd),
            "half-duplex" => Ok(Scheme::HalfDuplex),
            "oracle" => Ok(Scheme::Oracle),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-solve diagnostics carried alongside a solution point.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Thresholds at the accepted BS power.
    pub q: Option<QBounds>,
    /// Grid points visited by the line search.
    pub line_search_steps: usize,
    /// Largest grid power whose relaxation was feasible.
    pub largest_feasible_ps: Option<f64>,
    /// Interior-point iterations summed over all solves.
    pub sdp_iterations: usize,
    /// Grid points whose relaxation was infeasible.
    pub sdp_infeasible: usize,
    /// Grid points skipped on numerical failure (reported separately from
    /// infeasibility, both advance the search).
    pub sdp_failures: usize,
    /// `lambda_2 / lambda_1` of the relaxed transmit matrix at the solution.
    pub rank_gap: f64,
}

/// One scheme's outcome on one channel at one far-rate target.
#[derive(Clone, Debug)]
pub struct SolutionPoint {
    pub scheme: Scheme,
    pub rbar: f64,
    pub feasible: bool,
    pub pa: PowerAllocation,
    pub bf: Beamformers,
    pub near_rate: f64,
    pub far_rate: f64,
    pub diag: Diagnostics,
}

impl SolutionPoint {
    /// Placeholder point for an infeasible outcome.
    pub fn infeasible(scheme: Scheme, rbar: f64, nt: usize, nr: usize, diag: Diagnostics) -> Self {
        SolutionPoint {
            scheme,
            rbar,
            feasible: false,
            pa: PowerAllocation::ZERO,
            bf: Beamformers {
                wt: CVec::basis(nt, 0),
                wr: CVec::basis(nr, 0),
            },
            near_rate: 0.0,
            far_rate: 0.0,
            diag,
        }
    }
}

/// One line-search probe, for diagnostic traces.
#[derive(Clone, Debug)]
pub struct TracePoint {
    pub ps: f64,
    pub status: SdpStatus,
    pub objective: f64,
}

/// Optimum receive beamformer `A^{-1} h2 / ||A^{-1} h2||`: maximizes the
/// generalized Rayleigh quotient `|w^H h2|^2 / (w^H A w)` over unit vectors.
pub fn optimal_wr(a: &CMat, h2: &CVec) -> Result<CVec> {
    let x = cxmat::hermitian_solve(a, h2)?;
    x.normalized()
}

/// Relay-decoding quality `g = h2^H A^{-1} h2` at a given transmit vector,
/// evaluated through the rank-one update of `B` (the SI-free part of `A`)
/// rather than by forming `A`.
pub fn g_value(
    p: &SystemParams,
    ch: &ChannelRealization,
    wt_bar: &CVec,
    ps: f64,
) -> Result<f64> {
    let b = sinr::build_b(p, ch, ps);
    let binv = cxmat::inverse_hermitian(&b)?;
    let u = ch.h_rr.matvec(wt_bar);
    let y = cxmat::sherman_morrison_inverse_apply(&binv, &u, &ch.h2)?;
    Ok(ch.h2.dot_h(&y).re)
}

/// Assemble the relaxed transmit problem at a fixed BS power.
///
/// Variable: `W = w w^H` with the rank-one constraint dropped, `n = nt`.
/// Objective: interference power toward the near user. Errors with
/// [`Error::NegativeBound`] when any of `q1`, `q2`, `q4` is negative beyond
/// roundoff, which marks this BS power as infeasible for the line search.
pub fn build_sdr(
    p: &SystemParams,
    ch: &ChannelRealization,
    ps: f64,
    r_tilde: f64,
) -> Result<SdpProblem> {
    let q = sinr::q_bounds(p, ch, ps, r_tilde)?;
    let scale = 1.0 + q.ps_max.abs();
    let clamp = |v: f64| if v < 0.0 && v >= -1e-12 * scale { 0.0 } else { v };
    let (q1, q2, q4) = (clamp(q.q1), clamp(q.q2), clamp(q.q4));
    if q1 < 0.0 || q2 < 0.0 || q4 < 0.0 {
        return Err(Error::NegativeBound { q1, q2, q4 });
    }

    let objective = CMat::conj_outer_t(&ch.f1);

    // SI constraint matrix: m1 m1^H - q2 * H^H B^{-1} H with m1 = H^H B^{-1} h2.
    let b = sinr::build_b(p, ch, ps);
    let binv = cxmat::inverse_hermitian(&b)?;
    let z = binv.matvec(&ch.h2);
    let m1 = ch.h_rr.adjoint_matvec(&z);
    let binv_h = binv.matmul(&ch.h_rr);
    let hh = ch.h_rr.adjoint().matmul(&binv_h);
    let mut si_mat = CMat::outer_h(&m1);
    si_mat.add_scaled(-q2, &hh);
    si_mat.hermitize();

    let mut constraints = vec![
        SdpConstraint {
            matrix: objective.clone(),
            sense: Sense::Le,
            bound: q1,
        },
        SdpConstraint {
            matrix: si_mat,
            sense: Sense::Le,
            bound: q2,
        },
        SdpConstraint {
            matrix: CMat::conj_outer_t(&ch.f2),
            sense: Sense::Ge,
            bound: q.q3,
        },
        SdpConstraint {
            matrix: CMat::conj_outer_t(&ch.h_rp),
            sense: Sense::Le,
            bound: q4,
        },
    ];
    if p.nt > 2 {
        // With more than two transmit antennas the four rank-one data
        // matrices no longer bound the whole cone; a generous trace cap keeps
        // the relaxation bounded without touching the attainable optimum.
        constraints.push(SdpConstraint {
            matrix: CMat::identity(p.nt),
            sense: Sense::Le,
            bound: 1e6 * (1.0 + q.q3 + q.ps_max),
        });
    }

    Ok(SdpProblem {
        n: p.nt,
        objective,
        constraints,
    })
}

/// Top eigenpair extraction: `wt_bar = sqrt(lambda_1) v_1` so that
/// `wt_bar wt_bar^H` is the best rank-one approximation of `W` and
/// `||wt_bar||^2 = lambda_1`. Also returns `rank_gap = lambda_2 / lambda_1`.
pub fn extract_rank_one(w: &CMat) -> Result<(CVec, f64)> {
    let tr = w.trace().re;
    if tr < 1e-14 {
        return Err(Error::ZeroMatrix { trace: tr });
    }
    let (vals, vecs) = cxmat::eig_hermitian(w)?;
    let l1 = vals[0].max(0.0);
    if l1 <= 0.0 {
        return Err(Error::ZeroMatrix { trace: tr });
    }
    let rank_gap = if vals.len() > 1 { vals[1].max(0.0) / l1 } else { 0.0 };
    let wt_bar = vecs[0].scale(cxmat::Cx::new(l1.sqrt(), 0.0));
    Ok((wt_bar, rank_gap))
}

/// Joint optimization: line search over the BS power with one relaxation
/// solve per grid point, stopping at the largest feasible power.
pub fn algorithm1(
    p: &SystemParams,
    ch: &ChannelRealization,
    rbar: f64,
    delta_ps: f64,
) -> Result<SolutionPoint> {
    algorithm1_traced(p, ch, rbar, delta_ps, None)
}

/// [`algorithm1`] with an optional per-grid-point trace.
pub fn algorithm1_traced(
    p: &SystemParams,
    ch: &ChannelRealization,
    rbar: f64,
    delta_ps: f64,
    mut trace: Option<&mut Vec<TracePoint>>,
) -> Result<SolutionPoint> {
    if !(delta_ps > 0.0) || rbar < 0.0 {
        return Err(Error::InvalidParams(format!(
            "need delta_ps > 0 and rbar >= 0 (got {delta_ps}, {rbar})"
        )));
    }
    let r_tilde = sinr::rate_to_snr(rbar);
    let mut diag = Diagnostics::default();

    // Vacuous far-rate target: full BS power, silent relay.
    if r_tilde <= 0.0 {
        let q = sinr::q_bounds(p, ch, 0.0, 0.0)?;
        let ps = q.ps_max;
        let pa = PowerAllocation::new(ps, 0.0);
        let wt = cxmat::phase_fixed(&ch.f2.conj().normalized()?);
        let a = sinr::build_a(p, ch, &CVec::zeros(p.nt), ps);
        let wr = optimal_wr(&a, &ch.h2)?;
        let near_rate = sinr::rate_near(p, ch, &wt, pa);
        let far_rate = sinr::rate_far(p, ch, &wt, &wr, pa);
        diag.q = Some(q);
        return Ok(SolutionPoint {
            scheme: Scheme::OptimumFd,
            rbar,
            feasible: true,
            pa,
            bf: Beamformers { wt, wr },
            near_rate,
            far_rate,
            diag,
        });
    }

    let probe = match sinr::q_bounds(p, ch, 1.0, r_tilde) {
        Ok(q) => q,
        Err(Error::InfeasibleRate { .. }) => {
            return Ok(SolutionPoint::infeasible(
                Scheme::OptimumFd,
                rbar,
                p.nt,
                p.nr,
                diag,
            ))
        }
        Err(e) => return Err(e),
    };
    let (v, ps_max) = (probe.v, probe.ps_max);
    if v > ps_max {
        return Ok(SolutionPoint::infeasible(
            Scheme::OptimumFd,
            rbar,
            p.nt,
            p.nr,
            diag,
        ));
    }

    // Descending grid from ps_max, final point clamped to v.
    let mut grid = Vec::new();
    let mut ps = ps_max;
    let eps = 1e-12 * ps_max.max(1.0);
    while ps > v + eps {
        grid.push(ps);
        ps -= delta_ps;
    }
    grid.push(v.max(0.0));

    // Descend the grid keeping the best validated point. The first feasible
    // power is NOT always the best: near its upper feasibility edge the
    // relaxation may only admit a high-power relay beam steered away from
    // the primary receiver, whose leakage toward the near user outweighs the
    // BS-power advantage. The scan is cut off once even an interference-free
    // point at the current power could not beat the incumbent:
    // C1(ps) <= log2(1 + beta_h1 ps a1 |h1|^2 / sigma2_1), decreasing in ps.
    let mut best: Option<SolutionPoint> = None;
    let h1_gain = p.beta_h1 * p.a1 * ch.h1.norm_sqr() / p.sigma2_1;
    for &ps in &grid {
        if let Some(b) = &best {
            let envelope = (1.0 + h1_gain * ps).log2();
            if b.near_rate >= envelope {
                break;
            }
        }
        diag.line_search_steps += 1;
        let prob = match build_sdr(p, ch, ps, r_tilde) {
            Ok(prob) => prob,
            Err(Error::NegativeBound { .. }) => {
                diag.sdp_infeasible += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(TracePoint {
                        ps,
                        status: SdpStatus::Infeasible,
                        objective: f64::NAN,
                    });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let sol = sdp::solve(&prob, 1e-9)?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TracePoint {
                ps,
                status: sol.status,
                objective: sol.objective,
            });
        }
        diag.sdp_iterations += sol.iterations;
        match sol.status {
            SdpStatus::Infeasible => {
                diag.sdp_infeasible += 1;
                continue;
            }
            SdpStatus::NumericalFailure => {
                diag.sdp_failures += 1;
                continue;
            }
            SdpStatus::Optimal => {}
        }
        if diag.largest_feasible_ps.is_none() {
            diag.largest_feasible_ps = Some(ps);
        }

        let (wt_bar, rank_gap) = match extract_rank_one(&sol.x) {
            Ok(pair) => pair,
            Err(_) => {
                diag.sdp_failures += 1;
                continue;
            }
        };
        let mut pr = sol.x.trace().re.max(0.0);
        let wt = cxmat::phase_fixed(&wt_bar.normalized()?);
        let a = sinr::build_a(p, ch, &wt_bar, ps);
        let wr = optimal_wr(&a, &ch.h2)?;

        // Re-validate the recovered rank-one point against the original
        // problem. A small interference overshoot from solver tolerance is
        // absorbed by scaling the relay power back to the cap.
        let mut pa = PowerAllocation::new(ps, pr);
        let mut interference = sinr::primary_interference(p, ch, &wt, pa);
        if interference > p.i_th * (1.0 + 1e-9) && interference <= p.i_th * (1.0 + 1e-6) {
            let relay_part = p.beta_rp * pr * ch.h_rp.dot_t(&wt).norm_sqr();
            let budget = p.i_th - p.beta_bp * ps * ch.h_bp.norm_sqr();
            if relay_part > 0.0 && budget >= 0.0 {
                pr *= budget / relay_part;
                pa = PowerAllocation::new(ps, pr);
                interference = sinr::primary_interference(p, ch, &wt, pa);
            }
        }
        let near_rate = sinr::rate_near(p, ch, &wt, pa);
        let far_rate = sinr::rate_far(p, ch, &wt, &wr, pa);
        let ok = far_rate >= rbar - 1e-6 && interference <= p.i_th * (1.0 + 1e-9);
        if !ok {
            // rank-one projection failed validation: conservatively treat
            // this grid point as infeasible
            diag.sdp_infeasible += 1;
            continue;
        }

        if best.as_ref().map_or(true, |b| near_rate > b.near_rate) {
            best = Some(SolutionPoint {
                scheme: Scheme::OptimumFd,
                rbar,
                feasible: true,
                pa,
                bf: Beamformers { wt, wr },
                near_rate,
                far_rate,
                diag: Diagnostics {
                    rank_gap,
                    ..Diagnostics::default()
                },
            });
        }
    }

    match best {
        Some(mut sp) => {
            diag.rank_gap = sp.diag.rank_gap;
            diag.q = Some(sinr::q_bounds(p, ch, sp.pa.ps, r_tilde)?);
            sp.diag = diag;
            Ok(sp)
        }
        None => Ok(SolutionPoint::infeasible(
            Scheme::OptimumFd,
            rbar,
            p.nt,
            p.nr,
            diag,
        )),
    }
}

/// Line-search resolution: `(ps_max - v) / steps`, the default grid.
pub fn delta_ps_for_steps(
    p: &SystemParams,
    ch: &ChannelRealization,
    rbar: f64,
    steps: usize,
) -> Result<f64> {
    let r_tilde = sinr::rate_to_snr(rbar);
    let q = sinr::q_bounds(p, ch, 1.0, r_tilde.max(0.0))?;
    let span = (q.ps_max - q.v).max(0.0);
    let steps = steps.max(1) as f64;
    Ok((span / steps).max(1e-9 * q.ps_max.max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::Cx;
    use crate::model::{sample_channels, substream, SystemParams};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SystemParams, ChannelRealization) {
        let p = SystemParams::defaults();
        let ch = sample_channels(&p, &mut substream(seed, 0));
        (p, ch)
    }

    fn random_unit(r: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec((0..n)
            .map(|_| Cx::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5))
            .collect())
        .normalized()
        .unwrap()
    }

    #[test]
    fn optimal_wr_identity_is_mrc() {
        let (p, ch) = setup(1);
        let wr = optimal_wr(&CMat::identity(p.nr), &ch.h2).unwrap();
        let mrc = ch.h2.normalized().unwrap();
        for i in 0..p.nr {
            assert!((wr[i] - mrc[i]).norm() < 1e-12);
        }
        // scale invariance: A = 2I gives the same direction
        let wr2 = optimal_wr(&CMat::identity(p.nr).scale(2.0), &ch.h2).unwrap();
        for i in 0..p.nr {
            assert!((wr[i] - wr2[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn optimal_wr_beats_random_probes() {
        let mut r = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..20 {
            let (p, ch) = setup(600 + seed);
            let wt_bar = ch.f2.conj().scale(Cx::new(1.2, 0.0));
            let a = sinr::build_a(&p, &ch, &wt_bar, 4.0);
            let wr = optimal_wr(&a, &ch.h2).unwrap();
            let quotient = |w: &CVec| {
                let num = w.dot_h(&ch.h2).norm_sqr();
                let den = w.dot_h(&a.matvec(w)).re;
                num / den
            };
            let best = quotient(&wr);
            for _ in 0..10_000 {
                let probe = random_unit(&mut r, p.nr);
                assert!(quotient(&probe) <= best + 1e-12 * best.abs());
            }
        }
    }

    #[test]
    fn g_value_limits_and_direct_identity() {
        let (p, ch) = setup(2);
        let ps = 6.0;
        // w_bar = 0 reduces to h2^H B^{-1} h2
        let g0 = g_value(&p, &ch, &CVec::zeros(p.nt), ps).unwrap();
        let b = sinr::build_b(&p, &ch, ps);
        let x = cxmat::hermitian_solve(&b, &ch.h2).unwrap();
        let want = ch.h2.dot_h(&x).re;
        assert!((g0 - want).abs() <= 1e-12 * want);

        // H_rr = 0 makes g independent of w_bar
        let mut p0 = p.clone();
        p0.sigma2_rr = 0.0;
        let ch0 = sample_channels(&p0, &mut substream(2, 0));
        let ga = g_value(&p0, &ch0, &CVec::zeros(p0.nt), ps).unwrap();
        let gb = g_value(&p0, &ch0, &ch0.f2.conj().scale(Cx::new(3.0, 0.0)), ps).unwrap();
        assert!((ga - gb).abs() <= 1e-12 * ga);

        // random w_bar: equals h2^H A^{-1} h2 computed directly
        for seed in 0..100 {
            let ch = sample_channels(&p, &mut substream(800, seed));
            let mut r = substream(801, seed);
            let wt_bar = random_unit(&mut r, p.nt).scale(Cx::new(2.5, 0.0));
            let g = g_value(&p, &ch, &wt_bar, ps).unwrap();
            let a = sinr::build_a(&p, &ch, &wt_bar, ps);
            let x = cxmat::hermitian_solve(&a, &ch.h2).unwrap();
            let direct = ch.h2.dot_h(&x).re;
            assert!(
                (g - direct).abs() <= 1e-10 * direct.abs(),
                "seed {seed}: {g} vs {direct}"
            );
        }
    }

    #[test]
    fn build_sdr_matrices_are_hermitian() {
        for seed in 0..20 {
            let (p, ch) = setup(700 + seed);
            let q = sinr::q_bounds(&p, &ch, 1.0, 0.5).unwrap();
            if q.v > q.ps_max {
                continue;
            }
            let ps = 0.5 * (q.v + q.ps_max);
            match build_sdr(&p, &ch, ps, 0.5) {
                Ok(prob) => {
                    assert!(prob.objective.is_hermitian(1e-14));
                    for c in &prob.constraints {
                        assert!(c.matrix.is_hermitian(1e-14));
                    }
                }
                Err(Error::NegativeBound { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn build_sdr_zero_si_gives_vacuous_q2_row() {
        let mut p = SystemParams::defaults();
        p.sigma2_rr = 0.0;
        let ch = sample_channels(&p, &mut substream(5, 0));
        let q = sinr::q_bounds(&p, &ch, 1.0, 0.5).unwrap();
        let ps = 0.5 * (q.v + q.ps_max).max(q.v * 1.01);
        let prob = build_sdr(&p, &ch, ps, 0.5).unwrap();
        assert!(prob.constraints[1].matrix.frobenius_norm() < 1e-14);
        assert!(prob.constraints[1].bound >= 0.0);
    }

    #[test]
    fn extract_rank_one_cases() {
        // exact rank-one matrix is recovered up to the phase convention
        let w = CVec(vec![Cx::new(1.0, 0.0), Cx::new(0.0, 2.0)])
            .normalized()
            .unwrap()
            .scale(Cx::new(3.0, 0.0));
        let mat = CMat::outer_h(&w);
        let (wt_bar, gap) = extract_rank_one(&mat).unwrap();
        assert!(gap < 1e-12);
        let canonical = cxmat::phase_fixed(&w);
        for i in 0..2 {
            assert!((wt_bar[i] - canonical[i]).norm() < 1e-9);
        }
        // identity: fully degenerate
        let (_, gap) = extract_rank_one(&CMat::identity(2)).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
        // zero matrix
        assert!(matches!(
            extract_rank_one(&CMat::zeros(2, 2)),
            Err(Error::ZeroMatrix { .. })
        ));
        // Frobenius error of the rank-one projection = sqrt(sum_{k>=2} l_k^2)
        let mut r = ChaCha8Rng::seed_from_u64(21);
        let g = CMat::from_fn(3, 3, |_, _| Cx::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
        let mut psd = g.matmul(&g.adjoint());
        psd.hermitize();
        let (vals, _) = cxmat::eig_hermitian(&psd).unwrap();
        let (w1, _) = extract_rank_one(&psd).unwrap();
        let mut diff = CMat::outer_h(&w1);
        diff.add_scaled(-1.0, &psd);
        let want: f64 = vals[1..].iter().map(|l| l * l).sum::<f64>().sqrt();
        assert!((diff.frobenius_norm() - want).abs() <= 1e-9 * want.max(1e-12));
    }

    #[test]
    fn algorithm1_zero_target_closed_form() {
        let (p, ch) = setup(3);
        let sp = algorithm1(&p, &ch, 0.0, 1.0).unwrap();
        assert!(sp.feasible);
        assert_eq!(sp.pa.pr, 0.0);
        let ps_max = p.i_th / (p.beta_bp * ch.h_bp.norm_sqr());
        assert!((sp.pa.ps - ps_max).abs() <= 1e-12 * ps_max);
        let want = (1.0 + p.beta_h1 * ps_max * p.a1 * ch.h1.norm_sqr() / p.sigma2_1).log2();
        assert!((sp.near_rate - want).abs() < 1e-12);
    }

    #[test]
    fn algorithm1_unreachable_target_is_infeasible() {
        let (p, ch) = setup(4);
        // r_tilde >= a2/a1 = 19 means rbar >= log2(20)
        let sp = algorithm1(&p, &ch, 4.33, 0.1).unwrap();
        assert!(!sp.feasible);
    }

    #[test]
    fn algorithm1_output_satisfies_original_constraints() {
        let p = SystemParams::defaults();
        let mut feasible = 0;
        for seed in 0..15 {
            let ch = sample_channels(&p, &mut substream(900, seed));
            let delta = delta_ps_for_steps(&p, &ch, 1.0, 200).unwrap();
            let sp = algorithm1(&p, &ch, 1.0, delta).unwrap();
            if !sp.feasible {
                continue;
            }
            feasible += 1;
            assert!(sp.far_rate >= 1.0 - 1e-6);
            let interference = sinr::primary_interference(&p, &ch, &sp.bf.wt, sp.pa);
            assert!(interference <= p.i_th * (1.0 + 1e-9));
            assert!((sp.bf.wt.norm() - 1.0).abs() < 1e-10);
            assert!((sp.bf.wr.norm() - 1.0).abs() < 1e-10);
            // g identity holds at the solution
            let wt_bar = sp.bf.wt.scale(Cx::new(sp.pa.pr.sqrt(), 0.0));
            let g = g_value(&p, &ch, &wt_bar, sp.pa.ps).unwrap();
            let a = sinr::build_a(&p, &ch, &wt_bar, sp.pa.ps);
            let x = cxmat::hermitian_solve(&a, &ch.h2).unwrap();
            assert!((g - ch.h2.dot_h(&x).re).abs() <= 1e-10 * g.abs());
        }
        assert!(feasible >= 10, "only {feasible} feasible instances");
    }

    #[test]
    fn line_search_feasibility_region_is_consistent() {
        // Whenever a probe below the recorded upper feasibility edge is
        // feasible, that edge (found scanning from the top) is above it; and
        // the solution power never exceeds the edge.
        let p = SystemParams::defaults();
        let mut checked = 0;
        for seed in 0..10 {
            let ch = sample_channels(&p, &mut substream(1000, seed));
            let delta = delta_ps_for_steps(&p, &ch, 1.2, 100).unwrap();
            let sp = algorithm1(&p, &ch, 1.2, delta).unwrap();
            if !sp.feasible {
                continue;
            }
            checked += 1;
            let edge = sp.diag.largest_feasible_ps.expect("feasible run records an edge");
            assert!(sp.pa.ps <= edge + 1e-12 * edge);
            let r_tilde = sinr::rate_to_snr(1.2);
            let q = sinr::q_bounds(&p, &ch, sp.pa.ps, r_tilde).unwrap();
            let mut below_feasible = 0;
            for k in 1..=5 {
                let ps = q.v + (edge - q.v) * k as f64 / 6.0;
                if let Ok(prob) = build_sdr(&p, &ch, ps, r_tilde) {
                    let sol = sdp::solve(&prob, 1e-9).unwrap();
                    if sol.status == SdpStatus::Optimal {
                        below_feasible += 1;
                        assert!(ps <= edge);
                    }
                }
            }
            // not a theorem, but expected for these instances: the feasible
            // set below the edge is an interval
            assert!(below_feasible >= 1, "seed {seed}");
        }
        assert!(checked >= 5);
    }

    #[test]
    fn objective_dominates_fixed_scheme() {
        // Dominance holds up to the line-search grid resolution: the search
        // stops at the largest feasible grid point, so when the fixed
        // scheme's exact power lands inside the last grid cell the optimum
        // can trail it by at most one cell of near rate.
        let p = SystemParams::defaults();
        let mut both = 0;
        for seed in 0..25 {
            let ch = sample_channels(&p, &mut substream(1100, seed));
            for rbar in [0.5, 1.0, 1.5] {
                let delta = delta_ps_for_steps(&p, &ch, rbar, 200).unwrap();
                let opt = algorithm1(&p, &ch, rbar, delta).unwrap();
                let bf = match crate::fixedbf::mrt_mrc(&ch) {
                    Ok(bf) => bf,
                    Err(_) => continue,
                };
                let fixed = crate::fixedbf::fixed_power_allocation(&p, &ch, &bf, rbar).unwrap();
                if opt.feasible && fixed.feasible {
                    both += 1;
                    let cell_below = PowerAllocation::new(
                        (fixed.pa.ps - delta).max(0.0),
                        fixed.pa.pr,
                    );
                    let slack =
                        fixed.near_rate - sinr::rate_near(&p, &ch, &fixed.bf.wt, cell_below);
                    assert!(
                        opt.near_rate >= fixed.near_rate - slack.abs() - 1e-9,
                        "seed {seed} rbar {rbar}: optimum {} below fixed {} beyond one grid cell",
                        opt.near_rate,
                        fixed.near_rate
                    );
                }
            }
        }
        assert!(both >= 30, "only {both} jointly feasible instances");
    }

    #[test]
    fn rank_one_gap_is_small_on_paper_defaults() {
        let p = SystemParams::defaults();
        let mut gaps = Vec::new();
        for seed in 0..40 {
            let ch = sample_channels(&p, &mut substream(1200, seed));
            let delta = delta_ps_for_steps(&p, &ch, 1.0, 100).unwrap();
            let sp = algorithm1(&p, &ch, 1.0, delta).unwrap();
            if sp.feasible {
                gaps.push(sp.diag.rank_gap);
            }
        }
        assert!(gaps.len() >= 25);
        let small = gaps.iter().filter(|g| **g <= 1e-6).count();
        assert!(
            small as f64 >= 0.9 * gaps.len() as f64,
            "only {small}/{} rank-one solutions",
            gaps.len()
        );
    }
}
