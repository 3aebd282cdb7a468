//! Transmission scheme selection: the quasi-degradation test, the
//! zero-forcing baseline, and the hybrid selector that picks between them.
//!
//! A channel realization is quasi-degraded when the pre-cancellation
//! optimum is also decodable under plain superposition coding with SIC — the
//! near users can decode the CoMP signal at least as reliably as the CoMP
//! user needs.  On such channels the hybrid scheme transmits the
//! pre-cancellation beams as-is and pays no penalty; otherwise it falls back
//! to mutual zero-forcing.

use crate::cvec::{self, Cx};
use crate::dpc::{self, DpcError, DpcSolution, PMAX_TOL};
use crate::oracle::min_power_scaling;
use crate::rate::{BeamformerSet, GroupChannels, SinrTargets};
use alloc::vec::Vec;
// Inherent f64 methods shadow this under std (test builds).
#[allow(unused_imports)]
use num_traits::Float;

/// Projections shorter than `1e-10` (relative norm) count as vanished.
const DEGENERATE_PROJ_REL: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    CompNoma,
    Zfbf,
}

/// Outcome of a scheme selection for one group.
#[derive(Clone, Debug)]
pub struct SchemeDecision {
    pub scheme: Scheme,
    pub quasi_degraded: bool,
    pub beams: Option<BeamformerSet>,
    pub total_power: Option<f64>,
    pub feasible: bool,
}

impl SchemeDecision {
    fn infeasible(scheme: Scheme) -> Self {
        Self {
            scheme,
            quasi_degraded: false,
            beams: None,
            total_power: None,
            feasible: false,
        }
    }
}

/// Quasi-degradation test on a solved pre-cancellation optimum: for each
/// station that radiates a CoMP beam, its near user must see enough of that
/// beam to decode the CoMP signal at the CoMP user's own threshold.
pub fn qd_check(
    sol: &DpcSolution,
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
) -> bool {
    let beams = &sol.beams;
    let max_ns = cvec::norm_sqr(&beams.w10)
        .max(cvec::norm_sqr(&beams.w20))
        .max(cvec::norm_sqr(&beams.w11))
        .max(cvec::norm_sqr(&beams.w22));
    let slack = 1e-9 * sigma2 * targets.eps0;
    let side = |h: &[Cx], w0: &[Cx], wn: &[Cx]| {
        cvec::is_negligible(w0, max_ns)
            || -cvec::gain(h, w0) + targets.eps0 * (cvec::gain(h, wn) + sigma2) <= slack
    };
    side(ch.h11, &beams.w10, &beams.w11) && side(ch.h22, &beams.w20, &beams.w22)
}

/// Mutual zero-forcing baseline.
///
/// Per station the near-user beam is projected orthogonal to the CoMP
/// channel and the CoMP beam orthogonal to the near user's channel, so
/// neither user sees the other's signal and no SIC is involved.  Near-user
/// powers then meet the SINR targets exactly; the CoMP power split across
/// the two stations is a two-variable linear program solved greedily on the
/// higher-gain station, each station limited to its budget remainder.
pub fn zfbf_solve(
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
) -> SchemeDecision {
    let n = ch.h10.len();
    let zf = |v: &[Cx], along: &[Cx]| -> Option<Vec<Cx>> {
        let proj = cvec::deflate(v, along, 1.0);
        if cvec::norm_sqr(&proj) <= DEGENERATE_PROJ_REL * cvec::norm_sqr(v) {
            None
        } else {
            cvec::unit(&proj)
        }
    };

    // Near-user beams: zero power when the target is zero, else along the
    // zero-forced direction with exactly target-meeting power.
    let near = |own: &[Cx], comp: &[Cx], eps: f64| -> Option<(Vec<Cx>, f64)> {
        if eps == 0.0 {
            return Some((cvec::zeros(n), 0.0));
        }
        let dir = zf(own, comp)?;
        let p = min_power_scaling(&dir, own, sigma2 * eps).ok()?;
        Some((cvec::scaled(&dir, p.sqrt()), p))
    };
    let Some((w11, p11)) = near(ch.h11, ch.h10, targets.eps1) else {
        return SchemeDecision::infeasible(Scheme::Zfbf);
    };
    let Some((w22, p22)) = near(ch.h22, ch.h20, targets.eps2) else {
        return SchemeDecision::infeasible(Scheme::Zfbf);
    };
    let b1 = p_max - p11;
    let b2 = p_max - p22;
    if b1 < -PMAX_TOL || b2 < -PMAX_TOL {
        return SchemeDecision::infeasible(Scheme::Zfbf);
    }

    let rhs = targets.eps0 * (sigma2 + cvec::gain(ch.h10, &w11) + cvec::gain(ch.h20, &w22));
    let (w10, w20, p10, p20) = if rhs == 0.0 {
        (cvec::zeros(n), cvec::zeros(n), 0.0, 0.0)
    } else {
        let (Some(d10), Some(d20)) = (zf(ch.h10, ch.h11), zf(ch.h20, ch.h22)) else {
            return SchemeDecision::infeasible(Scheme::Zfbf);
        };
        let a1 = cvec::gain(ch.h10, &d10);
        let a2 = cvec::gain(ch.h20, &d20);
        // Load the higher-gain station first.
        let (p10, p20) = if a1 >= a2 {
            let p10 = (rhs / a1).min(b1.max(0.0));
            let rem = rhs - a1 * p10;
            let p20 = if rem <= 0.0 { 0.0 } else { rem / a2 };
            (p10, p20)
        } else {
            let p20 = (rhs / a2).min(b2.max(0.0));
            let rem = rhs - a2 * p20;
            let p10 = if rem <= 0.0 { 0.0 } else { rem / a1 };
            (p10, p20)
        };
        if !p10.is_finite() || !p20.is_finite() || p10 > b1 + PMAX_TOL || p20 > b2 + PMAX_TOL {
            return SchemeDecision::infeasible(Scheme::Zfbf);
        }
        let scale = |d: &[Cx], p: f64| {
            if p > 0.0 {
                cvec::scaled(d, p.sqrt())
            } else {
                cvec::zeros(n)
            }
        };
        (scale(&d10, p10), scale(&d20, p20), p10, p20)
    };

    let beams = BeamformerSet {
        w10,
        w20,
        w11,
        w22,
    };
    SchemeDecision {
        scheme: Scheme::Zfbf,
        quasi_degraded: false,
        beams: Some(beams),
        total_power: Some(p10 + p20 + p11 + p22),
        feasible: true,
    }
}

/// Hybrid selector: transmit the pre-cancellation beams when the channel is
/// quasi-degraded (they are then optimal for superposition coding too);
/// otherwise fall back to zero-forcing.
pub fn h_comp_noma(
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
) -> Result<SchemeDecision, DpcError> {
    if let Some(sol) = dpc::solve_dpc(ch, targets, sigma2, p_max)? {
        if qd_check(&sol, ch, targets, sigma2) {
            return Ok(SchemeDecision {
                scheme: Scheme::CompNoma,
                quasi_degraded: true,
                total_power: Some(sol.total_power),
                beams: Some(sol.beams),
                feasible: true,
            });
        }
    }
    Ok(zfbf_solve(ch, targets, sigma2, p_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpc::{solve_dpc, DpcCase, DpcSolution};
    use crate::rate;
    use alloc::vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn rand_vec(rng: &mut StdRng, n: usize) -> Vec<Cx> {
        (0..n)
            .map(|_| {
                cx(
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                )
            })
            .collect()
    }

    struct Owned {
        h10: Vec<Cx>,
        h20: Vec<Cx>,
        h11: Vec<Cx>,
        h22: Vec<Cx>,
    }

    impl Owned {
        fn random(rng: &mut StdRng, n: usize) -> Self {
            Self {
                h10: rand_vec(rng, n),
                h20: rand_vec(rng, n),
                h11: rand_vec(rng, n),
                h22: rand_vec(rng, n),
            }
        }
        fn view(&self) -> GroupChannels<'_> {
            GroupChannels {
                h10: &self.h10,
                h20: &self.h20,
                h11: &self.h11,
                h22: &self.h22,
            }
        }
    }

    /// Hand-built solution wrapper for exercising the test in isolation.
    fn manual_solution(beams: BeamformerSet) -> DpcSolution {
        let total_power = beams.total_power();
        DpcSolution {
            case: DpcCase::StrongerOnly,
            p10: cvec::norm_sqr(&beams.w10),
            p20: cvec::norm_sqr(&beams.w20),
            x: 0.1,
            y: 0.1,
            swapped: false,
            beams,
            total_power,
        }
    }

    #[test]
    fn qd_check_vacuous_side_ignored() {
        // CoMP beam of station 1 off: only station 2's inequality decides.
        let ch = Owned {
            h10: vec![cx(1.0, 0.0)],
            h20: vec![cx(1.0, 0.0)],
            h11: vec![cx(1.0, 0.0)],
            h22: vec![cx(1.0, 0.0)],
        };
        let targets = SinrTargets::from_rates(1.0, 0.0, 0.0);
        let strong = manual_solution(BeamformerSet {
            w10: cvec::zeros(1),
            w20: vec![cx(2.0, 0.0)],
            w11: cvec::zeros(1),
            w22: cvec::zeros(1),
        });
        // -|h22^H w20|^2 + eps0 sigma2 = -4 + 1 <= 0: quasi-degraded.
        assert!(qd_check(&strong, ch.view(), &targets, 1.0));
        let weak = manual_solution(BeamformerSet {
            w10: cvec::zeros(1),
            w20: vec![cx(0.5, 0.0)],
            w11: cvec::zeros(1),
            w22: cvec::zeros(1),
        });
        // -0.25 + 1 > 0: not quasi-degraded.
        assert!(!qd_check(&weak, ch.view(), &targets, 1.0));
    }

    #[test]
    fn qd_check_fails_on_orthogonal_in_cell_channels() {
        // Near user 1 hears nothing of an active CoMP beam: the decode
        // condition cannot hold through that side.
        let ch = Owned {
            h10: vec![cx(1.0, 0.0), cx(0.0, 0.0)],
            h20: vec![cx(0.0, 0.0), cx(1.0, 0.0)],
            h11: vec![cx(0.0, 0.0), cx(1.0, 0.0)],
            h22: vec![cx(1.0, 0.0), cx(0.0, 0.0)],
        };
        let targets = SinrTargets::from_rates(0.5, 0.0, 0.0);
        let sol = manual_solution(BeamformerSet {
            w10: vec![cx(5.0, 0.0), cx(0.0, 0.0)], // h11-orthogonal, nonzero
            w20: vec![cx(0.0, 0.0), cx(5.0, 0.0)],
            w11: cvec::zeros(2),
            w22: cvec::zeros(2),
        });
        assert!(!qd_check(&sol, ch.view(), &targets, 1.0));
    }

    #[test]
    fn aligned_strong_near_users_are_quasi_degraded() {
        let mut rng = StdRng::seed_from_u64(41);
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        for _ in 0..10 {
            let h10 = rand_vec(&mut rng, 4);
            let h20 = rand_vec(&mut rng, 4);
            let ch = Owned {
                h11: cvec::scaled(&h10, 8.0),
                h22: cvec::scaled(&h20, 8.0),
                h10,
                h20,
            };
            let sol = solve_dpc(ch.view(), &targets, 1.0, 1e9).unwrap().unwrap();
            assert!(qd_check(&sol, ch.view(), &targets, 1.0));
        }
    }

    #[test]
    fn zfbf_orthogonal_cells_use_matched_filters() {
        let ch = Owned {
            h10: vec![cx(1.0, 0.0), cx(0.0, 0.0)],
            h11: vec![cx(0.0, 0.0), cx(2.0, 0.0)],
            h20: vec![cx(0.0, 0.0), cx(1.5, 0.0)],
            h22: vec![cx(3.0, 0.0), cx(0.0, 0.0)],
        };
        let targets = SinrTargets::from_rates(1.0, 1.0, 1.0);
        let dec = zfbf_solve(ch.view(), &targets, 1.0, 10.0);
        assert!(dec.feasible);
        let beams = dec.beams.unwrap();
        // Near beams along the own channels with exactly target-meeting
        // power sigma2*eps/||h||^2.
        assert!((cvec::norm_sqr(&beams.w11) - 0.25).abs() < 1e-12);
        assert!((cvec::norm_sqr(&beams.w22) - 1.0 / 9.0).abs() < 1e-12);
        let corr = cvec::gain(&ch.h11, &beams.w11)
            / (cvec::norm_sqr(&ch.h11) * cvec::norm_sqr(&beams.w11));
        assert!((corr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zfbf_parallel_in_cell_channels_infeasible() {
        let mut rng = StdRng::seed_from_u64(42);
        let h10 = rand_vec(&mut rng, 4);
        let ch = Owned {
            h11: cvec::scaled(&h10, 2.5),
            h10,
            h20: rand_vec(&mut rng, 4),
            h22: rand_vec(&mut rng, 4),
        };
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        let dec = zfbf_solve(ch.view(), &targets, 1.0, 1e9);
        assert!(!dec.feasible);
        assert!(dec.beams.is_none());
    }

    #[test]
    fn zfbf_random_instances_pass_referee_and_match_power_scan() {
        let mut rng = StdRng::seed_from_u64(43);
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        for trial in 0..40 {
            let ch = Owned::random(&mut rng, 4);
            let dec = zfbf_solve(ch.view(), &targets, 1.0, 1e6);
            assert!(dec.feasible, "trial {trial}: generous budget must work");
            let beams = dec.beams.as_ref().unwrap();
            let (ok, rep) =
                rate::check_feasible(beams, ch.view(), &targets, 1e6, 1.0, 1e-9);
            assert!(ok, "trial {trial}: {rep:?}");

            // Mutual nulling to rounding accuracy.
            let prod = |a: &[Cx], b: &[Cx]| (cvec::norm_sqr(a) * cvec::norm_sqr(b)).sqrt();
            assert!(cvec::gain(&ch.h10, &beams.w11).sqrt() <= 1e-10 * prod(&ch.h10, &beams.w11));
            assert!(cvec::gain(&ch.h11, &beams.w10).sqrt() <= 1e-10 * prod(&ch.h11, &beams.w10));
            assert!(cvec::gain(&ch.h20, &beams.w22).sqrt() <= 1e-10 * prod(&ch.h20, &beams.w22));
            assert!(cvec::gain(&ch.h22, &beams.w20).sqrt() <= 1e-10 * prod(&ch.h22, &beams.w20));

            // Exhaustive scan over the CoMP power split.
            let d10 = cvec::unit(&cvec::deflate(&ch.h10, &ch.h11, 1.0)).unwrap();
            let d20 = cvec::unit(&cvec::deflate(&ch.h20, &ch.h22, 1.0)).unwrap();
            let a1 = cvec::gain(&ch.h10, &d10);
            let a2 = cvec::gain(&ch.h20, &d20);
            let p11 = cvec::norm_sqr(&beams.w11);
            let p22 = cvec::norm_sqr(&beams.w22);
            let rhs = targets.eps0
                * (1.0 + cvec::gain(&ch.h10, &beams.w11) + cvec::gain(&ch.h20, &beams.w22));
            let m = 100_000;
            let mut best = f64::INFINITY;
            for i in 0..=m {
                let p10 = (rhs / a1) * i as f64 / m as f64;
                let p20 = ((rhs - a1 * p10) / a2).max(0.0);
                best = best.min(p10 + p20);
            }
            let scanned_total = best + p11 + p22;
            let total = dec.total_power.unwrap();
            assert!(
                (total - scanned_total).abs() <= 1e-3 * scanned_total,
                "trial {trial}: split {total} vs scan {scanned_total}"
            );
        }
    }

    #[test]
    fn zfbf_zero_targets_cost_nothing() {
        let mut rng = StdRng::seed_from_u64(44);
        let ch = Owned::random(&mut rng, 4);
        let targets = SinrTargets::from_rates(0.0, 0.0, 0.0);
        let dec = zfbf_solve(ch.view(), &targets, 1.0, 0.0);
        assert!(dec.feasible);
        assert_eq!(dec.total_power, Some(0.0));
    }

    #[test]
    fn hybrid_on_quasi_degraded_instance_reuses_solver_beams() {
        let mut rng = StdRng::seed_from_u64(45);
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        let h10 = rand_vec(&mut rng, 4);
        let h20 = rand_vec(&mut rng, 4);
        let ch = Owned {
            h11: cvec::scaled(&h10, 10.0),
            h22: cvec::scaled(&h20, 10.0),
            h10,
            h20,
        };
        let p_max = 1e9;
        let sol = solve_dpc(ch.view(), &targets, 1.0, p_max).unwrap().unwrap();
        let dec = h_comp_noma(ch.view(), &targets, 1.0, p_max).unwrap();
        assert_eq!(dec.scheme, Scheme::CompNoma);
        assert!(dec.quasi_degraded && dec.feasible);
        assert_eq!(dec.total_power, Some(sol.total_power));
        assert_eq!(dec.beams.as_ref(), Some(&sol.beams));
        // The reused beams satisfy the full superposition-coding referee,
        // SIC decode constraints included.
        let (ok, rep) = rate::check_feasible(
            dec.beams.as_ref().unwrap(),
            ch.view(),
            &targets,
            p_max,
            1.0,
            1e-9,
        );
        assert!(ok, "{rep:?}");
    }

    #[test]
    fn hybrid_falls_back_to_zero_forcing_and_respects_lower_bound() {
        let mut rng = StdRng::seed_from_u64(46);
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        let mut fallbacks = 0;
        for _ in 0..60 {
            let ch = Owned::random(&mut rng, 4);
            let p_max = 1e9;
            let sol = solve_dpc(ch.view(), &targets, 1.0, p_max).unwrap().unwrap();
            let dec = h_comp_noma(ch.view(), &targets, 1.0, p_max).unwrap();
            if dec.scheme == Scheme::CompNoma {
                continue;
            }
            fallbacks += 1;
            assert!(!dec.quasi_degraded);
            assert!(dec.feasible);
            // Pre-cancellation is a lower bound on any linear scheme.
            assert!(dec.total_power.unwrap() >= sol.total_power - 1e-9);
        }
        assert!(fallbacks > 30, "fallback path barely exercised: {fallbacks}");
    }

    #[test]
    fn hybrid_reports_infeasible_when_both_paths_fail() {
        let mut rng = StdRng::seed_from_u64(47);
        let ch = Owned::random(&mut rng, 4);
        let targets = SinrTargets::from_rates(0.5, 1.0, 1.0);
        let dec = h_comp_noma(ch.view(), &targets, 1.0, 1e-9).unwrap();
        assert!(!dec.feasible);
        assert!(dec.beams.is_none() && dec.total_power.is_none());
    }
}
