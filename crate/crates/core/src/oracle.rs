//! Brute-force verification of the closed-form solver.
//!
//! [`grid_oracle_dpc`] exhaustively scans the two-parameter beam family the
//! optimum is known to live in (deflated near-user beams, matched-filter CoMP
//! beams), solving a two-variable linear program for the CoMP power split at
//! every grid cell.  It shares no case analysis with the solver: powers come
//! from [`min_power_scaling`] on explicitly constructed directions, and the
//! split is a direct greedy LP.  [`verify_solution`] referees any beamformer
//! set from raw SINRs alone.

use crate::cvec::{self, Cx};
use crate::rate::{self, BeamformerSet, GroupChannels, ResidualReport, SinrTargets};
use alloc::vec::Vec;
use core::fmt;
// Inherent f64 methods shadow this under std (test builds).
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnachievableDirection;

impl fmt::Display for UnachievableDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "direction is orthogonal to the channel")
    }
}

/// Minimal `‖w‖²` with `w ∝ direction` (unit norm) achieving
/// `|channelᴴw|² = rhs`.
pub fn min_power_scaling(
    direction: &[Cx],
    channel: &[Cx],
    rhs: f64,
) -> Result<f64, UnachievableDirection> {
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let g = cvec::gain(channel, direction);
    if g <= 1e-24 * cvec::norm_sqr(channel) * cvec::norm_sqr(direction) {
        return Err(UnachievableDirection);
    }
    Ok(rhs / g)
}

/// Best grid point found by the oracle.
#[derive(Clone, Copy, Debug)]
pub struct GridSolution {
    pub total_power: f64,
    pub x: f64,
    pub y: f64,
    /// CoMP power at the station whose deflation is `x` (station 1).
    pub p10: f64,
    pub p20: f64,
}

/// Per-deflation precomputation along one axis.
struct Axis {
    ts: Vec<f64>,
    /// Near-beam power at each deflation.
    power: Vec<f64>,
    /// Interference at the CoMP user from the near beam, at each deflation.
    leak: Vec<f64>,
}

fn build_axis(own: &[Cx], comp: &[Cx], eps: f64, sigma2: f64, ts: Vec<f64>) -> Option<Axis> {
    let mut power = Vec::with_capacity(ts.len());
    let mut leak = Vec::with_capacity(ts.len());
    for &t in &ts {
        let dir = cvec::unit(&cvec::deflate(own, comp, t))?;
        let p = min_power_scaling(&dir, own, sigma2 * eps).ok()?;
        power.push(p);
        leak.push(p * cvec::gain(comp, &dir));
    }
    Some(Axis { ts, power, leak })
}

/// Evenly spaced deflations covering `[lo, hi] ∩ [0, x̂]`, endpoints included.
fn grid_points(x_hat: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    let lo = lo.max(0.0);
    let hi = hi.min(x_hat);
    if hi <= lo {
        return alloc::vec![lo.min(x_hat)];
    }
    let m = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect()
}

/// Exhaustive minimum over the deflated-beam family on a grid over
/// `[0, x̂]²`, refined once around the incumbent at `grid_step/100`.
/// `None` means no grid point is feasible.
pub fn grid_oracle_dpc(
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
    grid_step: f64,
) -> Option<GridSolution> {
    debug_assert!(grid_step > 0.0);
    let x_hat = targets.eps0 / (1.0 + targets.eps0);
    let coarse = scan(
        ch,
        targets,
        sigma2,
        p_max,
        grid_points(x_hat, grid_step, 0.0, x_hat),
        grid_points(x_hat, grid_step, 0.0, x_hat),
    )?;
    // One refinement pass: +/- one coarse cell around the incumbent.
    let fine = scan(
        ch,
        targets,
        sigma2,
        p_max,
        grid_points(x_hat, grid_step / 100.0, coarse.x - grid_step, coarse.x + grid_step),
        grid_points(x_hat, grid_step / 100.0, coarse.y - grid_step, coarse.y + grid_step),
    );
    match fine {
        Some(f) if f.total_power < coarse.total_power => Some(f),
        _ => Some(coarse),
    }
}

fn scan(
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
) -> Option<GridSolution> {
    let n10 = cvec::norm_sqr(ch.h10);
    let n20 = cvec::norm_sqr(ch.h20);
    let ax = build_axis(ch.h11, ch.h10, targets.eps1, sigma2, xs)?;
    let ay = build_axis(ch.h22, ch.h20, targets.eps2, sigma2, ys)?;
    let eps0 = targets.eps0;

    let mut best: Option<GridSolution> = None;
    for (xi, &x) in ax.ts.iter().enumerate() {
        let b1 = p_max - ax.power[xi];
        if b1 < 0.0 {
            continue;
        }
        for (yi, &y) in ay.ts.iter().enumerate() {
            let b2 = p_max - ay.power[yi];
            if b2 < 0.0 {
                continue;
            }
            // Received CoMP power must equal this; split it to minimize
            // p10 + p20 by loading the higher-gain station first.
            let rhs = eps0 * (sigma2 + ax.leak[xi] + ay.leak[yi]);
            let (p10, p20) = if rhs == 0.0 {
                (0.0, 0.0)
            } else if n20 >= n10 {
                if rhs <= n20 * b2 {
                    (0.0, rhs / n20)
                } else {
                    ((rhs - n20 * b2) / n10, b2)
                }
            } else if rhs <= n10 * b1 {
                (rhs / n10, 0.0)
            } else {
                (b1, (rhs - n10 * b1) / n20)
            };
            if p10 > b1 || p20 > b2 {
                continue;
            }
            let total = p10 + p20 + ax.power[xi] + ay.power[yi];
            if best.as_ref().map_or(true, |b| total < b.total_power) {
                best = Some(GridSolution {
                    total_power: total,
                    x,
                    y,
                    p10,
                    p20,
                });
            }
        }
    }
    best
}

/// Verification report: constraint residuals plus recomputed total power.
#[derive(Clone, Copy, Debug)]
pub struct VerifyReport {
    pub residuals: ResidualReport,
    pub total_power: f64,
}

/// Referee any beamformer set against the targets and budgets, recomputing
/// every SINR from scratch.  Never consults solver internals.
pub fn verify_solution(
    beams: &BeamformerSet,
    ch: GroupChannels,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
) -> VerifyReport {
    VerifyReport {
        residuals: rate::residuals(beams, ch, targets, p_max, sigma2),
        total_power: beams.total_power(),
    }
}
