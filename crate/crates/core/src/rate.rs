//! SINR and achievable-rate evaluation — the ground-truth referee.
//!
//! Every solver and scheme in this crate is checked against these functions;
//! they only ever recompute SINRs from raw beamformers and channels and never
//! look at solver internals.
//!
//! Rates are `log2(1 + SINR)` in bits per channel use.  The CoMP user's rate
//! under superposition coding is limited both by its own decoding SINR and by
//! each near user's ability to decode (and cancel) the CoMP signal; the
//! latter constraint applies only to a base station that actually transmits
//! to the CoMP user.  A CoMP beam that is exactly nulled at the near user
//! (zero-forcing construction) contributes no interference there, so nothing
//! needs to be decoded and the cross constraint is waived for that leg.

use crate::cvec::{self, Cx};
// Inherent f64 methods shadow this under std (test builds).
#[allow(unused_imports)]
use num_traits::Float;

/// Cross gains below `1e-10 · ‖h‖‖w‖` count as exactly nulled.
const NULLED_CROSS_REL: f64 = 1e-10;

/// Borrowed view of the four channel vectors of one group.
#[derive(Clone, Copy, Debug)]
pub struct GroupChannels<'a> {
    /// BS 1 → CoMP user.
    pub h10: &'a [Cx],
    /// BS 2 → CoMP user.
    pub h20: &'a [Cx],
    /// BS 1 → its near user.
    pub h11: &'a [Cx],
    /// BS 2 → its near user.
    pub h22: &'a [Cx],
}

/// SINR thresholds `eps_j = 2^{r_j} - 1` equivalent to the rate targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrTargets {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl SinrTargets {
    pub fn from_rates(r0: f64, r1: f64, r2: f64) -> Self {
        Self {
            eps0: eps_from_rate(r0),
            eps1: eps_from_rate(r1),
            eps2: eps_from_rate(r2),
        }
    }

    /// Rate targets back out of the thresholds.
    pub fn rates(&self) -> (f64, f64, f64) {
        (
            (1.0 + self.eps0).log2(),
            (1.0 + self.eps1).log2(),
            (1.0 + self.eps2).log2(),
        )
    }
}

/// Threshold SINR for a target rate in bits/channel-use.
pub fn eps_from_rate(r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    r.exp2() - 1.0
}

/// The four transmit beamformers of one group.  Any beam may be all-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerSet {
    pub w10: alloc::vec::Vec<Cx>,
    pub w20: alloc::vec::Vec<Cx>,
    pub w11: alloc::vec::Vec<Cx>,
    pub w22: alloc::vec::Vec<Cx>,
}

impl BeamformerSet {
    pub fn zero(n: usize) -> Self {
        Self {
            w10: cvec::zeros(n),
            w20: cvec::zeros(n),
            w11: cvec::zeros(n),
            w22: cvec::zeros(n),
        }
    }

    /// `‖w10‖² + ‖w20‖² + ‖w11‖² + ‖w22‖²`.
    pub fn total_power(&self) -> f64 {
        cvec::norm_sqr(&self.w10)
            + cvec::norm_sqr(&self.w20)
            + cvec::norm_sqr(&self.w11)
            + cvec::norm_sqr(&self.w22)
    }

    /// Per-station loads `(‖w10‖² + ‖w11‖², ‖w20‖² + ‖w22‖²)`.
    pub fn station_loads(&self) -> (f64, f64) {
        (
            cvec::norm_sqr(&self.w10) + cvec::norm_sqr(&self.w11),
            cvec::norm_sqr(&self.w20) + cvec::norm_sqr(&self.w22),
        )
    }

    fn max_norm_sqr(&self) -> f64 {
        cvec::norm_sqr(&self.w10)
            .max(cvec::norm_sqr(&self.w20))
            .max(cvec::norm_sqr(&self.w11))
            .max(cvec::norm_sqr(&self.w22))
    }
}

/// SINR of the CoMP user decoding its own signal, near-user signals treated
/// as interference.
pub fn sinr_comp_user(beams: &BeamformerSet, ch: GroupChannels, sigma2: f64) -> f64 {
    let signal = cvec::gain(ch.h10, &beams.w10) + cvec::gain(ch.h20, &beams.w20);
    let interference = cvec::gain(ch.h10, &beams.w11) + cvec::gain(ch.h20, &beams.w22);
    signal / (interference + sigma2)
}

/// SINR of near user `j ∈ {1,2}` decoding the CoMP signal before SIC.
pub fn sinr_cross(beams: &BeamformerSet, ch: GroupChannels, j: usize, sigma2: f64) -> f64 {
    let (h, w0, wj) = match j {
        1 => (ch.h11, &beams.w10, &beams.w11),
        2 => (ch.h22, &beams.w20, &beams.w22),
        _ => panic!("near-user index must be 1 or 2"),
    };
    cvec::gain(h, w0) / (cvec::gain(h, wj) + sigma2)
}

/// SINR of near user `j` decoding its own signal after SIC.
pub fn sinr_own(beams: &BeamformerSet, ch: GroupChannels, j: usize, sigma2: f64) -> f64 {
    let (h, wj) = match j {
        1 => (ch.h11, &beams.w11),
        2 => (ch.h22, &beams.w22),
        _ => panic!("near-user index must be 1 or 2"),
    };
    cvec::gain(h, wj) / sigma2
}

/// Is the cross (SIC decodability) constraint active for near user `j`?
///
/// Inactive when the CoMP beam of station `j` is switched off, or when it is
/// exactly nulled at the near user so no interference arrives there.
fn cross_active(beams: &BeamformerSet, ch: GroupChannels, j: usize) -> bool {
    let max_ns = beams.max_norm_sqr();
    let (h, w0) = match j {
        1 => (ch.h11, &beams.w10),
        2 => (ch.h22, &beams.w20),
        _ => panic!("near-user index must be 1 or 2"),
    };
    if cvec::is_negligible(w0, max_ns) {
        return false;
    }
    let coupling = cvec::gain(h, w0);
    coupling > NULLED_CROSS_REL * NULLED_CROSS_REL * cvec::norm_sqr(h) * cvec::norm_sqr(w0)
}

/// Achievable rates `(R0, R1, R2)` under superposition coding with SIC.
///
/// `R0` is the minimum of the CoMP user's own-decoding rate and the active
/// cross-decoding rates; `R1`, `R2` are the near users' post-SIC rates.
pub fn achievable_rates(beams: &BeamformerSet, ch: GroupChannels, sigma2: f64) -> (f64, f64, f64) {
    let mut r0 = (1.0 + sinr_comp_user(beams, ch, sigma2)).log2();
    for j in [1, 2] {
        if cross_active(beams, ch, j) {
            r0 = r0.min((1.0 + sinr_cross(beams, ch, j, sigma2)).log2());
        }
    }
    let r1 = (1.0 + sinr_own(beams, ch, 1, sigma2)).log2();
    let r2 = (1.0 + sinr_own(beams, ch, 2, sigma2)).log2();
    (r0, r1, r2)
}

/// Rates when the transmitter pre-cancels the CoMP signal at the near users
/// (dirty paper coding): no cross-decoding constraints apply.
pub fn dpc_rates(beams: &BeamformerSet, ch: GroupChannels, sigma2: f64) -> (f64, f64, f64) {
    (
        (1.0 + sinr_comp_user(beams, ch, sigma2)).log2(),
        (1.0 + sinr_own(beams, ch, 1, sigma2)).log2(),
        (1.0 + sinr_own(beams, ch, 2, sigma2)).log2(),
    )
}

/// Signed slack of every constraint; nonnegative means satisfied.
///
/// Rate residuals are `R - r` in bits, budget residuals `p_max - load` in
/// watts.  `rate0_cross[j-1]` is `None` when the cross constraint for near
/// user `j` is inactive (beam off or exactly nulled).
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    pub rate0_comp: f64,
    pub rate0_cross: [Option<f64>; 2],
    pub rate1: f64,
    pub rate2: f64,
    pub budget1: f64,
    pub budget2: f64,
}

impl ResidualReport {
    /// Worst residual under superposition-coding semantics (cross
    /// constraints included where active).
    pub fn worst(&self) -> f64 {
        let mut w = self.worst_dpc();
        for c in self.rate0_cross.iter().flatten() {
            w = w.min(*c);
        }
        w
    }

    /// Worst residual when cross constraints do not apply (pre-cancelled
    /// interference at the near users).
    pub fn worst_dpc(&self) -> f64 {
        self.rate0_comp
            .min(self.rate1)
            .min(self.rate2)
            .min(self.budget1)
            .min(self.budget2)
    }
}

/// Referee a beamformer set against rate targets and per-station budgets.
///
/// Returns the verdict at absolute tolerance `tol` together with the full
/// residual report.
pub fn check_feasible(
    beams: &BeamformerSet,
    ch: GroupChannels,
    targets: &SinrTargets,
    p_max: f64,
    sigma2: f64,
    tol: f64,
) -> (bool, ResidualReport) {
    let report = residuals(beams, ch, targets, p_max, sigma2);
    (report.worst() >= -tol, report)
}

pub fn residuals(
    beams: &BeamformerSet,
    ch: GroupChannels,
    targets: &SinrTargets,
    p_max: f64,
    sigma2: f64,
) -> ResidualReport {
    let (r0, r1, r2) = targets.rates();
    let rate0_comp = (1.0 + sinr_comp_user(beams, ch, sigma2)).log2() - r0;
    let mut rate0_cross = [None, None];
    for j in [1, 2] {
        if cross_active(beams, ch, j) {
            rate0_cross[j - 1] = Some((1.0 + sinr_cross(beams, ch, j, sigma2)).log2() - r0);
        }
    }
    let rate1 = (1.0 + sinr_own(beams, ch, 1, sigma2)).log2() - r1;
    let rate2 = (1.0 + sinr_own(beams, ch, 2, sigma2)).log2() - r2;
    let (load1, load2) = beams.station_loads();
    ResidualReport {
        rate0_comp,
        rate0_cross,
        rate1,
        rate2,
        budget1: p_max - load1,
        budget2: p_max - load2,
    }
}
