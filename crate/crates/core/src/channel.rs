//! Stochastic geometry and Rayleigh channel generation.
//!
//! Stations sit at `(-D, 0)` and `(D, 0)`.  Each CoMP user is uniform over
//! the lens where the two coverage discs (radius `R0 > D`) intersect; each
//! near user is uniform over a small disc around its station.  A channel is
//! `g / d^alpha` with `g` circularly-symmetric complex Gaussian of unit
//! per-entry variance.
//!
//! All randomness flows through caller-provided RNGs; [`trial_rng`] derives
//! independent substreams from `(seed, stream)` so concurrent trials stay
//! reproducible in any execution order.

use crate::cvec::Cx;
use crate::pairing::UserPopulation;
use crate::rate::{GroupChannels, SinrTargets};
use alloc::vec::Vec;
use core::fmt;
// Inherent f64 methods shadow this under std (test builds).
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Rejection sampling gives up after this many draws per point.
const REJECTION_CAP: u32 = 1_000_000;

/// Geometry, radio, and budget parameters of one simulated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Half the station separation `D` (m); stations at `(±D, 0)`.
    pub bs_separation_half: f64,
    /// Coverage disc radius `R0` (m); must exceed `D` so the lens is nonempty.
    pub coverage_radius: f64,
    /// Near-user disc radius around station 1 (m).
    pub noma_radius_1: f64,
    /// Near-user disc radius around station 2 (m).
    pub noma_radius_2: f64,
    /// Amplitude path-loss exponent `alpha`.
    pub path_loss_exp: f64,
    /// Antennas per station.
    pub antennas: usize,
    /// Noise power (W).
    pub noise_power: f64,
    /// Per-station power budget (W), shared equally by the K groups.
    pub p_max: f64,
    /// Target rates `(r0, r1, r2)` in bits/channel-use.
    pub target_rates: [f64; 3],
    /// Number of groups K.
    pub group_count: usize,
    /// Base RNG seed.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs_separation_half: 300.0,
            coverage_radius: 400.0,
            noma_radius_1: 50.0,
            noma_radius_2: 50.0,
            path_loss_exp: 2.0,
            antennas: 4,
            noise_power: 1e-10,
            p_max: 0.2,
            target_rates: [0.5, 1.0, 1.0],
            group_count: 4,
            seed: 20,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |what| Err(ChannelError::InvalidConfig(what));
        if !(self.coverage_radius > self.bs_separation_half) {
            return bad("coverage_radius must exceed bs_separation_half");
        }
        if !(self.bs_separation_half >= 0.0) {
            return bad("bs_separation_half must be nonnegative");
        }
        if !(self.noma_radius_1 > 0.0 && self.noma_radius_2 > 0.0) {
            return bad("near-user disc radii must be positive");
        }
        if !(self.path_loss_exp > 0.0) {
            return bad("path_loss_exp must be positive");
        }
        if self.antennas == 0 {
            return bad("antennas must be at least 1");
        }
        if !(self.noise_power > 0.0) {
            return bad("noise_power must be positive");
        }
        if !(self.p_max >= 0.0) {
            return bad("p_max must be nonnegative");
        }
        if self.target_rates.iter().any(|r| !(*r >= 0.0)) {
            return bad("target rates must be nonnegative");
        }
        if self.group_count == 0 {
            return bad("group_count must be at least 1");
        }
        Ok(())
    }

    /// Station coordinates `((-D, 0), (D, 0))`.
    pub fn bs_positions(&self) -> ([f64; 2], [f64; 2]) {
        (
            [-self.bs_separation_half, 0.0],
            [self.bs_separation_half, 0.0],
        )
    }

    pub fn targets(&self) -> SinrTargets {
        SinrTargets::from_rates(
            self.target_rates[0],
            self.target_rates[1],
            self.target_rates[2],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelError {
    InvalidConfig(&'static str),
    /// Lens rejection sampling exhausted its iteration cap; the geometry is
    /// effectively degenerate.
    SamplingCapExceeded,
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::InvalidConfig(what) => write!(f, "invalid scenario config: {what}"),
            ChannelError::SamplingCapExceeded => {
                write!(f, "position sampling exceeded the rejection cap")
            }
        }
    }
}

/// User coordinates of one group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Positions {
    pub comp: [f64; 2],
    pub noma1: [f64; 2],
    pub noma2: [f64; 2],
}

/// The four channel vectors of one group plus the link distances behind
/// them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub h10: Vec<Cx>,
    pub h20: Vec<Cx>,
    pub h11: Vec<Cx>,
    pub h22: Vec<Cx>,
    pub d10: f64,
    pub d20: f64,
    pub d11: f64,
    pub d22: f64,
}

impl ChannelSet {
    pub fn view(&self) -> GroupChannels<'_> {
        GroupChannels {
            h10: &self.h10,
            h20: &self.h20,
            h11: &self.h11,
            h22: &self.h22,
        }
    }
}

/// Deterministic per-(seed, stream) RNG; distinct streams are independent.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])).sqrt()
}

/// Uniform point in the disc of radius `r` around `center`.
fn sample_disc<R: Rng + ?Sized>(center: [f64; 2], r: f64, rng: &mut R) -> [f64; 2] {
    let radius = r * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * 2.0 * core::f64::consts::PI;
    [
        center[0] + radius * theta.cos(),
        center[1] + radius * theta.sin(),
    ]
}

/// Uniform point in the lens where both coverage discs overlap, by rejection
/// from the lens bounding box.
fn sample_lens<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<[f64; 2], ChannelError> {
    let (bs1, bs2) = cfg.bs_positions();
    let r0 = cfg.coverage_radius;
    let half_w = r0 - cfg.bs_separation_half;
    let half_h = (r0 * r0 - cfg.bs_separation_half * cfg.bs_separation_half).sqrt();
    for _ in 0..REJECTION_CAP {
        let p = [
            rng.gen_range(-half_w..=half_w),
            rng.gen_range(-half_h..=half_h),
        ];
        if dist(p, bs1) <= r0 && dist(p, bs2) <= r0 {
            return Ok(p);
        }
    }
    Err(ChannelError::SamplingCapExceeded)
}

/// Draw the three user positions of one group.
pub fn sample_positions<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<Positions, ChannelError> {
    let (bs1, bs2) = cfg.bs_positions();
    Ok(Positions {
        comp: sample_lens(cfg, rng)?,
        noma1: sample_disc(bs1, cfg.noma_radius_1, rng),
        noma2: sample_disc(bs2, cfg.noma_radius_2, rng),
    })
}

/// Circularly-symmetric complex Gaussian vector, unit variance per entry.
fn sample_fading<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Cx> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Cx::new(re * core::f64::consts::FRAC_1_SQRT_2, im * core::f64::consts::FRAC_1_SQRT_2)
        })
        .collect()
}

/// Small-scale fading over amplitude path loss: `h = g / d^alpha`.
pub fn apply_path_loss(g: &[Cx], d: f64, alpha: f64) -> Vec<Cx> {
    let scale = d.powf(alpha).recip();
    g.iter().map(|x| x * scale).collect()
}

fn link<R: Rng + ?Sized>(
    bs: [f64; 2],
    user: [f64; 2],
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> (Vec<Cx>, f64) {
    let d = dist(bs, user);
    let g = sample_fading(cfg.antennas, rng);
    (apply_path_loss(&g, d, cfg.path_loss_exp), d)
}

/// Generate the faded, path-loss-scaled channels for given positions.
/// Draw order is fixed: h10, h20, h11, h22.
pub fn gen_channel_set<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    pos: &Positions,
    rng: &mut R,
) -> ChannelSet {
    let (bs1, bs2) = cfg.bs_positions();
    let (h10, d10) = link(bs1, pos.comp, cfg, rng);
    let (h20, d20) = link(bs2, pos.comp, cfg, rng);
    let (h11, d11) = link(bs1, pos.noma1, cfg, rng);
    let (h22, d22) = link(bs2, pos.noma2, cfg, rng);
    ChannelSet {
        h10,
        h20,
        h11,
        h22,
        d10,
        d20,
        d11,
        d22,
    }
}

/// Sample a `3K`-user population: K CoMP users (both links each), then K
/// near users of station 1, then K of station 2.
pub fn sample_population<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    k_count: usize,
    rng: &mut R,
) -> Result<UserPopulation, ChannelError> {
    let (bs1, bs2) = cfg.bs_positions();
    let mut h10 = Vec::with_capacity(k_count);
    let mut h20 = Vec::with_capacity(k_count);
    for _ in 0..k_count {
        let p = sample_lens(cfg, rng)?;
        h10.push(link(bs1, p, cfg, rng).0);
        h20.push(link(bs2, p, cfg, rng).0);
    }
    let mut h11 = Vec::with_capacity(k_count);
    for _ in 0..k_count {
        let p = sample_disc(bs1, cfg.noma_radius_1, rng);
        h11.push(link(bs1, p, cfg, rng).0);
    }
    let mut h22 = Vec::with_capacity(k_count);
    for _ in 0..k_count {
        let p = sample_disc(bs2, cfg.noma_radius_2, rng);
        h22.push(link(bs2, p, cfg, rng).0);
    }
    Ok(UserPopulation {
        h10,
        h20,
        h11,
        h22,
    })
}
