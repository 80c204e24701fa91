//! Rates, handover loss and Monte-Carlo rate coverage.
//!
//! [`TrialSet`] caches everything about a batch of deployments that does not
//! depend on the bias vector or on traffic volumes, so that many candidate
//! biases can be scored against identical realizations (common random
//! numbers) for the cost of one association pass each.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::association::{cell_loads, AssociationMap, BiasVector};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{sample_deployment, sinr_from_powers, Deployment, NetworkConfig, Tier, UserClass};

const SECONDS_PER_DAY: f64 = 86_400.0;
const BITS_PER_MB: f64 = 8.0e6;

/// Rate coverage of one bias vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Stationary, walking, vehicular.
    pub per_class_coverage: [f64; 3],
    /// Density-weighted mean of the per-class values.
    pub average_coverage: f64,
    /// Every class meets its minimum coverage.
    pub feasible: bool,
    pub trials_used: usize,
}

impl CoverageReport {
    #[inline]
    pub fn coverage(&self, class: UserClass) -> f64 {
        self.per_class_coverage[class.index()]
    }

    /// First class below its minimum, if any.
    pub fn failing_class(&self, requirements: &Requirements) -> Option<UserClass> {
        UserClass::ALL
            .into_iter()
            .find(|c| self.coverage(*c) < requirements.min_coverage[c.index()])
    }
}

/// Rate requirement (bit/s) of a daily volume (MB/day, 1 MB = 10^6 bytes)
/// concentrated by `peak_factor`.
pub fn rate_requirement(volume: f64, peak_factor: f64) -> Result<f64> {
    if volume.is_nan() || volume < 0.0 {
        return Err(Error::Domain("traffic volume must be >= 0"));
    }
    if peak_factor.is_nan() || peak_factor < 1.0 {
        return Err(Error::Domain("peak factor must be >= 1"));
    }
    Ok(volume * BITS_PER_MB / SECONDS_PER_DAY * peak_factor)
}

/// Fraction of time a user moving at `velocity` km/h through a tier of
/// `density` stations/km² is not interrupted by handovers.
///
/// Handover rate is `c * v * sqrt(density)` (m/s and stations/m²), each
/// handover costs `handover_delay` seconds; the result is floored at 0.
pub fn handover_efficiency(velocity: f64, density: f64, config: &NetworkConfig) -> f64 {
    let speed = velocity / 3.6;
    let rate = config.crossing_coefficient * speed * math::sqrt(density / 1e6);
    let efficiency = 1.0 - rate * config.handover_delay;
    if efficiency > 0.0 {
        efficiency
    } else {
        0.0
    }
}

#[inline]
fn shared_rate(efficiency: f64, bandwidth: f64, load: u32, spectral_efficiency: f64) -> f64 {
    efficiency * (bandwidth / load as f64) * spectral_efficiency
}

/// Rate (bit/s) of `user` under `map`: handover efficiency of its serving
/// tier, times an equal share of `bandwidth` among the users of its
/// station, times `log2(1 + SINR)` on its faded link.
pub fn user_rate(
    user: usize,
    map: &AssociationMap,
    deployment: &Deployment,
    bandwidth: f64,
    config: &NetworkConfig,
) -> Result<f64> {
    let info = deployment.users().get(user).ok_or(Error::UnknownUser(user))?;
    let serving = *map.serving.get(user).ok_or(Error::UnknownUser(user))?;
    let tier = deployment.tier(serving)?;
    let loads = cell_loads(map, deployment);
    let config = NetworkConfig {
        bandwidth,
        ..config.clone()
    };
    let powers = deployment.link_powers(user, &config, true);
    let spectral = math::log2(1.0 + sinr_from_powers(&powers, serving.0, &config));
    let efficiency = handover_efficiency(
        config.profile(info.class).velocity,
        config.tier_density(tier),
        &config,
    );
    Ok(shared_rate(efficiency, bandwidth, loads[serving.0], spectral))
}

/// Per-class rate thresholds, minimum coverages and density weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Requirements {
    /// bit/s.
    pub rate: [f64; 3],
    pub min_coverage: [f64; 3],
    pub density_fraction: [f64; 3],
}

impl Requirements {
    pub fn from_config(config: &NetworkConfig) -> Result<Self> {
        let mut rate = [0.0; 3];
        for (r, p) in rate.iter_mut().zip(&config.profiles) {
            *r = rate_requirement(p.traffic_volume, config.demand_peak_factor)?;
        }
        Ok(Self {
            rate,
            min_coverage: config.profiles.map(|p| p.min_coverage),
            density_fraction: config.profiles.map(|p| p.density_fraction),
        })
    }
}

/// One user's two association candidates: the strongest macro and the
/// strongest small cell by mean power, with the faded spectral efficiency
/// and handover efficiency that apply if served by either.
#[derive(Debug, Clone, Copy)]
struct Candidates {
    class: UserClass,
    macro_id: u32,
    macro_mean: f64,
    macro_spectral: f64,
    macro_efficiency: f64,
    small_id: u32,
    /// 0 when the deployment has no small cells.
    small_mean: f64,
    small_spectral: f64,
    small_efficiency: f64,
}

impl Candidates {
    /// Mirrors the argmax of [`crate::associate`]: the small cell wins only
    /// when its biased mean power strictly exceeds the best macro's.
    #[inline]
    fn prefers_small(&self, bias: f64) -> bool {
        self.small_mean > 0.0 && bias * self.small_mean > self.macro_mean
    }
}

#[derive(Debug, Clone)]
struct Trial {
    stations: usize,
    users: Vec<Candidates>,
}

/// Bias-independent link data for a batch of deployments.
#[derive(Debug, Clone)]
pub struct TrialSet {
    trials: Vec<Trial>,
    bandwidth: f64,
}

impl TrialSet {
    /// Samples trials `0..config.trials`.
    pub fn sample(config: &NetworkConfig) -> Result<Self> {
        let deployments = sample_deployments(config)?;
        Self::from_deployments(config, &deployments)
    }

    /// Link data of explicit deployments under `config`'s radio parameters.
    pub fn from_deployments(config: &NetworkConfig, deployments: &[Deployment]) -> Result<Self> {
        config.validate()?;
        let trials = deployments
            .iter()
            .map(|d| prepare_trial(d, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trials,
            bandwidth: config.bandwidth,
        })
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Rate coverage of `bias` against `requirements`.
    ///
    /// Coverage of a class is the fraction of its (user, trial) pairs whose
    /// rate reaches the class requirement.
    pub fn evaluate(&self, bias: &BiasVector, requirements: &Requirements) -> Result<CoverageReport> {
        let mut hits = [0u64; 3];
        let mut totals = [0u64; 3];
        let mut loads: Vec<u32> = Vec::new();
        let mut on_small: Vec<bool> = Vec::new();
        for trial in &self.trials {
            loads.clear();
            loads.resize(trial.stations, 0);
            on_small.clear();
            for user in &trial.users {
                let small = user.prefers_small(bias.for_class(user.class));
                let station = if small { user.small_id } else { user.macro_id };
                loads[station as usize] += 1;
                on_small.push(small);
            }
            for (user, &small) in trial.users.iter().zip(&on_small) {
                let rate = if small {
                    shared_rate(
                        user.small_efficiency,
                        self.bandwidth,
                        loads[user.small_id as usize],
                        user.small_spectral,
                    )
                } else {
                    shared_rate(
                        user.macro_efficiency,
                        self.bandwidth,
                        loads[user.macro_id as usize],
                        user.macro_spectral,
                    )
                };
                let c = user.class.index();
                totals[c] += 1;
                if rate >= requirements.rate[c] {
                    hits[c] += 1;
                }
            }
        }

        let mut per_class_coverage = [0.0; 3];
        for class in UserClass::ALL {
            let c = class.index();
            if totals[c] == 0 {
                return Err(Error::NoUsersInClass(class));
            }
            per_class_coverage[c] = hits[c] as f64 / totals[c] as f64;
        }
        let average_coverage = per_class_coverage
            .iter()
            .zip(&requirements.density_fraction)
            .map(|(cov, w)| cov * w)
            .sum();
        let feasible = per_class_coverage
            .iter()
            .zip(&requirements.min_coverage)
            .all(|(cov, min)| cov >= min);
        Ok(CoverageReport {
            per_class_coverage,
            average_coverage,
            feasible,
            trials_used: self.trials.len(),
        })
    }
}

/// Deployments `0..config.trials` of `config`.
pub fn sample_deployments(config: &NetworkConfig) -> Result<Vec<Deployment>> {
    (0..config.trials as u64)
        .map(|t| sample_deployment(config, t))
        .collect()
}

fn prepare_trial(deployment: &Deployment, config: &NetworkConfig) -> Result<Trial> {
    let macros = deployment.macro_positions().len();
    if macros == 0 {
        return Err(Error::InvalidInput("deployment has no macro station"));
    }
    let stations = deployment.station_count();
    let users = deployment
        .users()
        .iter()
        .enumerate()
        .map(|(u, user)| {
            let mean = deployment.link_powers(u, config, false);
            let faded = deployment.link_powers(u, config, true);
            let (macro_id, macro_mean) = strongest(&mean[..macros], 0);
            let (small_id, small_mean) = if stations > macros {
                strongest(&mean[macros..], macros)
            } else {
                (0, 0.0)
            };
            let velocity = config.profile(user.class).velocity;
            let spectral = |id: usize| math::log2(1.0 + sinr_from_powers(&faded, id, config));
            Candidates {
                class: user.class,
                macro_id: macro_id as u32,
                macro_mean,
                macro_spectral: spectral(macro_id),
                macro_efficiency: handover_efficiency(velocity, config.tier_density(Tier::Macro), config),
                small_id: small_id as u32,
                small_mean,
                small_spectral: if small_mean > 0.0 { spectral(small_id) } else { 0.0 },
                small_efficiency: handover_efficiency(velocity, config.tier_density(Tier::Small), config),
            }
        })
        .collect();
    Ok(Trial { stations, users })
}

/// Index (offset by `base`) and value of the first maximum.
fn strongest(powers: &[f64], base: usize) -> (usize, f64) {
    let mut best = (base, f64::NEG_INFINITY);
    for (i, p) in powers.iter().enumerate() {
        if *p > best.1 {
            best = (base + i, *p);
        }
    }
    best
}

/// Rate coverage of `bias` over trials `0..config.trials`.
pub fn estimate_rate_coverage(config: &NetworkConfig, bias: &BiasVector) -> Result<CoverageReport> {
    let requirements = Requirements::from_config(config)?;
    TrialSet::sample(config)?.evaluate(bias, &requirements)
}
