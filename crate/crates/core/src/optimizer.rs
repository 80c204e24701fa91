//! Bias selection: the three-stage per-class scheme, the CRE baseline, the
//! exhaustive-search oracle, bandwidth dimensioning and convexity sweeps.
//!
//! Every search scores candidates with one [`TrialSet`], so all candidates
//! see the same deployments and fading. Candidates are visited in a fixed
//! order and an incumbent is only replaced by a strictly better candidate,
//! which makes every tie go to the smallest bias (lexicographically for
//! triples).

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::association::BiasVector;
use crate::coverage::{sample_deployments, CoverageReport, Requirements, TrialSet};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{NetworkConfig, UserClass};

/// Ordered candidate biases (linear), starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasGrid {
    values: Vec<f64>,
}

impl BiasGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::InvalidInput("bias grid must start at 1 (0 dB)"));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("bias grid must be finite and strictly increasing"));
        }
        Ok(Self { values })
    }

    pub fn from_db(db: &[f64]) -> Result<Self> {
        Self::new(db.iter().map(|d| math::db_to_linear(*d)).collect())
    }

    /// 0, 2, ..., 20 dB.
    pub fn default_db() -> Self {
        let db: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
        Self::from_db(&db).expect("static grid is valid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for BiasGrid {
    fn default() -> Self {
        Self::default_db()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "three-stage")]
    ThreeStage,
    #[serde(rename = "cre")]
    Cre,
    #[serde(rename = "full")]
    FullSearch,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::ThreeStage, Scheme::Cre, Scheme::FullSearch];

    pub const fn name(self) -> &'static str {
        match self {
            Scheme::ThreeStage => "three-stage",
            Scheme::Cre => "cre",
            Scheme::FullSearch => "full",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three-stage" => Ok(Scheme::ThreeStage),
            "cre" => Ok(Scheme::Cre),
            "full" => Ok(Scheme::FullSearch),
            _ => Err(Error::InvalidInput("scheme must be one of three-stage, cre, full")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub scheme: Scheme,
    pub bias: BiasVector,
    pub report: CoverageReport,
    pub feasible: bool,
}

/// Demand split used by convexity sweeps. Shares are fractions of the
/// total traffic volume; the moving share is split vehicular:walking = C:1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandScenario {
    /// MB/day.
    pub total_volume: f64,
    pub stationary_share: f64,
    pub moving_share: f64,
    pub user_convexity: f64,
}

impl DemandScenario {
    /// 2015 measurements: 145.05 MB/day, 38.93 % of it while moving.
    pub const MEASURED_2015: DemandScenario = DemandScenario {
        total_volume: 145.05,
        stationary_share: 0.6107,
        moving_share: 0.3893,
        user_convexity: 3.04,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.total_volume >= 0.0 && self.total_volume.is_finite()) {
            return Err(Error::InvalidInput("total volume must be finite and >= 0"));
        }
        if !(self.stationary_share >= 0.0 && self.moving_share >= 0.0)
            || (self.stationary_share + self.moving_share - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidInput("volume shares must be >= 0 and sum to 1"));
        }
        if !(self.user_convexity > 0.0 && self.user_convexity.is_finite()) {
            return Err(Error::InvalidInput("user convexity must be finite and > 0"));
        }
        Ok(())
    }

    pub fn with_convexity(self, user_convexity: f64) -> Self {
        Self {
            user_convexity,
            ..self
        }
    }

    pub fn with_total(self, total_volume: f64) -> Self {
        Self { total_volume, ..self }
    }

    /// Per-user volumes (MB/day): stationary, walking, vehicular.
    pub fn volumes(&self) -> [f64; 3] {
        let walking = self.moving_share * self.total_volume / (1.0 + self.user_convexity);
        [
            self.stationary_share * self.total_volume,
            walking,
            self.user_convexity * walking,
        ]
    }

    /// `config` with its class volumes replaced by [`Self::volumes`].
    pub fn apply(&self, config: &NetworkConfig) -> Result<NetworkConfig> {
        self.validate()?;
        let mut config = config.clone();
        for (profile, volume) in config.profiles.iter_mut().zip(self.volumes()) {
            profile.traffic_volume = volume;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub convexity: f64,
    pub result: OptimizerResult,
}

/// Bias searches over one trial set and one set of requirements.
#[derive(Debug, Clone, Copy)]
pub struct Optimizer<'a> {
    trials: &'a TrialSet,
    requirements: &'a Requirements,
}

/// Feasible beats infeasible, then higher average coverage.
fn improves(candidate: &CoverageReport, incumbent: &CoverageReport) -> bool {
    match (candidate.feasible, incumbent.feasible) {
        (true, false) => true,
        (false, true) => false,
        _ => candidate.average_coverage > incumbent.average_coverage,
    }
}

impl<'a> Optimizer<'a> {
    pub fn new(trials: &'a TrialSet, requirements: &'a Requirements) -> Self {
        Self { trials, requirements }
    }

    pub fn evaluate(&self, bias: &BiasVector) -> Result<CoverageReport> {
        self.trials.evaluate(bias, self.requirements)
    }

    fn coverage_of(&self, class: UserClass, s: f64, w: f64, v: f64) -> Result<f64> {
        let bias = BiasVector::new(s, w, v)?;
        Ok(self.evaluate(&bias)?.coverage(class))
    }

    /// Grid value maximizing `score`, first maximum wins.
    fn argmax<F>(grid: &BiasGrid, mut score: F) -> Result<(f64, f64)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut best: Option<(f64, f64)> = None;
        for &b in grid.values() {
            let value = score(b)?;
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((b, value));
            }
        }
        best.ok_or(Error::InvalidInput("empty bias grid"))
    }

    /// Stationary bias maximizing stationary coverage with the other
    /// classes unbiased.
    pub fn stage1_stationary_bias(&self, grid: &BiasGrid) -> Result<f64> {
        Self::argmax(grid, |b| self.coverage_of(UserClass::Stationary, b, 1.0, 1.0)).map(|(b, _)| b)
    }

    /// Smallest walking bias whose Stage-3 completion meets the vehicular
    /// minimum coverage. Without any such bias, the one whose completion
    /// gives the highest vehicular coverage.
    pub fn stage2_walking_bias(&self, grid: &BiasGrid, stationary: f64) -> Result<f64> {
        let min = self.requirements.min_coverage[UserClass::Vehicular.index()];
        let mut best: Option<(f64, f64)> = None;
        for &walking in grid.values() {
            let vehicular = self.stage3_vehicular_bias(grid, stationary, walking)?;
            let coverage = self.coverage_of(UserClass::Vehicular, stationary, walking, vehicular)?;
            if coverage >= min {
                return Ok(walking);
            }
            if best.is_none_or(|(_, c)| coverage > c) {
                best = Some((walking, coverage));
            }
        }
        best.map(|(b, _)| b).ok_or(Error::InvalidInput("empty bias grid"))
    }

    /// Vehicular bias maximizing vehicular coverage given the other two.
    pub fn stage3_vehicular_bias(&self, grid: &BiasGrid, stationary: f64, walking: f64) -> Result<f64> {
        Self::argmax(grid, |b| self.coverage_of(UserClass::Vehicular, stationary, walking, b)).map(|(b, _)| b)
    }

    pub fn three_stage(&self, grid: &BiasGrid) -> Result<OptimizerResult> {
        let stationary = self.stage1_stationary_bias(grid)?;
        let walking = self.stage2_walking_bias(grid, stationary)?;
        let vehicular = self.stage3_vehicular_bias(grid, stationary, walking)?;
        self.result(Scheme::ThreeStage, BiasVector::new(stationary, walking, vehicular)?)
    }

    /// One common bias for all classes.
    pub fn cre(&self, grid: &BiasGrid) -> Result<OptimizerResult> {
        self.best_of(Scheme::Cre, grid.values().iter().map(|&b| BiasVector::uniform(b)))
    }

    /// Every triple of grid values, lexicographic order.
    pub fn full_search(&self, grid: &BiasGrid) -> Result<OptimizerResult> {
        let n = grid.len();
        if n * n * n > 2000 {
            log::warn!("full search over {} candidates", n * n * n);
        }
        let values = grid.values();
        let triples = values.iter().flat_map(|&s| {
            values
                .iter()
                .flat_map(move |&w| values.iter().map(move |&v| BiasVector::new(s, w, v)))
        });
        self.best_of(Scheme::FullSearch, triples)
    }

    pub fn run(&self, scheme: Scheme, grid: &BiasGrid) -> Result<OptimizerResult> {
        match scheme {
            Scheme::ThreeStage => self.three_stage(grid),
            Scheme::Cre => self.cre(grid),
            Scheme::FullSearch => self.full_search(grid),
        }
    }

    fn best_of<I>(&self, scheme: Scheme, candidates: I) -> Result<OptimizerResult>
    where
        I: IntoIterator<Item = Result<BiasVector>>,
    {
        let mut best: Option<(BiasVector, CoverageReport)> = None;
        for bias in candidates {
            let bias = bias?;
            let report = self.evaluate(&bias)?;
            if best.as_ref().is_none_or(|(_, r)| improves(&report, r)) {
                best = Some((bias, report));
            }
        }
        let (bias, report) = best.ok_or(Error::InvalidInput("empty bias grid"))?;
        Ok(OptimizerResult {
            scheme,
            bias,
            report,
            feasible: report.feasible,
        })
    }

    fn result(&self, scheme: Scheme, bias: BiasVector) -> Result<OptimizerResult> {
        let report = self.evaluate(&bias)?;
        Ok(OptimizerResult {
            scheme,
            bias,
            report,
            feasible: report.feasible,
        })
    }
}

fn with_optimizer<T>(config: &NetworkConfig, f: impl FnOnce(&Optimizer<'_>) -> Result<T>) -> Result<T> {
    let requirements = Requirements::from_config(config)?;
    let trials = TrialSet::sample(config)?;
    f(&Optimizer::new(&trials, &requirements))
}

pub fn stage1_stationary_bias(config: &NetworkConfig, grid: &BiasGrid) -> Result<f64> {
    with_optimizer(config, |o| o.stage1_stationary_bias(grid))
}

pub fn stage2_walking_bias(config: &NetworkConfig, grid: &BiasGrid, stationary: f64) -> Result<f64> {
    with_optimizer(config, |o| o.stage2_walking_bias(grid, stationary))
}

pub fn stage3_vehicular_bias(
    config: &NetworkConfig,
    grid: &BiasGrid,
    stationary: f64,
    walking: f64,
) -> Result<f64> {
    with_optimizer(config, |o| o.stage3_vehicular_bias(grid, stationary, walking))
}

pub fn three_stage_optimize(config: &NetworkConfig, grid: &BiasGrid) -> Result<OptimizerResult> {
    with_optimizer(config, |o| o.three_stage(grid))
}

pub fn cre_optimize(config: &NetworkConfig, grid: &BiasGrid) -> Result<OptimizerResult> {
    with_optimizer(config, |o| o.cre(grid))
}

pub fn full_search(config: &NetworkConfig, grid: &BiasGrid) -> Result<OptimizerResult> {
    with_optimizer(config, |o| o.full_search(grid))
}

/// Smallest bandwidth in `[w_min, w_max]`, to within `tolerance`, at which
/// `scheme` finds a feasible bias. Deployments are drawn once and shared by
/// every probe.
pub fn required_bandwidth(
    config: &NetworkConfig,
    grid: &BiasGrid,
    scheme: Scheme,
    w_min: f64,
    w_max: f64,
    tolerance: f64,
) -> Result<f64> {
    if !(w_min > 0.0 && w_min <= w_max && w_max.is_finite()) {
        return Err(Error::InvalidInput("bandwidth bounds must satisfy 0 < w_min <= w_max"));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidInput("bandwidth tolerance must be > 0"));
    }
    config.validate()?;
    let requirements = Requirements::from_config(config)?;
    let deployments = sample_deployments(config)?;
    let probe = |bandwidth: f64| -> Result<OptimizerResult> {
        let config = NetworkConfig {
            bandwidth,
            ..config.clone()
        };
        let trials = TrialSet::from_deployments(&config, &deployments)?;
        Optimizer::new(&trials, &requirements).run(scheme, grid)
    };

    let top = probe(w_max)?;
    if !top.feasible {
        let class = top
            .report
            .failing_class(&requirements)
            .expect("infeasible report has a failing class");
        return Err(Error::Unsatisfiable(class));
    }
    if probe(w_min)?.feasible {
        return Ok(w_min);
    }
    // Invariant: infeasible at `lo`, feasible at `hi`.
    let (mut lo, mut hi) = (w_min, w_max);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if probe(mid)?.feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Runs `schemes` at every convexity value, one row per (value, scheme) in
/// that nesting order.
pub fn convexity_sweep_schemes(
    base: &DemandScenario,
    convexity_values: &[f64],
    config: &NetworkConfig,
    grid: &BiasGrid,
    schemes: &[Scheme],
) -> Result<Vec<SweepRow>> {
    let trials = TrialSet::sample(config)?;
    let mut rows = Vec::with_capacity(convexity_values.len() * schemes.len());
    for &convexity in convexity_values {
        let scenario = base.with_convexity(convexity);
        let requirements = Requirements::from_config(&scenario.apply(config)?)?;
        let optimizer = Optimizer::new(&trials, &requirements);
        for &scheme in schemes {
            rows.push(SweepRow {
                convexity,
                result: optimizer.run(scheme, grid)?,
            });
        }
    }
    Ok(rows)
}

/// [`convexity_sweep_schemes`] with three-stage, CRE and full search.
pub fn convexity_sweep(
    base: &DemandScenario,
    convexity_values: &[f64],
    config: &NetworkConfig,
    grid: &BiasGrid,
) -> Result<Vec<SweepRow>> {
    convexity_sweep_schemes(base, convexity_values, config, grid, &Scheme::ALL)
}
