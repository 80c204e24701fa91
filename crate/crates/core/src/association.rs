//! Per-class biased max-mean-power association and cell loads.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{Deployment, NetworkConfig, StationId, Tier, UserClass};

/// Linear small-cell association bias of each class. 1 means unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasVector {
    pub stationary: f64,
    pub walking: f64,
    pub vehicular: f64,
}

impl BiasVector {
    pub const UNBIASED: BiasVector = BiasVector {
        stationary: 1.0,
        walking: 1.0,
        vehicular: 1.0,
    };

    pub fn new(stationary: f64, walking: f64, vehicular: f64) -> Result<Self> {
        let bias = Self {
            stationary,
            walking,
            vehicular,
        };
        if bias.as_array().iter().all(|b| b.is_finite() && *b >= 1.0) {
            Ok(bias)
        } else {
            Err(Error::Domain("association bias must be finite and >= 1 (0 dB)"))
        }
    }

    /// Same bias for every class, as in cell range expansion.
    pub fn uniform(bias: f64) -> Result<Self> {
        Self::new(bias, bias, bias)
    }

    pub fn from_db(stationary_db: f64, walking_db: f64, vehicular_db: f64) -> Result<Self> {
        Self::new(
            math::db_to_linear(stationary_db),
            math::db_to_linear(walking_db),
            math::db_to_linear(vehicular_db),
        )
    }

    /// Biases in dB, rounded to 1e-6 dB.
    pub fn to_db(&self) -> [f64; 3] {
        self.as_array().map(math::linear_to_db)
    }

    #[inline]
    pub fn for_class(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Stationary => self.stationary,
            UserClass::Walking => self.walking,
            UserClass::Vehicular => self.vehicular,
        }
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        [self.stationary, self.walking, self.vehicular]
    }
}

impl Default for BiasVector {
    fn default() -> Self {
        Self::UNBIASED
    }
}

/// Serving station and tier of every user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationMap {
    pub serving: Vec<StationId>,
    pub tier: Vec<Tier>,
}

impl AssociationMap {
    pub fn len(&self) -> usize {
        self.serving.len()
    }

    pub fn is_empty(&self) -> bool {
        self.serving.is_empty()
    }
}

/// Serves each user from the station maximizing biased mean received power
/// (fading gain 1). The bias of the user's class multiplies small-cell
/// power only. Ties go to the lowest station id, hence to the macro tier.
pub fn associate(
    deployment: &Deployment,
    bias: &BiasVector,
    config: &NetworkConfig,
) -> Result<AssociationMap> {
    if deployment.macro_positions().is_empty() {
        return Err(Error::InvalidInput("deployment has no macro station"));
    }
    let mut serving = Vec::with_capacity(deployment.users().len());
    let mut tier = Vec::with_capacity(deployment.users().len());
    for (u, user) in deployment.users().iter().enumerate() {
        let b = bias.for_class(user.class);
        let mean = deployment.link_powers(u, config, false);
        let mut best = (0usize, Tier::Macro, f64::NEG_INFINITY);
        for ((id, t, _), power) in deployment.station_tiers().zip(mean) {
            let value = match t {
                Tier::Macro => power,
                Tier::Small => b * power,
            };
            if value > best.2 {
                best = (id.0, t, value);
            }
        }
        serving.push(StationId(best.0));
        tier.push(best.1);
    }
    Ok(AssociationMap { serving, tier })
}

/// Number of users served by each station, indexed by station id.
pub fn cell_loads(map: &AssociationMap, deployment: &Deployment) -> Vec<u32> {
    let mut loads = alloc::vec![0u32; deployment.station_count()];
    for station in &map.serving {
        loads[station.0] += 1;
    }
    loads
}
