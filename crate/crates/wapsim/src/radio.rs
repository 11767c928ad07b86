//! Signal propagation and physical-layer reception outcomes.
//!
//! Free-space path loss by default; a scenario may override the distance
//! exponent per node class (log-distance model, exponent 2 reduces to free
//! space). Reception is a pure function of received power, the receiver
//! profile, and one uniform draw, so physical-layer results replay exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;
use crate::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("path loss is singular: distance must be > 0 (got {0})")]
    NonPositiveDistance(f64),
    #[error("frequency must be > 0 MHz (got {0})")]
    NonPositiveFrequency(f64),
    #[error("invalid radio profile: {0}")]
    InvalidProfile(String),
}

/// Transmit and receive parameters of one radio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioProfile {
    pub tx_power_dbm: f64,
    pub frequency_mhz: f64,
    /// Minimum detectable power.
    pub sensitivity_dbm: f64,
    /// Minimum power to attempt a decode; at or above it the signal locks.
    pub lock_threshold_dbm: f64,
    /// Width of the band above the lock threshold in which decodes fail
    /// probabilistically (linear ramp, certain failure at the threshold).
    pub error_floor_margin_db: f64,
    /// Log-distance path-loss exponent; `None` means free space (2.0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
}

impl RadioProfile {
    pub fn validate(&self) -> Result<(), RadioError> {
        if self.frequency_mhz <= 0.0 {
            return Err(RadioError::NonPositiveFrequency(self.frequency_mhz));
        }
        if self.sensitivity_dbm > self.lock_threshold_dbm {
            return Err(RadioError::InvalidProfile(format!(
                "sensitivity ({} dBm) must be <= lock_threshold ({} dBm)",
                self.sensitivity_dbm, self.lock_threshold_dbm
            )));
        }
        if self.error_floor_margin_db < 0.0 {
            return Err(RadioError::InvalidProfile(
                "error_floor_margin_db must be >= 0".into(),
            ));
        }
        if let Some(n) = self.path_loss_exponent {
            if n <= 0.0 {
                return Err(RadioError::InvalidProfile(
                    "path_loss_exponent must be > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One measured received-power observation of a transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSample {
    pub source: NodeId,
    pub rx_power_dbm: f64,
    pub measured_at: SimTime,
}

/// Free-space path loss: `20 log10(d_km) + 20 log10(f_MHz) + 32.44`.
pub fn path_loss_db(distance_m: f64, frequency_mhz: f64) -> Result<f64, RadioError> {
    path_loss_db_with_exponent(distance_m, frequency_mhz, 2.0)
}

/// Log-distance path loss with exponent `n`; `n = 2` is free space.
pub fn path_loss_db_with_exponent(
    distance_m: f64,
    frequency_mhz: f64,
    n: f64,
) -> Result<f64, RadioError> {
    if distance_m <= 0.0 {
        return Err(RadioError::NonPositiveDistance(distance_m));
    }
    if frequency_mhz <= 0.0 {
        return Err(RadioError::NonPositiveFrequency(frequency_mhz));
    }
    Ok(32.44 + 20.0 * frequency_mhz.log10() + 10.0 * n * (distance_m / 1000.0).log10())
}

/// Received power at `distance_m` from a transmitter with profile `tx`.
pub fn received_power_dbm(tx: &RadioProfile, distance_m: f64) -> Result<f64, RadioError> {
    let n = tx.path_loss_exponent.unwrap_or(2.0);
    Ok(tx.tx_power_dbm - path_loss_db_with_exponent(distance_m, tx.frequency_mhz, n)?)
}

/// Whether `rx_power_dbm` is at all detectable by a receiver with `profile`.
pub fn detectable(rx_power_dbm: f64, profile: &RadioProfile) -> bool {
    rx_power_dbm >= profile.sensitivity_dbm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceptionOutcome {
    NotDetected,
    LockedWithError,
    DeliveredToMac,
}

/// Decode outcome for a single reception. `draw` is one uniform [0,1) value.
///
/// Below the lock threshold nothing locks. Within `error_floor_margin_db`
/// above it the decode fails with probability ramping linearly from 1 at the
/// threshold to 0 at threshold + margin; above the band the frame reaches
/// the MAC.
pub fn reception_outcome(
    rx_power_dbm: f64,
    rx_profile: &RadioProfile,
    draw: f64,
) -> ReceptionOutcome {
    if rx_power_dbm < rx_profile.lock_threshold_dbm {
        return ReceptionOutcome::NotDetected;
    }
    let margin = rx_profile.error_floor_margin_db;
    let above = rx_power_dbm - rx_profile.lock_threshold_dbm;
    if margin > 0.0 && above < margin {
        let error_probability = 1.0 - above / margin;
        if draw < error_probability {
            return ReceptionOutcome::LockedWithError;
        }
    }
    ReceptionOutcome::DeliveredToMac
}
