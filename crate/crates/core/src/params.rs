//! Environment constants for the two-echelon chain.

use thiserror::Error;

use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be non-negative and finite (got {value})")]
    NegativeCost { field: &'static str, value: f64 },
    #[error("{field} must be greater than zero")]
    NotPositive { field: &'static str },
}

/// Which inventory figure the holding-cost and backlog terms of the reward
/// are charged on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HoldingBasis {
    /// Stock left on hand once the day's sales and shipments are done.
    #[default]
    EndOfDay,
    /// Stock available before the day's outflow (opening stock plus receipts).
    Available,
}

/// Prices, costs, capacities and episode limits.
///
/// Index 1 is the retailer, index 2 the factory. The backlog state uses the
/// physical capacities (19/59) while the backlog reward term fires above the
/// separate penalty thresholds (20/60).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnvParams {
    pub sale_price_retailer: f64,
    pub sale_price_factory: f64,
    pub order_cost_retailer: f64,
    pub order_cost_factory: f64,
    pub holding_cost_retailer: f64,
    pub holding_cost_factory: f64,
    pub stockout_cost_retailer: f64,
    pub stockout_cost_factory: f64,
    pub backlog_cost_retailer: f64,
    pub backlog_cost_factory: f64,
    pub capacity_retailer: u32,
    pub capacity_factory: u32,
    pub backlog_penalty_threshold_retailer: u32,
    pub backlog_penalty_threshold_factory: u32,
    pub initial_inventory_retailer: u32,
    pub initial_inventory_factory: u32,
    pub order_max: u32,
    pub episode_length: u32,
    pub max_stockout_events: u32,
    pub holding_basis: HoldingBasis,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            sale_price_retailer: 6.0,
            sale_price_factory: 6.0,
            order_cost_retailer: 6.0,
            order_cost_factory: 0.2,
            holding_cost_retailer: 0.2,
            holding_cost_factory: 0.2,
            stockout_cost_retailer: 140.0,
            stockout_cost_factory: 70.0,
            backlog_cost_retailer: 1.0,
            backlog_cost_factory: 1.0,
            capacity_retailer: 19,
            capacity_factory: 59,
            backlog_penalty_threshold_retailer: 20,
            backlog_penalty_threshold_factory: 60,
            initial_inventory_retailer: 10,
            initial_inventory_factory: 10,
            order_max: 20,
            episode_length: 30,
            max_stockout_events: 6,
            holding_basis: HoldingBasis::EndOfDay,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let costs = [
            ("sale_price_retailer", self.sale_price_retailer),
            ("sale_price_factory", self.sale_price_factory),
            ("order_cost_retailer", self.order_cost_retailer),
            ("order_cost_factory", self.order_cost_factory),
            ("holding_cost_retailer", self.holding_cost_retailer),
            ("holding_cost_factory", self.holding_cost_factory),
            ("stockout_cost_retailer", self.stockout_cost_retailer),
            ("stockout_cost_factory", self.stockout_cost_factory),
            ("backlog_cost_retailer", self.backlog_cost_retailer),
            ("backlog_cost_factory", self.backlog_cost_factory),
        ];
        for (field, value) in costs {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamError::NegativeCost { field, value });
            }
        }
        let positives = [
            ("capacity_retailer", self.capacity_retailer),
            ("capacity_factory", self.capacity_factory),
            ("order_max", self.order_max),
            ("episode_length", self.episode_length),
        ];
        for (field, value) in positives {
            if value == 0 {
                return Err(ParamError::NotPositive { field });
            }
        }
        Ok(())
    }

    pub(crate) fn prices(&self) -> Prices {
        Prices {
            sale_retailer: Money::from_f64(self.sale_price_retailer),
            sale_factory: Money::from_f64(self.sale_price_factory),
            order_retailer: Money::from_f64(self.order_cost_retailer),
            order_factory: Money::from_f64(self.order_cost_factory),
            holding_retailer: Money::from_f64(self.holding_cost_retailer),
            holding_factory: Money::from_f64(self.holding_cost_factory),
            stockout_retailer: Money::from_f64(self.stockout_cost_retailer),
            stockout_factory: Money::from_f64(self.stockout_cost_factory),
            backlog_retailer: Money::from_f64(self.backlog_cost_retailer),
            backlog_factory: Money::from_f64(self.backlog_cost_factory),
        }
    }
}

/// Unit prices rounded once to fixed point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prices {
    pub sale_retailer: Money,
    pub sale_factory: Money,
    pub order_retailer: Money,
    pub order_factory: Money,
    pub holding_retailer: Money,
    pub holding_factory: Money,
    pub stockout_retailer: Money,
    pub stockout_factory: Money,
    pub backlog_retailer: Money,
    pub backlog_factory: Money,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(EnvParams::default().validate(), Ok(()));
    }

    #[test]
    fn zero_capacity_rejected() {
        let params = EnvParams { capacity_retailer: 0, ..EnvParams::default() };
        assert_eq!(params.validate(), Err(ParamError::NotPositive { field: "capacity_retailer" }));
    }

    #[test]
    fn negative_cost_rejected() {
        let params = EnvParams { holding_cost_factory: -0.2, ..EnvParams::default() };
        assert!(matches!(params.validate(), Err(ParamError::NegativeCost { field: "holding_cost_factory", .. })));
        let params = EnvParams { stockout_cost_retailer: f64::NAN, ..EnvParams::default() };
        assert!(params.validate().is_err());
    }
}
