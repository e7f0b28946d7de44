use crate::error::{Error, Result};

/// Upper bound on elementary operations an enumerating call may perform.
///
/// Costs are estimated before any work starts; a call whose estimate exceeds
/// the budget is refused with [`Error::BudgetExceeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_ops: u128,
}

impl Budget {
    pub const DEFAULT_OPS: u128 = 100_000_000;

    pub fn new(max_ops: u128) -> Self {
        assert!(max_ops >= 1, "budget must be at least 1");
        Budget { max_ops }
    }

    pub fn unlimited() -> Self {
        Budget { max_ops: u128::MAX }
    }

    pub fn max_ops(&self) -> u128 {
        self.max_ops
    }

    /// Refuses when `estimated_cost` exceeds the budget. `group_size` is
    /// carried into the error for reporting.
    pub fn check(&self, estimated_cost: u128, group_size: u128) -> Result<()> {
        if estimated_cost > self.max_ops {
            Err(Error::BudgetExceeded {
                estimated_cost,
                budget: self.max_ops,
                group_size,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_OPS)
    }
}

/// `a * b`, saturating at `u128::MAX`; cost estimates only need to compare.
pub(crate) fn cost_mul(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}
