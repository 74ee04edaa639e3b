use crate::error::{Error, Result};

/// Environment variable that overrides the default node budget.
pub const BUDGET_ENV: &str = "FRACTALCONV_BUDGET";

/// Default cap on enumeration sizes (cylinder points, difference vectors,
/// coefficient tuples, enumeration tree nodes).
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Upper bound on the number of elementary units an enumeration may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Reads `FRACTALCONV_BUDGET`, falling back to the default when unset or
    /// unparsable.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Checks `base^exp` against the budget without overflowing.
    pub fn check_power(self, what: &str, base: usize, exp: usize) -> Result<u64> {
        let required = (base as f64).powi(exp as i32);
        self.check(what, required)
    }

    pub fn check(self, what: &str, required: f64) -> Result<u64> {
        if required > self.0 as f64 {
            Err(Error::Budget {
                what: what.to_string(),
                required,
                budget: self.0,
            })
        } else {
            Ok(required as u64)
        }
    }
}
