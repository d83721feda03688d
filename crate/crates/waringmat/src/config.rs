//! Runtime knobs shared by the enumeration and search code.

/// Default cap on the number of matrices any exhaustive routine may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "WARINGMAT_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub budget: u128,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { budget: budget_from_env(), seed: 0 }
    }
}

impl Config {
    pub fn with_seed(seed: u64) -> Self {
        Config { seed, ..Config::default() }
    }
}

/// Budget from the environment, falling back to the default when unset or malformed.
pub fn budget_from_env() -> u128 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u128>().ok())
        .unwrap_or(DEFAULT_BUDGET)
}
