//! Configuration, scenario and cost-record types.

mod bundle;
mod error;
mod params;
mod scenario;
mod synthetic;

pub use bundle::{
    load_scenario, reference_scenario, reference_scenario_dir, write_scenario, MANIFEST_FILE, PRICES_FILE,
};
pub use error::DomainError;
pub use params::{MicrogridParams, ParamSet};
pub use scenario::{CostBreakdown, Scenario};
pub use synthetic::{generate_synthetic, generate_synthetic_with, PriceTiers};
