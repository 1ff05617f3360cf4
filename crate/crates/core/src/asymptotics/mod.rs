//! Limiting distributions under the null and local alternatives: path
//! simulation, limit functionals, critical value tabulation, `c̄`
//! calibration and local asymptotic power.

mod calibrate;
mod limits;
mod paths;
mod power;
mod table;
mod tabulate;

pub use calibrate::{calibrate_cbar, table_cbar, CbarCalibration, CBAR_LOWER, CBAR_STEP};
pub use limits::{limit_competitor_draw, limit_draws, limit_functionals, limit_vr_draw, LimitDraw};
pub use paths::{build_paths, detrend_path, gls_path, simulate_paths, Innovations, LimitSpec, PathBundle};
pub use power::{local_power_curve, local_power_curves, PowerDesign};
pub use table::{format_sig5, CriticalValues, QuantileTable, TableKey};
pub use tabulate::{tabulate, tabulate_critical_values, Tabulation, TabulationRequest, DEFAULT_LEVELS};
