//! The two successive-approximation schemes and their monitors.

mod config;
mod integrator;
mod monitor;
mod picard;
mod presets;
mod recipe;
mod run;
mod terms;

pub use config::{Regime, SchemeConfig};
pub use integrator::{dissipation_rates, phi1, velocity_substep, Propagator};
pub use monitor::{
    difference_norm, dissipation_constant, dissipation_profile, joint_besov, joint_chemin_lerner,
    monitor_y, y_radius, YBound, YMembershipReport,
};
pub use picard::{
    initial_iterate, picard_step, picard_step_ge1, picard_step_lt1, truncate_initial, IterateState,
    DIVERGENCE_FACTOR,
};
pub use presets::{preset_fields, Preset};
pub use recipe::{choose_horizon, linear_heat_norms, HorizonChoice};
pub use run::{
    fit_geometric_decay, run_picard, write_iteration_csv, write_y_csv, DecayFit, IterationRecord,
    PicardRun, RunOptions, ROUNDING_FLOOR,
};
pub use terms::{
    aprior_term_report, measure_constant, term_report_at, Levels, MeasuredConstant, RateCheck,
    TermReport,
};
