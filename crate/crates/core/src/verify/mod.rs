//! Numerical co-simulation and random instance generation.

mod generate;
pub mod integrate;

pub use generate::{generate_instance, GeneratedInstance, InstanceSpec};
pub use integrate::{
    cosimulate, cosimulate_full, integrate_linear, integrate_nonlinear, time_grid, ControlSignal, CosimReport,
    Cosimulation, Trajectory,
};
