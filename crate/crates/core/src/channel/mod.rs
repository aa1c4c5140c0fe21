//! System configuration, geometry and channel generation/composition.

mod compose;
mod config;
mod fading;
mod geometry;
mod topology;

pub use compose::{
    effective_channel_miso, effective_channels, reflect_channel_matrix, unit_phases, ChannelSet, ChannelSetMimo,
    ChannelSetMiso,
};
pub use config::{
    dbm_to_watts, phase_alphabet, Geometry, LinkParams, MimoDims, NoiseSpec, Point3, PowerModel, RicianParams,
    SystemConfig,
};
pub use fading::{
    complex_gaussian, generate_channels, generate_mimo, generate_miso, random_phases, rician_channel, stream_rng,
    Stream,
};
pub use geometry::{
    angles, distance, path_loss, ris_response, steering_ula, steering_upa, ula_towards, upa_grid, upa_towards, D0, T0,
};
pub use topology::{ReflectionTopology, UserPaths};
