pub mod analysis;
pub mod concrete_gen;
pub mod fixtures;
pub mod geometry;
pub mod logical_gen;
pub mod pipeline;
pub mod provenance;
pub mod road_model;
pub mod sim;
