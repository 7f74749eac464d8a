pub mod builder;
pub mod cli;
pub mod dense;
pub mod gen;
pub mod kernel;
pub mod ordinal;
pub mod verify;
