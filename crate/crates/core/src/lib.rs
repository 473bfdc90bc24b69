pub mod apiface;
pub mod cli;
pub mod classify;
pub mod graphmine;
pub mod model;
pub mod sched;
pub mod simnet;
pub mod store;
pub mod vectorize;
