//! Ground control service and command line front end.

pub mod client;
pub mod service;
