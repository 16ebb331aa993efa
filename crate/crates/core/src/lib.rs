//! Simulator and protocol library for the sleeping model of distributed
//! computing, where vertices pay only for the rounds they spend awake.

pub mod congest;
pub mod construct;
pub mod fast;
pub mod graph;
pub mod olocal;
pub mod sim;
