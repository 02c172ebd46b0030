//! Frequency-domain analysis and integrated gain-schedule / bending-filter
//! design for the pitch autopilot of a flexible liquid-propellant rocket.

pub mod avionics;
pub mod control;
pub mod lti;
pub mod vehicle;
pub mod loop_analysis;
pub mod designer;
pub mod cli;
