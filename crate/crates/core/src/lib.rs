pub mod netlist;
pub mod parser;
pub mod sim;
pub mod metrics;
pub mod boolopt;
pub mod knowledge;
pub mod bench;
pub mod orchestrator;
