pub mod cli;
pub mod density;
pub mod fixtures;
pub mod graph;
pub mod mgfile;
pub mod separation;
pub mod verify;
