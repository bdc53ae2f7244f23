pub mod bounds;
pub mod cli;
pub mod conditions;
pub mod groups;
pub mod io;
pub mod linalg;
pub mod protocol;
pub mod states;
