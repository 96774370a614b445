pub mod beliefs;
pub mod corpus;
pub mod io;
pub mod learn;
pub mod linalg;
pub mod synth;
pub mod tasks;
pub mod textfeat;
