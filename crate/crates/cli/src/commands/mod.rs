pub mod beta;
pub mod radial;
pub mod solve;
pub mod symmetrize;
pub mod verify;
