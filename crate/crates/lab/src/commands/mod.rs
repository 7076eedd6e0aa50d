pub mod optimal;
pub mod rate;
pub mod simulate;
pub mod stability;
pub mod stationary;
pub mod verify;
