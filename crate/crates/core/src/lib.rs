pub mod arith;
pub mod moebius;
pub mod fibred;
pub mod duality;
pub mod highprec;
pub mod transport;
pub mod numlab;
pub mod sampling;
pub mod catalog;
pub mod verify;
pub mod acceptance;
