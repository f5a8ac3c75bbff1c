pub mod clock;
pub mod cosmo;
pub mod network;
pub mod tunnel;
