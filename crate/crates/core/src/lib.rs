//! Secret-key rates of continuous-variable QKD with coherent states over
//! fading lossy channels: one-way reverse reconciliation, the
//! measurement-device-independent (MDI) relay, and a three-user network
//! relay, each under fast and slow uniform fading.

pub mod channel;
pub mod error;
pub mod gaussian;
pub mod net3;
pub mod numerics;
pub mod oneway;
pub mod mdi;
pub mod rate;

pub use channel::{Anchor, AttackModel, FadingModel};
pub use error::{Error, Result};
pub use rate::{FadingMode, MuOptimum, PointStatus, RatePoint};
