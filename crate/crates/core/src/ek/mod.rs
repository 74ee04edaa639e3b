//! Erdős–Kahane machinery.
//!
//! For `|theta| > 1` and a starting point `t`, the real parts of `theta^n t`
//! split as an integer `K_n` plus an error `eps_n`. Four consecutive exact real
//! parts determine `theta` and the next imaginary part ([`reconstruct_theta`]);
//! feeding integers instead gives the estimate `Psi` of `theta` and the
//! predictor of the next integer. When most errors are small the whole integer
//! sequence is pinned down by a few choices, which is what
//! [`enumerate_covers`] counts.

mod calibrate;
mod cover;
mod reconstruct;
mod sequence;
mod translation;

pub use calibrate::{calibrate, random_t, random_theta, Calibration, CalibrationParams};
pub use cover::{
    enumerate_covers, qualifies, soundness_scan, CoverEnumeration, EnumerationParams, SoundnessReport,
};
pub use reconstruct::{g_value, predict_k, psi, reconstruct_theta, theta_ball, CoverBall};
pub use sequence::{ek_sequence, ek_sequence_wide, split_nearest, EkSequence, EXACT_LIMIT, WIDE_LIMIT};
pub use translation::{
    ek_sequence_translation, reconstruct_u, x_next, y_from_x, TranslationEkSequence,
};
