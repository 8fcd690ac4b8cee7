//! High-SNR asymptotic average error rates over fading channels.
//!
//! The library relates the average error rate of a modulation over a fading
//! channel to the channel CDF near zero: when the CDF varies regularly with
//! exponent `d`, the average error rate at high SNR is a constant multiple
//! of a scaled outage probability, `C1 * F(C2 / rho)`. The crate provides
//!
//! - channel power-gain models with declared variation exponents and
//!   slowly varying factors ([`channels`]),
//! - instantaneous error-rate models classified as pure exponentials,
//!   exponential mixtures, or signed combinations thereof ([`error_models`]),
//! - the asymptote engine plus exact quadrature oracles and bound checks
//!   ([`asymptotics`]),
//! - variation-exponent estimation and the transform-domain consistency
//!   check ([`regvar`]),
//! - MRC/EGC/SC diversity combining composition ([`combining`]),
//! - reproducible conditional-error Monte Carlo ([`montecarlo`]),
//! - the CLI front end used by the `regfade` binary ([`cli`]).

pub mod asymptotics;
pub mod channels;
pub mod cli;
pub mod combining;
pub mod error_models;
pub mod montecarlo;
pub mod numerics;
pub mod regvar;

pub use asymptotics::AsymptoticEstimate;
pub use channels::{ChannelModel, ChannelSpec, PowerGain, VariationExponent};
pub use combining::{CombinedChannel, Scheme};
pub use error_models::{ErrorRateModel, ExpBound, ExpMixture};
pub use montecarlo::{McConfig, McResult};
