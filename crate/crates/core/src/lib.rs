//! Performance analysis of mixed RF/FSO dual-hop relaying.
//!
//! The first hop is Rayleigh fading with partial relay selection (the m-th
//! worst of M relays, chosen on outdated CSI); the second hop is an optical
//! link with Málaga turbulence, Rayleigh pointing jitter and path loss, under
//! heterodyne (r = 1) or IM/DD (r = 2) detection. Both hops may suffer
//! hardware impairments (aggregate κ model, or a nonlinear relay amplifier).
//!
//! Metrics — outage probability, symbol-error probability and ergodic
//! capacity — come three ways: closed forms built from Meijer-G / Fox-H
//! functions ([`analytics`]), their high-SNR asymptotes, and a Monte-Carlo
//! oracle ([`montecarlo`]).
//!
//! All SNRs are linear; dB appears only at the edges.

pub mod analytics;
pub mod error;
pub mod fso_channel;
pub mod hardware;
pub mod montecarlo;
pub mod quad;
pub mod rf_channel;
pub mod sndr;
pub mod specfun;

pub use error::{Error, Result};

/// 10^{x/10}.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// 10·log₁₀ x.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
