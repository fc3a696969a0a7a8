//! Rate-distortion-classification (RDC) and rate-perception-classification
//! (RPC) tradeoffs for binary and scalar Gaussian sources.
//!
//! The crate has four layers:
//!
//! * [`entropy`], [`quadrature`] and [`optimize`]: scalar primitives.
//! * [`sources`] and [`channel`]: source and reconstruction models.
//! * [`closed_form`]: exact tradeoff functions with witnesses, and
//!   [`oracle`]: brute-force minimization used to check them.
//! * [`restoration`] and [`rpc_given_d`]: the denoising toy model and the
//!   distortion-pinned perception/classification scan.
//!
//! Binary quantities are in bits, Gaussian ones in nats.

// Domain checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod closed_form;
pub mod entropy;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod restoration;
pub mod rpc_given_d;
mod serde_ext;
pub mod sources;

pub use channel::{BinaryChannel, GaussianReconstruction, Witness};
pub use closed_form::{Region, TradeoffPoint};
pub use entropy::{EntropyValue, Probability, Unit};
pub use error::{Error, Result};
pub use serde_ext::{ext_f64, ext_f64_opt};
pub use sources::{BinaryPairSource, GaussianMixture2, GaussianPairSource};
