//! Polar codes and compound polar codes for multi-channels.
//!
//! A compound polar code uses one encoder and one successive cancellation
//! decoder over a set of heterogeneous binary-input sub-channels, such as the
//! bit levels of a BICM constellation. The crate is organised bottom-up:
//!
//! - [`channel`]: exact binary-input DMC tables, Bhattacharyya parameter,
//!   symmetric capacity and the two channel-combining operators.
//! - [`transform`]: GF(2) matrices, the polar butterfly and the compound
//!   transform with its channel assignment.
//! - [`reliability`]: brute-force and closed-form bit-channel synthesis,
//!   genie-aided Monte Carlo estimation and frozen-set selection.
//! - [`decoder`]: LLR-domain successive cancellation, the exhaustive
//!   general-kernel variant and the genie-aided mode.
//! - [`bicm`]: 16-QAM mapping, AWGN, soft demapping and the end-to-end
//!   compound and separated schemes.
//! - [`sim`]: seeded, order-independent Monte Carlo trial engine and
//!   result records.
//! - [`verify`]: the oracle suite behind `cpolar verify`.

pub mod bicm;
pub mod channel;
pub mod decoder;
mod error;
pub mod reliability;
pub mod sim;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
