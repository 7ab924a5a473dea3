//! Converse bounds for binary linear codes built from bipartite graphs.
//!
//! Message bits sit on the left of a bipartite graph and parity bits on the
//! right; each parity bit is the XOR of its message neighbours. The whole
//! codeword crosses a memoryless channel that retains, flips or erases every
//! bit independently. This crate provides
//!
//! * [`channel`]: the retain/flip/erase channel with reproducible sampling,
//! * [`codes`]: bipartite codes, XOR encoding, degree and rate statistics,
//! * [`entropy`]: the per-bit residual uncertainty `G(d)` and the Fano lower
//!   bound on block error probability, with brute-force oracles,
//! * [`decoders`]: majority decoding of repetition codes (exact error and
//!   Chernoff bound) and an exhaustive maximum-likelihood decoder,
//! * [`harness`]: Monte Carlo estimation and the batch experiments.

pub mod channel;
pub mod codes;
pub mod decoders;
pub mod entropy;
mod error;
pub mod format;
pub mod harness;

pub use channel::{ChannelParams, NoiseSymbol, ReceivedSymbol, ReceivedWord};
pub use codes::{BipartiteCode, Codeword};
pub use decoders::{DecodeResult, MajorityErrorReport};
pub use entropy::{FanoBound, GTable};
pub use error::{Error, Result};
