//! Undetectable group-mix messaging for wireless delay-tolerant networks.
//!
//! Every node transmits one fixed-size frame per transmission period. A frame
//! is either a message encrypted under one of the node's trust-group keys or
//! uniformly random cover. Frames carry no addresses, counters or group
//! labels, so an observer without the right key sees a constant-rate stream
//! of random blocks. Receivers trial-decrypt every frame with each of their
//! keys, deliver readable messages once and re-encrypt them for every group
//! they belong to, which lets multi-group members bridge messages between
//! groups.
//!
//! The crate is `no_std` (with `alloc`) and is organised bottom-up:
//!
//! - [`wire`]: frame layout, encryption, fingerprints and trial decryption.
//! - [`keyring`]: trust groups and per-node key collections.
//! - [`node`]: the per-node protocol state machine.
//! - [`netsim`]: a deterministic discrete-event world with mobility,
//!   broadcast radio, jamming and garbage emitters, plus a brute-force
//!   contact oracle.
//! - [`adversary`]: passive observers, linking and distinguishing attacks,
//!   anonymity-set computation, social-graph recovery and performance
//!   metrics.
//!
//! All randomness is drawn from named, seeded streams (see [`rng`]), so a
//! scenario and a seed fully determine a run.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod adversary;
pub mod keyring;
pub mod netsim;
pub mod node;
pub mod rng;
pub mod stats;
pub mod wire;

mod ids;

pub use ids::{GroupId, LinkId, NodeId, Tick};
pub use keyring::{build_keyrings, Keyring, KeyringError, TrustGroup};
pub use node::{Node, NodePolicies, Reception, Scheduler, SourceCachePolicy};
pub use wire::{message_id, Frame, FrameCodec, GroupKey, MessageId, Plaintext, WireError};
