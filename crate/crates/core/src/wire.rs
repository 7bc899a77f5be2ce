//! Fixed-size frame format, encryption and trial decryption.
//!
//! A frame is exactly `F` octets:
//!
//! ```text
//! nonce (16) || AES-256-CTR(key, nonce, len (2, BE) || payload || fingerprint (8) || padding)
//! ```
//!
//! The fingerprint is the first eight octets of `SHA-256(len || payload)`,
//! the same digest that names the message ([`MessageId`]). Padding is random,
//! so without the key the whole frame is indistinguishable from a cover
//! frame of `F` uniform octets. The cipher has no authentication tag; a
//! trial decryption is accepted only if the length field is in range and the
//! recomputed fingerprint matches.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use aes::cipher::{KeyIvInit, StreamCipher};
use rand_core::RngCore;
use sha2::{Digest, Sha256};

use crate::GroupId;

pub const NONCE_LEN: usize = 16;
pub const LEN_FIELD: usize = 2;
pub const FINGERPRINT_LEN: usize = 8;
pub const KEY_LEN: usize = 32;
/// Octets of every frame not available to the payload.
pub const OVERHEAD: usize = NONCE_LEN + LEN_FIELD + FINGERPRINT_LEN;
pub const DEFAULT_FRAME_SIZE: usize = 1024;
pub const MIN_FRAME_SIZE: usize = 64;
/// Largest frame whose maximum payload still fits the 16-bit length field.
pub const MAX_FRAME_SIZE: usize = u16::MAX as usize + OVERHEAD;

type Cipher = ctr::Ctr128BE<aes::Aes256>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("payload of {len} octets exceeds the maximum of {max}")]
    PayloadTooLarge { len: usize, max: usize },
    #[error("frame has {actual} octets, expected {expected}")]
    FrameLength { expected: usize, actual: usize },
    #[error("frame size {0} outside the supported range {MIN_FRAME_SIZE}..={MAX_FRAME_SIZE}")]
    FrameSize(usize),
}

/// An on-air frame: opaque octets of the configured frame size.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frame(pub(crate) Vec<u8>);

impl Frame {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[u8]> for Frame {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame({} octets, ", self.0.len())?;
        for b in self.0.iter().take(8) {
            write!(f, "{b:02x}")?;
        }
        f.write_str("..)")
    }
}

/// Key-independent identity of a message: `SHA-256(len || payload)`.
///
/// Only nodes that decrypted a message can compute it; it never appears on
/// the wire.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageId(pub [u8; 32]);

impl MessageId {
    pub fn fingerprint(&self) -> [u8; FINGERPRINT_LEN] {
        let mut fp = [0u8; FINGERPRINT_LEN];
        fp.copy_from_slice(&self.0[..FINGERPRINT_LEN]);
        fp
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MessageId(")?;
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        f.write_str("..)")
    }
}

fn length_prefix(len: usize) -> [u8; LEN_FIELD] {
    (len as u16).to_be_bytes()
}

fn digest_payload(payload: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(length_prefix(payload.len()));
    hasher.update(payload);
    hasher.finalize().into()
}

/// Computes the identifier of `payload`.
///
/// Payloads longer than `u16::MAX` cannot be framed; their length prefix
/// wraps, so callers validate the size first.
pub fn message_id(payload: &[u8]) -> MessageId {
    MessageId(digest_payload(payload))
}

/// A trust group's symmetric key.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupKey {
    pub group: GroupId,
    key: [u8; KEY_LEN],
}

impl GroupKey {
    pub fn new(group: GroupId, key: [u8; KEY_LEN]) -> Self {
        Self { group, key }
    }

    pub fn generate<R: RngCore + ?Sized>(group: GroupId, rng: &mut R) -> Self {
        let mut key = [0u8; KEY_LEN];
        rng.fill_bytes(&mut key);
        Self { group, key }
    }

    pub fn key_bytes(&self) -> &[u8; KEY_LEN] {
        &self.key
    }

    fn cipher(&self, nonce: &[u8]) -> Cipher {
        let nonce: [u8; NONCE_LEN] = nonce.try_into().expect("nonce length");
        Cipher::new(&self.key.into(), &nonce.into())
    }
}

impl fmt::Debug for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupKey")
            .field("group", &self.group)
            .field("key", &"<redacted>")
            .finish()
    }
}

/// A successfully decrypted message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaintext {
    pub payload: Vec<u8>,
    pub fingerprint: [u8; FINGERPRINT_LEN],
}

impl Plaintext {
    pub fn id(&self) -> MessageId {
        message_id(&self.payload)
    }
}

/// Encodes and decodes frames of one fixed size.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FrameCodec {
    frame_size: usize,
}

impl Default for FrameCodec {
    fn default() -> Self {
        Self {
            frame_size: DEFAULT_FRAME_SIZE,
        }
    }
}

impl FrameCodec {
    pub fn new(frame_size: usize) -> Result<Self, WireError> {
        if !(MIN_FRAME_SIZE..=MAX_FRAME_SIZE).contains(&frame_size) {
            return Err(WireError::FrameSize(frame_size));
        }
        Ok(Self { frame_size })
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn max_payload(&self) -> usize {
        self.frame_size - OVERHEAD
    }

    pub fn check_payload(&self, payload: &[u8]) -> Result<(), WireError> {
        if payload.len() > self.max_payload() {
            return Err(WireError::PayloadTooLarge {
                len: payload.len(),
                max: self.max_payload(),
            });
        }
        Ok(())
    }

    /// Wraps received octets, rejecting anything that is not exactly one frame.
    pub fn frame_from_bytes(&self, bytes: Vec<u8>) -> Result<Frame, WireError> {
        self.check_len(bytes.len())?;
        Ok(Frame(bytes))
    }

    fn check_len(&self, actual: usize) -> Result<(), WireError> {
        if actual != self.frame_size {
            return Err(WireError::FrameLength {
                expected: self.frame_size,
                actual,
            });
        }
        Ok(())
    }

    /// Encrypts `payload` under `key` with a fresh nonce and random padding.
    ///
    /// Originated and forwarded messages both go through this function.
    pub fn encode<R: RngCore + ?Sized>(
        &self,
        payload: &[u8],
        key: &GroupKey,
        rng: &mut R,
    ) -> Result<Frame, WireError> {
        self.check_payload(payload)?;
        let mut bytes = vec![0u8; self.frame_size];
        let (nonce, body) = bytes.split_at_mut(NONCE_LEN);
        rng.fill_bytes(nonce);

        let len = payload.len();
        body[..LEN_FIELD].copy_from_slice(&length_prefix(len));
        body[LEN_FIELD..LEN_FIELD + len].copy_from_slice(payload);
        let fp_start = LEN_FIELD + len;
        body[fp_start..fp_start + FINGERPRINT_LEN]
            .copy_from_slice(&digest_payload(payload)[..FINGERPRINT_LEN]);
        rng.fill_bytes(&mut body[fp_start + FINGERPRINT_LEN..]);

        key.cipher(nonce).apply_keystream(body);
        Ok(Frame(bytes))
    }

    /// A frame of uniformly random octets. Involves no key.
    pub fn cover<R: RngCore + ?Sized>(&self, rng: &mut R) -> Frame {
        let mut bytes = vec![0u8; self.frame_size];
        rng.fill_bytes(&mut bytes);
        Frame(bytes)
    }

    /// Attempts to read `frame` with `key`.
    ///
    /// `Ok(None)` is the ordinary outcome for frames of other groups and for
    /// cover. Only a frame of the wrong size is an error. The length field is
    /// decrypted and range-checked first, so most failed attempts never
    /// decrypt or hash the rest of the frame.
    pub fn try_decrypt(&self, frame: &[u8], key: &GroupKey) -> Result<Option<Plaintext>, WireError> {
        self.check_len(frame.len())?;
        let (nonce, body) = frame.split_at(NONCE_LEN);
        let mut cipher = key.cipher(nonce);

        let mut len_field = [0u8; LEN_FIELD];
        len_field.copy_from_slice(&body[..LEN_FIELD]);
        cipher.apply_keystream(&mut len_field);
        let len = u16::from_be_bytes(len_field) as usize;
        if len > self.max_payload() {
            return Ok(None);
        }

        let mut rest = body[LEN_FIELD..LEN_FIELD + len + FINGERPRINT_LEN].to_vec();
        cipher.apply_keystream(&mut rest);
        let fingerprint: [u8; FINGERPRINT_LEN] = rest[len..].try_into().expect("fingerprint length");
        rest.truncate(len);
        if digest_payload(&rest)[..FINGERPRINT_LEN] != fingerprint {
            return Ok(None);
        }
        Ok(Some(Plaintext {
            payload: rest,
            fingerprint,
        }))
    }
}
