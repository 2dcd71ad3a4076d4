//! Stable 64-bit state identity.
//!
//! The canonical serialization of a session state is
//!
//! ```text
//! "GBS1" | level: u32 LE | state_version: u16 LE | len: u32 LE | state bytes | frame cells (4096)
//! ```
//!
//! hashed with XXH3-64 (seed 0). The hash is a published, platform
//! independent function, so digests are comparable across builds and hosts.

use std::fmt;
use std::str::FromStr;

use xxhash_rust::xxh3::Xxh3;

use crate::frame::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateDigest(pub u64);

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for StateDigest {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(StateDigest)
    }
}

const TAG: &[u8; 4] = b"GBS1";

/// Writes the canonical serialization into `out` (cleared first).
pub fn canonical_bytes(out: &mut Vec<u8>, level: u32, state_version: u16, state: &[u8], frame: &Frame) {
    out.clear();
    out.extend_from_slice(TAG);
    out.extend_from_slice(&level.to_le_bytes());
    out.extend_from_slice(&state_version.to_le_bytes());
    out.extend_from_slice(&(state.len() as u32).to_le_bytes());
    out.extend_from_slice(state);
    out.extend_from_slice(frame.as_bytes());
}

pub fn state_digest(level: u32, state_version: u16, state: &[u8], frame: &Frame) -> StateDigest {
    let mut h = Xxh3::new();
    h.update(TAG);
    h.update(&level.to_le_bytes());
    h.update(&state_version.to_le_bytes());
    h.update(&(state.len() as u32).to_le_bytes());
    h.update(state);
    h.update(frame.as_bytes());
    StateDigest(h.digest())
}

pub fn frame_digest(frame: &Frame) -> u64 {
    xxhash_rust::xxh3::xxh3_64(frame.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streaming_matches_canonical_bytes() {
        let frame = Frame::filled(7);
        let mut buf = Vec::new();
        canonical_bytes(&mut buf, 3, 1, &[1, 2, 3], &frame);
        assert_eq!(
            state_digest(3, 1, &[1, 2, 3], &frame).0,
            xxhash_rust::xxh3::xxh3_64(&buf)
        );
    }

    #[test]
    fn every_component_matters() {
        let f = Frame::filled(0);
        let base = state_digest(1, 1, &[0], &f);
        assert_ne!(base, state_digest(2, 1, &[0], &f));
        assert_ne!(base, state_digest(1, 2, &[0], &f));
        assert_ne!(base, state_digest(1, 1, &[1], &f));
        assert_ne!(base, state_digest(1, 1, &[0], &Frame::filled(1)));
    }

    #[test]
    fn hex_round_trip() {
        let d = StateDigest(0x00ab_cdef_0123_4567);
        assert_eq!(d.to_string(), "00abcdef01234567");
        assert_eq!(d.to_string().parse::<StateDigest>().unwrap(), d);
    }
}
