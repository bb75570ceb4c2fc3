//! Limited-lifetime peer identifiers.
//!
//! A certificate is valid from its initial validity time `IVT`. Time after that is
//! cut into incarnations of length `IL`; incarnation `k` covers `(IVT + (k-1)·IL,
//! IVT + k·IL]`, with `IVT` itself belonging to incarnation 1. A peer's identifier
//! in incarnation `k` is a hash of its certificate bytes and `k`, so it changes
//! whenever an incarnation expires.
//!
//! Clocks of correct peers may drift apart by up to the grace window `GW`. A
//! verifier at time `t` therefore accepts the incarnations current at `t - GW/2`
//! and at `t + GW/2`. All times are integer ticks; half windows are handled by
//! doubling so odd `GW` values stay exact.
//!
//! Identifier derivation (`derive_id`): SHA-256 over
//!
//! ```text
//! len(cert) as u64 big-endian || cert bytes || k as u64 big-endian
//! ```
//!
//! truncated to the first `m` bits (`1 <= m <= 256`); unused low bits of the last
//! byte are zero.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Time in abstract integer ticks.
pub type Time = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncarnationParams {
    ivt: Time,
    il: Time,
    gw: Time,
}

impl IncarnationParams {
    /// Requires `il > 0` and `0 <= gw <= il`. The upper bound keeps the two
    /// accepted incarnations adjacent.
    pub fn new(ivt: Time, il: Time, gw: Time) -> Result<Self> {
        let mut problems = Vec::new();
        if il <= 0 {
            problems.push(format!("il must be positive (got {il})"));
        }
        if gw < 0 {
            problems.push(format!("gw must be non-negative (got {gw})"));
        } else if il > 0 && gw > il {
            problems.push(format!("gw must not exceed il (got gw={gw}, il={il})"));
        }
        if problems.is_empty() {
            Ok(IncarnationParams { ivt, il, gw })
        } else {
            Err(Error::InvalidParams(problems))
        }
    }

    pub fn ivt(&self) -> Time {
        self.ivt
    }

    pub fn il(&self) -> Time {
        self.il
    }

    pub fn gw(&self) -> Time {
        self.gw
    }

    /// Clock reading at which incarnation `k` expires.
    pub fn expiry(&self, k: u64) -> Time {
        self.ivt + k as Time * self.il
    }

    /// Incarnation at doubled offset `twice_dt = 2·(t - IVT)`.
    fn incarnation_at_doubled(&self, twice_dt: i128) -> u64 {
        let den = 2 * self.il as i128;
        let k = twice_dt.div_euclid(den) + i128::from(twice_dt.rem_euclid(den) != 0);
        k.max(1) as u64
    }
}

/// `k = ceil((t - IVT) / IL)`, with `t = IVT` giving 1.
pub fn current_incarnation(p: &IncarnationParams, t: Time) -> Result<u64> {
    if t < p.ivt {
        return Err(Error::Domain(format!("time {t} precedes the certificate's validity start {}", p.ivt)));
    }
    Ok(p.incarnation_at_doubled(2 * (t as i128 - p.ivt as i128)))
}

/// Incarnations accepted at local time `t`: those current at `t - GW/2` and `t + GW/2`.
pub fn valid_incarnations(p: &IncarnationParams, t: Time) -> Result<BTreeSet<u64>> {
    let twice_dt = 2 * (t as i128 - p.ivt as i128);
    let gw = p.gw as i128;
    if twice_dt < gw {
        return Err(Error::Domain(format!(
            "time {t} minus half the grace window precedes the validity start {}",
            p.ivt
        )));
    }
    Ok([p.incarnation_at_doubled(twice_dt - gw), p.incarnation_at_doubled(twice_dt + gw)].into_iter().collect())
}

/// Certificate content that identifiers are derived from. Signature checking is
/// left to an [`Authenticity`] implementation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CertificateFields {
    subject: Vec<u8>,
    ivt: Time,
}

impl CertificateFields {
    pub fn new(subject: impl Into<Vec<u8>>, ivt: Time) -> Self {
        CertificateFields { subject: subject.into(), ivt }
    }

    pub fn subject(&self) -> &[u8] {
        &self.subject
    }

    pub fn ivt(&self) -> Time {
        self.ivt
    }

    /// Bytes hashed for incarnation `k`.
    pub fn canonical_encoding(&self, k: u64) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.subject.len());
        out.extend_from_slice(&(self.subject.len() as u64).to_be_bytes());
        out.extend_from_slice(&self.subject);
        out.extend_from_slice(&k.to_be_bytes());
        out
    }
}

/// An `m`-bit identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeerId {
    bits: u16,
    bytes: Vec<u8>,
}

impl PeerId {
    pub fn bits(&self) -> u16 {
        self.bits
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }
}

impl fmt::Debug for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeerId({}:{})", self.bits, self.to_hex())
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub const MAX_ID_BITS: u16 = 256;

/// Identifier of `cert` in incarnation `k`, truncated to `m` bits.
pub fn derive_id(cert: &CertificateFields, k: u64, m: u16) -> Result<PeerId> {
    if k == 0 {
        return Err(Error::Domain("incarnations are numbered from 1".into()));
    }
    if m == 0 || m > MAX_ID_BITS {
        return Err(Error::Domain(format!("id length must be in 1..={MAX_ID_BITS} bits (got {m})")));
    }
    let digest = Sha256::digest(cert.canonical_encoding(k));
    let mut bytes = digest[..usize::from(m).div_ceil(8)].to_vec();
    let spare = bytes.len() * 8 - usize::from(m);
    if let Some(last) = bytes.last_mut() {
        *last &= 0xffu8 << spare;
    }
    Ok(PeerId { bits: m, bytes })
}

/// Decides whether a certificate is genuine. Real deployments check a CA signature.
pub trait Authenticity {
    fn is_authentic(&self, cert: &CertificateFields) -> bool;
}

/// Treats every certificate as genuine.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrustAll;

impl Authenticity for TrustAll {
    fn is_authentic(&self, _: &CertificateFields) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// Accepts `observed` iff it is the identifier of `cert` for one of the
/// incarnations valid at `t`.
pub fn validate_peer_id(observed: &PeerId, cert: &CertificateFields, p: &IncarnationParams, t: Time) -> Verdict {
    validate_peer_id_with(&TrustAll, observed, cert, p, t)
}

pub fn validate_peer_id_with(
    auth: &impl Authenticity,
    observed: &PeerId,
    cert: &CertificateFields,
    p: &IncarnationParams,
    t: Time,
) -> Verdict {
    if !auth.is_authentic(cert) {
        return Verdict::Reject;
    }
    let Ok(valid) = valid_incarnations(p, t) else {
        return Verdict::Reject;
    };
    let hit = valid
        .into_iter()
        .any(|k| derive_id(cert, k, observed.bits).is_ok_and(|id| id == *observed));
    if hit {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}
