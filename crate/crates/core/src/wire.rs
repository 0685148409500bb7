//! Datagram wire format and receive-side block assembly.
//!
//! Every datagram starts with a fixed 24-byte big-endian header:
//!
//! ```text
//! magic:u16 = 0x4C4C | version:u8 = 0x01 | kind:u8 | block_id:u32 |
//! symbol_index:u16   | k:u16 | n:u16 | payload_len:u16 | send_timestamp_us:u64
//! ```
//!
//! followed by exactly `payload_len` payload bytes. `kind` distinguishes data
//! symbols (0x00) from feedback messages (0x01). Feedback packets carry a
//! fixed 25-byte payload:
//!
//! ```text
//! measured_rate_bps:u64 | command:u8 | target_rate_bps:u64 | timestamp_us:u64
//! ```
//!
//! Parsing never reads past the supplied buffer and rejects bad magic,
//! unknown version or kind, truncated buffers, and length mismatches.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Constant identifying this protocol in the first two header bytes.
pub const MAGIC: u16 = 0x4C4C;

/// Current protocol version.
pub const VERSION: u8 = 0x01;

/// Fixed header length in bytes.
pub const HEADER_LEN: usize = 24;

/// Exact payload length of a feedback packet.
pub const FEEDBACK_PAYLOAD_LEN: usize = 25;

/// Datagram type carried in the `kind` header field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum PacketKind {
    Data = 0x00,
    Feedback = 0x01,
}

/// Rate-control command carried inside a feedback payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum FeedbackCommand {
    /// No change requested.
    Keep = 0x00,
    /// Lower (or set) the sending rate to `target_rate_bps`.
    SetTarget = 0x01,
    /// Temporarily raise the sending rate to `target_rate_bps`.
    ProbeUp = 0x02,
    /// End the raised phase; return to `target_rate_bps`.
    ProbeDown = 0x03,
    /// Make a previously probed raise permanent at `target_rate_bps`.
    ConfirmIncrease = 0x04,
}

impl FeedbackCommand {
    fn from_u8(value: u8) -> Option<Self> {
        match value {
            0x00 => Some(FeedbackCommand::Keep),
            0x01 => Some(FeedbackCommand::SetTarget),
            0x02 => Some(FeedbackCommand::ProbeUp),
            0x03 => Some(FeedbackCommand::ProbeDown),
            0x04 => Some(FeedbackCommand::ConfirmIncrease),
            _ => None,
        }
    }

    /// Whether a receiver of this command should adopt `target_rate_bps` as
    /// its sending rate. Only `Keep` leaves the rate untouched.
    pub fn sets_rate(&self) -> bool {
        !matches!(self, FeedbackCommand::Keep)
    }
}

/// One datagram: header fields plus payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WirePacket {
    pub kind: PacketKind,
    pub block_id: u32,
    pub symbol_index: u16,
    pub k: u16,
    pub n: u16,
    pub send_timestamp_us: u64,
    pub payload: Vec<u8>,
}

/// Decoded contents of a feedback payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeedbackMessage {
    pub measured_rate_bps: u64,
    pub command: FeedbackCommand,
    pub target_rate_bps: u64,
    pub timestamp_us: u64,
}

/// Errors from serialization, parsing, and block assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WireError {
    /// First two bytes were not [`MAGIC`].
    BadMagic { got: u16 },
    /// Unknown protocol version.
    BadVersion { got: u8 },
    /// Unknown packet kind.
    BadKind { got: u8 },
    /// Buffer ended before the advertised length.
    Truncated { needed: usize, got: usize },
    /// Buffer continues past the advertised payload length.
    TrailingBytes { expected: usize, got: usize },
    /// Payload cannot be described by the 16-bit length field.
    PayloadTooLong { len: usize },
    /// Feedback payload length or command byte is malformed.
    BadFeedback,
}

impl core::fmt::Display for WireError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WireError::BadMagic { got } => write!(f, "bad magic 0x{got:04X}"),
            WireError::BadVersion { got } => write!(f, "unsupported version {got}"),
            WireError::BadKind { got } => write!(f, "unknown packet kind {got}"),
            WireError::Truncated { needed, got } => {
                write!(f, "truncated packet: need {needed} bytes, have {got}")
            }
            WireError::TrailingBytes { expected, got } => {
                write!(f, "datagram of {got} bytes exceeds declared {expected}")
            }
            WireError::PayloadTooLong { len } => {
                write!(f, "payload of {len} bytes exceeds the 16-bit length field")
            }
            WireError::BadFeedback => write!(f, "malformed feedback payload"),
        }
    }
}

impl core::error::Error for WireError {}

impl WirePacket {
    /// Convenience constructor for a data symbol packet.
    pub fn data(
        block_id: u32,
        symbol_index: u16,
        k: u16,
        n: u16,
        send_timestamp_us: u64,
        payload: Vec<u8>,
    ) -> Self {
        WirePacket {
            kind: PacketKind::Data,
            block_id,
            symbol_index,
            k,
            n,
            send_timestamp_us,
            payload,
        }
    }

    /// Wraps a feedback message into a packet.
    pub fn feedback(message: &FeedbackMessage, send_timestamp_us: u64) -> Self {
        WirePacket {
            kind: PacketKind::Feedback,
            block_id: 0,
            symbol_index: 0,
            k: 0,
            n: 0,
            send_timestamp_us,
            payload: message.to_payload().to_vec(),
        }
    }

    /// Serializes header plus payload, big-endian throughout.
    pub fn serialize(&self) -> Result<Vec<u8>, WireError> {
        if self.payload.len() > u16::MAX as usize {
            return Err(WireError::PayloadTooLong { len: self.payload.len() });
        }
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC.to_be_bytes());
        out.push(VERSION);
        out.push(self.kind as u8);
        out.extend_from_slice(&self.block_id.to_be_bytes());
        out.extend_from_slice(&self.symbol_index.to_be_bytes());
        out.extend_from_slice(&self.k.to_be_bytes());
        out.extend_from_slice(&self.n.to_be_bytes());
        out.extend_from_slice(&(self.payload.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.send_timestamp_us.to_be_bytes());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Parses one datagram. The buffer must contain exactly one packet.
    pub fn parse(buf: &[u8]) -> Result<WirePacket, WireError> {
        if buf.len() < HEADER_LEN {
            return Err(WireError::Truncated { needed: HEADER_LEN, got: buf.len() });
        }
        let magic = u16::from_be_bytes([buf[0], buf[1]]);
        if magic != MAGIC {
            return Err(WireError::BadMagic { got: magic });
        }
        if buf[2] != VERSION {
            return Err(WireError::BadVersion { got: buf[2] });
        }
        let kind = match buf[3] {
            0x00 => PacketKind::Data,
            0x01 => PacketKind::Feedback,
            other => return Err(WireError::BadKind { got: other }),
        };
        let block_id = u32::from_be_bytes([buf[4], buf[5], buf[6], buf[7]]);
        let symbol_index = u16::from_be_bytes([buf[8], buf[9]]);
        let k = u16::from_be_bytes([buf[10], buf[11]]);
        let n = u16::from_be_bytes([buf[12], buf[13]]);
        let payload_len = u16::from_be_bytes([buf[14], buf[15]]) as usize;
        let send_timestamp_us = u64::from_be_bytes([
            buf[16], buf[17], buf[18], buf[19], buf[20], buf[21], buf[22], buf[23],
        ]);
        let total = HEADER_LEN + payload_len;
        if buf.len() < total {
            return Err(WireError::Truncated { needed: total, got: buf.len() });
        }
        if buf.len() > total {
            return Err(WireError::TrailingBytes { expected: total, got: buf.len() });
        }
        Ok(WirePacket {
            kind,
            block_id,
            symbol_index,
            k,
            n,
            send_timestamp_us,
            payload: buf[HEADER_LEN..].to_vec(),
        })
    }
}

impl FeedbackMessage {
    /// Serializes into the fixed 25-byte feedback payload.
    pub fn to_payload(&self) -> [u8; FEEDBACK_PAYLOAD_LEN] {
        let mut out = [0u8; FEEDBACK_PAYLOAD_LEN];
        out[0..8].copy_from_slice(&self.measured_rate_bps.to_be_bytes());
        out[8] = self.command as u8;
        out[9..17].copy_from_slice(&self.target_rate_bps.to_be_bytes());
        out[17..25].copy_from_slice(&self.timestamp_us.to_be_bytes());
        out
    }

    /// Parses a feedback payload of exactly [`FEEDBACK_PAYLOAD_LEN`] bytes.
    pub fn from_payload(buf: &[u8]) -> Result<FeedbackMessage, WireError> {
        if buf.len() != FEEDBACK_PAYLOAD_LEN {
            return Err(WireError::BadFeedback);
        }
        let measured_rate_bps = u64::from_be_bytes(buf[0..8].try_into().unwrap());
        let command = FeedbackCommand::from_u8(buf[8]).ok_or(WireError::BadFeedback)?;
        let target_rate_bps = u64::from_be_bytes(buf[9..17].try_into().unwrap());
        let timestamp_us = u64::from_be_bytes(buf[17..25].try_into().unwrap());
        Ok(FeedbackMessage {
            measured_rate_bps,
            command,
            target_rate_bps,
            timestamp_us,
        })
    }
}

/// Errors raised while assembling blocks from received symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssemblyError {
    /// `k` or `n` from the wire violate `1 <= k <= n <= 255`.
    InvalidGeometry { k: u16, n: u16 },
    /// Symbol index is outside `[0, n)`.
    IndexOutOfRange { index: u16, n: u16 },
    /// A later packet disagrees with the block's established `k`/`n`.
    GeometryMismatch { block_id: u32 },
    /// A later payload length disagrees with the block's symbol length.
    SymbolLength { expected: usize, got: usize },
}

impl core::fmt::Display for AssemblyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AssemblyError::InvalidGeometry { k, n } => {
                write!(f, "invalid block geometry k={k} n={n}")
            }
            AssemblyError::IndexOutOfRange { index, n } => {
                write!(f, "symbol index {index} outside block of {n} symbols")
            }
            AssemblyError::GeometryMismatch { block_id } => {
                write!(f, "conflicting geometry for block {block_id}")
            }
            AssemblyError::SymbolLength { expected, got } => {
                write!(f, "symbol length {got} does not match block's {expected}")
            }
        }
    }
}

impl core::error::Error for AssemblyError {}

/// Outcome of inserting one symbol into an assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Counted; block still needs more symbols.
    Pending,
    /// This symbol completed the block.
    Ready,
    /// Same index seen before; ignored.
    Duplicate,
    /// Block already complete; symbol discarded.
    Late,
}

/// Collects the symbols of a single block until `k` distinct ones arrived.
#[derive(Clone, Debug)]
pub struct BlockAssembly {
    block_id: u32,
    k: u16,
    n: u16,
    symbol_len: usize,
    send_timestamp_us: u64,
    first_arrival_us: u64,
    ready_at_us: Option<u64>,
    received: BTreeMap<u16, Vec<u8>>,
}

impl BlockAssembly {
    /// Starts an assembly from the first symbol of a block.
    pub fn new(
        block_id: u32,
        k: u16,
        n: u16,
        send_timestamp_us: u64,
        first_arrival_us: u64,
    ) -> Result<Self, AssemblyError> {
        if k == 0 || n < k || n > 255 {
            return Err(AssemblyError::InvalidGeometry { k, n });
        }
        Ok(BlockAssembly {
            block_id,
            k,
            n,
            symbol_len: 0,
            send_timestamp_us,
            first_arrival_us,
            ready_at_us: None,
            received: BTreeMap::new(),
        })
    }

    pub fn block_id(&self) -> u32 {
        self.block_id
    }

    pub fn k(&self) -> u16 {
        self.k
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    /// Timestamp the sender stamped on this block's symbols.
    pub fn send_timestamp_us(&self) -> u64 {
        self.send_timestamp_us
    }

    /// Arrival time of the first symbol; basis for incomplete-block eviction.
    pub fn first_arrival_us(&self) -> u64 {
        self.first_arrival_us
    }

    /// Arrival time of the k-th distinct symbol, once reached.
    pub fn ready_at_us(&self) -> Option<u64> {
        self.ready_at_us
    }

    /// Number of distinct symbols held.
    pub fn distinct_symbols(&self) -> usize {
        self.received.len()
    }

    /// Inserts one symbol observed at `now_us`.
    pub fn insert(
        &mut self,
        symbol_index: u16,
        payload: &[u8],
        now_us: u64,
    ) -> Result<InsertOutcome, AssemblyError> {
        if symbol_index >= self.n {
            return Err(AssemblyError::IndexOutOfRange { index: symbol_index, n: self.n });
        }
        if self.ready_at_us.is_some() {
            return Ok(InsertOutcome::Late);
        }
        if self.received.is_empty() {
            self.symbol_len = payload.len();
        } else if payload.len() != self.symbol_len {
            return Err(AssemblyError::SymbolLength {
                expected: self.symbol_len,
                got: payload.len(),
            });
        }
        if self.received.contains_key(&symbol_index) {
            return Ok(InsertOutcome::Duplicate);
        }
        self.received.insert(symbol_index, payload.to_vec());
        if self.received.len() >= self.k as usize {
            self.ready_at_us = Some(now_us);
            return Ok(InsertOutcome::Ready);
        }
        Ok(InsertOutcome::Pending)
    }

    /// Borrowed views of the held symbols, ascending by index, in the shape
    /// the decoder consumes.
    pub fn symbol_views(&self) -> Vec<(u16, &[u8])> {
        self.received
            .iter()
            .map(|(&index, payload)| (index, payload.as_slice()))
            .collect()
    }
}

/// Tracks many in-flight blocks, evicting stale state.
///
/// Completed blocks leave a payload-free tombstone so that straggler symbols
/// are recognized as late instead of reopening the block. Incomplete blocks
/// and tombstones are dropped `timeout_us` after their first arrival, which
/// bounds memory to the traffic of one timeout window.
#[derive(Debug)]
pub struct BlockTracker {
    timeout_us: u64,
    pending: BTreeMap<u32, BlockAssembly>,
    completed: BTreeMap<u32, u64>,
}

/// Default time after which an incomplete block is abandoned.
pub const DEFAULT_BLOCK_TIMEOUT_US: u64 = 2_000_000;

impl BlockTracker {
    pub fn new(timeout_us: u64) -> Self {
        BlockTracker {
            timeout_us,
            pending: BTreeMap::new(),
            completed: BTreeMap::new(),
        }
    }

    /// Number of blocks currently awaiting completion.
    pub fn pending_blocks(&self) -> usize {
        self.pending.len()
    }

    /// Routes one data packet into its block assembly.
    ///
    /// Returns the completed [`BlockAssembly`] when this packet supplies the
    /// k-th distinct symbol.
    pub fn insert(
        &mut self,
        packet: &WirePacket,
        now_us: u64,
    ) -> Result<Option<BlockAssembly>, AssemblyError> {
        if self.completed.contains_key(&packet.block_id) {
            return Ok(None);
        }
        match self.pending.get(&packet.block_id) {
            Some(existing) => {
                if existing.k != packet.k || existing.n != packet.n {
                    return Err(AssemblyError::GeometryMismatch { block_id: packet.block_id });
                }
            }
            None => {
                let fresh = BlockAssembly::new(
                    packet.block_id,
                    packet.k,
                    packet.n,
                    packet.send_timestamp_us,
                    now_us,
                )?;
                self.pending.insert(packet.block_id, fresh);
            }
        }
        let assembly = self.pending.get_mut(&packet.block_id).expect("just ensured");
        match assembly.insert(packet.symbol_index, &packet.payload, now_us)? {
            InsertOutcome::Ready => {
                let done = self.pending.remove(&packet.block_id).expect("present");
                self.completed.insert(packet.block_id, now_us);
                Ok(Some(done))
            }
            _ => Ok(None),
        }
    }

    /// Drops state older than the timeout; returns ids of incomplete blocks
    /// abandoned by this sweep, ascending.
    pub fn evict_expired(&mut self, now_us: u64) -> Vec<u32> {
        let deadline = now_us.saturating_sub(self.timeout_us);
        let expired: Vec<u32> = self
            .pending
            .iter()
            .filter(|(_, a)| a.first_arrival_us <= deadline)
            .map(|(&id, _)| id)
            .collect();
        for id in &expired {
            self.pending.remove(id);
        }
        let stale: Vec<u32> = self
            .completed
            .iter()
            .filter(|(_, &t)| t <= deadline)
            .map(|(&id, _)| id)
            .collect();
        for id in stale {
            self.completed.remove(&id);
        }
        expired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_packet() -> WirePacket {
        WirePacket::data(42, 3, 4, 7, 1_234_567_890_123, vec![0xDE, 0xAD, 0xBE, 0xEF])
    }

    #[test]
    fn header_layout_is_fixed_and_big_endian() {
        let bytes = sample_packet().serialize().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 4);
        assert_eq!(&bytes[0..2], &[0x4C, 0x4C]);
        assert_eq!(bytes[2], 0x01);
        assert_eq!(bytes[3], 0x00);
        assert_eq!(&bytes[4..8], &42u32.to_be_bytes());
        assert_eq!(&bytes[8..10], &3u16.to_be_bytes());
        assert_eq!(&bytes[10..12], &4u16.to_be_bytes());
        assert_eq!(&bytes[12..14], &7u16.to_be_bytes());
        assert_eq!(&bytes[14..16], &4u16.to_be_bytes());
        assert_eq!(&bytes[16..24], &1_234_567_890_123u64.to_be_bytes());
        assert_eq!(&bytes[24..], &[0xDE, 0xAD, 0xBE, 0xEF]);
    }

    #[test]
    fn round_trip_preserves_all_fields() {
        let packet = sample_packet();
        let parsed = WirePacket::parse(&packet.serialize().unwrap()).unwrap();
        assert_eq!(parsed, packet);

        let empty = WirePacket::data(0, 0, 1, 1, 0, Vec::new());
        let bytes = empty.serialize().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(WirePacket::parse(&bytes).unwrap(), empty);
    }

    #[test]
    fn parse_rejects_corruption() {
        let good = sample_packet().serialize().unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = 0xFF;
        assert_eq!(
            WirePacket::parse(&bad_magic),
            Err(WireError::BadMagic { got: 0xFF4C })
        );

        let mut bad_version = good.clone();
        bad_version[2] = 0x02;
        assert_eq!(
            WirePacket::parse(&bad_version),
            Err(WireError::BadVersion { got: 2 })
        );

        let mut bad_kind = good.clone();
        bad_kind[3] = 0x07;
        assert_eq!(WirePacket::parse(&bad_kind), Err(WireError::BadKind { got: 7 }));

        // Header claims more payload than present.
        let mut short = good.clone();
        short[15] = 100;
        assert_eq!(
            WirePacket::parse(&short),
            Err(WireError::Truncated { needed: HEADER_LEN + 100, got: good.len() })
        );

        // Buffer cut inside the header.
        assert_eq!(
            WirePacket::parse(&good[..10]),
            Err(WireError::Truncated { needed: HEADER_LEN, got: 10 })
        );

        // Extra bytes after the payload.
        let mut long = good.clone();
        long.push(0);
        assert_eq!(
            WirePacket::parse(&long),
            Err(WireError::TrailingBytes { expected: good.len(), got: good.len() + 1 })
        );
    }

    #[test]
    fn oversized_payload_is_rejected_at_serialization() {
        let mut packet = sample_packet();
        packet.payload = vec![0; u16::MAX as usize + 1];
        assert_eq!(
            packet.serialize(),
            Err(WireError::PayloadTooLong { len: u16::MAX as usize + 1 })
        );
    }

    #[test]
    fn feedback_round_trip() {
        let message = FeedbackMessage {
            measured_rate_bps: 937_500,
            command: FeedbackCommand::ProbeUp,
            target_rate_bps: 1_100_000,
            timestamp_us: 55_000_000,
        };
        let packet = WirePacket::feedback(&message, 55_000_100);
        let bytes = packet.serialize().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + FEEDBACK_PAYLOAD_LEN);
        let parsed = WirePacket::parse(&bytes).unwrap();
        assert_eq!(parsed.kind, PacketKind::Feedback);
        assert_eq!(FeedbackMessage::from_payload(&parsed.payload).unwrap(), message);

        assert_eq!(
            FeedbackMessage::from_payload(&parsed.payload[..10]),
            Err(WireError::BadFeedback)
        );
        let mut bad_command = parsed.payload.clone();
        bad_command[8] = 0x09;
        assert_eq!(FeedbackMessage::from_payload(&bad_command), Err(WireError::BadFeedback));
    }

    #[test]
    fn assembly_becomes_ready_at_kth_distinct_symbol() {
        let mut assembly = BlockAssembly::new(42, 2, 3, 5, 10).unwrap();
        assert_eq!(assembly.insert(0, &[1, 2], 10).unwrap(), InsertOutcome::Pending);
        assert_eq!(assembly.ready_at_us(), None);
        // Duplicate does not advance readiness.
        assert_eq!(assembly.insert(0, &[1, 2], 20).unwrap(), InsertOutcome::Duplicate);
        assert_eq!(assembly.insert(1, &[3, 4], 30).unwrap(), InsertOutcome::Ready);
        assert_eq!(assembly.ready_at_us(), Some(30));
        // Signals after readiness are discarded.
        assert_eq!(assembly.insert(2, &[5, 6], 40).unwrap(), InsertOutcome::Late);
        assert_eq!(assembly.distinct_symbols(), 2);
        assert_eq!(
            assembly.symbol_views(),
            vec![(0u16, &[1u8, 2][..]), (1u16, &[3u8, 4][..])]
        );
    }

    #[test]
    fn assembly_validates_input() {
        assert!(BlockAssembly::new(1, 0, 1, 0, 0).is_err());
        assert!(BlockAssembly::new(1, 4, 3, 0, 0).is_err());
        assert!(BlockAssembly::new(1, 1, 256, 0, 0).is_err());

        let mut assembly = BlockAssembly::new(7, 2, 4, 0, 0).unwrap();
        assert_eq!(
            assembly.insert(4, &[0], 1),
            Err(AssemblyError::IndexOutOfRange { index: 4, n: 4 })
        );
        assembly.insert(0, &[0, 1], 1).unwrap();
        assert_eq!(
            assembly.insert(1, &[0], 2),
            Err(AssemblyError::SymbolLength { expected: 2, got: 1 })
        );
    }

    #[test]
    fn tracker_completes_and_rejects_stragglers() {
        let mut tracker = BlockTracker::new(DEFAULT_BLOCK_TIMEOUT_US);
        let p0 = WirePacket::data(1, 0, 2, 3, 100, vec![1, 2]);
        let p1 = WirePacket::data(1, 2, 2, 3, 100, vec![5, 6]);
        let p2 = WirePacket::data(1, 1, 2, 3, 100, vec![3, 4]);

        assert!(tracker.insert(&p0, 150).unwrap().is_none());
        let done = tracker.insert(&p1, 160).unwrap().expect("block complete");
        assert_eq!(done.block_id(), 1);
        assert_eq!(done.ready_at_us(), Some(160));
        assert_eq!(done.send_timestamp_us(), 100);
        // Straggler for a completed block is swallowed, not reopened.
        assert!(tracker.insert(&p2, 170).unwrap().is_none());
        assert_eq!(tracker.pending_blocks(), 0);
    }

    #[test]
    fn tracker_rejects_geometry_conflicts() {
        let mut tracker = BlockTracker::new(DEFAULT_BLOCK_TIMEOUT_US);
        let p0 = WirePacket::data(9, 0, 2, 3, 0, vec![1]);
        let mut p1 = WirePacket::data(9, 1, 2, 4, 0, vec![2]);
        tracker.insert(&p0, 10).unwrap();
        assert_eq!(
            tracker.insert(&p1, 20),
            Err(AssemblyError::GeometryMismatch { block_id: 9 })
        );
        p1.n = 3;
        assert!(tracker.insert(&p1, 30).unwrap().is_some());
    }

    #[test]
    fn tracker_evicts_stale_blocks() {
        let mut tracker = BlockTracker::new(2_000_000);
        let p = WirePacket::data(5, 0, 2, 3, 0, vec![1]);
        tracker.insert(&p, 1_000_000).unwrap();
        // Not yet stale.
        assert!(tracker.evict_expired(2_999_999).is_empty());
        assert_eq!(tracker.pending_blocks(), 1);
        // Two seconds after first arrival the block is abandoned.
        assert_eq!(tracker.evict_expired(3_000_000), vec![5]);
        assert_eq!(tracker.pending_blocks(), 0);
        // The same block id arriving again opens a fresh assembly.
        assert!(tracker.insert(&p, 3_500_000).unwrap().is_none());
        assert_eq!(tracker.pending_blocks(), 1);
    }
}
