//! Multi-link packet scheduling by anticipated transmission end time.
//!
//! Each link tracks the time at which everything already queued on it will
//! have left the sender, assuming transmission at the link's current rate. A
//! new packet goes to the link that would finish it first — which is the link
//! with the earliest anticipated end time — and that link's end time advances
//! by the packet's serialization time. Over a long stream this splits bytes
//! across links in proportion to their rates, without any per-link queues or
//! explicit weights.

use alloc::vec::Vec;

/// Per-link bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkState {
    pub link_id: u32,
    pub rate_bps: u64,
    pub anticipated_end_us: u64,
}

/// Scheduling errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchedError {
    /// The scheduler was built with, or reduced to, no links.
    NoLinks,
    /// A rate of zero cannot serialize any packet.
    InvalidRate { link_id: u32 },
    /// `update_rate` addressed a link that does not exist.
    UnknownLink { link_id: u32 },
}

impl core::fmt::Display for SchedError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SchedError::NoLinks => write!(f, "no links configured"),
            SchedError::InvalidRate { link_id } => {
                write!(f, "rate for link {link_id} must be positive")
            }
            SchedError::UnknownLink { link_id } => write!(f, "unknown link {link_id}"),
        }
    }
}

impl core::error::Error for SchedError {}

/// Result of assigning one packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub link_id: u32,
    /// When the link starts serializing this packet.
    pub tx_start_us: u64,
    /// When the packet has fully left the sender; equals the link's new
    /// anticipated end time.
    pub tx_end_us: u64,
}

/// Anticipated-end-time scheduler over a fixed set of links.
#[derive(Clone, Debug)]
pub struct Scheduler {
    links: Vec<LinkState>,
}

impl Scheduler {
    /// Builds a scheduler; link ids are assigned in order from zero.
    pub fn new<I: IntoIterator<Item = u64>>(rates_bps: I) -> Result<Self, SchedError> {
        let mut links = Vec::new();
        for (id, rate_bps) in rates_bps.into_iter().enumerate() {
            let link_id = id as u32;
            if rate_bps == 0 {
                return Err(SchedError::InvalidRate { link_id });
            }
            links.push(LinkState { link_id, rate_bps, anticipated_end_us: 0 });
        }
        if links.is_empty() {
            return Err(SchedError::NoLinks);
        }
        Ok(Scheduler { links })
    }

    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    /// Assigns a packet of `packet_bytes` at time `now_us` to the link with
    /// the earliest anticipated end, ties broken toward the lowest link id.
    pub fn assign(&mut self, packet_bytes: usize, now_us: u64) -> Result<Assignment, SchedError> {
        let chosen = self
            .links
            .iter_mut()
            .min_by_key(|link| (link.anticipated_end_us, link.link_id))
            .ok_or(SchedError::NoLinks)?;
        let tx_start_us = chosen.anticipated_end_us.max(now_us);
        let tx_us = serialization_us(packet_bytes, chosen.rate_bps);
        let tx_end_us = tx_start_us + tx_us;
        chosen.anticipated_end_us = tx_end_us;
        Ok(Assignment { link_id: chosen.link_id, tx_start_us, tx_end_us })
    }

    /// Adopts a new rate for future assignments on one link. Already
    /// anticipated end times are left as they are.
    pub fn update_rate(&mut self, link_id: u32, rate_bps: u64) -> Result<(), SchedError> {
        if rate_bps == 0 {
            return Err(SchedError::InvalidRate { link_id });
        }
        let link = self
            .links
            .iter_mut()
            .find(|link| link.link_id == link_id)
            .ok_or(SchedError::UnknownLink { link_id })?;
        link.rate_bps = rate_bps;
        Ok(())
    }
}

/// Whole-microsecond serialization time of `bytes` at `rate_bps` (truncating;
/// the sub-microsecond remainder is below the simulation clock granularity).
#[inline]
pub fn serialization_us(bytes: usize, rate_bps: u64) -> u64 {
    (bytes as u64).saturating_mul(8_000_000) / rate_bps
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn construction_is_validated() {
        assert_eq!(Scheduler::new([]), Err(SchedError::NoLinks));
        assert_eq!(
            Scheduler::new([1_000_000, 0]),
            Err(SchedError::InvalidRate { link_id: 1 })
        );
    }

    #[test]
    fn idle_equal_links_tie_break_to_lowest_id() {
        let mut scheduler = Scheduler::new([1_000_000, 1_000_000]).unwrap();
        let assignment = scheduler.assign(1_000, 0).unwrap();
        assert_eq!(assignment.link_id, 0);
        // 1000 bytes at 1 Mbit/s serialize in exactly 8 ms.
        assert_eq!(assignment.tx_end_us, 8_000);
        // Next packet goes to the still-idle link 1.
        assert_eq!(scheduler.assign(1_000, 0).unwrap().link_id, 1);
    }

    #[test]
    fn idle_link_starts_at_now() {
        let mut scheduler = Scheduler::new([2_000_000]).unwrap();
        scheduler.assign(500, 0).unwrap();
        // Far later, the link has long drained; the clock, not the stale end
        // time, is the starting point.
        let assignment = scheduler.assign(500, 1_000_000).unwrap();
        assert_eq!(assignment.tx_start_us, 1_000_000);
        assert_eq!(assignment.tx_end_us, 1_000_000 + 2_000);
    }

    #[test]
    fn back_to_back_packets_queue_on_one_link() {
        let mut scheduler = Scheduler::new([1_000_000]).unwrap();
        let first = scheduler.assign(1_250, 0).unwrap();
        let second = scheduler.assign(1_250, 0).unwrap();
        assert_eq!(first.tx_end_us, 10_000);
        assert_eq!(second.tx_start_us, 10_000);
        assert_eq!(second.tx_end_us, 20_000);
    }

    #[test]
    fn update_rate_applies_to_future_packets_only() {
        let mut scheduler = Scheduler::new([1_000_000]).unwrap();
        scheduler.assign(1_000, 0).unwrap();
        scheduler.update_rate(0, 2_000_000).unwrap();
        let assignment = scheduler.assign(1_000, 0).unwrap();
        assert_eq!(assignment.tx_start_us, 8_000);
        assert_eq!(assignment.tx_end_us, 8_000 + 4_000);

        assert_eq!(
            scheduler.update_rate(7, 1),
            Err(SchedError::UnknownLink { link_id: 7 })
        );
        assert_eq!(
            scheduler.update_rate(0, 0),
            Err(SchedError::InvalidRate { link_id: 0 })
        );
    }

    #[test]
    fn byte_shares_follow_rate_ratio() {
        // 1.0 and 0.75 Mbit/s must carry bytes 4:3 over a long stream.
        let mut scheduler = Scheduler::new([1_000_000, 750_000]).unwrap();
        let mut bytes = vec![0u64; 2];
        for _ in 0..10_000 {
            let assignment = scheduler.assign(1_318, 0).unwrap();
            bytes[assignment.link_id as usize] += 1_318;
        }
        let share = bytes[0] as f64 / bytes[1] as f64;
        let expected = 4.0 / 3.0;
        assert!(
            (share - expected).abs() / expected < 0.01,
            "byte share {share} deviates from {expected}"
        );
    }

    #[test]
    fn end_times_are_monotone_per_link() {
        let mut scheduler = Scheduler::new([900_000, 300_000, 550_000]).unwrap();
        let mut last_end = vec![0u64; 3];
        for i in 0..5_000u64 {
            let now = i * 120;
            let assignment = scheduler.assign(700, now).unwrap();
            let id = assignment.link_id as usize;
            assert!(assignment.tx_end_us > last_end[id]);
            assert!(assignment.tx_start_us >= now);
            last_end[id] = assignment.tx_end_us;
        }
    }
}
