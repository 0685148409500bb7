//! Receiver-driven sending-rate control.
//!
//! The receiver measures the delivered rate over fixed windows and answers
//! each window with one feedback command. The controller alternates between
//! two modes:
//!
//! * **Measuring** — a window whose delivered rate falls clearly short of the
//!   target pulls the target down to slightly below what the channel actually
//!   delivered. Windows that meet the target accumulate credit.
//! * **Probing** — after enough consecutive clean windows the controller
//!   temporarily raises the rate by a small fraction for one window, lowers
//!   it back for the next, and makes the raise permanent only if the raised
//!   window was actually sustained by the channel.
//!
//! Decisions are pure functions of the observed window rates, so a recorded
//! sequence of measurements replays to identical commands.

use crate::wire::{FeedbackCommand, FeedbackMessage};

/// Tunables for [`RateController`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateControlConfig {
    /// Measurement window length. The controller itself is stepped once per
    /// window; drivers use this value to schedule those steps.
    pub window_ms: u64,
    /// Fractional back-off below the measured rate on a shortfall:
    /// `new_target = measured * (1 - decrease_frac)`.
    pub decrease_frac: f64,
    /// Fractional temporary raise during a probe:
    /// `probed = target * (1 + probe_frac)`.
    pub probe_frac: f64,
    /// Consecutive clean windows required before probing starts.
    pub probation_windows: u32,
    /// A window counts as clean (and a probe as sustained) when the measured
    /// rate reaches this fraction of the expected rate. This absorbs the
    /// packet-granularity of windowed byte counts.
    pub sustain_frac: f64,
    /// Lower clamp for the target rate.
    pub floor_bps: u64,
}

impl Default for RateControlConfig {
    fn default() -> Self {
        RateControlConfig {
            window_ms: 100,
            decrease_frac: 0.10,
            probe_frac: 0.10,
            probation_windows: 8,
            sustain_frac: 0.95,
            floor_bps: 50_000,
        }
    }
}

impl RateControlConfig {
    /// Window length in microseconds.
    pub fn window_us(&self) -> u64 {
        self.window_ms * 1_000
    }
}

/// Controller mode; see the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Measuring,
    Probing,
}

/// Position within the two-window probe sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ProbePhase {
    /// The raise command went out; the next measurement reflects it.
    Up,
    /// The lower command went out; the next step decides the outcome.
    Down,
}

/// Two-state feedback rate controller.
#[derive(Clone, Debug)]
pub struct RateController {
    config: RateControlConfig,
    mode: Mode,
    target_bps: f64,
    windows_since_decrease: u32,
    probe_phase: ProbePhase,
    probed_bps: f64,
    up_measured_bps: f64,
}

impl RateController {
    /// Creates a controller in measuring mode at the given initial target.
    pub fn new(initial_target_bps: u64, config: RateControlConfig) -> Self {
        RateController {
            config,
            mode: Mode::Measuring,
            target_bps: (initial_target_bps as f64).max(config.floor_bps as f64),
            windows_since_decrease: 0,
            probe_phase: ProbePhase::Up,
            probed_bps: 0.0,
            up_measured_bps: 0.0,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Current target rate, rounded to whole bits per second.
    pub fn target_bps(&self) -> u64 {
        round_bps(self.target_bps)
    }

    /// Clean-window streak since the last decrease.
    pub fn windows_since_decrease(&self) -> u32 {
        self.windows_since_decrease
    }

    /// Feeds one window measurement, dispatching on mode. This is the entry
    /// point drivers call once per window.
    pub fn step(&mut self, measured_bps: f64, now_us: u64) -> FeedbackMessage {
        match self.mode {
            Mode::Measuring => self.on_window(measured_bps, now_us),
            Mode::Probing => self.probe_step(measured_bps, now_us),
        }
    }

    /// Handles a window in measuring mode. Forwards to [`Self::probe_step`]
    /// if a probe is in flight.
    pub fn on_window(&mut self, measured_bps: f64, now_us: u64) -> FeedbackMessage {
        if self.mode == Mode::Probing {
            return self.probe_step(measured_bps, now_us);
        }
        let measured = measured_bps.max(0.0);
        if measured < self.target_bps * self.config.sustain_frac {
            // Shortfall: step below what the channel demonstrably carried.
            self.target_bps = (measured * (1.0 - self.config.decrease_frac))
                .max(self.config.floor_bps as f64);
            self.windows_since_decrease = 0;
            return self.message(measured, FeedbackCommand::SetTarget, self.target_bps, now_us);
        }
        self.windows_since_decrease = self.windows_since_decrease.saturating_add(1);
        if self.windows_since_decrease >= self.config.probation_windows {
            // Enough clean windows: raise for one window and watch.
            self.mode = Mode::Probing;
            self.probe_phase = ProbePhase::Up;
            self.probed_bps = self.target_bps * (1.0 + self.config.probe_frac);
            return self.message(measured, FeedbackCommand::ProbeUp, self.probed_bps, now_us);
        }
        self.message(measured, FeedbackCommand::Keep, self.target_bps, now_us)
    }

    /// Handles a window while a probe is in flight.
    ///
    /// The first call sees the measurement of the raised window and commands
    /// the rate back down; the second call decides: if the raised window
    /// sustained the probed rate, the raise becomes the new target, otherwise
    /// the target is left unchanged. Either way the controller returns to
    /// measuring mode. The clean-window streak is kept (it only resets on a
    /// decrease), so a controller sitting below a widening channel re-probes
    /// every other window instead of waiting out a full probation again.
    pub fn probe_step(&mut self, measured_bps: f64, now_us: u64) -> FeedbackMessage {
        debug_assert_eq!(self.mode, Mode::Probing, "probe_step outside probing mode");
        let measured = measured_bps.max(0.0);
        match self.probe_phase {
            ProbePhase::Up => {
                self.up_measured_bps = measured;
                self.probe_phase = ProbePhase::Down;
                self.message(measured, FeedbackCommand::ProbeDown, self.target_bps, now_us)
            }
            ProbePhase::Down => {
                self.mode = Mode::Measuring;
                if self.up_measured_bps >= self.probed_bps * self.config.sustain_frac {
                    self.target_bps = self.probed_bps.max(self.config.floor_bps as f64);
                    self.message(
                        measured,
                        FeedbackCommand::ConfirmIncrease,
                        self.target_bps,
                        now_us,
                    )
                } else {
                    self.message(measured, FeedbackCommand::Keep, self.target_bps, now_us)
                }
            }
        }
    }

    fn message(
        &self,
        measured_bps: f64,
        command: FeedbackCommand,
        target_bps: f64,
        now_us: u64,
    ) -> FeedbackMessage {
        FeedbackMessage {
            measured_rate_bps: round_bps(measured_bps),
            command,
            target_rate_bps: round_bps(target_bps),
            timestamp_us: now_us,
        }
    }
}

fn round_bps(value: f64) -> u64 {
    libm::round(value.max(0.0)) as u64
}

/// Sender-side application of a feedback message: every command except
/// `Keep` adopts the carried target rate.
pub fn apply_feedback(current_rate_bps: u64, message: &FeedbackMessage) -> u64 {
    if message.command.sets_rate() {
        message.target_rate_bps
    } else {
        current_rate_bps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RateControlConfig {
        RateControlConfig::default()
    }

    #[test]
    fn shortfall_decreases_below_measured() {
        let mut controller = RateController::new(1_000_000, config());
        let message = controller.step(800_000.0, 100_000);
        assert_eq!(message.command, FeedbackCommand::SetTarget);
        assert_eq!(message.target_rate_bps, 720_000);
        assert_eq!(controller.target_bps(), 720_000);
        assert_eq!(controller.windows_since_decrease(), 0);
    }

    #[test]
    fn zero_measurement_clamps_to_floor() {
        let mut controller = RateController::new(1_000_000, config());
        let message = controller.step(0.0, 0);
        assert_eq!(message.command, FeedbackCommand::SetTarget);
        assert_eq!(message.target_rate_bps, config().floor_bps);
    }

    #[test]
    fn clean_windows_lead_to_probation() {
        let mut controller = RateController::new(1_000_000, config());
        for window in 0..7 {
            let message = controller.step(1_000_000.0, window * 100_000);
            assert_eq!(message.command, FeedbackCommand::Keep, "window {window}");
            assert_eq!(controller.mode(), Mode::Measuring);
        }
        // Eighth clean window triggers the probe.
        let message = controller.step(1_000_000.0, 700_000);
        assert_eq!(message.command, FeedbackCommand::ProbeUp);
        assert_eq!(message.target_rate_bps, 1_100_000);
        assert_eq!(controller.mode(), Mode::Probing);
        // Target itself is not raised yet.
        assert_eq!(controller.target_bps(), 1_000_000);
    }

    #[test]
    fn sustained_probe_confirms_increase() {
        let mut controller = RateController::new(1_000_000, config());
        for w in 0..8 {
            controller.step(1_000_000.0, w * 100_000);
        }
        // Raised window delivered the probed rate.
        let message = controller.step(1_100_000.0, 800_000);
        assert_eq!(message.command, FeedbackCommand::ProbeDown);
        assert_eq!(message.target_rate_bps, 1_000_000);
        let message = controller.step(1_000_000.0, 900_000);
        assert_eq!(message.command, FeedbackCommand::ConfirmIncrease);
        assert_eq!(message.target_rate_bps, 1_100_000);
        assert_eq!(controller.target_bps(), 1_100_000);
        assert_eq!(controller.mode(), Mode::Measuring);
    }

    #[test]
    fn failed_probe_reverts_to_previous_target() {
        let mut controller = RateController::new(1_000_000, config());
        for w in 0..8 {
            controller.step(1_000_000.0, w * 100_000);
        }
        // Channel kept delivering only the old rate during the raise.
        controller.step(1_000_000.0, 800_000);
        let message = controller.step(1_000_000.0, 900_000);
        assert_eq!(message.command, FeedbackCommand::Keep);
        assert_eq!(controller.target_bps(), 1_000_000);
        assert_eq!(controller.mode(), Mode::Measuring);
        // Streak is retained, so the next clean window probes again.
        let message = controller.step(1_000_000.0, 1_000_000);
        assert_eq!(message.command, FeedbackCommand::ProbeUp);
    }

    #[test]
    fn zero_probe_delta_is_a_no_op() {
        let mut controller = RateController::new(1_000_000, RateControlConfig {
            probe_frac: 0.0,
            ..config()
        });
        for w in 0..8 {
            controller.step(1_000_000.0, w);
        }
        controller.step(1_000_000.0, 8);
        let message = controller.step(1_000_000.0, 9);
        assert_eq!(message.command, FeedbackCommand::ConfirmIncrease);
        assert_eq!(controller.target_bps(), 1_000_000);
    }

    #[test]
    fn closed_loop_step_drop_and_recovery() {
        // Toy channel: the sender applies every command immediately and the
        // channel delivers min(sent, capacity). Capacity steps 2 -> 1 Mbit/s
        // and back; the controller must track it both ways.
        let cfg = config();
        let mut controller = RateController::new(2_000_000, cfg);
        let mut sender_bps: u64 = 2_000_000;

        let mut capacity = 1_000_000u64;
        let mut below_within = None;
        for window in 0..10u32 {
            let measured = sender_bps.min(capacity) as f64;
            let message = controller.step(measured, u64::from(window) * 100_000);
            sender_bps = apply_feedback(sender_bps, &message);
            if below_within.is_none() && controller.target_bps() < capacity {
                below_within = Some(window + 1);
            }
        }
        let below_within = below_within.expect("target must fall below capacity");
        assert!(below_within <= 10, "took {below_within} windows");

        capacity = 2_000_000;
        let mut recovered_within = None;
        for window in 0..50u32 {
            let measured = sender_bps.min(capacity) as f64;
            let message = controller.step(measured, u64::from(10 + window) * 100_000);
            sender_bps = apply_feedback(sender_bps, &message);
            if recovered_within.is_none() && controller.target_bps() >= capacity * 9 / 10 {
                recovered_within = Some(window + 1);
            }
        }
        let recovered_within = recovered_within.expect("target must recover to 90% of capacity");
        assert!(recovered_within <= 50, "took {recovered_within} windows");
        // The target never overshoots capacity by more than one probe delta.
        assert!(controller.target_bps() as f64 <= 2_000_000.0 * (1.0 + cfg.probe_frac));
    }

    #[test]
    fn replay_is_deterministic() {
        let inputs: Vec<f64> = (0..40)
            .map(|i| 1_000_000.0 + ((i * 37) % 11) as f64 * 10_000.0 - 50_000.0)
            .collect();
        let run = |inputs: &[f64]| -> Vec<FeedbackMessage> {
            let mut controller = RateController::new(1_000_000, config());
            inputs
                .iter()
                .enumerate()
                .map(|(i, &m)| controller.step(m, i as u64 * 100_000))
                .collect()
        };
        assert_eq!(run(&inputs), run(&inputs));
    }
}
