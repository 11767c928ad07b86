//! Deterministic discrete-event scheduler.
//!
//! Virtual time is fixed-point: an integer count of microseconds, displayed
//! as milliseconds with three decimals. Events are totally ordered by
//! `(fire_time, insertion seq)`, so replaying a scenario with the same seed
//! yields a bit-identical event trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Virtual time, counted in integer microseconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1_000_000.0
    }

    pub const fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl std::fmt::Display for SimTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Milliseconds with fixed three-decimal microsecond part.
        write!(f, "{}.{:03}ms", self.0 / 1_000, self.0 % 1_000)
    }
}

/// Handle to a pending event, usable for [`Scheduler::cancel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventId {
    at: SimTime,
    seq: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("cannot schedule event at {at} in the past (now = {now})")]
    InPast { at: SimTime, now: SimTime },
}

/// Event queue keyed by `(fire_time, seq)`. Single-threaded; distinct
/// simulation runs own independent schedulers.
#[derive(Debug)]
pub struct Scheduler<T> {
    now: SimTime,
    seq: u64,
    processed: u64,
    queue: BTreeMap<(SimTime, u64), T>,
}

impl<T> Default for Scheduler<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Scheduler<T> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            seq: 0,
            processed: 0,
            queue: BTreeMap::new(),
        }
    }

    /// Current virtual time. Never decreases during a run.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Queue `payload` to fire at `at`. Rejects times before `now`.
    pub fn schedule(&mut self, at: SimTime, payload: T) -> Result<EventId, ScheduleError> {
        if at < self.now {
            return Err(ScheduleError::InPast { at, now: self.now });
        }
        let seq = self.seq;
        self.seq += 1;
        self.queue.insert((at, seq), payload);
        Ok(EventId { at, seq })
    }

    /// Shorthand for scheduling `delay` after the current time.
    pub fn schedule_in(&mut self, delay: SimTime, payload: T) -> EventId {
        self.schedule(self.now + delay, payload)
            .expect("now + delay is never in the past")
    }

    /// Removes a pending event. Returns `false` for unknown, already-fired,
    /// or already-cancelled ids; such events never fire.
    pub fn cancel(&mut self, id: EventId) -> bool {
        self.queue.remove(&(id.at, id.seq)).is_some()
    }

    /// Processes every event with `fire_time <= t_end` in `(fire_time, seq)`
    /// order, handing each to `handler` together with the scheduler so the
    /// handler can schedule follow-ups. Afterwards `now == t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Result<u64, ScheduleError>
    where
        F: FnMut(&mut Self, SimTime, T),
    {
        if t_end < self.now {
            return Err(ScheduleError::InPast {
                at: t_end,
                now: self.now,
            });
        }
        let mut count = 0;
        while let Some((&(at, seq), _)) = self.queue.iter().next() {
            if at > t_end {
                break;
            }
            let payload = self.queue.remove(&(at, seq)).expect("key just observed");
            self.now = at;
            self.processed += 1;
            count += 1;
            handler(self, at, payload);
        }
        self.now = t_end;
        Ok(count)
    }
}
