use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crate::env::EnvError;
use crate::time::StepSize;

/// Wall-clock behaviour of a runtime around each step.
///
/// The runtime calls [`start`](Pacer::start) on reset, then per step
/// [`begin_step`](Pacer::begin_step) before the action is applied,
/// [`before_advance`](Pacer::before_advance) between latching the action and
/// advancing the robot, and [`end_step`](Pacer::end_step) once the results are
/// computed. Pacing never touches simulation state.
pub trait Pacer: Send {
    fn start(&mut self) -> Result<(), EnvError>;

    fn begin_step(&mut self) {}

    /// Returns the number of agent periods missed.
    fn before_advance(&mut self, _period: StepSize) -> Result<u64, EnvError> {
        Ok(0)
    }

    fn end_step(&mut self, _period: StepSize) {}
}

/// Real-Time-Factor pacing for in-process simulation: each step lasts at least
/// `agent_period / rtf` of wall time. `rtf = 0` runs unpaced.
#[derive(Debug, Clone)]
pub struct RtfPacer {
    rtf: f64,
    step_start: Option<Instant>,
}

impl RtfPacer {
    pub fn new(rtf: f64) -> Self {
        RtfPacer {
            rtf,
            step_start: None,
        }
    }

    pub fn rtf(&self) -> f64 {
        self.rtf
    }
}

impl Pacer for RtfPacer {
    fn start(&mut self) -> Result<(), EnvError> {
        Ok(())
    }

    fn begin_step(&mut self) {
        if self.rtf > 0.0 {
            self.step_start = Some(Instant::now());
        }
    }

    fn end_step(&mut self, period: StepSize) {
        if let Some(start) = self.step_start.take() {
            let budget = Duration::from_secs_f64(period.as_secs_f64() / self.rtf);
            sleep_until_instant(start + budget);
        }
    }
}

/// Coarse sleep to shortly before `deadline`, then spin.
fn sleep_until_instant(deadline: Instant) {
    const SPIN: Duration = Duration::from_millis(1);
    loop {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        let left = deadline - now;
        if left > SPIN {
            thread::sleep(left - SPIN);
        } else {
            std::hint::spin_loop();
        }
    }
}

/// Monotonic time as seen by a robot platform.
pub trait ClockSource: Send {
    /// Time since an arbitrary fixed origin. Must be non-decreasing.
    fn now(&self) -> Duration;

    /// Blocks until `now() >= t`.
    fn sleep_until(&mut self, t: Duration);
}

/// The host's monotonic clock.
#[derive(Debug, Clone)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock::new()
    }
}

impl ClockSource for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep_until(&mut self, t: Duration) {
        sleep_until_instant(self.origin + t);
    }
}

/// A manually driven clock. Sleeping jumps straight to the deadline; clones
/// share the same time, so a test can keep a handle and move time around
/// while a runtime owns another.
#[derive(Debug, Clone, Default)]
pub struct MockClock {
    now: Arc<Mutex<Duration>>,
}

impl MockClock {
    pub fn new() -> Self {
        MockClock::default()
    }

    /// Moves time forward, e.g. to emulate slow step logic.
    pub fn advance(&self, d: Duration) {
        *self.now.lock().expect("clock lock") += d;
    }

    /// Sets time to an arbitrary value, including backwards.
    pub fn set(&self, t: Duration) {
        *self.now.lock().expect("clock lock") = t;
    }
}

impl ClockSource for MockClock {
    fn now(&self) -> Duration {
        *self.now.lock().expect("clock lock")
    }

    fn sleep_until(&mut self, t: Duration) {
        let mut now = self.now.lock().expect("clock lock");
        if *now < t {
            *now = t;
        }
    }
}

/// Pacing by an external clock: each advance starts on the next agent-period
/// boundary. When step logic runs past one or more boundaries, the missed
/// boundaries are counted as overruns and the schedule moves to the latest
/// boundary already passed.
#[derive(Debug, Clone)]
pub struct ClockPacer<C: ClockSource> {
    clock: C,
    boundary: Duration,
    last_seen: Duration,
}

impl<C: ClockSource> ClockPacer<C> {
    pub fn new(clock: C) -> Self {
        let now = clock.now();
        ClockPacer {
            clock,
            boundary: now,
            last_seen: now,
        }
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    fn observe(&mut self) -> Result<Duration, EnvError> {
        let now = self.clock.now();
        if now < self.last_seen {
            return Err(EnvError::ClockRegression {
                previous: self.last_seen,
                now,
            });
        }
        self.last_seen = now;
        Ok(now)
    }
}

impl<C: ClockSource> Pacer for ClockPacer<C> {
    fn start(&mut self) -> Result<(), EnvError> {
        let now = self.observe()?;
        self.boundary = now;
        Ok(())
    }

    fn before_advance(&mut self, period: StepSize) -> Result<u64, EnvError> {
        let period = Duration::from_nanos(period.as_nanos());
        let now = self.observe()?;
        let next = self.boundary + period;
        if now < next {
            self.clock.sleep_until(next);
            self.observe()?;
            self.boundary = next;
            return Ok(0);
        }
        let elapsed = (now - self.boundary).as_nanos();
        let p = period.as_nanos();
        let passed = elapsed.div_ceil(p);
        // `passed` boundaries went by; the advance takes the latest one.
        let latest = elapsed / p;
        self.boundary += Duration::from_nanos((latest * p) as u64);
        Ok((passed - 1) as u64)
    }
}
