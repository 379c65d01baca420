use std::time::{Duration, Instant};

use super::client::KvStore;
use crate::backoff::BackoffPolicy;
use crate::error::{ErrorKind, FmiError, Result};

/// How a consumer waits for data that is not there yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PollConfig {
    pub policy: BackoffPolicy,
    /// Lower bound on every sleep (the profile's poll floor).
    pub floor: Duration,
    /// Give up with `Timeout` once this passes.
    pub deadline: Option<Instant>,
}

impl Default for PollConfig {
    fn default() -> Self {
        PollConfig {
            policy: BackoffPolicy::default(),
            floor: Duration::ZERO,
            deadline: None,
        }
    }
}

impl PollConfig {
    pub fn with_floor(floor: Duration) -> Self {
        PollConfig {
            floor,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polled<T> {
    pub value: T,
    /// Attempts made, including the successful one.
    pub attempts: u32,
    pub slept: Duration,
}

/// Retries `attempt` until it yields a value. After failed attempt `r` it
/// sleeps `max(backoff(r), floor)`; once `max_retries` attempts have failed
/// it returns `RetriesExhausted`.
pub fn poll_with<T>(
    cfg: &PollConfig,
    mut attempt: impl FnMut() -> Result<Option<T>>,
    mut sleep: impl FnMut(Duration),
) -> Result<Polled<T>> {
    let mut slept = Duration::ZERO;
    let mut tries = 0u32;
    loop {
        tries += 1;
        if let Some(value) = attempt()? {
            return Ok(Polled {
                value,
                attempts: tries,
                slept,
            });
        }
        if tries >= cfg.policy.max_retries {
            return Err(FmiError::new(
                ErrorKind::RetriesExhausted,
                format!("nothing after {tries} polls"),
            ));
        }
        let mut d = cfg.policy.delay(tries)?.max(cfg.floor);
        if let Some(deadline) = cfg.deadline {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(FmiError::timeout(format!("deadline passed after {tries} polls")));
            }
            d = d.min(left);
        }
        sleep(d);
        slept += d;
    }
}

/// Polls `key` until it exists.
pub fn get_poll<S: KvStore + ?Sized>(store: &mut S, key: &str, cfg: &PollConfig) -> Result<Polled<Vec<u8>>> {
    poll_with(cfg, || store.get(key), std::thread::sleep)
        .map_err(|e| FmiError::new(e.kind, format!("waiting for '{key}': {}", e.detail)))
}

/// Polls until at least `target` keys start with `prefix`.
pub fn poll_count<S: KvStore + ?Sized>(store: &mut S, prefix: &str, target: u32, cfg: &PollConfig) -> Result<Polled<u32>> {
    poll_with(
        cfg,
        || Ok(store.list_count(prefix)?).map(|c| (c >= target).then_some(c)),
        std::thread::sleep,
    )
    .map_err(|e| FmiError::new(e.kind, format!("waiting for {target} keys under '{prefix}': {}", e.detail)))
}
