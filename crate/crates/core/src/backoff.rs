//! Hybrid linear-then-doubling poll backoff.

use std::time::Duration;

use crate::error::{ErrorKind, FmiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffPolicy {
    /// Retries `1..=linear_retries` sleep `retry` ms.
    pub linear_retries: u32,
    /// Later retries sleep `2 * retry` ms.
    pub max_retries: u32,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        BackoffPolicy {
            linear_retries: 100,
            max_retries: 500,
        }
    }
}

impl BackoffPolicy {
    /// Sleep before retry number `retry` (1-based).
    pub fn delay(&self, retry: u32) -> Result<Duration> {
        if retry == 0 {
            return Err(FmiError::protocol("retry index starts at 1"));
        }
        if retry > self.max_retries {
            return Err(FmiError::new(
                ErrorKind::RetriesExhausted,
                format!("gave up after {} retries", self.max_retries),
            ));
        }
        let ms = if retry <= self.linear_retries {
            retry as u64
        } else {
            2 * retry as u64
        };
        Ok(Duration::from_millis(ms))
    }

    /// Sum of every delay up to `max_retries`.
    pub fn worst_case_total(&self) -> Duration {
        (1..=self.max_retries).map(|r| self.delay(r).unwrap()).sum()
    }
}

/// [`BackoffPolicy::delay`] under the default policy.
pub fn backoff_delay(retry: u32) -> Result<Duration> {
    BackoffPolicy::default().delay(retry)
}
