//! Run-time budgets: wall clock for production runs, operation counts for
//! reproducible runs.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Unlimited,
    /// Serialized as fractional seconds.
    Wall(#[serde(with = "seconds")] Duration),
    /// Algorithm-specific unit of work (move evaluations, solver nodes).
    Ops(u64),
}

impl Budget {
    pub fn millis(ms: u64) -> Self {
        Budget::Wall(Duration::from_millis(ms))
    }

    /// Fraction `f` of this budget.
    pub fn scaled(&self, f: f64) -> Self {
        match *self {
            Budget::Unlimited => Budget::Unlimited,
            Budget::Wall(d) => Budget::Wall(d.mul_f64(f)),
            Budget::Ops(n) => Budget::Ops(((n as f64) * f).round() as u64),
        }
    }

    pub fn meter(&self) -> Meter {
        Meter {
            budget: *self,
            start: Instant::now(),
            ops: 0,
        }
    }

    /// Wall-clock limit, if any.
    pub fn time_limit(&self) -> Option<Duration> {
        match *self {
            Budget::Wall(d) => Some(d),
            _ => None,
        }
    }

    /// Operation limit, if any.
    pub fn op_limit(&self) -> Option<u64> {
        match *self {
            Budget::Ops(n) => Some(n),
            _ => None,
        }
    }
}

/// Tracks consumption of a [`Budget`].
#[derive(Debug, Clone)]
pub struct Meter {
    budget: Budget,
    start: Instant,
    ops: u64,
}

impl Meter {
    /// Records `k` operations.
    #[inline]
    pub fn tick(&mut self, k: u64) {
        self.ops += k;
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn exhausted(&self) -> bool {
        match self.budget {
            Budget::Unlimited => false,
            Budget::Ops(n) => self.ops >= n,
            Budget::Wall(d) => self.start.elapsed() >= d,
        }
    }
}

mod seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let x = f64::deserialize(d)?;
        Duration::try_from_secs_f64(x).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ops_budget() {
        let mut m = Budget::Ops(3).meter();
        assert!(!m.exhausted());
        m.tick(3);
        assert!(m.exhausted());
        assert_eq!(Budget::Ops(10).scaled(0.9), Budget::Ops(9));
        assert!(!Budget::Unlimited.meter().exhausted());
    }

    #[test]
    fn wall_budget() {
        let m = Budget::Wall(Duration::ZERO).meter();
        assert!(m.exhausted());
    }
}
