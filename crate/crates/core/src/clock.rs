//! Virtual time and message accounting.
//!
//! The clock only moves forward, and only through [`VirtualClock::advance`].
//! Every advance is recorded in an [`EventLog`], so the current time always
//! equals the logged events weighted by their tick costs.
//!
//! Messages that are sent in the same communication step travel concurrently:
//! a broadcast of `m(m-1)` ballots bumps the tier counter by `m(m-1)` but costs
//! one message latency on the clock. Independent clusters run on forked clock
//! shards which are joined back by taking the slowest shard.

use serde::{Deserialize, Serialize};

/// Ticks charged per event kind.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockCosts {
    pub message: u64,
    pub debate_round: u64,
    pub voting_iteration: u64,
}

impl Default for ClockCosts {
    fn default() -> Self {
        Self {
            message: 1,
            debate_round: 5,
            voting_iteration: 3,
        }
    }
}

impl ClockCosts {
    /// One voting iteration: a ballot exchange followed by the tally.
    pub fn iteration_cost(&self) -> u64 {
        self.message + self.voting_iteration
    }

    /// One debate round: an argument exchange followed by cross-evaluation.
    pub fn round_cost(&self) -> u64 {
        self.message + self.debate_round
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ClockEvent {
    Message,
    DebateRound,
    VotingIteration,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventLog {
    pub messages: u64,
    pub debate_rounds: u64,
    pub voting_iterations: u64,
}

impl EventLog {
    pub fn ticks(&self, costs: &ClockCosts) -> u64 {
        self.messages * costs.message
            + self.debate_rounds * costs.debate_round
            + self.voting_iterations * costs.voting_iteration
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirtualClock {
    now: u64,
    costs: ClockCosts,
    log: EventLog,
}

impl Default for VirtualClock {
    fn default() -> Self {
        Self::new(ClockCosts::default())
    }
}

impl VirtualClock {
    pub fn new(costs: ClockCosts) -> Self {
        Self {
            now: 0,
            costs,
            log: EventLog::default(),
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn costs(&self) -> &ClockCosts {
        &self.costs
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn advance(&mut self, event: ClockEvent) {
        let cost = match event {
            ClockEvent::Message => {
                self.log.messages += 1;
                self.costs.message
            }
            ClockEvent::DebateRound => {
                self.log.debate_rounds += 1;
                self.costs.debate_round
            }
            ClockEvent::VotingIteration => {
                self.log.voting_iterations += 1;
                self.costs.voting_iteration
            }
        };
        self.now += cost;
    }

    /// Ticks since `start`.
    ///
    /// # Panics
    ///
    /// If `start` lies in the future; that is always a caller bug.
    pub fn elapsed(&self, start: u64) -> u64 {
        assert!(
            start <= self.now,
            "elapsed() called with start {start} after now {}",
            self.now
        );
        self.now - start
    }

    /// A copy that can run an independent branch of the protocol.
    pub fn fork(&self) -> Self {
        self.clone()
    }

    /// Continue from the slowest of a set of shards forked from this clock.
    /// The adopted shard's event log becomes the critical path.
    pub fn join<'a>(&mut self, shards: impl IntoIterator<Item = &'a VirtualClock>) {
        let mut slowest: Option<&VirtualClock> = None;
        for shard in shards {
            debug_assert!(shard.now >= self.now, "shard behind its parent clock");
            if slowest.is_none_or(|s| shard.now > s.now) {
                slowest = Some(shard);
            }
        }
        if let Some(s) = slowest {
            self.now = s.now;
            self.log = s.log;
        }
    }
}

/// `elapsed > fraction × tau` with the fraction given as `num / den`, in exact
/// integer arithmetic.
pub fn exceeds_fraction(elapsed: u64, tau: u64, num: u64, den: u64) -> bool {
    u128::from(elapsed) * u128::from(den) > u128::from(tau) * u128::from(num)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Tier1,
    Tier2,
    Tier3,
    Baseline,
}

impl Tier {
    fn slot(self) -> usize {
        match self {
            Tier::Tier1 => 0,
            Tier::Tier2 => 1,
            Tier::Tier3 => 2,
            Tier::Baseline => 3,
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub tier1: u64,
    pub tier2: u64,
    pub tier3: u64,
    pub baseline: u64,
}

impl MessageCounts {
    pub fn total(&self) -> u64 {
        self.tier1 + self.tier2 + self.tier3 + self.baseline
    }
}

/// Per-tier message counters. Counters never decrease.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageBus {
    counts: [u64; 4],
}

impl MessageBus {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single point-to-point message.
    pub fn record_message(&mut self, tier: Tier, clock: &mut VirtualClock) {
        self.record_broadcast(tier, 1, clock);
    }

    /// `count` messages sent concurrently in one communication step. An empty
    /// step is free.
    pub fn record_broadcast(&mut self, tier: Tier, count: u64, clock: &mut VirtualClock) {
        if count == 0 {
            return;
        }
        self.counts[tier.slot()] += count;
        clock.advance(ClockEvent::Message);
    }

    pub fn count(&self, tier: Tier) -> u64 {
        self.counts[tier.slot()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn snapshot(&self) -> MessageCounts {
        MessageCounts {
            tier1: self.counts[0],
            tier2: self.counts[1],
            tier3: self.counts[2],
            baseline: self.counts[3],
        }
    }

    pub fn merge(&mut self, other: &MessageBus) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

/// The clock and bus a protocol step runs against.
#[derive(Clone, Debug, Default)]
pub struct Network {
    pub clock: VirtualClock,
    pub bus: MessageBus,
}

impl Network {
    pub fn new(costs: ClockCosts) -> Self {
        Self {
            clock: VirtualClock::new(costs),
            bus: MessageBus::new(),
        }
    }

    pub fn broadcast(&mut self, tier: Tier, count: u64) {
        self.bus.record_broadcast(tier, count, &mut self.clock);
    }

    /// A branch that starts at the current time with empty counters.
    pub fn fork(&self) -> Self {
        Self {
            clock: self.clock.fork(),
            bus: MessageBus::new(),
        }
    }

    /// Merge concurrently executed branches: counters add up, time is the
    /// slowest branch.
    pub fn join(&mut self, branches: &[Network]) {
        for b in branches {
            self.bus.merge(&b.bus);
        }
        self.clock.join(branches.iter().map(|b| &b.clock));
    }
}
