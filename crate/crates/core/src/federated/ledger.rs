use serde::Serialize;

/// `⌈log₂ n⌉`, the bits needed to name one of `n` elements.
pub fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Uplink,
    Downlink,
}

/// What travels over the wire, and therefore how many bits it costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    /// A base of rank `r` sent as its `r` element ids.
    BaseIndicator { r: usize, n: usize },
    /// `n` coordinates at `bits_per_coord` each.
    DenseVector { n: usize, bits_per_coord: u32 },
    /// The server model `x`, sent to clients.
    ModelBroadcast { n: usize, bits_per_coord: u32 },
    /// `nnz` (id, value) pairs out of `n` coordinates.
    SparseVector {
        nnz: usize,
        n: usize,
        bits_per_coord: u32,
    },
    /// A set of `size` element ids.
    ElementSet { size: usize, n: usize },
}

impl Payload {
    pub fn dense(n: usize) -> Self {
        Payload::DenseVector {
            n,
            bits_per_coord: 64,
        }
    }

    pub fn broadcast(n: usize) -> Self {
        Payload::ModelBroadcast {
            n,
            bits_per_coord: 64,
        }
    }

    pub fn bits(&self) -> u64 {
        match *self {
            Payload::BaseIndicator { r, n } => r as u64 * ceil_log2(n),
            Payload::DenseVector { n, bits_per_coord }
            | Payload::ModelBroadcast { n, bits_per_coord } => n as u64 * bits_per_coord as u64,
            Payload::SparseVector {
                nnz,
                n,
                bits_per_coord,
            } => nnz as u64 * (ceil_log2(n) + bits_per_coord as u64),
            Payload::ElementSet { size, n } => size as u64 * ceil_log2(n),
        }
    }
}

/// Traffic of one communication round. `clients` counts uplink messages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundEntry {
    pub t: usize,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
    pub clients: usize,
}

/// Per-round bit counts for a whole run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommLedger {
    rounds: Vec<RoundEntry>,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn entry(&mut self, t: usize) -> &mut RoundEntry {
        while self.rounds.len() <= t {
            let next = self.rounds.len();
            self.rounds.push(RoundEntry {
                t: next,
                ..RoundEntry::default()
            });
        }
        &mut self.rounds[t]
    }

    /// Books one message in round `t` and returns its cost in bits.
    pub fn record_payload(&mut self, t: usize, direction: Direction, payload: Payload) -> u64 {
        let bits = payload.bits();
        let e = self.entry(t);
        match direction {
            Direction::Uplink => {
                e.uplink_bits += bits;
                e.clients += 1;
            }
            Direction::Downlink => e.downlink_bits += bits,
        }
        bits
    }

    pub fn rounds(&self) -> &[RoundEntry] {
        &self.rounds
    }

    pub fn round(&self, t: usize) -> Option<&RoundEntry> {
        self.rounds.get(t)
    }

    pub fn total_uplink(&self) -> u64 {
        self.rounds.iter().map(|r| r.uplink_bits).sum()
    }

    pub fn total_downlink(&self) -> u64 {
        self.rounds.iter().map(|r| r.downlink_bits).sum()
    }

    /// One JSON object per round.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("plain struct serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn payload_costs() {
        assert_eq!(Payload::BaseIndicator { r: 2, n: 8 }.bits(), 6);
        assert_eq!(Payload::dense(8).bits(), 512);
        assert_eq!(Payload::BaseIndicator { r: 3, n: 64 }.bits(), 18);
        assert_eq!(Payload::BaseIndicator { r: 3, n: 65 }.bits(), 21);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn jsonl_export() {
        let mut l = CommLedger::new();
        l.record_payload(0, Direction::Downlink, Payload::broadcast(2));
        l.record_payload(0, Direction::Uplink, Payload::BaseIndicator { r: 1, n: 2 });
        l.record_payload(1, Direction::Uplink, Payload::BaseIndicator { r: 1, n: 2 });
        assert_eq!(
            l.to_jsonl(),
            "{\"t\":0,\"uplink_bits\":1,\"downlink_bits\":128,\"clients\":1}\n\
             {\"t\":1,\"uplink_bits\":1,\"downlink_bits\":0,\"clients\":1}\n"
        );
    }

    proptest! {
        #[test]
        fn totals_are_sums_of_rounds(
            events in prop::collection::vec((0usize..20, any::<bool>(), 1usize..10, 1usize..100), 0..60)
        ) {
            let mut l = CommLedger::new();
            let mut up = 0;
            let mut down = 0;
            for (t, is_up, r, n) in events {
                let p = Payload::BaseIndicator { r, n };
                let dir = if is_up { Direction::Uplink } else { Direction::Downlink };
                let bits = l.record_payload(t, dir, p);
                prop_assert_eq!(bits, r as u64 * ceil_log2(n));
                if is_up { up += bits } else { down += bits }
            }
            prop_assert_eq!(l.total_uplink(), up);
            prop_assert_eq!(l.total_downlink(), down);
            prop_assert_eq!(l.total_uplink(), l.rounds().iter().map(|r| r.uplink_bits).sum::<u64>());
        }
    }
}
