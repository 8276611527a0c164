//! Deterministic random sub-streams.
//!
//! Every trial owns a set of ChaCha8 streams selected by
//! `(master_seed, trial index, purpose)`. Infection draws are keyed by event
//! index through random access into the infection stream, so whether an
//! event consumes a draw never shifts the draws seen by later events.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a sub-stream is used for. The discriminant is folded into the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SeedDevice = 0,
    RandomPolicy = 1,
    Infection = 2,
}

const PURPOSES: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    master_seed: u64,
    trial: u64,
}

impl TrialStreams {
    pub fn new(master_seed: u64, trial: u64) -> Self {
        Self { master_seed, trial }
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(
            self.trial
                .wrapping_mul(PURPOSES)
                .wrapping_add(purpose as u64),
        );
        rng
    }

    pub fn seed_device_rng(&self) -> ChaCha8Rng {
        self.stream(Purpose::SeedDevice)
    }

    pub fn policy_rng(&self) -> ChaCha8Rng {
        self.stream(Purpose::RandomPolicy)
    }

    pub fn infection_draws(&self) -> EventDraws {
        EventDraws::new(self.stream(Purpose::Infection))
    }

    /// FNV-1a digest over the keyed infection draws of the first `n_events`
    /// events and the seed-device stream's first word. Two configurations
    /// sharing a trial index produce the same digest.
    pub fn draw_digest(&self, n_events: usize) -> u64 {
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        let mut feed = |word: u64| {
            for byte in word.to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.seed_device_rng().next_u64());
        let mut draws = self.infection_draws();
        for index in 0..n_events {
            feed(draws.uniform(index).to_bits());
        }
        hash
    }
}

/// Random-access uniform draws indexed by event position.
#[derive(Debug, Clone)]
pub struct EventDraws {
    rng: ChaCha8Rng,
    consumed: u64,
}

impl EventDraws {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, consumed: 0 }
    }

    /// Uniform value in `[0, 1)` bound to `event_index`.
    pub fn uniform(&mut self, event_index: usize) -> f64 {
        self.rng.set_word_pos(event_index as u128 * 2);
        self.consumed += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Number of draws taken so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }
}
