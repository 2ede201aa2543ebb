use std::fmt;
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;

/// Bit vector sent over the channel, most significant bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Payload(Vec<bool>);

impl Payload {
    pub fn new(bits: Vec<bool>) -> Self {
        Payload(bits)
    }

    /// Seeded pseudo-random payload; the same seed always yields the same bits.
    pub fn random(seed: u64, n_bits: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Payload((0..n_bits).map(|_| rng.random::<bool>()).collect())
    }

    /// Parses hex digits, four bits per digit. An optional `0x` prefix and `_`
    /// separators are accepted.
    pub fn from_hex(s: &str) -> Result<Self, ConfigError> {
        let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
        let mut bits = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars().filter(|&c| c != '_') {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| ConfigError::Payload(format!("`{c}` is not a hex digit")))?;
            bits.extend((0..4).rev().map(|i| nibble >> i & 1 == 1));
        }
        Ok(Payload(bits))
    }

    /// Parses a string of `0` and `1`.
    pub fn from_bit_str(s: &str) -> Result<Self, ConfigError> {
        s.trim()
            .chars()
            .filter(|&c| c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ConfigError::Payload(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Payload)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for Payload {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for Payload {
    fn from(bits: Vec<bool>) -> Self {
        Payload(bits)
    }
}

/// Prints as a string of `0`/`1`.
impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
