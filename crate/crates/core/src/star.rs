use std::fmt;

use serde::{Deserialize, Serialize};

pub const N_CLASSES: usize = 5;

/// A star rating in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Star(u8);

impl Star {
    pub const ALL: [Star; N_CLASSES] = [Star(1), Star(2), Star(3), Star(4), Star(5)];

    pub fn new(value: u8) -> Option<Self> {
        (1..=5).contains(&value).then_some(Star(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based class index, `stars - 1`.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < N_CLASSES, "class index {index} out of range");
        Star(index as u8 + 1)
    }
}

impl TryFrom<u8> for Star {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Star::new(value).ok_or_else(|| format!("star rating {value} outside 1..=5"))
    }
}

impl From<Star> for u8 {
    fn from(star: Star) -> u8 {
        star.0
    }
}

impl fmt::Display for Star {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of the largest score; ties go to the smaller star.
pub fn argmax_star(scores: &[f64]) -> Star {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Star::from_index(best)
}
