//! Inverse-distance weighting: candidates get probability proportional to
//! one over their phonological distance, then variants are drawn with a
//! seeded, portable generator so runs reproduce bit-for-bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rules::VariantCandidate;

/// Floor applied to a zero distance before inversion; a homophone spelling
/// stays overwhelmingly likely without dividing by zero.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("cannot build a distribution over zero candidates")]
    EmptyCandidates,
    #[error("candidate `{0}` has no distance; score candidates first")]
    UnscoredCandidate(String),
    #[error("candidate `{surface}` has negative distance {distance}")]
    NegativeDistance { surface: String, distance: f64 },
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
}

/// Candidates with normalized sampling probabilities attached.
#[derive(Debug, Clone)]
pub struct VariantDistribution {
    pub candidates: Vec<VariantCandidate>,
    /// Sum of inverse effective distances (the normalizer).
    pub z: f64,
    pub epsilon: f64,
}

impl VariantDistribution {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Converts scored candidates into a distribution: effective distance
/// `max(d, epsilon)`, probability `d_i^-1 / sum_j d_j^-1`.
pub fn candidate_probabilities(
    mut candidates: Vec<VariantCandidate>,
    epsilon: f64,
) -> Result<VariantDistribution, SamplerError> {
    if candidates.is_empty() {
        return Err(SamplerError::EmptyCandidates);
    }
    if epsilon <= 0.0 {
        return Err(SamplerError::InvalidEpsilon(epsilon));
    }
    let mut inverses = Vec::with_capacity(candidates.len());
    for candidate in &candidates {
        let distance = candidate
            .distance
            .ok_or_else(|| SamplerError::UnscoredCandidate(candidate.surface.clone()))?;
        if distance < 0.0 {
            return Err(SamplerError::NegativeDistance {
                surface: candidate.surface.clone(),
                distance,
            });
        }
        inverses.push(1.0 / distance.max(epsilon));
    }
    let z: f64 = inverses.iter().sum();
    for (candidate, inverse) in candidates.iter_mut().zip(&inverses) {
        candidate.probability = Some(inverse / z);
    }
    Ok(VariantDistribution {
        candidates,
        z,
        epsilon,
    })
}

/// The seeded generator used everywhere randomness is needed. ChaCha with
/// eight rounds: a documented, portable keystream, so one seed produces the
/// same draws on every platform.
pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a work unit (e.g. one sentence) from
/// the run seed; splitmix64 over the pair keeps streams decorrelated no
/// matter how work is scheduled.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut x = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Draws one candidate by inverse-CDF over the candidate order, advancing
/// the generator deterministically.
pub fn sample_variant<'a>(
    dist: &'a VariantDistribution,
    rng: &mut SampleRng,
) -> &'a VariantCandidate {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for candidate in &dist.candidates {
        cumulative += candidate.probability.unwrap_or(0.0);
        if u < cumulative {
            return candidate;
        }
    }
    dist.candidates.last().expect("distribution is never empty")
}
