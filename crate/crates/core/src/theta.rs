//! Theta-cycles of filtrations mod `p` for a non-ordinary form of weight
//! `4 <= k <= p - 1`, and the exceptional weights and slopes they predict.
//!
//! Starting at `w = k`, each application of Theta adds `p + 1` until the
//! filtration reaches `p(p + 1 - k)`, which is divisible by `p`; there it
//! falls to `p + 3 - k` and climbs again to `(k - 2)p`, after which the cycle
//! closes at `k`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::modforms::is_prime;
use crate::slopes::SlopeRecord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThetaError {
    #[error("Theta-cycles need a prime p >= 5, got {0}")]
    BadPrime(u64),
    #[error("seed weight {k} outside the even range 4..={max}")]
    BadSeed { k: u64, max: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaCycle {
    pub p: u64,
    pub seed: u64,
    /// `w(Theta^i f)` for `i = 0..p-2`.
    pub filtrations: Vec<u64>,
}

impl ThetaCycle {
    /// Index at which the filtration is divisible by `p` and first falls.
    pub fn first_drop(&self) -> usize {
        (self.p - self.seed) as usize
    }

    /// Filtration after one more application of Theta at index `i`
    /// (wrapping around at the end of the cycle).
    pub fn next(&self, i: usize) -> u64 {
        self.filtrations[(i + 1) % self.filtrations.len()]
    }

    /// Indices `i` with `w(Theta^(i+1) f) < w(Theta^i f)`, taken cyclically.
    pub fn drops(&self) -> Vec<usize> {
        (0..self.filtrations.len()).filter(|&i| self.next(i) < self.filtrations[i]).collect()
    }

    /// Weight reached from the last filtration `(k-2)p` by the falling rule
    /// `w + p + 1 - n(p - 1)` with `n = k - 1`.
    pub fn closing_weight(&self) -> u64 {
        let last = *self.filtrations.last().expect("nonempty cycle");
        last + self.p + 1 - (self.seed - 1) * (self.p - 1)
    }
}

fn check(p: u64, k: u64) -> Result<(), ThetaError> {
    if p < 5 || !is_prime(p) {
        return Err(ThetaError::BadPrime(p));
    }
    if k < 4 || k > p - 1 || k % 2 == 1 {
        return Err(ThetaError::BadSeed { k, max: p - 1 });
    }
    Ok(())
}

pub fn theta_cycle(p: u64, k: u64) -> Result<ThetaCycle, ThetaError> {
    check(p, k)?;
    let rise = p + 1;
    let top = p - k; // index of p(p + 1 - k)
    let filtrations = (0..=p - 2)
        .map(|i| if i <= top { k + i * rise } else { (p + 3 - k) + (i - top - 1) * rise })
        .collect();
    Ok(ThetaCycle { p, seed: k, filtrations })
}

/// Cycle weights with their predicted slope: the position along the
/// progression starting at the seed, or along the one starting at `p + 3 - k`.
pub fn predicted_slope_profile(p: u64, k: u64, k_max: u64) -> Result<Vec<(u64, u32)>, ThetaError> {
    let cycle = theta_cycle(p, k)?;
    let top = cycle.first_drop();
    let mut profile: Vec<(u64, u32)> = cycle
        .filtrations
        .iter()
        .enumerate()
        .filter(|(_, &w)| w <= k_max)
        .map(|(i, &w)| {
            let position = if i <= top { i + 1 } else { i - top };
            (w, position as u32)
        })
        .collect();
    profile.sort();
    Ok(profile)
}

pub fn predicted_exception_weights(p: u64, k: u64, k_max: u64) -> Result<Vec<u64>, ThetaError> {
    Ok(predicted_slope_profile(p, k, k_max)?.into_iter().map(|(w, _)| w).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    /// Exactly one exceptional slope, equal to the prediction.
    Match,
    /// Computed, but the exceptional slopes differ from `[predicted]`.
    Mismatch { found: Vec<String> },
    /// Not covered by the supplied records.
    Unverified,
    /// Exceptional slopes at a weight the cycle does not predict.
    Unexpected { found: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckItem {
    pub weight: u64,
    pub predicted_slope: Option<u32>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThetaReport {
    NotApplicable(ThetaError),
    Checked { p: u64, seed: u64, items: Vec<CheckItem> },
}

impl ThetaReport {
    /// Every prediction inside the sweep matched and no unexpected exception
    /// turned up.
    pub fn full_match(&self) -> bool {
        match self {
            ThetaReport::NotApplicable(_) => false,
            ThetaReport::Checked { items, .. } => items
                .iter()
                .all(|it| matches!(it.status, CheckStatus::Match | CheckStatus::Unverified)),
        }
    }

    pub fn items(&self) -> &[CheckItem] {
        match self {
            ThetaReport::NotApplicable(_) => &[],
            ThetaReport::Checked { items, .. } => items,
        }
    }
}

/// Compares the cycle's predictions with the exceptional slopes in `records`
/// for prime `p`. Cycle weights absent from the records are `Unverified`.
pub fn crosscheck_theta<'a, I>(records: I, p: u64, seed: u64) -> ThetaReport
where
    I: IntoIterator<Item = &'a SlopeRecord>,
{
    let profile = match predicted_slope_profile(p, seed, u64::MAX) {
        Ok(profile) => profile,
        Err(e) => return ThetaReport::NotApplicable(e),
    };
    let computed: BTreeMap<u64, &SlopeRecord> =
        records.into_iter().filter(|r| r.p == p).map(|r| (u64::from(r.k), r)).collect();
    let render = |r: &SlopeRecord| r.exceptional.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut items: Vec<CheckItem> = profile
        .iter()
        .map(|&(weight, slope)| {
            let status = match computed.get(&weight) {
                None => CheckStatus::Unverified,
                Some(r) if r.exceptional.len() == 1 && r.exceptional[0] == slope => CheckStatus::Match,
                Some(r) => CheckStatus::Mismatch { found: render(r) },
            };
            CheckItem { weight, predicted_slope: Some(slope), status }
        })
        .collect();
    let predicted: Vec<u64> = profile.iter().map(|&(w, _)| w).collect();
    for (&weight, r) in &computed {
        if r.is_exceptional_weight() && !predicted.contains(&weight) {
            items.push(CheckItem { weight, predicted_slope: None, status: CheckStatus::Unexpected { found: render(r) } });
        }
    }
    items.sort_by_key(|it| it.weight);
    ThetaReport::Checked { p, seed, items }
}
