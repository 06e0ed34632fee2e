//! Photon-number configurations and the submatrices whose permanents give
//! transition amplitudes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Photon count per mode. Orders lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationConfig(Vec<u32>);

impl OccupationConfig {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    /// `n` single photons in the first `n` of `m` modes.
    pub fn first_modes(n: usize, m: usize) -> Self {
        assert!(n <= m);
        Self((0..m).map(|k| u32::from(k < n)).collect())
    }

    pub fn vacuum(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&s| u64::from(s)).sum()
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    /// `Π_j s_j!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&s| (1..=s).map(f64::from).product::<f64>())
            .product()
    }
}

impl From<Vec<u32>> for OccupationConfig {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// All `m`-mode configurations holding exactly `n` photons, lexicographically
/// increasing.
pub fn enumerate_configs(n: u32, m: usize) -> Result<Vec<OccupationConfig>> {
    let count = config_count(u64::from(n), m)?;
    let mut out = Vec::with_capacity(usize::try_from(count).unwrap_or(0));
    let mut current = vec![0u32; m];
    fill(&mut current, 0, n, &mut out);
    Ok(out)
}

fn fill(current: &mut [u32], mode: usize, left: u32, out: &mut Vec<OccupationConfig>) {
    let m = current.len();
    if mode + 1 == m {
        current[mode] = left;
        out.push(OccupationConfig(current.to_vec()));
        return;
    }
    for s in 0..=left {
        current[mode] = s;
        fill(current, mode + 1, left - s, out);
    }
}

/// `C(n + m − 1, n)` with overflow checking.
pub fn config_count(n: u64, m: usize) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidDimension("need at least one mode".into()));
    }
    let m = m as u64;
    let too_large = || Error::TooLarge(format!("C({n}+{m}-1, {n}) overflows u64"));
    let mut acc: u64 = 1;
    for k in 1..=n {
        // acc = C(m-1+k-1, k-1); the product below is divisible by k
        let next = u128::from(acc) * u128::from(m - 1 + k) / u128::from(k);
        acc = u64::try_from(next).map_err(|_| too_large())?;
    }
    Ok(acc)
}

/// The `k × k` matrix whose permanent is the unnormalized amplitude for
/// `input → output`.
///
/// Row block `i` repeats row `i` of `u` `input[i]` times; column block `j`
/// repeats column `j` `output[j]` times.
pub fn submatrix(
    u: &ComplexMatrix,
    input: &OccupationConfig,
    output: &OccupationConfig,
) -> Result<ComplexMatrix> {
    if input.modes() != u.rows() || output.modes() != u.cols() {
        return Err(Error::InvalidDimension(format!(
            "configs with {} and {} modes do not fit a {}x{} matrix",
            input.modes(),
            output.modes(),
            u.rows(),
            u.cols()
        )));
    }
    if input.total() != output.total() {
        return Err(Error::PhotonNumberMismatch {
            input: input.total(),
            output: output.total(),
        });
    }
    let rows = expand(input);
    let cols = expand(output);
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        u[(rows[r], cols[c])]
    }))
}

fn expand(config: &OccupationConfig) -> Vec<usize> {
    config
        .0
        .iter()
        .enumerate()
        .flat_map(|(mode, &s)| std::iter::repeat_n(mode, s as usize))
        .collect()
}
