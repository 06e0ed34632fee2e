//! Matrix permanents.
//!
//! [`permanent_ryser`] is the production engine: Ryser's inclusion–exclusion
//! formula
//!
//! ```text
//! Per(A) = (−1)ⁿ Σ_{S ⊆ [n]} (−1)^{|S|} Π_i Σ_{j∈S} A[i][j]
//! ```
//!
//! walked in Gray-code order so each subset differs from its predecessor by
//! one column, and the row sums are updated in `O(n)`. The subset range is
//! cut into a fixed number of contiguous chunks which may run in parallel;
//! chunk partials are always added in chunk order, so the result does not
//! depend on the thread count.
//!
//! Rounding error grows roughly like `2ⁿ·ε` for adversarial inputs. There is
//! no extended-precision fallback.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

pub const RYSER_MAX_N: usize = 30;
pub const NAIVE_MAX_N: usize = 9;

/// Below this size the subset loop runs as a single chunk.
const PARALLEL_MIN_N: usize = 14;
/// Chunk count used for large matrices, independent of the thread count.
pub const DEFAULT_CHUNKS: usize = 64;

fn check_square(a: &ComplexMatrix, limit: usize) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "permanent needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > limit {
        return Err(Error::TooLarge(format!(
            "permanent of {n}x{n} matrix exceeds limit {limit}"
        )));
    }
    Ok(n)
}

/// Permanent by Ryser's formula with Gray-code updates.
///
/// Uses [`DEFAULT_CHUNKS`] chunks on the current rayon pool for `n ≥ 14`.
pub fn permanent_ryser(a: &ComplexMatrix) -> Result<Complex64> {
    let n = check_square(a, RYSER_MAX_N)?;
    let chunks = if n >= PARALLEL_MIN_N {
        DEFAULT_CHUNKS
    } else {
        1
    };
    ryser_chunked(a, n, chunks)
}

/// Single-chunk Ryser evaluation on the calling thread.
pub fn permanent_ryser_serial(a: &ComplexMatrix) -> Result<Complex64> {
    let n = check_square(a, RYSER_MAX_N)?;
    ryser_chunked(a, n, 1)
}

/// Ryser evaluation split into `chunks` contiguous Gray-code ranges.
pub fn permanent_ryser_chunked(a: &ComplexMatrix, chunks: usize) -> Result<Complex64> {
    let n = check_square(a, RYSER_MAX_N)?;
    if chunks == 0 {
        return Err(Error::InvalidInput("chunk count must be positive".into()));
    }
    ryser_chunked(a, n, chunks)
}

/// Runs [`permanent_ryser`] on a dedicated pool of `threads` workers.
pub fn permanent_ryser_with_threads(a: &ComplexMatrix, threads: usize) -> Result<Complex64> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let n = check_square(a, RYSER_MAX_N)?;
    let chunks = if n >= PARALLEL_MIN_N {
        DEFAULT_CHUNKS
    } else {
        1
    };
    pool.install(|| ryser_chunked(a, n, chunks))
}

fn ryser_chunked(a: &ComplexMatrix, n: usize, chunks: usize) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // column-major copy so adding a column is a contiguous walk
    let cols: Vec<Complex64> = (0..n)
        .flat_map(|j| (0..n).map(move |i| a[(i, j)]))
        .collect();
    let total: u64 = 1u64 << n;
    let chunks = (chunks as u64).clamp(1, total);
    let bounds = |c: u64| c * total / chunks;

    let partials: Vec<Complex64> = if chunks == 1 {
        vec![ryser_range(&cols, n, 0, total)]
    } else {
        (0..chunks)
            .into_par_iter()
            .map(|c| ryser_range(&cols, n, bounds(c), bounds(c + 1)))
            .collect()
    };
    let sum: Complex64 = partials.into_iter().sum();
    Ok(if n % 2 == 1 { -sum } else { sum })
}

/// Σ over Gray-code positions `k ∈ [start, end)` of `(−1)^{|g(k)|} Π_i rowsum_i`.
fn ryser_range(cols: &[Complex64], n: usize, start: u64, end: u64) -> Complex64 {
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let gray = start ^ (start >> 1);
    for j in 0..n {
        if gray >> j & 1 == 1 {
            for (r, c) in row_sums.iter_mut().zip(&cols[j * n..(j + 1) * n]) {
                *r += c;
            }
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in start..end {
        if k > start {
            let j = k.trailing_zeros() as usize;
            let column = &cols[j * n..(j + 1) * n];
            if (k ^ (k >> 1)) >> j & 1 == 1 {
                row_sums.iter_mut().zip(column).for_each(|(r, c)| *r += c);
            } else {
                row_sums.iter_mut().zip(column).for_each(|(r, c)| *r -= c);
            }
        }
        if k == 0 {
            continue;
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |p, r| p * r);
        // popcount of the Gray code has the parity of k
        if k & 1 == 1 {
            acc -= prod;
        } else {
            acc += prod;
        }
    }
    acc
}

/// Permanent as a sum over all `n!` permutations. Test oracle only.
pub fn permanent_naive(a: &ComplexMatrix) -> Result<Complex64> {
    let n = check_square(a, NAIVE_MAX_N)?;
    let mut used = vec![false; n];
    Ok(naive_rec(a, 0, &mut used))
}

fn naive_rec(a: &ComplexMatrix, row: usize, used: &mut [bool]) -> Complex64 {
    let n = used.len();
    if row == n {
        return Complex64::new(1.0, 0.0);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for col in 0..n {
        if !used[col] {
            used[col] = true;
            sum += a[(row, col)] * naive_rec(a, row + 1, used);
            used[col] = false;
        }
    }
    sum
}

/// One timing sample from [`bench_sweep`].
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub threads: usize,
    pub rep: usize,
    pub nanos: u128,
}

/// Times [`permanent_ryser`] on random complex matrices of each size.
pub fn bench_sweep(
    sizes: &[usize],
    reps: usize,
    threads: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n in sizes {
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for rep in 0..reps {
            let t0 = Instant::now();
            let value = permanent_ryser_with_threads(&a, threads)?;
            let nanos = t0.elapsed().as_nanos();
            std::hint::black_box(value);
            rows.push(BenchRow {
                n,
                threads,
                rep,
                nanos,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn small_cases() {
        let one = ComplexMatrix::from_rows(&[vec![Complex64::new(0.3, -2.0)]]).unwrap();
        assert_eq!(permanent_ryser(&one).unwrap(), Complex64::new(0.3, -2.0));
        let ones = ComplexMatrix::from_fn(2, 2, |_, _| c(1.0));
        assert!((permanent_ryser(&ones).unwrap() - c(2.0)).norm() < 1e-15);
        let m = ComplexMatrix::from_rows(&[vec![c(1.0), c(2.0)], vec![c(3.0), c(4.0)]]).unwrap();
        assert_eq!(permanent_naive(&m).unwrap(), c(10.0));
        assert!((permanent_ryser(&m).unwrap() - c(10.0)).norm() < 1e-14);
        assert_eq!(
            permanent_naive(&ComplexMatrix::identity(3)).unwrap(),
            c(1.0)
        );
        assert_eq!(
            permanent_naive(&ComplexMatrix::from_fn(4, 4, |_, _| c(1.0))).unwrap(),
            c(24.0)
        );
        assert_eq!(
            permanent_ryser(&ComplexMatrix::zeros(0, 0)).unwrap(),
            c(1.0)
        );
    }

    #[test]
    fn ryser_matches_naive_6x6() {
        let a = random(6, 11);
        let p = permanent_naive(&a).unwrap();
        let q = permanent_ryser(&a).unwrap();
        assert!((p - q).norm() <= 1e-10 * (1.0 + p.norm()));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            permanent_ryser(&ComplexMatrix::zeros(2, 3)),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            permanent_naive(&ComplexMatrix::identity(10)),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            permanent_ryser(&ComplexMatrix::identity(31)),
            Err(Error::TooLarge(_))
        ));
        assert!(permanent_ryser_chunked(&ComplexMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn chunk_count_does_not_matter() {
        let a = random(12, 5);
        let base = permanent_ryser_serial(&a).unwrap();
        for chunks in [2, 3, 7, 64, 4096, 1 << 20] {
            let p = permanent_ryser_chunked(&a, chunks).unwrap();
            assert!((p - base).norm() <= 1e-12 * base.norm(), "chunks={chunks}");
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let a = random(15, 9);
        let one = permanent_ryser_with_threads(&a, 1).unwrap();
        let four = permanent_ryser_with_threads(&a, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn row_scaling_is_linear() {
        let a = random(5, 2);
        let k = Complex64::new(0.5, -1.5);
        let mut b = a.clone();
        for j in 0..5 {
            b[(2, j)] *= k;
        }
        let pa = permanent_ryser(&a).unwrap();
        let pb = permanent_ryser(&b).unwrap();
        assert!((pb - pa * k).norm() < 1e-12 * (1.0 + pb.norm()));
    }
}
