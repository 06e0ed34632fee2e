//! Brute-force simulation in a truncated Fock space.
//!
//! States are dense tensors over occupations `0..=cutoff` in every mode. The
//! interferometer is applied element by element from [`reck_decompose`], with
//! each beamsplitter acting exactly on the two-mode blocks of fixed photon
//! number. Displacements use the exact matrix elements `⟨k|D(α)|l⟩`. Nothing
//! here evaluates a permanent, which makes this module an independent check
//! of [`crate::exact`].
//!
//! Probability mass pushed above the cutoff is discarded and accumulated as
//! leakage; any operation that takes the total past [`LEAKAGE_TOL`] fails
//! with [`Error::CutoffTooSmall`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{propagate_displacements, InputFamily, InputSpec, Outcome, OutputDistribution};
use crate::fock::OccupationConfig;
use crate::io::{fmt_f64, json_array, json_int_array, JsonObject};
use crate::numerics::{reck_decompose, ComplexMatrix, ElementaryOp, UnitaryMatrix};

/// Largest probability mass the truncation may lose before a run is rejected.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// Upper bound on the tensor size `(cutoff + 1)^m`.
pub const MAX_TENSOR_LEN: usize = 1 << 28;
/// Factorial tables stay finite up to 170!.
pub const MAX_CUTOFF: usize = 170;
/// Cutoff increment when the default leaks too much.
pub const CUTOFF_STEP: usize = 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense amplitude tensor with mode 0 as the most significant index.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    m: usize,
    cutoff: usize,
    amplitudes: Vec<Complex64>,
    leakage: f64,
}

impl TruncatedState {
    pub fn vacuum(m: usize, cutoff: usize) -> Result<Self> {
        let len = tensor_len(m, cutoff)?;
        let mut amplitudes = vec![ZERO; len];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            m,
            cutoff,
            amplitudes,
            leakage: 0.0,
        })
    }

    /// Tensor product of single-mode vectors, each of length `cutoff + 1`.
    pub fn product(modes: &[Vec<Complex64>], cutoff: usize) -> Result<Self> {
        let m = modes.len();
        tensor_len(m, cutoff)?;
        if modes.iter().any(|v| v.len() != cutoff + 1) {
            return Err(Error::InvalidDimension(
                "single-mode vectors must have cutoff + 1 entries".into(),
            ));
        }
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for v in modes {
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| v.iter().map(move |b| a * b))
                .collect();
        }
        Ok(Self {
            m,
            cutoff,
            amplitudes,
            leakage: 0.0,
        })
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Probability mass lost to truncation so far.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn amplitude(&self, config: &OccupationConfig) -> Complex64 {
        self.index_of(config).map_or(ZERO, |k| self.amplitudes[k])
    }

    fn dim(&self) -> usize {
        self.cutoff + 1
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim().pow((self.m - 1 - mode) as u32)
    }

    fn index_of(&self, config: &OccupationConfig) -> Option<usize> {
        if config.modes() != self.m {
            return None;
        }
        let mut idx = 0;
        for &s in config.occupations() {
            if s as usize > self.cutoff {
                return None;
            }
            idx = idx * self.dim() + s as usize;
        }
        Some(idx)
    }

    fn config_at(&self, mut idx: usize) -> OccupationConfig {
        let mut occ = vec![0u32; self.m];
        for slot in occ.iter_mut().rev() {
            *slot = (idx % self.dim()) as u32;
            idx /= self.dim();
        }
        OccupationConfig::new(occ)
    }

    fn occupation(&self, idx: usize, mode: usize) -> usize {
        idx / self.stride(mode) % self.dim()
    }

    /// Squared norm of the part with exactly `total` photons.
    pub fn sector_norm_sqr(&self, total: u64) -> f64 {
        (0..self.amplitudes.len())
            .filter(|&k| self.config_at(k).total() == total)
            .map(|k| self.amplitudes[k].norm_sqr())
            .sum()
    }

    fn record_loss(&mut self, before: f64) -> Result<()> {
        let after = self.norm_sqr();
        self.leakage += (before - after).max(0.0);
        if self.leakage > LEAKAGE_TOL {
            return Err(Error::CutoffTooSmall {
                cutoff: self.cutoff,
                leakage: self.leakage,
                tol: LEAKAGE_TOL,
            });
        }
        Ok(())
    }

    /// Applies a `(cutoff+1)²` matrix to one mode.
    pub fn apply_single_mode(&mut self, mode: usize, op: &ComplexMatrix) -> Result<()> {
        let d = self.dim();
        if mode >= self.m || op.rows() != d || op.cols() != d {
            return Err(Error::InvalidDimension(format!(
                "single-mode operator does not fit mode {mode}"
            )));
        }
        let before = self.norm_sqr();
        let stride = self.stride(mode);
        let block = stride * d;
        self.amplitudes.par_chunks_mut(block).for_each(|chunk| {
            let mut v = vec![ZERO; d];
            for inner in 0..stride {
                for (l, slot) in v.iter_mut().enumerate() {
                    *slot = chunk[inner + l * stride];
                }
                for k in 0..d {
                    chunk[inner + k * stride] = op.row(k).iter().zip(&v).map(|(a, b)| a * b).sum();
                }
            }
        });
        self.record_loss(before)
    }

    /// Applies one beamsplitter or phase shifter.
    pub fn apply_op(&mut self, op: &ElementaryOp) -> Result<()> {
        op.validate(self.m)?;
        match *op {
            ElementaryOp::PhaseShifter { phi, mode } => {
                let stride = self.stride(mode);
                let d = self.dim();
                let phases: Vec<Complex64> = (0..d)
                    .map(|k| Complex64::from_polar(1.0, phi * k as f64))
                    .collect();
                self.amplitudes
                    .par_iter_mut()
                    .enumerate()
                    .for_each(|(idx, a)| *a *= phases[idx / stride % d]);
                Ok(())
            }
            ElementaryOp::Beamsplitter {
                theta,
                phi,
                mode_a,
                mode_b,
            } => {
                let block = ElementaryOp::beamsplitter_block(theta, phi);
                let table = BeamsplitterTable::new(block, self.cutoff);
                self.apply_two_mode(mode_a, mode_b, &table)
            }
        }
    }

    fn apply_two_mode(
        &mut self,
        mode_a: usize,
        mode_b: usize,
        table: &BeamsplitterTable,
    ) -> Result<()> {
        let before = self.norm_sqr();
        let d = self.dim();
        let (sa, sb) = (self.stride(mode_a), self.stride(mode_b));
        let bases: Vec<usize> = (0..self.amplitudes.len())
            .filter(|&k| self.occupation(k, mode_a) == 0 && self.occupation(k, mode_b) == 0)
            .collect();
        let amps = &self.amplitudes;
        let blocks: Vec<Vec<Complex64>> = bases
            .par_iter()
            .map(|&base| {
                let mut out = vec![ZERO; d * d];
                for p in 0..d {
                    for q in 0..d {
                        let a = amps[base + p * sa + q * sb];
                        if a == ZERO {
                            continue;
                        }
                        for &(k, coeff) in table.row(p, q) {
                            out[k * d + (p + q - k)] += a * coeff;
                        }
                    }
                }
                out
            })
            .collect();
        for (base, out) in bases.iter().zip(blocks) {
            for p in 0..d {
                for q in 0..d {
                    self.amplitudes[base + p * sa + q * sb] = out[p * d + q];
                }
            }
        }
        self.record_loss(before)
    }

    /// `{m, cutoff, leakage, amplitudes: [{config, amp: [re, im]}]}` for
    /// nonzero entries.
    pub fn to_json(&self) -> String {
        let entries = (0..self.amplitudes.len())
            .filter(|&k| self.amplitudes[k] != ZERO)
            .map(|k| {
                let a = self.amplitudes[k];
                JsonObject::new()
                    .raw("config", &json_int_array(self.config_at(k).occupations()))
                    .raw("amp", &format!("[{},{}]", fmt_f64(a.re), fmt_f64(a.im)))
                    .finish()
            });
        JsonObject::new()
            .int("m", self.m as u64)
            .int("cutoff", self.cutoff as u64)
            .num("leakage", self.leakage)
            .raw("amplitudes", &json_array(entries))
            .finish()
    }
}

fn tensor_len(m: usize, cutoff: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidDimension(
            "state needs at least one mode".into(),
        ));
    }
    if cutoff > MAX_CUTOFF {
        return Err(Error::TooLarge(format!(
            "cutoff {cutoff} exceeds {MAX_CUTOFF}"
        )));
    }
    (cutoff + 1)
        .checked_pow(m as u32)
        .filter(|&len| len <= MAX_TENSOR_LEN)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "(cutoff+1)^m = {}^{m} exceeds {MAX_TENSOR_LEN}",
                cutoff + 1
            ))
        })
}

fn sqrt_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0f64;
    out.push(1.0);
    for k in 1..=n {
        acc *= (k as f64).sqrt();
        out.push(acc);
    }
    out
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

/// For every input `(p, q)` on the two modes, the nonzero output amplitudes
/// `(k, c)` meaning `c·|k, p+q−k⟩`, restricted to outputs below the cutoff.
struct BeamsplitterTable {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl BeamsplitterTable {
    fn new(b: [[Complex64; 2]; 2], cutoff: usize) -> Self {
        let d = cutoff + 1;
        let sf = sqrt_factorials(2 * cutoff);
        let pow = |z: Complex64, e: usize| z.powu(e as u32);
        let mut rows = Vec::with_capacity(d * d);
        for p in 0..d {
            // (B_aa a† + B_ab b†)^p = Σ_k C(p,k) B_aa^k B_ab^{p−k} a†^k b†^{p−k}
            let cp = binomial_row(p);
            let first: Vec<Complex64> = (0..=p)
                .map(|k| cp[k] * pow(b[0][0], k) * pow(b[0][1], p - k))
                .collect();
            for q in 0..d {
                let cq = binomial_row(q);
                let second: Vec<Complex64> = (0..=q)
                    .map(|l| cq[l] * pow(b[1][0], l) * pow(b[1][1], q - l))
                    .collect();
                let total = p + q;
                let mut poly = vec![ZERO; total + 1];
                for (k, x) in first.iter().enumerate() {
                    for (l, y) in second.iter().enumerate() {
                        poly[k + l] += x * y;
                    }
                }
                let norm = sf[p] * sf[q];
                let row = poly
                    .into_iter()
                    .enumerate()
                    .filter(|&(k, c)| k <= cutoff && total - k <= cutoff && c != ZERO)
                    .map(|(k, c)| (k, c * (sf[k] * sf[total - k] / norm)))
                    .collect();
                rows.push(row);
            }
        }
        Self { dim: d, rows }
    }

    fn row(&self, p: usize, q: usize) -> &[(usize, Complex64)] {
        &self.rows[p * self.dim + q]
    }
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by three-term recurrence.
pub fn assoc_laguerre(n: usize, a: usize, x: f64) -> f64 {
    let a = a as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + a - x) * cur - (j + a) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Matrix elements `⟨k|D(α)|l⟩` for `k, l ≤ cutoff`.
///
/// For `k ≥ l`: `√(l!/k!) α^{k−l} e^{−|α|²/2} L_l^{(k−l)}(|α|²)`; the upper
/// triangle uses `−ᾱ` in place of `α` with the roles of `k` and `l` swapped.
pub fn displacement_matrix(alpha: Complex64, cutoff: usize) -> Result<ComplexMatrix> {
    if cutoff > MAX_CUTOFF {
        return Err(Error::TooLarge(format!(
            "cutoff {cutoff} exceeds {MAX_CUTOFF}"
        )));
    }
    let x = alpha.norm_sqr();
    let gauss = (-x / 2.0).exp();
    let sf = sqrt_factorials(cutoff);
    let d = cutoff + 1;
    Ok(ComplexMatrix::from_fn(d, d, |k, l| {
        let (hi, lo, base) = if k >= l {
            (k, l, alpha)
        } else {
            (l, k, -alpha.conj())
        };
        let diff = hi - lo;
        base.powu(diff as u32) * (sf[lo] / sf[hi] * gauss * assoc_laguerre(lo, diff, x))
    }))
}

/// Default cutoff `n + ⌈b² + 6b⌉ + 4` for largest displacement magnitude `b`.
pub fn default_cutoff(n: usize, max_displacement: f64) -> usize {
    let b = max_displacement.abs();
    n + (b * b + 6.0 * b).ceil() as usize + 4
}

/// Loads the input state into a truncated Fock space.
pub fn prepare_input(spec: &InputSpec, cutoff: usize) -> Result<TruncatedState> {
    let d = cutoff + 1;
    let basis = |k: usize| {
        let mut v = vec![ZERO; d];
        if k < d {
            v[k] = Complex64::new(1.0, 0.0);
        }
        v
    };
    let mut modes = Vec::with_capacity(spec.m());
    for mode in 0..spec.m() {
        if mode >= spec.n() {
            modes.push(basis(0));
            continue;
        }
        let v = match spec.family() {
            InputFamily::Fock => basis(1),
            InputFamily::Dspfs => {
                // D(α)|1⟩
                let disp = displacement_matrix(spec.alphas()[mode], cutoff)?;
                disp.apply(&basis(1))
            }
            InputFamily::Spacs => {
                // a†|α⟩ / √(1 + |α|²)
                let alpha = spec.alphas()[mode];
                let coherent = displacement_matrix(alpha, cutoff)?.apply(&basis(0));
                let norm = (1.0 + alpha.norm_sqr()).sqrt();
                (0..d)
                    .map(|k| {
                        if k == 0 {
                            ZERO
                        } else {
                            coherent[k - 1] * ((k as f64).sqrt() / norm)
                        }
                    })
                    .collect()
            }
        };
        modes.push(v);
    }
    let mut state = TruncatedState::product(&modes, cutoff)?;
    state.leakage = (1.0 - state.norm_sqr()).max(0.0);
    if state.leakage > LEAKAGE_TOL {
        return Err(Error::CutoffTooSmall {
            cutoff,
            leakage: state.leakage,
            tol: LEAKAGE_TOL,
        });
    }
    Ok(state)
}

/// Sends the state through `u`, one mesh element at a time.
pub fn apply_unitary(mut state: TruncatedState, u: &UnitaryMatrix) -> Result<TruncatedState> {
    if u.dim() != state.m {
        return Err(Error::InvalidDimension(format!(
            "{}-mode unitary applied to {}-mode state",
            u.dim(),
            state.m
        )));
    }
    for op in reck_decompose(u) {
        state.apply_op(&op)?;
    }
    Ok(state)
}

/// Applies `D(−β_j)` to every mode `j`.
pub fn counter_displace(mut state: TruncatedState, betas: &[Complex64]) -> Result<TruncatedState> {
    if betas.len() != state.m {
        return Err(Error::InvalidInput(format!(
            "{} displacements for {} modes",
            betas.len(),
            state.m
        )));
    }
    for (mode, beta) in betas.iter().enumerate() {
        if *beta == ZERO {
            continue;
        }
        let disp = displacement_matrix(-beta, state.cutoff)?;
        state.apply_single_mode(mode, &disp)?;
    }
    Ok(state)
}

/// Photon-number statistics of every basis state in the tensor.
///
/// The result sums to the state's squared norm, not necessarily to one.
pub fn measure_distribution(state: &TruncatedState) -> OutputDistribution {
    let entries = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, a)| (state.config_at(k), Outcome::from_amplitude(*a)));
    OutputDistribution::from_entries(state.m, entries)
        .expect("configs match the state's mode count")
}

/// Result of a full prepare → interfere → counter-displace → detect run.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub distribution: OutputDistribution,
    pub cutoff: usize,
    pub leakage: f64,
    pub betas: Vec<Complex64>,
}

/// Runs the complete measurement pipeline for `spec` through `u`.
///
/// Displaced inputs are counter-displaced by `−β` with `β = Uᵀα`. When
/// `cutoff` is `None`, the run starts at [`default_cutoff`] for the larger of
/// the input and output displacement magnitudes and grows by
/// [`CUTOFF_STEP`] while leakage exceeds [`LEAKAGE_TOL`]. An explicit cutoff
/// is used as given.
pub fn run_pipeline(
    spec: &InputSpec,
    u: &UnitaryMatrix,
    cutoff: Option<usize>,
) -> Result<OracleRun> {
    if spec.m() != u.dim() {
        return Err(Error::InvalidDimension(format!(
            "input has {} modes, unitary {}",
            spec.m(),
            u.dim()
        )));
    }
    let betas = match spec.family() {
        InputFamily::Fock => vec![ZERO; spec.m()],
        _ => propagate_displacements(u, &spec.padded_alphas())?,
    };
    let attempt = |cutoff: usize| -> Result<OracleRun> {
        let state = prepare_input(spec, cutoff)?;
        let state = apply_unitary(state, u)?;
        let state = counter_displace(state, &betas)?;
        Ok(OracleRun {
            distribution: measure_distribution(&state),
            cutoff,
            leakage: state.leakage,
            betas: betas.clone(),
        })
    };
    if let Some(cutoff) = cutoff {
        return attempt(cutoff);
    }
    let largest = spec
        .alphas()
        .iter()
        .chain(&betas)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut cutoff = default_cutoff(spec.n(), largest);
    loop {
        match attempt(cutoff) {
            Err(Error::CutoffTooSmall { leakage, .. }) if cutoff + CUTOFF_STEP <= MAX_CUTOFF => {
                log::debug!(
                    "cutoff {cutoff} leaked {leakage:e}, retrying with {}",
                    cutoff + CUTOFF_STEP
                );
                cutoff += CUTOFF_STEP;
            }
            other => return other,
        }
    }
}
