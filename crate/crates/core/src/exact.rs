//! Closed-form output amplitudes for the three input families.
//!
//! - Fock: `γ_S = Per(U_{T,S}) / √(Π t_i! Π s_j!)`.
//! - Displaced Fock: displacements commute through the interferometer as
//!   `β = Uᵀα`; after counter-displacing every output by `−β` the state is
//!   exactly the Fock output, whatever `α` was.
//! - Photon-added coherent: after counter-displacement the state is
//!   `𝒩 Π_i (U a_i† U† + ᾱ_i)|0⟩`. Expanding the product, the part with `i`
//!   photons is a sum over size-`i` subsets `T` of input modes, each carrying
//!   the weight `Π_{k∉T} ᾱ_k`.

use std::collections::BTreeMap;
use std::path::Path;

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::{enumerate_configs, submatrix, OccupationConfig};
use crate::io::{fmt_f64, json_array, json_int_array, JsonObject};
use crate::numerics::UnitaryMatrix;
use crate::permanent::permanent_ryser_serial;

/// Largest `n` accepted by [`spacs_distribution`].
pub const SPACS_MAX_N: usize = 8;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFamily {
    Fock,
    Dspfs,
    Spacs,
}

impl InputFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fock => "fock",
            Self::Dspfs => "dspfs",
            Self::Spacs => "spacs",
        }
    }
}

/// Which states are loaded into the first `n` of `m` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSpec {
    family: InputFamily,
    n: usize,
    m: usize,
    alphas: Vec<Complex64>,
}

impl InputSpec {
    pub fn new(family: InputFamily, n: usize, m: usize, alphas: Vec<Complex64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("need at least one mode".into()));
        }
        if n > m {
            return Err(Error::InvalidInput(format!(
                "{n} occupied modes exceed {m} modes"
            )));
        }
        match family {
            InputFamily::Fock if !alphas.is_empty() => {
                return Err(Error::InvalidInput(
                    "Fock inputs take no coherent amplitudes".into(),
                ));
            }
            InputFamily::Dspfs | InputFamily::Spacs if alphas.len() != n => {
                return Err(Error::InvalidInput(format!(
                    "expected {n} coherent amplitudes, got {}",
                    alphas.len()
                )));
            }
            _ => {}
        }
        if alphas
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite coherent amplitude".into()));
        }
        Ok(Self {
            family,
            n,
            m,
            alphas,
        })
    }

    pub fn fock(n: usize, m: usize) -> Result<Self> {
        Self::new(InputFamily::Fock, n, m, Vec::new())
    }

    pub fn dspfs(m: usize, alphas: Vec<Complex64>) -> Result<Self> {
        Self::new(InputFamily::Dspfs, alphas.len(), m, alphas)
    }

    pub fn spacs(m: usize, alphas: Vec<Complex64>) -> Result<Self> {
        Self::new(InputFamily::Spacs, alphas.len(), m, alphas)
    }

    pub fn family(&self) -> InputFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    /// Coherent amplitudes padded with zeros to all `m` modes.
    pub fn padded_alphas(&self) -> Vec<Complex64> {
        let mut out = self.alphas.clone();
        out.resize(self.m, Complex64::new(0.0, 0.0));
        out
    }

    /// `𝒩 = Π_j (1 + |α_j|²)^{−1/2}` for photon-added inputs, 1 otherwise.
    pub fn normalization(&self) -> f64 {
        match self.family {
            InputFamily::Spacs => self
                .alphas
                .iter()
                .map(|a| (1.0 + a.norm_sqr()).sqrt().recip())
                .product(),
            _ => 1.0,
        }
    }
}

/// Probability of one outcome and, when known, its amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub amplitude: Option<Complex64>,
}

impl Outcome {
    pub fn from_amplitude(amplitude: Complex64) -> Self {
        Self {
            probability: amplitude.norm_sqr(),
            amplitude: Some(amplitude),
        }
    }

    pub fn from_probability(probability: f64) -> Self {
        Self {
            probability,
            amplitude: None,
        }
    }
}

/// Map from photon-number outcome to probability, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputDistribution {
    m: usize,
    entries: BTreeMap<OccupationConfig, Outcome>,
}

impl OutputDistribution {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        m: usize,
        entries: impl IntoIterator<Item = (OccupationConfig, Outcome)>,
    ) -> Result<Self> {
        let mut dist = Self::new(m);
        for (config, outcome) in entries {
            dist.insert(config, outcome)?;
        }
        Ok(dist)
    }

    pub fn insert(&mut self, config: OccupationConfig, outcome: Outcome) -> Result<()> {
        if config.modes() != self.m {
            return Err(Error::InvalidDimension(format!(
                "config {config} does not have {} modes",
                self.m
            )));
        }
        if !(outcome.probability >= 0.0) || !outcome.probability.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad probability {} for {config}",
                outcome.probability
            )));
        }
        self.entries.insert(config, outcome);
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationConfig, &Outcome)> {
        self.entries.iter()
    }

    pub fn get(&self, config: &OccupationConfig) -> Option<&Outcome> {
        self.entries.get(config)
    }

    /// Probability of `config`, zero when absent.
    pub fn probability(&self, config: &OccupationConfig) -> f64 {
        self.entries.get(config).map_or(0.0, |o| o.probability)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().map(|o| o.probability).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total_mass() - 1.0).abs() <= tol
    }

    /// Distinct total photon numbers present, ascending.
    pub fn photon_totals(&self) -> Vec<u64> {
        let mut totals: Vec<u64> = self.entries.keys().map(OccupationConfig::total).collect();
        totals.sort_unstable();
        totals.dedup();
        totals
    }

    /// `{m, n_or_sectors, entries: [{config, prob, amp_re, amp_im}]}`.
    ///
    /// `n_or_sectors` is the photon number when every entry shares one total,
    /// otherwise the list of totals present. Amplitude keys are omitted for
    /// probability-only entries.
    pub fn to_json(&self) -> String {
        let totals = self.photon_totals();
        let n_or_sectors = if totals.len() == 1 {
            totals[0].to_string()
        } else {
            json_array(totals.iter().map(u64::to_string))
        };
        let entries = self.entries.iter().map(|(config, outcome)| {
            let obj = JsonObject::new()
                .raw("config", &json_int_array(config.occupations()))
                .num("prob", outcome.probability);
            match outcome.amplitude {
                Some(a) => obj.num("amp_re", a.re).num("amp_im", a.im).finish(),
                None => obj.finish(),
            }
        });
        JsonObject::new()
            .int("m", self.m as u64)
            .raw("n_or_sectors", &n_or_sectors)
            .raw("entries", &json_array(entries))
            .finish()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            config: Vec<u32>,
            prob: f64,
            amp_re: Option<f64>,
            amp_im: Option<f64>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            m: usize,
            #[allow(dead_code)]
            n_or_sectors: serde_json::Value,
            entries: Vec<Entry>,
        }
        let wire: Wire = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut dist = Self::new(wire.m);
        for e in wire.entries {
            let amplitude = match (e.amp_re, e.amp_im) {
                (Some(re), Some(im)) => Some(Complex64::new(re, im)),
                (None, None) => None,
                _ => {
                    return Err(Error::Parse(
                        "amp_re and amp_im must appear together".into(),
                    ))
                }
            };
            dist.insert(
                OccupationConfig::new(e.config),
                Outcome {
                    probability: e.prob,
                    amplitude,
                },
            )?;
        }
        Ok(dist)
    }

    /// One row per config: `s0..s{m-1}, prob, amp_re, amp_im`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.m).map(|k| format!("s{k}")).collect();
        header.extend(["prob", "amp_re", "amp_im"].map(String::from));
        w.write_record(&header)?;
        for (config, outcome) in &self.entries {
            let mut row: Vec<String> = config.occupations().iter().map(u32::to_string).collect();
            row.push(fmt_f64(outcome.probability));
            match outcome.amplitude {
                Some(a) => row.extend([fmt_f64(a.re), fmt_f64(a.im)]),
                None => row.extend([String::new(), String::new()]),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save(&self, path: &Path, json: bool) -> Result<()> {
        let text = if json { self.to_json() } else { self.to_csv() };
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Photon-added coherent output split by total detected photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorDecomposition {
    pub n: usize,
    /// `P_0 ..= P_n`.
    pub sector_weights: Vec<f64>,
    /// Distribution conditioned on `i` detected photons. Empty when `P_i = 0`.
    pub sector_distributions: Vec<OutputDistribution>,
    /// Whether all `|α_i|` were equal (the case with a closed-form weight law).
    pub equal_amplitudes: bool,
}

impl SectorDecomposition {
    /// The unconditioned distribution over all sectors.
    pub fn joint(&self) -> OutputDistribution {
        let m = self
            .sector_distributions
            .first()
            .map_or(0, OutputDistribution::modes);
        let mut joint = OutputDistribution::new(m);
        for (weight, dist) in self.sector_weights.iter().zip(&self.sector_distributions) {
            let scale = weight.sqrt();
            for (config, outcome) in dist.iter() {
                joint.entries.insert(
                    config.clone(),
                    Outcome {
                        probability: outcome.probability * weight,
                        amplitude: outcome.amplitude.map(|a| a * scale),
                    },
                );
            }
        }
        joint
    }
}

/// Normalized transition amplitude `input → output`.
pub fn aa_amplitude(
    u: &UnitaryMatrix,
    input: &OccupationConfig,
    output: &OccupationConfig,
) -> Result<Complex64> {
    let sub = submatrix(u, input, output)?;
    let per = permanent_ryser_serial(&sub)?;
    Ok(per / (input.factorial_product() * output.factorial_product()).sqrt())
}

/// Full output distribution for single photons in the first `n` modes.
pub fn aa_distribution(u: &UnitaryMatrix, n: usize) -> Result<OutputDistribution> {
    let m = u.dim();
    if n > m {
        return Err(Error::InvalidInput(format!("{n} photons exceed {m} modes")));
    }
    let input = OccupationConfig::first_modes(n, m);
    let configs = enumerate_configs(n as u32, m)?;
    let amps: Vec<Complex64> = configs
        .par_iter()
        .map(|s| aa_amplitude(u, &input, s))
        .collect::<Result<_>>()?;
    let dist = OutputDistribution {
        m,
        entries: configs
            .into_iter()
            .zip(amps)
            .map(|(c, a)| (c, Outcome::from_amplitude(a)))
            .collect(),
    };
    debug_assert!(dist.is_normalized(NORMALIZATION_TOL));
    Ok(dist)
}

/// `β_j = Σ_i U[i][j] α_i`.
pub fn propagate_displacements(u: &UnitaryMatrix, alphas: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = u.dim();
    if alphas.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} amplitudes for {m} modes",
            alphas.len()
        )));
    }
    Ok((0..m)
        .map(|j| (0..m).map(|i| u[(i, j)] * alphas[i]).sum())
        .collect())
}

/// Distribution of counter-displaced detection for displaced single photons.
///
/// The counter-displacement by `−β` removes every trace of `α`, so this is
/// the Fock distribution. The independent numerical check lives in
/// [`crate::oracle`].
pub fn dspfs_distribution(u: &UnitaryMatrix, alphas: &[Complex64]) -> Result<OutputDistribution> {
    let spec = InputSpec::dspfs(u.dim(), alphas.to_vec())?;
    aa_distribution(u, spec.n())
}

/// `P_i = C(n, i) a^{n−i} / (1 + a)ⁿ` for `i = 0..=n`, with `a = |α|²`.
pub fn spacs_sector_weights(n: usize, alpha_sq: f64) -> Result<Vec<f64>> {
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidInput(format!(
            "|α|² must be finite and non-negative, got {alpha_sq}"
        )));
    }
    let denom = (1.0 + alpha_sq).powi(n as i32);
    let mut binom = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i > 0 {
            binom = binom * (n + 1 - i) as f64 / i as f64;
        }
        out.push(binom * alpha_sq.powi((n - i) as i32) / denom);
    }
    Ok(out)
}

/// Sector-resolved output for photon-added coherent inputs, after
/// counter-displacement.
///
/// For an output `S` with `i` photons the amplitude is
/// `𝒩 Σ_{|T|=i} (Π_{k∉T} ᾱ_k) Per(U_{T,S}) / √(Π s_j!)`.
pub fn spacs_distribution(u: &UnitaryMatrix, alphas: &[Complex64]) -> Result<SectorDecomposition> {
    let m = u.dim();
    let spec = InputSpec::spacs(m, alphas.to_vec())?;
    let n = spec.n();
    if n > SPACS_MAX_N {
        return Err(Error::TooLarge(format!(
            "photon-added sector expansion limited to n <= {SPACS_MAX_N}"
        )));
    }
    let norm = spec.normalization();
    let conj: Vec<Complex64> = alphas.iter().map(Complex64::conj).collect();

    let mut sector_weights = Vec::with_capacity(n + 1);
    let mut sector_distributions = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let subsets: Vec<(OccupationConfig, Complex64)> = (0..n)
            .combinations(i)
            .map(|t| {
                let mut occ = vec![0u32; m];
                t.iter().for_each(|&k| occ[k] = 1);
                let weight: Complex64 =
                    (0..n).filter(|k| !t.contains(k)).map(|k| conj[k]).product();
                (OccupationConfig::new(occ), weight * norm)
            })
            .collect();
        let configs = enumerate_configs(i as u32, m)?;
        let amps: Vec<Complex64> = configs
            .par_iter()
            .map(|s| {
                let scale = s.factorial_product().sqrt();
                subsets
                    .iter()
                    .try_fold(Complex64::new(0.0, 0.0), |acc, (t, w)| {
                        let per = permanent_ryser_serial(&submatrix(u, t, s)?)?;
                        Ok(acc + w * per / scale)
                    })
            })
            .collect::<Result<_>>()?;
        let weight: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        let dist = if weight > 0.0 {
            let inv = weight.sqrt().recip();
            OutputDistribution {
                m,
                entries: configs
                    .into_iter()
                    .zip(amps)
                    .map(|(c, a)| (c, Outcome::from_amplitude(a * inv)))
                    .collect(),
            }
        } else {
            OutputDistribution::new(m)
        };
        sector_weights.push(weight);
        sector_distributions.push(dist);
    }

    let first = alphas.first().map_or(0.0, |a| a.norm_sqr());
    let equal_amplitudes = alphas
        .iter()
        .all(|a| (a.norm_sqr() - first).abs() <= 1e-12 * (1.0 + first));
    if equal_amplitudes {
        let expected = spacs_sector_weights(n, first)?;
        let worst = expected
            .iter()
            .zip(&sector_weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > NORMALIZATION_TOL {
            log::warn!("sector weights deviate from the binomial law by {worst:e}");
        }
    } else {
        log::warn!("unequal coherent amplitudes: skipping the binomial sector-weight cross-check");
    }

    Ok(SectorDecomposition {
        n,
        sector_weights,
        sector_distributions,
        equal_amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{compose_interferometer, haar_random_unitary, ElementaryOp};

    fn cfg(v: &[u32]) -> OccupationConfig {
        OccupationConfig::new(v.to_vec())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn balanced() -> UnitaryMatrix {
        compose_interferometer(&[ElementaryOp::balanced_beamsplitter(0, 1)], 2).unwrap()
    }

    #[test]
    fn amplitude_examples() {
        let id = UnitaryMatrix::identity(3);
        assert_eq!(
            aa_amplitude(&id, &cfg(&[1, 1, 0]), &cfg(&[1, 1, 0])).unwrap(),
            c(1.0, 0.0)
        );
        let bs = balanced();
        assert!(
            aa_amplitude(&bs, &cfg(&[1, 1]), &cfg(&[1, 1]))
                .unwrap()
                .norm()
                < 1e-15
        );
        let a = aa_amplitude(&bs, &cfg(&[1, 1]), &cfg(&[2, 0])).unwrap();
        assert!((a.norm_sqr() - 0.5).abs() < 1e-15);
        assert!(matches!(
            aa_amplitude(&bs, &cfg(&[1, 1]), &cfg(&[1, 0])),
            Err(Error::PhotonNumberMismatch { .. })
        ));
    }

    #[test]
    fn distribution_examples() {
        let d = aa_distribution(&UnitaryMatrix::identity(4), 2).unwrap();
        assert_eq!(d.probability(&cfg(&[1, 1, 0, 0])), 1.0);
        assert_eq!(d.len(), 10);

        let hom = aa_distribution(&balanced(), 2).unwrap();
        assert!((hom.probability(&cfg(&[2, 0])) - 0.5).abs() < 1e-15);
        assert!((hom.probability(&cfg(&[0, 2])) - 0.5).abs() < 1e-15);
        assert!(hom.probability(&cfg(&[1, 1])) < 1e-24);

        let u = haar_random_unitary(5, 11).unwrap();
        assert!(aa_distribution(&u, 2).unwrap().is_normalized(1e-9));
        assert!(matches!(
            aa_distribution(&u, 6),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn displacement_propagation() {
        let alphas = vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 0.0)];
        assert_eq!(
            propagate_displacements(&UnitaryMatrix::identity(3), &alphas).unwrap(),
            alphas
        );

        // U[i][j] = 1 for j = i+1 sends mode i to mode i+1
        let perm = crate::numerics::ComplexMatrix::from_fn(3, 3, |i, j| {
            if j == (i + 1) % 3 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let beta = propagate_displacements(&UnitaryMatrix::new(perm).unwrap(), &alphas).unwrap();
        assert_eq!(beta, vec![alphas[2], alphas[0], alphas[1]]);

        let u = haar_random_unitary(3, 2).unwrap();
        let beta = propagate_displacements(&u, &alphas).unwrap();
        let norm = |v: &[Complex64]| v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        assert!((norm(&beta) - norm(&alphas)).abs() < 1e-12);
        assert!(propagate_displacements(&u, &alphas[..2]).is_err());
    }

    #[test]
    fn dspfs_is_alpha_independent() {
        let u = haar_random_unitary(3, 21).unwrap();
        let aa = aa_distribution(&u, 2).unwrap();
        assert_eq!(
            dspfs_distribution(&u, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(),
            aa
        );
        assert_eq!(
            dspfs_distribution(&u, &[c(0.7, 0.0), c(0.0, -0.3)]).unwrap(),
            aa
        );
    }

    #[test]
    fn sector_weight_examples() {
        assert_eq!(spacs_sector_weights(2, 1.0).unwrap(), vec![0.25, 0.5, 0.25]);
        assert_eq!(
            spacs_sector_weights(4, 0.0).unwrap(),
            vec![0.0, 0.0, 0.0, 0.0, 1.0]
        );
        let w = spacs_sector_weights(10, 0.1).unwrap();
        assert!((w[10] - 1.1f64.powi(-10)).abs() < 1e-15);
        assert!((w[10] - 0.38554).abs() < 1e-5);
        assert!(spacs_sector_weights(3, -0.1).is_err());
    }

    #[test]
    fn spacs_zero_alpha_is_fock() {
        let u = haar_random_unitary(3, 4).unwrap();
        let dec = spacs_distribution(&u, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(dec.sector_weights[..2], [0.0, 0.0]);
        assert!((dec.sector_weights[2] - 1.0).abs() < 1e-12);
        let aa = aa_distribution(&u, 2).unwrap();
        for (config, outcome) in aa.iter() {
            let p = dec.sector_distributions[2].probability(config);
            assert!((p - outcome.probability).abs() < 1e-14);
        }
    }

    #[test]
    fn spacs_single_mode() {
        let alpha = 0.8;
        let dec = spacs_distribution(&UnitaryMatrix::identity(1), &[c(alpha, 0.0)]).unwrap();
        let a2 = alpha * alpha;
        assert!((dec.sector_weights[1] - 1.0 / (1.0 + a2)).abs() < 1e-15);
        assert!((dec.sector_weights[0] - a2 / (1.0 + a2)).abs() < 1e-15);
    }

    #[test]
    fn spacs_weights_follow_binomial_law() {
        let u = haar_random_unitary(4, 17).unwrap();
        let alphas: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(0.6, k as f64))
            .collect();
        let dec = spacs_distribution(&u, &alphas).unwrap();
        assert!(dec.equal_amplitudes);
        let law = spacs_sector_weights(3, 0.36).unwrap();
        for (a, b) in law.iter().zip(&dec.sector_weights) {
            assert!((a - b).abs() < 1e-9);
        }
        for (i, dist) in dec.sector_distributions.iter().enumerate() {
            assert!(dist.iter().all(|(cfg, _)| cfg.total() == i as u64));
            assert!(dist.is_normalized(1e-9));
        }
        assert!(dec.joint().is_normalized(1e-9));
    }

    #[test]
    fn spacs_unequal_amplitudes_use_elementary_symmetric_weights() {
        let u = haar_random_unitary(3, 6).unwrap();
        let alphas = [c(0.3, 0.0), c(0.0, 1.1)];
        let dec = spacs_distribution(&u, &alphas).unwrap();
        assert!(!dec.equal_amplitudes);
        let (a, b) = (0.09, 1.21);
        let z = (1.0 + a) * (1.0 + b);
        let expect = [a * b / z, (a + b) / z, 1.0 / z];
        for (x, y) in expect.iter().zip(&dec.sector_weights) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let u = haar_random_unitary(3, 9).unwrap();
        let d = aa_distribution(&u, 2).unwrap();
        let text = d.to_json();
        assert_eq!(OutputDistribution::from_json(&text).unwrap(), d);
        assert_eq!(
            OutputDistribution::from_json(&text).unwrap().to_json(),
            text
        );

        let probs_only = OutputDistribution::from_entries(
            2,
            [
                (cfg(&[1, 0]), Outcome::from_probability(0.25)),
                (cfg(&[0, 0]), Outcome::from_probability(0.75)),
            ],
        )
        .unwrap();
        let text = probs_only.to_json();
        assert!(text.contains("\"n_or_sectors\":[0,1]"));
        assert_eq!(OutputDistribution::from_json(&text).unwrap(), probs_only);
    }

    #[test]
    fn csv_has_lex_rows() {
        let csv = aa_distribution(&balanced(), 2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s0,s1,prob,amp_re,amp_im");
        assert!(lines[1].starts_with("0,2,"));
        assert!(lines[3].starts_with("2,0,"));
    }
}
