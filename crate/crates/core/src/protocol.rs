//! Calibrator / private-source query protocol.
//!
//! Each [`PrivateSource`] owns a shard of labeled logits, an ε ledger and its own
//! RNG. The calibrator only ever sees [`QueryResponse`]s: statistic vectors that
//! passed through the Laplace mechanism. Raw samples stay inside the source.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibration::{self, BinningScheme, Dataset, DEFAULT_NLL_CLIP};
use crate::dp::{self, Epsilon, NoiseSpec, PrivacyBudget};
use crate::{Error, Result};

/// Statistic a calibrator may request from a source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    /// Summed per-sample NLL, each clipped at 10. Length 1, Δf = 10.
    NllSum,
    /// Per-bin `n_correct − Σ confidence`. Length k, Δf = 1.
    EceBinResiduals,
    /// Per-bin correct counts followed by per-bin sample counts at T = 1.
    /// Length 2k, Δf = 2.
    HistTallies,
    /// Σ (1[correct] − confidence). Length 1, Δf = 1.
    AccConfGap,
}

impl QueryKind {
    /// L1 sensitivity of the response vector under adding or removing one sample.
    pub fn sensitivity(self) -> f64 {
        match self {
            QueryKind::NllSum => DEFAULT_NLL_CLIP,
            QueryKind::EceBinResiduals => 1.0,
            QueryKind::HistTallies => 2.0,
            QueryKind::AccConfGap => 1.0,
        }
    }

    pub fn response_len(self, scheme: &BinningScheme) -> usize {
        match self {
            QueryKind::NllSum | QueryKind::AccConfGap => 1,
            QueryKind::EceBinResiduals => scheme.bins(),
            QueryKind::HistTallies => 2 * scheme.bins(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::NllSum => "NLL_SUM",
            QueryKind::EceBinResiduals => "ECE_BIN_RESIDUALS",
            QueryKind::HistTallies => "HIST_TALLIES",
            QueryKind::AccConfGap => "ACC_CONF_GAP",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A statistic request issued by the calibrator.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub kind: QueryKind,
    /// Ignored for [`QueryKind::HistTallies`], which always bins at T = 1.
    pub temperature: f64,
    /// Ignored for the scalar kinds.
    pub scheme: BinningScheme,
    pub sensitivity: f64,
    pub epsilon_share: Epsilon,
    /// Let the source answer past its total ε, recording the excess as overdraft.
    /// Only used to reproduce the original Acc-T accounting.
    pub permit_overdraft: bool,
}

impl QuerySpec {
    pub fn new(
        kind: QueryKind,
        temperature: f64,
        scheme: BinningScheme,
        epsilon_share: Epsilon,
    ) -> Self {
        Self {
            kind,
            temperature,
            scheme,
            sensitivity: kind.sensitivity(),
            epsilon_share,
            permit_overdraft: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.kind.sensitivity();
        if self.sensitivity != expected {
            return Err(Error::SensitivityMismatch {
                kind: self.kind.name(),
                expected,
                found: self.sensitivity,
            });
        }
        if self.epsilon_share.value().is_nan() || self.epsilon_share.value() <= 0.0 {
            return Err(Error::InvalidEpsilon(self.epsilon_share.value()));
        }
        Ok(())
    }

    fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.sensitivity, self.epsilon_share)
    }
}

/// A source's mechanized answer to one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResponse {
    pub source_id: usize,
    pub iteration: usize,
    pub kind: QueryKind,
    pub values: Vec<f64>,
}

/// The exact (noiseless) statistic vector for `q` on `data`.
pub fn evaluate_query(data: &Dataset, q: &QuerySpec) -> Result<Vec<f64>> {
    q.validate()?;
    match q.kind {
        QueryKind::NllSum => Ok(vec![calibration::nll_sum(
            data,
            q.temperature,
            DEFAULT_NLL_CLIP,
        )?]),
        QueryKind::EceBinResiduals => {
            Ok(calibration::confidence_stats(data, q.temperature, &q.scheme)?.residuals())
        }
        QueryKind::HistTallies => {
            let stats = calibration::confidence_stats(data, 1.0, &q.scheme)?;
            Ok(stats
                .n_correct
                .iter()
                .chain(&stats.n_bin)
                .map(|&c| c as f64)
                .collect())
        }
        QueryKind::AccConfGap => Ok(vec![calibration::consistency_gap_sum(
            data,
            q.temperature,
        )?]),
    }
}

/// A data holder that answers queries only through the Laplace mechanism.
#[derive(Debug, Clone)]
pub struct PrivateSource {
    id: usize,
    data: Dataset,
    budget: PrivacyBudget,
    rng: ChaCha8Rng,
    charges: usize,
}

impl PrivateSource {
    pub fn new(id: usize, data: Dataset, total: Epsilon, seed: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            id,
            data,
            budget: PrivacyBudget::new(total),
            rng: ChaCha8Rng::seed_from_u64(seed),
            charges: 0,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    /// Number of queries this source has answered.
    pub fn charges(&self) -> usize {
        self.charges
    }

    /// Shard size. Public knowledge in the protocol: every source holds the same count.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Raw shard access for the source's own local computations (the one-source
    /// baseline recalibrates on its own data). Not part of the public surface.
    pub(crate) fn local_data(&self) -> &Dataset {
        &self.data
    }

    /// Charges the ledger, then answers `q` with Laplace noise at Δf/ε_share.
    pub fn respond(&mut self, q: &QuerySpec, iteration: usize) -> Result<QueryResponse> {
        q.validate()?;
        let noise = q.noise()?;
        if q.permit_overdraft {
            self.budget.charge_permitting_overdraft(q.epsilon_share);
        } else {
            self.budget.charge(q.epsilon_share).map_err(|e| match e {
                Error::BudgetExhausted {
                    spent,
                    requested,
                    total,
                    ..
                } => Error::BudgetExhausted {
                    source_id: Some(self.id),
                    spent,
                    requested,
                    total,
                },
                other => other,
            })?;
        }
        self.charges += 1;
        let exact = evaluate_query(&self.data, q)?;
        Ok(QueryResponse {
            source_id: self.id,
            iteration,
            kind: q.kind,
            values: dp::mechanize(&exact, &noise, &mut self.rng),
        })
    }
}

/// Sends `q` to every source in order and collects the responses.
pub fn broadcast(
    sources: &mut [PrivateSource],
    q: &QuerySpec,
    iteration: usize,
) -> Result<Vec<QueryResponse>> {
    sources.iter_mut().map(|s| s.respond(q, iteration)).collect()
}

/// Coordinate-wise mean of the responses.
///
/// Unweighted, so it equals the pooled statistic only when shards have equal size.
pub fn aggregate(responses: &[QueryResponse]) -> Result<Vec<f64>> {
    let first = responses.first().ok_or(Error::NoResponses)?;
    let len = first.values.len();
    let mut sum = vec![0.0; len];
    for r in responses {
        if r.values.len() != len {
            return Err(Error::ResponseMismatch {
                expected: len,
                found: r.values.len(),
            });
        }
        if r.kind != first.kind || r.iteration != first.iteration {
            return Err(Error::Config(format!(
                "cannot aggregate {} iteration {} with {} iteration {}",
                first.kind, first.iteration, r.kind, r.iteration
            )));
        }
        for (acc, v) in sum.iter_mut().zip(&r.values) {
            *acc += v;
        }
    }
    let d = responses.len() as f64;
    Ok(sum.into_iter().map(|s| s / d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::LabeledLogits;

    fn s(logits: &[f64], label: usize) -> LabeledLogits {
        LabeledLogits::new(logits.to_vec(), label).unwrap()
    }

    fn shard() -> Dataset {
        Dataset::new(vec![
            s(&[2.0, 0.0, -1.0], 0),
            s(&[0.1, 0.4, 0.2], 2),
            s(&[1.0, 3.0, 0.0], 1),
            s(&[0.0, 0.0, 0.5], 0),
            s(&[4.0, 1.0, 1.0], 0),
        ])
        .unwrap()
    }

    fn spec(kind: QueryKind, t: f64, eps: Epsilon) -> QuerySpec {
        QuerySpec::new(kind, t, BinningScheme::default(), eps)
    }

    #[test]
    fn acc_conf_gap_zero_when_perfectly_consistent() {
        let data = Dataset::new(vec![s(&[100.0, 0.0], 0), s(&[0.0, 100.0], 1)]).unwrap();
        let v = evaluate_query(&data, &spec(QueryKind::AccConfGap, 1.0, Epsilon::INFINITE)).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn hist_tallies_layout() {
        let data = Dataset::new(vec![s(&[9f64.ln(), 0.0], 0)]).unwrap();
        // Temperature is ignored for tallies.
        let v = evaluate_query(&data, &spec(QueryKind::HistTallies, 2.5, Epsilon::INFINITE)).unwrap();
        assert_eq!(v.len(), 30);
        let mut expected = vec![0.0; 30];
        expected[13] = 1.0;
        expected[15 + 13] = 1.0;
        assert_eq!(v, expected);
    }

    #[test]
    fn ece_residuals_match_per_sample_loop() {
        let data = shard();
        let t = 0.8;
        let v = evaluate_query(&data, &spec(QueryKind::EceBinResiduals, t, Epsilon::INFINITE)).unwrap();
        let mut oracle = vec![0.0; 15];
        for x in data.samples() {
            let p = calibration::softmax(x, t).unwrap();
            let c = p.iter().cloned().fold(f64::MIN, f64::max);
            let pred = p.iter().position(|&v| v == c).unwrap();
            let b = ((c * 15.0) as usize).min(14);
            oracle[b] += f64::from(u8::from(pred == x.label())) - c;
        }
        assert_eq!(v.len(), 15);
        for (a, b) in v.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sensitivity_must_match_kind() {
        let mut q = spec(QueryKind::NllSum, 1.0, Epsilon::INFINITE);
        q.sensitivity = 1.0;
        assert!(matches!(
            evaluate_query(&shard(), &q),
            Err(Error::SensitivityMismatch { .. })
        ));
        assert_eq!(QueryKind::NllSum.sensitivity(), 10.0);
        assert_eq!(QueryKind::EceBinResiduals.sensitivity(), 1.0);
        assert_eq!(QueryKind::HistTallies.sensitivity(), 2.0);
        assert_eq!(QueryKind::AccConfGap.sensitivity(), 1.0);
    }

    #[test]
    fn empty_shard_is_rejected() {
        assert!(matches!(
            evaluate_query(&Dataset::default(), &spec(QueryKind::AccConfGap, 1.0, Epsilon::INFINITE)),
            Err(Error::EmptyDataset)
        ));
        assert!(PrivateSource::new(0, Dataset::default(), Epsilon::INFINITE, 0).is_err());
    }

    #[test]
    fn infinite_budget_response_is_exact() {
        let mut src = PrivateSource::new(3, shard(), Epsilon::INFINITE, 9).unwrap();
        for kind in [
            QueryKind::NllSum,
            QueryKind::EceBinResiduals,
            QueryKind::HistTallies,
            QueryKind::AccConfGap,
        ] {
            let q = spec(kind, 1.3, Epsilon::INFINITE);
            let r = src.respond(&q, 0).unwrap();
            assert_eq!(r.values, evaluate_query(&shard(), &q).unwrap());
            assert_eq!(r.values.len(), kind.response_len(&q.scheme));
            assert_eq!(r.source_id, 3);
        }
    }

    #[test]
    fn budget_admits_five_fifths_then_fails() {
        let mut src = PrivateSource::new(1, shard(), Epsilon::new(1.0).unwrap(), 9).unwrap();
        let q = spec(QueryKind::AccConfGap, 1.0, Epsilon::new(0.2).unwrap());
        for i in 0..5 {
            src.respond(&q, i).unwrap();
        }
        assert_eq!(src.charges(), 5);
        match src.respond(&q, 5) {
            Err(Error::BudgetExhausted { source_id, .. }) => assert_eq!(source_id, Some(1)),
            other => panic!("expected exhaustion, got {other:?}"),
        }
        assert_eq!(src.charges(), 5);
    }

    #[test]
    fn responses_are_reproducible_under_seed() {
        let run = || {
            let mut src = PrivateSource::new(0, shard(), Epsilon::new(1.0).unwrap(), 77).unwrap();
            let q = spec(QueryKind::EceBinResiduals, 1.0, Epsilon::new(0.1).unwrap());
            (0..3).map(|i| src.respond(&q, i).unwrap().values).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn aggregate_examples() {
        let r = |id, v: Vec<f64>| QueryResponse {
            source_id: id,
            iteration: 0,
            kind: QueryKind::AccConfGap,
            values: v,
        };
        assert_eq!(aggregate(&[r(0, vec![1.25])]).unwrap(), vec![1.25]);
        assert_eq!(aggregate(&[r(0, vec![2.0]), r(1, vec![4.0])]).unwrap(), vec![3.0]);
        assert!(matches!(
            aggregate(&[r(0, vec![2.0]), r(1, vec![4.0, 1.0])]),
            Err(Error::ResponseMismatch { .. })
        ));
        assert!(matches!(aggregate(&[]), Err(Error::NoResponses)));
    }

    #[test]
    fn averaged_tallies_give_pooled_bin_accuracy() {
        let a = shard();
        let b = Dataset::new(vec![
            s(&[0.0, 2.0, 0.0], 1),
            s(&[0.3, 0.1, 0.0], 1),
            s(&[5.0, 0.0, 0.0], 0),
            s(&[0.0, 0.2, 0.1], 2),
            s(&[1.0, 0.9, 0.0], 0),
        ])
        .unwrap();
        let q = spec(QueryKind::HistTallies, 1.0, Epsilon::INFINITE);
        let mut sources = vec![
            PrivateSource::new(0, a.clone(), Epsilon::INFINITE, 1).unwrap(),
            PrivateSource::new(1, b.clone(), Epsilon::INFINITE, 2).unwrap(),
        ];
        let avg = aggregate(&broadcast(&mut sources, &q, 0).unwrap()).unwrap();
        let mut pooled = a.into_samples();
        pooled.extend(b.into_samples());
        let pooled = calibration::confidence_stats(
            &Dataset::new(pooled).unwrap(),
            1.0,
            &BinningScheme::default(),
        )
        .unwrap();
        for bin in 0..15 {
            if pooled.n_bin[bin] > 0 {
                let ratio = avg[bin] / avg[15 + bin];
                let acc = pooled.n_correct[bin] as f64 / pooled.n_bin[bin] as f64;
                assert!((ratio - acc).abs() < 1e-12);
            }
        }
    }
}
