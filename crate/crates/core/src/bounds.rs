//! Lower bounds on the entanglement of the blank state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;
use thiserror::Error;

use crate::states::{
    entropy_of_entanglement, g_concurrence, majorization_compare, shannon_entropy, BipartitePureState, Majorization,
    ShiftedSetSpec, StateError,
};

pub const DEFAULT_SAMPLES: usize = 1000;
const MU_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("weights must be nonnegative, finite and not all zero")]
    InvalidWeights,
    #[error("blank Schmidt vector must be a probability vector")]
    InvalidGamma,
    #[error("empty state list")]
    EmptySet,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Coefficients `μ_{f,s}`, flattened like the spec weights (`f·n_t + s`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuWeights {
    values: Vec<f64>,
}

impl MuWeights {
    pub fn new(values: Vec<f64>) -> Result<Self, BoundError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) || values.iter().all(|v| *v == 0.0) {
            return Err(BoundError::InvalidWeights);
        }
        Ok(Self { values })
    }

    pub fn uniform(len: usize) -> Self {
        Self { values: vec![1.0 / len as f64; len] }
    }

    /// `μ_{f,s} = 1/λ_{f̄,s}`, scaled by `η` when there is a single copy.
    pub fn eq60(spec: &ShiftedSetSpec) -> Self {
        let g = spec.group();
        let nt = spec.copies();
        let mut values = vec![0.0; spec.dimension()];
        for f in g.elements() {
            for s in 0..nt {
                values[spec.index(f, s)] = 1.0 / spec.weight(g.inv(f), s);
            }
        }
        if nt == 1 {
            let eta = 1.0 / values.iter().sum::<f64>();
            values.iter_mut().for_each(|v| *v *= eta);
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, f: usize, s: usize, copies: usize) -> f64 {
        self.values[f * copies + s]
    }

    pub fn is_normalized(&self) -> bool {
        (self.values.iter().sum::<f64>() - 1.0).abs() <= MU_SUM_TOL
    }

    pub fn normalized(&self) -> Self {
        let s: f64 = self.values.iter().sum();
        Self { values: self.values.iter().map(|v| v / s).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuStrategy {
    Eq60,
    Uniform,
    Custom { mu: MuWeights },
    /// Best of the `Eq60` choice and `samples` flat-Dirichlet draws.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaBeta {
    /// Indexed `(g,n)·D + (h,m)`, with `(g,n)` flattened as `g·n_t + n`.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

fn check_len(expected: usize, got: usize) -> Result<(), BoundError> {
    if expected != got {
        return Err(BoundError::Length { expected, got });
    }
    Ok(())
}

/// `α_{(g,n),(h,m)} = γ_{h,m} Σ_{f,s} μ_{f̄,s} λ_{fg,n}` and
/// `β_{(g,n),(h,m)} = Σ_{f,s} μ_{f̄,s} λ_{fg,n} λ_{fh,m}`.
pub fn alpha_beta(spec: &ShiftedSetSpec, gamma: &[f64], mu: &MuWeights) -> Result<AlphaBeta, BoundError> {
    let d = spec.dimension();
    check_len(d, gamma.len())?;
    check_len(d, mu.values().len())?;
    let g = spec.group();
    let nt = spec.copies();
    // μ summed over copies, indexed by f̄
    let mu_bar: Vec<f64> = g.elements().map(|f| (0..nt).map(|s| mu.get(g.inv(f), s, nt)).sum()).collect();
    let mut alpha = vec![0.0; d * d];
    let mut beta = vec![0.0; d * d];
    for gg in g.elements() {
        for n in 0..nt {
            let row = spec.index(gg, n);
            let a: f64 = g.elements().map(|f| mu_bar[f] * spec.weight(g.mul(f, gg), n)).sum();
            for h in g.elements() {
                for m in 0..nt {
                    let col = spec.index(h, m);
                    alpha[row * d + col] = gamma[col] * a;
                    beta[row * d + col] = g
                        .elements()
                        .map(|f| mu_bar[f] * spec.weight(g.mul(f, gg), n) * spec.weight(g.mul(f, h), m))
                        .sum();
                }
            }
        }
    }
    Ok(AlphaBeta { alpha, beta })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma10Verdict {
    /// `α ≺ β` (or equal): the blank is not ruled out.
    pub pass: bool,
    pub relation: Majorization,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Majorization test `α ≺ β` on the normalized `μ`.
pub fn lemma10_majorization(spec: &ShiftedSetSpec, gamma: &[f64], mu: &MuWeights) -> Result<Lemma10Verdict, BoundError> {
    let s: f64 = gamma.iter().sum();
    if gamma.iter().any(|x| !x.is_finite() || *x < 0.0) || (s - 1.0).abs() > 1e-9 {
        return Err(BoundError::InvalidGamma);
    }
    let AlphaBeta { alpha, beta } = alpha_beta(spec, gamma, &mu.normalized())?;
    let relation = majorization_compare(&alpha, &beta)?;
    Ok(Lemma10Verdict {
        pass: matches!(relation, Majorization::XMajorizedByY | Majorization::Equal),
        relation,
        alpha,
        beta,
    })
}

/// Ratio `min β / min_{g,n} Σ μ_{f̄,s} λ_{fg,n}` for one choice of `μ`; scale invariant in `μ`.
pub fn gamma_min_ratio(spec: &ShiftedSetSpec, mu: &MuWeights) -> Result<f64, BoundError> {
    let d = spec.dimension();
    let AlphaBeta { alpha, beta } = alpha_beta(spec, &vec![1.0; d], mu)?;
    // with γ ≡ 1, α_{(g,n),·} is the denominator sum
    let den = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    let num = beta.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaBound {
    pub value: f64,
    pub strategy: MuStrategy,
    /// The `μ` attaining `value`.
    pub mu: MuWeights,
}

/// Lower bound on the smallest Schmidt coefficient of any admissible blank.
pub fn gamma_min_bound(spec: &ShiftedSetSpec, strategy: &MuStrategy) -> Result<GammaBound, BoundError> {
    let d = spec.dimension();
    let eval = |mu: MuWeights| gamma_min_ratio(spec, &mu).map(|v| (v, mu));
    let (value, mu) = match strategy {
        MuStrategy::Eq60 => eval(MuWeights::eq60(spec))?,
        MuStrategy::Uniform => eval(MuWeights::uniform(d))?,
        MuStrategy::Custom { mu } => eval(mu.clone())?,
        MuStrategy::Sampled { samples, seed } => {
            let mut best = eval(MuWeights::eq60(spec))?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*samples {
                let cand = eval(sample_flat_dirichlet(&mut rng, d))?;
                if cand.0 > best.0 {
                    best = cand;
                }
            }
            best
        }
    };
    Ok(GammaBound { value, strategy: strategy.clone(), mu })
}

/// Flat Dirichlet draw via normalized exponential variates.
pub fn sample_flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, len: usize) -> MuWeights {
    let raw: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = raw.iter().sum();
    MuWeights { values: raw.into_iter().map(|x| x / s).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyGap {
    pub base: f64,
    /// `q_{n,m,r} = Σ_f λ_{f,n} λ_{fr,m}`, flattened `(n·n_t + m)·|G| + r`; plain `q_r` for one copy.
    pub q: Vec<f64>,
    pub shannon_q: f64,
    pub entropy_lambda: f64,
    /// Entropy of the copy-block weights; zero for one copy.
    pub block_entropy: f64,
    /// Required blank entropy `H(q) − H(w)`.
    pub blank_entropy_lower: f64,
    pub gap: f64,
    /// `q↓ ≺ λ↓`; evaluated for one copy only.
    pub q_majorized_by_lambda: Option<bool>,
}

/// Entropy gap obtained from Lemma 10 with uniform `μ`. Entropies use
/// `base`, defaulting to the local dimension.
pub fn entropy_gap(spec: &ShiftedSetSpec, base: Option<f64>) -> Result<EntropyGap, BoundError> {
    let base = base.unwrap_or(spec.dimension() as f64);
    let g = spec.group();
    let nt = spec.copies();
    let order = g.order();
    let mut q = vec![0.0; nt * nt * order];
    for n in 0..nt {
        for m in 0..nt {
            for r in g.elements() {
                q[(n * nt + m) * order + r] = g.elements().map(|f| spec.weight(f, n) * spec.weight(g.mul(f, r), m)).sum();
            }
        }
    }
    let shannon_q = shannon_entropy(&q, base)?;
    let entropy_lambda = shannon_entropy(spec.weights(), base)?;
    let block_entropy = if nt == 1 { 0.0 } else { shannon_entropy(&spec.block_weights(), base)? };
    let blank_entropy_lower = shannon_q - block_entropy;
    let q_majorized_by_lambda = if nt == 1 {
        Some(matches!(majorization_compare(&q, spec.weights())?, Majorization::XMajorizedByY | Majorization::Equal))
    } else {
        None
    };
    Ok(EntropyGap {
        base,
        q,
        shannon_q,
        entropy_lambda,
        block_entropy,
        blank_entropy_lower,
        gap: blank_entropy_lower - entropy_lambda,
        q_majorized_by_lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneBound {
    pub base: f64,
    /// Largest entropy of entanglement in the set.
    pub entropy: f64,
    /// Largest G-concurrence in the set.
    pub g_concurrence: f64,
}

impl MonotoneBound {
    /// Whether `blank` is at least as entangled as every state, within `tol`.
    pub fn admits(&self, blank: &BipartitePureState, tol: f64) -> Result<bool, BoundError> {
        Ok(entropy_of_entanglement(blank, Some(self.base))? >= self.entropy - tol
            && g_concurrence(blank)? >= self.g_concurrence - tol)
    }
}

/// A monotone cannot increase under cloning, so the blank needs at least the
/// largest value found in the set.
pub fn monotone_bound(states: &[BipartitePureState], base: Option<f64>) -> Result<MonotoneBound, BoundError> {
    let first = states.first().ok_or(BoundError::EmptySet)?;
    let (da, db) = first.dims();
    let base = base.unwrap_or(da.min(db) as f64);
    let mut entropy = f64::NEG_INFINITY;
    let mut gc = f64::NEG_INFINITY;
    for s in states {
        entropy = entropy.max(entropy_of_entanglement(s, Some(base))?);
        gc = gc.max(g_concurrence(s)?);
    }
    Ok(MonotoneBound { base, entropy, g_concurrence: gc })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub group: String,
    pub dimension: usize,
    pub copies: usize,
    pub blank_gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub majorization_verdict: Majorization,
    pub lemma10_pass: bool,
    pub gamma_min_lower: f64,
    pub gamma_bound: GammaBound,
    pub q: Vec<f64>,
    pub shannon_q: f64,
    pub entropy_lambda: f64,
    pub gap: f64,
    pub entropy: EntropyGap,
    pub monotone_bounds: MonotoneBound,
}

/// All bounds for one spec and candidate blank Schmidt vector. `α` and `β`
/// use the `μ` selected by `strategy`.
pub fn bound_report(
    spec: &ShiftedSetSpec,
    blank_gamma: &[f64],
    strategy: &MuStrategy,
    base: Option<f64>,
) -> Result<BoundReport, BoundError> {
    let gamma_bound = gamma_min_bound(spec, strategy)?;
    let lemma = lemma10_majorization(spec, blank_gamma, &gamma_bound.mu)?;
    let entropy = entropy_gap(spec, base)?;
    let states = crate::states::build_group_shifted(spec);
    let monotone_bounds = monotone_bound(&states, Some(entropy.base))?;
    Ok(BoundReport {
        group: spec.group().label().to_string(),
        dimension: spec.dimension(),
        copies: spec.copies(),
        blank_gamma: blank_gamma.to_vec(),
        alpha: lemma.alpha,
        beta: lemma.beta,
        majorization_verdict: lemma.relation,
        lemma10_pass: lemma.pass,
        gamma_min_lower: gamma_bound.value,
        gamma_bound,
        q: entropy.q.clone(),
        shannon_q: entropy.shannon_q,
        entropy_lambda: entropy.entropy_lambda,
        gap: entropy.gap,
        entropy,
        monotone_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, parse_group};

    fn spec(g: &str, w: &[f64]) -> ShiftedSetSpec {
        ShiftedSetSpec::simple(parse_group(g).unwrap(), w.to_vec()).unwrap()
    }

    #[test]
    fn z2_alpha_beta_uniform() {
        let s = spec("Z2", &[0.7, 0.3]);
        let ab = alpha_beta(&s, &[0.5, 0.5], &MuWeights::uniform(2)).unwrap();
        for a in &ab.alpha {
            assert!((a - 0.25).abs() < 1e-15);
        }
        for (b, e) in ab.beta.iter().zip([0.29, 0.21, 0.21, 0.29]) {
            assert!((b - e).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_lambda_collapses() {
        let s = ShiftedSetSpec::uniform(cyclic(3).unwrap(), 1);
        let gamma = [0.5, 0.3, 0.2];
        let ab = alpha_beta(&s, &gamma, &MuWeights::eq60(&s)).unwrap();
        for gg in 0..3 {
            for h in 0..3 {
                assert!((ab.alpha[gg * 3 + h] - gamma[h] / 3.0).abs() < 1e-15);
                assert!((ab.beta[gg * 3 + h] - 1.0 / 9.0).abs() < 1e-15);
            }
        }
        let v = lemma10_majorization(&s, &[1.0 / 3.0; 3], &MuWeights::uniform(3)).unwrap();
        assert_eq!(v.relation, Majorization::Equal);
        assert!(v.pass);
    }

    #[test]
    fn beta_matches_shifted_form() {
        // β_{g,h} = Σ_f μ_{f̄} λ_f λ_{f ḡ h} after substituting f → f ḡ
        let s = spec("Z3", &[0.5, 0.3, 0.2]);
        let g = s.group();
        let mu = MuWeights::eq60(&s);
        let ab = alpha_beta(&s, &[1.0 / 3.0; 3], &mu).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let alt: f64 = (0..3)
                    .map(|f| {
                        let fp = g.mul(f, g.inv(a));
                        mu.values()[g.inv(fp)] * s.weights()[f] * s.weights()[g.mul(fp, b)]
                    })
                    .sum();
                assert!((ab.beta[a * 3 + b] - alt).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_dimension_bounds() {
        let b2 = gamma_min_bound(&spec("Z2", &[0.8, 0.2]), &MuStrategy::Eq60).unwrap();
        assert!((b2.value - 0.5).abs() < 1e-12);
        let b3 = gamma_min_bound(&spec("Z3", &[0.5, 0.3, 0.2]), &MuStrategy::Eq60).unwrap();
        assert!((b3.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn z4_eq60_matches_brute_force() {
        let w = [0.4, 0.3, 0.2, 0.1];
        let s = spec("Z4", &w);
        let mut m = f64::INFINITY;
        for gg in 0..4 {
            for h in 0..4 {
                let sum: f64 = (0..4).map(|f| w[(f + gg) % 4] * w[(f + h) % 4] / w[f]).sum();
                m = m.min(sum);
            }
        }
        let b = gamma_min_bound(&s, &MuStrategy::Eq60).unwrap();
        assert!((b.value - m / 4.0).abs() < 1e-12);
        let sampled = gamma_min_bound(&s, &MuStrategy::Sampled { samples: 200, seed: 3 }).unwrap();
        assert!(sampled.value >= b.value);
        assert!(sampled.value <= 1.0);
    }

    #[test]
    fn optimal_cloning_is_ruled_out() {
        let s = spec("Z2", &[0.7, 0.3]);
        for mu in [MuWeights::uniform(2), MuWeights::eq60(&s)] {
            assert!(!lemma10_majorization(&s, &[0.7, 0.3], &mu).unwrap().pass);
            assert!(lemma10_majorization(&s, &[0.5, 0.5], &mu).unwrap().pass);
        }
    }

    #[test]
    fn z2_entropy_gap() {
        let e = entropy_gap(&spec("Z2", &[0.7, 0.3]), Some(2.0)).unwrap();
        assert!((e.q[0] - 0.58).abs() < 1e-12 && (e.q[1] - 0.42).abs() < 1e-12);
        assert!((e.shannon_q - 0.981_454_1).abs() < 1e-6);
        assert!((e.entropy_lambda - 0.881_290_9).abs() < 1e-6);
        assert!((e.gap - 0.100_16).abs() < 1e-5);
        assert_eq!(e.q_majorized_by_lambda, Some(true));
    }

    #[test]
    fn uniform_gap_vanishes() {
        let e = entropy_gap(&ShiftedSetSpec::uniform(parse_group("S3").unwrap(), 1), None).unwrap();
        assert!(e.gap.abs() < 1e-12);
    }

    #[test]
    fn copies_entropy_gap_sums() {
        let s = ShiftedSetSpec::new(parse_group("Z2").unwrap(), 2, vec![0.4, 0.1, 0.3, 0.2], None, crate::states::ShiftSide::B)
            .unwrap();
        let e = entropy_gap(&s, None).unwrap();
        assert_eq!(e.q.len(), 8);
        assert!((e.q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e.q_majorized_by_lambda.is_none());
        let ab = alpha_beta(&s, &[0.25; 4], &MuWeights::uniform(4)).unwrap();
        assert!((ab.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((ab.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = gamma_min_bound(&s, &MuStrategy::Eq60).unwrap();
        assert!(b.value > 0.0 && b.value <= 1.0);
    }

    #[test]
    fn monotone_bounds() {
        let s = spec("Z2", &[0.7, 0.3]);
        let states = crate::states::build_group_shifted(&s);
        let m = monotone_bound(&states, Some(2.0)).unwrap();
        assert!((m.entropy - 0.881_290_89).abs() < 1e-8);
        assert!(m.admits(&states[0], 1e-12).unwrap());
        assert!(m.admits(&BipartitePureState::maximally_entangled(2), 0.0).unwrap());
        let me = monotone_bound(&[BipartitePureState::maximally_entangled(3)], None).unwrap();
        assert!((me.entropy - 1.0).abs() < 1e-12 && (me.g_concurrence - 1.0).abs() < 1e-12);
        assert!(!me.admits(&BipartitePureState::from_schmidt_weights(&[0.5, 0.3, 0.2]).unwrap(), 1e-9).unwrap());
    }

    #[test]
    fn report_assembles() {
        let r = bound_report(&spec("Z3", &[0.5, 0.3, 0.2]), &[1.0 / 3.0; 3], &MuStrategy::Eq60, None).unwrap();
        assert!((r.gamma_min_lower - 1.0 / 3.0).abs() < 1e-10);
        assert!(r.lemma10_pass);
        assert!(r.gap > 0.0);
    }
}
