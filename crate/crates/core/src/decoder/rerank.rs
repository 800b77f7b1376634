use super::{Candidate, DecoderConfig};
use crate::langmodel::ConditionalLm;
use crate::{Error, Result};

/// Recomputes `forward = loglik + bias + α·T + β·S` and
/// `total = [forward] + λ·reverse` (reverse counts as 0 when absent), then
/// stable-sorts by `total` descending.
pub fn rank_by_weights(candidates: &mut [Candidate], alpha: f64, beta: f64, mmi_lambda: f64, keep_forward: bool) {
    for c in candidates.iter_mut() {
        c.forward = c.loglik + c.bias + alpha * c.topic_score + beta * c.semantic_score;
        let reverse = match c.reverse_score {
            Some(r) if mmi_lambda != 0.0 => mmi_lambda * r,
            _ => 0.0,
        };
        c.total = if keep_forward { c.forward + reverse } else { reverse };
    }
    candidates.sort_by(|a, b| b.total.total_cmp(&a.total));
}

/// Scores each candidate with the reverse model `log P(X|Y)` and reranks.
pub fn mmi_rerank<L: ConditionalLm + ?Sized>(
    mut candidates: Vec<Candidate>,
    reverse: &L,
    source: &[usize],
    cfg: &DecoderConfig,
) -> Result<Vec<Candidate>> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate list"));
    }
    for c in candidates.iter_mut() {
        c.reverse_score = Some(reverse.sequence_logprob(&c.tokens, source));
    }
    rank_by_weights(&mut candidates, cfg.alpha, cfg.beta, cfg.mmi_lambda, cfg.keep_forward_in_mmi);
    Ok(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langmodel::GridLm;

    fn cand(id: usize, loglik: f64, t: f64, s: f64, rev: Option<f64>) -> Candidate {
        Candidate {
            tokens: vec![id],
            loglik,
            bias: 0.0,
            topic_score: t,
            semantic_score: s,
            forward: loglik,
            reverse_score: rev,
            total: loglik,
            finished: true,
        }
    }

    fn ids(c: &[Candidate]) -> Vec<usize> {
        c.iter().map(|c| c.tokens[0]).collect()
    }

    #[test]
    fn hand_sorted_permutation() {
        // forward: -1, -2, -3, -4, -5; reverse: -9, -1, -2, -8, -0.5; λ = 1
        // keys: -10, -3, -5, -12, -5.5 → order 1, 2, 4, 0, 3
        let fwd = [-1.0, -2.0, -3.0, -4.0, -5.0];
        let rev = [-9.0, -1.0, -2.0, -8.0, -0.5];
        let mut c: Vec<_> = (0..5).map(|i| cand(i, fwd[i], 0.0, 0.0, Some(rev[i]))).collect();
        rank_by_weights(&mut c, 0.0, 0.0, 1.0, true);
        assert_eq!(ids(&c), vec![1, 2, 4, 0, 3]);
        rank_by_weights(&mut c, 0.0, 0.0, 1.0, false);
        assert_eq!(ids(&c), vec![4, 1, 2, 3, 0]);
    }

    #[test]
    fn zero_lambda_keeps_order() {
        let mut c: Vec<_> = (0..4).map(|i| cand(i, -(i as f64), 0.0, 0.0, Some(i as f64 - 10.0))).collect();
        rank_by_weights(&mut c, 0.0, 0.0, 0.0, true);
        assert_eq!(ids(&c), vec![0, 1, 2, 3]);
        rank_by_weights(&mut c, 0.0, 0.0, 0.0, false);
        assert_eq!(ids(&c), vec![0, 1, 2, 3]);
    }

    #[test]
    fn equal_forward_decided_by_reverse() {
        let mut c = vec![cand(0, -2.0, 0.0, 0.0, Some(-5.0)), cand(1, -2.0, 0.0, 0.0, Some(-1.0))];
        rank_by_weights(&mut c, 0.0, 0.0, 0.3, true);
        assert_eq!(ids(&c), vec![1, 0]);
    }

    #[test]
    fn negative_infinite_reverse_sorts_last() {
        let mut c = vec![cand(0, -1.0, 0.0, 0.0, Some(f64::NEG_INFINITY)), cand(1, -9.0, 0.0, 0.0, Some(-1.0))];
        rank_by_weights(&mut c, 0.0, 0.0, 0.5, true);
        assert_eq!(ids(&c), vec![1, 0]);
        rank_by_weights(&mut c, 0.0, 0.0, 0.0, true);
        assert_eq!(ids(&c), vec![0, 1]);
    }

    #[test]
    fn mmi_uses_reverse_model() {
        // reverse grid: from any candidate, source token 4 then EOS
        let l = |p: f64| p.ln();
        let rows = vec![
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY],
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY, l(0.5), f64::NEG_INFINITY, l(0.25), l(0.25)],
        ];
        let rev = GridLm::new(6, rows).unwrap();
        let c = vec![cand(5, -1.0, 0.0, 0.0, None)];
        let cfg = DecoderConfig { mmi_lambda: 2.0, alpha: 0.0, beta: 0.0, ..Default::default() };
        let out = mmi_rerank(c, &rev, &[4], &cfg).unwrap();
        assert!((out[0].reverse_score.unwrap() - l(0.5)).abs() < 1e-15);
        assert!((out[0].total - (-1.0 + 2.0 * l(0.5))).abs() < 1e-15);
        assert!(mmi_rerank(Vec::new(), &rev, &[4], &cfg).is_err());
    }
}
