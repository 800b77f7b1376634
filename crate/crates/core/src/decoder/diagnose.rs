use std::collections::HashSet;

use crate::langmodel::ConditionalLm;
use crate::topic_syntax::{top_topic_words, HmmLdaModel};
use crate::Result;

/// Next-token log-probabilities split into stop-list and topic-list words,
/// each sorted descending (ties by id).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticTables {
    pub stop: Vec<(usize, f64)>,
    pub topic: Vec<(usize, f64)>,
}

/// A word on both lists is reported as a stop word only.
pub fn diagnose_split<L: ConditionalLm + ?Sized>(
    lm: &L,
    source: &[usize],
    prefix: &[usize],
    stop_list: &HashSet<usize>,
    topic_list: &HashSet<usize>,
) -> DiagnosticTables {
    let lps = lm.next_logprobs(source, prefix);
    let mut stop = Vec::new();
    let mut topic = Vec::new();
    for (w, &lp) in lps.iter().enumerate() {
        if stop_list.contains(&w) {
            stop.push((w, lp));
        } else if topic_list.contains(&w) {
            topic.push((w, lp));
        }
    }
    let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    stop.sort_by(order);
    topic.sort_by(order);
    DiagnosticTables { stop, topic }
}

/// Union of the top `per_topic` words of every topic.
pub fn topic_word_list(model: &HmmLdaModel, per_topic: usize, exclude: &HashSet<usize>) -> Result<HashSet<usize>> {
    let mut out = HashSet::new();
    for z in 0..model.num_topics() {
        out.extend(top_topic_words(model, z, per_topic, exclude)?);
    }
    Ok(out)
}
