//! End-to-end toy pipeline built through the library API.

use dcgen_core::corpus::{DialoguePair, StopList, Vocabulary};
use dcgen_core::decoder::{beam_search, mmi_rerank, Candidate, DecoderConfig, SourceContext};
use dcgen_core::langmodel::{train_ibm1, train_ngram, MixtureLm};
use dcgen_core::sif::{SifModel, WordVectors, DEFAULT_A};
use dcgen_core::topic_syntax::{conversation_documents, train, HmmLdaConfig, HmmLdaModel, WordTopicStats};

pub struct Pipeline {
    pub vocab: Vocabulary,
    pub hmm: HmmLdaModel,
    pub stats: WordTopicStats,
    pub vectors: WordVectors,
    pub sif: SifModel,
    pub forward: MixtureLm,
    pub reverse: MixtureLm,
    pub stop: StopList,
}

pub struct PipelineParams {
    pub topics: usize,
    pub burn_in: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Pipeline {
    pub fn train(pairs: &[DialoguePair], p: &PipelineParams) -> Self {
        let vocab = Vocabulary::build(pairs, 1).unwrap();
        let docs = conversation_documents(pairs, &vocab);
        let cfg = HmmLdaConfig { burn_in: p.burn_in, seed: p.seed, ..HmmLdaConfig::with_topics(p.topics) };
        let (state, stats) = train(&cfg, &docs, vocab.len()).unwrap();
        let words: Vec<&str> = (4..vocab.len()).map(|i| vocab.token(i)).collect();
        let vectors = WordVectors::random(&words, p.dim, p.seed);
        let unigram: Vec<f64> = (0..vocab.len()).map(|i| vocab.unigram(i)).collect();
        let sentences: Vec<Vec<usize>> = docs.iter().flatten().cloned().collect();
        let sif = SifModel::fit(p.dim, vectors.align(&vocab), unigram, &sentences, DEFAULT_A).unwrap();
        let ids: Vec<(Vec<usize>, Vec<usize>)> =
            pairs.iter().map(|x| (vocab.encode(&x.source), vocab.encode(&x.target))).collect();
        let swapped: Vec<(Vec<usize>, Vec<usize>)> = ids.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let lm = |data: &[(Vec<usize>, Vec<usize>)]| {
            let targets: Vec<Vec<usize>> = data.iter().map(|x| x.1.clone()).collect();
            let ng = train_ngram(&targets, 3, 0.75, vocab.len()).unwrap();
            MixtureLm::new(ng, train_ibm1(data, 10).unwrap(), 0.6).unwrap()
        };
        Self {
            forward: lm(&ids),
            reverse: lm(&swapped),
            hmm: state.into_model(),
            stats,
            vectors,
            sif,
            stop: StopList::default(),
            vocab,
        }
    }

    /// Beam search then MMI reranking.
    pub fn decode(&self, source: &[String], cfg: &DecoderConfig) -> Vec<Candidate> {
        let src = self.vocab.encode(source);
        let ctx = SourceContext::new(&src, &self.stats, &self.sif, self.vocab.len());
        let out = beam_search(&self.forward, &ctx, cfg).unwrap();
        mmi_rerank(out.candidates, &self.reverse, &src, cfg).unwrap()
    }
}
