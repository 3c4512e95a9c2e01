//! Fixed-size action chunks and their open-loop executor.
//!
//! A chunk is K consecutive steps predicted in one inference call. Mobile
//! chunks use the hybrid grammar per step; fixed-base chunks are plain
//! manipulation token groups (no direction tokens at all). Either way the
//! encoding is terminated by END_OF_CHUNK. Execution is open-loop: the
//! executor drains a full chunk before requesting the next prediction.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::action::Embodiment;
use crate::hybrid::{
    decode_stream, encode_step, GrammarError, HybridStep, NavBinSpecs,
};
use crate::vocab::{BinSpec, Marker, TokenSeq, Vocabulary};

/// K consecutive steps sharing one embodiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionChunk {
    pub embodiment: Embodiment,
    pub steps: Vec<HybridStep>,
}

impl ActionChunk {
    /// Builds a chunk, checking that every step matches the embodiment:
    /// manipulation dims agree and motion steps only appear on mobile bodies.
    pub fn new(embodiment: Embodiment, steps: Vec<HybridStep>) -> Result<Self, ChunkError> {
        for (i, step) in steps.iter().enumerate() {
            match step {
                HybridStep::Manip(a) if a.embodiment != embodiment => {
                    return Err(ChunkError::MixedEmbodiments { position: i });
                }
                HybridStep::Move { .. } if !embodiment.has_base() => {
                    return Err(ChunkError::MotionOnFixedBase { position: i });
                }
                _ => {}
            }
        }
        Ok(Self { embodiment, steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Encodes a chunk as the concatenation of per-step encodings terminated by
/// END_OF_CHUNK. Fixed-base steps encode as bare manipulation tokens.
pub fn encode_chunk(
    chunk: &ActionChunk,
    nav: &NavBinSpecs,
    manip_specs: &[BinSpec],
    vocab: &Vocabulary,
) -> Result<TokenSeq, ChunkError> {
    let mut ids = Vec::new();
    for step in &chunk.steps {
        if chunk.embodiment.has_base() {
            ids.extend(encode_step(step, nav, manip_specs, vocab)?.ids);
        } else {
            let action = step.manip().ok_or(ChunkError::MotionOnFixedBase {
                position: ids.len(),
            })?;
            ids.extend(crate::vocab::tokenize_action(action, manip_specs, vocab)
                .map_err(GrammarError::from)?
                .ids);
        }
    }
    ids.push(Marker::EndOfChunk.id());
    Ok(TokenSeq::new(ids))
}

/// Result of decoding a chunk prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedChunk {
    pub chunk: ActionChunk,
    /// Set when the stream ran out mid-step before END_OF_CHUNK.
    pub truncated: bool,
}

/// Parses up to `k` steps or END_OF_CHUNK, whichever comes first; any
/// remainder after the k-th step is ignored.
pub fn decode_chunk(
    tokens: &TokenSeq,
    k: usize,
    nav: &NavBinSpecs,
    manip_specs: &[BinSpec],
    vocab: &Vocabulary,
    embodiment: Embodiment,
) -> Result<DecodedChunk, ChunkError> {
    if embodiment.has_base() {
        let decoded = decode_stream(tokens, nav, manip_specs, vocab, embodiment)?;
        let truncated = decoded.truncated && decoded.steps.len() < k;
        let steps: Vec<HybridStep> = decoded.steps.into_iter().take(k).collect();
        Ok(DecodedChunk {
            chunk: ActionChunk::new(embodiment, steps)?,
            truncated,
        })
    } else {
        // Fixed-base streams: groups of D bin tokens per step.
        let d = manip_specs.len();
        let mut steps = Vec::new();
        let mut pos = 0;
        let ids = &tokens.ids;
        let mut truncated = false;
        while steps.len() < k && pos < ids.len() {
            let head = ids[pos];
            if head == Marker::EndOfChunk.id() || head == Marker::Eos.id() {
                break;
            }
            if pos + d > ids.len() {
                truncated = true;
                break;
            }
            let mut values = Vec::with_capacity(d);
            for (j, spec) in manip_specs.iter().enumerate() {
                let bin = vocab
                    .bin_index(ids[pos + j], pos + j)
                    .map_err(|_| GrammarError::ExpectedBin { offset: pos + j })?;
                values.push(crate::vocab::detokenize_value(bin, spec).map_err(GrammarError::from)?);
            }
            let action = crate::action::ActionVector::new(embodiment, values)
                .expect("dims match specs");
            steps.push(HybridStep::Manip(action));
            pos += d;
        }
        Ok(DecodedChunk {
            chunk: ActionChunk::new(embodiment, steps)?,
            truncated,
        })
    }
}

/// Open-loop chunk executor: a queue of pending steps refilled by a supplier
/// exactly when empty. One executor per rollout.
#[derive(Debug)]
pub struct ChunkExecutor {
    buffer: VecDeque<HybridStep>,
    predictions: usize,
}

impl ChunkExecutor {
    pub fn new() -> Self {
        Self {
            buffer: VecDeque::new(),
            predictions: 0,
        }
    }

    /// Number of supplier calls made so far.
    pub fn predictions(&self) -> usize {
        self.predictions
    }

    /// Pops the next step, invoking `predict` once if the buffer is empty.
    /// A supplier that yields an empty chunk aborts the episode.
    pub fn next_step<E>(
        &mut self,
        mut predict: impl FnMut() -> Result<ActionChunk, E>,
    ) -> Result<HybridStep, ExecutorAbort<E>> {
        if self.buffer.is_empty() {
            let chunk = predict().map_err(ExecutorAbort::Supplier)?;
            self.predictions += 1;
            if chunk.is_empty() {
                return Err(ExecutorAbort::EmptyChunk);
            }
            self.buffer.extend(chunk.steps);
        }
        Ok(self.buffer.pop_front().expect("buffer refilled above"))
    }
}

impl Default for ChunkExecutor {
    fn default() -> Self {
        Self::new()
    }
}

/// Why an executor stopped an episode early.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecutorAbort<E> {
    /// The supplier produced a chunk with zero steps.
    EmptyChunk,
    /// The supplier itself failed.
    Supplier(E),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChunkError {
    #[error("chunk mixes embodiments at step {position}")]
    MixedEmbodiments { position: usize },
    #[error("motion step at {position} on a fixed-base embodiment")]
    MotionOnFixedBase { position: usize },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{manip_bin_specs, ActionVector};
    use crate::vocab::build_vocabulary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (Vocabulary, NavBinSpecs, Vec<BinSpec>, Vec<BinSpec>) {
        let vocab = build_vocabulary(256, &["go"], 16).unwrap();
        let nav = NavBinSpecs::new(1.0, std::f64::consts::FRAC_PI_2, 256).unwrap();
        let manip4 = manip_bin_specs(Embodiment::SingleArm, 256);
        let manip8 = manip_bin_specs(Embodiment::MobileBimanual, 256);
        (vocab, nav, manip4, manip8)
    }

    #[test]
    fn encode_token_counts() {
        let (vocab, nav, manip4, manip8) = fixture();

        let k1 = ActionChunk::new(
            Embodiment::SingleArm,
            vec![HybridStep::stop(ActionVector::zeros(Embodiment::SingleArm))],
        )
        .unwrap();
        assert_eq!(encode_chunk(&k1, &nav, &manip4, &vocab).unwrap().len(), 5);

        let k5 = ActionChunk::new(
            Embodiment::SingleArm,
            vec![HybridStep::stop(ActionVector::zeros(Embodiment::SingleArm)); 5],
        )
        .unwrap();
        assert_eq!(encode_chunk(&k5, &nav, &manip4, &vocab).unwrap().len(), 21);

        let mobile = ActionChunk::new(
            Embodiment::MobileBimanual,
            vec![HybridStep::forward(0.5); 5],
        )
        .unwrap();
        assert_eq!(
            encode_chunk(&mobile, &nav, &manip8, &vocab).unwrap().len(),
            11
        );
    }

    #[test]
    fn mixed_embodiments_rejected() {
        let err = ActionChunk::new(
            Embodiment::Bimanual,
            vec![
                HybridStep::stop(ActionVector::zeros(Embodiment::Bimanual)),
                HybridStep::stop(ActionVector::zeros(Embodiment::SingleArm)),
            ],
        )
        .unwrap_err();
        assert_eq!(err, ChunkError::MixedEmbodiments { position: 1 });

        let err = ActionChunk::new(Embodiment::SingleArm, vec![HybridStep::forward(0.1)])
            .unwrap_err();
        assert_eq!(err, ChunkError::MotionOnFixedBase { position: 0 });
    }

    #[test]
    fn chunk_roundtrip_both_modes() {
        let (vocab, nav, manip4, manip8) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            // Fixed-base roundtrip.
            let steps: Vec<HybridStep> = (0..5)
                .map(|_| {
                    let vals = (0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    HybridStep::Manip(ActionVector::new(Embodiment::SingleArm, vals).unwrap())
                })
                .collect();
            let chunk = ActionChunk::new(Embodiment::SingleArm, steps).unwrap();
            let toks = encode_chunk(&chunk, &nav, &manip4, &vocab).unwrap();
            let back = decode_chunk(&toks, 5, &nav, &manip4, &vocab, Embodiment::SingleArm)
                .unwrap();
            assert!(!back.truncated);
            assert_eq!(back.chunk.len(), 5);

            // Mobile roundtrip.
            let steps: Vec<HybridStep> = (0..5)
                .map(|_| match rng.gen_range(0..2) {
                    0 => HybridStep::forward(rng.gen_range(0.0..=1.0)),
                    _ => {
                        let vals = (0..8).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                        HybridStep::Manip(
                            ActionVector::new(Embodiment::MobileBimanual, vals).unwrap(),
                        )
                    }
                })
                .collect();
            let chunk = ActionChunk::new(Embodiment::MobileBimanual, steps.clone()).unwrap();
            let toks = encode_chunk(&chunk, &nav, &manip8, &vocab).unwrap();
            let back =
                decode_chunk(&toks, 5, &nav, &manip8, &vocab, Embodiment::MobileBimanual).unwrap();
            assert_eq!(back.chunk.len(), 5);
            for (a, b) in steps.iter().zip(&back.chunk.steps) {
                assert_eq!(a.direction(), b.direction());
            }
        }
    }

    #[test]
    fn decode_edge_cases() {
        let (vocab, nav, manip4, _) = fixture();
        let empty = decode_chunk(
            &TokenSeq::default(),
            5,
            &nav,
            &manip4,
            &vocab,
            Embodiment::SingleArm,
        )
        .unwrap();
        assert_eq!(empty.chunk.len(), 0);

        // Over-long stream: exactly k steps consumed, remainder ignored.
        let step = HybridStep::stop(ActionVector::zeros(Embodiment::SingleArm));
        let chunk = ActionChunk::new(Embodiment::SingleArm, vec![step; 7]).unwrap();
        let mut toks = TokenSeq::default();
        for s in &chunk.steps {
            toks.extend(&crate::vocab::tokenize_action(s.manip().unwrap(), &manip4, &vocab).unwrap());
        }
        let got = decode_chunk(&toks, 5, &nav, &manip4, &vocab, Embodiment::SingleArm).unwrap();
        assert_eq!(got.chunk.len(), 5);
        assert!(!got.truncated);

        // Mid-step cutoff sets the flag.
        let cut = TokenSeq::new(toks.ids[..2].to_vec());
        let got = decode_chunk(&cut, 5, &nav, &manip4, &vocab, Embodiment::SingleArm).unwrap();
        assert!(got.truncated);
        assert_eq!(got.chunk.len(), 0);
    }

    #[test]
    fn executor_prediction_counts() {
        let zero = HybridStep::stop(ActionVector::zeros(Embodiment::SingleArm));
        let run = |k: usize, t: usize| -> usize {
            let mut ex = ChunkExecutor::new();
            for _ in 0..t {
                ex.next_step(|| {
                    Ok::<_, ()>(
                        ActionChunk::new(Embodiment::SingleArm, vec![zero.clone(); k]).unwrap(),
                    )
                })
                .unwrap();
            }
            ex.predictions()
        };
        assert_eq!(run(5, 20), 4);
        assert_eq!(run(1, 7), 7);
        assert_eq!(run(20, 7), 1);
        assert_eq!(run(5, 21), 5);
    }

    #[test]
    fn executor_preserves_order_without_loss() {
        // Tag steps with a sequence number via the first action value.
        let mut counter = 0.0;
        let mut ex = ChunkExecutor::new();
        let mut seen = Vec::new();
        for _ in 0..23 {
            let step = ex
                .next_step(|| {
                    let steps: Vec<HybridStep> = (0..4)
                        .map(|_| {
                            counter += 1.0;
                            HybridStep::stop(
                                ActionVector::new(
                                    Embodiment::SingleArm,
                                    vec![counter, 0.0, 0.0, 0.0],
                                )
                                .unwrap(),
                            )
                        })
                        .collect();
                    Ok::<_, ()>(ActionChunk::new(Embodiment::SingleArm, steps).unwrap())
                })
                .unwrap();
            seen.push(step.manip().unwrap().values[0]);
        }
        let expect: Vec<f64> = (1..=23).map(|i| i as f64).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn empty_chunk_aborts() {
        let mut ex = ChunkExecutor::new();
        let got = ex.next_step(|| {
            Ok::<_, ()>(ActionChunk::new(Embodiment::SingleArm, vec![]).unwrap())
        });
        assert_eq!(got.unwrap_err(), ExecutorAbort::EmptyChunk);
    }
}
