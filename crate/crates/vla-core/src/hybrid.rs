//! Unified navigation+manipulation action grammar.
//!
//! Every mobile step starts with a direction token whose identity alone fixes
//! the arity of what follows: motion directions (forward, turn left, turn
//! right) carry exactly one value token, and stop carries the manipulation
//! value tokens. The grammar is therefore prefix-free and decodes greedily
//! left to right. Fixed-base embodiments never engage it — their streams are
//! plain manipulation tokens.

use serde::{Deserialize, Serialize};

use crate::action::{ActionVector, Embodiment};
use crate::vocab::{
    detokenize_value, tokenize_value, BinSpec, CodecError, Marker, SymbolClass, TokenSeq,
    Vocabulary,
};

/// The four per-step direction tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectionToken {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl DirectionToken {
    pub fn marker(self) -> Marker {
        match self {
            DirectionToken::Forward => Marker::DirForward,
            DirectionToken::TurnLeft => Marker::DirTurnLeft,
            DirectionToken::TurnRight => Marker::DirTurnRight,
            DirectionToken::Stop => Marker::DirStop,
        }
    }

    pub fn from_marker(m: Marker) -> Option<DirectionToken> {
        match m {
            Marker::DirForward => Some(DirectionToken::Forward),
            Marker::DirTurnLeft => Some(DirectionToken::TurnLeft),
            Marker::DirTurnRight => Some(DirectionToken::TurnRight),
            Marker::DirStop => Some(DirectionToken::Stop),
            _ => None,
        }
    }
}

/// A motion direction (everything but stop).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveDirection {
    /// Advance along the current heading; value is a distance.
    Forward,
    /// Rotate counterclockwise by the (signed) value in radians.
    TurnLeft,
    /// Rotate clockwise by the (signed) value in radians.
    TurnRight,
}

impl MoveDirection {
    pub fn direction(self) -> DirectionToken {
        match self {
            MoveDirection::Forward => DirectionToken::Forward,
            MoveDirection::TurnLeft => DirectionToken::TurnLeft,
            MoveDirection::TurnRight => DirectionToken::TurnRight,
        }
    }
}

/// One timestep of the unified action space. The variant structure enforces
/// the grammar invariants: motion steps carry exactly a nav value and stop
/// steps carry exactly a manipulation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HybridStep {
    Move { direction: MoveDirection, value: f64 },
    Manip(ActionVector),
}

impl HybridStep {
    pub fn direction(&self) -> DirectionToken {
        match self {
            HybridStep::Move { direction, .. } => direction.direction(),
            HybridStep::Manip(_) => DirectionToken::Stop,
        }
    }

    pub fn forward(distance: f64) -> Self {
        HybridStep::Move {
            direction: MoveDirection::Forward,
            value: distance,
        }
    }

    pub fn turn_left(angle: f64) -> Self {
        HybridStep::Move {
            direction: MoveDirection::TurnLeft,
            value: angle,
        }
    }

    pub fn turn_right(angle: f64) -> Self {
        HybridStep::Move {
            direction: MoveDirection::TurnRight,
            value: angle,
        }
    }

    pub fn stop(manip: ActionVector) -> Self {
        HybridStep::Manip(manip)
    }

    pub fn manip(&self) -> Option<&ActionVector> {
        match self {
            HybridStep::Manip(a) => Some(a),
            HybridStep::Move { .. } => None,
        }
    }
}

/// Quantization ranges for the two nav value kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavBinSpecs {
    /// Forward distance per step, range [0, d_max].
    pub distance: BinSpec,
    /// Rotation per step, symmetric range [-theta_max, theta_max].
    pub angle: BinSpec,
}

impl NavBinSpecs {
    pub fn new(d_max: f64, theta_max: f64, n_bins: usize) -> Result<Self, CodecError> {
        Ok(Self {
            distance: BinSpec::new(0.0, d_max, n_bins)?,
            angle: BinSpec::new(-theta_max, theta_max, n_bins)?,
        })
    }

    fn spec_for(&self, direction: MoveDirection) -> &BinSpec {
        match direction {
            MoveDirection::Forward => &self.distance,
            MoveDirection::TurnLeft | MoveDirection::TurnRight => &self.angle,
        }
    }
}

/// Encodes one step: `[DIR_*, value]` for motion, `[DIR_STOP, b1..bD]` for
/// manipulation.
pub fn encode_step(
    step: &HybridStep,
    nav: &NavBinSpecs,
    manip_specs: &[BinSpec],
    vocab: &Vocabulary,
) -> Result<TokenSeq, GrammarError> {
    let mut ids = vec![step.direction().marker().id()];
    match step {
        HybridStep::Move { direction, value } => {
            let spec = nav.spec_for(*direction);
            ids.push(vocab.bin_token(tokenize_value(*value, spec)?));
        }
        HybridStep::Manip(action) => {
            let toks = crate::vocab::tokenize_action(action, manip_specs, vocab)?;
            ids.extend(toks.ids);
        }
    }
    Ok(TokenSeq::new(ids))
}

/// Result of a greedy stream decode: the steps parsed plus whether the stream
/// ended in the middle of a step.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStream {
    pub steps: Vec<HybridStep>,
    pub truncated: bool,
}

/// Greedy left-to-right parse of a hybrid token stream.
///
/// Each step begins with a direction token which fixes its arity. Parsing
/// stops cleanly at END_OF_CHUNK or EOS. A stream that ends mid-step yields
/// the steps parsed so far with the truncation flag set. A step that begins
/// with a non-direction token, or a non-bin token inside a value slot, is a
/// parse error carrying the offending offset.
pub fn decode_stream(
    tokens: &TokenSeq,
    nav: &NavBinSpecs,
    manip_specs: &[BinSpec],
    vocab: &Vocabulary,
    embodiment: Embodiment,
) -> Result<DecodedStream, GrammarError> {
    let mut steps = Vec::new();
    let mut pos = 0;
    let ids = &tokens.ids;
    while pos < ids.len() {
        let head = ids[pos];
        if head == Marker::EndOfChunk.id() || head == Marker::Eos.id() {
            return Ok(DecodedStream {
                steps,
                truncated: false,
            });
        }
        let direction = match vocab.classify(head)? {
            SymbolClass::Marker(m) => DirectionToken::from_marker(m),
            _ => None,
        }
        .ok_or(GrammarError::ExpectedDirection { offset: pos })?;
        let arity = match direction {
            DirectionToken::Stop => manip_specs.len(),
            _ => 1,
        };
        if pos + 1 + arity > ids.len() {
            return Ok(DecodedStream {
                steps,
                truncated: true,
            });
        }
        let value_ids = &ids[pos + 1..pos + 1 + arity];
        match direction {
            DirectionToken::Stop => {
                let mut values = Vec::with_capacity(arity);
                for (k, (&id, spec)) in value_ids.iter().zip(manip_specs).enumerate() {
                    let bin = vocab
                        .bin_index(id, pos + 1 + k)
                        .map_err(|_| GrammarError::ExpectedBin { offset: pos + 1 + k })?;
                    values.push(detokenize_value(bin, spec)?);
                }
                let action = ActionVector::new(embodiment, values)
                    .map_err(|e| GrammarError::Codec(CodecError::BadDimensions {
                        detail: e.to_string(),
                    }))?;
                steps.push(HybridStep::Manip(action));
            }
            DirectionToken::Forward | DirectionToken::TurnLeft | DirectionToken::TurnRight => {
                let move_dir = match direction {
                    DirectionToken::Forward => MoveDirection::Forward,
                    DirectionToken::TurnLeft => MoveDirection::TurnLeft,
                    _ => MoveDirection::TurnRight,
                };
                let spec = nav.spec_for(move_dir);
                let bin = vocab
                    .bin_index(value_ids[0], pos + 1)
                    .map_err(|_| GrammarError::ExpectedBin { offset: pos + 1 })?;
                steps.push(HybridStep::Move {
                    direction: move_dir,
                    value: detokenize_value(bin, spec)?,
                });
            }
        }
        pos += 1 + arity;
    }
    Ok(DecodedStream {
        steps,
        truncated: false,
    })
}

/// Prompt prefix: `[BOS, instruction words..., NAV_PROMPT if mobile]`.
pub fn encode_prompt_prefix(
    instruction: &[&str],
    mobile: bool,
    vocab: &Vocabulary,
) -> Result<TokenSeq, GrammarError> {
    if instruction.is_empty() {
        return Err(GrammarError::EmptyInstruction);
    }
    let mut ids = vec![Marker::Bos.id()];
    for word in instruction {
        ids.push(vocab.word_token(word)?);
    }
    if mobile {
        ids.push(Marker::NavPrompt.id());
    }
    Ok(TokenSeq::new(ids))
}

/// Bin specs for the value-only baseline's flat step vector
/// `(base_dx, base_dtheta, manip...)`: nav dims binned the same way as
/// manipulation dims, over symmetric ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatStepSpecs {
    pub base_dx: BinSpec,
    pub base_dtheta: BinSpec,
    pub manip: Vec<BinSpec>,
}

impl FlatStepSpecs {
    pub fn new(
        d_max: f64,
        theta_max: f64,
        manip: Vec<BinSpec>,
        n_bins: usize,
    ) -> Result<Self, CodecError> {
        Ok(Self {
            base_dx: BinSpec::new(-d_max, d_max, n_bins)?,
            base_dtheta: BinSpec::new(-theta_max, theta_max, n_bins)?,
            manip,
        })
    }

    pub fn dims(&self) -> usize {
        2 + self.manip.len()
    }
}

/// A decoded value-only step: base motion and manipulation applied together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatStep {
    pub base_dx: f64,
    pub base_dtheta: f64,
    pub manip: ActionVector,
}

/// Flattens a hybrid step into the fixed-width baseline vector. Motion steps
/// become a nonzero nav slot with neutral manipulation; stop steps become a
/// zero nav slot with the manipulation values.
pub fn flatten_step(step: &HybridStep, embodiment: Embodiment) -> FlatStep {
    match step {
        HybridStep::Move { direction, value } => {
            let (dx, dtheta) = match direction {
                MoveDirection::Forward => (*value, 0.0),
                MoveDirection::TurnLeft => (0.0, *value),
                MoveDirection::TurnRight => (0.0, -*value),
            };
            FlatStep {
                base_dx: dx,
                base_dtheta: dtheta,
                manip: ActionVector::zeros(embodiment),
            }
        }
        HybridStep::Manip(a) => FlatStep {
            base_dx: 0.0,
            base_dtheta: 0.0,
            manip: a.clone(),
        },
    }
}

/// Value-only ablation encoding: flat per-dimension binning of
/// `(base_dx, base_dtheta, manip...)` with no direction token. Length is
/// always `2 + D`.
pub fn encode_value_only_baseline(
    step: &HybridStep,
    specs: &FlatStepSpecs,
    vocab: &Vocabulary,
    embodiment: Embodiment,
) -> Result<TokenSeq, GrammarError> {
    let flat = flatten_step(step, embodiment);
    if flat.manip.values.len() != specs.manip.len() {
        return Err(GrammarError::Codec(CodecError::SpecCountMismatch {
            specs: specs.manip.len(),
            dims: flat.manip.values.len(),
        }));
    }
    let mut ids = Vec::with_capacity(specs.dims());
    ids.push(vocab.bin_token(tokenize_value(flat.base_dx, &specs.base_dx)?));
    ids.push(vocab.bin_token(tokenize_value(flat.base_dtheta, &specs.base_dtheta)?));
    for (x, spec) in flat.manip.values.iter().zip(&specs.manip) {
        ids.push(vocab.bin_token(tokenize_value(*x, spec)?));
    }
    Ok(TokenSeq::new(ids))
}

/// Decodes one flat baseline step from `2 + D` bin tokens.
pub fn decode_value_only_baseline(
    ids: &[u32],
    specs: &FlatStepSpecs,
    vocab: &Vocabulary,
    embodiment: Embodiment,
) -> Result<FlatStep, GrammarError> {
    if ids.len() != specs.dims() {
        return Err(GrammarError::Codec(CodecError::SpecCountMismatch {
            specs: specs.dims(),
            dims: ids.len(),
        }));
    }
    let bin = |pos: usize, spec: &BinSpec| -> Result<f64, GrammarError> {
        let b = vocab
            .bin_index(ids[pos], pos)
            .map_err(|_| GrammarError::ExpectedBin { offset: pos })?;
        Ok(detokenize_value(b, spec)?)
    };
    let base_dx = bin(0, &specs.base_dx)?;
    let base_dtheta = bin(1, &specs.base_dtheta)?;
    let mut manip = Vec::with_capacity(specs.manip.len());
    for (k, spec) in specs.manip.iter().enumerate() {
        manip.push(bin(2 + k, spec)?);
    }
    let manip = ActionVector::new(embodiment, manip).map_err(|e| {
        GrammarError::Codec(CodecError::BadDimensions {
            detail: e.to_string(),
        })
    })?;
    Ok(FlatStep {
        base_dx,
        base_dtheta,
        manip,
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrammarError {
    #[error("expected a direction token at offset {offset}")]
    ExpectedDirection { offset: usize },
    #[error("expected a bin token at offset {offset}")]
    ExpectedBin { offset: usize },
    #[error("instruction is empty")]
    EmptyInstruction,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::manip_bin_specs;
    use crate::vocab::build_vocabulary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> (Vocabulary, NavBinSpecs, Vec<BinSpec>) {
        let vocab = build_vocabulary(
            256,
            &["move", "and", "fetch", "bottles", "lift", "pot"],
            16,
        )
        .unwrap();
        let nav = NavBinSpecs::new(1.0, std::f64::consts::FRAC_PI_2, 256).unwrap();
        let manip = manip_bin_specs(Embodiment::Bimanual, 256);
        (vocab, nav, manip)
    }

    fn random_step(rng: &mut ChaCha8Rng, nav: &NavBinSpecs) -> HybridStep {
        match rng.gen_range(0..4) {
            0 => HybridStep::forward(rng.gen_range(0.0..=nav.distance.hi())),
            1 => HybridStep::turn_left(rng.gen_range(nav.angle.lo()..=nav.angle.hi())),
            2 => HybridStep::turn_right(rng.gen_range(nav.angle.lo()..=nav.angle.hi())),
            _ => {
                let vals = (0..8).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                HybridStep::Manip(ActionVector::new(Embodiment::Bimanual, vals).unwrap())
            }
        }
    }

    #[test]
    fn encode_examples() {
        let (vocab, nav, manip) = fixture();
        let fwd = encode_step(&HybridStep::forward(0.5), &nav, &manip, &vocab).unwrap();
        assert_eq!(
            fwd.ids,
            vec![Marker::DirForward.id(), vocab.bin_token(128)]
        );

        let stop = encode_step(
            &HybridStep::stop(ActionVector::zeros(Embodiment::Bimanual)),
            &nav,
            &manip,
            &vocab,
        )
        .unwrap();
        let mut expect = vec![Marker::DirStop.id()];
        expect.extend(vec![vocab.bin_token(128); 8]);
        assert_eq!(stop.ids, expect);

        let left = encode_step(&HybridStep::turn_left(0.0), &nav, &manip, &vocab).unwrap();
        assert_eq!(
            left.ids,
            vec![Marker::DirTurnLeft.id(), vocab.bin_token(128)]
        );
    }

    #[test]
    fn stream_roundtrip_random_steps() {
        let (vocab, nav, manip) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let half_nav_d = nav.distance.width() / 2.0;
        let half_nav_a = nav.angle.width() / 2.0;
        let half_manip = manip[0].width() / 2.0;
        for _ in 0..10_000 {
            let n_steps = rng.gen_range(0..6);
            let steps: Vec<HybridStep> =
                (0..n_steps).map(|_| random_step(&mut rng, &nav)).collect();
            let mut ids = Vec::new();
            for s in &steps {
                ids.extend(encode_step(s, &nav, &manip, &vocab).unwrap().ids);
            }
            let decoded = decode_stream(
                &TokenSeq::new(ids),
                &nav,
                &manip,
                &vocab,
            Embodiment::Bimanual,
            )
            .unwrap();
            assert!(!decoded.truncated);
            assert_eq!(decoded.steps.len(), steps.len());
            for (orig, dec) in steps.iter().zip(&decoded.steps) {
                assert_eq!(orig.direction(), dec.direction());
                match (orig, dec) {
                    (
                        HybridStep::Move { value: a, .. },
                        HybridStep::Move { value: b, .. },
                    ) => {
                        let half = if orig.direction() == DirectionToken::Forward {
                            half_nav_d
                        } else {
                            half_nav_a
                        };
                        assert!((a - b).abs() <= half + 1e-12);
                    }
                    (HybridStep::Manip(a), HybridStep::Manip(b)) => {
                        for (x, y) in a.values.iter().zip(&b.values) {
                            assert!((x - y).abs() <= half_manip + 1e-12);
                        }
                    }
                    _ => panic!("direction mismatch"),
                }
            }
        }
    }

    #[test]
    fn empty_stream_is_empty_parse() {
        let (vocab, nav, manip) = fixture();
        let out = decode_stream(
            &TokenSeq::default(),
            &nav,
            &manip,
            &vocab,
            Embodiment::Bimanual,
        )
        .unwrap();
        assert!(out.steps.is_empty());
        assert!(!out.truncated);
    }

    #[test]
    fn missing_value_sets_truncation_flag() {
        let (vocab, nav, manip) = fixture();
        let out = decode_stream(
            &TokenSeq::new(vec![Marker::DirForward.id()]),
            &nav,
            &manip,
            &vocab,
            Embodiment::Bimanual,
        )
        .unwrap();
        assert!(out.truncated);
        assert!(out.steps.is_empty());
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let (vocab, nav, manip) = fixture();
        let err = decode_stream(
            &TokenSeq::new(vec![vocab.bin_token(0)]),
            &nav,
            &manip,
            &vocab,
            Embodiment::Bimanual,
        )
        .unwrap_err();
        assert_eq!(err, GrammarError::ExpectedDirection { offset: 0 });

        let err = decode_stream(
            &TokenSeq::new(vec![Marker::DirForward.id(), Marker::Bos.id()]),
            &nav,
            &manip,
            &vocab,
            Embodiment::Bimanual,
        )
        .unwrap_err();
        assert_eq!(err, GrammarError::ExpectedBin { offset: 1 });
    }

    #[test]
    fn concatenation_safety() {
        let (vocab, nav, manip) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let a: Vec<HybridStep> = (0..rng.gen_range(0..4))
                .map(|_| random_step(&mut rng, &nav))
                .collect();
            let b: Vec<HybridStep> = (0..rng.gen_range(0..4))
                .map(|_| random_step(&mut rng, &nav))
                .collect();
            let enc = |steps: &[HybridStep]| {
                let mut ids = Vec::new();
                for s in steps {
                    ids.extend(encode_step(s, &nav, &manip, &vocab).unwrap().ids);
                }
                ids
            };
            let mut joined = enc(&a);
            joined.extend(enc(&b));
            let whole = decode_stream(
                &TokenSeq::new(joined),
                &nav,
                &manip,
                &vocab,
                Embodiment::Bimanual,
            )
            .unwrap();
            let da = decode_stream(
                &TokenSeq::new(enc(&a)),
                &nav,
                &manip,
                &vocab,
                Embodiment::Bimanual,
            )
            .unwrap();
            let db = decode_stream(
                &TokenSeq::new(enc(&b)),
                &nav,
                &manip,
                &vocab,
                Embodiment::Bimanual,
            )
            .unwrap();
            let mut expect = da.steps;
            expect.extend(db.steps);
            assert_eq!(whole.steps, expect);
        }
    }

    #[test]
    fn stream_stops_cleanly_at_terminators() {
        let (vocab, nav, manip) = fixture();
        let step = HybridStep::forward(0.25);
        let mut ids = encode_step(&step, &nav, &manip, &vocab).unwrap().ids;
        ids.push(Marker::EndOfChunk.id());
        ids.push(Marker::DirForward.id()); // unreachable garbage after the terminator
        let out = decode_stream(
            &TokenSeq::new(ids),
            &nav,
            &manip,
            &vocab,
            Embodiment::Bimanual,
        )
        .unwrap();
        assert_eq!(out.steps.len(), 1);
        assert!(!out.truncated);
    }

    #[test]
    fn prompt_prefix_layout() {
        let (vocab, ..) = fixture();
        let p = encode_prompt_prefix(&["lift", "pot"], false, &vocab).unwrap();
        assert_eq!(p.ids[0], Marker::Bos.id());
        assert_eq!(p.len(), 3);
        assert!(!p.ids.contains(&Marker::NavPrompt.id()));

        let m = encode_prompt_prefix(&["move", "and", "fetch", "bottles"], true, &vocab).unwrap();
        assert_eq!(*m.ids.last().unwrap(), Marker::NavPrompt.id());

        assert_eq!(
            encode_prompt_prefix(&[], true, &vocab).unwrap_err(),
            GrammarError::EmptyInstruction
        );
        assert!(matches!(
            encode_prompt_prefix(&["warp"], false, &vocab).unwrap_err(),
            GrammarError::Codec(CodecError::UnknownWord { .. })
        ));
    }

    #[test]
    fn value_only_baseline_contracts() {
        let (vocab, _, manip) = fixture();
        let specs =
            FlatStepSpecs::new(1.0, std::f64::consts::FRAC_PI_2, manip.clone(), 256).unwrap();
        let zero = HybridStep::stop(ActionVector::zeros(Embodiment::Bimanual));
        let toks = encode_value_only_baseline(&zero, &specs, &vocab, Embodiment::Bimanual).unwrap();
        assert_eq!(toks.len(), 2 + 8);
        // Symmetric even binning: zero maps to the midpoint bin everywhere.
        assert!(toks.ids.iter().all(|&id| id == vocab.bin_token(128)));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nav = NavBinSpecs::new(1.0, std::f64::consts::FRAC_PI_2, 256).unwrap();
        for _ in 0..2000 {
            let step = random_step(&mut rng, &nav);
            let toks =
                encode_value_only_baseline(&step, &specs, &vocab, Embodiment::Bimanual).unwrap();
            assert_eq!(toks.len(), 10);
            let flat =
                decode_value_only_baseline(&toks.ids, &specs, &vocab, Embodiment::Bimanual)
                    .unwrap();
            let orig = flatten_step(&step, Embodiment::Bimanual);
            assert!((flat.base_dx - orig.base_dx).abs() <= specs.base_dx.width() / 2.0 + 1e-12);
            assert!(
                (flat.base_dtheta - orig.base_dtheta).abs()
                    <= specs.base_dtheta.width() / 2.0 + 1e-12
            );
            for (x, y) in flat.manip.values.iter().zip(&orig.manip.values) {
                assert!((x - y).abs() <= specs.manip[0].width() / 2.0 + 1e-12);
            }
        }
    }
}
