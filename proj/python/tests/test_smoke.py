"""Smoke tests for the Python bindings."""

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import omnidiff as od  # noqa: E402


@pytest.fixture(scope="module")
def world():
    return od.ToyWorld.default(4, 2, 3, 2, 2, 3)


@pytest.fixture(scope="module")
def vocab(world):
    text, image, speech = world.modality_sizes()
    return od.build_vocabulary(text, image, speech)


def test_vocabulary_layout(vocab):
    assert vocab.total_size() == 9 + 4 + 16 + 4
    assert vocab.mask() == 0
    assert vocab.pad() == 1
    assert vocab.range(od.Modality.TEXT).size() == 4
    roundtrip = od.Vocabulary.from_manifest(vocab.to_manifest())
    assert roundtrip.manifest_hash() == vocab.manifest_hash()


def test_assemble_parse_roundtrip(vocab):
    t = vocab.range(od.Modality.TEXT).begin
    tokens, segments = od.assemble_sequence([(od.Modality.TEXT, [t, t + 1])], vocab)
    assert len(tokens) == 4
    parsed = od.parse_sequence(tokens, vocab)
    assert len(parsed) == 1
    assert parsed[0].modality == od.Modality.TEXT
    assert parsed[0].length == 2


def test_corruption_rates(vocab):
    t = vocab.range(od.Modality.TEXT).begin
    tokens = [t] * 40
    masked = 0
    trials = 2000
    for seed in range(trials):
        corrupted, positions = od.corrupt(tokens, 0.5, 1.0, [0], vocab, seed)
        assert 0 not in positions  # protected
        assert all(corrupted[p] == vocab.mask() for p in positions)
        masked += len(positions)
    rate = masked / (trials * 39)
    assert abs(rate - 0.5) < 0.02


def test_mask_ratio_domain():
    assert od.mask_ratio(0.25) == 0.25
    with pytest.raises(od.OmnidiffError):
        od.mask_ratio(1.5)


def test_model_forward_and_checkpoint(tmp_path, vocab):
    model = od.Model.create(1, 16, 2, vocab.total_size(), 32, seed=5)
    logits = model.forward([0, 9, 10, 11])
    assert logits.shape == (4, vocab.total_size())
    assert (logits == model.forward([0, 9, 10, 11])).all()

    path = str(tmp_path / "model.ckpt")
    model.save(path, vocab)
    loaded = od.Model.load(path, vocab)
    assert (loaded.forward([0, 9, 10, 11]) == logits).all()


def test_inpaint_fills_only_masks(vocab):
    model = od.Model.create(1, 16, 2, vocab.total_size(), 32, seed=5)
    t = vocab.range(od.Modality.TEXT).begin
    partial = [t, vocab.mask(), t + 1, vocab.mask()]
    filled = model.inpaint(partial, vocab, steps=2, temperature=0.0, seed=1)
    assert filled[0] == t and filled[2] == t + 1
    assert vocab.mask() not in filled


def test_dataset_and_world_rules(world, vocab):
    samples = od.make_dataset(od.Task.ASR, 10, world, vocab, seed=3)
    assert len(samples) == 10
    for s in samples:
        modality, speech = s.prompt[0]
        assert modality == od.Modality.SPEECH
        assert od.speech_to_text(speech, world, vocab) == s.response[0][1]


def test_adaptive_lengths():
    assert od.adaptive_init_length(od.SpeechTask.TTS, 10) == 35
    assert od.adaptive_init_length(od.SpeechTask.ASR, 100) == 20


def test_respond_produces_image_region(world, vocab):
    model = od.Model.create(1, 16, 2, vocab.total_size(), 64, seed=5)
    samples = od.make_dataset(od.Task.T2I, 1, world, vocab, seed=4)
    out = model.respond(od.Task.T2I, samples[0].prompt, world, vocab, steps=4, seed=2)
    assert len(out) == world.grid_side * world.grid_side
