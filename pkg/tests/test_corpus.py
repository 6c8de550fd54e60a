import numpy as np
import pytest

from signgen.corpus import (
    DEFAULT_WORDS,
    REST_POSE_13,
    build_rules,
    read_jsonl,
    split_of,
    synth_corpus,
    write_jsonl,
)
from signgen.rng import Rng


def _rules(n=6, window=8, seed=0):
    return build_rules(DEFAULT_WORDS[:n], window=window, rng=Rng(seed).child("rules"))


def test_one_word_zero_jitter_equals_primitive():
    rules = _rules()
    triples = synth_corpus(rules, 40, 1, Rng(1).child("c"), jitter=0.0)
    by_word = {r.word: r for r in rules}
    for _, text, pose in triples:
        np.testing.assert_array_equal(pose.frames, by_word[text].trajectory(REST_POSE_13))


def test_same_seed_identical_corpus():
    rules = _rules()
    a = synth_corpus(rules, 10, 4, Rng(2).child("c"), jitter=0.02)
    b = synth_corpus(rules, 10, 4, Rng(2).child("c"), jitter=0.02)
    for (ia, ta, pa), (ib, tb, pb) in zip(a, b):
        assert ia == ib and ta == tb
        np.testing.assert_array_equal(pa.frames, pb.frames)


def test_durations_are_window_multiples_and_boundaries_rest():
    window = 8
    rules = _rules(window=window)
    for r in rules:
        assert r.duration % window == 0
        traj = r.trajectory(REST_POSE_13)
        np.testing.assert_allclose(traj[0], REST_POSE_13, atol=1e-12)
        np.testing.assert_allclose(traj[-1], REST_POSE_13, atol=1e-12)


def test_primitive_separation():
    rules = _rules(n=12)
    trajs = [r.trajectory(REST_POSE_13) for r in rules]
    for i in range(len(trajs)):
        for j in range(i + 1, len(trajs)):
            n = min(len(trajs[i]), len(trajs[j]))
            sep = np.linalg.norm(trajs[i][:n] - trajs[j][:n], axis=-1).mean()
            assert sep > 0.05, (rules[i].word, rules[j].word, sep)


def test_word_count_histogram_uniform():
    max_words = 4
    n = 10_000
    triples = synth_corpus(_rules(), n, max_words, Rng(3).child("c"), jitter=0.0)
    counts = np.bincount([len(t.split()) for _, t, _ in triples], minlength=max_words + 1)[1:]
    p = 1.0 / max_words
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma), counts


def test_text_recoverable_by_nearest_primitive_at_zero_jitter():
    rules = _rules(n=8)
    by_word = {r.word: r for r in rules}
    triples = synth_corpus(rules, 30, 4, Rng(4).child("c"), jitter=0.0)
    for _, text, pose in triples:
        recovered = []
        t = 0
        while t < pose.T:
            best = None
            for r in rules:
                chunk = pose.frames[t : t + r.duration]
                if chunk.shape[0] < r.duration:
                    continue
                err = float(np.abs(chunk - r.trajectory(REST_POSE_13)).max())
                if best is None or err < best[0]:
                    best = (err, r)
            assert best is not None and best[0] == 0.0
            recovered.append(best[1].word)
            t += best[1].duration
        assert " ".join(recovered) == text


def test_split_is_deterministic_and_roughly_80_10_10():
    ids = [f"synth-{i:06d}" for i in range(5000)]
    splits = [split_of(i, seed=9) for i in ids]
    assert splits == [split_of(i, seed=9) for i in ids]
    frac_train = splits.count("train") / len(splits)
    frac_valid = splits.count("valid") / len(splits)
    frac_test = splits.count("test") / len(splits)
    assert abs(frac_train - 0.8) < 0.03
    assert abs(frac_valid - 0.1) < 0.02
    assert abs(frac_test - 0.1) < 0.02


def test_jsonl_roundtrip_bit_identical(tmp_path):
    triples = synth_corpus(_rules(), 3, 3, Rng(5).child("c"), jitter=0.01)
    path = tmp_path / "corpus.jsonl"
    write_jsonl(path, triples)
    loaded = read_jsonl(path)
    assert len(loaded) == 3
    for (ia, ta, pa), (ib, tb, pb) in zip(triples, loaded):
        assert ia == ib and ta == tb and pa.fps == pb.fps
        np.testing.assert_array_equal(pa.frames, pb.frames)


def test_jsonl_long_sequence_roundtrip(tmp_path):
    frames = Rng(6).child("big").normal((10_000, 4, 2))
    from signgen.pose import PoseSequence

    path = tmp_path / "big.jsonl"
    write_jsonl(path, [("big-0", "x", PoseSequence(frames, 30.0, "big-0"))])
    (_, _, loaded) = read_jsonl(path)[0]
    np.testing.assert_allclose(loaded.frames, frames, atol=1e-15, rtol=0)


def test_jsonl_missing_field_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "text": "x", "fps": 25, "frames": [[[0,0]]]}\n{"id": "b", "text": "y", "fps": 25}\n')
    with pytest.raises(ValueError, match=r":2: record missing field 'frames'"):
        read_jsonl(path)


def test_empty_rule_set_rejected():
    with pytest.raises(ValueError, match="empty rule set"):
        synth_corpus([], 5, 3, Rng(0))
    with pytest.raises(ValueError, match="at least 2"):
        build_rules(["solo"], window=8, rng=Rng(0))
