import itertools

import numpy as np
import pytest

from corpus import DAExample, FrameAnnotation, bio_tag_set, dialog_acts, is_valid_bio
from numeric import OptimizerConfig, gradient_check, index, nll, rng_stream
from understanding import (
    Argument,
    DAClassifier,
    DAConfig,
    SRLConfig,
    SRLFrame,
    SRLModel,
    SRLTagger,
    bio_transitions,
    build_da,
    build_srl,
    canonical,
    da_decide,
    da_example_loss,
    da_forward,
    da_train,
    da_utterance,
    extract_frames,
    gold_frames,
    predict_frames,
    srl_example_loss,
    srl_train,
    srl_view,
    viterbi_bio,
)

SMALL_DA = DAConfig(embedding=3, hidden=2, layers=2, dropout=0.0)
SMALL_SRL = SRLConfig(embedding=2, indicator=2, hidden=2, layers=2, dropout=0.0)


def test_da_decide_threshold():
    assert da_decide([0.9, 0.8, 0.1], 0.5) == {0, 1}
    assert da_decide([0.2, 0.3], 0.5) == {1}


def test_da_decide_falls_back_to_argmax():
    assert da_decide([0.9, 0.8, 0.1], 1.01) == {0}
    assert da_decide([0.5, 0.5, 0.5], 0.51) == {0}
    with pytest.raises(ValueError):
        da_decide([], 0.5)


def test_da_utterance_paths(da_example):
    assert da_utterance(da_example, "el") == ("yes",)
    assert da_utterance(da_example, "cmp") == ("yes", "i", "like", "dogs")
    with pytest.raises(ValueError):
        da_utterance(da_example, "both")


def test_zero_classifier_scores_one_half(tiny_vocab, acts, turn):
    classifier = DAClassifier(tiny_vocab, acts, SMALL_DA)
    pred = da_forward(classifier, (turn,), ("yes",))
    np.testing.assert_allclose(pred.D, [0.5] * len(acts))
    assert pred.H.shape == (classifier.hidden_size,)


def test_classifier_rejects_empty_utterance(tiny_vocab, acts, turn):
    with pytest.raises(ValueError):
        da_forward(DAClassifier(tiny_vocab, acts, SMALL_DA), (turn,), ())


def test_da_gradient_check(tiny_vocab, acts, da_example):
    classifier = DAClassifier(tiny_vocab, acts, SMALL_DA, rng_stream(3, "init-EL"))
    loss_fn = lambda: da_example_loss(classifier, da_example, "cmp")[0]  # noqa: E731
    assert gradient_check(loss_fn, classifier.parameters()) < 1e-4


def test_da_train_rejects_unknown_label(tiny_vocab, acts, turn):
    classifier = DAClassifier(tiny_vocab, acts, SMALL_DA)
    bad = DAExample((turn,), ("yes",), frozenset({len(acts)}))
    with pytest.raises(ValueError):
        da_train(classifier, [bad], OptimizerConfig(epochs=1))


def test_da_save_load(tmp_path, tiny_vocab, acts, turn):
    classifier = DAClassifier(tiny_vocab, acts, SMALL_DA, rng_stream(0, "init-EL"))
    classifier.save(tmp_path / "da.ckpt", history={"epoch_losses": [0.7]}, extra={"path": "el"})
    loaded, _, history = DAClassifier.load(tmp_path / "da.ckpt")
    assert history["epoch_losses"] == [0.7]
    assert loaded.acts.names == acts.names
    np.testing.assert_allclose(da_forward(loaded, (turn,), ("yes",)).D, da_forward(classifier, (turn,), ("yes",)).D)


def test_extract_frames_single_span():
    frame = extract_frames(["B-ARG1", "I-ARG1", "O"], None)
    assert frame == SRLFrame(None, (Argument("ARG1", 0, 1),))
    assert frame.key == "context"


def test_extract_frames_skips_predicate():
    frame = extract_frames(["B-ARG0", "B-V", "B-ARG1"], (1, 1))
    assert [a.role for a in frame.arguments] == ["ARG0", "ARG1"]


def test_frame_dict_round_trip():
    frame = SRLFrame((2, 3), (Argument("ARG0", 0, 1), Argument("ARG1", 4, 4, context_side=True)))
    assert SRLFrame.from_dict(frame.to_dict()) == frame


def test_gold_frames_and_canonical_order():
    annotations = (FrameAnnotation("in_context", (0, 0), ("B-ARG1",)),
                   FrameAnnotation("in_utterance", (0, 0), ("B-V",)))
    frames = canonical(gold_frames(annotations))
    assert [f.predicate for f in frames] == [(0, 0), None]


def test_bio_transitions_block_orphan_inside_tags():
    tags = ["O", "B-ARG0", "I-ARG0", "B-ARG1", "I-ARG1"]
    allowed, start = bio_transitions(tags)
    assert not start[2]
    assert allowed[1, 2] and allowed[2, 2]
    assert not allowed[0, 2]
    assert not allowed[3, 2]


def test_viterbi_respects_constraints():
    tags = ["O", "B-A", "I-A"]
    emissions = [[0.6, 0.4, 0.0], [0.1, 0.2, 0.7]]
    assert viterbi_bio(emissions, tags) == [1, 2]
    assert viterbi_bio(np.zeros((0, 3)), tags) == []


def test_viterbi_output_is_always_valid_bio():
    tags = bio_tag_set(["ARG0", "ARG1", "V"])
    rng = np.random.default_rng(0)
    for _ in range(25):
        P = rng.dirichlet(np.ones(len(tags)), size=int(rng.integers(1, 9)))
        assert is_valid_bio([tags[i] for i in viterbi_bio(P, tags)])


def test_tagger_emissions_are_distributions(tiny_vocab):
    tagger = SRLTagger(tiny_vocab, bio_tag_set(["ARG0", "V"]), SMALL_SRL, rng_stream(1, "init-EL"))
    P = tagger.emissions(("i", "like", "dogs"), (1, 1)).data
    assert P.shape == (3, 5)
    np.testing.assert_allclose(P.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        tagger.emissions(("i", "like"), (1, 2))
    with pytest.raises(ValueError):
        tagger.emissions((), None)


def test_srl_gradient_check(tiny_vocab):
    tagger = SRLTagger(tiny_vocab, bio_tag_set(["ARG0", "ARG1", "V"]), SMALL_SRL, rng_stream(5, "init-EL"))

    def loss_fn():
        P = tagger.emissions(("i", "like", "dogs"), (1, 1))
        return nll(index(P, 2), 3)

    assert gradient_check(loss_fn, tagger.parameters()) < 1e-4


def test_zero_model_predicts_no_frames(tiny_vocab, roles):
    model = SRLModel(tiny_vocab, roles.names, SMALL_SRL)
    pred = predict_frames([model], ("i", "like", "dogs"))
    assert pred.tags == ("O", "O", "O")
    assert pred.frames == ()


def test_srl_view_and_loss_count(srl_example, roles):
    tokens, frames = srl_view(srl_example, "el")
    assert tokens == srl_example.utterance
    model = build_srl([srl_example], roles, SMALL_SRL, seed=0, stream="init-EL")
    loss, count = srl_example_loss(model, tokens, frames)
    in_utterance = sum(1 for f in frames if f.predicate_source == "in_utterance" and f.predicate_span)
    assert count == len(tokens) * (2 + in_utterance)
    assert loss.item() > 0


def test_srl_save_load(tmp_path, srl_example, roles):
    model = build_srl([srl_example], roles, SMALL_SRL, seed=0, stream="init-EL")
    model.save(tmp_path / "srl.ckpt")
    loaded, _, _ = SRLModel.load(tmp_path / "srl.ckpt")
    assert loaded.predict(srl_example.utterance) == model.predict(srl_example.utterance)


@pytest.mark.slow
def test_da_training_reduces_loss(synthetic_corpora):
    corpus = synthetic_corpora[1][:8]
    classifier = build_da(corpus, dialog_acts(), SMALL_DA, seed=0, stream="init-EL")
    report = da_train(classifier, corpus, OptimizerConfig(lr=0.05, batch_size=4, epochs=12), seed=0)
    assert report.epoch_losses[-1] < report.epoch_losses[0]


@pytest.mark.slow
def test_srl_training_reduces_loss(synthetic_corpora, roles):
    corpus = synthetic_corpora[2][:6]
    model = build_srl(corpus, roles, SRLConfig(embedding=6, indicator=2, hidden=6, layers=2, dropout=0.0),
                      seed=0, stream="init-CMP")
    report = srl_train(model, corpus, OptimizerConfig(lr=0.05, batch_size=3, epochs=10), seed=0, path="cmp")
    assert report.epoch_losses[-1] < report.epoch_losses[0]


def _best_path_by_enumeration(P, tags):
    allowed, start = bio_transitions(tags)
    T, K = P.shape
    best, best_score = None, -np.inf
    for path in itertools.product(range(K), repeat=T):
        if not start[path[0]] or not all(allowed[a, b] for a, b in zip(path, path[1:])):
            continue
        score = float(np.log(P[np.arange(T), path]).sum())
        if score > best_score:
            best, best_score = list(path), score
    return best, best_score


def test_viterbi_matches_brute_force():
    tags = ["O", "B-A0", "I-A0", "B-A1", "I-A1"]
    rng = np.random.default_rng(5)
    for _ in range(300):
        P = rng.dirichlet(np.ones(len(tags)), size=int(rng.integers(1, 5)))
        best, best_score = _best_path_by_enumeration(P, tags)
        path = viterbi_bio(P, tags)
        assert float(np.log(P[np.arange(len(P)), path]).sum()) == pytest.approx(best_score, abs=1e-12)
        assert path == best


def test_tagger_emissions_sound_over_random_utterances(tiny_vocab):
    tags = bio_tag_set(["ARG0", "ARG1", "V"])
    words = tiny_vocab.to_list() + ["titanic"]
    rng = np.random.default_rng(8)
    for seed in range(10):
        tagger = SRLTagger(tiny_vocab, tags, SMALL_SRL, rng_stream(seed, "init-EL"))
        for _ in range(100):
            T = int(rng.integers(1, 7))
            utterance = tuple(words[i] for i in rng.integers(0, len(words), size=T))
            s = int(rng.integers(0, T))
            predicate = (s, int(rng.integers(s, T))) if rng.random() < 0.8 else None
            P = tagger.emissions(utterance, predicate).data
            assert P.shape == (T, len(tags))
            assert np.abs(P.sum(axis=1) - 1.0).max() <= 1e-9
            assert (P >= 0.0).all()


def test_untrained_da_loss_is_log_two_per_label(tiny_vocab, acts, da_example):
    classifier = DAClassifier(tiny_vocab, acts, SMALL_DA)
    loss, n_labels = da_example_loss(classifier, da_example)
    assert n_labels == len(acts)
    assert loss.item() == pytest.approx(n_labels * np.log(2.0), abs=1e-12)


def test_resumed_da_training_matches_uninterrupted(synthetic_corpora):
    corpus = synthetic_corpora[1][:5]
    config = DAConfig(embedding=3, hidden=2, layers=1, dropout=0.2)
    optim = OptimizerConfig(kind="adam", lr=0.01, batch_size=2)

    whole = build_da(corpus, dialog_acts(), config, seed=1, stream="init-EL")
    full = da_train(whole, corpus, optim, epochs=2, seed=1)

    split = build_da(corpus, dialog_acts(), config, seed=1, stream="init-EL")
    optimizer = optim.build(split.parameters())
    first = da_train(split, corpus, optim, epochs=1, seed=1, optimizer=optimizer)
    second = da_train(split, corpus, optim, epochs=1, seed=1, optimizer=optimizer, start_epoch=1)

    assert first.epoch_losses + second.epoch_losses == full.epoch_losses
    for a, b in zip(whole.parameters(), split.parameters()):
        np.testing.assert_array_equal(a.data, b.data)


@pytest.mark.slow
def test_da_overfits_a_single_example(synthetic_corpora):
    ex = synthetic_corpora[1][0]
    acts = dialog_acts()
    classifier = build_da([ex], acts, DAConfig(embedding=8, hidden=8, layers=1, dropout=0.0), seed=0,
                          stream="init-EL")
    report = da_train(classifier, [ex], OptimizerConfig(kind="adam", lr=0.05, batch_size=1), epochs=300, seed=0)
    assert report.steps == 300
    assert report.epoch_losses[-1] < 0.05
    assert da_decide(da_forward(classifier, ex.context, ex.utterance).D) == ex.labels
