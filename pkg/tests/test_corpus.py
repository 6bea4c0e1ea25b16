import json

import pytest

from corpus import (
    EOS,
    SEP,
    UNK_ID,
    CompletionExample,
    CorpusError,
    DialogTurn,
    ExtendedVocab,
    bio_spans,
    bio_tag_set,
    build_vocab,
    content_hash,
    dialog_acts,
    encode_source,
    is_valid_bio,
    kfold_indices,
    kfold_split,
    load_jsonl,
    save_jsonl,
    tokenize,
)


def test_tokenize_strips_punctuation():
    assert tokenize("Do you like dogs?") == ["do", "you", "like", "dogs"]
    assert tokenize("I don't, really.") == ["i", "don't", "really"]


def test_build_vocab_orders_by_count():
    vocab = build_vocab([["a", "a", "b"]])
    assert vocab.id("a") == 5
    assert vocab.id("b") == 6
    assert vocab.id("zebra") == UNK_ID
    assert vocab.to_list() == ["a", "b"]


def test_build_vocab_min_count_and_cap():
    vocab = build_vocab([["a", "a", "b", "c", "c", "c"]], min_count=2, max_size=6)
    assert vocab.to_list() == ["c"]
    with pytest.raises(ValueError):
        build_vocab([])


def test_encode_source_with_context(tiny_vocab, turn):
    ex = CompletionExample((turn,), ("yes",), ("yes", "i", "like", "dogs"))
    enc = encode_source(ex, tiny_vocab, history_depth=1)
    assert list(enc.tokens) == ["do", "you", "like", "dogs", SEP, "yes", EOS]
    assert enc.extended.oov == []
    assert enc.copy_matrix().shape == (7, len(tiny_vocab))


def test_encode_source_oov_gets_temporary_id(tiny_vocab, turn):
    ex = CompletionExample((turn,), ("titanic",), ("titanic",), "already_complete")
    enc = encode_source(ex, tiny_vocab)
    pos = enc.tokens.index("titanic")
    assert enc.ids[pos] == UNK_ID
    assert enc.copy_ids[pos] == len(tiny_vocab)
    assert enc.extended.is_temporary(enc.copy_ids[pos])
    assert enc.extended.token(len(tiny_vocab)) == "titanic"


def test_extended_vocab_dedupes(tiny_vocab):
    ext = ExtendedVocab(tiny_vocab, ["zed", "zed", "yes", "kip"])
    assert len(ext) == len(tiny_vocab) + 2
    assert ext.id("kip") == len(tiny_vocab) + 1


def test_zero_history_depth(tiny_vocab, turn):
    ex = CompletionExample((turn,), ("yes",), ("yes",), "already_complete")
    assert list(encode_source(ex, tiny_vocab, history_depth=0).tokens) == ["yes", EOS]


def test_bio_helpers():
    assert bio_tag_set(["ARG0"]) == ["O", "B-ARG0", "I-ARG0"]
    assert bio_spans(["B-ARG1", "I-ARG1", "O", "B-V"]) == [("ARG1", 0, 1), ("V", 3, 3)]
    assert is_valid_bio(["B-ARG0", "I-ARG0"])
    assert not is_valid_bio(["O", "I-ARG0"])
    assert not is_valid_bio(["B-ARG0", "I-ARG1"])


def test_already_complete_needs_equal_reference(turn):
    with pytest.raises(CorpusError):
        CompletionExample((turn,), ("yes",), ("yes", "i", "do"), "already_complete")


def test_turn_rejects_whitespace_tokens():
    with pytest.raises(CorpusError):
        DialogTurn("system", ("two words",))


def test_turn_rejects_uppercase_tokens():
    with pytest.raises(CorpusError, match="lowercase"):
        DialogTurn("system", ("do", "you", "like", "Dogs"))


def test_jsonl_lowercases_token_lists(tmp_path):
    path = tmp_path / "completion.jsonl"
    row = {"context": [{"speaker": "system", "tokens": ["Do", "you", "like", "DOGS"]}],
           "source": ["Yes"], "reference": ["Yes", "I", "do"]}
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    (ex,) = load_jsonl(path, "completion")
    assert ex.context[0].tokens == ("do", "you", "like", "dogs")
    assert ex.source == ("yes",)
    assert ex.reference == ("yes", "i", "do")


def test_kfold_folds_are_disjoint():
    test, folds = kfold_indices(10, 5, seed=1)
    assert test == []
    assert [len(f) for f in folds] == [2] * 5
    assert sorted(i for f in folds for i in f) == list(range(10))
    assert kfold_indices(10, 5, seed=1) == (test, folds)


def test_kfold_with_test_split():
    test, folds = kfold_indices(12, 2, seed=0, test_size=2)
    assert len(test) == 2
    assert not set(test) & {i for f in folds for i in f}
    with pytest.raises(ValueError):
        kfold_indices(3, 5, seed=0)


def test_kfold_split_final_train():
    split = kfold_split(list(range(10)), k=5, seed=2)
    train, val = split.folds[0]
    assert len(train) == 8 and len(val) == 2
    assert sorted(split.final_train()) == list(range(10))


def test_jsonl_round_trip(tmp_path, synthetic_corpora):
    completion, da, srl = synthetic_corpora
    for kind, examples in (("completion", completion), ("da", da), ("srl", srl)):
        path = tmp_path / f"{kind}.jsonl"
        save_jsonl(path, examples)
        assert load_jsonl(path, kind) == examples


def test_jsonl_accepts_strings_and_label_names(tmp_path):
    path = tmp_path / "da.jsonl"
    row = {"context": [{"speaker": "system", "tokens": "What's your favorite movie?"}],
           "utterance": "Titanic!", "labels": ["statement", 1]}
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    [ex] = load_jsonl(path, "da")
    assert ex.utterance == ("titanic",)
    assert ex.labels == frozenset({dialog_acts().id("statement"), 1})


def test_jsonl_field_map(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(json.dumps({"text": ["hi"], "target": ["hi"], "completion_case": "already_complete"}) + "\n",
                    encoding="utf-8")
    [ex] = load_jsonl(path, "completion", field_map={"text": "source", "target": "reference"})
    assert ex.source == ("hi",)


@pytest.mark.parametrize("line, field", [
    ('{"utterance": ["x"], "labels": ["nope"]}', "labels"),
    ('{"utterance": ["x"], "labels": ["statement", "statement"]}', "labels"),
    ('{"utterance": ["x"]}', "labels"),
])
def test_jsonl_errors_name_line_and_field(tmp_path, line, field):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"utterance": ["ok"], "labels": ["statement"]}\n' + line + "\n", encoding="utf-8")
    with pytest.raises(CorpusError) as info:
        load_jsonl(path, "da")
    assert info.value.line == 2
    assert info.value.field == field


def test_jsonl_rejects_tag_count_mismatch(tmp_path):
    path = tmp_path / "srl.jsonl"
    row = {"utterance": ["a", "b"], "frames": [{"predicate_source": "in_utterance",
                                                 "predicate_span": [0, 0], "tags": ["B-V"]}]}
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(CorpusError) as info:
        load_jsonl(path, "srl")
    assert info.value.line == 1


def test_malformed_json(tmp_path):
    path = tmp_path / "x.jsonl"
    path.write_text("{not json\n", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_jsonl(path, "completion")


def test_content_hash_matches_git(tmp_path):
    path = tmp_path / "hello.txt"
    path.write_bytes(b"hello\n")
    assert content_hash(path) == "ce013625030ba8dba906f756967f9e9ca394464a"
