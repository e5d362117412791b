import csv

import numpy as np
import pytest

from kanhope import corpus
from kanhope.corpus import Dataset, DatasetError, Label, SplitSpec

from conftest import synthetic_rows, write_dataset_csv


def make_dataset(counts: dict[Label, int], name="made") -> Dataset:
    comments = []
    for label, count in counts.items():
        for _ in range(count):
            comments.append(corpus.Comment(len(comments), f"text {len(comments)}", label))
    return Dataset(comments, name=name)


class TestLoad:
    def test_published_training_counts(self, tmp_path):
        rows = [("ಒಳ್ಳೆಯದು", "Not-Hope")] * 3265 + [("ಸೂಪರ್", "Hope")] * 1675
        path = write_dataset_csv(tmp_path / "train.csv", rows)
        data = corpus.load_dataset(path)
        counts = data.label_counts()
        assert counts[Label.NOT_HOPE] == 3265
        assert counts[Label.HOPE] == 1675
        assert len(data) == 4940
        assert [c.id for c in data] == list(range(4940))

    def test_header_only_file(self, tmp_path):
        path = write_dataset_csv(tmp_path / "empty.csv", [])
        assert len(corpus.load_dataset(path)) == 0

    def test_unknown_label_names_row(self, tmp_path):
        path = write_dataset_csv(tmp_path / "bad.csv", [("ok", "Hope"), ("uh", "Maybe")])
        with pytest.raises(DatasetError, match="row 3.*Maybe"):
            corpus.load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            corpus.load_dataset(tmp_path / "nope.csv")

    def test_malformed_row_reports_number(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("text,label\nonly-one-field\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="row 2"):
            corpus.load_dataset(path)

    def test_empty_text_rejected(self, tmp_path):
        path = write_dataset_csv(tmp_path / "blank.csv", [("", "Hope")])
        with pytest.raises(DatasetError, match="row 2"):
            corpus.load_dataset(path)

    def test_non_utf8_rejected(self, tmp_path):
        path = tmp_path / "latin.csv"
        path.write_bytes(b"text,label\n\xff\xfe broken,Hope\n")
        with pytest.raises(DatasetError, match="UTF-8"):
            corpus.load_dataset(path)

    def test_custom_label_map(self, tmp_path):
        path = write_dataset_csv(tmp_path / "alt.csv", [("x", "HOPEFUL")])
        data = corpus.load_dataset(path, label_map={"HOPEFUL": Label.HOPE})
        assert data.comments[0].label is Label.HOPE

    def test_translation_column(self, tmp_path):
        path = write_dataset_csv(
            tmp_path / "tr.csv",
            [("ನಮಸ್ಕಾರ", "Hope", "greetings"), ("ಬೇಡ", "Not-Hope", "")],
            header=("text", "label", "translation"),
        )
        data = corpus.load_dataset(path)
        assert data.comments[0].translation == "greetings"
        assert data.comments[1].translation is None


class TestRoundTrip:
    def test_load_save_load_equal(self, tmp_path, synth_dataset):
        out = tmp_path / "again.csv"
        corpus.save_dataset(synth_dataset, out)
        again = corpus.load_dataset(out)
        assert again == synth_dataset

    def test_quoting_and_newlines_survive(self, tmp_path):
        rows = [('he said, "hi"\nnew line', "Hope"), ("plain", "Not-Hope")]
        path = write_dataset_csv(tmp_path / "q.csv", rows)
        data = corpus.load_dataset(path)
        out = tmp_path / "q2.csv"
        corpus.save_dataset(data, out)
        assert corpus.load_dataset(out) == data


class TestFilter:
    def test_published_filter_arithmetic(self):
        data = make_dataset(
            {Label.NOT_HOPE: 4064, Label.HOPE: 2112, Label.NOT_KANNADA: 1396}
        )
        assert len(data) == 7572
        kept = corpus.filter_labels(data, {Label.HOPE, Label.NOT_HOPE})
        assert len(kept) == 6176
        assert Label.NOT_KANNADA not in kept.label_counts()

    def test_identity_filter(self, synth_dataset):
        same = corpus.filter_labels(synth_dataset, set(Label))
        assert same == synth_dataset

    def test_order_and_ids_preserved(self, synth_dataset):
        kept = corpus.filter_labels(synth_dataset, {Label.HOPE})
        ids = [c.id for c in kept]
        assert ids == sorted(ids)
        originals = {c.id: c for c in synth_dataset}
        assert all(originals[c.id] == c for c in kept)

    def test_empty_result_is_error(self):
        data = make_dataset({Label.NOT_KANNADA: 5})
        with pytest.raises(DatasetError):
            corpus.filter_labels(data, {Label.HOPE})

    def test_empty_keep_set_rejected(self, synth_dataset):
        with pytest.raises(ValueError):
            corpus.filter_labels(synth_dataset, set())


class TestSplit:
    def test_published_split_sizes_exact(self):
        data = make_dataset({Label.NOT_HOPE: 4064, Label.HOPE: 2112})
        train, dev, test = corpus.split(data, SplitSpec(seed=0))
        assert (len(train), len(dev), len(test)) == (4940, 618, 618)

    def test_partition_properties(self, synth_dataset):
        data = corpus.filter_labels(synth_dataset, corpus.CLASSIFICATION_LABELS)
        train, dev, test = corpus.split(data, SplitSpec(seed=3))
        ids = [part.ids() for part in (train, dev, test)]
        assert ids[0] | ids[1] | ids[2] == data.ids()
        assert not (ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2])

    def test_determinism(self):
        rows = synthetic_rows(10)
        data = Dataset(
            [corpus.Comment(i, t, Label.HOPE if l == "Hope" else Label.NOT_HOPE) for i, (t, l) in enumerate(rows)]
        )
        spec = SplitSpec(seed=11)
        first = corpus.split(data, spec)
        second = corpus.split(data, spec)
        for a, b in zip(first, second):
            assert a == b

    def test_stratified_within_one_item(self):
        # exhaustive count check on the 65/35 example
        data = make_dataset({Label.NOT_HOPE: 65, Label.HOPE: 35})
        train, dev, test = corpus.split(data, SplitSpec(seed=0, stratified=True))
        counts = train.label_counts()
        assert abs(counts[Label.NOT_HOPE] - 52) <= 1
        assert abs(counts[Label.HOPE] - 28) <= 1
        for part, size in ((train, 80), (dev, 10), (test, 10)):
            assert len(part) == size
            for label, total in ((Label.NOT_HOPE, 65), (Label.HOPE, 35)):
                quota = size * total / 100
                assert abs(part.label_counts().get(label, 0) - quota) <= 1

    def test_stratified_published_class_rows(self):
        data = make_dataset({Label.NOT_HOPE: 4064, Label.HOPE: 2112})
        for part, size in zip(corpus.split(data, SplitSpec(seed=0)), (4940, 618, 618)):
            counts = part.label_counts()
            assert counts[Label.NOT_HOPE] + counts[Label.HOPE] == size
            assert abs(counts[Label.NOT_HOPE] - size * 4064 / 6176) <= 1

    def test_empty_split_is_error(self):
        data = make_dataset({Label.HOPE: 3, Label.NOT_HOPE: 2})
        with pytest.raises(DatasetError):
            corpus.split(data, SplitSpec(seed=0))

    def test_empty_dataset_is_error(self):
        with pytest.raises(DatasetError):
            corpus.split(Dataset([]), SplitSpec(seed=0))

    def test_invalid_fractions_rejected(self):
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=0.5, dev_fraction=0.2, test_fraction=0.2)
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=1.0, dev_fraction=0.0, test_fraction=0.0)

    def test_seed_changes_partition(self):
        data = make_dataset({Label.NOT_HOPE: 65, Label.HOPE: 35})
        a = corpus.split(data, SplitSpec(seed=0))
        b = corpus.split(data, SplitSpec(seed=1))
        assert any(x != y for x, y in zip(a, b))


class TestStats:
    def test_single_comment(self):
        data = Dataset([corpus.Comment(0, "a b a", Label.HOPE)])
        stats = corpus.corpus_stats(data)
        assert stats.num_posts == 1
        assert stats.num_tokens == 3
        assert stats.vocab_size == 2

    def test_tokens_per_post_floor(self):
        data = Dataset(
            [
                corpus.Comment(0, "w x y z", Label.HOPE),
                corpus.Comment(1, "a b c d e f", Label.NOT_HOPE),
            ]
        )
        assert corpus.corpus_stats(data).tokens_per_post == 5

    def test_empty_dataset_all_zero(self):
        stats = corpus.corpus_stats(Dataset([]))
        assert stats.to_dict() == {
            "posts": 0,
            "tokens": 0,
            "vocab": 0,
            "sentences": 0,
            "tokens_per_post": 0,
            "sentences_per_post": 0,
        }

    def test_sentence_rule(self):
        data = Dataset([corpus.Comment(0, "ಒಂದು. ಎರಡು! three?\nನಾಲ್ಕು।", Label.HOPE)])
        assert corpus.corpus_stats(data).num_sentences == 4

    def test_concatenation_additivity(self):
        rows_a = synthetic_rows(40, seed=1)
        rows_b = synthetic_rows(40, seed=2)
        to_ds = lambda rows, base: Dataset(
            [
                corpus.Comment(base + i, t, Label.HOPE if l == "Hope" else Label.NOT_HOPE)
                for i, (t, l) in enumerate(rows)
            ]
        )
        a, b = to_ds(rows_a, 0), to_ds(rows_b, 1000)
        both = Dataset(a.comments + b.comments)
        sa, sb, s = corpus.corpus_stats(a), corpus.corpus_stats(b), corpus.corpus_stats(both)
        assert s.num_tokens == sa.num_tokens + sb.num_tokens
        assert s.vocab_size <= sa.vocab_size + sb.vocab_size
