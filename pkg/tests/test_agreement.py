import itertools
import logging

import numpy as np
import pytest

from kanhope import agreement
from kanhope.agreement import (
    AnnotationRecord,
    AnnotatorInfo,
    UndefinedAlphaError,
    annotator_summary,
    coincidence_matrix,
    krippendorff_alpha,
)


def records_from_units(units):
    """units: list of per-unit value lists; annotators assigned positionally."""
    records = []
    for u, values in enumerate(units):
        for a, value in enumerate(values):
            records.append(AnnotationRecord(f"u{u}", f"a{a}", value))
    return records


def _expected_disagreement(units):
    pairable = [vals for vals in units if len(vals) >= 2]
    pooled = [v for vals in pairable for v in vals]
    n = len(pooled)
    disagreeing = sum(
        1 for i in range(n) for j in range(n) if i != j and pooled[i] != pooled[j]
    )
    return disagreeing / (n * (n - 1))


def alpha_oracle(units):
    """From-scratch pair enumeration of D_o and D_e (independent of the
    coincidence-matrix implementation)."""
    pairable = [vals for vals in units if len(vals) >= 2]
    n = sum(len(v) for v in pairable)
    if n == 0:
        raise ZeroDivisionError("no pairable values")
    d_o = 0.0
    for vals in pairable:
        m = len(vals)
        for i in range(m):
            for j in range(m):
                if i != j and vals[i] != vals[j]:
                    d_o += 1.0 / (m - 1)
    d_o /= n
    pooled = [v for vals in pairable for v in vals]
    disagreeing = sum(
        1 for i in range(n) for j in range(n) if i != j and pooled[i] != pooled[j]
    )
    d_e = disagreeing / (n * (n - 1))
    if d_e == 0.0:
        raise ZeroDivisionError("no expected disagreement")
    return 1.0 - d_o / d_e


class TestCoincidence:
    def test_unanimous_pair(self):
        m = coincidence_matrix(records_from_units([["A", "A"]]))
        assert m.value("A", "A") == 2.0
        assert m.n == 2.0

    def test_single_annotation_contributes_nothing(self):
        m = coincidence_matrix(records_from_units([["A"]]))
        assert m.n == 0.0
        assert all(m.value(c, k) == 0.0 for c in m.labels for k in m.labels)

    def test_two_unit_example(self):
        m = coincidence_matrix(records_from_units([["A", "A"], ["A", "B"]]))
        assert m.value("A", "A") == 2.0
        assert m.value("A", "B") == 1.0
        assert m.value("B", "A") == 1.0
        assert m.n == 4.0

    def test_symmetry_and_total(self):
        rng = np.random.default_rng(5)
        units = [list(rng.choice(["x", "y", "z"], size=rng.integers(1, 4))) for _ in range(8)]
        m = coincidence_matrix(records_from_units(units))
        for c in m.labels:
            for k in m.labels:
                assert m.value(c, k) == pytest.approx(m.value(k, c))
        total = sum(m.value(c, k) for c in m.labels for k in m.labels)
        assert total == pytest.approx(m.n)

    def test_third_of_a_pair_weights(self):
        # one unit, three annotators, one dissent: each ordered pair weighs 1/2
        m = coincidence_matrix(records_from_units([["A", "A", "B"]]))
        assert m.value("A", "A") == pytest.approx(1.0)
        assert m.value("A", "B") == pytest.approx(1.0)

    def test_duplicate_pair_rejected(self):
        records = [AnnotationRecord("u", "a", "A"), AnnotationRecord("u", "a", "B")]
        with pytest.raises(ValueError, match="duplicate"):
            coincidence_matrix(records)


class TestAlpha:
    def test_perfect_agreement(self):
        units = [["A", "A", "A"], ["B", "B", "B"], ["A", "A", "A"]]
        assert krippendorff_alpha(records_from_units(units)) == 1.0

    def test_worked_zero(self):
        assert krippendorff_alpha(records_from_units([["A", "A"], ["A", "B"]])) == 0.0

    def test_undefined_all_identical(self):
        with pytest.raises(UndefinedAlphaError):
            krippendorff_alpha(records_from_units([["A", "A"], ["A", "A"]]))

    def test_undefined_no_pairable(self):
        with pytest.raises(UndefinedAlphaError):
            krippendorff_alpha(records_from_units([["A"], ["B"]]))

    def test_label_permutation_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            units = [
                list(rng.choice(["A", "B", "C"], size=rng.integers(2, 4)))
                for _ in range(rng.integers(2, 6))
            ]
            try:
                base = krippendorff_alpha(records_from_units(units))
            except UndefinedAlphaError:
                continue
            swap = {"A": "C", "B": "A", "C": "B"}
            swapped = [[swap[v] for v in vals] for vals in units]
            assert krippendorff_alpha(records_from_units(swapped)) == pytest.approx(base, abs=1e-12)

    def test_single_annotation_unit_is_noop(self):
        units = [["A", "B"], ["B", "B", "A"]]
        base = krippendorff_alpha(records_from_units(units))
        extended = units + [["C"]]
        assert krippendorff_alpha(records_from_units(extended)) == pytest.approx(base)

    def test_duplicating_all_units_shifts_alpha_only_by_chance_correction(self):
        # Exact invariance under unit duplication is impossible for alpha:
        # D_e carries a 1/(n*(n-1)) finite-sample correction, so doubling the
        # table moves alpha by O(1/n). Check the shift is exactly that term.
        units = [["A", "B"], ["B", "B", "A"], ["A", "A"]]
        base = krippendorff_alpha(records_from_units(units))
        doubled = krippendorff_alpha(records_from_units(units + units))
        n = sum(len(u) for u in units)
        d_o = (1.0 - base) * _expected_disagreement(units)
        corrected = 1.0 - d_o / _expected_disagreement(units + units)
        assert doubled == pytest.approx(corrected, abs=1e-12)
        big = units * 40
        nearly = krippendorff_alpha(records_from_units(big))
        very = krippendorff_alpha(records_from_units(big + big))
        assert abs(very - nearly) < 0.01

    def test_alpha_one_iff_no_observed_disagreement(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            units = [
                list(rng.choice(["A", "B"], size=rng.integers(2, 4)))
                for _ in range(rng.integers(2, 5))
            ]
            try:
                value = krippendorff_alpha(records_from_units(units))
            except UndefinedAlphaError:
                continue
            disagrees = any(len(set(vals)) > 1 for vals in units)
            assert (value == 1.0) == (not disagrees)

    def test_matches_oracle_on_random_tables(self):
        rng = np.random.default_rng(33)
        checked = 0
        for _ in range(200):
            units = [
                list(rng.choice(["A", "B", "C"], size=rng.integers(0, 4)))
                for _ in range(rng.integers(1, 5))
            ]
            try:
                expected = alpha_oracle(units)
            except ZeroDivisionError:
                with pytest.raises(UndefinedAlphaError):
                    krippendorff_alpha(records_from_units(units))
                continue
            assert krippendorff_alpha(records_from_units(units)) == pytest.approx(
                expected, abs=1e-12
            )
            checked += 1
        assert checked > 100

    def test_annotator_assignment_is_irrelevant(self):
        # same per-unit value multisets, different annotator columns
        units = [["A", "B", "B"], ["B", "A"]]
        base = krippendorff_alpha(records_from_units(units))
        scrambled = [
            AnnotationRecord("u0", "x", "B"),
            AnnotationRecord("u0", "y", "A"),
            AnnotationRecord("u0", "z", "B"),
            AnnotationRecord("u1", "p", "A"),
            AnnotationRecord("u1", "q", "B"),
        ]
        assert krippendorff_alpha(scrambled) == pytest.approx(base, abs=1e-15)


class TestAnnotatorSummary:
    ROSTER = [
        AnnotatorInfo("a0", "Female", "Undergraduate", "English"),
        AnnotatorInfo("a1", "Male", "Undergraduate", "English"),
        AnnotatorInfo("a2", "Female", "Undergraduate", "Kannada"),
        AnnotatorInfo("a3", "Male", "Graduate", "English"),
        AnnotatorInfo("a4", "Female", "Undergraduate", "English"),
        AnnotatorInfo("a5", "Male", "Undergraduate", "English"),
    ]

    def test_six_annotator_roster_echo(self):
        records = records_from_units([["A"] * 6, ["B"] * 6])
        rows = annotator_summary(records, self.ROSTER)
        assert len(rows) == 6
        assert {r.medium_of_schooling for r in rows} == {"English", "Kannada"}
        assert all(r.num_annotations == 2 for r in rows)

    def test_empty_records(self):
        assert annotator_summary([], []) == []

    def test_full_grid_counts(self):
        records = records_from_units([["A", "B"], ["B", "B"], ["A", "A"]])
        rows = annotator_summary(records, self.ROSTER[:2])
        assert [r.num_annotations for r in rows[:2]] == [3, 3]

    def test_missing_roster_warns(self, caplog):
        records = [AnnotationRecord("u", "ghost", "A")]
        with caplog.at_level(logging.WARNING):
            rows = annotator_summary(records, [])
        assert "ghost" in caplog.text
        assert rows[0].num_annotations == 1


class TestCsvIO:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text(
            "unit_id,annotator_id,label\nu1,a1,Hope\nu1,a2,Hope\nu2,a1,Not-Hope\n",
            encoding="utf-8",
        )
        records = agreement.load_annotations(path)
        assert len(records) == 3
        assert records[0] == AnnotationRecord("u1", "a1", "Hope")

    def test_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("unit,annotator,label\n", encoding="utf-8")
        with pytest.raises(ValueError, match="unit_id"):
            agreement.load_annotations(path)

    def test_roster_loading(self, tmp_path):
        path = tmp_path / "roster.csv"
        path.write_text(
            "annotator_id,gender,higher_education,medium_of_schooling\n"
            "a1,Female,Undergraduate,English\n",
            encoding="utf-8",
        )
        roster = agreement.load_roster(path)
        assert roster[0].gender == "Female"
