"""Sparse data parsing, serialization, shuffling, and the results CSV."""

import gzip
import math

import pytest

from percoord.bounds import RegretLedger
from percoord.core import Example, SparseVector
from percoord.data_io import (
    RESULT_COLUMNS,
    Dataset,
    EmptyDatasetError,
    LibsvmParseError,
    SplitMix64,
    parse_libsvm,
    parse_libsvm_text,
    serialize_libsvm,
    shuffle,
    unit_scale,
    write_results_csv,
)


def sv(entries):
    return SparseVector(entries)


def tiny_dataset():
    examples = tuple(
        Example(sv({0: float(k + 1)}), 1.0 if k % 2 == 0 else -1.0)
        for k in range(5)
    )
    return Dataset(examples, 1, name="tiny", source="test")


class TestParsing:
    def test_basic_lines(self):
        ds = parse_libsvm_text("+1 1:0.5 3:-2\n-1 2:1\n")
        assert ds.count == 2
        assert ds.n_features == 3
        assert ds.examples[0].features == sv({0: 0.5, 2: -2.0})
        assert ds.examples[0].label == 1.0
        assert ds.examples[1].label == -1.0

    def test_zero_label_maps_to_negative(self):
        ds = parse_libsvm_text("0 1:1\n")
        assert ds.examples[0].label == -1.0

    def test_blank_lines_skipped(self):
        ds = parse_libsvm_text("\n+1 1:1\n\n\n-1 1:2\n")
        assert ds.count == 2

    def test_zero_values_dropped_but_widen_dimension(self):
        ds = parse_libsvm_text("+1 1:1 7:0\n")
        assert ds.examples[0].features == sv({0: 1.0})
        assert ds.n_features == 7

    def test_label_only_line_gives_empty_features(self):
        ds = parse_libsvm_text("+1\n")
        assert ds.examples[0].features == sv({})
        assert ds.zero_vectors == 1

    def test_bad_label_reports_line(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm_text("+1 1:1\n2 1:1\n")
        assert "line 2" in str(err.value)

    def test_bad_token_reports_line(self):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm_text("+1 1:1\n+1 oops\n")
        assert "line 2" in str(err.value)

    def test_duplicate_index_rejected_even_when_zero(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm_text("+1 1:1 1:0\n")

    def test_zero_based_index_rejected(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm_text("+1 0:1\n")

    def test_non_finite_value_rejected(self):
        with pytest.raises(LibsvmParseError):
            parse_libsvm_text("+1 1:nan\n")
        with pytest.raises(LibsvmParseError):
            parse_libsvm_text("+1 1:inf\n")

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyDatasetError):
            parse_libsvm_text("\n\n")

    def test_gzip_sniffing(self, tmp_path):
        raw = "+1 1:1.5\n-1 2:2\n"
        plain = tmp_path / "a.libsvm"
        plain.write_text(raw)
        packed = tmp_path / "a.libsvm.gz"
        packed.write_bytes(gzip.compress(raw.encode()))
        assert parse_libsvm(str(plain)).count == 2
        assert parse_libsvm(str(packed)).count == 2


class TestSerialization:
    def test_round_trip_identity(self):
        text = "+1 1:0.5 3:-2\n-1 2:1\n"
        ds = parse_libsvm_text(text)
        out = serialize_libsvm(ds)
        assert parse_libsvm_text(out).examples == ds.examples
        assert serialize_libsvm(parse_libsvm_text(out)) == out

    def test_indices_sorted_one_based(self):
        ds = Dataset((Example(sv({5: 1.0, 0: 2.0}), 1.0),), 6, "t", "test")
        assert serialize_libsvm(ds) == "+1 1:2 6:1\n"

    def test_values_survive_example_round_trip(self):
        values = [1 / 3, 1e-17, -2.5e300, 123456.789, 7.0]
        ds = Dataset(
            (Example(sv({i: v for i, v in enumerate(values)}), -1.0),),
            len(values), "t", "test",
        )
        back = parse_libsvm_text(serialize_libsvm(ds))
        assert back.examples[0].features == ds.examples[0].features


class TestSplitMix64:
    def test_published_reference_vector(self):
        gen = SplitMix64(1234567)
        assert [gen.next_u64() for _ in range(3)] == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
        ]

    def test_zero_seed_vector(self):
        assert SplitMix64(0).next_u64() == 16294208416658607535

    def test_randbelow_range(self):
        gen = SplitMix64(99)
        draws = [gen.randbelow(10) for _ in range(1000)]
        assert set(draws) <= set(range(10))
        assert len(set(draws)) == 10


class TestShuffle:
    def test_frozen_permutation(self):
        ds = tiny_dataset()
        out = shuffle(ds, 7)
        assert [int(e.features.get(0)) for e in out.examples] == [5, 2, 4, 1, 3]
        out8 = shuffle(ds, 8)
        assert [int(e.features.get(0)) for e in out8.examples] == [5, 1, 4, 2, 3]

    def test_deterministic_and_content_preserving(self):
        ds = tiny_dataset()
        a = shuffle(ds, 123)
        b = shuffle(ds, 123)
        assert a.examples == b.examples
        assert sorted(e.features.get(0) for e in a.examples) == [1, 2, 3, 4, 5]

    def test_original_untouched(self):
        ds = tiny_dataset()
        shuffle(ds, 5)
        assert [int(e.features.get(0)) for e in ds.examples] == [1, 2, 3, 4, 5]


class TestUnitScale:
    def test_norms_become_one(self):
        ds = parse_libsvm_text("+1 1:3 2:4\n-1 1:2\n")
        out = unit_scale(ds)
        for ex in out.examples:
            assert ex.features.norm() == pytest.approx(1.0, rel=1e-12)
        assert out.examples[0].features == sv({0: 0.6, 1: 0.8})

    def test_zero_vectors_pass_through(self):
        ds = parse_libsvm_text("+1\n-1 1:2\n")
        out = unit_scale(ds)
        assert out.examples[0].features == sv({})
        assert out.zero_vectors == 1


class TestResultsCsv:
    def make_ledger(self, **overrides):
        ledger = RegretLedger(algorithm="per-coord", dataset="d", log_gradients=False)
        ledger.record(1.5)
        ledger.record(0.5)
        ledger.resolve(1.0)
        ledger.config = {"scale_factor": 0.1, "R": 1.0, "lambda": 1e-4, "seed": 7}
        for key, value in overrides.items():
            setattr(ledger, key, value)
        return ledger

    def test_header_and_row(self):
        text = write_results_csv([self.make_ledger()], [("experiment", "logreg")])
        lines = text.splitlines()
        assert lines[0] == "# experiment = logreg"
        assert lines[1] == ",".join(RESULT_COLUMNS)
        row = lines[2].split(",")
        assert row[0] == "d"
        assert row[1] == "per-coord"
        assert row[6] == "2"  # T
        assert row[7] == "2"  # cumulative loss
        assert row[9] == "true"
        assert row[10] == "1"  # regret

    def test_unresolved_ledger_refused(self):
        ledger = RegretLedger(algorithm="a", dataset="d", log_gradients=False)
        ledger.record(1.0)
        with pytest.raises(ValueError) as err:
            write_results_csv([ledger], [])
        assert "'d'" in str(err.value) and "'a'" in str(err.value)

    def test_empty_cells_for_missing_metrics(self):
        ledger = self.make_ledger()
        ledger.mark_no_comparator()
        text = write_results_csv([ledger], [])
        row = text.splitlines()[1].split(",")
        assert row[8] == ""  # comparator loss
        assert row[10] == ""  # regret
        assert row[14] == ""  # wall_ms untimed

    def test_wall_ms_rendered_when_present(self):
        ledger = self.make_ledger(wall_ms=12.3456)
        text = write_results_csv([ledger], [])
        assert text.splitlines()[1].split(",")[14] == "12.3456"

    def test_float_rendering_is_compact(self):
        ledger = self.make_ledger()
        ledger.config["scale_factor"] = 0.006
        text = write_results_csv([ledger], [("tol", 1e-6)])
        assert "# tol = 1e-06" in text
        assert ",0.006," in text
