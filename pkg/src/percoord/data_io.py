"""Dataset ingestion, deterministic shuffling, and the results CSV.

LIBSVM lines are `label idx:val idx:val ...` with 1-based indices; parsing
shifts to 0-based, normalizes {0,1} labels to {-1,+1}, passes {-1,+1}
through, and reports malformed input with its line number. Gzip-compressed
files are detected by their magic bytes, not their name.

Shuffling is a Fisher-Yates pass driven by SplitMix64 -- a fixed, named,
64-bit generator from the splittable-seed family, implemented here so the
permutation for a given seed is identical across platforms and library
versions -- with unbiased index draws by rejection sampling.

The results CSV carries one row per run with a fixed column set, floats at 6
significant digits, and the full run configuration echoed as a `#`-comment
header block. Unresolved ledgers (no comparator and not marked as
comparator-free) are refused.
"""

import csv
import gzip
import io
import math
import os
from dataclasses import dataclass, replace

from .core import Example, SparseVector

__all__ = [
    "LibsvmParseError",
    "EmptyDatasetError",
    "Dataset",
    "parse_libsvm",
    "parse_libsvm_text",
    "serialize_libsvm",
    "SplitMix64",
    "shuffle",
    "unit_scale",
    "RESULT_COLUMNS",
    "write_results_csv",
]


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyDatasetError(ValueError):
    """The source contained no examples."""


@dataclass(frozen=True)
class Dataset:
    """An immutable sequence of labeled examples."""

    examples: tuple
    n_features: int
    name: str = ""
    source: str = ""
    zero_vectors: int = 0

    @property
    def count(self):
        return len(self.examples)

    @property
    def positive_fraction(self):
        if not self.examples:
            return 0.0
        return sum(1 for ex in self.examples if ex.label > 0) / len(self.examples)

    def metadata(self):
        return {
            "name": self.name,
            "source": self.source,
            "count": self.count,
            "n_features": self.n_features,
            "positive_fraction": self.positive_fraction,
            "zero_vectors": self.zero_vectors,
        }


def _parse_label(token, lineno):
    try:
        raw = float(token)
    except ValueError:
        raise LibsvmParseError(lineno, f"non-numeric label {token!r}") from None
    if raw == 1.0:
        return 1.0
    if raw == -1.0:
        return -1.0
    if raw == 0.0:
        return -1.0
    raise LibsvmParseError(lineno, f"unsupported label {token!r} (expected -1, 0, or +1)")


def _parse_lines(lines, name, source):
    examples = []
    n_features = 0
    zero_vectors = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        label = _parse_label(tokens[0], lineno)
        entries = {}
        seen = set()
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep or not idx_s or not val_s:
                raise LibsvmParseError(lineno, f"malformed feature token {tok!r}")
            try:
                idx = int(idx_s)
            except ValueError:
                raise LibsvmParseError(lineno, f"non-integer feature index {idx_s!r}") from None
            if idx < 1:
                raise LibsvmParseError(lineno, f"feature indices are 1-based, got {idx}")
            try:
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(lineno, f"non-numeric feature value {val_s!r}") from None
            if not math.isfinite(val):
                raise LibsvmParseError(lineno, f"non-finite feature value {val_s!r}")
            j = idx - 1
            if j in seen:
                raise LibsvmParseError(lineno, f"duplicate feature index {idx}")
            seen.add(j)
            if j + 1 > n_features:
                n_features = j + 1
            if val != 0.0:
                entries[j] = val
        if not entries:
            zero_vectors += 1
        examples.append(Example(SparseVector._wrap(entries), label))
    if not examples:
        raise EmptyDatasetError("no examples found")
    return Dataset(tuple(examples), n_features, name=name, source=source,
                   zero_vectors=zero_vectors)


def parse_libsvm(path, name=""):
    """Parse a LIBSVM file (gzip detected by magic bytes)."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    opener = gzip.open if magic == b"\x1f\x8b" else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return _parse_lines(fh, name or os.path.basename(path), path)


def parse_libsvm_text(text, name=""):
    """Parse LIBSVM content held in a string."""
    return _parse_lines(io.StringIO(text), name, "<text>")


def _fmt_value(v):
    # repr round-trips doubles exactly, which keeps parse/serialize/parse
    # an identity; trim the pointless trailing ".0" on integral values.
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def serialize_libsvm(dataset):
    """Render a dataset back to LIBSVM text (sorted 1-based indices)."""
    lines = []
    for ex in dataset.examples:
        parts = [f"{int(ex.label):+d}"]
        for i in sorted(ex.features.support()):
            parts.append(f"{i + 1}:{_fmt_value(ex.features.get(i))}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: 64-bit mixing generator with a splittable seed.

    state_{k+1} = state_k + 0x9E3779B97F4A7C15 (mod 2^64), output mixed by
    two xor-shift-multiply rounds. Tiny, fast enough in pure Python, and
    byte-for-byte identical everywhere, which is what pins shuffles.
    """

    def __init__(self, seed):
        self._state = int(seed) & _MASK64

    def next_u64(self):
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n):
        """Uniform draw from range(n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def shuffle(dataset, seed):
    """Deterministic Fisher-Yates permutation of the examples."""
    items = list(dataset.examples)
    rng = SplitMix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = rng.randbelow(i + 1)
        items[i], items[j] = items[j], items[i]
    return replace(dataset, examples=tuple(items))


def unit_scale(dataset):
    """Scale every feature vector to unit L2 length.

    Zero vectors are left unchanged and counted in the dataset's
    zero_vectors field.
    """
    scaled = []
    zeros = 0
    for ex in dataset.examples:
        nrm = ex.features.norm()
        if nrm == 0.0:
            zeros += 1
            scaled.append(ex)
        else:
            # divide rather than multiply by the reciprocal: one rounding
            entries = {}
            for i, v in ex.features.items():
                w = v / nrm
                if w != 0.0:
                    entries[i] = w
            scaled.append(Example(SparseVector._wrap(entries), ex.label))
    return replace(dataset, examples=tuple(scaled), zero_vectors=zeros)


RESULT_COLUMNS = [
    "dataset",
    "algorithm",
    "scale_factor",
    "R",
    "lambda",
    "seed",
    "T",
    "cumulative_loss",
    "comparator_loss",
    "comparator_converged",
    "regret",
    "regret_per_round",
    "avg_hinge_loss",
    "mistake_fraction",
    "wall_ms",
]


def _render_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_results_csv(ledgers, config_items):
    """Render the results CSV for a list of resolved ledgers.

    config_items: ordered (key, value) pairs echoed verbatim in the header
    comment block. A ledger that has neither a comparator nor an explicit
    no-comparator mark is refused by name.
    """
    for ledger in ledgers:
        if not ledger.resolved:
            raise ValueError(
                f"unresolved ledger for run {ledger.dataset!r}/{ledger.algorithm!r}: "
                "compute its comparator or mark it comparator-free"
            )
    buf = io.StringIO()
    for key, value in config_items:
        buf.write(f"# {key} = {_render_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for ledger in ledgers:
        cfg = ledger.config
        row = [
            ledger.dataset,
            ledger.algorithm,
            _render_cell(cfg.get("scale_factor")),
            _render_cell(cfg.get("R")),
            _render_cell(cfg.get("lambda")),
            _render_cell(cfg.get("seed")),
            ledger.rounds,
            _render_cell(ledger.cumulative_loss),
            _render_cell(ledger.comparator_loss),
            _render_cell(ledger.comparator_converged),
            _render_cell(ledger.regret),
            _render_cell(ledger.regret_per_round),
            _render_cell(ledger.avg_hinge_loss),
            _render_cell(ledger.mistake_fraction),
            _render_cell(ledger.wall_ms),
        ]
        writer.writerow(row)
    return buf.getvalue()
