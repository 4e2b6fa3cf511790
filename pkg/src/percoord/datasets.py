"""Deterministic synthetic datasets bundled with the package.

Real click-through and sentiment corpora cannot ship in a repository, so the
harness carries two seed-pinned generators shaped like them:

  synthetic_ctr        a click stream with power-law token frequencies --
                       an always-on bias token, a few very common tokens,
                       and a long tail of rare ones whose weights carry most
                       of the signal. Labels are drawn from a ground-truth
                       logistic model with a negative base rate, so
                       positives are the minority, as clicks are.

  synthetic_sentiment  a bag-of-words sample: Zipf-distributed vocabulary,
                       short documents of token counts, labels from a noisy
                       linear opinion score. Committed in LIBSVM form as
                       package data so file parsing has a realistic fixture;
                       a test pins the file to the generator output.

Both use numpy's Philox counter-based generator, whose bit stream for a
given key is stable across platforms; all randomness is derived from the
single seed argument.
"""

import gzip
import importlib.resources

import numpy as np

from .core import Example, SparseVector
from .data_io import Dataset, parse_libsvm_text, serialize_libsvm

__all__ = [
    "synthetic_ctr",
    "synthetic_sentiment",
    "bundled_sentiment",
    "BUNDLED_SENTIMENT_RESOURCE",
]

BUNDLED_SENTIMENT_RESOURCE = "sentiment_sample.libsvm.gz"


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=int(seed)))


def _zipf_probabilities(n, alpha):
    ranks = np.arange(1, n + 1, dtype=float)
    p = ranks ** (-alpha)
    return p / p.sum()


def _draw_tokens(rng, probs, counts_per_example):
    """Token draws for all examples at once, split by per-example counts."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    total = int(counts_per_example.sum())
    tokens = np.searchsorted(cdf, rng.random(total), side="right")
    offsets = np.concatenate(([0], np.cumsum(counts_per_example)))
    return tokens, offsets


def synthetic_ctr(n_examples=100_000, n_features=300, seed=7, *,
                  tokens_lo=4, tokens_hi=9, zipf_alpha=1.35,
                  base_rate_logit=-2.2):
    """Click-through-style stream with power-law feature frequencies.

    Feature 0 is an always-on bias token. Tokens 1..n-1 follow a Zipf law:
    low indices appear in a large share of examples, high indices only a
    handful of times over the whole stream. Ground-truth weights grow with
    rarity, which is what makes one shared learning rate a bad fit: by the
    time a rare token first appears, a global schedule has already decayed.
    """
    rng = _rng(seed)
    n_tokens = n_features - 1
    probs = _zipf_probabilities(n_tokens, zipf_alpha)

    # Rarity-weighted ground truth: common tokens nudge, rare tokens decide.
    rarity = np.linspace(0.0, 1.0, n_tokens)
    magnitude = 0.4 + 3.6 * rarity**2
    signs = np.where(rng.random(n_tokens) < 0.5, 1.0, -1.0)
    weights = np.concatenate(([base_rate_logit], signs * magnitude))

    lengths = rng.integers(tokens_lo, tokens_hi + 1, size=n_examples)
    tokens, offsets = _draw_tokens(rng, probs, lengths)
    tokens = tokens + 1  # shift past the bias feature
    noise = rng.random(n_examples)

    examples = []
    for k in range(n_examples):
        row = tokens[offsets[k]:offsets[k + 1]]
        entries = {0: 1.0}
        for j in row:
            j = int(j)
            entries[j] = entries.get(j, 0.0) + 1.0
        margin = weights[0] + sum(weights[j] * v for j, v in entries.items() if j > 0)
        p = 1.0 / (1.0 + np.exp(-margin))
        label = 1.0 if noise[k] < p else -1.0
        examples.append(Example(SparseVector._wrap(entries), label))
    return Dataset(
        tuple(examples),
        n_features,
        name=f"synthetic-ctr-{n_examples}-seed{seed}",
        source="synthetic:ctr",
    )


def synthetic_sentiment(n_examples=2400, n_features=4000, seed=20240601, *,
                        tokens_lo=15, tokens_hi=40, filler_frac=0.7,
                        swap_prob=0.12, zipf_alpha=1.1):
    """Bag-of-words sentiment-style sample with count features.

    The vocabulary splits into a common class-independent filler pool and
    two rarer opinion pools, one per class. Each document mixes filler
    tokens with opinion tokens drawn mostly from its own class's pool; a
    swap_prob fraction of opinion tokens comes from the wrong pool, so the
    sample is noisy but far from random. Signal lives in many individually
    rare tokens, the regime where one shared rate schedule underuses what
    each coordinate has seen.

    Randomness sticks to uniform draws (no library distribution methods)
    so the committed sample stays reproducible across library versions.
    """
    rng = _rng(seed)
    n_filler = int(0.6 * n_features)
    n_side = (n_features - n_filler) // 2
    filler_cdf = np.cumsum(_zipf_probabilities(n_filler, zipf_alpha))
    filler_cdf[-1] = 1.0
    side_cdf = np.cumsum(_zipf_probabilities(n_side, 1.05))
    side_cdf[-1] = 1.0

    lengths = rng.integers(tokens_lo, tokens_hi + 1, size=n_examples)
    labels = np.where(rng.random(n_examples) < 0.5, 1.0, -1.0)
    sent_frac = 1.0 - filler_frac

    examples = []
    for k in range(n_examples):
        length = int(lengths[k])
        y = float(labels[k])
        n_sent = int(np.count_nonzero(rng.random(length) < sent_frac))
        if n_sent == 0:
            n_sent = 1
        n_fill = length - n_sent
        entries = {}
        for j in np.searchsorted(filler_cdf, rng.random(n_fill), side="right"):
            j = int(j)
            entries[j] = entries.get(j, 0.0) + 1.0
        wrong = rng.random(n_sent) < swap_prob
        draws = np.searchsorted(side_cdf, rng.random(n_sent), side="right")
        for w, j in zip(wrong, draws):
            own_positive = (y > 0) != bool(w)
            idx = (n_filler if own_positive else n_filler + n_side) + int(j)
            entries[idx] = entries.get(idx, 0.0) + 1.0
        examples.append(Example(SparseVector._wrap(entries), y))
    return Dataset(
        tuple(examples),
        n_features,
        name=f"synthetic-sentiment-{n_examples}-seed{seed}",
        source="synthetic:sentiment",
    )


def bundled_sentiment():
    """Parse the sentiment sample committed as package data."""
    resource = importlib.resources.files("percoord").joinpath(
        "data", BUNDLED_SENTIMENT_RESOURCE
    )
    raw = resource.read_bytes()
    text = gzip.decompress(raw).decode("utf-8")
    ds = parse_libsvm_text(text, name="bundled-sentiment")
    return Dataset(
        ds.examples, ds.n_features, name="bundled-sentiment",
        source=f"package:{BUNDLED_SENTIMENT_RESOURCE}",
    )


def render_bundled_sentiment_bytes():
    """Gzip LIBSVM bytes for the bundled sample (what the data file holds)."""
    text = serialize_libsvm(synthetic_sentiment())
    return gzip.compress(text.encode("utf-8"), mtime=0)
