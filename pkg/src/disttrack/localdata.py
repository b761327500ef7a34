"""What a site stores about its own keys, and how the coordinator merges
shipped samples into rank estimates.

A site either keeps every key (``ExactLocal``) or a Greenwald-Khanna summary
(``SketchLocal``).  Both answer range counts and produce samples of a key
range: ``(count, [(key, rank_within_range)])``.
"""
from __future__ import annotations

from bisect import bisect_left

from .keyindex import KeyIndex
from .sketches import GKSketch


class ExactLocal:
    exact = True

    def __init__(self, u):
        self.index = KeyIndex(u)

    def insert(self, key):
        self.index.insert(key[0], key[1])

    def __len__(self):
        return len(self.index)

    def rank(self, key):
        return self.index.rank(key)

    def count_range(self, lo, hi):
        return self.index.count_range(lo, hi)

    def sample(self, lo, hi, spacing):
        return self.index.sample(lo, hi, max(1, int(spacing)))


class SketchLocal:
    exact = False

    def __init__(self, eps):
        self.sketch = GKSketch(eps)

    def insert(self, key):
        self.sketch.insert(key)

    def __len__(self):
        return self.sketch.n

    def rank(self, key):
        return self.sketch.rank(key)

    def count_range(self, lo, hi):
        return max(0.0, self.sketch.rank(hi) - self.sketch.rank(lo))

    def sample(self, lo, hi, spacing):
        return self.sketch.sample(lo, hi, max(1, int(spacing)))


def sample_words(sample):
    """Payload of a shipped sample: the count plus (value, seq, rank) per key."""
    return 1 + 3 * len(sample[1])


def merge_samples(samples):
    """Merge per-site samples of one key range into rank estimates.

    For a key y, site j's rank is bracketed by its neighbouring samples and
    estimated by the bracket midpoint, so the error is at most half a sample
    gap per site.  Returns (candidate keys, estimated rank of each, total).
    """
    tagged = []
    for j, (_count, pts) in enumerate(samples):
        for idx, (key, _r) in enumerate(pts):
            tagged.append((key, j, idx))
    tagged.sort()

    mids = []
    total = 0
    for count, pts in samples:
        total += count
        mids.append(_midpoint(pts, 0, count))
    est = sum(mids)

    keys, ests = [], []
    for key, j, idx in tagged:
        count, pts = samples[j]
        # site j knows the rank of its own sample; the other sites contribute
        # the midpoint of the gap that contains key
        keys.append(key)
        ests.append(est - mids[j] + pts[idx][1])
        new = _midpoint(pts, idx + 1, count)
        est += new - mids[j]
        mids[j] = new
    return keys, ests, total


def _midpoint(pts, i, count):
    lo = pts[i - 1][1] + 1 if i > 0 else 0
    hi = pts[i][1] if i < len(pts) else count
    return (lo + hi) / 2


def estimate_rank(samples, y):
    """Estimated rank of a single key y within the sampled range."""
    est = 0.0
    for count, pts in samples:
        i = bisect_left([p[0] for p in pts], y)
        est += _midpoint(pts, i, count)
    return est


def nearest(ests, target, start=0, stop=None):
    """Index in ests[start:stop] whose estimate is closest to target."""
    stop = len(ests) if stop is None else stop
    if start >= stop:
        return None
    i = bisect_left(ests, target, start, stop)
    best = None
    for c in (i - 1, i):
        if start <= c < stop and (best is None or abs(ests[c] - target) < abs(ests[best] - target)):
            best = c
    return best
