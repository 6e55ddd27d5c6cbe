"""Continuous extensions: multilinear (exact and sampled), Lovász, threshold sets."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import SizeError
from .setfn import SetFunction

EXACT_CAP = 20
BLOCK = 4096


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return asdict(self)


def default_samples(n: int) -> int:
    return max(10_000, n ** 3)


def _point(x) -> np.ndarray:
    return np.asarray([float(v) for v in x], dtype=float)


def subset_probabilities(x) -> np.ndarray:
    """Pr[x-hat = S] for every mask S; rows for a batch of points."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    p = np.ones((X.shape[0], 1))
    for i in range(X.shape[1]):
        xi = X[:, i:i + 1]
        p = np.concatenate([p * (1.0 - xi), p * xi], axis=1)
    return p


def multilinear_exact(f: SetFunction, x) -> float:
    """F(x) = sum_S f(S) prod_{i in S} x_i prod_{j not in S} (1 - x_j)."""
    if f.n > EXACT_CAP:
        raise SizeError(f"exact multilinear evaluation needs n <= {EXACT_CAP} (got {f.n})")
    return float(subset_probabilities(_point(x))[0] @ f.table())


def multilinear_batch(f: SetFunction, X) -> np.ndarray:
    """F at each row of X."""
    if f.n > EXACT_CAP:
        raise SizeError(f"exact multilinear evaluation needs n <= {EXACT_CAP} (got {f.n})")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    tab = f.table()
    out = np.empty(X.shape[0])
    chunk = max(1, (1 << 22) >> f.n)
    for s in range(0, X.shape[0], chunk):
        out[s:s + chunk] = subset_probabilities(X[s:s + chunk]) @ tab
    return out


def _eval_masks(f: SetFunction, masks: np.ndarray) -> np.ndarray:
    if f.n <= 24:
        return f.table()[masks]
    return np.array([f.value_mask(int(m)) for m in masks])


def _round_block(x: np.ndarray, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    return (rng.random((size, x.size)) < x[None, :])


def multilinear_sample(f: SetFunction, x, samples: Optional[int] = None, seed: int = 0) -> Estimate:
    """Monte Carlo estimate of F(x).

    Sample k is drawn from the generator keyed by (seed, k // BLOCK), so the
    result depends only on (f, x, samples, seed).
    """
    xv = _point(x)
    samples = samples or default_samples(f.n)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    weights = np.array([1 << i for i in range(f.n)], dtype=object if f.n > 62 else np.int64)
    vals = np.empty(samples)
    for b in range(-(-samples // BLOCK)):
        size = min(BLOCK, samples - b * BLOCK)
        rows = _round_block(xv, seed, b, size)
        masks = rows.astype(weights.dtype) @ weights
        vals[b * BLOCK:b * BLOCK + size] = _eval_masks(f, masks)
    se = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return Estimate(float(vals.mean()), se, samples, seed)


def _pinned(x, i, v) -> np.ndarray:
    y = _point(x)
    y[i] = v
    return y


def partial_derivative(f: SetFunction, x, i: int, exact: bool = True,
                       samples: Optional[int] = None, seed: int = 0) -> float:
    """dF/dx_i = F(x | x_i=1) - F(x | x_i=0)."""
    if exact:
        return float(np.diff(multilinear_batch(f, [_pinned(x, i, 0.0), _pinned(x, i, 1.0)]))[0])
    hi = multilinear_sample(f, _pinned(x, i, 1.0), samples, seed).mean
    lo = multilinear_sample(f, _pinned(x, i, 0.0), samples, seed).mean
    return hi - lo


def gradient(f: SetFunction, x) -> np.ndarray:
    n = f.n
    pts = []
    for i in range(n):
        pts.append(_pinned(x, i, 1.0))
        pts.append(_pinned(x, i, 0.0))
    v = multilinear_batch(f, pts)
    return v[0::2] - v[1::2]


def second_partial(f: SetFunction, x, i: int, j: int) -> float:
    """d^2F/dx_i dx_j by inclusion-exclusion over the four pinnings of (x_i, x_j)."""
    if i == j:
        return 0.0
    pts = []
    for a in (1.0, 0.0):
        for b in (1.0, 0.0):
            y = _point(x)
            y[i], y[j] = a, b
            pts.append(y)
    v = multilinear_batch(f, pts)
    return float(v[0] - v[1] - v[2] + v[3])


def lovasz_eval(f: SetFunction, x) -> float:
    """Lovász extension; coordinates are sorted decreasingly with ties broken by index."""
    xv = _point(x)
    order = sorted(range(f.n), key=lambda i: (-xv[i], i))
    levels = [1.0] + [xv[i] for i in order] + [0.0]
    total, mask = 0.0, 0
    for k in range(f.n + 1):
        if k:
            mask |= 1 << order[k - 1]
        gap = levels[k] - levels[k + 1]
        if gap:
            total += gap * f.value_mask(mask)
    return total


def sample_threshold_set(x, seed: int = 0) -> frozenset:
    """T(x) = {i : x_i > lambda} for one uniform lambda in [0, 1)."""
    lam = np.random.default_rng(seed).random()
    return frozenset(i for i, v in enumerate(_point(x)) if v > lam)


def threshold_estimate(f: SetFunction, x, samples: int = 10_000, seed: int = 0) -> Estimate:
    xv = _point(x)
    lam = np.random.default_rng(seed).random(samples)
    weights = np.array([1 << i for i in range(f.n)], dtype=np.int64)
    masks = (xv[None, :] > lam[:, None]).astype(np.int64) @ weights
    vals = _eval_masks(f, masks)
    se = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return Estimate(float(vals.mean()), se, samples, seed)


def _split_masks(x, part: Sequence[int], lam1, lam2) -> np.ndarray:
    xv = _point(x)
    in1 = np.zeros(xv.size, dtype=bool)
    in1[list(part)] = True
    lam = np.where(in1[None, :], np.asarray(lam1)[:, None], np.asarray(lam2)[:, None])
    weights = np.array([1 << i for i in range(xv.size)], dtype=np.int64)
    return (xv[None, :] > lam).astype(np.int64) @ weights


def split_threshold_value(f: SetFunction, x, partition, seed: int = 0) -> float:
    """f((T1 & X1) | (T2 & X2)) for independent thresholds lambda1, lambda2.

    ``partition`` is ``(X1, X2)``; X2 must be the complement of X1.
    """
    X1, X2 = (set(p) for p in partition)
    if X1 & X2 or X1 | X2 != set(range(f.n)):
        raise ValueError("partition must split the ground set into two disjoint parts")
    lam = np.random.default_rng(seed).random(2)
    return float(_eval_masks(f, _split_masks(x, sorted(X1), lam[:1], lam[1:]))[0])


def split_threshold_estimate(f: SetFunction, x, partition, samples: int = 10_000,
                             seed: int = 0) -> Estimate:
    X1, X2 = (set(p) for p in partition)
    if X1 & X2 or X1 | X2 != set(range(f.n)):
        raise ValueError("partition must split the ground set into two disjoint parts")
    lam = np.random.default_rng(seed).random((samples, 2))
    vals = _eval_masks(f, _split_masks(x, sorted(X1), lam[:, 0], lam[:, 1]))
    se = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return Estimate(float(vals.mean()), se, samples, seed)
