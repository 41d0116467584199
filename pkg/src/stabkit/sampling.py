"""Deterministic low-discrepancy point sets.

All scan-based verdicts in the toolkit sample on Halton sequences so that
repeated runs see exactly the same points; there is no RNG anywhere.
The first ``count`` points of a longer draw are always a prefix of it,
which makes "denser sampling can only discover more violations" a theorem
rather than a hope.
"""

from __future__ import annotations

import numpy as np

__all__ = ["halton", "ball_points", "sphere_directions"]

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    f = 1.0 / base
    i = index
    while i > 0:
        inv += f * (i % base)
        i //= base
        f /= base
    return inv


def halton(count: int, dims: int, start: int = 1) -> np.ndarray:
    """First ``count`` Halton points in (0, 1)^dims, indices from ``start``."""
    if dims > len(_PRIMES):
        raise ValueError(f"halton sampling supports up to {len(_PRIMES)} dimensions")
    out = np.empty((count, dims))
    for j in range(dims):
        base = _PRIMES[j]
        out[:, j] = [_radical_inverse(i, base) for i in range(start, start + count)]
    return out


def ball_points(count: int, dim: int, radius: float,
                exclude: float = 0.0) -> np.ndarray:
    """``count`` points inside the ball of ``radius``, outside ``exclude``.

    Cube points are drawn from the Halton sequence and rejected outside the
    ball; the accepted set is a deterministic function of (count, dim,
    radius, exclude) and is prefix-stable in ``count``.
    """
    points = np.empty((count, dim))
    got = 0
    # index 1 maps to a coordinate of exactly 0.0 in base 2 (radical inverse
    # 1/2), i.e. a point exactly on an axis; later indices never do, so
    # skipping it keeps samples off the measure-zero sets where classic
    # semidefinite derivatives vanish.
    index = 2
    while got < count:
        batch = max(64, 2 * (count - got))
        cube = (2.0 * halton(batch, dim, start=index) - 1.0) * radius
        index += batch
        norms = np.linalg.norm(cube, axis=1)
        keep = cube[(norms <= radius) & (norms > exclude)]
        take = min(len(keep), count - got)
        points[got:got + take] = keep[:take]
        got += take
    return points


def sphere_directions(count: int, dim: int) -> np.ndarray:
    """``count`` unit directions: ball points pushed to the sphere."""
    raw = ball_points(count, dim, 1.0, exclude=1e-3)
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)
