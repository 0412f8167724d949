"""2D simplex gradient noise, vectorised over numpy arrays."""
from __future__ import annotations

import numpy as np

from .rng import Stream

_F2 = 0.5 * (np.sqrt(3.0) - 1.0)
_G2 = (3.0 - np.sqrt(3.0)) / 6.0

_GRADIENTS = np.array(
    [[1, 1], [-1, 1], [1, -1], [-1, -1],
     [1, 0], [-1, 0], [0, 1], [0, -1]],
    dtype=np.float64,
)


class SimplexNoise:
    """Simplex noise with a permutation table drawn from a :class:`Stream`.

    Values are scaled to roughly [-1, 1] and clipped to that interval.
    """

    def __init__(self, rng: Stream):
        perm = np.array(rng.permutation(256), dtype=np.int64)
        self.perm = np.concatenate([perm, perm])

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        x, y = np.broadcast_arrays(x, y)

        s = (x + y) * _F2
        i = np.floor(x + s)
        j = np.floor(y + s)
        t = (i + j) * _G2
        x0 = x - (i - t)
        y0 = y - (j - t)

        upper = x0 > y0
        i1 = upper.astype(np.float64)
        j1 = 1.0 - i1

        x1 = x0 - i1 + _G2
        y1 = y0 - j1 + _G2
        x2 = x0 - 1.0 + 2.0 * _G2
        y2 = y0 - 1.0 + 2.0 * _G2

        ii = i.astype(np.int64) & 255
        jj = j.astype(np.int64) & 255
        p = self.perm
        g0 = p[ii + p[jj]] % 8
        g1 = p[ii + i1.astype(np.int64) + p[jj + j1.astype(np.int64)]] % 8
        g2 = p[ii + 1 + p[jj + 1]] % 8

        total = np.zeros_like(x0)
        for gi, dx, dy in ((g0, x0, y0), (g1, x1, y1), (g2, x2, y2)):
            falloff = 0.5 - dx * dx - dy * dy
            grad = _GRADIENTS[gi]
            contrib = falloff**4 * (grad[..., 0] * dx + grad[..., 1] * dy)
            total += np.where(falloff > 0, contrib, 0.0)
        return np.clip(70.0 * total, -1.0, 1.0)

    def line(self, x, row: float = 0.0) -> np.ndarray:
        """1D gradient noise: a horizontal cut through the 2D field."""
        x = np.asarray(x, dtype=np.float64)
        return self(x, np.full_like(x, row))
