"""Corte suave en frecuencia usado por todos los símbolos clásicos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..quadrature import gauss_legendre

INNER_RADIUS = 0.5
OUTER_RADIUS = 1.0


def _h(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """``φ(ξ) = ψ(|ξ|)`` con ``ψ(r) = h(2r-1) / (h(2r-1) + h(2-2r))``.

    ``ψ`` vale 0 en ``r <= 1/2`` y 1 en ``r >= 1``.
    """

    inner: float = INNER_RADIUS
    outer: float = OUTER_RADIUS

    def radial(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        rising = _h(2.0 * r - 1.0)
        falling = _h(2.0 - 2.0 * r)
        total = rising + falling
        # total > 0 en todo r: al menos uno de los dos argumentos es positivo.
        return rising / total

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.radial(np.linalg.norm(xi, axis=-1))

    def radial_moment(self, exponent: complex, nodes: int = 64) -> complex:
        """``∫_{1/2}^{1} ψ(r) r^{exponent} dr`` por Gauss–Legendre."""

        r, w = gauss_legendre(self.inner, self.outer, nodes)
        return complex(np.sum(w * self.radial(r) * np.power(r.astype(complex), exponent)))


CUTOFF = CutoffSpec()

__all__ = ["CUTOFF", "CutoffSpec"]
