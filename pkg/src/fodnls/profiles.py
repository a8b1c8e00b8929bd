"""Synthetic reflection-coefficient profiles.

These are closed-form, zero-free functions analytic in a wide strip around
the real axis, used wherever a reflection coefficient must be evaluated at
complex k (jump-identity verification, the phase constant, the scalar model
factor) without committing to a particular initial datum.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RationalReflection", "schwartz_conjugate"]


def schwartz_conjugate(fn):
    """k -> conj(fn(conj(k))); agrees with the plain conjugate on the axis."""
    return lambda k: np.conj(fn(np.conj(k)))


class RationalReflection:
    """gamma(k) = amp / (k**2 + pole**2), zero-free, poles at +-i*pole.

    With real amp and pole this equals its own Schwartz conjugate, and
    |gamma| < 1 on the real axis whenever |amp| < pole**2.
    """

    def __init__(self, amp: float = 0.35, pole: float = 3.0):
        if abs(amp) >= pole * pole:
            raise ValueError("need |amp| < pole**2 so that |gamma| < 1")
        self.amp = float(amp)
        self.pole = float(pole)

    def __call__(self, k):
        k = np.asarray(k, dtype=complex)
        out = self.amp / (k * k + self.pole * self.pole)
        return out if out.ndim else complex(out)

    def conj(self, k):
        """Schwartz conjugate; real coefficients make it the same function."""
        return self(k)

    def log(self, k):
        """log gamma on the branch continuous along paths avoiding +-i*pole
        (the function is zero-free, so any fixed branch of log works)."""
        k = np.asarray(k, dtype=complex)
        out = np.log(self.amp) - np.log(k * k + self.pole * self.pole)
        return out if out.ndim else complex(out)
