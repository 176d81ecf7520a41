"""Chain families without analytic hints, for exercising the certificates."""

from dataclasses import dataclass

import numpy as np

from bdchain import ChainSpec


@dataclass(frozen=True)
class PowerLaw(ChainSpec):
    """``t_n = (n + 1) ** -power`` with no declared hints."""

    power: float

    def _arrays(self, start, stop):
        n = np.arange(start, stop, dtype=float)
        ratio = (n / (n + 1.0)) ** self.power  # t_n / t_{n-1}
        return ratio / (1.0 + ratio), 1.0 / (1.0 + ratio)

    def text(self):
        return f"power:{self.power}"


@dataclass(frozen=True)
class Alternating(ChainSpec):
    """Right probability alternates between ``a`` and ``1 - a``; ``t_n`` never settles."""

    a: float = 0.7

    def _arrays(self, start, stop):
        n = np.arange(start, stop)
        r = np.where(n % 2 == 1, self.a, 1.0 - self.a)
        return 1.0 - r, r

    def text(self):
        return f"alternating:{self.a}"
