"""Running Monte Carlo statistics over paths."""

from __future__ import annotations

import math


class MonteCarloMeter:
    """Computes and stores the running mean and variance of a quantity.

    Non-finite values (blown-up paths) are counted separately and excluded
    from the moments.
    """

    def __init__(self, name: str, fmt: str = ":.6g") -> None:
        self.name = name
        self.fmt = fmt
        self.reset()

    def reset(self) -> None:
        self.val = math.nan
        self.count = 0
        self.skipped = 0
        self.avg = math.nan
        self._m2 = 0.0

    def update(self, val: float) -> None:
        """Add one sample (Welford update)."""
        self.val = val
        if not math.isfinite(val):
            self.skipped += 1
            return
        self.count += 1
        if self.count == 1:
            self.avg = val
            self._m2 = 0.0
            return
        delta = val - self.avg
        self.avg += delta / self.count
        self._m2 += delta * (val - self.avg)

    @property
    def var(self) -> float:
        """Unbiased sample variance (nan below two samples)."""
        if self.count < 2:
            return math.nan
        return self._m2 / (self.count - 1)

    @property
    def stderr(self) -> float:
        """Standard error of the mean."""
        if self.count < 2:
            return math.nan
        return math.sqrt(self.var / self.count)

    def __str__(self) -> str:
        fmtstr = (
            "{name} {avg" + self.fmt + "} (+/- {stderr" + self.fmt + "}, "
            "n={count})"
        )
        return fmtstr.format(
            name=self.name, avg=self.avg, stderr=self.stderr, count=self.count
        )
