"""Result record shared by every expansion-plus-bound evaluator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from mpmath import mp


@dataclass(frozen=True)
class BoundReport:
    """Truncated expansion, certified remainder bound and, optionally, the true remainder.

    ``partial_sum`` and the remainders are on the scale of the normalized
    series (the prefactor is reported separately as ``prefactor_log``).
    """

    method: str
    n: int
    partial_sum: object
    bound: object
    exact_remainder: object = None
    ratio: object = None
    prefactor_log: object = 0
    region: str | None = None
    details: dict = field(default_factory=dict)

    def with_exact(self, exact) -> "BoundReport":
        if self.bound is None:
            ratio = None
        elif self.bound == 0:
            ratio = mp.inf if exact != 0 else mp.mpf(0)
        else:
            ratio = abs(exact) / self.bound
        return replace(self, exact_remainder=exact, ratio=ratio)

    @property
    def sound(self) -> bool | None:
        """True when the exact remainder respects the bound (None if unknown)."""
        if self.ratio is None:
            return None
        return self.ratio <= 1

    def as_dict(self, digits: int = 20) -> dict:
        def fmt(x):
            if x is None:
                return None
            if isinstance(x, mp.mpc):
                return {"re": mp.nstr(x.real, digits), "im": mp.nstr(x.imag, digits)}
            if hasattr(x, "as_dict"):
                return x.as_dict(digits)
            return mp.nstr(mp.mpmathify(x), digits)

        return {
            "method": self.method,
            "n": self.n,
            "partial_sum": fmt(self.partial_sum),
            "bound": fmt(self.bound),
            "exact_remainder": fmt(self.exact_remainder),
            "ratio": fmt(self.ratio),
            "prefactor_log": fmt(self.prefactor_log),
            "region": self.region,
            "details": {k: fmt(v) if not isinstance(v, (str, int, bool)) else v for k, v in self.details.items()},
        }
