"""Working-precision configuration shared by every extended-precision routine."""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf


@dataclass(frozen=True)
class PrecisionContext:
    """Decimal working precision plus the relative quadrature tolerance.

    ``quad_tol`` defaults to ``10**(8 - digits)``.  Routines enter
    ``ctx.workdps()`` themselves; callers never touch ``mp.dps`` directly.
    """

    digits: int = 60
    quad_tol: mpf | None = field(default=None)

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 30:
            raise ValueError(f"digits must be an integer >= 30, got {self.digits!r}")
        tol = self.quad_tol
        if tol is None:
            with mp.workdps(self.digits + 5):
                tol = mpf(10) ** (8 - self.digits)
        else:
            tol = mpf(tol)
        if not (0 < tol <= mpf("1e-8")):
            raise ValueError(f"quad_tol must lie in (0, 1e-8], got {tol}")
        object.__setattr__(self, "quad_tol", tol)

    def workdps(self, extra: int = 0):
        """Context manager setting mpmath to ``digits + extra`` decimal digits."""
        return mp.workdps(self.digits + extra)

    def eps(self, shift: int = 0) -> mpf:
        """``10**(shift - digits)``, the tolerance idiom used throughout the tests."""
        with mp.workdps(self.digits + 5):
            return mpf(10) ** (shift - self.digits)

    def with_digits(self, digits: int) -> "PrecisionContext":
        return PrecisionContext(digits=digits)


DEFAULT_CONTEXT = PrecisionContext()


def resolve(ctx: PrecisionContext | None) -> PrecisionContext:
    return DEFAULT_CONTEXT if ctx is None else ctx
