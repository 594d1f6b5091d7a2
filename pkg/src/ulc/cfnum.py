"""Real numbers given by a continued fraction with an eventually periodic tail."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import chain, count, islice

from .ratcore import RatInterval

NAMED = {
    "golden": (1, (), (1,)),
    "sqrt2": (1, (), (2,)),
    "sqrt3": (1, (), (1, 2)),
    "silver": (2, (), (2,)),
}


@dataclass(frozen=True)
class CFNumber:
    """``[integer_part; prefix..., period, period, ...]``; an empty period means a rational."""

    integer_part: int
    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(a) for a in self.prefix))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if any(a < 1 for a in self.prefix + self.period):
            raise ValueError("partial quotients must be positive")

    @classmethod
    def parse(cls, text: str) -> "CFNumber":
        """A name ("golden", "sqrt2", ...) or "a0;a1,a2|b1,b2" with an optional periodic part."""
        text = text.strip()
        if text in NAMED:
            return cls(*NAMED[text])
        head, _, tail = text.partition(";")
        pre, _, per = tail.partition("|")
        as_tuple = lambda s: tuple(int(x) for x in s.split(",") if x.strip())  # noqa: E731
        return cls(int(head), as_tuple(pre), as_tuple(per))

    def describe(self) -> str:
        for name, spec in NAMED.items():
            if spec == (self.integer_part, self.prefix, self.period):
                return name
        pre = ",".join(map(str, self.prefix))
        per = ",".join(map(str, self.period))
        return f"{self.integer_part};{pre}|{per}"

    @property
    def is_rational(self) -> bool:
        return not self.period

    @property
    def quotient_bound(self) -> int:
        """max partial quotient after the integer part."""
        return max(self.prefix + self.period, default=1)

    def quotients(self):
        if not self.period:
            return iter(self.prefix)
        return chain(self.prefix, (self.period[i % len(self.period)] for i in count()))

    def convergents(self):
        """Yields (p_k, q_k) forever (or until the expansion ends)."""
        p_prev, q_prev, p, q = 1, 0, self.integer_part, 1
        yield p, q
        for a in self.quotients():
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            yield p, q

    def convergents_upto(self, n: int) -> list[tuple[int, int]]:
        return list(islice(self.convergents(), n))

    def enclosure(self, width) -> RatInterval:
        """Closed interval between consecutive convergents, of width < ``width``."""
        width = Fraction(width)
        prev = None
        for p, q in self.convergents():
            if prev is not None:
                lo, hi = sorted((Fraction(*prev), Fraction(p, q)))
                if hi - lo < width:
                    return RatInterval(lo, hi)
            prev = (p, q)
        return RatInterval.point(Fraction(*prev))
