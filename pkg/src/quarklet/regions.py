"""Admissibility of (s, r, q, m) for the quarklet characterizations.

Inequalities are evaluated verbatim: strict unless the condition itself is
non-strict. Inputs given as ``int``, ``Fraction`` or strings such as ``"7/10"``
are compared in exact rational arithmetic; floats are compared as floats with
no tolerance.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, float, Fraction, str]

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}
REGIONS = ("I", "II", "III", "IV", "V")


def _num(x: Number):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x)
    return float(x)


def _unify(*xs):
    vals = [_num(x) for x in xs]
    if any(isinstance(v, float) for v in vals):
        vals = [float(v) for v in vals]
    return vals


def _inv(x):
    return 1 / x if isinstance(x, Fraction) else 1.0 / x


@dataclass(frozen=True)
class Check:
    name: str
    lhs: object
    op: str
    rhs: object

    @property
    def holds(self) -> bool:
        return bool(_OPS[self.op](self.lhs, self.rhs))

    def to_dict(self) -> dict:
        return {"check": self.name, "lhs": _jsonable(self.lhs), "op": self.op,
                "rhs": _jsonable(self.rhs), "holds": self.holds}


def _jsonable(x):
    return str(x) if isinstance(x, Fraction) else x


@dataclass(frozen=True)
class RegionVerdict:
    """``region`` is the tag of the matching case, or ``"none"`` if one of its inequalities fails."""

    region: str
    case: str
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def admissible(self) -> bool:
        return self.region != "none"

    @property
    def violated(self) -> list[Check]:
        return [c for c in self.checks if not c.holds]

    def to_dict(self) -> dict:
        return {"region": self.region, "case": self.case, "admissible": self.admissible,
                "checks": [c.to_dict() for c in self.checks]}


def sigma_r(r: Number):
    (r,) = _unify(r)
    return max(0, _inv(r) - 1)


def sigma_rq(r: Number, q: Number):
    r, q = _unify(r, q)
    return max(0, _inv(r) - 1, _inv(q) - 1)


def _verdict(case: str, checks: list[Check]) -> RegionVerdict:
    ok = all(c.holds for c in checks)
    return RegionVerdict(case if ok else "none", case, tuple(checks))


def _case(s, r, m) -> str:
    if s >= m - 1:
        return "II" if r >= 1 else "III"
    if s >= 0:
        return "I"
    if s > -m + 1:
        return "IV"
    return "V"


def classify(s: Number, r: Number, q: Number, m: int) -> RegionVerdict:
    """Match ``(s, r, q, m)`` against conditions (I) to (V) with a full audit trail."""
    s, r, q, m = _unify(s, r, q, m)
    if not (r > 0 and q > 0):
        raise ValueError("r and q must be positive")
    if m < 2 or int(m) != m:
        raise ValueError("m must be an integer >= 2")
    ir, iq = _inv(r), _inv(q)
    case = _case(s, r, m)
    C = Check
    if case == "I":
        checks = [
            C("max(0, 1/r-1, 1/q-1) < s", max(0, ir - 1, iq - 1), "<", s),
            C("s < m-1", s, "<", m - 1),
        ]
    elif case == "II":
        checks = [
            C("s >= m-1", s, ">=", m - 1),
            C("r >= 1", r, ">=", 1),
            C("max(0, 1/q-1) < s", max(0, iq - 1), "<", s),
            C("s < min(m-1+1/r, m-1+1/q)", s, "<", min(m - 1 + ir, m - 1 + iq)),
            C("1/q < min(m, s+1-mr(s+1-m))", iq, "<", min(m, s + 1 - m * r * (s + 1 - m))),
        ]
    elif case == "III":
        checks = [
            C("s >= m-1", s, ">=", m - 1),
            C("1/m < r", _inv(m), "<", r),
            C("r < 1", r, "<", 1),
            C("max(1/r-1, 1/q-1) < s", max(ir - 1, iq - 1), "<", s),
            C("s < min(m-1+r/q, m)", s, "<", min(m - 1 + r * iq, m)),
            C("1/q < min(m, -sm+m^2+s/r-m/r+1/r)", iq, "<",
              min(m, -s * m + m * m + s * ir - m * ir + ir)),
        ]
    elif case == "IV":
        checks = [
            C("1 < r", 1, "<", r),
            C("1 < q", 1, "<", q),
            C("-m+1 < s", -m + 1, "<", s),
            C("s < 0", s, "<", 0),
        ]
    else:
        checks = [
            C("1 < r", 1, "<", r),
            C("1 < q", 1, "<", q),
            C("max(-m+1/r, -m+1/q) < s", max(-m + ir, -m + iq), "<", s),
            C("s <= -m+1", s, "<=", -m + 1),
            C("1/q > s+m(1-1/r)(-s+1-m)", iq, ">", s + m * (1 - ir) * (-s + 1 - m)),
        ]
    return _verdict(case, checks)


def morrey_admissible(s: Number, u: Number, r: Number, q: Number, m: int) -> RegionVerdict:
    """Hypothesis of the Triebel-Lizorkin-Morrey characterization; tag ``"I"`` when it holds."""
    s, u, r, q, m = _unify(s, u, r, q, m)
    if not (r > 0 and q > 0):
        raise ValueError("r and q must be positive")
    if u < r:
        raise ValueError(f"Morrey index needs r <= u, got r={r}, u={u}")
    if m < 2 or int(m) != m:
        raise ValueError("m must be an integer >= 2")
    ir, iq = _inv(r), _inv(q)
    checks = [
        Check("r <= u", r, "<=", u),
        Check("max(0, 1/r-1, 1/q-1) < s", max(0, ir - 1, iq - 1), "<", s),
        Check("s < m-1", s, "<", m - 1),
    ]
    return _verdict("I", checks)


def spline_membership(s: Number, r: Number, m: int) -> bool:
    """Whether ``N_m`` lies in ``F^s_{r,q}``: ``s < m - 1 + 1/r`` (independent of q)."""
    s, r, m = _unify(s, r, m)
    if not r > 0:
        raise ValueError("r must be positive")
    return bool(s < m - 1 + _inv(r))
