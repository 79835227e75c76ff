"""Truncated exponential-polynomial series with formal derivations.

An element is a finite sum of terms ``coef * Q^beta * t^mono`` where the
``Q_i = exp(t_i)`` generators are tracked by a nonnegative exponent vector
``beta`` and the polynomial part by a monomial in the polynomial variables.
Terms whose total exp-degree ``|beta|`` exceeds the ring's order are dropped.
Dropping them is a ring quotient, so every identity that holds for the full
series also holds after truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .scalars import parse_rational, rational_to_str

Key = Tuple[Tuple[int, ...], Tuple[int, ...]]


class RingMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SeriesRing:
    """Variable declarations and truncation order.

    ``exp_vars`` holds ``(name, coordinate)`` pairs meaning ``name = exp(coordinate)``.
    A coordinate may also be a polynomial variable, in which case the
    derivation along it acts on both kinds of dependence.
    """

    poly_vars: Tuple[str, ...] = ()
    exp_vars: Tuple[Tuple[str, str], ...] = ()
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "poly_vars", tuple(self.poly_vars))
        object.__setattr__(self, "exp_vars", tuple(tuple(p) for p in self.exp_vars))
        names = list(self.poly_vars) + [n for n, _ in self.exp_vars]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if self.order < 0:
            raise ValueError("truncation order must be nonnegative")

    @property
    def exp_names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.exp_vars)

    @property
    def coordinates(self) -> Tuple[str, ...]:
        """Names along which :func:`derive` is defined."""
        seen = list(self.poly_vars)
        for _, c in self.exp_vars:
            if c not in seen:
                seen.append(c)
        return tuple(seen)

    def zero(self) -> "Series":
        return Series(self, {})

    def const(self, c) -> "Series":
        return Series(self, {self._zero_key(): Fraction(c)})

    def one(self) -> "Series":
        return self.const(1)

    def _zero_key(self) -> Key:
        return ((0,) * len(self.exp_vars), (0,) * len(self.poly_vars))

    def var(self, name: str) -> "Series":
        """The polynomial variable ``name`` as a series."""
        if name not in self.poly_vars:
            raise KeyError(f"unknown polynomial variable {name!r}")
        mono = tuple(1 if v == name else 0 for v in self.poly_vars)
        return Series(self, {((0,) * len(self.exp_vars), mono): Fraction(1)})

    def q(self, name: str, power: int = 1) -> "Series":
        """The exponential generator ``name`` raised to ``power``."""
        names = self.exp_names
        if name not in names:
            raise KeyError(f"unknown exponential variable {name!r}")
        beta = tuple(power if n == name else 0 for n in names)
        return self.monomial(beta, {}, 1)

    def monomial(self, beta: Iterable[int], mono: Mapping[str, int], coef=1) -> "Series":
        beta = tuple(int(b) for b in beta)
        if len(beta) != len(self.exp_vars):
            raise ValueError("exp multi-index has the wrong length")
        if any(b < 0 for b in beta):
            raise ValueError("exp multi-index components must be nonnegative")
        for v in mono:
            if v not in self.poly_vars:
                raise KeyError(f"unknown polynomial variable {v!r}")
        m = tuple(int(mono.get(v, 0)) for v in self.poly_vars)
        if any(e < 0 for e in m):
            raise ValueError("polynomial exponents must be nonnegative")
        if sum(beta) > self.order:
            return self.zero()
        return Series(self, {(beta, m): Fraction(coef)})

    def qbeta(self, beta: Iterable[int], coef=1) -> "Series":
        return self.monomial(beta, {}, coef)

    def to_json(self) -> dict:
        return {
            "poly_vars": list(self.poly_vars),
            "exp_vars": [{"name": n, "coordinate": c} for n, c in self.exp_vars],
            "order": self.order,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SeriesRing":
        exp = []
        for e in data.get("exp_vars", []):
            if isinstance(e, str):
                raise ValueError("exp_vars entries need both 'name' and 'coordinate'")
            exp.append((e["name"], e["coordinate"]))
        order = data.get("order", 0)
        if not isinstance(order, int) or isinstance(order, bool):
            raise ValueError("order must be an integer")
        return cls(tuple(data.get("poly_vars", [])), tuple(exp), order)


class Series:
    """An element of a :class:`SeriesRing`.  Immutable."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: Dict[Key, Fraction]):
        self.ring = ring
        self.terms = {k: v for k, v in terms.items() if v}

    # -- arithmetic -----------------------------------------------------
    def _lift(self, other) -> "Series | None":
        if isinstance(other, Series):
            if other.ring != self.ring:
                raise RingMismatch(f"series rings differ: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.ring.const(other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, 0) + v
        return Series(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ring, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return Series(self.ring, {})
            return Series(self.ring, {k: v * other for k, v in self.terms.items()})
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return series_mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.terms == self.ring.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- inspection -----------------------------------------------------
    def is_constant(self) -> bool:
        z = self.ring._zero_key()
        return all(k == z for k in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ring._zero_key(), Fraction(0))

    def max_exp_degree(self) -> int:
        return max((sum(b) for b, _ in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (beta, mono), c in sorted(self.terms.items()):
            factors = []
            for (n, _), b in zip(self.ring.exp_vars, beta):
                if b:
                    factors.append(n if b == 1 else f"{n}^{b}")
            for v, e in zip(self.ring.poly_vars, mono):
                if e:
                    factors.append(v if e == 1 else f"{v}^{e}")
            parts.append("*".join([rational_to_str(c)] + factors))
        return " + ".join(parts)

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        data = self.ring.to_json()
        terms = []
        for (beta, mono), c in sorted(self.terms.items()):
            terms.append({
                "beta": list(beta),
                "mono": {v: e for v, e in zip(self.ring.poly_vars, mono) if e},
                "coef": rational_to_str(c),
            })
        data["terms"] = terms
        return data

    @classmethod
    def from_json(cls, data: Mapping, ring: SeriesRing | None = None) -> "Series":
        own = SeriesRing.from_json(data) if "poly_vars" in data or "exp_vars" in data else ring
        if own is None:
            raise ValueError("series JSON lacks a ring declaration")
        if ring is not None and own != ring:
            raise RingMismatch("series ring does not match the enclosing declaration")
        out = own.zero()
        for t in data.get("terms", []):
            out = out + own.monomial(t.get("beta", [0] * len(own.exp_vars)), t.get("mono", {}),
                                     parse_rational(t["coef"]))
        return out


def series_mul(a: Series, b: Series) -> Series:
    """Product of two series in the same ring, truncated at the ring order."""
    if a.ring != b.ring:
        raise RingMismatch(f"series rings differ: {a.ring} vs {b.ring}")
    order = a.ring.order
    out: Dict[Key, Fraction] = {}
    for (b1, m1), c1 in a.terms.items():
        d1 = sum(b1)
        for (b2, m2), c2 in b.terms.items():
            if d1 + sum(b2) > order:
                continue
            key = (tuple(x + y for x, y in zip(b1, b2)), tuple(x + y for x, y in zip(m1, m2)))
            out[key] = out.get(key, 0) + c1 * c2
    return Series(a.ring, out)


def derive(a: Series, var: str) -> Series:
    """Partial derivative along the coordinate ``var``.

    Polynomial dependence is differentiated as usual; each ``Q_i = exp(var)``
    paired with ``var`` contributes a factor ``beta_i``.
    """
    ring = a.ring
    if var not in ring.coordinates:
        raise KeyError(f"unknown variable {var!r}; declared coordinates are {ring.coordinates}")
    pidx = ring.poly_vars.index(var) if var in ring.poly_vars else None
    eidx = [i for i, (_, c) in enumerate(ring.exp_vars) if c == var]
    out: Dict[Key, Fraction] = {}
    for (beta, mono), c in a.terms.items():
        w = sum(beta[i] for i in eidx)
        if w:
            out[(beta, mono)] = out.get((beta, mono), 0) + c * w
        if pidx is not None and mono[pidx]:
            m2 = list(mono)
            m2[pidx] -= 1
            key = (beta, tuple(m2))
            out[key] = out.get(key, 0) + c * mono[pidx]
    return Series(ring, out)


def specialize(a: Series, assignments: Mapping[str, object]) -> Series:
    """Substitute rational values for polynomial or exponential variables.

    The result lives in the same ring; the assigned variables simply no
    longer occur.  Use :func:`rebase` to drop them from the declaration.
    """
    ring = a.ring
    vals = {k: Fraction(v) for k, v in assignments.items()}
    for k in vals:
        if k not in ring.poly_vars and k not in ring.exp_names:
            raise KeyError(f"unknown variable {k!r}")
    pi = {i: vals[v] for i, v in enumerate(ring.poly_vars) if v in vals}
    ei = {i: vals[n] for i, n in enumerate(ring.exp_names) if n in vals}
    out: Dict[Key, Fraction] = {}
    for (beta, mono), c in a.terms.items():
        factor = c
        b2, m2 = list(beta), list(mono)
        for i, v in pi.items():
            if mono[i]:
                factor *= v ** mono[i]
                m2[i] = 0
        for i, v in ei.items():
            if beta[i]:
                factor *= v ** beta[i]
                b2[i] = 0
        if factor:
            key = (tuple(b2), tuple(m2))
            out[key] = out.get(key, 0) + factor
    return Series(ring, out)


def rebase(a: Series, ring: SeriesRing) -> Series:
    """Move ``a`` into ``ring`` matching variables by name.

    Variables absent from the target must not occur in ``a``.  Terms beyond
    the target order are dropped.
    """
    src = a.ring
    out = ring.zero()
    terms: Dict[Key, Fraction] = {}
    for (beta, mono), c in a.terms.items():
        b2 = [0] * len(ring.exp_vars)
        m2 = [0] * len(ring.poly_vars)
        for (n, coord), b in zip(src.exp_vars, beta):
            if not b:
                continue
            if (n, coord) not in ring.exp_vars:
                raise RingMismatch(f"exponential variable {n!r} occurs but is not in the target ring")
            b2[ring.exp_vars.index((n, coord))] = b
        for v, e in zip(src.poly_vars, mono):
            if not e:
                continue
            if v not in ring.poly_vars:
                raise RingMismatch(f"polynomial variable {v!r} occurs but is not in the target ring")
            m2[ring.poly_vars.index(v)] = e
        if sum(b2) > ring.order:
            continue
        key = (tuple(b2), tuple(m2))
        terms[key] = terms.get(key, 0) + c
    out = Series(ring, terms)
    return out


def as_series(x, ring: SeriesRing) -> Series:
    if isinstance(x, Series):
        if x.ring != ring:
            raise RingMismatch("series ring mismatch")
        return x
    return ring.const(x)
