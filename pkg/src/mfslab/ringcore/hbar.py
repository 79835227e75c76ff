"""Laurent polynomials in sqrt(hbar) with series coefficients.

A term is ``hbar^(h2/2) * Z^p * s`` with ``s`` a :class:`Series`,
``h2`` any integer and ``Z = exp(hbar * z_coord)`` for an optional
coordinate ``z_coord``.  Tracking ``Z`` separately keeps expressions such
as ``exp(hbar t0)`` exact: the coordinate derivative of ``Z^p`` is
``p*hbar*Z^p`` and the hbar derivative is ``p*z_coord*Z^p``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .series import RingMismatch, Series, SeriesRing, derive

HKey = Tuple[int, int]


class HbarLaurent:
    __slots__ = ("ring", "z_coord", "terms")

    def __init__(self, ring: SeriesRing, terms: Mapping[HKey, Series] | None = None,
                 z_coord: Optional[str] = None):
        if z_coord is not None and z_coord not in ring.poly_vars:
            raise ValueError(f"Z coordinate {z_coord!r} must be a polynomial variable of the ring")
        self.ring = ring
        self.z_coord = z_coord
        clean: Dict[HKey, Series] = {}
        for (h2, p), s in (terms or {}).items():
            if p and z_coord is None:
                raise ValueError("Z powers need a declared Z coordinate")
            if not isinstance(s, Series):
                s = ring.const(s)
            elif s.ring != ring:
                raise RingMismatch("coefficient series ring mismatch")
            if s:
                clean[(int(h2), int(p))] = s
        self.terms = clean

    # constructors
    @classmethod
    def from_series(cls, s: Series, hbar_half_power: int = 0, z_power: int = 0,
                    z_coord: Optional[str] = None) -> "HbarLaurent":
        return cls(s.ring, {(hbar_half_power, z_power): s}, z_coord)

    def _same(self, other: "HbarLaurent") -> None:
        if other.ring != self.ring:
            raise RingMismatch("HbarLaurent rings differ")
        if self.z_coord != other.z_coord and self.z_coord and other.z_coord:
            raise RingMismatch("HbarLaurent Z coordinates differ")

    def _lift(self, other) -> "HbarLaurent | None":
        if isinstance(other, HbarLaurent):
            self._same(other)
            return other
        if isinstance(other, Series):
            return HbarLaurent(self.ring, {(0, 0): other}, self.z_coord)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return HbarLaurent(self.ring, {(0, 0): self.ring.const(other)}, self.z_coord)
        return None

    def _z(self, other: "HbarLaurent") -> Optional[str]:
        return self.z_coord or other.z_coord

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out[k] + v if k in out else v
        return HbarLaurent(self.ring, out, self._z(o))

    __radd__ = __add__

    def __neg__(self):
        return HbarLaurent(self.ring, {k: -v for k, v in self.terms.items()}, self.z_coord)

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
            return HbarLaurent(self.ring, {k: v * other for k, v in self.terms.items()}, self.z_coord)
        if isinstance(other, Series):
            if other.ring != self.ring:
                raise RingMismatch("series ring mismatch")
            return HbarLaurent(self.ring, {k: v * other for k, v in self.terms.items()}, self.z_coord)
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out: Dict[HKey, Series] = {}
        for (h1, p1), s1 in self.terms.items():
            for (h2, p2), s2 in o.terms.items():
                k = (h1 + h2, p1 + p2)
                prod = s1 * s2
                out[k] = out[k] + prod if k in out else prod
        return HbarLaurent(self.ring, out, self._z(o))

    __rmul__ = __mul__

    def shift(self, half_powers: int) -> "HbarLaurent":
        """Multiply by ``hbar^(half_powers/2)``."""
        return HbarLaurent(self.ring, {(h + half_powers, p): s for (h, p), s in self.terms.items()},
                           self.z_coord)

    def __eq__(self, other):
        if isinstance(other, HbarLaurent):
            return self.ring == other.ring and self.terms == other.terms
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    @property
    def hbar_bounds(self) -> Tuple[Fraction, Fraction] | None:
        if not self.terms:
            return None
        hs = [h for h, _ in self.terms]
        return Fraction(min(hs), 2), Fraction(max(hs), 2)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (h, p), s in sorted(self.terms.items()):
            tag = f"hbar^({Fraction(h, 2)})"
            if p:
                tag += f"*Z^{p}"
            parts.append(f"{tag}*({s!r})")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "z_coord": self.z_coord,
            "ring": self.ring.to_json(),
            "terms": [
                {"hbar2": h, "z": p, "series": {"terms": s.to_json()["terms"]}}
                for (h, p), s in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HbarLaurent":
        ring = SeriesRing.from_json(data["ring"])
        terms = {}
        for t in data.get("terms", []):
            terms[(int(t["hbar2"]), int(t.get("z", 0)))] = Series.from_json(t["series"], ring)
        return cls(ring, terms, data.get("z_coord"))


def hbar_derive(a: HbarLaurent, var: str) -> HbarLaurent:
    """Derivative along the coordinate ``var``."""
    out: Dict[HKey, Series] = {}

    def put(k, s):
        if s:
            out[k] = out[k] + s if k in out else s

    for (h, p), s in a.terms.items():
        put((h, p), derive(s, var))
        if p and var == a.z_coord:
            put((h + 2, p), s * p)
    return HbarLaurent(a.ring, out, a.z_coord)


def hbar_dhbar(a: HbarLaurent) -> HbarLaurent:
    """Derivative along hbar."""
    out: Dict[HKey, Series] = {}

    def put(k, s):
        if s:
            out[k] = out[k] + s if k in out else s

    for (h, p), s in a.terms.items():
        if h:
            put((h - 2, p), s * Fraction(h, 2))
        if p:
            put((h, p), s * a.ring.var(a.z_coord) * p)
    return HbarLaurent(a.ring, out, a.z_coord)
