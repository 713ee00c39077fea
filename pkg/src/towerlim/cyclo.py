"""Exact arithmetic in cyclotomic rings Z[zeta] for zeta of l-power order.

Elements are coefficient vectors over the power integral basis
1, zeta, ..., zeta^(phi-1), phi = phi(l^n) = (l-1) l^(n-1), for an odd prime
l.  Reduction exploits the shape of Phi_{l^n}(x) = sum_{j<l} x^(j l^(n-1)):
exponents first fold mod l^n (zeta has order l^n), then each surviving
exponent phi + t in [phi, l^n) is eliminated by

    zeta^(phi+t) = -(zeta^t + zeta^(t+m) + ... + zeta^(t+(l-2)m)),  m = l^(n-1).

A ring is *exact* (``prec=None``, arbitrary integers) or *fixed-precision*
(coefficients reduced mod l^prec).  Fixed-precision rings whose modulus and
degree fit a proven-safe window multiply through numpy int64 convolution;
everything else uses the pure-Python integer path.  The two paths compute
identical results and the tests drive them in lockstep.

Level n = 0 is the degenerate ring Z (zeta = 1) and is fully supported so
tower code can treat the base level uniformly.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .padic import check_odd_prime, int_val

# numpy path safety: coefficients < 2^25 in absolute value, so products are
# < 2^50 and a convolution accumulates at most l^n <= 2^25 of them... that
# naive bound overflows, so the degree is capped as well: with conv length
# <= 2^13 terms the sums stay below 2^63.  Both caps checked at ring build.
_NP_COEFF_BITS = 25
_NP_MAX_CONV_TERMS = 1 << 13
_NP_MIN_PHI = 16  # below this, python-loop overhead beats numpy round trips


class CycloRing:
    """The ring Z[zeta_{l^n}], optionally with coefficients mod l^prec."""

    def __init__(self, ell: int, level: int, prec: int | None = None):
        check_odd_prime(ell)
        if level < 0:
            raise InputError(f"level must be >= 0, got {level}")
        if prec is not None and prec < 1:
            raise InputError(f"precision must be >= 1 or None, got {prec}")
        self.ell = ell
        self.level = level
        self.prec = prec
        self.order = ell**level  # order of zeta
        self.m = ell ** (level - 1) if level >= 1 else 0
        self.phi = (ell - 1) * self.m if level >= 1 else 1
        self.qmod = ell**prec if prec is not None else None
        self._np_ok = (
            self.qmod is not None
            and self.qmod <= 1 << _NP_COEFF_BITS
            and self.phi >= _NP_MIN_PHI
            and 2 * self.phi - 1 <= _NP_MAX_CONV_TERMS
        )

    # -- construction -----------------------------------------------------

    def elem(self, coeffs: Iterable[int]) -> "CycloElem":
        c = list(coeffs)
        if len(c) > self.phi:
            raise InputError(f"got {len(c)} coefficients for degree {self.phi}")
        c += [0] * (self.phi - len(c))
        if self.qmod is not None:
            c = [x % self.qmod for x in c]
        return CycloElem(self, tuple(c))

    def zero(self) -> "CycloElem":
        return self.elem([])

    def one(self) -> "CycloElem":
        return self.elem([1])

    def from_int(self, a: int) -> "CycloElem":
        return self.elem([a])

    def zeta(self, e: int = 1) -> "CycloElem":
        return self.from_exponent_counts([(e, 1)])

    def from_exponent_counts(self, pairs: Iterable[tuple[int, int]]) -> "CycloElem":
        """Sum of c * zeta^e over (e, c) pairs, reduced to the basis."""
        buf = [0] * max(self.order, 1)
        for e, c in pairs:
            buf[e % self.order] += c
        return CycloElem(self, tuple(self._fold_top(buf)))

    # -- reduction helpers ------------------------------------------------

    def _fold_top(self, buf: list[int]) -> list[int]:
        """Reduce a length-l^n exponent buffer to the power basis."""
        if self.level == 0:
            out = buf[:1]
        else:
            out = buf[: self.phi]
            for t in range(self.order - self.phi):
                c = buf[self.phi + t]
                if c:
                    for i in range(self.ell - 1):
                        out[t + i * self.m] -= c
        if self.qmod is not None:
            out = [x % self.qmod for x in out]
        return out

    def _mul_coeffs(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        if self.level == 0:
            v = a[0] * b[0]
            return [v % self.qmod if self.qmod is not None else v]
        if self._np_ok:
            conv = np.convolve(
                np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
            )
            buf = np.zeros(self.order, dtype=np.int64)
            head = min(conv.shape[0], self.order)
            buf[:head] += conv[:head]
            if conv.shape[0] > self.order:
                tail = conv[self.order :]
                buf[: tail.shape[0]] += tail
            top = buf[self.phi :]
            folded = buf[: self.phi].reshape(self.ell - 1, self.m) - top[None, :]
            return [int(x) % self.qmod for x in folded.ravel()]
        buf = [0] * (2 * self.phi - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        buf[i + j] += ai * bj
        full = [0] * self.order
        for e, c in enumerate(buf):
            if c:
                full[e % self.order] += c
        return self._fold_top(full)

    # -- ring relations ---------------------------------------------------

    def embed_target(self) -> "CycloRing":
        return CycloRing(self.ell, self.level + 1, self.prec)

    def same_ring(self, other: "CycloRing") -> bool:
        return (
            self.ell == other.ell
            and self.level == other.level
            and self.prec == other.prec
        )

    def __repr__(self) -> str:
        p = "exact" if self.prec is None else f"mod {self.ell}^{self.prec}"
        return f"CycloRing(l={self.ell}, level={self.level}, {p})"


class CycloElem:
    """An element of a :class:`CycloRing`, stored as basis coefficients."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: CycloRing, coeffs: tuple[int, ...]):
        assert len(coeffs) == ring.phi
        self.ring = ring
        self.coeffs = coeffs

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "CycloElem":
        if isinstance(other, CycloElem):
            if not self.ring.same_ring(other.ring):
                raise InputError("elements from different cyclotomic rings")
            return other
        if isinstance(other, int):
            return self.ring.from_int(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "CycloElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        q = self.ring.qmod
        if q is None:
            c = tuple(x + y for x, y in zip(self.coeffs, o.coeffs))
        else:
            c = tuple((x + y) % q for x, y in zip(self.coeffs, o.coeffs))
        return CycloElem(self.ring, c)

    __radd__ = __add__

    def __sub__(self, other) -> "CycloElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        q = self.ring.qmod
        if q is None:
            c = tuple(x - y for x, y in zip(self.coeffs, o.coeffs))
        else:
            c = tuple((x - y) % q for x, y in zip(self.coeffs, o.coeffs))
        return CycloElem(self.ring, c)

    def __rsub__(self, other) -> "CycloElem":
        return (-self).__add__(other)

    def __neg__(self) -> "CycloElem":
        q = self.ring.qmod
        if q is None:
            return CycloElem(self.ring, tuple(-x for x in self.coeffs))
        return CycloElem(self.ring, tuple(-x % q for x in self.coeffs))

    def __mul__(self, other) -> "CycloElem":
        if isinstance(other, int):
            q = self.ring.qmod
            if q is None:
                return CycloElem(self.ring, tuple(x * other for x in self.coeffs))
            return CycloElem(self.ring, tuple(x * other % q for x in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return CycloElem(self.ring, tuple(self.ring._mul_coeffs(self.coeffs, o.coeffs)))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "CycloElem":
        if e < 0:
            raise InputError("negative powers are not defined in the ring")
        out = self.ring.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def mul_zeta(self, e: int) -> "CycloElem":
        """Multiply by zeta^e without a full convolution."""
        r = self.ring
        if r.level == 0:
            return self
        buf = [0] * r.order
        for j, c in enumerate(self.coeffs):
            if c:
                buf[(j + e) % r.order] += c
        return CycloElem(r, tuple(r._fold_top(buf)))

    def __eq__(self, other) -> bool:
        if isinstance(other, CycloElem):
            if not self.ring.same_ring(other.ring):
                return False
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == self.ring.from_int(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ring.ell, self.ring.level, self.ring.prec, self.coeffs))

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def __repr__(self) -> str:
        return f"CycloElem({self.ring!r}, {list(self.coeffs)})"

    # -- structure maps ---------------------------------------------------

    def embed_up(self) -> "CycloElem":
        """Image under zeta_{l^n} -> (zeta_{l^(n+1)})^l, one level up.

        Basis exponent j maps to l*j < phi(l^(n+1)), so no reduction is
        needed: the coefficients land directly on basis positions.
        """
        r = self.ring
        up = r.embed_target()
        buf = [0] * up.phi
        for j, c in enumerate(self.coeffs):
            buf[r.ell * j] = c
        return CycloElem(up, tuple(buf))

    def galois_act(self, a: int) -> "CycloElem":
        """sigma_a: zeta -> zeta^a, for a coprime to l."""
        r = self.ring
        if a % r.ell == 0 and r.level >= 1:
            raise InputError(f"sigma_{a} is not a Galois element (l | a)")
        if r.level == 0:
            return self
        buf = [0] * r.order
        for j, c in enumerate(self.coeffs):
            if c:
                buf[a * j % r.order] += c
        return CycloElem(r, tuple(r._fold_top(buf)))

    def conjugate(self) -> "CycloElem":
        return self.galois_act(-1 % max(self.ring.order, 2))

    def complex_value(self, k: int = 1) -> complex:
        """Float sanity embedding zeta -> exp(2 pi i k / l^n); not exact."""
        r = self.ring
        q = r.qmod
        z = np.exp(2j * np.pi * k / max(r.order, 1))
        cs = self.coeffs
        if q is not None:
            half = q // 2
            cs = tuple(c - q if c > half else c for c in cs)
        return complex(sum(c * z**j for j, c in enumerate(cs)))


def ell_divisibility(x: CycloElem) -> tuple[int, bool]:
    """Coefficient-wise min l-valuation of x, with saturation flag.

    Returns ``(v, False)`` for a definite valuation.  For x = 0 in a
    fixed-precision ring only "v >= prec" is knowable: returns
    ``(prec, True)``.  Exact-ring zero returns ``(-1, True)`` meaning
    +infinity (the -1 is a sentinel; check the flag first).
    """
    r = x.ring
    ell = r.ell
    if x.is_zero():
        if r.prec is not None:
            return r.prec, True
        return -1, True
    v = None
    for c in x.coeffs:
        if c == 0:
            continue
        cv = int_val(ell, c)
        if v is None or cv < v:
            v = cv
            if v == 0:
                break
    assert v is not None
    if r.prec is not None:
        v = min(v, r.prec)
    return v, False


def serialize_elem(x: CycloElem) -> dict:
    """JSON-safe form; coefficients as decimal strings (they can be huge)."""
    r = x.ring
    return {
        "ell": r.ell,
        "level": r.level,
        "prec": r.prec,
        "coeffs": [str(c) for c in x.coeffs],
    }


def deserialize_elem(data: dict) -> CycloElem:
    ring = CycloRing(int(data["ell"]), int(data["level"]),
                     None if data["prec"] is None else int(data["prec"]))
    coeffs = [int(s) for s in data["coeffs"]]
    if len(coeffs) != ring.phi:
        raise InputError(
            f"coefficient count {len(coeffs)} does not match degree {ring.phi}"
        )
    return ring.elem(coeffs)


class BiCycloRing:
    """Z[zeta_p, zeta_{l^n}] for a prime p != l, exact integers only.

    Elements are (p-1) x phi(l^n) integer matrices over the tensor basis
    zeta_p^a zeta^j, 0 <= a < p-1, 0 <= j < phi.  Row reduction uses
    zeta_p^(p-1) = -(1 + zeta_p + ... + zeta_p^(p-2)); column reduction is
    the l-power rule of :class:`CycloRing`.
    """

    def __init__(self, p: int, ell: int, level: int):
        if p < 2 or not _is_prime_small(p):
            raise InputError(f"p must be prime, got {p}")
        if p == ell:
            raise InputError("p must differ from l")
        self.p = p
        self.cyclo = CycloRing(ell, level, None)
        self.rows = p - 1
        self.cols = self.cyclo.phi

    def elem(self, mat: Sequence[Sequence[int]]) -> "BiCycloElem":
        rows = [list(r) for r in mat]
        if len(rows) > self.rows or any(len(r) > self.cols for r in rows):
            raise InputError("matrix exceeds basis dimensions")
        out = []
        for a in range(self.rows):
            row = rows[a] if a < len(rows) else []
            out.append(tuple(row + [0] * (self.cols - len(row))))
        return BiCycloElem(self, tuple(out))

    def zero(self) -> "BiCycloElem":
        return BiCycloElem(
            self, tuple(tuple([0] * self.cols) for _ in range(self.rows))
        )

    def from_int(self, c: int) -> "BiCycloElem":
        return self.from_exponent_counts({(0, 0): c})

    def from_cyclo(self, x: CycloElem) -> "BiCycloElem":
        if not x.ring.same_ring(self.cyclo):
            raise InputError("cyclotomic part belongs to a different ring")
        return self.from_exponent_counts(
            {(0, j): c for j, c in enumerate(x.coeffs) if c}
        )

    def from_exponent_counts(self, counts: dict) -> "BiCycloElem":
        """Sum of c * zeta_p^a zeta^e over {(a, e): c}, fully reduced."""
        p, cy = self.p, self.cyclo
        buf = [[0] * max(cy.order, 1) for _ in range(p)]
        for (a, e), c in counts.items():
            buf[a % p][e % max(cy.order, 1)] += c
        out = []
        last = buf[p - 1]
        for a in range(p - 1):
            merged = [buf[a][t] - last[t] for t in range(len(last))]
            out.append(tuple(cy._fold_top(merged)))
        return BiCycloElem(self, tuple(out))


def _is_prime_small(p: int) -> bool:
    from .padic import is_prime

    return is_prime(p)


class BiCycloElem:
    __slots__ = ("ring", "mat")

    def __init__(self, ring: BiCycloRing, mat: tuple[tuple[int, ...], ...]):
        self.ring = ring
        self.mat = mat

    def _coerce(self, other) -> "BiCycloElem":
        if isinstance(other, BiCycloElem):
            if other.ring.p != self.ring.p or not other.ring.cyclo.same_ring(
                self.ring.cyclo
            ):
                raise InputError("elements from different bicyclotomic rings")
            return other
        if isinstance(other, int):
            return self.ring.from_int(other)
        if isinstance(other, CycloElem):
            return self.ring.from_cyclo(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "BiCycloElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return BiCycloElem(
            self.ring,
            tuple(
                tuple(x + y for x, y in zip(r1, r2))
                for r1, r2 in zip(self.mat, o.mat)
            ),
        )

    __radd__ = __add__

    def __sub__(self, other) -> "BiCycloElem":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return BiCycloElem(
            self.ring,
            tuple(
                tuple(x - y for x, y in zip(r1, r2))
                for r1, r2 in zip(self.mat, o.mat)
            ),
        )

    def __neg__(self) -> "BiCycloElem":
        return BiCycloElem(self.ring, tuple(tuple(-x for x in r) for r in self.mat))

    def __mul__(self, other) -> "BiCycloElem":
        if isinstance(other, int):
            return BiCycloElem(
                self.ring, tuple(tuple(x * other for x in r) for r in self.mat)
            )
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        br = self.ring
        p, cy = br.p, br.cyclo
        buf = [[0] * max(cy.order, 1) for _ in range(p)]
        for a1, row1 in enumerate(self.mat):
            for j1, c1 in enumerate(row1):
                if not c1:
                    continue
                for a2, row2 in enumerate(o.mat):
                    a = a1 + a2
                    if a >= p:
                        a -= p
                    tgt = buf[a]
                    for j2, c2 in enumerate(row2):
                        if c2:
                            tgt[j1 + j2 if j1 + j2 < cy.order else j1 + j2 - cy.order] += c1 * c2
        out = []
        last = buf[p - 1]
        for a in range(p - 1):
            merged = [buf[a][t] - last[t] for t in range(len(last))]
            out.append(tuple(cy._fold_top(merged)))
        return BiCycloElem(br, tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, BiCycloElem):
            if other.ring.p != self.ring.p or not other.ring.cyclo.same_ring(
                self.ring.cyclo
            ):
                return False
            return self.mat == other.mat
        if isinstance(other, (int, CycloElem)):
            o = self._coerce(other)
            return self.mat == o.mat
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ring.p, self.ring.cyclo.level, self.mat))

    def is_zero(self) -> bool:
        return all(all(x == 0 for x in r) for r in self.mat)

    def conjugate(self) -> "BiCycloElem":
        """Complex conjugation: zeta_p -> zeta_p^-1 and zeta -> zeta^-1."""
        br = self.ring
        p, cy = br.p, br.cyclo
        counts: dict[tuple[int, int], int] = {}
        for a, row in enumerate(self.mat):
            for j, c in enumerate(row):
                if c:
                    key = ((-a) % p, (-j) % max(cy.order, 1))
                    counts[key] = counts.get(key, 0) + c
        return br.from_exponent_counts(counts)

    def embed_up(self) -> "BiCycloElem":
        """Raise the l-power level by one (zeta_p row structure unchanged)."""
        br = self.ring
        up = BiCycloRing(br.p, br.cyclo.ell, br.cyclo.level + 1)
        ell = br.cyclo.ell
        out = []
        for row in self.mat:
            buf = [0] * up.cols
            for j, c in enumerate(row):
                buf[ell * j] = c
            out.append(tuple(buf))
        return BiCycloElem(up, tuple(out))

    def as_int(self) -> int:
        """Demote a rational-integer element; error if it is not one."""
        c0 = self.mat[0][0]
        for a, row in enumerate(self.mat):
            for j, c in enumerate(row):
                if (a, j) != (0, 0) and c != 0:
                    raise InputError("element is not a rational integer")
        return c0

    def complex_value(self, kp: int = 1, kl: int = 1) -> complex:
        br = self.ring
        zp = np.exp(2j * np.pi * kp / br.p)
        zl = np.exp(2j * np.pi * kl / max(br.cyclo.order, 1))
        total = 0j
        for a, row in enumerate(self.mat):
            for j, c in enumerate(row):
                if c:
                    total += c * zp**a * zl**j
        return complex(total)

    def __repr__(self) -> str:
        return f"BiCycloElem(p={self.ring.p}, {self.ring.cyclo!r})"
