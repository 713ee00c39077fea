"""Finite fields F_q, q = p^f, backed by full exp/dlog tables.

Elements are packed integers sum a_i p^i for the coefficient vector
(a_0, ..., a_{f-1}) over a deterministic modulus: the lexicographically
first monic irreducible of degree f (comparing coefficient tuples from the
x^(f-1) coefficient down).  The multiplicative group is tabulated against
the smallest generator (by packed encoding), so multiplication, inversion,
powers and discrete logs are O(1) lookups.  Construction is vectorized:
multiplication by g^B is F_p-linear, so the exp table advances in blocks
through one small matrix product per block.

Everything is capped at q <= 10^7 (a full-table design is a desk-scale
tool); the cap is an explicit guard, not a soft limit.
"""

from __future__ import annotations

import numpy as np

from .errors import GuardExceeded, InputError
from .padic import is_prime

FIELD_CAP = 10**7
_BLOCK = 4096


def _factorize(m: int) -> list[int]:
    """Distinct prime factors by trial division (m <= 10^7 here)."""
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def _poly_mul_mod(a: list[int], b: list[int], mod_poly: list[int], p: int) -> list[int]:
    f = len(mod_poly) - 1
    buf = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                buf[i + j] = (buf[i + j] + x * y) % p
    for i in range(len(buf) - 1, f - 1, -1):
        c = buf[i]
        if c:
            for j in range(f):
                buf[i - f + j] = (buf[i - f + j] - c * mod_poly[j]) % p
            buf[i] = 0
    return [x % p for x in buf[:f]] + [0] * max(0, f - len(buf))


def _poly_pow_mod(a: list[int], e: int, mod_poly: list[int], p: int) -> list[int]:
    out = [1] + [0] * (len(mod_poly) - 2)
    base = list(a)
    while e:
        if e & 1:
            out = _poly_mul_mod(out, base, mod_poly, p)
        e >>= 1
        if e:
            base = _poly_mul_mod(base, base, mod_poly, p)
    return out


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = [x % p for x in a], [x % p for x in b]

    def deg(u):
        d = len(u) - 1
        while d >= 0 and u[d] == 0:
            d -= 1
        return d

    while deg(b) >= 0:
        da, db = deg(a), deg(b)
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[deg(b)], -1, p)
        while deg(a) >= deg(b):
            shift = deg(a) - deg(b)
            c = a[deg(a)] * inv % p
            for i in range(deg(b) + 1):
                a[i + shift] = (a[i + shift] - c * b[i]) % p
        a, b = b, a
    return a


def _poly_deg(u: list[int]) -> int:
    d = len(u) - 1
    while d >= 0 and u[d] == 0:
        d -= 1
    return d


def _is_irreducible(mod_poly: list[int], p: int) -> bool:
    """Rabin test: x^(p^f) = x mod m, and gcd(x^(p^(f/d)) - x, m) constant
    for every prime d | f."""
    f = len(mod_poly) - 1
    x = [0, 1] + [0] * (f - 2)
    if _poly_pow_mod(x, p**f, mod_poly, p) != x:
        return False
    for d in _factorize(f):
        sub = _poly_pow_mod(x, p ** (f // d), mod_poly, p)
        diff = [(a - b) % p for a, b in zip(sub, x)]
        if _poly_deg(_poly_gcd(diff, list(mod_poly), p)) != 0:
            return False
    return True


def _find_modulus(p: int, f: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree f.

    Candidates are compared coefficient-high-first, (c_{f-1}, ..., c_0),
    which is exactly ascending order of the packed code whose base-p digit i
    is c_i.  Returned constant-term first, with the leading 1 appended.
    """
    if f == 1:
        return (0, 1)
    for code in range(p**f):
        digits = []
        t = code
        for _ in range(f):
            digits.append(t % p)
            t //= p
        poly = digits + [1]
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise InputError(f"no irreducible polynomial found for p={p}, f={f}")


class FqField:
    """F_{p^f} with exp/dlog tables; elements are packed ints in [0, q)."""

    def __init__(self, p: int, f: int, cap: int = FIELD_CAP):
        if not is_prime(p):
            raise InputError(f"p must be prime, got {p}")
        if f < 1:
            raise InputError(f"f must be >= 1, got {f}")
        q = p**f
        if q > cap:
            raise GuardExceeded(
                f"field size p^f = {q} exceeds the table guard {cap}"
            )
        self.p, self.f, self.q = p, f, q
        self.modulus = _find_modulus(p, f)
        self._weights = np.array([p**i for i in range(f)], dtype=np.int64)
        self.gen = self._find_generator()
        self._build_tables()
        self._trace_basis = self._basis_traces()

    # -- construction internals ------------------------------------------

    def _mul_poly(self, a: int, b: int) -> int:
        da = self.decode(a)
        db = self.decode(b)
        return self.encode(_poly_mul_mod(da, db, list(self.modulus), self.p))

    def _pow_poly(self, a: int, e: int) -> int:
        return self.encode(
            _poly_pow_mod(self.decode(a), e, list(self.modulus), self.p)
        )

    def _find_generator(self) -> int:
        order = self.q - 1
        prime_divs = _factorize(order)
        for enc in range(2, self.q):
            ok = True
            for d in prime_divs:
                if self._pow_poly(enc, order // d) == 1:
                    ok = False
                    break
            if ok:
                return enc
        raise InputError("no multiplicative generator found (impossible)")

    def _mult_matrix(self, a: int) -> np.ndarray:
        """f x f matrix over F_p of multiplication by `a` in the basis."""
        cols = []
        for j in range(self.f):
            basis = [0] * self.f
            basis[j] = 1
            prod = _poly_mul_mod(
                self.decode(a), basis, list(self.modulus), self.p
            )
            cols.append(prod)
        return np.array(cols, dtype=np.int64).T % self.p

    def _build_tables(self) -> None:
        q, p, f = self.q, self.p, self.f
        n = q - 1
        exp = np.empty(n, dtype=np.int64)
        if f == 1:
            block = min(_BLOCK, n)
            cur = np.empty(block, dtype=np.int64)
            val = 1
            for i in range(block):
                cur[i] = val
                val = val * self.gen % p
            exp[:block] = cur[:block]
            gb = pow(self.gen, block, p)
            pos = block
            while pos < n:
                m = min(block, n - pos)
                cur = cur * gb % p
                exp[pos : pos + m] = cur[:m]
                pos += m
        else:
            block = min(_BLOCK, n)
            digits = np.empty((f, block), dtype=np.int64)
            cur = [1] + [0] * (f - 1)
            for i in range(block):
                digits[:, i] = cur
                cur = _poly_mul_mod(
                    cur, self.decode(self.gen), list(self.modulus), p
                )
            mb = self._mult_matrix(self._pow_poly(self.gen, block))
            pos = 0
            while pos < n:
                m = min(block, n - pos)
                exp[pos : pos + m] = self._weights @ digits[:, :m]
                pos += m
                if pos < n:
                    digits = mb @ digits % p
        self.exp_table = exp
        dlog = np.full(q, -1, dtype=np.int64)
        dlog[exp] = np.arange(n, dtype=np.int64)
        if int((dlog >= 0).sum()) != n:
            raise InputError("generator order check failed (impossible)")
        self.dlog_table = dlog

    def _basis_traces(self) -> np.ndarray:
        """Tr(x^i) for the power basis, for O(f) absolute traces."""
        out = []
        for i in range(self.f):
            basis = [0] * self.f
            basis[i] = 1
            acc = list(basis)
            total = list(basis)
            for _ in range(self.f - 1):
                acc = _poly_pow_mod(acc, self.p, list(self.modulus), self.p)
                total = [(x + y) % self.p for x, y in zip(total, acc)]
            # the trace of a field element is in F_p: constant coefficient
            assert all(c == 0 for c in total[1:]), "trace left the prime field"
            out.append(total[0])
        return np.array(out, dtype=np.int64)

    # -- element codec ----------------------------------------------------

    def decode(self, a: int) -> list[int]:
        out = []
        for _ in range(self.f):
            out.append(a % self.p)
            a //= self.p
        return out

    def encode(self, coeffs: list[int]) -> int:
        acc = 0
        for c in reversed(coeffs[: self.f]):
            acc = acc * self.p + c % self.p
        return acc

    # -- arithmetic -------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self.encode(
            [(x + y) % self.p for x, y in zip(self.decode(a), self.decode(b))]
        )

    def neg(self, a: int) -> int:
        return self.encode([(-x) % self.p for x in self.decode(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        n = self.q - 1
        return int(
            self.exp_table[
                (int(self.dlog_table[a]) + int(self.dlog_table[b])) % n
            ]
        )

    def inv(self, a: int) -> int:
        if a == 0:
            raise InputError("inverting 0 in a finite field")
        n = self.q - 1
        return int(self.exp_table[(-int(self.dlog_table[a])) % n])

    def pow_elt(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise InputError("inverting 0 in a finite field")
            return 0 if e else 1
        n = self.q - 1
        return int(self.exp_table[int(self.dlog_table[a]) * e % n])

    def dlog(self, a: int) -> int:
        if a == 0:
            raise InputError("dlog of 0 is undefined")
        return int(self.dlog_table[a])

    def tr_abs(self, a: int) -> int:
        """Absolute trace to F_p, returned as an int in [0, p)."""
        return int(np.dot(self.decode(a), self._trace_basis) % self.p)

    def tr_abs_batch(self, encs: np.ndarray) -> np.ndarray:
        digits = (encs[:, None] // self._weights[None, :]) % self.p
        return (digits @ self._trace_basis) % self.p

    def add_batch(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        da = (a[:, None] // self._weights[None, :]) % self.p
        db = (b[:, None] // self._weights[None, :]) % self.p
        return ((da + db) % self.p) @ self._weights

    def one_minus_batch(self, encs: np.ndarray) -> np.ndarray:
        digits = (encs[:, None] // self._weights[None, :]) % self.p
        digits = (-digits) % self.p
        digits[:, 0] = (digits[:, 0] + 1) % self.p
        return digits @ self._weights

    def neg_batch(self, encs: np.ndarray) -> np.ndarray:
        digits = (encs[:, None] // self._weights[None, :]) % self.p
        return ((-digits) % self.p) @ self._weights

    def embeds_into(self, other: "FqField") -> bool:
        return other.p == self.p and other.f % self.f == 0

    def __repr__(self) -> str:
        return f"FqField({self.p}^{self.f}, modulus={list(self.modulus)}, g={self.gen})"


def field_build(p: int, f: int, cap: int = FIELD_CAP) -> FqField:
    """Construct F_{p^f} with its tables (deterministic modulus/generator)."""
    return FqField(p, f, cap)


def subfield_generator(big: FqField, sub_q: int) -> int:
    """The canonical generator of the order-(sub_q - 1) subgroup: the norm
    power G^((Q-1)/(q-1)) of the big field's generator."""
    if (big.q - 1) % (sub_q - 1) != 0:
        raise InputError(f"{sub_q} - 1 does not divide {big.q} - 1")
    return big.pow_elt(big.gen, (big.q - 1) // (sub_q - 1))


def subfield_dlog(big: FqField, sub_q: int, x: int) -> int:
    """dlog of a subfield element w.r.t. the canonical subfield generator."""
    step = (big.q - 1) // (sub_q - 1)
    k = big.dlog(x)
    if k % step != 0:
        raise InputError("element is not in the requested subfield")
    return k // step
