"""Integer-matrix congruences: trace and characteristic-polynomial tests.

The core statement: for an integer matrix A and odd prime l,

    tr A^(l^(n+1)) = tr A^(l^n)   (mod l^(n+1)),

with a matching congruence between the characteristic polynomials of the two
powers.  `arnold_zarelua_check` measures both valuations exactly.  For l = 2
the congruence is outside the guaranteed range, so the check still measures
but renders no pass/fail verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from .errors import CheckFailed, InputError
from .matrices import det_one_minus_y, mat_pow, mat_trace
from .padic import int_val, is_prime

IntMatrix = Sequence[Sequence[int]]


def check_square(a: IntMatrix) -> int:
    r = len(a)
    if r == 0 or any(len(row) != r for row in a):
        raise InputError("matrix must be square and nonempty")
    return r


def trace_power(a: IntMatrix, e: int) -> int:
    """tr(A^e), exact."""
    check_square(a)
    if e == 0:
        return len(a)
    return mat_trace(mat_pow(a, e, 1, 0))


def closed_walk_count(a: IntMatrix, length: int) -> int:
    """Weighted count of closed walks of the given length.

    Brute-force enumeration over all vertex sequences, each weighted by the
    product of traversed entry values.  Independent of the matrix-power
    route (it never multiplies matrices), and exponential in `length` --
    a small-case oracle, not a production path.
    """
    r = check_square(a)
    if length == 0:
        return r
    total = 0
    for walk in product(range(r), repeat=length):
        w = 1
        for i in range(length):
            w *= a[walk[i]][walk[(i + 1) % length]]
            if w == 0:
                break
        total += w
    return total


def poly_diff_val(p1: Sequence[int], p2: Sequence[int], ell: int,
                  cap: int) -> tuple[int, bool]:
    """Min l-valuation over coefficients of p1 - p2, capped; True = all zero."""
    n = max(len(p1), len(p2))
    best: Optional[int] = None
    for i in range(n):
        d = (p1[i] if i < len(p1) else 0) - (p2[i] if i < len(p2) else 0)
        if d == 0:
            continue
        v = int_val(ell, d)
        if best is None or v < best:
            best = v
            if best == 0:
                break
    if best is None:
        return cap, True
    return min(best, cap), False


@dataclass(frozen=True)
class TracePowerReport:
    ell: int
    n: int
    trace_lo: int
    trace_hi: int
    trace_val: int
    trace_saturated: bool
    charpoly_val: int
    charpoly_saturated: bool
    required: int
    passed: Optional[bool]  # None: measured only (l = 2)

    def as_record(self) -> dict:
        return {
            "ell": self.ell,
            "n": self.n,
            "trace_low": str(self.trace_lo),
            "trace_high": str(self.trace_hi),
            "trace_valuation": self.trace_val,
            "trace_saturated": self.trace_saturated,
            "charpoly_valuation": self.charpoly_val,
            "charpoly_saturated": self.charpoly_saturated,
            "required": self.required,
            "status": (
                "measured" if self.passed is None
                else "pass" if self.passed else "fail"
            ),
        }


def arnold_zarelua_check(a: IntMatrix, ell: int, n: int,
                         val_cap: int = 64) -> TracePowerReport:
    """Compare tr/charpoly of A^(l^n) and A^(l^(n+1)) l-adically.

    For odd primes the congruence must hold to depth n+1 and the report
    carries a verdict; for l = 2 it reports measured valuations only.
    Exact-zero differences saturate at `val_cap`.
    """
    check_square(a)
    if not is_prime(ell):
        raise InputError(f"l must be prime, got {ell}")
    if n < 0:
        raise InputError("n must be >= 0")
    lo = mat_pow(a, ell**n, 1, 0)
    hi = mat_pow(lo, ell, 1, 0)
    t_lo, t_hi = mat_trace(lo), mat_trace(hi)
    tv, tsat = poly_diff_val([t_hi], [t_lo], ell, val_cap)
    p_lo = det_one_minus_y(lo, 1, 0)
    p_hi = det_one_minus_y(hi, 1, 0)
    cv, csat = poly_diff_val(p_hi, p_lo, ell, val_cap)
    required = n + 1
    passed = None if ell == 2 else (tv >= required and cv >= required)
    return TracePowerReport(ell, n, t_lo, t_hi, tv, tsat, cv, csat,
                            required, passed)


def det_from_traces(traces: Sequence[int]) -> list[Fraction]:
    """Coefficients of det(1 - x*B) from the power traces tr(B^d).

    Newton's identities applied to exp(-sum tr(B^d) x^d / d), arranged
    division-free except for the single division by the coefficient index:

        k * c_k = -sum_{i=1..k} tr(B^i) * c_{k-i}.

    Input traces (tr B^1, ..., tr B^D) yield coefficients c_0..c_D as exact
    rationals (integral whenever the traces come from an integer matrix).
    """
    coeffs = [Fraction(1)]
    for k in range(1, len(traces) + 1):
        acc = Fraction(0)
        for i in range(1, k + 1):
            acc += Fraction(traces[i - 1]) * coeffs[k - i]
        coeffs.append(-acc / k)
    return coeffs


def traces_from_det(coeffs: Sequence, degree: int) -> list:
    """Inverse of :func:`det_from_traces`: power sums from det(1 - x*B).

    Division-free (works over rings): tr(B^d) = -d*c_d - sum c_i tr(B^(d-i)).
    `coeffs` is [c_0=1, c_1, ...]; missing high coefficients count as zero.
    """
    traces: list = []
    for d in range(1, degree + 1):
        cd = coeffs[d] if d < len(coeffs) else coeffs[0] - coeffs[0]
        acc = cd * (-d)
        for i in range(1, d):
            ci = coeffs[i] if i < len(coeffs) else None
            if ci is not None:
                acc = acc - ci * traces[d - i - 1]
        traces.append(acc)
    return traces


def intify(coeffs: Sequence[Fraction], what: str = "polynomial") -> list[int]:
    """Demote exact rationals to ints; CheckFailed if any is non-integral."""
    out = []
    for i, c in enumerate(coeffs):
        if c.denominator != 1:
            raise CheckFailed(f"{what}: coefficient {i} is non-integral ({c})")
        out.append(int(c))
    return out
