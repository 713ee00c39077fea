"""Character sums over finite fields and the zeta data they assemble.

Conventions, fixed once for the whole package:

* Multiplicative characters of F_q at l-power level n are parametrized by
  an integer v: chi_v(x) = zeta_{l^n}^(v * dlog(x)) against the field's
  tabulated generator, with chi_v(0) = 0.  This requires l^n | q - 1.
* The additive character is psi(x) = zeta_p^Tr(x) (absolute trace), with
  a-twists psi_a(x) = psi(ax).
* Gauss sums g(psi_a, chi_v) = sum over x != 0 live in Z[zeta_p, zeta_{l^n}]
  (exact integer bicyclotomic elements); Jacobi sums J(chi_v1, chi_v2) =
  sum over all x of chi_v1(x) chi_v2(1-x) live in Z[zeta_{l^n}].

Every point count is produced twice, by plain enumeration and through
character sums, and a mismatch is a hard error: the two routes share no
code beyond the field tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _iproduct
from typing import Optional, Sequence

import numpy as np

from .cyclo import BiCycloElem, BiCycloRing, CycloElem, CycloRing, ell_divisibility
from .errors import CheckFailed, GuardExceeded, InputError
from .fields import FIELD_CAP, FqField, field_build
from .matfermat import det_from_traces, intify, traces_from_det
from .padic import check_odd_prime, int_val, is_prime

ENUM_CAP = 10**7


def prime_power_split(q: int) -> tuple[int, int]:
    """q = p^f with p prime; error if q is not a prime power."""
    if q < 2:
        raise InputError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if p * p > q:
            break
        if q % p == 0:
            f = 0
            t = q
            while t % p == 0:
                t //= p
                f += 1
            if t != 1:
                raise InputError(f"{q} is not a prime power")
            return p, f
    return q, 1


def _char_level_check(field: FqField, ell: int, level: int) -> int:
    check_odd_prime(ell)
    if level < 1:
        raise InputError("character level must be >= 1")
    d = ell**level
    if (field.q - 1) % d != 0:
        raise InputError(
            f"level-{level} characters need {ell}^{level} | q - 1 "
            f"(q = {field.q})"
        )
    return d


@dataclass(frozen=True)
class MultChar:
    """chi_v at level n over `field`; value at x is zeta^(v * dlog x)."""

    field: FqField
    ell: int
    level: int
    v: int

    def __post_init__(self):
        _char_level_check(self.field, self.ell, self.level)

    @property
    def order_divisor(self) -> int:
        return self.ell**self.level

    def is_trivial(self) -> bool:
        return self.v % self.order_divisor == 0

    def exponent(self, x: int) -> Optional[int]:
        """Exponent of zeta_{l^n}, or None encoding chi(0) = 0."""
        if x == 0:
            return None
        return self.v * self.field.dlog(x) % self.order_divisor

    def value(self, x: int, ring: CycloRing) -> CycloElem:
        e = self.exponent(x)
        return ring.zero() if e is None else ring.zeta(e)


@dataclass(frozen=True)
class AddChar:
    """psi_a(x) = zeta_p^Tr(ax); exponent() returns the trace value."""

    field: FqField
    a: int = 1

    def exponent(self, x: int) -> int:
        return self.field.tr_abs(self.field.mul(self.a, x))


def gauss_sum(field: FqField, ell: int, level: int, v: int,
              a: int = 1) -> BiCycloElem:
    """g(psi_a, chi_v) = sum_{x != 0} psi(ax) chi_v(x), exact."""
    d = _char_level_check(field, ell, level)
    if a == 0:
        raise InputError("additive twist a must be nonzero")
    n = field.q - 1
    ks = np.arange(n, dtype=np.int64)
    traces = field.tr_abs_batch(field.exp_table)
    ka = field.dlog(a % field.q if a % field.q else a)
    tr_shift = traces[(ks + ka) % n] if ka else traces
    es = (v % d) * ks % d
    counts = np.zeros((field.p, d), dtype=np.int64)
    np.add.at(counts, (tr_shift, es), 1)
    ring = BiCycloRing(field.p, ell, level)
    pairs = {}
    for t in range(field.p):
        for e in range(d):
            c = int(counts[t, e])
            if c:
                pairs[(t, e)] = c
    return ring.from_exponent_counts(pairs)


def jacobi_sum(field: FqField, ell: int, level: int, v1: int,
               v2: int) -> CycloElem:
    """J(chi_v1, chi_v2) = sum_x chi_v1(x) chi_v2(1 - x), exact.

    The chi(0) = 0 convention silently drops x = 0 and x = 1, so the sum
    effectively ranges over x != 0, 1.
    """
    d = _char_level_check(field, ell, level)
    n = field.q - 1
    ks = np.arange(n, dtype=np.int64)
    om = field.one_minus_batch(field.exp_table)
    mask = om != 0
    k2 = field.dlog_table[om[mask]]
    es = ((v1 % d) * ks[mask] + (v2 % d) * k2) % d
    counts = np.bincount(es, minlength=d)
    ring = CycloRing(ell, level, None)
    return ring.from_exponent_counts(
        [(int(e), int(c)) for e, c in enumerate(counts) if c]
    )


def gauss_norm_check(field: FqField, ell: int, level: int, v: int) -> dict:
    """Verify g(psi, chi_v) * g(psi_-1, chi_-v) = chi_v(-1) * q exactly.

    This is the exact form of |g|^2 = q; the second factor is the complex
    conjugate of the first.  Hard error on failure.
    """
    d = _char_level_check(field, ell, level)
    if v % d == 0:
        raise InputError("norm identity needs a nontrivial character")
    g = gauss_sum(field, ell, level, v)
    prod = g * g.conjugate()
    neg1 = field.neg(1)
    chi_m1 = (v * field.dlog(neg1)) % d
    ring = BiCycloRing(field.p, ell, level)
    want = ring.from_exponent_counts({(0, chi_m1): field.q})
    if prod != want:
        raise CheckFailed("Gauss sum norm identity failed")
    return {"q": field.q, "level": level, "v": v, "passed": True}


def jacobi_gauss_bridge_check(field: FqField, ell: int, level: int,
                              v1: int, v2: int) -> dict:
    """Verify J(chi1, chi2) * g(psi, chi1 chi2) = g(psi, chi1) g(psi, chi2).

    Requires chi1, chi2, chi1*chi2 all nontrivial.  Hard error on failure.
    """
    d = _char_level_check(field, ell, level)
    if v1 % d == 0 or v2 % d == 0 or (v1 + v2) % d == 0:
        raise InputError("bridge identity needs all three characters nontrivial")
    j = jacobi_sum(field, ell, level, v1, v2)
    lhs = gauss_sum(field, ell, level, v1 + v2) * j
    rhs = gauss_sum(field, ell, level, v1) * gauss_sum(field, ell, level, v2)
    if lhs != rhs:
        raise CheckFailed("Jacobi/Gauss bridge identity failed")
    return {"q": field.q, "level": level, "v": [v1, v2], "passed": True}


# -- orbit-sum lemmas -----------------------------------------------------


def mult_order(q: int, mod: int) -> int:
    if mod == 1:
        return 1
    from math import gcd

    if gcd(q, mod) != 1:
        raise InputError(f"{q} is not invertible mod {mod}")
    k, t = 1, q % mod
    while t != 1:
        t = t * q % mod
        k += 1
        if k > mod:
            raise CheckFailed("order computation overran the group size")
    return k


def s_rho_n(ell: int, n: int, q: int, w: int, rho: int) -> dict:
    """S = sum_{i=1..rho} zeta_{l^n}^(q^i w); certifies v_l(S) >= v_l(rho).

    Precondition: the multiplicative order k_n of q mod l^n divides rho, so
    the sum is (rho/k_n) copies of a full orbit sum.  The exact element and
    its coefficient-wise divisibility are returned; falling short of the
    certified bound is a hard error.
    """
    check_odd_prime(ell)
    if n < 1 or rho < 1:
        raise InputError("need n >= 1 and rho >= 1")
    mod = ell**n
    k = mult_order(q, mod)
    if rho % k != 0:
        raise InputError(f"rho = {rho} is not a multiple of the orbit size {k}")
    ring = CycloRing(ell, n, None)
    pairs = []
    t = 1
    for _ in range(k):
        t = t * q % mod
        pairs.append((t * w % mod, rho // k))
    s = ring.from_exponent_counts(pairs)
    required = int_val(ell, rho)
    val, saturated = ell_divisibility(s)
    if not saturated and val < required:
        raise CheckFailed(
            f"orbit sum valuation {val} below the certified bound {required}"
        )
    return {
        "n": n,
        "q": q,
        "w": w,
        "rho": rho,
        "k_n": k,
        "exactly_zero": bool(saturated),
        "valuation": None if saturated else val,
        "required": required,
        "passed": True,
    }


def primitive_char_sum(ell: int, n: int, shape: Sequence[int],
                       lam: Sequence[int], cap: int = ENUM_CAP) -> dict:
    """Sum of chi over elements of maximal order in a product of cyclic
    l-groups; certifies the divisibility floor.

    M = prod Z/l^(n_i) with max n_i = n; the maximal-order elements are
    those with a unit coordinate in some full-depth factor.  chi is
    parametrized by lam: chi(x) = zeta_{l^n}^(sum lam_i x_i l^(n - n_i)).
    Certified: v_l(sum) >= n - 1, improving to (n-1)*b when all depths
    equal n (the free case, b = number of factors).  Hard error if missed.
    """
    check_odd_prime(ell)
    shape = tuple(int(x) for x in shape)
    lam = tuple(int(x) for x in lam)
    if not shape or len(shape) != len(lam):
        raise InputError("shape and lam must be nonempty and equal length")
    if any(x < 1 for x in shape):
        raise InputError("all depths must be >= 1")
    if max(shape) != n:
        raise InputError(f"max depth {max(shape)} must equal n = {n}")
    total = 1
    for ni in shape:
        total *= ell**ni
        if total > cap:
            raise GuardExceeded(f"module size exceeds enumeration cap {cap}")
    free = all(ni == n for ni in shape)
    required = (n - 1) * (len(shape) if free else 1)
    mod = ell**n
    ring = CycloRing(ell, n, None)
    weights = [ell ** (n - ni) for ni in shape]
    buf = [0] * mod
    count = 0
    for x in _iproduct(*[range(ell**ni) for ni in shape]):
        if not any(ni == n and xi % ell for ni, xi in zip(shape, x)):
            continue
        count += 1
        e = sum(li * xi * wi for li, xi, wi in zip(lam, x, weights)) % mod
        buf[e] += 1
    s = ring.from_exponent_counts([(e, c) for e, c in enumerate(buf) if c])
    val, saturated = ell_divisibility(s)
    if not saturated and val < required:
        raise CheckFailed(
            f"primitive character sum valuation {val} below bound {required}"
        )
    return {
        "n": n,
        "shape": list(shape),
        "lam": list(lam),
        "free": free,
        "num_primitive": count,
        "exactly_zero": bool(saturated),
        "valuation": None if saturated else val,
        "required": required,
        "passed": True,
    }


# -- point counts, two independent routes each ----------------------------


def _elem_int(x: CycloElem, what: str) -> int:
    if any(c != 0 for c in x.coeffs[1:]):
        raise CheckFailed(f"{what} is not a rational integer")
    return x.coeffs[0]


def fermat_point_count(ell: int, n: int, q: int,
                       field_cap: int = FIELD_CAP) -> dict:
    """Projective points of x^d + y^d + z^d = 0 over F_q, d = l^n.

    Route one is plain enumeration: tabulate the d-th power map, count
    y-solutions per x through a value-count table, add the points at
    infinity.  Route two assembles the count from Jacobi sums:

        N = q + d + sum over nontrivial (j1, j2) of J(chi^j1, chi^j2),

    where pairs with chi^j1 chi^j2 trivial contribute -1.  Any mismatch is
    a hard error.
    """
    p, f = prime_power_split(q)
    field = field_build(p, f, field_cap)
    d = _char_level_check(field, ell, n)
    enum = fermat_enum_count(q, d, field_cap)
    n_enum = enum["count"]
    ring = CycloRing(ell, n, None)
    total = ring.from_int(q + d)
    for j1 in range(1, d):
        for j2 in range(1, d):
            if (j1 + j2) % d == 0:
                total = total + ring.from_int(-1)
            else:
                total = total + jacobi_sum(field, ell, n, j1, j2)
    n_char = _elem_int(total, "Jacobi-sum point count")
    if n_enum != n_char:
        raise CheckFailed(
            f"Fermat counts disagree: enumeration {n_enum} vs "
            f"character sums {n_char} (q = {q}, d = {d})"
        )
    return {
        "curve": f"x^{d} + y^{d} + z^{d} = 0",
        "q": q,
        "d": d,
        "count": n_enum,
        "affine": enum["affine"],
        "at_infinity": enum["at_infinity"],
        "routes_agree": True,
    }


def _frob_batch(field: FqField, encs: np.ndarray, e: int) -> np.ndarray:
    """x -> x^(p^e)-style powering by an integer exponent, batched."""
    out = np.zeros_like(encs)
    nz = encs != 0
    nq = field.q - 1
    out[nz] = field.exp_table[field.dlog_table[encs[nz]] * e % nq]
    return out


def artin_schreier_point_count(ell: int, n: int, q: int, m: int,
                               field_cap: int = FIELD_CAP) -> dict:
    """Points of y^q - y = x^d (d = l^n) over F_{q^m}, plus one at infinity.

    Route one is the additive criterion: y^q - y = c is solvable in K iff
    Tr_{K/F_q}(c) = 0, contributing q solutions, so the affine count is
    q * #{x in K : Tr_{K/F_q}(x^d) = 0}.  Route two expands the count in
    Gauss sums over K:

        N = q^m + 1 + sum_{a in F_q^*} sum_{j=1..d-1} g(psi_a o Tr, chi^j).

    Any mismatch is a hard error.
    """
    p, f = prime_power_split(q)
    if m < 1:
        raise InputError("extension degree m must be >= 1")
    big = field_build(p, f * m, field_cap)
    d = _char_level_check(big, ell, n)
    enum = artin_schreier_enum_count(q, m, d, field_cap)
    n_enum = enum["count"]
    nq = big.q - 1
    ks = np.arange(nq, dtype=np.int64)
    step = nq // (q - 1)
    traces = big.tr_abs_batch(big.exp_table)
    kd = ks % d
    pairs: dict[tuple[int, int], int] = {}
    for t in range(q - 1):
        ka = t * step
        shifted = traces[(ks + ka) % nq]
        counts = np.zeros((p, d), dtype=np.int64)
        np.add.at(counts, (shifted, kd), 1)
        nz_t, nz_e = np.nonzero(counts)
        for tt, ee, cc in zip(nz_t, nz_e, counts[nz_t, nz_e]):
            for j in range(1, d):
                key = (int(tt), int(j * ee % d))
                pairs[key] = pairs.get(key, 0) + int(cc)
    ring = BiCycloRing(p, ell, n)
    total = ring.from_exponent_counts(pairs)
    n_char = q**m + 1 + total.as_int()
    if n_enum != n_char:
        raise CheckFailed(
            f"Artin-Schreier counts disagree: trace criterion {n_enum} vs "
            f"Gauss sums {n_char} (q = {q}, m = {m}, d = {d})"
        )
    return {
        "curve": f"y^{q} - y = x^{d}",
        "q": q,
        "m": m,
        "d": d,
        "count": n_enum,
        "affine": enum["affine"],
        "routes_agree": True,
    }


# -- Weil polynomials from counts -----------------------------------------


def zeta_from_counts(q: int, genus: int, counts: Sequence[int]) -> dict:
    """Numerator of the zeta function from point counts N_1..N_{2g}.

    Converts counts to power traces a_m = q^m + 1 - N_m, runs the Newton
    recurrence to exact rational coefficients, and demotes to integers.
    Enforces the functional equation c_{2g-k} = q^(g-k) c_k and the Weil
    bound |a_m| <= 2g sqrt(q^m); violations are hard errors (they mean the
    counts are not the counts of a genus-g curve).
    """
    if genus < 0:
        raise InputError("genus must be >= 0")
    if len(counts) < 2 * genus:
        raise InputError(
            f"need {2 * genus} counts for genus {genus}, got {len(counts)}"
        )
    traces = [q**m + 1 - counts[m - 1] for m in range(1, 2 * genus + 1)]
    for m, a in enumerate(traces, start=1):
        if a * a > 4 * genus * genus * q**m:
            raise CheckFailed(
                f"Weil bound violated at m = {m}: |{a}| > 2g q^(m/2)"
            )
    coeffs = intify(det_from_traces(traces), "zeta numerator")
    for k in range(genus + 1):
        if coeffs[2 * genus - k] != q ** (genus - k) * coeffs[k]:
            raise CheckFailed(
                f"functional equation failed at k = {k}: "
                f"{coeffs[2 * genus - k]} != {q}^{genus - k} * {coeffs[k]}"
            )
    return {
        "q": q,
        "genus": genus,
        "traces": traces,
        "coeffs": coeffs,
    }


def predicted_counts(coeffs: Sequence[int], q: int, m_max: int) -> list[int]:
    """Counts implied by a zeta numerator: N_m = q^m + 1 - (power sums)."""
    if m_max > 64:
        raise InputError("prediction range is capped at 64")
    traces = traces_from_det(list(coeffs), m_max)
    return [q**m + 1 - traces[m - 1] for m in range(1, m_max + 1)]


# -- the motivating hyperelliptic family (the one 2-power case) -----------


def motivating_curve_counts(tower_level: int = 3,
                            m_max: Optional[int] = None,
                            field_cap: int = FIELD_CAP) -> dict:
    """Counts for y^2 = x^(2^t) + 1 over F_5 extensions, by enumeration.

    The quadratic character does the y-counting: x contributes
    1 + chi_2(x^d + 1) points (just 1 when x^d + 1 = 0), plus the two
    rational points at infinity of the smooth model (d is even and the
    leading coefficient is a square).  This family is the package's one
    l = 2 pipeline and deliberately bypasses the cyclotomic machinery.
    """
    t = tower_level
    if t < 2:
        raise InputError("tower level must be >= 2 (genus would vanish)")
    d = 2**t
    genus = 2 ** (t - 1) - 1
    if m_max is None:
        m_max = 2 * genus
    counts = []
    for m in range(1, m_max + 1):
        field = field_build(5, m, field_cap)
        nq = field.q - 1
        ks = np.arange(nq, dtype=np.int64)
        pows = np.zeros(field.q, dtype=np.int64)
        pows[field.exp_table] = field.exp_table[ks * d % nq]
        vals = field.add_batch(pows, np.ones(field.q, dtype=np.int64))
        sols = np.ones(field.q, dtype=np.int64)
        nz = vals != 0
        sols[nz] += 1 - 2 * (field.dlog_table[vals[nz]] % 2)
        counts.append(int(sols.sum()) + 2)
    return {
        "curve": f"y^2 = x^{d} + 1",
        "base": 5,
        "genus": genus,
        "counts": counts,
    }


def motivating_reference_poly(tower_level: int = 3) -> list[int]:
    """The closed-form zeta numerator of the motivating family:

        (1 - 2x + 5x^2) * prod_{i=1..t-2} (1 + 5^(2^(i-1)) x^(2^i))^2.
    """
    t = tower_level
    if t < 2:
        raise InputError("tower level must be >= 2")
    poly = [1, -2, 5]
    for i in range(1, t - 1):
        factor = [0] * (2**i + 1)
        factor[0] = 1
        factor[2**i] = 5 ** (2 ** (i - 1))
        for _ in range(2):
            out = [0] * (len(poly) + len(factor) - 1)
            for a, x in enumerate(poly):
                if x:
                    for b, y in enumerate(factor):
                        if y:
                            out[a + b] += x * y
            poly = out
    return poly


def motivating_zeta_check(tower_level: int = 3,
                          field_cap: int = FIELD_CAP) -> dict:
    """Counts -> zeta numerator, compared against the closed form."""
    data = motivating_curve_counts(tower_level, None, field_cap)
    z = zeta_from_counts(5, data["genus"], data["counts"])
    want = motivating_reference_poly(tower_level)
    return {
        "curve": data["curve"],
        "genus": data["genus"],
        "counts": data["counts"],
        "coeffs": z["coeffs"],
        "reference": want,
        "passed": z["coeffs"] == want,
    }


def fermat_enum_count(q: int, d: int, field_cap: int = FIELD_CAP) -> dict:
    """Projective count of x^d + y^d + z^d = 0 over F_q by enumeration only.

    Works for any exponent d >= 1 (no character-level requirement), so it
    also serves extensions where d does not divide q - 1.
    """
    if d < 1:
        raise InputError("exponent d must be >= 1")
    p, f = prime_power_split(q)
    field = field_build(p, f, field_cap)
    nq = field.q - 1
    ks = np.arange(nq, dtype=np.int64)
    pows = np.zeros(field.q, dtype=np.int64)
    pows[field.exp_table] = field.exp_table[ks * d % nq]
    roots_count = np.bincount(pows, minlength=field.q)
    plus_one = field.add_batch(pows, np.ones(field.q, dtype=np.int64))
    targets = field.neg_batch(plus_one)
    n_aff = int(roots_count[targets].sum())
    n_inf = int(roots_count[field.neg(1)])
    return {"q": q, "d": d, "count": n_aff + n_inf,
            "affine": n_aff, "at_infinity": n_inf}


def artin_schreier_enum_count(q: int, m: int, d: int,
                              field_cap: int = FIELD_CAP) -> dict:
    """Count of y^q - y = x^d over F_{q^m} (plus the point at infinity)
    by the trace criterion alone: x contributes q points iff
    Tr_{K/F_q}(x^d) = 0.
    """
    if d < 1 or m < 1:
        raise InputError("need d >= 1 and m >= 1")
    p, f = prime_power_split(q)
    big = field_build(p, f * m, field_cap)
    nq = big.q - 1
    ks = np.arange(nq, dtype=np.int64)
    pows = np.zeros(big.q, dtype=np.int64)
    pows[big.exp_table] = big.exp_table[ks * d % nq]
    acc = pows.copy()
    cur = pows
    for _ in range(m - 1):
        cur = _frob_batch(big, cur, q)
        acc = big.add_batch(acc, cur)
    n_aff = q * int((acc == 0).sum())
    return {"q": q, "m": m, "d": d, "count": n_aff + 1, "affine": n_aff}


# -- degree-l descent identities ------------------------------------------
#
# E is a degree-l extension of a subfield of size sub_q, with
# v_l(sub_q - 1) = n.  The subfield is always addressed through the
# norm-compatible generator g' = G^step (step = (|E| - 1)/(sub_q - 1)),
# so both sides of each identity are evaluated with consistent character
# conventions inside E.


def _coleman_jacobi_core(E: FqField, sub_q: int, ell: int, n: int,
                         w1: int, w2: int) -> dict:
    """Level-(n+1) Jacobi sum over E against its level-n subfield image.

    The identity checked: J_E(chi_w1, chi_w2) equals
    sub_q^((l-1)/2) * J_sub(chi_w1, chi_w2), the right side lifted one
    level.  Returns a pass/fail row.
    """
    d_lo = ell**n
    step = (E.q - 1) // (sub_q - 1)
    j_big = jacobi_sum(E, ell, n + 1, w1, w2)
    ts = np.arange(sub_q - 1, dtype=np.int64)
    xs = E.exp_table[ts * step]
    om = E.one_minus_batch(xs)
    mask = om != 0
    k2 = E.dlog_table[om[mask]]
    if int((k2 % step).sum()):
        raise CheckFailed("1 - x left the subfield; tables are inconsistent")
    es = ((w1 % d_lo) * ts[mask] + (w2 % d_lo) * (k2 // step)) % d_lo
    counts = np.bincount(es, minlength=d_lo)
    ring = CycloRing(ell, n, None)
    j_sub = ring.from_exponent_counts(
        [(int(e), int(c)) for e, c in enumerate(counts) if c]
    )
    rhs = j_sub.embed_up() * (sub_q ** ((ell - 1) // 2))
    return {"w": [int(w1), int(w2)], "passed": bool(j_big == rhs)}


def _coleman_gauss_core(E: FqField, sub_q: int, ell: int, n: int,
                        v: int) -> dict:
    """Level-(n+1) Gauss sum over E against its level-n subfield image.

    The candidate right side is

        g_sub * zeta_{l^(n+1)}^(-l * v * s) * sub_q^((l-1)/2),

    where s is the subfield discrete log of the rational integer l (the
    zeta factor is the inverse of chi_v evaluated at l, lifted one level).
    Both global signs are tried; the row records which of them matched.
    """
    d_lo = ell**n
    d_hi = ell ** (n + 1)
    step = (E.q - 1) // (sub_q - 1)
    g_big = gauss_sum(E, ell, n + 1, v)
    ts = np.arange(sub_q - 1, dtype=np.int64)
    xs = E.exp_table[ts * step]
    ell_inv = pow(ell % E.p, -1, E.p)
    trs = ell_inv * E.tr_abs_batch(xs) % E.p
    es = (v % d_lo) * ts % d_lo
    counts = np.zeros((E.p, d_lo), dtype=np.int64)
    np.add.at(counts, (trs, es), 1)
    pairs = {}
    for t in range(E.p):
        for e in range(d_lo):
            c = int(counts[t, e])
            if c:
                pairs[(t, e)] = c
    g_sub = BiCycloRing(E.p, ell, n).from_exponent_counts(pairs)
    k_ell = E.dlog(ell % E.p)
    if k_ell % step:
        raise CheckFailed("l left the subfield; tables are inconsistent")
    zexp = (-ell * v * (k_ell // step)) % d_hi
    zfac = CycloRing(ell, n + 1, None).zeta(zexp)
    base = g_sub.embed_up() * zfac * (sub_q ** ((ell - 1) // 2))
    return {
        "v": int(v),
        "sign_plus": bool(g_big == base),
        "sign_minus": bool(g_big == -base),
    }


def coleman_jacobi_check(ell: int, q: int, v1: int, v2: int,
                         field_cap: int = FIELD_CAP) -> dict:
    """Jacobi descent through the degree-l extension E = F_{q^l}.

    With n = v_l(q - 1) >= 1, levels n (over F_q) and n + 1 (over E) are
    both primitive settings; the check requires chi_v1, chi_v2 and their
    product nontrivial at the lower level.
    """
    check_odd_prime(ell)
    p, f = prime_power_split(q)
    n = int_val(ell, q - 1)
    if n < 1:
        raise InputError(f"need {ell} | q - 1 (q = {q})")
    d_lo = ell**n
    d_hi = ell ** (n + 1)
    for name, w in (("chi_1", v1), ("chi_2", v2), ("their product", v1 + v2)):
        if w % d_lo == 0:
            raise InputError(
                f"{name} is degenerate at level {n} (v = {w}); the descent "
                f"identity does not apply"
            )
    big = field_build(p, f * ell, field_cap)
    row = _coleman_jacobi_core(big, q, ell, n, v1 % d_hi, v2 % d_hi)
    return {
        "identity": "jacobi",
        "ell": ell,
        "q": q,
        "extension_q": big.q,
        "level": n + 1,
        "v": [v1, v2],
        "scale": q ** ((ell - 1) // 2),
        "passed": row["passed"],
    }


def coleman_gauss_check(ell: int, q: int, v: Optional[int] = None,
                        field_cap: int = FIELD_CAP) -> dict:
    """Gauss descent through E = F_{q^l}, with sign resolution.

    Runs one row per character parameter (all units mod l^(n+1) when v is
    not given).  Status is "pass" only if every row matches under exactly
    one global sign and all rows agree on it; "degenerate" if some row
    matches both signs; "fail" otherwise.
    """
    check_odd_prime(ell)
    p, f = prime_power_split(q)
    n = int_val(ell, q - 1)
    if n < 1:
        raise InputError(f"need {ell} | q - 1 (q = {q})")
    d_hi = ell ** (n + 1)
    if v is None:
        vs = [w for w in range(1, d_hi) if w % ell]
    else:
        if v % ell == 0:
            raise InputError(
                f"v = {v} is not primitive at level {n + 1} (unit mod {ell} "
                f"required)"
            )
        vs = [v % d_hi]
    big = field_build(p, f * ell, field_cap)
    rows = [_coleman_gauss_core(big, q, ell, n, w) for w in vs]
    status = "pass"
    signs = set()
    for r in rows:
        if r["sign_plus"] and r["sign_minus"]:
            status = "degenerate"
        elif not r["sign_plus"] and not r["sign_minus"]:
            status = "fail"
        else:
            signs.add(1 if r["sign_plus"] else -1)
    if status == "pass" and len(signs) != 1:
        status = "fail"
    return {
        "identity": "gauss",
        "ell": ell,
        "q": q,
        "extension_q": big.q,
        "level": n + 1,
        "scale": q ** ((ell - 1) // 2),
        "status": status,
        "sign": signs.pop() if status == "pass" else None,
        "rows": rows,
    }


# -- zeta numerators level by level up a tower of curves ------------------


def _bic_int(x: BiCycloElem, what: str) -> int:
    try:
        return x.as_int()
    except InputError:
        raise CheckFailed(f"{what} is not a rational integer") from None


def _poly_mul_linear(poly: list, root) -> list:
    """Multiply a coefficient list (ascending) by (1 + root * y)."""
    out = list(poly) + [poly[-1] * root]
    for i in range(len(poly) - 1, 0, -1):
        out[i] = poly[i] + poly[i - 1] * root
    return out


def _stretch_mul(acc: list[int], h: Sequence[int], k: int) -> list[int]:
    """acc(y) * h(y^k) for integer coefficient lists."""
    g = [0] * ((len(h) - 1) * k + 1)
    for i, c in enumerate(h):
        g[i * k] = c
    out = [0] * (len(acc) + len(g) - 1)
    for i, x in enumerate(acc):
        if x:
            for j, y in enumerate(g):
                if y:
                    out[i + j] += x * y
    return out


def _fresh_fermat_pairs(ell: int, m: int) -> list[tuple[int, int]]:
    """Valid Jacobi character pairs mod l^m of exact level m.

    Valid: both components and their sum nonzero mod l^m.  Exact level:
    not both components divisible by l (pairs failing this are the lifts
    of lower-level pairs and are counted there).
    """
    d = ell**m
    out = []
    for v1 in range(d):
        for v2 in range(d):
            if v1 % ell == 0 and v2 % ell == 0:
                continue
            if v1 % d == 0 or v2 % d == 0 or (v1 + v2) % d == 0:
                continue
            out.append((v1, v2))
    return out


def _pair_orbits(pairs: Sequence[tuple[int, int]], q: int,
                 d: int) -> tuple[list[tuple[int, int]], set[int]]:
    """Lex-first orbit representatives under (v1, v2) -> (q v1, q v2)."""
    seen: set[tuple[int, int]] = set()
    reps = []
    sizes = set()
    for pr in pairs:
        if pr in seen:
            continue
        reps.append(pr)
        cur = pr
        size = 0
        while True:
            seen.add(cur)
            size += 1
            cur = (cur[0] * q % d, cur[1] * q % d)
            if cur == pr:
                break
        sizes.add(size)
    return reps, sizes


def _unit_orbits(ell: int, m: int, q: int) -> tuple[list[int], set[int]]:
    """Lex-first representatives of units mod l^m under v -> q v."""
    d = ell**m
    seen: set[int] = set()
    reps = []
    sizes = set()
    for v in range(1, d):
        if v % ell == 0 or v in seen:
            continue
        reps.append(v)
        cur = v
        size = 0
        while True:
            seen.add(cur)
            size += 1
            cur = cur * q % d
            if cur == v:
                break
        sizes.add(size)
    return reps, sizes


def h_poly_tower(family: str, ell: int, q: int, n: int,
                 field_cap: int = FIELD_CAP) -> dict:
    """Zeta numerator of the level-n curve of a tower, built level by level.

    Families over F_q (which must contain the l-th roots of unity):

    * "fermat": x^(l^n) + y^(l^n) + z^(l^n) = 0 (projective).
    * "artin-schreier": y^q - y = x^(l^n).

    Level m contributes h_m(y) = product over fresh character orbits of
    (1 + S * y), with S the Jacobi (resp. Gauss) sum over F_{q^(k_m)},
    k_m the orbit size; the numerator is f_n(y) = prod_m h_m(y^(k_m)).
    Every h_m must demote to integers and every degree must match the
    genus bookkeeping, else a hard error.

    For levels m >= n1 = v_l(q - 1) the step from m to m + 1 is a
    degree-l field extension, and the per-orbit descent identities are
    re-verified through the same cores as the standalone checks; the rows
    are returned under "stabilization".
    """
    if family not in ("fermat", "artin-schreier"):
        raise InputError("family must be 'fermat' or 'artin-schreier'")
    check_odd_prime(ell)
    p, f = prime_power_split(q)
    n1 = int_val(ell, q - 1)
    if n1 < 1:
        raise InputError(f"need {ell} | q - 1 (q = {q})")
    if n < 1:
        raise InputError("tower depth n must be >= 1")

    fields: dict[int, FqField] = {}

    def get_field(k: int) -> FqField:
        if k not in fields:
            fields[k] = field_build(p, f * k, field_cap)
        return fields[k]

    levels = []
    f_poly = [1]
    for m in range(1, n + 1):
        d = ell**m
        k_m = mult_order(q, d)
        big = get_field(k_m)
        if family == "fermat":
            pairs = _fresh_fermat_pairs(ell, m)
            reps, sizes = _pair_orbits(pairs, q, d)
            fresh = len(pairs)
            want_fresh = (d - 1) * (d - 2)
            if m > 1:
                want_fresh -= (d // ell - 1) * (d // ell - 2)
            h = [CycloRing(ell, m, None).from_int(1)]
            for v1, v2 in reps:
                h = _poly_mul_linear(h, jacobi_sum(big, ell, m, v1, v2))
            h_int = [_elem_int(c, f"level-{m} coefficient") for c in h]
        else:
            reps, sizes = _unit_orbits(ell, m, q)
            units = d - d // ell
            fresh = (q - 1) * units
            want_fresh = fresh
            step = (big.q - 1) // (q - 1)
            h = [BiCycloRing(p, ell, m).from_int(1)]
            for t in range(q - 1):
                a = int(big.exp_table[t * step])
                for v in reps:
                    h = _poly_mul_linear(h, gauss_sum(big, ell, m, v, a=a))
            h_int = [_bic_int(c, f"level-{m} coefficient") for c in h]
        if fresh != want_fresh:
            raise CheckFailed(
                f"level-{m} character count {fresh} != expected {want_fresh}"
            )
        if sizes and sizes != {k_m}:
            raise CheckFailed(
                f"level-{m} orbit sizes {sorted(sizes)} differ from the "
                f"multiplicative order {k_m}"
            )
        if (len(h_int) - 1) * k_m != fresh:
            raise CheckFailed(f"level-{m} degree bookkeeping failed")
        f_poly = _stretch_mul(f_poly, h_int, k_m)
        levels.append({"m": m, "k": k_m, "field_q": big.q, "h": h_int})

    want_deg = (ell**n - 1) * (ell**n - 2) if family == "fermat" \
        else (q - 1) * (ell**n - 1)
    if len(f_poly) - 1 != want_deg:
        raise CheckFailed(
            f"total degree {len(f_poly) - 1} != expected {want_deg}"
        )

    stab = []
    for m in range(n1, n):
        d_hi = ell ** (m + 1)
        k_lo = mult_order(q, ell**m)
        k_hi = mult_order(q, d_hi)
        if k_hi != ell * k_lo:
            raise CheckFailed(
                f"orbit size did not grow by a factor of {ell} at level "
                f"{m + 1} (got {k_hi} from {k_lo})"
            )
        big = get_field(k_hi)
        sub_q = q**k_lo
        rows = []
        if family == "fermat":
            pairs = _fresh_fermat_pairs(ell, m + 1)
            reps, _ = _pair_orbits(pairs, q, d_hi)
            d_lo = ell**m
            for w1, w2 in reps:
                if w1 % d_lo == 0 or w2 % d_lo == 0 or (w1 + w2) % d_lo == 0:
                    rows.append({"w": [w1, w2], "passed": None,
                                 "note": "degenerate at the lower level"})
                    continue
                rows.append(_coleman_jacobi_core(big, sub_q, ell, m, w1, w2))
            ok = all(r["passed"] for r in rows if r["passed"] is not None)
        else:
            reps, _ = _unit_orbits(ell, m + 1, q)
            for v in reps:
                rows.append(_coleman_gauss_core(big, sub_q, ell, m, v))
            one_sign = all(r["sign_plus"] != r["sign_minus"] for r in rows)
            uniform = len({r["sign_plus"] for r in rows}) <= 1
            ok = one_sign and uniform
        stab.append({
            "m": m,
            "extension_q": big.q,
            "sub_q": sub_q,
            "rows": rows,
            "passed": bool(ok),
        })

    return {
        "family": family,
        "ell": ell,
        "q": q,
        "n": n,
        "n1": n1,
        "degree": len(f_poly) - 1,
        "f": f_poly,
        "levels": levels,
        "stabilization": stab,
        "stabilization_passed":
            all(s["passed"] for s in stab) if stab else None,
    }
