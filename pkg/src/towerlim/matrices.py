"""Generic square-matrix helpers over any commutative ring.

Entries only need +, -, * (ints, CycloElem, PadicInt, ... all qualify).
Every routine takes explicit `one`/`zero` ring constants where it cannot
infer them, and the characteristic polynomial uses the Berkowitz algorithm,
which is division-free and therefore valid verbatim over these rings.
"""

from __future__ import annotations

from typing import Sequence

Matrix = Sequence[Sequence]


def mat_identity(r: int, one, zero) -> list[list]:
    return [[one if i == j else zero for j in range(r)] for i in range(r)]


def mat_add(a: Matrix, b: Matrix) -> list[list]:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Matrix, b: Matrix) -> list[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_mul(a: Matrix, b: Matrix) -> list[list]:
    r, mid, c = len(a), len(b), len(b[0])
    out = []
    for i in range(r):
        row_a = a[i]
        row = []
        for j in range(c):
            acc = row_a[0] * b[0][j]
            for t in range(1, mid):
                acc = acc + row_a[t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Matrix, v: Sequence) -> list:
    out = []
    for row in a:
        acc = row[0] * v[0]
        for t in range(1, len(v)):
            acc = acc + row[t] * v[t]
        out.append(acc)
    return out


def mat_pow(a: Matrix, e: int, one, zero) -> list[list]:
    out = mat_identity(len(a), one, zero)
    base = [list(r) for r in a]
    while e:
        if e & 1:
            out = mat_mul(out, base)
        e >>= 1
        if e:
            base = mat_mul(base, base)
    return out


def mat_trace(a: Matrix):
    acc = a[0][0]
    for i in range(1, len(a)):
        acc = acc + a[i][i]
    return acc


def berkowitz_char_coeffs(m: Matrix, one, zero) -> list:
    """Coefficients of det(y*I - M), descending: [1, c_1, ..., c_r].

    Berkowitz's vector recurrence: growing the leading principal minor one
    row at a time, the new coefficient vector is a truncated convolution of
    the old one with the Toeplitz column

        [1, -M[i][i], -(R.S), -(R.A.S), -(R.A^2.S), ...]

    where A is the previous leading block, R the new row to its left, and
    S the new column above the diagonal entry.  No divisions anywhere.
    """
    r = len(m)
    coeffs = [one]
    for i in range(r):
        col = [one, zero - m[i][i]]
        if i > 0:
            lead = [row[:i] for row in m[:i]]
            s = [m[t][i] for t in range(i)]
            row_left = m[i][:i]
            for k in range(i):
                acc = row_left[0] * s[0]
                for t in range(1, i):
                    acc = acc + row_left[t] * s[t]
                col.append(zero - acc)
                if k < i - 1:
                    s = mat_vec(lead, s)
        out = [zero] * (i + 2)
        for ai, av in enumerate(col):
            for bi, bv in enumerate(coeffs):
                if ai + bi <= i + 1:
                    out[ai + bi] = out[ai + bi] + av * bv
        coeffs = out
    return coeffs


def det_one_minus_y(m: Matrix, one, zero) -> list:
    """Coefficients [a_0, ..., a_r] of det(I - y*M), ascending in y.

    The coefficient of y^i here equals the coefficient of lambda^(r-i) in
    det(lambda*I - M), so this is a relabeling of the Berkowitz output.
    """
    return berkowitz_char_coeffs(m, one, zero)
