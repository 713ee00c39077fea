"""Tests for finite-field tables, traces, and subfield bookkeeping."""

from __future__ import annotations

import random

import numpy as np
import pytest

from towerlim.errors import GuardExceeded, InputError
from towerlim.fields import FqField, field_build, subfield_dlog, subfield_generator

SMALL_FIELDS = [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2), (7, 3), (13, 1), (2, 4)]


def test_exp_dlog_are_inverse_bijections():
    for p, f in SMALL_FIELDS:
        field = field_build(p, f)
        q = p**f
        assert field.q == q
        assert len(field.exp_table) == q - 1
        assert sorted(field.exp_table) == sorted(set(field.exp_table))
        for t in range(q - 1):
            assert field.dlog(field.exp_table[t]) == t
        with pytest.raises(InputError):
            field.dlog(0)


def test_generator_has_full_order():
    for p, f in SMALL_FIELDS:
        field = field_build(p, f)
        q = p**f
        seen = {1}
        x = 1
        for _ in range(q - 2):
            x = field.mul(x, field.gen)
            seen.add(x)
        assert len(seen) == q - 1
        assert field.mul(x, field.gen) == 1


def test_field_axioms_random():
    rng = random.Random(301)
    for p, f in [(5, 2), (7, 3), (3, 4)]:
        field = field_build(p, f)
        q = p**f
        for _ in range(30):
            x, y, z = (rng.randrange(q) for _ in range(3))
            assert field.mul(x, field.add(y, z)) == field.add(field.mul(x, y), field.mul(x, z))
            assert field.add(x, field.neg(x)) == 0
            assert field.sub(x, y) == field.add(x, field.neg(y))
            if x:
                assert field.mul(x, field.inv(x)) == 1
        for x in range(1, q):
            assert field.pow_elt(x, q - 1) == 1


def test_frobenius_is_additive():
    rng = random.Random(303)
    field = field_build(7, 3)
    for _ in range(40):
        x, y = rng.randrange(343), rng.randrange(343)
        lhs = field.pow_elt(field.add(x, y), 7)
        rhs = field.add(field.pow_elt(x, 7), field.pow_elt(y, 7))
        assert lhs == rhs


def test_cubic_extension_tables_are_reproducible():
    field = field_build(7, 3)
    assert field.modulus == (2, 0, 0, 1)
    assert field.gen == 22
    assert field.dlog(field.gen) == 1


def test_absolute_trace_properties():
    rng = random.Random(307)
    for p, f in [(5, 2), (7, 3), (3, 4)]:
        field = field_build(p, f)
        q = p**f
        counts = {}
        for x in range(q):
            t = field.tr_abs(x)
            counts[t] = counts.get(t, 0) + 1
            assert field.tr_abs(field.pow_elt(x, p)) == t
        # The trace is a surjective F_p-linear map: fibres all have size q/p.
        assert counts == {t: q // p for t in range(p)}
        for _ in range(30):
            x, y = rng.randrange(q), rng.randrange(q)
            s = field.tr_abs(field.add(x, y))
            assert s == (field.tr_abs(x) + field.tr_abs(y)) % p


def test_batch_ops_match_scalar_ops():
    rng = random.Random(311)
    field = field_build(7, 2)
    xs = np.array([rng.randrange(49) for _ in range(200)], dtype=np.int64)
    ys = np.array([rng.randrange(49) for _ in range(200)], dtype=np.int64)
    added = field.add_batch(xs, ys)
    negated = field.neg_batch(xs)
    one_minus = field.one_minus_batch(xs)
    traces = field.tr_abs_batch(xs)
    for i in range(len(xs)):
        assert added[i] == field.add(int(xs[i]), int(ys[i]))
        assert negated[i] == field.neg(int(xs[i]))
        assert one_minus[i] == field.sub(1, int(xs[i]))
        assert traces[i] == field.tr_abs(int(xs[i]))


def test_subfield_embedding_and_dlog():
    big = field_build(7, 3)
    assert field_build(7, 1).embeds_into(big)
    assert not big.embeds_into(field_build(7, 1))
    assert not field_build(5, 1).embeds_into(big)
    g_sub = subfield_generator(big, 7)
    # The subfield generator has exact order q_sub - 1.
    x, order = g_sub, 1
    while x != 1:
        x = big.mul(x, g_sub)
        order += 1
    assert order == 6
    step = (7**3 - 1) // 6
    for k in range(6):
        elt = big.exp_table[(k * step) % (7**3 - 1)]
        assert subfield_dlog(big, 7, elt) == k % 6
    with pytest.raises(InputError):
        subfield_dlog(big, 7, 0)


def test_subfield_elements_are_frobenius_fixed():
    big = field_build(3, 4)
    step = (3**4 - 1) // (3**2 - 1)
    for k in range(3**2 - 1):
        elt = big.exp_table[k * step]
        assert big.pow_elt(elt, 9) == elt


def test_enumeration_guard():
    with pytest.raises(GuardExceeded):
        field_build(7, 9, cap=10**5)
    with pytest.raises(GuardExceeded):
        FqField(13, 6, cap=10**6)


def test_invalid_parameters():
    with pytest.raises(InputError):
        field_build(4, 1)
    with pytest.raises(InputError):
        field_build(7, 0)
