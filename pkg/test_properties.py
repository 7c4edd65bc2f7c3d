# -*- coding: utf-8 -*-
"""
基于 hypothesis 的性质测试：字的约化、乘法结合律、循环反对称、莱布尼茨律与 τ 不变性
"""

import random

from hypothesis import given, settings, strategies as st

from dqp_framework.algebra import outer_act
from dqp_framework.brackets import eval_double, triple_bracket
from dqp_framework.catalog import SurfaceSpec, free2, q1, surface_algebra

GROUP = surface_algebra(SurfaceSpec(1, 1))
FREE2 = free2("5", n=1, alpha="1/2", mu="1/2")
Q1 = q1("2", delta=-1, lam=2)

seeds = st.integers(min_value=0, max_value=10 ** 6)
group_words = st.lists(st.sampled_from(GROUP.letter_names), min_size=1, max_size=8)


def random_element(algebra, seed, terms=2, max_length=3):
    rng = random.Random(seed)
    value = algebra.zero()
    for _ in range(terms):
        word = algebra.random_word(rng, max_length)
        if word is not None:
            value = value + algebra.word_element(word).scale(rng.randint(-2, 2))
    return value


@settings(max_examples=60, deadline=None, derandomize=True)
@given(group_words, group_words)
def test_reduction_is_compatible_with_concatenation(left, right):
    whole = GROUP.reduce(left + right)
    assert GROUP.concat(GROUP.reduce(left), GROUP.reduce(right)) == whole


@settings(max_examples=40, deadline=None, derandomize=True)
@given(seeds, seeds, seeds)
def test_multiplication_is_associative(a, b, c):
    A = FREE2.algebra
    x, y, z = random_element(A, a), random_element(A, b), random_element(A, c)
    assert (x * y) * z == x * (y * z)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(seeds, seeds)
def test_cyclic_antisymmetry_on_words(a, b):
    br = Q1.bracket
    x, y = random_element(br.algebra, a), random_element(br.algebra, b)
    assert eval_double(br, x, y) == -eval_double(br, y, x).flip()


@settings(max_examples=15, deadline=None, derandomize=True)
@given(seeds, seeds, seeds)
def test_triple_bracket_tau_invariance(a, b, c):
    br = FREE2.bracket
    A = br.algebra
    x, y, z = (random_element(A, seed, terms=1, max_length=2) for seed in (a, b, c))
    assert triple_bracket(br, x, y, z) == triple_bracket(br, y, z, x).tau()


@settings(max_examples=30, deadline=None, derandomize=True)
@given(seeds)
def test_leibniz_in_second_argument(seed):
    br = Q1.bracket
    A = br.algebra
    x, y, z = (random_element(A, seed + k) for k in range(3))
    one = A.unit()
    expected = outer_act(y, eval_double(br, x, z), one) + outer_act(one, eval_double(br, x, y), z)
    assert eval_double(br, x, y * z) == expected
