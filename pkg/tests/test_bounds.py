import math

import numpy as np
import pytest

from sibsonmi.bounds import (
    bound_cor_leakage,
    bound_cor_sdpi,
    bound_thm1,
    bound_thm3,
    event_probability,
)
from sibsonmi.core import Alpha, EventMask, Joint4, Kernel, markov_extend
from sibsonmi.errors import PreconditionError, ValidationError
from sibsonmi.instances import random_joint3, random_kernel, random_markov_joint4


def diag_event(j):
    return EventMask.from_predicate(j, lambda x, y, z: x == y)


class TestThm3:
    def test_full_event(self, ref):
        rep = bound_thm3(ref, EventMask.full(ref.shape), 2)
        assert rep.lhs == 1.0 and rep.rhs >= 1.0 and rep.holds

    def test_empty_event(self, ref):
        rep = bound_thm3(ref, EventMask.empty(ref.shape), 2)
        assert rep.lhs == 0.0 and rep.rhs == 0.0

    def test_reference_worked_example(self, ref):
        rep = bound_thm3(ref, diag_event(ref), 2)
        assert abs(rep.lhs - 0.75) <= 1e-12
        assert abs(rep.rhs - (2 + math.sqrt(2)) / 4) <= 1e-6
        assert rep.holds and not rep.vacuous and not rep.uninformative

    def test_lhs_matches_enumeration(self, ref, rng):
        for _ in range(20):
            j = random_joint3(rng, (2, 2, 2))
            mask = rng.random((2, 2, 2)) < 0.5
            rep = bound_thm3(j, EventMask(mask), 2)
            direct = sum(
                j.probs[ix, iy, iz]
                for ix in range(2)
                for iy in range(2)
                for iz in range(2)
                if mask[ix, iy, iz]
            )
            assert abs(rep.lhs - direct) <= 1e-12

    def test_rejects_small_order(self, ref):
        with pytest.raises(ValidationError):
            bound_thm3(ref, diag_event(ref), 0.5)

    def test_uninformative_flag(self, ref):
        rep = bound_thm3(ref, diag_event(ref), 1 + 1e-7)
        assert rep.uninformative and rep.holds


class TestThm1:
    def test_full_event(self, ref):
        rep = bound_thm1(ref, EventMask.full(ref.shape), 2)
        assert rep.lhs == 1.0 and rep.rhs >= 1.0

    def test_reference_worked_example(self, ref):
        rep = bound_thm1(ref, diag_event(ref), 2)
        assert abs(rep.lhs - 0.75) <= 1e-12
        assert abs(rep.rhs - math.sqrt(3) / 2) <= 1e-6

    def test_random_stress(self, rng):
        worst = math.inf
        for _ in range(500):
            j = random_joint3(rng, (2, 2, 2), zero_cells=int(rng.integers(0, 3)))
            e = EventMask(rng.random((2, 2, 2)) < rng.uniform(0.1, 0.9))
            a = float(rng.choice([1.5, 2.0, 4.0]))
            worst = min(worst, bound_thm1(j, e, a).slack)
        assert worst >= -1e-12


class TestCorLeakage:
    def test_empty(self, ref):
        rep = bound_cor_leakage(ref, EventMask.empty(ref.shape))
        assert rep.lhs == 0.0 and rep.rhs == 0.0

    def test_reference(self, ref):
        rep = bound_cor_leakage(ref, diag_event(ref))
        assert abs(rep.lhs - 0.75) <= 1e-12
        assert abs(rep.rhs - 1.0) <= 1e-12
        assert rep.alpha is Alpha.INFINITY

    def test_large_order_limit_of_thm1(self, rng):
        for _ in range(20):
            j = random_joint3(rng, (2, 2, 2))
            e = EventMask(rng.random((2, 2, 2)) < 0.5)
            big = bound_thm1(j, e, 1e3).rhs
            lim = bound_cor_leakage(j, e).rhs
            assert abs(big - lim) <= 1e-2


class TestMonotonicityInEvent:
    def test_nested_events(self, rng):
        for _ in range(30):
            j = random_joint3(rng, (2, 2, 2))
            small = rng.random((2, 2, 2)) < 0.4
            big = small | (rng.random((2, 2, 2)) < 0.4)
            for f in (bound_thm1, bound_thm3):
                rs = f(j, EventMask(small), 2)
                rb = f(j, EventMask(big), 2)
                assert rs.lhs <= rb.lhs + 1e-12
                assert rs.rhs <= rb.rhs + 1e-12


class TestCorSdpi:
    def test_identity_channel_reduces_to_thm3(self, rng):
        base = random_joint3(rng, (2, 2, 2))  # read as (W, X, Z)
        ident = Kernel(base.y_labels, base.y_labels, np.eye(2))
        j4 = markov_extend(base, ident)
        e = EventMask(rng.random((2, 2, 2)) < 0.5)
        rs = bound_cor_sdpi(j4, e, 2, 1.0)
        rt = bound_thm3(base, e, 2)
        assert abs(rs.lhs - rt.lhs) <= 1e-12
        assert abs(rs.rhs - rt.rhs) <= 1e-12

    def test_constant_channel_holds(self, rng):
        for _ in range(20):
            base = random_joint3(rng, (2, 2, 2))
            const = Kernel(
                base.y_labels, ("0", "1"), np.tile([0.5, 0.5], (2, 1))
            )
            j4 = markov_extend(base, const)
            e = EventMask(rng.random((2, 2, 2)) < 0.5)
            rep = bound_cor_sdpi(j4, e, 2, 1.0)
            assert rep.slack >= -1e-12

    def test_empty_event(self, rng):
        j4, _ = random_markov_joint4(rng, (2, 2, 2, 2))
        rep = bound_cor_sdpi(j4, EventMask.empty((2, 2, 2)), 2, 1.0)
        assert rep.lhs == 0.0 and rep.rhs == 0.0

    def test_markov_violation_rejected(self, rng):
        probs = rng.dirichlet(np.ones(16)).reshape(2, 2, 2, 2)
        j4 = Joint4(("0", "1"), ("0", "1"), ("0", "1"), ("0", "1"), probs)
        with pytest.raises(PreconditionError):
            bound_cor_sdpi(j4, EventMask.empty((2, 2, 2)), 2, 1.0)

    def test_eta_range_checked(self, rng):
        j4, _ = random_markov_joint4(rng, (2, 2, 2, 2))
        with pytest.raises(ValidationError):
            bound_cor_sdpi(j4, EventMask.empty((2, 2, 2)), 2, 0.0)


def test_event_probability_shape_guard(ref):
    with pytest.raises(Exception):
        event_probability(ref, EventMask.full((3, 3, 3)))
