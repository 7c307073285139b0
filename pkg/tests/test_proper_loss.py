import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twostep.errors import EtaAtBoundary, UnknownLoss
from twostep.proper_loss import (
    PROPER_LOSS_NAMES,
    MarginLoss,
    builtin_loss,
    conditional_regret,
    conditional_risk,
    cpe_partials,
    partial,
)

GRID = np.round(np.arange(1, 100) / 100.0, 2)


def kl(p, q):
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


class TestExamples:
    def test_logistic_symmetric_point(self):
        assert conditional_risk(builtin_loss("logistic"), 0.5, 0.0) == pytest.approx(math.log(2), abs=1e-15)

    def test_squared_perfect(self):
        assert conditional_risk(builtin_loss("squared"), 1.0, 1.0) == 0.0

    def test_hinge_at_zero(self):
        assert conditional_risk(builtin_loss("hinge"), 0.3, 0.0) == 1.0

    def test_logistic_regret_at_optimum(self):
        assert conditional_regret(builtin_loss("logistic"), 0.5, 0.0) == 0.0

    def test_logistic_regret_is_kl(self):
        assert conditional_regret(builtin_loss("logistic"), 0.8, 0.0) == pytest.approx(kl(0.8, 0.5), abs=1e-14)
        assert kl(0.8, 0.5) == pytest.approx(0.19274, abs=1e-5)

    def test_squared_regret(self):
        assert conditional_regret(builtin_loss("squared"), 0.75, 0.0) == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize(
        "name,y,expected",
        [("logistic", 1, math.log(2)), ("squared", -1, 1.0), ("exponential", 1, 1.0)],
    )
    def test_cpe_examples(self, name, y, expected):
        assert cpe_partials(builtin_loss(name), y, 0.5) == pytest.approx(expected, abs=1e-15)


class TestTable:
    @pytest.mark.parametrize("name,lam", [("logistic", 4.0), ("squared", 8.0), ("exponential", 4.0)])
    def test_lambda(self, name, lam):
        assert builtin_loss(name).lambda_ == lam

    def test_links(self):
        e = np.array([0.1, 0.5, 0.8])
        np.testing.assert_allclose(builtin_loss("logistic").link(e), np.log(e / (1 - e)), rtol=1e-14)
        np.testing.assert_allclose(builtin_loss("squared").link(e), 2 * e - 1, rtol=1e-14)
        np.testing.assert_allclose(builtin_loss("exponential").link(e), 0.5 * np.log(e / (1 - e)), rtol=1e-14)

    def test_hinge_is_margin_loss(self):
        assert isinstance(builtin_loss("hinge"), MarginLoss)

    def test_unknown(self):
        with pytest.raises(UnknownLoss):
            builtin_loss("savage")

    @pytest.mark.parametrize("name", PROPER_LOSS_NAMES)
    @pytest.mark.parametrize("y", [-1, 1])
    def test_cpe_matches_composite(self, name, y):
        loss = builtin_loss(name)
        np.testing.assert_allclose(
            cpe_partials(loss, y, GRID), partial(loss, y, loss.link(GRID)), rtol=1e-12
        )

    def test_cpe_boundary(self):
        with pytest.raises(EtaAtBoundary):
            cpe_partials(builtin_loss("logistic"), 1, 0.0)

    @pytest.mark.parametrize("name", ["logistic", "exponential"])
    def test_regret_boundary(self, name):
        with pytest.raises(EtaAtBoundary):
            conditional_regret(builtin_loss(name), 1.0, 0.3)


@pytest.mark.parametrize("name", PROPER_LOSS_NAMES)
class TestProperness:
    def test_grid_minimizer_is_link(self, name):
        loss = builtin_loss(name)
        fs = np.linspace(-6, 6, 4801)
        step = fs[1] - fs[0]
        for eta in GRID:
            f_best = fs[np.argmin(conditional_risk(loss, eta, fs))]
            assert abs(f_best - loss.link(eta)) <= step + 1e-12

    def test_strongly_proper_grid(self, name):
        loss = builtin_loss(name)
        E, H = np.meshgrid(GRID, GRID, indexing="ij")
        reg = conditional_regret(loss, E, loss.link(H))
        assert np.all(reg >= loss.lambda_ / 2 * (E - H) ** 2 - 1e-12)

    def test_link_round_trip(self, name):
        loss = builtin_loss(name)
        e = np.linspace(1e-6, 1 - 1e-6, 10_001)
        np.testing.assert_allclose(loss.inv_link(loss.link(e)), e, atol=1e-10, rtol=0)

    def test_link_strictly_increasing(self, name):
        assert np.all(np.diff(builtin_loss(name).link(GRID)) > 0)


def test_squared_strong_properness_is_tight():
    loss = builtin_loss("squared")
    E, H = np.meshgrid(GRID, GRID, indexing="ij")
    reg = conditional_regret(loss, E, loss.link(H))
    np.testing.assert_allclose(reg, 4.0 * (E - H) ** 2, atol=1e-12, rtol=0)


def test_hinge_minimizer_is_sign():
    hinge = builtin_loss("hinge")
    fs = np.linspace(-3, 3, 601)
    for eta in GRID:
        if eta == 0.5:
            continue
        assert fs[np.argmin(conditional_risk(hinge, eta, fs))] == pytest.approx(np.sign(2 * eta - 1))


def test_hinge_partials_convex_nonnegative():
    hinge = builtin_loss("hinge")
    fs = np.linspace(-3, 3, 601)
    for y in (-1, 1):
        v = partial(hinge, y, fs)
        assert np.all(v >= 0)
        assert np.all(np.diff(v, 2) >= -1e-12)


def test_exponential_no_overflow():
    v = partial(builtin_loss("exponential"), -1, 1e6)
    assert np.isfinite(v)
    assert np.isfinite(partial(builtin_loss("logistic"), -1, 1e6))


@settings(max_examples=300, deadline=None)
@given(name=st.sampled_from(PROPER_LOSS_NAMES), eta=st.floats(1e-4, 1 - 1e-4), f=st.floats(-20, 20))
def test_regret_nonnegative(name, eta, f):
    assert conditional_regret(builtin_loss(name), eta, f) >= 0.0
