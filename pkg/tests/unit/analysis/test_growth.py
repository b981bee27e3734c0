import math

import numpy as np
import pytest
from scipy.special import gammaln

from ultralab.analysis import (
    Box,
    QuadratureGrid,
    derivative_growth,
    derivative_sup_norms,
    fit_beurling,
    fit_roumieu,
    gevrey_order,
    iterate_growth,
    membership_report,
)
from ultralab.exceptions import ParameterError, PreconditionError
from ultralab.pdo import identity, parse_operator
from ultralab.symbolic import parse
from ultralab.weights import GevreyWeight, YoungConjugate


@pytest.fixture(scope="module")
def conj():
    return YoungConjugate(GevreyWeight(s=2))


@pytest.fixture()
def model_norms(conj):
    # exactly c e^{(1/k)φ*(jk)} with c = 1, k = 2, m = 1
    return [math.exp(conj(2.0 * j) / 2.0) for j in range(11)]


class test_fit_roumieu:
    def test_recovers_model(self, model_norms, conj):
        fit = fit_roumieu(model_norms, conj, 1, ladder=[1.0, 2.0, 4.0])
        assert fit.k == 2.0
        assert fit.stable
        assert fit.c == pytest.approx(1.0)
        assert not fit.stable_table[1.0]
        assert all(r <= 1e-9 for r in fit.residuals)

    def test_bound_holds_for_every_row(self, model_norms, conj):
        fit = fit_roumieu(model_norms, conj, 1, ladder=[4.0])
        for j, norm in enumerate(model_norms):
            assert math.log(norm) <= fit.log_c + conj(j * 4.0) / 4.0 + 1e-9

    def test_unsorted_ladder(self, model_norms, conj):
        fit = fit_roumieu(model_norms, conj, 1, ladder=[4.0, 2.0, 1.0])
        assert fit.ladder == (1.0, 2.0, 4.0)
        assert fit.k == 2.0

    def test_zero_rows(self, conj):
        fit = fit_roumieu([0.0, 0.0, 0.0], conj, 2)
        assert fit.stable
        assert fit.k == 1.0
        assert fit.c == 0.0
        d = fit.as_dict()
        assert d["log_c"] is None
        assert d["residuals"] == [None, None, None]

    def test_unstable_returns_largest(self, conj):
        norms = [math.exp(j**3) for j in range(8)]
        fit = fit_roumieu(norms, conj, 1, ladder=[1.0, 2.0])
        assert fit.k == 2.0
        assert not fit.stable

    @pytest.mark.parametrize(
        "norms,m,ladder",
        [
            ([], 1, [1.0]),
            ([1.0, -1.0], 1, [1.0]),
            ([1.0, math.nan], 1, [1.0]),
            ([1.0], -1, [1.0]),
            ([1.0], 1, []),
            ([1.0], 1, [0.0, 1.0]),
        ],
    )
    def test_invalid(self, norms, m, ladder, conj):
        with pytest.raises(ParameterError):
            fit_roumieu(norms, conj, m, ladder)


def test_fit_beurling_constant_rows(conj):
    table = fit_beurling([1.0] * 6, conj, 2, ladder=[1.0, 2.0])
    assert table == {1.0: 0.0, 2.0: 0.0}


def test_derivative_sup_norms():
    norms = derivative_sup_norms(parse("sin(x1)", 1), Box(((0.0, math.pi),)), 3)
    assert norms == pytest.approx([1.0, 1.0, 1.0, 1.0])


def test_derivative_sup_norms_threads():
    u = parse("exp(2*x1)*cos(x2)", 2)
    K = Box.parse("0,1,0,1")
    assert derivative_sup_norms(u, K, 4, points=9, workers=3) == pytest.approx(
        derivative_sup_norms(u, K, 4, points=9)
    )


def test_derivative_growth(conj):
    report = derivative_growth(parse("exp(2*x1)", 1), Box(((0.0, 1.0),)), 8, conj)
    assert report.side == "derivative"
    assert report.m == 1
    assert report.norms == pytest.approx([2.0**q * math.e**2 for q in range(9)])
    assert report.weight == "gevrey:s=2"
    assert report.as_dict()["verdict"] == report.verdict


def test_iterate_growth(conj, laplacian, coarse_grid):
    P = laplacian
    u = parse("sin(pi*x1)*sin(pi*x2)", 2)
    report = iterate_growth(P, u, Box.parse("0,1,0,1"), 3, conj, grid=coarse_grid)
    lam = 2.0 * math.pi**2
    assert report.m == 2
    assert report.norms == pytest.approx([0.5 * lam**j for j in range(4)], rel=1e-6)
    assert not report.caveat


class test_membership_report:
    @pytest.fixture(scope="class")
    def report(self):
        return membership_report(
            parse("sin(pi*x1)*sin(pi*x2)", 2),
            parse_operator("1*D[2,0] + 1*D[0,2]"),
            Box.parse("0,1,0,1"),
            YoungConjugate(GevreyWeight(s=2)),
            J=3,
            N=3,
            grid=QuadratureGrid(17),
            points=9,
        )

    def test_flags(self, report):
        flags = report.flags
        assert flags["iterate_bounded"]
        assert flags["derivative_bounded"]
        assert flags["consistent"]

    def test_slopes(self, report):
        assert set(report.slopes) == {"iterate", "derivative"}

    def test_as_dict(self, report):
        d = report.as_dict()
        assert d["iterate"]["side"] == "iterate"
        assert d["derivative"]["side"] == "derivative"
        assert d["flags"] == report.flags

    def test_order_zero_operator(self, conj):
        with pytest.raises(PreconditionError):
            membership_report(parse("x1", 1), identity(1), Box(((0.0, 1.0),)), conj, 2, 2)


class test_gevrey_order:
    def test_recovers_order(self):
        d = np.arange(1, 11, dtype=float)
        logs = gammaln(1.5 * (d + 1.0)) + 0.3 * d + 2.0
        fit = gevrey_order(d, logs)
        assert fit.order == pytest.approx(1.5, abs=1e-4)
        assert fit.slope == pytest.approx(0.3, abs=1e-3)
        assert fit.intercept == pytest.approx(2.0, abs=1e-2)
        assert fit.residual < 1e-8
        assert set(fit.as_dict()) == {"order", "slope", "intercept", "residual"}

    def test_skips_non_finite(self):
        d = np.arange(0, 8, dtype=float)
        logs = gammaln(2.0 * (d + 1.0))
        logs[0] = -math.inf
        assert gevrey_order(d, logs).order == pytest.approx(2.0, abs=1e-4)

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            gevrey_order([1.0, 2.0, 3.0], [0.0, math.nan, 1.0])
