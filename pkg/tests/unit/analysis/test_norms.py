import math
from unittest.mock import patch

import pytest

from ultralab.analysis import (
    Box,
    QuadratureGrid,
    empirical_recursion_constant,
    iterate_norms,
    l2_norm,
    nabla_norm,
    npm_profile,
    npm_seminorm,
)
from ultralab.exceptions import ParameterError, PreconditionError, TermBudgetExceeded
from ultralab.pdo import parse_operator
from ultralab.symbolic import parse
from ultralab.weights import GevreyWeight


@pytest.fixture()
def square():
    return Box.parse("0,1,0,1")


@pytest.fixture()
def eigen():
    return parse("sin(pi*x1)*sin(pi*x2)", 2)


def test_l2_norm(square, eigen):
    assert l2_norm(eigen, square) == pytest.approx(0.5, rel=1e-8)


def test_l2_norm_complex(square):
    assert l2_norm(parse("exp(i*3*x1)", 2), square) == pytest.approx(1.0)


def test_l2_norm_empty(square, eigen):
    assert l2_norm(eigen, square.shrink(0.5)) == 0.0


class test_nabla_norm:
    @pytest.fixture()
    def linear(self):
        return parse("x1 + 2*x2", 2)

    def test_full_box(self, linear, square):
        assert nabla_norm(linear, 1, 0.0, square) == pytest.approx(3.0)

    def test_shrunk(self, linear, square):
        assert nabla_norm(linear, 1, 0.25, square) == pytest.approx(1.5)

    def test_empty(self, linear, square):
        assert nabla_norm(linear, 1, 0.5, square) == 0.0

    def test_order_zero(self, square):
        assert nabla_norm(parse("1"), 0, 0.0, square) == pytest.approx(1.0)

    def test_negative_order(self, linear, square):
        with pytest.raises(ParameterError):
            nabla_norm(linear, -1, 0.0, square)


class test_npm:
    def test_profile(self, square):
        u = parse("x1 + 2*x2", 2)
        value, delta = npm_profile(u, 1, 1, square, delta_grid=[0.1, 0.25, 0.4])
        assert value == pytest.approx(0.375)
        assert delta == 0.25

    def test_threads_agree(self, square, eigen, coarse_grid):
        grid = coarse_grid
        deltas = [0.05, 0.1, 0.2]
        assert npm_seminorm(eigen, 1, 2, square, deltas, grid, workers=3) == pytest.approx(
            npm_seminorm(eigen, 1, 2, square, deltas, grid)
        )

    @pytest.mark.parametrize("deltas", [[], [0.0, 0.5], [0.5, 1.5]])
    def test_invalid_grid(self, deltas, square, eigen):
        with pytest.raises(ParameterError):
            npm_profile(eigen, 1, 1, square, delta_grid=deltas)


class test_iterate_norms:
    def test_eigenfunction(self, laplacian, eigen, square):
        table = iterate_norms(laplacian, eigen, square, 2)
        lam = 2.0 * math.pi**2
        assert table.rows == pytest.approx([0.5, 0.5 * lam, 0.5 * lam**2], rel=1e-7)
        assert len(table) == 3
        assert not table.truncated

    def test_truncated(self, laplacian, eigen, square):
        with patch(
            "ultralab.analysis.norms.apply", side_effect=TermBudgetExceeded(10, 20)
        ):
            table = iterate_norms(laplacian, eigen, square, 4)
        assert len(table) == 1
        assert table.truncated
        assert "term budget 10" in table.reason
        assert table.as_dict()["requested"] == 4

    def test_negative(self, laplacian, eigen, square):
        with pytest.raises(ParameterError):
            iterate_norms(laplacian, eigen, square, -1)


class test_empirical_recursion_constant:
    @pytest.fixture()
    def kwargs(self):
        return {"delta_grid": [0.1, 0.2], "grid": QuadratureGrid(17)}

    def test_rows(self, laplacian, eigen, square, kwargs):
        rows = empirical_recursion_constant(
            eigen, laplacian, 2, 1.0, square, GevreyWeight(s=2), **kwargs
        )
        assert [r.p for r in rows] == [1, 2]
        for row in rows:
            assert row.status == "ok"
            assert 0 < row.constant < math.inf
            assert row.as_dict()["status"] == "ok"

    def test_degenerate(self, laplacian, square, kwargs):
        rows = empirical_recursion_constant(
            parse("x1", 2), laplacian, 1, 1.0, square, GevreyWeight(s=2), **kwargs
        )
        assert rows[0].status == "degenerate"
        assert rows[0].constant == 0.0

    def test_undefined(self, laplacian, square, kwargs):
        rows = empirical_recursion_constant(
            parse("0"), laplacian, 1, 1.0, square, GevreyWeight(s=2), **kwargs
        )
        assert rows[0].status == "undefined"
        assert rows[0].constant is None

    def test_not_elliptic(self, eigen, square, kwargs):
        with pytest.raises(PreconditionError):
            empirical_recursion_constant(
                eigen, parse_operator("D[2,0]"), 1, 1.0, square, GevreyWeight(s=2), **kwargs
            )

    def test_bad_k(self, laplacian, eigen, square, kwargs):
        with pytest.raises(ParameterError):
            empirical_recursion_constant(
                eigen, laplacian, 1, 0.0, square, GevreyWeight(s=2), **kwargs
            )
