import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultralab.exceptions import ParameterError
from ultralab.weights import (
    GevreyWeight,
    YoungConjugate,
    conjugate_table,
    weight_from_spec,
    young_conjugate,
)


@pytest.fixture()
def gevrey():
    return GevreyWeight(s=2)


@pytest.fixture()
def conj(gevrey):
    return YoungConjugate(gevrey)


class test_YoungConjugate:
    @pytest.mark.parametrize("y", [0.1, 0.5, 0.75, 1.0, 2.0, 5.0, 20.0, 50.0])
    def test_matches_closed_form(self, y, gevrey, conj):
        assert conj(y) == pytest.approx(gevrey.conjugate_closed_form(y), rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("y", [1.0, 5.0, 20.0])
    def test_argmax(self, y, conj):
        assert conj.argmax(y) == pytest.approx(2.0 * math.log(2.0 * y), rel=1e-6)

    def test_zero(self, conj):
        assert conj.evaluate(0.0) == (0.0, 0.0)

    def test_flat_region_has_zero_argmax(self, conj):
        assert conj.evaluate(0.25) == (0.0, 0.0)

    @pytest.mark.parametrize("y", [-1.0, math.nan])
    def test_invalid_argument(self, y, conj):
        with pytest.raises(ParameterError):
            conj(y)

    def test_invalid_tolerance(self, gevrey):
        with pytest.raises(ParameterError):
            YoungConjugate(gevrey, tol=0.0)

    def test_memoized(self, conj):
        conj(3.0)
        conj(3.0)
        assert conj.memo.hits == 1
        assert conj.memo.misses == 1

    def test_values(self, gevrey, conj):
        assert list(conj.values([0.0, 1.0])) == pytest.approx(
            [0.0, gevrey.conjugate_closed_form(1.0)]
        )

    def test_repr(self, conj):
        assert repr(conj) == "<YoungConjugate: gevrey:s=2 tol=1e-12>"

    @pytest.mark.parametrize("y", [1.0, 10.0])
    def test_grid_oracle(self, y, gevrey, conj):
        assert conj.grid_oracle(y) == pytest.approx(gevrey.conjugate_closed_form(y), rel=1e-8)

    @pytest.mark.parametrize("spec", ["logpower:s=2", "sublog:beta=2", "explog:alpha=0.5,beta=1"])
    def test_search_agrees_with_oracle(self, spec):
        conj = YoungConjugate(weight_from_spec(spec))
        for y in (0.5, 2.0, 8.0):
            assert conj(y) == pytest.approx(conj.grid_oracle(y), rel=1e-7, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(y=st.floats(min_value=0.0, max_value=100.0))
    def test_property_closed_form(self, y):
        w = GevreyWeight(s=2)
        assert young_conjugate(w, y) == pytest.approx(
            w.conjugate_closed_form(y), rel=1e-9, abs=1e-9
        )

    @settings(max_examples=30, deadline=None)
    @given(
        a=st.floats(min_value=0.0, max_value=30.0),
        b=st.floats(min_value=0.0, max_value=30.0),
    )
    def test_property_convex(self, a, b):
        conj = YoungConjugate(weight_from_spec("explog:alpha=0.5,beta=1"))
        mid = conj((a + b) / 2.0)
        assert mid <= (conj(a) + conj(b)) / 2.0 + 1e-9 * (1.0 + abs(mid))


def test_conjugate_table(gevrey, conj):
    rows = conjugate_table(conj, [0.5, 2.0])
    assert [r.y for r in rows] == [0.5, 2.0]
    for row in rows:
        assert row.value == pytest.approx(gevrey.conjugate_closed_form(row.y), abs=1e-12)
        assert row.relative_gap < 1e-8
