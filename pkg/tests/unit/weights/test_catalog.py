import math

import numpy as np
import pytest

from ultralab.exceptions import ParameterError
from ultralab.weights import (
    CATALOG_DEFAULTS,
    ExpLogWeight,
    GevreyWeight,
    LogPowerWeight,
    SubLogWeight,
    TableWeight,
    catalog,
    weight_from_spec,
)


class test_GevreyWeight:
    @pytest.fixture()
    def w(self):
        return GevreyWeight(s=2)

    def test_normalized_vanishes_on_unit_interval(self, w):
        assert w.omega(0.0) == 0.0
        assert w.omega(0.5) == 0.0
        assert w.omega(1.0) == 0.0

    def test_omega(self, w):
        assert w.omega(4.0) == pytest.approx(1.0)
        assert w.omega(100.0) == pytest.approx(9.0)

    def test_raw(self):
        w = GevreyWeight(s=2, normalized=False)
        assert w.omega(4.0) == pytest.approx(2.0)
        assert w.phi(0.0) == pytest.approx(1.0)

    def test_phi_matches_omega(self, w):
        for t in (2.0, 10.0, 1e4):
            assert w.phi(math.log(t)) == pytest.approx(w.omega(t))

    def test_arrays(self, w):
        t = np.array([0.0, 0.5, 4.0, 100.0])
        assert w.omega_array(t) == pytest.approx([0.0, 0.0, 1.0, 9.0])
        x = np.array([-1.0, 0.0, math.log(4.0)])
        assert w.phi_array(x) == pytest.approx([0.0, 0.0, 1.0])

    def test_negative_argument(self, w):
        with pytest.raises(ParameterError):
            w.omega(-1.0)

    @pytest.mark.parametrize("s", [1.0, 0.5, -2.0])
    def test_invalid_order(self, s):
        with pytest.raises(ParameterError):
            GevreyWeight(s=s)

    def test_unknown_parameter(self):
        with pytest.raises(ParameterError, match="Did you mean s"):
            GevreyWeight(ss=2)

    def test_conjugate_closed_form(self, w):
        assert w.conjugate_closed_form(0.25) == 0.0
        assert w.conjugate_closed_form(0.5) == 0.0
        assert w.conjugate_closed_form(1.0) == pytest.approx(2 * (math.log(2) - 1) + 1)

    def test_spec_repr_eq(self, w):
        assert w.spec == "gevrey:s=2"
        assert repr(w) == "<GevreyWeight: gevrey:s=2>"
        assert repr(GevreyWeight(normalized=False)) == "<GevreyWeight: gevrey:s=2 raw>"
        assert w == GevreyWeight(s=2.0)
        assert w != GevreyWeight(s=2.0, normalized=False)
        assert len({w, GevreyWeight(s=2.0)}) == 1


class test_LogPowerWeight:
    @pytest.fixture()
    def w(self):
        return LogPowerWeight(s=2)

    def test_dead_branch(self, w):
        assert w.start == 4.0
        assert w.phi(3.0) == 0.0
        assert w.phi(4.0) == 0.0

    def test_continuous_at_start(self, w):
        assert w.phi(4.0 + 1e-9) == pytest.approx(0.0, abs=1e-8)

    def test_live_branch(self, w):
        expected = math.exp(3.0) / 6.0 - math.e**2 / 4.0
        assert w.phi(6.0) == pytest.approx(expected)
        assert w.phi_array(np.array([6.0])) == pytest.approx([expected])

    def test_increasing(self, w):
        values = w.phi_array(np.linspace(0.0, 40.0, 400))
        assert np.all(np.diff(values) >= 0)


def test_sublog_below_linear():
    w = SubLogWeight(beta=2, normalized=False)
    t = 1e6
    assert w.omega(t) == pytest.approx(t / math.log(math.e + t) ** 2)
    assert w.omega(t) < t


def test_explog_slower_than_powers():
    w = ExpLogWeight(alpha=0.5, beta=1.0, normalized=False)
    assert w.omega(1e30) < 1e30**0.2
    with pytest.raises(ParameterError):
        ExpLogWeight(alpha=1.0)
    with pytest.raises(ParameterError):
        ExpLogWeight(beta=0.0)


class test_TableWeight:
    @pytest.fixture()
    def w(self):
        return TableWeight([0.0, 1.0, 2.0], [0.0, 0.0, 1.0])

    def test_interpolates(self, w):
        assert w.omega(1.5) == pytest.approx(0.5)

    def test_extrapolates_last_slope(self, w):
        assert w.omega(3.0) == pytest.approx(2.0)

    def test_spec(self, w):
        assert w.spec == "custom:<table>"

    @pytest.mark.parametrize(
        "ts,values",
        [
            ([0.0], [0.0]),
            ([0.0, 0.0], [0.0, 1.0]),
            ([-1.0, 1.0], [0.0, 1.0]),
            ([0.0, 1.0], [0.0, math.nan]),
        ],
    )
    def test_invalid(self, ts, values):
        with pytest.raises(ParameterError):
            TableWeight(ts, values)

    def test_from_file(self, tmp_path):
        path = tmp_path / "omega.txt"
        path.write_text("0 0\n1 0\n4 1\n")
        w = weight_from_spec(f"custom:{path}")
        assert isinstance(w, TableWeight)
        assert w.omega(2.5) == pytest.approx(0.5)
        assert w.spec == f"custom:{path}"

    def test_from_file__bad_columns(self, tmp_path):
        path = tmp_path / "omega.txt"
        path.write_text("0 0 0\n1 1 1\n")
        with pytest.raises(ParameterError):
            TableWeight.from_file(path)

    def test_from_file__missing(self, tmp_path):
        with pytest.raises(ParameterError):
            TableWeight.from_file(tmp_path / "nope.txt")


class test_weight_from_spec:
    @pytest.mark.parametrize(
        "spec,cls,params",
        [
            ("gevrey:s=3", GevreyWeight, {"s": 3.0}),
            ("gevrey", GevreyWeight, {"s": 2.0}),
            (" Gevrey : s = 1.5 ", GevreyWeight, {"s": 1.5}),
            ("logpower:s=2", LogPowerWeight, {"s": 2.0}),
            ("sublog:beta=3", SubLogWeight, {"beta": 3.0}),
            ("explog:alpha=0.25,beta=2", ExpLogWeight, {"alpha": 0.25, "beta": 2.0}),
        ],
    )
    def test_parse(self, spec, cls, params):
        w = weight_from_spec(spec)
        assert isinstance(w, cls)
        assert w.params == params

    def test_unknown_kind(self):
        with pytest.raises(ParameterError, match="Did you mean gevrey"):
            weight_from_spec("gevrye:s=2")

    @pytest.mark.parametrize("spec", ["gevrey:s", "gevrey:s=two", "custom"])
    def test_malformed(self, spec):
        with pytest.raises(ParameterError):
            weight_from_spec(spec)

    def test_normalized_flag(self):
        assert not weight_from_spec("gevrey:s=2", normalized=False).normalized

    def test_spec_roundtrip(self):
        for spec in CATALOG_DEFAULTS:
            w = weight_from_spec(spec)
            assert weight_from_spec(w.spec) == w


def test_catalog():
    weights = catalog()
    assert [w.kind for w in weights] == ["gevrey", "logpower", "sublog", "explog"]
    assert all(w.normalized for w in weights)
    assert all(w.omega(1.0) == 0.0 for w in weights)
