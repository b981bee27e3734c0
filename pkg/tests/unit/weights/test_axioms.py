import pytest

from ultralab.weights import (
    GevreyWeight,
    SampleSpec,
    TableWeight,
    check_axioms,
    weight_from_spec,
)


@pytest.fixture(scope="module")
def gevrey_report():
    return check_axioms(GevreyWeight(s=2))


@pytest.mark.parametrize("axiom", ["monotone", "alpha", "alpha0", "gamma", "delta"])
def test_gevrey_axioms_hold(axiom, gevrey_report):
    assert gevrey_report[axiom].verdict == "holds"
    assert gevrey_report[axiom].ok


def test_gevrey_non_quasianalytic(gevrey_report):
    verdict = gevrey_report["beta"]
    assert verdict.verdict == "convergent"
    assert verdict.detail == "non-quasianalytic"
    assert verdict.constants["tail_exponent"] == pytest.approx(1.5, abs=0.01)


def test_report_as_dict(gevrey_report):
    d = gevrey_report.as_dict()
    assert d["weight"] == "gevrey:s=2"
    assert set(d["verdicts"]) == {"monotone", "alpha", "alpha0", "gamma", "delta", "beta"}
    assert gevrey_report.ok


def test_linear_weight_is_quasianalytic():
    report = check_axioms(TableWeight([0.0, 1.0], [0.0, 1.0]))
    assert report["beta"].verdict == "divergent"
    assert report["beta"].detail == "quasianalytic"
    assert report.ok


def test_explog_convergent():
    report = check_axioms(weight_from_spec("explog:alpha=0.5,beta=1"))
    assert report["beta"].verdict == "convergent"


def test_sample_spec_grid():
    spec = SampleSpec(t_min=1.0, t_max=100.0, points=3)
    assert list(spec.t_grid()) == pytest.approx([1.0, 10.0, 100.0])
