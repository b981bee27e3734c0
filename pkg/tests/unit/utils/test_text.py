import pytest

from ultralab.utils import text


@pytest.mark.parametrize(
    "choices,choice,expected",
    [
        (["foo", "bar", "baz"], "boo", "Did you mean foo?"),
        (["foo", "moo", "bar"], "boo", "Did you mean one of foo, moo?"),
        (["exp", "log", "sin", "cos"], "ecp", "Did you mean exp?"),
        (["x1", "x2", "rho"], "x", "Did you mean one of x1, x2?"),
        (["foo", "bar", "baz"], "xxx", ""),
    ],
)
def test_didyoumean(choices, choice, expected):
    assert text.didyoumean(choices, choice) == expected


@pytest.mark.parametrize(
    "s,max,expected",
    [
        ("gbump(1.5, x1, x2) * exp(i*rho*x2)", 12, "gbump(1.5..."),
        ("x1", 12, "x1"),
        ("x1 + x2", 0, "x1 + x2"),
    ],
)
def test_abbr(s, max, expected):
    assert text.abbr(s, max) == expected


@pytest.mark.parametrize(
    "n,s,suffix,expected",
    [
        (-2, "term", "s", "terms"),
        (-1, "term", "s", "terms"),
        (0, "term", "s", "terms"),
        (1, "term", "s", "term"),
        (2, "term", "s", "terms"),
        (2, "vertex", "es", "vertexes"),
    ],
)
def test_pluralize(n, s, suffix, expected):
    assert text.pluralize(n, s, suffix=suffix) == expected


@pytest.mark.parametrize(
    "alpha,expected",
    [
        ((2, 0), "2,0"),
        ((0, 0, 1), "0,0,1"),
        ((), ""),
    ],
)
def test_format_index(alpha, expected):
    assert text.format_index(alpha) == expected


@pytest.mark.parametrize(
    "s,expected",
    [
        ("0,1,-1,1", [0.0, 1.0, -1.0, 1.0]),
        (" 1e-3, 2.5 ", [1e-3, 2.5]),
        ("", []),
    ],
)
def test_parse_floats(s, expected):
    assert text.parse_floats(s) == expected


def test_parse_floats__garbage():
    with pytest.raises(ValueError):
        text.parse_floats("1,two")
