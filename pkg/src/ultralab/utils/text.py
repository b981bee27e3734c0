"""Text helpers for error messages and report labels."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from typing import NamedTuple

from difflib import SequenceMatcher

__all__ = [
    "FuzzyMatch",
    "didyoumean",
    "fuzzymatch",
    "abbr",
    "pluralize",
    "format_index",
    "parse_floats",
]


class FuzzyMatch(NamedTuple):
    ratio: float
    value: str


def didyoumean(
    haystack: Iterable[str],
    needle: str,
    *,
    fmt_many: str = "Did you mean one of {alt}?",
    fmt_one: str = "Did you mean {alt}?",
    fmt_none: str = "",
    min_ratio: float = 0.6,
) -> str:
    """Generate message with helpful list of alternatives.

    Examples:
        >>> didyoumean(['exp', 'log', 'sin', 'cos'], 'ecp')
        'Did you mean exp?'

        >>> didyoumean(['x1', 'x2', 'rho'], 'x')
        'Did you mean one of x1, x2?'

        >>> didyoumean(['gevrey', 'logpower'], 'zzz')
        ''
    """
    alt = list(fuzzymatch(haystack, needle, min_ratio=min_ratio))
    if not alt:
        return fmt_none
    return (fmt_many if len(alt) > 1 else fmt_one).format(alt=", ".join(alt))


def fuzzymatch(
    haystack: Iterable[str], needle: str, *, min_ratio: float = 0.6
) -> Iterator[str]:
    for match in _fuzzymatch_iter(haystack, needle, min_ratio=min_ratio):
        yield match.value


def _fuzzymatch_iter(
    haystack: Iterable[str], needle: str, *, min_ratio: float = 0.6
) -> Iterator[FuzzyMatch]:
    for key in iter(haystack):
        ratio = SequenceMatcher(None, needle, key).ratio()
        if ratio >= min_ratio:
            yield FuzzyMatch(ratio, key)


def abbr(s: str, max: int, suffix: str = "...") -> str:
    """Abbreviate long expression text, keeping the head."""
    if max and len(s) > max:
        return s[: max - len(suffix)] + suffix
    return s


def pluralize(n: int, text: str, suffix: str = "s") -> str:
    """Pluralize term when n is not one."""
    if n != 1:
        return text + suffix
    return text


def format_index(alpha: Sequence[int]) -> str:
    """Render a multi-index the way operator text writes it: ``2,0``."""
    return ",".join(str(a) for a in alpha)


def parse_floats(text: str, *, sep: str = ",") -> list[float]:
    """Parse ``"0,1,-1,1"`` style lists used by CLI flags and config files."""
    text = text.strip()
    if not text:
        return []
    return [float(part) for part in text.split(sep)]
