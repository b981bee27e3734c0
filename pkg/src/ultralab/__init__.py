"""Ultradifferentiable function laboratory."""
from importlib.metadata import PackageNotFoundError, version

from .analysis import Box, GrowthReport, QuadratureGrid, membership_report  # noqa: E402
from .exceptions import UltralabError  # noqa: E402
from .metivier import MetivierParams, counterexample_report  # noqa: E402
from .pdo import LinearPDO, apply, compose, ellipticity_check, iterate, parse_operator  # noqa: E402
from .symbolic import Expr, differentiate, evaluate, parse, simplify  # noqa: E402
from .utils.logging import get_logger, setup_logging  # noqa: E402
from .weights import Weight, YoungConjugate, assoc_seq, check_prop21, weight_from_spec  # noqa: E402

__package_name__ = "ultra-lab"
try:
    __version__ = version(__package_name__)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"

__all__ = [
    "Box",
    "Expr",
    "GrowthReport",
    "LinearPDO",
    "MetivierParams",
    "QuadratureGrid",
    "UltralabError",
    "Weight",
    "YoungConjugate",
    "apply",
    "assoc_seq",
    "check_prop21",
    "compose",
    "counterexample_report",
    "differentiate",
    "ellipticity_check",
    "evaluate",
    "get_logger",
    "iterate",
    "membership_report",
    "parse",
    "parse_operator",
    "setup_logging",
    "simplify",
    "weight_from_spec",
]
