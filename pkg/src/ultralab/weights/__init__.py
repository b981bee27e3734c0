"""Weight functions, Young conjugates and the associated sequence."""

from .axioms import AxiomReport, AxiomVerdict, SampleSpec, check_axioms
from .catalog import (
    CATALOG_DEFAULTS,
    ExpLogWeight,
    GevreyWeight,
    LogPowerWeight,
    SubLogWeight,
    TableWeight,
    Weight,
    catalog,
    weight_from_spec,
)
from .conjugate import ConjugateRow, YoungConjugate, conjugate_table, young_conjugate
from .sequences import (
    DEFAULT_LADDER,
    AssocSeqValue,
    Prop21Report,
    ShiftBound,
    Violation,
    assoc_seq,
    bound_shift,
    check_prop21,
    dyadic_ladder,
)

__all__ = [
    "AssocSeqValue",
    "AxiomReport",
    "AxiomVerdict",
    "CATALOG_DEFAULTS",
    "ConjugateRow",
    "DEFAULT_LADDER",
    "ExpLogWeight",
    "GevreyWeight",
    "LogPowerWeight",
    "Prop21Report",
    "SampleSpec",
    "ShiftBound",
    "SubLogWeight",
    "TableWeight",
    "Violation",
    "Weight",
    "YoungConjugate",
    "assoc_seq",
    "bound_shift",
    "catalog",
    "check_axioms",
    "check_prop21",
    "conjugate_table",
    "dyadic_ladder",
    "weight_from_spec",
    "young_conjugate",
]
