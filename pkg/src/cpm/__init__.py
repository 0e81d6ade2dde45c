"""Composition operators for finite discrete probability distributions.

Low-dimensional factors are chained with right composition
``P1 ▷ P2 ▷ ... ▷ Pn`` to define a multidimensional model.  The package
provides the table algebra, both composition operators, perfectness checks,
local single-variable elimination on the chain, and iterative proportional
fitting.
"""

from .compose import anticipate, compose_left, compose_right, dominates, is_consistent
from .errors import (
    CardinalityMismatch,
    CheckDisagreement,
    CompositionError,
    CPMError,
    DominanceViolation,
    MarginalZeroDivision,
    NegativeEntry,
    NotNormalized,
    ParseError,
    ScopeMismatch,
    ShapeMismatch,
    TooLarge,
    UndeclaredVariable,
    UnknownVariable,
    VariableAbsent,
)
from .ipfp import IpfpRun, ipfp_run, ipfp_step
from .modelfile import parse_model, read_model, serialize_model, write_model
from .sequence import (
    EliminationResult,
    GeneratingSequence,
    PerfectnessReport,
    compose_sequence_left,
    compose_sequence_right,
    eliminate_variable,
    eliminate_variables,
    is_perfect,
)
from .tables import (
    DEFAULT_MAX_ENTRIES,
    Factor,
    Table,
    Tolerance,
    VariableRegistry,
    divide_by_marginal,
    make_factor,
    marginal,
    marginalize_out,
    max_abs_diff,
    multiply,
    oracle_joint,
    track_tables,
    uniform_factor,
)

__version__ = "0.1.0"
