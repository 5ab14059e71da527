"""Zone-based reachability and refinement checking for multirate hybrid
interface automata whose states and actions carry Z schemas."""

from .dcm import DCM, INF, LE, LT, Bound, LowerBound, Relative, UpperBound
from .dsl import ModelSource, ValidationFailed, format_model, parse_model, parse_schema
from .errors import (
    CapacityError,
    IncompatibleContextError,
    InitializedConditionError,
    ModelError,
    MziaError,
    OracleCapacityError,
    ParseError,
    SchemaError,
    UndecidableFragmentError,
    UnsupportedRateError,
)
from .model import MZIA, ActionDecl, Location, RectConstraint, TransitionDecl, ValidationReport, validate_model
from .refinement import RefinementChecker, Verdict, Witness, rc
from .zonegraph import (
    SymState,
    ZoneAutomaton,
    build_zone_automaton,
    initial_symstate,
    post,
    simulate,
    synthesize_state_schema,
    trajectory_covered,
)
from .zschema import GUARDED, STRICT, ZSchema, conj, hide, rcl, rcz, tv

__all__ = [name for name in dir() if not name.startswith("_")]
