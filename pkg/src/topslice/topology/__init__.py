from .filtration import (
    KIND_ORIGIN,
    KIND_SLICE,
    KIND_TERMINATION,
    FiltrationGraph,
    FiltVertex,
    build_filtration,
    eval_f,
)
from .persistence import (
    EMPTY_DIAGRAM,
    PersistenceDiagram,
    backend_name,
    dump_diagram,
    filter_diagram,
    load_diagram,
    persistence_h0,
)

__all__ = [
    "KIND_ORIGIN",
    "KIND_SLICE",
    "KIND_TERMINATION",
    "FiltrationGraph",
    "FiltVertex",
    "build_filtration",
    "eval_f",
    "EMPTY_DIAGRAM",
    "PersistenceDiagram",
    "backend_name",
    "dump_diagram",
    "filter_diagram",
    "load_diagram",
    "persistence_h0",
]
