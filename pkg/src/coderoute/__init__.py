"""Code-routing protocols for f-routing over span programs and secret sharing."""
from .compilers import (
    compile_formula,
    compile_garden_hose_example,
    compile_theorem1_indicator,
    compile_theorem2,
)
from .evaluators import eval_depth_first, eval_modp, get_owner, lemma3_transform
from .protocol import (
    BitRef,
    CodeSpec,
    ProtocolTape,
    ShareRecord,
    entanglement_cost,
    load_tape,
    save_tape,
    size_H,
    validate_and_build_tree,
    weighted_size_Htilde,
)
from .span import SpanProgram, decompose, evaluate, library_program, load_span_program, save_span_program

__version__ = "0.1.0"

__all__ = [
    "BitRef", "CodeSpec", "ProtocolTape", "ShareRecord", "SpanProgram",
    "compile_formula", "compile_garden_hose_example", "compile_theorem1_indicator", "compile_theorem2",
    "decompose", "entanglement_cost", "eval_depth_first", "eval_modp", "evaluate", "get_owner",
    "lemma3_transform", "library_program", "load_span_program", "load_tape", "save_span_program",
    "save_tape", "size_H", "validate_and_build_tree", "weighted_size_Htilde",
]
