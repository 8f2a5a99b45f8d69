"""Priority VASS toolkit: bounded semantics, regular expressions over VASS sections, run orderings, pumping and flatness checks."""

from .core import (
    Configuration,
    Edge,
    ModelError,
    Pvass,
    Run,
    RunError,
    Section,
    normalize,
    reach_set_bounded,
    run_from_word,
    section_eval_bounded,
    step,
    validate_model,
)

__all__ = [
    "Configuration",
    "Edge",
    "ModelError",
    "Pvass",
    "Run",
    "RunError",
    "Section",
    "normalize",
    "reach_set_bounded",
    "run_from_word",
    "section_eval_bounded",
    "step",
    "validate_model",
]
