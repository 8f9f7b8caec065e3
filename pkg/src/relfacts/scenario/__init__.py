"""Scenario description language and its interpreter."""
from .interpreter import ScenarioResult, ScenarioRuntimeError, interpret
from .syntax import ParseError, ScenarioAst, format_scenario, parse, tokenize

__all__ = [
    "ParseError",
    "ScenarioAst",
    "ScenarioResult",
    "ScenarioRuntimeError",
    "format_scenario",
    "interpret",
    "parse",
    "tokenize",
]
