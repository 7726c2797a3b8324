"""Collatz-type iteration on binary polynomials: A -> 1 + (x^2+x+1) A, with x and x+1 stripped."""

from .gf2poly import M, ONE, X, X1, ParseError, Poly, PolyError, ZeroPolynomialError, parse, render
from .collatz import (
    CollatzError, StepBudgetExceeded, TheoremViolation, TraceRecord,
    check_trace, degree_sequence, length, step, strip, trace,
)
from .families import Family, FamilySpec, Status, build, check, predicted_length, sweep

__version__ = '0.1.0'

__all__ = [
    'M', 'ONE', 'X', 'X1', 'ParseError', 'Poly', 'PolyError', 'ZeroPolynomialError', 'parse', 'render',
    'CollatzError', 'StepBudgetExceeded', 'TheoremViolation', 'TraceRecord',
    'check_trace', 'degree_sequence', 'length', 'step', 'strip', 'trace',
    'Family', 'FamilySpec', 'Status', 'build', 'check', 'predicted_length', 'sweep',
]
