"""Guarded lambda-calculus toolkit: syntax, type checking, evaluation,
finite-index denotations, the adequacy relation and a compiler for
behavioural differential equations on streams."""

import sys

# terms are trees and most passes recurse over them; stream programs
# unfolded to a few dozen elements get deep
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

__version__ = "0.1.0"
