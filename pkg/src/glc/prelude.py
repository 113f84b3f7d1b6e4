"""The bundled corpus of stream definitions, checked once per process."""

from __future__ import annotations

import functools
from importlib import resources

from glc.parser import SourceProgram, parse_program
from glc.typecheck import CheckedProgram, check_program

PRELUDE_FILE = "prelude.glc"


def prelude_source() -> str:
    return resources.files("glc").joinpath(PRELUDE_FILE).read_text(encoding="utf-8")


def load_prelude() -> SourceProgram:
    """The parsed prelude."""
    return parse_program(prelude_source())


@functools.lru_cache(maxsize=1)
def checked_prelude() -> CheckedProgram:
    """The elaborated prelude; its definitions also become sample terms."""
    from glc.samples import register_corpus

    checked = check_program(load_prelude())
    register_corpus({n: (d.type, d.term) for n, d in checked.definitions.items()})
    return checked
