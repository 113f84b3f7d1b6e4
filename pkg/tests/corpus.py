"""The prelude corpus and the probe terms built from it, shared by the tests."""

from __future__ import annotations

import functools

from glc.parser import parse_term, parse_type
from glc.prelude import checked_prelude
from glc.syntax import Term, Type
from glc.typecheck import elaborate, inline

# guarded streams of the corpus, as expressions over prelude names
GUARDED_STREAMS = [
    "nats",
    "toggle",
    "paperfolds",
    "zeros",
    "rho 4",
    "plus_g nats toggle",
    "times_g toggle nats",
    "map_g (\\n. succ n) toggle",
    "interleave nats (next toggle)",
    "iterate (next (\\n. n + 2)) 1",
    "every2nd (box iota. nats)",
    "unbox (tl (box iota. paperfolds))",
]

# coinductive streams (type Str)
BOXED_STREAMS = [
    "box iota. nats",
    "box iota. toggle",
    "tl (box iota. nats)",
    "every2nd_box (box iota. nats)",
    "plus (box iota. nats) (box iota. toggle)",
    "lim (box iota. map_g (\\n. n * 3)) (box iota. nats)",
]

# the first elements of each stream above, computed by hand (times is convolution)
GUARDED_PREFIXES = {
    "nats": [0, 1, 2],
    "toggle": [1, 0, 1],
    "paperfolds": [1, 1, 0],
    "zeros": [0, 0, 0],
    "rho 4": [4, 0, 0],
    "plus_g nats toggle": [1, 1, 3],
    "times_g toggle nats": [0, 1, 2],
    "map_g (\\n. succ n) toggle": [2, 1, 2],
    "interleave nats (next toggle)": [0, 1, 1],
    "iterate (next (\\n. n + 2)) 1": [1, 3, 5],
    "every2nd (box iota. nats)": [0, 2, 4],
    "unbox (tl (box iota. paperfolds))": [1, 0, 1],
}
BOXED_PREFIXES = {
    "box iota. nats": [0, 1, 2],
    "box iota. toggle": [1, 0, 1],
    "tl (box iota. nats)": [1, 2, 3],
    "every2nd_box (box iota. nats)": [0, 2, 4],
    "plus (box iota. nats) (box iota. toggle)": [1, 1, 3],
    "lim (box iota. map_g (\\n. n * 3)) (box iota. nats)": [0, 3, 6],
}


def nat_probes() -> list[tuple[str, int]]:
    """Closed ``Nat`` observations of corpus streams with their expected values."""
    out = []
    for s, prefix in GUARDED_PREFIXES.items():
        out.append((f"hdg ({s})", prefix[0]))
        out.append((f"prev (second_g ({s}))", prefix[1]))
        out.append((f"prev (prev (third_g ({s})))", prefix[2]))
        out.append((f"second (box iota. {s})", prefix[1]))
    for s, prefix in BOXED_PREFIXES.items():
        out.append((f"hd ({s})", prefix[0]))
        out.append((f"second ({s})", prefix[1]))
        out.append((f"third ({s})", prefix[2]))
    out += [
        ("(\\x. x) 0", 0),
        ("fst <3, toggle>", 3),
        ("case in1 0 of a. a ; b. succ b", 0),
        ("unbox (box_nat 5)", 5),
        ("case box_sum_split (box iota. in1 2) of a. unbox a ; b. 7", 2),
    ]
    return out


@functools.lru_cache(maxsize=None)
def prelude():
    return checked_prelude()


def elab(src: str, expected: str | None = None) -> tuple[Term, Type]:
    """Parse an expression, inline prelude names and elaborate it."""
    p = prelude()
    env = {n: d.term for n, d in p.definitions.items()}
    term = inline(parse_term(src), env)
    exp = parse_type(expected, dict(p.aliases)) if expected else None
    return elaborate({}, term, exp)


def ty(src: str) -> Type:
    return parse_type(src, dict(prelude().aliases))


def corpus_terms() -> list[tuple[str, Term, Type]]:
    """Every prelude definition with its elaborated term and declared type."""
    p = prelude()
    return [(n, d.term, d.type) for n, d in p.definitions.items()]
