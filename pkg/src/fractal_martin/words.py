"""Finite and eventually periodic words over the alphabet ``1..N``.

A word is a ``bytes`` object whose items are the letters, so ``b""`` is the
empty word, slicing gives prefixes and ``+`` concatenates.  Byte order is
the lexicographic order used for every table in the package.
"""

from dataclasses import dataclass
from itertools import product
import re

Word = bytes

EMPTY: Word = b""


class InvalidWord(ValueError):
    pass


def word(*letters: int) -> Word:
    return bytes(letters)


def check_word(w: Word, n_letters: int) -> Word:
    for a in w:
        if not 1 <= a <= n_letters:
            raise InvalidWord(f"letter {a} outside alphabet 1..{n_letters}")
    return w


def parent(w: Word) -> Word:
    if not w:
        raise InvalidWord("the empty word has no parent")
    return w[:-1]


def last_letter(w: Word) -> int:
    if not w:
        raise InvalidWord("the empty word has no last letter")
    return w[-1]


def concat(v: Word, w: Word) -> Word:
    return v + w


def gap(v: Word, w: Word) -> int:
    return len(w) - len(v)


def enumerate_level(n: int, n_letters: int) -> list[Word]:
    """All words of length ``n`` in lexicographic order."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    return [bytes(t) for t in product(range(1, n_letters + 1), repeat=n)]


def enumerate_upto(n: int, n_letters: int) -> list[Word]:
    """All words of length at most ``n``, shortest first."""
    out = []
    for k in range(n + 1):
        out.extend(enumerate_level(k, n_letters))
    return out


def shortlex(w: Word):
    return (len(w), w)


def format_word(w: Word, n_letters: int) -> str:
    if not w:
        return "-"
    if n_letters <= 9:
        return "".join(str(a) for a in w)
    return ",".join(str(a) for a in w)


def parse_word(text: str, n_letters: int) -> Word:
    text = text.strip()
    if text in ("-", "", "∅"):
        return EMPTY
    if "," in text or n_letters > 9:
        parts = [t.strip() for t in text.split(",")]
        if not all(t.isdigit() for t in parts):
            raise InvalidWord(f"cannot parse word {text!r}")
        letters = [int(t) for t in parts]
    else:
        if not text.isdigit():
            raise InvalidWord(f"cannot parse word {text!r}")
        letters = [int(c) for c in text]
    if any(a > 255 for a in letters):
        raise InvalidWord(f"letter out of range in {text!r}")
    try:
        return check_word(bytes(letters), n_letters)
    except ValueError as exc:
        raise InvalidWord(str(exc)) from None


@dataclass(frozen=True)
class EventuallyPeriodic:
    """The infinite word ``head · period · period · ...``."""

    head: Word
    period: Word

    def __post_init__(self):
        if not self.period:
            raise InvalidWord("period must be non-empty")

    def prefix(self, n: int) -> Word:
        if n <= len(self.head):
            return self.head[:n]
        k = n - len(self.head)
        reps = -(-k // len(self.period))
        return self.head + (self.period * reps)[:k]

    def prefixes(self, n: int) -> list[Word]:
        """``[xi|_1, ..., xi|_n]``."""
        return [self.prefix(j) for j in range(1, n + 1)]

    def format(self, n_letters: int) -> str:
        head = format_word(self.head, n_letters) if self.head else ""
        sep = "," if n_letters > 9 and self.head else ""
        return f"{head}{sep}({format_word(self.period, n_letters)})"


@dataclass(frozen=True)
class ExplicitPrefixes:
    """An infinite word known only through a finite list of its prefixes."""

    prefix_list: tuple

    def __post_init__(self):
        for a, b in zip(self.prefix_list, self.prefix_list[1:]):
            if len(b) != len(a) + 1 or b[: len(a)] != a:
                raise InvalidWord("prefix list is not nested")

    def prefix(self, n: int) -> Word:
        if n == 0:
            return EMPTY
        for p in self.prefix_list:
            if len(p) == n:
                return p
        raise IndexError(f"prefix of length {n} not available")

    def prefixes(self, n: int) -> list[Word]:
        return [self.prefix(j) for j in range(1, n + 1)]


_PERIODIC = re.compile(r"^\s*([^()]*)\(([^()]+)\)\s*$")


def parse_infinite(text: str, n_letters: int) -> EventuallyPeriodic:
    """Parse ``"1(2)"`` as 1·2^∞ and ``"(12)"`` as (12)^∞."""
    m = _PERIODIC.match(text)
    if not m:
        raise InvalidWord(f"expected eventually periodic word like '1(2)', got {text!r}")
    head = m.group(1).strip().rstrip(",")
    return EventuallyPeriodic(parse_word(head, n_letters), parse_word(m.group(2), n_letters))
