"""Reduced words over involution letters Y_i and invertible letters Z_i / Z_i*.

A word is a tuple of letters. The empty tuple is the identity word.  Reduction
removes adjacent Y_k Y_k, Z_k Z_k* and Z_k* Z_k pairs until none remain; the
result is unique regardless of cancellation order.

Canonical letter order is Y1 < ... < Yd < Z1 < Z1* < ... < Ze*; words are
compared length first, then lexicographically in that letter order.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, NamedTuple

from .errors import InputError


class Kind(IntEnum):
    Y = 0
    Z = 1
    ZSTAR = 2


class Letter(NamedTuple):
    kind: Kind
    index: int  # 1-based

    def adjoint(self) -> "Letter":
        if self.kind == Kind.Z:
            return Letter(Kind.ZSTAR, self.index)
        if self.kind == Kind.ZSTAR:
            return Letter(Kind.Z, self.index)
        return self

    def order_key(self) -> int:
        """Position in the canonical letter order; requires a signature to be total,
        but Y letters always precede Z letters, so a (kind-aware) pair works."""
        if self.kind == Kind.Y:
            return self.index - 1
        # Z_k -> even offset, Z_k* -> odd offset, after all Y letters.
        base = 2 * (self.index - 1)
        return base if self.kind == Kind.Z else base + 1

    def __str__(self) -> str:
        if self.kind == Kind.Y:
            return f"Y{self.index}"
        if self.kind == Kind.Z:
            return f"Z{self.index}"
        return f"Z{self.index}*"


Word = tuple  # tuple[Letter, ...]

IDENTITY: Word = ()


def _cancels(a: Letter, b: Letter) -> bool:
    if a.index != b.index:
        return False
    if a.kind == Kind.Y and b.kind == Kind.Y:
        return True
    return (a.kind == Kind.Z and b.kind == Kind.ZSTAR) or (
        a.kind == Kind.ZSTAR and b.kind == Kind.Z
    )


def reduce_word(word: Iterable[Letter]) -> Word:
    """Unique reduced form of a word; total and idempotent."""
    stack: list[Letter] = []
    for letter in word:
        if stack and _cancels(stack[-1], letter):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def is_reduced(word: Word) -> bool:
    return all(not _cancels(a, b) for a, b in zip(word, word[1:]))


def word_adjoint(word: Word) -> Word:
    """Adjointed reverse: (uv)* = v* u*, Y* = Y, Z* <-> Z."""
    return tuple(letter.adjoint() for letter in reversed(word))


def concat(u: Word, v: Word) -> Word:
    """Reduced product u·v."""
    return reduce_word(u + v)


def word_key(word: Word):
    """Length-lexicographic sort key over the canonical letter order.

    Y letters compare below Z letters of any index, matching
    Y1 < ... < Yd < Z1 < Z1* < ... < Ze* for every valid signature.
    """
    return (len(word), tuple((letter.kind != Kind.Y, letter.order_key()) for letter in word))


def validate_word(word: Word, d: int, e: int) -> None:
    for letter in word:
        if letter.index < 1:
            raise InputError(f"letter {letter} has non-positive index")
        if letter.kind == Kind.Y and letter.index > d:
            raise InputError(f"letter {letter} outside signature (d={d})")
        if letter.kind != Kind.Y and letter.index > e:
            raise InputError(f"letter {letter} outside signature (e={e})")


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(str(letter) for letter in word)


def parse_letter(token: str) -> Letter:
    """Parse a single token: Y<k>, Z<k> or Z<k>*."""
    original = token
    star = token.endswith("*")
    if star:
        token = token[:-1]
    if len(token) < 2 or token[0] not in "YZ" or not token[1:].isdigit():
        raise InputError(f"bad letter token {original!r}")
    index = int(token[1:])
    if token[0] == "Y":
        if star:
            raise InputError(f"bad letter token {original!r}: Y letters are self-adjoint")
        return Letter(Kind.Y, index)
    return Letter(Kind.ZSTAR if star else Kind.Z, index)


def parse_word(text: str) -> Word:
    """Parse a whitespace-separated word; the literal '1' is the empty word."""
    tokens = text.split()
    if tokens == ["1"]:
        return IDENTITY
    return tuple(parse_letter(token) for token in tokens)


def all_letters(d: int, e: int) -> list[Letter]:
    """Every letter of the signature, in canonical order."""
    letters = [Letter(Kind.Y, k) for k in range(1, d + 1)]
    for k in range(1, e + 1):
        letters.append(Letter(Kind.Z, k))
        letters.append(Letter(Kind.ZSTAR, k))
    return letters


def enumerate_reduced_words(d: int, e: int, max_len: int):
    """Yield all reduced words of length <= max_len in canonical order."""
    level: list[Word] = [IDENTITY]
    yield IDENTITY
    letters = all_letters(d, e)
    for _ in range(max_len):
        nxt = []
        for word in level:
            for letter in letters:
                if word and _cancels(word[-1], letter):
                    continue
                nxt.append(word + (letter,))
        nxt.sort(key=word_key)
        yield from nxt
        level = nxt
