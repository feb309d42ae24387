"""
Exact word algebra on finitely generated free groups.

Words are always freely reduced and stored run-length compressed as a tuple of
(generator, exponent) syllables: exponents are nonzero and adjacent syllables
never share a generator. Generators are 0-based and written x0, x1, ...

Word literal grammar (hand-written recursive descent reader):

    word   := factor*
    factor := atom ('^' integer)?
    atom   := 'x' digits | '(' word ')' | '1'

so "x0 x1^-1 x0^2", "(x0 x1)^3" and "1" (the empty word) are all valid.
"""
from __future__ import annotations

from typing import Any, Iterable, Iterator, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_core import core_schema

from utils.errors import RankMismatch, WordSyntaxError
from utils.logging import get_logger

logger = get_logger(__name__)

Letter = tuple[int, int]


class Word:
    __slots__ = ("syllables",)

    def __init__(self, syllables: Iterable[tuple[int, int]] = ()):
        stack: list[list[int]] = []
        for gen, exp in syllables:
            if gen < 0:
                raise ValueError(f"Negative generator index: {gen}")
            if exp == 0:
                continue
            if stack and stack[-1][0] == gen:
                stack[-1][1] += exp
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                stack.append([gen, exp])
        self.syllables: tuple[tuple[int, int], ...] = tuple((g, e) for g, e in stack)

    @classmethod
    def from_letters(cls, letters: Iterable[Letter]) -> "Word":
        return cls((gen, sign) for gen, sign in letters)

    @classmethod
    def generator(cls, index: int, power: int = 1) -> "Word":
        return cls([(index, power)])

    def letters(self) -> Iterator[Letter]:
        for gen, exp in self.syllables:
            sign = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                yield gen, sign

    def is_identity(self) -> bool:
        return not self.syllables

    def max_generator(self) -> int:
        return max((gen for gen, _ in self.syllables), default=-1)

    def exponent_sum(self, gen: int) -> int:
        return sum(exp for g, exp in self.syllables if g == gen)

    def inverse(self) -> "Word":
        return Word((gen, -exp) for gen, exp in reversed(self.syllables))

    def cyclically_reduced(self) -> "Word":
        syllables = list(self.syllables)
        while len(syllables) > 1 and syllables[0][0] == syllables[-1][0]:
            last = syllables.pop()
            syllables = list(Word([last] + syllables).syllables)
        return Word(syllables)

    def is_conjugate(self, other: "Word") -> bool:
        """True iff the two words are conjugate in the free group."""
        a = list(self.cyclically_reduced().letters())
        b = list(other.cyclically_reduced().letters())
        if len(a) != len(b):
            return False
        if not a:
            return True
        doubled = a + a
        return any(doubled[i:i + len(b)] == b for i in range(len(a)))

    def __invert__(self) -> "Word":
        return self.inverse()

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syllables + other.syllables)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** -n
        return Word(self.syllables * n)

    def __len__(self) -> int:
        return sum(abs(exp) for _, exp in self.syllables)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Word) and self.syllables == other.syllables

    def __hash__(self) -> int:
        return hash(self.syllables)

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        return " ".join(
            f"x{gen}" if exp == 1 else f"x{gen}^{exp}"
            for gen, exp in self.syllables
        )

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    @classmethod
    def _coerce(cls, value: Any) -> "Word":
        if isinstance(value, Word):
            return value
        if isinstance(value, str):
            return parse_word(value)
        raise ValueError(f"Expected a word literal, got {type(value).__name__}")

    @classmethod
    def __get_pydantic_core_schema__(cls, source: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            cls._coerce,
            serialization=core_schema.plain_serializer_function_ser_schema(str),
        )


class _WordReader:
    def __init__(self, text: str, rank: Optional[int]):
        self.text = text
        self.rank = rank
        self.pos = 0

    def read(self) -> Word:
        word = self._word()
        self._skip_ws()
        if self.pos != len(self.text):
            raise self._error(f"unexpected character {self.text[self.pos]!r}")
        return word

    def _error(self, message: str) -> WordSyntaxError:
        return WordSyntaxError(f"{message} in word {self.text!r}", column=self.pos + 1)

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _skip_ws(self) -> None:
        while self._peek().isspace():
            self.pos += 1

    def _word(self) -> Word:
        syllables: list[tuple[int, int]] = []
        while True:
            self._skip_ws()
            if self._peek() in ("", ")"):
                return Word(syllables)
            syllables.extend(self._factor().syllables)

    def _factor(self) -> Word:
        base = self._atom()
        self._skip_ws()
        if self._peek() == "^":
            self.pos += 1
            self._skip_ws()
            return base ** self._integer()
        return base

    def _atom(self) -> Word:
        char = self._peek()
        if char == "x":
            self.pos += 1
            start = self.pos
            while self._peek().isdigit():
                self.pos += 1
            if start == self.pos:
                raise self._error("generator index expected after 'x'")
            index = int(self.text[start:self.pos])
            if self.rank is not None and index >= self.rank:
                raise self._error(f"generator x{index} outside rank {self.rank}")
            return Word.generator(index)
        if char == "(":
            self.pos += 1
            inner = self._word()
            if self._peek() != ")":
                raise self._error("missing ')'")
            self.pos += 1
            return inner
        if char == "1":
            self.pos += 1
            return Word()
        if not char:
            raise self._error("unexpected end of input")
        raise self._error(f"unexpected character {char!r}")

    def _integer(self) -> int:
        start = self.pos
        if self._peek() in ("-", "+"):
            self.pos += 1
        digits_start = self.pos
        while self._peek().isdigit():
            self.pos += 1
        if digits_start == self.pos:
            raise self._error("integer exponent expected")
        return int(self.text[start:self.pos])


def parse_word(text: str, rank: Optional[int] = None) -> Word:
    """Read a word literal such as "x0 x1^-1 x0^2"."""
    return _WordReader(text, rank).read()


def reduce(word: Union[Word, Iterable[Letter]]) -> Word:
    """Free reduction of a word or of a raw (generator, sign) letter sequence."""
    if isinstance(word, Word):
        return Word(word.syllables)
    return Word.from_letters(word)


class FreeGroupAut(BaseModel):
    """Substitution on the generators of a free group of the given rank."""
    model_config = ConfigDict(frozen=True)

    rank: int = Field(ge=1)
    images: tuple[Word, ...]

    @model_validator(mode="after")
    def check_images(self) -> "FreeGroupAut":
        if len(self.images) != self.rank:
            raise ValueError(f"{len(self.images)} images given for rank {self.rank}")
        for index, image in enumerate(self.images):
            if image.max_generator() >= self.rank:
                raise ValueError(f"image of x{index} uses a generator outside rank {self.rank}")
        return self

    @classmethod
    def from_literals(cls, *literals: str) -> "FreeGroupAut":
        return cls(rank=len(literals), images=tuple(parse_word(text, len(literals)) for text in literals))

    def __str__(self) -> str:
        return ", ".join(f"x{i} -> {image}" for i, image in enumerate(self.images))


def identity_automorphism(rank: int) -> FreeGroupAut:
    return FreeGroupAut(rank=rank, images=tuple(Word.generator(i) for i in range(rank)))


def apply(phi: FreeGroupAut, word: Word) -> Word:
    """Image of a word under the substitution phi."""
    if word.max_generator() >= phi.rank:
        raise RankMismatch(f"word {word} uses generators outside rank {phi.rank}")
    syllables: list[tuple[int, int]] = []
    for gen, exp in word.syllables:
        image = phi.images[gen] if exp > 0 else phi.images[gen].inverse()
        for _ in range(abs(exp)):
            syllables.extend(image.syllables)
    return Word(syllables)


def compose(phi: FreeGroupAut, psi: FreeGroupAut) -> FreeGroupAut:
    """phi after psi: x -> phi(psi(x))."""
    if phi.rank != psi.rank:
        raise RankMismatch(f"cannot compose automorphisms of ranks {phi.rank} and {psi.rank}")
    return FreeGroupAut(rank=phi.rank, images=tuple(apply(phi, image) for image in psi.images))


def is_identity(phi: FreeGroupAut) -> bool:
    return all(image == Word.generator(i) for i, image in enumerate(phi.images))


def conjugacy_failures(
    t: FreeGroupAut,
    t_prime: FreeGroupAut,
    psi: FreeGroupAut,
    psi_inv: FreeGroupAut,
) -> list[str]:
    """Reasons why psi does not conjugate t to t_prime; empty when it does."""
    ranks = {t.rank, t_prime.rank, psi.rank, psi_inv.rank}
    if len(ranks) != 1:
        raise RankMismatch(f"automorphism ranks differ: {sorted(ranks)}")

    failures = []
    if not is_identity(compose(psi, psi_inv)):
        failures.append("psi . psi_inv is not the identity")
    if not is_identity(compose(psi_inv, psi)):
        failures.append("psi_inv . psi is not the identity")
    conjugated = compose(compose(psi, t), psi_inv)
    for index, (got, expected) in enumerate(zip(conjugated.images, t_prime.images)):
        if got != expected:
            failures.append(f"x{index}: psi T psi^-1 gives '{got}', expected '{expected}'")
    return failures


def verify_conjugacy(
    t: FreeGroupAut,
    t_prime: FreeGroupAut,
    psi: FreeGroupAut,
    psi_inv: FreeGroupAut,
) -> bool:
    return not conjugacy_failures(t, t_prime, psi, psi_inv)


def abelianization(phi: FreeGroupAut) -> list[list[int]]:
    """Entry (i, j) is the exponent sum of x_j in the image of x_i."""
    return [[image.exponent_sum(j) for j in range(phi.rank)] for image in phi.images]


def column_matrix(phi: FreeGroupAut) -> list[list[int]]:
    """
    Transpose of the abelianization: column j counts the letters of phi(x_j).

    In this form composition maps to the matrix product,
    column_matrix(compose(phi, psi)) == column_matrix(phi) @ column_matrix(psi).
    """
    rows = abelianization(phi)
    return [list(column) for column in zip(*rows)]


def commutator(a: Word, b: Word) -> Word:
    return a * b * a.inverse() * b.inverse()


def is_automorphism_rank2(phi: FreeGroupAut) -> bool:
    """
    Nielsen's criterion: an endomorphism of F2 is an automorphism iff it
    sends [x0, x1] to a conjugate of [x0, x1] or of its inverse.
    """
    if phi.rank != 2:
        raise RankMismatch("the commutator criterion only applies to rank 2")
    c = commutator(Word.generator(0), Word.generator(1))
    image = apply(phi, c)
    return image.is_conjugate(c) or image.is_conjugate(c.inverse())


# Elementary Nielsen moves on F2 and their column matrices:
#   ("upper", q):  x1 -> x0^q x1        [[1, q], [0, 1]]
#   ("lower", q):  x0 -> x0 x1^q        [[1, 0], [q, 1]]
#   ("swap", 0):   x0 <-> x1            [[0, 1], [1, 0]]
#   ("invert", i): x_i -> x_i^-1        diag with -1 at i
Move = tuple[str, int]


def _move_automorphism(move: Move) -> FreeGroupAut:
    kind, value = move
    x0, x1 = Word.generator(0), Word.generator(1)
    if kind == "upper":
        images = (x0, Word.generator(0, value) * x1)
    elif kind == "lower":
        images = (x0 * Word.generator(1, value), x1)
    elif kind == "swap":
        images = (x1, x0)
    elif kind == "invert":
        images = (x0.inverse(), x1) if value == 0 else (x0, x1.inverse())
    else:
        raise ValueError(f"Unknown move: {kind}")
    return FreeGroupAut(rank=2, images=images)


def _inverse_move(move: Move) -> Move:
    kind, value = move
    if kind in ("upper", "lower"):
        return kind, -value
    return move


def _apply_column_move(m: list[list[int]], move: Move) -> None:
    kind, value = move
    if kind == "upper":
        for row in m:
            row[1] += value * row[0]
    elif kind == "lower":
        for row in m:
            row[0] += value * row[1]
    elif kind == "swap":
        for row in m:
            row[0], row[1] = row[1], row[0]
    elif kind == "invert":
        for row in m:
            row[value] = -row[value]


def elementary_moves(matrix: list[list[int]]) -> list[Move]:
    """
    Column moves E1..Ek with matrix . E1 ... Ek == identity (Euclid on the
    first row). Raises ValueError unless the matrix is in GL(2, Z).
    """
    m = [list(map(int, row)) for row in matrix]
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] not in (1, -1):
        raise ValueError(f"{matrix} is not invertible over the integers")
    moves: list[Move] = []

    def push(move: Move) -> None:
        _apply_column_move(m, move)
        moves.append(move)

    while m[0][1] != 0:
        if m[0][0] == 0:
            push(("swap", 0))
            continue
        q = m[0][1] // m[0][0]
        if q:
            push(("upper", -q))
        if m[0][1] != 0:
            push(("swap", 0))
    if m[0][0] == -1:
        push(("invert", 0))
    if m[1][1] == -1:
        push(("invert", 1))
    if m[1][0] != 0:
        push(("lower", -m[1][0]))
    return moves


def lift_matrix(matrix: list[list[int]]) -> tuple[FreeGroupAut, FreeGroupAut]:
    """
    Lift P in GL(2, Z) to psi in Aut(F2) with column_matrix(psi) == P,
    together with its exact inverse.
    """
    moves = elementary_moves(matrix)
    # P = Ek^-1 ... E1^-1 and P^-1 = E1 ... Ek
    psi = identity_automorphism(2)
    for move in reversed(moves):
        psi = compose(psi, _move_automorphism(_inverse_move(move)))
    psi_inv = identity_automorphism(2)
    for move in moves:
        psi_inv = compose(psi_inv, _move_automorphism(move))
    logger.debug(f"Lifted {matrix} through {len(moves)} Nielsen moves")
    return psi, psi_inv
