"""
Integer 2x2 matrix helpers and the bounded GL(2, Z) conjugator search.
"""
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from utils.logging import get_logger

logger = get_logger(__name__)

IntMatrix = tuple[tuple[int, int], tuple[int, int]]

IDENTITY: IntMatrix = ((1, 0), (0, 1))


def as_matrix(m: Sequence[Sequence[int]]) -> IntMatrix:
    return ((int(m[0][0]), int(m[0][1])), (int(m[1][0]), int(m[1][1])))


def det(m: Sequence[Sequence[int]]) -> int:
    return int(m[0][0]) * int(m[1][1]) - int(m[0][1]) * int(m[1][0])


def trace(m: Sequence[Sequence[int]]) -> int:
    return int(m[0][0]) + int(m[1][1])


def is_unimodular(m: Sequence[Sequence[int]], orientation_preserving: bool = False) -> bool:
    d = det(m)
    return d == 1 if orientation_preserving else d in (1, -1)


def multiply(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def inverse(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Inverse over the integers; only defined for det = +-1."""
    d = det(m)
    if d not in (1, -1):
        raise ValueError(f"{m} is not invertible over the integers")
    # for det = +-1 the inverse is det * adjugate
    return ((d * m[1][1], -d * m[0][1]), (-d * m[1][0], d * m[0][0]))


def conjugate(p: Sequence[Sequence[int]], a: Sequence[Sequence[int]]) -> IntMatrix:
    """P A P^-1."""
    return multiply(multiply(p, a), inverse(p))


def apply_vector(m: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, int]:
    return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])


def same_up_to_sign(u: Sequence[int], v: Sequence[int]) -> bool:
    return tuple(u) == tuple(v) or tuple(u) == (-v[0], -v[1])


@lru_cache(maxsize=8)
def candidate_box(bound: int, orientation_preserving: bool = False) -> np.ndarray:
    """
    All unimodular matrices with entries in [-bound, bound] as an (N, 2, 2)
    array, ordered by max-norm, then l1-norm, then descending entries, so the
    identity comes first.
    """
    r = np.arange(-bound, bound + 1, dtype=np.int64)
    a, b, c, d = (axis.ravel() for axis in np.meshgrid(r, r, r, r, indexing="ij"))
    dets = a * d - b * c
    mask = dets == 1 if orientation_preserving else np.abs(dets) == 1
    flat = np.stack([a[mask], b[mask], c[mask], d[mask]], axis=1)
    linf = np.abs(flat).max(axis=1)
    l1 = np.abs(flat).sum(axis=1)
    order = np.lexsort((-flat[:, 3], -flat[:, 2], -flat[:, 1], -flat[:, 0], l1, linf))
    box = flat[order].reshape(-1, 2, 2)
    box.setflags(write=False)
    logger.debug(f"Built GL(2,Z) box of {len(box)} matrices for bound {bound}")
    return box


def conjugator_candidates(
    a: Sequence[Sequence[int]],
    a_prime: Sequence[Sequence[int]],
    bound: int,
    orientation_preserving: bool = False,
) -> np.ndarray:
    """Every P in the box with P A = A' P, in box order."""
    if trace(a) != trace(a_prime) or det(a) != det(a_prime):
        return np.empty((0, 2, 2), dtype=np.int64)
    box = candidate_box(bound, orientation_preserving)
    lhs = box @ np.asarray(a, dtype=np.int64)
    rhs = np.asarray(a_prime, dtype=np.int64) @ box
    return box[np.all(lhs == rhs, axis=(1, 2))]


def iter_conjugators(
    a: Sequence[Sequence[int]],
    a_prime: Sequence[Sequence[int]],
    bound: int,
    orientation_preserving: bool = False,
) -> Iterator[IntMatrix]:
    for p in conjugator_candidates(a, a_prime, bound, orientation_preserving):
        yield as_matrix(p.tolist())


def search_gl2z_conjugator(
    a: Sequence[Sequence[int]],
    a_prime: Sequence[Sequence[int]],
    bound: int,
    orientation_preserving: bool = False,
) -> Optional[IntMatrix]:
    """
    Find P with entries in [-bound, bound], det P = +-1 and P A = A' P.

    Args:
        a: Source matrix
        a_prime: Target matrix
        bound: Largest absolute entry allowed in P (at least 1)
        orientation_preserving: Only accept det P = +1

    Returns:
        The first conjugator in box order, or None
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    found = next(iter_conjugators(a, a_prime, bound, orientation_preserving), None)
    if found is None:
        logger.debug(f"No conjugator from {a} to {a_prime} within bound {bound}")
    return found
