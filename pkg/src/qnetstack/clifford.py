"""Single-qubit Clifford group used as the byproduct frame of graph states.

Elements are stored as indices into a table of 24 unitaries, each kept up to
global phase.  Index 0 is the identity.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_SQ2 = 1 / np.sqrt(2)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _canonical(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return u * (abs(flat[k]) / flat[k])


def _key(u: np.ndarray) -> tuple:
    c = _canonical(u)
    return tuple(np.round(c.ravel(), 8).tolist())


def _generate() -> list[np.ndarray]:
    h = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    group = [np.eye(2, dtype=complex)]
    seen = {_key(group[0])}
    frontier = list(group)
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = _canonical(g @ u)
                k = _key(v)
                if k not in seen:
                    seen.add(k)
                    group.append(v)
                    nxt.append(v)
        frontier = nxt
    return group


MATRICES: list[np.ndarray] = _generate()
assert len(MATRICES) == 24
_INDEX = {_key(u): i for i, u in enumerate(MATRICES)}


def index_of(u: np.ndarray) -> int:
    """Return the table index of unitary ``u`` (up to global phase)."""
    try:
        return _INDEX[_key(u)]
    except KeyError:
        raise ValueError("matrix is not a single-qubit Clifford") from None


def matrix(c: int) -> np.ndarray:
    return MATRICES[c]


@lru_cache(maxsize=None)
def mul(a: int, b: int) -> int:
    """Index of the product ``a @ b``."""
    return index_of(MATRICES[a] @ MATRICES[b])


@lru_cache(maxsize=None)
def inv(a: int) -> int:
    return index_of(MATRICES[a].conj().T)


@lru_cache(maxsize=None)
def conjugate_pauli(c: int, pauli: str) -> tuple[int, str]:
    """Return ``(sign, Q)`` with ``C^dagger P C = sign * Q``."""
    u = MATRICES[c]
    m = u.conj().T @ PAULI[pauli] @ u
    for q in "XYZ":
        for sign in (1, -1):
            if np.allclose(m, sign * PAULI[q], atol=1e-9):
                return sign, q
    raise AssertionError("Clifford conjugation left the Pauli group")


@lru_cache(maxsize=None)
def is_diagonal(c: int) -> bool:
    u = MATRICES[c]
    return abs(u[0, 1]) < 1e-9 and abs(u[1, 0]) < 1e-9


I = 0
X = index_of(PAULI["X"])
Y = index_of(PAULI["Y"])
Z = index_of(PAULI["Z"])
H = index_of(np.array([[1, 1], [1, -1]]) * _SQ2)
S = index_of(np.diag([1, 1j]))
SDG = index_of(np.diag([1, -1j]))
# sqrt(+-iP) = (I +- iP) / sqrt(2)
SQRT_IX = index_of((PAULI["I"] + 1j * PAULI["X"]) * _SQ2)
SQRT_MIX = index_of((PAULI["I"] - 1j * PAULI["X"]) * _SQ2)
SQRT_IY = index_of((PAULI["I"] + 1j * PAULI["Y"]) * _SQ2)
SQRT_MIY = index_of((PAULI["I"] - 1j * PAULI["Y"]) * _SQ2)
SQRT_IZ = index_of((PAULI["I"] + 1j * PAULI["Z"]) * _SQ2)
SQRT_MIZ = index_of((PAULI["I"] - 1j * PAULI["Z"]) * _SQ2)

NAMES = {I: "I", X: "X", Y: "Y", Z: "Z", H: "H", S: "S", SDG: "Sdg"}


def name(c: int) -> str:
    """Short printable name; non-Pauli elements fall back to ``C<index>``."""
    return NAMES.get(c, f"C{c}")
