"""Generalized Pauli basis algebra for n-qubit states.

States are represented by real coefficient vectors over the tensor-product
Pauli basis {I, X, Y, Z}^(x)n, ordered lexicographically with I first (II..I,
II..X, ..., ZZ..Z).  The basis is orthonormal in the normalized
Hilbert-Schmidt inner product,

    Tr(B_k B_j) / 2^n = delta_kj,

and a density matrix decomposes as

    rho = I/2^n + sum_{k>=1} r_k B_k,     r_k = Tr(rho B_k) / 2^n.

The identity coefficient is fixed by the unit trace, so the state lives in
the (4^n - 1)-dimensional real vector r (the traceless, "deviation" part).
Unitaries act on r as orthogonal matrices.

Polarization units: coefficients may be expressed in multiples of a thermal
polarization scale; nothing in this module depends on the choice.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ValidationError

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

MAX_QUBITS = 4

COHERENCE_VECTOR_ORDER = "lex-IXYZ"


def _readonly(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PauliBasis:
    """The ordered n-qubit Pauli basis.

    Attributes
    ----------
    n : int
        Qubit count.
    labels : tuple of str
        4^n strings over {I, X, Y, Z}, lexicographic, identity first.
    matrices : ndarray, shape (4^n, 2^n, 2^n)
        The basis operators B_k, Hermitian with entries in {0, +-1, +-i}.
    """

    n: int
    labels: tuple
    matrices: np.ndarray = field(repr=False)

    @property
    def dim(self):
        """Length of a coherence vector, 4^n - 1."""
        return 4 ** self.n - 1

    def index(self, label):
        """Position of `label` in the coherence vector (identity excluded)."""
        k = self.labels.index(label)
        if k == 0:
            raise ValidationError("the identity has no coherence-vector slot")
        return k - 1


@lru_cache(maxsize=None)
def build_basis(n):
    """Construct the n-qubit Pauli basis in lexicographic {I,X,Y,Z} order.

    Parameters
    ----------
    n : int
        Qubit count, 1 <= n <= 4 (matrices are dense 2^n x 2^n arrays).

    Returns
    -------
    PauliBasis
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValidationError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    labels = tuple("".join(p) for p in product("IXYZ", repeat=n))
    mats = np.empty((4 ** n, 2 ** n, 2 ** n), dtype=complex)
    for k, lab in enumerate(labels):
        m = _SINGLE[lab[0]]
        for ch in lab[1:]:
            m = np.kron(m, _SINGLE[ch])
        mats[k] = m
    return PauliBasis(n=n, labels=labels, matrices=_readonly(mats))


@dataclass(frozen=True)
class CoherenceVector:
    """Real expansion coefficients of a state's traceless part.

    `r[k]` is the coefficient of basis operator B_{k+1} (identity excluded)
    in the normalization r_k = Tr(rho B_k)/2^n.  Instances are immutable and
    safe to share across workers.
    """

    n: int
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (4 ** self.n - 1,):
            raise ValidationError(
                f"coherence vector for n={self.n} must have length "
                f"{4 ** self.n - 1}, got shape {r.shape}"
            )
        object.__setattr__(self, "r", _readonly(r.copy()))

    def to_json_dict(self):
        """JSON form: {"n": int, "order": "lex-IXYZ", "r": [floats]}."""
        return {"n": self.n, "order": COHERENCE_VECTOR_ORDER, "r": list(self.r)}

    @classmethod
    def from_json_dict(cls, d):
        order = d.get("order", COHERENCE_VECTOR_ORDER)
        if order != COHERENCE_VECTOR_ORDER:
            raise ValidationError(f"unsupported coefficient order {order!r}")
        return cls(n=int(d["n"]), r=np.asarray(d["r"], dtype=float))


@dataclass(frozen=True)
class UnitaryRep:
    """Orthogonal action of a unitary on coherence vectors.

    matrix[k, j] = Tr(B_k U B_j U^dag) / 2^n for k, j >= 1.  Conjugation
    rho -> U rho U^dag becomes r -> matrix @ r, and |r| is preserved.
    """

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        d = 4 ** self.n - 1
        if m.shape != (d, d):
            raise ValidationError(f"representation must be {d}x{d}, got {m.shape}")
        if not np.allclose(m.T @ m, np.eye(d), atol=1e-10):
            raise ValidationError("representation matrix is not orthogonal")
        object.__setattr__(self, "matrix", _readonly(m.copy()))


def encode(rho, n=None):
    """Expand a density matrix into its coherence vector.

    Parameters
    ----------
    rho : ndarray, shape (2^n, 2^n)
        Hermitian, unit-trace matrix (validated to 1e-10).
    n : int, optional
        Qubit count; inferred from the matrix dimension when omitted.

    Returns
    -------
    CoherenceVector
    """
    rho = np.asarray(rho, dtype=complex)
    if n is None:
        n = int(round(np.log2(rho.shape[0])))
    basis = build_basis(n)
    if rho.shape != (2 ** n, 2 ** n):
        raise ValidationError(f"expected a {2**n}x{2**n} matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValidationError("density matrix does not have unit trace")
    r = np.einsum("kab,ba->k", basis.matrices[1:], rho).real / 2 ** n
    return CoherenceVector(n=n, r=r)


def decode(v):
    """Reconstruct the density matrix I/2^n + sum_k r_k B_k."""
    basis = build_basis(v.n)
    rho = np.tensordot(v.r, basis.matrices[1:], axes=1)
    rho += np.eye(2 ** v.n) / 2 ** v.n
    return rho


def deviation_matrix(v):
    """The traceless operator sum_k r_k B_k (no identity component)."""
    basis = build_basis(v.n)
    return np.tensordot(v.r, basis.matrices[1:], axes=1)


def unitary_rep(U, n=None):
    """Represent a unitary as an orthogonal matrix on coherence vectors.

    Parameters
    ----------
    U : ndarray, shape (2^n, 2^n)
        Unitary matrix (validated to 1e-10).
    n : int, optional
        Qubit count; inferred when omitted.

    Returns
    -------
    UnitaryRep
    """
    U = np.asarray(U, dtype=complex)
    if n is None:
        n = int(round(np.log2(U.shape[0])))
    if U.shape != (2 ** n, 2 ** n):
        raise ValidationError(f"expected a {2**n}x{2**n} matrix, got {U.shape}")
    if not np.allclose(U.conj().T @ U, np.eye(2 ** n), atol=1e-10):
        raise ValidationError("matrix is not unitary")
    basis = build_basis(n)
    conj = np.einsum("ab,jbc,dc->jad", U, basis.matrices, U.conj())
    rep = np.einsum("kab,jba->kj", basis.matrices, conj).real / 2 ** n
    return UnitaryRep(n=n, matrix=rep[1:, 1:])
