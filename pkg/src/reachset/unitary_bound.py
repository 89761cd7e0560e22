"""Universal bound on polarization transfer under unitary control.

Unitary conjugation permutes the spectrum of the deviation operator and
nothing more, so the diagonal states reachable from rho by unitaries alone
fill the convex polytope whose vertices are the distinct permutations of
rho's deviation spectrum.  The transfer efficiency toward a target
deviation sigma,

    kappa = Tr(E(rho) sigma) / Tr(sigma^2),

is maximized over unitaries by aligning the sorted spectra (von Neumann's
trace inequality); a channel-level kappa is defined only when the output is
proportional to sigma, with no unwanted components.

All computations here use traceless deviation parts; the identity component
never contributes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .diagonal import diag_labels, diag_slots
from .errors import ResidualTooLarge, ValidationError
from .pauli import CoherenceVector, build_basis, deviation_matrix


@dataclass(frozen=True)
class SpectrumPolytope:
    """Permutation polytope of a deviation spectrum.

    Attributes
    ----------
    vertices : ndarray, shape (V, 2^n)
        Distinct permutations of the deviation eigenvalues; every row has
        the same multiset of entries and zero sum.
    source_state : CoherenceVector
        The state whose spectrum generated the polytope.
    """

    vertices: np.ndarray
    source_state: CoherenceVector


def deviation_spectrum(v):
    """Eigenvalues of the traceless part of a state, descending order."""
    eigs = np.linalg.eigvalsh(deviation_matrix(v))
    return eigs[::-1]


def kappa_unitary_max(rho, sigma):
    """Best unitary transfer efficiency from rho onto direction sigma.

    Sorting both deviation spectra in descending order aligns them
    optimally, so

        kappa_max = <lambda_sorted(rho), lambda_sorted(sigma)> / Tr(sigma_dev^2).

    Raises
    ------
    ValidationError
        If sigma has no deviation part.
    """
    if rho.n != sigma.n:
        raise ValidationError("states have different qubit counts")
    s_norm_sq = 2 ** sigma.n * float(sigma.r @ sigma.r)
    if s_norm_sq <= 0.0:
        raise ValidationError("target direction must be nonzero")
    lam_rho = deviation_spectrum(rho)
    lam_sig = deviation_spectrum(sigma)
    return float(lam_rho @ lam_sig) / s_norm_sq


def kappa_unitary(rho, sigma, unitary_rep_matrix):
    """Transfer efficiency of one concrete unitary (given its vector rep)."""
    s_norm_sq = 2 ** sigma.n * float(sigma.r @ sigma.r)
    if s_norm_sq <= 0.0:
        raise ValidationError("target direction must be nonzero")
    moved = unitary_rep_matrix @ rho.r
    return 2 ** sigma.n * float(moved @ sigma.r) / s_norm_sq


def kappa_channel(output, sigma, tol=1e-6):
    """Projection coefficient of a channel output onto a target direction.

    The output must be proportional to sigma: the least-squares residual
    relative to |output| has to stay within `tol`, otherwise the transfer
    carries unwanted components and ResidualTooLarge is raised.
    """
    if output.n != sigma.n:
        raise ValidationError("states have different qubit counts")
    s_sq = float(sigma.r @ sigma.r)
    if s_sq <= 0.0:
        raise ValidationError("target direction must be nonzero")
    kappa = float(output.r @ sigma.r) / s_sq
    out_norm = np.linalg.norm(output.r)
    residual = np.linalg.norm(output.r - kappa * sigma.r)
    if residual > tol * max(out_norm, 1e-300):
        raise ResidualTooLarge(
            f"output deviates from the target direction by a relative "
            f"{residual / max(out_norm, 1e-300):.3e} (tolerance {tol})"
        )
    return kappa


def polytope_vertices(rho):
    """All distinct permutations of the deviation spectrum of rho."""
    lam = deviation_spectrum(rho)
    seen = set()
    rows = []
    from itertools import permutations

    for perm in permutations(range(len(lam))):
        row = lam[list(perm)]
        key = tuple(np.round(row, 12))
        if key not in seen:
            seen.add(key)
            rows.append(row)
    vertices = np.asarray(rows)
    vertices.setflags(write=False)
    return SpectrumPolytope(vertices=vertices, source_state=rho)


def diagonal_vertex_coords(polytope):
    """Vertices expressed in diagonal coordinates, shape (V, 2^n - 1).

    Each spectrum row becomes the coordinate vector of the diagonal matrix
    carrying it, x_i = <diag signs of slot i, spectrum>/2^n.
    """
    n = polytope.source_state.n
    basis = build_basis(n)
    signs = np.array(
        [np.diagonal(basis.matrices[k + 1]).real for k in diag_slots(n)]
    )
    return polytope.vertices @ signs.T / 2 ** n


def polytope_ray_exit(vertices_coords, direction):
    """Largest t with t * direction inside the convex hull of the vertices.

    Solved as a linear program in (t, convex weights).  Returns 0.0 when
    even the origin is not contained.
    """
    V = np.asarray(vertices_coords, dtype=float)
    d = np.asarray(direction, dtype=float)
    nv, m = V.shape
    if d.shape != (m,):
        raise ValidationError("direction and vertex dimensions differ")
    # variables: [t, w_1..w_nv]; maximize t s.t. V^T w - t d = 0, sum w = 1
    cost = np.zeros(nv + 1)
    cost[0] = -1.0
    A_eq = np.zeros((m + 1, nv + 1))
    A_eq[:m, 0] = -d
    A_eq[:m, 1:] = V.T
    A_eq[m, 1:] = 1.0
    b_eq = np.zeros(m + 1)
    b_eq[m] = 1.0
    bounds = [(0, None)] * (nv + 1)
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return 0.0
    return float(res.x[0])


def diag_coords_labels(n):
    """Convenience re-export of the diagonal coordinate labels."""
    return diag_labels(n)
