"""Open-system state-engineering protocols for the two-qubit register.

Periodic sequences alternate instantaneous gates with periods of free
relaxation.  One period composes, in chronological order, the exact affine
relaxation propagators and the orthogonal gate representations into an
affine map x -> M x + c on the full coherence space; attracting fixed
points (spectral radius of M below one) are the engineered steady states.

The polarization-averaging sequence [tau - V] uses the cyclic coordinate
permutation V: (x1, x2, x3) -> (x2, x3, x1); its fixed point approaches the
equal-coefficient direction as tau -> 0.  Conjugating the period with the
basis-change gate W (Hadamard on the carbon followed by a CNOT) turns the
same averaging core into a preparer of the maximally entangled state: the
period W o map_PPS o W^T has fixed point W applied to the PPS fixed point,
exactly.

Saturating one spin (strong resonant irradiation) is modeled by clamping
every coordinate that involves that spin to zero and solving the remaining
linear steady state; cross-relaxation then overpolarizes the other spin.

For robustness studies the gates are compiled from an explicit pulse-level
decomposition (single-spin rotations plus scalar-coupling delays) whose
rotation angles scale with per-channel amplitude errors.  The default
decomposition wraps every rotation in a BB1 composite, which suppresses
amplitude miscalibration to third order; a plain uncompensated variant is
available for comparison.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .diagonal import DiagonalVector, diag_slots, project
from .dynamics import relax_propagator
from .errors import NoUniqueFixedPoint, ValidationError
from .pauli import CoherenceVector, build_basis, unitary_rep, _readonly
from .unitary_bound import kappa_channel
from .chloroform import TrajectorySample

# ---------------------------------------------------------------------------
# sequence steps


@dataclass(frozen=True)
class RelaxStep:
    """Free relaxation for tau seconds."""

    tau: float

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 0:
            raise ValidationError("relaxation time must be finite and >= 0")


@dataclass(frozen=True)
class GateStep:
    """Instantaneous gate, stored as its orthogonal coherence-space action."""

    rep: np.ndarray
    name: str = "gate"

    def __post_init__(self):
        rep = np.asarray(self.rep, dtype=float)
        if rep.ndim != 2 or rep.shape[0] != rep.shape[1]:
            raise ValidationError("gate representation must be square")
        if not np.allclose(rep.T @ rep, np.eye(len(rep)), atol=1e-9):
            raise ValidationError(f"gate {self.name!r} is not orthogonal")
        object.__setattr__(self, "rep", _readonly(rep.copy()))


def gate_step(unitary, name="gate", n=None):
    """GateStep from a Hilbert-space unitary."""
    return GateStep(rep=unitary_rep(unitary, n=n).matrix, name=name)


@dataclass(frozen=True)
class PeriodicSequence:
    """Ordered steps of one period, iterated `repeat` times."""

    steps: tuple
    repeat: int = 1

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValidationError("sequence must contain at least one step")
        for s in steps:
            if not isinstance(s, (RelaxStep, GateStep)):
                raise ValidationError(f"unsupported step {s!r}")
        if self.repeat < 1:
            raise ValidationError("repeat count must be >= 1")
        object.__setattr__(self, "steps", steps)

    @property
    def period_duration(self):
        return sum(s.tau for s in self.steps if isinstance(s, RelaxStep))


# ---------------------------------------------------------------------------
# standard gates

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def averaging_permutation():
    """Unitary whose diagonal action is (x1, x2, x3) -> (x2, x3, x1).

    As a permutation of the computational basis it is the 3-cycle
    |01> -> |11> -> |10> -> |01>, fixing |00>.
    """
    P = np.zeros((4, 4), dtype=complex)
    for src, dst in [(0, 0), (1, 3), (2, 1), (3, 2)]:
        P[dst, src] = 1.0
    return P


def bell_basis_change():
    """W = CNOT(C -> H) . (Hadamard on C); maps |00> to the Bell state."""
    cnot = np.zeros((4, 4), dtype=complex)
    cnot[0, 0] = cnot[1, 1] = 1.0
    cnot[2, 3] = cnot[3, 2] = 1.0
    return cnot @ np.kron(_HADAMARD, np.eye(2))


def pps_direction():
    """Unit-effective-purity deviation of the pseudo-pure target.

    The state II/4 + (eta/4)(ZI + IZ + ZZ) has deviation coefficients
    eta/4 on each diagonal slot; this returns the eta = 1 direction.
    """
    basis = build_basis(2)
    r = np.zeros(basis.dim)
    for lab in ("ZI", "IZ", "ZZ"):
        r[basis.index(lab)] = 0.25
    return CoherenceVector(n=2, r=r)


def bell_direction():
    """Deviation direction of the pseudo-Bell target, W applied to PPS."""
    wrep = unitary_rep(bell_basis_change()).matrix
    return CoherenceVector(n=2, r=wrep @ pps_direction().r)


def pps_sequence(tau, repeat=1, gate_duration=0.0):
    """The averaging period [tau - V]: relax, then permute coefficients.

    gate_duration > 0 appends an extra relaxation step after the gate to
    model a non-instantaneous implementation; disabled by default.
    """
    steps = [RelaxStep(tau), gate_step(averaging_permutation(), "V")]
    if gate_duration > 0.0:
        steps.append(RelaxStep(gate_duration))
    return PeriodicSequence(steps=tuple(steps), repeat=repeat)


def bell_sequence(tau, repeat=1, gate_duration=0.0):
    """The conjugated period: W^T first, averaging core, W last.

    Built so that the one-period map is exactly W o map_PPS o W^T, making
    the fixed point the W image of the averaging fixed point.
    """
    wrep = unitary_rep(bell_basis_change()).matrix
    steps = [GateStep(rep=wrep.T, name="Wt"), RelaxStep(tau),
             gate_step(averaging_permutation(), "V")]
    if gate_duration > 0.0:
        steps.append(RelaxStep(gate_duration))
    steps.append(GateStep(rep=wrep, name="W"))
    return PeriodicSequence(steps=tuple(steps), repeat=repeat)


# ---------------------------------------------------------------------------
# period map and fixed points


def one_period_map(gen, seq):
    """Compose one period into the affine map x -> M x + c."""
    d = gen.dim
    M = np.eye(d)
    c = np.zeros(d)
    for s in seq.steps:
        if isinstance(s, RelaxStep):
            E, b = relax_propagator(gen, s.tau)
            M = E @ M
            c = E @ c + b
        else:
            if s.rep.shape[0] != d:
                raise ValidationError("gate dimension does not match generator")
            M = s.rep @ M
            c = s.rep @ c
    return M, c


def spectral_radius(M):
    return float(np.abs(np.linalg.eigvals(M)).max())


@dataclass(frozen=True)
class FixedPointReport:
    """Fixed point of a periodic sequence and its quality diagnostics.

    eta_eff is the projection coefficient onto the target direction (None
    without a target); theta the angle between the fixed-point deviation
    and the target direction, radians.
    """

    x_star: CoherenceVector
    spectral_radius: float
    eta_eff: float = None
    theta: float = None


def fixed_point(gen, seq, target=None, kappa_tol=0.12):
    """Solve x* = M x* + c and report convergence and target alignment.

    Parameters
    ----------
    gen : AffineGenerator
    seq : PeriodicSequence
    target : CoherenceVector, optional
        Deviation direction for eta/theta diagnostics (e.g. pps_direction()).
    kappa_tol : float
        Proportionality tolerance forwarded to the channel projection.

    Raises
    ------
    NoUniqueFixedPoint
        If the one-period map has a unit eigenvalue.
    """
    M, c = one_period_map(gen, seq)
    sr = spectral_radius(M)
    eye_minus = np.eye(len(M)) - M
    if np.linalg.cond(eye_minus) > 1e12:
        raise NoUniqueFixedPoint(
            f"one-period map has an eigenvalue at 1 (spectral radius {sr:.6f})"
        )
    x = np.linalg.solve(eye_minus, c)
    x_star = CoherenceVector(n=gen.n, r=x)
    eta = theta = None
    if target is not None:
        eta = kappa_channel(x_star, target, tol=kappa_tol)
        theta = angle_to(x_star, target)
    return FixedPointReport(
        x_star=x_star, spectral_radius=sr, eta_eff=eta, theta=theta
    )


def angle_to(state, target):
    """Angle between two deviation vectors, radians."""
    nx, nt = np.linalg.norm(state.r), np.linalg.norm(target.r)
    if nx == 0.0 or nt == 0.0:
        return float("nan")
    cosine = float(state.r @ target.r) / (nx * nt)
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


@dataclass(frozen=True)
class SequenceResult:
    """Recorded periodic trajectory with per-period target diagnostics."""

    trajectory: TrajectorySample
    states: np.ndarray
    eta: np.ndarray
    theta: np.ndarray


def simulate_sequence(gen, seq, start, record_every=1, target=None):
    """Iterate the one-period map, recording states every few periods.

    Parameters
    ----------
    gen : AffineGenerator
    seq : PeriodicSequence
        `seq.repeat` is the number of periods simulated.
    start : CoherenceVector
    record_every : int
        Record every k-th period (the final period is always recorded).
    target : CoherenceVector, optional
        Direction for the per-period (eta, theta) diagnostics; eta here is
        the plain projection coefficient (no proportionality requirement).

    Returns
    -------
    SequenceResult
    """
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")
    M, c = one_period_map(gen, seq)
    basis = build_basis(gen.n)
    x = start.r.copy()
    dt = seq.period_duration if seq.period_duration > 0 else 1.0
    times, rows = [], []
    for m in range(1, seq.repeat + 1):
        x = M @ x + c
        if m % record_every == 0 or m == seq.repeat:
            times.append(m * dt)
            rows.append(x.copy())
    states = np.asarray(rows)
    if target is not None:
        t_sq = float(target.r @ target.r)
        eta = states @ target.r / t_sq
        norms = np.linalg.norm(states, axis=1)
        cosine = states @ target.r / np.maximum(
            norms * np.linalg.norm(target.r), 1e-300
        )
        theta = np.arccos(np.clip(cosine, -1.0, 1.0))
    else:
        eta = np.full(len(states), np.nan)
        theta = np.full(len(states), np.nan)
    observables = {
        lab: states[:, k] for k, lab in enumerate(basis.labels[1:])
    }
    traj = TrajectorySample(times=np.asarray(times), observables=observables)
    return SequenceResult(trajectory=traj, states=states, eta=eta, theta=theta)


# ---------------------------------------------------------------------------
# spin saturation


def noe_steady_state(gen, saturated):
    """Steady state under continuous saturation of one spin.

    Every coordinate whose label involves the saturated spin (any non-I
    operator at its position) is clamped to zero; the remaining linear
    system is solved for its stationary point.  Cross-relaxation feeds the
    untouched spin, which can exceed its thermal polarization.

    Parameters
    ----------
    gen : AffineGenerator (two-qubit)
    saturated : str
        "C" (first position) or "H" (second position).

    Returns
    -------
    DiagonalVector
    """
    if gen.n != 2:
        raise ValidationError("saturation model is defined for two qubits")
    pos = {"C": 0, "H": 1}.get(saturated)
    if pos is None:
        raise ValidationError('saturated spin must be "C" or "H"')
    basis = build_basis(2)
    free = [
        k - 1
        for k, lab in enumerate(basis.labels)
        if k > 0 and lab[pos] == "I"
    ]
    A = (gen.Hmat - gen.Rmat)[np.ix_(free, free)]
    x_free = np.linalg.solve(-A, gen.v[free])
    full = np.zeros(gen.dim)
    full[free] = x_free
    return project(CoherenceVector(n=2, r=full))


# ---------------------------------------------------------------------------
# pulse-level gate model


@dataclass(frozen=True)
class XYPulse:
    """Rotation about cos(phase) X + sin(phase) Y on one channel."""

    channel: str
    phase: float
    angle: float


@dataclass(frozen=True)
class ZPulse:
    """Rotation about Z on one channel."""

    channel: str
    angle: float


@dataclass(frozen=True)
class CouplingDelay:
    """Free scalar-coupling evolution exp(-i angle/2 ZZ)."""

    angle: float


_PAULI_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _embed(channel, op):
    if channel == "C":
        return np.kron(op, np.eye(2))
    if channel == "H":
        return np.kron(np.eye(2), op)
    raise ValidationError('pulse channel must be "C" or "H"')


def compile_pulses(pulses, delta_c=0.0, delta_h=0.0):
    """Compose a pulse list into a 4x4 unitary.

    Rotation angles on the carbon channel scale by (1 + delta_c), on the
    proton channel by (1 + delta_h); coupling delays are unaffected.
    """
    U = np.eye(4, dtype=complex)
    zz = np.kron(_PAULI_1Q["Z"], _PAULI_1Q["Z"])
    for p in pulses:
        if isinstance(p, CouplingDelay):
            gen_op = zz
            angle = p.angle
        else:
            scale = 1.0 + (delta_c if p.channel == "C" else delta_h)
            angle = p.angle * scale
            if isinstance(p, ZPulse):
                gen_op = _embed(p.channel, _PAULI_1Q["Z"])
            else:
                axis = np.cos(p.phase) * _PAULI_1Q["X"] + np.sin(p.phase) * _PAULI_1Q["Y"]
                gen_op = _embed(p.channel, axis)
        U = expm(-0.5j * angle * gen_op) @ U
    return U


def bb1_composite(channel, phase, angle):
    """BB1 composite rotation: amplitude errors cancel to third order."""
    phi = float(np.arccos(-angle / (4.0 * np.pi)))
    return [
        XYPulse(channel, phase, angle / 2.0),
        XYPulse(channel, phase + phi, np.pi),
        XYPulse(channel, phase + 3.0 * phi, 2.0 * np.pi),
        XYPulse(channel, phase + phi, np.pi),
        XYPulse(channel, phase, angle / 2.0),
    ]


def cnot_pulses(control, target, compensated=True):
    """CNOT from two y-pulses around a coupling delay, one x-pulse, one z.

    Up to a global phase, CNOT = exp(i pi/4 (I - Z_c)(I - X_t)); the
    two-spin factor is realized by conjugating the coupling delay with
    +-pi/2 y-rotations on the target.
    """
    half = np.pi / 2.0
    seq = [
        XYPulse(target, half, -half),   # y(-pi/2)
        CouplingDelay(-half),
        XYPulse(target, half, half),    # y(+pi/2)
        XYPulse(target, 0.0, half),     # x(+pi/2)
        ZPulse(control, half),
    ]
    if not compensated:
        return seq
    out = []
    for p in seq:
        if isinstance(p, XYPulse):
            out.extend(bb1_composite(p.channel, p.phase, p.angle))
        else:
            out.append(p)
    return out


def averaging_gate_pulses(compensated=True):
    """Pulse decomposition of the coefficient-averaging gate V.

    V factors exactly as CNOT(H -> C) . CNOT(C -> H) (chronological order:
    C -> H first), verified against the permutation representation.
    """
    return cnot_pulses("C", "H", compensated) + cnot_pulses("H", "C", compensated)


def pps_pulse_sequence_builder(tau, compensated=True):
    """Factory of perturbed averaging sequences for robustness scans.

    Returns builder(delta_c, delta_h) -> PeriodicSequence with the V gate
    compiled from pulses at the given per-channel amplitude errors.
    """
    pulses = averaging_gate_pulses(compensated)

    def build(delta_c, delta_h):
        U = compile_pulses(pulses, delta_c, delta_h)
        return PeriodicSequence(
            steps=(RelaxStep(tau), gate_step(U, name="V(pulses)")),
        )

    return build


@dataclass(frozen=True)
class RobustnessResult:
    """Relative fixed-point error over an amplitude-error grid.

    delta[i, j] corresponds to (delta_c[i], delta_h[j]); cells where the
    perturbed map loses its attracting fixed point hold NaN and are flagged
    in `failed`.
    """

    delta_c: np.ndarray
    delta_h: np.ndarray
    delta: np.ndarray
    failed: np.ndarray

    @property
    def max_delta(self):
        return float(np.nanmax(self.delta))


def robustness_sweep(gen, seq_builder, delta_c_values, delta_h_values,
                     reference=None, target=None, kappa_tol=1.0):
    """Fixed-point sensitivity to per-channel control-amplitude errors.

    Parameters
    ----------
    gen : AffineGenerator
    seq_builder : callable
        (delta_c, delta_h) -> PeriodicSequence.
    delta_c_values, delta_h_values : array-like
        Grid of relative amplitude errors per channel.
    reference : CoherenceVector, optional
        State against which errors are measured; defaults to the fixed
        point of seq_builder(0, 0).
    target, kappa_tol : unused diagnostics hooks kept for API symmetry.

    Returns
    -------
    RobustnessResult
        delta = |x_perturbed - x_reference| / |x_reference| on deviation
        parts (Frobenius norm of the operator difference divided by the
        reference norm equals exactly this vector-space ratio).
    """
    del target, kappa_tol
    dc = np.asarray(delta_c_values, dtype=float)
    dh = np.asarray(delta_h_values, dtype=float)
    if reference is None:
        reference = fixed_point(gen, seq_builder(0.0, 0.0)).x_star
    ref = reference.r
    ref_norm = np.linalg.norm(ref)
    if ref_norm == 0.0:
        raise ValidationError("reference fixed point must be nonzero")
    delta = np.full((len(dc), len(dh)), np.nan)
    failed = np.zeros((len(dc), len(dh)), dtype=bool)
    for i, a in enumerate(dc):
        for j, b in enumerate(dh):
            seq = seq_builder(a, b)
            M, c = one_period_map(gen, seq)
            if spectral_radius(M) >= 1.0:
                failed[i, j] = True
                continue
            x = np.linalg.solve(np.eye(len(M)) - M, c)
            delta[i, j] = np.linalg.norm(x - ref) / ref_norm
    return RobustnessResult(delta_c=dc, delta_h=dh, delta=delta, failed=failed)


def diagonal_part(report_or_state):
    """Diagonal coordinates of a fixed point or state (convenience)."""
    state = getattr(report_or_state, "x_star", report_or_state)
    return project(state)


def diag_coords(state):
    """Raw diagonal coordinate array of a CoherenceVector."""
    return state.r[list(diag_slots(state.n))]
