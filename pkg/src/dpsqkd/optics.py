"""Beam splitters and the delay interferometer, in two representations.

Analytic route: coherent amplitudes per (path, time-bin), propagated in
closed form.  Fock route: the same mode map lifted to a unitary on a
truncated Fock space, either materialized as a dense operator at desk
scale or applied gate-by-gate to state vectors at larger dimensions.

Wire convention
---------------
The Fock-space registry uses 2B "wires" for B time bins, labelled
``(0, i)`` and ``(1, i)``, path-major.  Before the optics wire ``(0, i)``
carries input path 0 (Alice's pulse in bin i) and wire ``(1, i)`` carries
input path 1 (vacuum).  After the optics wire ``(0, i)`` carries output
path 4 (detector D0, bin i) and wire ``(1, i)`` carries output path 5
(detector D1, bin i).  The delay arm shifts path-1-wire content
cyclically by one bin; the wrap-around slot only ever receives vacuum
when the final input bin is unpopulated, which is how the padded
(non-cyclic) physical arrangement is represented on a square mode set.

The mode map is the literal composition of the two beam-splitter
transforms with the delay phase, which also matches the detection table;
the expanded per-bin product formula in the source material carries an
inconsequential sign discrepancy on the D1 amplitudes and is not used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockOperator, FockVector, ModeRegistry, _readonly

_COMPENSATION_TOL = 1e-12

#: refuse to materialize dense unitaries above this dimension
DEFAULT_MAX_UNITARY_DIM = 8192

#: refuse to evolve state batches above this many complex entries
DEFAULT_MAX_STATE_ENTRIES = 3 * 10 ** 8


@dataclass(frozen=True)
class InterferometerConfig:
    """Phase configuration of the delay interferometer.

    ``phi1`` (first beam splitter), ``phi2`` (second beam splitter) and
    ``phi_delta`` (phase picked up in the delay arm) must satisfy the
    compensation condition ``phi1 + phi2 == phi_delta``.  ``delta_t`` is
    the delay in time bins and is fixed at one bin.
    """

    phi1: float = 0.0
    phi2: float = 0.0
    phi_delta: float = 0.0
    delta_t: int = 1

    def __post_init__(self):
        if abs(self.phi1 + self.phi2 - self.phi_delta) > _COMPENSATION_TOL:
            raise ValueError(
                "compensation condition phi1 + phi2 = phi_delta violated: "
                f"{self.phi1} + {self.phi2} != {self.phi_delta}")
        if self.delta_t != 1:
            raise ValueError("the delay is fixed at one time bin")

    @classmethod
    def compensated(cls, phi2: float = 0.0, phi_delta: float = 0.0):
        """Config with ``phi1`` chosen to satisfy the compensation condition."""
        return cls(phi1=phi_delta - phi2, phi2=phi2, phi_delta=phi_delta)


@dataclass(frozen=True)
class PulseTrain:
    """Complex coherent amplitude per time bin on one path.

    ``abs(amplitude)**2`` is the mean photon number of the bin.
    """

    path: object
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def bin_count(self) -> int:
        return self.amplitudes.size

    def total_energy(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def bs1_transform(config: InterferometerConfig) -> np.ndarray:
    """2x2 coupling of the first beam splitter, columns = input paths
    (0, 1), rows = output paths (2, 3)."""
    s = 1.0 / math.sqrt(2.0)
    e = np.exp(-1j * config.phi1)
    return np.array([[s, s], [e * s, -e * s]])


def bs2_transform(config: InterferometerConfig) -> np.ndarray:
    """2x2 coupling of the second beam splitter, columns = input paths
    (2, 3), rows = output paths (4, 5)."""
    s = 1.0 / math.sqrt(2.0)
    return np.array([[s, np.exp(-1j * config.phi2) * s],
                     [-np.exp(1j * config.phi2) * s, s]])


def interferometer_coefficients(config: InterferometerConfig) -> np.ndarray:
    """Coefficients of the composed per-pulse mode map: input bin i maps to
    (4,i), (5,i), (4,i+1), (5,i+1) with these four weights."""
    u1 = bs1_transform(config)
    u2 = bs2_transform(config)
    delay = np.exp(1j * config.phi_delta)
    direct = u2[:, 0] * u1[0, 0]
    delayed = u2[:, 1] * (delay * u1[1, 0])
    return np.array([direct[0], direct[1], delayed[0], delayed[1]])


def propagate_analytic(train: PulseTrain, config: InterferometerConfig):
    """Propagate a path-0 pulse train through the interferometer.

    Returns the two output trains on paths 4 and 5 with ``bin_count + 1``
    bins.  Interior bins 1..N carry the interference of consecutive
    pulses; bins 0 and N+1 carry the unmatched half-pulses and are not key
    bins.
    """
    if train.bin_count == 0:
        raise ValueError("cannot propagate an empty pulse train")
    c = interferometer_coefficients(config)
    a = np.concatenate([[0.0], train.amplitudes, [0.0]])
    out4 = c[0] * a[1:] + c[2] * a[:-1]
    out5 = c[1] * a[1:] + c[3] * a[:-1]
    return PulseTrain(4, out4), PulseTrain(5, out5)


def key_bins(out_train: PulseTrain) -> np.ndarray:
    """Interior (key) amplitudes of a propagated train: bins 1..N."""
    return out_train.amplitudes[1:-1]


# ---------------------------------------------------------------------------
# Fock representation


def wire_registry(bins: int, cutoff: int) -> ModeRegistry:
    """Canonical 2B-wire registry: path-0 wires then path-1 wires."""
    modes = [(0, i) for i in range(bins)] + [(1, i) for i in range(bins)]
    return ModeRegistry(modes, cutoff)


def _wire_count(registry: ModeRegistry) -> int:
    n = registry.n_modes
    bins = n // 2
    if list(registry.modes) != [(0, i) for i in range(bins)] + \
            [(1, i) for i in range(bins)]:
        raise ValueError("registry is not a canonical wire registry; "
                         "build it with wire_registry()")
    return bins


def single_particle_unitary(config: InterferometerConfig, bins: int) -> np.ndarray:
    """2B x 2B one-photon mode map in wire order (path-major), with the
    cyclic delay shift on the path-1 wires."""
    B = bins
    u1 = bs1_transform(config)
    u2 = bs2_transform(config)
    U1 = np.zeros((2 * B, 2 * B), dtype=complex)
    Ud = np.zeros_like(U1)
    U2 = np.zeros_like(U1)
    for i in range(B):
        w0, w1 = i, B + i
        U1[np.ix_([w0, w1], [w0, w1])] = u1
        U2[np.ix_([w0, w1], [w0, w1])] = u2
        Ud[w0, w0] = 1.0
        Ud[B + (i + 1) % B, w1] = np.exp(1j * config.phi_delta)
    return U2 @ Ud @ U1


def _quadratic_lift(A: np.ndarray, d: int) -> np.ndarray:
    """exp(sum_mn A[m,n] adag_m a_n) on the truncated two-mode space."""
    a = np.diag(np.sqrt(np.arange(1, d)), k=1)
    ad = a.T
    eye = np.eye(d)
    X = (A[0, 0] * np.kron(ad @ a, eye) + A[0, 1] * np.kron(ad, a)
         + A[1, 0] * np.kron(a, ad) + A[1, 1] * np.kron(eye, ad @ a))
    if np.max(np.abs(X.imag)) == 0.0:
        # real antisymmetric generator: exponentiate in the reals
        from scipy.linalg import expm
        return expm(X.real)
    evals, evecs = np.linalg.eigh(-1j * X)
    return (evecs * np.exp(1j * evals)) @ evecs.conj().T


def _pair_gate(u2: np.ndarray, local_dim: int) -> np.ndarray:
    """Lift a 2x2 single-particle unitary to the (d x d) two-mode truncated
    Fock space; exactly unitary, photon-number conserving, and real
    whenever the mode map is real.

    A real map with determinant -1 has no real matrix logarithm, so it is
    factored into a rotation (real generator) times a sign flip on the
    second mode, both of which lift to real orthogonal gates.
    """
    d = local_dim
    u2 = np.asarray(u2)
    if np.max(np.abs(u2.imag)) == 0.0:
        r = u2.real
        det = r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0]
        flip = det < 0.0
        if flip:
            r = r @ np.diag([1.0, -1.0])
        theta = math.atan2(r[1, 0], r[0, 0])
        gate = _quadratic_lift(np.array([[0.0, -theta], [theta, 0.0]]), d)
        if flip:
            parity = (-1.0) ** np.arange(d)
            gate = gate * np.kron(np.ones(d), parity)[None, :]
        return np.ascontiguousarray(gate)
    w, V = np.linalg.eig(u2)
    A = (V * np.log(w)) @ np.linalg.inv(V)      # matrix log, anti-hermitian
    return _quadratic_lift(A.astype(complex), d)


def _apply_pair_gate(arr: np.ndarray, gate: np.ndarray, pair: int,
                     bins: int, d: int) -> np.ndarray:
    """Apply a two-mode gate to adjacent pair axes (1 + 2*pair, 2 + 2*pair)
    of a batch-first tensor of shape (batch, d, d, ..., d)."""
    dd = d * d
    pre = arr.shape[0] * dd ** pair
    post = arr.size // (pre * dd)
    if gate.dtype != arr.dtype:
        gate = gate.astype(np.promote_types(gate.dtype, arr.dtype))
        arr = arr.astype(gate.dtype)
    view = arr.reshape(pre, dd, post)
    if post == 1:
        out = view[:, :, 0] @ gate.T
    elif pre == 1:
        out = gate @ view[0]
    else:
        out = np.matmul(gate, view)
    return np.ascontiguousarray(out).reshape(arr.shape)


def _evolve_wire_batch(batch: np.ndarray, bins: int, d: int,
                       config: InterferometerConfig) -> np.ndarray:
    """Evolve a batch of wire-registry states through the interferometer.

    `batch` has shape (n_states, dim) in the path-major Kronecker layout;
    the result has the same shape.  Works in float64 throughout when the
    configuration phases make every stage real.
    """
    B = bins
    n = batch.shape[0]
    g1 = _pair_gate(bs1_transform(config), d)
    g2 = _pair_gate(bs2_transform(config), d)
    phase = np.exp(1j * config.phi_delta * np.arange(d))
    if np.max(np.abs(phase.imag)) < 1e-15:
        phase = phase.real
    batch_is_real = not np.iscomplexobj(batch) or not np.any(batch.imag)
    if (batch_is_real and g1.dtype == np.float64 and g2.dtype == np.float64
            and phase.dtype == np.float64):
        # everything real: run the whole evolution in float64
        work = np.ascontiguousarray(batch.real, dtype=np.float64)
    else:
        work = np.ascontiguousarray(batch, dtype=complex)

    # path-major -> batch-first pair layout (A0, B0, A1, B1, ...)
    t = work.reshape((n,) + (d,) * (2 * B))
    pair_axes = [0] + [1 + (i % B) * 2 + (0 if i < B else 1) for i in range(2 * B)]
    t = np.ascontiguousarray(t.transpose(np.argsort(pair_axes)))

    for i in range(B):
        t = _apply_pair_gate(t, g1, i, B, d)

    # delay: content of path-1 wire i moves to path-1 wire (i+1) mod B,
    # picking up phi_delta per photon
    src = [2 + 2 * i for i in range(B)]
    dst = [2 + 2 * ((i + 1) % B) for i in range(B)]
    t = np.ascontiguousarray(np.moveaxis(t, src, dst))
    if not np.all(phase == 1.0):
        for i in range(B):
            shape = [1] * t.ndim
            shape[2 + 2 * i] = d
            t = t * phase.reshape(shape)

    for i in range(B):
        t = _apply_pair_gate(t, g2, i, B, d)

    # pair layout -> path-major
    t = np.ascontiguousarray(t.transpose(pair_axes))
    return t.reshape(n, -1)


def apply_interferometer(state: FockVector, config: InterferometerConfig,
                         max_entries: int = DEFAULT_MAX_STATE_ENTRIES) -> FockVector:
    """Evolve a wire-registry state through the interferometer unitary,
    gate by gate.  Scales to dimensions where the dense operator cannot be
    materialized."""
    return apply_interferometer_batch([state], config, max_entries)[0]


def apply_interferometer_batch(states, config: InterferometerConfig,
                               max_entries: int = DEFAULT_MAX_STATE_ENTRIES):
    """Evolve several wire-registry states at once (shared transposes and
    larger matrix products; the batched form of the trivially parallel
    evolution)."""
    regs = {s.registry for s in states}
    if len(regs) != 1:
        raise ValueError("batch states must share one registry")
    reg = next(iter(regs))
    bins = _wire_count(reg)
    if reg.dim * len(states) > max_entries:
        raise ValueError(
            f"batch size {len(states)} x dimension {reg.dim} exceeds the "
            f"evolution bound {max_entries} "
            f"({reg.n_modes} modes at cutoff {reg.cutoff})")
    batch = np.stack([s.amplitudes for s in states])
    out = _evolve_wire_batch(batch, bins, reg.local_dim, config)
    return [FockVector(reg, row) for row in out]


def fock_unitary(config: InterferometerConfig, bins: int, cutoff: int,
                 max_dim: int = DEFAULT_MAX_UNITARY_DIM) -> FockOperator:
    """Dense interferometer unitary on the 2B-wire truncated Fock space.

    Satisfies ``norm(U^* U - I) <= 1e-10`` (each constituent gate is
    exactly unitary), maps vacuum to vacuum and commutes with total photon
    number.
    """
    reg = wire_registry(bins, cutoff)
    if reg.dim > max_dim:
        raise ValueError(
            f"registry dimension {reg.dim} = {reg.local_dim}^{reg.n_modes} "
            f"exceeds the dense-unitary bound {max_dim}; "
            "use apply_interferometer for state evolution instead")
    eye = np.eye(reg.dim)
    cols = _evolve_wire_batch(eye, bins, reg.local_dim, config)
    return FockOperator(reg, cols.T)


def coherent_wire_state(train_amplitudes: np.ndarray, bins: int,
                        cutoff: int) -> FockVector:
    """Product coherent state on a wire registry: path-0 wires carry the
    given per-bin amplitudes (zero-padded to `bins`), path-1 wires vacuum."""
    from .fock import coherent_amplitudes
    amps = np.asarray(train_amplitudes, dtype=complex)
    if amps.size > bins:
        raise ValueError("more pulse amplitudes than wire bins")
    reg = wire_registry(bins, cutoff)
    d = reg.local_dim
    vecs = [coherent_amplitudes(amps[i] if i < amps.size else 0.0, cutoff)
            for i in range(bins)]
    vecs += [coherent_amplitudes(0.0, cutoff)] * bins
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return FockVector(reg, out)


def mean_mode_amplitudes(state: FockVector) -> np.ndarray:
    """``<a_m> / <1>`` for every registry mode: the coherent amplitude of
    each mode when the state is (close to) a coherent product."""
    reg = state.registry
    amps = state.amplitudes
    if not np.any(amps.imag):
        amps = np.ascontiguousarray(amps.real)
    t = amps.reshape((reg.local_dim,) * reg.n_modes)
    return _batched_mean_amplitudes(t[None, ...])[0] / state.norm2()


def _batched_mean_amplitudes(t: np.ndarray) -> np.ndarray:
    """Unnormalized ``<a_m>`` per mode for a batch-first state tensor of
    shape (n, d, d, ..., d); reshape windows keep the inner axis
    contiguous."""
    n = t.shape[0]
    d = t.shape[1]
    nmodes = t.ndim - 1
    w = np.sqrt(np.arange(1, d))
    flat = t.reshape(n, -1)
    dim = flat.shape[1]
    out = np.empty((n, nmodes), dtype=complex)
    for ax in range(nmodes):
        pre = d ** ax
        post = dim // (pre * d)
        v = flat.reshape(n, pre, d, post)
        prod = v[:, :, :-1, :].conj() * v[:, :, 1:, :]
        out[:, ax] = prod.sum(axis=(1, 3)) @ w
    return out


def fock_output_amplitudes(amp_rows: np.ndarray, bins: int, cutoff: int,
                           config: InterferometerConfig,
                           max_entries: int = DEFAULT_MAX_STATE_ENTRIES
                           ) -> np.ndarray:
    """Mean output amplitude of every wire after evolving product coherent
    inputs through the truncated Fock space.

    `amp_rows` is (n_states, n_pulses): per state, the path-0 per-bin
    coherent amplitudes (zero-padded to `bins`; path 1 starts in vacuum).
    Returns (n_states, 2 * bins) mean amplitudes ``<a_w>/<1>`` in wire
    order.

    Because path 1 enters in vacuum, the state after the first beam
    splitter is an exact product of per-bin two-wire vectors, which is
    built directly; only the delay shift and the second beam splitter act
    on the full tensor.  The pipeline stays in float64 when the inputs and
    the configuration phases are real.
    """
    from .fock import coherent_amplitudes
    amp_rows = np.atleast_2d(np.asarray(amp_rows))
    n, npulse = amp_rows.shape
    if npulse > bins:
        raise ValueError("more pulse amplitudes than wire bins")
    d = cutoff + 1
    dim = d ** (2 * bins)
    if n * dim > max_entries:
        raise ValueError(f"batch {n} x dimension {dim} exceeds the "
                         f"evolution bound {max_entries}")
    g1 = _pair_gate(bs1_transform(config), d)
    g2 = _pair_gate(bs2_transform(config), d)
    phase = np.exp(1j * config.phi_delta * np.arange(d))
    if np.max(np.abs(phase.imag)) < 1e-15:
        phase = phase.real
    inputs_real = np.max(np.abs(amp_rows.imag)) == 0.0 if \
        np.iscomplexobj(amp_rows) else True
    real_mode = (inputs_real and g1.dtype == np.float64
                 and g2.dtype == np.float64 and phase.dtype == np.float64)
    dtype = np.float64 if real_mode else complex

    # post-BS1 product state, pair layout (A0, B0, A1, B1, ...)
    g1_on_vac = g1[:, ::d]            # columns (x, n_B=0)
    t = None
    for i in range(bins):
        amps = amp_rows[:, i] if i < npulse else np.zeros(n, dtype=amp_rows.dtype)
        cohs = np.stack([coherent_amplitudes(a, cutoff) for a in amps])
        if real_mode:
            cohs = np.ascontiguousarray(cohs.real)
        pair = cohs @ g1_on_vac.T      # (n, d*d)
        t = pair if t is None else \
            (t[:, :, None] * pair[:, None, :]).reshape(n, -1)
    t = t.reshape((n,) + (d, d) * bins)

    # delay: pair-layout path-1 axes are 2, 4, ..., shifted cyclically
    src = [2 + 2 * i for i in range(bins)]
    dst = [2 + 2 * ((i + 1) % bins) for i in range(bins)]
    t = np.ascontiguousarray(np.moveaxis(t, src, dst))
    if not np.all(phase == 1.0):
        for i in range(bins):
            shape = [1] * t.ndim
            shape[2 + 2 * i] = d
            t = t * phase.reshape(shape)

    for i in range(bins):
        t = _apply_pair_gate(t, g2.astype(dtype, copy=False), i, bins, d)

    amps_pair = _batched_mean_amplitudes(t)
    norms = np.sum(np.abs(t.reshape(n, -1)) ** 2, axis=1)
    # pair layout (A0, B0, A1, B1, ...) -> wire order (A0..A_{B-1}, B0..)
    order = [2 * i for i in range(bins)] + [2 * i + 1 for i in range(bins)]
    return amps_pair[:, order] / norms[:, None]
