"""Beyond-Markovian single-excitation dynamics.

Eliminating the waveguide modes exactly (photon field initially in vacuum)
leaves two coupled Volterra integro-differential equations for the atomic
amplitudes,

    d alpha_1/dt = -i Omega_1 alpha_1
                   - 2 g_1^2   int_0^t K_1(tau) alpha_1(t - tau) dtau
                   -   g_1 g_2 int_0^t K_c(tau) alpha_2(t - tau) dtau,

(and the 1 <-> 2 partner), with memory kernels built from Bessel functions:

    K_i(tau) = e^{-i omega_c tau} [J_0(2 xi tau) + i^{N_i} J_{N_i}(2 xi tau)],
    K_c(tau) = e^{-i omega_c tau} sum_{j,j'} i^{n_j - m_j'} J_{n_j - m_j'}(2 xi tau).

The same kernels integrated over [0, t] give a time-dependent 2x2 matrix
M(t) whose eigenvalue imaginary parts diagnose the number of bound states
in the continuum (no decaying eigenvalue <-> two BICs, one <-> one, none
<-> zero).  The photon field in real space is reconstructed a posteriori by
convolving the atomic histories with single-site kernels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import spectrum
from .model import (
    AtomTrajectory,
    FieldSnapshot,
    SystemConfig,
    TimeGrid,
    WavefunctionState,
    validate_config,
)
from .specfun import bessel_j_table

MAX_KERNEL_DT = 0.1
# Solver aborts when a population exceeds this (quadrature instability).
POPULATION_ABORT = 1.0 + 1e-3

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def unit_power(p: int) -> complex:
    """i**p by exact lookup.  For the Bessel combinations used here
    i^p J_p = i^{|p|} J_{|p|}, so only |p| mod 4 matters."""
    return _I_POW[abs(int(p)) % 4]


class SolverError(RuntimeError):
    """Raised when the Volterra integration becomes unstable."""


@dataclass(frozen=True)
class KernelSet:
    """Memory-kernel integrands tabulated on a time grid."""

    grid: TimeGrid
    k_self_1: np.ndarray
    k_self_2: np.ndarray
    k_cross: np.ndarray
    cfg: SystemConfig


def build_kernels(cfg: SystemConfig, grid: TimeGrid) -> KernelSet:
    """Tabulate K_1, K_2 and K_c at every grid node.

    Requires ``dt <= 0.1/xi`` so the oscillatory Bessel tails are resolved.
    At tau = 0 the self kernels equal 1 and the cross kernel equals the
    number of shared legs (zero for braided, non-touching geometries).
    """
    cfg = validate_config(cfg)
    if grid.dt > MAX_KERNEL_DT / cfg.xi:
        raise ValueError(f"dt={grid.dt} too coarse for kernel tables; need dt <= 0.1/xi")
    taus = grid.times()
    order_max = max(cfg.size_1, cfg.size_2, *cfg.cross_distances)
    table = bessel_j_table(order_max, 2.0 * cfg.xi * taus)
    phase = np.exp(-1j * cfg.omega_c * taus)
    k1 = phase * (table[:, 0] + unit_power(cfg.size_1) * table[:, cfg.size_1])
    k2 = phase * (table[:, 0] + unit_power(cfg.size_2) * table[:, cfg.size_2])
    kc = np.zeros_like(phase)
    for p in cfg.cross_distances:
        kc += unit_power(p) * table[:, p]
    kc *= phase
    return KernelSet(grid=grid, k_self_1=k1, k_self_2=k2, k_cross=kc, cfg=cfg)


def _cumulative_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros(values.shape[0], dtype=complex)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1])) * dt
    return out


def m_matrix(cfg: SystemConfig, t: float, kernels: KernelSet) -> np.ndarray:
    """Effective 2x2 matrix M(t) = [[A_1, B], [B, A_2]] at a grid time.

    A_i(t) = Omega_i - 2i g_i^2 int_0^t K_i, B(t) = -i g_1 g_2 int_0^t K_c,
    integrals by cumulative trapezoid over the kernel tables.
    """
    cfg = validate_config(cfg)
    n = kernels.grid.node(t)
    dt = kernels.grid.dt
    def integral(k):
        if n == 0:
            return 0.0j
        return complex(np.sum(0.5 * (k[1:n + 1] + k[:n])) * dt)
    a1 = cfg.omega_1 - 2j * cfg.g_1 ** 2 * integral(kernels.k_self_1)
    a2 = cfg.omega_2 - 2j * cfg.g_2 ** 2 * integral(kernels.k_self_2)
    b = -1j * cfg.g_1 * cfg.g_2 * integral(kernels.k_cross)
    return np.array([[a1, b], [b, a2]])


@dataclass(frozen=True)
class EigenTrace:
    """Continuity-ordered eigenvalues of M(t) along the grid, with the
    matrix entries kept for trace/determinant consistency checks."""

    grid: TimeGrid
    lambda_1: np.ndarray
    lambda_2: np.ndarray
    a_1: np.ndarray
    a_2: np.ndarray
    b: np.ndarray

    def trace_determinant_residual(self) -> float:
        """Max relative violation of lam1+lam2 = A1+A2 and
        lam1*lam2 = A1 A2 - B^2 over the grid."""
        tr = self.a_1 + self.a_2
        det = self.a_1 * self.a_2 - self.b ** 2
        r1 = np.abs(self.lambda_1 + self.lambda_2 - tr) / np.maximum(np.abs(tr), 1.0)
        r2 = np.abs(self.lambda_1 * self.lambda_2 - det) / np.maximum(np.abs(det), 1.0)
        return float(max(r1.max(), r2.max()))


def m_eigenvalues_trace(cfg: SystemConfig, grid: TimeGrid,
                        kernels: KernelSet | None = None) -> EigenTrace:
    """Eigenvalues lambda_+-(t) of M(t) at every node, ordered so each trace
    is continuous in the complex plane (nearest-neighbor matching between
    consecutive nodes, ties broken by real part)."""
    cfg = validate_config(cfg)
    if kernels is None:
        kernels = build_kernels(cfg, grid)
    dt = grid.dt
    a1 = cfg.omega_1 - 2j * cfg.g_1 ** 2 * _cumulative_trapezoid(kernels.k_self_1, dt)
    a2 = cfg.omega_2 - 2j * cfg.g_2 ** 2 * _cumulative_trapezoid(kernels.k_self_2, dt)
    b = -1j * cfg.g_1 * cfg.g_2 * _cumulative_trapezoid(kernels.k_cross, dt)
    mean = 0.5 * (a1 + a2)
    root = np.sqrt(0.25 * (a1 - a2) ** 2 + b ** 2)
    lam1 = mean + root
    lam2 = mean - root
    if lam1[0].real < lam2[0].real:
        lam1[0], lam2[0] = lam2[0], lam1[0]
    for n in range(1, lam1.size):
        keep = abs(lam1[n] - lam1[n - 1]) + abs(lam2[n] - lam2[n - 1])
        swap = abs(lam2[n] - lam1[n - 1]) + abs(lam1[n] - lam2[n - 1])
        if swap < keep:
            lam1[n], lam2[n] = lam2[n], lam1[n]
    return EigenTrace(grid=grid, lambda_1=lam1, lambda_2=lam2, a_1=a1, a_2=a2, b=b)


def solve_volterra(cfg: SystemConfig, psi0: WavefunctionState, grid: TimeGrid,
                   kernels: KernelSet | None = None) -> AtomTrajectory:
    """Integrate the exact memory equations with a second-order
    predictor-corrector trapezoidal convolution scheme.

    The photon field must start in vacuum (the kernel derivation assumes
    it).  Cost is O(T^2) in the number of nodes with O(T) memory; the
    convolution over the history reuses the kernel tables, and the
    correction of the newest node only touches the tau = 0 endpoint term,
    so each step costs one pass over the history.  Deterministic.

    Raises
    ------
    SolverError
        If either population exceeds 1 + 1e-3 (step size too coarse).
    """
    cfg = validate_config(cfg)
    if not psi0.photon_vacuum:
        raise ValueError("solve_volterra requires an initially empty photon sector")
    if kernels is None:
        kernels = build_kernels(cfg, grid)
    n_steps = grid.n_steps
    dt = grid.dt
    n_nodes = n_steps + 1

    # kernels stored reversed: rev[k][n_nodes-1-m] = K_k(tau_m), so the
    # window ending at node m is the contiguous view rev[:, n_nodes-1-m:].
    rev = np.empty((3, n_nodes), dtype=complex)
    rev[0] = kernels.k_self_1[::-1]
    rev[1] = kernels.k_self_2[::-1]
    rev[2] = kernels.k_cross[::-1]
    k_at_0 = np.array([kernels.k_self_1[0], kernels.k_self_2[0], kernels.k_cross[0]])

    amp = np.zeros((n_nodes, 2), dtype=complex)
    amp[0, 0] = psi0.alpha_1
    amp[0, 1] = psi0.alpha_2

    c_self_1 = -2.0 * cfg.g_1 ** 2
    c_self_2 = -2.0 * cfg.g_2 ** 2
    c_cross = -cfg.g_1 * cfg.g_2
    # integrating factor removes the local -i Omega term, so free evolution
    # is reproduced to rounding and only the memory terms are quadratured
    u1 = np.exp(-1j * cfg.omega_1 * dt)
    u2 = np.exp(-1j * cfg.omega_2 * dt)

    def memory(i1, i2, ic1, ic2):
        return c_self_1 * i1 + c_cross * ic1, c_self_2 * i2 + c_cross * ic2

    f1, f2 = 0.0j, 0.0j  # memory derivative at node 0 (empty integrals)
    for n in range(n_steps):
        m = n + 1
        # exponential-Euler predictor to the new node
        p1 = u1 * (amp[n, 0] + dt * f1)
        p2 = u2 * (amp[n, 1] + dt * f2)
        # history part of the convolutions at node m: sum_{j<m} K(tau_{m-j}) alpha_j
        hist = rev[:, n_nodes - 1 - m:n_nodes - 1] @ amp[:m]
        k_at_m = rev[:, n_nodes - 1 - m]
        # trapezoid: dt * (full sum) - dt/2 * (tau=0 and tau=m endpoint terms)
        i1 = dt * (hist[0, 0] + k_at_0[0] * p1) - 0.5 * dt * (k_at_0[0] * p1 + k_at_m[0] * amp[0, 0])
        i2 = dt * (hist[1, 1] + k_at_0[1] * p2) - 0.5 * dt * (k_at_0[1] * p2 + k_at_m[1] * amp[0, 1])
        ic1 = dt * (hist[2, 1] + k_at_0[2] * p2) - 0.5 * dt * (k_at_0[2] * p2 + k_at_m[2] * amp[0, 1])
        ic2 = dt * (hist[2, 0] + k_at_0[2] * p1) - 0.5 * dt * (k_at_0[2] * p1 + k_at_m[2] * amp[0, 0])
        e1, e2 = memory(i1, i2, ic1, ic2)
        # exponential-trapezoidal corrector
        a1 = u1 * amp[n, 0] + 0.5 * dt * (u1 * f1 + e1)
        a2 = u2 * amp[n, 1] + 0.5 * dt * (u2 * f2 + e2)
        amp[m, 0] = a1
        amp[m, 1] = a2
        if (a1.real * a1.real + a1.imag * a1.imag > POPULATION_ABORT
                or a2.real * a2.real + a2.imag * a2.imag > POPULATION_ABORT):
            raise SolverError(
                f"population exceeded {POPULATION_ABORT} at t={m * dt:.6g} "
                f"(|a1|^2={abs(a1) ** 2:.6g}, |a2|^2={abs(a2) ** 2:.6g}); reduce dt")
        # memory derivative at the corrected node: only the tau=0 endpoint moved
        i1 += 0.5 * dt * k_at_0[0] * (a1 - p1)
        i2 += 0.5 * dt * k_at_0[1] * (a2 - p2)
        ic1 += 0.5 * dt * k_at_0[2] * (a2 - p2)
        ic2 += 0.5 * dt * k_at_0[2] * (a1 - p1)
        f1, f2 = memory(i1, i2, ic1, ic2)
    return AtomTrajectory(grid=grid, alpha_1=amp[:, 0].copy(), alpha_2=amp[:, 1].copy())


def photon_field(cfg: SystemConfig, trajectory: AtomTrajectory, sites,
                 times, chunk: int = 2048) -> list[FieldSnapshot]:
    """Reconstruct the real-space photon amplitudes at the requested times.

    beta_j(t) = -i sum_atoms g int_0^t alpha(t - tau) * e^{-i omega_c tau}
                sum_legs i^{j-leg} J_{j-leg}(2 xi tau) dtau

    by trapezoidal quadrature on the trajectory grid.  For every leg the
    tau integral is reduced to one weighted sum per Bessel order
    (sites at equal distance from the leg share it), so the cost is one
    Bessel table plus a handful of matrix-vector products per time; the
    table is accumulated in tau chunks to bound memory.
    """
    cfg = validate_config(cfg)
    grid = trajectory.grid
    sites = np.asarray(sites, dtype=int)
    times = sorted(float(t) for t in times)
    legs = ((cfg.g_1, cfg.n_1, trajectory.alpha_1), (cfg.g_1, cfg.n_2, trajectory.alpha_1),
            (cfg.g_2, cfg.m_1, trajectory.alpha_2), (cfg.g_2, cfg.m_2, trajectory.alpha_2))
    order_max = max(int(np.abs(sites - leg).max()) for _, leg, _ in legs)
    i_powers = np.array([unit_power(p) for p in range(order_max + 1)])
    dt = grid.dt
    taus = grid.times()
    phase = np.exp(-1j * cfg.omega_c * taus)

    snapshots = []
    for t in times:
        n = grid.node(t)
        if n == 0:
            snapshots.append(FieldSnapshot(time=0.0, sites=sites,
                                           beta=np.zeros(sites.size, dtype=complex)))
            continue
        weights = np.full(n + 1, dt)
        weights[0] = weights[-1] = 0.5 * dt
        beta = np.zeros(sites.size, dtype=complex)
        for g, leg, alpha in legs:
            if g == 0.0:
                continue
            v = weights * phase[:n + 1] * alpha[n::-1]
            u = np.zeros(order_max + 1, dtype=complex)
            for s in range(0, n + 1, chunk):
                block = slice(s, min(s + chunk, n + 1))
                table = bessel_j_table(order_max, 2.0 * cfg.xi * taus[block])
                u += v[block] @ table
            dist = np.abs(sites - leg)
            beta += -1j * g * i_powers[dist] * u[dist]
        snapshots.append(FieldSnapshot(time=taus[n], sites=sites, beta=beta))
    return snapshots


def norm_check(trajectory: AtomTrajectory, snapshot: FieldSnapshot,
               cfg: SystemConfig | None = None) -> float:
    """Unitarity deficit |1 - pop1 - pop2 - sum_j |beta_j|^2| at the
    snapshot time.

    Meaningful only when the site window contains all emitted radiation;
    warns when the window does not extend 2 xi t + 20 sites beyond the
    outermost legs (``cfg`` needed for the leg positions and xi).
    """
    t = snapshot.time
    if cfg is not None:
        reach = 2.0 * cfg.xi * t + 20.0
        legs_min = min(cfg.n_1, cfg.m_1)
        legs_max = max(cfg.n_2, cfg.m_2)
        if snapshot.sites.min() > legs_min - reach or snapshot.sites.max() < legs_max + reach:
            warnings.warn(
                f"site window [{snapshot.sites.min()}, {snapshot.sites.max()}] may not "
                f"contain all radiation at t={t} (need +-{reach:.0f} around the legs)",
                stacklevel=2)
    n = trajectory.grid.node(t)
    pops = abs(trajectory.alpha_1[n]) ** 2 + abs(trajectory.alpha_2[n]) ** 2
    return float(abs(1.0 - pops - np.sum(snapshot.probabilities)))


def steady_state_prediction(cfg: SystemConfig, psi0: WavefunctionState,
                            n_c: int = 600,
                            ipr_threshold: float = spectrum.DEFAULT_IPR_THRESHOLD,
                            ) -> tuple[float, float]:
    """Long-time atomic populations from the overlap with a unique BIC.

    When the system hosts exactly one bound state in the continuum, the
    extended components dephase away and the atoms approach
    |alpha_i(inf)|^2 = |<E_BIC|psi0>|^2 |A_i|^2 with A_i the normalized BIC
    atomic amplitudes.  Requires exactly one BIC and a photon-vacuum psi0.
    """
    cfg = validate_config(cfg)
    if not psi0.photon_vacuum:
        raise ValueError("steady-state projection assumes an initially empty photon sector")
    ham = spectrum.build_hamiltonian(cfg, n_c)
    profiles = spectrum.classify_bound_states(spectrum.eigendecompose(ham), cfg, ipr_threshold)
    bics = spectrum.bound_states(profiles, "BIC")
    if len(bics) != 1:
        raise ValueError(f"steady-state prediction needs exactly one BIC, found {len(bics)}")
    b = bics[0]
    overlap = abs(b.amp_1 * psi0.alpha_1 + b.amp_2 * psi0.alpha_2) ** 2
    return overlap * b.amp_1 ** 2, overlap * b.amp_2 ** 2


def plateau(trajectory: AtomTrajectory, window: float = 50.0,
            rel_tol: float = 1e-4) -> tuple[float, float, bool]:
    """Trailing-window population means and a convergence flag.

    The flag is set when both populations vary by less than ``rel_tol``
    relative over the final ``window`` of evolution time.
    """
    grid = trajectory.grid
    n_win = max(2, int(round(window / grid.dt)))
    n_win = min(n_win, grid.n_steps)
    p1 = trajectory.pop_1[-n_win:]
    p2 = trajectory.pop_2[-n_win:]
    def settled(p):
        top = p.max()
        return top == 0.0 or (top - p.min()) <= rel_tol * top
    return float(p1.mean()), float(p2.mean()), bool(settled(p1) and settled(p2))
