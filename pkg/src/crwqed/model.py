"""Domain types and shared physics for two giant atoms coupled to a 1-D
coupled-resonator waveguide (CRW).

All energies are measured in units of the photon hopping strength ``xi``
and times in ``1/xi`` (hbar = 1).  Resonator sites are labelled by integer
"absolute" indices, the same indexing used for the atom coupling legs, so a
leg at ``n_1 = 1`` couples to resonator 1 wherever the finite lattice is
placed.  The lattice constant is unity throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

CONFIG_KEYS = (
    "omega_c", "xi", "omega_1", "omega_2", "g_1", "g_2",
    "n_1", "n_2", "m_1", "m_2", "t_max", "dt", "n_c",
)
_INT_KEYS = frozenset({"n_1", "n_2", "m_1", "m_2", "n_c"})


class ConfigError(ValueError):
    """Invalid physical configuration or config-file content."""


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the two-giant-atom / CRW system.

    Parameters
    ----------
    n_1, n_2 : int
        Resonator sites the first atom couples to.
    m_1, m_2 : int
        Resonator sites the second atom couples to.
    omega_c : float
        Bare resonator frequency (band center).
    xi : float
        Photon hopping strength between adjacent resonators; the global
        energy unit.  Must be positive.
    omega_1, omega_2 : float
        Atomic transition frequencies.
    g_1, g_2 : float
        Atom-waveguide coupling strengths (per leg), non-negative.

    The resonant regime used by all bundled presets is
    ``omega_1 = omega_2 = omega_c = 0`` with ``g = 0.1 xi``.
    """

    n_1: int
    n_2: int
    m_1: int
    m_2: int
    omega_c: float = 0.0
    xi: float = 1.0
    omega_1: float = 0.0
    omega_2: float = 0.0
    g_1: float = 0.1
    g_2: float = 0.1

    @property
    def size_1(self) -> int:
        """Extent of the first giant atom, n_2 - n_1."""
        return self.n_2 - self.n_1

    @property
    def size_2(self) -> int:
        return self.m_2 - self.m_1

    @property
    def delta(self) -> int:
        """Leg offset m_1 - n_1 between the two atoms."""
        return self.m_1 - self.n_1

    @property
    def braided(self) -> bool:
        """True when the coupling legs interleave: n_1 < m_1 < n_2 < m_2."""
        return self.n_1 < self.m_1 < self.n_2 < self.m_2

    @property
    def legs(self) -> tuple[int, int, int, int]:
        return (self.n_1, self.n_2, self.m_1, self.m_2)

    @property
    def cross_distances(self) -> tuple[int, int, int, int]:
        """|n_j - m_j'| over the four leg pairs (waveguide path lengths)."""
        return (abs(self.n_1 - self.m_1), abs(self.n_1 - self.m_2),
                abs(self.n_2 - self.m_1), abs(self.n_2 - self.m_2))

    @property
    def band_bottom(self) -> float:
        return self.omega_c - 2.0 * self.xi

    @property
    def band_top(self) -> float:
        return self.omega_c + 2.0 * self.xi

    @property
    def symmetric_resonant(self) -> bool:
        """Equal couplings, equal transition frequencies, equal atom sizes."""
        return (self.g_1 == self.g_2 and self.omega_1 == self.omega_2
                and self.size_1 == self.size_2)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Normalize and validate a configuration.

    Legs are sorted so that ``n_1 < n_2`` and ``m_1 < m_2`` (the physics is
    invariant under leg relabelling).  Idempotent.

    Raises
    ------
    ConfigError
        For non-positive ``xi``, negative couplings, or coincident legs.
    """
    if not (cfg.xi > 0.0) or not math.isfinite(cfg.xi):
        raise ConfigError(f"hopping strength xi must be positive, got {cfg.xi}")
    if cfg.g_1 < 0.0 or cfg.g_2 < 0.0:
        raise ConfigError(f"couplings must be non-negative, got g_1={cfg.g_1}, g_2={cfg.g_2}")
    if cfg.n_1 == cfg.n_2:
        raise ConfigError(f"coincident legs for the first atom: n_1 = n_2 = {cfg.n_1}")
    if cfg.m_1 == cfg.m_2:
        raise ConfigError(f"coincident legs for the second atom: m_1 = m_2 = {cfg.m_1}")
    n_1, n_2 = sorted((cfg.n_1, cfg.n_2))
    m_1, m_2 = sorted((cfg.m_1, cfg.m_2))
    if (n_1, n_2, m_1, m_2) != (cfg.n_1, cfg.n_2, cfg.m_1, cfg.m_2):
        cfg = replace(cfg, n_1=n_1, n_2=n_2, m_1=m_1, m_2=m_2)
    return cfg


def dispersion(k: float | np.ndarray, cfg: SystemConfig) -> float | np.ndarray:
    """Waveguide dispersion ``omega_k = omega_c - 2 xi cos k``.

    ``k`` is wrapped into [-pi, pi); the cosine band spans
    ``[omega_c - 2 xi, omega_c + 2 xi]``.
    """
    k = np.mod(np.asarray(k) + np.pi, 2.0 * np.pi) - np.pi
    out = cfg.omega_c - 2.0 * cfg.xi * np.cos(k)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WavefunctionState:
    """Single-excitation amplitudes: two atoms plus real-space photon field.

    ``beta`` maps absolute resonator index -> complex amplitude; sites not
    present hold zero amplitude.
    """

    alpha_1: complex
    alpha_2: complex
    beta: dict[int, complex] = field(default_factory=dict)

    def norm_squared(self) -> float:
        return (abs(self.alpha_1) ** 2 + abs(self.alpha_2) ** 2
                + sum(abs(b) ** 2 for b in self.beta.values()))

    @property
    def photon_vacuum(self) -> bool:
        return all(abs(b) == 0.0 for b in self.beta.values())


_INITIAL_STATES = ("atom1", "atom2", "symmetric", "antisymmetric")


def initial_state(which: str, cfg: SystemConfig) -> WavefunctionState:
    """Unit-norm initial state with the photon field in vacuum.

    ``which`` selects atom1, atom2, or the (anti)symmetric superposition
    ``(atom1 +- atom2)/sqrt(2)``.
    """
    validate_config(cfg)
    if which == "atom1":
        return WavefunctionState(1.0 + 0.0j, 0.0j)
    if which == "atom2":
        return WavefunctionState(0.0j, 1.0 + 0.0j)
    s = 1.0 / math.sqrt(2.0)
    if which == "symmetric":
        return WavefunctionState(s + 0.0j, s + 0.0j)
    if which == "antisymmetric":
        return WavefunctionState(s + 0.0j, -s + 0.0j)
    raise ConfigError(f"unknown initial state {which!r}; choose one of {_INITIAL_STATES}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid; node times are n*dt exactly (no accumulation)."""

    t_max: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.dt > self.t_max:
            raise ConfigError(f"dt={self.dt} exceeds t_max={self.t_max}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def t_end(self) -> float:
        return self.n_steps * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def node(self, t: float) -> int:
        """Index of the grid node at time t; t must lie on the grid."""
        n = int(round(t / self.dt))
        if n < 0 or n > self.n_steps or abs(t - n * self.dt) > 1e-9 * max(1.0, self.dt):
            raise ValueError(f"t={t} is not a node of the grid (dt={self.dt}, t_end={self.t_end})")
        return n


@dataclass(frozen=True)
class AtomTrajectory:
    """Time series of the two atomic amplitudes on a uniform grid."""

    grid: TimeGrid
    alpha_1: np.ndarray
    alpha_2: np.ndarray

    @property
    def pop_1(self) -> np.ndarray:
        return np.abs(self.alpha_1) ** 2

    @property
    def pop_2(self) -> np.ndarray:
        return np.abs(self.alpha_2) ** 2


@dataclass(frozen=True)
class FieldSnapshot:
    """Real-space photon amplitudes over a site window at one time."""

    time: float
    sites: np.ndarray
    beta: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.beta) ** 2


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` configuration text.

    Blank lines and ``#`` comments are ignored.  Unknown keys are an error
    (reported with their line number), as are duplicate keys and malformed
    values.  Returns a plain dict with ints for site/lattice keys and floats
    otherwise.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = int(val) if key in _INT_KEYS else float(val)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {val!r} for {key!r}") from None
    return values


def parse_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def config_from_mapping(values: dict) -> tuple[SystemConfig, TimeGrid | None, int | None]:
    """Build (SystemConfig, TimeGrid, n_c) from parsed config values.

    The grid is returned only when both ``t_max`` and ``dt`` are present;
    ``n_c`` only when given.
    """
    missing = [k for k in ("n_1", "n_2", "m_1", "m_2") if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    cfg_kwargs = {k: values[k] for k in values if k not in ("t_max", "dt", "n_c")}
    cfg = validate_config(SystemConfig(**cfg_kwargs))
    grid = None
    if "t_max" in values or "dt" in values:
        if not ("t_max" in values and "dt" in values):
            raise ConfigError("t_max and dt must be given together")
        grid = TimeGrid(t_max=values["t_max"], dt=values["dt"])
    n_c = int(values["n_c"]) if "n_c" in values else None
    return cfg, grid, n_c
