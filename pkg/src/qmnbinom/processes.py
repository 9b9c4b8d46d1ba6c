"""Discrete-time (q, mu, nu)-TASEP and (q, mu, nu)-Boson zero-range simulators.

Both use parallel update: every particle (TASEP) or site (Boson) draws its
jump against the configuration at time ``t`` and all moves are applied at
once.  Uniforms are consumed in ascending particle index, resp. ascending
site index, one per particle or site per step.

TASEP lives on the integer line.  Follower ``i`` jumps ``j ~ phi(. | gap_i)``
with ``gap_i`` the number of empty sites in front of it, so it can never
reach the particle ahead; the leader jumps by the infinite-m law.  The Boson
process lives on a ring of ``L`` sites and a site holding ``m`` particles
sends ``j ~ phi(. | m)`` of them to one neighbour.
"""
from __future__ import annotations

import enum
import functools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence, Union

from .distribution import TAIL_EPSILON, PmfTable, SampleStream, pmf_table, pmf_table_infinite
from .qseries import DeformParams

__all__ = [
    "Kind",
    "OccupationConfig",
    "ParticleConfig",
    "SimulationInvariantError",
    "StepRecord",
    "TrajectorySummary",
    "boson_step",
    "run_ensemble",
    "tasep_step",
]


class SimulationInvariantError(RuntimeError):
    """A step broke ordering or particle conservation; this is a bug."""


class Kind(str, enum.Enum):
    TASEP = "tasep"
    BOSON = "boson"


@dataclass(frozen=True)
class ParticleConfig:
    """TASEP positions, leader first.

    With ``direction=+1`` (jumps to the right) positions are strictly
    decreasing; with ``direction=-1`` they are strictly increasing.
    """

    positions: tuple[int, ...]
    time: int = 0
    direction: int = 1

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if not self.is_ordered():
            order = "decreasing" if self.direction == 1 else "increasing"
            raise ValueError(f"positions must be strictly {order}: {list(self.positions)}")

    def is_ordered(self) -> bool:
        p, d = self.positions, self.direction
        return all(d * (p[i - 1] - p[i]) > 0 for i in range(1, len(p)))

    @property
    def gaps(self) -> list[int]:
        p, d = self.positions, self.direction
        return [d * (p[i - 1] - p[i]) - 1 for i in range(1, len(p))]

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class OccupationConfig:
    """Particle counts on a ring, ``counts[k]`` at site ``k``."""

    counts: tuple[int, ...]
    time: int = 0

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if not self.counts:
            raise ValueError("ring must have at least one site")
        if any(c < 0 for c in self.counts):
            raise ValueError(f"occupancies must be >= 0: {list(self.counts)}")

    @property
    def ring_size(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


Config = Union[ParticleConfig, OccupationConfig]


@functools.lru_cache(maxsize=64)
def _float_params(params: DeformParams) -> DeformParams:
    return params.as_float()


def _leader_table(params: DeformParams) -> PmfTable:
    return pmf_table_infinite(_float_params(params), TAIL_EPSILON)


def _tasep_jumps(config: ParticleConfig, params: DeformParams, stream: SampleStream) -> list[int]:
    if not config.positions:
        return []
    fp = _float_params(params)
    us = stream.uniforms(len(config))
    jumps = [stream.lookup(_leader_table(params).cdf, us[0])]
    for u, gap in zip(us[1:], config.gaps):
        jumps.append(stream.lookup(pmf_table(fp, gap).cdf, u))
    return jumps


def _apply_tasep(config: ParticleConfig, jumps: Sequence[int]) -> ParticleConfig:
    d = config.direction
    gaps = config.gaps
    if any(j < 0 for j in jumps) or any(j > g for j, g in zip(jumps[1:], gaps)):
        raise SimulationInvariantError(f"jump outside support: jumps={list(jumps)}, gaps={gaps}")
    moved = tuple(x + d * j for x, j in zip(config.positions, jumps))
    if any(d * (moved[i - 1] - moved[i]) <= 0 for i in range(1, len(moved))):
        raise SimulationInvariantError(f"ordering broken: {list(config.positions)} -> {list(moved)}")
    return ParticleConfig(moved, config.time + 1, d)


def tasep_step(config: ParticleConfig, params: DeformParams, stream: SampleStream) -> ParticleConfig:
    """Advance the TASEP by one parallel step."""
    return _apply_tasep(config, _tasep_jumps(config, params, stream))


def _boson_moves(config: OccupationConfig, params: DeformParams, stream: SampleStream) -> list[int]:
    fp = _float_params(params)
    us = stream.uniforms(config.ring_size)
    return [stream.lookup(pmf_table(fp, m).cdf, u) for u, m in zip(us, config.counts)]


def _apply_boson(config: OccupationConfig, moves: Sequence[int], direction: int) -> OccupationConfig:
    size = config.ring_size
    counts = list(config.counts)
    for k, j in enumerate(moves):
        if not 0 <= j <= config.counts[k]:
            raise SimulationInvariantError(f"site {k} emitted {j} of {config.counts[k]} particles")
        counts[k] -= j
        counts[(k + direction) % size] += j
    if sum(counts) != config.total:
        raise SimulationInvariantError(f"particle number changed: {config.total} -> {sum(counts)}")
    return OccupationConfig(tuple(counts), config.time + 1)


def boson_step(
    config: OccupationConfig, params: DeformParams, stream: SampleStream, direction: int = -1
) -> OccupationConfig:
    """Advance the ring by one parallel step; particles hop to ``k + direction``."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    return _apply_boson(config, _boson_moves(config, params, stream), direction)


@dataclass(frozen=True)
class StepRecord:
    """Replica-averaged observables at one time.

    ``current`` is the total displacement during the step ending at ``time``
    (zero at time 0).  ``mean_displacement`` is the cumulative displacement per
    particle.  ``occupancy_histogram[k]`` counts TASEP gaps, resp. ring sites,
    holding ``k``.
    """

    time: int
    current: float
    mean_displacement: float
    occupancy_histogram: tuple[float, ...]


@dataclass
class TrajectorySummary:
    kind: Kind
    params: DeformParams
    steps: int
    replicas: int
    base_seed: int
    records: list[StepRecord] = field(default_factory=list)
    final_configs: list[Config] = field(default_factory=list)
    particle_mean_displacement: tuple[float, ...] = ()


def _histogram(values: Sequence[int]) -> list[int]:
    if not values:
        return []
    tally = Counter(values)
    return [tally.get(k, 0) for k in range(max(values) + 1)]


def _observe(config: Config) -> list[int]:
    if isinstance(config, ParticleConfig):
        return _histogram(config.gaps)
    return _histogram(config.counts)


def _run_replica(kind: Kind, init: Config, params: DeformParams, steps: int, seed: int, direction: int):
    stream = SampleStream(seed=seed)
    config = init
    currents = [0]
    cumulative = [0]
    hists = [_observe(init)]
    moved_total = 0
    for _ in range(steps):
        if kind is Kind.TASEP:
            jumps = _tasep_jumps(config, params, stream)
            config = _apply_tasep(config, jumps)
        else:
            jumps = _boson_moves(config, params, stream)
            config = _apply_boson(config, jumps, direction)
        step_current = sum(jumps)
        moved_total += step_current
        currents.append(step_current)
        cumulative.append(moved_total)
        hists.append(_observe(config))
    return config, currents, cumulative, hists


def run_ensemble(
    kind: Kind | str,
    init: Config,
    params: DeformParams,
    steps: int,
    replicas: int = 1,
    base_seed: int = 0,
    direction: int = -1,
) -> TrajectorySummary:
    """Run ``replicas`` independent copies from ``init``; replica ``r`` uses seed ``base_seed + r``.

    ``direction`` sets the Boson hop direction; TASEP direction comes from
    ``init.direction``.
    """
    kind = Kind(kind)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    expected = ParticleConfig if kind is Kind.TASEP else OccupationConfig
    if not isinstance(init, expected):
        raise TypeError(f"{kind.value} needs a {expected.__name__}")
    n_particles = len(init) if isinstance(init, ParticleConfig) else init.total

    runs = [_run_replica(kind, init, params, steps, base_seed + r, direction) for r in range(replicas)]

    records = []
    for t in range(steps + 1):
        current = sum(run[1][t] for run in runs) / replicas
        disp = sum(run[2][t] for run in runs) / replicas
        width = max(len(run[3][t]) for run in runs)
        hist = tuple(
            sum(run[3][t][k] if k < len(run[3][t]) else 0 for run in runs) / replicas for k in range(width)
        )
        records.append(StepRecord(t, float(current), disp / n_particles if n_particles else 0.0, hist))

    finals = [run[0] for run in runs]
    per_particle: tuple[float, ...] = ()
    if kind is Kind.TASEP:
        d = init.direction
        per_particle = tuple(
            sum(d * (cfg.positions[i] - init.positions[i]) for cfg in finals) / replicas for i in range(len(init))
        )
    return TrajectorySummary(kind, params, steps, replicas, base_seed, records, finals, per_particle)
