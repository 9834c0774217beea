"""Clustered sparse MIMO channel generator for UMi / UMa / RMa deployments.

The model is a LoS path plus up to ``max_clusters - 1`` weaker secondary
clusters.  Secondary cluster power relative to the LoS path is

    -k_factor_db - cluster_decay_db * (l - 1) + N(0, shadow_sigma_db)

for cluster index ``l >= 1``.  Path loss and Tx power scale every cluster
equally and so never change which beam wins training.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace
from typing import Iterator

import numpy as np

from . import _kernels
from .array import ArrayGeometry
from .errors import ConstraintError, DomainError

SPEED_OF_LIGHT = 299_792_458.0
RMA_MAX_CARRIER_GHZ = 7.0
# keeps every secondary strictly weaker than the LoS path
MAX_SECONDARY_REL_DB = -0.1


class Scenario(str, enum.Enum):
    UMi = "UMi"
    UMa = "UMa"
    RMa = "RMa"

    @classmethod
    def parse(cls, value) -> "Scenario":
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise DomainError(f"unknown scenario {value!r}; expected one of UMi, UMa, RMa")


# bs_height_m, ut_height_m, min_dist_2d_m
_GEOMETRY = {
    Scenario.UMi: (10.0, 1.0, 10.0),
    Scenario.UMa: (25.0, 1.0, 35.0),
    Scenario.RMa: (35.0, 1.5, 35.0),
}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: Scenario
    carrier_ghz: float
    bs_height_m: float
    ut_height_m: float
    min_dist_2d_m: float
    max_dist_2d_m: float = 500.0
    tx_power_dbm: float = 30.0
    environment: str = "LoS"
    path_loss_exponent: float = 2.0
    shadow_sigma_db: float = 4.0
    k_factor_db: float = 20.0
    max_clusters: int = 5
    cluster_decay_db: float = 6.0
    delay_spread_ns: float = 100.0
    # LoS AoD is the UT bearing, uniform in [-aod_half_width, aod_half_width]
    aod_half_width_deg: float = 50.0
    aoa_half_width_deg: float = 90.0
    # recorded for completeness; contribute 0 dB
    pressure_mbar: float = 1013.25
    humidity_pct: float = 50.0
    temperature_c: float = 20.0
    rain_rate_mm_hr: float = 0.0
    polarization: str = "Co-pol"
    foliage_loss_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Scenario.parse(self.kind))
        if not self.carrier_ghz > 0:
            raise ConstraintError(f"carrier_ghz must be > 0, got {self.carrier_ghz}")
        if self.kind is Scenario.RMa and self.carrier_ghz > RMA_MAX_CARRIER_GHZ:
            raise ConstraintError(
                f"RMa carrier frequency is limited to {RMA_MAX_CARRIER_GHZ:g} GHz, got {self.carrier_ghz:g} GHz"
            )
        if not 0 < self.min_dist_2d_m < self.max_dist_2d_m:
            raise ConstraintError(
                f"need 0 < min_dist_2d_m < max_dist_2d_m, got {self.min_dist_2d_m}, {self.max_dist_2d_m}"
            )
        if self.environment != "LoS":
            raise ConstraintError(f"only the LoS environment is modelled, got {self.environment!r}")
        if int(self.max_clusters) != self.max_clusters or self.max_clusters < 1:
            raise ConstraintError(f"max_clusters must be a positive integer, got {self.max_clusters}")
        object.__setattr__(self, "max_clusters", int(self.max_clusters))
        if self.delay_spread_ns < 0 or self.shadow_sigma_db < 0:
            raise ConstraintError("delay_spread_ns and shadow_sigma_db must be >= 0")
        for name in ("aod_half_width_deg", "aoa_half_width_deg"):
            if not 0 <= getattr(self, name) <= 90:
                raise ConstraintError(f"{name} must lie in [0, 90]")

    @property
    def carrier_hz(self) -> float:
        return self.carrier_ghz * 1e9

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def scenario_defaults(kind, carrier_ghz: float) -> ScenarioConfig:
    kind = Scenario.parse(kind)
    bs_h, ut_h, dmin = _GEOMETRY[kind]
    return ScenarioConfig(kind, float(carrier_ghz), bs_h, ut_h, dmin)


def path_loss_db(cfg: ScenarioConfig, dist_3d_m: float) -> float:
    """Close-in free-space reference path loss (1 m reference distance)."""
    fspl_1m = 20.0 * np.log10(4.0 * np.pi * cfg.carrier_hz / SPEED_OF_LIGHT)
    return float(fspl_1m + 10.0 * cfg.path_loss_exponent * np.log10(max(dist_3d_m, 1.0)))


@dataclass(frozen=True)
class PathCluster:
    gain: complex
    aod_deg: float
    aoa_deg: float
    delay_ns: float


@dataclass(frozen=True)
class ChannelRealization:
    clusters: tuple[PathCluster, ...]
    ut_distance_m: float
    ut_bearing_deg: float
    path_loss_db: float = 0.0
    tx_power_dbm: float = 0.0

    def __post_init__(self):
        if not self.clusters:
            raise DomainError("a realization needs at least one cluster")
        object.__setattr__(self, "clusters", tuple(self.clusters))

    def as_arrays(self):
        gains = np.array([c.gain for c in self.clusters], dtype=np.complex128)
        aod = np.array([c.aod_deg for c in self.clusters], dtype=np.float64)
        aoa = np.array([c.aoa_deg for c in self.clusters], dtype=np.float64)
        delay_s = np.array([c.delay_ns for c in self.clusters], dtype=np.float64) * 1e-9
        return gains, aod, aoa, delay_s


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    entries: np.ndarray
    carrier_ghz: float
    meta: ScenarioConfig | str = field(default="ingested")

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=np.complex128)
        if h.ndim != 2:
            raise DomainError(f"channel matrix must be 2-D, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise DomainError("channel matrix has non-finite entries")
        object.__setattr__(self, "entries", h)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __eq__(self, other):
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.carrier_ghz == other.carrier_ghz
            and np.array_equal(self.entries.view(np.uint64), other.entries.view(np.uint64))
        )


def draw_realization(cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelRealization:
    # annulus, area-uniform: r^2 ~ U(min^2, max^2)
    r2 = rng.uniform(cfg.min_dist_2d_m**2, cfg.max_dist_2d_m**2)
    dist_2d = float(np.sqrt(r2))
    bearing = float(rng.uniform(-cfg.aod_half_width_deg, cfg.aod_half_width_deg))
    los_aoa = float(rng.uniform(-cfg.aoa_half_width_deg, cfg.aoa_half_width_deg))
    los_shadow = float(rng.normal(0.0, cfg.shadow_sigma_db)) if cfg.shadow_sigma_db > 0 else 0.0
    n_clusters = int(rng.integers(1, cfg.max_clusters + 1))

    dist_3d = float(np.hypot(dist_2d, cfg.bs_height_m - cfg.ut_height_m))
    pl = path_loss_db(cfg, dist_3d)
    los_amp = 10.0 ** ((cfg.tx_power_dbm - pl - los_shadow) / 20.0)
    los_delay_ns = dist_3d / SPEED_OF_LIGHT * 1e9
    clusters = [PathCluster(complex(los_amp), bearing, los_aoa, los_delay_ns)]

    m = n_clusters - 1
    if m:
        shadow = rng.normal(0.0, cfg.shadow_sigma_db, size=m) if cfg.shadow_sigma_db > 0 else np.zeros(m)
        aod = rng.uniform(-90.0, 90.0, size=m)
        aoa = rng.uniform(-cfg.aoa_half_width_deg, cfg.aoa_half_width_deg, size=m)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=m)
        if cfg.delay_spread_ns > 0:
            excess = rng.exponential(cfg.delay_spread_ns, size=m)
        else:
            excess = np.zeros(m)
        rel_db = -cfg.k_factor_db - cfg.cluster_decay_db * np.arange(m) + shadow
        rel_db = np.minimum(rel_db, MAX_SECONDARY_REL_DB)
        amp = los_amp * 10.0 ** (rel_db / 20.0)
        for l in range(m):
            clusters.append(
                PathCluster(
                    complex(amp[l] * np.exp(1j * phase[l])),
                    float(aod[l]),
                    float(aoa[l]),
                    float(los_delay_ns + excess[l]),
                )
            )
    return ChannelRealization(tuple(clusters), dist_2d, bearing, pl, cfg.tx_power_dbm)


def realization_to_matrix(
    real: ChannelRealization,
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    sub_carrier_hz_offset: float = 0.0,
    carrier_ghz: float = 0.0,
    meta: ScenarioConfig | str = "generated",
) -> ChannelMatrix:
    """H = sum_l g_l exp(-j 2 pi (f_c + offset) tau_l) a_rx(aoa_l) a_tx(aod_l)^H."""
    if isinstance(meta, ScenarioConfig):
        carrier_ghz = meta.carrier_ghz
    gains, aod, aoa, delay_s = real.as_arrays()
    freq = carrier_ghz * 1e9 + sub_carrier_hz_offset
    h = _kernels.synthesize(
        gains, aod, aoa, delay_s, freq,
        tx.num_elements, tx.spacing_wavelengths, rx.num_elements, rx.spacing_wavelengths,
    )
    return ChannelMatrix(h, carrier_ghz, meta)


def subcarrier_offsets(bandwidth_hz: float, num_subcarriers: int) -> np.ndarray:
    if num_subcarriers < 1:
        raise DomainError("num_subcarriers must be >= 1")
    spacing = bandwidth_hz / num_subcarriers
    return (np.arange(num_subcarriers) - (num_subcarriers - 1) / 2.0) * spacing


def iter_subcarriers(real, tx, rx, bandwidth_hz, num_subcarriers, carrier_ghz=0.0, meta="generated") -> Iterator[ChannelMatrix]:
    for off in subcarrier_offsets(bandwidth_hz, num_subcarriers):
        yield realization_to_matrix(real, tx, rx, float(off), carrier_ghz, meta)


def subcarrier_sweep(real, tx, rx, bandwidth_hz, num_subcarriers, carrier_ghz=0.0, meta="generated") -> list[ChannelMatrix]:
    return list(iter_subcarriers(real, tx, rx, bandwidth_hz, num_subcarriers, carrier_ghz, meta))


def apply_tx_power(h: ChannelMatrix, delta_db: float) -> ChannelMatrix:
    if delta_db == 0:
        return h
    return ChannelMatrix(h.entries * 10.0 ** (delta_db / 20.0), h.carrier_ghz, h.meta)
