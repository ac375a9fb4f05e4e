"""
Schema-compatible synthetic datasets for desk-scale runs.

Labels of region r in month m follow a closed form::

    base(r, m) = level_r + slope_r * m + amp_r * sin(2 * pi * (m + phase_r) / 12)
    core(r, m) = base(r, m) + flow_coefficient * level_r * d(r, m)

    reservation_days = core * (1 + noise_scale * e1)
    revenue          = price_r * core * (1 + noise_scale * e2)
    num_reservations = core / stay_r * (1 + noise_scale * e3)

clipped at zero. `d` is an AR(1) driver that also moves the designated
human-flow variables, `flow_lead` months earlier: the human-flow record of
month m carries d(r, m + flow_lead). With zero noise and zero flow
coefficient the labels reduce to the trend + seasonality terms above.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd

from ..months import calendar_of
from ..types import ConfigurationError
from .ingest import PanelPaths
from .schema import (
    ACCESSIBILITY_VARIABLES,
    HUMAN_FLOW_VARIABLES,
    LABEL_COLUMNS,
    TABLE_COLUMNS,
    TABLE_FILES,
)


logger = logging.getLogger(__name__)

DRIVER_AR = 0.7
DRIVER_CLIP = 3.0

PROPERTY_TYPES = ("Apartment", "House", "Officetel", "Guesthouse", "Villa")
LISTING_TYPES = ("Entire home/apt", "Private room", "Shared room")
RESPONSE_TIMES = ("within an hour", "within a few hours", "within a day", "a few days or more")
CANCELLATION = ("Flexible", "Moderate", "Strict", "Super Strict")
CHECKIN_TIMES = ("14:00", "15:00", "16:00", "Flexible")
CHECKOUT_TIMES = ("10:00", "11:00", "12:00")


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs of the synthetic generator."""
    start_month: str = "2017-01"
    window_size: int = 6
    horizon: int = 3
    noise_scale: float = 0.05
    flow_coefficient: float = 0.6
    flow_lead: int = 3
    flow_amplitude: float = 0.3
    flow_variables: Tuple[str, ...] = (
        "pop_20s_male", "pop_20s_female", "pop_30s_male", "pop_30s_female", "short_term_foreign",
    )
    level_range: Tuple[float, float] = (20.0, 60.0)
    slope_range: Tuple[float, float] = (0.0, 0.02)
    amplitude_range: Tuple[float, float] = (0.05, 0.2)
    price_range: Tuple[float, float] = (50.0, 150.0)
    stay_range: Tuple[float, float] = (1.5, 4.0)
    mean_listings: float = 10.0
    listing_dispersion: float = 0.8
    missing_rate: float = 0.05

    def validate(self) -> None:
        known = {v.key for v in HUMAN_FLOW_VARIABLES}
        unknown = set(self.flow_variables) - known
        if unknown:
            raise ConfigurationError(f"unknown flow variables {sorted(unknown)}")
        if self.noise_scale < 0 or self.flow_lead < 0:
            raise ConfigurationError("noise_scale and flow_lead must be >= 0")
        if not 0.0 <= self.flow_amplitude * DRIVER_CLIP < 1.0:
            raise ConfigurationError("flow_amplitude too large: human-flow values could go negative")


@dataclass(frozen=True)
class SyntheticParameters:
    """Per-region draws behind the closed form, indexed like the region list."""
    regions: Tuple[str, ...]
    level: np.ndarray
    slope: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    price: np.ndarray
    stay: np.ndarray
    driver: np.ndarray  # (regions, months + flow_lead)

    def base(self, region: int, month: int) -> float:
        return float(
            self.level[region]
            + self.slope[region] * month
            + self.amplitude[region] * np.sin(2.0 * np.pi * (month + self.phase[region]) / 12.0)
        )


def region_codes(regions: int) -> Tuple[str, ...]:
    return tuple(f"D{i:03d}" for i in range(regions))


def synthetic_parameters(regions: int, months: int, seed: int,
                         spec: SyntheticSpec = SyntheticSpec()) -> SyntheticParameters:
    """Draw the per-region parameters and the flow driver (first draws of the seeded stream)."""
    rng = np.random.default_rng(seed)
    level = rng.uniform(*spec.level_range, size=regions)
    slope = rng.uniform(*spec.slope_range, size=regions) * level
    amplitude = rng.uniform(*spec.amplitude_range, size=regions) * level
    phase = rng.integers(0, 12, size=regions)
    price = rng.uniform(*spec.price_range, size=regions)
    stay = rng.uniform(*spec.stay_range, size=regions)

    steps = months + spec.flow_lead
    innovations = rng.standard_normal((regions, steps))
    driver = np.empty((regions, steps))
    driver[:, 0] = innovations[:, 0]
    scale = np.sqrt(1.0 - DRIVER_AR ** 2)
    for s in range(1, steps):
        driver[:, s] = DRIVER_AR * driver[:, s - 1] + scale * innovations[:, s]
    driver = np.clip(driver, -DRIVER_CLIP, DRIVER_CLIP)

    return SyntheticParameters(
        regions=region_codes(regions), level=level, slope=slope, amplitude=amplitude,
        phase=phase, price=price, stay=stay, driver=driver,
    )


def _labels(params: SyntheticParameters, months: int, spec: SyntheticSpec,
            rng: np.random.Generator) -> pd.DataFrame:
    noise = rng.standard_normal((len(params.regions), months, 3))
    rows = []
    for r, region in enumerate(params.regions):
        for m in range(months):
            core = params.base(r, m) + spec.flow_coefficient * params.level[r] * params.driver[r, m]
            e = 1.0 + spec.noise_scale * noise[r, m]
            values = (
                core * e[0],
                params.price[r] * core * e[1],
                core / params.stay[r] * e[2],
            )
            rows.append([region, calendar_of(spec.start_month, m), *(max(v, 0.0) for v in values)])
    return pd.DataFrame(rows, columns=["region", "month", *LABEL_COLUMNS])


def _human_flow(params: SyntheticParameters, months: int, spec: SyntheticSpec,
                rng: np.random.Generator) -> pd.DataFrame:
    age_keys = [v.key for v in HUMAN_FLOW_VARIABLES if v.key.startswith("pop_")]
    base = rng.lognormal(mean=np.log(800.0), sigma=0.5, size=(len(params.regions), len(HUMAN_FLOW_VARIABLES)))
    season_phase = rng.uniform(0, 2 * np.pi, size=len(HUMAN_FLOW_VARIABLES))
    keys = [v.key for v in HUMAN_FLOW_VARIABLES]
    designated = set(spec.flow_variables)

    rows = []
    for r, region in enumerate(params.regions):
        for m in range(months):
            record: Dict[str, float] = {}
            for j, key in enumerate(keys):
                if key == "total_domestic_pop":
                    continue
                if key in designated:
                    factor = 1.0 + spec.flow_amplitude * params.driver[r, m + spec.flow_lead]
                else:
                    factor = 1.0 + 0.05 * np.sin(2 * np.pi * m / 12.0 + season_phase[j])
                record[key] = float(base[r, j] * factor)
            record["total_domestic_pop"] = float(sum(record[k] for k in age_keys))
            rows.append([region, calendar_of(spec.start_month, m), *(record[k] for k in keys)])
    return pd.DataFrame(rows, columns=["region", "month", *keys])


def _accessibility(params: SyntheticParameters, months: int, spec: SyntheticSpec,
                   rng: np.random.Generator) -> pd.DataFrame:
    keys = [v.key for v in ACCESSIBILITY_VARIABLES]
    integer = {v.key for v in ACCESSIBILITY_VARIABLES if v.integer}
    base = rng.lognormal(mean=np.log(200.0), sigma=0.6, size=(len(params.regions), len(keys)))
    base[:, keys.index("tunnels")] /= 50.0
    base[:, keys.index("bridges")] /= 40.0
    base[:, keys.index("total_road_length")] *= 60.0
    for key in ("bus_boarding", "bus_alighting", "subway_boarding", "subway_alighting"):
        base[:, keys.index(key)] *= 300.0
    ridership = {"bus_boarding", "bus_alighting", "subway_boarding", "subway_alighting"}

    rows = []
    for r, region in enumerate(params.regions):
        for m in range(months):
            values = []
            for j, key in enumerate(keys):
                value = base[r, j]
                if key in ridership:
                    value *= 1.0 + 0.1 * np.sin(2 * np.pi * (m + params.phase[r]) / 12.0)
                else:
                    value *= 1.0 + 0.002 * m
                values.append(float(np.round(value)) if key in integer else float(value))
            rows.append([region, calendar_of(spec.start_month, m), *values])
    return pd.DataFrame(rows, columns=["region", "month", *keys])


def _maybe(rng: np.random.Generator, spec: SyntheticSpec, value):
    return None if rng.random() < spec.missing_rate else value


def _listings(params: SyntheticParameters, months: int, spec: SyntheticSpec,
              rng: np.random.Generator) -> pd.DataFrame:
    mean_counts = rng.lognormal(np.log(spec.mean_listings), spec.listing_dispersion, size=len(params.regions))
    rows = []
    for r, region in enumerate(params.regions):
        counts = rng.poisson(mean_counts[r] * (1.0 + 0.1 * np.sin(2 * np.pi * np.arange(months) / 12.0)))
        for m in range(months):
            for k in range(int(counts[m])):
                available = int(rng.integers(0, 31))
                blocked = int(rng.integers(0, 31 - available + 1))
                row = {
                    "listing_id": f"{region}-L{k:04d}",
                    "region": region,
                    "month": calendar_of(spec.start_month, m),
                    "property_type": _maybe(rng, spec, PROPERTY_TYPES[rng.integers(len(PROPERTY_TYPES))]),
                    "listing_type": _maybe(rng, spec, LISTING_TYPES[rng.integers(len(LISTING_TYPES))]),
                    "response_time": _maybe(rng, spec, RESPONSE_TIMES[rng.integers(len(RESPONSE_TIMES))]),
                    "cancellation_policy": _maybe(rng, spec, CANCELLATION[rng.integers(len(CANCELLATION))]),
                    "checkin_time": _maybe(rng, spec, CHECKIN_TIMES[rng.integers(len(CHECKIN_TIMES))]),
                    "checkout_time": _maybe(rng, spec, CHECKOUT_TIMES[rng.integers(len(CHECKOUT_TIMES))]),
                    "superhost": _maybe(rng, spec, "true" if rng.random() < 0.3 else "false"),
                    "instantbook": _maybe(rng, spec, "true" if rng.random() < 0.6 else "false"),
                    "pets_allowed": _maybe(rng, spec, "true" if rng.random() < 0.2 else "false"),
                    "property_manager": _maybe(rng, spec, "true" if rng.random() < 0.1 else "false"),
                    "available_days": _maybe(rng, spec, available),
                    "blocked_days": _maybe(rng, spec, blocked),
                    "bedrooms": _maybe(rng, spec, int(rng.integers(1, 5))),
                    "bathrooms": _maybe(rng, spec, int(rng.integers(1, 3))),
                    "max_guests": _maybe(rng, spec, int(rng.integers(1, 9))),
                    "response_rate": _maybe(rng, spec, round(float(rng.uniform(50, 100)), 1)),
                    "minimum_stay": _maybe(rng, spec, int(rng.integers(1, 8))),
                    "num_photos": _maybe(rng, spec, int(rng.integers(5, 60))),
                    "overall_rating": _maybe(rng, spec, round(float(rng.uniform(3.5, 5.0)), 2)),
                    "num_reviews": _maybe(rng, spec, int(rng.integers(0, 300))),
                }
                rows.append(row)
    return pd.DataFrame(rows, columns=list(TABLE_COLUMNS["listings"]))


def generate_synthetic(regions: int, months: int, seed: int, out_dir: Union[str, Path],
                       spec: SyntheticSpec = SyntheticSpec()) -> PanelPaths:
    """Write listings.csv, accessibility.csv, human_flow.csv and labels.csv to out_dir."""
    spec.validate()
    if regions < 4:
        raise ConfigurationError(f"synthetic data needs at least 4 regions, got {regions}")
    minimum = spec.window_size + spec.horizon + 3
    if months < minimum:
        raise ConfigurationError(f"synthetic data needs at least {minimum} months, got {months}")

    params = synthetic_parameters(regions, months, seed, spec)
    # Independent child streams so each table is stable if another one changes.
    label_rng, flow_rng, access_rng, listing_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)
    )
    tables = {
        "labels": _labels(params, months, spec, label_rng),
        "human_flow": _human_flow(params, months, spec, flow_rng),
        "accessibility": _accessibility(params, months, spec, access_rng),
        "listings": _listings(params, months, spec, listing_rng),
    }

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for table, frame in tables.items():
        frame.to_csv(out_dir / TABLE_FILES[table], index=False, float_format="%.6f", lineterminator="\n")
    logger.info(
        "synthetic dataset: %d regions x %d months (seed %d), %d listing rows -> %s",
        regions, months, seed, len(tables["listings"]), out_dir,
    )
    return PanelPaths.in_dir(out_dir)
