"""Seeded synthetic dataset generator.

Desk-scale stand-in for the real merged sources. Crops carry learnable
signals on three channels with different temporal behavior:

* weather and soil: crop- and season-conditional, stable across years, but
  deliberately overlapping between crops (a partial signal);
* economic columns: well-separated per-crop levels plus an additive,
  accelerating per-year shift scaled by ``drift_strength``. Values are
  constant within a (state, crop, year) cell, matching the broadcast join
  of the economic source;
* per-cell noise makes each (state, crop, year) an identifiable fingerprint.

The final-year shift is comparable to the between-crop spacing, so models
trained chronologically meet out-of-range economic values at test time,
while earlier-year values (reachable through lag columns) stay inside the
training support. Crops are concentrated in the mid/late seasons and the
last year is sampled slightly under the 20% test share, so a 0.8
chronological boundary leaves the final year essentially unseen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CROP_INDEX, CROPS, SEASONS, STATES
from .dataset import CropRecord, Dataset, derive_yield
from .errors import BadSpec
from .rng import spawn


@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int = 2000
    n_states: int = 10
    n_crops: int = 15
    years: tuple[int, ...] = (2011, 2012, 2013, 2014)
    seed: int = 0
    drift_strength: float = 420.0  # absolute shift of economic means by the final year
    noise_std: float = 1.0         # scales every stochastic component
    season_effect: float = 1.0     # amplitude of seasonal weather offsets

    def validate(self) -> None:
        if self.n_rows <= 0:
            raise BadSpec("n_rows must be positive")
        if not 1 <= self.n_states <= len(STATES):
            raise BadSpec(f"n_states must be in 1..{len(STATES)}")
        if not 1 <= self.n_crops <= len(CROPS):
            raise BadSpec(f"n_crops must be in 1..{len(CROPS)}")
        if len(self.years) < 1:
            raise BadSpec("years span must be nonempty")
        if self.drift_strength < 0:
            raise BadSpec("drift_strength must be >= 0")
        if self.noise_std < 0:
            raise BadSpec("noise_std must be >= 0")


# Per-crop home seasons concentrate on the mid/late part of the year.
_HOME_SEASONS = ("Kharif", "Rabi", "Autumn")
_HOME_PROBABILITY = 0.75

# Seasonal deviations (scaled by season_effect) and global means.
_WEATHER_MEAN = {"temperature": 25.0, "humidity": 55.0, "precipitation": 70.0,
                 "wind_speed": 10.0}
_SEASON_DEV = {
    "temperature": (-7.0, 7.0, 3.0, 0.0, -5.0, -1.0),
    "humidity": (-15.0, -20.0, 20.0, 10.0, -5.0, 0.0),
    "precipitation": (-50.0, -55.0, 110.0, 20.0, -35.0, -10.0),
    "wind_speed": (-2.0, 4.0, 2.0, 0.0, -1.0, 1.0),
}
_WEATHER_NOISE = {"temperature": 1.0, "humidity": 2.0, "precipitation": 8.0,
                  "wind_speed": 1.0}
# Crop-specific weather deviation amplitudes (overlapping between crops).
_CROP_DEV_AMP = {"temperature": 5.0, "humidity": 12.0, "precipitation": 50.0,
                 "wind_speed": 4.0}
_CROP_DEV_PRIME = {"temperature": 7, "humidity": 11, "precipitation": 5,
                   "wind_speed": 13}

# Economic levels: base + spacing * global crop index, shifted by
# ramp(year) * scale * drift_strength; per-(state, crop, year) noise sigma
# wide enough that trees cannot separate crops on one economic column alone.
_ECON = {
    "msp": (900.0, 360.0, 1.0, 120.0),
    "operational_cost": (4500.0, 700.0, 1.8, 250.0),
    "fixed_cost": (2200.0, 420.0, 1.1, 150.0),
}

_LAST_YEAR_WEIGHT = 0.7  # keeps the final year just under a 20% row share


def _crop_dev(crop_idx: int, column: str) -> float:
    prime = _CROP_DEV_PRIME[column]
    return _CROP_DEV_AMP[column] * (((crop_idx * prime) % 19) - 9.0) / 9.0


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Build a Dataset of crop records; identical spec and seed give identical rows."""
    spec.validate()
    rng = spawn(spec.seed, "synth-rows")
    econ_rng = spawn(spec.seed, "synth-econ")

    states = STATES[: spec.n_states]
    crops = CROPS[: spec.n_crops]
    years = tuple(int(y) for y in spec.years)
    n_years = len(years)
    districts = {s: [f"{s} D{i + 1}" for i in range(3)] for s in states}

    def ramp(year: int) -> float:
        # Accelerating but strictly increasing: early-year shifts stay small
        # relative to crop spacing, the final-year shift crosses it.
        if n_years == 1:
            return 0.0
        t = (year - years[0]) / (years[-1] - years[0])
        return 0.3 * t + 0.7 * t ** 3

    # Economic table first, so cell values do not depend on row order.
    econ_table: dict[tuple, dict[str, float]] = {}
    for state in states:
        for crop in crops:
            c = CROP_INDEX[crop]
            for year in years:
                cell = {}
                for col, (base, spacing, scale, sigma) in _ECON.items():
                    level = base + spacing * c + spec.drift_strength * scale * ramp(year)
                    cell[col] = max(level + spec.noise_std * sigma * econ_rng.standard_normal(), 0.0)
                cell["total_cost"] = cell["operational_cost"] + cell["fixed_cost"]
                econ_table[(state, crop, year)] = cell

    year_weights = np.array([1.0] * (n_years - 1) + [_LAST_YEAR_WEIGHT]) \
        if n_years > 1 else np.array([1.0])
    year_weights = year_weights / year_weights.sum()

    # Deterministic row allocation: per-year counts by largest remainder,
    # crops balanced within each year so yearly means reflect the drift and
    # not the crop mix.
    raw = year_weights * spec.n_rows
    counts = np.floor(raw).astype(int)
    for i in np.argsort(-(raw - counts))[: spec.n_rows - counts.sum()]:
        counts[i] += 1
    year_of_row = np.repeat(years, counts)
    crop_of_row = np.concatenate(
        [rng.permutation(np.arange(c_count) % len(crops)) for c_count in counts])

    records = []
    for row_idx in range(spec.n_rows):
        year = int(year_of_row[row_idx])
        state = states[rng.integers(len(states))]
        crop = crops[int(crop_of_row[row_idx])]
        c = CROP_INDEX[crop]
        home = _HOME_SEASONS[c % len(_HOME_SEASONS)]
        if rng.random() < _HOME_PROBABILITY:
            season = home
        else:
            season = SEASONS[rng.integers(len(SEASONS))]
        district = districts[state][rng.integers(3)]
        s_rank = SEASONS.index(season)

        weather = {}
        for col in _WEATHER_MEAN:
            weather[col] = (_WEATHER_MEAN[col]
                            + spec.season_effect * _SEASON_DEV[col][s_rank]
                            + _crop_dev(c, col)
                            + spec.noise_std * _WEATHER_NOISE[col] * rng.standard_normal())

        soil_group = c // 5
        n_val = 55.0 + 6.0 * soil_group + spec.noise_std * 8.0 * rng.standard_normal()
        p_val = 28.0 + 4.0 * soil_group + spec.noise_std * 6.0 * rng.standard_normal()
        k_val = 24.0 + 3.0 * soil_group + spec.noise_std * 5.0 * rng.standard_normal()
        soil_type = f"ST{(states.index(state) * 3 + districts[state].index(district)) % 4 + 1}"

        area = float(np.exp(6.0 + 0.8 * spec.noise_std * rng.standard_normal()))
        true_yield = 1.2 + 0.25 * (c % 6)
        production = area * true_yield * (1.0 + 0.3 * spec.noise_std * rng.standard_normal())
        production = max(production, 0.0)

        econ = econ_table[(state, crop, year)]
        records.append(CropRecord(
            state=state,
            district=district,
            year=year,
            season=season,
            crop=crop,
            area=area,
            temperature=weather["temperature"],
            wind_speed=weather["wind_speed"],
            precipitation=weather["precipitation"],
            humidity=weather["humidity"],
            soil_type=soil_type,
            n=n_val,
            p=p_val,
            k=k_val,
            production=production,
            operational_cost=econ["operational_cost"],
            fixed_cost=econ["fixed_cost"],
            total_cost=econ["total_cost"],
            msp=econ["msp"],
        ))

    ds = Dataset(records=records, provenance={"generator": "synthetic",
                                              "spec": repr(spec)})
    return derive_yield(ds)
