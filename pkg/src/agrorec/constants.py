"""Fixed vocabularies and file schemas shared across the pipeline.

Class labels, state names and the season order are global constants so that
encoded feature/label indices are stable across runs and model files.
"""

from __future__ import annotations

CROPS: tuple[str, ...] = (
    "Arhar",
    "Bajra",
    "Barley",
    "Cotton",
    "Gram",
    "Groundnut",
    "Jowar",
    "Jute",
    "Maize",
    "Moong",
    "Paddy",
    "Ragi",
    "Rapeseed and Mustard",
    "Safflower",
    "Sesamum",
    "Soyabean",
    "Sunflower",
    "Urad",
    "Wheat",
)

STATES: tuple[str, ...] = (
    "Andhra Pradesh",
    "Assam",
    "Bihar",
    "Chhattisgarh",
    "Gujarat",
    "Haryana",
    "Karnataka",
    "Madhya Pradesh",
    "Maharashtra",
    "Odisha",
    "Punjab",
    "Tamil Nadu",
    "Uttar Pradesh",
    "Uttarakhand",
    "West Bengal",
)

# Chronological rank of seasons within a calendar year.
SEASONS: tuple[str, ...] = ("Winter", "Summer", "Kharif", "Autumn", "Rabi", "WholeYear")
SEASON_RANK: dict[str, int] = {name: i for i, name in enumerate(SEASONS)}

CROP_INDEX: dict[str, int] = {c: i for i, c in enumerate(CROPS)}
N_CLASSES: int = len(CROPS)

DEFAULT_KEEP_YEARS: tuple[int, ...] = (2011, 2012, 2013, 2014)

# CSV header strings for the two raw sources (see docs/data_dictionary.md).
ENV_HEADER: tuple[str, ...] = (
    "State Names",
    "District Names",
    "Crop Year",
    "Season Names",
    "Crop Names",
    "Area",
    "Temperature",
    "Wind Speed",
    "Precipitation",
    "Humidity",
    "Soil Type",
    "N",
    "P",
    "K",
    "Production",
)

ECON_HEADER: tuple[str, ...] = (
    "State Names",
    "Crop Year",
    "Crop Names",
    "Operational Cost",
    "Fixed Cost",
    "Total Cost",
    "MSP",
)

# Cleaned/merged dataset: env columns, then the four economic columns, then Yield.
CLEANED_HEADER: tuple[str, ...] = ENV_HEADER + (
    "Operational Cost",
    "Fixed Cost",
    "Total Cost",
    "MSP",
    "Yield",
)

# CSV column name -> CropRecord attribute.
COLUMN_TO_FIELD: dict[str, str] = {
    "State Names": "state",
    "District Names": "district",
    "Crop Year": "year",
    "Season Names": "season",
    "Crop Names": "crop",
    "Area": "area",
    "Temperature": "temperature",
    "Wind Speed": "wind_speed",
    "Precipitation": "precipitation",
    "Humidity": "humidity",
    "Soil Type": "soil_type",
    "N": "n",
    "P": "p",
    "K": "k",
    "Production": "production",
    "Operational Cost": "operational_cost",
    "Fixed Cost": "fixed_cost",
    "Total Cost": "total_cost",
    "MSP": "msp",
    "Yield": "yield_",
}
FIELD_TO_COLUMN: dict[str, str] = {v: k for k, v in COLUMN_TO_FIELD.items()}

NUMERIC_FIELDS: tuple[str, ...] = (
    "area",
    "temperature",
    "wind_speed",
    "precipitation",
    "humidity",
    "n",
    "p",
    "k",
    "production",
    "operational_cost",
    "fixed_cost",
    "total_cost",
    "msp",
    "yield_",
)

CATEGORICAL_FIELDS: tuple[str, ...] = ("state", "district", "season", "crop", "soil_type")

# Default model inputs: every numeric measurement plus soil type. Keys used
# for joining/ordering (state, district, season, year) are protocol variables,
# not features, unless a config opts them in.
DEFAULT_NUMERIC_FEATURES: tuple[str, ...] = NUMERIC_FIELDS
DEFAULT_CATEGORICAL_FEATURES: tuple[str, ...] = ("soil_type",)
