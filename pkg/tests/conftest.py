import numpy as np
import pytest

from agrorec.dataset import CropRecord, Dataset, derive_yield
from agrorec.synth import SyntheticSpec, generate_synthetic

ENV_HEADER_LINE = ("State Names,District Names,Crop Year,Season Names,Crop Names,"
                   "Area,Temperature,Wind Speed,Precipitation,Humidity,Soil Type,"
                   "N,P,K,Production")
ECON_HEADER_LINE = "State Names,Crop Year,Crop Names,Operational Cost,Fixed Cost,Total Cost,MSP"


def env_line(state="Punjab", district="D1", year=2012, season="Kharif", crop="Wheat",
             area=10.0, production="20.0", temperature=25.0):
    return (f"{state},{district},{year},{season},{crop},{area},{temperature},"
            f"9.0,80.0,55.0,ST1,60.0,30.0,25.0,{production}")


def econ_line(state="Punjab", year=2012, crop="Wheat", op=5000.0, fx=2000.0,
              total=None, msp=1500.0):
    total = op + fx if total is None else total
    return f"{state},{year},{crop},{op},{fx},{total},{msp}"


def write_env(path, lines):
    path.write_text(ENV_HEADER_LINE + "\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_econ(path, lines):
    path.write_text(ECON_HEADER_LINE + "\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return path


def record(state="Punjab", district="D1", year=2012, season="Kharif", crop="Wheat",
           area=10.0, production=20.0, msp=1500.0, op=5000.0, fx=2000.0, **over):
    kwargs = dict(
        state=state, district=district, year=year, season=season, crop=crop,
        area=area, temperature=25.0, wind_speed=9.0, precipitation=80.0,
        humidity=55.0, soil_type="ST1", n=60.0, p=30.0, k=25.0,
        production=production, operational_cost=op, fixed_cost=fx,
        total_cost=op + fx, msp=msp,
    )
    kwargs.update(over)
    return CropRecord(**kwargs)


def toy_dataset(records):
    return derive_yield(Dataset(records=list(records)))


@pytest.fixture(scope="session")
def drift_dataset():
    """Small synthetic dataset shared by slower tests."""
    return generate_synthetic(SyntheticSpec(n_rows=600, n_states=5, n_crops=8, seed=31))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
