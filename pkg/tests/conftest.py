import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("fpme", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("fpme")


@pytest.fixture
def bump():
    def make(x: np.ndarray, c: float, w: float, a: float = 1.0) -> np.ndarray:
        r = np.abs(x - c) / w
        out = np.zeros_like(x)
        inside = r < 1
        out[inside] = a * np.exp(-1.0 / (1.0 - r[inside] ** 2))
        return out

    return make
