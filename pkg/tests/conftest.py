import numpy as np
import pytest


def restrict(values: np.ndarray) -> np.ndarray:
    """Average fine cell pairs down to the coarser grid (exact for FV)."""
    return 0.5 * (values[..., ::2] + values[..., 1::2])


def ls_slope(errors, factor: float = 2.0) -> float:
    """Least-squares convergence slope from errors on factor-refined grids."""
    errors = np.asarray(errors, dtype=float)
    levels = np.arange(len(errors))
    return float(np.polyfit(levels * np.log(factor), -np.log(errors), 1)[0])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
