import numpy as np
import pytest

from ws2r.distances import DistanceSet, squared_distance_table


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


def det_by_cofactor(m: np.ndarray) -> float:
    """Laplace cofactor expansion; independent oracle for determinant code."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    total = 0.0
    cols = list(range(n))
    for j in range(n):
        minor = m[1:][:, cols[:j] + cols[j + 1:]]
        total += ((-1.0) ** j) * m[0, j] * det_by_cofactor(minor)
    return total


def bordered_matrix(table: np.ndarray) -> np.ndarray:
    n = table.shape[0]
    m = np.zeros((n + 1, n + 1))
    m[0, 1:] = 1.0
    m[1:, 0] = 1.0
    m[1:, 1:] = table
    return m


def distance_set_from(points) -> DistanceSet:
    t = squared_distance_table(np.asarray(points, dtype=float))
    return DistanceSet(t[0, 1], t[0, 2], t[0, 3], t[1, 2],
                       t[1, 3], t[2, 3], t[2, 4], t[3, 4])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
