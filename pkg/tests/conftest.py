"""Shared datasets and helpers for the test suite."""

from pathlib import Path

import numpy as np
import pytest

import discopula as dc

DATA = Path(__file__).parent / "data"
FIXTURES = Path(__file__).parent / "fixtures"

#: 2006 US General Social Survey cross-classification of self-assessed
#: family income (rows: above average, average, below average) against
#: happiness (columns: very, pretty, not too happy)
HAPPINESS_COUNTS = np.array([
    [272, 294, 49],
    [454, 835, 131],
    [185, 527, 208],
])

#: published 4-decimal smoothed frequencies and copula array for the table
HAPPINESS_PROB_4DP = np.array([
    [0.0921, 0.0995, 0.0166],
    [0.1536, 0.2825, 0.0444],
    [0.0626, 0.1783, 0.0704],
])
HAPPINESS_COPULA_4DP = np.array([
    [0.1574, 0.1024, 0.0735],
    [0.1167, 0.1293, 0.0873],
    [0.0592, 0.1016, 0.1725],
])

#: teenage health-concern survey (concern x age x gender), with the two
#: boys/menstrual cells impossible a priori
TEEN_COUNTS = np.zeros((4, 2, 2), dtype=np.int64)
TEEN_COUNTS[:, :, 0] = [[4, 2], [0, 0], [42, 7], [57, 20]]
TEEN_COUNTS[:, :, 1] = [[9, 7], [4, 8], [19, 10], [71, 31]]

TEEN_SUPPORT = np.ones((4, 2, 2), dtype=bool)
TEEN_SUPPORT[1, :, 0] = False

#: published coordinate estimates for the survey in the shipped basis
TEEN_COORDS_4DP = np.array(
    [0.0217, -0.1164, -0.0234, 0.0126, 0.0556, 0.0376, -0.0115, 0.0162]
)

#: 3x3 supports with no uniform-margin member: mass confined to the first
#: row and column (exclusive), and its critical one-cell enlargement
EXCLUSIVE_SUPPORT = np.array([[1, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=bool)
CRITICAL_SUPPORT = np.array([[1, 1, 1], [1, 1, 0], [1, 0, 0]], dtype=bool)

#: 3x3 support holding everything off the diagonal
RING_SUPPORT = ~np.eye(3, dtype=bool)

TIGHT = dc.IpfConfig(margin_tol=1e-14)


def ring_array(omega, rng=None):
    """Random positive array on RING_SUPPORT with the given cycle ratio.

    ``omega`` is the product of the (1,2),(2,3),(3,1) entries over the
    product of the (1,3),(2,1),(3,2) entries; the copula array of such a
    distribution depends on it alone.
    """
    rng = rng or np.random.default_rng(0)
    up = rng.uniform(0.5, 2.0, 3)     # cells (1,2),(2,3),(3,1)
    down = rng.uniform(0.5, 2.0, 3)   # cells (1,3),(2,1),(3,2)
    down *= (up.prod() / (omega * down.prod())) ** (1.0 / 3.0)
    p = np.zeros((3, 3))
    p[0, 1], p[1, 2], p[2, 0] = up
    p[0, 2], p[1, 0], p[2, 1] = down
    return p / p.sum()


def ring_copula(omega):
    """Closed-form copula array on RING_SUPPORT for a given cycle ratio."""
    w = omega ** (1.0 / 3.0)
    hi, lo = w / (3.0 * (1.0 + w)), 1.0 / (3.0 * (1.0 + w))
    g = np.zeros((3, 3))
    g[0, 1] = g[1, 2] = g[2, 0] = hi
    g[0, 2] = g[1, 0] = g[2, 1] = lo
    return g


def random_supported_array(support, rng, low=0.3, high=2.0):
    """Random probability array positive exactly on ``support``."""
    support = np.asarray(support, dtype=bool)
    p = np.where(support, rng.uniform(low, high, support.shape), 0.0)
    return p / p.sum()


@pytest.fixture
def teen_doc():
    return dc.parse_table((DATA / "teen_health.json").read_text(), "json")


@pytest.fixture
def teen_basis_bundle():
    columns = dc.load_basis_matrix(FIXTURES / "teen_health_basis.txt")
    return dc.basis_from_columns(TEEN_SUPPORT, columns, config=TIGHT)
