import math

import numpy as np
import pytest

from auxbound.system import spec_from_dict


def make_spec(A, gstar=(), f_terms=(), F0=0.0, eta=None, t0=0.0, name="test"):
    n = len(A)
    doc = {"name": name, "n": n, "A": [list(map(float, r)) for r in A],
           "Gstar": list(gstar), "f_terms": list(f_terms), "t0": t0,
           "forcing": {"F0": F0, "eta": eta if eta is not None else [0.0] * n}}
    return spec_from_dict(doc)


def radial_spec(sign=1.0):
    """x' = -x + sign ||x||^2 x in the plane."""
    terms = [{"component": 1, "coeff": sign, "exponents": [3, 0]},
             {"component": 1, "coeff": sign, "exponents": [1, 2]},
             {"component": 2, "coeff": sign, "exponents": [2, 1]},
             {"component": 2, "coeff": sign, "exponents": [0, 3]}]
    return make_spec([[-1, 0], [0, -1]], f_terms=terms, name="radial")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


SQRT2 = math.sqrt(2.0)
