import os
import subprocess
import sys

import pytest

from spinwn import _kernels_py, kernels
from spinwn.fermion import build_generator, excitation, number_string

compiled = pytest.importorskip("spinwn._kernels")


def _inputs():
    g = build_generator("int1", (0, 1, 2, 3))
    h = excitation([0, 3], [4, 7]) * number_string([1, 6]) + 0.5 * excitation([2], [5])
    return g.terms, h.terms, (g * h).terms


def _close(a, b):
    keys = set(a) | set(b)
    return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) < 1e-12 for k in keys)


@pytest.mark.parametrize("fn", ["mul_terms", "commutator_terms"])
def test_backends_agree(fn):
    x, y, z = _inputs()
    for a, b in ((x, y), (y, x), (z, x), (x, x)):
        assert _close(getattr(_kernels_py, fn)(a, b), getattr(compiled, fn)(a, b))


def test_default_backend_is_compiled():
    assert kernels.BACKEND == "compiled"


def test_env_forces_fallback():
    env = dict(os.environ, SPINWN_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", "import spinwn; print(spinwn.BACKEND)"],
                       env=env, capture_output=True, text=True, check=True)
    assert r.stdout.strip() == "python"
