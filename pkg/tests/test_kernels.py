import os
import subprocess
import sys

import numpy as np
import pytest

from lingrid import _core
from lingrid.integrate import PropagationSettings, numeric_smatrix
from lingrid.model import section_v_model

compiled = pytest.mark.skipif("compiled" not in _core.BACKENDS,
                              reason="compiled kernel not built")


def test_get_kernel():
    assert _core.get_kernel("python") is _core.BACKENDS["python"]
    assert _core.get_kernel() is _core.BACKENDS[_core.DEFAULT_BACKEND]
    with pytest.raises(ValueError):
        _core.get_kernel("fortran")


@compiled
@pytest.mark.parametrize("picture", ["interaction", "schrodinger"])
def test_backends_agree(picture):
    grid = section_v_model(0.2, 2.0, m=1, t=10)
    out = {}
    for name in ("compiled", "python"):
        s = PropagationSettings(rel_tol=1e-10, backend=name, picture=picture)
        out[name] = numeric_smatrix(grid, s)
    assert np.abs(out["compiled"].matrix - out["python"].matrix).max() < 1e-11
    assert out["compiled"].info["steps"] == out["python"].info["steps"]


@compiled
def test_compiled_is_default():
    assert _core.DEFAULT_BACKEND == "compiled" or os.environ.get("LINGRID_PURE_PYTHON")


def test_pure_python_switch():
    code = "from lingrid import _core; print(_core.DEFAULT_BACKEND)"
    env = dict(os.environ, LINGRID_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
