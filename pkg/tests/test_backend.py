"""The pure-Python backend must reproduce the compiled backend bit for bit.

The backend is chosen at import time, so the fallback runs in a subprocess
with TRIPACK_BACKEND=python and reports summaries as JSON for comparison.
"""

import json
import os
import subprocess
import sys

import tripack

_PROBE = r"""
import json
import tripack
from tripack import ode
from tripack.processes import run_packing, run_reverse_triangle_free, run_triangle_free
from tripack.graph import complete_graph

out = {"backend": tripack.BACKEND}
tab = ode.tabulate("z", t_max=2.0, step=1e-3)
out["z2"] = tab.eval(2.0)
out["aux2"] = tab.eval_aux(2.0)
tr = run_packing(40, c=0.9, seed=5, checkpoint_count=8)
out["packing"] = tr.summary()["final"]
tf = run_triangle_free(40, c=0.9, seed=6, checkpoint_count=8)
out["tf"] = tf.summary()["final"]
rtf = run_reverse_triangle_free(complete_graph(16), seed=7)
out["rtf"] = rtf.summary()["final"]
print(json.dumps(out))
"""


def _probe(backend: str) -> dict:
    env = dict(os.environ, TRIPACK_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", _PROBE], capture_output=True,
                          text=True, timeout=900, env=env)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_python_fallback_matches_numba():
    if not tripack.USE_NUMBA:
        import pytest

        pytest.skip("compiled backend unavailable; nothing to compare against")
    fast = _probe("numba")
    slow = _probe("python")
    assert fast["backend"] == "numba" and slow["backend"] == "python"
    assert fast == slow or {k: v for k, v in fast.items() if k != "backend"} == {
        k: v for k, v in slow.items() if k != "backend"
    }


def test_backend_reports_choice():
    assert tripack.BACKEND in ("numba", "python")
