"""Empirical dynamic-concentration checks for the packing process.

The packing analysis predicts that, uniformly over vertices v and pairs
(u, v), the scaled statistics

* d_G(v)/sqrt(n)          stay near 2t,
* d_U(v)/sqrt(n)          stay near z(t),
* |C_r(v)|/n              stay near c_r(t)        (codegree-r vertices),
* |P_r(u,v)|/sqrt(n)      stay near p_r(t)        (one-sided codegree-r),
* |Q_{r,s}(u,v)|/n        stay near q_{r,s}(t),

with deviations bounded by an envelope f(t).  Tracking every vertex and pair
is quadratic, so a fixed random sample of vertices and pairs is measured at
checkpoints of a live run and compared against the deterministic values.  At
desk scales the envelope is loose, so relative errors are reported alongside
envelope units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import ode
from .graph import EdgeStateGraph
from .processes import SimState, run_packing

REL_T_MIN = 0.1  # below this the trajectories are too close to 0 for ratios


@dataclass
class SamplePlan:
    vertices: np.ndarray
    pairs: np.ndarray
    r_max: int
    s_max: int
    checkpoints: list[int]


def build_plan(
    n: int,
    m: int,
    seed: int,
    sample: int = 0,
    k_v: int = 100,
    k_p: int = 100,
    r_max: int = 8,
    s_max: int = 8,
    checkpoint_count: int = 20,
) -> SamplePlan:
    """Fixed vertex/pair sample, drawn from a child stream of the run seed."""
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(sample, 1)))
    )
    vertices = rng.choice(n, size=min(k_v, n), replace=False).astype(np.int32)
    pairs = np.empty((k_p, 2), dtype=np.int32)
    for k in range(k_p):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        while v == u:
            v = int(rng.integers(n))
        pairs[k, 0], pairs[k, 1] = u, v
    steps = sorted({round(m * k / checkpoint_count) for k in range(1, checkpoint_count + 1)} | {m})
    steps = [s for s in steps if s > 0]
    return SamplePlan(vertices, pairs, r_max, s_max, [0] + steps)


def measure(state: SimState, plan: SamplePlan) -> dict:
    """Raw per-sample counts at one checkpoint (pure in the state)."""
    n = state.n
    kv = len(plan.vertices)
    kp = len(plan.pairs)
    d_g = np.empty(kv, dtype=np.int64)
    d_u = np.empty(kv, dtype=np.int64)
    c_counts = np.empty((kv, plan.r_max + 2), dtype=np.int64)
    p_counts = np.empty((kp, plan.r_max + 2), dtype=np.int64)
    q_counts = np.empty((kp, plan.r_max + 2, plan.s_max + 2), dtype=np.int64)
    for k, v in enumerate(plan.vertices):
        v = int(v)
        d_u[k] = int(state.deg_u[v])
        d_g[k] = int(state.deg_u[v]) + int(state.deg_m[v])
        K._c_histogram(n, state.adj_u, state.deg_u, v, plan.r_max, c_counts[k])
    for k in range(kp):
        u, v = int(plan.pairs[k, 0]), int(plan.pairs[k, 1])
        K._p_histogram(n, state.adj_u, state.deg_u, u, v, plan.r_max, p_counts[k])
        K._q_histogram(n, state.adj_u, state.deg_u, u, v, plan.r_max, plan.s_max, q_counts[k])
    return {"d_g": d_g, "d_u": d_u, "c": c_counts, "p": p_counts, "q": q_counts}


def _family_rows(meas: dict, plan: SamplePlan, n: int, t: float) -> dict:
    """Deviation summary for one checkpoint.

    Per-sample maxima (in envelope units, absolute, and relative terms) pick
    up the worst vertex or pair; the ``mean_*`` entries compare the sample
    mean against the prediction, which is the statistic the tolerance bands
    are calibrated for (single vertices fluctuate at the sqrt scale)."""
    sq = math.sqrt(n)
    f = ode.error_envelope(t, n)
    ztab = ode.default_table(ode.CURVE_Z)
    z = ztab.eval(t)
    rows: dict[str, dict] = {}

    def put(name, emp, det, env, witness):
        dev = float(abs(emp - det))
        row = rows.setdefault(
            name,
            {"max_env_units": -1.0, "max_abs": -1.0, "max_relative": None, "witness": None,
             "mean_abs": -1.0, "mean_relative": None},
        )
        if dev / env > row["max_env_units"]:
            row["max_env_units"] = dev / float(env)
            row["witness"] = witness
        if dev > row["max_abs"]:
            row["max_abs"] = dev
        if det > 1e-9:
            rel = dev / float(det)
            if row["max_relative"] is None or rel > row["max_relative"]:
                row["max_relative"] = rel

    def put_mean(name, emp_mean, det):
        row = rows[name]
        dev = float(abs(emp_mean - det))
        if dev > row["mean_abs"]:
            row["mean_abs"] = dev
        if det > 1e-9:
            rel = dev / float(det)
            if row["mean_relative"] is None or rel > row["mean_relative"]:
                row["mean_relative"] = rel

    env_g = n ** (-0.25) * math.log(n) ** 2
    for k, v in enumerate(plan.vertices):
        put("d_g", meas["d_g"][k] / sq, 2.0 * t, env_g, {"v": int(v)})
        put("d_u", meas["d_u"][k] / sq, z, f, {"v": int(v)})
        for r in range(plan.r_max + 1):
            det = ode.family_values(z, r, 0)[0]
            put("c_r", meas["c"][k, r] / n, det, (r + 1) ** -3 * f, {"v": int(v), "r": r})
    put_mean("d_g", float(meas["d_g"].mean()) / sq, 2.0 * t)
    put_mean("d_u", float(meas["d_u"].mean()) / sq, z)
    for r in range(plan.r_max + 1):
        put_mean("c_r", float(meas["c"][:, r].mean()) / n, ode.family_values(z, r, 0)[0])
    for k in range(len(plan.pairs)):
        u, v = int(plan.pairs[k, 0]), int(plan.pairs[k, 1])
        for r in range(plan.r_max + 1):
            det = ode.family_values(z, r, 0)[1]
            put("p_r", meas["p"][k, r] / sq, det, f, {"u": u, "v": v, "r": r})
            for s in range(plan.s_max + 1):
                det = ode.family_values(z, r, s)[2]
                put("q_rs", meas["q"][k, r, s] / n, det, f, {"u": u, "v": v, "r": r, "s": s})
    for r in range(plan.r_max + 1):
        put_mean("p_r", float(meas["p"][:, r].mean()) / sq, ode.family_values(z, r, 0)[1])
        for s in range(plan.s_max + 1):
            put_mean("q_rs", float(meas["q"][:, r, s].mean()) / n, ode.family_values(z, r, s)[2])
    return rows


@dataclass
class ConcentrationReport:
    n: int
    c: float
    seed: int
    sample: int
    checkpoints: list[dict] = field(default_factory=list)  # {"i", "t", "families": {...}}

    def global_max(self, family: str, key: str = "max_env_units", t_min: float = 0.0):
        best = None
        for cp in self.checkpoints:
            if cp["t"] < t_min or family not in cp["families"]:
                continue
            val = cp["families"][family][key]
            if val is None:
                continue
            if best is None or val > best[0]:
                best = (val, cp["t"], cp["families"][family]["witness"])
        return best

    def exceeds_envelope(self) -> list[str]:
        out = []
        for fam in ("d_g", "d_u", "c_r", "p_r", "q_rs"):
            top = self.global_max(fam)
            if top is not None and top[0] > 1.0:
                out.append(fam)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "c": self.c,
            "seed": self.seed,
            "sample": self.sample,
            "outside_envelope": self.exceeds_envelope(),
            "checkpoints": self.checkpoints,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("family,i,t,max_env_units,max_abs,max_relative,mean_abs,mean_relative,witness\n")
            for cp in self.checkpoints:
                for fam, row in cp["families"].items():
                    mrel = "" if row["max_relative"] is None else repr(row["max_relative"])
                    arel = "" if row["mean_relative"] is None else repr(row["mean_relative"])
                    wit = json.dumps(row["witness"]).replace(",", ";")
                    fh.write(
                        f"{fam},{cp['i']},{cp['t']!r},{row['max_env_units']!r},"
                        f"{row['max_abs']!r},{mrel},{row['mean_abs']!r},{arel},{wit}\n"
                    )


def run_concentration(
    n: int,
    c: float,
    seed: int = 0,
    sample: int = 0,
    k_v: int = 100,
    k_p: int = 100,
    r_max: int = 8,
    s_max: int = 8,
    checkpoint_count: int = 20,
) -> ConcentrationReport:
    """Run the packing process, measuring the sampled statistics at
    checkpoints and comparing them with the deterministic trajectories."""
    if n < 16:
        raise ValueError("concentration runs need n >= 16 for the envelope")
    m = int(c * n**1.5)
    plan = build_plan(n, m, seed, sample, k_v, k_p, r_max, s_max, checkpoint_count)
    report = ConcentrationReport(n, c, seed, sample)

    empty = SimState(
        n,
        np.zeros((n, 1), dtype=np.int32),
        np.zeros(n, dtype=np.int32),
        np.zeros((n, 1), dtype=np.int32),
        np.zeros(n, dtype=np.int32),
    )
    report.checkpoints.append({"i": 0, "t": 0.0, "families": _family_rows(measure(empty, plan), plan, n, 0.0)})

    targets = set(plan.checkpoints)

    def on_checkpoint(i: int, state: SimState) -> None:
        if i in targets:
            t = i / n**1.5
            report.checkpoints.append(
                {"i": i, "t": t, "families": _family_rows(measure(state, plan), plan, n, t)}
            )

    run_packing(n, m=m, seed=seed, sample=sample,
                checkpoint_count=checkpoint_count, on_checkpoint=on_checkpoint)
    return report


# ---------------------------------------------------------------------------
# Structural conditions on the whole revealed graph


def structural_checks(g: EdgeStateGraph, seed: int = 0, set_samples: int = 100) -> dict:
    """Check the three structural conditions the analysis relies on:
    (i) no pair exceeds codegree 3*ln(n)/ln(ln(n)); (ii) random vertex sets of
    size 10*sqrt(n)*ln(ln(n)) induce at most sqrt(n)*ln(n)^2 edges;
    (iii) no K_{3,7} (searched from high-codegree pairs), with the largest
    2-common-neighbor witness count reported alongside."""
    n = g.n
    if n > 5000:
        raise ValueError("structural checks support n <= 5000")
    out: dict = {"n": n, "applicable": n >= 16}
    if n < 16:
        return out
    adj, deg = _combined(g)
    ln = math.log(n)
    lnln = math.log(ln)

    cap = 50_000
    pairs = np.zeros((cap, 2), dtype=np.int32)
    max_codeg, npairs = K._codegree_pairs_above(n, adj, deg, 7, pairs, cap)
    bound_i = 3.0 * ln / lnln
    out["max_codegree"] = int(max_codeg)
    out["codegree_bound"] = bound_i
    out["no_huge_codegree"] = max_codeg <= bound_i

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(7,))))
    size = min(n, int(10.0 * math.sqrt(n) * lnln))
    bound_ii = math.sqrt(n) * ln**2
    worst = 0
    for _ in range(set_samples):
        members = np.sort(rng.choice(n, size=size, replace=False).astype(np.int32))
        worst = max(worst, int(K._induced_edge_count(adj, deg, members)))
    out["dense_set_size"] = size
    out["dense_set_max_edges"] = worst
    out["dense_set_bound"] = bound_ii
    out["no_dense_set"] = worst <= bound_ii

    found, k32_max = K._k37_scan(n, adj, deg, pairs, npairs, 7)
    out["high_codegree_pairs"] = int(npairs)
    out["k37_found"] = bool(found)
    out["no_k37"] = not bool(found)
    out["max_k32_witnesses"] = int(k32_max)
    out["all_pass"] = bool(out["no_huge_codegree"] and out["no_dense_set"] and out["no_k37"])
    return out


def _combined(g: EdgeStateGraph):
    n = g.n
    cap = max(1, max(len(g.adj_u[u]) + len(g.adj_m[u]) for u in range(n)))
    adj = np.zeros((n, cap), dtype=np.int32)
    deg = np.zeros(n, dtype=np.int32)
    for u in range(n):
        row = sorted(g.adj_u[u] + g.adj_m[u])
        deg[u] = len(row)
        adj[u, : len(row)] = row
    return adj, deg
