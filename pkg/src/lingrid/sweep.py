"""Parameter sweeps, figure presets and CSV output."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrate import numeric_smatrix, unitarity_defect
from .model import TransitionLabel, TransitionMatrix
from .qda import qda_smatrix
from .scenario import RunSpec, Scenario, SweepSpec, scenario_from_dict, to_toml

FMT = "%.12g"


def thread_count() -> int:
    env = os.environ.get("LINGRID_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"LINGRID_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def solve_grid(grid, run: RunSpec) -> dict[str, TransitionMatrix]:
    out = {}
    for method in run.methods:
        if method == "numeric":
            out[method] = numeric_smatrix(grid, run.settings)
        else:
            out[method] = qda_smatrix(grid, method=run.qda_method, settings=run.settings)
    return out


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, possibly on worker threads, in input order."""
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Variant:
    """One curve family of a sweep: a scenario plus a column tag."""

    tag: str
    scenario: Scenario


def _column(label: TransitionLabel, tag: str, method: str) -> str:
    return "_".join(x for x in ("P", str(label), tag, method) if x)


def sweep_table(variants: list[Variant], sweep: SweepSpec, threads: int | None = None):
    """Header and rows for a sweep over ``sweep.param`` for every variant.

    Each row holds the parameter value, the requested probabilities for every
    variant and method, and the largest unitarity defect among that row's
    transition matrices.
    """
    values = sweep.values()
    header = [sweep.param]
    for v in variants:
        grid0 = v.scenario.grid(**{sweep.param: values[0]})
        for label in v.scenario.default_transitions(grid0):
            for method in v.scenario.run.methods:
                header.append(_column(label, v.tag, method))
    header.append("unitarity_defect")

    def point(x):
        row = [float(x)]
        worst = 0.0
        for v in variants:
            grid = v.scenario.grid(**{sweep.param: x})
            mats = solve_grid(grid, v.scenario.run)
            for label in v.scenario.default_transitions(grid):
                for method in v.scenario.run.methods:
                    row.append(mats[method].probability(label))
            worst = max([worst] + [unitarity_defect(m) for m in mats.values()])
        row.append(worst)
        return row

    rows = parallel_map(point, values, threads)
    return header, np.array(rows, dtype=float)


def write_csv(path_or_file, header, rows, comments=()):
    lines = ["# " + c if c else "#" for c in comments]
    lines.append(",".join(header))
    for r in rows:
        lines.append(",".join(FMT % x for x in r))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="") as fh:
            fh.write(text)


def scenario_comments(scenarios: dict) -> list[str]:
    out = []
    for tag, data in scenarios.items():
        if tag:
            out.append(f"variant {tag}:")
        out.extend(to_toml(data).rstrip("\n").splitlines())
    return out


# -- figure presets ---------------------------------------------------------

COUNTERINTUITIVE = [[2, 1], [3, 4]]
ALL_TRANSITIONS = [[i, j] for i in range(1, 5) for j in range(1, 5)]


# presets propagate one notch tighter than the default so the norm drift of
# every figure point stays below 1e-9
PRESET_REL_TOL = 1e-11


def _preset(coupling, t, gap=0.0, methods="both", transitions=COUNTERINTUITIVE):
    return {
        "grid": {"n1": 2, "n2": 2, "gap": gap, "t": t, "beta": 1.0, "coupling": coupling},
        "run": {"method": methods, "transitions": transitions, "rel_tol": PRESET_REL_TOL},
    }


def _eq22(m, g0):
    return {"preset": "eq22", "m": m, "g0": g0}


def _family(fn, ms=(0, 1, 2, 3)):
    return {f"m{m}": fn(m) for m in ms}


# parameter, range, points and per-variant scenarios for each figure
FIGURES = {
    "fig2a": (SweepSpec("g0", 0.0, 5.0, 200),
              _family(lambda m: _preset(_eq22(m, 1.0), 100.0, 0.0, "numeric"))),
    "fig2b": (SweepSpec("g0", 0.0, 5.0, 200),
              _family(lambda m: _preset(_eq22(m, 1.0), 100.0, 2.5e-3))),
    "fig3a": (SweepSpec("dV", 0.0, 0.005, 200),
              _family(lambda m: _preset(_eq22(m, 0.5), 100.0))),
    "fig3b": (SweepSpec("dV", 0.0, 1.0, 200),
              _family(lambda m: _preset(_eq22(m, 5.0), 20.0))),
    "fig4a": (SweepSpec("dV", 0.0, 1.0, 400),
              {"m4": _preset(_eq22(4, 5.0), 50.0, transitions=ALL_TRANSITIONS)}),
    "fig4b": (SweepSpec("dV", 0.0, 1.0, 400),
              {"m0": _preset(_eq22(0, 5.0), 50.0, transitions=ALL_TRANSITIONS)}),
    "fig4c": (SweepSpec("dV", 0.0, 1.0, 400),
              {"equal": _preset({"preset": "equal", "g0": 5.0}, 50.0,
                                transitions=ALL_TRANSITIONS)}),
}


def figure_variants(name: str) -> tuple[SweepSpec, list[Variant], dict]:
    try:
        sweep, raw = FIGURES[name]
    except KeyError:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}") from None
    variants = [Variant(tag, scenario_from_dict(data)) for tag, data in raw.items()]
    return sweep, variants, raw


def run_figure(name: str, out_path, points: int | None = None, threads: int | None = None):
    """Compute a figure preset and write it as CSV; returns ``(header, rows)``."""
    sweep, variants, raw = figure_variants(name)
    if points is not None:
        sweep = SweepSpec(sweep.param, sweep.start, sweep.stop, points, sweep.scale)
    header, rows = sweep_table(variants, sweep, threads)
    comments = [f"lingrid figure {name}",
                f"sweep {sweep.param} from {sweep.start!r} to {sweep.stop!r}, "
                f"{sweep.points} points, {sweep.scale}"]
    comments += scenario_comments(raw)
    write_csv(out_path, header, rows, comments)
    return header, rows


def read_csv(path):
    """``(header, rows)`` of a CSV written by :func:`write_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, rows
