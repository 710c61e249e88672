"""Named, deterministic experiments producing data tables and checks.

Each experiment takes ``(dim, params, workers)`` and returns an
:class:`Outcome`.  ``params`` starts from the experiment's defaults and may be
overridden key by key; unknown keys are rejected.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .amplify import (
    EVEN,
    INV_SQRT2,
    ODD,
    CaStepConfig,
    DetectorModel,
    ca_step,
    cascade_probability,
    expected_attempts,
    iterate_tree,
    success_prob_closed,
)
from .fock import DEFAULT_DIM
from .optics import css_fidelity_closed, css_state, optimal_squeezing, squeezed_single_photon
from .purification import SWEEP_COLUMNS, purify_sweep
from .qnd import QndConfig, extrapolated_squeezing, window_sweep
from .report import Check, Table, summary_json, write_atomic
from .wigner import PhaseGrid, min_wigner, wigner_css, wigner_numeric, wigner_sq_photon

MIN_DIM = 8
TIE_TOL = 1e-6


@dataclass
class Outcome:
    table: Table
    checks: list[Check] = field(default_factory=list)
    notes: dict = field(default_factory=dict)


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise UsageError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(max(n, 0))


# --- squeezed photons versus small cats -------------------------------------


def best_squeezed_fidelity(alpha: float) -> tuple[float, float]:
    """(r_opt, fidelity) of S(r_opt)|1> against the odd cat; alpha=0 is |1> itself."""
    if alpha == 0:
        return 0.0, 1.0
    r = optimal_squeezing(alpha)
    return r, css_fidelity_closed(r, alpha)


def exp_fig2(dim: int, p: dict, workers: int) -> Outcome:
    t = Table(["alpha", "r_opt", "fidelity"], anchor="odd cat approximated by a squeezed photon")
    for a in _grid(p["alpha_min"], p["alpha_max"], p["alpha_step"]):
        r, f = best_squeezed_fidelity(float(a))
        t.add(float(a), r, f)
    return Outcome(t, small_cat_checks())


def small_cat_checks() -> list[Check]:
    out = []
    for alpha, target, tol, label in (
        (0.5, 0.99999, 5e-5, "1/2"),
        (INV_SQRT2, 0.9998, 5e-4, "1/sqrt2"),
        (1.0, 0.997, 5e-3, "1"),
    ):
        r, f = best_squeezed_fidelity(alpha)
        out.append(Check(f"squeezed-photon fidelity alpha={label}", target, f, tol, "small cat fidelities"))
    for alpha, target, label in ((0.5, 0.083, "1/2"), (INV_SQRT2, 0.164, "1/sqrt2"), (1.0, 0.313, "1")):
        out.append(
            Check(f"optimal squeezing alpha={label}", target, optimal_squeezing(alpha), 5e-4, "optimal squeezing values")
        )
    return out


def exp_fig3(dim: int, p: dict, workers: int) -> Outcome:
    alphas = _as_list(p["alphas"])
    hw, n = p["half_width"], int(p["points"])
    grid = PhaseGrid.square(hw, n)
    t = Table(["alpha", "r", "z_re", "z_im", "w_sq_photon", "w_odd_cat", "w_numeric"],
              anchor="squeezed photon and odd cat Wigner functions")
    checks = []
    z = grid.points()
    for a in alphas:
        r = optimal_squeezing(a)
        w_sq = wigner_sq_photon(z, r)
        w_cat = wigner_css(z, a, -1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            # strongly squeezed photons need several times more levels than cats
            w_num = wigner_numeric(squeezed_single_photon(r, 4 * dim), grid).values
        for i, x in enumerate(grid.re_axis):
            for j, y in enumerate(grid.im_axis):
                t.add(a, r, x, y, w_sq[i, j], w_cat[i, j], w_num[i, j])
        checks.append(Check(f"analytic vs numeric squeezed-photon Wigner alpha={a:g}", 0.0,
                            float(np.abs(w_sq - w_num).max()), 1e-6, "squeezed photon Wigner function", "max"))
    # the quoted value carries three digits, truncated rather than rounded
    checks.append(Check("optimal squeezing alpha=2", 0.853, optimal_squeezing(2.0), 1e-3,
                        "squeezing chosen for maximum fidelity at alpha=2"))
    return Outcome(t, checks)


# --- success probabilities and cascades --------------------------------------


def exp_fig6(dim: int, p: dict, workers: int) -> Outcome:
    t = Table(["alpha", "p_odd_odd", "p_even_even", "p_odd_even"], anchor="success probabilities of one amplification step")
    for a in _grid(p["alpha_min"], p["alpha_max"], p["alpha_step"]):
        a = float(a)
        t.add(a, success_prob_closed(a, a, ODD, ODD), success_prob_closed(a, a, EVEN, EVEN),
              success_prob_closed(a, a, ODD, EVEN))
    return Outcome(t, probability_floor_checks())


def probability_floor_checks() -> list[Check]:
    grid = np.linspace(1e-3, 3.0, 3000)
    pp = min(success_prob_closed(a, a, ODD, ODD) for a in grid)
    return [
        Check("odd-odd success floor on (0, 3]", 0.214, pp, 0.0, "success probability always above 0.214", "min"),
        Check("even-even success at large amplitude", 0.5, success_prob_closed(6.0, 6.0, EVEN, EVEN), 1e-6,
              "success probability approaches 1/2"),
    ]


def exp_cascade(dim: int, p: dict, workers: int) -> Outcome:
    t = Table(["alpha_initial", "n_stages", "stage", "stage_prob", "total_prob"], anchor="cascade success probability")
    notes = {}
    for a0, n in ((1.0, 2), (0.5, 4), (INV_SQRT2, 2), (INV_SQRT2, 3)):
        total, probs = cascade_probability(a0, ODD, n)
        for k, pk in enumerate(probs, 1):
            t.add(a0, n, k, pk, total)
    notes["alpha=1/sqrt2 two-stage product (textual 4e-4 not asserted)"] = cascade_probability(INV_SQRT2, ODD, 2)[0]
    notes["alpha=1/sqrt2 three-stage product (textual 4e-4 not asserted)"] = cascade_probability(INV_SQRT2, ODD, 3)[0]
    return Outcome(t, cascade_checks(dim), notes)


def cascade_checks(dim: int = DEFAULT_DIM) -> list[Check]:
    two, _ = cascade_probability(1.0, ODD, 2)
    four, _ = cascade_probability(0.5, ODD, 4)
    tree = iterate_tree(css_state(1.0, ODD, dim), 1.0, ODD, 2)
    return [
        Check("two-stage probability from odd alpha=1", 0.027, two, 1e-3, "success probability about 0.027"),
        Check("four-stage probability from odd alpha=1/2", 2e-13, four, 1.15, "success probability only 2e-13", "ratio"),
        Check("two-stage simulated vs closed form", two, tree.total_prob, 1e-6 * two, "cascade success probability"),
    ]


def exp_attempts(dim: int, p: dict, workers: int) -> Outcome:
    a0, n = p["alpha"], int(p["stages"])
    total, probs = cascade_probability(a0, ODD, n)
    stages = [(2 ** (n - k), pk) for k, pk in enumerate(probs, 1)]
    t = Table(["stage", "steps_needed", "stage_prob", "expected_attempts"], anchor="average number of steps")
    for k, (steps, pk) in enumerate(stages, 1):
        t.add(k, steps, pk, steps / pk)
    att = expected_attempts(stages)
    notes = {"expected attempts (independent geometric model)": att,
             "textual value 1731 is not reproduced and not asserted": 1731}
    check = Check("geometric-model attempts for 16-to-1 cascade", 138.0, att, 1.0, "average number of steps")
    return Outcome(t, [check], notes)


# --- amplification of squeezed photons ---------------------------------------

ALL_CLICKS = None  # threshold click-click accepts every (n, m) with n, m >= 1


def squeezed_tree_fidelity(alpha: float, n: int, dim: int = DEFAULT_DIM) -> float:
    """Fidelity with the cat of amplitude ``alpha`` after ``n`` iterations on squeezed photons."""
    if n == 0:
        return best_squeezed_fidelity(alpha)[1]
    a_i = alpha / 2 ** (n / 2)
    start = squeezed_single_photon(optimal_squeezing(a_i), dim)
    tree = iterate_tree(start, a_i, ODD, n, accept=ALL_CLICKS)
    return tree.final.fidelity()


def best_iterations(alpha: float, n_max: int = 6, dim: int = DEFAULT_DIM) -> tuple[int, float, list[float]]:
    """Iteration count maximizing fidelity; ties within 1e-6 go to the smaller n."""
    fids = [squeezed_tree_fidelity(alpha, n, dim) for n in range(n_max + 1)]
    top = max(fids)
    best = next(n for n, f in enumerate(fids) if f >= top - TIE_TOL)
    return best, fids[best], fids


def exp_fig8(dim: int, p: dict, workers: int) -> Outcome:
    n_max = int(p["n_max"])
    alphas = [float(a) for a in _grid(p["alpha_min"], p["alpha_max"], p["alpha_step"])]
    cols = ["alpha", "best_n", "max_fidelity"] + [f"fidelity_n{n}" for n in range(n_max + 1)]
    t = Table(cols, anchor="maximum fidelity over iteration count")
    results = _pmap(lambda a: best_iterations(a, n_max, dim), alphas, workers)
    for a, (n, f, fids) in zip(alphas, results):
        t.add(a, n, f, *fids)
    checks = []
    for a, (n, f, _) in zip(alphas, results):
        if a >= 2.0 - 1e-9:
            checks.append(Check(f"max fidelity alpha={a:.1f}", 0.99, f, 0.0, "maximum fidelity obtained", "min"))
        if abs(a - 2.0) < 1e-9:
            checks.append(Check("best iteration count alpha=2", 4, n, 0.0, "four iterations for alpha=2"))
            checks.append(Check("max fidelity alpha=2", 0.995, f, 2e-3, "maximum fidelity 0.995 for alpha=2"))
    return Outcome(t, checks)


def large_cat_checks(dim: int = DEFAULT_DIM, workers: int = 1) -> list[Check]:
    alphas = [2.0, 2.1, 2.2, 2.3, 2.4, 2.5]
    out = exp_fig8(dim, {"alpha_min": 2.0, "alpha_max": 2.5, "alpha_step": 0.1, "n_max": 6}, workers)
    return out.checks


def click_resolved(dim: int = DEFAULT_DIM, alpha_i: float = INV_SQRT2):
    """Squeezed-photon inputs with resolving detectors; returns (all-click outcome, per-pair fidelity fn)."""
    rho = squeezed_single_photon(optimal_squeezing(alpha_i), dim)
    det = DetectorModel(1.0, "resolving")
    base = CaStepConfig(alpha_i, alpha_i, ODD, ODD, detector=det)
    everything = ca_step(rho, rho, base)

    def fidelity(pairs):
        cfg = CaStepConfig(alpha_i, alpha_i, ODD, ODD, detector=det, accept=frozenset(pairs))
        return ca_step(rho, rho, cfg).fidelity()

    return everything, fidelity


def click_checks(dim: int = DEFAULT_DIM) -> list[Check]:
    out, fid = click_resolved(dim)
    a = "click-resolved output fidelity"
    return [
        Check("fidelity accepting (1,1)", 0.99974, fid([(1, 1)]), 2e-4, a),
        Check("fidelity accepting (2,1)+(1,2)", 0.99975, fid([(2, 1), (1, 2)]), 2e-4, a),
        Check("share of (1,1)", 0.60, out.share([(1, 1)]), 0.05, "about 60% of simultaneous clicks"),
        Check("share of (2,1)+(1,2)", 0.30, out.share([(2, 1), (1, 2)]), 0.05, "about 30% of simultaneous clicks"),
        Check("single-squeeze overlap with cat alpha=1", 0.99711, best_squeezed_fidelity(1.0)[1], 1e-4,
              "single squeezed photon against cat of amplitude 1"),
    ]


def exp_eq41(dim: int, p: dict, workers: int) -> Outcome:
    out, fid = click_resolved(dim, p["alpha_i"])
    k = int(p["max_count"])
    t = Table(["n", "m", "prob", "share", "fidelity"], anchor="click-resolved outputs")
    for n in range(1, k + 1):
        for m in range(1, k + 1):
            pr = float(out.clicks[n, m])
            t.add(n, m, pr, pr / out.prob, fid([(n, m)]))
    return Outcome(t, click_checks(dim), {"total click-click probability": out.prob})


# --- phase space -------------------------------------------------------------


def negativity_sequence(alpha: float = 0.5, stages: int = 2, dim: int = DEFAULT_DIM, points: int = 161):
    """(amplitude, z_min, W_min) for the even-cat input and each iteration."""
    start = css_state(alpha, EVEN, dim)
    tree = iterate_tree(start, alpha, EVEN, stages)
    grid = PhaseGrid.square(4.0, points)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows.append((alpha, *min_wigner(start, grid)))
        for st in tree.stages:
            rows.append((st.amplitude, *min_wigner(st.outcome.output, grid)))
    return rows


def exp_fig7(dim: int, p: dict, workers: int) -> Outcome:
    rows = negativity_sequence(p["alpha"], int(p["stages"]), dim, int(p["points"]))
    t = Table(["stage", "amplitude", "z_min_re", "z_min_im", "w_min"], anchor="negativity increase under iteration")
    for k, (a, z, w) in enumerate(rows):
        t.add(k, a, z.real, z.imag, w)
    return Outcome(t, [negativity_check(rows)])


def negativity_check(rows) -> Check:
    neg = [-w for _, _, w in rows]
    increasing = all(b > a for a, b in zip(neg, neg[1:]))
    return Check("negativity strictly increases over iterations", 1, float(increasing), 0, "increase of negativity", "bool")


# --- purification --------------------------------------------------------------


def exp_fig9(dim: int, p: dict, workers: int) -> Outcome:
    grid = _grid(0.0, p["p_max"], p["p_step"])
    rows = purify_sweep(grid, 2, dim, alpha=p["alpha"], workers=workers)
    t = Table(list(SWEEP_COLUMNS), anchor="purity and fidelity of mixed squeezed photons")
    for r in rows:
        t.add(*r)
    return Outcome(t, purification_checks(rows))


def purification_checks(rows) -> list[Check]:
    by_p = {round(r.p, 10): r for r in rows}
    out = []
    a = "purification of mixed squeezed photons"
    for p, (f0, f1, f2) in {0.4: (0.60, 0.89, 0.72), 0.25: (0.750, 0.941, None), 0.05: (0.950, 0.990, None)}.items():
        r = by_p[p]
        out.append(Check(f"p={p} input fidelity", f0, r.fid_in, 0.01, a))
        out.append(Check(f"p={p} first iteration fidelity", f1, r.fid_1, 0.01, a))
        if f2 is not None:
            out.append(Check(f"p={p} second iteration fidelity", f2, r.fid_2, 0.01, a))
    mono = all(
        r.fid_1 > r.fid_in and r.purity_1 > r.purity_in and r.fid_2 > r.fid_in and r.purity_2 > r.purity_in
        for r in rows if r.p >= 0.05 - 1e-12
    )
    out.append(Check("improvement over input for p in [0.05, 0.5]", 1, float(mono), 0, a, "bool"))
    return out


# --- QND ---------------------------------------------------------------------


def exp_qnd(dim: int, p: dict, workers: int) -> Outcome:
    deltas = _as_list(p["deltas"])
    qdim = int(p["qnd_dim"])
    pts = window_sweep(p["r"], deltas, qdim)
    t = Table(["delta", "fidelity", "fitted_r", "acceptance"], anchor="post-selected output equals a squeezed photon")
    for w in pts:
        t.add(w.delta, w.fidelity, w.fitted_r, w.acceptance)
    r0 = extrapolated_squeezing(pts)
    kappa = QndConfig(p["r"]).kappa
    smallest = min(pts, key=lambda w: w.delta)
    checks = [
        Check(f"best-fit fidelity at delta={smallest.delta:g}", 0.999, smallest.fidelity, 0.0,
              "equivalent to squeezing a single photon", "min"),
        Check("extrapolated squeezing vs ln kappa", math.log(kappa), r0, 0.02 * math.log(kappa),
              "squeezing set by kappa"),
    ]
    return Outcome(t, checks, {"fitted r' at smallest window": smallest.fitted_r, "ln kappa": math.log(kappa)})


def _as_list(v) -> list[float]:
    if isinstance(v, str):
        return [float(x) for x in v.split(",") if x.strip()]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in v]


@dataclass(frozen=True)
class Experiment:
    name: str
    fn: Callable[[int, dict, int], Outcome]
    defaults: dict
    help: str


REGISTRY: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment("fig2", exp_fig2, {"alpha_min": 0.0, "alpha_max": 3.0, "alpha_step": 0.05},
                   "best squeezed-photon fidelity with odd cats versus amplitude"),
        Experiment("fig3", exp_fig3, {"alphas": "1,2", "half_width": 3.0, "points": 61},
                   "Wigner functions of optimally squeezed photons and odd cats"),
        Experiment("fig6", exp_fig6, {"alpha_min": 0.05, "alpha_max": 3.0, "alpha_step": 0.05},
                   "single-step success probabilities for each parity pair"),
        Experiment("fig7", exp_fig7, {"alpha": 0.5, "stages": 2, "points": 161},
                   "Wigner negativity across iterations from a small even cat"),
        Experiment("fig8", exp_fig8, {"alpha_min": 0.5, "alpha_max": 2.5, "alpha_step": 0.1, "n_max": 6},
                   "best iteration count and maximum fidelity from squeezed photons"),
        Experiment("fig9", exp_fig9, {"alpha": 0.5, "p_max": 0.5, "p_step": 0.05},
                   "purity and fidelity sweep over source inefficiency"),
        Experiment("eq41-clicks", exp_eq41, {"alpha_i": INV_SQRT2, "max_count": 4},
                   "per-outcome probabilities and fidelities with resolving detectors"),
        Experiment("cascade-probs", exp_cascade, {}, "no-memory success probabilities of iteration trees"),
        Experiment("qnd-check", exp_qnd, {"r": 0.3, "deltas": "0.4,0.2,0.1,0.05", "qnd_dim": 20},
                   "QND window post-selection versus squeezed photons"),
        Experiment("attempts", exp_attempts, {"alpha": 0.5, "stages": 4},
                   "expected number of step attempts for a cascade"),
    )
}


class UsageError(ValueError):
    pass


def resolve_params(name: str, overrides: dict) -> dict:
    if name not in REGISTRY:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(REGISTRY)}")
    exp = REGISTRY[name]
    params = dict(exp.defaults)
    for k, v in overrides.items():
        if k not in params:
            raise UsageError(f"experiment {name!r} has no parameter {k!r}")
        default = exp.defaults[k]
        if isinstance(default, str) or isinstance(v, (list, tuple)):
            params[k] = v if not isinstance(v, (list, tuple)) else ",".join(str(x) for x in v)
        elif isinstance(default, int) and not isinstance(default, bool):
            params[k] = int(v)
        else:
            params[k] = float(v)
    return params


def run(name: str, dim: int = DEFAULT_DIM, out_dir: str | Path = ".", overrides: dict | None = None,
        workers: int = 1) -> Outcome:
    """Run an experiment and write ``<name>.csv`` and ``summary.json`` into ``out_dir``."""
    if dim < MIN_DIM:
        raise UsageError(f"dim must be at least {MIN_DIM}")
    params = resolve_params(name, overrides or {})
    try:
        result = REGISTRY[name].fn(dim, params, workers)
    except UsageError:
        raise
    except Exception as exc:
        raise RuntimeError(f"experiment {name!r} failed: {exc}") from exc
    out = Path(out_dir)
    write_atomic(out / f"{name}.csv", result.table.to_csv())
    write_atomic(out / "summary.json", summary_json(result.checks, result.notes))
    return result
