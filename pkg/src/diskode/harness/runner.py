"""Execute the experiments of a scenario in dependency order.

Ray solutions are computed once, before any experiment that consumes them;
if that step fails, dependent experiments are recorded as errored instead
of running on missing data.
"""

from __future__ import annotations

import math
import traceback
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..analytic import disk_quadrature
from ..bounds import (
    bloch_growth_bound,
    comparison_check,
    derivative_growth_bound,
    growth_bound,
    herold_majorant,
    hinf_growth_bound,
    volterra_series_bound,
)
from ..bounds.report import HYPOTHESES_UNMET, BoundReport
from ..conditions import ConditionCheckConfig, check_hypotheses, membership_scan
from ..errors import DiskodeError, HypothesisError, PreconditionError
from ..solver import EquationSpec, RaySolution, solve_fan, solve_ray
from ..spaces import bers_norm, bloch_type_norm, default_a_grid, qk_seminorm, weighted_hardy_norm
from .catalog import get_entry
from .scenario import Scenario

NEEDS_RAYS = ("solve", "bounds")


@dataclass
class ExperimentResult:
    key: str
    type: str
    status: str = "ok"  # ok | error
    message: str = ""
    rows: dict = field(default_factory=dict)  # table name -> list of row dicts
    details: dict = field(default_factory=dict)

    def add(self, table: str, row: dict):
        self.rows.setdefault(table, []).append(row)


@dataclass
class RunBundle:
    scenario_id: str
    scenario: dict
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.results)

    @property
    def errors(self) -> list:
        return [r for r in self.results if r.status != "ok"]


def _experiment_keys(s: Scenario) -> list[str]:
    seen: dict[str, int] = {}
    keys = []
    for exp in s.experiments:
        n = seen.get(exp.type, 0)
        seen[exp.type] = n + 1
        keys.append(exp.type if n == 0 else f"{exp.type}#{n}")
    return keys


def solve_rays(s: Scenario, eq: EquationSpec, init: tuple, threads: int = 1) -> list[RaySolution]:
    """The scenario's fan of rays; initial data at ``nu > 0`` is obtained by
    first integrating from the origin."""
    cfg = s.solver
    thetas = 2.0 * np.pi * np.arange(cfg.n_rays) / cfg.n_rays

    def provider(theta):
        if cfg.nu == 0.0:
            return init
        pre = solve_ray(eq, theta, 0.0, cfg.nu, init, cfg.tol, report_n=2)
        if pre.truncated:
            raise PreconditionError(f"could not reach nu={cfg.nu} on theta={theta}: {pre.error}")
        return tuple(pre.values[-1, : eq.k])

    return solve_fan(eq, thetas, cfg.nu, cfg.r_max, provider, cfg.tol, cfg.report_n, threads)


def _bound_rows(res: ExperimentResult, sid: str, reports: list[BoundReport]):
    for rep in reports:
        ok = rep.pointwise_pass
        for i in range(rep.r.size):
            res.add("bounds", {
                "scenario_id": sid, "bound_id": rep.bound_id, "theta": rep.theta, "r": rep.r[i],
                "lhs": rep.lhs[i], "rhs": rep.rhs[i], "margin": rep.margin[i], "pass": bool(ok[i]),
            })
        res.add("bound_status", {
            "scenario_id": sid, "bound_id": rep.bound_id, "theta": rep.theta,
            "status": rep.status, "margin_min": rep.margin_min, "n_points": int(rep.r.size),
        })
        res.details.setdefault("reports", []).append(
            {"bound_id": rep.bound_id, "theta": rep.theta, "status": rep.status,
             "margin_min": rep.margin_min, "metadata": rep.metadata}
        )


def _unmet(res: ExperimentResult, sid: str, bound_id: str, theta: float, msg: str):
    res.add("bound_status", {
        "scenario_id": sid, "bound_id": bound_id, "theta": theta,
        "status": HYPOTHESES_UNMET, "margin_min": math.nan, "n_points": 0,
    })
    res.details.setdefault("skipped", []).append({"bound_id": bound_id, "theta": theta, "reason": msg})


def _run_solve(res, s, eq, init, sols, ctx):
    sid = s.id
    for sol in sols:
        r, vals = sol.report()
        resid = sol.residuals() if sol.r.size > 1 else np.array([math.nan])
        res.details.setdefault("rays", []).append({
            "theta": sol.theta, "n_accepted": sol.n_accepted, "n_rejected": sol.n_rejected,
            "truncated": sol.truncated, "last_good_r": sol.last_good_r,
            "max_residual": float(np.nanmax(resid)), "branch_resets": sol.branch_resets,
            "error": sol.error,
        })
        for i in range(r.size):
            for j in range(eq.k + 1):
                v = complex(vals[i, j])
                res.add("solve", {
                    "scenario_id": sid, "theta": sol.theta, "r": r[i], "j": j,
                    "re": v.real, "im": v.imag, "abs": abs(v),
                })


def _run_bounds(res, s, eq, init, sols, ctx, exp):
    sid = s.id
    usable = [sol for sol in sols if sol.r.size > 1]
    entry = get_entry(s.equation.catalog) if s.equation.catalog else None
    for which in exp.which:
        if which == "comparison":
            if entry is None or entry.majorant is None:
                _unmet(res, sid, "comparison", 0.0, "no majorant problem for this equation")
                continue
            mp, A58 = entry.majorant()
            v = next((sol for sol in usable if sol.theta == 0.0), None)
            if v is None:
                raise PreconditionError("comparison needs the theta = 0 ray")
            traj = herold_majorant(mp, s.solver.r_max, s.solver.tol, s.solver.report_n)
            _bound_rows(res, sid, comparison_check(v, traj, mp, A58))
            continue
        hinf_norms = {}
        for sol in usable:
            try:
                if which == "growth":
                    _bound_rows(res, sid, [growth_bound(eq, sol, e) for e in exp.epsilons])
                elif which == "derivative":
                    for e in exp.epsilons:
                        _bound_rows(res, sid, derivative_growth_bound(eq, sol, e))
                elif which == "hinf":
                    for sv in exp.hinf_s:
                        if sv not in hinf_norms:
                            grid = disk_quadrature(1.0 - 1e-4, 64, 64)
                            hinf_norms[sv] = [bers_norm(a, sv, grid).value for a in eq.coefficients]
                        _bound_rows(res, sid, [hinf_growth_bound(eq, sol, sv, hinf_norms[sv], exp.epsilons[0])])
                elif which == "bloch":
                    M = exp.bloch_M if exp.bloch_M is not None else (entry.bloch_M if entry else None)
                    for e in exp.epsilons:
                        _bound_rows(res, sid, bloch_growth_bound(eq, sol, M, e))
            except (HypothesisError, PreconditionError) as exc:
                _unmet(res, sid, which, sol.theta, str(exc))


def _run_norms(res, s, eq, init, sols, ctx, exp):
    sid = s.id
    grid = disk_quadrature(exp.r_max, exp.radial_n, exp.angular_n)
    kernel = s.kernel.build()
    for j, A in enumerate(eq.coefficients):
        if A.is_zero:
            continue
        for space in exp.spaces:
            if space == "bloch":
                est = bloch_type_norm(A, exp.s, grid)
            elif space == "bers":
                est = bers_norm(A, exp.s, grid)
            elif space == "hardy":
                radii = np.linspace(0.0, exp.r_max, exp.radial_n)
                est = weighted_hardy_norm(A, exp.s, exp.t, radii, exp.angular_n)
            else:
                est = qk_seminorm(A, kernel, default_a_grid(), grid, exp.kernel_form)
            res.add("norms", {
                "scenario_id": sid, "target": f"A_{j}", "space": est.space,
                "params": ";".join(f"{k}={v}" for k, v in sorted(est.params.items())),
                "value": est.value, "residual": est.residual,
            })


def _run_conditions(res, s, eq, init, sols, ctx, exp):
    sid = s.id
    kernel = s.kernel.build()
    for tau in exp.thresholds:
        cfg = ConditionCheckConfig(tau, kernel, exp.mode, exp.c, tuple(exp.r_max_sequence))
        v = check_hypotheses(eq, cfg)
        for cv in v.coefficients:
            res.add("conditions", {
                "scenario_id": sid, "mode": exp.mode, "threshold": tau, "item": f"A_{cv.j}",
                "exponent": cv.exponent, "value": cv.sup, "passed": cv.passed,
            })
        res.add("conditions", {
            "scenario_id": sid, "mode": exp.mode, "threshold": tau,
            "item": f"condition_{v.kernel.condition}", "exponent": math.nan,
            "value": v.kernel.value, "passed": v.kernel.passed,
        })
        res.add("conditions", {
            "scenario_id": sid, "mode": exp.mode, "threshold": tau, "item": "overall",
            "exponent": math.nan, "value": math.nan, "passed": v.passed,
        })
        res.details.setdefault("verdicts", []).append(v.to_json())


def _run_volterra(res, s, eq, init, sols, ctx, exp):
    sid = s.id
    vb, reports = volterra_series_bound(
        eq, exp.theta, init, exp.r_grid, exp.tol, exp.n_max, solver_tol=s.solver.tol
    )
    for i, x in enumerate(vb.r):
        for n, h in enumerate(vb.H):
            res.add("volterra", {"scenario_id": sid, "quantity": "H", "index": n, "r": x, "value": h[i]})
        for name, arr in (("partial_sum", vb.partial_sums[-1]), ("tail", vb.tail[-1]),
                          ("f_bound", vb.f_bound), ("T", vb.T), ("S", vb.S), ("M", vb.M)):
            res.add("volterra", {"scenario_id": sid, "quantity": name, "index": vb.n_terms - 1,
                                 "r": x, "value": arr[i]})
    res.details["volterra"] = {"n_terms": vb.n_terms, "converged": vb.converged, "checks": vb.checks}
    _bound_rows(res, sid, reports)


def _run_scan(res, s, eq, init, sols, ctx, exp):
    sid = s.id
    a_grid = default_a_grid(tuple(exp.a_radii), exp.a_angles)
    scan = membership_scan(
        eq, s.kernel.build(), a_grid, exp.r_max_sequence, init, s.solver.tol, exp.n_rays,
        exp.radial_n, exp.derivative_order, exp.kernel_form, ctx.get("threads", 1),
    )
    for rm, val in zip(scan.r_max, scan.values):
        res.add("scan", {"scenario_id": sid, "r_max": rm, "value": val, "slope": scan.slope,
                         "classification": scan.classification})
    res.details["scan"] = scan.to_json()


RUNNERS: dict[str, Callable] = {
    "solve": lambda res, s, eq, init, sols, ctx, exp: _run_solve(res, s, eq, init, sols, ctx),
    "bounds": _run_bounds,
    "norms": _run_norms,
    "conditions": _run_conditions,
    "volterra": _run_volterra,
    "scan": _run_scan,
}


def run_scenario(
    s: Scenario,
    threads: int = 1,
    solver: Optional[Callable] = None,
) -> RunBundle:
    """Run every experiment; errors are captured per experiment.

    ``solver`` replaces the ray-fan step (used to inject failures).
    """
    bundle = RunBundle(s.id, s.model_dump(mode="json"))
    if not s.experiments:
        return bundle
    eq, init = s.build_equation()
    solve = solver or solve_rays
    ctx = {"threads": threads}
    sols, solve_error = None, ""
    if any(exp.type in NEEDS_RAYS for exp in s.experiments):
        try:
            sols = solve(s, eq, init, threads)
        except Exception as exc:  # noqa: BLE001 - recorded in the bundle
            solve_error = f"{type(exc).__name__}: {exc}"

    # solve-type experiments first, then the rest in file order
    order = sorted(range(len(s.experiments)), key=lambda i: (s.experiments[i].type != "solve", i))
    keys = _experiment_keys(s)
    results = {}
    for i in order:
        exp = s.experiments[i]
        res = ExperimentResult(keys[i], exp.type)
        if exp.type in NEEDS_RAYS and sols is None:
            res.status, res.message = "error", f"dependency failed: solve ({solve_error})"
        else:
            try:
                RUNNERS[exp.type](res, s, eq, init, sols, ctx, exp)
            except (DiskodeError, ValueError, ArithmeticError) as exc:
                res.status, res.message = "error", f"{type(exc).__name__}: {exc}"
                res.rows = {}
            except Exception as exc:  # noqa: BLE001 - isolate unexpected failures too
                res.status = "error"
                res.message = f"{type(exc).__name__}: {exc}"
                res.details["traceback"] = traceback.format_exc()
                res.rows = {}
        results[i] = res
    bundle.results = [results[i] for i in range(len(s.experiments))]
    return bundle
