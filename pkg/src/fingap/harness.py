"""End-to-end verification of the spectral-gap bound and comparison checks.

For each configured case the pipeline

  1. solves the discrete eigenproblem at each listed resolution,
  2. computes the domain diameter (analytic for flat convex shapes; the graph
     value is a cross-check, and overestimating d only weakens the bound),
  3. obtains a curvature certificate (K, N) and the model bound
     lambda_1(K, N, d),
  4. emits a BoundReport with margin = lambda_numeric - bound and a
     discretization tolerance from mesh halving,
  5. checks the gradient comparison F*(Du) <= v'(v^{-1}(u)) against a fitted
     1-D model solution, and the maxima comparison max u >= m_{K,N}.

A case is "violated" only when the margin is below minus the discretization
tolerance; comparison hypotheses that fail (N = inf for the maxima check,
eigenvalues at the model threshold, unreachable fit targets) are reported as
inconclusive, never as failures.

The eigenfunction is normalized by a positive scale so that min u = -1; a
sign flip to enforce max <= |min| is applied only for reversible norms,
because -u is not an eigenfunction of a non-reversible Laplacian.  For the
pointwise comparison u is additionally shrunk by (1 - 1e-6) so its range
stays strictly inside the model's.

Suites run case-independently (optionally in parallel), never abort on a
single case, and write a deterministic summary.json plus per-case CSV dumps;
the exit status is nonzero iff some case is violated.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .domain import (
    CurvatureCertificate,
    DiscreteDomain,
    DomainSpec,
    analytic_diameter,
    build_domain,
    curvature_certificate,
    domain_spec_from_config,
)
from .eigensolver import EigenResult, GradientFit, minimize_rayleigh
from .norms import dual_norm_eval, is_reversible
from .model1d import SolverError, fit_model_solution, lambda1_model, model_solution

__all__ = [
    "BoundReport",
    "ComparisonReport",
    "LichnerowiczReport",
    "CaseResult",
    "verify_bound",
    "check_gradient_comparison",
    "check_maxima",
    "lichnerowicz_check",
    "run_case",
    "run_suite",
    "golden_cases",
]


@dataclass
class BoundReport:
    case_id: str
    lambda_numeric: float
    diameter_used: float
    diameter_source: str
    K: float
    N: float
    bound: float
    margin: float
    discretization_tolerance: float
    verdict: str
    lambda_by_resolution: list = field(default_factory=list)


@dataclass
class ComparisonReport:
    fraction: float
    worst_violation: float
    tolerance: float
    inconclusive: bool = False
    reason: Optional[str] = None
    shrink: float = 0.0
    max_gap_core: Optional[float] = None


@dataclass
class LichnerowiczReport:
    applicable: bool
    threshold: float = 0.0
    holds: bool = True
    model_bound_holds: bool = True


@dataclass
class CaseResult:
    case_id: str
    report: BoundReport
    gradient_comparison: ComparisonReport
    maxima: ComparisonReport
    lichnerowicz: Optional[LichnerowiczReport]
    eigen: EigenResult
    domain: DiscreteDomain


def _parse_N(x) -> float:
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity"):
            return math.inf
        return float(x)
    return float(x)


def _case_certificate(case: dict, spec: DomainSpec) -> CurvatureCertificate:
    cfg = case.get("certificate")
    if cfg is None:
        return curvature_certificate(spec)
    return CurvatureCertificate(K=float(cfg["K"]), N=_parse_N(cfg["N"]),
                                provenance="user")


def _resolutions(case: dict) -> list[int]:
    res = sorted(int(r) for r in case.get("resolutions", []))
    if not res:
        raise ValueError(f"case {case.get('id')}: no resolutions given")
    if len(res) == 1:
        coarse = max(4, res[0] // 2)
        if coarse < res[0]:
            res = [coarse] + res
    return res


def _normalized_u(eigen: EigenResult, reversible: bool):
    """Scale (and for reversible norms possibly flip) so min u = -1."""
    u = eigen.u.copy()
    if reversible and u.max() > -u.min():
        u = -u
    u = u / (-u.min())
    return u, float(u.max())


def _model_threshold(K: float, N: float) -> float:
    if math.isfinite(N):
        return max(K * N / (N - 1.0), 0.0)
    return max(K, 0.0)


def verify_bound(case: dict) -> BoundReport:
    """Run the full bound pipeline for one case config; see run_case."""
    return run_case(case).report


def run_case(case: dict) -> CaseResult:
    """Solve, bound, and compare one case at its listed resolutions."""
    case_id = str(case.get("id", "case"))
    seed = int(case.get("seed", 0))
    res_list = _resolutions(case)

    lams = []
    eigen = None
    dom = None
    spec = None
    for r in res_list:
        cfg = dict(case)
        cfg["resolution"] = r
        spec = domain_spec_from_config(cfg)
        dom = build_domain(spec)
        eigen = minimize_rayleigh(dom, spec.norm, seed=seed)
        lams.append(eigen.lam)

    lam_num = lams[-1]
    tol_disc = max(2.0 * abs(lams[-1] - lams[-2]), 1e-8)
    cert = _case_certificate(case, spec)
    d_used = analytic_diameter(spec)
    bound = lambda1_model(cert.K, cert.N, d_used)
    margin = lam_num - bound
    if margin < -tol_disc:
        verdict = "violated"
    elif margin >= 0.0:
        verdict = "holds"
    else:
        verdict = "holds_within_tol"

    report = BoundReport(
        case_id=case_id,
        lambda_numeric=lam_num,
        diameter_used=d_used,
        diameter_source="analytic",
        K=cert.K,
        N=cert.N,
        bound=bound,
        margin=margin,
        discretization_tolerance=tol_disc,
        verdict=verdict,
        lambda_by_resolution=[[r, l] for r, l in zip(res_list, lams)],
    )
    grad_cmp = check_gradient_comparison(dom, spec, cert, eigen)
    max_cmp = check_maxima(cert, eigen, spec)
    lich = lichnerowicz_check(cert, lam_num, d_used) if cert.K > 0 else None
    return CaseResult(case_id=case_id, report=report,
                      gradient_comparison=grad_cmp, maxima=max_cmp,
                      lichnerowicz=lich, eigen=eigen, domain=dom)


def check_gradient_comparison(dom: DiscreteDomain, spec: DomainSpec,
                              cert: CurvatureCertificate,
                              eigen: EigenResult) -> ComparisonReport:
    """Pointwise check F*(Du) <= v'(v^{-1}(u)) against a fitted 1-D model.

    The model solution v is fitted (same eigenvalue, range [-1, k] covering
    the normalized u shrunk by 1e-6).  Reported is the fraction of interior
    nodes satisfying the inequality within C*h, C = 10*lambda; the worst gap;
    and the max |F*(Du) - v'(v^{-1}(u))| over the core |u| <= 0.9, which for
    flat cases must shrink at O(h^2).
    """
    K, N, lam = cert.K, cert.N, eigen.lam
    if math.isfinite(N) and N <= 1.0:
        return ComparisonReport(0.0, 0.0, 0.0, inconclusive=True,
                                reason="certificate N <= 1 has no model family")
    thresh = _model_threshold(K, N)
    if lam <= thresh * (1.0 + 1e-9) + 1e-12:
        return ComparisonReport(0.0, 0.0, 0.0, inconclusive=True,
                                reason="eigenvalue at or below model threshold")
    shrink = 1e-6
    u, k = _normalized_u(eigen, is_reversible(spec.norm))
    try:
        v = fit_model_solution(K, N, lam, k)
    except (ValueError, SolverError) as exc:
        return ComparisonReport(0.0, 0.0, 0.0, inconclusive=True,
                                reason=f"model fit failed: {exc}")
    u_c = (1.0 - shrink) * u
    if u_c.max() >= v.max_value or u_c.min() <= -1.0:
        return ComparisonReport(0.0, 0.0, 0.0, inconclusive=True,
                                reason="shrunk range not inside the model range")

    Du = GradientFit(dom).apply(u_c)
    fstar = dual_norm_eval(spec.norm, Du)
    W = v.vprime_of_value(u_c)
    interior = ~dom.boundary
    gap = fstar[interior] - W[interior]
    tol = 10.0 * lam * dom.h
    fraction = float(np.mean(gap <= tol))
    core = interior & (np.abs(u_c) <= 0.9)
    max_gap_core = float(np.max(np.abs(fstar[core] - W[core]))) if core.any() else None
    return ComparisonReport(
        fraction=fraction,
        worst_violation=float(gap.max()),
        tolerance=tol,
        shrink=shrink,
        max_gap_core=max_gap_core,
    )


def check_maxima(cert: CurvatureCertificate, eigen: EigenResult,
                 spec: DomainSpec, tol: float = 1e-3) -> ComparisonReport:
    """Check max u >= m_{K,N} for the normalized eigenfunction (finite N)."""
    K, N, lam = cert.K, cert.N, eigen.lam
    if not math.isfinite(N):
        return ComparisonReport(0.0, 0.0, tol, inconclusive=True,
                                reason="maxima comparison needs finite N")
    if N <= 1.0:
        return ComparisonReport(0.0, 0.0, tol, inconclusive=True,
                                reason="certificate N <= 1 has no model family")
    thresh = _model_threshold(K, N)
    if lam <= thresh * (1.0 + 1e-9) + 1e-12:
        return ComparisonReport(0.0, 0.0, tol, inconclusive=True,
                                reason="eigenvalue at or below model threshold")
    u, k = _normalized_u(eigen, is_reversible(spec.norm))
    m_kn = model_solution(K, N, lam).max_value
    holds = k >= m_kn - tol
    return ComparisonReport(
        fraction=1.0 if holds else 0.0,
        worst_violation=max(0.0, m_kn - k),
        tolerance=tol,
    )


def lichnerowicz_check(cert: CurvatureCertificate, lam_numeric: float,
                       d: Optional[float] = None,
                       tol: float = 1e-8) -> LichnerowiczReport:
    """For K > 0: lambda >= N K/(N-1), and the model bound dominates it."""
    if cert.K <= 0:
        return LichnerowiczReport(applicable=False)
    ratio = cert.N / (cert.N - 1.0) if math.isfinite(cert.N) else 1.0
    threshold = ratio * cert.K
    holds = lam_numeric >= threshold - tol
    model_ok = True
    if d is not None:
        model_ok = lambda1_model(cert.K, cert.N, d) >= threshold - tol
    return LichnerowiczReport(applicable=True, threshold=threshold,
                              holds=holds, model_bound_holds=model_ok)


# ---------------------------------------------------------------------------
# suites


def golden_cases() -> list[dict]:
    """The verification suite: sharp 1-D cases, boxes, weighted boxes, balls."""
    base = [
        {
            "id": "sharp-1d-twoslope-sym",
            "domain": {"shape": "interval", "length": 1.0},
            "norm": {"family": "two_slope_1d", "dim": 1,
                     "params": {"a_plus": 2.0, "a_minus": 2.0}},
            "weight": {"kind": "lebesgue"},
            "certificate": {"K": 0.0, "N": "inf"},
            "resolutions": [100, 200],
            "sharp": True,
        },
        {
            "id": "sharp-1d-twoslope-asym",
            "domain": {"shape": "interval", "length": 1.0},
            "norm": {"family": "two_slope_1d", "dim": 1,
                     "params": {"a_plus": 2.0, "a_minus": 0.5}},
            "weight": {"kind": "lebesgue"},
            "certificate": {"K": 0.0, "N": "inf"},
            "resolutions": [100, 200],
            "sharp": True,
        },
        {
            "id": "box-euclid",
            "domain": {"shape": "box", "lengths": [1.0, 1.0]},
            "norm": {"family": "euclidean", "dim": 2},
            "weight": {"kind": "lebesgue"},
            "resolutions": [30, 60],
        },
        {
            "id": "box-quadratic",
            "domain": {"shape": "box", "lengths": [1.0, 1.0]},
            "norm": {"family": "quadratic", "dim": 2,
                     "params": {"A": [1.0, 0.0, 0.0, 4.0]}},
            "weight": {"kind": "lebesgue"},
            "resolutions": [30, 60],
        },
        {
            "id": "box-randers",
            "domain": {"shape": "box", "lengths": [1.0, 1.0]},
            "norm": {"family": "randers", "dim": 2,
                     "params": {"A": [1.0, 0.0, 0.0, 1.0], "b": [0.3, 0.0]}},
            "weight": {"kind": "lebesgue"},
            "resolutions": [30, 60],
        },
        {
            "id": "box-gauss-half",
            "domain": {"shape": "box", "lengths": [5.0, 5.0]},
            "norm": {"family": "euclidean", "dim": 2},
            "weight": {"kind": "gaussian", "kappa": 0.5},
            "resolutions": [6, 12],
        },
        {
            "id": "box-gauss-one",
            "domain": {"shape": "box", "lengths": [4.0, 4.0]},
            "norm": {"family": "euclidean", "dim": 2},
            "weight": {"kind": "gaussian", "kappa": 1.0},
            "resolutions": [8, 16],
        },
        {
            "id": "ball-euclid",
            "domain": {"shape": "ball", "radius": 0.5},
            "norm": {"family": "euclidean", "dim": 2},
            "weight": {"kind": "lebesgue"},
            "resolutions": [20, 40],
        },
        {
            "id": "ball-randers",
            "domain": {"shape": "ball", "radius": 0.5},
            "norm": {"family": "randers", "dim": 2,
                     "params": {"A": [1.0, 0.0, 0.0, 1.0], "b": [0.2, 0.1]}},
            "weight": {"kind": "lebesgue"},
            "resolutions": [20, 40],
        },
    ]
    return base


def _case_summary(result: CaseResult) -> dict:
    out = {
        "id": result.case_id,
        "error": None,
        "bound_report": asdict(result.report),
        "gradient_comparison": asdict(result.gradient_comparison),
        "maxima": asdict(result.maxima),
        "lichnerowicz": asdict(result.lichnerowicz) if result.lichnerowicz else None,
    }
    if not math.isfinite(out["bound_report"]["N"]):
        out["bound_report"]["N"] = "inf"
    return out


def _pipeline(case: dict):
    try:
        result = run_case(case)
        summary = _case_summary(result)
        dump = np.column_stack([result.domain.nodes, result.eigen.u])
        return case.get("id", "case"), summary, dump
    except Exception as exc:  # per-case isolation: record, do not abort
        return (case.get("id", "case"),
                {"id": str(case.get("id", "case")), "error": str(exc)}, None)


@dataclass
class SuiteResult:
    summaries: list
    exit_code: int
    out_dir: str


def run_suite(config, out_dir: str, jobs: int = 1) -> SuiteResult:
    """Run every case in the config; write summary.json, bounds.csv and
    per-case eigenfunction dumps.  Exit code 1 iff some verdict is violated.
    """
    if isinstance(config, (str, os.PathLike)):
        with open(config) as f:
            config = json.load(f)
    cases = config.get("cases", [])
    os.makedirs(out_dir, exist_ok=True)

    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_pipeline, cases))
    else:
        results = [_pipeline(c) for c in cases]

    results.sort(key=lambda t: str(t[0]))
    summaries = []
    violated = 0
    for case_id, summary, dump in results:
        summaries.append(summary)
        if summary.get("error") is None:
            if summary["bound_report"]["verdict"] == "violated":
                violated += 1
            path = os.path.join(out_dir, f"case-{case_id}.csv")
            with open(path, "w", newline="") as f:
                w = csv.writer(f)
                dim = dump.shape[1] - 1
                w.writerow([f"x{i+1}" for i in range(dim)] + ["u"])
                for row in dump:
                    w.writerow([repr(float(x)) for x in row])

    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump({"cases": summaries, "n_violated": violated},
                  f, indent=2, sort_keys=True)
        f.write("\n")

    with open(os.path.join(out_dir, "bounds.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "lambda_numeric", "diameter", "K", "N", "bound",
                    "margin", "discretization_tolerance", "verdict"])
        for s in summaries:
            if s.get("error") is not None:
                w.writerow([s["id"], "error", "", "", "", "", "", "", s["error"]])
                continue
            r = s["bound_report"]
            w.writerow([r["case_id"], repr(r["lambda_numeric"]),
                        repr(r["diameter_used"]), repr(r["K"]), repr(r["N"]),
                        repr(r["bound"]), repr(r["margin"]),
                        repr(r["discretization_tolerance"]), r["verdict"]])

    return SuiteResult(summaries=summaries,
                       exit_code=1 if violated else 0,
                       out_dir=out_dir)
