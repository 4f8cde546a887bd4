"""HTTP service exposing the analyses as JSON endpoints.

Thin wrapper over the library: each endpoint takes the same system-spec
document the CLI reads from --input (under the "system" key) plus the
command's options, and returns the same report structure the CLI writes.
Run with `uvicorn delaymargin.service:app`.
"""

from typing import List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import charroots, criteria, simulate, smalldelay
from .cli import ABSCISSA_POSITIVE_TOL, _oracle_cross_check
from .errors import DelayMarginError, SpecFormatError
from .io import parse_system_spec
from .model import HistoryGrid, SystemSpec

app = FastAPI(title="delaymargin", version="0.1.0")


class AnalyzeRequest(BaseModel):
    system: dict
    alphas: List[float] = Field(default_factory=lambda: [0.0])
    nodes: int = 32


class RootsRequest(BaseModel):
    system: dict
    window: Optional[List[float]] = None  # [re_lo, re_hi, im_max]
    nodes: int = 32


class MarginRequest(BaseModel):
    system: dict
    mode: str = "stable"
    cross_check: bool = False
    tau_bracket: Optional[List[float]] = None
    nodes: int = 32


class SweepRequest(BaseModel):
    system: dict
    tau_range: List[float]  # [lo, hi, step]
    mode: str = "stable"
    nodes: int = 32


class SimulateRequest(BaseModel):
    system: dict
    horizon: Optional[float] = None
    step: Optional[float] = None


def _spec(doc):
    try:
        return parse_system_spec(doc)
    except SpecFormatError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def _run(fn):
    try:
        return fn()
    except DelayMarginError as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/analyze")
def analyze(req: AnalyzeRequest):
    spec = _spec(req.system)

    def run():
        hyp = criteria.hyperbolicity_test(spec)
        stability = {}
        for alpha in req.alphas:
            try:
                stability[f"{alpha:g}"] = criteria.stability_test(spec, alpha).to_dict()
            except DelayMarginError as exc:
                stability[f"{alpha:g}"] = {"verdict": "skipped", "reason": str(exc)}
        oracle = _oracle_cross_check(spec, req.nodes)
        certified = hyp.verdict == "hyperbolic" or any(
            rep.get("verdict") == "stable" for rep in stability.values()
        )
        if oracle["abscissa"] is not None and oracle["abscissa"] > ABSCISSA_POSITIVE_TOL:
            verdict = "unstable"
        elif certified:
            verdict = "stable" if any(
                rep.get("verdict") == "stable" for rep in stability.values()
            ) else "hyperbolic"
        else:
            verdict = "inconclusive"
        return {
            "verdict": verdict,
            "hyperbolicity": hyp.to_dict(),
            "stability": stability,
            "oracle": oracle,
        }

    return _run(run)


@app.post("/roots")
def roots(req: RootsRequest):
    spec = _spec(req.system)

    def run():
        window = tuple(req.window) if req.window else None
        rs = charroots.spectral_abscissa(spec, window=window, N=req.nodes)
        rightmost = rs.rightmost
        return {
            "abscissa": rs.abscissa if np.isfinite(rs.abscissa) else None,
            "window": list(rs.window),
            "certified_clear_right_of": rs.certified_clear_right_of,
            "contour_count": rs.contour_count,
            "rightmost_root": [rightmost.lam.real, rightmost.lam.imag] if rightmost else None,
            "roots": [
                {"re": r.lam.real, "im": r.lam.imag,
                 "residual": r.residual, "multiplicity": r.multiplicity}
                for r in rs.roots
            ],
        }

    return _run(run)


@app.post("/margin")
def margin(req: MarginRequest):
    spec = _spec(req.system)
    if not spec.is_feedback:
        raise HTTPException(status_code=422, detail="margin requires a feedback-mode spec")

    def run():
        result = smalldelay.robustness_margin(spec.B, spec.C, mode=req.mode)
        doc = result.to_dict()
        if req.cross_check and not result.unconditional:
            bracket = tuple(req.tau_bracket) if req.tau_bracket else (
                result.kappa * 1.001, max(10.0 * result.kappa, 5.0))
            try:
                tau_star, _ = charroots.critical_delay(spec.B, spec.C, bracket, N=req.nodes)
                doc["critical_delay"] = tau_star
                doc["conservatism_ratio"] = (
                    tau_star / result.kappa if result.kappa > 0 else None)
            except DelayMarginError as exc:
                doc["critical_delay"] = None
                doc["cross_check_note"] = str(exc)
        return doc

    return _run(run)


@app.post("/sweep")
def sweep(req: SweepRequest):
    spec = _spec(req.system)
    if not spec.is_feedback:
        raise HTTPException(status_code=422, detail="sweep requires a feedback-mode spec")
    if len(req.tau_range) != 3 or req.tau_range[2] <= 0:
        raise HTTPException(status_code=422, detail="tau_range must be [lo, hi, step>0]")

    def run():
        lo, hi, step = req.tau_range
        rows = []
        for tau in np.arange(lo, hi + step / 2, step):
            sp = SystemSpec.feedback(spec.B, spec.C, float(tau))
            absc = charroots.abscissa_only(sp, N=req.nodes)
            try:
                rep = criteria.hyperbolicity_test(sp)
                series_pass = rep.verdict == "hyperbolic"
            except DelayMarginError:
                series_pass = None
            rows.append({"tau": float(tau), "abscissa": absc, "series_pass": series_pass})
        try:
            kappa = smalldelay.robustness_margin(spec.B, spec.C, mode=req.mode).kappa
        except DelayMarginError:
            kappa = None
        return {"kappa": kappa, "rows": rows}

    return _run(run)


@app.post("/simulate")
def simulate_endpoint(req: SimulateRequest):
    spec = _spec(req.system)

    def run():
        history = HistoryGrid.constant(np.ones(spec.n), spec.r)
        h = simulate.aligned_step(spec, req.step if req.step else spec.r / 64.0)
        T = req.horizon if req.horizon else max(10.0, 10.0 * spec.r)
        traj = simulate.integrate(spec, history, T, h)
        out = {
            "h": traj.h,
            "T": float(traj.times[-1]),
            "diverged": traj.diverged,
            "final_norm": float(np.linalg.norm(traj.states[-1])),
            "norms": np.linalg.norm(traj.states, axis=1).tolist(),
        }
        try:
            est = simulate.decay_rate(traj)
            out["decay_rate"] = est.rate
            out["r_squared"] = est.r_squared
        except DelayMarginError as exc:
            out["decay_rate"] = None
            out["decay_rate_note"] = str(exc)
        return out

    return _run(run)
