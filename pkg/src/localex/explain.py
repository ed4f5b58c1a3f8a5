"""Explanation methods: LIME, the weight-free GLIME family, KernelSHAP, and a
SmoothGrad estimator, plus infinite-sample oracles for linear models.

All methods are deterministic functions of their request, including the seed;
identical requests yield identical explanations.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionTooLarge, ShapDegenerate
from .feature_space import (
    Reference,
    Segmentation,
    reconstruct_binary,
    reconstruct_continuous,
)
from .models import ModelSpec, evaluate
from .sampling import (
    Binomial,
    ExpKernel,
    Gaussian,
    Laplace,
    ShapKernel,
    UniformBinary,
    UniformBox,
    batch_weights,
    draw,
    splitmix64,
)
from .solver import RidgeProblem, solve_weighted_ridge

EXACT_SHAP_MAX_D = 20


# ---------------------------------------------------------------------------
# method specs


@dataclass(frozen=True)
class Lime:
    """Fair-coin masks weighted by the exponential kernel; ridge surrogate.

    unit_weights=True is the no-weighting ablation (pi = 1), used to probe how
    much of LIME's small-sigma instability the kernel itself causes.
    """

    sigma: float
    unit_weights: bool = False

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class GlimeBinomial:
    """Weight-free equivalent of Lime: Bernoulli(1/(1+e^{-1/sigma^2})) masks."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class GlimeGauss:
    """Additive Gaussian offsets in feature space; reference-independent."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class GlimeLaplace:
    """Additive Laplace offsets, variance-matched to sigma^2 per coordinate."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class GlimeUniform:
    """Additive uniform-box offsets, variance-matched to sigma^2 per coordinate."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class KernelShap:
    """Shapley-kernel weighted regression; exact mode enumerates all coalitions."""

    exact: bool = True


@dataclass(frozen=True)
class SmoothGrad:
    """Gaussian-smoothed gradient estimator on raw features."""

    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


MethodSpec = (
    Lime | GlimeBinomial | GlimeGauss | GlimeLaplace | GlimeUniform | KernelShap | SmoothGrad
)

_BINARY_METHODS = (Lime, GlimeBinomial, KernelShap)


def method_name(method: MethodSpec) -> str:
    return type(method).__name__


def default_lambda(method: MethodSpec) -> float:
    """Ridge strength default: 1 for ridge-based methods, 0 for KernelShap."""
    return 0.0 if isinstance(method, (KernelShap, SmoothGrad)) else 1.0


def method_to_json(method: MethodSpec) -> dict:
    obj: dict = {"method": method_name(method)}
    sigma = getattr(method, "sigma", None)
    if sigma is not None:
        obj["sigma"] = sigma
    if isinstance(method, Lime) and method.unit_weights:
        obj["unit_weights"] = True
    if isinstance(method, KernelShap):
        obj["exact"] = method.exact
    return obj


def method_from_json(obj: dict) -> MethodSpec:
    try:
        name = obj["method"]
    except (TypeError, KeyError) as exc:
        raise ConfigError("method entry must be an object with a 'method' tag") from exc
    classes = {
        "Lime": Lime,
        "GlimeBinomial": GlimeBinomial,
        "GlimeGauss": GlimeGauss,
        "GlimeLaplace": GlimeLaplace,
        "GlimeUniform": GlimeUniform,
        "KernelShap": KernelShap,
        "SmoothGrad": SmoothGrad,
    }
    if name not in classes:
        raise ConfigError(f"unknown method: {name!r}")
    try:
        if name == "Lime":
            return Lime(float(obj["sigma"]), bool(obj.get("unit_weights", False)))
        if name == "KernelShap":
            return KernelShap(bool(obj.get("exact", True)))
        return classes[name](float(obj["sigma"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {name} method entry: {exc}") from exc


# ---------------------------------------------------------------------------
# requests and explanations


@dataclass(frozen=True)
class ExplainRequest:
    model: ModelSpec
    x: np.ndarray
    segmentation: Segmentation
    method: MethodSpec
    n: int
    seed: int
    lam: float = 1.0
    reference: Reference | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        object.__setattr__(self, "x", x)
        if x.shape != (self.segmentation.size,):
            raise ConfigError(
                f"input has length {x.size}, segmentation expects {self.segmentation.size}"
            )
        if self.n < 1:
            raise ConfigError(f"sample count must be >= 1, got {self.n}")
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if isinstance(self.method, _BINARY_METHODS) and self.reference is None:
            raise ConfigError(
                f"{method_name(self.method)} perturbs against a reference; none given"
            )
        if isinstance(self.method, SmoothGrad) and (
            self.segmentation.d != self.segmentation.size
        ):
            raise ConfigError("SmoothGrad is defined on raw features (singleton segments)")


@dataclass(frozen=True)
class Explanation:
    """Attribution vector plus the run parameters that produced it.

    r2 is None for methods that fit no surrogate.
    """

    w: np.ndarray
    intercept: float
    r2: float | None
    method: MethodSpec
    n: int
    seed: int
    lam: float
    d: int

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        if w.shape != (self.d,):
            raise ValueError(f"w has shape {w.shape}, expected ({self.d},)")
        if not np.all(np.isfinite(w)):
            raise ValueError("attributions must be finite")
        object.__setattr__(self, "w", w)

    @property
    def sigma(self) -> float | None:
        return getattr(self.method, "sigma", None)


def explanation_to_json(exp: Explanation) -> dict:
    extras = method_to_json(exp.method)
    extras.pop("method")
    extras.pop("sigma", None)
    return {
        "method": method_name(exp.method),
        "sigma": exp.sigma,
        "lambda": exp.lam,
        "n": exp.n,
        "seed": exp.seed,
        "d": exp.d,
        "w": exp.w.tolist(),
        "intercept": exp.intercept,
        "r2": exp.r2,
        **extras,  # method-specific flags: unit_weights, exact
    }


def explanation_from_json(obj: dict) -> Explanation:
    method = method_from_json({**obj, "method": obj["method"]})
    return Explanation(
        np.asarray(obj["w"]),
        float(obj["intercept"]),
        None if obj.get("r2") is None else float(obj["r2"]),
        method,
        int(obj["n"]),
        int(obj["seed"]),
        float(obj["lambda"]),
        int(obj["d"]),
    )


# ---------------------------------------------------------------------------
# the methods


def _surrogate(
    req: ExplainRequest,
    design: np.ndarray,
    responses: np.ndarray,
    pi: np.ndarray,
    lam: float,
    n_recorded: int,
) -> Explanation:
    problem = RidgeProblem(design, responses, pi, lam, fit_intercept=True)
    sol = solve_weighted_ridge(problem)
    return Explanation(
        sol.w, sol.intercept, sol.r2, req.method, n_recorded, req.seed, lam,
        req.segmentation.d,
    )


def explain_lime(req: ExplainRequest) -> Explanation:
    """Fair-coin masks, exponential-kernel weights, weighted ridge surrogate."""
    if not isinstance(req.method, Lime):
        raise ConfigError(f"explain_lime got method {method_name(req.method)}")
    seg = req.segmentation
    masks = draw(UniformBinary(seg.d), req.n, req.seed)
    if req.method.unit_weights:
        pi = np.ones(req.n)
    else:
        pi = batch_weights(ExpKernel(req.method.sigma), masks)
    points = reconstruct_binary(req.x, req.reference, seg, masks)
    responses = evaluate(req.model, points)
    return _surrogate(req, masks, responses, pi, req.lam, req.n)


def explain_glime(req: ExplainRequest) -> Explanation:
    """Weight-free variants: sample from the transformed law, solve unweighted ridge."""
    seg = req.segmentation
    method = req.method
    if isinstance(method, GlimeBinomial):
        masks = draw(Binomial(seg.d, method.sigma), req.n, req.seed)
        points = reconstruct_binary(req.x, req.reference, seg, masks)
        design = masks
    elif isinstance(method, (GlimeGauss, GlimeLaplace, GlimeUniform)):
        dist_cls = {
            GlimeGauss: Gaussian,
            GlimeLaplace: Laplace,
            GlimeUniform: UniformBox,
        }[type(method)]
        offsets = draw(dist_cls(seg.d, method.sigma), req.n, req.seed)
        points = reconstruct_continuous(req.x, seg, offsets)
        design = offsets
    else:
        raise ConfigError(f"explain_glime got method {method_name(method)}")
    responses = evaluate(req.model, points)
    return _surrogate(req, design, responses, np.ones(req.n), req.lam, req.n)


def _all_interior_masks(d: int) -> np.ndarray:
    """All masks with 1 <= k <= d-1, in increasing integer order."""
    codes = np.arange(1, 2**d - 1, dtype=np.uint32)
    return ((codes[:, None] >> np.arange(d, dtype=np.uint32)) & 1).astype(np.float64)


def _sampled_interior_masks(d: int, n: int, seed: int) -> np.ndarray:
    """First n fair-coin masks with the degenerate coalitions discarded."""
    kept: list[np.ndarray] = []
    total = 0
    chunk = max(n, 256)
    for round_idx in itertools.count():
        masks = draw(UniformBinary(d), chunk, splitmix64(seed ^ round_idx))
        k = masks.sum(axis=1)
        good = masks[(k > 0) & (k < d)]
        kept.append(good)
        total += len(good)
        if total >= n:
            break
    return np.vstack(kept)[:n]


def explain_kernelshap(req: ExplainRequest) -> Explanation:
    """Shapley-kernel weighted regression with a fitted (free) intercept.

    Exact mode enumerates every non-degenerate coalition, which recovers
    Shapley values for games whose interactions do not reach full degree d;
    the acceptance suite checks this against brute-force enumeration.
    """
    if not isinstance(req.method, KernelShap):
        raise ConfigError(f"explain_kernelshap got method {method_name(req.method)}")
    seg = req.segmentation
    d = seg.d
    if d < 2:
        raise ShapDegenerate("KernelShap needs d >= 2: every coalition is degenerate")
    if req.method.exact:
        if d > EXACT_SHAP_MAX_D:
            raise DimensionTooLarge(
                f"exact enumeration caps at d={EXACT_SHAP_MAX_D}, got d={d}"
            )
        masks = _all_interior_masks(d)
    else:
        masks = _sampled_interior_masks(d, req.n, req.seed)
    pi = batch_weights(ShapKernel(), masks)
    points = reconstruct_binary(req.x, req.reference, seg, masks)
    responses = evaluate(req.model, points)
    return _surrogate(req, masks, responses, pi, 0.0, len(masks))


def smoothgrad_estimate(
    model: ModelSpec, x: np.ndarray, sigma: float, n: int, seed: int
) -> np.ndarray:
    """(1/sigma^2) * mean of z' f(x + z') over Gaussian offsets.

    By Stein's identity this estimates the Gaussian-smoothed gradient
    E[grad f(x + z')]; as sigma -> 0 it approaches the plain gradient.
    """
    x = np.asarray(x, dtype=np.float64)
    offsets = draw(Gaussian(x.shape[0], sigma), n, seed)
    responses = evaluate(model, x + offsets)
    return (offsets.T @ responses) / (n * sigma * sigma)


def explain(req: ExplainRequest) -> Explanation:
    """Dispatch a request to its method implementation."""
    method = req.method
    if isinstance(method, Lime):
        return explain_lime(req)
    if isinstance(method, (GlimeBinomial, GlimeGauss, GlimeLaplace, GlimeUniform)):
        return explain_glime(req)
    if isinstance(method, KernelShap):
        return explain_kernelshap(req)
    if isinstance(method, SmoothGrad):
        w = smoothgrad_estimate(req.model, req.x, method.sigma, req.n, req.seed)
        fx = float(evaluate(req.model, req.x[None, :])[0])
        # local linearization around x: intercept f(x), no surrogate fit, no R^2
        return Explanation(w, fx, None, method, req.n, req.seed, 0.0, req.segmentation.d)
    raise ConfigError(f"unknown method: {method!r}")


# ---------------------------------------------------------------------------
# infinite-sample oracles for linear models


def infinite_limit_linear_binomial(
    c: np.ndarray,
    bias: float,
    x: np.ndarray,
    reference: Reference,
    seg: Segmentation,
    sigma: float | None = None,
) -> tuple[np.ndarray, float]:
    """Limit of Lime/GlimeBinomial on a linear model: w_j = sum_seg c_i (x_i - r_i).

    sigma is accepted for signature symmetry but the limit does not depend on
    it; the kernel width only changes the finite-sample convergence rate.
    """
    del sigma
    c = np.asarray(c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    r = reference.values
    if c.shape != x.shape or c.shape != r.shape or c.shape != (seg.size,):
        raise ConfigError("c, x, and reference must all have the raw length")
    w = np.bincount(seg.assignment, weights=c * (x - r), minlength=seg.d)
    intercept = float(bias + c @ r)
    return w, intercept


def infinite_limit_linear_gauss(
    c: np.ndarray, bias: float, x: np.ndarray, seg: Segmentation
) -> tuple[np.ndarray, float]:
    """Limit of the additive continuous variants on a linear model.

    The broadcast lift makes the response exactly linear in the offsets, so
    the least-squares limit is w_j = sum_seg c_i with intercept f(x).
    """
    c = np.asarray(c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if c.shape != x.shape or c.shape != (seg.size,):
        raise ConfigError("c and x must have the raw length")
    w = np.bincount(seg.assignment, weights=c, minlength=seg.d)
    intercept = float(bias + c @ x)
    return w, intercept
