"""Two-regime logistic smooth-transition VAR for monthly factor scores.

The model for an n-dimensional series y_t with p lags and optional
exogenous terms x_t is

    y_t = mu0 + sum_j Phi0_j y_{t-j} + A0 x_t
        + G(s_t; gamma, c) * (mu1 + sum_j Phi1_j y_{t-j} + A1 x_t) + eps_t

with a single logistic transition function shared by all equations,

    G(s; gamma, c) = 1 / (1 + exp(-gamma * (s - c))).

Estimation profiles out the linear coefficients: for fixed (gamma, c)
they solve a least-squares problem in closed form, so the fit is a grid
search over gamma (log-spaced) and c (deciles of the standardized
transition variable) followed by a derivative-free polish of the best
grid point.  Because the transition variable enters standardized, gamma
is scale-free; fitted parameters are reported on both scales.

Candidate transition variables are screened with a multivariate LM-type
linearity test based on a third-order Taylor expansion of G: the VAR
residuals are regressed on the base regressors augmented with their
interactions with s, s^2 and s^3, and the Wilks lambda of that auxiliary
regression is converted to an F statistic via Rao's approximation.  The
candidate with the smallest p-value becomes the transition variable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy import optimize, stats
from scipy.special import expit

from .regimes import RegimeSeries

G_CLIP = 1e-15


class VlstarError(ValueError):
    pass


@dataclass(frozen=True)
class LogisticParams:
    """Slope and location of the logistic transition function.

    gamma = 0 marks the degenerate linear case (G identically 1/2) and
    only appears when a caller forces it; fitted parameters always have
    gamma > 0.
    """

    gamma: float
    c: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0.0:
            raise VlstarError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not np.isfinite(self.c):
            raise VlstarError(f"c must be finite, got {self.c}")


def logistic_g(s: np.ndarray | float, params: LogisticParams) -> np.ndarray | float:
    """Logistic transition weight, clipped into the open interval (0, 1)."""
    z = params.gamma * (np.asarray(s, dtype=float) - params.c)
    g = np.clip(expit(z), G_CLIP, 1.0 - G_CLIP)
    return float(g) if np.isscalar(s) else g


def _lag_design(
    y: np.ndarray, p: int, x: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    """Trim the first p rows and build [1, y_{t-1}, .., y_{t-p}, x_t]."""
    t, n = y.shape
    if p < 1:
        raise VlstarError("p must be >= 1")
    if t - p < 2 * (1 + n * p) + 2:
        raise VlstarError(f"sample too short for p={p}: T={t}")
    cols = [np.ones(t - p)]
    for j in range(1, p + 1):
        cols.append(y[p - j : t - j])
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if len(x) != t:
            raise VlstarError("exogenous block must align with y rows")
        cols.append(x[p:])
    return y[p:], np.column_stack(cols)


def _ols(design: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    resid = targets - design @ coef
    return coef, resid, float((resid**2).sum())


class LinearityResult(NamedTuple):
    candidate_id: str
    statistic: float
    p_value: float
    df1: int
    df2: float


def _prune_dependent(base: np.ndarray, block: np.ndarray, tol: float = 1e-8) -> list[int]:
    """Indices of block columns not already spanned by base (greedy QR)."""
    basis, _ = np.linalg.qr(base)
    kept: list[int] = []
    for j in range(block.shape[1]):
        col = block[:, j]
        norm = np.linalg.norm(col)
        if norm == 0.0:
            continue
        resid = col - basis @ (basis.T @ col)
        rnorm = np.linalg.norm(resid)
        if rnorm > tol * norm:
            kept.append(j)
            basis = np.column_stack([basis, resid / rnorm])
    return kept


def linearity_test(
    y: np.ndarray,
    candidates: Mapping[str, np.ndarray],
    p: int = 1,
    x: np.ndarray | None = None,
) -> list[LinearityResult]:
    """LM-type linearity test against each candidate transition variable.

    For candidate s the base VAR regressors Z are augmented with
    [Z*s, Z*s^2, Z*s^3]; interaction columns that are exact duplicates of
    base columns (e.g. the constant times s when s is itself a lag of y)
    are dropped before testing.  A candidate whose interactions add no
    independent column at all (a constant, say) is rank-deficient and an
    error.  Returns one (statistic, p-value) per candidate, input order.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise VlstarError("y must be T x n")
    if not candidates:
        raise VlstarError("no candidate transition variables")
    targets, base = _lag_design(y, p, x)
    t_eff, n = targets.shape
    if np.linalg.matrix_rank(base) < base.shape[1]:
        raise VlstarError("base regressors are rank deficient")
    _, resid0, _ = _ols(base, targets)
    e0 = resid0.T @ resid0
    sign0, logdet0 = np.linalg.slogdet(e0)
    if sign0 <= 0:
        raise VlstarError("null residual covariance is singular")
    results = []
    for cid, series in candidates.items():
        s = np.asarray(series, dtype=float)
        if len(s) != len(y):
            raise VlstarError(f"candidate {cid!r} must align with y rows")
        s_eff = s[p:]
        if not np.all(np.isfinite(s_eff)):
            raise VlstarError(f"candidate {cid!r} has non-finite values after lag trim")
        scale = s_eff.std()
        if scale == 0.0:
            raise VlstarError(f"candidate {cid!r} is constant (rank deficient)")
        z = (s_eff - s_eff.mean()) / scale
        inter = np.hstack([base * z[:, None], base * (z**2)[:, None], base * (z**3)[:, None]])
        kept = _prune_dependent(base, inter)
        if not kept:
            raise VlstarError(f"candidate {cid!r} adds no independent regressor")
        aug = np.hstack([base, inter[:, kept]])
        q_eff = len(kept)
        if t_eff <= 4 * aug.shape[1]:
            raise VlstarError(
                f"candidate {cid!r} needs more than {4 * aug.shape[1]} usable "
                f"rows; got {t_eff}"
            )
        ve = t_eff - aug.shape[1]
        if ve <= n + 1:
            raise VlstarError(f"sample too small for candidate {cid!r}")
        _, resid1, _ = _ols(aug, targets)
        e1 = resid1.T @ resid1
        sign1, logdet1 = np.linalg.slogdet(e1)
        if sign1 <= 0:
            raise VlstarError(f"alternative residual covariance singular for {cid!r}")
        # Rao's F approximation for Wilks lambda
        lam = np.exp(logdet1 - logdet0)
        pq = n * n + q_eff * q_eff - 5
        srao = np.sqrt((n * n * q_eff * q_eff - 4.0) / pq) if pq > 0 else 1.0
        df1 = n * q_eff
        df2 = srao * (ve - 0.5 * (n - q_eff + 1.0)) - 0.5 * df1 + 1.0
        if df2 <= 0:
            raise VlstarError(f"degrees of freedom exhausted for candidate {cid!r}")
        root = lam ** (1.0 / srao)
        fstat = (1.0 - root) / root * df2 / df1
        pval = float(stats.f.sf(fstat, df1, df2))
        results.append(LinearityResult(cid, float(fstat), pval, df1, float(df2)))
    return results


def select_transition(results: Sequence[LinearityResult]) -> LinearityResult:
    """Lowest p-value wins; ties go to the earlier candidate."""
    best = results[0]
    for r in results[1:]:
        if r.p_value < best.p_value:
            best = r
    return best


def profile_ssr(
    y: np.ndarray,
    s: np.ndarray,
    gamma: float,
    c: float,
    p: int = 1,
    x: np.ndarray | None = None,
) -> float:
    """SSR of the model with (gamma, c) fixed in the raw units of ``s``
    and all linear coefficients solved by least squares."""
    y = np.asarray(y, dtype=float)
    targets, base = _lag_design(y, p, x)
    s_eff = np.asarray(s, dtype=float)[p:]
    g = logistic_g(s_eff, LogisticParams(gamma, c))
    _, _, ssr = _ols(np.hstack([base, base * np.asarray(g)[:, None]]), targets)
    return ssr


@dataclass(frozen=True)
class VlstarFit:
    """Fitted two-regime logistic smooth-transition VAR."""

    n: int
    p: int
    transition_id: str
    params: LogisticParams          # standardized transition scale
    params_original: LogisticParams # raw transition scale
    transition_mean: float
    transition_scale: float
    mu0: np.ndarray
    phi0: tuple[np.ndarray, ...]
    a0: np.ndarray | None
    mu1: np.ndarray
    phi1: tuple[np.ndarray, ...]
    a1: np.ndarray | None
    coef: np.ndarray                # stacked (2q x n) regression coefficients
    ssr: float
    ssr_linear: float
    residuals: np.ndarray
    g_values: np.ndarray
    transition: np.ndarray          # standardized transition series (effective rows)
    transition_raw: np.ndarray
    y_effective: np.ndarray
    months: tuple[str, ...]         # all input months incl. the p burn-in rows
    linearity: tuple[LinearityResult, ...]
    no_rejection: bool
    refine_converged: bool
    degenerate_linear: bool

    def combined_coefficients(self) -> np.ndarray:
        """Coefficients of the equivalent linear model at G = 1/2."""
        q = self.coef.shape[0] // 2
        return self.coef[:q] + 0.5 * self.coef[q:]


def _unpack_blocks(
    coef: np.ndarray, n: int, p: int, n_exog: int
) -> tuple[np.ndarray, tuple[np.ndarray, ...], np.ndarray | None]:
    mu = coef[0].copy()
    phi = tuple(coef[1 + j * n : 1 + (j + 1) * n].T.copy() for j in range(p))
    a = coef[1 + p * n :].T.copy() if n_exog else None
    return mu, phi, a


def fit_vlstar(
    y: np.ndarray,
    candidates: Mapping[str, np.ndarray],
    p: int = 1,
    x: np.ndarray | None = None,
    m: int = 2,
    months: Sequence[str] | None = None,
    gamma_bounds: tuple[float, float] = (0.1, 100.0),
    n_gamma: int = 30,
    refine: bool = True,
    linearity_level: float = 0.05,
    transition_override: LogisticParams | None = None,
) -> VlstarFit:
    """Fit the smooth-transition VAR.

    ``candidates`` maps candidate ids to transition-variable series
    aligned with the rows of ``y`` (entries inside the first p rows may
    be NaN, they are trimmed).  Unless ``transition_override`` is given,
    the candidate with the smallest linearity-test p-value is selected;
    if none rejects at ``linearity_level`` a warning is issued and the
    best candidate is used anyway.

    ``transition_override`` skips selection and the grid: the single
    candidate is used with the given (gamma, c) interpreted in the raw
    units of that series.  gamma = 0 is the degenerate linear case and
    collapses the fit to ordinary VAR least squares with the second
    regime's coefficient block at zero.

    The grid search is deterministic: gamma descends the log-spaced grid
    in ascending order and c the decile grid in ascending order, and a
    strictly-smaller SSR is required to displace the incumbent, so ties
    resolve to the smallest gamma, then the smallest c.
    """
    if m != 2:
        raise NotImplementedError("only m=2 regimes are implemented")
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise VlstarError("y must be T x n")
    t, n = y.shape
    if t <= 10 * n * (p + 1):
        raise VlstarError(
            f"need more than {10 * n * (p + 1)} rows for n={n}, p={p}; got {t}"
        )
    if months is None:
        month_labels = tuple(f"t{i:04d}" for i in range(t))
    else:
        month_labels = tuple(str(mo) for mo in months)
        if len(month_labels) != t:
            raise VlstarError("months must align with y rows")
    targets, base = _lag_design(y, p, x)
    q_base = base.shape[1]
    n_exog = q_base - 1 - n * p
    _, resid_lin, ssr_linear = _ols(base, targets)

    if transition_override is not None:
        if len(candidates) != 1:
            raise VlstarError("transition_override requires exactly one candidate")
        (cid, series), = candidates.items()
        lin_results: tuple[LinearityResult, ...] = ()
        no_rejection = False
    else:
        lin_results = tuple(linearity_test(y, candidates, p=p, x=x))
        chosen = select_transition(lin_results)
        cid = chosen.candidate_id
        series = candidates[cid]
        no_rejection = chosen.p_value > linearity_level
        if no_rejection:
            warnings.warn(
                f"no linearity rejection at {linearity_level:.0%} "
                f"(best p={chosen.p_value:.3f} for {cid!r}); fitting anyway",
                stacklevel=2,
            )
    s_raw = np.asarray(series, dtype=float)[p:]
    if not np.all(np.isfinite(s_raw)):
        raise VlstarError(f"transition variable {cid!r} has non-finite values")
    s_mean = float(s_raw.mean())
    s_scale = float(s_raw.std(ddof=1))
    if s_scale == 0.0:
        raise VlstarError(f"transition variable {cid!r} is constant")
    s_std = (s_raw - s_mean) / s_scale

    if transition_override is not None and transition_override.gamma == 0.0:
        coef0, resid, ssr = _ols(base, targets)
        coef = np.vstack([coef0, np.zeros_like(coef0)])
        g_vals = np.full(len(targets), 0.5)
        params_std = LogisticParams(0.0, 0.0)
        params_orig = transition_override
        converged = True
        degenerate = True
    else:
        degenerate = False
        if transition_override is not None:
            # raw-scale override mapped onto the standardized series
            params_std = LogisticParams(
                transition_override.gamma * s_scale,
                (transition_override.c - s_mean) / s_scale,
            )
            best = (params_std.gamma, params_std.c)
            design = np.hstack(
                [base, base * logistic_g(s_std, params_std)[:, None]]
            )
            coef, resid, ssr = _ols(design, targets)
            converged = True
        else:
            gamma_grid = np.geomspace(gamma_bounds[0], gamma_bounds[1], n_gamma)
            c_grid = np.percentile(s_std, np.linspace(10.0, 90.0, 9))
            best_ssr = np.inf
            best = (gamma_grid[0], c_grid[0])
            for gam in gamma_grid:
                for cc in c_grid:
                    g = logistic_g(s_std, LogisticParams(gam, cc))
                    _, _, cand_ssr = _ols(np.hstack([base, base * g[:, None]]), targets)
                    if cand_ssr < best_ssr:
                        best_ssr = cand_ssr
                        best = (float(gam), float(cc))
            converged = True
            if refine:
                lo_g, hi_g = 1e-4, gamma_bounds[1]
                lo_c = float(s_std.min()) - 2.0
                hi_c = float(s_std.max()) + 2.0
                # finite out-of-bounds penalty; inf makes Nelder-Mead's
                # convergence check emit inf - inf warnings
                penalty = 1e6 * (1.0 + best_ssr)

                def objective(theta):
                    gam = np.exp(theta[0])
                    cc = theta[1]
                    if not (lo_g <= gam <= hi_g and lo_c <= cc <= hi_c):
                        return penalty
                    g = logistic_g(s_std, LogisticParams(gam, cc))
                    _, _, val = _ols(np.hstack([base, base * g[:, None]]), targets)
                    return val

                res = optimize.minimize(
                    objective,
                    x0=np.array([np.log(best[0]), best[1]]),
                    method="Nelder-Mead",
                    options=dict(
                        xatol=1e-6,
                        fatol=max(1e-12, 1e-10 * best_ssr),
                        maxiter=600,
                    ),
                )
                converged = bool(res.success)
                if np.isfinite(res.fun) and res.fun < best_ssr:
                    best = (float(np.exp(res.x[0])), float(res.x[1]))
                elif not converged:
                    warnings.warn(
                        "grid refinement did not converge, keeping grid optimum",
                        stacklevel=2,
                    )
            params_std = LogisticParams(best[0], best[1])
            design = np.hstack([base, base * logistic_g(s_std, params_std)[:, None]])
            coef, resid, ssr = _ols(design, targets)
        params_orig = LogisticParams(params_std.gamma / s_scale,
                                     params_std.c * s_scale + s_mean)
        g_vals = np.asarray(logistic_g(s_std, params_std))

    mu0, phi0, a0 = _unpack_blocks(coef[:q_base], n, p, n_exog)
    mu1, phi1, a1 = _unpack_blocks(coef[q_base:], n, p, n_exog)
    return VlstarFit(
        n=n,
        p=p,
        transition_id=cid,
        params=params_std,
        params_original=params_orig,
        transition_mean=s_mean,
        transition_scale=s_scale,
        mu0=mu0,
        phi0=phi0,
        a0=a0,
        mu1=mu1,
        phi1=phi1,
        a1=a1,
        coef=coef,
        ssr=ssr,
        ssr_linear=ssr_linear,
        residuals=resid,
        g_values=g_vals,
        transition=s_std,
        transition_raw=s_raw,
        y_effective=targets,
        months=month_labels,
        linearity=lin_results,
        no_rejection=no_rejection,
        refine_converged=converged,
        degenerate_linear=degenerate,
    )


def label_regimes(fit: VlstarFit, detector: str = "vlstar") -> RegimeSeries:
    """Monthly Calm/HighVol labels from the fitted transition weights.

    Months with G > 1/2 form one group, G <= 1/2 the other; the group
    whose mean first component of y (the realized variance level along
    the leading principal direction) is larger becomes HighVol.  The
    p burn-in months have no fitted weight and inherit the first
    effective month's label with a NaN transition value.  If every month
    lands in one group the series is labeled entirely Calm with a
    warning, since there is no second group to compare against.
    """
    high_g = fit.g_values > 0.5
    if high_g.all() or (~high_g).all():
        warnings.warn("single-regime fit, all months labeled Calm", stacklevel=2)
        highvol_eff = np.zeros(len(fit.g_values), dtype=bool)
    else:
        first_pc = fit.y_effective[:, 0]
        if first_pc[high_g].mean() >= first_pc[~high_g].mean():
            highvol_eff = high_g
        else:
            highvol_eff = ~high_g
    p = fit.p
    highvol = np.concatenate([np.repeat(highvol_eff[:1], p), highvol_eff])
    transition = np.concatenate([np.full(p, np.nan), fit.transition_raw])
    return RegimeSeries(
        months=fit.months,
        highvol=highvol,
        detector=detector,
        transition=transition,
    )
