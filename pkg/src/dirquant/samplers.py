"""Random-variate generation and the MCMC samplers.

Three samplers are provided: a Gibbs sampler for the unconditional model, a
kernel-weighted Gibbs sampler for the conditional model, and a random-walk
Metropolis-Hastings fallback for non-normal priors.  Multi-direction
simultaneous estimation stacks independent blocks under a block-diagonal
normal prior.

Latent-scale draws use the nu = 1/2 generalized inverse Gaussian, sampled
exactly through the reciprocal inverse-Gaussian identity.  The conditional
sampler carries the unit-exponential latent variable internally (the
kernel-scaled latent is a deterministic rescaling of it, so the chain law is
identical) because that parametrization stays finite for arbitrarily small
kernel weights.

Reproducibility contract: identical (seed, configuration, data) produce
bit-identical chains.  Parameter order inside theta is (beta_y, beta_x,
alpha) for the unconditional model and design order for conditional models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants
from .ald import HyperplaneParams, mixture_constants
from .errors import (
    DegenerateWindowError,
    DomainError,
    InitializationError,
    NumericalError,
    ShapeError,
    UnsupportedPriorError,
)
from .geometry import Dataset, Direction, OrthoBasis, orthonormal_complement, project
from .optimize import fit_check_loss

__all__ = [
    "PriorSpec",
    "Chain",
    "KernelSpec",
    "ConditionalDesign",
    "sample_gig_half",
    "gibbs_unconditional",
    "gibbs_conditional",
    "gibbs_simultaneous",
    "metropolis_hastings",
    "kernel_weights",
    "make_conditional_design",
    "default_bandwidth",
    "conjugate_normal_update",
    "unconditional_param_names",
]


@dataclass(frozen=True)
class PriorSpec:
    """Normal prior N(mean, covariance) for a parameter block."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        d = mean.size
        if cov.shape != (d, d):
            raise ShapeError(f"covariance must be {d} x {d}, got {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > constants.SYMMETRY_TOL:
            raise ShapeError("prior covariance is not symmetric")
        if np.min(np.linalg.eigvalsh(cov)) <= 0:
            raise ShapeError("prior covariance is not positive definite")

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class Chain:
    """Posterior draws plus the metadata needed to reproduce them."""

    draws: np.ndarray
    burn_in: int
    seed: int
    sampler: str
    acceptance_rate: float = 1.0
    names: tuple = ()
    layout: tuple | None = None  # (k, p) when coordinates are (beta_y, beta_x, alpha)

    def __post_init__(self):
        draws = np.atleast_2d(np.asarray(self.draws, dtype=float))
        object.__setattr__(self, "draws", draws)
        if not (draws.shape[0] > self.burn_in >= 0):
            raise ShapeError("need more draws than burn-in")
        if not np.all(np.isfinite(draws)):
            raise NumericalError("chain contains non-finite draws")
        if self.names and len(self.names) != draws.shape[1]:
            raise ShapeError("one name per chain coordinate required")

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def post_burn(self) -> np.ndarray:
        return self.draws[self.burn_in :]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel weight function; only the Gaussian kernel is implemented.

    ``normalized`` includes the (2 pi h^2)^(-p/2) density factor.  Without it
    the kernel peaks at 1, so the wide-bandwidth limit gives unit weights and
    the conditional model collapses onto the unconditional one.
    """

    bandwidth: float
    kind: str = "gaussian"
    normalized: bool = True

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise DomainError("bandwidth must be positive")
        if self.kind != "gaussian":
            raise DomainError(f"unsupported kernel kind {self.kind!r}")


@dataclass(frozen=True)
class ConditionalDesign:
    """Regressors for a conditional fit at covariate value x0.

    local-constant rows are [1, y_perp']; local-bilinear rows are the
    Kronecker product [1, y_perp'] (x) [1, (x - x0)'].
    """

    kind: str
    x0: np.ndarray
    regressors: np.ndarray
    k: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        object.__setattr__(self, "regressors", np.atleast_2d(np.asarray(self.regressors, dtype=float)))
        if self.kind not in ("local-constant", "local-bilinear"):
            raise DomainError(f"unknown conditional design kind {self.kind!r}")
        q = self.k if self.kind == "local-constant" else self.k * (self.p + 1)
        if self.regressors.shape[1] != q:
            raise ShapeError(f"{self.kind} design must have {q} columns")

    @property
    def dim(self) -> int:
        return self.regressors.shape[1]

    def names(self) -> tuple:
        if self.kind == "local-constant":
            return ("alpha",) + tuple(f"beta_y_{j}" for j in range(self.k - 1))
        base = ["alpha"] + [f"beta_x_{l}" for l in range(self.p)]
        out = list(base)
        for j in range(self.k - 1):
            out.append(f"beta_y_{j}")
            out.extend(f"beta_y_{j}.x_{l}" for l in range(self.p))
        return tuple(out)

    def params_at_x0(self, theta) -> tuple[float, np.ndarray]:
        """Intercept and orthogonal-response slopes of the hyperplane at x0."""
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.dim:
            raise ShapeError("parameter vector does not match the design")
        if self.kind == "local-constant":
            return float(theta[0]), theta[1 : self.k]
        step = self.p + 1
        return float(theta[0]), theta[step :: step][: self.k - 1]


def unconditional_param_names(k: int, p: int) -> tuple:
    return tuple(f"beta_y_{j}" for j in range(k - 1)) + tuple(
        f"beta_x_{l}" for l in range(p)
    ) + ("alpha",)


# ---------------------------------------------------------------------------
# random variates


def sample_gig_half(a, b, rng, size=None):
    """Draw from the nu = 1/2 generalized inverse Gaussian distribution.

    The target density is proportional to x^(-1/2) * exp(-(a^2/x + b^2 x)/2)
    on x > 0.  The reciprocal of such a variable is inverse Gaussian with
    mean b/a and shape b^2, which is sampled exactly by the
    Michael-Schucany-Haas method; a = 0 degenerates to a Gamma(1/2) variable.
    Requires b > 0 (the density is not normalizable at b = 0 for this nu)
    and a >= 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("GIG parameters must be nonnegative")
    if np.any(b == 0):
        raise DomainError("nu = 1/2 GIG requires b > 0 (density not normalizable at b = 0)")
    scalar = a.ndim == 0 and b.ndim == 0 and size is None
    if size is None:
        shape = np.broadcast_shapes(a.shape, b.shape)
    else:
        shape = (size,) if np.isscalar(size) else tuple(size)
    a = np.broadcast_to(a, shape).astype(float)
    b = np.broadcast_to(b, shape).astype(float)

    nu = rng.standard_normal(shape)
    u = rng.uniform(size=shape)
    y = nu * nu

    small = a <= b * 1e-150
    ab = np.where(small, 1.0, a * b)  # placeholder where the gamma limit is used
    root = np.sqrt(y * y + 4.0 * ab * y)
    # h = T/mu for the smaller inverse-Gaussian root; the rationalized form
    # 4ab*y / (y + root)^2 stays exact when 4ab*y underflows next to y^2
    denom = (y + root) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(y == 0.0, 1.0, 4.0 * ab * y / denom)
    accept = u <= 1.0 / (1.0 + h)
    ratio = np.where(small, 1.0, a / b)
    x = np.where(accept, ratio / h, ratio * h)
    x = np.where(small, (nu / b) ** 2, x)
    if scalar:
        return float(x)
    return x


# ---------------------------------------------------------------------------
# Gibbs machinery


def conjugate_normal_update(design, response, variances, prior: PriorSpec):
    """Mean and covariance of theta | latent scales in the augmented model.

    ``variances`` are the per-observation conditional variances and
    ``response`` the shifted responses entering the weighted least-squares
    algebra.  Exposed for direct verification against closed forms.
    """
    design = np.atleast_2d(np.asarray(design, dtype=float))
    response = np.asarray(response, dtype=float)
    variances = np.asarray(variances, dtype=float)
    prior_prec = np.linalg.inv(prior.covariance)
    prec = prior_prec + (design / variances[:, None]).T @ design
    rhs = prior_prec @ prior.mean + design.T @ (response / variances)
    cov = np.linalg.inv(prec)
    return cov @ rhs, cov


def _block_prior_pieces(prior: PriorSpec):
    prec = np.linalg.inv(prior.covariance)
    return prec, prec @ prior.mean


def _gibbs_sweeps(blocks, n_draws, rng, thetas):
    """Shared Gibbs engine over independent parameter blocks.

    Each block is a dict with keys y, design, weights, eta, gamma, b_lat,
    prior_prec, prior_rhs.  Per sweep: all latent draws block by block, then
    all parameter draws block by block, so a single block consumes the stream
    exactly like a standalone run.
    """
    dims = [b["design"].shape[1] for b in blocks]
    out = np.empty((n_draws, int(np.sum(dims))))
    offsets = np.concatenate([[0], np.cumsum(dims)])
    for m in range(n_draws):
        latents = []
        for blk, theta in zip(blocks, thetas):
            resid = blk["y"] - blk["design"] @ theta
            a_lat = blk["weights"] * np.abs(resid) / blk["gamma"]
            w = sample_gig_half(a_lat, blk["b_lat"], rng)
            latents.append(np.maximum(w, constants.LATENT_FLOOR))
        for j, (blk, w) in enumerate(zip(blocks, latents)):
            kw = blk["weights"]
            gam2 = blk["gamma"] ** 2
            wq = kw * kw / (gam2 * w)
            prec = blk["prior_prec"] + (blk["design"] * wq[:, None]).T @ blk["design"]
            rhs = blk["prior_rhs"] + blk["design"].T @ (
                kw * (kw * blk["y"] - blk["eta"] * w) / (gam2 * w)
            )
            try:
                chol = np.linalg.cholesky(prec)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"conditional precision not positive definite in block {j} "
                    f"(sweep {m}): diag={np.diag(prec)!r}"
                ) from exc
            mean = np.linalg.solve(prec, rhs)
            theta = mean + np.linalg.solve(chol.T, rng.standard_normal(prec.shape[0]))
            thetas[j] = theta
            out[m, offsets[j] : offsets[j + 1]] = theta
    return out


def _make_block(y, design, weights, tau, prior):
    mc = mixture_constants(tau)
    prior_prec, prior_rhs = _block_prior_pieces(prior)
    return {
        "y": np.asarray(y, dtype=float),
        "design": np.atleast_2d(np.asarray(design, dtype=float)),
        "weights": np.asarray(weights, dtype=float),
        "eta": mc.eta,
        "gamma": mc.gamma,
        "b_lat": float(np.sqrt(2.0 + mc.eta**2 / mc.gamma**2)),
        "prior_prec": prior_prec,
        "prior_rhs": prior_rhs,
    }


def _resolve_init(init, design, y, tau, weights, prior, allow_hyperplane=True):
    if init is not None:
        if isinstance(init, HyperplaneParams):
            if not allow_hyperplane:
                raise ShapeError(
                    "conditional chains are design-ordered; pass a plain vector init"
                )
            vec = init.as_vector()
        else:
            vec = np.atleast_1d(np.asarray(init, dtype=float))
        if vec.size != design.shape[1]:
            raise ShapeError("initial point does not match the parameter dimension")
        return vec
    n, d = design.shape
    if n > d:
        return np.asarray(fit_check_loss(design, y, tau, weights=weights).theta, dtype=float)
    return prior.mean.copy()


def _rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def gibbs_unconditional(
    data: Dataset | None,
    direction: Direction,
    prior: PriorSpec,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
    init=None,
    basis: OrthoBasis | None = None,
) -> Chain:
    """Gibbs sampler for one directional quantile hyperplane.

    Alternates latent-scale draws (one nu = 1/2 GIG variable per
    observation) with an exact conjugate normal draw of theta.  ``data=None``
    runs the sampler with zero observations, i.e. draws from the prior.
    Initialized at ``init`` or, by default, at the frequentist fit.
    """
    if n_draws <= burn_in:
        raise ShapeError("n_draws must exceed burn_in")
    k = direction.k
    if data is None:
        p = prior.dim - k
        if p < 0:
            raise ShapeError("prior dimension below the response dimension")
        y = np.zeros(0)
        design = np.zeros((0, prior.dim))
    else:
        p = data.p
        if prior.dim != k + p:
            raise ShapeError(f"prior dimension must be {k + p}, got {prior.dim}")
        if basis is None:
            basis = orthonormal_complement(direction.u)
        projected = project(data, direction, basis)
        y = projected.y_u
        design = np.column_stack([projected.y_perp, data.x, np.ones(data.n)])
    weights = np.ones(y.size)
    theta0 = _resolve_init(init, design, y, direction.tau, None, prior)
    rng = _rng_from_seed(seed)
    block = _make_block(y, design, weights, direction.tau, prior)
    draws = _gibbs_sweeps([block], n_draws, rng, [theta0])
    return Chain(
        draws=draws,
        burn_in=burn_in,
        seed=int(seed),
        sampler="gibbs-unconditional",
        acceptance_rate=1.0,
        names=unconditional_param_names(k, p),
        layout=(k, p),
    )


def kernel_weights(kernel: KernelSpec, x, x0) -> np.ndarray:
    """Gaussian kernel weights K_h(x_i - x0) for each covariate row."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x.shape[1] != x0.size:
        raise ShapeError("x0 dimension does not match the covariates")
    h = kernel.bandwidth
    sq = np.sum((x - x0) ** 2, axis=1)
    norm = (2.0 * np.pi * h * h) ** (-0.5 * x0.size) if kernel.normalized else 1.0
    return norm * np.exp(-0.5 * sq / (h * h))


def default_bandwidth(x, rule_constant: float = 9.0) -> float:
    """Bandwidth sqrt(c * var(x) * n^(-1/5)) used by the conditional model."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise DomainError("bandwidth rule needs at least two observations")
    var = float(np.mean(np.var(x, axis=0, ddof=1)))
    return float(np.sqrt(rule_constant * var * n ** (-1.0 / 5.0)))


def make_conditional_design(projected, x, x0, kind: str) -> ConditionalDesign:
    """Build the regressor matrix of a conditional fit at x0."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = projected.n
    if x.shape[0] != n:
        raise ShapeError("covariate rows do not match the projected data")
    if x.shape[1] != x0.size:
        raise ShapeError("x0 dimension does not match the covariates")
    k = projected.y_perp.shape[1] + 1
    p = x.shape[1]
    a = np.column_stack([np.ones(n), projected.y_perp])
    if kind == "local-constant":
        regressors = a
    elif kind == "local-bilinear":
        bmat = np.column_stack([np.ones(n), x - x0])
        regressors = np.einsum("ni,nj->nij", a, bmat).reshape(n, -1)
    else:
        raise DomainError(f"unknown conditional design kind {kind!r}")
    return ConditionalDesign(kind=kind, x0=x0, regressors=regressors, k=k, p=p)


def gibbs_conditional(
    data: Dataset,
    direction: Direction,
    design: ConditionalDesign,
    kernel: KernelSpec,
    prior: PriorSpec,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
    init=None,
    basis: OrthoBasis | None = None,
) -> Chain:
    """Kernel-weighted Gibbs sampler for a conditional quantile fit at x0.

    Weights are always computed on the covariates, K_h(x_i - x0).  With all
    weights equal to one this is the same Markov kernel as the unconditional
    sampler on the same design.
    """
    if n_draws <= burn_in:
        raise ShapeError("n_draws must exceed burn_in")
    if prior.dim != design.dim:
        raise ShapeError(f"prior dimension must be {design.dim}, got {prior.dim}")
    if basis is None:
        basis = orthonormal_complement(direction.u)
    projected = project(data, direction, basis)
    if design.regressors.shape[0] != data.n:
        raise ShapeError("design rows do not match the data")
    weights = kernel_weights(kernel, data.x, design.x0)
    if float(np.max(weights, initial=0.0)) < constants.WEIGHT_FLOOR:
        raise DegenerateWindowError("all kernel weights underflowed at this x0")
    theta0 = _resolve_init(init, design.regressors, projected.y_u, direction.tau,
                           weights, prior, allow_hyperplane=False)
    rng = _rng_from_seed(seed)
    block = _make_block(projected.y_u, design.regressors, weights, direction.tau, prior)
    draws = _gibbs_sweeps([block], n_draws, rng, [theta0])
    return Chain(
        draws=draws,
        burn_in=burn_in,
        seed=int(seed),
        sampler="gibbs-conditional",
        acceptance_rate=1.0,
        names=design.names(),
    )


def gibbs_simultaneous(
    data: Dataset,
    directions,
    prior: PriorSpec,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
    init=None,
    bases=None,
) -> Chain:
    """Joint Gibbs sampler over several directions under one aggregate model.

    The stacked prior covariance must be block diagonal across directions;
    each block then mixes exactly as a standalone chain (the latent scales
    are block specific) and the blocks stay independent a posteriori.
    """
    if n_draws <= burn_in:
        raise ShapeError("n_draws must exceed burn_in")
    directions = list(directions)
    if not directions:
        raise ShapeError("need at least one direction")
    k, p = data.k, data.p
    d_block = k + p
    m_blocks = len(directions)
    if prior.dim != d_block * m_blocks:
        raise ShapeError(
            f"stacked prior dimension must be {d_block * m_blocks}, got {prior.dim}"
        )
    cov = prior.covariance
    for i in range(m_blocks):
        for j in range(m_blocks):
            if i == j:
                continue
            blk = cov[i * d_block : (i + 1) * d_block, j * d_block : (j + 1) * d_block]
            if np.max(np.abs(blk)) > constants.SYMMETRY_TOL:
                raise UnsupportedPriorError(
                    "simultaneous estimation requires a block-diagonal prior covariance"
                )
    if bases is None:
        bases = [orthonormal_complement(d.u) for d in directions]
    if init is not None:
        init = np.atleast_1d(np.asarray(init, dtype=float))
        if init.size != prior.dim:
            raise ShapeError("initial point does not match the stacked dimension")

    blocks, thetas, names = [], [], []
    for m, (direction, basis) in enumerate(zip(directions, bases)):
        projected = project(data, direction, basis)
        design = np.column_stack([projected.y_perp, data.x, np.ones(data.n)])
        sub_prior = PriorSpec(
            mean=prior.mean[m * d_block : (m + 1) * d_block],
            covariance=cov[m * d_block : (m + 1) * d_block, m * d_block : (m + 1) * d_block],
        )
        if init is None:
            theta0 = _resolve_init(None, design, projected.y_u, direction.tau, None, sub_prior)
        else:
            theta0 = init[m * d_block : (m + 1) * d_block]
        blocks.append(_make_block(projected.y_u, design, np.ones(data.n), direction.tau, sub_prior))
        thetas.append(theta0)
        names.extend(f"m{m}_{s}" for s in unconditional_param_names(k, p))

    rng = _rng_from_seed(seed)
    draws = _gibbs_sweeps(blocks, n_draws, rng, thetas)
    return Chain(
        draws=draws,
        burn_in=burn_in,
        seed=int(seed),
        sampler="gibbs-unconditional",
        acceptance_rate=1.0,
        names=tuple(names),
    )


def metropolis_hastings(
    loglik,
    prior: PriorSpec,
    proposal_scale: float = constants.DEFAULT_PROPOSAL_SCALE,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
    init=None,
) -> Chain:
    """Random-walk Metropolis-Hastings with N(0, scale^2 I) proposals.

    The proposal is symmetric so its densities cancel in the acceptance
    ratio.  ``loglik`` is any callable theta -> float; the acceptance rate is
    recorded on the returned chain.
    """
    if n_draws <= burn_in:
        raise ShapeError("n_draws must exceed burn_in")
    if proposal_scale < 0:
        raise DomainError("proposal scale must be nonnegative")
    d = prior.dim
    theta = prior.mean.copy() if init is None else np.atleast_1d(np.asarray(init, dtype=float))
    if theta.size != d:
        raise ShapeError("initial point does not match the prior dimension")

    prior_prec = np.linalg.inv(prior.covariance)

    def logprior(v):
        c = v - prior.mean
        return -0.5 * float(c @ prior_prec @ c)

    cur_ll = float(loglik(theta))
    cur_lp = logprior(theta)
    if not (np.isfinite(cur_ll) and np.isfinite(cur_lp)):
        raise InitializationError("log likelihood or prior not finite at the initial point")

    rng = _rng_from_seed(seed)
    draws = np.empty((n_draws, d))
    accepted = 0
    for m in range(n_draws):
        proposal = theta + proposal_scale * rng.standard_normal(d)
        prop_ll = float(loglik(proposal))
        prop_lp = logprior(proposal)
        if np.isfinite(prop_ll) and np.isfinite(prop_lp):
            log_ratio = (prop_ll + prop_lp) - (cur_ll + cur_lp)
            if np.log(rng.uniform()) <= log_ratio:
                theta, cur_ll, cur_lp = proposal, prop_ll, prop_lp
                accepted += 1
        else:
            rng.uniform()  # keep stream consumption independent of rejections
        draws[m] = theta
    return Chain(
        draws=draws,
        burn_in=burn_in,
        seed=int(seed),
        sampler="metropolis",
        acceptance_rate=accepted / n_draws,
        names=tuple(f"theta_{j}" for j in range(d)),
    )
