"""Data generating processes and the Monte Carlo experiment drivers.

Four DGPs: uniform square, uniform triangle, a correlated bivariate normal,
and a normal regression model with one covariate.  The drivers replicate
sampling + estimation over a seed-derived grid of cells and summarize RMSE,
interval coverage, and subgradient convergence.

The regression DGP draws (x, z) jointly normal and returns y = z + (0, x)'.
Its conditional experiments use the correlated pair without that level
shift (``dgp4_conditional_sample``), so the response given x = x0 is
N((0, x0/2), [[1, 1.5], [1.5, 8]]), the law the conditional oracle targets.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ald import HyperplaneParams
from .errors import DomainError
from .geometry import Dataset, Direction, orthonormal_complement, project
from .inference import asymptotic_ci, naive_ci, posterior_vector, subgradient_diagnostics
from .optimize import frequentist_fit
from .samplers import (
    KernelSpec,
    PriorSpec,
    default_bandwidth,
    gibbs_conditional,
    gibbs_unconditional,
    make_conditional_design,
)

__all__ = [
    "DgpSpec",
    "ExperimentConfig",
    "dgp_sample",
    "dgp4_conditional_sample",
    "dgp_stacked_mean",
    "population_params_oracle",
    "conditional_params_oracle",
    "rmse_experiment",
    "simulation_tables",
    "coverage_experiment",
    "subgradient_experiment",
    "conditional_rmse_experiment",
    "make_star_like",
    "DESK_PROFILE",
    "PAPER_PROFILE",
]

_TRIANGLE = (
    np.array([-0.5, -1.0 / (2.0 * np.sqrt(3.0))]),
    np.array([0.5, -1.0 / (2.0 * np.sqrt(3.0))]),
    np.array([0.0, 1.0 / np.sqrt(3.0)]),
)
_SIGMA_NORMAL = np.array([[1.0, 1.5], [1.5, 9.0]])
# joint covariance of (x, z1, z2) for the regression DGP
_SIGMA_JOINT = np.array([[4.0, 0.0, 2.0], [0.0, 1.0, 1.5], [2.0, 1.5, 9.0]])
_SIGMA_COND = np.array([[1.0, 1.5], [1.5, 8.0]])


@dataclass(frozen=True)
class DgpSpec:
    """One of the four data generating processes, a sample size, and a seed."""

    id: int
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.id not in (1, 2, 3, 4):
            raise DomainError(f"unknown DGP id {self.id!r}")
        if self.n < 1:
            raise DomainError("sample size must be positive")


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def dgp_sample(spec: DgpSpec) -> Dataset:
    """Draw n i.i.d. rows from the requested process."""
    rng = _rng(int(spec.seed))
    n = spec.n
    if spec.id == 1:
        return Dataset(y=rng.uniform(-0.5, 0.5, size=(n, 2)))
    if spec.id == 2:
        a, b, c = _TRIANGLE
        u = rng.uniform(size=(n, 1))
        v = rng.uniform(size=(n, 1))
        flip = (u + v) > 1.0
        u = np.where(flip, 1.0 - u, u)
        v = np.where(flip, 1.0 - v, v)
        return Dataset(y=a + u * (b - a) + v * (c - a))
    if spec.id == 3:
        chol = np.linalg.cholesky(_SIGMA_NORMAL)
        return Dataset(y=rng.standard_normal((n, 2)) @ chol.T)
    chol = np.linalg.cholesky(_SIGMA_JOINT)
    xz = rng.standard_normal((n, 3)) @ chol.T
    x = xz[:, :1]
    y = xz[:, 1:].copy()
    y[:, 1] += x[:, 0]
    return Dataset(y=y, x=x)


def dgp4_conditional_sample(n: int, seed: int = 0) -> Dataset:
    """Correlated (x, response) pair whose response given x = x0 is
    N((0, x0/2), [[1, 1.5], [1.5, 8]])."""
    rng = _rng(int(seed))
    chol = np.linalg.cholesky(_SIGMA_JOINT)
    xz = rng.standard_normal((n, 3)) @ chol.T
    return Dataset(y=xz[:, 1:], x=xz[:, :1])


def dgp_stacked_mean(dgp_id: int, k: int = 2) -> np.ndarray:
    """Population mean of the stacked regressors [y_perp, x].

    Every process here is mean centered (the square and triangle are centered
    on the origin, the normals have zero mean, and the covariate has zero
    mean), so the stacked mean is exactly zero in any orthonormal basis.
    """
    if dgp_id not in (1, 2, 3, 4):
        raise DomainError(f"unknown DGP id {dgp_id!r}")
    p = 1 if dgp_id == 4 else 0
    return np.zeros(k - 1 + p)


def population_params_oracle(
    dgp_id: int,
    direction: Direction,
    mc_size: int = 1_000_000,
    seed: int = 987_654_321,
    basis=None,
) -> HyperplaneParams:
    """Population hyperplane parameters by check-loss fit on a large MC sample."""
    if mc_size < 100_000:
        raise DomainError("oracle needs at least 1e5 Monte Carlo draws")
    data = dgp_sample(DgpSpec(id=dgp_id, n=mc_size, seed=seed))
    return frequentist_fit(data, direction, basis=basis).theta


def conditional_params_oracle(
    x0: float,
    direction: Direction,
    mc_size: int = 1_000_000,
    seed: int = 192_837_465,
    basis=None,
) -> tuple[float, float]:
    """Location-model parameters of the regression DGP's conditional law at x0."""
    if mc_size < 100_000:
        raise DomainError("oracle needs at least 1e5 Monte Carlo draws")
    rng = _rng(int(seed))
    chol = np.linalg.cholesky(_SIGMA_COND)
    y = rng.standard_normal((mc_size, 2)) @ chol.T
    y[:, 1] += 0.5 * float(x0)
    fit = frequentist_fit(Dataset(y=y), direction, basis=basis)
    return float(fit.theta.alpha), float(fit.theta.beta_y[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and sampler settings for one simulation study."""

    dgps: tuple = (1, 2, 3, 4)
    directions: tuple = ((1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)), (0.0, 1.0))
    taus: tuple = (0.2,)
    sample_sizes: tuple = (100, 1000)
    replications: int = 25
    n_draws: int = 1000
    burn_in: int = 200
    master_seed: int = 20260801
    oracle_mc_size: int = 1_000_000
    basis_convention: str = "positive"
    x0: float = 1.0  # conditional experiments only
    level: float = 0.95

    def cells(self):
        for dgp in self.dgps:
            for u in self.directions:
                for tau in self.taus:
                    for n in self.sample_sizes:
                        yield dgp, tuple(u), tau, n


DESK_PROFILE = ExperimentConfig()
PAPER_PROFILE = ExperimentConfig(
    sample_sizes=(100, 1000, 10_000),
    replications=100,
    n_draws=1000,
    burn_in=200,
)


def _rep_seed(master: int, cell_index: int, rep: int, stream: int = 0) -> int:
    ss = np.random.SeedSequence((int(master), int(cell_index), int(rep), int(stream)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _cell_oracle(config: ExperimentConfig, dgp: int, u, tau, cache=None):
    key = (dgp, tuple(u), tau)
    if cache is not None and key in cache:
        return cache[key]
    direction = Direction(u=np.asarray(u), tau=tau)
    basis = orthonormal_complement(direction.u, convention=config.basis_convention)
    theta = population_params_oracle(
        dgp, direction, mc_size=config.oracle_mc_size, basis=basis
    )
    out = (direction, basis, theta)
    if cache is not None:
        cache[key] = out
    return out


def _replicate_cell(args):
    """One unconditional replication: sample, fit, summarize.  Top level so
    experiment drivers can fan replications out to worker processes."""
    (dgp, u, tau, n, data_seed, chain_seed, n_draws, burn_in, convention, level, want_ci) = args
    direction = Direction(u=np.asarray(u), tau=tau)
    basis = orthonormal_complement(direction.u, convention=convention)
    data = dgp_sample(DgpSpec(id=dgp, n=n, seed=data_seed))
    prior = PriorSpec(
        mean=np.zeros(data.k + data.p), covariance=1000.0 * np.eye(data.k + data.p)
    )
    chain = gibbs_unconditional(
        data, direction, prior, n_draws=n_draws, burn_in=burn_in, seed=chain_seed, basis=basis
    )
    estimate = posterior_vector(chain)
    theta = HyperplaneParams.from_vector(estimate, data.k, data.p)
    report = subgradient_diagnostics(data, direction, theta, basis=basis)
    out = {
        "estimate": estimate,
        "sg1": report.sg1,
        "sg2": report.sg2,
        "sg2_target": tau * dgp_stacked_mean(dgp, data.k),
    }
    if want_ci and data.p == 0 and data.k == 2:
        ci = asymptotic_ci(chain, data, direction, level=level, basis=basis)
        nci = naive_ci(chain, level=level)
        out["ci"] = (ci.lower, ci.upper)
        out["naive"] = (nci.lower, nci.upper)
    return out


def _safe_replicate_cell(args):
    try:
        return ("ok", _replicate_cell(args))
    except Exception as exc:
        return ("err", repr(exc))


def _safe_replicate_conditional(args):
    try:
        return ("ok", _replicate_conditional(args))
    except Exception as exc:
        return ("err", repr(exc))


def _run_cells(config: ExperimentConfig, want_ci: bool, workers: int = 1):
    """Replicate every cell; yields (cell, oracle vector, names, rep results, failures)."""
    oracle_cache = {}
    for cell_index, (dgp, u, tau, n) in enumerate(config.cells()):
        direction, basis, theta0 = _cell_oracle(config, dgp, u, tau, cache=oracle_cache)
        truth = theta0.as_vector()
        names = (
            tuple(f"beta_y_{j}" for j in range(len(theta0.beta_y)))
            + tuple(f"beta_x_{l}" for l in range(len(theta0.beta_x)))
            + ("alpha",)
        )
        tasks = []
        for rep in range(config.replications):
            data_seed = _rep_seed(config.master_seed, cell_index, rep, 0)
            chain_seed = _rep_seed(config.master_seed, cell_index, rep, 1)
            tasks.append(
                (dgp, u, tau, n, data_seed, chain_seed, config.n_draws, config.burn_in,
                 config.basis_convention, config.level, want_ci)
            )
        results, failures = [], []
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_safe_replicate_cell, tasks))
        else:
            outcomes = [_safe_replicate_cell(task) for task in tasks]
        for rep, (status, payload) in enumerate(outcomes):
            if status == "ok":
                results.append(payload)
            else:  # record, never drop silently
                failures.append((rep, payload))
        yield (dgp, u, tau, n), truth, names, results, failures


def rmse_experiment(config: ExperimentConfig = DESK_PROFILE, workers: int = 1):
    """RMSE of the posterior-mean estimates against the population oracle."""
    rows = []
    for (dgp, u, tau, n), truth, names, results, failures in _run_cells(config, False, workers):
        est = np.array([r["estimate"] for r in results])
        err = est - truth
        rmse = np.sqrt(np.mean(err**2, axis=0))
        bias = err.mean(axis=0)
        for j, name in enumerate(names):
            rows.append({
                "dgp": dgp, "u": u, "tau": tau, "n": n, "parameter": name,
                "oracle": truth[j], "rmse": float(rmse[j]), "bias": float(bias[j]),
                "replications": len(results), "failed": len(failures),
            })
    return rows


def subgradient_experiment(config: ExperimentConfig = DESK_PROFILE, workers: int = 1):
    """RMSE of the empirical subgradient statistics around their limits."""
    rows = []
    for (dgp, u, tau, n), truth, names, results, failures in _run_cells(config, False, workers):
        sg1 = np.array([r["sg1"] for r in results])
        sg2 = np.array([r["sg2"] for r in results])
        tgt = np.array([r["sg2_target"] for r in results])
        rows.append({
            "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad1",
            "rmse": float(np.sqrt(np.mean((sg1 - tau) ** 2))),
            "replications": len(results), "failed": len(failures),
        })
        rows.append({
            "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad2_y",
            "rmse": float(np.sqrt(np.mean((sg2[:, 0] - tgt[:, 0]) ** 2))),
            "replications": len(results), "failed": len(failures),
        })
        if sg2.shape[1] > 1:
            rows.append({
                "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad2_x",
                "rmse": float(np.sqrt(np.mean((sg2[:, 1:] - tgt[:, 1:]) ** 2))),
                "replications": len(results), "failed": len(failures),
            })
    return rows


def simulation_tables(config: ExperimentConfig = DESK_PROFILE, workers: int = 1):
    """RMSE and subgradient tables from a single replication pass."""
    rmse_rows, sg_rows = [], []
    for (dgp, u, tau, n), truth, names, results, failures in _run_cells(config, False, workers):
        est = np.array([r["estimate"] for r in results])
        err = est - truth
        rmse = np.sqrt(np.mean(err**2, axis=0))
        bias = err.mean(axis=0)
        for j, name in enumerate(names):
            rmse_rows.append({
                "dgp": dgp, "u": u, "tau": tau, "n": n, "parameter": name,
                "oracle": truth[j], "rmse": float(rmse[j]), "bias": float(bias[j]),
                "replications": len(results), "failed": len(failures),
            })
        sg1 = np.array([r["sg1"] for r in results])
        sg2 = np.array([r["sg2"] for r in results])
        tgt = np.array([r["sg2_target"] for r in results])
        sg_rows.append({
            "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad1",
            "rmse": float(np.sqrt(np.mean((sg1 - tau) ** 2))),
            "replications": len(results), "failed": len(failures),
        })
        sg_rows.append({
            "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad2_y",
            "rmse": float(np.sqrt(np.mean((sg2[:, 0] - tgt[:, 0]) ** 2))),
            "replications": len(results), "failed": len(failures),
        })
        if sg2.shape[1] > 1:
            sg_rows.append({
                "dgp": dgp, "u": u, "tau": tau, "n": n, "statistic": "subgrad2_x",
                "rmse": float(np.sqrt(np.mean((sg2[:, 1:] - tgt[:, 1:]) ** 2))),
                "replications": len(results), "failed": len(failures),
            })
    return {"rmse": rmse_rows, "subgradient": sg_rows}


def coverage_experiment(config: ExperimentConfig = DESK_PROFILE, workers: int = 1):
    """Interval coverage of the population parameters (location models only)."""
    bad = [d for d in config.dgps if d == 4]
    if bad:
        raise DomainError("coverage experiment applies to the location DGPs (1-3)")
    rows = []
    for (dgp, u, tau, n), truth, names, results, failures in _run_cells(config, True, workers):
        lo = np.array([r["ci"][0] for r in results])
        hi = np.array([r["ci"][1] for r in results])
        nlo = np.array([r["naive"][0] for r in results])
        nhi = np.array([r["naive"][1] for r in results])
        for j, name in enumerate(names):
            rows.append({
                "dgp": dgp, "u": u, "tau": tau, "n": n, "parameter": name,
                "oracle": truth[j],
                "coverage": float(np.mean((lo[:, j] <= truth[j]) & (truth[j] <= hi[:, j]))),
                "naive_coverage": float(np.mean((nlo[:, j] <= truth[j]) & (truth[j] <= nhi[:, j]))),
                "width": float(np.mean(hi[:, j] - lo[:, j])),
                "replications": len(results), "failed": len(failures),
            })
    return rows


def _replicate_conditional(args):
    (u, tau, n, x0, data_seed, chain_seed, n_draws, burn_in, convention) = args
    direction = Direction(u=np.asarray(u), tau=tau)
    basis = orthonormal_complement(direction.u, convention=convention)
    data = dgp4_conditional_sample(n, seed=data_seed)
    projected = project(data, direction, basis)
    design = make_conditional_design(projected, data.x, np.array([x0]), "local-constant")
    kernel = KernelSpec(bandwidth=default_bandwidth(data.x))
    prior = PriorSpec(mean=np.zeros(design.dim), covariance=1000.0 * np.eye(design.dim))
    chain = gibbs_conditional(
        data, direction, design, kernel, prior,
        n_draws=n_draws, burn_in=burn_in, seed=chain_seed, basis=basis,
    )
    est = posterior_vector(chain)  # (alpha, beta_y)
    return {"estimate": est}


def conditional_rmse_experiment(config: ExperimentConfig = DESK_PROFILE, workers: int = 1):
    """RMSE of the conditional local-constant fit at x0 against its oracle."""
    rows = []
    cell_index = 10_000  # disjoint from the unconditional cell indices
    for u in config.directions:
        for tau in config.taus:
            direction = Direction(u=np.asarray(u), tau=tau)
            basis = orthonormal_complement(direction.u, convention=config.basis_convention)
            alpha0, beta0 = conditional_params_oracle(
                config.x0, direction, mc_size=config.oracle_mc_size, basis=basis
            )
            truth = np.array([alpha0, beta0])
            for n in config.sample_sizes:
                tasks = []
                for rep in range(config.replications):
                    data_seed = _rep_seed(config.master_seed, cell_index, rep, 0)
                    chain_seed = _rep_seed(config.master_seed, cell_index, rep, 1)
                    tasks.append((tuple(u), tau, n, config.x0, data_seed, chain_seed,
                                  config.n_draws, config.burn_in, config.basis_convention))
                results, failures = [], []
                if workers > 1:
                    with ProcessPoolExecutor(max_workers=workers) as pool:
                        outcomes = list(pool.map(_safe_replicate_conditional, tasks))
                else:
                    outcomes = [_safe_replicate_conditional(task) for task in tasks]
                for rep, (status, payload) in enumerate(outcomes):
                    if status == "ok":
                        results.append(payload)
                    else:
                        failures.append((rep, payload))
                est = np.array([r["estimate"] for r in results])
                rmse = np.sqrt(np.mean((est - truth) ** 2, axis=0))
                for j, name in enumerate(("alpha", "beta_y_0")):
                    rows.append({
                        "u": tuple(u), "tau": tau, "n": n, "x0": config.x0,
                        "parameter": name, "oracle": float(truth[j]),
                        "rmse": float(rmse[j]), "bias": float(np.mean(est[:, j] - truth[j])),
                        "replications": len(results), "failed": len(failures),
                    })
                cell_index += 1
    return rows


def make_star_like(n: int = 2000, seed: int = 7) -> dict:
    """Synthetic test-score panel with the shape of a classroom study.

    Integer-valued mathematics and reading scores (discrete support, so ties
    occur), a small-classroom indicator, and years of teacher experience with
    a concave effect on scores.
    """
    rng = _rng(int(seed))
    small = rng.integers(0, 2, size=n)
    experience = rng.integers(0, 26, size=n)
    gain = 12.0 * np.log1p(experience) / np.log(26.0)
    base = rng.multivariate_normal(
        mean=[520.0, 515.0], cov=[[900.0, 540.0], [540.0, 810.0]], size=n,
        method="cholesky",
    )
    math_score = np.rint(base[:, 0] + 8.0 * small + gain)
    read_score = np.rint(base[:, 1] + 7.0 * small + 0.8 * gain)
    return {
        "math": math_score,
        "read": read_score,
        "small_class": small.astype(float),
        "experience": experience.astype(float),
    }
