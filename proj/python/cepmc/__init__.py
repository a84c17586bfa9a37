"""Rare-event probability estimation with cross-entropy population Monte Carlo."""

from ._cepmc import (
    AllWeightsZero,
    ConfigError,
    GaussianParams,
    MaxIterationsExceeded,
    MU_EARTH,
    NonFiniteWeight,
    NotPositiveDefinite,
    OrbitalState,
    Problem,
    Rng,
    derive_seed,
    dm_weights,
    draw,
    factorize,
    kepler_propagate,
    log_densities,
    log_density,
    make_problem,
    normal_cdf,
    orbital_period,
    problem_ids,
    run_ce,
    run_cepmc,
    run_experiment,
    run_gr_pmc,
    run_lr_pmc,
    sample_quantile,
    specific_energy,
    weighted_moment_update,
)

__all__ = [name for name in dir() if not name.startswith("_")]
