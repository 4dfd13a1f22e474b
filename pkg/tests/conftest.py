"""Shared fixtures. Example runs are cached per session so each case is
solved once no matter how many tests look at it."""

import time
from dataclasses import replace

import pytest

from viscofem import Simulation, default_sample_steps, preset_config


@pytest.fixture(scope="session")
def example_run():
    """Factory (name, alpha, tau, t_end) -> (sim, result, seconds), cached.

    t_end=None keeps the preset horizon. Results carry the sampled
    (phi_prev, state) pairs at the default sample steps, which is what the
    gradient-flow checks consume.
    """
    cache = {}

    def factory(name, alpha=1.0, tau=0.01, t_end=None):
        key = (name, float(alpha), float(tau), t_end)
        if key not in cache:
            cfg = preset_config(name, alpha=alpha)
            changes = {}
            if tau != cfg.tau:
                changes["tau"] = tau
            if t_end is not None and t_end != cfg.t_end:
                changes["t_end"] = t_end
            if changes:
                cfg = replace(cfg, **changes)
            sim = Simulation(cfg)
            started = time.perf_counter()
            result = sim.run(sample_steps=default_sample_steps(cfg.n_steps))
            cache[key] = (sim, result, time.perf_counter() - started)
        return cache[key]

    return factory
