"""Seeded predictive simulation behind the histogram overlay.

A fitted exponential-mean model pins down only the conditional mean, so the
overlay scatters mean-one multiplicative log-normal noise around each
fitted mean: for a mean m and variance power a,

    s^2 = log(1 + m**(a - 2)),    y = m * exp(s * Z - s^2 / 2),

with Z standard normal. This keeps E[y] = m exactly and gives
Var(y) = m**a — the same noise family the ``simulate`` command uses, with
the power supplied as a flag because the fit alone cannot determine it.
No zero-censoring is applied: the overlay shows the uncensored predictive
law implied by the fitted means.

Draws come from a Philox stream keyed by the seed masked to 64 bits, one
standard normal per observation in row order, so a (means, power, seed)
triple always reproduces the same sample.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1


def predictive_sample(mu, alpha: float, seed: int) -> np.ndarray:
    """One simulated outcome per fitted mean; see the module docstring."""
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    if mu.size == 0:
        raise ValueError("no fitted means to simulate from")
    if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
        raise ValueError("fitted means must be finite and positive")
    rng = np.random.Generator(np.random.Philox(int(seed) & _SEED_MASK))
    log_mu = np.log(mu)
    # log(1 + m**(a-2)) evaluated in log space so extreme means cannot
    # overflow before the log is taken
    s2 = np.logaddexp(0.0, (alpha - 2.0) * log_mu)
    z = rng.standard_normal(mu.shape[0])
    return np.exp(log_mu + np.sqrt(s2) * z - 0.5 * s2)
