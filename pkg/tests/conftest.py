from __future__ import annotations

import numpy as np
import pytest

from vlaperf import dpcache
from vlaperf.catalog import default_catalog


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def pi0_records(catalog):
    return catalog.records_for("pi0")


@pytest.fixture(scope="session")
def rtx4090(catalog):
    return catalog.hardware["rtx4090"]


@pytest.fixture(scope="session")
def reference_denoiser():
    """The committed toy configuration the golden output was frozen from."""
    net = dpcache.DenoiserNet.create(seed=0)
    sched = dpcache.NoiseSchedule.create(100)
    cond = np.random.default_rng(42).standard_normal(net.condition_dim)
    return net, sched, cond


@pytest.fixture(scope="session")
def reference_full_run(reference_denoiser):
    net, sched, cond = reference_denoiser
    return dpcache.denoise_full(cond, sched, net, seed=1, profile=True)
