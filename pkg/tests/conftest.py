"""Shared fixtures: prepared bundles with their caches built once."""

from dataclasses import dataclass

import numpy as np
import pytest

from hkdicho import (EvolutionCache, GainTables, ProjectorSequence,
                     SkewEvolution, SystemBundle, build_evolution,
                     build_skew_evolution, compute_gain_tables, make_example,
                     sample_unit_vectors)


@dataclass(frozen=True)
class Prepared:
    bundle: SystemBundle
    E: EvolutionCache
    P: ProjectorSequence
    B: SkewEvolution
    tables: GainTables
    samples: np.ndarray

    @property
    def h(self):
        return self.bundle.h

    @property
    def k(self):
        return self.bundle.k


def prepare(bundle: SystemBundle) -> Prepared:
    E = build_evolution(bundle.system)
    P = bundle.projectors
    B = build_skew_evolution(P, E)
    tables = compute_gain_tables(E, P, B)
    samples = sample_unit_vectors(bundle.system.dim, bundle.system.norm)
    return Prepared(bundle, E, P, B, tables, samples)


@pytest.fixture(scope="session")
def uniform():
    return prepare(make_example("uniform-exponential"))


@pytest.fixture(scope="session")
def poly():
    return prepare(make_example("polynomial-diagonal"))


@pytest.fixture(scope="session")
def shear_d():
    """The oblique-projector dichotomic example at its defaults."""
    return prepare(make_example("example2"))


@pytest.fixture(scope="session")
def shear_g():
    """The growth-only oblique-projector example at its defaults."""
    return prepare(make_example("example6"))


@pytest.fixture(scope="session")
def perturbed():
    return prepare(make_example("perturbed-random"))
