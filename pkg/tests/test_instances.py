"""Tests for the instance catalog: built-in lattices, cocycle, measure and covering files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from natmap.services.cocycles.cocycle import check_cocycle_relators
from natmap.services.errors import NatmapError
from natmap.services.instances import InstanceCatalog


@pytest.fixture
def catalog():
    return InstanceCatalog()


def test_catalog_is_singleton(catalog):
    assert InstanceCatalog() is catalog
    assert "std-embed" in catalog.cocycles
    assert "tetrahedron" in catalog.measures
    assert "cover-genus2-a1" in catalog.coverings


def test_groups(catalog):
    group, domain = catalog.group("genus2", 2, 2)
    assert group.rank == 4
    assert domain.size == 64
    cover, cover_domain = catalog.group("genus2-cover-a1", 2, 2)
    assert cover.rank == 7
    assert cover_domain.size == 128
    with pytest.raises(NatmapError):
        catalog.group("genus3")


@pytest.mark.parametrize(
    "name, size", [("std-embed", 16), ("std-embed-twisted", 16), ("coset-std-embed", 2), ("bend", 16)]
)
def test_cocycles(catalog, name, size):
    instance, domain = catalog.cocycle(name, 2, 2)
    assert instance.label == name
    assert instance.cocycle.space.size == size
    assert len(instance.boundary.slices) == size
    assert domain is not None
    check_cocycle_relators(instance.cocycle)


def test_twisted_instances_keep_their_twist(catalog):
    plain, _ = catalog.cocycle("std-embed", 2, 2)
    twisted, _ = catalog.cocycle("std-embed-twisted", 2, 2)
    assert plain.twist is None
    assert twisted.twist.shape == (16, 4, 4)
    again, _ = catalog.cocycle("std-embed-twisted", 2, 2)
    assert np.array_equal(again.twist, twisted.twist)


def test_measures(catalog):
    nu = catalog.measure("tetrahedron")
    assert nu.size == 4
    assert nu.dim == 3
    assert np.allclose(nu.weights, 0.25)


def test_coverings(catalog):
    f, instance = catalog.covering("cover-genus2-a1", 2, 2)
    assert f.degree == 2
    assert instance.cocycle.group.rank == 4
    identity, _ = catalog.covering("identity-genus2", 2, 2)
    assert identity.degree == 1


def test_unknown_names(catalog):
    with pytest.raises(NatmapError):
        catalog.cocycle("no-such-cocycle")
    with pytest.raises(NatmapError):
        catalog.measure("no-such-measure")
    with pytest.raises(NatmapError):
        catalog.covering("no-such-covering")


def test_cocycle_from_file(tmp_path, catalog):
    path = tmp_path / "rep.json"
    identity = np.eye(4).tolist()
    path.write_text(
        json.dumps(
            {
                "label": "ad-hoc",
                "group": {"dim": 3, "generators": [], "label": "trivial"},
                "target_dim": 3,
                "space": {"size": 2},
                "rule": "standard",
                "twist": identity,
            }
        )
    )
    instance, domain = catalog.cocycle(str(path))
    assert domain is None
    assert instance.label == "ad-hoc"
    assert instance.twist.shape == (2, 4, 4)


def test_invalid_json(tmp_path, catalog):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(NatmapError):
        catalog.measure(str(path))


def test_twist_must_be_an_isometry(tmp_path, catalog):
    path = tmp_path / "stretched.json"
    path.write_text(
        json.dumps(
            {
                "label": "stretched",
                "group": {"dim": 3, "generators": [], "label": "trivial"},
                "target_dim": 3,
                "space": {"size": 1},
                "rule": "standard",
                "twist": np.diag([2.0, 1.0, 1.0, 1.0]).tolist(),
            }
        )
    )
    with pytest.raises(ValueError):
        catalog.cocycle(str(path))
