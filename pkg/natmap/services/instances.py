import json
import os
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from natmap.schemas.cocycle import BoundaryMapSpec, CocycleInstance
from natmap.schemas.degree import CoveringMap
from natmap.schemas.geometry import HIsometry
from natmap.schemas.lattice import FundamentalDomain, GroupPresentation
from natmap.schemas.measure import BoundaryMeasure
from natmap.services.cocycles.boundary_map import standard_boundary_map, twist_boundary
from natmap.services.cocycles.cocycle import (
    random_twist,
    rep_cocycle,
    standard_cocycle,
    twist,
)
from natmap.services.cocycles.space import (
    DEFAULT_SPACE_SIZE,
    coset_space,
    permutation_space,
    trivial_space,
)
from natmap.services.degree.covering import covering_from_cover, identity_covering
from natmap.services.errors import NatmapError
from natmap.services.lattice.covers import index2_cover
from natmap.services.lattice.octagon import (
    DEFAULT_PHI_NODES,
    DEFAULT_RHO_NODES,
    genus2_octagon,
)

logger = logging.getLogger(__name__)

COVER_PARITY = (1, 0, 0, 0)
GROUP_NAMES = ("genus2", "genus2-cover-a1")


class InstanceCatalog:
    """
    A Singleton catalog of named instances: the built-in lattices and the
    cocycle, measure and covering files under the 'data' directory.
    A value naming an existing file is read from that file instead.
    """

    _instance = None
    _is_initialized = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(InstanceCatalog, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if self._is_initialized:
            return

        self.base_data_path = self._get_data_path()
        self.cocycles: Dict[str, str] = {}
        self.measures: Dict[str, str] = {}
        self.coverings: Dict[str, str] = {}

        self._index_all_data()
        self._is_initialized = True

    def _get_data_path(self) -> str:
        """Calculates the absolute path to the 'data' directory."""
        current_dir = os.path.dirname(os.path.abspath(__file__))
        project_root = os.path.abspath(os.path.join(current_dir, "../../"))
        return os.path.join(project_root, "data")

    def _index_folder(self, folder: str) -> Dict[str, str]:
        path = os.path.join(self.base_data_path, folder)
        if not os.path.isdir(path):
            logger.warning(f"Instance folder not found: {path}")
            return {}
        entries = {
            os.path.splitext(name)[0]: os.path.join(path, name)
            for name in sorted(os.listdir(path))
            if name.endswith(".json")
        }
        logger.info(f"Indexed {len(entries)} instances in {folder}")
        return entries

    def _index_all_data(self):
        self.cocycles = self._index_folder("cocycles")
        self.measures = self._index_folder("measures")
        self.coverings = self._index_folder("coverings")

    def _load_json(self, value: str, index: Dict[str, str], kind: str) -> Dict[str, Any]:
        if os.path.isfile(value):
            file_path = value
        elif value in index:
            file_path = index[value]
        else:
            raise NatmapError(f"Unknown {kind} '{value}' (known: {', '.join(sorted(index)) or 'none'})")
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as exc:
            raise NatmapError(f"Invalid JSON in {file_path}: {exc}") from exc

    # ------------------------------------------------------------------
    # Groups
    # ------------------------------------------------------------------

    def group(
        self,
        name: str,
        phi_nodes: int = DEFAULT_PHI_NODES,
        rho_nodes: int = DEFAULT_RHO_NODES,
    ) -> Tuple[GroupPresentation, FundamentalDomain]:
        """Built-in lattice and its fundamental domain at the given cell resolution."""
        parent, domain = genus2_octagon(phi_nodes, rho_nodes)
        if name == "genus2":
            return parent, domain
        if name == "genus2-cover-a1":
            covering = self.cover_of_genus2(phi_nodes, rho_nodes)
            return covering.source, covering.source_domain
        raise NatmapError(f"Unknown group '{name}' (known: {', '.join(GROUP_NAMES)})")

    def cover_of_genus2(
        self, phi_nodes: int = DEFAULT_PHI_NODES, rho_nodes: int = DEFAULT_RHO_NODES
    ) -> CoveringMap:
        parent, domain = genus2_octagon(phi_nodes, rho_nodes)
        cover = index2_cover(parent, COVER_PARITY).model_copy(update={"label": "genus2-cover-a1"})
        return covering_from_cover(parent, domain, cover)

    def _group_payload(self, payload: Any, phi_nodes: int, rho_nodes: int):
        if isinstance(payload, str):
            return self.group(payload, phi_nodes, rho_nodes)
        return GroupPresentation(**payload), None

    # ------------------------------------------------------------------
    # Cocycles
    # ------------------------------------------------------------------

    def cocycle(
        self,
        value: str,
        phi_nodes: int = DEFAULT_PHI_NODES,
        rho_nodes: int = DEFAULT_RHO_NODES,
    ) -> Tuple[CocycleInstance, Optional[FundamentalDomain]]:
        """Build a cocycle instance and the domain of its group (None for ad-hoc groups)."""
        payload = self._load_json(value, self.cocycles, "cocycle")
        group, domain = self._group_payload(payload.get("group", "genus2"), phi_nodes, rho_nodes)
        return self.build_cocycle(payload, group), domain

    def build_cocycle(self, payload: Dict[str, Any], group: GroupPresentation) -> CocycleInstance:
        m = int(payload.get("target_dim", group.dim))
        space_spec = payload.get("space", {})
        if "coset_parity" in space_spec:
            space = coset_space(group, space_spec["coset_parity"])
        elif "permutations" in space_spec:
            space = permutation_space(group, space_spec["permutations"], space_spec.get("weights"))
        else:
            space = trivial_space(group, int(space_spec.get("size", DEFAULT_SPACE_SIZE)))

        rule = payload.get("rule", "standard")
        if rule == "standard":
            sigma = standard_cocycle(group, space, m)
        elif rule == "representation":
            sigma = rep_cocycle(group, np.asarray(payload["generators"], dtype=float), space)
        else:
            raise NatmapError(f"Unknown cocycle rule '{rule}'")

        boundary_spec = payload.get("boundary", {"standard": True})
        if "slices" in boundary_spec:
            boundary = BoundaryMapSpec(source_dim=group.dim, slices=boundary_spec["slices"])
        else:
            extra = BoundaryMapSpec(source_dim=group.dim, slices=[boundary_spec.get("extra", [])])
            boundary = standard_boundary_map(group.dim, m, space.size, extra.slices[0])

        f = self._twist(payload.get("twist"), space.size, m)
        if f is not None:
            sigma = twist(sigma, f)
            boundary = twist_boundary(boundary, f)
        label = payload.get("label", "cocycle")
        logger.info(f"Built cocycle '{label}' over {group.label} into H^{m}, |X| = {space.size}")
        return CocycleInstance(label=label, cocycle=sigma, boundary=boundary, twist=f)

    def _twist(self, spec: Any, size: int, m: int) -> Optional[np.ndarray]:
        if spec is None:
            return None
        if isinstance(spec, dict) and "random" in spec:
            options = spec["random"]
            rng = np.random.default_rng(int(options.get("seed", 0)))
            return random_twist(size, m, rng, float(options.get("radius", 1.0)))
        f = np.asarray(spec, dtype=float)
        matrices = [f] if f.ndim == 2 else list(f)
        checked = np.stack([HIsometry(matrix=matrix).matrix for matrix in matrices])
        if f.ndim == 2:
            return np.broadcast_to(checked[0], (size,) + f.shape).copy()
        return checked

    # ------------------------------------------------------------------
    # Measures and coverings
    # ------------------------------------------------------------------

    def measure(self, value: str) -> BoundaryMeasure:
        return BoundaryMeasure.from_json(self._load_json(value, self.measures, "measure"))

    def covering(
        self,
        value: str,
        phi_nodes: int = DEFAULT_PHI_NODES,
        rho_nodes: int = DEFAULT_RHO_NODES,
    ) -> Tuple[CoveringMap, CocycleInstance]:
        """Covering map and the cocycle over its target group."""
        payload = self._load_json(value, self.coverings, "covering")
        cover = payload.get("cover", "genus2-cover-a1")
        if cover == "genus2-cover-a1":
            covering = self.cover_of_genus2(phi_nodes, rho_nodes)
        elif cover == "identity":
            covering = identity_covering(*genus2_octagon(phi_nodes, rho_nodes))
        else:
            raise NatmapError(f"Unknown cover '{cover}'")
        cocycle_payload = payload.get("cocycle", "std-embed")
        if isinstance(cocycle_payload, str):
            cocycle_payload = self._load_json(cocycle_payload, self.cocycles, "cocycle")
        instance = self.build_cocycle(cocycle_payload, covering.target)
        return covering, instance
