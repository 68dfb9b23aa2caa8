#!/usr/bin/env python3
"""
run_acceptance.py

Runs the acceptance-scale experiments (quad order 2048, 16 x 16 octagon cells,
|X| = 16) and writes one JSON summary per experiment to results/.
"""

import argparse
import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from tqdm import tqdm

from natmap.services.cocycles.cocycle import random_twist, twist
from natmap.services.cocycles.boundary_map import twist_boundary
from natmap.services.degree.experiment import degree_experiment
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.instances import InstanceCatalog
from natmap.services.lattice.groups import growth_rate, orbit_ball, trivial_group
from natmap.services.measures.boundary_measure import (
    binned_total_variation,
    critical_exponent,
    visual_measure,
)
from natmap.services.measures.patterson_sullivan import ps_orbit_measure
from natmap.services.measures.quadrature import sphere_quadrature
from natmap.services.natural_map.audit import bcg_bound_audit
from natmap.services.natural_map.evaluator import build_evaluator, differential, jacobian
from natmap.services.reporting import check_finite, to_native, versions
from natmap.services.volume.integrator import natural_volume
from natmap.services.volume.rigidity import rigidity_audit

# ============================================================================
# Configuration
# ============================================================================

BASE_DIR = Path(__file__).resolve().parent
OUTPUT_DIR = BASE_DIR / "../results"

QUAD_ORDER = 2048
SQUASH_KAPPAS = (1.25, 1.5, 2.0)
SQUASH_SAMPLES = 50
TWIST_SAMPLES = 20

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler()],
)
logger = logging.getLogger(__name__)


def patterson_sullivan(catalog: InstanceCatalog, rng: np.random.Generator) -> Dict[str, Any]:
    group, _ = catalog.group("genus2")
    orbit = orbit_ball(group, 14.0)
    patterson = ps_orbit_measure(group, radius=14.0, orbit=orbit)
    visual = visual_measure(hyp.origin(2), sphere_quadrature(2, QUAD_ORDER))
    tv = binned_total_variation(patterson, visual)
    growth = growth_rate(orbit, 14.0)
    delta = critical_exponent(2)
    return {
        "binned_total_variation": tv,
        "growth_rate": growth,
        "passed": tv < 0.1 and abs(growth - delta) < 0.1 * delta,
    }


def squash_bound(catalog: InstanceCatalog, rng: np.random.Generator) -> Dict[str, Any]:
    """Jacobian bound and audit chain for the squash family in H^3 -> H^4."""
    payload = json.loads(Path(catalog.cocycles["squash-h3"]).read_text(encoding="utf-8"))
    group = trivial_group(3)
    quad = sphere_quadrature(3, QUAD_ORDER)
    results = {}
    for kappa in SQUASH_KAPPAS:
        payload["boundary"]["extra"][0]["kappa"] = kappa
        instance = catalog.build_cocycle(payload, group)
        ev = build_evaluator(instance.cocycle, instance.boundary, quad)
        worst_jac, worst_margin = 0.0, np.inf
        for _ in tqdm(range(SQUASH_SAMPLES), desc=f"squash kappa={kappa}"):
            diff = differential(ev, hyp.random_point(3, rng, 1.0), 0)
            audit = bcg_bound_audit(diff)
            worst_jac = max(worst_jac, jacobian(diff))
            margins = [audit.cs_det_margin, audit.trace_margin, audit.chain_margin]
            if audit.b1_applicable:
                margins.append(audit.b1_margin)
            worst_margin = min(worst_margin, min(margins))
        results[str(kappa)] = {
            "max_jacobian": worst_jac,
            "min_margin": worst_margin,
            "passed": worst_jac <= 1.0 + 2e-4 and worst_margin >= -1e-9,
        }
    return results


def maximal_case(catalog: InstanceCatalog, rng: np.random.Generator) -> Dict[str, Any]:
    instance, domain = catalog.cocycle("std-embed")
    quad = sphere_quadrature(2, QUAD_ORDER)
    sigma, phi = instance.cocycle, instance.boundary
    report = natural_volume(sigma, phi, domain, quad, rng=rng, progress=True)
    rigidity = rigidity_audit(report, build_evaluator(sigma, phi, quad), rng)

    twisted_volumes, twist_deviations = [], []
    for _ in tqdm(range(TWIST_SAMPLES), desc="twisted cocycles"):
        f = random_twist(sigma.space.size, sigma.target_dim, rng)
        sigma_f, phi_f = twist(sigma, f), twist_boundary(phi, f)
        twisted = natural_volume(sigma_f, phi_f, domain, quad, rng=rng, estimate_error=False)
        twisted_volumes.append(twisted.volume)
        if len(twist_deviations) < 3:
            audit = rigidity_audit(report, build_evaluator(sigma_f, phi_f, quad), rng, twist=f)
            twist_deviations.append(audit.twist_deviation)
    spread = float(np.max(np.abs(np.array(twisted_volumes) - report.volume)))
    return {
        "volume": report.volume,
        "domain_volume": report.domain_volume,
        "verdict": report.verdict,
        "rigidity_residual": rigidity.max_residual,
        "twist_volume_spread": spread,
        "twist_deviation": max(twist_deviations),
        "passed": report.verdict == "maximal"
        and abs(report.volume - 4.0 * np.pi) < 2e-3
        and rigidity.max_residual < 1e-6
        and spread < 2e-3,
    }


def strict_case(catalog: InstanceCatalog, rng: np.random.Generator) -> Dict[str, Any]:
    instance, domain = catalog.cocycle("bend")
    report = natural_volume(
        instance.cocycle, instance.boundary, domain, sphere_quadrature(2, QUAD_ORDER), rng=rng, progress=True
    )
    return {
        "volume": report.volume,
        "margin": report.milnor_wood_margin,
        "error_estimate": report.error_estimate,
        "verdict": report.verdict,
        "passed": report.verdict == "strict" and report.milnor_wood_margin > 10.0 * report.error_estimate,
    }


def degree_case(catalog: InstanceCatalog, rng: np.random.Generator) -> Dict[str, Any]:
    f, instance = catalog.covering("cover-genus2-a1")
    report = degree_experiment(
        f, instance.cocycle, instance.boundary, sphere_quadrature(2, QUAD_ORDER), rng=rng, progress=True
    )
    return {
        **report.model_dump(),
        "passed": abs(report.natural_ratio - 2.0) < 1e-3
        and abs(report.source_volume - 8.0 * np.pi) < 4e-3
        and report.source_verdict == "maximal"
        and report.target_verdict == "maximal",
    }


EXPERIMENTS: List[Tuple[str, Callable[[InstanceCatalog, np.random.Generator], Dict[str, Any]]]] = [
    ("patterson-sullivan", patterson_sullivan),
    ("squash-bound", squash_bound),
    ("maximal-case", maximal_case),
    ("strict-case", strict_case),
    ("degree", degree_case),
]


def main():
    parser = argparse.ArgumentParser(description="Acceptance-scale experiments")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--only", nargs="*", default=None, help="Experiment names to run")
    args = parser.parse_args()

    OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
    catalog = InstanceCatalog()
    selected = [(name, run) for name, run in EXPERIMENTS if not args.only or name in args.only]

    failures = []
    for name, run in tqdm(selected, desc="Experiments"):
        logger.info(f"Running {name}...")
        result = to_native(run(catalog, np.random.default_rng(args.seed)))
        check_finite(result)
        payload = {"v": "v1", "experiment": name, "seed": args.seed, "versions": versions(), "result": result}
        path = OUTPUT_DIR / f"{name}.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        passed = result.get("passed", all(v.get("passed", True) for v in result.values() if isinstance(v, dict)))
        if not passed:
            failures.append(name)
        logger.info(f"{'PASS' if passed else 'FAIL'} {name} -> {os.path.relpath(path)}")

    logger.info(f"Done. {len(selected) - len(failures)}/{len(selected)} experiments passed")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
