from typing import Any, Callable, Dict, List, Optional
import json
import logging
import os
from enum import Enum

import numpy as np

from errors import ContractViolation, UnknownFamily
from geometry import GEOMETRY_TOL, MetricChart, omega_transport_residual, skew_torsion_residual, sugra6d_residual
from radial import RadialParams, complete_initial_data, radial_integrate
from reports import ResidualRecord
from solutions import (
    KILLING_CASES,
    SPHERE,
    WARPED,
    FreedmanParams,
    adapted_null_form,
    brane_screen_form,
    black_brane_charge,
    black_brane_chart,
    black_brane_components,
    black_brane_data,
    black_brane_harmonic_residual,
    causal_character,
    conformal_cross_residual,
    conformal_transfer,
    duality_residual,
    freedman_chart,
    freedman_flux,
    freedman_residual,
    killing_warped_chart,
    killing_warped_residuals,
    radial_components,
    radial_domain,
    radial_family_chart,
    radial_family_data,
    reduced_system_residual,
    selfdual_gerbe_check,
    wavefront_residual,
)
from suites import ODE_CONSTRAINT_TOL, SuiteCheck

logger = logging.getLogger(__name__)

ODE_STEP = 1e-3


class FamilyType(Enum):
    FREEDMAN = "freedman"
    BLACK_BRANE = "black_brane"
    RADIAL = "radial"
    KILLING_WARPED = "killing_warped"


def parse_params(text: Optional[str]) -> Dict[str, Any]:
    """
    Parse a family parameter string or file.

    Args:
        text: "k=v,k=v" pairs, or a path to a JSON/TOML file holding either a
            flat mapping or {"family": ..., "params": {...}}

    Returns:
        Parameter mapping with numeric values converted
    """
    if text is None or text.strip() == "":
        return {}
    if os.path.isfile(text):
        if text.endswith(".toml"):
            import tomllib

            with open(text, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(text) as fh:
                data = json.load(fh)
        if not isinstance(data, dict):
            raise ContractViolation(f"Parameter file {text} must hold a mapping")
        return dict(data.get("params", data))

    params: Dict[str, Any] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ContractViolation(f"Expected key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        params[key] = _coerce(value)
    return params


def _coerce(value: str) -> Any:
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def _sweep(chart: MetricChart, points: int, evaluate: Callable[[np.ndarray], ResidualRecord]):
    """Evaluate a residual at sampled interior points and keep the worst value per key."""

    def run(rng: np.random.Generator):
        worst: Dict[str, float] = {}
        failed = 0
        worst_point, worst_value = None, -1.0
        for x in chart.sample_points(points, rng):
            record = evaluate(x)
            failed += not record.passed
            for name, value in record.residuals.items():
                worst[name] = max(worst.get(name, 0.0), value)
            if record.max_residual > worst_value:
                worst_point, worst_value = record.point, record.max_residual
        return worst, {"chart": chart.name, "points": points, "failed_points": failed, "worst_point": worst_point}

    return run


class SolutionFamilyFactory:
    """Registry of named solution families and the residual checks run on each."""

    FAMILY_INFO = {
        FamilyType.FREEDMAN: {
            'description': 'Brinkmann-type Einstein-Maxwell solution over a round sphere',
            'defaults': {'R': 1.0, 'c1': 0.0, 'c2': 0.0, 'c3': 1.0, 'c': 0.0, 'mu': 1, 'e': 1.0},
            'perturbations': ('H',),
        },
        FamilyType.BLACK_BRANE: {
            'description': 'Self-dual string black brane over flat R^4 minus the origin',
            'defaults': {'m': 1.0, 'mu': 1},
            'perturbations': (),
        },
        FamilyType.RADIAL: {
            'description': 'Radially warped wave-front family over hyperbolic 3-space',
            'defaults': {'lam': -0.5, 'e': 1.0, 'c': 1.0, 'm1': 0.5, 'm2': 1.0, 'rho_star': -1.0, 'mu': 1},
            'perturbations': (),
        },
        FamilyType.KILLING_WARPED: {
            'description': 'Warped products carrying Killing spinors',
            'defaults': {'case': 'imag3d', 'lam': 0.5, 'branch': WARPED, 'f0': 1.0},
            'perturbations': (),
        },
    }

    def __init__(self):
        self._builders = {
            FamilyType.FREEDMAN: self._freedman_checks,
            FamilyType.BLACK_BRANE: self._black_brane_checks,
            FamilyType.RADIAL: self._radial_checks,
            FamilyType.KILLING_WARPED: self._killing_checks,
        }
        logger.info(f"Solution family registry initialized with {len(self._builders)} families")

    def get_available_families(self) -> List[Dict]:
        """
        Get list of registered families.

        Returns:
            List of families with description, default parameters and
            supported perturbations
        """
        return [
            {
                'id': family.value,
                'description': info['description'],
                'defaults': dict(info['defaults']),
                'perturbations': list(info['perturbations']),
            }
            for family, info in self.FAMILY_INFO.items()
        ]

    def resolve(self, name: str) -> FamilyType:
        try:
            return FamilyType(name)
        except ValueError:
            known = ", ".join(f.value for f in FamilyType)
            raise UnknownFamily(f"Unknown solution family {name!r}; known families: {known}")

    def merged_params(self, family: FamilyType, params: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        defaults = self.FAMILY_INFO[family]['defaults']
        params = dict(params or {})
        unknown = sorted(set(params) - set(defaults))
        if unknown:
            raise ContractViolation(f"Unknown parameters for {family.value}: {unknown}; expected {sorted(defaults)}")
        return {**defaults, **params}

    def build_checks(
        self,
        name: str,
        params: Optional[Dict[str, Any]] = None,
        points: int = 100,
        tol: float = GEOMETRY_TOL,
        perturb: Optional[Dict[str, float]] = None,
    ) -> List[SuiteCheck]:
        """
        Build the residual checks for one named family.

        Args:
            name: Registry name of the family
            params: Overrides of the family defaults
            points: Interior sample points per chart check
            tol: Tolerance for every residual
            perturb: Deformations of the solution, e.g. {"H": 0.1}

        Returns:
            Suite checks ready for run_suite
        """
        family = self.resolve(name)
        if points < 1:
            raise ContractViolation(f"points must be positive, got {points}")
        merged = self.merged_params(family, params)
        perturb = dict(perturb or {})
        allowed = self.FAMILY_INFO[family]['perturbations']
        for key in perturb:
            if key not in allowed:
                raise ContractViolation(f"Family {family.value} does not support perturbation {key!r}")
        logger.info(f"Building {family.value} checks with {merged} ({points} points, tol={tol:g})")
        checks = self._builders[family](merged, points, tol, perturb)
        for check in checks:
            check.params = {"family": family.value, **merged, **({"perturb": perturb} if perturb else {})}
        return checks

    # -- families ----------------------------------------------------------

    def _freedman_checks(self, params: Dict[str, Any], points: int, tol: float, perturb: Dict[str, float]):
        p = FreedmanParams(
            R=float(params['R']), c1=float(params['c1']), c2=float(params['c2']), c3=float(params['c3']),
            c=float(params['c']), mu=int(params['mu']), e=float(params['e']),
        )
        chart, F_A = freedman_chart(p, perturb=float(perturb.get('H', 0.0)))

        def flux(rng):
            result = freedman_flux(p)
            return {"flux_quantization": result["residual"]}, {"flux": result["flux"], "chern": result["chern"]}

        def character(rng):
            counts = causal_character(chart, chart.sample_points(points, rng))
            return {}, {"causal_character": counts}

        return [
            SuiteCheck("freedman/field_equations", _sweep(chart, points, lambda x: freedman_residual(p, chart, F_A, x, tol)), tol),
            SuiteCheck("freedman/flux", flux, tol),
            SuiteCheck("freedman/causal_character", character, tol),
        ]

    def _black_brane_checks(self, params: Dict[str, Any], points: int, tol: float, perturb: Dict[str, float]):
        m, mu = float(params['m']), int(params['mu'])
        data = black_brane_data(m, mu)
        chart, H = black_brane_chart(m, mu)
        components = black_brane_components(m, mu)
        gerbe_chart = components.chart()
        u_field = adapted_null_form(data, chart.signature)
        omega_field = brane_screen_form(data, mu, chart.signature)
        transverse = data.chart
        h_data = conformal_transfer(data)

        def harmonic(rng):
            radii = rng.uniform(*transverse.domain[0], size=points)
            return {"harmonic": max(black_brane_harmonic_residual(m, float(r)) for r in radii)}, {}

        def charge(rng):
            result = black_brane_charge(m, mu)
            return {"e=2m": result["residual"]}, {"e": result["e"], "flux": result["flux"]}

        def conformal(x):
            cross = conformal_cross_residual(data, x, tol)
            lower = wavefront_residual(h_data, x, tol)
            residuals = {f"cross:{k}": v for k, v in cross.residuals.items()}
            residuals.update({f"h:{k}": v for k, v in lower.residuals.items()})
            return ResidualRecord.build("conformal_transfer", x, residuals, tol)

        def duality(x):
            return ResidualRecord.build("duality", x, {"duality": duality_residual(data, mu, x)}, tol)

        return [
            SuiteCheck("black_brane/sugra6d", _sweep(chart, points, lambda x: sugra6d_residual(chart, H, mu, x, tol)), tol),
            SuiteCheck("black_brane/harmonic", harmonic, tol),
            SuiteCheck("black_brane/charge", charge, tol),
            SuiteCheck("black_brane/duality", _sweep(transverse, points, duality), tol),
            SuiteCheck(
                "black_brane/reduced_system",
                _sweep(transverse, points, lambda y: reduced_system_residual(
                    transverse, data.H_b, data.dilaton, data.hbar, y, mu=mu, tol=tol)),
                tol,
            ),
            SuiteCheck("black_brane/conformal_transfer", _sweep(transverse, points, conformal), tol),
            SuiteCheck(
                "black_brane/selfdual_gerbe",
                _sweep(gerbe_chart, points, lambda x: selfdual_gerbe_check(components, x, mu, tol)),
                tol,
            ),
            SuiteCheck(
                "black_brane/skew_torsion",
                _sweep(chart, points, lambda x: skew_torsion_residual(u_field, H, chart, x, tol)),
                tol,
            ),
            SuiteCheck(
                "black_brane/omega_transport",
                _sweep(chart, points, lambda x: omega_transport_residual(omega_field, u_field, H, chart, x, tol)),
                tol,
            ),
        ]

    def _radial_checks(self, params: Dict[str, Any], points: int, tol: float, perturb: Dict[str, float]):
        mu = int(params['mu'])
        p = RadialParams(
            lam=float(params['lam']), e=float(params['e']), c=float(params['c']),
            m1=float(params['m1']), m2=float(params['m2']), rho_star=float(params['rho_star']),
        )
        data = radial_family_data(p)
        chart, H = radial_family_chart(p, mu)
        transverse = data.chart
        components = radial_components(p, mu)
        gerbe_chart = components.chart()

        def ode(rng):
            r0, r1 = radial_domain(p)
            trajectory = radial_integrate(complete_initial_data(p, r0), (r0, r1), ODE_STEP, p)
            residuals = {"constraint": trajectory.max_constraint}
            residuals.update({f"closed_form:{k}": v for k, v in trajectory.closed_form_error().items()})
            return residuals, {"steps": len(trajectory.r) - 1, "truncated": trajectory.truncated}

        return [
            SuiteCheck(
                "radial/reduced_system",
                _sweep(transverse, points, lambda y: reduced_system_residual(
                    transverse, data.H_b, data.dilaton, data.hbar, y, tol=tol)),
                tol,
            ),
            SuiteCheck("radial/sugra6d", _sweep(chart, points, lambda x: sugra6d_residual(chart, H, mu, x, tol)), tol),
            SuiteCheck(
                "radial/conformal_transfer",
                _sweep(transverse, points, lambda y: conformal_cross_residual(data, y, tol)),
                tol,
            ),
            SuiteCheck(
                "radial/selfdual_gerbe",
                _sweep(gerbe_chart, points, lambda x: selfdual_gerbe_check(components, x, mu, tol)),
                tol,
            ),
            SuiteCheck("radial/ode", ode, max(tol, ODE_CONSTRAINT_TOL)),
        ]

    def _killing_checks(self, params: Dict[str, Any], points: int, tol: float, perturb: Dict[str, float]):
        case, branch = str(params['case']), str(params['branch'])
        if case not in KILLING_CASES:
            raise ContractViolation(f"Unknown Killing case {case!r}; choose one of {KILLING_CASES}")
        if branch not in (WARPED, SPHERE):
            raise ContractViolation(f"Unknown branch {branch!r}")
        family = killing_warped_chart(case, float(params['lam']), branch=branch, f0=float(params['f0']))
        chart = family.chart
        return [
            SuiteCheck(
                f"killing_warped/{case}",
                _sweep(chart, points, lambda x: killing_warped_residuals(family, x, tol)),
                tol,
            ),
        ]
