"""Registro de experimentos con el enunciado del resultado que cada uno comprueba."""

from __future__ import annotations

from collections.abc import Iterable

from ..errors import ExperimentConfigError
from . import pipelines
from .types import ExperimentDefinition

_WINDOW = [0.02, 0.15]


class ExperimentRegistry:
    """Almacena las definiciones de experimentos por nombre."""

    def __init__(self) -> None:
        self._definitions: dict[str, ExperimentDefinition] = {}

    def register(self, definition: ExperimentDefinition) -> None:
        if definition.name in self._definitions:
            raise ExperimentConfigError(f"experimento duplicado '{definition.name}'", "experiment")
        self._definitions[definition.name] = definition

    def get(self, name: str) -> ExperimentDefinition:
        try:
            return self._definitions[name]
        except KeyError as exc:
            raise ExperimentConfigError(
                f"experimento desconocido '{name}'; disponibles: {', '.join(self.names)}",
                "experiment",
            ) from exc

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._definitions))

    @property
    def definitions(self) -> Iterable[ExperimentDefinition]:
        return tuple(self._definitions[name] for name in self.names)


def _default_registry() -> ExperimentRegistry:
    registry = ExperimentRegistry()
    registry.register(
        ExperimentDefinition(
            name="weyl_bessel",
            anchor=(
                "Weyl law, right-compact support: lim t^{m/d} mu(t, J^{-m} M_f) = "
                "d^{-m/d}(2pi)^{-m}[int_S int tau(|sigma_{-m} f|^{d/m})]^{m/d}"
            ),
            pipeline=pipelines.weyl_bessel,
            parameters={"order": 1.0, "window": _WINDOW},
            requires=("profile",),
            description_key="experiments.weyl_bessel",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="weyl_elliptic",
            anchor=(
                "Weyl law for M_g p A^{-1} p M_g, A positive elliptic of order m, p a trace-finite "
                "projection: integrand |g|^{2d/m} tau(|sigma_m|^{-d/m} p)"
            ),
            pipeline=pipelines.weyl_elliptic,
            parameters={"shift": 1.0, "projection": None, "window": _WINDOW},
            requires=("symbol", "profile"),
            description_key="experiments.weyl_elliptic",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="dixmier",
            anchor=(
                "Dixmier trace formula, order -d and right-compact support: "
                "Tr_w(T) = d^{-1}(2pi)^{-d} int_S int tau(sigma_{-d}(x,s)), independent of w"
            ),
            pipeline=pipelines.dixmier,
            parameters={
                "fraction": 0.3,
                "drift_window": [0.2, 0.4],
                "points": 9,
                "max_drift": 0.03,
            },
            requires=("profile",),
            description_key="experiments.dixmier",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="weyl_commutator_cz",
            anchor=(
                "Calderon-Zygmund commutator Weyl law: lim t^{1/d} mu(t, [T_phi, M_f]) = "
                "(2pi)^{-1} d^{-1/d}(int_S int tau(|sum_k d_k phi(s) D_k f(x)|^d))^{1/d}"
            ),
            pipeline=pipelines.weyl_commutator_cz,
            parameters={"axis": 0, "window": _WINDOW},
            requires=("profile",),
            min_dim=2,
            description_key="experiments.weyl_commutator_cz",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="weyl_commutator_frac",
            anchor=(
                "Fractional commutator Weyl law: lim t^{(1-a)/d} mu(t, [I^a, M_f]) = "
                "C_{d,a}(int_S int tau(|s.grad f|^{d/(1-a)}))^{(1-a)/d}, "
                "C_{d,a} = |a| d^{(a-1)/d}(2pi)^{a-1}"
            ),
            pipeline=pipelines.weyl_commutator_frac,
            parameters={"alpha": 0.5, "potential": "riesz", "window": _WINDOW},
            requires=("profile",),
            description_key="experiments.weyl_commutator_frac",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="zeta_residue",
            anchor=(
                "Localized zeta function: right-most simple pole at z = d/m with residue "
                "(m(2pi)^d)^{-1} int_S int tau(phi* sigma_m^{-d/m} phi)"
            ),
            pipeline=pipelines.zeta_residue,
            parameters={
                "shift": 1.0,
                "offsets": [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
                "cutoff": "auto",
                "degree": None,
            },
            requires=("symbol", "profile"),
            multiplier_spectrum=True,
            description_key="experiments.zeta_residue",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="parametrix_check",
            anchor="Elliptic parametrix: b o sigma = 1 modulo symbols of order -N",
            pipeline=pipelines.parametrix_check,
            parameters={
                "truncation": 3,
                "samples": 16,
                "directions": 16,
                "levels": 3,
                "min_decay": 3.0,
            },
            requires=("symbol",),
            description_key="experiments.parametrix_check",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="power_group_check",
            anchor=(
                "Complex powers: Dunford integral agrees with spectral calculus; "
                "sigma(A^z) o sigma(A^w) = sigma(A^{z+w}); A^{-1} is the parametrix"
            ),
            pipeline=pipelines.power_group_check,
            parameters={
                "pairs": [[-0.5, -0.5], [-1.3, 0.8], [2, -2]],
                "truncation": 2,
                "samples": 6,
                "directions": 4,
                "matrices": 100,
                "matrix_size": 4,
                "condition": 1e4,
                "exponent": -0.5,
                "nodes": 64,
            },
            requires=("symbol",),
            description_key="experiments.power_group_check",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="microlocal_count",
            anchor=(
                "Microlocal eigenvalue counting: Tr(M_phi Q chi_[0,lam](A)) ~ lam^{d/m} "
                "(d(2pi)^d)^{-1} int_S int tau(phi q sigma_m^{-d/m})"
            ),
            pipeline=pipelines.microlocal_count,
            parameters={"observable": "identity", "axis": 0, "band_fraction": 0.5, "points": 16},
            requires=("symbol", "profile"),
            description_key="experiments.microlocal_count",
        )
    )
    registry.register(
        ExperimentDefinition(
            name="dos_random",
            anchor=(
                "Density of states of Z^d-equivariant random operators: N(lam) ~ lam^{d/m} "
                "(d(2pi)^d)^{-1} int_S int_[0,1]^d E tau(sigma_m^{-d/m})"
            ),
            pipeline=pipelines.dos_random,
            parameters={"band_fraction": 0.5, "points": 16},
            requires=("symbol", "model"),
            description_key="experiments.dos_random",
        )
    )
    return registry


REGISTRY = _default_registry()

__all__ = ["ExperimentRegistry", "REGISTRY"]
