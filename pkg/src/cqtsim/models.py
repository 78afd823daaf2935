"""Measurement models: families of Kraus operators on a single factor.

Two probability rules are supported.

``"kraus"``
    The usual rule, ``p_i = Tr(A_i rho A_i^dagger)``. Requires
    ``sum_i A_i^dagger A_i = I``.
``"effect"``
    ``p_i = Tr(A_i rho)`` with the operators themselves acting as POVM
    effects (Hermitian, positive, ``sum_i A_i = I``). The state update is
    still ``A_i rho A_i^dagger`` renormalized. This is how the literal
    epsilon-spin pair ``A_up = (1-eps)|up><up| + eps|down><down|``,
    ``A_down = I - A_up`` assigns probabilities; it is kept to reproduce the
    drift arithmetic of that pair.

Every operator must have a trivial kernel (minimum singular value above
``MIN_SINGULAR``), so no outcome can ever annihilate a state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .qcore import ConfigurationError, KrausOperator, min_singular_value

__all__ = [
    "MeasurementModel",
    "ModelDefect",
    "LatticeGrid",
    "LatticeWavefunction",
    "verify_measurement_model",
    "kraus_model",
    "epsilon_spin_model",
    "box_detector_model",
    "grw_localization_model",
    "spin_projectors",
]

MIN_SINGULAR = 1e-12
COMPLETENESS_TOL = 1e-10
RULES = ("kraus", "effect")


@dataclass(frozen=True)
class ModelDefect:
    kind: str  # "completeness", "singular", "effect"
    outcome: int | None
    margin: float

    def __str__(self) -> str:
        where = "model" if self.outcome is None else f"outcome {self.outcome}"
        return f"{self.kind} defect at {where}: {self.margin:.3g}"


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """An indexed family of Kraus operators acting on one tensor factor.

    Construction validates the model and raises :class:`ConfigurationError`
    on any defect. Use :func:`verify_measurement_model` on raw matrices to get
    the defect list without raising.
    """

    name: str
    outcomes: tuple[KrausOperator, ...]
    metadata: dict[str, Any] = field(default_factory=dict)
    rule: str = "kraus"

    def __post_init__(self):
        ops = tuple(
            op if isinstance(op, KrausOperator) else KrausOperator(np.asarray(op))
            for op in self.outcomes
        )
        object.__setattr__(self, "outcomes", ops)
        if self.rule not in RULES:
            raise ConfigurationError(f"unknown probability rule {self.rule!r}")
        defects = verify_measurement_model(self)
        if defects:
            msg = "; ".join(str(d) for d in defects)
            raise ConfigurationError(f"invalid measurement model {self.name!r}: {msg}")

    @property
    def dim(self) -> int:
        return self.outcomes[0].dim

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(op.label or str(i) for i, op in enumerate(self.outcomes))

    def __len__(self) -> int:
        return len(self.outcomes)

    def probabilities(self, rho_local: np.ndarray) -> np.ndarray:
        """Outcome distribution given the local density matrix of the factor."""
        if self.rule == "kraus":
            p = [np.einsum("ji,jk,ki->", op.matrix.conj(), op.matrix, rho_local).real
                 for op in self.outcomes]
        else:
            p = [np.einsum("ij,ji->", op.matrix, rho_local).real for op in self.outcomes]
        return np.array(p, dtype=float)


def _matrices(model) -> list[np.ndarray]:
    if isinstance(model, MeasurementModel):
        return [op.matrix for op in model.outcomes]
    return [np.asarray(getattr(m, "matrix", m), dtype=np.complex128) for m in model]


def verify_measurement_model(model, rule: str | None = None) -> list[ModelDefect]:
    """Return the list of defects of a model (empty when the model is valid).

    Checks Kraus completeness ``sum A^dagger A = I`` (or, for the ``"effect"``
    rule, that the operators are positive and sum to ``I``) and the strict
    positivity of every minimum singular value. Accepts a
    :class:`MeasurementModel` or a plain sequence of matrices.
    """
    mats = _matrices(model)
    if rule is None:
        rule = getattr(model, "rule", "kraus")
    if not mats:
        return [ModelDefect("completeness", None, 1.0)]
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise ConfigurationError("all Kraus operators of a model must share one square shape")
    defects = []
    eye = np.eye(d)
    if rule == "kraus":
        total = sum(m.conj().T @ m for m in mats)
        resid = float(np.abs(total - eye).max())
        if resid > COMPLETENESS_TOL:
            defects.append(ModelDefect("completeness", None, resid))
    else:
        resid = float(np.abs(sum(mats) - eye).max())
        if resid > COMPLETENESS_TOL:
            defects.append(ModelDefect("completeness", None, resid))
        for i, m in enumerate(mats):
            herm = float(np.abs(m - m.conj().T).max())
            lo = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
            if herm > COMPLETENESS_TOL or lo < -COMPLETENESS_TOL:
                defects.append(ModelDefect("effect", i, max(herm, -lo)))
    for i, m in enumerate(mats):
        s = min_singular_value(m)
        if s <= MIN_SINGULAR:
            defects.append(ModelDefect("singular", i, s))
    return defects


def kraus_model(name: str, operators: Sequence, labels: Sequence[str] | None = None,
                rule: str = "kraus", metadata: dict | None = None) -> MeasurementModel:
    labels = list(labels) if labels is not None else [str(i) for i in range(len(operators))]
    if len(labels) != len(operators):
        raise ConfigurationError("labels and operators differ in length")
    ops = tuple(KrausOperator(np.asarray(m), lab) for m, lab in zip(operators, labels))
    return MeasurementModel(name, ops, dict(metadata or {}), rule)


def spin_projectors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto spin up/down along ``(sin theta, 0, cos theta)``."""
    n_sigma = np.array([[np.cos(theta), np.sin(theta)],
                        [np.sin(theta), -np.cos(theta)]], dtype=np.complex128)
    eye = np.eye(2)
    return (eye + n_sigma) / 2, (eye - n_sigma) / 2


def epsilon_spin_model(eps: float, theta: float = 0.0, variant: str = "povm",
                       name: str | None = None) -> MeasurementModel:
    """Imperfect spin measurement along an axis in the x-z plane.

    ``variant="povm"`` gives Kraus operators
    ``sqrt(1-eps) P_up + sqrt(eps) P_down`` and its mirror, which satisfy
    ``sum A^dagger A = I``. ``variant="literal"`` gives
    ``A_up = (1-eps) P_up + eps P_down`` and ``A_down = I - A_up`` with the
    ``"effect"`` probability rule. Both assign the same single-shot
    probabilities; they differ in the post-measurement state.
    """
    if not 0 < eps < 0.5:
        raise ConfigurationError(f"epsilon must lie in (0, 1/2), got {eps!r}")
    up, down = spin_projectors(theta)
    if variant == "povm":
        a_up = np.sqrt(1 - eps) * up + np.sqrt(eps) * down
        a_down = np.sqrt(eps) * up + np.sqrt(1 - eps) * down
        rule = "kraus"
    elif variant == "literal":
        a_up = (1 - eps) * up + eps * down
        a_down = np.eye(2) - a_up
        rule = "effect"
    else:
        raise ConfigurationError(f"unknown epsilon-spin variant {variant!r}")
    meta = {"type": "epsilon_spin", "eps": eps, "theta": theta, "variant": variant}
    return kraus_model(name or f"spin[{variant},eps={eps:g},theta={theta:g}]",
                       [a_up, a_down], ["up", "down"], rule, meta)


def box_detector_model(eps: float, name: str | None = None) -> MeasurementModel:
    """Particle detector with efficiency ``1 - eps`` on a ``{outside, inside}`` factor.

    Outcome 0 is "no click", outcome 1 is "click". Both operators are
    diagonal, so they preserve the inside/outside support of a state.
    """
    if not 0 < eps < 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {eps!r}")
    a0 = np.diag([np.sqrt(1 - eps), np.sqrt(eps)])
    a1 = np.diag([np.sqrt(eps), np.sqrt(1 - eps)])
    return kraus_model(name or f"box[eps={eps:g}]", [a0, a1], ["none", "click"],
                       metadata={"type": "box_detector", "eps": eps})


@dataclass(frozen=True)
class LatticeGrid:
    """Uniform grid ``x_min .. x_max`` (inclusive) with ``n_points`` sites."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2 or not self.x_max > self.x_min:
            raise ConfigurationError("grid needs x_max > x_min and at least 2 points")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)


@dataclass(frozen=True, eq=False)
class LatticeWavefunction:
    """Single-particle wavefunction sampled on a grid, ``sum |psi|^2 dx = 1``."""

    grid: LatticeGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.grid.n_points,):
            raise ConfigurationError("amplitudes do not match the grid")
        norm2 = float(np.sum(np.abs(amp) ** 2) * self.grid.spacing)
        if not norm2 > 0:
            raise ConfigurationError("zero wavefunction")
        object.__setattr__(self, "amplitudes", amp / np.sqrt(norm2))

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_vector(self) -> np.ndarray:
        """Unit-norm amplitude vector in the site basis (drops the ``dx`` weight)."""
        return self.amplitudes * np.sqrt(self.grid.spacing)

    @classmethod
    def from_vector(cls, grid: LatticeGrid, vector) -> "LatticeWavefunction":
        return cls(grid, np.asarray(vector) / np.sqrt(grid.spacing))


def grw_localization_model(a: float, grid: LatticeGrid, floor: float = 1e-10,
                           name: str | None = None) -> MeasurementModel:
    """Gaussian localization operators centred on every lattice site.

    Operator ``x0`` multiplies the wavefunction by a profile proportional to
    ``exp(-(x - x0)^2 / a^2)``. Profiles are normalized site by site so that
    the family is complete on a finite lattice, and a uniform tail of total
    weight ``floor`` is mixed in so no operator has a vanishing entry:

        A_x0(x)^2 = (1 - floor) g(x - x0)^2 / S(x) + floor / M

    where ``S(x) = sum_c g(x - c)^2`` and ``M`` is the number of sites.
    """
    if grid.n_points < 8:
        raise ConfigurationError("GRW lattice needs at least 8 points")
    dx = grid.spacing
    if not a >= 2 * dx:
        raise ConfigurationError(
            f"localization width a={a!r} is not resolvable on spacing {dx!r} (need a >= 2 dx)"
        )
    if not 0 < floor < 1:
        raise ConfigurationError("floor must lie in (0, 1)")
    x = grid.points
    m = grid.n_points
    # far tails may underflow to 0 here; the floor term keeps every entry positive
    g2 = np.exp(-2 * (x[None, :] - x[:, None]) ** 2 / a**2)
    s = g2.sum(axis=0)
    weights = (1 - floor) * g2 / s[None, :] + floor / m
    ops = [np.diag(np.sqrt(w)) for w in weights]
    labels = [f"x0={c:.6g}" for c in x]
    meta = {"type": "grw", "a": a, "x_min": grid.x_min, "x_max": grid.x_max,
            "n_points": grid.n_points, "floor": floor}
    return kraus_model(name or f"grw[a={a:g}]", ops, labels, metadata=meta)
