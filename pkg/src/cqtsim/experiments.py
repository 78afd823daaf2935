"""Preset experiments and engine comparisons.

Layout conventions: the two wings of a two-party experiment sit at
``x = -D`` and ``x = +D`` in one spatial dimension; each wing's measurements
form a timelike chain at fixed ``x`` spaced one time unit apart, so every
cross-wing pair is spacelike as long as the chains are shorter than ``2 D``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .distributions import JointDistribution
from .engines import ExperimentSpec, enumerate_joint, sample_runs
from .models import box_detector_model, epsilon_spin_model
from .qcore import ConfigurationError, QuantumState
from .spacetime import SpacetimeEvent
from .statistics import (
    chsh_S,
    click_histogram,
    click_moments,
    correlator,
    poisson_reference,
    total_variation,
)

__all__ = [
    "UP",
    "DOWN",
    "NO_CLICK",
    "CLICK",
    "singlet_state",
    "w_state",
    "preset_singlet",
    "preset_sequential_drift",
    "preset_reversion",
    "preset_n_box",
    "preset_chsh",
    "PRESETS",
    "build_preset",
    "drift_reference",
    "chsh_correlators",
    "ComparisonEntry",
    "ComparisonReport",
    "compare_singlet",
    "compare_drift",
    "compare_reversion",
    "compare_n_box",
    "compare_double_click",
    "compare_chsh",
    "COMPARISONS",
]

UP, DOWN = 0, 1
NO_CLICK, CLICK = 0, 1
CHSH_ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)
CHSH_SETTINGS = (("a", "b"), ("a", "b'"), ("a'", "b"), ("a'", "b'"))


def singlet_state() -> QuantumState:
    """``(|up,down> - |down,up>) / sqrt(2)`` on factors (L, R)."""
    return QuantumState.from_vector(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))


def w_state(n: int) -> QuantumState:
    """One particle spread evenly over ``n`` boxes; factor basis ``{outside, inside}``."""
    v = np.zeros(2**n, dtype=np.complex128)
    for i in range(n):
        v[1 << (n - 1 - i)] = 1.0
    return QuantumState.from_vector(v, (2,) * n)


def _wing_events(side: str, n: int, x: float, factor: int, model: str) -> list[SpacetimeEvent]:
    return [SpacetimeEvent(f"{side}{k + 1}", float(k), x, factor, model) for k in range(n)]


def preset_singlet(eps: float = 0.01, engine: str = "causal", variant: str = "povm",
                   separation: float = 1.0, theta_l: float = 0.0,
                   theta_r: float = 0.0) -> ExperimentSpec:
    """One spin measurement per wing on a singlet, the two spacelike separated."""
    if not 0 < eps < 0.5:
        raise ConfigurationError(f"epsilon must lie in (0, 1/2), got {eps!r}")
    models = {
        "spin_L": epsilon_spin_model(eps, theta_l, variant, name="spin_L"),
        "spin_R": epsilon_spin_model(eps, theta_r, variant, name="spin_R"),
    }
    events = [SpacetimeEvent("L", 0.0, -separation, 0, "spin_L"),
              SpacetimeEvent("R", 0.0, separation, 1, "spin_R")]
    params = {"eps": eps, "variant": variant, "separation": separation,
              "theta_l": theta_l, "theta_r": theta_r}
    return ExperimentSpec(singlet_state(), events, models, engine, "singlet",
                          {"preset": "singlet", "params": params})


def preset_sequential_drift(n: int = 2, eps: float = 0.1, engine: str = "causal",
                            variant: str = "literal") -> ExperimentSpec:
    """``n`` spin measurements on each wing of a singlet, wings spacelike."""
    if n < 1:
        raise ConfigurationError("the drift preset needs at least one measurement per wing")
    d = float(n)
    models = {"spin": epsilon_spin_model(eps, 0.0, variant, name="spin")}
    events = _wing_events("L", n, -d, 0, "spin") + _wing_events("R", n, d, 1, "spin")
    return ExperimentSpec(singlet_state(), events, models, engine, "sequential_drift",
                          {"preset": "sequential_drift",
                           "params": {"n": n, "eps": eps, "variant": variant}})


def preset_reversion(n: int = 3, eps: float = 0.01, engine: str = "causal",
                     variant: str = "literal") -> ExperimentSpec:
    """Drift chains on both wings, then one more measurement per wing.

    The final events ``L_post`` and ``R_post`` are placed late enough that
    every chain event of both wings lies in their past light cone.
    """
    if n < 0:
        raise ConfigurationError("n must be non-negative")
    d = float(max(n, 1))
    t_post = (n - 1 if n else 0) + 2 * d + 1.0
    models = {"spin": epsilon_spin_model(eps, 0.0, variant, name="spin")}
    events = _wing_events("L", n, -d, 0, "spin") + _wing_events("R", n, d, 1, "spin")
    events += [SpacetimeEvent("L_post", t_post, -d, 0, "spin"),
               SpacetimeEvent("R_post", t_post, d, 1, "spin")]
    return ExperimentSpec(singlet_state(), events, models, engine, "reversion",
                          {"preset": "reversion",
                           "params": {"n": n, "eps": eps, "variant": variant}})


def preset_n_box(n: int = 4, eps: float = 1e-3, engine: str = "causal",
                 spacing: float = 1.0) -> ExperimentSpec:
    """Single particle in a W-type superposition over ``n`` spacelike boxes."""
    if n < 2:
        raise ConfigurationError("the N-box preset needs at least two boxes")
    models = {"box": box_detector_model(eps, name="box")}
    width = len(str(n))
    events = [SpacetimeEvent(f"B{i:0{width}d}", 0.0, i * spacing, i, "box") for i in range(n)]
    return ExperimentSpec(w_state(n), events, models, engine, "n_box",
                          {"preset": "n_box", "params": {"n": n, "eps": eps, "spacing": spacing}})


def preset_chsh(eps: float = 1e-3, engine: str = "causal",
                angles: tuple[float, float, float, float] = CHSH_ANGLES,
                variant: str = "povm") -> dict[tuple[str, str], ExperimentSpec]:
    """Four singlet experiments, one per analyzer setting pair.

    ``angles`` is ``(a, a', b, b')``, each the polar angle of the spin axis in
    the x-z plane. The default maximizes the standard-theory CHSH value for
    ``S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|``.
    """
    by_name = dict(zip(("a", "a'", "b", "b'"), angles))
    family = {}
    for sa, sb in CHSH_SETTINGS:
        spec = preset_singlet(eps, engine, variant, theta_l=by_name[sa], theta_r=by_name[sb])
        family[(sa, sb)] = spec
    return family


def chsh_correlators(family: dict[tuple[str, str], ExperimentSpec],
                     engine: str | None = None) -> tuple[dict[tuple[str, str], float], float]:
    """Exact correlators of a CHSH family and the resulting ``S``."""
    corr = {key: correlator(enumerate_joint(spec, engine=engine), ("L", "R"))
            for key, spec in family.items()}
    s = chsh_S(*(corr[k] for k in CHSH_SETTINGS))
    return corr, s


def drift_reference(eps: float) -> float:
    """Closed form for P(second L outcome up | first L outcome up) with the literal pair."""
    return ((1 - eps) ** 3 + eps**3) / ((1 - eps) ** 2 + eps**2)


@dataclass(frozen=True)
class _Preset:
    builder: Callable
    defaults: dict
    scenario: str


PRESETS: dict[str, _Preset] = {
    "singlet": _Preset(preset_singlet, {"eps": 0.01, "variant": "povm", "separation": 1.0,
                                        "theta_l": 0.0, "theta_r": 0.0},
                       "spacelike s_z measurements on a singlet: uncorrelated vs anticorrelated"),
    "sequential_drift": _Preset(preset_sequential_drift, {"n": 2, "eps": 0.1, "variant": "literal"},
                                "N measurements per wing; local state drifts with the L history"),
    "reversion": _Preset(preset_reversion, {"n": 3, "eps": 0.01, "variant": "literal"},
                         "drift chains then a measurement with both wings in the past cone"),
    "n_box": _Preset(preset_n_box, {"n": 4, "eps": 1e-3, "spacing": 1.0},
                     "single particle over N spacelike boxes: click-count distribution"),
    "chsh": _Preset(preset_chsh, {"eps": 1e-3, "angles": list(CHSH_ANGLES), "variant": "povm"},
                    "four analyzer settings on a singlet: CHSH S"),
}


def build_preset(name: str, params: dict | None = None, engine: str = "causal"):
    """Build a registered preset; returns a spec, or a dict of specs for ``chsh``."""
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    kwargs = {**PRESETS[name].defaults, **(params or {})}
    unknown = set(kwargs) - set(PRESETS[name].defaults)
    if unknown:
        raise ConfigurationError(f"preset {name!r} got unknown parameters {sorted(unknown)}")
    if name == "chsh":
        kwargs["angles"] = tuple(kwargs["angles"])
    return PRESETS[name].builder(engine=engine, **kwargs)


# -- comparisons -------------------------------------------------------------

_RULES = {
    "abs_le": lambda v, ref, tol: abs(v - ref) <= tol,
    "ge": lambda v, ref, tol: v >= ref,
    "le": lambda v, ref, tol: v <= ref,
}


@dataclass
class ComparisonEntry:
    """One checked statistic.

    ``rule`` is ``abs_le`` (``|value - reference| <= tolerance``), ``ge``
    (``value >= reference``) or ``le`` (``value <= reference``); ``value`` is
    whichever of ``causal`` and ``standard`` the ``engine`` field names.
    """

    statistic: str
    engine: str
    causal: float | None
    standard: float | None
    reference: float
    rule: str
    tolerance: float = 0.0

    @property
    def value(self) -> float:
        return self.causal if self.engine == "causal" else self.standard

    @property
    def deviation(self) -> float:
        return abs(self.value - self.reference)

    @property
    def passed(self) -> bool:
        return bool(_RULES[self.rule](self.value, self.reference, self.tolerance))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(deviation=self.deviation, passed=self.passed)
        return d


@dataclass
class ComparisonReport:
    experiment: str
    params: dict
    entries: list[ComparisonEntry] = field(default_factory=list)

    def add(self, *args, **kwargs) -> ComparisonEntry:
        entry = ComparisonEntry(*args, **kwargs)
        self.entries.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params,
                "passed": self.passed, "entries": [e.to_dict() for e in self.entries]}

    def summary(self) -> str:
        lines = []
        for e in self.entries:
            mark = "PASS" if e.passed else "FAIL"
            rule = f"{e.rule} {e.tolerance:g}" if e.rule == "abs_le" else e.rule
            lines.append(f"[{mark}] {self.experiment}: {e.statistic} ({e.engine}) = {e.value:.6g}"
                         f" vs {e.reference:.6g} [{rule}]")
        return "\n".join(lines)


def _both(spec: ExperimentSpec) -> tuple[JointDistribution, JointDistribution]:
    return (enumerate_joint(spec.with_engine("causal")),
            enumerate_joint(spec.with_engine("standard")))


def compare_singlet(eps: float = 0.01) -> ComparisonReport:
    spec = preset_singlet(eps)
    causal, standard = _both(spec)
    report = ComparisonReport("singlet", {"eps": eps})
    names = {UP: "up", DOWN: "down"}
    for a in (UP, DOWN):
        for b in (UP, DOWN):
            key = {"L": a, "R": b}
            report.add(f"P({names[a]},{names[b]})", "causal", causal.probability(key),
                       standard.probability(key), 0.25, "abs_le", 5e-3)
    anti_c = causal.probability({"L": UP, "R": DOWN}) + causal.probability({"L": DOWN, "R": UP})
    anti_s = standard.probability({"L": UP, "R": DOWN}) + standard.probability({"L": DOWN, "R": UP})
    report.add("P(anticorrelated)", "standard", anti_c, anti_s, 1 - 4 * eps, "ge")
    report.add("P(same spin)", "standard", 1 - anti_c, 1 - anti_s, 4 * eps, "le")
    return report


def compare_drift(eps: float = 0.1) -> ComparisonReport:
    spec = preset_sequential_drift(2, eps)
    causal, standard = _both(spec)
    given, target = {"L1": UP}, {"L2": UP}
    c = causal.conditional(target, given)
    s = standard.conditional(target, given)
    report = ComparisonReport("sequential_drift", {"n": 2, "eps": eps})
    report.add("P(L2 up | L1 up)", "causal", c, s, drift_reference(eps), "abs_le", 1e-12)
    report.add("P(L2 up | L1 up) vs 1-eps-eps^2", "causal", c, s,
               1 - eps - eps**2, "abs_le", 2 * eps**3)
    return report


def compare_reversion(n: int = 3, eps: float = 0.01) -> ComparisonReport:
    spec = preset_reversion(n, eps)
    causal, standard = _both(spec)
    report = ComparisonReport("reversion", {"n": n, "eps": eps})
    for side in ("L", "R"):
        post = {f"{side}_post": UP}
        report.add(f"P({side}_post up)", "causal", causal.probability_of(post),
                   standard.probability_of(post), 0.5, "abs_le", 0.02)
    if n >= 1:
        runs = {f"{s}{k}": UP for s in ("L", "R") for k in range(1, n + 1)}
        for side in ("L", "R"):
            post = {f"{side}_post": UP}
            report.add(f"P({side}_post up | both wings all up)", "causal",
                       causal.conditional(post, runs), standard.conditional(post, runs),
                       0.5, "abs_le", 0.02)
        run = {f"L{k}": UP for k in range(1, n)}
        report.add(f"P(L{n} up | earlier L all up)", "causal",
                   causal.conditional({f"L{n}": UP}, run),
                   standard.conditional({f"L{n}": UP}, run), 0.97, "ge")
    return report


def compare_double_click(eps: float = 1e-3) -> ComparisonReport:
    causal, standard = _both(preset_n_box(2, eps))
    pc = click_histogram(causal)[2]
    ps = click_histogram(standard)[2]
    report = ComparisonReport("double_click", {"n": 2, "eps": eps})
    report.add("P(2 clicks)", "causal", pc, ps, 0.25, "abs_le", 0.01)
    report.add("P(2 clicks)", "standard", pc, ps, 10 * eps, "le")
    return report


def compare_n_box(n: int = 20, eps: float = 1e-4, runs: int = 100_000, seed: int = 2024,
                  max_clicks: int = 6) -> ComparisonReport:
    """Sampled click statistics of the N-box preset under both engines.

    ``mean clicks`` entries compare the sample mean with 1 using a
    tolerance of three standard errors of the mean.
    """
    spec = preset_n_box(n, eps)
    report = ComparisonReport("n_box", {"n": n, "eps": eps, "runs": runs, "seed": seed})
    stats = {eng: sample_runs(spec.with_engine(eng), runs, seed) for eng in ("causal", "standard")}
    hists = {eng: click_histogram(st)[: max_clicks + 1] for eng, st in stats.items()}
    ref = poisson_reference(np.arange(max_clicks + 1))
    tv = {eng: total_variation(h, ref) for eng, h in hists.items()}
    report.add(f"TV(click histogram n<={max_clicks}, Poisson(1))", "causal",
               tv["causal"], tv["standard"], 0.0, "abs_le", 0.03)
    moments = {eng: click_moments(st) for eng, st in stats.items()}
    for eng in ("causal", "standard"):
        se = math.sqrt(moments[eng][1] / runs)
        report.add("mean clicks", eng, moments["causal"][0], moments["standard"][0],
                   1.0, "abs_le", 3 * se)
    return report


def compare_chsh(eps: float = 1e-3) -> ComparisonReport:
    family = preset_chsh(eps)
    _, s_c = chsh_correlators(family, "causal")
    _, s_s = chsh_correlators(family, "standard")
    report = ComparisonReport("chsh", {"eps": eps, "angles": list(CHSH_ANGLES)})
    report.add("S", "causal", s_c, s_s, 0.0, "abs_le", 1e-12)
    report.add("S", "standard", s_c, s_s, 2.7, "ge")
    return report


def _n_box_comparison(params: dict, runs: int | None, seed: int | None) -> ComparisonReport:
    kwargs = {"n": params.get("n", 20), "eps": params.get("eps", 1e-4)}
    if runs is not None:
        kwargs["runs"] = runs
    if seed is not None:
        kwargs["seed"] = seed
    return compare_n_box(**kwargs)


# preset name -> (params, runs, seed) -> report
COMPARISONS: dict[str, Callable[[dict, int | None, int | None], ComparisonReport]] = {
    "singlet": lambda p, runs, seed: compare_singlet(p.get("eps", 0.01)),
    "sequential_drift": lambda p, runs, seed: compare_drift(p.get("eps", 0.1)),
    "reversion": lambda p, runs, seed: compare_reversion(p.get("n", 3), p.get("eps", 0.01)),
    "n_box": _n_box_comparison,
    "chsh": lambda p, runs, seed: compare_chsh(p.get("eps", 1e-3)),
}
