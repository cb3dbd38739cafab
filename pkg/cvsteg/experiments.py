"""Named experiments: parameter schemas, the runner, result tables and manifests."""

import csv
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import capacities, channels, gkp_logic, metrics, states, teleport
from .channels import ChannelSpec
from .errors import ConfigError, TruncationFailure
from .fock_core import (
    Cutoff,
    DensityOperator,
    PureState,
    TAU_NORM,
    auto_cutoff,
    gkp_cutoff,
    partial_trace,
    two_mode_squeezer,
)
from .gkp_logic import Readout
from .states import GkpParams

logger = logging.getLogger(__name__)

NMAX_OVERRIDE_ENV = "CVSTEG_NMAX_OVERRIDE"
FORMATS = ("csv", "json")
NEGATIVITY_THRESHOLD = -1e-3


def float_list(raw: str) -> Tuple[float, ...]:
    """Comma-separated floats, e.g. ``0,0.25,0.5``."""
    return tuple(float(item) for item in str(raw).split(",") if item.strip())


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: Callable[[Any], Any]
    default: Any
    help: str = ""
    choices: Optional[Tuple[str, ...]] = None

    @property
    def type_name(self) -> str:
        return getattr(self.type, "__name__", str(self.type))

    def parse(self, raw: Any) -> Any:
        try:
            value = self.type(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {self.name}: cannot read {raw!r} as {self.type_name}") from exc
        if self.choices is not None and value not in self.choices:
            raise ConfigError(f"parameter {self.name}: {value!r} is not one of {self.choices}")
        return value

    def describe(self) -> Dict[str, Any]:
        default = list(self.default) if isinstance(self.default, tuple) else self.default
        entry = {"name": self.name, "type": self.type_name, "default": default, "help": self.help}
        if self.choices:
            entry["choices"] = list(self.choices)
        return entry


@dataclass
class Table:
    """Rows of one result file; the first CSV line is the column header."""
    columns: List[str]
    rows: List[Sequence[Any]] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)


@dataclass
class Outcome:
    """What an experiment hands back to the runner."""
    tables: Dict[str, Table]
    results: Dict[str, Any]
    cutoff: Optional[Cutoff] = None
    lost_mass: float = 0.0


@dataclass(frozen=True)
class RunContext:
    seed: int = 0
    nmax_override: Optional[int] = None

    @classmethod
    def from_env(cls, seed: int = 0) -> "RunContext":
        raw = os.environ.get(NMAX_OVERRIDE_ENV)
        if raw is None or raw == "":
            return cls(seed)
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{NMAX_OVERRIDE_ENV}={raw!r} is not an integer") from exc
        if value < 1:
            raise ConfigError(f"{NMAX_OVERRIDE_ENV} must be >= 1, got {value}")
        return cls(seed, value)

    def cutoff(self, default: Cutoff, requested: int = 0) -> Cutoff:
        """Environment override first, then an explicit n_max parameter, then ``default``."""
        if self.nmax_override is not None:
            return replace(default, n_max=self.nmax_override)
        if requested:
            if requested < 1:
                raise ConfigError(f"n_max must be >= 1, got {requested}")
            return replace(default, n_max=requested)
        return default


@dataclass(frozen=True)
class Experiment:
    name: str
    anchor: str
    summary: str
    params: Tuple[ParamSpec, ...]
    func: Callable[[Dict[str, Any], RunContext], Outcome]

    def resolve(self, overrides: Dict[str, Any]) -> Dict[str, Any]:
        known = {spec.name: spec for spec in self.params}
        unknown = sorted(set(overrides) - set(known))
        if unknown:
            raise ConfigError(f"{self.name} has no parameter(s) {', '.join(unknown)}")
        resolved = {spec.name: spec.default for spec in self.params}
        for name, raw in overrides.items():
            resolved[name] = known[name].parse(raw)
        return resolved

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "summary": self.summary,
            "params": [spec.describe() for spec in self.params],
        }


CATALOG: Dict[str, Experiment] = {}


def experiment(name: str, anchor: str, summary: str, params: Sequence[ParamSpec]):
    def register(func):
        CATALOG[name] = Experiment(name, anchor, summary, tuple(params), func)
        return func
    return register


def list_experiments() -> List[Dict[str, Any]]:
    return [CATALOG[name].describe() for name in sorted(CATALOG)]


# ----------------------------------------------------------------------------
# Shared parameters and helpers
# ----------------------------------------------------------------------------

def _n_max_param(help_text: str = "Fock cutoff (0 selects it automatically)") -> ParamSpec:
    return ParamSpec("n_max", int, 0, help_text)


CHANNEL_PARAMS = (
    ParamSpec("channel", str, "identity", "eavesdropper channel on the resource", channels.CHANNEL_KINDS),
    ParamSpec("p", float, 0.0, "measurement probability of the werner channel"),
    ParamSpec("eta", float, 1.0, "transmissivity of the wiretap channel"),
)

WIGNER_PARAMS = (
    ParamSpec("extent", float, 6.0, "half-width of the square phase-space window"),
    ParamSpec("points", int, 121, "grid points per axis"),
)


def _channel(params: Dict[str, Any]) -> ChannelSpec:
    kind = params["channel"]
    if kind == channels.WERNER:
        return ChannelSpec.werner(params["p"])
    if kind == channels.WIRETAP:
        return ChannelSpec.wiretap(params["eta"])
    return ChannelSpec.identity()


def _wigner_table(grid: metrics.WignerGrid) -> Table:
    table = Table(["x", "p", "W"])
    for row in grid.rows():
        table.add(*row)
    return table


def _wigner_axes(params: Dict[str, Any]) -> np.ndarray:
    if params["points"] < 2:
        raise ConfigError("points must be >= 2")
    return np.linspace(-params["extent"], params["extent"], params["points"])


def _cat_cutoff(r: float, alpha: complex, ctx: RunContext, requested: int) -> Cutoff:
    base = auto_cutoff(r=r)
    # Cat amplitudes need the Poisson tail of |alpha|^2 below tau as well.
    cat_levels = int(math.ceil(abs(alpha) ** 2 + 10 * abs(alpha) + 10))
    return ctx.cutoff(replace(base, n_max=max(base.n_max, cat_levels)), requested)


def _noisy_cutoff(base: Cutoff, mean_photons: float, r: float, ctx: RunContext, requested: int) -> Cutoff:
    """Cutoff wide enough for the product-branch output, whose noise adds cosh(2r) photons."""
    widened = auto_cutoff(nbar=mean_photons + math.cosh(2 * r), hbar=base.hbar, tau_norm=base.tau_norm)
    return ctx.cutoff(replace(base, n_max=max(base.n_max, widened.n_max)), requested)


def _closed_cat_fidelity(r: float, channel: ChannelSpec, z: float, hbar: float) -> float:
    return sum(
        w * teleport.cat_fidelity_closed(noise.variance / hbar, z)
        for w, noise in teleport.werner_noise_branches(r, channel, hbar=hbar)
    )


def _teleport_cat(params: Dict[str, Any], ctx: RunContext, channel: ChannelSpec, shots: int):
    alpha = complex(params["alpha_re"], params["alpha_im"])
    cutoff = _cat_cutoff(params["r"], alpha, ctx, params["n_max"])
    cat = states.cat_odd(alpha, cutoff)
    config = teleport.TeleportConfig(
        resource=states.tmsv(params["r"], cutoff),
        channel=channel,
        shots=shots,
        seed=ctx.seed,
        workers=params["workers"],
    )
    return cutoff, cat, teleport.bk_teleport_average(cat, config)


CAT_PARAMS = (
    ParamSpec("alpha_re", float, 0.0, "real part of the cat amplitude"),
    ParamSpec("alpha_im", float, -1.5, "imaginary part of the cat amplitude"),
    ParamSpec("r", float, 1.15, "resource squeezing"),
    ParamSpec("workers", int, 1, "threads evaluating shots"),
)


# ----------------------------------------------------------------------------
# Catalog
# ----------------------------------------------------------------------------

@experiment(
    "ef-margin", "entanglement gain from the squeezing margin",
    "percent gain in entanglement of formation from the fidelity-0.99 squeezing margin",
    (
        ParamSpec("r_min", float, 0.2, "smallest base squeezing"),
        ParamSpec("r_max", float, 2.0, "largest base squeezing"),
        ParamSpec("points", int, 37, "number of r values"),
        ParamSpec("fidelity", float, 0.99, "fidelity kept while over-squeezing"),
    ),
)
def run_ef_margin(params, ctx):
    r_values = np.linspace(params["r_min"], params["r_max"], params["points"])
    delta = metrics.squeezing_margin(params["fidelity"])
    gains = metrics.ef_margin_curve(r_values, params["fidelity"])
    table = Table(["r", "nbar", "entropy", "delta_r", "percent_increase"])
    for r, gain in zip(r_values, gains):
        nbar = capacities.r_to_nbar(r)
        table.add(float(r), nbar, metrics.thermal_entropy(nbar), delta, float(gain))
    return Outcome({"ef_margin": table}, {"delta_r": delta, "margin_db": metrics.margin_db(delta)})


@experiment(
    "tmsv-thermal", "reduced TMSV is thermal",
    "reduced TMSV built by the exponential map against the thermal state, across cutoffs",
    (
        ParamSpec("r", float, 1.15, "squeezing"),
        ParamSpec("n_min", int, 10, "smallest cutoff"),
        ParamSpec("n_step", int, 5, "cutoff step"),
        _n_max_param("largest cutoff (0 uses the automatic cutoff)"),
    ),
)
def run_tmsv_thermal(params, ctx):
    r = params["r"]
    top = ctx.cutoff(auto_cutoff(r=r), params["n_max"])
    nbar = capacities.r_to_nbar(r)
    table = Table(["n_max", "trace_distance", "lost_mass"])
    last = None
    for n_max in range(min(params["n_min"], top.n_max), top.n_max + 1, max(1, params["n_step"])):
        cutoff = replace(top, n_max=n_max)
        vac = np.zeros(cutoff.dim(2), dtype=complex)
        vac[0] = 1.0
        squeezed = PureState(two_mode_squeezer(r, cutoff).mat @ vac, cutoff, 2)
        reduced = partial_trace(squeezed.to_density(), 0)
        reference = states.thermal(nbar, cutoff)
        last = metrics.trace_distance(reduced, reference)
        table.add(n_max, last, reference.lost_mass)
    return Outcome({"tmsv_thermal": table}, {"nbar": nbar, "trace_distance": last}, top,
                   states.thermal(nbar, top).lost_mass)


@experiment(
    "cat-teleport", "teleported cat Wigner functions",
    "Monte-Carlo teleportation of the odd cat with the averaged Wigner function",
    CAT_PARAMS + CHANNEL_PARAMS + WIGNER_PARAMS + (
        ParamSpec("shots", int, 2000, "Monte-Carlo shots"),
        _n_max_param(),
    ),
)
def run_cat_teleport(params, ctx):
    channel = _channel(params)
    cutoff, cat, result = _teleport_cat(params, ctx, channel, params["shots"])
    axes = _wigner_axes(params)
    grid = metrics.wigner(result.avg_output, axes, axes)
    shots = Table(["shot", "fidelity"])
    for index, value in enumerate(result.per_shot_fidelities):
        shots.add(index, float(value))
    z = abs(complex(params["alpha_re"], params["alpha_im"]))
    minimum = metrics.wigner_min(grid)
    results = {
        "channel": channel.describe(),
        "avg_fidelity": result.avg_fidelity,
        "stderr": result.stderr,
        "closed_form_fidelity": _closed_cat_fidelity(params["r"], channel, z, cutoff.hbar),
        "wigner_min": minimum,
        "wigner_negative": minimum < NEGATIVITY_THRESHOLD,
    }
    return Outcome({"shots": shots, "wigner": _wigner_table(grid)}, results, cutoff, result.lost_mass)


@experiment(
    "werner-sweep", "fidelity is linear in the Werner probability",
    "teleportation fidelity across the entanglement-breaking probability against the branch mixture",
    CAT_PARAMS + (
        ParamSpec("input", str, "cat", "teleported state", ("cat", "coherent")),
        ParamSpec("p_values", float_list, (0.0, 0.25, 0.5, 0.75, 1.0), "comma-separated probabilities"),
        ParamSpec("shots", int, 500, "Monte-Carlo shots per point"),
        _n_max_param(),
    ),
)
def run_werner_sweep(params, ctx):
    alpha = complex(params["alpha_re"], params["alpha_im"])
    cutoff = _cat_cutoff(params["r"], alpha, ctx, params["n_max"])
    source = states.cat_odd(alpha, cutoff) if params["input"] == "cat" else states.coherent(alpha, cutoff)
    resource = states.tmsv(params["r"], cutoff)

    runs = {}
    for p in sorted(set(params["p_values"]) | {0.0, 1.0}):
        config = teleport.TeleportConfig(resource, ChannelSpec.werner(p), params["shots"], seed=ctx.seed,
                                         workers=params["workers"])
        runs[p] = teleport.bk_teleport_average(source, config)
    f_tmsv, f_th = runs[0.0].avg_fidelity, runs[1.0].avg_fidelity

    table = Table(["p", "fidelity", "stderr", "predicted", "residual_in_stderr", "wigner_min"])
    axes = np.linspace(-6.0, 6.0, 121)
    worst = 0.0
    lost = 0.0
    for p in params["p_values"]:
        run = runs[p]
        predicted = p * f_th + (1 - p) * f_tmsv
        spread = run.stderr if run.stderr > 0 else float("inf")
        residual = abs(run.avg_fidelity - predicted) / spread
        worst = max(worst, residual)
        lost = max(lost, run.lost_mass)
        minimum = metrics.wigner_min(metrics.wigner(run.avg_output, axes, axes))
        table.add(p, run.avg_fidelity, run.stderr, predicted, residual, minimum)
    results = {"f_tmsv": f_tmsv, "f_thermal": f_th, "max_residual_in_stderr": worst}
    return Outcome({"werner_sweep": table}, results, cutoff, lost)


@experiment(
    "fvdg-bounds", "trace-distance fidelity bounds for the cat",
    "fidelity of the Werner-channel teleported cat with direct and mixture trace-distance bounds",
    (
        ParamSpec("alpha_re", float, 0.0, "real part of the cat amplitude"),
        ParamSpec("alpha_im", float, -1.5, "imaginary part of the cat amplitude"),
        ParamSpec("r", float, 1.15, "resource squeezing"),
        ParamSpec("p_values", float_list, tuple(np.round(np.linspace(0, 1, 11), 2)), "probabilities"),
        _n_max_param(),
    ),
)
def run_fvdg_bounds(params, ctx):
    alpha = complex(params["alpha_re"], params["alpha_im"])
    base = _noisy_cutoff(Cutoff(8), abs(alpha) ** 2, params["r"], ctx, params["n_max"])
    cat = states.cat_odd(alpha, base)
    (_, ideal), (_, broken) = teleport.werner_noise_branches(params["r"], ChannelSpec.werner(0.5), hbar=base.hbar)
    rho_c = teleport.effective_teleport(cat, ideal)
    rho_th = teleport.effective_teleport(cat, broken)
    td_c = metrics.trace_distance(rho_c, cat)
    td_th = metrics.trace_distance(rho_th, cat)
    table = Table(["p", "fidelity", "fvdg_lower", "fvdg_upper", "upper_valid", "mixture_lower"])
    for p in params["p_values"]:
        mixed = p * rho_th.mat + (1 - p) * rho_c.mat
        bounds = metrics.fvdg_bounds(mixed, cat)
        table.add(p, metrics.fidelity(cat, mixed), bounds.lower, bounds.upper, bounds.upper_valid,
                  metrics.fvdg_mixture_lower(p, td_th, td_c))
    lost = max(rho_c.lost_mass, rho_th.lost_mass)
    return Outcome({"fvdg_bounds": table}, {"td_tmsv": td_c, "td_thermal": td_th}, base, lost)


@experiment(
    "gkp-teleport", "GKP fidelity over the Bloch angle",
    "GKP teleportation fidelity for theta = n pi/8 through the Werner channel, with the mixture lower bound",
    (
        ParamSpec("r", float, 1.15, "resource squeezing"),
        ParamSpec("p", float, 0.1, "measurement probability of the werner channel"),
        ParamSpec("epsilon", float, 0.1, "GKP envelope regularizer"),
        ParamSpec("steps", int, 9, "number of theta values n pi/8, n = 0..steps-1"),
        _n_max_param(),
    ) + WIGNER_PARAMS,
)
def run_gkp_teleport(params, ctx):
    cutoff = _noisy_cutoff(gkp_cutoff(params["epsilon"]), 0.5 / params["epsilon"], params["r"], ctx, params["n_max"])
    p = params["p"]
    (_, ideal), (_, broken) = teleport.werner_noise_branches(params["r"], ChannelSpec.werner(0.5), hbar=cutoff.hbar)
    table = Table(["theta", "fidelity", "fidelity_tmsv", "fidelity_thermal", "mixture_lower"])
    lost = 0.0
    wigner_table = None
    for n in range(params["steps"]):
        theta = n * math.pi / 8
        code = states.gkp(GkpParams(theta, params["epsilon"]), cutoff)
        rho_c = teleport.effective_teleport(code, ideal)
        rho_th = teleport.effective_teleport(code, broken)
        mixed = p * rho_th.mat + (1 - p) * rho_c.mat
        lower = metrics.fvdg_mixture_lower(
            p, metrics.trace_distance(rho_th, code), metrics.trace_distance(rho_c, code)
        )
        table.add(theta, metrics.fidelity(code, mixed), metrics.fidelity(code, rho_c),
                  metrics.fidelity(code, rho_th), lower)
        lost = max(lost, rho_c.lost_mass, rho_th.lost_mass)
        if n == 0:
            axes = _wigner_axes(params)
            grid = metrics.wigner(DensityOperator(mixed, cutoff), axes, axes)
            wigner_table = _wigner_table(grid)
    tables = {"gkp_teleport": table}
    if wigner_table is not None:
        tables["wigner_theta0"] = wigner_table
    return Outcome(tables, {"p": p, "channel": ChannelSpec.werner(p).describe()}, cutoff, lost)


@experiment(
    "capacity-curve", "superdense-coding and classical capacities",
    "superdense-coding capacity and the thermal classical rate against squeezing",
    (
        ParamSpec("r_min", float, 0.05, "smallest squeezing"),
        ParamSpec("r_max", float, 3.0, "largest squeezing"),
        ParamSpec("points", int, 60, "number of r values"),
    ),
)
def run_capacity_curve(params, ctx):
    table = Table(["r", "nbar", "sdc_nats", "classical_nats", "sdc_bits", "classical_bits", "ratio"])
    for point in capacities.rate_curve(np.linspace(params["r_min"], params["r_max"], params["points"])):
        table.add(point.r, point.nbar, point.quantum_rate, point.classical_rate,
                  capacities.nats_to_bits(point.quantum_rate), capacities.nats_to_bits(point.classical_rate),
                  point.quantum_rate / point.classical_rate)
    threshold = capacities.advantage_threshold()
    results = {"advantage_nbar": threshold, "advantage_r": capacities.nbar_to_r(threshold)}
    return Outcome({"capacity_curve": table}, results)


@experiment(
    "pmax-curve", "tolerable measurement probability",
    "largest eavesdropper measurement probability that keeps a superdense-coding advantage",
    (
        ParamSpec("nbar_min", float, 0.5, "smallest mean photon number"),
        ParamSpec("nbar_max", float, 20.0, "largest mean photon number"),
        ParamSpec("points", int, 100, "number of nbar values"),
    ),
)
def run_pmax_curve(params, ctx):
    table = Table(["nbar", "r", "p_max", "p_max_clamped"])
    for nbar in np.linspace(params["nbar_min"], params["nbar_max"], params["points"]):
        point = capacities.rate_point(float(nbar))
        table.add(point.nbar, point.r, point.p_max, max(point.p_max, 0.0))
    threshold = capacities.advantage_threshold()
    return Outcome({"pmax_curve": table}, {"advantage_nbar": threshold, "advantage_r": capacities.nbar_to_r(threshold)})


@experiment(
    "plob", "repeaterless loss bound",
    "repeaterless rate bound of the wiretap (pure-loss) channel",
    (
        ParamSpec("eta_min", float, 0.01, "smallest transmissivity"),
        ParamSpec("eta_max", float, 0.99, "largest transmissivity"),
        ParamSpec("points", int, 99, "number of eta values"),
    ),
)
def run_plob(params, ctx):
    table = Table(["eta", "plob_bits"])
    for eta in np.linspace(params["eta_min"], params["eta_max"], params["points"]):
        table.add(float(eta), capacities.plob_rate(float(eta)))
    return Outcome({"plob": table}, {"plob_eta_0.9": capacities.plob_rate(0.9)})


GKP_PAIR_PARAMS = (
    ParamSpec("r", float, 3.2, "resource squeezing used to teleport the second mode"),
    ParamSpec("epsilon", float, 0.1, "GKP envelope regularizer"),
    ParamSpec("readout", str, Readout.BINNED.value, "logical readout", tuple(m.value for m in Readout)),
    _n_max_param(),
)


def _gkp_pair(params, ctx) -> Tuple[Cutoff, PureState]:
    cutoff = ctx.cutoff(gkp_cutoff(params["epsilon"]), params["n_max"])
    return cutoff, states.gkp_bell(params["epsilon"], cutoff)


@experiment(
    "bell-test", "CHSH values of the GKP Bell pair",
    "CHSH values of the GKP Bell pair, plain and after the logical Y rotation, through wiretapped teleportation",
    GKP_PAIR_PARAMS + (ParamSpec("losses", float_list, (0.1, 0.01), "wiretap losses 1 - eta"),),
)
def run_bell_test(params, ctx):
    cutoff, pair = _gkp_pair(params, ctx)
    readout = Readout(params["readout"])
    cases = [("noiseless", None, None), ("teleported", params["r"], ChannelSpec.identity())]
    cases += [(f"loss {loss:g}", params["r"], ChannelSpec.wiretap(1.0 - loss)) for loss in params["losses"]]
    table = Table(["case", "rotated", "XX", "XZ", "ZX", "ZZ", "S", "violates"])
    results = {}
    for label, r, channel in cases:
        for rotate in (False, True):
            outcome = gkp_logic.bell_test(pair, rotate, channel, r, readout)
            table.add(label, rotate, outcome.xx, outcome.xz, outcome.zx, outcome.zz, outcome.s, outcome.violates)
            results[f"S[{label}{', rotated' if rotate else ''}]"] = outcome.s
    return Outcome({"bell_test": table}, results, cutoff, pair.lost_mass)


@experiment(
    "tomography", "tomography of the teleported Bell pair",
    "two-qubit tomography of the teleported GKP Bell pair with PSD projection",
    GKP_PAIR_PARAMS + (ParamSpec("loss", float, 0.1, "wiretap loss 1 - eta"),),
)
def run_tomography(params, ctx):
    cutoff, pair = _gkp_pair(params, ctx)
    branches = gkp_logic.teleported_noise(params["r"], ChannelSpec.wiretap(1.0 - params["loss"]), hbar=cutoff.hbar)
    tomogram = gkp_logic.tomography_2q(pair, Readout(params["readout"]), branches)
    table = Table(["label", "expectation"])
    for label, value in sorted(tomogram.expectations.items()):
        table.add(label, value)
    ppt = tomogram.ppt
    results = {
        "bell_fidelity": gkp_logic.bell_fidelity(tomogram),
        "concurrence": tomogram.concurrence,
        "entanglement_of_formation": tomogram.entanglement_of_formation,
        "ppt_entangled": ppt.entangled,
        "log_negativity": ppt.log_negativity,
    }
    return Outcome({"tomography": table}, results, cutoff, pair.lost_mass)


WIGNER_STATES = ("vacuum", "fock", "coherent", "cat", "thermal", "gkp", "teleported-cat")


@experiment(
    "wigner", "Wigner function dump",
    "Wigner function grid (x, p, W) of a single-mode state",
    (
        ParamSpec("state", str, "cat", "state to plot", WIGNER_STATES),
        ParamSpec("alpha_re", float, 0.0, "real part of the coherent/cat amplitude"),
        ParamSpec("alpha_im", float, -1.5, "imaginary part of the coherent/cat amplitude"),
        ParamSpec("n", int, 1, "Fock level"),
        ParamSpec("nbar", float, 1.0, "thermal mean photon number"),
        ParamSpec("theta", float, 0.0, "GKP Bloch angle"),
        ParamSpec("epsilon", float, 0.1, "GKP envelope regularizer"),
        ParamSpec("r", float, 1.15, "resource squeezing (teleported-cat)"),
        ParamSpec("shots", int, 2000, "Monte-Carlo shots (teleported-cat)"),
        ParamSpec("workers", int, 1, "threads evaluating shots"),
        _n_max_param(),
    ) + CHANNEL_PARAMS + WIGNER_PARAMS,
)
def run_wigner(params, ctx):
    kind = params["state"]
    alpha = complex(params["alpha_re"], params["alpha_im"])
    results: Dict[str, Any] = {"state": kind}
    if kind == "teleported-cat":
        cutoff, _, result = _teleport_cat(params, ctx, _channel(params), params["shots"])
        rho = result.avg_output
        results["avg_fidelity"] = result.avg_fidelity
    elif kind == "gkp":
        cutoff = ctx.cutoff(gkp_cutoff(params["epsilon"]), params["n_max"])
        rho = states.gkp(GkpParams(params["theta"], params["epsilon"]), cutoff)
    else:
        cutoff = _cat_cutoff(0.0, alpha, ctx, params["n_max"])
        if kind == "thermal":
            cutoff = ctx.cutoff(auto_cutoff(nbar=params["nbar"]), params["n_max"])
            rho = states.thermal(params["nbar"], cutoff)
        elif kind == "vacuum":
            rho = states.vacuum(cutoff)
        elif kind == "fock":
            rho = states.fock(params["n"], cutoff)
        elif kind == "coherent":
            rho = states.coherent(alpha, cutoff)
        else:
            rho = states.cat_odd(alpha, cutoff)
    axes = _wigner_axes(params)
    grid = metrics.wigner(rho, axes, axes)
    results.update({
        "wigner_min": metrics.wigner_min(grid),
        "wigner_max": float(grid.values.max()),
        "integral": grid.integral(),
    })
    return Outcome({"wigner": _wigner_table(grid)}, results, cutoff, rho.lost_mass)


# ----------------------------------------------------------------------------
# Runner
# ----------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    params: Dict[str, Any] = field(default_factory=dict)
    output: str = "results"
    format: str = "csv"
    seed: int = 0
    strict: bool = False


@dataclass
class RunRecord:
    manifest: Dict[str, Any]
    manifest_path: Path
    files: List[Path]


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    return value


class ExperimentRunner:
    """Run one catalog experiment and write its data files and manifest."""

    def __init__(self, config: ExperimentConfig):
        if config.experiment not in CATALOG:
            raise ConfigError(f"unknown experiment {config.experiment!r}; try 'cvsteg list'")
        if config.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {config.format!r}")
        self.config = config
        self.experiment = CATALOG[config.experiment]
        self.params = self.experiment.resolve(config.params)
        self.context = RunContext.from_env(config.seed)
        self.output_dir = Path(config.output)

    def _write_table(self, stem: str, table: Table) -> Path:
        path = self.output_dir / f"{stem}.{self.config.format}"
        if self.config.format == "csv":
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(table.columns)
                writer.writerows([[_jsonable(v) for v in row] for row in table.rows])
        else:
            payload = {"columns": table.columns, "rows": [[_jsonable(v) for v in row] for row in table.rows]}
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=1)
        return path

    def run(self) -> RunRecord:
        logger.info("running %s (%s)", self.experiment.name, self.experiment.anchor)
        start = time.perf_counter()
        outcome = self.experiment.func(self.params, self.context)
        runtime = time.perf_counter() - start

        self.output_dir.mkdir(parents=True, exist_ok=True)
        files = [self._write_table(stem, table) for stem, table in outcome.tables.items()]
        cutoff = outcome.cutoff
        manifest = {
            "experiment": self.experiment.name,
            "anchor": self.experiment.anchor,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "seed": self.config.seed,
            "version": __version__,
            "runtime_s": runtime,
            "cutoff": None if cutoff is None else {
                "n_max": cutoff.n_max, "hbar": cutoff.hbar, "tau_norm": cutoff.tau_norm,
            },
            "nmax_override": self.context.nmax_override,
            "lost_mass": outcome.lost_mass,
            "results": {k: _jsonable(v) for k, v in outcome.results.items()},
            "files": [path.name for path in files],
        }
        manifest_path = self.output_dir / "manifest.json"
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
        logger.info("%s finished in %.2f s", self.experiment.name, runtime)

        tolerance = cutoff.tau_norm if cutoff is not None else TAU_NORM
        if self.config.strict and outcome.lost_mass > tolerance:
            raise TruncationFailure(
                f"lost mass {outcome.lost_mass:.2e} exceeds tau_norm {tolerance:.0e} "
                f"(n_max={cutoff.n_max if cutoff else 'n/a'})"
            )
        return RunRecord(manifest, manifest_path, files)


def run_experiment(config: ExperimentConfig) -> RunRecord:
    """Convenience wrapper around ExperimentRunner."""
    return ExperimentRunner(config).run()


def wigner_dump(config: ExperimentConfig) -> RunRecord:
    """Write the (x, p, W) grid of the state described by ``config.params``."""
    return run_experiment(replace(config, experiment="wigner"))
