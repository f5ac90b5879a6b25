"""Command-line front end.

Usage::

    qgas algebra-verify --caps 2,3,4
    qgas discrete --spectrum levels.txt --delta 0.5 --grid -2:-0.1:20 --exact-check
    qgas occupation --delta 1 --mu 0 --grid 0:5:11
    qgas eos --delta 0 --grid 1e-3:1:7:log
    qgas virial --grid 0:1:5
    qgas blackhole-preset --delta 0.5

Every command prints one table as CSV ('#'-prefixed metadata lines, then
a header row) or as a JSON object with ``config``, ``rows`` and
``checks``.  The same options always give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

import click
import numpy as np

from . import __version__
from . import exchange_algebra as ea
from . import thermo_continuum as tc
from . import thermo_discrete as td
from .constants import REDUCED, SI, Constants
from .errors import EnumerationLimitError, QgasError
from .spectrum_io import SpectrumFileError, read_spectrum

COMMANDS = ("algebra-verify", "discrete", "occupation", "eos", "virial", "blackhole-preset")
ALGEBRA_TOL = 1e-12
VIRIAL_A2_TOL = 1e-6
VIRIAL_A3_TOL = 1e-3
CLUSTER_TOL = 1e-12

DEFAULT_GRIDS = {
    "discrete": "-2:-0.25:8",
    "occupation": "0:5:11",
    "eos": "0.001:1:7:log",
    "blackhole-preset": "0.0001:0.01:5:log",
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    scale: str = "linear"

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"grid must be start:stop:count[:log], got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"grid must be start:stop:count[:log], got {text!r}") from None
        scale = "linear"
        if len(parts) == 4:
            if parts[3] not in ("log", "linear"):
                raise ValueError(f"grid scale must be 'log' or 'linear', got {parts[3]!r}")
            scale = parts[3]
        if count < 1:
            raise ValueError("grid count must be >= 1")
        if not (math.isfinite(start) and math.isfinite(stop)):
            raise ValueError("grid bounds must be finite")
        if scale == "log" and not (start > 0 and stop > 0):
            raise ValueError("log grid needs positive bounds")
        return cls(start, stop, count, scale)

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.start]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.start, self.stop, self.count)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]


@dataclass(frozen=True)
class Caps:
    modes: int = 2
    n_max: int = 3
    n_cap: int = 4

    @classmethod
    def parse(cls, text: str) -> "Caps":
        try:
            m, n, c = (int(v) for v in text.split(","))
        except ValueError:
            raise ValueError(f"caps must be M,nmax,Ncap integers, got {text!r}") from None
        for name, v in (("M", m), ("nmax", n), ("Ncap", c)):
            if v < 1:
                raise ValueError(f"cap {name}={v} must be >= 1")
        return cls(m, n, c)


@dataclass(frozen=True)
class RunConfig:
    command: str
    delta: float = 0.5
    spectrum_file: str | None = None
    grid: GridSpec | None = None
    grid_var: str = "mu"
    units: str = "reduced"
    output: str = "csv"
    seed: int = 0
    caps: Caps = field(default_factory=Caps)
    exact_check: bool = False
    temperature: float = 1.0
    mu: float = 0.0
    mass: float = 1.0
    volume: float | None = None
    constants: Constants = REDUCED

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"--delta must lie in [0, 1], got {self.delta}")
        if self.units not in ("reduced", "SI"):
            raise ValueError("--units must be reduced or SI")
        if self.output not in ("csv", "json"):
            raise ValueError("--output must be csv or json")
        if self.grid_var not in ("mu", "n"):
            raise ValueError("--grid-var must be mu or n")
        for name in ("temperature", "mass"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"--{name} must be positive, got {v}")
        if self.volume is not None and not (math.isfinite(self.volume) and self.volume > 0):
            raise ValueError(f"--volume must be positive, got {self.volume}")
        if not math.isfinite(self.mu):
            raise ValueError("--mu must be finite")
        if self.command == "discrete" and self.spectrum_file is None:
            raise ValueError("discrete needs --spectrum")

    @property
    def beta(self) -> float:
        """Inverse temperature in the units of the spectrum energies."""
        return 1.0 / (self.constants.k * self.temperature)

    def grid_values(self) -> list[float]:
        if self.grid is not None:
            return self.grid.values()
        return GridSpec.parse(DEFAULT_GRIDS[self.command]).values()

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d["version"] = __version__
        return d


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    checks: list[dict[str, Any]] = field(default_factory=list)

    def add(self, **values):
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: values.get(c) for c in self.columns})

    def check(self, name, status, value=None, tolerance=None):
        self.checks.append({"name": name, "status": status, "value": value, "tolerance": tolerance})

    @property
    def failed(self) -> bool:
        return any(c["status"] == "fail" for c in self.checks)


def _clean(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def _cell(value) -> str:
    value = _clean(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(config: RunConfig, table: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# qgas {__version__}\n")
    buf.write(f"# command: {config.command}\n")
    buf.write(f"# config: {json.dumps(config.echo(), sort_keys=True)}\n")
    for c in table.checks:
        buf.write(f"# check: {c['name']} status={c['status']} value={_cell(c['value'])}"
                  f" tolerance={_cell(c['tolerance'])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(row[c]) for c in table.columns])
    return buf.getvalue()


def render_json(config: RunConfig, table: Table) -> str:
    doc = {
        "config": config.echo(),
        "rows": [{c: _clean(row[c]) for c in table.columns} for row in table.rows],
        "checks": [{k: _clean(v) for k, v in c.items()} for c in table.checks],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# algebra-verify
# ---------------------------------------------------------------------------


def _status(dev, tol=ALGEBRA_TOL):
    return "pass" if dev <= tol else "fail"


def cmd_algebra_verify(config: RunConfig) -> Table:
    caps = config.caps
    t = Table(["check", "params", "max_deviation", "tolerance", "status"])

    def emit(name, params, dev, status=None):
        status = status or _status(dev)
        t.add(check=name, params=params, max_deviation=dev, tolerance=ALGEBRA_TOL, status=status)
        t.check(f"{name}[{params}]", status, dev, ALGEBRA_TOL)

    rng = np.random.default_rng(config.seed)
    deltas = [0.0, 0.5, 1.0] + [float(v) for v in rng.uniform(0.0, 1.0, 3)]
    states = [ea.InternalState(d) for d in deltas]

    for N in range(1, caps.n_cap + 1):
        for d in range(1, caps.modes + 1):
            params = f"N={N},d={d}"
            try:
                Q = ea.symmetrizer_matrix(N, d)
            except EnumerationLimitError:
                emit("symmetrizer", params, None, "skipped (size limit)")
                continue
            emit("symmetrizer_idempotent", params, float(abs(Q @ Q - Q).max()))
            emit("symmetrizer_hermitian", params, float(abs(Q - Q.T).max()))
            half = d**N
            tr_plus = float(Q[:half, :half].diagonal().sum())
            tr_minus = float(Q[half:, half:].diagonal().sum())
            dev = abs(tr_plus - math.comb(d + N - 1, N)) + abs(tr_minus - math.comb(d, N))
            emit("symmetrizer_rank", params, dev)

            configs = list(ea.configs_with_total(N, d))
            vecs = [ea.symmetrized_state(ea.canonical_assignment(c), d) for c in configs]
            norm_dev = max(abs(v.weighted_norm2(s) - ea.unit_weight(v.config, s))
                           for v in vecs for s in states)
            emit("state_norm", params, norm_dev)
            ortho_dev = 0.0
            for a in vecs:
                for b in vecs:
                    for s in states:
                        expect = ea.unit_weight(a.config, s) if a.config == b.config else 0.0
                        ortho_dev = max(ortho_dev, abs(ea.weighted_overlap(a, b, s) - expect))
            emit("orthonormality", params, ortho_dev)

    basis = ea.fock_basis(caps.modes, caps.n_max, caps.n_cap)
    caps_txt = f"M={caps.modes},nmax={caps.n_max},Ncap={caps.n_cap}"
    for i in range(1, caps.modes + 1):
        emit("number_operator", f"{caps_txt},i={i}", ea.number_operator_check(i, basis))
    for sector in (1, -1):
        for i in range(1, caps.modes + 1):
            for j in range(1, caps.modes + 1):
                params = f"{caps_txt},sector={sector:+d},i={i},j={j}"
                if sector == 1 and caps.n_max < 2:
                    emit("commutator_mixed", params, None, "skipped (insufficient interior)")
                    emit("commutator_aa", params, None, "skipped (insufficient interior)")
                    continue
                cd = ea.commutator_defect(i, j, basis, sector=sector)
                emit("commutator_mixed", params, cd.defect_mixed
                     if cd.interior_mixed else None,
                     None if cd.interior_mixed else "skipped (insufficient interior)")
                emit("commutator_aa", params, cd.defect_aa)
    for i in range(1, caps.modes + 1):
        gap = ea.annihilation_convention_gap(i, basis)
        norm = float(np.sqrt((gap.multiply(gap)).sum()))
        emit("literal_annihilation_vs_adjoint", f"{caps_txt},i={i}", norm, "informational")
    return t


# ---------------------------------------------------------------------------
# discrete spectrum
# ---------------------------------------------------------------------------


def _discrete_status(spec, domain, point):
    try:
        for k, (e, _) in enumerate(spec.levels):
            td.occupation(e, point, level=k)
    except QgasError:
        return "pole"
    if not domain.contains(point.mu):
        return "inadmissible (forbidden band)"
    try:
        td.log_partition(spec, point)
    except QgasError:
        return "analytic-continuation only"
    return "ok"


def cmd_discrete(config: RunConfig) -> Table:
    try:
        spec = read_spectrum(config.spectrum_file)
    except (OSError, SpectrumFileError, ValueError) as exc:
        raise click.UsageError(f"{config.spectrum_file}: {exc}") from None
    beta, delta = config.beta, config.delta
    occ_cols = [f"occ_{k + 1}" for k in range(len(spec.levels))]
    cols = ["n_target", "mu", "beta", "delta", "status", "ln_xi", "omega", "pv", "n", "u", "s"]
    cols += occ_cols
    if config.exact_check:
        cols += ["xi_closed_form", "xi_trace_factorized", "xi_trace_operator",
                 "trace_gap", "first_divergent_order"]
    t = Table(cols)
    domain = td.admissible_mu(spec, beta, delta)

    for value in config.grid_values():
        row = {"beta": beta, "delta": delta}
        if config.grid_var == "n":
            row["n_target"] = value
            try:
                mu = td.solve_mu(spec, beta, delta, value)
            except (QgasError, ValueError) as exc:
                row["status"] = f"error: {exc}"
                t.add(**row)
                continue
        else:
            mu = value
        row["mu"] = mu
        point = td.GrandPoint(beta, mu, delta)
        status = _discrete_status(spec, domain, point)
        row["status"] = status
        if status != "pole":
            for k, (e, _) in enumerate(spec.levels):
                row[occ_cols[k]] = td.occupation(e, point)
        if status == "ok":
            rep = td.report(spec, point)
            row.update(ln_xi=rep.log_partition, omega=rep.omega, pv=rep.pressure_volume,
                       n=rep.total_number, u=rep.internal_energy, s=rep.entropy)
            if config.exact_check:
                try:
                    state = ea.InternalState(delta)
                    modes = spec.modes()
                    n_max = config.caps.n_max
                    fact = ea.grand_trace_exact(modes, beta, mu, state, n_max, "factorized")
                    exact = ea.grand_trace_exact(modes, beta, mu, state, n_max, "operator_exact")
                    cmp_ = td.compare_exact_factorized(spec, beta, mu, delta, n_max)
                    row.update(xi_closed_form=math.exp(rep.log_partition), xi_trace_factorized=fact,
                               xi_trace_operator=exact, trace_gap=cmp_.abs_diff,
                               first_divergent_order=cmp_.first_divergent_order)
                except EnumerationLimitError:
                    pass
        t.add(**row)
    return t


# ---------------------------------------------------------------------------
# occupation, eos, virial, black-hole preset
# ---------------------------------------------------------------------------


def cmd_occupation(config: RunConfig) -> Table:
    t = Table(["epsilon", "x", "occupation", "status"])
    point = td.GrandPoint(config.beta, config.mu, config.delta)
    if config.spectrum_file is not None:
        try:
            energies = [e for e, _ in read_spectrum(config.spectrum_file).levels]
        except (OSError, SpectrumFileError, ValueError) as exc:
            raise click.UsageError(f"{config.spectrum_file}: {exc}") from None
    else:
        energies = config.grid_values()
    for e in energies:
        x = point.beta * (e - point.mu)
        try:
            t.add(epsilon=e, x=x, occupation=td.occupation(e, point), status="ok")
        except QgasError:
            t.add(epsilon=e, x=x, status="pole")
    return t


def _wavelength(config: RunConfig) -> float:
    return tc.thermal_wavelength(config.mass, config.temperature, config.constants)


def _eos_rows(config: RunConfig, t: Table, values, delta, kind=None):
    lam = _wavelength(config)
    v_l3 = None if config.volume is None else config.volume / lam**3
    targets = [v * lam**3 for v in values] if config.units == "SI" else list(values)
    for value, row in zip(values, tc.isotherm(delta, targets, v_over_lambda3=v_l3)):
        out = {"density": value, "delta": delta}
        if kind is not None:
            out["kind"] = kind
        if row.point is None:
            crit = row.critical
            out["status"] = (f"condensation (critical n_lambda3={crit!r})"
                             if crit is not None else f"error: {row.error}")
        else:
            p = row.point
            total = p.excited_number + p.ground_state_number
            out.update(n_lambda3=p.n_lambda3, fugacity=p.fugacity, pressure_ratio=p.pressure_ratio,
                       ground_state_fraction=p.ground_state_number / total if total > 0 else 0.0,
                       status="ok")
        t.add(**out)


def cmd_eos(config: RunConfig) -> Table:
    t = Table(["density", "delta", "n_lambda3", "fugacity", "pressure_ratio",
               "ground_state_fraction", "status"])
    _eos_rows(config, t, config.grid_values(), config.delta)
    return t


def cmd_virial(config: RunConfig) -> Table:
    t = Table(["delta", "a2", "a3", "regime", "a2_cluster", "a3_cluster", "a2_fit", "a3_fit",
               "a2_fit_residual", "a3_fit_residual", "fit_rms"])
    deltas = config.grid.values() if config.grid is not None else [config.delta]
    for d in deltas:
        if not 0.0 <= d <= 1.0:
            raise click.UsageError(f"delta grid value {d} outside [0, 1]")
        v = tc.virial_coefficients(d)
        a2c, a3c = tc.cluster_virial(d, 3)
        fit = tc.fit_virial(d)
        r2, r3 = fit.a2 - v.a2, fit.a3 - v.a3
        t.add(delta=d, a2=v.a2, a3=v.a3, regime=v.regime, a2_cluster=a2c, a3_cluster=a3c,
              a2_fit=fit.a2, a3_fit=fit.a3, a2_fit_residual=r2, a3_fit_residual=r3,
              fit_rms=fit.residual_rms)
        t.check(f"virial_fit_a2[delta={d!r}]", _status(abs(r2), VIRIAL_A2_TOL), abs(r2), VIRIAL_A2_TOL)
        t.check(f"virial_fit_a3[delta={d!r}]", _status(abs(r3), VIRIAL_A3_TOL), abs(r3), VIRIAL_A3_TOL)
        cdev = max(abs(a2c - v.a2), abs(a3c - v.a3))
        t.check(f"cluster_mapping[delta={d!r}]", _status(cdev, CLUSTER_TOL), cdev, CLUSTER_TOL)
    return t


INTERPRETATION = {
    tc.ATTRACTION: "statistical attraction: such a black-hole gas tends to cluster",
    tc.WEAK_ATTRACTION: "weak attraction from the third virial term: clustering tendency remains",
    tc.REPULSION: "statistical repulsion: no clustering tendency",
}


def cmd_blackhole_preset(config: RunConfig) -> Table:
    t = Table(["kind", "delta", "density", "n_lambda3", "fugacity", "pressure_ratio",
               "ground_state_fraction", "a2", "a3", "regime", "interpretation", "status"])
    v = tc.virial_coefficients(config.delta)
    t.add(kind="virial", delta=config.delta, a2=v.a2, a3=v.a3, regime=v.regime,
          interpretation=INTERPRETATION[v.regime], status="ok")
    _eos_rows(config, t, config.grid_values(), config.delta, kind="eos")
    return t


DISPATCH = {
    "algebra-verify": cmd_algebra_verify,
    "discrete": cmd_discrete,
    "occupation": cmd_occupation,
    "eos": cmd_eos,
    "virial": cmd_virial,
    "blackhole-preset": cmd_blackhole_preset,
}


def run(config: RunConfig) -> tuple[str, bool]:
    """Execute ``config``; return the rendered output and whether any check failed."""
    config.validate()
    table = DISPATCH[config.command](config)
    text = render_json(config, table) if config.output == "json" else render_csv(config, table)
    return text, table.failed


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("command", type=click.Choice(COMMANDS))
@click.option("--delta", type=float, default=0.5, show_default=True, help="Fermionic weight in [0, 1].")
@click.option("--spectrum", "spectrum_file", type=click.Path(dir_okay=False), default=None,
              help="Spectrum file: 'energy [degeneracy]' per line.")
@click.option("--grid", default=None, help="start:stop:count[:log] sweep.")
@click.option("--grid-var", type=click.Choice(["mu", "n"]), default="mu", show_default=True,
              help="discrete: sweep chemical potential or target particle number.")
@click.option("--units", type=click.Choice(["reduced", "SI"]), default="reduced", show_default=True)
@click.option("--output", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--exact-check", is_flag=True, help="discrete: compare with enumerated traces.")
@click.option("--caps", default="2,3,4", show_default=True, help="M,nmax,Ncap truncation caps.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--temperature", type=float, default=1.0, show_default=True,
              help="kT in energy units (reduced) or kelvin (SI).")
@click.option("--mu", type=float, default=0.0, show_default=True, help="occupation: chemical potential.")
@click.option("--mass", type=float, default=1.0, show_default=True, help="Particle mass (reduced or kg).")
@click.option("--volume", type=float, default=None, help="Finite volume; omit for the thermodynamic limit.")
@click.option("--constants", "constants_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file overriding h and k (SI mode).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write output here instead of stdout.")
def main(command, delta, spectrum_file, grid, grid_var, units, output, exact_check, caps, seed,
         temperature, mu, mass, volume, constants_file, out_path):
    """Interpolating Bose-Fermi statistics: algebra checks and ideal-gas thermodynamics."""
    try:
        constants = REDUCED
        if units == "SI":
            constants = Constants.load(constants_file) if constants_file else SI
        config = RunConfig(
            command=command, delta=delta, spectrum_file=spectrum_file,
            grid=GridSpec.parse(grid) if grid is not None else None, grid_var=grid_var,
            units=units, output=output, seed=seed, caps=Caps.parse(caps), exact_check=exact_check,
            temperature=temperature, mu=mu, mass=mass, volume=volume, constants=constants,
        )
        config.validate()
        if command == "algebra-verify":
            ea.fock_basis(config.caps.modes, config.caps.n_max, config.caps.n_cap)
    except EnumerationLimitError as exc:
        raise click.UsageError(f"--caps {caps}: {exc}") from None
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    text, failed = run(config)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    sys.exit(1 if failed else 0)
