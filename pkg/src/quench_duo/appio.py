"""CLI entry point, config parsing, CSV/JSON dataset export and plot-script
emission.

Output is deterministic: floats are written with 17 significant digits, rows
in a fixed order, metadata keys sorted, newline endings throughout.  File
name time stamps encode the physical time (t0p7854), never wall-clock time.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BracketError, ConfigError, InvariantError, SeriesError
from .eigenstates import TwoBodyState, build_rel_eigenstate
from .observables import (
    DEFAULT_MOMENTUM_POINTS,
    Grid2D,
    momentum_distribution,
    natural_backend_report,
    natural_decomposition,
    rho1_from_field,
    rho2_from_field,
    stationary_field,
)
from .quench import (
    QuenchScenario,
    convergence_report,
    fidelity_series,
    fidelity_spectrum,
    overlap_table,
    wavefunction_t,
)
from .spectrum import spectrum_scan

__all__ = ["RunConfig", "Dataset", "parse_config", "serialize_config", "run", "emit_plot_script", "main"]

MODES = ("spectrum", "state", "quench", "evolve", "converge")
FORMATS = ("csv", "json", "plotscript")

_FLOAT_KEYS = {"g_i", "g_f", "grid_half_width", "t_start", "t_stop"}
_INT_KEYS = {"nu_i", "n_f", "basis_size", "grid_points", "t_count"}
_STR_KEYS = {"mode", "output_dir", "formats"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS

_CONVERGE_LADDER = (5, 10, 15, 20, 30, 50, 75, 100, 150, 200, 300, 500, 750, 1000)


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters; see parse_config for defaults and modes.

    For mode=spectrum the (g_i, g_f) pair is the coupling scan range, n_f the
    number of even levels and t_count the number of scan samples.
    """

    mode: str
    g_i: float = 2.0
    g_f: float = -2.0
    nu_i: int = 0
    n_f: int = 0  # 0 means mode-dependent default
    basis_size: int = 1000
    grid_points: int = 400
    grid_half_width: float = 6.0
    t_start: float = 0.0
    t_stop: float = 4.0 * math.pi
    t_count: int = 0  # 0 means mode-dependent default
    output_dir: str = "."
    formats: tuple = ("csv",)

    def grid(self) -> Grid2D:
        return Grid2D(half_width=self.grid_half_width, n_points=self.grid_points)

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_stop, self.t_count)


def _mode_defaults(mode: str, n_f: int, t_count: int) -> tuple[int, int]:
    if n_f == 0:
        n_f = {"converge": 1000, "spectrum": 4}.get(mode, 100)
    if t_count == 0:
        t_count = {"spectrum": 201, "evolve": 5}.get(mode, 801)
    return n_f, t_count


def _coerce(key: str, value: str):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse {value!r}") from None
    return value


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.mode not in MODES:
        raise ConfigError(f"key 'mode': must be one of {MODES}, got {cfg.mode!r}")
    n_f, t_count = _mode_defaults(cfg.mode, cfg.n_f, cfg.t_count)
    cfg = replace(cfg, n_f=n_f, t_count=t_count)
    if cfg.grid_points < 16:
        raise ConfigError(f"key 'grid_points': must be >= 16, got {cfg.grid_points}")
    if cfg.t_count < 1:
        raise ConfigError(f"key 't_count': must be >= 1, got {cfg.t_count}")
    if cfg.n_f < 1:
        raise ConfigError(f"key 'n_f': must be >= 1, got {cfg.n_f}")
    if cfg.basis_size < 1:
        raise ConfigError(f"key 'basis_size': must be >= 1, got {cfg.basis_size}")
    if cfg.nu_i < 0:
        raise ConfigError(f"key 'nu_i': must be >= 0, got {cfg.nu_i}")
    if not cfg.grid_half_width > 0:
        raise ConfigError(
            f"key 'grid_half_width': must be > 0, got {cfg.grid_half_width}"
        )
    if cfg.mode == "spectrum" and not cfg.g_i < cfg.g_f:
        raise ConfigError("key 'g_i': spectrum scan needs g_i < g_f")
    bad = [f for f in cfg.formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"key 'formats': unknown format(s) {bad}")
    return cfg


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse `key = value` lines with optional [section] headers.

    Section headers only group lines visually; keys live in one namespace and
    unknown keys are rejected.  overrides (e.g. CLI flags) win over file values.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        raw[key] = _coerce(key, value)
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in _ALL_KEYS:
                raise ConfigError(f"unknown key '{key}'")
            raw[key] = _coerce(key, value) if isinstance(value, str) else value
    if "mode" not in raw:
        raise ConfigError("missing required key 'mode'")
    if "formats" in raw and isinstance(raw["formats"], str):
        raw["formats"] = tuple(
            f.strip() for f in raw["formats"].split(",") if f.strip()
        )
    return _validate(RunConfig(**raw))


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of parse_config: parse_config(serialize_config(c)) == c."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "formats":
            value = ",".join(value)
        elif isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


@dataclass
class Dataset:
    """Rectangular numeric table with metadata; exported as CSV/JSON."""

    name: str
    column_names: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def _fmt(self, value) -> str:
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return format(float(value), ".17g")
        return str(value)

    def to_csv(self) -> str:
        out = []
        for key in sorted(self.metadata):
            out.append(f"# {key} = {self._fmt(self.metadata[key])}")
        out.append(",".join(self.column_names))
        for row in self.rows:
            out.append(",".join(self._fmt(v) for v in row))
        return "\n".join(out) + "\n"

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "columns": list(self.column_names),
            "metadata": {k: self._fmt(v) for k, v in sorted(self.metadata.items())},
            "rows": [[self._fmt(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"


_LINE_SCRIPT = """\
#!/usr/bin/env python3
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({csv!r}, delimiter=",", comments="#", names=True)
fig, ax = plt.subplots()
ax.plot(data[{xcol!r}], data[{ycol!r}])
ax.set_xlabel({xcol!r})
ax.set_ylabel({ycol!r})
ax.set_title({title!r})
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
"""

_STEM_SCRIPT = """\
#!/usr/bin/env python3
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({csv!r}, delimiter=",", comments="#", names=True)
fig, ax = plt.subplots()
ax.vlines(data[{xcol!r}], 0.0, data[{ycol!r}])
ax.set_xlabel({xcol!r})
ax.set_ylabel({ycol!r})
ax.set_title({title!r})
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
"""

_HEATMAP_SCRIPT = """\
#!/usr/bin/env python3
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({csv!r}, delimiter=",", comments="#", names=True)
n = int(round(len(data) ** 0.5))
x = data[{xcol!r}][:: n]
z = data[{zcol!r}].reshape(n, n)
fig, ax = plt.subplots()
im = ax.pcolormesh(x, x, z.T, shading="nearest")
ax.set_aspect("equal")
ax.set_xlabel({xcol!r})
ax.set_ylabel({ycol!r})
ax.set_title({title!r})
fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
"""

_SERIES_SCRIPT = """\
#!/usr/bin/env python3
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({csv!r}, delimiter=",", comments="#", names=True, dtype=None, encoding="utf-8")
fig, ax = plt.subplots()
keys = sorted(set(zip(data["nu"].tolist(), data["parity"].tolist())))
for nu, parity in keys:
    sel = (data["nu"] == nu) & (data["parity"] == parity)
    style = "-" if parity == "even" else "--"
    ax.plot(data["g"][sel], data["energy"][sel], style, label=f"nu={{nu}} {{parity}}")
ax.set_xlabel("g")
ax.set_ylabel("energy")
ax.set_title({title!r})
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
"""


def emit_plot_script(dataset: Dataset) -> str:
    """Standalone matplotlib script for one exported CSV (referenced relatively)."""
    csv = f"{dataset.name}.csv"
    png = f"{dataset.name}.png"
    cols = dataset.column_names
    if dataset.name.startswith(("rho1", "rho2")):
        zcol = "re" if "re" in cols else "value"
        return _HEATMAP_SCRIPT.format(
            csv=csv, png=png, xcol=cols[0], ycol=cols[1], zcol=zcol, title=dataset.name
        )
    if dataset.name == "spectrum":
        return _SERIES_SCRIPT.format(csv=csv, png=png, title=dataset.name)
    if dataset.name.startswith("fidelity_spectrum"):
        return _STEM_SCRIPT.format(
            csv=csv, png=png, xcol=cols[0], ycol=cols[1], title=dataset.name
        )
    return _LINE_SCRIPT.format(
        csv=csv, png=png, xcol=cols[0], ycol=cols[1], title=dataset.name
    )


def _stamp(t: float) -> str:
    return "t" + format(t, ".4f").replace("-", "m").replace(".", "p")


def _base_metadata(cfg: RunConfig) -> dict:
    meta = {"library_version": __version__}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "formats":
            value = ",".join(value)
        meta[f"config.{f.name}"] = value
    return meta


def _dataset_rho1(name, grid, dm, meta):
    pts = grid.points
    n = pts.size
    rows = []
    for i in range(n):
        for j in range(n):
            rows.append(
                (pts[i], pts[j], dm.matrix[i, j].real, np.imag(dm.matrix[i, j]))
            )
    return Dataset(name, ["x", "x_prime", "re", "im"], rows, meta)


def _dataset_rho2(name, grid, rho2, meta):
    pts = grid.points
    n = pts.size
    rows = []
    for i in range(n):
        for j in range(n):
            rows.append((pts[i], pts[j], rho2.values[i, j]))
    return Dataset(name, ["x1", "x2", "value"], rows, meta)


def _run_spectrum(cfg: RunConfig) -> list[Dataset]:
    table = spectrum_scan(cfg.g_i, cfg.g_f, cfg.t_count, cfg.n_f)
    meta = _base_metadata(cfg)
    rows = []
    for nu in range(cfg.n_f):
        for j, g in enumerate(table.g_values):
            rows.append((g, nu, "even", table.even_levels[nu, j]))
    for nu in range(cfg.n_f):
        for g in table.g_values:
            rows.append((g, nu, "odd", table.odd_levels[nu]))
    return [Dataset("spectrum", ["g", "nu", "parity", "energy"], rows, meta)]


def _run_state(cfg: RunConfig) -> list[Dataset]:
    grid = cfg.grid()
    state = build_rel_eigenstate(cfg.g_i, cfg.nu_i, cfg.basis_size)
    psi = stationary_field(TwoBodyState(rel=state), grid)
    dm = rho1_from_field(psi, grid)
    dec = natural_decomposition(dm)
    mom = momentum_distribution(dec, DEFAULT_MOMENTUM_POINTS)
    rho2 = rho2_from_field(psi, grid)
    meta = _base_metadata(cfg)
    meta["energy"] = state.energy
    meta["norm_A"] = state.norm_A
    meta["tail_estimate"] = state.tail
    if not state.snapped:
        report = natural_backend_report(state, grid, k_max=12)
        meta["paper_backend_max_population_diff"] = report["max_population_diff"]
        meta["paper_backend_orthonormality_deviation"] = report[
            "paper_orthonormality_deviation"
        ]
    keep = dec.populations > 1e-12
    pops = [(k, p) for k, p in enumerate(dec.populations[keep])]
    return [
        _dataset_rho1("rho1_stationary", grid, dm, meta),
        _dataset_rho2("rho2_stationary", grid, rho2, meta),
        Dataset(
            "momentum_stationary",
            ["p", "n"],
            list(zip(mom.p_points, mom.values)),
            meta,
        ),
        Dataset("natural_populations", ["k", "population"], pops, meta),
    ]


def _scenario(cfg: RunConfig) -> QuenchScenario:
    return QuenchScenario(
        g_i=cfg.g_i,
        nu_i=cfg.nu_i,
        g_f=cfg.g_f,
        n_f=cfg.n_f,
        basis_size=cfg.basis_size,
    )


def _run_quench(cfg: RunConfig) -> list[Dataset]:
    scenario = _scenario(cfg)
    table = overlap_table(scenario)
    meta = _base_metadata(cfg)
    meta["norm_sum_S"] = table.norm_sum
    meta["mean_energy"] = table.mean_energy
    times = cfg.times()
    fid = fidelity_series(table, times)
    spec = fidelity_spectrum(table)
    order = np.lexsort((spec.nu_h, spec.nu_f, spec.omega))
    spec_rows = [
        (spec.omega[i], spec.weight[i], spec.nu_f[i], spec.nu_h[i]) for i in order
    ]
    overlaps = [
        (nu_f, table.energies[nu_f], table.coeffs[nu_f], table.coeffs[nu_f] ** 2)
        for nu_f in range(scenario.n_f)
    ]
    return [
        Dataset("fidelity", ["t", "F"], list(zip(fid.times, fid.values)), meta),
        Dataset(
            "fidelity_spectrum",
            ["omega", "weight", "nu_f", "nu_h"],
            spec_rows,
            meta,
        ),
        Dataset("overlaps", ["nu_f", "energy", "coeff", "weight"], overlaps, meta),
    ]


def _run_evolve(cfg: RunConfig) -> list[Dataset]:
    scenario = _scenario(cfg)
    table = overlap_table(scenario)
    grid = cfg.grid()
    meta = _base_metadata(cfg)
    meta["norm_sum_S"] = table.norm_sum
    meta["mean_energy"] = table.mean_energy
    out = []
    for t in cfg.times():
        psi = wavefunction_t(scenario, table, grid, t)
        dm = rho1_from_field(psi, grid)
        dec = natural_decomposition(dm)
        mom = momentum_distribution(dec, DEFAULT_MOMENTUM_POINTS)
        rho2 = rho2_from_field(psi, grid)
        tmeta = dict(meta)
        tmeta["time"] = t
        stamp = _stamp(t)
        out.append(_dataset_rho1(f"rho1_{stamp}", grid, dm, tmeta))
        out.append(_dataset_rho2(f"rho2_{stamp}", grid, rho2, tmeta))
        out.append(
            Dataset(
                f"momentum_{stamp}",
                ["p", "n"],
                list(zip(mom.p_points, mom.values)),
                tmeta,
            )
        )
    return out


def _run_converge(cfg: RunConfig) -> list[Dataset]:
    scenario = _scenario(cfg)
    ladder = sorted({n for n in _CONVERGE_LADDER if n <= cfg.n_f} | {cfg.n_f})
    rows = [
        (r.n_f, r.norm_sum, r.mean_energy, r.fidelity_deviation)
        for r in convergence_report(scenario, ladder)
    ]
    meta = _base_metadata(cfg)
    meta["norm_sum_S"] = rows[-1][1]
    return [
        Dataset(
            "convergence",
            ["n_f", "S", "mean_energy", "fidelity_deviation"],
            rows,
            meta,
        )
    ]


_RUNNERS = {
    "spectrum": _run_spectrum,
    "state": _run_state,
    "quench": _run_quench,
    "evolve": _run_evolve,
    "converge": _run_converge,
}


def run(mode: str, cfg: RunConfig) -> list[Path]:
    """Execute one mode and write its datasets; partial output is removed on failure."""
    if mode not in _RUNNERS:
        raise ConfigError(f"key 'mode': unknown mode {mode!r}")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for dataset in _RUNNERS[mode](cfg):
            if "csv" in cfg.formats:
                path = out_dir / f"{dataset.name}.csv"
                path.write_text(dataset.to_csv())
                written.append(path)
            if "json" in cfg.formats:
                path = out_dir / f"{dataset.name}.json"
                path.write_text(dataset.to_json())
                written.append(path)
            if "plotscript" in cfg.formats:
                path = out_dir / f"plot_{dataset.name}.py"
                path.write_text(emit_plot_script(dataset))
                written.append(path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quench-duo",
        description="Two trapped bosons with contact interaction: spectra, "
        "eigenstates and interaction-quench dynamics.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", type=Path, help="key = value config file")
    parser.add_argument("--g-i", dest="g_i", type=float)
    parser.add_argument("--g-f", dest="g_f", type=float)
    parser.add_argument("--nu-i", dest="nu_i", type=int)
    parser.add_argument("--n-f", dest="n_f", type=int)
    parser.add_argument("--basis", dest="basis_size", type=int)
    parser.add_argument("--grid-points", dest="grid_points", type=int)
    parser.add_argument("--grid-half-width", dest="grid_half_width", type=float)
    parser.add_argument("--t-start", dest="t_start", type=float)
    parser.add_argument("--t-stop", dest="t_stop", type=float)
    parser.add_argument("--t-count", dest="t_count", type=int)
    parser.add_argument("--out", dest="output_dir")
    parser.add_argument("--format", dest="formats")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in _ALL_KEYS
        if hasattr(args, key) and getattr(args, key) is not None
    }
    overrides["mode"] = args.mode
    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text, overrides)
        written = run(cfg.mode, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (BracketError, SeriesError) as exc:
        print(f"numerical convergence error ({cfg.mode}): {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"internal invariant violation ({cfg.mode}): {exc}", file=sys.stderr)
        return 4
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
