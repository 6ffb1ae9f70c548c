"""Configuration parsing, sweep orchestration, CSV/manifest emission and
static SVG dispersion diagrams.

Configs are flat ``key = value`` text with ``#`` comments.  Every run
writes one CSV (fixed header, rows ordered by frequency, 17 significant
digits per numeric cell so doubles round-trip exactly) plus a manifest
recording every parameter, tolerance and truncation radius; identical
configs produce byte-identical CSVs.  The optional report path renders
matplotlib figures to static SVG files alongside the delimited output.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bandgap import Side, cascade_near_pole, find_gaps_complex, find_gaps_real
from .dispersion1d import rhs_f, solve_kappa
from .errors import (
    ConfigError,
    MissingColumn,
    NumericalError,
    ParseError,
    ValidationError,
)
from .field1d import evaluate_field, mode_coefficients
from .greens import SumControl, green_quasiperiodic
from .lattice import LatticeSpec
from .permittivity import MaterialParams, singular_frequencies
from .resonance import ParticleGeometry, find_resonances

MODES = ("sweep1d", "gaps", "cascade", "poles", "field", "latsum", "resonances")


def _fmt(x) -> str:
    """17 significant digits: round-trip exact for IEEE doubles."""
    return f"{float(x):.17g}"


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ValueError(f"not a complex number: {text!r}") from exc


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


@dataclass
class RunConfig:
    """Validated run description; one mode plus everything it needs."""

    mode: str
    material: MaterialParams
    omega_min: float = 0.01
    omega_max: float = 5.0
    omega_samples: int = 1000
    workers: int = 0                 # 0 -> all available cores
    tol: float = 1e-10
    # gaps
    gap_criterion: str = "auto"
    # cascade
    cascade_delta: float = 0.1
    cascade_side: str = "below"
    max_gaps: int = 10
    # field
    field_omega: float = 1.0
    field_samples: int = 201
    # lattice (latsum / resonances)
    generators: list[list[float]] = field(default_factory=lambda: [[1.0, 0.0], [0.0, 1.0]])
    trunc_radius: float = 6.0
    # latsum
    latsum_k: complex = 1.0 + 0.3j
    latsum_kappa: list[float] = field(default_factory=lambda: [0.0, 0.0])
    latsum_x0: list[float] = field(default_factory=lambda: [0.3, 0.2])
    latsum_x1: list[float] = field(default_factory=lambda: [0.45, 0.2])
    latsum_samples: int = 21
    # resonances
    res_kappa: list[float] = field(default_factory=lambda: [0.7, 0.3])
    delta: float = 0.05
    centers: list[list[float]] = field(default_factory=lambda: [[0.0, 0.0]])
    radii: list[float] = field(default_factory=lambda: [0.2])
    search_re: list[float] = field(default_factory=lambda: [0.9, 1.0])
    search_im: list[float] = field(default_factory=lambda: [-0.3, 0.0])
    grid_re: int = 6
    grid_im: int = 4
    quad_radial: int = 8
    quad_angular: int = 16
    res_path: str = "generic"

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


# key -> (attribute, converter); material keys handled separately.
_MATERIAL_KEYS = {"alpha", "beta", "gamma", "eps0", "mu0"}
_KEYS = {
    "mode": ("mode", str),
    "omega_min": ("omega_min", float),
    "omega_max": ("omega_max", float),
    "omega_samples": ("omega_samples", int),
    "workers": ("workers", int),
    "tol": ("tol", float),
    "gap_criterion": ("gap_criterion", str),
    "cascade_delta": ("cascade_delta", float),
    "cascade_side": ("cascade_side", str),
    "max_gaps": ("max_gaps", int),
    "field_omega": ("field_omega", float),
    "field_samples": ("field_samples", int),
    "trunc_radius": ("trunc_radius", float),
    "latsum_k": ("latsum_k", _parse_complex),
    "latsum_kappa": ("latsum_kappa", _parse_floats),
    "latsum_x0": ("latsum_x0", _parse_floats),
    "latsum_x1": ("latsum_x1", _parse_floats),
    "latsum_samples": ("latsum_samples", int),
    "res_kappa": ("res_kappa", _parse_floats),
    "delta": ("delta", float),
    "search_re": ("search_re", _parse_floats),
    "search_im": ("search_im", _parse_floats),
    "grid_re": ("grid_re", int),
    "grid_im": ("grid_im", int),
    "quad_radial": ("quad_radial", int),
    "quad_angular": ("quad_angular", int),
    "res_path": ("res_path", str),
}
_LIST_OF_POINTS_KEYS = {"generators", "centers"}
_FLOAT_LIST_KEYS = {"radii"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate flat key = value configuration text.

    Raises ParseError (with line/column) for malformed lines or unknown
    keys, ValidationError (naming the key) for invariant violations.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", line=lineno, column=1)
        key, _, value = stripped.partition("=")
        col = line.index(key.strip()) + 1 if key.strip() else 1
        key = key.strip()
        value = value.strip()
        known = key in _KEYS or key in _MATERIAL_KEYS or key in _LIST_OF_POINTS_KEYS or key in _FLOAT_LIST_KEYS
        if not known:
            raise ParseError(f"unknown key {key!r}", line=lineno, column=col)
        if not value:
            raise ParseError(f"empty value for {key!r}", line=lineno, column=col)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", line=lineno, column=col)
        raw[key] = value

    mat_kwargs = {}
    for key in _MATERIAL_KEYS & raw.keys():
        try:
            val = _parse_complex(raw[key]) if key == "alpha" else float(raw[key])
        except ValueError as exc:
            raise ValidationError(key, str(exc)) from None
        mat_kwargs[key] = val
    try:
        material = MaterialParams(**mat_kwargs)
    except ValueError as exc:
        msg = str(exc)
        offending = msg.split()[0] if msg else "material"
        raise ValidationError(offending, msg) from None

    if "mode" not in raw:
        raise ValidationError("mode", "missing (one of: " + ", ".join(MODES) + ")")
    cfg = RunConfig(mode=raw.pop("mode"), material=material)
    if cfg.mode not in MODES:
        raise ValidationError("mode", f"unknown mode {cfg.mode!r}")

    for key, value in raw.items():
        if key in _MATERIAL_KEYS:
            continue
        try:
            if key in _LIST_OF_POINTS_KEYS:
                pts = [_parse_floats(part) for part in value.split(";") if part.strip()]
                setattr(cfg, key, pts)
            elif key in _FLOAT_LIST_KEYS:
                setattr(cfg, key, _parse_floats(value))
            else:
                attr, conv = _KEYS[key]
                setattr(cfg, attr, conv(value))
        except ValueError as exc:
            raise ValidationError(key, str(exc)) from None

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not cfg.omega_min < cfg.omega_max:
        raise ValidationError("omega_min", "need omega_min < omega_max")
    if cfg.omega_samples < 2:
        raise ValidationError("omega_samples", "need >= 2 samples")
    if cfg.workers < 0:
        raise ValidationError("workers", "must be >= 0")
    if cfg.tol <= 0:
        raise ValidationError("tol", "must be > 0")
    if cfg.gap_criterion not in ("auto", "real", "complex"):
        raise ValidationError("gap_criterion", "must be auto, real or complex")
    if cfg.cascade_side not in ("below", "above"):
        raise ValidationError("cascade_side", "must be below or above")
    if cfg.cascade_delta <= 0:
        raise ValidationError("cascade_delta", "must be > 0")
    if cfg.max_gaps < 1:
        raise ValidationError("max_gaps", "must be >= 1")
    if cfg.field_samples < 2:
        raise ValidationError("field_samples", "need >= 2 samples")
    if cfg.delta <= 0:
        raise ValidationError("delta", "must be > 0")
    if len(cfg.search_re) != 2 or len(cfg.search_im) != 2:
        raise ValidationError("search_re", "search window needs two entries per axis")
    if cfg.grid_re < 1 or cfg.grid_im < 1:
        raise ValidationError("grid_re", "grid counts must be >= 1")
    if cfg.quad_radial < 2 or cfg.quad_angular < 4:
        raise ValidationError("quad_radial", "quadrature order too small")
    if cfg.res_path not in ("generic", "dilute"):
        raise ValidationError("res_path", "must be generic or dilute")
    if len(cfg.radii) != len(cfg.centers):
        raise ValidationError("radii", "needs one radius per centre")
    if cfg.trunc_radius <= 0:
        raise ValidationError("trunc_radius", "must be > 0")
    if cfg.latsum_samples < 2:
        raise ValidationError("latsum_samples", "need >= 2 samples")


# -- sweep worker (module-level for pickling) --------------------------------

def _sweep_row(args):
    mat_fields, omega = args
    p = MaterialParams(*mat_fields)
    try:
        bp = solve_kappa(p, omega)
    except NumericalError as exc:
        return (omega, None, f"{type(exc).__name__}: {exc}")
    kp = bp.kappa_plus
    return (
        omega,
        [omega, kp.real, kp.imag, abs(kp.real), abs(kp.imag),
         bp.f_value.real, bp.f_value.imag, bp.residual],
        None,
    )


def _material_fields(p: MaterialParams):
    return (p.alpha, p.beta, p.gamma, p.eps0, p.mu0)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row) + "\n")


def _write_manifest(path, cfg: RunConfig, extra: dict) -> None:
    """Key-value manifest; the timestamp is isolated on its own line."""
    lines = [f"tool_version = {__version__}"]
    items = {
        "mode": cfg.mode,
        "alpha": repr(complex(cfg.material.alpha)),
        "beta": _fmt(cfg.material.beta),
        "gamma": _fmt(cfg.material.gamma),
        "eps0": _fmt(cfg.material.eps0),
        "mu0": _fmt(cfg.material.mu0),
        "tol": _fmt(cfg.tol),
        "trunc_radius": _fmt(cfg.trunc_radius),
        "workers": str(cfg.effective_workers()),
    }
    items.update({k: str(v) for k, v in extra.items()})
    lines.extend(f"{k} = {v}" for k, v in sorted(items.items()))
    lines.append(f"timestamp = {time.strftime('%Y-%m-%dT%H:%M:%S')}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


SWEEP_HEADER = ["omega", "re_kappa_plus", "im_kappa_plus", "abs_re", "abs_im",
                "f_re", "f_im", "residual"]


def run(cfg: RunConfig, out_dir: str = ".", svg: bool = False) -> list[str]:
    """Execute the configured mode; write CSV + manifest (+ SVGs) into out_dir.

    Returns the list of written paths.  Rows are ordered by omega
    regardless of parallel execution.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{cfg.mode}.csv")
    manifest_path = os.path.join(out_dir, f"{cfg.mode}.manifest.txt")
    extra: dict = {}
    style: dict = {}

    if cfg.mode == "sweep1d":
        omegas = np.linspace(cfg.omega_min, cfg.omega_max, cfg.omega_samples)
        tasks = [(_material_fields(cfg.material), float(w)) for w in omegas]
        workers = cfg.effective_workers()
        if workers > 1 and len(tasks) >= 64:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
        else:
            results = [_sweep_row(t) for t in tasks]
        rows = [row for (_, row, err) in results if row is not None]
        skipped = [(w, err) for (w, row, err) in results if row is None]
        _write_csv(csv_path, SWEEP_HEADER, rows)
        extra.update(
            omega_min=_fmt(cfg.omega_min), omega_max=_fmt(cfg.omega_max),
            omega_samples=cfg.omega_samples, skipped_points=len(skipped),
        )
        style = _pole_style(cfg)

    elif cfg.mode == "gaps":
        criterion = cfg.gap_criterion
        if criterion == "auto":
            undamped = cfg.material.gamma == 0 and cfg.material.alpha_is_real
            criterion = "real" if undamped else "complex"
        finder = find_gaps_real if criterion == "real" else find_gaps_complex
        gaps = finder(cfg.material, cfg.omega_min, cfg.omega_max, cfg.omega_samples)
        rows = [[g.lo, g.hi, g.kind.value, g.peak_omega, g.peak_im_kappa] for g in gaps]
        _write_csv(csv_path, ["lo", "hi", "kind", "peak_omega", "peak_im_kappa"], rows)
        extra.update(criterion=criterion, omega_min=_fmt(cfg.omega_min),
                     omega_max=_fmt(cfg.omega_max), omega_samples=cfg.omega_samples,
                     n_gaps=len(gaps))
        style = _pole_style(cfg)

    elif cfg.mode == "cascade":
        side = Side.BELOW if cfg.cascade_side == "below" else Side.ABOVE
        cas = cascade_near_pole(cfg.material, cfg.cascade_delta, side, cfg.max_gaps)
        rows = [
            [i, g.lo, g.hi, s, rhs_f(cfg.material, s).real, g.peak_omega, g.peak_im_kappa]
            for i, (g, s) in enumerate(zip(cas.gaps, cas.sentinel_points))
        ]
        _write_csv(csv_path,
                   ["index", "lo", "hi", "sentinel", "f_sentinel", "peak_omega", "peak_im_kappa"],
                   rows)
        extra.update(pole=_fmt(cas.pole), side=cas.side.value,
                     cascade_delta=_fmt(cfg.cascade_delta), max_gaps=cfg.max_gaps)
        style = _pole_style(cfg)

    elif cfg.mode == "poles":
        pair = singular_frequencies(cfg.material)
        rows = [["plus", pair.omega_plus.real, pair.omega_plus.imag],
                ["minus", pair.omega_minus.real, pair.omega_minus.imag]]
        _write_csv(csv_path, ["branch", "re_omega", "im_omega"], rows)

    elif cfg.mode == "field":
        bp = solve_kappa(cfg.material, cfg.field_omega)
        coeffs = mode_coefficients(cfg.material, cfg.field_omega, bp.kappa_plus)
        xs = np.linspace(-1.0, 1.0, cfg.field_samples)
        rows = []
        for x in xs:
            u = evaluate_field(cfg.material, cfg.field_omega, bp.kappa_plus, coeffs, float(x))
            rows.append([x, u.real, u.imag])
        _write_csv(csv_path, ["x", "re_u", "im_u"], rows)
        extra.update(field_omega=_fmt(cfg.field_omega),
                     kappa=repr(bp.kappa_plus), system_residual=_fmt(coeffs.system_residual))

    elif cfg.mode == "latsum":
        spec = LatticeSpec.make(cfg.generators)
        ctl = SumControl(radius=cfg.trunc_radius, tol=cfg.tol)
        x0 = np.asarray(cfg.latsum_x0)
        x1 = np.asarray(cfg.latsum_x1)
        rows = []
        for t in np.linspace(0.0, 1.0, cfg.latsum_samples):
            x = x0 + t * (x1 - x0)
            val, est = green_quasiperiodic(spec, cfg.latsum_kappa, cfg.latsum_k, x, ctl)
            rows.append([t, *x.tolist(), val.real, val.imag, est])
        coord_cols = [f"x{i + 1}" for i in range(spec.d)]
        _write_csv(csv_path, ["t", *coord_cols, "re_g", "im_g", "tail_estimate"], rows)
        extra.update(k=repr(complex(cfg.latsum_k)), kappa=str(cfg.latsum_kappa))

    elif cfg.mode == "resonances":
        spec = LatticeSpec.make(cfg.generators)
        geom = ParticleGeometry(centers=cfg.centers, radii=cfg.radii, delta=cfg.delta)
        rect = (complex(cfg.search_re[0], cfg.search_im[0]),
                complex(cfg.search_re[1], cfg.search_im[1]))
        roots = find_resonances(
            geom, spec, cfg.material, cfg.res_kappa, cfg.delta, rect,
            grid=(cfg.grid_re, cfg.grid_im), trunc_radius=cfg.trunc_radius,
            quad_order=(cfg.quad_radial, cfg.quad_angular), path=cfg.res_path,
        )
        rows = [[z.real, z.imag] for z in roots]
        _write_csv(csv_path, ["re_omega", "im_omega"], rows)
        extra.update(delta=_fmt(cfg.delta), kappa=str(cfg.res_kappa),
                     n_roots=len(rows), path=cfg.res_path,
                     quad_order=f"({cfg.quad_radial}, {cfg.quad_angular})")

    else:  # pragma: no cover - guarded by validation
        raise ValidationError("mode", f"unhandled mode {cfg.mode}")

    _write_manifest(manifest_path, cfg, extra)
    written = [csv_path, manifest_path]
    if svg:
        written.extend(render_svg(csv_path, style))
    return written


def _pole_style(cfg: RunConfig) -> dict:
    if cfg.material.beta > 0:
        pair = singular_frequencies(cfg.material)
        return {"poles": [pair.omega_plus.real, pair.omega_minus.real]}
    return {}


# -- SVG rendering ------------------------------------------------------------

def _read_csv(path):
    with open(path, newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    body = [ln.split(",") for ln in lines[1:]]
    return header, body


def _col(header, body, name, numeric=True):
    if name not in header:
        raise MissingColumn(f"column {name!r} not present in CSV (have {header})")
    idx = header.index(name)
    vals = [row[idx] for row in body]
    return [float(v) for v in vals] if numeric else vals


def render_svg(csv_path: str, style: dict | None = None) -> list[str]:
    """Render static SVG panes for a CSV produced by `run`.

    Sweep CSVs yield one pane per plotted quantity (|Re kappa| and
    |Im kappa| against omega) with permittivity-pole real parts marked
    by crosses when provided in ``style``; gap and cascade CSVs yield a
    single pane with the gap intervals shaded.
    """
    import warnings

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    warnings.filterwarnings("ignore", message="Tight layout not applied")
    style = style or {}
    header, body = _read_csv(csv_path)
    stem = os.path.splitext(csv_path)[0]
    out: list[str] = []
    poles = style.get("poles", [])

    def finish(fig, suffix):
        path = f"{stem}.{suffix}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        out.append(path)

    if "abs_re" in header and "abs_im" in header:
        omega = _col(header, body, "omega")
        for column, label, suffix in (("abs_re", r"$|\mathrm{Re}\,\kappa|$", "re_kappa"),
                                      ("abs_im", r"$|\mathrm{Im}\,\kappa|$", "im_kappa")):
            vals = _col(header, body, column)
            fig, ax = plt.subplots(figsize=(6.0, 3.6))
            if omega:
                ax.plot(omega, vals, ".", ms=2.0, color="tab:blue")
            for idx, wp in enumerate(poles):
                (cross,) = ax.plot([wp], [0.0], "x", color="tab:red", ms=9.0, clip_on=False)
                cross.set_gid(f"pole-cross-{idx}")
            ax.set_xlabel(r"$\omega$")
            ax.set_ylabel(label)
            ax.margins(x=0.02)
            fig.tight_layout()
            finish(fig, suffix)
        return out

    if "lo" in header and "hi" in header:
        lo = _col(header, body, "lo")
        hi = _col(header, body, "hi")
        fig, ax = plt.subplots(figsize=(6.0, 2.4))
        for idx, (a, b) in enumerate(zip(lo, hi)):
            span = ax.axvspan(a, b, color="tab:orange", alpha=0.45)
            span.set_gid(f"gap-span-{idx}")
        for idx, wp in enumerate(poles):
            (cross,) = ax.plot([wp], [0.0], "x", color="tab:red", ms=9.0, clip_on=False)
            cross.set_gid(f"pole-cross-{idx}")
        ax.set_xlabel(r"$\omega$")
        ax.set_yticks([])
        if lo:
            span = max(hi) - min(lo)
            ax.set_xlim(min(lo) - 0.05 * span, max(hi) + 0.05 * span)
        fig.tight_layout()
        finish(fig, "gaps")
        return out

    if "branch" in header:
        re = _col(header, body, "re_omega")
        im = _col(header, body, "im_omega")
        fig, ax = plt.subplots(figsize=(4.0, 4.0))
        ax.plot(re, im, "x", color="tab:red", ms=9.0)
        ax.axhline(0.0, color="0.7", lw=0.8)
        ax.axvline(0.0, color="0.7", lw=0.8)
        ax.set_xlabel(r"$\mathrm{Re}\,\omega$")
        ax.set_ylabel(r"$\mathrm{Im}\,\omega$")
        fig.tight_layout()
        finish(fig, "poles")
        return out

    if "re_u" in header:
        xs = _col(header, body, "x")
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        ax.plot(xs, _col(header, body, "re_u"), label="Re u")
        ax.plot(xs, _col(header, body, "im_u"), label="Im u")
        ax.set_xlabel("x")
        ax.legend()
        fig.tight_layout()
        finish(fig, "field")
        return out

    if "re_g" in header:
        ts = _col(header, body, "t")
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        ax.plot(ts, _col(header, body, "re_g"), label="Re G")
        ax.plot(ts, _col(header, body, "im_g"), label="Im G")
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        finish(fig, "latsum")
        return out

    if "re_omega" in header and "im_omega" in header:
        re = _col(header, body, "re_omega")
        im = _col(header, body, "im_omega")
        fig, ax = plt.subplots(figsize=(4.0, 4.0))
        ax.plot(re, im, "o", color="tab:blue")
        ax.set_xlabel(r"$\mathrm{Re}\,\omega$")
        ax.set_ylabel(r"$\mathrm{Im}\,\omega$")
        fig.tight_layout()
        finish(fig, "resonances")
        return out

    raise MissingColumn(f"CSV header {header} matches no known layout")


# -- entry point ---------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blochkit",
        description="Dispersion diagrams, band gaps and subwavelength resonances "
                    "for dispersive photonic crystals.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, help="path to a key = value config file")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--workers", type=int, default=None, help="worker count override")
        sp.add_argument("--svg", action="store_true", help="also render SVG panes")
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: kind=ConfigError exit=2 msg={exc}", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(text)
        if cfg.mode != args.mode:
            raise ValidationError("mode", f"config says {cfg.mode!r}, CLI asked for {args.mode!r}")
        if args.workers is not None:
            cfg.workers = args.workers
        written = run(cfg, out_dir=args.out, svg=args.svg)
    except ConfigError as exc:
        print(f"error: kind={type(exc).__name__} exit=2 msg={exc}", file=sys.stderr)
        return 2
    except (NumericalError, ValueError) as exc:
        print(f"error: kind={type(exc).__name__} exit=3 msg={exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
