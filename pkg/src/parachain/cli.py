"""Command-line driver: ``parachain <command> [options]``.

Every command accepts ``--config FILE`` (a JSON object whose keys are the
option names with dashes replaced by underscores) and ``--out DIR``.
Explicit flags override the config file, which overrides built-in defaults.
All parameters are validated before any computation starts.

Outputs are CSV files (first line a versioned ``# parachain-...`` schema
comment, then a header row) or JSON reports, plus ``manifest-<command>.json``
recording the resolved configuration, its SHA-256 hash, library versions and
wall time.  CSV bodies depend only on the configuration.

Exit codes
----------
0  success
1  a verification command found failing identities
2  invalid configuration or arguments
3  numerical non-convergence
4  resource cap exceeded (Hilbert-space dimension or memory)

The environment variable ``PARACHAIN_THREADS`` sets the number of worker
processes used for independent grid points (default 1, i.e. serial).
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import hashlib
import json
import logging
import math
import multiprocessing as mp
import os
import platform
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__

log = logging.getLogger("parachain")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_RESOURCE = 0, 1, 2, 3, 4
THREADS_ENV = "PARACHAIN_THREADS"


class ConfigError(ValueError):
    """Invalid configuration value; the message names the offending field."""


# ---------------------------------------------------------------------------
# Parameter schema
# ---------------------------------------------------------------------------


def _float_list(v) -> list[float]:
    if isinstance(v, str):
        v = [x for x in v.split(",") if x.strip()]
    if isinstance(v, (int, float)):
        v = [v]
    out = [float(x) for x in v]
    if not all(math.isfinite(x) for x in out):
        raise ValueError("values must be finite")
    return out


def _int_list(v) -> list[int]:
    if isinstance(v, str):
        v = [x for x in v.split(",") if x.strip()]
    if isinstance(v, int):
        v = [v]
    out = []
    for x in v:
        if isinstance(x, float) and not x.is_integer():
            raise ValueError(f"{x} is not an integer")
        out.append(int(x))
    return out


def _int(v) -> int:
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"{v} is not an integer")
    return int(v)


def _float(v) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("value must be finite")
    return x


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("1", "true", "yes", "on"):
        return True
    if isinstance(v, str) and v.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


@dataclass(frozen=True)
class Field:
    """One configurable parameter: converter, default, range check, help."""

    convert: Callable[[Any], Any]
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    requirement: str = ""
    help: str = ""


def _pos(v):
    return v >= 1


def _all(pred):
    return lambda vs: len(vs) > 0 and all(pred(x) for x in vs)


def _sector(v):
    return v in (0, 1, 2)


DMRG_GRID = [round(float(x), 10) for x in np.linspace(-2.0, 3.0, 13)]

SCHEMAS: dict[str, dict[str, Field]] = {
    "verify-algebra": {
        "L": Field(_int, 4, lambda v: 1 <= v <= 5, "1 <= L <= 5", "check all lengths 1..L exactly"),
    },
    "figure2": {
        "phi": Field(_float_list, [-1.0, 0.5, 2.0], _all(lambda x: x != 0), "non-empty, non-zero values", "phi values"),
        "L": Field(_int, 120, lambda v: v >= 4, ">= 4", "chain length for G and F"),
        "i": Field(_int, 0, _sector, "0, 1 or 2", "ground-state sector"),
        "L_density": Field(_int_list, list(range(2, 41)), _all(lambda x: x >= 2), "lengths >= 2", "lengths for the density difference panel"),
        "xi_grid": Field(_float_list, [-6.0, 6.0, 241], lambda v: len(v) == 3 and v[2] >= 2, "start,stop,count", "phi grid for the correlation length"),
    },
    "figure3-top": {
        "phi": Field(_float_list, [0.5, 1.0, 2.0], _all(lambda x: True), "non-empty", "phi values for the entropy panel"),
        "phi_spectrum": Field(_float, 2.0, help="phi for the entanglement-spectrum panel"),
        "L": Field(_int, 40, lambda v: v >= 2, ">= 2", "chain length"),
        "i": Field(_int, 0, _sector, "0, 1 or 2", "ground-state sector"),
    },
    "figure3-gap": {
        "phi": Field(_float_list, DMRG_GRID, _all(lambda x: True), "non-empty", "phi grid"),
        "L": Field(_int, 48, lambda v: v >= 4, ">= 4", "chain length"),
        "chi_max": Field(_int, 60, lambda v: v >= 3, ">= 3", "maximal bond dimension"),
        "sweeps": Field(_int, 40, _pos, ">= 1", "maximal number of sweeps"),
        "tol": Field(_float, 1e-6, lambda v: v > 0, "> 0", "energy change per sweep for convergence"),
        "strict": Field(_bool, False, help="treat unconverged runs as errors (exit 3)"),
    },
    "inset": {
        "phi": Field(_float_list, [1e-3], _all(lambda x: True), "non-empty", "phi values"),
        "Lmin": Field(_int, 6, lambda v: v >= 3, ">= 3", "smallest chain length"),
        "Lmax": Field(_int, 400, lambda v: v >= 3, ">= 3", "largest chain length"),
        "Lstep": Field(_int, 2, _pos, ">= 1", "step below L = 80; above it the step is 40"),
        "levels": Field(_int_list, [1, 4], _all(lambda x: x >= 0), "levels >= 0", "levels m of Delta_m"),
        "boundary": Field(_bool, False, help="include the boundary term"),
        "resolution": Field(_float, 1e-11, lambda v: v > 0, "> 0", "splittings below this are excluded from fits"),
    },
    "ed": {
        "L": Field(_int, 6, lambda v: v >= 2, ">= 2", "chain length"),
        "phi": Field(_float_list, [0.0], _all(lambda x: True), "non-empty", "phi values"),
        "k": Field(_int, 4, _pos, ">= 1", "levels per sector"),
        "boundary": Field(_bool, True, help="include the boundary term"),
        "J": Field(_float, 1.0, lambda v: v > 0, "> 0", "coupling J"),
        "method": Field(str, "auto", lambda v: v in ("auto", "dense", "iterative"), "auto|dense|iterative", "eigensolver"),
        "dim_cap": Field(_int, 3**12, _pos, ">= 1", "largest admissible Hilbert-space dimension"),
    },
    "gs-check": {
        "L": Field(_int, 6, lambda v: 1 <= v <= 12, "1 <= L <= 12", "chain length"),
        "phi": Field(_float_list, [-1.0, 0.5, 2.0], _all(lambda x: True), "non-empty", "phi values"),
        "amplitudes": Field(_bool, False, help="also export ground-state amplitudes as CSV"),
    },
    "correlators": {
        "L": Field(_int, 60, lambda v: v >= 2, ">= 2", "chain length"),
        "phi": Field(_float_list, [1.0], _all(lambda x: True), "non-empty", "phi values"),
        "i": Field(_int, 0, _sector, "0, 1 or 2", "ground-state sector"),
        "method": Field(str, "closed", lambda v: v in ("closed", "mps", "vector"), "closed|mps|vector", "evaluation path"),
    },
    "entanglement": {
        "L": Field(_int, 40, lambda v: v >= 2, ">= 2", "chain length"),
        "phi": Field(_float_list, [2.0], _all(lambda x: True), "non-empty", "phi values"),
        "i": Field(_int, 0, _sector, "0, 1 or 2", "ground-state sector"),
        "numeric": Field(_bool, False, help="also evaluate from the dense vector (L <= 10)"),
    },
    "edge-mode": {
        "L": Field(_int, 4, lambda v: 2 <= v <= 6, "2 <= L <= 6", "chain length"),
        "phi": Field(_float_list, [0.0, 0.01, 0.02, 0.04], _all(lambda x: True), "non-empty", "phi values"),
        "alphas": Field(_float_list, [0.01, 0.02, 0.04], _all(lambda x: x > 0), "positive values", "alpha values for the scaling fit"),
    },
    "dmrg": {
        "L": Field(_int, 8, lambda v: v >= 4, ">= 4", "chain length"),
        "phi": Field(_float_list, [0.5], _all(lambda x: True), "non-empty", "phi values"),
        "q": Field(_int_list, [0, 1, 2], _all(_sector), "sectors in {0,1,2}", "charge sectors"),
        "chi_max": Field(_int, 60, lambda v: v >= 3, ">= 3", "maximal bond dimension"),
        "sweeps": Field(_int, 40, _pos, ">= 1", "maximal number of sweeps"),
        "tol": Field(_float, 1e-10, lambda v: v > 0, "> 0", "energy change per sweep for convergence"),
        "excited": Field(_bool, True, help="also compute the first excited state per sector"),
        "strict": Field(_bool, False, help="treat unconverged runs as errors (exit 3)"),
    },
}

COMMON = {
    "out": Field(str, ".", help="output directory"),
    "seed": Field(_int, 0, help="seed for randomized steps"),
}


def validate(command: str, raw: dict) -> dict:
    """Resolve ``raw`` against the schema of ``command``.

    Raises
    ------
    ConfigError
        Unknown keys, unconvertible values or failed range checks.
    """
    schema = {**SCHEMAS[command], **COMMON}
    unknown = sorted(set(raw) - set(schema) - {"command"})
    if unknown:
        raise ConfigError(f"unknown field(s) for '{command}': {', '.join(unknown)}")
    out = {}
    for name, fld in schema.items():
        v = raw.get(name)
        if v is None:
            v = fld.default
        try:
            v = fld.convert(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field '{name}': {exc}") from None
        if not fld.check(v):
            raise ConfigError(f"field '{name}': value {v!r} violates requirement {fld.requirement}")
        out[name] = v
    if command == "inset" and out["Lmin"] > out["Lmax"]:
        raise ConfigError("field 'Lmin': must not exceed Lmax")
    if command == "entanglement" and out["numeric"] and out["L"] > 10:
        raise ConfigError("field 'numeric': dense evaluation needs L <= 10")
    if command == "correlators" and out["method"] == "vector" and out["L"] > 10:
        raise ConfigError("field 'method': the vector path needs L <= 10")
    return out


def load_config(path: str | Path) -> dict:
    """Read a JSON config; decoding errors are reported with their line number."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def config_hash(command: str, cfg: dict) -> str:
    body = json.dumps({"command": command, **cfg}, sort_keys=True, default=str)
    return hashlib.sha256(body.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, schema: str, header: Sequence[str], rows) -> Path:
    with path.open("w", newline="") as fh:
        fh.write(f"# parachain-{schema} v1\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


def write_json(path: Path, obj) -> Path:
    def enc(o):
        if isinstance(o, complex) or isinstance(o, np.complexfloating):
            return {"re": float(np.real(o)), "im": float(np.imag(o))}
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        return str(o)

    path.write_text(json.dumps(obj, indent=2, default=enc, sort_keys=True) + "\n")
    return path


def _workers() -> int:
    v = os.environ.get(THREADS_ENV)
    if not v:
        return 1
    try:
        n = int(v)
    except ValueError:
        raise ConfigError(f"environment variable {THREADS_ENV}: {v!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"environment variable {THREADS_ENV}: must be >= 1")
    return n


def pmap(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """Map ``fn`` over ``items`` in grid order, optionally in worker processes."""
    workers = _workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    # one BLAS thread per worker; spawned children read these on import
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")
    ctx = mp.get_context("spawn")
    with cf.ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify_algebra(cfg: dict, out: Path) -> tuple[list[Path], int, dict]:
    from .identities import run_checks

    res, elapsed = run_checks(range(1, cfg["L"] + 1))
    rows, failed = [], 0
    for L, checks in res.items():
        for c in checks:
            rows.append((L, c.name, c.instances, c.failures, "yes" if c.informational else "no", "pass" if c.passed else "FAIL"))
            if not c.informational:
                failed += c.failures
    width = max(len(r[1]) for r in rows)
    for r in rows:
        note = " (expected: documents a sign variant)" if r[4] == "yes" else ""
        print(f"L={r[0]}  {r[1]:<{width}}  {r[5]:<4}  {r[2] - r[3]}/{r[2]}{note}")
    print(f"{'all identities hold' if failed == 0 else f'{failed} failing instance(s)'} ({elapsed:.2f} s)")
    p = write_csv(out / "algebra.csv", "algebra", ["L", "identity", "instances", "failures", "informational", "status"], rows)
    return [p], (EXIT_OK if failed == 0 else EXIT_CHECK_FAILED), {"failures": failed}


def _figure2_point(args):
    phi, L, i, Ls = args
    from . import analytics as an

    G = [(phi, L, e, an.corr_G(L, phi, i, e)) for e in range(1, L + 1)]
    F = [(phi, L, e, an.F_func(L, phi, i, e)) for e in range(1, L + 1)]
    dens = [(phi, m, an.density(m, phi, 0), an.density(m, phi, 2)) for m in Ls]
    return G, F, dens


def cmd_figure2(cfg: dict, out: Path):
    from . import analytics as an

    i = cfg["i"]
    pts = pmap(_figure2_point, [(phi, cfg["L"], i, cfg["L_density"]) for phi in cfg["phi"]])
    G_rows, F_rows, d_rows = [], [], []
    for G, F, dens in pts:
        G_rows += [(p, L, e, z.real, z.imag, abs(z)) for p, L, e, z in G]
        F_rows += [(p, L, e, abs(z)) for p, L, e, z in F]
        d_rows += [(p, m, a, b, abs(a - b), an.n_of_phi(p)) for p, m, a, b in dens]
    a, b, n = cfg["xi_grid"]
    xi_rows = [(float(p), an.xi(float(p))) for p in np.linspace(a, b, int(n))]
    files = [
        write_csv(out / "figure2_G.csv", "figure2-G", ["phi", "L", "ell", "re_G", "im_G", "abs_G"], G_rows),
        write_csv(out / "figure2_density.csv", "figure2-density", ["phi", "L", "n_0", "n_2", "abs_diff", "n_bulk"], d_rows),
        write_csv(out / "figure2_xi.csv", "figure2-xi", ["phi", "xi"], xi_rows),
        write_csv(out / "figure2_F.csv", "figure2-F", ["phi", "L", "ell", "abs_F"], F_rows),
    ]
    return files, EXIT_OK, {}


def cmd_figure3_top(cfg: dict, out: Path):
    from . import analytics as an

    L, i = cfg["L"], cfg["i"]
    phi_s = cfg["phi_spectrum"]
    spec_rows = []
    for ell in range(1, L):
        lam, _ = an.ent_spectrum(L, phi_s, i, ell)
        spec_rows.append((phi_s, L, i, ell, *lam))
    S_rows = []
    for phi in cfg["phi"]:
        for ell in range(1, L):
            S_rows.append((phi, L, i, ell, an.ent_spectrum(L, phi, i, ell)[1]))
    files = [
        write_csv(out / "figure3_spectrum.csv", "figure3-spectrum", ["phi", "L", "i", "ell", "lambda_0", "lambda_1", "lambda_2"], spec_rows),
        write_csv(out / "figure3_entropy.csv", "figure3-entropy", ["phi", "L", "i", "ell", "S"], S_rows),
    ]
    return files, EXIT_OK, {}


def _gap_point(args):
    from .dmrg import dmrg_gap

    phi, L, chi, sweeps, tol, strict = args
    return dmrg_gap(L, phi, chi, sweeps, tol=tol, strict=strict)


def cmd_figure3_gap(cfg: dict, out: Path):
    from .dmrg import write_gap_csv

    args = [(phi, cfg["L"], cfg["chi_max"], cfg["sweeps"], cfg["tol"], cfg["strict"]) for phi in cfg["phi"]]
    res = pmap(_gap_point, args)
    for r in res:
        print(f"phi={r.phi:+.4f}  gap={r.gap:.8f}  max_trunc={r.max_truncation:.1e}  last_dE={r.max_energy_change:.1e}  ({r.wall_time:.1f} s)")
    p = write_gap_csv(res, out / "figure3_gap.csv")
    return [p], EXIT_OK, {"min_gap": min(r.gap for r in res)}


def _inset_Ls(cfg) -> list[int]:
    lo, hi, step = cfg["Lmin"], cfg["Lmax"], cfg["Lstep"]
    Ls = list(range(lo, min(hi, 80) + 1, step))
    Ls += [L for L in range(80, hi + 1, 40) if L > (Ls[-1] if Ls else 0)]
    return sorted(set(Ls))


def _inset_point(args):
    from .domainwall import dw_delta_scaling

    phi, Ls, levels, boundary = args
    return dw_delta_scaling(phi, Ls, levels=levels, boundary=boundary)


def cmd_inset(cfg: dict, out: Path):
    from .domainwall import fit_scaling, write_scaling_csv

    Ls = _inset_Ls(cfg)
    rows = []
    for r in pmap(_inset_point, [(phi, Ls, cfg["levels"], cfg["boundary"]) for phi in cfg["phi"]]):
        rows += r
    fits = []
    for phi in cfg["phi"]:
        for m in cfg["levels"]:
            f = fit_scaling([r for r in rows if r.phi == phi], m, resolution=cfg["resolution"])
            fits.append(
                {
                    "phi": phi,
                    "m": m,
                    "points_above_resolution": f.n_resolved,
                    "exponential": None if f.exponential is None else f.exponential.__dict__,
                    "power_law": None if f.power_law is None else f.power_law.__dict__,
                }
            )
    files = [write_scaling_csv(rows, out / "inset.csv"), write_json(out / "inset_fits.json", fits)]
    return files, EXIT_OK, {}


def cmd_ed(cfg: dict, out: Path):
    from .model import ModelParams, build_H
    from .spectra import spectrum_table, write_spectrum_csv

    tables = []
    for phi in cfg["phi"]:
        p = ModelParams.on_solvable_line(cfg["L"], phi, cfg["J"], cfg["boundary"])
        H = build_H(p, dim_cap=cfg["dim_cap"]).total
        meta = dict(L=p.L, phi=phi)
        tables.append(spectrum_table(H, cfg["k"], method=cfg["method"], meta=meta))
    p = write_spectrum_csv(tables, out / "spectrum.csv")
    return [p], EXIT_OK, {}


def cmd_gs_check(cfg: dict, out: Path):
    from .groundstate import build_gs_vector, export_amplitudes
    from .model import build_parent

    L = cfg["L"]
    rows, files = [], []
    for phi in cfg["phi"]:
        Hp = build_parent(L, phi) if L <= 8 else None
        for i in range(3):
            gs = build_gs_vector(L, phi, i)
            v = gs.full_vector()
            mps = gs.mps.normalized_amplitudes() if L <= 12 else None
            fac = gs.factorized.vector() if L <= 10 else None
            f_mps = abs(np.vdot(v, mps)) ** 2 if mps is not None else math.nan
            f_fac = abs(np.vdot(v, fac)) ** 2 if fac is not None else math.nan
            ann = float(np.linalg.norm(Hp @ v)) if Hp is not None else math.nan
            rows.append((L, phi, i, gs.norm_const, f_mps, f_fac, ann))
            if cfg["amplitudes"]:
                files.append(export_amplitudes(gs, out / f"amplitudes_L{L}_phi{phi}_i{i}.csv"))
    files.insert(
        0,
        write_csv(
            out / "gs_check.csv",
            "gs-check",
            ["L", "phi", "i", "norm_constant", "fidelity_mps", "fidelity_factorized", "parent_residual"],
            rows,
        ),
    )
    return files, EXIT_OK, {}


def cmd_correlators(cfg: dict, out: Path):
    from . import analytics as an

    L, i, method = cfg["L"], cfg["i"], cfg["method"]
    ells = list(range(1, L + 1))
    G_rows, F_rows = [], []
    for phi in cfg["phi"]:
        if method == "closed":
            G = [an.corr_G(L, phi, i, e) for e in ells]
            F = [an.F_func(L, phi, i, e) for e in ells]
        else:
            G = list(an.corr_G_numeric(L, phi, i, ells, method=method))
            F = list(an.F_numeric(L, phi, i, ells, method=method))
        G_rows += [(phi, L, i, e, complex(z).real, complex(z).imag) for e, z in zip(ells, G)]
        F_rows += [(phi, L, i, e, complex(z).real, complex(z).imag) for e, z in zip(ells, F)]
    files = [
        write_csv(out / "correlator_G.csv", "correlator-G", ["phi", "L", "i", "ell", "re", "im"], G_rows),
        write_csv(out / "correlator_F.csv", "correlator-F", ["phi", "L", "i", "ell", "re", "im"], F_rows),
    ]
    return files, EXIT_OK, {}


def cmd_entanglement(cfg: dict, out: Path):
    from . import analytics as an

    L, i = cfg["L"], cfg["i"]
    rows = []
    for phi in cfg["phi"]:
        for ell in range(1, L):
            lam, S = an.ent_spectrum(L, phi, i, ell)
            row = [phi, L, i, ell, *lam, S]
            if cfg["numeric"]:
                row.append(an.ent_spectrum_numeric(L, phi, i, ell)[1])
            rows.append(row)
    header = ["phi", "L", "i", "ell", "lambda_0", "lambda_1", "lambda_2", "S"] + (["S_numeric"] if cfg["numeric"] else [])
    return [write_csv(out / "entanglement.csv", "entanglement", header, rows)], EXIT_OK, {}


def cmd_edge_mode(cfg: dict, out: Path):
    from .edgemode import edge_report

    rep = edge_report(cfg["L"], cfg["phi"], cfg["alphas"])
    sc = rep["alpha_scaling"]
    print(f"alpha scaling slopes: cube {sc['cube_slope']:.3f}, square {sc['square_slope']:.3f}")
    print(f"v_j eigen residuals: {max(rep['vj']['eigen_residuals']):.2e}")
    return [write_json(out / "edge_mode.json", rep)], EXIT_OK, {}


def _dmrg_point(args):
    from .dmrg import dmrg_excited, dmrg_ground, solvable_mpo

    phi, L, q, chi, sweeps, tol, excited, strict, seed = args
    mpo = solvable_mpo(L, phi)
    g = dmrg_ground(L, phi, q, chi, sweeps, tol=tol, strict=strict, mpo=mpo, seed=seed + q)
    row = [phi, L, chi, q, g.energy, math.nan, g.max_truncation, len(g.sweep_log)]
    if excited:
        e = dmrg_excited(g, L, phi, chi, sweeps, tol=tol, strict=strict, mpo=mpo, seed=seed + 10 + q)
        row[5] = e.energy
        row[6] = max(row[6], e.max_truncation)
    return row


def cmd_dmrg(cfg: dict, out: Path):
    args = [
        (phi, cfg["L"], q, cfg["chi_max"], cfg["sweeps"], cfg["tol"], cfg["excited"], cfg["strict"], cfg["seed"])
        for phi in cfg["phi"]
        for q in cfg["q"]
    ]
    rows = pmap(_dmrg_point, args)
    header = ["phi", "L", "chi_max", "q", "E0", "E1", "max_truncation_error", "sweeps"]
    return [write_csv(out / "dmrg.csv", "dmrg", header, rows)], EXIT_OK, {}


COMMANDS = {
    "verify-algebra": (cmd_verify_algebra, "exact check of every operator identity"),
    "figure2": (cmd_figure2, "G_i, density difference, xi(phi) and F_i data"),
    "figure3-top": (cmd_figure3_top, "entanglement spectrum and entropy versus the cut"),
    "figure3-gap": (cmd_figure3_gap, "DMRG gap along the solvable line"),
    "inset": (cmd_inset, "domain-wall scaling of the triplet splittings"),
    "ed": (cmd_ed, "sector-resolved exact diagonalisation"),
    "gs-check": (cmd_gs_check, "ground-state representations and parent annihilation"),
    "correlators": (cmd_correlators, "G_i(ell) and F_i(ell) profiles"),
    "entanglement": (cmd_entanglement, "entanglement spectrum and entropy"),
    "edge-mode": (cmd_edge_mode, "perturbative edge-mode report"),
    "dmrg": (cmd_dmrg, "sector ground (and excited) energies from DMRG"),
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parachain", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, text) in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", help="JSON file with option values")
        for key, fld in {**SCHEMAS[name], **COMMON}.items():
            flag = "--" + key.replace("_", "-")
            kind = fld.convert
            if kind is _bool:
                sp.add_argument(flag, dest=key, default=None, action=argparse.BooleanOptionalAction, help=fld.help)
            else:
                sp.add_argument(flag, dest=key, default=None, help=f"{fld.help} (default: {fld.default})")
    return ap


def _versions() -> dict:
    import mpmath
    import scipy

    return {
        "parachain": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def run(command: str, raw: dict) -> int:
    """Validate ``raw`` for ``command``, execute it and write the manifest."""
    from .dmrg import DMRGConvergenceError
    from .operators import DimensionCapError
    from .spectra import ConvergenceError

    try:
        cfg = validate(command, raw)
        _workers()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    fn = COMMANDS[command][0]
    try:
        files, code, summary = fn(cfg, out)
    except (ConvergenceError, DMRGConvergenceError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DimensionCapError, MemoryError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    manifest = {
        "command": command,
        "config": cfg,
        "config_sha256": config_hash(command, cfg),
        "versions": _versions(),
        "started_utc": started,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "workers": _workers(),
        "outputs": [p.name for p in files],
        "exit_code": code,
        "summary": summary,
    }
    write_json(out / f"manifest-{command}.json", manifest)
    for p in files:
        print(f"wrote {p}")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    raw: dict = {}
    if args.config:
        try:
            raw = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if raw.get("command", args.command) != args.command:
            print(f"config error: config is for '{raw['command']}', not '{args.command}'", file=sys.stderr)
            return EXIT_CONFIG
    for key in {**SCHEMAS[args.command], **COMMON}:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    return run(args.command, raw)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
