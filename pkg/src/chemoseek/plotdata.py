"""Plot-ready column extracts from trajectory files.

Each kind mirrors one of the standard figures:

  ds-plane  reference pair (sbar, Dbar); companions: the growth curve
            sampled on a grid and the optimum marker
  ts        time profiles (t, s, y, u)
  sb-plane  state plane (s, b); companion: the invariant line s + b = s_in
  io-plane  measured input-output trace (s, u); same companions as ds-plane

Companion files share the output stem: <out>.overlay.csv / <out>.optimum.csv.
External plotters consume these CSVs; nothing is rendered here.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .engine import Trajectory

KINDS = ("ds-plane", "ts", "sb-plane", "io-plane")

_COLUMNS = {
    "ds-plane": ("sbar", "Dbar"),
    "ts": ("t", "s", "y", "u"),
    "sb-plane": ("s", "b"),
    "io-plane": ("s", "u"),
}


def _write_csv(path, header, rows):
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        rows = rows.reshape(0, len(header))
    np.savetxt(path, rows, fmt="%.17g", delimiter=",",
               header=",".join(header), comments="")


def emit_plot_data(traj_path, kind, out_path, params=None, every=1,
                   grid_points=401):
    """Write the column subset for `kind`, decimated by `every`.

    `params` (PlantParams) enables the oracle companions for the
    (s, D)-plane kinds and the conservation line for sb-plane. Returns the
    list of files written.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}, expected one of {KINDS}")
    traj = Trajectory.from_csv(traj_path)
    cols = _COLUMNS[kind]
    data = np.column_stack([traj.column(c) for c in cols]) if len(traj) else \
        np.empty((0, len(cols)))
    _write_csv(out_path, cols, data[::every])
    written = [str(out_path)]

    out = str(out_path)
    stem = out[:-4] if out.endswith(".csv") else out
    if params is not None and kind in ("ds-plane", "io-plane"):
        s = np.linspace(0.0, params.s_in, grid_points)
        mu = np.array([params.growth.mu_raw(si) for si in s])
        _write_csv(stem + ".overlay.csv", ("s", "mu"), np.column_stack([s, mu]))
        s_star, phi_star = oracle.phi_opt(params)
        _write_csv(stem + ".optimum.csv", ("s_star", "mu_star", "phi_star"),
                   [[s_star, params.growth.mu_raw(s_star), phi_star]])
        written += [stem + ".overlay.csv", stem + ".optimum.csv"]
    if params is not None and kind == "sb-plane":
        _write_csv(stem + ".line.csv", ("s", "b"),
                   [[0.0, params.s_in], [params.s_in, 0.0]])
        written.append(stem + ".line.csv")
    return written
