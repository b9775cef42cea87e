"""Legacy ASCII VTK unstructured-grid writer and a matching reader.

Floats are printed with 17 significant digits, so a write/read/write cycle
reproduces the numeric payload bitwise.
"""

import numpy as np

_CELL_TYPE = {2: 5, 3: 10}      # triangle, tetrahedron


def _fmt(x):
    return format(float(x), ".17g")


def write_vtk(path, mesh, point_data=None, title="transeig output"):
    """Write a mesh and optional per-vertex scalar fields.

    ``point_data`` maps field names to real arrays of length num_vertices.
    2D meshes are written with a zero z coordinate.
    """
    pts = np.asarray(mesh.vertices, float)
    cells = np.asarray(mesh.elements)
    if point_data:
        for name, arr in point_data.items():
            if len(arr) != len(pts):
                raise ValueError(f"field {name!r} has length {len(arr)}, "
                                 f"expected {len(pts)}")
    lines = ["# vtk DataFile Version 2.0", title, "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {len(pts)} double"]
    for p in pts:
        x, y = p[0], p[1]
        z = p[2] if len(p) > 2 else 0.0
        lines.append(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}")
    k = cells.shape[1]
    lines.append(f"CELLS {len(cells)} {len(cells) * (k + 1)}")
    for c in cells:
        lines.append(str(k) + " " + " ".join(str(int(v)) for v in c))
    lines.append(f"CELL_TYPES {len(cells)}")
    ct = _CELL_TYPE[k - 1]
    lines.extend([str(ct)] * len(cells))
    if point_data:
        lines.append(f"POINT_DATA {len(pts)}")
        for name in point_data:
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_fmt(v) for v in np.asarray(point_data[name], float))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_mode_vtk(path, mesh, u0, u, title="transmission eigenfunction"):
    """Write |u0|, |u| and |u - u0| as point scalars for one mode."""
    u0 = np.asarray(u0)
    u = np.asarray(u)
    data = {"abs_u0": np.abs(u0), "abs_u": np.abs(u), "abs_diff": np.abs(u - u0)}
    return write_vtk(path, mesh, data, title=title)


def read_vtk(path):
    """Parse a legacy ASCII VTK unstructured grid written by this module.

    Returns (points, cells, cell_types, point_data dict).
    """
    with open(path) as fh:
        tokens_lines = fh.read().splitlines()
    i = 0

    def expect(prefix):
        nonlocal i
        while i < len(tokens_lines) and not tokens_lines[i].strip():
            i += 1
        line = tokens_lines[i]
        if not line.startswith(prefix):
            raise ValueError(f"expected {prefix!r}, found {line!r} at line {i}")
        i += 1
        return line

    expect("# vtk DataFile")
    i += 1                       # title line
    expect("ASCII")
    expect("DATASET UNSTRUCTURED_GRID")
    n = int(expect("POINTS").split()[1])
    pts = np.array([[float(t) for t in tokens_lines[i + j].split()] for j in range(n)])
    i += n
    header = expect("CELLS").split()
    ne = int(header[1])
    rows = []
    for j in range(ne):
        parts = [int(t) for t in tokens_lines[i + j].split()]
        rows.append(parts[1:1 + parts[0]])
    i += ne
    cells = np.array(rows)
    expect("CELL_TYPES")
    ctypes = np.array([int(tokens_lines[i + j]) for j in range(ne)])
    i += ne
    point_data = {}
    while i < len(tokens_lines):
        line = tokens_lines[i].strip()
        if not line:
            i += 1
            continue
        if line.startswith("POINT_DATA"):
            i += 1
            continue
        if line.startswith("SCALARS"):
            name = line.split()[1]
            i += 2               # SCALARS + LOOKUP_TABLE
            vals = np.array([float(tokens_lines[i + j]) for j in range(n)])
            i += n
            point_data[name] = vals
            continue
        raise ValueError(f"unexpected line in VTK file: {line!r}")
    return pts, cells, ctypes, point_data
