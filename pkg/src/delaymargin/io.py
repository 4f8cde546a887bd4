"""JSON system-spec documents and report/CSV writers.

Schema (complex entries are [re, im] pairs; plain reals also accepted):

    {
      "n": 2,
      "B": [[[0.0, 1.0], [0, 0]], [[0, 0], [0.0, -1.0]]],
      "delay_ops": [{"h": -1.0, "matrix": [[...], ...]}, ...],
      "kernel": [{"a": -1.0, "b": 0.0, "samples": [matrix, ...]}, ...],
      "r": 1.0,
      "feedback": {"C": [[...], ...], "tau": 0.5}
    }

"feedback" is exclusive with "delay_ops"/"kernel": in feedback mode the
delay operator is derived as C delta_{-tau}.  Unknown fields are rejected.
"""

import json

import numpy as np

from .errors import SpecFormatError
from .model import DelayOperatorSpec, KernelTerm, SystemSpec

_SPEC_FIELDS = {"n", "B", "delay_ops", "kernel", "r", "feedback"}


def _parse_complex(entry, where):
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise SpecFormatError(f"{where}: expected a number or [re, im] pair, got {entry!r}")


def _parse_matrix(rows, n, where):
    if not isinstance(rows, list) or len(rows) != n:
        raise SpecFormatError(f"{where}: expected {n} rows")
    M = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SpecFormatError(f"{where}: row {i} must have {n} entries")
        for j, entry in enumerate(row):
            M[i, j] = _parse_complex(entry, f"{where}[{i}][{j}]")
    return M


def parse_system_spec(doc):
    """Build a SystemSpec from a parsed JSON document; strict about fields."""
    if not isinstance(doc, dict):
        raise SpecFormatError("system spec must be a JSON object")
    unknown = set(doc) - _SPEC_FIELDS
    if unknown:
        raise SpecFormatError(f"unknown fields: {sorted(unknown)}")
    try:
        n = int(doc["n"])
        B = _parse_matrix(doc["B"], n, "B")
    except KeyError as exc:
        raise SpecFormatError(f"missing required field {exc}") from exc

    if "feedback" in doc:
        if "delay_ops" in doc or "kernel" in doc:
            raise SpecFormatError("feedback mode derives the delay operator; "
                                  "delay_ops/kernel must be absent")
        fb = doc["feedback"]
        extra = set(fb) - {"C", "tau"}
        if extra:
            raise SpecFormatError(f"unknown feedback fields: {sorted(extra)}")
        C = _parse_matrix(fb["C"], n, "feedback.C")
        tau = float(fb["tau"])
        return SystemSpec.feedback(B, C, tau)

    point_terms = []
    for k, term in enumerate(doc.get("delay_ops", [])):
        extra = set(term) - {"h", "matrix"}
        if extra:
            raise SpecFormatError(f"unknown delay_ops fields: {sorted(extra)}")
        point_terms.append((float(term["h"]), _parse_matrix(term["matrix"], n, f"delay_ops[{k}]")))
    kernel_terms = []
    for k, term in enumerate(doc.get("kernel", [])):
        extra = set(term) - {"a", "b", "samples"}
        if extra:
            raise SpecFormatError(f"unknown kernel fields: {sorted(extra)}")
        samples = np.stack(
            [_parse_matrix(s, n, f"kernel[{k}].samples[{j}]") for j, s in enumerate(term["samples"])]
        )
        kernel_terms.append(KernelTerm.from_samples(float(term["a"]), float(term["b"]), samples))

    if not point_terms and not kernel_terms:
        raise SpecFormatError("need delay_ops, kernel or feedback")
    r_terms = [abs(h) for h, _ in point_terms] + [abs(kt.a) for kt in kernel_terms]
    r = float(doc.get("r", max(r_terms))) if (point_terms or kernel_terms) else None
    if r <= 0:
        r = 1.0
    phi = DelayOperatorSpec(r=r, point_terms=tuple(point_terms), kernel_terms=tuple(kernel_terms))
    return SystemSpec(n=n, B=B, phi=phi)


def _matrix_doc(M):
    M = np.asarray(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def system_spec_doc(spec):
    """JSON-ready document for a SystemSpec (inverse of parse_system_spec)."""
    doc = {"n": spec.n, "B": _matrix_doc(spec.B)}
    if spec.is_feedback:
        doc["feedback"] = {"C": _matrix_doc(spec.C), "tau": spec.tau}
        return doc
    doc["r"] = spec.r
    doc["delay_ops"] = [
        {"h": h, "matrix": _matrix_doc(Bk)} for h, Bk in spec.phi.point_terms
    ]
    if spec.phi.kernel_terms:
        doc["kernel"] = [
            {"a": kt.a, "b": kt.b, "samples": [_matrix_doc(K) for K in kt.samples]}
            for kt in spec.phi.kernel_terms
        ]
    return doc


def load_system_spec(path):
    with open(path) as fh:
        return parse_system_spec(json.load(fh))


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def rootset_csv(rootset, path):
    """RootSet CSV: re, im, residual, multiplicity."""
    with open(path, "w") as fh:
        fh.write("re,im,residual,multiplicity\n")
        for root in rootset.roots:
            fh.write(
                f"{root.lam.real:.17g},{root.lam.imag:.17g},"
                f"{root.residual:.6e},{root.multiplicity}\n"
            )


def trajectory_csv(traj, path):
    """Trajectory CSV: t, re(u_1), im(u_1), ..., norm."""
    n = traj.states.shape[1]
    with open(path, "w") as fh:
        cols = ["t"]
        for i in range(1, n + 1):
            cols += [f"re_u{i}", f"im_u{i}"]
        cols.append("norm")
        fh.write(",".join(cols) + "\n")
        norms = np.linalg.norm(traj.states, axis=1)
        for t, row, nrm in zip(traj.times, traj.states, norms):
            parts = [f"{t:.17g}"]
            for z in row:
                parts += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            parts.append(f"{nrm:.17g}")
            fh.write(",".join(parts) + "\n")
