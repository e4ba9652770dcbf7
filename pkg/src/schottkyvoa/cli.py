"""Command-line runner: ``python3 -m schottkyvoa --surface S.json --command det``.

Exit codes: 0 success, 1 precondition violation, 2 convergence failure,
3 verification failure.
"""

import argparse
import json
import sys
import warnings

import numpy as np

from . import io
from ._validation import (
    ConvergenceError,
    FactorizationError,
    SchottkyError,
    SurfaceError,
    as_complex,
)
from .correlators import (
    InsertionSet,
    fermion_generating,
    generating_rank1,
    generating_rank2,
    virasoro_1pt,
)
from .forms import (
    nu,
    omega,
    omega_third_kind,
    period_matrix,
    prime_form_K,
    symmetry_residual,
)
from .moments import MomentSystem, auto_moment_system
from .partition import (
    fock_oracle,
    lattice_partition,
    montonen_zograf,
    partition_charged,
    partition_rank1,
    partition_rank2,
)
from .schottky import cyclically_reduced_words, primitive_class_reps, reduced_words
from .verify import rel_err, run_suite, sample_domain_points

COMMANDS = (
    "period-matrix",
    "det",
    "partition",
    "omega",
    "nu",
    "prime-form",
    "third-kind",
    "correlate",
    "verify",
    "words",
)

EXIT_PRECONDITION = 1
EXIT_CONVERGENCE = 2
EXIT_VERIFY = 3


def _truncation(text):
    if text == "auto":
        return text
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("K must be a positive integer or 'auto'")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("cutoffs must be >= 1")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("tol must be positive")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="schottkyvoa",
        description="Genus-g Heisenberg partition and correlation functions on Schottky surfaces.",
    )
    parser.add_argument("--surface", required=True, help="surface JSON file")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--K", type=_truncation, default="auto", help="truncation or 'auto'")
    parser.add_argument("--tol", type=_positive_float, default=1e-12)
    parser.add_argument("--out", help="output file (default stdout)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--route", default=None, help="det: det|mz|fock; partition: rank2|rank1|charged|lattice")
    parser.add_argument("--request", help="JSON request with points, charges or options")
    parser.add_argument("--cutoff-words", type=_positive_int, default=6)
    parser.add_argument("--cutoff-power", type=_positive_int, default=40)
    parser.add_argument("--cutoff-weight", type=_positive_int, default=6)
    return parser


class _Job:
    def __init__(self, args, surface, request):
        self.args = args
        self.surface = surface
        self.request = request
        self.rng = np.random.default_rng(args.seed)
        self._system = None

    @property
    def system(self):
        if self._system is None:
            if self.args.K == "auto":
                self._system = auto_moment_system(self.surface, 8, self.args.tol)
            else:
                self._system = MomentSystem(self.surface, self.args.K)
        return self._system

    def provenance(self):
        sys_ = self._system
        return {
            "K_used": None if sys_ is None else sys_.K,
            "tol_achieved": None if sys_ is None else sys_.tol_achieved,
            "cutoffs": {
                "words": self.args.cutoff_words,
                "power": self.args.cutoff_power,
                "weight": self.args.cutoff_weight,
            },
            "seed": self.args.seed,
        }

    def points(self, key, count_key="count", default_count=3):
        if key in self.request:
            return [as_complex(p) for p in self.request[key]]
        n = int(self.request.get(count_key, default_count))
        return list(sample_domain_points(self.surface, self.rng, n))


def _cmd_period_matrix(job):
    Omega = period_matrix(job.system)
    return {
        "value": Omega,
        "symmetry_residual": symmetry_residual(Omega),
        "imag_min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (Omega.imag + Omega.imag.T)).min()),
        "route": "sewing",
    }


def _cmd_det(job):
    route = job.args.route or "det"
    det = job.system.det
    out = {"route": route}
    if route == "det":
        out["value"] = det
        return out
    if route == "mz":
        value = montonen_zograf(job.surface, job.args.cutoff_power, job.args.cutoff_words)
    elif route == "fock":
        value = 1.0 / fock_oracle(job.surface, job.args.cutoff_weight)
    else:
        raise ValueError(f"unknown det route {route!r}")
    out.update(value=value, det_route_value=det, relative_difference=rel_err(value, det))
    return out


def _cmd_partition(job):
    kind = job.args.route or job.request.get("kind", "rank2")
    system = job.system
    if kind == "rank2":
        value = partition_rank2(system)
    elif kind == "rank1":
        value = partition_rank1(system)
    elif kind == "charged":
        value = partition_charged(system, _charges(job.request["charges"]))
    elif kind == "lattice":
        value = lattice_partition(
            system,
            job.request["gram"],
            int(job.request.get("theta_cutoff", 4)),
            tol=job.args.tol,
        )
    else:
        raise ValueError(f"unknown partition kind {kind!r}")
    return {"value": value, "route": kind}


def _pairs(job):
    if "pairs" in job.request:
        return [(as_complex(x), as_complex(y)) for x, y in job.request["pairs"]]
    n = int(job.request.get("count", 3))
    pts = sample_domain_points(job.surface, job.rng, 2 * n)
    return list(zip(pts[:n], pts[n:]))


def _cmd_omega(job):
    rows = [{"x": x, "y": y, "value": omega(job.system, x, y)} for x, y in _pairs(job)]
    return {"value": rows, "route": "sewing"}


def _cmd_prime_form(job):
    rows = [{"x": x, "y": y, "value": prime_form_K(job.system, x, y)} for x, y in _pairs(job)]
    return {"value": rows, "route": "sewing"}


def _cmd_nu(job):
    g = job.surface.genus
    rows = [
        {"x": x, "value": [nu(job.system, b, x) for b in range(1, g + 1)]}
        for x in job.points("points")
    ]
    return {"value": rows, "route": "sewing"}


def _cmd_third_kind(job):
    if "p" in job.request:
        p, q = as_complex(job.request["p"]), as_complex(job.request["q"])
        xs = job.points("points")
    else:
        pts = list(sample_domain_points(job.surface, job.rng, 5))
        p, q, xs = pts[0], pts[1], pts[2:]
    rows = [{"x": x, "value": omega_third_kind(job.system, p, q, x)} for x in xs]
    return {"p": p, "q": q, "value": rows, "route": "sewing"}


def _charges(data):
    return np.array([[as_complex(c) for c in row] if isinstance(row[0], list) else as_complex(row) for row in data])


def _complex_list(data):
    return [as_complex(v) for v in data]


def _cmd_correlate(job):
    req = job.request
    kind = req.get("kind", "rank2")
    system = job.system
    if kind == "rank2":
        ins = InsertionSet(
            _complex_list(req.get("y_plus", [])),
            _complex_list(req.get("y_minus", [])),
            _complex_list(req.get("z", [])),
            np.array([[as_complex(c) for c in b] for b in req.get("beta", [])]).reshape(-1, 2),
            as_complex(req.get("z0", [0.0, 0.0])),
        )
        value = generating_rank2(system, ins, np.array([[as_complex(c) for c in a] for a in req["charges"]]))
    elif kind == "rank1":
        ins = InsertionSet(
            _complex_list(req.get("y", [])),
            (),
            _complex_list(req.get("z", [])),
            np.array(_complex_list(req.get("beta", []))),
            as_complex(req.get("z0", [0.0, 0.0])),
        )
        value = generating_rank1(system, ins, np.array(_complex_list(req["charges"])))
    elif kind == "fermion":
        value = fermion_generating(
            system,
            _complex_list(req["x"]),
            _complex_list(req["y"]),
            np.asarray(req.get("alpha_shift", [0.0] * job.surface.genus), dtype=float),
            theta_cutoff=int(req.get("theta_cutoff", 8)),
        )
    elif kind == "virasoro":
        value = virasoro_1pt(
            system, np.array([[as_complex(c) for c in a] for a in req["charges"]]), as_complex(req["z"])
        )
    else:
        raise ValueError(f"unknown correlator kind {kind!r}")
    return {"value": value, "route": kind, "z0": as_complex(req.get("z0", [0.0, 0.0]))}


def _cmd_words(job):
    rows = []
    for n in range(1, job.args.cutoff_words + 1):
        prims = [w for w in primitive_class_reps(job.surface, n) if len(w) == n]
        qs = [abs(w.moebius(job.surface).multiplier()) for w in prims]
        rows.append(
            {
                "length": n,
                "reduced": sum(1 for _ in reduced_words(job.surface, n)),
                "cyclically_reduced": sum(1 for _ in cyclically_reduced_words(job.surface, n)),
                "primitive_classes": len(prims),
                "max_abs_multiplier": max(qs) if qs else 0.0,
            }
        )
    return {"value": rows, "route": "enumeration"}


def _cmd_verify(job):
    checks = run_suite(
        job.surface,
        seed=job.args.seed,
        K=8,
        tol=job.args.tol,
        word_length=job.args.cutoff_words,
        power=job.args.cutoff_power,
        fock_weight=job.args.cutoff_weight,
    )
    for c in checks:
        print(c.line(), file=sys.stderr)
    return {
        "value": [c.as_dict() for c in checks],
        "passed": all(c.passed for c in checks),
        "route": "suite",
    }


_DISPATCH = {
    "period-matrix": _cmd_period_matrix,
    "det": _cmd_det,
    "partition": _cmd_partition,
    "omega": _cmd_omega,
    "nu": _cmd_nu,
    "prime-form": _cmd_prime_form,
    "third-kind": _cmd_third_kind,
    "correlate": _cmd_correlate,
    "verify": _cmd_verify,
    "words": _cmd_words,
}


def _fail(code, message, **extra):
    sys.stderr.write(io.dumps({"error": message, "exit_code": code, **extra}))
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        surface = io.load_surface(args.surface)
        request = {}
        if args.request:
            with open(args.request, encoding="utf-8") as fh:
                request = json.load(fh)
        job = _Job(args, surface, request)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = _DISPATCH[args.command](job)
        result.update(job.provenance())
        result["command"] = args.command
        result["branch_flags"] = sorted(
            {f"{w.category.__name__}: {w.message}" for w in caught}
        )
    except SurfaceError as exc:
        return _fail(EXIT_PRECONDITION, str(exc), violations=exc.violations)
    except (ConvergenceError, FactorizationError) as exc:
        extra = {"last_values": list(getattr(exc, "last_values", ()))}
        return _fail(EXIT_CONVERGENCE, str(exc), **extra)
    except (SchottkyError, ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(EXIT_PRECONDITION, f"{type(exc).__name__}: {exc}")
    io.write_json(result, args.out)
    if args.command == "verify" and not result["passed"]:
        return EXIT_VERIFY
    return 0


if __name__ == "__main__":
    sys.exit(main())
