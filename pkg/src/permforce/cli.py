"""Command-line entry points.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from fractions import Fraction
from importlib import metadata
from math import comb
from pathlib import Path

import numpy as np

from . import certify as cert
from . import exceptional as exc
from .linalg import float_eigenvalues, format_rational, inertia
from .permuton import StepPermuton, density_in_step_permuton, pattern_frequencies
from .perms import PermutationError, dihedral_orbit, as_permutation, enumerate_Sk, parse_permutation, pattern_density_perm
from .perturbation import h_gradient_at_zero, h_hessian_at_zero, paper_layout, quadratic_form_matrix
from .report import Section, jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SECTIONS = ("enumeration", "trichotomy", "certificates", "exceptional", "appendix")


class UsageError(Exception):
    pass


def _quad(text: str) -> list:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise UsageError(f"--quad needs four comma-separated permutations, got {text!r}")
    return [parse_permutation(p) for p in parts]


def _signs(text: str | None):
    if text is None:
        return None
    if text in cert.SIGN_PATTERNS:
        return text
    try:
        vals = [Fraction(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--signs must be ++++, ++-- or four rationals, got {text!r}") from None
    if len(vals) != 4:
        raise UsageError("--signs needs four coefficients")
    return vals


def load_permuton(spec: str) -> StepPermuton:
    """``uniformK`` or a JSON file with keys ``k`` and ``A``."""
    if spec.startswith("uniform"):
        try:
            return StepPermuton.uniform(int(spec[len("uniform"):] or 1))
        except ValueError:
            raise UsageError(f"bad permuton {spec!r}") from None
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"permuton file {spec!r} not found")
    return StepPermuton.from_json(json.loads(path.read_text()))


def _emit(obj, path: str | None) -> None:
    text = json.dumps(jsonable(obj), indent=1)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "python": platform.python_version(), "numpy": np.__version__}


def run_report(command: str, inputs: dict, sections: list[Section], seeds=None, wall: float = 0.0, extra=None) -> dict:
    out = {
        "command": command,
        "inputs": jsonable(inputs),
        "pass": all(s.passed for s in sections),
        "sections": [s.to_json() for s in sections],
        "seeds": list(seeds or []),
        "versions": versions(),
        "timing": {"wall_seconds": round(wall, 3)},
    }
    if extra:
        out.update(jsonable(extra))
    return out


# -- subcommands ---------------------------------------------------------------------


def cmd_density(a) -> int:
    sigma = parse_permutation(a.sigma)
    if a.perm:
        value = pattern_density_perm(sigma, parse_permutation(a.perm))
    elif a.permuton:
        value = density_in_step_permuton(sigma, load_permuton(a.permuton))
    else:
        raise UsageError("give --perm or --permuton")
    print(format_rational(value))
    return EXIT_OK


def cmd_gradient(a) -> int:
    g = h_gradient_at_zero(a.sigma, a.n)
    if a.json:
        _emit({"sigma": a.sigma, "n": a.n, "gradient": g}, a.json)
    elif a.paper_layout:
        print(paper_layout(g))
    else:
        for t, v in enumerate(g, 1):
            print(t, format_rational(v))
    return EXIT_OK


def cmd_hessian(a) -> int:
    if a.quad:
        perms = _quad(a.quad)
        signs = _signs(a.signs) or "++++"
        coeffs = cert.SIGN_PATTERNS[signs] if isinstance(signs, str) else signs
        M = quadratic_form_matrix(perms, coeffs, a.n)
        label = "quadratic form (1/2) sum alpha_i H_i"
    else:
        if not a.sigma:
            raise UsageError("give --sigma or --quad")
        M = h_hessian_at_zero(a.sigma, a.n)
        label = "Hessian"
    inert = inertia(M)
    if a.json:
        _emit({"matrix": M, "inertia": inert, "eigenvalues": float_eigenvalues(M)}, a.json)
        return EXIT_OK
    print(f"# {label}, n={a.n}, inertia {inert.as_tuple()}")
    for row in M.tolist():
        print(" ".join(format_rational(v) for v in row))
    if a.eigenvalues:
        print("# eigenvalues " + " ".join(f"{x:.2f}" for x in float_eigenvalues(M)))
    return EXIT_OK


def cmd_certify(a) -> int:
    perms = _quad(a.quad)
    signs = _signs(a.signs)
    try:
        if a.auto_n:
            ev = cert.auto_certify(perms, signs)
        else:
            ev = cert.certify_non_forcing(perms, a.n, signs)
    except cert.CertificateError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    print(ev.summary())
    if a.json:
        _emit(ev, a.json)
    return EXIT_OK if ev.verdict != cert.INCONCLUSIVE else EXIT_FAIL


def enumeration_section() -> Section:
    sec = Section("enumeration")
    e = cert.enumerate_allone_quadruples()
    sec.check_equal("latin_squares", e.latin_squares, 576)
    sec.check_equal("allone/unordered_quadruples", e.quadruples, 24)
    listed = cert.listed_allone_quadruples()
    for i, q in enumerate(listed):
        sec.add(f"allone/{i + 1}/{','.join(map(str, q))}", tuple(sorted(q)) in e.classes,
                tuple(sorted(q)) in e.classes, True)
    sec.check_equal("allone/classes", [list(map(str, c)) for c in e.classes], [sorted(map(str, q)) for q in listed])
    z = cert.enumerate_zerocombo_quadruples()
    zl = cert.listed_zerocombo_quadruples()
    for i, q in enumerate(zl):
        sec.add(f"zero/{i + 1}/{','.join(map(str, q))}", tuple(q) in z, tuple(q) in z, True)
    sec.check_equal("zero/classes", [list(map(str, c)) for c in z], [list(map(str, q)) for q in zl])
    return sec


def cmd_enumerate(a) -> int:
    sec = enumeration_section()
    if a.json:
        _emit(run_report("enumerate", {}, [sec]), a.json)
    else:
        e = cert.enumerate_allone_quadruples()
        print(f"Latin squares: {e.latin_squares}; unordered all-one quadruples: {e.quadruples}; classes: {len(e.classes)}")
        for q in e.classes:
            print("  all-one  " + " ".join(map(str, q)))
        for q in cert.enumerate_zerocombo_quadruples():
            print(f"  zero     {q[0]} {q[1]} | {q[2]} {q[3]}")
        print(sec.summary())
    return EXIT_OK if sec.passed else EXIT_FAIL


def exceptional_sections(case_id: int, mc_trials: int = 0, seed: int = 0) -> tuple[list[Section], exc.WitnessBundle, list]:
    polys = exc.check_displayed_polynomials(case_id)
    lemmas = exc.verify_lemma_facts(case_id)
    sym = exc.check_symmetry_claims(case_id)
    bundle = exc.emit_witness(case_id)
    sol = bundle.solved
    w = Section(f"case{case_id}/witness")
    tol = Fraction(1, 10**12)
    w.add(f"case{case_id}/enclosure_width", max(sol.t_enclosure[1] - sol.t_enclosure[0], sol.s_enclosure[1] - sol.s_enclosure[0]) <= Fraction(1, 2**40),
          [sol.s_enclosure, sol.t_enclosure])
    w.add(f"case{case_id}/residuals", sol.max_residual <= tol, sol.residuals, "<= 1e-12")
    w.add(f"case{case_id}/nonuniform", bundle.nonuniform_cell[2] != Fraction(1, bundle.permuton.k), bundle.nonuniform_cell)
    for p, d in bundle.densities.items():
        w.add(f"case{case_id}/density/{p}", abs(d - exc.TARGET) <= tol, d, "1/24 +- 1e-12",
              note=f"deviation {float(d - exc.TARGET):.3e}")
    if mc_trials:
        freqs = pattern_frequencies(bundle.permuton, 4, mc_trials, seed)
        for p in bundle.densities:
            f = freqs.get(p, 0) / mc_trials
            se = (float(exc.TARGET) * (1 - float(exc.TARGET)) / mc_trials) ** 0.5
            w.add(f"case{case_id}/mc/{p}", abs(f - 1 / 24) <= 5 * se, f, "1/24 +- 5 stderr",
                  note=f"z = {(f - 1 / 24) / se:.2f}")
    return [polys, lemmas.section, sym, w], bundle, lemmas.errata


def cmd_exceptional(a) -> int:
    sections, bundle, errata = exceptional_sections(a.case, a.mc_trials, a.seed)
    for s in sections:
        print(s.summary())
        for item in s.failures():
            print(f"  FAIL {item.id}: {item.note or item.value}")
    for e in errata:
        print(f"  note {e.id}: {e.note}")
    sol = bundle.solved
    print(f"s = {float(sol.s):.15f}, t = {float(sol.t):.15f}, max residual {float(sol.max_residual):.3e}")
    if a.emit:
        _emit(bundle, a.emit)
    if a.report:
        _emit(run_report("exceptional", {"case": a.case, "mc_trials": a.mc_trials}, sections,
                         seeds=[a.seed] if a.mc_trials else [], extra={"errata": errata}), a.report)
    return EXIT_OK if all(s.passed for s in sections) else EXIT_FAIL


def cmd_sample(a) -> int:
    P = load_permuton(a.permuton)
    if a.m < 1 or a.trials < 1:
        raise UsageError("--m and --trials must be positive")
    freqs = pattern_frequencies(P, a.m, a.trials, a.seed)
    rows = []
    worst = 0.0
    for sigma in enumerate_Sk(a.m):
        exact = density_in_step_permuton(sigma, P) if a.m <= 5 else None
        count = freqs.get(sigma, 0)
        f = count / a.trials
        z = None
        if exact is not None:
            p = float(exact)
            se = (p * (1 - p) / a.trials) ** 0.5
            z = (f - p) / se if se else (0.0 if f == p else float("inf"))
            worst = max(worst, abs(z))
        rows.append({"sigma": str(sigma), "count": count, "frequency": f,
                     "exact": None if exact is None else format_rational(exact), "z": z})
    if a.json:
        _emit({"permuton": a.permuton, "m": a.m, "trials": a.trials, "seed": a.seed, "rows": rows,
               "max_abs_z": worst}, a.json)
    else:
        for r in rows:
            z = "" if r["z"] is None else f"{r['z']:+.2f}"
            print(f"{r['sigma']:>8} {r['count']:>10} {r['frequency']:.6f} {r['exact'] or '':>12} {z}")
        print(f"max |z| = {worst:.2f}")
    return EXIT_FAIL if a.check and worst > 5 else EXIT_OK


def trichotomy_section() -> Section:
    sec = Section("trichotomy")
    counts = cert.trichotomy_scan()
    allone = set().union(*(dihedral_orbit(q) for q in cert.listed_allone_quadruples()))
    zero = set().union(*(dihedral_orbit(q) for q in cert.listed_zerocombo_quadruples()))
    expected = {cert.ALL_ONE: len(allone), cert.ZERO_COMBO: len(zero),
                cert.INDEPENDENT: comb(24, 4) - len(allone) - len(zero)}
    sec.check_equal("counts", counts, expected, note="expected counts are the orbit sizes of the listed classes")
    return sec


def certificates_section() -> Section:
    sec = Section("certificates")
    for b in cert.appendix_blocks():
        q = b["quadruple"]
        ev = cert.certify_non_forcing(q, b["n"], b["signs"])
        expected = cert.KERNEL_RESTRICTED if b["n"] == 4 else cert.COROLLARY
        problems = cert.check_evidence(ev.to_json())
        sec.add(f"certify/{','.join(q)}/n={b['n']}", ev.verdict == expected and not problems,
                ev.verdict, expected, note="; ".join(problems) or ev.summary())
    special = ["1432", "2341", "3214", "4123"]
    value, orth = cert.check_witness_vector(special, 4, [1, 1, 1, 1], [-23, 42, -23, 128, 112, 128, 0, 8, 0])
    sec.add("certify/1432,2341,3214,4123/w_minus", value == -115456 and orth, value, -115456)
    return sec


def reproduce(only=None, mc_trials: int = 0, seed: int = 0) -> tuple[dict, list[Section]]:
    only = list(only or SECTIONS)
    start = time.time()
    sections: list[Section] = []
    errata: list = []
    if "enumeration" in only:
        sections.append(enumeration_section())
    if "trichotomy" in only:
        sections.append(trichotomy_section())
    if "certificates" in only:
        sections.append(certificates_section())
    if "exceptional" in only:
        for c in (1, 2):
            secs, _, errs = exceptional_sections(c, mc_trials, seed)
            sections.extend(secs)
            errata.extend(errs)
    if "appendix" in only:
        sections.append(cert.verify_appendix())
    report = run_report("reproduce", {"only": only, "mc_trials": mc_trials}, sections,
                        seeds=[seed] if mc_trials else [], wall=time.time() - start,
                        extra={"errata": errata})
    return report, sections


def cmd_reproduce(a) -> int:
    bad = [s for s in a.only or [] if s not in SECTIONS]
    if bad:
        raise UsageError(f"unknown section(s) {bad}; choose from {list(SECTIONS)}")
    report, sections = reproduce(a.only, a.mc_trials, a.seed)
    for s in sections:
        print(("PASS " if s.passed else "FAIL ") + s.summary())
        for item in s.failures():
            print(f"    {item.id}: got {jsonable(item.value)!s:.120} expected {jsonable(item.expected)!s:.120}")
    for e in report.get("errata", []):
        print(f"note {e['id']}: {e.get('note', '')}")
    total = sum(len(s.items) for s in sections)
    print(f"{'PASS' if report['pass'] else 'FAIL'}: {total} items, {report['timing']['wall_seconds']} s")
    if a.json:
        _emit(report, a.json)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permforce", description="Exact checks for quasirandom-forcing of 4-point quadruples.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("density", help="pattern density in a permutation or step permuton")
    s.add_argument("--sigma", required=True)
    s.add_argument("--perm")
    s.add_argument("--permuton", help="uniformK or a JSON file with k and A")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("gradient", help="exact gradient of h^n_sigma at 0")
    s.add_argument("--sigma", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--paper-layout", action="store_true", help="single row of p/q entries")
    s.add_argument("--json")
    s.set_defaults(func=cmd_gradient)

    s = sub.add_parser("hessian", help="exact Hessian or quadratic-form combination at 0")
    s.add_argument("--sigma")
    s.add_argument("--quad")
    s.add_argument("--signs")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--eigenvalues", action="store_true")
    s.add_argument("--json")
    s.set_defaults(func=cmd_hessian)

    s = sub.add_parser("certify", help="second-order non-forcing certificate")
    s.add_argument("--quad", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--signs", help="++++, ++-- or four rationals; default is the gradient kernel")
    s.add_argument("--auto-n", action="store_true", help="try n = 4..7")
    s.add_argument("--json")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("enumerate", help="all-one and zero-combination symmetry classes")
    s.add_argument("--json")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("exceptional", help="solve and check an exceptional case")
    s.add_argument("--case", type=int, choices=(1, 2), required=True)
    s.add_argument("--emit", help="write the witness bundle JSON")
    s.add_argument("--report", help="write the verification report JSON")
    s.add_argument("--mc-trials", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_exceptional)

    s = sub.add_parser("sample", help="Monte Carlo pattern frequencies")
    s.add_argument("--permuton", required=True)
    s.add_argument("--m", type=int, default=4)
    s.add_argument("--trials", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--check", action="store_true", help="exit 1 if some |z| > 5")
    s.add_argument("--json")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("reproduce", help="run every check and aggregate a report")
    s.add_argument("--only", nargs="+", metavar="SECTION", help=f"subset of {', '.join(SECTIONS)}")
    s.add_argument("--mc-trials", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json")
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, PermutationError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
